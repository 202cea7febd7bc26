"""Synthetic behavioral trajectories and Poisson spike trains.

Head-direction cells follow a von Mises tuning curve around a wrapped
random-walk heading; grid cells fire along hexagonally periodic rate maps
while the animal performs a smooth bounded walk in a square arena. Spikes
are drawn by thinning a homogeneous Poisson process at the peak rate, which
is exact for the piecewise-constant rate traces used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spikes import SpikeDataset

__all__ = [
    "HdSimConfig",
    "GridModule",
    "GridSimConfig",
    "simulate_hd",
    "simulate_grid",
    "hd_rate",
    "grid_rate",
]


@dataclass
class HdSimConfig:
    n_neurons: int = 30
    peak_rate: float = 20.0
    kappa: float = 4.0
    preferred_deg: np.ndarray | None = None
    step_std_deg: float = 3.0
    duration: float = 600.0
    label_rate: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if self.peak_rate <= 0:
            raise ValueError("peak_rate must be positive")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.preferred_deg is None:
            self.preferred_deg = np.arange(self.n_neurons) * 360.0 / self.n_neurons
        else:
            self.preferred_deg = np.asarray(self.preferred_deg, dtype=np.float64)
            if self.preferred_deg.size != self.n_neurons:
                raise ValueError("need one preferred direction per neuron")


def hd_rate(theta_deg, preferred_deg, peak_rate, kappa):
    """Von Mises tuning: peak_rate * exp(kappa * (cos(theta - pref) - 1))."""
    delta = np.deg2rad(np.asarray(theta_deg) - preferred_deg)
    return peak_rate * np.exp(kappa * (np.cos(delta) - 1.0))


def _thin_spikes(rng, duration, peak_rate, rate_trace, sample_rate):
    """Inhomogeneous Poisson times for a piecewise-constant rate trace."""
    if peak_rate <= 0:
        return np.empty(0)
    n_candidates = rng.poisson(peak_rate * duration)
    times = np.sort(rng.uniform(0.0, duration, n_candidates))
    idx = np.minimum(
        np.floor(times * sample_rate).astype(np.int64), rate_trace.size - 1
    )
    accept = rng.uniform(size=n_candidates) < rate_trace[idx] / peak_rate
    return times[accept]


def simulate_hd(cfg: HdSimConfig) -> SpikeDataset:
    """Wrapped random-walk heading and von Mises Poisson spike trains."""
    rng = np.random.default_rng(cfg.seed)
    n_samples = int(round(cfg.duration * cfg.label_rate))
    steps = rng.normal(0.0, cfg.step_std_deg, n_samples)
    steps[0] = rng.uniform(0.0, 360.0)
    theta = np.remainder(np.cumsum(steps), 360.0)
    label_times = np.arange(n_samples) / cfg.label_rate

    neurons = []
    peak = cfg.peak_rate
    if peak <= 0:
        neurons = [np.empty(0) for _ in range(cfg.n_neurons)]
    else:
        for pref in cfg.preferred_deg:
            trace = hd_rate(theta, pref, peak, cfg.kappa)
            neurons.append(
                _thin_spikes(rng, cfg.duration, peak, trace, cfg.label_rate)
            )
    return SpikeDataset(
        neurons=neurons,
        label_times=label_times,
        labels=theta,
        kind="hd",
        t_start=0.0,
        t_end=cfg.duration,
    )


@dataclass
class GridModule:
    """One grid module: shared field spacing and orientation, per-cell phases."""

    scale_cm: float
    orientation_deg: float = 0.0
    n_cells: int = 24
    phases: np.ndarray | None = None


@dataclass
class GridSimConfig:
    modules: list[GridModule] = field(
        default_factory=lambda: [
            GridModule(scale_cm=40.0, orientation_deg=0.0, n_cells=24),
            GridModule(scale_cm=60.0, orientation_deg=15.0, n_cells=24),
        ]
    )
    arena_cm: float = 150.0
    speed: float = 15.0
    peak_rate: float = 20.0
    duration: float = 600.0
    seed: int = 0
    sample_rate: float = 50.0

    def __post_init__(self):
        scales = [m.scale_cm for m in self.modules]
        if len(set(scales)) != len(scales):
            raise ValueError("module scales must be distinct")


def _wave_vectors(scale_cm, orientation_deg):
    """Three plane-wave vectors at 60 degree separations for a hexagonal
    field of spacing scale_cm."""
    magnitude = 4.0 * np.pi / (np.sqrt(3.0) * scale_cm)
    angles = np.deg2rad(orientation_deg + np.array([0.0, 60.0, 120.0]))
    return magnitude * np.column_stack([np.cos(angles), np.sin(angles)])


def _lattice_basis(scale_cm, orientation_deg):
    angles = np.deg2rad(orientation_deg + np.array([30.0, 90.0]))
    return scale_cm * np.column_stack([np.cos(angles), np.sin(angles)])


def grid_rate(xy, phase, scale_cm, orientation_deg, peak_rate):
    """Rectified sum of three plane-wave cosines, peaking at the phase point
    and its lattice translates."""
    xy = np.asarray(xy, dtype=np.float64)
    kvecs = _wave_vectors(scale_cm, orientation_deg)
    shifted = xy - np.asarray(phase)
    g = np.cos(shifted @ kvecs.T).sum(axis=-1)
    return peak_rate * np.maximum(g, 0.0) / 3.0


def _module_phases(module: GridModule, rng) -> np.ndarray:
    if module.phases is not None:
        return np.asarray(module.phases, dtype=np.float64)
    basis = _lattice_basis(module.scale_cm, module.orientation_deg)
    uv = rng.uniform(0.0, 1.0, (module.n_cells, 2))
    return uv @ basis


def _bounded_walk(rng, duration, arena, speed, sample_rate):
    """Smooth random walk: velocity relaxes toward zero with fresh noise
    each step (tuned so the mean speed matches), reflected at the walls."""
    n = int(round(duration * sample_rate))
    dt = 1.0 / sample_rate
    tau = 1.0
    # Per-axis stationary std chosen so the 2-D mean speed equals `speed`.
    std_v = speed / np.sqrt(np.pi / 2.0)
    sigma = std_v * np.sqrt(2.0 / tau)
    pos = np.empty((n, 2))
    pos[0] = arena / 2.0
    vel = rng.normal(0.0, std_v, 2)
    for t in range(1, n):
        vel = vel - vel * dt / tau + sigma * np.sqrt(dt) * rng.normal(size=2)
        nxt = pos[t - 1] + vel * dt
        for axis in range(2):
            if nxt[axis] < 0.0:
                nxt[axis] = -nxt[axis]
                vel[axis] = -vel[axis]
            elif nxt[axis] > arena:
                nxt[axis] = 2.0 * arena - nxt[axis]
                vel[axis] = -vel[axis]
        pos[t] = np.clip(nxt, 0.0, arena)
    return pos


def simulate_grid(cfg: GridSimConfig) -> SpikeDataset:
    """Bounded smooth trajectory and hexagonal-field Poisson spike trains."""
    rng = np.random.default_rng(cfg.seed)
    trajectory = _bounded_walk(
        rng, cfg.duration, cfg.arena_cm, cfg.speed, cfg.sample_rate
    )
    label_times = np.arange(trajectory.shape[0]) / cfg.sample_rate

    neurons = []
    for module in cfg.modules:
        phases = _module_phases(module, rng)
        for phase in phases:
            trace = grid_rate(
                trajectory, phase, module.scale_cm, module.orientation_deg,
                cfg.peak_rate,
            )
            neurons.append(
                _thin_spikes(rng, cfg.duration, cfg.peak_rate, trace, cfg.sample_rate)
            )
    return SpikeDataset(
        neurons=neurons,
        label_times=label_times,
        labels=trajectory,
        kind="grid",
        t_start=0.0,
        t_end=cfg.duration,
    )
