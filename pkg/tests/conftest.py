import numpy as np
import pytest

from topodecode.complexes import SimplicialComplex, hodge_laplacian


@pytest.fixture
def triangle_complex():
    """One filled triangle: 3 vertices, 3 edges, 1 two-simplex."""
    return SimplicialComplex(3, {1: [(0, 1), (0, 2), (1, 2)], 2: [(0, 1, 2)]})


@pytest.fixture
def triangle_laps(triangle_complex):
    return {k: hodge_laplacian(triangle_complex, k) for k in range(3)}


def make_hd_dataset(neurons, labels, t_end, label_rate=10.0):
    """Hand-built head-direction dataset from plain lists."""
    from topodecode.spikes import SpikeDataset

    labels = np.asarray(labels, dtype=np.float64)
    times = np.arange(labels.size) / label_rate
    return SpikeDataset(
        neurons=[np.asarray(n, dtype=np.float64) for n in neurons],
        label_times=times,
        labels=labels,
        kind="hd",
        t_start=0.0,
        t_end=t_end,
    )
