"""Multi-layer Elman recurrent network on flattened feature sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ElmanLayer", "RnnStack", "cell_step", "rnn_forward", "build_rnn_stack"]

_ACTIVATIONS = {
    "tanh": np.tanh,
    "relu": lambda x: np.maximum(x, 0.0),
    "identity": lambda x: x,
}


@dataclass
class ElmanLayer:
    """One recurrent cell: h_t = act(w_h z_t + b_h + w_c h_{t-1} + b_c)."""

    w_h: np.ndarray
    w_c: np.ndarray
    b_h: np.ndarray
    b_c: np.ndarray
    activation: str = "tanh"

    @property
    def hidden_size(self) -> int:
        return self.w_c.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_h.shape[1]


@dataclass
class RnnStack:
    """Stacked Elman layers with a linear-plus-activation readout."""

    layers: list[ElmanLayer]
    w_out: np.ndarray
    b_out: np.ndarray
    out_activation: str = "identity"

    @property
    def output_size(self) -> int:
        return self.w_out.shape[0]


def cell_step(layer: ElmanLayer, z_t: np.ndarray, h_prev: np.ndarray) -> np.ndarray:
    """Advance one hidden state. Start sequences from h_prev = 0."""
    z_t = np.asarray(z_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    if z_t.shape[0] != layer.input_size:
        raise ValueError(f"input size {z_t.shape[0]} != {layer.input_size}")
    if h_prev.shape[0] != layer.hidden_size:
        raise ValueError(f"hidden size {h_prev.shape[0]} != {layer.hidden_size}")
    act = _ACTIVATIONS[layer.activation]
    return act(layer.w_h @ z_t + layer.b_h + layer.w_c @ h_prev + layer.b_c)


def rnn_forward(stack: RnnStack, sequence) -> np.ndarray:
    """Run the stack over a sequence of input vectors and read out from the
    top layer's final hidden state."""
    sequence = [np.asarray(z, dtype=np.float64) for z in sequence]
    if not sequence:
        raise ValueError("empty input sequence")
    lengths = {z.shape[0] for z in sequence}
    if len(lengths) != 1:
        raise ValueError(f"inconsistent vector lengths in sequence: {lengths}")
    inputs = sequence
    h = None
    for layer in stack.layers:
        h = np.zeros(layer.hidden_size)
        outputs = []
        for z_t in inputs:
            h = cell_step(layer, z_t, h)
            outputs.append(h)
        inputs = outputs
    act = _ACTIVATIONS[stack.out_activation]
    return act(stack.w_out @ h + stack.b_out)


def build_rnn_stack(
    input_size: int,
    hidden_size: int,
    n_layers: int,
    output_size: int,
    rng=None,
    activation: str = "tanh",
    out_activation: str = "identity",
) -> RnnStack:
    """Seeded init: uniform +-1/sqrt(fan_in) per matrix, +-1/sqrt(H) biases."""
    if rng is None:
        rng = np.random.default_rng(0)
    layers = []
    in_dim = input_size
    for _ in range(n_layers):
        bound_in = 1.0 / np.sqrt(in_dim)
        bound_h = 1.0 / np.sqrt(hidden_size)
        layers.append(
            ElmanLayer(
                w_h=rng.uniform(-bound_in, bound_in, (hidden_size, in_dim)),
                w_c=rng.uniform(-bound_h, bound_h, (hidden_size, hidden_size)),
                b_h=rng.uniform(-bound_h, bound_h, hidden_size),
                b_c=rng.uniform(-bound_h, bound_h, hidden_size),
                activation=activation,
            )
        )
        in_dim = hidden_size
    bound = 1.0 / np.sqrt(hidden_size)
    return RnnStack(
        layers=layers,
        w_out=rng.uniform(-bound, bound, (output_size, hidden_size)),
        b_out=rng.uniform(-bound, bound, output_size),
        out_activation=out_activation,
    )
