"""Decoder models: the simplicial-convolutional recurrent network and the
feedforward / recurrent / graph baselines, behind one predict interface.

All models are parameterized by named ``autodiff.Var`` leaves so a single
reverse pass yields every gradient. Plain-array views of the simplicial
stack and the recurrent stack are exposed for inspection and serve as an
independent forward oracle in the tests.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .complexes import (
    SimplicialComplex,
    coactivity_matrix,
    complex_from_json,
    complex_to_json,
)
from .filters import ScLayer, ScLayerStack, SimplicialFilter, _init_filter, complex_laplacians
from .recurrent import ElmanLayer, RnnStack, build_rnn_stack
from .spikes import SpikeDataset, bin_labels, bin_spikes, binarize_rows

__all__ = [
    "PreparedData",
    "prepare",
    "ScrnnModel",
    "FfnnModel",
    "RnnModel",
    "BaselineModel",
    "build_model",
    "build_baseline",
    "scrnn_predict",
    "encode_angle",
    "decode_angle",
    "decode_angles",
    "decode_positions",
    "save_checkpoint",
    "load_checkpoint",
]

ARCHS = ("scrnn", "ffnn", "rnn", "gnn")


@dataclass
class PreparedData:
    """Binned, binarized, and labeled data ready for window-based decoding."""

    kind: str
    counts: np.ndarray
    bits: np.ndarray
    label_values: np.ndarray
    targets: np.ndarray
    n_test: int
    seq_len: int
    n_col: int
    train_starts: np.ndarray
    test_starts: np.ndarray
    complex: SimplicialComplex | None = None
    act: dict | None = None
    norm: tuple | None = None

    @property
    def n_bins(self) -> int:
        return self.counts.shape[1]

    def starts(self, split: str) -> np.ndarray:
        if split == "train":
            return self.train_starts
        if split in ("test", "validation"):
            return self.test_starts
        raise ValueError(f"unknown split {split!r}")

    def window_labels(self, starts) -> np.ndarray:
        """Ground-truth label at the last bin of each window."""
        last = np.asarray(starts) + self.seq_len - 1
        return self.label_values[last]


def encode_angle(theta_deg):
    """Angle -> (cos, sin) regression target."""
    rad = np.deg2rad(np.asarray(theta_deg, dtype=np.float64))
    return np.stack([np.cos(rad), np.sin(rad)])


def decode_angle(y) -> float:
    """2-vector -> angle in [0, 360) degrees; rejects the zero vector."""
    y = np.asarray(y, dtype=np.float64)
    if y[0] == 0.0 and y[1] == 0.0:
        raise ValueError("cannot decode an angle from the zero vector")
    return float(np.remainder(np.degrees(np.arctan2(y[1], y[0])), 360.0))


def decode_angles(y2n: np.ndarray) -> np.ndarray:
    """Columns of a (2, n) output matrix -> angles in degrees."""
    if np.any((y2n[0] == 0.0) & (y2n[1] == 0.0)):
        raise ValueError("cannot decode an angle from the zero vector")
    return np.remainder(np.degrees(np.arctan2(y2n[1], y2n[0])), 360.0)


def decode_positions(y2n: np.ndarray, norm) -> np.ndarray:
    """Columns of a (2, n) normalized output -> (n, 2) positions in cm."""
    (x0, xs), (y0, ys) = norm
    return np.column_stack([y2n[0] * xs + x0, y2n[1] * ys + y0])


def prepare(
    dataset: SpikeDataset,
    cfg,
    arch: str = "scrnn",
    complex_: SimplicialComplex | None = None,
) -> PreparedData:
    """Bin, binarize, and label a dataset; build the functional complex from
    the training columns for the simplicial architectures.

    The held-out block is the first ``split[0]`` fraction of bins; training
    windows and the complex use only the remaining columns. Passing
    ``complex_`` (e.g. from a checkpoint) skips the rebuild.
    """
    if arch not in ARCHS:
        raise ValueError(f"unknown architecture {arch!r}")
    count_matrix = bin_spikes(dataset, cfg.t_bin)
    bits = binarize_rows(count_matrix, cfg.p)
    labels = bin_labels(dataset, cfg.t_bin)
    counts = count_matrix.counts
    n_bins = counts.shape[1]
    n_test = int(round(cfg.split[0] * n_bins))
    seq, n_col = cfg.seq_len, cfg.n_col
    if n_test < seq + n_col - 1 or n_bins - n_test < seq + n_col - 1:
        raise ValueError("split blocks too short for the window length")

    test_starts = np.arange(0, n_test - seq - n_col + 2)
    train_starts = np.arange(n_test, n_bins - seq - n_col + 2)

    norm = None
    if dataset.kind == "hd":
        targets = encode_angle(labels.values)
    else:
        xy = labels.values
        train_bins = xy[n_test:]
        mins = train_bins.min(axis=0)
        spans = np.maximum(train_bins.max(axis=0) - mins, 1e-9)
        norm = ((float(mins[0]), float(spans[0])), (float(mins[1]), float(spans[1])))
        targets = ((xy - mins) / spans).T.copy()

    needs_complex = arch in ("scrnn", "gnn")
    act = None
    if needs_complex:
        if complex_ is None:
            k_max = 1 if arch == "gnn" else cfg.k_max
            complex_ = build_complex_from_bits(bits.bits, k_max, range(n_test, n_bins))
        act = {
            k: coactivity_matrix(complex_, bits.bits, k)
            for k in range(1, complex_.dim + 1)
        }
    else:
        complex_ = None

    return PreparedData(
        kind=dataset.kind,
        counts=counts,
        bits=bits.bits,
        label_values=labels.values,
        targets=targets,
        n_test=n_test,
        seq_len=seq,
        n_col=n_col,
        train_starts=train_starts,
        test_starts=test_starts,
        complex=complex_,
        act=act,
        norm=norm,
    )


def build_complex_from_bits(bits, k_max, columns):
    from .complexes import build_complex

    return build_complex(bits, k_max, columns)


def _dropout_mask(rng, shape, rate):
    return (rng.random(shape) >= rate) / (1.0 - rate)


def _rnn_forward_var(params, n_layers, seq_inputs, training, dropout, rng):
    """Shared Elman-stack graph builder; inputs are (dim, batch) columns."""
    batch = seq_inputs[0].value.shape[1]
    for j in range(n_layers):
        w_h = params[f"rnn.l{j}.w_h"]
        w_c = params[f"rnn.l{j}.w_c"]
        b_h = params[f"rnn.l{j}.b_h"]
        b_c = params[f"rnn.l{j}.b_c"]
        hidden = w_c.value.shape[0]
        h = ad.var(np.zeros((hidden, batch)))
        outputs = []
        for z_t in seq_inputs:
            pre = ad.add(
                ad.add(ad.matmul(w_h, z_t), b_h),
                ad.add(ad.matmul(w_c, h), b_c),
            )
            h = ad.tanh(pre)
            outputs.append(h)
        if training and dropout > 0.0 and j < n_layers - 1:
            outputs = [
                ad.mul_mask(o, _dropout_mask(rng, o.value.shape, dropout))
                for o in outputs
            ]
        seq_inputs = outputs
    return ad.add(ad.matmul(params["head.w"], seq_inputs[-1]), params["head.b"])


class ScrnnModel:
    """Simplicial convolution layers feeding a stacked Elman RNN."""

    def __init__(self, complex_, cfg, arch="scrnn", params=None):
        self.arch = arch
        self.kind = cfg.kind
        self.complex = complex_
        self.sc_layers = cfg.sc_layers
        self.n_filters = cfg.n_filters
        self.degree = cfg.degree
        self.seq_len = cfg.seq_len
        self.n_col = cfg.n_col
        self.nn_layers = cfg.nn_layers
        self.hidden_size = cfg.hidden_size
        self.dropout = cfg.dropout
        self.laps = complex_laplacians(complex_)
        self.laps_float = {
            k: (lap.lower.astype(np.float64), lap.upper.astype(np.float64))
            for k, lap in self.laps.items()
        }
        self.params = params if params is not None else self._init_params(cfg)
        self._term_cache = None

    @property
    def input_width(self) -> int:
        return sum(self.complex.n_simplices(k) for k in range(self.complex.dim + 1))

    def _init_params(self, cfg):
        rng = np.random.default_rng(cfg.seed)
        params = {}
        top = self.complex.dim
        for li in range(self.sc_layers):
            for fi in range(self.n_filters):
                for k in range(top + 1):
                    filt = _init_filter(k, top, self.degree, rng)
                    base = f"sc.l{li}.f{fi}.k{k}"
                    params[f"{base}.w0"] = ad.var(filt.w0)
                    for i, w in enumerate(filt.w_lower, start=1):
                        params[f"{base}.low{i}"] = ad.var(w)
                    for i, w in enumerate(filt.w_upper, start=1):
                        params[f"{base}.up{i}"] = ad.var(w)
        stack = build_rnn_stack(
            self.input_width, self.hidden_size, self.nn_layers, 2, rng
        )
        for j, layer in enumerate(stack.layers):
            params[f"rnn.l{j}.w_h"] = ad.var(layer.w_h)
            params[f"rnn.l{j}.w_c"] = ad.var(layer.w_c)
            params[f"rnn.l{j}.b_h"] = ad.var(layer.b_h.reshape(-1, 1))
            params[f"rnn.l{j}.b_c"] = ad.var(layer.b_c.reshape(-1, 1))
        params["head.w"] = ad.var(stack.w_out)
        params["head.b"] = ad.var(stack.b_out.reshape(-1, 1))
        return params

    def _filter_term_names(self, li, fi, k):
        """Weight names in the fixed term order: identity, lower powers,
        upper powers (boundary dimensions omit the absent half)."""
        base = f"sc.l{li}.f{fi}.k{k}"
        names = [f"{base}.w0"]
        if k >= 1:
            names += [f"{base}.low{i}" for i in range(1, self.degree + 1)]
        if k < self.complex.dim:
            names += [f"{base}.up{i}" for i in range(1, self.degree + 1)]
        return names

    def _apply_filter_var(self, li, fi, k, x):
        base = f"sc.l{li}.f{fi}.k{k}"
        acc = ad.scale(self.params[f"{base}.w0"], x)
        lower, upper = self.laps_float[k]
        if k >= 1:
            power = x
            for i in range(1, self.degree + 1):
                power = ad.spmm(lower, power)
                acc = ad.add(acc, ad.scale(self.params[f"{base}.low{i}"], power))
        if k < self.complex.dim:
            power = x
            for i in range(1, self.degree + 1):
                power = ad.spmm(upper, power)
                acc = ad.add(acc, ad.scale(self.params[f"{base}.up{i}"], power))
        return acc

    def _input_terms(self, prep: PreparedData):
        """Laplacian powers of the input cochains over all bins.

        The first layer's filters only scale these matrices, so they are
        computed once per dataset and sliced per batch; column slices of a
        sparse product equal the product of the sliced input.
        """
        import weakref

        if self._term_cache is not None:
            ref, terms = self._term_cache
            if ref() is prep:
                return terms
        top = self.complex.dim
        terms = {}
        for k in range(top + 1):
            base = (
                prep.counts.astype(np.float64)
                if k == 0
                else prep.act[k].astype(np.float64)
            )
            lower, upper = self.laps_float[k]
            per_dim = [base]
            if k >= 1:
                power = base
                for _ in range(self.degree):
                    power = lower @ power
                    per_dim.append(power)
            if k < top:
                power = base
                for _ in range(self.degree):
                    power = upper @ power
                    per_dim.append(power)
            terms[k] = np.stack(per_dim)
        self._term_cache = (weakref.ref(prep), terms)
        return terms

    def _sc_forward(self, term_slices):
        top = self.complex.dim
        feats = [
            {
                k: ad.relu(
                    ad.lincomb(
                        [
                            self.params[name]
                            for name in self._filter_term_names(0, fi, k)
                        ],
                        term_slices[k][0],
                        term_slices[k][1],
                    )
                )
                for k in range(top + 1)
            }
            for fi in range(self.n_filters)
        ]
        for li in range(1, self.sc_layers):
            feats = [
                {
                    k: ad.relu(
                        ad.add_n(
                            [
                                self._apply_filter_var(li, fi, k, feats[g][k])
                                for fi in range(self.n_filters)
                            ]
                        )
                    )
                    for k in range(top + 1)
                }
                for g in range(self.n_filters)
            ]
        outs = {
            k: ad.add_n([feats[g][k] for g in range(self.n_filters)])
            for k in range(top + 1)
        }
        if self.n_col > 1:
            outs[0] = ad.sum_col_blocks(outs[0], self.n_col)
        return ad.concat_rows([outs[k] for k in range(top + 1)])

    def _batch_inputs(self, prep: PreparedData, starts):
        starts = np.asarray(starts)
        bin_order = np.concatenate(
            [starts + t for t in range(self.seq_len)]
        )  # step-major
        col_idx = (bin_order[:, None] + np.arange(self.n_col)[None, :]).reshape(-1)
        terms = self._input_terms(prep)
        term_slices = {}
        for k in range(self.complex.dim + 1):
            sliced = terms[k][:, :, col_idx if k == 0 else bin_order]
            shape = sliced.shape[1:]
            term_slices[k] = (
                np.ascontiguousarray(sliced).reshape(sliced.shape[0], -1),
                shape,
            )
        targets = prep.targets[:, starts + self.seq_len - 1]
        return term_slices, targets

    def forward(self, prep, starts, training=False, rng=None):
        """Build the full graph; returns (prediction Var, targets array)."""
        term_slices, targets = self._batch_inputs(prep, starts)
        z = self._sc_forward(term_slices)
        batch = len(starts)
        seq_inputs = [
            ad.slice_cols(z, t * batch, (t + 1) * batch) for t in range(self.seq_len)
        ]
        pred = _rnn_forward_var(
            self.params, self.nn_layers, seq_inputs, training, self.dropout, rng
        )
        return pred, targets

    def loss_batch(self, prep, starts, training=False, rng=None):
        pred, targets = self.forward(prep, starts, training, rng)
        return ad.mse(pred, targets), pred

    def predict(self, prep, starts, chunk=256) -> np.ndarray:
        """Model outputs for a list of window starts, shape (2, n)."""
        starts = np.asarray(starts)
        outputs = []
        for lo in range(0, len(starts), chunk):
            pred, _ = self.forward(prep, starts[lo:lo + chunk])
            outputs.append(pred.value)
        return np.concatenate(outputs, axis=1)

    def sc_stack(self) -> ScLayerStack:
        """Plain-array view of the simplicial filters."""
        top = self.complex.dim
        layers = []
        for li in range(self.sc_layers):
            filters = []
            for fi in range(self.n_filters):
                per_dim = {}
                for k in range(top + 1):
                    base = f"sc.l{li}.f{fi}.k{k}"
                    n_low = 0 if k == 0 else self.degree
                    n_up = 0 if k == top else self.degree
                    per_dim[k] = SimplicialFilter(
                        k=k,
                        degree=self.degree,
                        w0=float(self.params[f"{base}.w0"].value),
                        w_lower=np.array(
                            [
                                float(self.params[f"{base}.low{i}"].value)
                                for i in range(1, n_low + 1)
                            ]
                        ),
                        w_upper=np.array(
                            [
                                float(self.params[f"{base}.up{i}"].value)
                                for i in range(1, n_up + 1)
                            ]
                        ),
                    )
                filters.append(per_dim)
            layers.append(ScLayer(filters=filters))
        return ScLayerStack(layers=layers, activation="relu")

    def rnn_stack(self) -> RnnStack:
        """Plain-array view of the recurrent stack."""
        layers = [
            ElmanLayer(
                w_h=self.params[f"rnn.l{j}.w_h"].value,
                w_c=self.params[f"rnn.l{j}.w_c"].value,
                b_h=self.params[f"rnn.l{j}.b_h"].value.reshape(-1),
                b_c=self.params[f"rnn.l{j}.b_c"].value.reshape(-1),
            )
            for j in range(self.nn_layers)
        ]
        return RnnStack(
            layers=layers,
            w_out=self.params["head.w"].value,
            b_out=self.params["head.b"].value.reshape(-1),
        )


class FfnnModel:
    """Fully-connected baseline on the flattened count window."""

    arch = "ffnn"

    def __init__(self, input_width, cfg, params=None):
        self.kind = cfg.kind
        self.input_width = input_width
        self.seq_len = cfg.seq_len
        self.nn_layers = cfg.nn_layers
        self.layer_width = cfg.layer_width
        self.dropout = cfg.dropout
        self.params = params if params is not None else self._init_params(cfg)

    def _init_params(self, cfg):
        rng = np.random.default_rng(cfg.seed)
        params = {}
        in_dim = self.input_width
        for j in range(self.nn_layers):
            bound = 1.0 / np.sqrt(in_dim)
            params[f"fc.l{j}.w"] = ad.var(
                rng.uniform(-bound, bound, (self.layer_width, in_dim))
            )
            params[f"fc.l{j}.b"] = ad.var(np.zeros((self.layer_width, 1)))
            in_dim = self.layer_width
        bound = 1.0 / np.sqrt(in_dim)
        params["head.w"] = ad.var(rng.uniform(-bound, bound, (2, in_dim)))
        params["head.b"] = ad.var(np.zeros((2, 1)))
        return params

    def _batch_inputs(self, prep, starts):
        starts = np.asarray(starts)
        cols = (starts[:, None] + np.arange(self.seq_len)[None, :]).reshape(-1)
        window = prep.counts[:, cols].astype(np.float64)
        n = prep.counts.shape[0]
        x = window.reshape(n, len(starts), self.seq_len)
        x = np.transpose(x, (2, 0, 1)).reshape(self.seq_len * n, len(starts))
        targets = prep.targets[:, starts + self.seq_len - 1]
        return ad.var(x), targets

    def forward(self, prep, starts, training=False, rng=None):
        x, targets = self._batch_inputs(prep, starts)
        for j in range(self.nn_layers):
            x = ad.relu(
                ad.add(ad.matmul(self.params[f"fc.l{j}.w"], x), self.params[f"fc.l{j}.b"])
            )
            if training and self.dropout > 0.0:
                x = ad.mul_mask(x, _dropout_mask(rng, x.value.shape, self.dropout))
        pred = ad.add(ad.matmul(self.params["head.w"], x), self.params["head.b"])
        return pred, targets

    def loss_batch(self, prep, starts, training=False, rng=None):
        pred, targets = self.forward(prep, starts, training, rng)
        return ad.mse(pred, targets), pred

    def predict(self, prep, starts, chunk=256) -> np.ndarray:
        starts = np.asarray(starts)
        outputs = []
        for lo in range(0, len(starts), chunk):
            pred, _ = self.forward(prep, starts[lo:lo + chunk])
            outputs.append(pred.value)
        return np.concatenate(outputs, axis=1)


class RnnModel:
    """Elman baseline on raw per-bin count vectors."""

    arch = "rnn"

    def __init__(self, input_width, cfg, params=None):
        self.kind = cfg.kind
        self.input_width = input_width
        self.seq_len = cfg.seq_len
        self.nn_layers = cfg.nn_layers
        self.hidden_size = cfg.hidden_size
        self.dropout = cfg.dropout
        self.params = params if params is not None else self._init_params(cfg)

    def _init_params(self, cfg):
        rng = np.random.default_rng(cfg.seed)
        stack = build_rnn_stack(
            self.input_width, self.hidden_size, self.nn_layers, 2, rng
        )
        params = {}
        for j, layer in enumerate(stack.layers):
            params[f"rnn.l{j}.w_h"] = ad.var(layer.w_h)
            params[f"rnn.l{j}.w_c"] = ad.var(layer.w_c)
            params[f"rnn.l{j}.b_h"] = ad.var(layer.b_h.reshape(-1, 1))
            params[f"rnn.l{j}.b_c"] = ad.var(layer.b_c.reshape(-1, 1))
        params["head.w"] = ad.var(stack.w_out)
        params["head.b"] = ad.var(stack.b_out.reshape(-1, 1))
        return params

    def forward(self, prep, starts, training=False, rng=None):
        starts = np.asarray(starts)
        seq_inputs = [
            ad.var(prep.counts[:, starts + t].astype(np.float64))
            for t in range(self.seq_len)
        ]
        targets = prep.targets[:, starts + self.seq_len - 1]
        pred = _rnn_forward_var(
            self.params, self.nn_layers, seq_inputs, training, self.dropout, rng
        )
        return pred, targets

    def loss_batch(self, prep, starts, training=False, rng=None):
        pred, targets = self.forward(prep, starts, training, rng)
        return ad.mse(pred, targets), pred

    def predict(self, prep, starts, chunk=256) -> np.ndarray:
        starts = np.asarray(starts)
        outputs = []
        for lo in range(0, len(starts), chunk):
            pred, _ = self.forward(prep, starts[lo:lo + chunk])
            outputs.append(pred.value)
        return np.concatenate(outputs, axis=1)


BaselineModel = FfnnModel | RnnModel | ScrnnModel


def build_model(arch: str, prep: PreparedData, cfg):
    """Construct a decoder of the requested architecture on prepared data."""
    if arch == "scrnn":
        return ScrnnModel(prep.complex, cfg, arch="scrnn")
    if arch == "gnn":
        if prep.complex is None or prep.complex.dim > 1:
            raise ValueError("gnn baseline requires a complex capped at dimension 1")
        return ScrnnModel(prep.complex, cfg, arch="gnn")
    if arch == "ffnn":
        return FfnnModel(prep.counts.shape[0] * cfg.seq_len, cfg)
    if arch == "rnn":
        return RnnModel(prep.counts.shape[0], cfg)
    raise ValueError(f"unknown architecture {arch!r}")


def build_baseline(kind: str, prep: PreparedData, cfg) -> BaselineModel:
    """Baseline factory: kind in {'ffnn', 'rnn', 'gnn'}."""
    if kind not in ("ffnn", "rnn", "gnn"):
        raise ValueError(f"unknown baseline kind {kind!r}")
    return build_model(kind, prep, cfg)


def scrnn_predict(model: ScrnnModel, prep: PreparedData, start: int) -> np.ndarray:
    """Decode one window of ``seq_len`` consecutive bins starting at
    ``start``; the prediction targets the window's final bin."""
    last_valid = prep.n_bins - model.seq_len - model.n_col + 1
    if not 0 <= start <= last_valid:
        raise ValueError(f"window start {start} outside [0, {last_valid}]")
    return model.predict(prep, np.array([start]))[:, 0]


def predictions_to_labels(pred: np.ndarray, prep: PreparedData):
    """Raw (2, n) outputs -> decoded angles (deg) or positions (cm)."""
    if prep.kind == "hd":
        return decode_angles(pred)
    return decode_positions(pred, prep.norm)


def param_values(model) -> dict[str, np.ndarray]:
    return {name: np.array(p.value, copy=True) for name, p in model.params.items()}


def set_param_values(model, values: dict[str, np.ndarray]) -> None:
    for name, p in model.params.items():
        p.value = np.array(values[name], copy=True)


def _weight_entries(model):
    sc_entries, dense_entries = [], []
    for name in sorted(model.params):
        value = model.params[name].value
        if name.startswith("sc."):
            li, fi, kk, term = name.split(".")[1:]
            sc_entries.append(
                {
                    "layer": int(li[1:]) + 1,
                    "filter": int(fi[1:]) + 1,
                    "dim": int(kk[1:]),
                    "term": term,
                    "value": float(value),
                }
            )
        else:
            if name.startswith("rnn.") or name.startswith("fc."):
                layer = int(name.split(".")[1][1:])
                matrix = name.split(".")[2]
            else:  # head
                layer = getattr(model, "nn_layers", 0)
                matrix = "w_out" if name.endswith("w") else "b_out"
            arr = np.atleast_2d(value)
            if arr.shape[0] == 1 and value.ndim == 1:
                arr = arr.T
            rows, cols = arr.shape
            for r in range(rows):
                for c in range(cols):
                    dense_entries.append(
                        {
                            "layer": layer,
                            "matrix": matrix,
                            "row": r,
                            "col": c,
                            "value": float(arr[r, c]),
                        }
                    )
    return sc_entries, dense_entries


def save_checkpoint(dirpath, model, cfg) -> None:
    """Write complex dump (when present), weight JSON, and a config echo."""
    from .config import write_config

    os.makedirs(dirpath, exist_ok=True)
    if getattr(model, "complex", None) is not None:
        with open(os.path.join(dirpath, "complex.json"), "w", encoding="utf-8") as fh:
            fh.write(complex_to_json(model.complex))
    sc_entries, dense_entries = _weight_entries(model)
    payload = {"arch": model.arch, "sc": sc_entries, "dense": dense_entries}
    with open(os.path.join(dirpath, "weights.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
    write_config(cfg, os.path.join(dirpath, "config.txt"))


def _dense_params_from_entries(entries):
    grouped: dict[tuple, dict] = {}
    for e in entries:
        key = (e["layer"], e["matrix"])
        grouped.setdefault(key, {})[(e["row"], e["col"])] = e["value"]
    arrays = {}
    for (layer, matrix), cells in grouped.items():
        rows = max(r for r, _ in cells) + 1
        cols = max(c for _, c in cells) + 1
        arr = np.zeros((rows, cols))
        for (r, c), v in cells.items():
            arr[r, c] = v
        arrays[(layer, matrix)] = arr
    return arrays


def load_checkpoint(dirpath):
    """Rebuild (model, cfg) from a checkpoint directory."""
    from .config import read_config

    cfg = read_config(os.path.join(dirpath, "config.txt"))
    with open(os.path.join(dirpath, "weights.json"), "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    arch = payload["arch"]
    dense = _dense_params_from_entries(payload["dense"])

    params = {}
    for e in payload["sc"]:
        name = f"sc.l{e['layer'] - 1}.f{e['filter'] - 1}.k{e['dim']}.{e['term']}"
        params[name] = ad.var(e["value"])
    head_layer = None
    for (layer, matrix), arr in sorted(dense.items()):
        if matrix in ("w_out", "b_out"):
            head_layer = layer
            params["head.w" if matrix == "w_out" else "head.b"] = ad.var(arr)
        elif matrix in ("w", "b"):
            params[f"fc.l{layer}.{matrix}"] = ad.var(arr)
        else:
            params[f"rnn.l{layer}.{matrix}"] = ad.var(arr)

    if arch in ("scrnn", "gnn"):
        with open(os.path.join(dirpath, "complex.json"), "r", encoding="utf-8") as fh:
            complex_ = complex_from_json(fh.read())
        model = ScrnnModel(complex_, cfg, arch=arch, params=params)
    elif arch == "ffnn":
        input_width = dense[(0, "w")].shape[1]
        model = FfnnModel(input_width, cfg, params=params)
    elif arch == "rnn":
        input_width = dense[(0, "w_h")].shape[1]
        model = RnnModel(input_width, cfg, params=params)
    else:
        raise ValueError(f"unknown architecture {arch!r} in checkpoint")
    if head_layer is None:
        raise ValueError("checkpoint missing output head weights")
    return model, cfg
