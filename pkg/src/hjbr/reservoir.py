"""Leaky-rate recurrent reservoir: the plant being controlled.

The continuous dynamics are

    dv/dt = -alpha1 * v + W_E @ x + W_r @ phi(v)

integrated with explicit Euler at a fixed step.  A subset of the recurrent
entries (``plastic_idx``) is treated as the control input by the rest of the
package; everything else in ``W_r`` is the fixed part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from hjbr.data import LabeledSeriesDataset


class DimensionError(ValueError):
    pass


class DivergenceError(FloatingPointError):
    """A simulated quantity became non-finite or exceeded the guard norm."""

    def __init__(self, message: str, step_index: int | None = None, window=None):
        super().__init__(message)
        self.step_index = step_index
        self.window = window


def _logistic0(v):
    # centred so that phi(0) = 0
    return 1.0 / (1.0 + np.exp(-v)) - 0.5


NONLINEARITIES = {
    "tanh": np.tanh,
    "logistic": _logistic0,
}


@dataclass
class ReservoirModel:
    W_E: np.ndarray
    W_r: np.ndarray
    W_D: np.ndarray
    plastic_idx: np.ndarray
    alpha1: float = 1.0
    phi: str = "tanh"
    _fixed: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.W_E = np.atleast_2d(np.asarray(self.W_E, dtype=float))
        self.W_r = np.atleast_2d(np.asarray(self.W_r, dtype=float))
        self.W_D = np.atleast_2d(np.asarray(self.W_D, dtype=float))
        idx = np.asarray(self.plastic_idx, dtype=np.intp).reshape(-1, 2)
        self.plastic_idx = idx
        n_r = self.W_r.shape[0]
        if self.W_r.shape != (n_r, n_r):
            raise DimensionError(f"W_r must be square, got {self.W_r.shape}")
        if self.W_E.shape[0] != n_r:
            raise DimensionError(f"W_E has {self.W_E.shape[0]} rows, expected {n_r}")
        if self.W_D.shape[1] != n_r:
            raise DimensionError(f"W_D has {self.W_D.shape[1]} columns, expected {n_r}")
        if not self.alpha1 > 0:
            raise ValueError("alpha1 must be positive")
        if self.phi not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.phi!r}")
        if len(idx):
            if idx.min() < 0 or idx.max() >= n_r:
                raise ValueError("plastic index out of range")
            flat = idx[:, 0] * n_r + idx[:, 1]
            if len(np.unique(flat)) != len(flat):
                raise ValueError("plastic indices must be distinct")
        fixed = self.W_r.copy()
        fixed[idx[:, 0], idx[:, 1]] = 0.0
        self._fixed = fixed

    @property
    def n_r(self) -> int:
        return self.W_r.shape[0]

    @property
    def n_in(self) -> int:
        return self.W_E.shape[1]

    @property
    def c(self) -> int:
        return self.W_D.shape[0]

    @property
    def n_plastic(self) -> int:
        return len(self.plastic_idx)

    @property
    def W_fixed(self) -> np.ndarray:
        """W_r with every plastic entry zeroed."""
        return self._fixed

    def nonlinearity(self, v):
        return NONLINEARITIES[self.phi](v)

    def plastic_values(self) -> np.ndarray:
        return self.W_r[self.plastic_idx[:, 0], self.plastic_idx[:, 1]].copy()

    def with_decoder(self, W_D) -> "ReservoirModel":
        return replace(self, W_D=np.array(W_D, dtype=float))

    def zero_state(self) -> "ReservoirState":
        return ReservoirState(np.zeros(self.n_r))

    def save(self, path, **meta) -> None:
        """Write an ``.npz``; ``meta`` (JSON-serialisable) rides along."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                W_E=self.W_E,
                W_r=self.W_r,
                W_D=self.W_D,
                plastic_idx=self.plastic_idx,
                alpha1=np.float64(self.alpha1),
                phi=np.str_(self.phi),
                meta=np.str_(json.dumps(meta, sort_keys=True)),
            )

    @classmethod
    def load(cls, path, with_meta: bool = False):
        with np.load(path, allow_pickle=False) as z:
            model = cls(
                W_E=z["W_E"],
                W_r=z["W_r"],
                W_D=z["W_D"],
                plastic_idx=z["plastic_idx"],
                alpha1=float(z["alpha1"]),
                phi=str(z["phi"]),
            )
            meta = json.loads(str(z["meta"])) if "meta" in z.files else {}
        return (model, meta) if with_meta else model


@dataclass(frozen=True)
class ReservoirState:
    v: np.ndarray


def select_plastic(n_r: int, n_plastic: int, mode: str = "random", rng=None) -> np.ndarray:
    """Pick ``n_plastic`` recurrent positions, returned as an (N, 2) array.

    ``mode='random'`` samples without replacement (order is the draw order);
    ``mode='first'`` takes the first N positions in row-major order.
    """
    total = n_r * n_r
    if not 0 < n_plastic <= total:
        raise ValueError(f"need 0 < n_plastic <= {total}, got {n_plastic}")
    if mode == "first":
        flat = np.arange(n_plastic)
    elif mode == "random":
        rng = np.random.default_rng(rng)
        flat = rng.choice(total, size=n_plastic, replace=False)
    else:
        raise ValueError(f"unknown plastic selection mode {mode!r}")
    return np.stack(np.divmod(flat, n_r), axis=1)


def make_reservoir(
    n_in: int,
    n_r: int,
    c: int,
    n_plastic: int,
    seed=0,
    spectral_radius: float = 0.9,
    input_scale: float = 1.0,
    alpha1: float = 1.0,
    phi: str = "tanh",
    plastic_mode: str = "random",
) -> ReservoirModel:
    """Random reservoir with zeroed plastic entries and a zero decoder.

    The fixed part of W_r is rescaled to ``spectral_radius`` after the plastic
    entries are cleared.
    """
    rng = np.random.default_rng(seed)
    W_E = rng.uniform(-input_scale, input_scale, size=(n_r, n_in))
    W_r = rng.uniform(-1.0, 1.0, size=(n_r, n_r))
    idx = select_plastic(n_r, n_plastic, plastic_mode, rng)
    W_r[idx[:, 0], idx[:, 1]] = 0.0
    radius = np.max(np.abs(np.linalg.eigvals(W_r)))
    if radius > 0:
        W_r *= spectral_radius / radius
    return ReservoirModel(W_E, W_r, np.zeros((c, n_r)), idx, alpha1, phi)


def step(state: ReservoirState, x, model: ReservoirModel, dt: float, step_index: int | None = None) -> ReservoirState:
    """One explicit-Euler step of the reservoir driven by input ``x``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.W_E.shape[1]:
        raise DimensionError(f"input has shape {x.shape}, expected ({model.n_in},)")
    v = state.v
    v_new = v + dt * (-model.alpha1 * v + model.W_E @ x + model.W_r @ model.nonlinearity(v))
    if not math.isfinite(v_new.sum()):
        where = "" if step_index is None else f" at step {step_index}"
        raise DivergenceError(f"reservoir state became non-finite{where}", step_index)
    return ReservoirState(v_new)


def decode(state: ReservoirState, model: ReservoirModel) -> np.ndarray:
    if state.v.shape != (model.W_D.shape[1],):
        raise DimensionError(f"state has shape {state.v.shape}, decoder expects {model.W_D.shape[1]}")
    return model.W_D @ state.v


def run_series(model: ReservoirModel, inputs: Iterable, dt: float) -> np.ndarray:
    """Reset to zero, drive with ``inputs`` and return the (n_l, n_r) state trajectory."""
    state = model.zero_state()
    out = []
    for k, x in enumerate(inputs):
        state = step(state, x, model, dt, k)
        out.append(state.v)
    return np.array(out).reshape(-1, model.n_r)


def ridge_fit(X: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    """Ridge solution W minimising ||W X^T - Y^T||^2 + lam ||W||^2.

    ``X`` is (samples, features) and ``Y`` is (samples, outputs).  Uses the
    dual (Gram) system when there are fewer samples than features, which gives
    the minimum-norm exact fit at ``lam = 0``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    n, d = X.shape
    if n < d:
        A = X @ X.T + lam * np.eye(n)
        _check_conditioning(A, lam)
        return np.linalg.solve(A, Y).T @ X
    A = X.T @ X + lam * np.eye(d)
    _check_conditioning(A, lam)
    return np.linalg.solve(A, X.T @ Y).T


def _check_conditioning(A, lam):
    if lam == 0 and np.linalg.cond(A) > 1.0 / np.finfo(float).eps:
        raise np.linalg.LinAlgError("singular normal system; use lambda > 0")


def collect_states(dataset: "LabeledSeriesDataset", model: ReservoirModel, dt: float):
    """Stack reservoir states and one-hot targets over every timestep of every series."""
    from hjbr.data import make_reference

    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    states, targets = [], []
    for s in dataset.series:
        states.append(run_series(model, s.values, dt))
        targets.append(make_reference(s.label, len(s.values), dataset.c))
    return np.concatenate(states), np.concatenate(targets)


def pretrain_decoder(dataset: "LabeledSeriesDataset", model: ReservoirModel, lam: float, dt: float) -> np.ndarray:
    """Ridge-regress one-hot targets on reservoir states; returns W_D (c x n_r)."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    X, Y = collect_states(dataset, model, dt)
    return ridge_fit(X, Y, lam)
