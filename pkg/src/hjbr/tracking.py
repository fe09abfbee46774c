"""Tracking-error system built on the reservoir.

With the decoder frozen, e = W_D v - y_ref evolves as

    de/dt = f + g u

where u stacks the plastic recurrent entries.  ``g`` is the Jacobian of
W_D W_r phi(v) with respect to those entries: the column for entry (i, j)
is phi(v)_j * W_D[:, i].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hjbr.reservoir import DimensionError, ReservoirModel, ReservoirState


@dataclass(frozen=True)
class AffineErrorEval:
    e: np.ndarray
    f_val: np.ndarray
    g_mat: np.ndarray
    v_snapshot: np.ndarray


def output_error(y_hat, y_ref) -> np.ndarray:
    y_hat = np.asarray(y_hat, dtype=float)
    y_ref = np.asarray(y_ref, dtype=float)
    if y_hat.shape != y_ref.shape:
        raise DimensionError(f"output shapes differ: {y_hat.shape} vs {y_ref.shape}")
    return y_hat - y_ref


def lift_plastic(model: ReservoirModel, phi_v: np.ndarray) -> np.ndarray:
    """c x N input matrix for the plastic entries at activation ``phi_v``."""
    rows, cols = model.plastic_idx[:, 0], model.plastic_idx[:, 1]
    return model.W_D[:, rows] * phi_v[cols]


def build_affine_eval(model: ReservoirModel, state: ReservoirState, y_ref, x) -> AffineErrorEval:
    """Evaluate e, f and g at the current reservoir state and input ``x``.

    The reference is taken as constant within a pattern, so it contributes
    nothing to the drift.
    """
    if model.n_plastic == 0:
        raise ValueError("model has no plastic entries")
    v = state.v
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi_v = model.nonlinearity(v)
    drift = -model.alpha1 * v + model.W_E @ x + model.W_fixed @ phi_v
    e = output_error(model.W_D @ v, y_ref)
    return AffineErrorEval(e, model.W_D @ drift, lift_plastic(model, phi_v), v)


def error_derivative(ev: AffineErrorEval, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (ev.g_mat.shape[1],):
        raise DimensionError(f"u has shape {u.shape}, expected ({ev.g_mat.shape[1]},)")
    return ev.f_val + ev.g_mat @ u


@dataclass(frozen=True)
class PESchedule:
    """Exploration noise: a0 * decay**epoch times a mix of sinusoids and uniform dither.

    Each entry of the noise is ``amp * (mix * mean_k sin(w_k t + p_k) +
    (1 - mix) * U(-1, 1))`` so its magnitude never exceeds ``amp``.  Frequencies
    (radians per step) and phases are drawn once per seed.
    """

    a0: float = 0.0
    decay: float = 1.0
    n_sines: int = 4
    mix: float = 0.5
    w_min: float = 0.05
    w_max: float = 1.0

    def amplitude(self, epoch: int = 0) -> float:
        return self.a0 * self.decay**epoch


@lru_cache(maxsize=64)
def _sine_table(seed: int, n: int, n_sines: int, w_min: float, w_max: float):
    rng = np.random.default_rng([seed, 0x5E])
    w = rng.uniform(w_min, w_max, size=(n_sines, n))
    p = rng.uniform(0.0, 2 * np.pi, size=(n_sines, n))
    return w, p


def pe_noise(n: int, schedule: PESchedule, step_index: int, seed: int, epoch: int = 0) -> np.ndarray:
    amp = schedule.amplitude(epoch)
    if amp < 0:
        raise ValueError("PE amplitude must be non-negative")
    if amp == 0:
        return np.zeros(n)
    out = np.zeros(n)
    if schedule.mix > 0 and schedule.n_sines > 0:
        w, p = _sine_table(int(seed), n, schedule.n_sines, schedule.w_min, schedule.w_max)
        out += schedule.mix * np.sin(w * step_index + p).mean(axis=0)
    if schedule.mix < 1:
        block, row = divmod(int(step_index), _BLOCK)
        out += (1.0 - schedule.mix) * _dither_block(int(seed), n, block)[row]
    return amp * out


_BLOCK = 4096


@lru_cache(maxsize=8)
def _dither_block(seed: int, n: int, block: int) -> np.ndarray:
    # uniform dither generated a block of steps at a time; row k of block b is step b*_BLOCK + k
    return np.random.default_rng([seed, n, block]).uniform(-1.0, 1.0, size=(_BLOCK, n))


def inject_pe_noise(u, schedule: PESchedule, step_index: int, seed: int, epoch: int = 0) -> np.ndarray:
    """u plus exploration noise; deterministic in (seed, step_index, epoch)."""
    u = np.asarray(u, dtype=float)
    return u + pe_noise(u.shape[0], schedule, step_index, seed, epoch)
