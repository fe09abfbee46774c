"""Actor: linear read-out of fixed features producing the plastic weights u."""

from __future__ import annotations

import math
import copy
from dataclasses import dataclass, replace

import numpy as np

from hjbr.hjb import CostConfig
from hjbr.reservoir import DimensionError, DivergenceError, ReservoirModel


@dataclass(frozen=True)
class ActorNet:
    features: object
    Wa: np.ndarray  # (N, n_a)
    alpha_a: float

    @classmethod
    def zeros(cls, features, n_plastic: int, alpha_a: float) -> "ActorNet":
        return cls(features, np.zeros((n_plastic, features.size)), alpha_a)


def actor_forward(net: ActorNet, e, dt):
    z = net.features.step(np.asarray(e, dtype=float), dt)
    if not math.isfinite(z.sum()):
        raise DivergenceError("actor features became non-finite")
    return z, net.Wa @ z


def actor_error(u_hat, z_c, Wc, g_mat, cfg: CostConfig) -> np.ndarray:
    """Actor output minus the control implied by the critic, -1/2 R^-1 g' Wc z_c."""
    return np.asarray(u_hat) + 0.5 * cfg.R_inv @ (np.asarray(g_mat).T @ (Wc @ z_c))


def actor_gradient(z_a, e_a) -> np.ndarray:
    """d(1/2 e_a'e_a)/dWa = e_a z_a'."""
    return np.outer(e_a, z_a)


def actor_update(net: ActorNet, z_a, e_a, dt) -> ActorNet:
    Wa = net.Wa - dt * net.alpha_a * actor_gradient(z_a, e_a)
    if not math.isfinite(Wa.sum()):
        raise DivergenceError("actor weights became non-finite")
    return replace(net, Wa=Wa)


def clamp_control(u, u_max: float) -> np.ndarray:
    return np.clip(u, -u_max, u_max)


def apply_control(model: ReservoirModel, u) -> ReservoirModel:
    """Write ``u`` into the plastic entries of W_r (returns a new model)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (model.n_plastic,):
        raise DimensionError(f"u has shape {u.shape}, expected ({model.n_plastic},)")
    W_r = model.W_fixed.copy()
    W_r[model.plastic_idx[:, 0], model.plastic_idx[:, 1]] = u
    # only plastic entries change, so the cached fixed part and validation carry over
    new = copy.copy(model)
    new.W_r = W_r
    return new
