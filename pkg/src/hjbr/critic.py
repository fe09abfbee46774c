"""Critic: linear read-out of fixed features approximating the value gradient V_e."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from hjbr.hjb import CostConfig
from hjbr.reservoir import DivergenceError


@dataclass(frozen=True)
class CriticNet:
    features: object
    Wc: np.ndarray  # (c, n_c)
    alpha_c: float

    @classmethod
    def zeros(cls, features, c: int, alpha_c: float) -> "CriticNet":
        return cls(features, np.zeros((c, features.size)), alpha_c)


def critic_forward(net: CriticNet, e, dt):
    """Advance the critic features on ``e``; returns (z_c, V_e estimate)."""
    z = net.features.step(np.asarray(e, dtype=float), dt)
    if not math.isfinite(z.sum()):
        raise DivergenceError("critic features became non-finite")
    return z, net.Wc @ z


def bellman_residual(e, u, z_c, Wc, e_dot, cfg: CostConfig) -> float:
    """Hamiltonian evaluated with the critic estimate Wc z_c in place of V_e."""
    e = np.asarray(e, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(cfg.eta * (e @ e) + u @ cfg.R @ u + (Wc @ z_c) @ e_dot)


def critic_gradient(z_c, e_dot, e_c) -> np.ndarray:
    """d(1/2 e_c^2)/dWc = e_c * e_dot z_c'."""
    return e_c * np.outer(e_dot, z_c)


def critic_update(net: CriticNet, z_c, e_dot, e_c, dt) -> CriticNet:
    Wc = net.Wc - dt * net.alpha_c * critic_gradient(z_c, e_dot, e_c)
    if not math.isfinite(Wc.sum()):
        raise DivergenceError(f"critic weights became non-finite (e_c={e_c!r})")
    return replace(net, Wc=Wc)
