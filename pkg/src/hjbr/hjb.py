"""Running cost, Hamiltonian, stationary control and HJB residual."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CostConfig:
    """Cost weights: ``eta * e'e + u'Ru``.

    Construction only requires eta > 0; the stricter eta > 1 needed for the
    stability argument is checked by the hyper-parameter gate so that a bad
    value can be reported rather than refused.
    """

    eta: float
    R: np.ndarray
    t_f: float | None = None
    R_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if R.shape[0] != R.shape[1]:
            raise ValueError("R must be square")
        if not np.allclose(R, R.T, rtol=0, atol=1e-12 * max(1.0, np.abs(R).max())):
            raise ValueError("R must be symmetric")
        if np.linalg.eigvalsh(R).min() <= 0:
            raise ValueError("R must be positive definite")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "R_inv", np.linalg.inv(R))

    @classmethod
    def scalar(cls, eta: float, r: float, n: int, t_f: float | None = None) -> "CostConfig":
        return cls(eta, r * np.eye(n), t_f)

    @property
    def n(self) -> int:
        return self.R.shape[0]


def utility(e, u, cfg: CostConfig) -> float:
    e = np.asarray(e, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(cfg.eta * (e @ e) + u @ cfg.R @ u)


def hamiltonian(e, u, V_e, e_dot, cfg: CostConfig) -> float:
    return utility(e, u, cfg) + float(np.asarray(V_e) @ np.asarray(e_dot))


def optimal_control(V_e, g_mat, cfg: CostConfig) -> np.ndarray:
    """Stationary point of the Hamiltonian in u: -1/2 R^-1 g' V_e."""
    return -0.5 * cfg.R_inv @ (np.asarray(g_mat).T @ np.asarray(V_e))


def hjb_residual(e, V_e, f_val, g_mat, cfg: CostConfig) -> float:
    e = np.asarray(e, dtype=float)
    V_e = np.asarray(V_e, dtype=float)
    gtv = np.asarray(g_mat).T @ V_e
    return float(cfg.eta * (e @ e) + V_e @ np.asarray(f_val) - 0.25 * gtv @ cfg.R_inv @ gtv)


def riccati_scalar(a: float, b: float, r: float, eta: float) -> float:
    """Positive root P of 2aP - (b^2/r) P^2 + eta = 0 (value V = P e^2)."""
    if b == 0:
        if a >= 0:
            raise ValueError("no stabilising solution with b = 0 and a >= 0")
        return -eta / (2 * a)
    return r * (a + np.sqrt(a * a + b * b * eta / r)) / (b * b)
