"""Fixed feature generators read by the critic and the actor.

All feature maps share a tiny interface: ``reset()`` clears internal memory
and ``step(e, dt)`` returns the feature vector for the current error.  Only
the reservoir variant carries memory.
"""

from __future__ import annotations

import numpy as np

from hjbr.reservoir import ReservoirModel, step


class ReservoirFeatures:
    """A small fixed random reservoir driven by the error; its state is the feature."""

    def __init__(self, model: ReservoirModel):
        self.model = model
        self.state = model.zero_state()

    @classmethod
    def random(cls, n_in, n, seed, spectral_radius=0.9, input_scale=1.0, leak=1.0):
        rng = np.random.default_rng(seed)
        W_E = rng.uniform(-input_scale, input_scale, size=(n, n_in))
        W = rng.uniform(-1.0, 1.0, size=(n, n))
        W *= spectral_radius * leak / np.max(np.abs(np.linalg.eigvals(W)))
        return cls(ReservoirModel(W_E, W, np.zeros((0, n)), np.zeros((0, 2)), leak))

    @property
    def size(self) -> int:
        return self.model.n_r

    def reset(self):
        self.state = self.model.zero_state()

    def step(self, e, dt):
        self.state = step(self.state, e, self.model, dt)
        return self.state.v


class ProjectionFeatures:
    """Memoryless features tanh(W e)."""

    def __init__(self, W):
        self.W = np.atleast_2d(np.asarray(W, dtype=float))

    @classmethod
    def random(cls, n_in, n, seed, input_scale=1.0):
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(-input_scale, input_scale, size=(n, n_in)))

    @property
    def size(self) -> int:
        return self.W.shape[0]

    def reset(self):
        pass

    def step(self, e, dt):
        return np.tanh(self.W @ e)


class IdentityFeatures:
    """z = e.  Linear features for plants with a known quadratic value."""

    def __init__(self, n):
        self.n = n

    @property
    def size(self) -> int:
        return self.n

    def reset(self):
        pass

    def step(self, e, dt):
        return np.array(e, dtype=float)


def make_features(kind: str, n_in: int, n: int, seed, leak: float = 1.0, input_scale: float = 1.0):
    if kind == "reservoir":
        return ReservoirFeatures.random(n_in, n, seed, input_scale=input_scale, leak=leak)
    if kind == "projection":
        return ProjectionFeatures.random(n_in, n, seed, input_scale=input_scale)
    if kind == "identity":
        return IdentityFeatures(n_in)
    raise ValueError(f"unknown feature kind {kind!r}")
