import numpy as np
import pytest
from hypothesis import given, strategies as st

from hjbr.hjb import CostConfig, hamiltonian, hjb_residual, optimal_control, riccati_scalar, utility

seeds = st.integers(0, 2**31 - 1)


def random_spd(rng, n):
    A = rng.normal(size=(n, n))
    return A @ A.T + 0.1 * np.eye(n)


def random_instance(seed):
    rng = np.random.default_rng(seed)
    c, n = int(rng.integers(1, 5)), int(rng.integers(1, 7))
    cfg = CostConfig(float(rng.uniform(1.01, 10)), random_spd(rng, n))
    return rng, cfg, rng.normal(size=c), rng.normal(size=c), rng.normal(size=c), rng.normal(size=(c, n))


def test_cost_config_validation():
    with pytest.raises(ValueError):
        CostConfig(2.0, [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        CostConfig(2.0, [[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(ValueError):
        CostConfig(0.0, [[1.0]])
    cfg = CostConfig.scalar(2.0, 4.0, 3)
    assert cfg.n == 3 and cfg.R_inv == pytest.approx(0.25 * np.eye(3))


def test_utility_examples():
    assert utility([0, 0], [0], CostConfig.scalar(2, 1, 1)) == 0
    assert utility([1, 0], [0], CostConfig.scalar(2, 1, 1)) == 2
    assert utility([1, 1], [1], CostConfig(1.0, [[2.0]])) == 4


@given(seeds)
def test_utility_positive_definite(seed):
    rng, cfg, e, *_, g = random_instance(seed)
    u = rng.normal(size=cfg.n)
    assert utility(e, u, cfg) > 0
    assert utility(np.zeros_like(e), np.zeros_like(u), cfg) == 0


def test_hamiltonian_examples():
    cfg = CostConfig.scalar(1.5, 1.0, 1)
    assert hamiltonian([0, 0], [0], [1, 0], [0, 5], cfg) == 0
    # utility 1.5 + 1.5 = 3
    assert hamiltonian([1], [np.sqrt(1.5)], [1, 1], [-1, -2], cfg) == pytest.approx(0.0)


def test_optimal_control_examples():
    cfg = CostConfig.scalar(2, 1, 3)
    V = np.array([1.0, -2.0, 4.0])
    assert np.all(optimal_control(np.zeros(3), np.eye(3), cfg) == 0)
    assert np.all(optimal_control(V, np.zeros((3, 3)), cfg) == 0)
    assert optimal_control(V, np.eye(3), cfg) == pytest.approx(-0.5 * V)


def test_hjb_residual_examples():
    cfg = CostConfig.scalar(3, 1, 2)
    assert hjb_residual([0, 0], [0, 0], [0, 0], np.ones((2, 2)), cfg) == 0
    assert hjb_residual([1, 2], [0, 0], [7, 7], np.ones((2, 2)), cfg) == pytest.approx(15.0)


@pytest.mark.parametrize("a,b,r,eta", [(-1, 1, 1, 2), (0, 1, 1, 1), (0.5, 2, 3, 4), (-2, 0.5, 0.1, 7), (-1, 0, 1, 2)])
def test_riccati_root(a, b, r, eta):
    P = riccati_scalar(a, b, r, eta)
    assert P > 0
    assert 2 * a * P - (b * b / r) * P * P + eta == pytest.approx(0.0, abs=1e-12)
    cfg = CostConfig.scalar(eta, r, 1)
    for e in (-2.0, 0.3, 1.0):
        assert abs(hjb_residual([e], [2 * P * e], [a * e], [[b]], cfg)) < 1e-10


def test_riccati_reference_value():
    assert riccati_scalar(-1, 1, 1, 2) == pytest.approx(np.sqrt(3) - 1, rel=1e-15)
    assert riccati_scalar(0, 1, 1, 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        riccati_scalar(1, 0, 1, 1)


@given(seeds)
def test_residual_is_hamiltonian_at_stationary_control(seed):
    rng, cfg, e, V, f, g = random_instance(seed)
    u = optimal_control(V, g, cfg)
    H = hamiltonian(e, u, V, f + g @ u, cfg)
    r = hjb_residual(e, V, f, g, cfg)
    assert r == pytest.approx(H, rel=1e-10, abs=1e-10)


@given(seeds)
def test_stationary_control_minimises_hamiltonian(seed):
    rng, cfg, e, V, f, g = random_instance(seed)
    u = optimal_control(V, g, cfg)
    H = hamiltonian(e, u, V, f + g @ u, cfg)
    scale = abs(H) + np.abs(V).sum() * np.abs(f).sum() + 1.0
    for _ in range(20):
        d = rng.normal(size=cfg.n) * 10.0 ** rng.uniform(-6, 1)
        assert hamiltonian(e, u + d, V, f + g @ (u + d), cfg) >= H - 1e-12 * scale
