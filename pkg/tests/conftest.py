import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hjbr.reservoir import ReservoirModel, make_reservoir

settings.register_profile("default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_model(rng, n_r=None, n_in=None, c=None, n_plastic=None, phi="tanh") -> ReservoirModel:
    """Small dense model with a random decoder and random plastic values."""
    n_r = n_r or int(rng.integers(2, 8))
    n_in = n_in or int(rng.integers(1, 4))
    c = c or int(rng.integers(1, 4))
    n_plastic = n_plastic or int(rng.integers(1, n_r * n_r + 1))
    m = make_reservoir(n_in, n_r, c, n_plastic, seed=int(rng.integers(1 << 30)), phi=phi)
    W_r = m.W_r.copy()
    W_r[m.plastic_idx[:, 0], m.plastic_idx[:, 1]] = rng.normal(0, 0.3, n_plastic)
    return ReservoirModel(m.W_E, W_r, rng.normal(size=(c, n_r)), m.plastic_idx, m.alpha1, phi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria register their outcome here; printed at the end of the session
ACCEPTANCE: dict = {}


def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE[number] = (name, bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {name}: {detail}")
