import numpy as np
import pytest
from hypothesis import strategies as st

from bosefield import decompose


def random_spd(rng, n, floor=0.2):
    a = rng.standard_normal((n, n))
    return a @ a.T / n + floor * np.eye(n)


def random_coupling(rng, n, density=0.5):
    """Random SPD coupling with a random sparsity pattern (some models decouple)."""
    mask = np.triu(rng.random((n, n)) < density, 1)
    off = np.where(mask, -rng.uniform(0.1, 0.5, (n, n)), 0.0)
    off = off + off.T
    diag = np.abs(off).sum(axis=1) + rng.uniform(0.3, 2.0, n)
    return off + np.diag(diag)


@st.composite
def spd_models(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return decompose(random_spd(np.random.default_rng(seed), n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one PASS/FAIL line per criterion -------------------------

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    prev = _acceptance.get(number, (title, True))
    _acceptance[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok = _acceptance[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}")
