import numpy as np
import pytest

from hpcmd import kernels

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _ACCEPTANCE.get(number, (title, "PASS"))[1]
        status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
        _ACCEPTANCE[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title}")


@pytest.fixture(params=["numba", "numpy"])
def kernel_impl(request):
    """Pick one implementation of a kernel pair by name."""
    which = 0 if request.param == "numba" else 1

    def get(name):
        return kernels.PAIRS[name][which]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def separable_clusters(rng, n=60, d=4, offset=2.0, spread=0.5):
    X = np.vstack([rng.normal(-offset, spread, (n, d)), rng.normal(offset, spread, (n, d))])
    y = np.r_[np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)]
    return X, y
