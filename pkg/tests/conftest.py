import numpy as np
import pytest

from imfkit.image import Image

ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h=32, w=32, channels=1):
    return Image.from_array(rng.integers(0, 256, size=(h, w, channels), dtype=np.uint8))


def random_equal_total_hists(rng, total=None, sparsity=0.5):
    """Two random histograms with identical totals and a random support pattern."""
    if total is None:
        total = int(rng.integers(1, 5000))

    def one():
        support = rng.random(256) > sparsity
        if not support.any():
            support[rng.integers(0, 256)] = True
        probs = np.zeros(256)
        probs[support] = rng.random(int(support.sum())) + 1e-9
        probs /= probs.sum()
        return rng.multinomial(total, probs).astype(np.int64)

    return one(), one()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        ACCEPTANCE_RESULTS[marker.args[0]] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{ACCEPTANCE_RESULTS[name]}  {name}")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion test")
