import numpy as np
import pytest

from wlrand import SegmentMap, WeakLabels


def random_grid(rng, shape, n_ids, p_zero=0.0, start=1):
    """Random label grid with ids in start..start+n_ids-1, and 0 with probability p_zero."""
    grid = rng.integers(start, start + n_ids, size=shape)
    if p_zero > 0:
        grid[rng.random(shape) < p_zero] = 0
    return grid


def random_blocky(rng, shape, n_ids, start=1):
    """Coarse random labels upsampled so regions are spatially coherent."""
    h, w = shape
    bh, bw = max(1, h // 4), max(1, w // 4)
    small = rng.integers(start, start + n_ids, size=(-(-h // bh), -(-w // bw)))
    return np.kron(small, np.ones((bh, bw), dtype=np.int64))[:h, :w]


def random_instance(rng, max_side=32, max_k=10, max_l=4, max_u=4):
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    k = int(rng.integers(1, max_k + 1))
    l_ = int(rng.integers(1, max_l + 1))
    u = int(rng.integers(1, max_u + 1))
    if rng.random() < 0.5:
        seg = random_grid(rng, (h, w), k, start=0)
    else:
        seg = random_blocky(rng, (h, w), k, start=0)
    ml = random_grid(rng, (h, w), l_, p_zero=float(rng.random()))
    cl = random_grid(rng, (h, w), u, p_zero=float(rng.random()))
    return SegmentMap(seg), WeakLabels(ml, cl)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --------------------------------------------------- acceptance summary lines

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(report.nodeid, "passed")
        _ACCEPTANCE[report.nodeid] = "passed" if prev == "passed" and report.outcome == "passed" else "failed"


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args))
            _TITLES[item.nodeid] = mark.args


_TITLES = {}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    rows = {}
    for nodeid, outcome in _ACCEPTANCE.items():
        number, title = _TITLES.get(nodeid, (0, nodeid))
        ok = rows.get(number, (title, True))[1] and outcome == "passed"
        rows[number] = (title, ok)
    for number in sorted(rows):
        title, ok = rows[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
