import numpy as np
import pytest

from chnsdg.dgspace import FieldCoefficients
from chnsdg.forms import Discretization
from chnsdg.mesh import structured_unit_square


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def disc4():
    return Discretization(structured_unit_square(4), 1)


@pytest.fixture(scope="session")
def disc4_q2():
    return Discretization(structured_unit_square(4), 2)


def random_field(space, rng, scale=1.0):
    return FieldCoefficients(space, scale * rng.standard_normal(space.total_dofs))


# ----------------------------------------------------------- acceptance summary
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    num, title = marker.args
    ok = call.excinfo is None
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
    entry = _CRITERIA.setdefault(num, [title, True, []])
    entry[1] = entry[1] and ok
    if detail:
        entry[2].append(detail)
    if not ok:
        entry[2].append(f"FAILED in {item.name}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok, details = _CRITERIA[num]
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if details:
            line += "  [" + " | ".join(details) + "]"
        terminalreporter.write_line(line)
