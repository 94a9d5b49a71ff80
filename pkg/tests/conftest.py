import math

import pytest

from ccapm import calibration as cal
from ccapm.model import TABLE1, GrowthMoments, Preferences
from ccapm.moments import summary_moments

PUB_BETA = 0.99
PUB_ZETA = 0.961745
PUB_XI = 1.019392
PUB_RHO = 1.033526
PUB_MU = 0.017215
PUB_VAR = 0.001250


@pytest.fixture
def table1_moments():
    return summary_moments(TABLE1)


@pytest.fixture
def rounded_moments():
    """The six-decimal moments that appear in the published coefficients."""
    return GrowthMoments.equilibrium(PUB_MU, PUB_VAR)


@pytest.fixture
def targets():
    return cal.build_targets(TABLE1, PUB_BETA)


@pytest.fixture
def rounded_targets(targets):
    return targets.rounded()


@pytest.fixture
def published_prefs():
    return Preferences(PUB_BETA, PUB_RHO)


@pytest.fixture
def published_log_point():
    return math.log(PUB_ZETA), math.log(PUB_XI), PUB_RHO


_CRITERIA = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))
        return bool(ok)

    @property
    def passed(self):
        return bool(self.checks) and all(ok for ok, _ in self.checks)

    def line(self):
        details = "; ".join(d for _, d in self.checks)
        return f"[AC{self.number:02d}] {'PASS' if self.passed else 'FAIL'} {self.title}: {details}"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    c = _Criterion(*marker.args)
    yield c
    _CRITERIA.append(c)
    print(c.line())


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_CRITERIA, key=lambda c: c.number):
        terminalreporter.write_line(c.line())
