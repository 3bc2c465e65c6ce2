import pytest
from hypothesis import HealthCheck, settings

from uhlmann import transport

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# every holonomy produced during the session records its partial-isometry
# residual; constructions rejected by the isometry check never count as produced
RESIDUALS = []
_original_post_init = transport.HolonomyResult.__post_init__


def _recording_post_init(self):
    _original_post_init(self)
    RESIDUALS.append(self.residual)


transport.HolonomyResult.__post_init__ = _recording_post_init

# acceptance verdicts, printed in the terminal summary
VERDICTS = {}


def record_verdict(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    VERDICTS[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[k])


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(1234)


def pytest_collection_modifyitems(session, config, items):
    # the acceptance module audits holonomies from the whole run, so it goes last
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")
