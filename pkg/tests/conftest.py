import numpy as np
import pytest

import oneshot_coherence
from oneshot_coherence import channels as _channels
from oneshot_coherence import cli as _cli

# Every concentration channel built during the session, for the final audit.
BUILT_CHANNELS = []

_original_build = _channels.build_concentration_channel


def _recording_build(psi, M):
    ch = _original_build(psi, M)
    BUILT_CHANNELS.append(ch)
    return ch


for _mod in (_channels, _cli, oneshot_coherence):
    _mod.build_concentration_channel = _recording_build


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks")


# (criterion id, passed, detail) rows collected by the acceptance tests
ACCEPTANCE = []


def record_acceptance(cid, passed, detail):
    ACCEPTANCE.append((cid, bool(passed), detail))
    # also echo immediately so the line shows up even under output capture
    import sys
    sys.__stdout__.write(f"\nACCEPTANCE {cid}: {'PASS' if passed else 'FAIL'} | {detail}\n")
    sys.__stdout__.flush()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {cid}: {detail}")
