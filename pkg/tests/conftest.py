import pytest

from rikit.gridfn import make_grid

# criterion number -> (ok, message), filled in by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def grid():
    return make_grid(K=16, t_min=2.0 ** -40)


@pytest.fixture(scope="session")
def coarse():
    return make_grid(K=4, t_min=2.0 ** -20)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {msg}")
