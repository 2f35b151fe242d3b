import pytest
from hypothesis import HealthCheck, settings

from twophoton.spectral import make_pair_state

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

NM = 1e-9
FS = 1e-15


@pytest.fixture(scope="session")
def pair6():
    return make_pair_state(351 * NM, 702 * NM, 6 * NM)


@pytest.fixture(scope="session")
def pair6_separable():
    return make_pair_state(351 * NM, 702 * NM, 6 * NM, entangled=False)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion and fail the test if any check fails."""
    lines = request.config._acceptance_lines

    def record(label: str, checks: dict):
        ok = all(passed for passed, _ in checks.values())
        detail = "; ".join(f"{name}={'ok' if passed else 'FAIL'} ({info})"
                           for name, (passed, info) in checks.items())
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        failed = [name for name, (passed, _) in checks.items() if not passed]
        assert not failed, f"{label}: failed checks {failed}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
