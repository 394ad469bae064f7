from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture()
def rng():
    import numpy as np

    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(label): release-gate check; one summary line prints per label",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    # Attach to setup reports too, so a skip or fixture error still carries
    # its label into the summary.
    if marker is not None and report.when in ("setup", "call"):
        report.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    precedence = {"FAIL": 2, "SKIP": 1, "PASS": 0}
    outcomes: dict[str, str] = {}
    for category, outcome in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(category, []):
            for key, value in getattr(report, "user_properties", []):
                if key != "criterion":
                    continue
                prior = outcomes.get(value)
                if prior is None or precedence[outcome] > precedence[prior]:
                    outcomes[value] = outcome
    if not outcomes:
        return
    terminalreporter.section("release gate")
    for label in sorted(outcomes):
        terminalreporter.write_line(f"{outcomes[label]}  {label}")
