import numpy as np
import pytest

from ncmarkov.model import generate


def unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


@pytest.fixture
def swap():
    return generate("swap", (2, 2, 2))


@pytest.fixture
def identity():
    return generate("identity", (2, 2, 2))


def closed_form_fixtures():
    """(label, model) pairs with known verdicts."""
    out = [("identity", generate("identity", (2, 2, 2))), ("swap", generate("swap", (2, 2, 2)))]
    for label, theta in (("pi/8", np.pi / 8), ("pi/4", np.pi / 4), ("3pi/8", 3 * np.pi / 8)):
        out.append((f"partial_swap {label}", generate("partial_swap", (2, 2, 2), theta=theta)))
    return out


_ACCEPTANCE: dict[int, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    number = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
    if report.when == "call" or report.failed:
        if number not in _ACCEPTANCE or report.failed:
            _ACCEPTANCE[number] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        outcome, duration = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {outcome}  {CRITERIA[number]} ({duration:.2f}s)"
        )
