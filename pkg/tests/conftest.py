from __future__ import annotations

from pathlib import Path

import pytest

from minsky.dynamics import ModelParams

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def params_2006() -> ModelParams:
    return ModelParams(mu=-0.76, beta=1.30, alpha1=-1.346, alpha2=0.765, i_min=2.42, i_max=49.0)


ACCEPTANCE_KEY = pytest.StashKey[dict]()
ACCEPTANCE_NAMES = {
    1: "classification oracle",
    2: "exponent recovery",
    3: "log-linear map law",
    4: "stability taxonomy replay",
    5: "percolation closed form",
    6: "cascade oracle equivalence",
    7: "bootstrap threshold behaviour",
    8: "growth identities",
    9: "population density replay",
}


@pytest.fixture
def record_criterion(request):
    """Store one acceptance outcome; the terminal summary prints them all."""

    def record(number: int, ok: bool, detail: str) -> None:
        request.config.stash.setdefault(ACCEPTANCE_KEY, {})[number] = (ok, detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, name in ACCEPTANCE_NAMES.items():
        ok, detail = results.get(number, (False, "not run"))
        terminalreporter.write_line(f"criterion {number} {'PASS' if ok else 'FAIL'}: {name}: {detail}")
