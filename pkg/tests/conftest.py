import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: "OrderedDict[int, list[tuple[bool, str]]]" = OrderedDict()


class AcceptanceLog:
    """Collects per-criterion outcomes; several items may share a criterion."""

    def record(self, criterion: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
        print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
        return bool(ok)


@pytest.fixture(scope="session")
def acceptance_log():
    return AcceptanceLog()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        items = _ACCEPTANCE[crit]
        ok = all(o for o, _ in items)
        detail = "; ".join(d if o else f"{d} [FAIL]" for o, d in items)
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
