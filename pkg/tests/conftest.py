import math

import numpy as np
import pytest

from roughwet.surface import make_surface

DEG = math.pi / 180


def surface(geometry="flat", chemistry="homogeneous", eps=1 / 16, amplitude=0.1, **chem):
    gp = {} if geometry == "flat" else {"amplitude": amplitude}
    cp = {k: v * DEG if k.startswith("theta") else v for k, v in chem.items()}
    if chemistry == "homogeneous" and not cp:
        cp = {"theta": 60 * DEG}
    return make_surface(geometry, chemistry, eps, gp, cp)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
