import functools
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from phtccp import Scenario  # noqa: E402
from phtccp.engine import Simulation  # noqa: E402


@functools.lru_cache(maxsize=None)
def simulate(mode: str = "phtccp", seed: int = 1, record: bool = False, **over):
    """Cached full run; returns the Simulation so tests can inspect node state."""
    sim = Simulation(Scenario(mode=mode, seed=seed, **over), record_exchanges=record)
    sim.run()
    return sim


# criterion number -> one-line verdict, printed after the run
ACCEPTANCE: dict = {}


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
