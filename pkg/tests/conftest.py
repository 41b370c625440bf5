import time

import pytest

from perceptual_fairness.toy import ToyConfig, run_toy

_ACCEPTANCE: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    _ACCEPTANCE.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_run():
    """The default toy experiment (n=200000, seed 42) with its samples and wall time."""
    start = time.perf_counter()
    result, samples = run_toy(ToyConfig(), return_samples=True)
    return result, samples, time.perf_counter() - start
