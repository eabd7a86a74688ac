import functools

import pytest

from sicnum import SearchConfig, make_context, polish, search
from sicnum.overlaps import compute_overlaps

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def coarse_fiducial(d: int, seed: int = 1):
    return search(make_context(d, 53), SearchConfig(rng_seed=seed))


@functools.lru_cache(maxsize=None)
def polished_fiducial(d: int, bits: int, seed: int = 1):
    f = coarse_fiducial(d, seed)
    return polish(make_context(d, bits), f, bits)


@functools.lru_cache(maxsize=None)
def polished_table(d: int, bits: int, seed: int = 1):
    f = polished_fiducial(d, bits, seed)
    return compute_overlaps(f.context(), f)


@pytest.fixture(scope="session")
def fiducials():
    return {d: coarse_fiducial(d) for d in range(2, 8)}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
