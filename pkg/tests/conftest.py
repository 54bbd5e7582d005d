"""Shared, session-cached geometries and solves."""

import numpy as np
import pytest

from ccm import ArrayLayout, WireDipole, assemble_array, couple_n, isolated_modes
from ccm.cli import five_element


def _solve(dipoles, k, check=True):
    blocks = assemble_array(ArrayLayout(tuple(dipoles)))
    iso = [isolated_modes(z.real, z.imag, k if k else z.shape[0], check=check)
           for z in blocks.self_blocks]
    return blocks, iso


@pytest.fixture(scope="session")
def half_wave():
    d = WireDipole(0.5)
    blocks = assemble_array(ArrayLayout((d,)))
    return d, blocks.self_blocks[0]


@pytest.fixture(scope="session")
def half_wave_modes(half_wave):
    _, z = half_wave
    return isolated_modes(z.real, z.imag, 4)


@pytest.fixture(scope="session")
def combos():
    """Combo1/2/3: A = 0.5 at x = 0, B = 0.3/0.5/0.7 at x = 0.3, four modes each."""
    out = {}
    for name, lb in (("combo1", 0.3), ("combo2", 0.5), ("combo3", 0.7)):
        blocks, iso = _solve((WireDipole(0.5), WireDipole(lb, x_position=0.3)), 4)
        out[name] = (blocks, iso, couple_n(iso, blocks))
    return out


@pytest.fixture(scope="session")
def five_mode1():
    return five_element(0)


@pytest.fixture(scope="session")
def five_mode2():
    return five_element(1)


@pytest.fixture(scope="session")
def full_pair():
    """Two 0.5 dipoles, 31 segments, every mode retained."""
    blocks, iso = _solve((WireDipole(0.5, segments=31),
                          WireDipole(0.5, segments=31, x_position=0.3)), None, check=False)
    return blocks, iso, couple_n(iso, blocks)


@pytest.fixture(scope="session")
def full_five():
    """Five 0.5 dipoles, 15 segments each, every mode retained."""
    dipoles = [WireDipole(0.5, segments=15, x_position=0.4 * i) for i in range(5)]
    blocks, iso = _solve(dipoles, None, check=False)
    return blocks, iso, couple_n(iso, blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed after the run
CRITERIA: dict = {}


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        CRITERIA[number] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
