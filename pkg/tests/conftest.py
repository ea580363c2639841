from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from oreqe.ore_poly import OrePoly
from oreqe.series_field import default_ring

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def F2():
    return default_ring(2, 1)


@pytest.fixture
def F4():
    return default_ring(2, 2)


@pytest.fixture
def tame3():
    return default_ring(2, 1, "tame:3")


def rationals(lo=-6, hi=6, max_denominator=12):
    return st.fractions(min_value=lo, max_value=hi, max_denominator=max_denominator)


@st.composite
def series(draw, ring, lo=-3, hi=6, max_terms=4, denoms=None):
    if denoms is None:
        denoms = (1, 2, 4) if ring.n == 1 else (1, 3) if ring.lattice.ell == 3 else (1,)
    n = draw(st.integers(0, max_terms))
    terms = []
    for _ in range(n):
        d = draw(st.sampled_from(denoms))
        e = Fraction(draw(st.integers(lo * d, hi * d)), d)
        c = draw(st.integers(1, ring.field.size - 1))
        terms.append((e, c))
    return ring.make(terms)


@st.composite
def ore_polys(draw, ring, max_degree=2, lo=0, hi=4, nonzero=True):
    d = draw(st.integers(0, max_degree))
    coeffs = [draw(series(ring, lo=lo, hi=hi, max_terms=2)) for _ in range(d + 1)]
    if nonzero and coeffs[-1].is_zero():
        coeffs[-1] = ring.one()
    return OrePoly(ring, coeffs)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
