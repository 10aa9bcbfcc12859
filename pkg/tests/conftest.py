import math

import numpy as np
import pytest

from leastgrad import (
    BoundaryBV,
    BoundaryMeasurePair,
    Disc,
    MassAtom,
)


def random_step_datum(domain, rng, max_breaks: int = 8) -> BoundaryBV:
    """Random piecewise-constant datum with at least two distinct values."""
    L = domain.boundary_length
    while True:
        k = int(rng.integers(2, max_breaks + 1))
        breaks = np.sort(rng.uniform(0.0, L, size=k))
        if np.min(np.diff(breaks, append=breaks[0] + L)) < 1e-3 * L:
            continue
        vals = rng.uniform(-1.0, 1.0, size=k)
        if np.ptp(vals) < 1e-6:
            continue
        return BoundaryBV.piecewise_constant(domain, list(breaks), list(vals))


def random_atom_pair(rng, m: int, n: int, domain=None) -> BoundaryMeasurePair:
    """Balanced random atomic measures supported on the domain boundary."""
    domain = domain or Disc()
    L = domain.boundary_length
    ss = rng.uniform(0.0, L, size=m + n)
    pos_mass = rng.uniform(0.1, 1.0, size=m)
    neg_mass = rng.uniform(0.1, 1.0, size=n)
    neg_mass *= pos_mass.sum() / neg_mass.sum()
    pos = tuple(
        MassAtom(domain.boundary_param(float(s)), float(w), "atomic")
        for s, w in zip(ss[:m], pos_mass)
    )
    neg = tuple(
        MassAtom(domain.boundary_param(float(s)), float(w), "atomic")
        for s, w in zip(ss[m:], neg_mass)
    )
    return BoundaryMeasurePair(pos, neg)


@pytest.fixture
def disc():
    return Disc()


@pytest.fixture
def sharp_datum(disc):
    """Indicator of the upper half circle: the sharp-constant configuration."""
    return BoundaryBV.piecewise_constant(disc, [0.0, math.pi], [1.0, 0.0])
