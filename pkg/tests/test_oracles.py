from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomperc import oracles
from inhomperc.engine import blocking_circuit, configuration_from_sites, one_arm, sample_region
from inhomperc.lattice import TRIANGULAR, Annulus, Box, region_sites
from inhomperc.profile import Homogeneous


def test_parallelogram_duality_exhaustive():
    r = oracles.parallelogram_duality(6, 2)
    assert r.configurations == 2 ** 21
    assert r.exceptions == 0


def test_parallelogram_duality_small_shapes():
    for length, width in [(1, 1), (2, 1), (3, 2), (4, 3)]:
        assert oracles.parallelogram_duality(length, width).exceptions == 0


@pytest.mark.parametrize("inner,outer", [(0, 2), (1, 3)])
def test_annulus_duality_exhaustive(inner, outer):
    r = oracles.annulus_duality(inner, outer)
    n = len(region_sites(TRIANGULAR, Annulus((0, 0), inner, outer)))
    assert r.configurations == 2 ** n
    assert r.exceptions == 0


def test_annulus_duality_needs_hole():
    with pytest.raises(ValueError):
        oracles.annulus_duality(-1, 2)


def _ring(r):
    return [z for z in region_sites(TRIANGULAR, Box((0, 0), r)) if max(abs(z[0]), abs(z[1])) == r]


def test_winding_full_inner_ring():
    ann = Annulus((0, 0), 0, 2)
    assert oracles.winding_circuit(TRIANGULAR, ann, _ring(1))
    assert not oracles.winding_circuit(TRIANGULAR, ann, [])


@pytest.mark.parametrize("corner", [(1, 1), (-1, -1)])
def test_corner_chord_does_not_close_a_circuit(corner):
    # ring 1 vacant except an acute corner, ring 2 occupied: the corner
    # reaches the outer ring, so no circuit may be reported even though the
    # two neighbours of the corner are matching-adjacent
    ann = Annulus((0, 0), 0, 2)
    vacant = [z for z in _ring(1) if z != corner]
    occupied = [corner] + _ring(2)
    c = configuration_from_sites(TRIANGULAR, Box((0, 0), 2), occupied)
    assert not blocking_circuit(c, ann)
    assert not oracles.winding_circuit(TRIANGULAR, ann, vacant)


@settings(max_examples=40)
@given(st.integers(0, 2), st.integers(1, 4), st.floats(0.3, 0.7), st.integers(0, 2 ** 32))
def test_winding_agrees_with_engine(inner, width, p, seed):
    ann = Annulus((3, -2), inner, inner + width)
    c = sample_region(Homogeneous(p), TRIANGULAR, Box(ann.center, ann.outer), seed)
    vacant = [z for z in region_sites(TRIANGULAR, ann) if not c.occupied(z)]
    assert oracles.winding_circuit(TRIANGULAR, ann, vacant) == blocking_circuit(c, ann)


def test_exact_pi_values():
    assert oracles.exact_pi(1, Fraction(1, 2)) == Fraction(63, 128)
    assert oracles.exact_pi(1, Fraction(1)) == 1
    assert oracles.exact_pi(1, Fraction(0)) == 0


def test_exact_expectation_is_a_probability_measure():
    prof = Homogeneous(0.3)
    m1, m2 = oracles.exact_expectation(prof, TRIANGULAR, Box((0, 0), 1), lambda c: 1)
    assert m1 == pytest.approx(1.0) and m2 == pytest.approx(1.0)
    m1, _ = oracles.exact_expectation(prof, TRIANGULAR, Box((0, 0), 1), lambda c: int(c.occupied((0, 0))))
    assert m1 == pytest.approx(0.3)


def test_exact_expectation_refuses_large_boxes():
    with pytest.raises(ValueError):
        oracles.exact_expectation(Homogeneous(0.5), TRIANGULAR, Box((0, 0), 2), lambda c: 0)


def test_exact_pi_monotone_in_p():
    vals = [oracles.exact_pi(1, Fraction(k, 10)) for k in range(11)]
    assert vals == sorted(vals)


def test_embed_is_isometric_for_neighbours():
    for dx, dy in TRIANGULAR.primal_offsets():
        x, y = oracles.embed(TRIANGULAR, (dx, dy))
        assert np.hypot(x, y) == pytest.approx(1.0)


def test_one_arm_consistent_with_exhaustive_count():
    # count configurations of S_1 directly
    sites = region_sites(TRIANGULAR, Box((0, 0), 1))
    good = 0
    for m in range(1 << len(sites)):
        occ = [z for i, z in enumerate(sites) if (m >> i) & 1]
        good += one_arm(configuration_from_sites(TRIANGULAR, Box((0, 0), 1), occ), (0, 0), 1)
    assert Fraction(good, 1 << len(sites)) == Fraction(63, 128)
