import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from inhomperc.profile import (
    MARGINAL_R_MIN,
    Homogeneous,
    Marginal,
    PowerLaw,
    ProfileError,
    ScalingLaw,
    Tabulated,
    alpha_of,
    density_at,
    profile_from_dict,
    tabulated_from_lengths,
)


def test_scaling_law_value():
    assert alpha_of(ScalingLaw(0.1, 4 / 3), 16) == pytest.approx(0.0125, rel=1e-12)


def test_scaling_law_clamps():
    assert alpha_of(ScalingLaw(0.1, 4 / 3), 1e-12) == 0.5


def test_tabulated_table_hit():
    t = Tabulated(((0.6, 10.0), (0.51, 100.0)), 0.5)
    assert alpha_of(t, 10.0) == pytest.approx(0.1, rel=1e-12)
    assert alpha_of(t, 100.0) == pytest.approx(0.01, rel=1e-12)


def test_tabulated_interpolates_a_power_law_exactly():
    # lengths exactly eps**(-4/3): log-log interpolation is exact
    pairs = [(0.5 + e, e ** (-4 / 3)) for e in (0.2, 0.1, 0.05, 0.02)]
    t = tabulated_from_lengths(pairs, 0.5)
    for x in (7.0, 20.0, 60.0, 300.0):
        assert alpha_of(t, x) == pytest.approx(x ** -0.75, rel=1e-9)


@given(st.floats(0.01, 1e6), st.floats(0.01, 1e6))
def test_alpha_non_increasing(x1, x2):
    lo, hi = sorted((x1, x2))
    for b in (ScalingLaw(0.7, 4 / 3), Tabulated(((0.6, 10.0), (0.55, 30.0), (0.51, 100.0)), 0.5)):
        a_lo, a_hi = alpha_of(b, lo), alpha_of(b, hi)
        assert 0 < a_hi <= a_lo + 1e-15 <= 0.5 + 1e-15


def test_tabulated_rejects_non_monotone():
    with pytest.raises(ProfileError):
        Tabulated(((0.6, 10.0), (0.55, 5.0)), 0.5)
    with pytest.raises(ProfileError):
        Tabulated(((0.6, 10.0),), 0.5)


def test_homogeneous_constant():
    assert density_at(Homogeneous(0.5), (17, -3)) == 0.5


def test_marginal_small_radius_is_one():
    m = Marginal(1.0)
    assert density_at(m, (3, 0)) == 1.0
    assert all(m.density_r(r) == 1.0 for r in range(int(MARGINAL_R_MIN) + 1))
    assert m.density_r(1000) < 1.0


def test_powerlaw_value():
    prof = PowerLaw(0.5, ScalingLaw(0.1, 4 / 3))
    assert density_at(prof, (16, -3)) == pytest.approx(0.5 + 0.1 * 4 ** -0.75, abs=1e-12)
    assert density_at(prof, (16, -3)) == pytest.approx(0.535355, abs=1e-6)


def test_powerlaw_lambda():
    assert PowerLaw(0.5).lam == pytest.approx(0.375)


@given(st.floats(0.05, 0.95), st.floats(0.01, 3.0))
def test_powerlaw_monotone_and_supercritical(w, a):
    tab = PowerLaw(w, ScalingLaw(a)).radial_table(400)
    assert np.all(tab > 0.5) and np.all(tab <= 1.0)
    assert np.all(np.diff(tab) <= 1e-15)


@given(st.floats(0.01, 10.0), st.integers(0, 5000))
def test_marginal_in_range(kappa, r):
    d = Marginal(kappa).density_r(r)
    assert 0.5 < d <= 1.0


def test_marginal_grows_with_kappa():
    r = np.arange(16, 3000)
    lo = Marginal(0.25).radial_table(3000)[r]
    hi = Marginal(4.0).radial_table(3000)[r]
    assert np.all(hi >= lo)


@pytest.mark.parametrize("prof", [
    Homogeneous(0.3),
    PowerLaw(0.4, ScalingLaw(0.2, 1.5)),
    Marginal(2.0, Tabulated(((0.6, 10.0), (0.52, 80.0)), 0.5)),
])
def test_profile_round_trip(prof):
    again = profile_from_dict(prof.to_dict())
    assert again == prof and again.digest() == prof.digest()


def test_profile_validation():
    with pytest.raises(ProfileError):
        PowerLaw(1.5)
    with pytest.raises(ProfileError):
        Marginal(0.0)
    with pytest.raises(ProfileError):
        Homogeneous(1.2)
    with pytest.raises(ProfileError):
        alpha_of(ScalingLaw(), -1.0)
    with pytest.raises(ProfileError):
        ScalingLaw(0.0)
