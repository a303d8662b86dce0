import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmbounds.mapmodel import FreeSpaceMap, deriv_1d, deriv_1d_fd, three_source_map
from rmbounds.spectral import (
    FRIIS_DERIVATIVE_CONSTANT,
    derivative_bound,
    derivative_constant,
    ft_closed_form,
    ft_numeric,
    general_derivative_bound,
    hf_fraction_bound,
    hp_energy_bound,
    spatial_energy,
    spectral_energy_above,
    spectrum_bounds,
    total_energy_lower_bound,
    var_bound_extremal_map,
    var_bounds,
)

# frozen with mpmath at 30 digits
THREE_SRC_ENERGY_LB = 12.131388743005670
THREE_SRC_SPATIAL_ENERGY = 6.5204244075837853
GAMMA4_CONSTANT = 1.0352166562499026
GAMMA3_CONSTANT = 0.85865010335991924


def single(x=0.0, d=1.0, alpha=1.0, **kw):
    return FreeSpaceMap.from_arrays([x], [d], [alpha], **kw)


def random_map(rng, m=None, gamma=2.0):
    m = m or int(rng.integers(1, 6))
    return FreeSpaceMap.from_arrays(
        rng.uniform(-20, 20, m), rng.uniform(1, 5, m), rng.uniform(0.1, 5, m), gamma=gamma
    )


def test_ft_closed_form_examples():
    assert ft_closed_form(single(), 0.0) == pytest.approx(math.pi, rel=1e-15)
    assert ft_closed_form(three_source_map(), 0.0).real == pytest.approx(3.5 * math.pi, rel=1e-15)


def test_ft_conjugate_symmetry():
    k = np.linspace(0, 5, 11)
    m = three_source_map()
    np.testing.assert_allclose(ft_closed_form(m, -k), np.conj(ft_closed_form(m, k)), rtol=1e-14)


def test_ft_numeric_matches_closed_form():
    m = single()
    for k in (0.0, 1.0):
        num = ft_numeric(m, k, half_width=1e4, n_points=100_001)
        assert abs(num - ft_closed_form(m, k)) <= 1e-3 * abs(ft_closed_form(m, k))


def test_ft_numeric_rejects_even_grid():
    with pytest.raises(ValueError):
        ft_numeric(single(), 0.0, 10.0, 1002)
    with pytest.raises(ValueError):
        ft_numeric(single(), 0.0, 10.0, 999)


def test_spectral_rejects_non_friis():
    with pytest.raises(NotImplementedError):
        ft_closed_form(single(gamma=3.0), 0.0)
    with pytest.raises(NotImplementedError):
        hp_energy_bound(single(gamma=3.0), 0.0)


def test_spectrum_bounds_fields():
    b = spectrum_bounds(three_source_map())
    assert b.dmin_map == 1.0 and b.dmax_map == 3.0
    assert b.mag_envelope_coeff == pytest.approx(7 * math.pi)
    assert b.total_energy_lb == pytest.approx(THREE_SRC_ENERGY_LB, rel=1e-14)


def test_magnitude_envelope_at_two_over_dmin():
    m = three_source_map()
    b = spectrum_bounds(m)
    assert abs(ft_closed_form(m, 2 / b.dmin_map)) <= b.mag_envelope_coeff * math.exp(-2)


def test_derivative_bound_single_source():
    assert derivative_bound(single()) == pytest.approx(3 * math.sqrt(3) / 8, rel=1e-15)


def test_derivative_constant_gamma2_is_friis_bitwise():
    assert derivative_constant(2.0) == FRIIS_DERIVATIVE_CONSTANT


def test_derivative_bound_generalized_equals_friis_bitwise():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = random_map(rng)
        assert general_derivative_bound(m) == derivative_bound(m)


@pytest.mark.parametrize("gamma,expected", [(4.0, GAMMA4_CONSTANT), (3.0, GAMMA3_CONSTANT)])
def test_derivative_constant_matches_numeric_maximum(gamma, expected):
    assert derivative_constant(gamma) == pytest.approx(expected, rel=1e-14)


def test_derivative_bound_holds_on_grid():
    rng = np.random.default_rng(11)
    x = np.linspace(-40, 40, 100_001)
    for _ in range(100):
        m = random_map(rng)
        assert np.max(np.abs(deriv_1d(m, x))) <= derivative_bound(m)


def test_derivative_bound_attained_by_single_source():
    x = np.linspace(-5, 5, 1_000_001)
    g = np.abs(deriv_1d(single(), x))
    assert abs(g.max() - derivative_bound(single())) <= 1e-6
    assert abs(abs(x[g.argmax()]) - 1 / math.sqrt(3)) <= 1e-3


def test_general_gamma_bound_holds_on_grid():
    rng = np.random.default_rng(12)
    x = np.linspace(-40, 40, 20_001)
    for gamma in (1.0, 3.0, 4.0, 6.0):
        for _ in range(20):
            m = random_map(rng, gamma=gamma)
            assert np.max(np.abs(deriv_1d_fd(m, x, h=1e-5))) <= derivative_bound(m) * (1 + 1e-6)


def test_var_bounds_examples():
    lo, hi = var_bounds(1.0, 2.0, 1.0)
    assert hi == pytest.approx(3 + 2 * math.sqrt(2), rel=1e-14)
    assert lo * hi == pytest.approx(1.0, rel=1e-14)
    assert var_bounds(2.5, 0.0, 1.0) == (2.5, 2.5)
    lo, hi = var_bounds(1.0, 1e-9, 1.0)
    assert hi - lo < 1e-8


def test_var_bounds_reject_bad_input():
    with pytest.raises(ValueError):
        var_bounds(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        var_bounds(1.0, 1.0, 0.0)


def test_extremal_map_example():
    m = var_bound_extremal_map(1.0, 2.0, 1.0)
    assert m.xs[0] == pytest.approx(1 + math.sqrt(2), rel=1e-15)
    assert m(0.0) == pytest.approx(1.0, rel=1e-12)
    g = math.sqrt(2)
    assert m(2.0) == pytest.approx((g + 1) / (g - 1), rel=1e-9)


@pytest.mark.parametrize("delta", [-3.0, -0.5, 0.5, 3.0])
def test_extremal_maps_attain_both_bounds(delta):
    lo, hi = var_bounds(2.0, delta, 1.5)
    upper = var_bound_extremal_map(2.0, delta, 1.5, "upper")
    lower = var_bound_extremal_map(2.0, delta, 1.5, "lower")
    assert upper(0.0) == pytest.approx(2.0, rel=1e-12)
    assert lower(0.0) == pytest.approx(2.0, rel=1e-12)
    assert upper(delta) == pytest.approx(hi, rel=1e-9)
    assert lower(delta) == pytest.approx(lo, rel=1e-9)


def test_brute_force_never_exceeds_upper_bound():
    # every single source with d >= 1 through p(0) = 1 on a parameter grid
    delta = 1.7
    lo, hi = var_bounds(1.0, delta, 1.0)
    xm, d = np.meshgrid(np.linspace(-20, 20, 801), np.linspace(1, 10, 181))
    alpha = xm**2 + d**2
    ratio = alpha / ((delta - xm) ** 2 + d**2)
    assert ratio.max() <= hi * (1 + 1e-12)
    assert ratio.min() >= lo * (1 - 1e-12)


def test_hp_energy_bound_examples():
    assert hp_energy_bound(single(), 0.0) == pytest.approx(math.pi**2 / 2, rel=1e-15)
    m = three_source_map()
    assert hp_energy_bound(m, 1.5 + 0.5) == pytest.approx(hp_energy_bound(m, 1.5) / math.e, rel=1e-14)


def test_total_energy_lower_bound_examples():
    assert total_energy_lower_bound(single()) == pytest.approx(math.pi**2 / 2, rel=1e-15)
    assert total_energy_lower_bound(three_source_map()) == pytest.approx(THREE_SRC_ENERGY_LB, rel=1e-14)


def test_hf_fraction_examples():
    assert hf_fraction_bound(single(), 0.0) == 1.0
    assert hf_fraction_bound(single(), 5.0) == pytest.approx(math.exp(-10), rel=1e-14)


def test_parseval_figure3():
    m = three_source_map()
    assert spatial_energy(m) == pytest.approx(THREE_SRC_SPATIAL_ENERGY, rel=1e-8)
    assert spectral_energy_above(m, 0.0) / math.pi == pytest.approx(THREE_SRC_SPATIAL_ENERGY, rel=1e-8)


def test_energy_ordering_random_maps():
    rng = np.random.default_rng(5)
    for _ in range(50):
        m = random_map(rng)
        total = spectral_energy_above(m, 0.0)
        # M = 1 makes both inequalities equalities, so allow quadrature noise
        assert hp_energy_bound(m, 0.0) * (1 + 1e-9) >= total >= total_energy_lower_bound(m) * (1 - 1e-9)
        for B in (0.1, 0.5, 2.0):
            tail = spectral_energy_above(m, B)
            assert tail <= hp_energy_bound(m, B) * (1 + 1e-9)
            assert tail / total <= hf_fraction_bound(m, B) * (1 + 1e-9)


def test_single_source_energy_bounds_coincide():
    m = single(d=2.0, alpha=3.0)
    total = spectral_energy_above(m, 0.0)
    assert total == pytest.approx(total_energy_lower_bound(m), rel=1e-9)
    assert total == pytest.approx(hp_energy_bound(m, 0.0), rel=1e-9)


small_maps = st.integers(1, 5).flatmap(
    lambda m: st.tuples(
        st.lists(st.floats(-30, 30), min_size=m, max_size=m),
        st.lists(st.floats(1, 10), min_size=m, max_size=m),
        st.lists(st.floats(1e-2, 1e2), min_size=m, max_size=m),
    )
)


@settings(max_examples=80, deadline=None)
@given(small_maps, st.floats(-20, 20))
def test_magnitude_envelope_property(params, kappa):
    m = FreeSpaceMap.from_arrays(*params)
    b = spectrum_bounds(m)
    assert abs(ft_closed_form(m, kappa)) <= b.mag_envelope_coeff * math.exp(-b.dmin_map * abs(kappa)) * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(small_maps, st.floats(-50, 50), st.floats(-20, 20).filter(lambda v: v != 0))
def test_variability_property(params, x, delta):
    m = FreeSpaceMap.from_arrays(*params, dmin=1.0)
    lo, hi = var_bounds(m(x), delta, 1.0)
    assert lo * (1 - 1e-12) <= m(x + delta) <= hi * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(-1e3, 1e3).filter(lambda v: v != 0), st.floats(1e-2, 1e2))
def test_var_bounds_reciprocal(p, delta, dmin):
    lo, hi = var_bounds(p, delta, dmin)
    assert lo == pytest.approx(p**2 / hi, rel=1e-12)
    assert var_bounds(p, -delta, dmin) == (lo, hi)
