import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmbounds.errors import (
    FIRST_SLOPE_FACTORS,
    FRIIS_BOUND_CONSTANTS,
    ZEROTH_SLOPE_FACTORS,
    BoundReport,
    bound_first,
    bound_sinc_avg,
    bound_zeroth,
    error_metrics,
    general_bounds,
    relative_error_bound,
    relative_error_bound_equal,
    sinc_avg_error,
    friis_bounds,
    truncation_residue,
)
from rmbounds.interp import SampleSet, interp_linear, interp_nearest
from rmbounds.mapmodel import FreeSpaceMap, MappedRegion, three_source_map, proximity_coefficient
from rmbounds.spectral import derivative_bound, spatial_energy

# literal closed forms of the Friis-exponent constants
LITERAL = {
    "zeroth": {"l1": 3 * math.sqrt(3) / 32, "l2": 3 / 16, "linf": 3**1.5 / 16},
    "first": {
        "l1": 27 * math.sqrt(3) / 256,
        "l2": math.sqrt((144 * math.sqrt(2) - 117) / 2048),
        "linf": 3**1.5 / 16,
    },
}
# frozen with mpmath at 30 digits
ZEROTH_UNIT = (0.16237976320958225, 0.1875, 0.32475952641916449)
FIRST_UNIT = (0.18267723361078003, 0.20568904894125561, 0.32475952641916449)
REL_UNIT = 0.022381163872297782
SINC_EXAMPLE = 1.1557273497909217


def unit_map():
    return FreeSpaceMap.from_arrays([0.0], [1.0], [1.0])


def test_error_metrics_zero_for_exact_estimate():
    m = three_source_map()
    r = error_metrics(m, m, MappedRegion(0.0, 10.0), 1000)
    assert (r.l1, r.l2, r.linf) == (0.0, 0.0, 0.0)
    assert r.grid_points == 1000


def test_error_metrics_constant_difference():
    m = three_source_map()
    r = error_metrics(m, lambda x: m(x) - 0.25, MappedRegion(0.0, 1.0), 1000)
    assert r.l1 == pytest.approx(0.25, rel=1e-12)
    assert r.l2 == pytest.approx(0.25, rel=1e-12)
    assert r.linf == pytest.approx(0.25, rel=1e-12)


def test_error_metrics_rejects_tiny_grid():
    with pytest.raises(ValueError):
        error_metrics(unit_map(), unit_map(), MappedRegion(0.0, 1.0), 1)


@pytest.mark.parametrize("d", [30.0, 100.0, 1000.0])
def test_error_metrics_refinement(d):
    m = FreeSpaceMap.from_arrays([1000.0, 5000.0, 8000.0], d, (4 * math.pi) ** 2)
    s = SampleSet.from_map(m, np.arange(11) * 1000.0)
    region = MappedRegion(0.0, 10_000.0)
    coarse = error_metrics(m, lambda x: interp_linear(s, x), region, 1000)
    fine = error_metrics(m, lambda x: interp_linear(s, x), region, 2000)
    assert abs(fine.l1 - coarse.l1) < 0.01 * fine.l1


def test_table_one_constants_match_closed_forms():
    for method, consts in FRIIS_BOUND_CONSTANTS.items():
        for k, v in consts.items():
            assert v == pytest.approx(LITERAL[method][k], rel=1e-15)


def test_bound_zeroth_unit_example():
    b = bound_zeroth(unit_map(), [1.0])
    assert (b.l1_bound, b.l2_bound, b.linf_bound) == pytest.approx(ZEROTH_UNIT, rel=1e-15)
    assert b.method == "zeroth" and b.prox == 1.0


def test_bound_first_unit_example():
    b = bound_first(unit_map(), [1.0])
    assert (b.l1_bound, b.l2_bound, b.linf_bound) == pytest.approx(FIRST_UNIT, rel=1e-15)


def test_first_order_constants_exceed_zeroth():
    assert FRIIS_BOUND_CONSTANTS["first"]["l1"] > FRIIS_BOUND_CONSTANTS["zeroth"]["l1"]
    assert FRIIS_BOUND_CONSTANTS["first"]["l2"] > FRIIS_BOUND_CONSTANTS["zeroth"]["l2"]
    assert FRIIS_BOUND_CONSTANTS["first"]["linf"] == FRIIS_BOUND_CONSTANTS["zeroth"]["linf"]


def test_halving_gaps():
    m = three_source_map()
    deltas = np.array([1.0, 2.5, 0.7])
    full, half = bound_zeroth(m, deltas), bound_zeroth(m, deltas / 2)
    assert half.l1_bound == pytest.approx(full.l1_bound / 4, rel=1e-14)
    assert half.l2_bound == pytest.approx(full.l2_bound / (2 * math.sqrt(2)), rel=1e-14)
    assert half.linf_bound == pytest.approx(full.linf_bound / 2, rel=1e-14)


def test_deltas_from_sampleset():
    m = three_source_map()
    s = SampleSet.from_map(m, [0.0, 1.0, 3.0, 6.0])
    assert bound_first(m, s) == bound_first(m, [1.0, 2.0, 3.0])


def test_bad_deltas():
    with pytest.raises(ValueError):
        bound_zeroth(unit_map(), [])
    with pytest.raises(ValueError):
        bound_zeroth(unit_map(), [1.0, 0.0])
    with pytest.raises(ValueError):
        friis_bounds(1.0, [1.0], "second")


@pytest.mark.parametrize("gamma", [1.5, 3.0, 4.0])
def test_general_gamma_uses_slope_forms(gamma):
    m = three_source_map().with_gamma(gamma)
    deltas = np.array([0.5, 1.5, 2.0])
    mb = derivative_bound(m)
    for method, factors in (("zeroth", ZEROTH_SLOPE_FACTORS), ("first", FIRST_SLOPE_FACTORS)):
        b = bound_zeroth(m, deltas) if method == "zeroth" else bound_first(m, deltas)
        assert b.l1_bound == pytest.approx(factors["l1"] * mb * np.sum(deltas**2), rel=1e-14)
        assert b.l2_bound == pytest.approx(factors["l2"] * mb * math.sqrt(np.sum(deltas**3)), rel=1e-14)
        assert b.linf_bound == pytest.approx(factors["linf"] * mb * deltas.max(), rel=1e-14)


def test_general_gamma_bounds_are_sound():
    rng = np.random.default_rng(8)
    for gamma in (3.0, 4.0):
        for _ in range(20):
            m = FreeSpaceMap.from_arrays(rng.uniform(0, 30, 3), rng.uniform(1, 4, 3), rng.uniform(0.5, 3, 3), gamma=gamma)
            s = SampleSet.from_map(m, np.sort(rng.uniform(0, 30, 8)))
            region = MappedRegion(float(s.xs[0]), float(s.xs[-1]))
            for fn, bound in ((interp_nearest, bound_zeroth), (interp_linear, bound_first)):
                e = error_metrics(m, lambda x: fn(s, x), region, 2000)
                b = bound(m, s)
                assert e.l1 <= b.l1_bound + 1e-9
                assert e.l2 <= b.l2_bound + 1e-9
                assert e.linf <= b.linf_bound + 1e-9


def test_bound_report_fields():
    b = bound_zeroth(three_source_map(), [1.0])
    assert isinstance(b, BoundReport)
    assert set(b.as_dict()) == {"l1_bound", "l2_bound", "linf_bound", "method", "prox"}


def test_bound_sinc_example():
    assert bound_sinc_avg(unit_map(), 2 * math.pi) == pytest.approx(SINC_EXAMPLE, rel=1e-15)


def test_bound_sinc_monotone():
    values = [bound_sinc_avg(FreeSpaceMap.from_arrays([0.0], [d], [1.0]), 5.0) for d in (1, 2, 4, 8)]
    assert all(a > b for a, b in zip(values, values[1:]))
    values = [bound_sinc_avg(unit_map(), s) for s in (1, 2, 4, 8)]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        bound_sinc_avg(unit_map(), 0.0)


def test_exact_aliasing_below_bound_random_maps():
    rng = np.random.default_rng(9)
    for _ in range(50):
        m_src = int(rng.integers(1, 5))
        m = FreeSpaceMap.from_arrays(rng.uniform(-20, 20, m_src), rng.uniform(1, 5, m_src), rng.uniform(0.1, 5, m_src))
        spacing = float(rng.uniform(0.5, 10))
        assert bound_sinc_avg(m, spacing, exact=True) <= bound_sinc_avg(m, spacing) * (1 + 1e-9)


def test_relative_error_example():
    assert relative_error_bound(unit_map(), [1.0]) == pytest.approx(REL_UNIT, rel=1e-15)


def test_relative_error_equal_form():
    deltas = [1.0, 3.0, 2.0]
    for alpha in (1e-6, 1.0, 1e4):
        m = FreeSpaceMap.from_arrays([0.0, 10.0, 20.0], 4.0, alpha)
        assert relative_error_bound(m, deltas) == pytest.approx(relative_error_bound_equal(3, 4.0, deltas), rel=1e-12)


def test_relative_error_holds_for_nearest_neighbour():
    rng = np.random.default_rng(10)
    for _ in range(20):
        m = FreeSpaceMap.from_arrays(rng.uniform(0, 20, 3), rng.uniform(1, 4, 3), rng.uniform(0.5, 3, 3))
        s = SampleSet.from_map(m, np.sort(rng.uniform(-5, 25, 12)))
        e = error_metrics(m, lambda x: interp_nearest(s, x), MappedRegion(float(s.xs[0]), float(s.xs[-1])), 4000)
        assert e.l2**2 / spatial_energy(m) <= relative_error_bound(m, s)


def test_sinc_avg_error_small_case():
    m = FreeSpaceMap.from_arrays([0.0], [3.0], [1.0])
    r = sinc_avg_error(m, 2.0, (-2000.0, 2000.0), n_offsets=8)
    assert len(r.per_offset) == 8
    assert r.residue == pytest.approx(truncation_residue(m, -2000.0, 2000.0))
    assert r.residue_ratio < 0.01
    assert r.mean == pytest.approx(bound_sinc_avg(m, 2.0, exact=True), rel=0.05)
    assert r.mean <= bound_sinc_avg(m, 2.0)


interval_cases = st.tuples(
    st.integers(1, 4).flatmap(
        lambda m: st.tuples(
            st.lists(st.floats(-10, 110), min_size=m, max_size=m),
            st.lists(st.floats(1, 40), min_size=m, max_size=m),
            st.lists(st.floats(1e-2, 1e3), min_size=m, max_size=m),
        )
    ),
    st.lists(st.floats(0, 100), min_size=2, max_size=25, unique=True).filter(
        lambda xs: min(np.diff(sorted(xs))) > 1e-2
    ),
)


@settings(max_examples=200, deadline=None)
@given(interval_cases)
def test_zeroth_order_soundness(case):
    params, xs = case
    m = FreeSpaceMap.from_arrays(*params)
    s = SampleSet.from_map(m, sorted(xs))
    e = error_metrics(m, lambda x: interp_nearest(s, x), MappedRegion(float(s.xs[0]), float(s.xs[-1])), 1000)
    b = bound_zeroth(m, s)
    assert e.l1 <= b.l1_bound + 1e-9
    assert e.l2 <= b.l2_bound + 1e-9
    assert e.linf <= b.linf_bound + 1e-9


@settings(max_examples=200, deadline=None)
@given(interval_cases)
def test_first_order_soundness(case):
    params, xs = case
    m = FreeSpaceMap.from_arrays(*params)
    s = SampleSet.from_map(m, sorted(xs))
    e = error_metrics(m, lambda x: interp_linear(s, x), MappedRegion(float(s.xs[0]), float(s.xs[-1])), 1000)
    b = bound_first(m, s)
    assert e.l1 <= b.l1_bound + 1e-9
    assert e.l2 <= b.l2_bound + 1e-9
    assert e.linf <= b.linf_bound + 1e-9


@settings(max_examples=100, deadline=None)
@given(interval_cases, st.sampled_from(["zeroth", "first"]))
def test_generalized_path_is_bitwise_table_one_at_gamma2(case, method):
    params, xs = case
    m = FreeSpaceMap.from_arrays(*params)
    deltas = np.diff(sorted(xs))
    assert general_bounds(m, deltas, method) == friis_bounds(proximity_coefficient(m), deltas, method)


@settings(max_examples=100, deadline=None)
@given(interval_cases, st.floats(0.1, 10))
def test_bounds_linear_in_proximity(case, c):
    params, xs = case
    x, d, a = params
    deltas = np.diff(sorted(xs))
    base = bound_zeroth(FreeSpaceMap.from_arrays(x, d, a), deltas)
    scaled = bound_zeroth(FreeSpaceMap.from_arrays(x, d, np.array(a) * c), deltas)
    assert scaled.l1_bound == pytest.approx(c * base.l1_bound, rel=1e-12)
    assert scaled.l2_bound == pytest.approx(c * base.l2_bound, rel=1e-12)
    assert scaled.linf_bound == pytest.approx(c * base.linf_bound, rel=1e-12)
