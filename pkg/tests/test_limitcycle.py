import json
import math
from functools import lru_cache

import numpy as np
import pytest
from scipy.integrate import quad

from rayleigh_disc.flow import first_return
from rayleigh_disc.limitcycle import (NoCycleFound, averaging_amplitude, averaging_quadrature,
                                      default_grid, find_cycle, infinity_attracts,
                                      mean_energy_production, return_map, segmented_multiplier,
                                      trapping_prediction, uniqueness_scan)
from rayleigh_disc.vectorfield import RayleighParams, build_system


@lru_cache(maxsize=None)
def cycle(a, n, form="eq2"):
    return find_cycle(RayleighParams(a, n), form)


# -- return map ----------------------------------------------------------------

@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_identity_map_at_a0(r):
    s = return_map(RayleighParams(0, 2), "eq2", r)
    assert abs(s.r_out - r) <= 1e-8
    assert abs(s.period - 2 * math.pi) <= 1e-9


def test_return_map_inside_grows():
    assert return_map(RayleighParams(-0.5, 1), "eq2", 0.2).r_out > 0.2


def test_return_map_outside_shrinks():
    assert return_map(RayleighParams(-0.5, 1), "eq2", 5.0).r_out < 5.0


def test_return_map_reports_error_estimate():
    s = return_map(RayleighParams(-0.5, 1), "eq2", 1.0)
    assert 0 <= s.err_est < 1e-7
    assert s.r_in == 1.0 and s.r_out > 0


@pytest.mark.parametrize("r", [0.0, -1.0, 100.0])
def test_return_map_domain(r):
    with pytest.raises(ValueError):
        return_map(RayleighParams(-0.5, 1), "eq2", r)


def test_return_map_direction_checked():
    with pytest.raises(ValueError):
        return_map(RayleighParams(-0.5, 1), "eq2", 1.0, direction="sideways")


def test_infinity_behaviour_follows_sign():
    assert infinity_attracts(build_system(RayleighParams(1, 1), "eq2"))
    assert not infinity_attracts(build_system(RayleighParams(-1, 1), "eq2"))
    assert infinity_attracts(build_system(RayleighParams(-1, 2), "eq1"))
    assert not infinity_attracts(build_system(RayleighParams(0, 1), "eq2"))


# -- averaging -----------------------------------------------------------------

def test_averaging_examples():
    assert averaging_amplitude(1) == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert averaging_amplitude(2) == pytest.approx((8 / 5) ** 0.25, rel=1e-15)


@pytest.mark.parametrize("n", range(1, 11))
def test_closed_form_matches_quadrature(n):
    assert abs(averaging_amplitude(n) - averaging_quadrature(n)) <= 1e-10


@pytest.mark.parametrize("n", [1, 3])
def test_energy_production_vanishes_at_amplitude(n):
    r = averaging_amplitude(n)
    assert abs(mean_energy_production(r, n)) <= 1e-12
    # positive inside, negative outside
    assert mean_energy_production(0.9 * r, n) > 0 > mean_energy_production(1.1 * r, n)


def test_energy_production_quadrature_independent():
    # trapezoid on a periodic integrand is spectrally accurate
    th = np.linspace(0, 2 * math.pi, 4001)[:-1]
    r, n = 1.3, 2
    vals = (1 - (r * np.sin(th)) ** (2 * n)) * (r * np.sin(th)) ** 2
    assert mean_energy_production(r, n) == pytest.approx(vals.mean(), abs=1e-13)
    ref, _ = quad(lambda t: (1 - (r * math.sin(t)) ** 4) * (r * math.sin(t)) ** 2, 0, 2 * math.pi)
    assert mean_energy_production(r, n) == pytest.approx(ref / (2 * math.pi), abs=1e-12)


def test_amplitudes_decrease_toward_one():
    vals = [averaging_amplitude(n) for n in range(1, 11)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(v > 1 for v in vals)
    assert averaging_amplitude(200) == pytest.approx(1.0, abs=0.02)


def test_averaging_rejects_n0():
    with pytest.raises(ValueError):
        averaging_amplitude(0)


# -- cycles ----------------------------------------------------------------------

def test_no_cycle_at_a0():
    with pytest.raises(NoCycleFound):
        find_cycle(RayleighParams(0, 1))


@pytest.mark.parametrize("n", [1, 2])
def test_small_a_amplitude(n):
    target = averaging_amplitude(n)
    for a in (-0.01, 0.01):
        assert abs(cycle(a, n).r_star - target) <= 0.02 * target


def test_tiny_a_amplitude():
    target = averaging_amplitude(1)
    assert abs(cycle(-0.002, 1).r_star - target) <= 0.005 * target


def test_conjugate_cycles_share_radius_opposite_stability():
    lo, hi = cycle(-0.01, 1), cycle(0.01, 1)
    assert abs(lo.r_star - hi.r_star) <= 0.01 * lo.r_star
    assert {lo.stability, hi.stability} == {"stable", "unstable"}


@pytest.mark.parametrize("a", [0.25, 1.0, 2.0])
@pytest.mark.parametrize("n", [1, 3])
def test_conjugacy_over_range(a, n):
    assert cycle(a, n).r_star == pytest.approx(cycle(-a, n).r_star, rel=0.01)


@pytest.mark.parametrize("a", [-2.0, -0.5, 0.5, 2.0])
@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("form", ["eq1", "eq2"])
def test_record_invariants(a, n, form):
    rec = cycle(a, n, form)
    assert rec.residual <= 1e-8
    assert rec.multiplier > 0
    assert (rec.stability == "stable") == (rec.multiplier < 1)
    assert abs(rec.multiplier - rec.multiplier_div) <= 0.05 * rec.multiplier_div
    assert rec.stability == trapping_prediction(RayleighParams(a, n), form)
    assert not rec.flagged


def test_eq2_stability_by_sign():
    assert cycle(-1.0, 1).stability == "stable"
    assert cycle(1.0, 1).stability == "unstable"
    assert cycle(-1.0, 1, "eq1").stability == "unstable"


def test_amplitudes_read_from_orbit():
    rec = cycle(-1.0, 2)
    assert rec.amp_x == pytest.approx(np.max(np.abs(rec.orbit[:, 0])))
    assert rec.amp_y == pytest.approx(np.max(np.abs(rec.orbit[:, 1])))
    # the section crossing is one point of the orbit
    assert rec.amp_x >= rec.r_star - 1e-9


def test_cycle_closes():
    rec = cycle(0.5, 1)
    assert np.hypot(*(rec.orbit[0] - rec.orbit[-1])) <= 1e-6
    assert rec.period > 2 * math.pi * 0.9


def test_segmented_agrees_with_direct():
    params = RayleighParams(-1.0, 1)
    rec = cycle(-1.0, 1)
    assert rec.multiplier_method == "direct"
    s = build_system(params, "eq2")
    ev = first_return(s, rec.r_star, keep_trajectory=True)
    assert segmented_multiplier(s, ev) == pytest.approx(rec.multiplier, rel=1e-3)


def test_strong_contraction_uses_segments():
    rec = cycle(-2.0, 3)
    assert rec.multiplier_method == "segmented"
    assert rec.multiplier < 1e-10
    assert rec.multiplier == pytest.approx(rec.multiplier_div, rel=0.05)


def test_record_serializes():
    obj = json.loads(json.dumps(cycle(0.5, 1).to_dict()))
    assert set(cycle(0.5, 1).row()) <= set(obj)
    assert obj["stability"] in ("stable", "unstable")


# -- uniqueness ------------------------------------------------------------------

def test_identity_scan_at_a0():
    # no sign changes: every value sits within the zero band
    count, pattern = uniqueness_scan(RayleighParams(0, 1), "eq2", default_grid(50))
    assert count == 0 and set(pattern) == {0}


def test_grid_must_increase():
    with pytest.raises(ValueError):
        uniqueness_scan(RayleighParams(-1, 1), "eq2", [1.0, 0.5])


@pytest.mark.slow
@pytest.mark.parametrize("a, n", [(-1.0, 1), (2.0, 3), (-0.25, 2), (0.5, 1)])
def test_single_sign_change(a, n):
    count, pattern = uniqueness_scan(RayleighParams(a, n), "eq2", default_grid(50))
    assert count == 1
    assert pattern[0] != 0 and pattern[-1] != 0
