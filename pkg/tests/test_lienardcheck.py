import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rayleigh_disc.lienardcheck import (VERDICT_NOT_APPLICABLE, VERDICT_UNIQUE,
                                        build_lienard_data, check_hypotheses, lienard_for_raw,
                                        monotonicity_probe, probe_direction,
                                        ratio_derivative_numerator)
from rayleigh_disc.poly import Poly
from rayleigh_disc.vectorfield import RayleighParams

nonzero_a = st.fractions(-5, 5, max_denominator=8).filter(lambda a: a != 0)


def xpoly(coeffs):
    return Poly({(i, 0): c for i, c in coeffs.items()})


def test_data_a1_n1():
    d = build_lienard_data(RayleighParams(1, 1))
    assert d.f == xpoly({0: -1, 2: 3})
    assert d.F == xpoly({1: -1, 3: 1})
    assert d.transform is None


def test_data_a2_n2():
    assert build_lienard_data(RayleighParams(2, 2)).f == xpoly({0: -2, 4: 10})


@given(st.fractions(-5, 5, max_denominator=8), st.integers(1, 5))
def test_g_and_phi_fixed(a, n):
    d = build_lienard_data(RayleighParams(a, n))
    assert d.g == xpoly({1: 1})
    assert d.phi == "identity"


@given(st.fractions(-5, 5, max_denominator=8), st.integers(1, 5))
def test_antiderivative_identities(a, n):
    d = build_lienard_data(RayleighParams(a, n))
    assert d.F.diff(0) == d.f and d.G.diff(0) == d.g
    assert d.F.exact_eval(0, 0) == 0 and d.G.exact_eval(0, 0) == 0


def test_negative_a_is_normalized():
    d = build_lienard_data(RayleighParams(-1, 2))
    assert d.a_effective == 1
    assert d.transform == "(x,y,t)->(-x,y,-t)"


def test_a0_flagged():
    d = build_lienard_data(RayleighParams(0, 1))
    assert d.f.is_zero()
    assert "f identically zero" in d.flags


def test_symbolic_parameter_rejected():
    from rayleigh_disc.vectorfield import symbol
    with pytest.raises(ValueError):
        build_lienard_data(RayleighParams(symbol("a"), 1))


@given(nonzero_a, st.integers(1, 4))
def test_ratio_derivative_has_sign_of_a(a, n):
    # d/dx (f/g) = a (1/x^2 + (4n^2 - 1) x^(2n-2)), numerator a (1 + (4n^2-1) x^(2n))
    N = ratio_derivative_numerator(lienard_for_raw(RayleighParams(a, n)))
    assert N == xpoly({0: a, 2 * n: a * (4 * n * n - 1)})
    for side in (-1, 1):
        xs = side * np.linspace(0.01, 5, 200)
        vals = np.array([N(float(x), 0.0) for x in xs])
        assert np.all(np.sign(vals) == np.sign(float(a)))


@pytest.mark.parametrize("a", [0.5, 1, 2])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_verdict_positive_a(a, n):
    rep = check_hypotheses(build_lienard_data(RayleighParams(a, n)))
    assert rep.verdict == VERDICT_UNIQUE
    assert [c.status for c in rep.conditions] == ["holds"] * 3
    assert rep.measured_direction == "non-decreasing"


@pytest.mark.parametrize("a", [-0.5, -1, -2])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_verdict_negative_a_after_equivalence(a, n):
    rep = check_hypotheses(build_lienard_data(RayleighParams(a, n)))
    assert rep.verdict == VERDICT_UNIQUE
    assert rep.conditions[1].status == "holds-after-time-reversal"
    assert rep.transform == "(x,y,t)->(-x,y,-t)"


def test_verdict_a0():
    rep = check_hypotheses(build_lienard_data(RayleighParams(0, 2)))
    assert rep.verdict == VERDICT_NOT_APPLICABLE
    assert not rep.holds


def test_both_readings_reported():
    rep = check_hypotheses(build_lienard_data(RayleighParams(1, 1)))
    assert rep.readings == {"non-decreasing": True, "non-increasing": False}
    assert rep.reading_used_by_family == "non-decreasing"
    assert any("disagree" in note for note in rep.notes)


def test_condition_one_witness():
    rep = check_hypotheses(build_lienard_data(RayleighParams(Fraction(1, 2), 3)))
    w = rep.conditions[0].witness
    assert w["G(-inf)"] == w["G(+inf)"] == "+inf"


def test_report_json_and_table():
    rep = check_hypotheses(build_lienard_data(RayleighParams(-1, 2)))
    obj = json.loads(rep.to_json())
    assert obj["verdict"] == VERDICT_UNIQUE
    assert [c["condition"] for c in obj["conditions"]] == [1, 2, 3]
    table = rep.table()
    assert "verdict: " + VERDICT_UNIQUE in table
    assert "non-increasing" in table


# -- numeric probes ----------------------------------------------------------------

POS = np.linspace(0.1, 2, 20)


def test_probe_increasing_positive_side():
    d = build_lienard_data(RayleighParams(1, 1))
    samples = monotonicity_probe(d, POS)
    assert probe_direction(samples) == "increasing"
    x, v = samples[3]
    assert v == pytest.approx((-1 + 3 * x * x) / x, rel=1e-14)


def test_probe_increasing_negative_side():
    d = build_lienard_data(RayleighParams(1, 1))
    assert probe_direction(monotonicity_probe(d, -POS[::-1])) == "increasing"


def test_probe_decreasing_for_negative_a():
    d = lienard_for_raw(RayleighParams(-1, 1))
    assert probe_direction(monotonicity_probe(d, POS)) == "decreasing"
    assert probe_direction(monotonicity_probe(d, -POS)) == "decreasing"


def test_probe_rejects_zero():
    with pytest.raises(ValueError):
        monotonicity_probe(build_lienard_data(RayleighParams(1, 1)), [0.0, 1.0])


def test_probe_direction_mixed():
    assert probe_direction([(0, 1.0), (1, 2.0), (2, 1.5)]) == "mixed"
