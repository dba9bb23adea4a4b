import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rayleigh_disc.poly import Poly
from rayleigh_disc.vectorfield import (PlanarPolySystem, RayleighParams, build_system, evaluate,
                                       exact_jacobian, jacobian, lienard_form, mirror_reverse,
                                       rayleigh_system, swap_reverse, symbol)

a_values = st.sampled_from([-3, -2, -1.5, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 2.5, 3])
n_values = st.integers(1, 4)
coords = st.floats(-2, 2, allow_nan=False)


def P(terms):
    return Poly(terms)


def fd_jacobian(sys_, pt, h=1e-5):
    pt = np.asarray(pt, dtype=float)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((evaluate(sys_, pt + e) - evaluate(sys_, pt - e)) / (2 * h))
    return np.column_stack(cols)


# -- construction ----------------------------------------------------------------

def test_rayleigh_a1_n1():
    s = rayleigh_system(RayleighParams(1, 1))
    assert s.P == P({(0, 1): 1})
    assert s.Q == P({(1, 0): -1, (0, 1): 1, (0, 3): -1})
    assert s.d == 3


def test_rayleigh_a0_is_linear():
    s = rayleigh_system(RayleighParams(0, 1))
    assert s.Q == P({(1, 0): -1})
    assert s.d == 1


def test_rayleigh_a2_n2():
    s = rayleigh_system(RayleighParams(2, 2))
    assert s.Q == P({(1, 0): -1, (0, 1): 2, (0, 5): -2})
    assert s.d == 5


def test_lienard_a1_n1():
    s = lienard_form(RayleighParams(1, 1))
    assert s.P == P({(0, 1): 1, (3, 0): 1, (1, 0): -1})
    assert s.Q == P({(1, 0): -1})


@pytest.mark.parametrize("n", [1, 2, 5])
def test_lienard_a0_any_n(n):
    s = lienard_form(RayleighParams(0, n))
    assert (s.P, s.Q) == (P({(0, 1): 1}), P({(1, 0): -1}))


@given(a_values, n_values)
def test_swap_links_the_two_forms(a, n):
    params = RayleighParams(a, n)
    assert swap_reverse(lienard_form(params)) == rayleigh_system(params)
    assert swap_reverse(rayleigh_system(params)) == lienard_form(params)


@given(a_values, n_values)
def test_forms_have_equal_degree(a, n):
    params = RayleighParams(a, n)
    assert rayleigh_system(params).d == lienard_form(params).d


def test_mirror_sends_a_to_minus_a():
    for n in (1, 2, 3):
        assert mirror_reverse(lienard_form(RayleighParams(1.5, n))) == \
            lienard_form(RayleighParams(-1.5, n))


def test_symbolic_parameter():
    a = symbol("a")
    s = lienard_form(RayleighParams(a, 2))
    assert s.P.coeff(5, 0) == a and s.P.coeff(1, 0) == -a
    assert s.subs({a: 3}) == lienard_form(RayleighParams(3, 2))


@pytest.mark.parametrize("bad", [0, -1, 1.5, True])
def test_invalid_n(bad):
    with pytest.raises(ValueError):
        RayleighParams(1, bad)


def test_invalid_a():
    with pytest.raises(ValueError):
        RayleighParams(float("inf"), 1)
    with pytest.raises(ValueError):
        RayleighParams(float("nan"), 1)


def test_unknown_form():
    with pytest.raises(ValueError):
        build_system(RayleighParams(1, 1), "eq3")


# -- evaluation ------------------------------------------------------------------

@pytest.mark.parametrize("a, pt, expected", [
    (1, (0, 0), (0, 0)),
    (1, (0, 1), (1, 0)),
    (0, (3, 4), (4, -3)),
])
def test_evaluate_examples(a, pt, expected):
    s = rayleigh_system(RayleighParams(a, 1))
    assert evaluate(s, pt) == pytest.approx(expected, abs=1e-15)
    # exact route agrees
    assert (s.P.exact_eval(*pt), s.Q.exact_eval(*pt)) == expected


def test_jacobian_examples():
    a = Fraction(7, 4)
    assert exact_jacobian(lienard_form(RayleighParams(a, 2)), (0, 0)) == [[-a, 1], [-1, 0]]
    assert exact_jacobian(rayleigh_system(RayleighParams(a, 2)), (0, 0)) == [[0, 1], [-1, a]]


@given(a_values, n_values)
def test_origin_determinant_is_one(a, n):
    for form in ("eq1", "eq2"):
        J = exact_jacobian(build_system(RayleighParams(a, n), form), (0, 0))
        assert J[0][0] * J[1][1] - J[0][1] * J[1][0] == 1


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = float(rng.uniform(-3, 3))
        n = int(rng.integers(1, 4))
        form = ("eq1", "eq2")[int(rng.integers(2))]
        s = build_system(RayleighParams(a, n), form)
        pt = rng.uniform(-2, 2, size=2)
        J, Jfd = jacobian(s, pt), fd_jacobian(s, pt)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - Jfd)) <= 1e-6 * scale


@given(a_values, n_values, coords, coords)
def test_jacobian_swap_relation(a, n, x, y):
    params = RayleighParams(a, n)
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    J1 = jacobian(rayleigh_system(params), (x, y))
    J2 = jacobian(lienard_form(params), (y, x))
    assert np.allclose(J1, -S @ J2 @ S, rtol=1e-12, atol=1e-12)
    f1 = evaluate(rayleigh_system(params), (x, y))
    f2 = evaluate(lienard_form(params), (y, x))
    assert np.allclose(f1, -S @ f2, rtol=1e-12, atol=1e-12)


# -- serialization ---------------------------------------------------------------

@given(a_values, n_values)
def test_system_json_round_trip(a, n):
    s = lienard_form(RayleighParams(a, n))
    obj = json.loads(s.dumps())
    assert obj["d"] == s.d
    assert PlanarPolySystem.from_json(obj) == s


def test_json_degree_mismatch_rejected():
    obj = lienard_form(RayleighParams(1, 1)).to_json()
    obj["d"] = 7
    with pytest.raises(ValueError):
        PlanarPolySystem.from_json(obj)


def test_rational_coefficients_serialize_exactly():
    s = lienard_form(RayleighParams(Fraction(1, 3), 1))
    obj = s.to_json()
    assert [3, 0, [1, 3]] in obj["P"]
    assert PlanarPolySystem.from_json(obj) == s
