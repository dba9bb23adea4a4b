import json
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from rayleigh_disc.poly import Poly, coeff_from_json, coeff_to_json, exact

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=50)
monomials = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), fractions,
                            max_size=8)
polys = monomials.map(Poly)
points = st.tuples(st.fractions(-3, 3, max_denominator=10), st.fractions(-3, 3, max_denominator=10))


def test_zero_coefficients_are_dropped():
    p = Poly({(1, 0): 2, (0, 1): 0})
    assert p.terms() == [(1, 0, Fraction(2))]
    assert Poly({(2, 2): 0}).is_zero()


def test_repeated_keys_accumulate():
    p = Poly([(1, 1, 1), (1, 1, Fraction(1, 2))])
    assert p.coeff(1, 1) == Fraction(3, 2)


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        Poly({(-1, 0): 1})


def test_float_coefficients_are_exact_decimals():
    assert exact(0.1) == Fraction(1, 10)
    with pytest.raises(ValueError):
        exact(float("nan"))


def test_degree_and_axis_restriction():
    p = Poly({(3, 0): 2, (1, 1): 1, (0, 2): -1})
    assert p.degree == 3
    assert p.along_axis(0) == {3: 2}
    assert p.along_axis(1) == {2: -1}


@given(polys, polys, points)
def test_ring_operations_match_evaluation(p, q, pt):
    x, y = pt
    assert (p + q).exact_eval(x, y) == p.exact_eval(x, y) + q.exact_eval(x, y)
    assert (p * q).exact_eval(x, y) == p.exact_eval(x, y) * q.exact_eval(x, y)
    assert (p - p).is_zero()


@given(polys, polys)
def test_product_rule(p, q):
    for var in (0, 1):
        assert (p * q).diff(var) == p.diff(var) * q + p * q.diff(var)


@given(polys)
def test_antiderivative_inverts_diff(p):
    assert p.antiderivative(0).diff(0) == p


@given(polys, polys, polys, points)
def test_compose_is_substitution(p, u, v, pt):
    x, y = pt
    lhs = p.compose(u, v).exact_eval(x, y)
    assert lhs == p.exact_eval(u.exact_eval(x, y), v.exact_eval(x, y))


@given(polys)
def test_json_round_trip(p):
    assert Poly.from_json(json.loads(json.dumps(p.to_json()))) == p


@pytest.mark.parametrize("c, enc", [
    (Fraction(1, 4), "0.25"),
    (Fraction(-3, 8), "-0.375"),
    (Fraction(5), "5"),
    (Fraction(1, 3), [1, 3]),
])
def test_coefficient_encoding(c, enc):
    assert coeff_to_json(c) == enc
    assert coeff_from_json(enc) == c


def test_symbolic_coefficients_survive_json():
    a = sympy.Symbol("a", real=True)
    p = Poly({(1, 0): -a, (3, 0): a})
    assert p.is_symbolic()
    back = Poly.from_json(json.loads(json.dumps(p.to_json())))
    assert back.subs({a: 2}) == Poly({(1, 0): -2, (3, 0): 2})


def test_float_evaluation_matches_exact():
    p = Poly({(2, 1): Fraction(1, 3), (0, 0): -1})
    assert p(1.5, -2.0) == pytest.approx(float(p.exact_eval(Fraction(3, 2), -2)), rel=1e-15)


def test_divide_monomial():
    p = Poly({(2, 1): 1, (3, 2): 4})
    assert p.divide_monomial(2, 1) == Poly({(0, 0): 1, (1, 1): 4})
    with pytest.raises(ValueError):
        p.divide_monomial(3, 0)
