"""Sparse bivariate polynomials with exact coefficients.

Coefficients live in one of two domains:

* ``fractions.Fraction`` for numeric data. Integers are promoted and floats are
  read as the shortest decimal that prints them (``0.1`` becomes ``1/10``).
* ``sympy`` expressions when a coefficient carries a free symbol, e.g. a
  symbolic damping parameter. Those are kept expanded so that structural
  equality is meaningful.

Terms are stored as ``{(i, j): c}`` meaning ``c * x**i * y**j`` with ``c != 0``.
"""

from __future__ import annotations

import math
import numbers
from collections.abc import Iterable, Mapping
from fractions import Fraction

import sympy

__all__ = ["Poly", "exact", "is_symbolic", "coeff_to_json", "coeff_from_json"]


def exact(c):
    """Coerce a scalar into the exact coefficient domain."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(c, numbers.Integral):
        return Fraction(int(c))
    if isinstance(c, float):
        if not math.isfinite(c):
            raise ValueError(f"non-finite coefficient {c!r}")
        return Fraction(repr(c))
    if isinstance(c, sympy.Basic):
        c = sympy.expand(c)
        if c.is_Rational:
            return Fraction(int(c.p), int(c.q))
        if c.is_Float:
            return exact(float(c))
        return c
    if isinstance(c, numbers.Rational):
        return Fraction(c.numerator, c.denominator)
    if isinstance(c, numbers.Real):
        return exact(float(c))
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def is_symbolic(c) -> bool:
    return isinstance(c, sympy.Basic)


def _canon(c):
    if isinstance(c, sympy.Basic):
        return exact(c)
    return c


def _is_zero(c) -> bool:
    return c == 0


def coeff_to_json(c):
    """Exact decimal string when the expansion terminates, else ``[num, den]``."""
    if is_symbolic(c):
        return {"expr": str(c)}
    c = Fraction(c)
    den = c.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return [c.numerator, c.denominator]
    k = max(twos, fives)
    scaled = c * 10**k
    assert scaled.denominator == 1
    digits = str(abs(scaled.numerator)).rjust(k + 1, "0")
    sign = "-" if c < 0 else ""
    if k == 0:
        return sign + digits
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def coeff_from_json(obj):
    if isinstance(obj, str):
        return Fraction(obj)
    if isinstance(obj, list) and len(obj) == 2:
        return Fraction(int(obj[0]), int(obj[1]))
    if isinstance(obj, dict) and "expr" in obj:
        expr = sympy.sympify(obj["expr"])
        # parameters are created as real symbols; match them on the way back
        real = {s: sympy.Symbol(s.name, real=True) for s in expr.free_symbols}
        return exact(expr.xreplace(real))
    if isinstance(obj, (int, float)):
        return exact(obj)
    raise ValueError(f"cannot decode coefficient {obj!r}")


class Poly:
    """Immutable sparse polynomial in two variables.

    Variable 0 is called ``x`` and variable 1 ``y``; callers that work in other
    coordinates (chart ``(u, v)``, blow-up ``(r, w)``) reuse the same slots.
    """

    __slots__ = ("_c", "_hash", "_table")

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict[tuple[int, int], object] = {}
        if isinstance(terms, Mapping):
            items = terms.items()
        else:
            items = (((i, j), c) for i, j, c in terms)
        for (i, j), c in items:
            i, j = int(i), int(j)
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            key = (i, j)
            acc[key] = acc[key] + exact(c) if key in acc else exact(c)
        cleaned = {}
        for key in sorted(acc):
            c = _canon(acc[key])
            if not _is_zero(c):
                cleaned[key] = c
        self._c = cleaned
        self._hash = None
        self._table = None

    # construction helpers

    @classmethod
    def const(cls, c) -> Poly:
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> Poly:
        return cls({(i, j): c})

    @classmethod
    def x(cls) -> Poly:
        return cls({(1, 0): 1})

    @classmethod
    def y(cls) -> Poly:
        return cls({(0, 1): 1})

    # inspection

    def terms(self) -> list[tuple[int, int, object]]:
        """Monomials sorted by ``(i, j)``."""
        return [(i, j, c) for (i, j), c in self._c.items()]

    def items(self):
        return self._c.items()

    def coeff(self, i: int, j: int):
        return self._c.get((i, j), Fraction(0))

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return max((i + j for i, j in self._c), default=0)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    def __len__(self) -> int:
        return len(self._c)

    def min_power(self, var: int) -> int:
        """Smallest exponent of ``var`` over all terms (0 for the zero poly)."""
        return min((k[var] for k in self._c), default=0)

    def low_order(self) -> int:
        """Smallest total degree among the terms."""
        return min((i + j for i, j in self._c), default=0)

    def along_axis(self, var: int) -> dict[int, object]:
        """Restriction to the axis where the *other* variable vanishes.

        ``p.along_axis(0)`` gives ``{i: c}`` for ``p(x, 0) = sum c x**i``.
        """
        other = 1 - var
        return {k[var]: c for k, c in self._c.items() if k[other] == 0}

    def is_symbolic(self) -> bool:
        return any(is_symbolic(c) for c in self._c.values())

    def free_symbols(self) -> set:
        out = set()
        for c in self._c.values():
            if is_symbolic(c):
                out |= c.free_symbols
        return out

    # arithmetic

    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            return other
        return Poly.const(other)

    def __add__(self, other) -> Poly:
        other = self._coerce(other)
        acc = dict(self._c)
        for k, c in other._c.items():
            acc[k] = acc[k] + c if k in acc else c
        return Poly(acc)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly({k: -c for k, c in self._c.items()})

    def __sub__(self, other) -> Poly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> Poly:
        return self._coerce(other) - self

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            s = exact(other)
            return Poly({k: c * s for k, c in self._c.items()})
        acc: dict = {}
        for (i1, j1), c1 in self._c.items():
            for (i2, j2), c2 in other._c.items():
                k = (i1 + i2, j1 + j2)
                acc[k] = acc[k] + c1 * c2 if k in acc else c1 * c2
        return Poly(acc)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> Poly:
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Poly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            if isinstance(other, (numbers.Number, sympy.Basic)):
                return self == Poly.const(other)
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset((k, str(c)) for k, c in self._c.items()))
        return self._hash

    # calculus and substitutions

    def diff(self, var: int) -> Poly:
        out = {}
        for (i, j), c in self._c.items():
            e = (i, j)[var]
            if e:
                k = (i - 1, j) if var == 0 else (i, j - 1)
                out[k] = c * e
        return Poly(out)

    def antiderivative(self, var: int) -> Poly:
        """Antiderivative vanishing on ``var = 0``."""
        out = {}
        for (i, j), c in self._c.items():
            if var == 0:
                out[(i + 1, j)] = c / (i + 1)
            else:
                out[(i, j + 1)] = c / (j + 1)
        return Poly(out)

    def remap(self, fn) -> Poly:
        """Apply ``fn(i, j, c) -> (i', j', c')`` termwise and recollect."""
        acc: dict = {}
        for (i, j), c in self._c.items():
            i2, j2, c2 = fn(i, j, c)
            k = (i2, j2)
            acc[k] = acc[k] + c2 if k in acc else c2
        return Poly(acc)

    def divide_monomial(self, i0: int, j0: int) -> Poly:
        """Exact division by ``x**i0 * y**j0``; raises if not divisible."""
        out = {}
        for (i, j), c in self._c.items():
            if i < i0 or j < j0:
                raise ValueError(f"term x^{i} y^{j} not divisible by x^{i0} y^{j0}")
            out[(i - i0, j - j0)] = c
        return Poly(out)

    def compose(self, px: Poly, py: Poly) -> Poly:
        """Substitute ``x -> px`` and ``y -> py``."""
        px, py = self._coerce(px), self._coerce(py)
        xp = {0: Poly.const(1)}
        yp = {0: Poly.const(1)}

        def power(cache, base, e):
            if e not in cache:
                cache[e] = power(cache, base, e - 1) * base
            return cache[e]

        result = Poly()
        for (i, j), c in self._c.items():
            result = result + power(xp, px, i) * power(yp, py, j) * c
        return result

    def map_coeffs(self, fn) -> Poly:
        return Poly({k: fn(c) for k, c in self._c.items()})

    def subs(self, mapping: dict) -> Poly:
        """Substitute values for free symbols in the coefficients."""
        return self.map_coeffs(
            lambda c: c.subs(mapping) if is_symbolic(c) else c)

    # evaluation

    def _horner_table(self):
        if self._table is None:
            by_j: dict[int, dict[int, float]] = {}
            for (i, j), c in self._c.items():
                by_j.setdefault(j, {})[i] = float(c)
            jmax = max(by_j, default=0)
            rows = []
            for j in range(jmax + 1):
                row = by_j.get(j, {})
                imax = max(row, default=-1)
                rows.append(tuple(row.get(i, 0.0) for i in range(imax + 1)))
            self._table = tuple(rows)
        return self._table

    def __call__(self, x: float, y: float) -> float:
        """Floating-point value, Horner in ``x`` per ``y``-row then Horner in ``y``."""
        acc = 0.0
        for row in reversed(self._horner_table()):
            inner = 0.0
            for c in reversed(row):
                inner = inner * x + c
            acc = acc * y + inner
        return acc

    def exact_eval(self, x, y):
        """Value computed in the coefficient domain (Fractions stay exact)."""
        x, y = exact(x), exact(y)
        total = Fraction(0)
        for (i, j), c in self._c.items():
            total = total + c * x**i * y**j
        return _canon(total) if is_symbolic(total) else total

    # text and serialization

    def to_json(self) -> list:
        return [[i, j, coeff_to_json(c)] for i, j, c in self.terms()]

    @classmethod
    def from_json(cls, obj) -> Poly:
        return cls((int(i), int(j), coeff_from_json(c)) for i, j, c in obj)

    def pretty(self, names: tuple[str, str] = ("x", "y")) -> str:
        if not self._c:
            return "0"
        parts = []
        for (i, j), c in sorted(self._c.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), kv[0])):
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n
                for n, e in zip(names, (i, j)) if e)
            cs = f"({c})" if is_symbolic(c) or c.denominator != 1 else str(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Poly({self.pretty()})"
