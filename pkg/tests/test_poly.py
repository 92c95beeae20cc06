from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from afree.polycore import MultiPoly, PolyMatrix, format_rational, parse_rational
from afree.polycore.kronecker import kron_matmul

from conftest import to_sympy

X = sp.symbols("x1:4")


def polys(d=2, max_deg=4, max_terms=5):
    mono = st.tuples(*[st.integers(0, max_deg)] * d)
    coeff = st.fractions(min_value=-20, max_value=20, max_denominator=7)
    return st.dictionaries(mono, coeff, max_size=max_terms).map(lambda t: MultiPoly(d, t))


def test_parse_rational():
    assert parse_rational("6/4") == Fraction(3, 2)
    assert parse_rational(" -3 ") == -3
    assert parse_rational(Fraction(1, 3)) == Fraction(1, 3)
    with pytest.raises(TypeError):
        parse_rational(0.5)
    with pytest.raises(TypeError):
        parse_rational(True)
    with pytest.raises(ZeroDivisionError):
        parse_rational("1/0")
    assert format_rational(Fraction(-3, 6)) == "-1/2"
    assert format_rational(Fraction(4)) == "4"


def test_zero_coefficients_are_dropped():
    p = MultiPoly(2, {(1, 0): 0, (0, 1): "2/4"})
    assert p.terms == {(0, 1): Fraction(1, 2)}
    assert MultiPoly.zero(2).degree() == -1


def test_basic_ops():
    x1, x2 = MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)
    s = x1 * x1 + x2 * x2
    assert str(s) == "x1^2 + x2^2"
    assert s.is_homogeneous(2)
    assert not (s + 1).is_homogeneous()
    assert (s - s).is_zero()
    assert (x1 + x2) ** 2 == s + x1 * x2 * 2
    assert s([3, 4]) == 25
    assert s([Fraction(1, 2), 0]) == Fraction(1, 4)


def test_json_round_trip():
    p = MultiPoly(3, {(2, 0, 1): "-5/3", (0, 3, 0): 7})
    assert MultiPoly.from_json(3, p.to_json()) == p
    # grlex: the degree-3 terms ordered lexicographically from the top
    assert [t["alpha"] for t in p.to_json()] == [[2, 0, 1], [0, 3, 0]]


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p
    assert p - p == MultiPoly.zero(2)


@given(polys(), polys(), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_evaluation_is_a_homomorphism(p, q, pt):
    assert (p * q)(pt) == p(pt) * q(pt)
    assert (p + q)(pt) == p(pt) + q(pt)


@settings(max_examples=50)
@given(polys(d=3, max_deg=3), polys(d=3, max_deg=3))
def test_product_matches_sympy(p, q):
    assert sp.expand(to_sympy(p * q, X) - to_sympy(p, X) * to_sympy(q, X)) == 0


def _dense(d, deg, seed, homogeneous):
    import numpy as np

    rng = np.random.default_rng(seed)
    terms = {}
    for _ in range(40):
        alpha = tuple(int(a) for a in rng.integers(0, deg + 1, size=d))
        if homogeneous:
            alpha = alpha[:-1] + (0,)
            rest = deg - sum(alpha[:-1])
            if rest < 0:
                continue
            alpha = alpha[:-1] + (rest,)
        terms[alpha] = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 4)))
    return MultiPoly(d, terms)


@pytest.mark.parametrize("homogeneous", [True, False])
def test_kronecker_product_matches_dict_product(homogeneous):
    A = [[_dense(3, 6, s, homogeneous) for s in range(2)], [_dense(3, 6, 5 + s, homogeneous) for s in range(2)]]
    B = [[_dense(3, 5, 9 + s, homogeneous)] for s in range(2)]
    got = kron_matmul(A, B)
    for i in range(2):
        want = A[i][0] * B[0][0] + A[i][1] * B[1][0]
        assert got[i][0] == want


def test_large_products_use_the_same_answer():
    # above the threshold PolyMatrix.matmul switches to Kronecker packing
    p = (MultiPoly.variable(3, 0) + MultiPoly.variable(3, 1) * 2 - MultiPoly.variable(3, 2)) ** 12
    q = (MultiPoly.variable(3, 0) - MultiPoly.variable(3, 2) * Fraction(1, 3)) ** 10
    M = PolyMatrix([[p]]).matmul(PolyMatrix([[q]]))
    X1, X2, X3 = X
    oracle = sp.expand((X1 + 2 * X2 - X3) ** 12 * (X1 - X3 / 3) ** 10)
    assert sp.expand(to_sympy(M[0, 0], X) - oracle) == 0
