from fractions import Fraction

import pytest
import sympy as sp

from afree.polycore import (
    FIXTURES,
    MultiPoly,
    OperatorDescriptor,
    PolyMatrix,
    divergence,
    fixture,
)
from afree.synthesis import (
    NonConstantRank,
    PotentialTriple,
    ZeroOperator,
    annihilator_operator,
    expand_g_in_a,
    leibniz_table,
    potential_operator,
    synthesize,
    verify_exactness,
)

from conftest import to_sympy


def x(i, d=2):
    return MultiPoly.variable(d, i)


def outer(d):
    return PolyMatrix([[x(i, d) * x(j, d) for j in range(d)] for i in range(d)])


def norm2(d):
    return sum((x(i, d) * x(i, d) for i in range(1, d)), x(0, d) * x(0, d))


@pytest.mark.parametrize("d", [2, 3])
def test_divergence_potential(d):
    L = potential_operator(divergence(d))
    assert L.symbol == PolyMatrix.identity(d, d).scale(norm2(d)) - outer(d)
    assert L.k == 2
    assert divergence(d).symbol.matmul(L.symbol).is_zero()


def test_injective_symbol_has_zero_potential():
    A = OperatorDescriptor(2, 0, 2, 2, {(0, 0): [[1, 0], [0, 1]]})
    assert potential_operator(A).is_zero()


def test_errors():
    diag = OperatorDescriptor(2, 1, 2, 2, {(1, 0): [[1, 0], [0, 0]], (0, 1): [[0, 0], [0, 1]]})
    with pytest.raises(NonConstantRank):
        potential_operator(diag)
    with pytest.raises(ZeroOperator):
        potential_operator(OperatorDescriptor.zero(2, 1, 2, 1))


def test_annihilator_of_divergence_potential():
    L = potential_operator(divergence(2))
    G = annihilator_operator(L)
    s = norm2(2)
    # 2|xi|^2 xi xi^T - (xi xi^T)^2, which simplifies to |xi|^2 xi xi^T
    literal = outer(2).scale(s).scale(2) - outer(2).matmul(outer(2))
    assert G.symbol == literal
    assert G.symbol == outer(2).scale(s)


def test_full_rank_potential_has_zero_annihilator():
    full = OperatorDescriptor(2, 2, 1, 1, {(2, 0): [[1]], (0, 2): [[1]]})
    assert annihilator_operator(full).is_zero()


@pytest.mark.parametrize(
    "name,l,deg_g,r_a,r_l",
    [
        ("div2", 2, 4, 1, 1),
        ("div3", 2, 8, 1, 2),
        ("symdiv2", 4, 8, 2, 1),
        ("curl2", 2, 4, 1, 1),
        ("curl3", 4, 8, 2, 1),
        ("symdiv3", 6, 36, 3, 3),
    ],
)
def test_degree_laws(name, l, deg_g, r_a, r_l):
    T = synthesize(fixture(name))
    assert (T.l, T.G.k, T.r_a, T.r_l) == (l, deg_g, r_a, r_l)
    flags = T.flags()
    assert flags["order_law_holds"] and flags["G_degree_law_holds"] and flags["G_symmetric"]
    assert flags["order_is_2k"] == (r_a == 1)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_verify_exactness(name):
    rep = verify_exactness(synthesize(fixture(name)), samples=40, seed=2)
    assert rep.passed, rep.summary()


def test_corrupted_triple_fails_with_witness():
    T = synthesize(divergence(2))
    data = T.to_json()
    data["L"]["terms"][0]["matrix"][0][0] = "2"
    bad = PotentialTriple.from_json(data)
    rep = verify_exactness(bad, samples=20, seed=0)
    assert not rep.passed and not rep.AL_zero and rep.witness is not None


@pytest.mark.parametrize("name", ["div2", "div3", "curl3", "symdiv2"])
def test_g_expansion(name):
    rep = expand_g_in_a(synthesize(fixture(name)), samples=30)
    assert rep.holds and rep.intermediate_holds


def test_triple_json_round_trip():
    T = synthesize(fixture("curl3"))
    back = PotentialTriple.from_json(T.to_json())
    assert back.A == T.A and back.L == T.L and back.G == T.G
    assert back.char_A == T.char_A and back.r_l == T.r_l


# -- Leibniz tables ---------------------------------------------------------------


def test_leibniz_first_derivative():
    D = OperatorDescriptor(1, 1, 1, 1, {(1,): [[1]]})
    tab = leibniz_table(D)
    assert dict(tab.items()) == {((1,), (0,)): ((1,),), ((0,), (1,)): ((1,),)}


def _apply_sympy(op, field, xs):
    out = []
    for i in range(op.m):
        acc = 0
        for alpha, mat in op.terms.items():
            for j in range(op.N):
                c = mat[i][j]
                if c:
                    acc += sp.Rational(c.numerator, c.denominator) * sp.diff(field[j], *[(v, a) for v, a in zip(xs, alpha) if a])
        out.append(sp.expand(acc))
    return out


def _leibniz_sympy(tab, chi, field, xs):
    n = len(tab[next(iter(tab.entries))])
    out = [0] * n
    for (alpha, beta), mat in tab.items():
        dchi = sp.diff(chi, *[(v, b) for v, b in zip(xs, beta) if b]) if any(beta) else chi
        dphi = [sp.diff(f, *[(v, a) for v, a in zip(xs, alpha) if a]) if any(alpha) else f for f in field]
        for i, row in enumerate(mat):
            for j, c in enumerate(row):
                if c:
                    out[i] += sp.Rational(c.numerator, c.denominator) * dphi[j] * dchi
    return [sp.expand(v) for v in out]


def test_leibniz_divergence_potential_example():
    xs = sp.symbols("x1 x2")
    L = potential_operator(divergence(2))
    chi = xs[0] ** 2
    phi = [xs[1], sp.Integer(0)]
    direct = _apply_sympy(L, [chi * f for f in phi], xs)
    assert direct == _leibniz_sympy(leibniz_table(L), chi, phi, xs)


@pytest.mark.parametrize("name", ["div2", "curl3", "symdiv2"])
def test_leibniz_identity_on_random_polynomials(name):
    import numpy as np

    L = synthesize(fixture(name)).L
    d = L.d
    xs = sp.symbols(f"x1:{d + 1}")
    rng = np.random.default_rng(len(name))

    def rand_poly(deg):
        terms = {tuple(int(a) for a in rng.multinomial(deg, [1 / d] * d)): int(rng.integers(-3, 4)) for _ in range(3)}
        return to_sympy(MultiPoly(d, terms), xs)

    chi = rand_poly(3) + rand_poly(2)
    phi = [rand_poly(3) for _ in range(L.N)]
    assert _apply_sympy(L, [chi * f for f in phi], xs) == _leibniz_sympy(leibniz_table(L), chi, phi, xs)


def test_leibniz_beta_zero_slice_is_the_operator():
    L = synthesize(fixture("curl3")).L
    tab = leibniz_table(L)
    zero = (0,) * L.d
    sliced = {a: m for (a, b), m in tab.items() if b == zero}
    assert sliced == {a: m for a, m in L.terms.items()}
