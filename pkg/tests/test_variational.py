import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from afree.polycore import divergence, fixture
from afree.synthesis import synthesize
from afree.torus import GridSpec, PeriodicField, afree_residual, constant_field, dft, gen_afree
from afree.variational import (
    ConvexSet,
    CutoffSpec,
    EmpiricalMeasure,
    Functional,
    NotInSet,
    NotPSD,
    cutoff_construct,
    dilate,
    dpt_generate,
    dpt_triple,
    identity_vector,
    jensen_check,
    kaq_probe,
    project_check,
    semicontinuity_experiment,
    shrink_to_interior,
    sym_decode,
    sym_encode,
    young_moment,
)

G2 = GridSpec.cube(2, 16)


def test_symmetric_encoding():
    M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
    v = sym_encode(M)
    assert v.tolist() == [1.0, 4.0, 6.0, 2.0, 3.0, 5.0]
    assert np.array_equal(sym_decode(v, 3), M)
    assert identity_vector(2).tolist() == [1.0, 1.0, 0.0]


def test_convex_sets():
    K = ConvexSet.psd(2)
    assert K.N == 3 and K.margin == pytest.approx(1.0)
    assert ConvexSet.psd(2, full=True).N == 4
    H = ConvexSet.halfspaces([[1.0, 0.0], [0.0, 1.0]], [0.0, -1.0], [0.5, 0.0])
    assert H.margin == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ConvexSet.psd(2, Y=[1.0, -1.0, 0.0])
    assert ConvexSet.whole_space(3).margin == np.inf


def test_project_check_examples():
    K = ConvexSet.psd(2)
    c = project_check(K, constant_field(G2, K.interior_point))
    assert c.member and c.min_boundary_distance == pytest.approx(K.margin)
    vals = np.broadcast_to(identity_vector(2), (16, 16, 3)).copy()
    vals[3, 7] = [1.0, -1.0, 0.0]
    c = project_check(K, PeriodicField(G2, vals))
    assert not c.member and c.argmin == (3, 7)


def test_dpt_generate_properties():
    grid = GridSpec.cube(2, 32)
    U = dpt_generate(2, grid, 0, 1.0, 4)
    assert np.array_equal(U.values, np.broadcast_to(identity_vector(2), U.values.shape))
    c = 0.7
    U = dpt_generate(2, grid, 5, c, 4)
    assert afree_residual(fixture("symdiv2"), U) < 1e-10
    chk = project_check(ConvexSet.psd(2), U)
    assert chk.member and chk.min_boundary_distance >= c / 2 - 1e-12
    U3 = dpt_generate(3, GridSpec.cube(3, 8), 2, c, 4)
    assert afree_residual(fixture("symdiv3"), U3) < 1e-10
    assert project_check(ConvexSet.psd(3), U3).min_boundary_distance >= c / 2 - 1e-12


def test_generator_agrees_with_airy_stress_function():
    grid = GridSpec.cube(2, 32)
    U = gen_afree(dpt_triple(2), grid, 5, 21)
    F = dft(U).coeffs  # components S11, S22, S12
    k1, k2 = (2 * np.pi * k for k in grid.frequencies())
    r2 = k1**2 + k2**2
    r2[0, 0] = 1.0
    # trace of the Airy form (d22 phi, d11 phi, -d12 phi) is the Laplacian of phi
    phi = -(F[..., 0] + F[..., 1]) / r2
    airy = np.stack([-(k2**2) * phi, -(k1**2) * phi, k1 * k2 * phi], axis=-1)
    assert np.abs(airy - F).max() < 1e-12 * np.abs(F).max()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9))
def test_shrink_identity(seed, n):
    K = ConvexSet.psd(2)
    f = dpt_generate(2, G2, 3, 1.0, seed)
    V = shrink_to_interior(K, f, n)
    Y = K.interior_point
    assert np.abs((V.values - Y) - (1 - 1 / n) * (f.values - Y)).max() < 1e-15
    assert project_check(K, V).min_boundary_distance >= K.margin / n - 1e-12


def test_shrink_examples():
    K = ConvexSet.psd(2)
    f = dpt_generate(2, G2, 3, 1.0, 1)
    V1 = shrink_to_interior(K, f, 1)
    assert np.array_equal(V1.values, np.broadcast_to(K.interior_point, V1.values.shape))
    n = 1000
    Vn = shrink_to_interior(K, f, n)
    dist = (Vn - f).sup_norm()
    assert dist == pytest.approx((f - constant_field(G2, K.interior_point)).sup_norm() / n, rel=1e-9)
    assert afree_residual(fixture("symdiv2"), Vn) < 1e-12
    bad = f.with_values(f.values * -1.0)
    with pytest.raises(NotInSet):
        shrink_to_interior(K, bad, 2)


def test_functionals():
    F = Functional.detpow(3)
    sing = sym_encode(np.diag([1.0, 2.0, 0.0]))
    assert F(sing[None])[0] == 0.0
    assert F(sym_encode(np.diag([1.0, 4.0, 4.0]))[None])[0] == pytest.approx(4.0)
    assert Functional.detpow(2)(np.array([[2.0, 3.0, 1.0]]))[0] == pytest.approx(5.0)
    assert Functional.negpnorm(2)(np.array([[3.0, 4.0]]))[0] == pytest.approx(-25.0)
    assert Functional.detpow(3).growth == pytest.approx(1.5)
    full = Functional.detpow(2)(np.array([[2.0, 1.0, 1.0, 3.0]]))
    assert full[0] == pytest.approx(5.0)


def test_young_moment_examples():
    f = dpt_generate(2, G2, 3, 1.0, 2)
    assert np.allclose(young_moment(f, lambda v: v[..., 1]), f.mean()[1])
    assert young_moment(f, lambda v: np.ones(v.shape[:-1])) == 1.0
    m = EmpiricalMeasure([[1.0], [3.0]], [0.25, 0.75])
    assert m.moment(lambda v: v[:, 0]) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        EmpiricalMeasure([[1.0]], [0.5])


def test_moment_of_dilation_is_invariant_for_resolved_integrands():
    # |v|^2 of a band-3 field is band 6; the n = 2 sublattice of 32 points resolves it
    f = dpt_generate(2, GridSpec.cube(2, 32), 3, 1.0, 8)
    g = Functional.pnorm(2)
    assert young_moment(dilate(f, 2), g) == pytest.approx(young_moment(f, g), rel=1e-13)


def test_jensen_examples():
    F = Functional.detpow(2)
    const = constant_field(G2, sym_encode(np.array([[2.0, 0.5], [0.5, 1.0]])))
    res = jensen_check(F, const)
    assert res.lhs == pytest.approx(res.rhs, rel=1e-15) and res.satisfied
    res = jensen_check(F, dpt_generate(2, GridSpec.cube(2, 32), 4, 1.0, 3))
    assert res.satisfied
    with pytest.raises(NotPSD):
        jensen_check(F, constant_field(G2, [1.0, -1.0, 0.0]))
    with pytest.raises(ValueError):
        jensen_check(Functional.pnorm(2), const)


def test_semicontinuity_examples():
    U = dpt_generate(2, GridSpec.cube(2, 32), 3, 1.0, 6)
    rep = semicontinuity_experiment(Functional.pnorm(2), U, "auto", (1, 2, 4))
    assert rep.mode == "lsc" and rep.ordered
    rep = semicontinuity_experiment(Functional.detpow(2), U, "auto", (1, 2, 4))
    assert rep.mode == "usc" and rep.ordered and rep.spread < 1e-12
    const = constant_field(G2, identity_vector(2))
    rep = semicontinuity_experiment(Functional.detpow(2), const, "usc", (1, 2, 4))
    assert set(rep.values) == {rep.limit_value}
    with pytest.raises(ValueError):
        semicontinuity_experiment(Functional.detpow(2), U, "usc", (3,))


def test_probe_examples():
    T = dpt_triple(2)
    K = ConvexSet.psd(2)
    rep = kaq_probe(Functional.pnorm(2), K, T, identity_vector(2), 10, 1)
    assert rep.violations == 0
    rep = kaq_probe(Functional.negpnorm(2), K, T, identity_vector(2), 10, 1)
    assert rep.violations > 0
    with pytest.raises(NotInSet):
        kaq_probe(Functional.pnorm(2), K, T, [1.0, -1.0, 0.0], 1, 1)


def test_cutoff_profile():
    grid = GridSpec.cube(2, 64)
    prev = None
    for j in range(1, 6):
        chi = CutoffSpec(j, 2)(grid.nodes())
        assert chi.min() >= 0.0 and chi.max() <= 1.0
        assert chi[0, :].max() == 0.0 and chi[:, 0].max() == 0.0
        if prev is not None:
            assert (chi >= prev).all()
        prev = chi
    assert CutoffSpec(3, 2)([np.array(0.5), np.array(0.5)]) == 1.0


def test_cutoff_derivatives_match_symbolic_oracle():
    t = sp.Symbol("t")
    j = 3
    spec = CutoffSpec(j, 1)
    # transition region on the right: s = (2 (t - 1/2)(j+1)/j - j/(j+1)) (j+1)
    s = (2 * (t - sp.Rational(1, 2)) * (j + 1) / j - sp.Rational(j, j + 1)) * (j + 1)
    f = lambda u: sp.exp(-1 / u)  # noqa: E731
    psi = f(1 - s) / (f(1 - s) + f(s))
    for order in range(4):
        expr = sp.diff(psi, t, order)
        for tv in (0.79, 0.83, 0.87):
            want = float(expr.subs(t, tv))
            got = float(spec.derivative([np.array(tv)], (order,)))
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)
    # by symmetry the left side flips odd derivatives
    assert float(spec.derivative([np.array(0.17)], (1,))) == pytest.approx(
        -float(spec.derivative([np.array(0.83)], (1,))), rel=1e-12
    )


def test_cutoff_construct_with_zero_potential():
    T = synthesize(divergence(2))
    grid = GridSpec.cube(2, 32)
    U = dilate(gen_afree(T, grid, 2, 3), 4)
    zero = constant_field(grid, [0.0, 0.0])
    res = cutoff_construct(T, zero, U, CutoffSpec(3, 2), (8, 16), 4)
    # U(a + x/4) equals the undilated field shifted by 4a, a node shift
    V = gen_afree(T, grid, 2, 3)
    shifted = np.roll(V.values, (-(4 * 8) % 32, -(4 * 16) % 32), axis=(0, 1))
    assert np.abs(res.direct.values - shifted).max() < 1e-13
    assert res.max_discrepancy < 1e-13


def test_cutoff_construct_errors():
    T = synthesize(divergence(2))
    grid = GridSpec.cube(2, 32)
    z = constant_field(grid, [0.0, 0.0])
    with pytest.raises(ValueError):
        cutoff_construct(T, z, z, CutoffSpec(3, 2), (0, 0), 3)
    with pytest.raises(ValueError):
        cutoff_construct(T, z, z, CutoffSpec(3, 2), (0, 40), 4)
