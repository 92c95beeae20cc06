"""Spectral calculus on the torus: operators, the potential solver and norms.

A homogeneous operator of order k acts on exp(2 pi i xi.x) as
``(2 pi i)^k A[xi] = i^k A[2 pi xi]``.  Symbols are tabulated once per
(operator, grid) and applied frequency by frequency.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import fsum

import numpy as np

from ..polycore import OperatorDescriptor, PolyMatrix
from ..synthesis import PotentialTriple
from .fields import GridSpec, PeriodicField, SpectralField, dft, idft

TWO_PI = 2.0 * np.pi
RANK_FLOOR = 1e-14


class NotAFree(ValueError):
    pass


class RankDrop(ArithmeticError):
    pass


def _odd_axes(op: OperatorDescriptor) -> tuple[bool, ...]:
    return tuple(any(a[i] % 2 for a in op.terms) for i in range(op.d))


def _nyquist_zero_mask(grid: GridSpec, odd_axes) -> np.ndarray:
    # an odd power of xi_i at the unpaired frequency -n/2 cannot keep a real
    # field real, so the multiplier is zeroed there
    mask = np.zeros(grid.dims, dtype=bool)
    for k, n, odd in zip(grid.frequencies(), grid.dims, odd_axes):
        if odd:
            mask |= np.broadcast_to(k == -n // 2, grid.dims)
    return mask


@lru_cache(maxsize=16)
def _symbol_table(op: OperatorDescriptor, dims: tuple[int, ...]) -> np.ndarray:
    grid = GridSpec(dims)
    if op.is_zero():
        return np.zeros(dims + (op.m, op.N))
    xi = [TWO_PI * k for k in grid.frequencies()]
    S = op.symbol.evaluate_float(xi)
    S[_nyquist_zero_mask(grid, _odd_axes(op))] = 0.0
    return S


def multiplier(op: OperatorDescriptor, grid: GridSpec) -> np.ndarray:
    """Complex Fourier multiplier of ``op`` on ``grid``, shape dims + (m, N)."""
    return (1j**op.k) * _symbol_table(op, grid.dims)


def _apply_spectral(op: OperatorDescriptor, F: np.ndarray, grid: GridSpec) -> np.ndarray:
    S = _symbol_table(op, grid.dims)
    return (1j**op.k) * np.einsum("...ij,...j->...i", S, F)


def apply_operator(op: OperatorDescriptor, f: PeriodicField) -> PeriodicField:
    if op.d != f.grid.d:
        raise ValueError(f"operator acts in d={op.d}, field lives in d={f.grid.d}")
    if op.N != f.N:
        raise ValueError(f"operator expects N={op.N} components, field has {f.N}")
    F = dft(f).coeffs
    return idft(SpectralField(f.grid, _apply_spectral(op, F, f.grid)))


def afree_residual(op: OperatorDescriptor, f: PeriodicField) -> float:
    """Scale-free A-residual ``|A f|_inf / sum_xi |A[2 pi xi]|_F |f^(xi)|``.

    The denominator bounds ``|A f|_inf`` by the triangle inequality, so the
    ratio is 0 for A-free fields and at most 1 otherwise.
    """
    F = dft(f).coeffs
    S = _symbol_table(op, f.grid.dims)
    AF = (1j**op.k) * np.einsum("...ij,...j->...i", S, F)
    Af = idft(SpectralField(f.grid, AF))
    scale = fsum((np.linalg.norm(S, axis=(-2, -1)) * np.linalg.norm(F, axis=-1)).ravel())
    if scale == 0.0:
        return 0.0
    return Af.sup_norm() / scale


# -- random A-free fields -------------------------------------------------------


def band_box(d: int, band: int) -> np.ndarray:
    """Integer frequencies of ``[-band, band]^d`` in lexicographic order, shape (M, d).

    The order is symmetric: row ``M - 1 - i`` is the negative of row ``i``.
    """
    axes = np.meshgrid(*[np.arange(-band, band + 1)] * d, indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def _place(grid: GridSpec, xi: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.dims + values.shape[1:], dtype=complex)
    idx = tuple((xi[:, i] % n) for i, n in enumerate(grid.dims))
    out[idx] = values
    return out


@dataclass
class FreeSample:
    """A band-limited A-free field with the potential that produced it."""

    U: PeriodicField
    potential_coeffs: np.ndarray  # (M, N') on band_box(d, band)
    field_coeffs: np.ndarray  # (M, N)
    box: np.ndarray = field(repr=False)


def random_potential(d: int, n_comp: int, band: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian-symmetric complex normal coefficients on the band box, zero mean."""
    box = band_box(d, band)
    rng = np.random.default_rng(seed)
    M = box.shape[0]
    Z = rng.standard_normal((M, n_comp)) + 1j * rng.standard_normal((M, n_comp))
    phi = 0.5 * (Z + np.conj(Z[::-1]))
    phi[M // 2] = 0.0
    return box, phi


def gen_afree_sample(T: PotentialTriple, grid: GridSpec, band: int, seed) -> FreeSample:
    d, l = T.L.d, T.L.k
    if grid.d != d:
        raise ValueError("grid dimension differs from operator dimension")
    if band < 0 or 2 * band >= min(grid.dims):
        raise ValueError(f"band {band} must satisfy 0 <= band < min(dims)/2")
    box, phi = random_potential(d, T.L.N, band, seed)
    if T.L.is_zero():
        Lxi = np.zeros((box.shape[0], T.L.m, T.L.N))
    else:
        Lxi = T.L.symbol.evaluate_float([TWO_PI * box[:, i] for i in range(d)])
    u_hat = (1j**l) * np.einsum("kij,kj->ki", Lxi, phi)
    total = fsum(np.linalg.norm(u_hat, axis=-1))
    if total > 0.0:
        u_hat = u_hat / total
        phi = phi / total
    # the field is real by symmetry; drop the rounding-level imaginary part
    U = idft(SpectralField(grid, _place(grid, box, u_hat)))
    return FreeSample(U, phi, u_hat, box)


def gen_afree(T: PotentialTriple, grid: GridSpec, band: int, seed) -> PeriodicField:
    """Random band-limited field ``U = L Phi`` with zero mean.

    Coefficients are drawn on ``[-band, band]^d`` independently of the grid
    and scaled so that the spectral l1 norm of U is 1, hence ``|U|_inf <= 1``
    and the same seed gives the same function on every grid that resolves it.
    """
    return gen_afree_sample(T, grid, band, seed).U


# -- the potential solver ---------------------------------------------------------


def _scalar_table(p, pts: list[np.ndarray]) -> np.ndarray:
    return PolyMatrix([[p]]).evaluate_float(pts)[..., 0, 0]


@lru_cache(maxsize=8)
def _pinv_table(T: PotentialTriple, dims: tuple[int, ...]):
    """``L^+[2 pi xi]`` for every lattice frequency except 0 and the zeroed Nyquist rows.

    Returns ``(active mask, i^-l L^+[2 pi xi] at active points)``.
    """
    grid = GridSpec(dims)
    active = np.ones(dims, dtype=bool)
    active[(0,) * grid.d] = False
    active &= ~_nyquist_zero_mask(grid, _odd_axes(T.L))
    pts = np.stack([np.broadcast_to(k, dims)[active] for k in grid.frequencies()], axis=-1)
    radius = np.linalg.norm(pts, axis=-1)
    unit = [pts[:, i] / radius for i in range(grid.d)]
    pinv = T.potential_pinv()
    s = _scalar_table(pinv.denominator, unit)
    bad = np.abs(s) < RANK_FLOOR
    if bad.any():
        raise RankDrop(f"a_r of L nearly vanishes at lattice frequency {pts[bad][0].tolist()}")
    P = pinv.numerator.evaluate_float(unit)
    l = T.L.k
    # L^+ is homogeneous of degree -l, so L^+[2 pi xi] = (2 pi |xi|)^-l L^+[xi/|xi|]
    w = (1j ** (-l)) / (s * (TWO_PI * radius) ** l)
    return active, w[:, None, None] * P


def solve_potential_spectral(T: PotentialTriple, U: PeriodicField, tol: float = 1e-10) -> SpectralField:
    """Coefficients of the potential; see :func:`solve_potential`."""
    grid = U.grid
    if grid.d != T.A.d or U.N != T.A.N:
        raise ValueError("field does not match the operator's dimensions")
    F = dft(U).coeffs
    scale = max(U.sup_norm(), np.finfo(float).tiny)
    zero_idx = (0,) * grid.d
    if np.linalg.norm(F[zero_idx]) > tol * scale:
        raise NotAFree(f"field mean {F[zero_idx].real.tolist()} is not zero")
    res = afree_residual(T.A, U)
    if res > tol:
        raise NotAFree(f"A-residual {res:.3e} exceeds tol {tol:.1e}")
    out = np.zeros(grid.dims + (T.L.N,), dtype=complex)
    if T.L.is_zero():
        return SpectralField(grid, out)
    active, Lp = _pinv_table(T, grid.dims)
    out[active] = np.einsum("kij,kj->ki", Lp, F[active])
    return SpectralField(grid, out)


def solve_potential(T: PotentialTriple, U: PeriodicField, tol: float = 1e-10) -> PeriodicField:
    """Potential Phi with ``L Phi = U`` and ``G Phi = 0`` for A-free, mean-zero U.

    Per nonzero frequency ``Phi^(xi) = i^-l L^+[2 pi xi] U^(xi)``, the
    pseudo-inverse of the multiplier ``i^l L[2 pi xi]``.  The pseudo-inverse
    is evaluated at unit vectors and rescaled by homogeneity, which keeps
    high-degree symbols in floating-point range.

    Raises NotAFree for a nonzero mean or an A-residual above ``tol`` and
    RankDrop where the leading characteristic coefficient of L vanishes.
    """
    return idft(solve_potential_spectral(T, U, tol))


def _spectral_apply_field(op, coeffs, grid) -> PeriodicField:
    return idft(SpectralField(grid, _apply_spectral(op, coeffs, grid)))


def potential_residuals(T: PotentialTriple, U: PeriodicField, phi) -> dict:
    """Residuals of a solved potential.

    ``L`` is ``|L phi - U|_inf / |U|_inf`` and ``G`` is ``|G phi|_inf / |U|_inf``.
    ``G_relative`` divides ``|G phi|_inf`` by ``sum_xi |G[2 pi xi]|_F |phi^(xi)|``
    instead, which does not grow with the degree of G.  ``phi`` may be the
    spectral output of :func:`solve_potential_spectral`, which skips one
    round trip through grid values.
    """
    grid = U.grid
    coeffs = phi.coeffs if isinstance(phi, SpectralField) else dft(phi).coeffs
    scale = U.sup_norm() or 1.0
    Lphi = _spectral_apply_field(T.L, coeffs, grid)
    Gphi = _spectral_apply_field(T.G, coeffs, grid)
    S = _symbol_table(T.G, grid.dims)
    gscale = fsum((np.linalg.norm(S, axis=(-2, -1)) * np.linalg.norm(coeffs, axis=-1)).ravel())
    g = Gphi.sup_norm()
    return {
        "L": (Lphi - U).sup_norm() / scale,
        "G": g / scale,
        "G_relative": g / gscale if gscale else 0.0,
    }


# -- norms ---------------------------------------------------------------------


def _check_p(p: float) -> None:
    if not (1 <= p < np.inf):
        raise ValueError(f"p must satisfy 1 <= p < inf, got {p}")


def lp_norm(f: PeriodicField, p: float) -> float:
    """``(grid average of |f|^p)^(1/p)`` with |.| the Euclidean norm of the value."""
    _check_p(p)
    mag = np.sqrt((f.values**2).sum(axis=-1)).ravel()
    return (fsum(mag**p) / mag.size) ** (1.0 / p)


def multi_indices(d: int, order: int) -> list[tuple[int, ...]]:
    """All alpha with |alpha| <= order, by total degree then lexicographically."""
    out = []
    for q in range(order + 1):
        out.extend(_exact(d, q))
    return out


def _exact(d: int, q: int):
    if d == 1:
        return [(q,)]
    return [(a,) + rest for a in range(q, -1, -1) for rest in _exact(d - 1, q - a)]


def derivative_multiplier(grid: GridSpec, alpha) -> np.ndarray:
    """``prod_i (2 pi i xi_i)^alpha_i`` with odd powers zeroed on the Nyquist row."""
    out = np.ones(grid.dims, dtype=complex)
    for i, (k, n, a) in enumerate(zip(grid.frequencies(), grid.dims, alpha)):
        if a:
            m = (2j * np.pi * k) ** a
            if a % 2:
                m = np.where(k == -n // 2, 0.0, m)
            out = out * m
    return out


def derivative(f: PeriodicField, alpha) -> PeriodicField:
    F = dft(f).coeffs
    return idft(SpectralField(f.grid, derivative_multiplier(f.grid, alpha)[..., None] * F))


@lru_cache(maxsize=8)
def _sobolev_weight(dims: tuple[int, ...], l: int) -> np.ndarray:
    grid = GridSpec(dims)
    w = np.zeros(dims)
    for a in multi_indices(grid.d, l):
        w += np.abs(derivative_multiplier(grid, a)) ** 2
    return w


def sobolev_norm(f: PeriodicField, l: int, p: float) -> float:
    """``(sum_{|alpha| <= l} |d_alpha f|_p^p)^(1/p)`` with spectral derivatives.

    For p = 2 the sum is taken on the Fourier side (Parseval), which avoids
    one inverse transform per multi-index.
    """
    _check_p(p)
    alphas = multi_indices(f.grid.d, l)
    if p == 2:
        F = dft(f).coeffs
        power = (np.abs(F) ** 2).sum(axis=-1)
        return fsum((_sobolev_weight(f.grid.dims, l) * power).ravel()) ** 0.5
    parts = [lp_norm(derivative(f, a), p) ** p for a in alphas]
    return fsum(parts) ** (1.0 / p)


def sobolev_bound_experiment(
    T: PotentialTriple,
    grids: list[GridSpec],
    trials: int,
    seed: int,
    band: int = 4,
    ps: tuple[float, ...] | None = None,
) -> dict:
    """Ratios ``|Phi|_{W^{l,p}} / |U|_{L^p}`` for solved random A-free fields.

    Returns per-grid maxima for each p and the relative change of the
    maximum between consecutive grids.
    """
    d = T.A.d
    if ps is None:
        ps = (2.0, float(d + 1))
    seeds = np.random.SeedSequence(seed).spawn(trials)
    ratios = {(g.dims, p): [] for g in grids for p in ps}
    for g in grids:
        for ss in seeds:
            U = gen_afree(T, g, band, ss)
            if U.sup_norm() == 0.0:
                continue
            phi = solve_potential(T, U, tol=1e-8)
            for p in ps:
                ratios[(g.dims, p)].append(sobolev_norm(phi, T.l, p) / lp_norm(U, p))
    report = {"l": T.l, "band": band, "trials": trials, "grids": [], "changes": []}
    for g in grids:
        report["grids"].append(
            {"dims": list(g.dims), "max_ratio": {p: max(ratios[(g.dims, p)], default=0.0) for p in ps}}
        )
    for a, b in zip(report["grids"], report["grids"][1:]):
        report["changes"].append(
            {
                p: abs(b["max_ratio"][p] - a["max_ratio"][p]) / a["max_ratio"][p] if a["max_ratio"][p] else 0.0
                for p in ps
            }
        )
    report["finite"] = all(np.isfinite(v) for vs in ratios.values() for v in vs)
    return report
