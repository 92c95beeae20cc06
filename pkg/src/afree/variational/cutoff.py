"""Smooth cut-offs and the localised potential construction.

The construction blows a potential up around a node ``a`` at scale ``R = 1/m``,
multiplies by a cut-off and applies L:

    direct   = L[chi(x) R^-l Phi(a + R x)] + U(a + R x)
    expanded = sum_(alpha,beta) R^(|alpha|-l) L^(alpha,beta) (d_alpha Phi)(a + R x) d_beta chi(x) + U(a + R x)

``direct`` differentiates the product spectrally on the grid; ``expanded``
uses the Leibniz table with exact derivatives of Phi (a trigonometric
polynomial) and closed-form derivatives of chi.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from ..synthesis import PotentialTriple, leibniz_table
from ..torus import PeriodicField, SpectralField, apply_operator, dft


@lru_cache(maxsize=None)
def _transition(order: int):
    """``h^(order)`` of ``h(s) = f(1-s) / (f(1-s) + f(s))`` with ``f(t) = exp(-1/t)``."""
    s = sp.symbols("s")
    f = lambda t: sp.exp(-1 / t)  # noqa: E731
    h = f(1 - s) / (f(1 - s) + f(s))
    return sp.lambdify(s, sp.diff(h, s, order), "numpy")


def _h(order: int, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    if order == 0:
        out[s <= 0] = 1.0
    inside = (s > 0) & (s < 1)
    if inside.any():
        with np.errstate(all="ignore"):
            v = np.asarray(_transition(order)(s[inside]), dtype=float)
        # 0 * inf near the end points; the true limit there is 0
        out[inside] = np.where(np.isfinite(v), v, 0.0)
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """``chi_j(x) = prod_i psi_j(x_i)`` on the unit cube.

    ``psi_j`` equals 1 for ``|t - 1/2| <= j^2 / (2 (j+1)^2)``, vanishes for
    ``|t - 1/2| >= j / (2 (j+1))`` and decreases smoothly in between, so
    ``chi_j`` increases with j towards 1 and has support inside the cube.
    """

    j: int
    d: int

    def __post_init__(self):
        if self.j < 1 or self.d < 1:
            raise ValueError("j and d must be positive")

    @property
    def support_radius(self) -> float:
        return self.j / (2 * (self.j + 1))

    @property
    def plateau_radius(self) -> float:
        return self.j**2 / (2 * (self.j + 1) ** 2)

    def _axis(self, t: np.ndarray, order: int) -> np.ndarray:
        j = self.j
        off = np.asarray(t, dtype=float) - 0.5
        core = j / (j + 1)
        s = (np.abs(off) * 2 * (j + 1) / j - core) * (j + 1)
        slope = 2 * (j + 1) ** 2 / j
        val = _h(order, s)
        if order:
            val = val * (np.sign(off) * slope) ** order
        return val

    def derivative(self, coords, beta) -> np.ndarray:
        """``d_beta chi`` at broadcastable coordinate arrays."""
        out = None
        for x, b in zip(coords, beta):
            v = self._axis(x, b)
            out = v if out is None else out * v
        return out

    def __call__(self, coords) -> np.ndarray:
        return self.derivative(coords, (0,) * self.d)


def _modes(F: SpectralField, rel: float = 1e-15):
    """Nonzero Fourier modes as (frequencies (K, d), coefficients (K, N))."""
    mag = np.linalg.norm(F.coeffs, axis=-1)
    keep = mag > rel * mag.max() if mag.max() > 0 else np.zeros_like(mag, dtype=bool)
    freqs = np.stack([np.broadcast_to(k, F.grid.dims)[keep] for k in F.grid.frequencies()], axis=-1)
    return freqs, F.coeffs[keep]


def eval_series(freqs: np.ndarray, coeffs: np.ndarray, points: np.ndarray, alpha=None) -> np.ndarray:
    """Real part of ``sum_k c_k (2 pi i xi_k)^alpha exp(2 pi i xi_k . y)`` at points (P, d)."""
    c = coeffs.astype(complex)
    if alpha is not None:
        w = np.ones(freqs.shape[0], dtype=complex)
        for i, a in enumerate(alpha):
            if a:
                w = w * (2j * np.pi * freqs[:, i]) ** a
        c = c * w[:, None]
    phase = np.exp(2j * np.pi * (points @ freqs.T))
    return (phase @ c).real


@dataclass
class CutoffResult:
    direct: PeriodicField
    expanded: PeriodicField
    max_discrepancy: float

    @property
    def relative_discrepancy(self) -> float:
        scale = self.direct.sup_norm()
        return self.max_discrepancy / scale if scale else self.max_discrepancy


def cutoff_construct(
    T: PotentialTriple,
    phi: PeriodicField,
    U: PeriodicField,
    chi: CutoffSpec,
    a,
    m: int,
) -> CutoffResult:
    """Compare the spectral and the Leibniz evaluation of the localised field.

    ``a`` is a grid node given by its integer index and ``R = 1/m`` with m a
    positive integer dividing every grid dimension.
    """
    grid = phi.grid
    if U.grid != grid:
        raise ValueError("phi and U must share a grid")
    if m < 1 or any(n % m for n in grid.dims):
        raise ValueError(f"m={m} must be a positive divisor of every grid dimension {grid.dims}")
    a = tuple(int(i) for i in a)
    if len(a) != grid.d or any(not 0 <= i < n for i, n in zip(a, grid.dims)):
        raise ValueError(f"a={a} is not a node index of grid {grid.dims}")
    if chi.d != grid.d:
        raise ValueError("cut-off dimension differs from the grid")
    L = T.L
    l = L.k
    R = 1.0 / m
    x = np.meshgrid(*[np.arange(n) / n for n in grid.dims], indexing="ij")
    pts = np.stack([xi.ravel() for xi in x], axis=-1)
    anchor = np.array([i / n for i, n in zip(a, grid.dims)])
    y = anchor + R * pts

    fq, fc = _modes(dft(phi))
    uq, uc = _modes(dft(U))
    shape = grid.dims
    U_y = eval_series(uq, uc, y).reshape(shape + (U.N,)) if len(uq) else np.zeros(shape + (U.N,))

    chi_x = chi(x)
    phi_y = eval_series(fq, fc, y).reshape(shape + (phi.N,)) if len(fq) else np.zeros(shape + (phi.N,))
    local = PeriodicField(grid, chi_x[..., None] * R ** (-l) * phi_y)
    direct = apply_operator(L, local).values + U_y

    expanded = U_y.copy()
    derivs = {}
    for (alpha, beta), mat in leibniz_table(L).items():
        if alpha not in derivs:
            derivs[alpha] = (
                eval_series(fq, fc, y, alpha).reshape(shape + (phi.N,)) if len(fq) else np.zeros(shape + (phi.N,))
            )
        coef = np.array(mat, dtype=float)
        dchi = chi.derivative(x, beta)
        expanded += R ** (sum(alpha) - l) * dchi[..., None] * np.einsum("ij,...j->...i", coef, derivs[alpha])
    direct_f = PeriodicField(grid, direct)
    expanded_f = PeriodicField(grid, expanded)
    return CutoffResult(direct_f, expanded_f, (direct_f - expanded_f).sup_norm())
