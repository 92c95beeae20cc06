"""Numerical experiments: DPT generation, Jensen checks, oscillation sequences
and K-A-quasiconvexity probes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..polycore import symmetric_divergence
from ..synthesis import PotentialTriple, synthesize
from ..torus import (
    GridSpec,
    PeriodicField,
    SpectralField,
    apply_operator,
    idft,
    random_potential,
)
from ..torus.spectral import _place, gen_afree
from .convex import ConvexSet, NotInSet, identity_vector, sym_decode
from .cutoff import CutoffSpec
from .functionals import Functional, young_moment


class NotPSD(ValueError):
    pass


def dpt_triple(dm: int) -> PotentialTriple:
    return synthesize(symmetric_divergence(dm))


def dpt_generate(dm: int, grid: GridSpec, band: int, c: float, seed) -> PeriodicField:
    """Row-wise divergence-free, symmetric, positive definite field ``c Id + S``.

    ``S`` is a random band-limited divergence-free oscillation rescaled so its
    largest |eigenvalue| over the grid is ``c/2``; the minimum eigenvalue of
    the output is therefore at least ``c/2``.
    """
    if c <= 0:
        raise ValueError("shift c must be positive")
    if grid.d != dm:
        raise ValueError("grid dimension must equal the matrix dimension")
    osc = gen_afree(dpt_triple(dm), grid, band, seed).values
    lam = np.abs(np.linalg.eigvalsh(sym_decode(osc, dm))).max() if band else 0.0
    if lam > 0:
        osc = osc * (0.5 * c / lam)
    return PeriodicField(grid, osc + c * identity_vector(dm))


@dataclass(frozen=True)
class JensenResult:
    lhs: float
    rhs: float
    satisfied: bool

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs


def _dm_of(F: Functional) -> int:
    if F.kind not in ("detpow", "negdetpow"):
        raise ValueError("Jensen checks are defined for the determinant power")
    return F.dm


def jensen_check(F: Functional, U: PeriodicField, tol: float = 1e-8, normalize: bool = False) -> JensenResult:
    """Grid average of F(U) against F(grid average of U).

    With ``normalize`` the field is first divided by its sup norm.
    """
    dm = _dm_of(F)
    K = ConvexSet.psd(dm, full=U.N == dm * dm)
    scale = U.sup_norm()
    low = float(K.distance(U.values).min())
    if low < -1e-12 * max(scale, 1.0):
        raise NotPSD(f"field has eigenvalue {low:.3e} < 0")
    if normalize and scale > 0:
        U = U.scaled(1.0 / scale)
    lhs = young_moment(U, F)
    rhs = float(F(U.mean()[None])[0])
    return JensenResult(lhs, rhs, lhs <= rhs + tol)


def jensen_batch(dm: int, trials: int, grid: GridSpec, band: int, seed: int, shift: float = 1.0, tol: float = 1e-8):
    """Jensen checks on ``trials`` seeded DPT fields (normalised to unit sup norm)."""
    F = Functional.detpow(dm)
    rows = []
    for t, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        U = dpt_generate(dm, grid, band, shift, ss)
        res = jensen_check(F, U, tol=tol, normalize=True)
        rows.append({"trial": t, "lhs": res.lhs, "rhs": res.rhs, "gap": res.gap, "satisfied": res.satisfied})
    return rows


# -- oscillation sequences --------------------------------------------------------


def dilate(f: PeriodicField, n: int) -> PeriodicField:
    """``x -> f(n x)`` on the grid; exact because n x of a node is again a node."""
    if n < 1 or any(dim % n for dim in f.grid.dims):
        raise ValueError(f"n={n} must divide every grid dimension {f.grid.dims}")
    idx = np.ix_(*[(n * np.arange(dim)) % dim for dim in f.grid.dims])
    return f.with_values(f.values[idx])


@dataclass
class SemicontinuityReport:
    mode: str
    limit_value: float  # F at the weak limit (the constant mean field)
    rows: list = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [r["value"] for r in self.rows]

    @property
    def spread(self) -> float:
        v = self.values
        return max(v) - min(v) if v else 0.0

    @property
    def ordered(self) -> bool:
        return all(r["ordered"] for r in self.rows)


def semicontinuity_experiment(
    F: Functional, U_base: PeriodicField, mode: str = "auto", n_list=(1, 2, 4, 8), tol: float = 1e-10
) -> SemicontinuityReport:
    """Grid integrals of F along ``U_n(x) = mean + (U_base(n x) - mean)``.

    ``usc`` expects every value below F(mean), ``lsc`` above it; ``auto``
    picks usc for the determinant power and lsc otherwise.
    """
    if mode == "auto":
        mode = "usc" if F.kind == "detpow" else "lsc"
    if mode not in ("usc", "lsc"):
        raise ValueError("mode must be usc, lsc or auto")
    mean = U_base.mean()
    limit = float(F(mean[None])[0])
    report = SemicontinuityReport(mode, limit)
    for n in n_list:
        Un = dilate(U_base, int(n))
        Un = Un.with_values(mean + (Un.values - mean))
        value = young_moment(Un, F)
        ok = value <= limit + tol if mode == "usc" else value >= limit - tol
        report.rows.append({"n": int(n), "value": value, "limit": limit, "ordered": bool(ok)})
    return report


# -- quasiconvexity probe -----------------------------------------------------------


@dataclass
class ProbeReport:
    functional: str
    F_zeta: float
    rows: list = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(r["violation"] for r in self.rows)


def _step_to_boundary(K: ConvexSet, zeta: np.ndarray, W: np.ndarray) -> float:
    """Largest t with dist(zeta + t W) >= margin/2 guaranteed by a linear bound."""
    delta = float(K.distance(zeta[None])[0])
    if K.kind == "psd":
        rho = np.abs(np.linalg.eigvalsh(K.matrices(W))).max()
    elif K.normals.shape[0]:
        rho = np.abs(W @ K.normals.T).max()
    else:
        return 1.0 / max(np.sqrt((W**2).sum(axis=-1)).max(), np.finfo(float).tiny)
    return 0.5 * delta / rho if rho > 0 else 0.0


def kaq_probe(
    F: Functional,
    K: ConvexSet,
    T: PotentialTriple,
    zeta,
    trials: int,
    seed: int,
    grid: GridSpec | None = None,
    band: int = 3,
    j: int = 3,
    tol: float = 1e-9,
) -> ProbeReport:
    """Search for ``mean F(zeta + L psi) < F(zeta)`` over windowed random potentials.

    Each trial draws a band-limited potential, multiplies it by a cut-off,
    applies L spectrally and scales the result so ``zeta + W`` stays inside K
    with half of zeta's margin.  A violation is
    ``mean F < F(zeta) - tol * max(1, |F(zeta)|)``.
    """
    zeta = np.asarray(zeta, dtype=float).reshape(-1)
    if zeta.size != T.A.N or K.N != T.A.N:
        raise ValueError("zeta, K and the operator must share the fiber dimension")
    if not K.contains(zeta) or K.distance(zeta[None])[0] <= 0:
        raise NotInSet("zeta must lie in the interior of K")
    d = T.A.d
    if grid is None:
        grid = GridSpec.cube(d, 32 if d == 2 else 16)
    chi = CutoffSpec(j, d)(grid.nodes())
    Fz = float(F(zeta[None])[0])
    report = ProbeReport(F.label, Fz)
    for t, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        box, coeffs = random_potential(d, T.L.N, band, ss)
        phi = idft(SpectralField(grid, _place(grid, box, coeffs)))
        W = apply_operator(T.L, phi.with_values(chi[..., None] * phi.values)).values
        step = _step_to_boundary(K, zeta, W)
        V = PeriodicField(grid, zeta + step * W)
        if K.distance(V.values).min() < 0:
            raise RuntimeError("test field left K")
        mean = young_moment(V, F)
        viol = mean < Fz - tol * max(1.0, abs(Fz))
        report.rows.append({"trial": t, "F_zeta": Fz, "mean_F": mean, "gap": mean - Fz, "violation": bool(viol)})
    return report
