"""Convex constraint sets with a designated interior point, and the shrinking map."""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

from ..polycore import sym_index
from ..torus import PeriodicField


class NotInSet(ValueError):
    pass


def sym_dim(N: int) -> int | None:
    """d_m with d_m (d_m + 1) / 2 == N, or None."""
    dm = (isqrt(8 * N + 1) - 1) // 2
    return dm if dm * (dm + 1) // 2 == N else None


def sym_decode(values: np.ndarray, dm: int) -> np.ndarray:
    """Vectors in the plain symmetric encoding -> symmetric matrices (..., dm, dm)."""
    values = np.asarray(values, dtype=float)
    out = np.empty(values.shape[:-1] + (dm, dm))
    for pos, (i, j) in enumerate(sym_index(dm)):
        out[..., i, j] = values[..., pos]
        out[..., j, i] = values[..., pos]
    return out


def sym_encode(mats: np.ndarray) -> np.ndarray:
    mats = np.asarray(mats, dtype=float)
    dm = mats.shape[-1]
    return np.stack([0.5 * (mats[..., i, j] + mats[..., j, i]) for i, j in sym_index(dm)], axis=-1)


def identity_vector(dm: int) -> np.ndarray:
    return sym_encode(np.eye(dm))


@dataclass(frozen=True, eq=False)
class ConvexSet:
    """``K`` with interior point ``Y``.

    ``kind`` is ``"psd"`` (positive semidefinite d_m x d_m matrices, stored in
    the symmetric encoding when ``N = d_m(d_m+1)/2`` or row-major when
    ``N = d_m^2``) or ``"halfspaces"`` (``<h_i, v> >= c_i`` for every face; no
    faces means all of R^N).
    """

    kind: str
    N: int
    interior_point: np.ndarray
    dm: int | None = None
    normals: np.ndarray | None = None
    offsets: np.ndarray | None = None

    def __post_init__(self):
        Y = np.asarray(self.interior_point, dtype=float).reshape(self.N)
        object.__setattr__(self, "interior_point", Y)
        if self.kind not in ("psd", "halfspaces"):
            raise ValueError(f"unknown convex set kind {self.kind!r}")
        if self.margin <= 0:
            raise ValueError("interior point must lie strictly inside the set")

    @classmethod
    def psd(cls, dm: int, Y=None, full: bool = False) -> "ConvexSet":
        N = dm * dm if full else dm * (dm + 1) // 2
        if Y is None:
            Y = np.eye(dm).ravel() if full else identity_vector(dm)
        return cls("psd", N, Y, dm=dm)

    @classmethod
    def halfspaces(cls, normals, offsets, Y) -> "ConvexSet":
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        offsets = np.asarray(offsets, dtype=float).reshape(-1)
        Y = np.asarray(Y, dtype=float)
        if normals.size == 0:
            normals = np.zeros((0, Y.size))
        if normals.shape != (offsets.size, Y.size):
            raise ValueError("normals must be (faces, N) and offsets (faces,)")
        return cls("halfspaces", Y.size, Y, normals=normals, offsets=offsets)

    @classmethod
    def whole_space(cls, N: int) -> "ConvexSet":
        return cls.halfspaces(np.zeros((0, N)), np.zeros(0), np.zeros(N))

    @property
    def margin(self) -> float:
        """Boundary distance of the interior point."""
        return float(self.distance(self.interior_point[None])[0])

    def matrices(self, values: np.ndarray) -> np.ndarray:
        if self.N == self.dm * self.dm:
            m = np.asarray(values, dtype=float).reshape(values.shape[:-1] + (self.dm, self.dm))
            return 0.5 * (m + np.swapaxes(m, -1, -2))
        return sym_decode(values, self.dm)

    def distance(self, values: np.ndarray) -> np.ndarray:
        """Signed boundary distance per point (negative outside).

        PSD: smallest eigenvalue; half-spaces: ``min_i <h_i, v> - c_i``.
        """
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.N:
            raise ValueError(f"values have {values.shape[-1]} components, set lives in R^{self.N}")
        if self.kind == "psd":
            return np.linalg.eigvalsh(self.matrices(values))[..., 0]
        if self.normals.shape[0] == 0:
            return np.full(values.shape[:-1], np.inf)
        return (values @ self.normals.T - self.offsets).min(axis=-1)

    def contains(self, v, tol: float = 0.0) -> bool:
        return bool(self.distance(np.asarray(v, dtype=float)[None])[0] >= -tol)


@dataclass(frozen=True)
class ProjectCheck:
    member: bool
    min_boundary_distance: float
    argmin: tuple[int, ...]


def project_check(K: ConvexSet, f: PeriodicField, tol: float = 0.0) -> ProjectCheck:
    """Membership of every node value and the smallest boundary distance."""
    dist = K.distance(f.values)
    idx = np.unravel_index(int(np.argmin(dist)), dist.shape)
    low = float(dist[idx])
    return ProjectCheck(low >= -tol, low, tuple(int(i) for i in idx))


def shrink_to_interior(K: ConvexSet, f: PeriodicField, n: int, tol: float = 0.0) -> PeriodicField:
    """``V_n = (1 - 1/n)(f - Y) + Y``; pulls a K-valued field away from the boundary."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    chk = project_check(K, f, tol)
    if not chk.member:
        raise NotInSet(f"field leaves K at node {chk.argmin} (distance {chk.min_boundary_distance:.3e})")
    t = 1.0 - 1.0 / n
    Y = K.interior_point
    return f.with_values(t * (f.values - Y) + Y)
