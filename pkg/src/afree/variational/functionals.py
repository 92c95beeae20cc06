"""Integrands F: R^N -> R and empirical (grid-average) moments."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum
from typing import Callable

import numpy as np

from ..torus import PeriodicField
from .convex import sym_decode, sym_dim


@dataclass(frozen=True)
class Functional:
    """Pointwise integrand evaluated on arrays of shape (..., N).

    ``kind`` is one of ``detpow`` (``det(A)^(1/(d_m-1))``, zero at singular
    matrices), ``negdetpow``, ``pnorm`` (``|v|^p``), ``negpnorm`` or
    ``custom``.  ``growth`` and ``constant`` record a bound
    ``|F(z)| <= C (1 + |z|^r)`` for reports only.
    """

    kind: str
    dm: int | None = None
    p: float | None = None
    fn: Callable | None = field(default=None, compare=False, repr=False)
    name: str | None = None

    @classmethod
    def detpow(cls, dm: int) -> "Functional":
        if dm < 2:
            raise ValueError("det^(1/(d-1)) needs d >= 2")
        return cls("detpow", dm=dm)

    @classmethod
    def negdetpow(cls, dm: int) -> "Functional":
        return cls("negdetpow", dm=dm)

    @classmethod
    def pnorm(cls, p: float) -> "Functional":
        return cls("pnorm", p=float(p))

    @classmethod
    def negpnorm(cls, p: float) -> "Functional":
        return cls("negpnorm", p=float(p))

    @classmethod
    def custom(cls, name: str, fn: Callable) -> "Functional":
        return cls("custom", fn=fn, name=name)

    @property
    def label(self) -> str:
        if self.kind in ("detpow", "negdetpow"):
            return f"{self.kind}{self.dm}"
        if self.kind in ("pnorm", "negpnorm"):
            return f"{self.kind}{self.p:g}"
        return self.name or "custom"

    @property
    def growth(self) -> float | None:
        if self.kind in ("detpow", "negdetpow"):
            return self.dm / (self.dm - 1)
        if self.kind in ("pnorm", "negpnorm"):
            return self.p
        return None

    @property
    def constant(self) -> float:
        return 1.0

    def _det(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        N = values.shape[-1]
        if N == self.dm * self.dm:
            mats = values.reshape(values.shape[:-1] + (self.dm, self.dm))
        elif sym_dim(N) == self.dm:
            mats = sym_decode(values, self.dm)
        else:
            raise ValueError(f"{N} components do not encode {self.dm}x{self.dm} matrices")
        return np.linalg.det(mats)

    def __call__(self, values) -> np.ndarray:
        if self.kind in ("detpow", "negdetpow"):
            det = self._det(values)
            if self.dm == 2:
                out = det
            else:
                out = np.maximum(det, 0.0) ** (1.0 / (self.dm - 1))
            return out if self.kind == "detpow" else -out
        if self.kind in ("pnorm", "negpnorm"):
            mag = np.sqrt((np.asarray(values, dtype=float) ** 2).sum(axis=-1))
            out = mag**self.p
            return out if self.kind == "pnorm" else -out
        return np.asarray(self.fn(np.asarray(values, dtype=float)), dtype=float)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point cloud in R^N; grid averages of a field are the uniform case."""

    samples: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if s.shape[0] != w.size:
            raise ValueError("one weight per sample")
        if (w < 0).any() or abs(fsum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_field(cls, f: PeriodicField) -> "EmpiricalMeasure":
        s = f.values.reshape(-1, f.N)
        return cls(s, np.full(s.shape[0], 1.0 / s.shape[0]))

    def moment(self, g) -> float:
        vals = np.asarray(g(self.samples), dtype=float).reshape(-1)
        if vals.size == 1 and self.samples.shape[0] > 1:
            vals = np.full(self.samples.shape[0], vals[0])
        if np.all(self.weights == self.weights[0]):
            return fsum(vals) / vals.size
        return fsum(self.weights * vals)


def young_moment(f: PeriodicField, g) -> float:
    """Grid average of ``g(f(x))``; g maps (..., N) arrays to (...)."""
    return EmpiricalMeasure.from_field(f).moment(g)
