"""Matrices of exact multivariate polynomials."""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Sequence

import numpy as np

from .kronecker import kron_matmul
from .poly import MultiPoly, parse_rational

# below this many coefficient pairs per product the plain dict loop wins
_KRON_THRESHOLD = 20_000


class PolyMatrix:
    """Immutable ``rows x cols`` matrix of :class:`MultiPoly` sharing one ``d``."""

    def __init__(self, entries: Sequence[Sequence[MultiPoly]]):
        rows = [tuple(r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("PolyMatrix needs at least one row and column")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        d = rows[0][0].d
        if any(p.d != d for r in rows for p in r):
            raise ValueError("entries have different dimensions")
        self.entries: tuple[tuple[MultiPoly, ...], ...] = tuple(rows)
        self.rows = len(rows)
        self.cols = cols
        self.d = d

    # -- constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int, d: int) -> "PolyMatrix":
        z = MultiPoly.zero(d)
        return cls([[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int, d: int, c=1) -> "PolyMatrix":
        one = MultiPoly.constant(d, c)
        z = MultiPoly.zero(d)
        return cls([[one if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_constant(cls, matrix, d: int) -> "PolyMatrix":
        return cls([[MultiPoly.constant(d, parse_rational(x)) for x in row] for row in matrix])

    # -- inspection ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij) -> MultiPoly:
        i, j = ij
        return self.entries[i][j]

    def is_zero(self) -> bool:
        return all(p.is_zero() for r in self.entries for p in r)

    def degree(self) -> int:
        return max(p.degree() for r in self.entries for p in r)

    def homogeneous_degree(self) -> int | None:
        """Common degree of all nonzero entries, or None if they differ.

        The zero matrix reports None.
        """
        degs = set()
        for r in self.entries:
            for p in r:
                if p.is_zero():
                    continue
                if not p.is_homogeneous():
                    return None
                degs.add(p.degree())
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self, q: int | None = None) -> bool:
        if self.is_zero():
            return True
        h = self.homogeneous_degree()
        return h is not None and (q is None or h == q)

    def monomials(self) -> list[tuple[int, ...]]:
        """All monomials occurring in any entry, sorted grlex."""
        from .poly import grlex_key

        seen = {a for r in self.entries for p in r for a in p._terms}
        return sorted(seen, key=grlex_key)

    def coefficient_matrix(self, alpha) -> list[list[Fraction]]:
        alpha = tuple(alpha)
        return [[p.coeff(alpha) for p in r] for r in self.entries]

    def trace(self) -> MultiPoly:
        if self.rows != self.cols:
            raise ValueError("trace of non-square matrix")
        t = MultiPoly.zero(self.d)
        for i in range(self.rows):
            t = t + self.entries[i][i]
        return t

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and self == self.T

    # -- algebra ------------------------------------------------------------
    @cached_property
    def T(self) -> "PolyMatrix":
        return PolyMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def adjoint(self) -> "PolyMatrix":
        return self.T

    def _same_shape(self, other: "PolyMatrix") -> None:
        if self.shape != other.shape or self.d != other.d:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same_shape(other)
        return PolyMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._same_shape(other)
        return PolyMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)]
        )

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix([[-a for a in r] for r in self.entries])

    def scale(self, c) -> "PolyMatrix":
        """Multiply by a rational scalar or a scalar polynomial."""
        return PolyMatrix([[a * c for a in r] for r in self.entries])

    def matmul(self, other: "PolyMatrix", diagonal_only: bool = False) -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError(f"inner dimensions differ: {self.shape} @ {other.shape}")
        if self.d != other.d:
            raise ValueError("polynomial dimensions differ")
        work = sum(len(p) for r in self.entries for p in r) * max(
            (len(p) for r in other.entries for p in r), default=0
        )
        if work > _KRON_THRESHOLD:
            return PolyMatrix(kron_matmul(self.entries, other.entries, diagonal_only))
        out = []
        z = MultiPoly.zero(self.d)
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                if diagonal_only and i != j:
                    row.append(z)
                    continue
                acc = z
                for k in range(self.cols):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if not a.is_zero() and not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self.matmul(other)

    def primitive(self) -> tuple[Fraction, "PolyMatrix"]:
        """Split into ``(c, P)`` with ``self == c * P``, ``c > 0`` and P integral
        with coprime coefficients.  The zero matrix gives ``(1, self)``."""
        coeffs = [c for r in self.entries for p in r for c in p._terms.values()]
        if not coeffs:
            return Fraction(1), self
        den = lcm(*(c.denominator for c in coeffs))
        g = 0
        for c in coeffs:
            g = gcd(g, c.numerator * (den // c.denominator))
        content = Fraction(g, den)
        return content, self.scale(1 / content)

    # -- evaluation ---------------------------------------------------------
    @cached_property
    def _integer_form(self):
        # (denominator, per-entry list of (alpha, int coefficient))
        coeffs = [c for r in self.entries for p in r for c in p._terms.values()]
        den = lcm(*(c.denominator for c in coeffs)) if coeffs else 1
        table = [
            [[(a, c.numerator * (den // c.denominator)) for a, c in p._terms.items()] for p in r]
            for r in self.entries
        ]
        return den, table

    def evaluate(self, point: Sequence) -> list[list[Fraction]]:
        """Exact evaluation at an integer or rational point."""
        if len(point) != self.d:
            raise ValueError(f"point must have length {self.d}")
        pt = [parse_rational(x) for x in point]
        if all(x.denominator == 1 for x in pt):
            num = self.evaluate_scaled([int(x) for x in pt])
            den = self._integer_form[0]
            return [[Fraction(v, den) for v in r] for r in num]
        return [[p(pt) for p in r] for r in self.entries]

    def evaluate_scaled(self, point: Sequence[int]) -> list[list[int]]:
        """Integer values of ``den * M(point)`` at an integer point, where
        ``den`` is the common coefficient denominator."""
        den, table = self._integer_form
        deg = max(self.degree(), 0)
        pows = [[x**e for e in range(deg + 1)] for x in point]
        out = []
        for r in table:
            row = []
            for terms in r:
                v = 0
                for alpha, c in terms:
                    m = c
                    for i, e in enumerate(alpha):
                        if e:
                            m *= pows[i][e]
                    v += m
                row.append(v)
            out.append(row)
        return out

    @cached_property
    def _float_table(self):
        monos = self.monomials()
        coef = np.array(
            [[float(p.coeff(a)) for r in self.entries for p in r] for a in monos]
        ).reshape(len(monos), self.rows * self.cols)
        return monos, coef

    def evaluate_float(self, xi: Sequence[np.ndarray], chunk: int = 8192) -> np.ndarray:
        """Evaluate at arrays of coordinates (broadcast together).

        Returns an array of shape ``broadcast_shape + (rows, cols)``.  Points
        are processed in chunks as a (points x monomials) @ (monomials x
        entries) product.
        """
        if len(xi) != self.d:
            raise ValueError(f"need {self.d} coordinate arrays")
        xi = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xi])
        shape = xi[0].shape
        flat = [x.reshape(-1) for x in xi]
        npts = flat[0].size
        monos, coef = self._float_table
        out = np.zeros((npts, self.rows * self.cols))
        if monos:
            deg = max(sum(a) for a in monos)
            for lo in range(0, npts, chunk):
                hi = min(lo + chunk, npts)
                pows = []
                for x in flat:
                    col = [np.ones(hi - lo)]
                    for _ in range(deg):
                        col.append(col[-1] * x[lo:hi])
                    pows.append(col)
                V = np.empty((hi - lo, len(monos)))
                for c, alpha in enumerate(monos):
                    v = pows[0][alpha[0]]
                    for i in range(1, self.d):
                        if alpha[i]:
                            v = v * pows[i][alpha[i]]
                    V[:, c] = v
                out[lo:hi] = V @ coef
        return out.reshape(shape + (self.rows, self.cols))

    # -- comparison / io ----------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.shape == other.shape and self.d == other.d and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(p) for p in r) for r in self.entries)
        return f"PolyMatrix[{self.rows}x{self.cols}]({body})"

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[p.to_json() for p in r] for r in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolyMatrix":
        d = int(data["d"])
        m = cls([[MultiPoly.from_json(d, e) for e in r] for r in data["entries"]])
        if m.shape != (data["rows"], data["cols"]):
            raise ValueError("declared shape does not match entries")
        return m


def matmul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    return A.matmul(B)


def adjoint(M: PolyMatrix) -> PolyMatrix:
    """Adjoint of a real polynomial matrix, i.e. its transpose."""
    return M.T


def eval_symbol(M: PolyMatrix, xi: Sequence):
    """Evaluate M at xi: exact for int/Fraction coordinates, float otherwise."""
    if all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xi):
        return M.evaluate(xi)
    return M.evaluate_float([np.asarray(float(x)) for x in xi])
