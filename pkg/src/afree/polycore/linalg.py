"""Characteristic polynomials, pseudo-inverses and ranks of polynomial matrices."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .matrix import PolyMatrix
from .poly import MultiPoly


@dataclass(frozen=True)
class CharPolyData:
    """Coefficients of ``det(lambda*Id - B) = sum_j a_j lambda^(n-j)``.

    ``r`` is the largest index whose coefficient is not the zero polynomial.
    """

    coefficients: tuple[MultiPoly, ...]
    r: int

    @property
    def n(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, j: int) -> MultiPoly:
        return self.coefficients[j]

    def to_json(self) -> dict:
        return {"r": self.r, "coefficients": [a.to_json() for a in self.coefficients]}

    @classmethod
    def from_json(cls, d: int, data: dict) -> "CharPolyData":
        coeffs = tuple(MultiPoly.from_json(d, c) for c in data["coefficients"])
        return cls(coeffs, int(data["r"]))


@dataclass(frozen=True)
class ScaledPseudoInverse:
    """Pseudo-inverse written as polynomial numerator over scalar denominator."""

    numerator: PolyMatrix
    denominator: MultiPoly

    def evaluate(self, point) -> list[list[Fraction]]:
        s = self.denominator(point)
        if s == 0:
            raise ZeroDivisionError(f"denominator vanishes at {tuple(point)}")
        return [[v / s for v in row] for row in self.numerator.evaluate(point)]


def _faddeev_leverrier(B: PolyMatrix):
    """Return ``(a, chain)`` with ``chain[k] = B^(k-1) + a_1 B^(k-2) + ... + a_(k-1) Id``.

    The recurrence is ``M_1 = Id``, ``a_k = -tr(B M_k)/k``,
    ``M_(k+1) = B M_k + a_k Id``; the only divisions are by integers.
    """
    if B.rows != B.cols:
        raise ValueError("characteristic polynomial needs a square matrix")
    n, d = B.rows, B.d
    a = [MultiPoly.constant(d, 1)]
    chain = [None, PolyMatrix.identity(n, d)]
    for k in range(1, n + 1):
        BM = B.matmul(chain[k], diagonal_only=(k == n))
        a.append(BM.trace().scale(Fraction(-1, k)))
        if k < n:
            shift = PolyMatrix.identity(n, d).scale(a[k])
            chain.append(BM + shift)
    return a, chain


def char_poly(B: PolyMatrix) -> CharPolyData:
    a, _ = _faddeev_leverrier(B)
    r = max(j for j, aj in enumerate(a) if not aj.is_zero())
    return CharPolyData(tuple(a), r)


def decell_pinv(M: PolyMatrix, seed: int = 0) -> ScaledPseudoInverse:
    """Moore-Penrose pseudo-inverse of a polynomial matrix as ``P / s``.

    Uses Decell's formula on ``B = M M*`` with
    ``M^+ = -a_r^(-1) M* [a_0 B^(r-1) + ... + a_(r-1) Id]``.  The pair is
    rescaled by ``(-1)^r`` so that ``s`` is the sum of squared r-minors of M
    (nonnegative, positive wherever rank M = r); one exact Penrose check at
    a random integer point guards the overall sign.
    """
    d = M.d
    a, chain = _faddeev_leverrier(M.matmul(M.T))
    r = max(j for j, aj in enumerate(a) if not aj.is_zero())
    if r == 0:
        return ScaledPseudoInverse(PolyMatrix.zeros(M.cols, M.rows, d), MultiPoly.constant(d, 1))
    sign = -1 if r % 2 else 1
    P = M.T.matmul(chain[r]).scale(-sign)
    s = a[r].scale(sign)
    rng = np.random.default_rng(seed)
    for _ in range(64):
        xi = sample_point(d, rng)
        if s(xi) != 0:
            if not penrose_check(M, P, s, xi)["mp"]:
                P, s = -P, -s
            break
    return ScaledPseudoInverse(P, s)


def sample_point(d: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Random nonzero integer vector with coordinates in [-10, 10].

    Individual coordinates may vanish, so coordinate axes are sampled too
    (that is where rank drops usually live).
    """
    while True:
        xi = rng.integers(-10, 11, size=d)
        if xi.any():
            return tuple(int(x) for x in xi)


def _imul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def _itrans(A):
    return [list(c) for c in zip(*A)]


def penrose_check(M: PolyMatrix, P: PolyMatrix, s: MultiPoly, xi) -> dict:
    """Check the four Penrose identities for ``M^+ = P/s`` at ``xi``.

    Works on cleared-denominator integer matrices, so it is exact:
    ``M P M = s M``, ``P M P = s P``, ``(P M)^T = P M``, ``(M P)^T = M P``.
    """
    m_val = M.evaluate(xi)
    p_val = P.evaluate(xi)
    s_val = s(xi)
    den = lcm(*(x.denominator for row in m_val + p_val for x in row), s_val.denominator)
    Mi = [[int(x * den) for x in row] for row in m_val]
    Pi = [[int(x * den) for x in row] for row in p_val]
    si = int(s_val * den)
    MP = _imul(Mi, Pi)
    PM = _imul(Pi, Mi)
    mpm = _imul(MP, Mi)
    pmp = _imul(PM, Pi)
    # M (P/s) M = M  <=>  MPM = s M; both sides carry a factor den^3 here
    ok1 = all(x == den * si * y for rx, ry in zip(mpm, Mi) for x, y in zip(rx, ry))
    ok2 = all(x == den * si * y for rx, ry in zip(pmp, Pi) for x, y in zip(rx, ry))
    ok3 = PM == _itrans(PM)
    ok4 = MP == _itrans(MP)
    return {"mpm": ok1, "pmp": ok2, "pm_sym": ok3, "mp_sym": ok4, "mp": ok1 and ok2 and ok3 and ok4}


def exact_rank(matrix: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination."""
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return 0
    den = lcm(*(Fraction(x).denominator for r in rows for x in r))
    A = [[int(Fraction(x) * den) for x in r] for r in rows]
    m, n = len(A), len(A[0])
    rank, prev = 0, 1
    for col in range(n):
        pivot = next((i for i in range(rank, m) if A[i][col] != 0), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        p = A[rank][col]
        for i in range(rank + 1, m):
            for j in range(col + 1, n):
                A[i][j] = (p * A[i][j] - A[i][col] * A[rank][j]) // prev
            A[i][col] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def rank_profile(M: PolyMatrix, samples: int, seed: int) -> dict:
    """Exact ranks of M at random nonzero integer points."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    observed: dict[int, tuple[int, ...]] = {}
    for _ in range(samples):
        xi = sample_point(M.d, rng)
        observed.setdefault(exact_rank(M.evaluate_scaled(xi)), xi)
    return {
        "observed_ranks": sorted(observed),
        "constant_rank": len(observed) == 1,
        "witnesses": {r: list(x) for r, x in sorted(observed.items())},
    }
