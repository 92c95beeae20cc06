"""Constant-coefficient homogeneous differential operators and their symbols."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from .matrix import PolyMatrix
from .poly import MultiPoly, format_rational, grlex_key, parse_rational


class InvalidOperator(ValueError):
    pass


Matrix = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class OperatorDescriptor:
    """``A = sum_{|alpha|=k} A^alpha d_alpha`` mapping R^N-valued to R^m-valued fields.

    ``terms`` maps multi-indices to ``m x N`` rational matrices.  The zero
    operator is rejected unless ``allow_zero`` is set, which only the
    synthesis code does (a potential of an injective symbol is zero).
    """

    d: int
    k: int
    N: int
    m: int
    terms: Mapping[tuple[int, ...], Matrix]
    allow_zero: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if min(self.d, self.N, self.m) < 1 or self.k < 0:
            raise InvalidOperator("d, N, m must be positive and k nonnegative")
        clean = {}
        for alpha, mat in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.d or any(a < 0 for a in alpha):
                raise InvalidOperator(f"multi-index {alpha} invalid for d={self.d}")
            if sum(alpha) != self.k:
                raise InvalidOperator(f"|{alpha}| != k={self.k}")
            rows = tuple(tuple(parse_rational(x) for x in row) for row in mat)
            if len(rows) != self.m or any(len(r) != self.N for r in rows):
                raise InvalidOperator(f"coefficient of {alpha} must be {self.m}x{self.N}")
            if any(x for r in rows for x in r):
                if alpha in clean:
                    raise InvalidOperator(f"duplicate multi-index {alpha}")
                clean[alpha] = rows
        if not clean and not self.allow_zero:
            raise InvalidOperator("all coefficient matrices vanish")
        object.__setattr__(self, "terms", dict(sorted(clean.items(), key=lambda t: grlex_key(t[0]))))

    @classmethod
    def zero(cls, d: int, k: int, N: int, m: int) -> "OperatorDescriptor":
        return cls(d, k, N, m, {}, allow_zero=True)

    def is_zero(self) -> bool:
        return not self.terms

    def __hash__(self) -> int:
        return hash(json.dumps(self.to_json(), sort_keys=True))

    @cached_property
    def symbol(self) -> PolyMatrix:
        return symbol_of(self)

    @classmethod
    def from_symbol(cls, M: PolyMatrix, k: int | None = None) -> "OperatorDescriptor":
        """Read operator coefficients off the monomials of a homogeneous symbol."""
        if M.is_zero():
            if k is None:
                raise InvalidOperator("order of a zero symbol must be given")
            return cls.zero(M.d, k, M.cols, M.rows)
        q = M.homogeneous_degree()
        if q is None:
            raise InvalidOperator("symbol is not homogeneous")
        if k is not None and k != q:
            raise InvalidOperator(f"symbol degree {q} != requested order {k}")
        terms = {alpha: M.coefficient_matrix(alpha) for alpha in M.monomials()}
        return cls(M.d, q, M.cols, M.rows, terms)

    # -- io -----------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "d": self.d,
            "k": self.k,
            "N": self.N,
            "m": self.m,
            "terms": [
                {"alpha": list(a), "matrix": [[format_rational(x) for x in r] for r in mat]}
                for a, mat in self.terms.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping, allow_zero: bool = False) -> "OperatorDescriptor":
        try:
            terms = {}
            for t in data["terms"]:
                alpha = tuple(t["alpha"])
                if alpha in terms:
                    raise InvalidOperator(f"duplicate multi-index {alpha}")
                terms[alpha] = t["matrix"]
            return cls(
                int(data["d"]), int(data["k"]), int(data["N"]), int(data["m"]), terms,
                allow_zero=allow_zero,
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InvalidOperator):
                raise
            raise InvalidOperator(f"malformed operator description: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "OperatorDescriptor":
        return cls.from_json(json.loads(text))


def symbol_of(op: OperatorDescriptor) -> PolyMatrix:
    """``A[xi] = sum_alpha xi^alpha A^alpha`` as an ``m x N`` polynomial matrix."""
    entries = [[{} for _ in range(op.N)] for _ in range(op.m)]
    for alpha, mat in op.terms.items():
        for i, row in enumerate(mat):
            for j, c in enumerate(row):
                if c:
                    entries[i][j][alpha] = c
    return PolyMatrix([[MultiPoly._raw(op.d, e) for e in row] for row in entries])


# -- bundled fixtures -------------------------------------------------------

def _unit(d: int, i: int) -> tuple[int, ...]:
    return tuple(1 if j == i else 0 for j in range(d))


def divergence(d: int) -> OperatorDescriptor:
    """div u = sum_i d_i u_i for u: T^d -> R^d."""
    terms = {_unit(d, i): [[1 if j == i else 0 for j in range(d)]] for i in range(d)}
    return OperatorDescriptor(d, 1, d, 1, terms)


def sym_index(dm: int) -> list[tuple[int, int]]:
    """Matrix positions of the symmetric encoding: diagonal first, then the
    upper triangle row by row."""
    return [(i, i) for i in range(dm)] + [(i, j) for i in range(dm) for j in range(i + 1, dm)]


def symmetric_divergence(dm: int) -> OperatorDescriptor:
    """Row-wise divergence (div S)_i = sum_j d_j S_ij of symmetric S on T^dm.

    Fields use the plain encoding of :func:`sym_index` (no sqrt(2) weights),
    which keeps every coefficient rational.
    """
    idx = sym_index(dm)
    n = len(idx)
    terms = {}
    for j in range(dm):
        mat = [[0] * n for _ in range(dm)]
        for i in range(dm):
            pos = idx.index((min(i, j), max(i, j)))
            mat[i][pos] = 1
        terms[_unit(dm, j)] = mat
    return OperatorDescriptor(dm, 1, n, dm, terms)


def curl(d: int) -> OperatorDescriptor:
    """Scalar curl in 2D (d1 u2 - d2 u1), vector curl in 3D."""
    if d == 2:
        return OperatorDescriptor(2, 1, 2, 1, {(1, 0): [[0, 1]], (0, 1): [[-1, 0]]})
    if d == 3:
        terms = {
            (1, 0, 0): [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
            (0, 1, 0): [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
            (0, 0, 1): [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
        }
        return OperatorDescriptor(3, 1, 3, 3, terms)
    raise ValueError("curl fixtures exist for d = 2, 3 only")


def laplacian(d: int) -> OperatorDescriptor:
    terms = {tuple(2 if j == i else 0 for j in range(d)): [[1]] for i in range(d)}
    return OperatorDescriptor(d, 2, 1, 1, terms)


FIXTURES = {
    "div2": lambda: divergence(2),
    "div3": lambda: divergence(3),
    "symdiv2": lambda: symmetric_divergence(2),
    "symdiv3": lambda: symmetric_divergence(3),
    "curl2": lambda: curl(2),
    "curl3": lambda: curl(3),
}


def fixture(name: str) -> OperatorDescriptor:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}") from None
