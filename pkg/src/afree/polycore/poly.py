"""Exact multivariate polynomials with rational coefficients.

Coefficients are :class:`fractions.Fraction`; monomials are exponent tuples
of fixed length ``d``.  Term order is graded lexicographic (highest total
degree first, ties broken lexicographically), which is the order used for
every serialized form.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

Rational = Fraction

Monomial = tuple[int, ...]


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, ints or Fractions into a Fraction.

    Floats are rejected: they would silently introduce binary rounding into
    an exact pipeline.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    return str(q)


def grlex_key(alpha: Monomial) -> tuple:
    return (-sum(alpha), tuple(-a for a in alpha))


class MultiPoly:
    """Sparse polynomial in ``d`` variables over the rationals.

    Instances are immutable.  Zero coefficients are never stored.
    """

    __slots__ = ("d", "_terms", "_hash")

    def __init__(self, d: int, terms: Mapping[Monomial, object] | None = None):
        if d < 1:
            raise ValueError("dimension must be positive")
        self.d = d
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for alpha, c in terms.items():
                alpha = tuple(int(a) for a in alpha)
                if len(alpha) != d or any(a < 0 for a in alpha):
                    raise ValueError(f"bad exponent {alpha} for d={d}")
                c = parse_rational(c)
                if c:
                    clean[alpha] = clean.get(alpha, Fraction(0)) + c
            clean = {a: c for a, c in clean.items() if c}
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, d: int, terms: dict[Monomial, Fraction]) -> "MultiPoly":
        # trusted constructor: terms already clean
        p = cls.__new__(cls)
        p.d = d
        p._terms = terms
        p._hash = None
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, d: int) -> "MultiPoly":
        return cls._raw(d, {})

    @classmethod
    def constant(cls, d: int, c) -> "MultiPoly":
        c = parse_rational(c)
        return cls._raw(d, {(0,) * d: c} if c else {})

    @classmethod
    def variable(cls, d: int, i: int) -> "MultiPoly":
        alpha = [0] * d
        alpha[i] = 1
        return cls._raw(d, {tuple(alpha): Fraction(1)})

    @classmethod
    def monomial(cls, alpha: Sequence[int], c=1) -> "MultiPoly":
        return cls(len(alpha), {tuple(alpha): c})

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in graded lexicographic order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coeff(self, alpha: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(alpha), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(a) for a in self._terms), default=-1)

    def is_homogeneous(self, q: int | None = None) -> bool:
        degs = {sum(a) for a in self._terms}
        if not degs:
            return True
        if len(degs) != 1:
            return False
        return q is None or degs == {q}

    def denominator_lcm(self) -> int:
        return lcm(*(c.denominator for c in self._terms.values())) if self._terms else 1

    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self._terms:
            return Fraction(1)
        den = self.denominator_lcm()
        g = 0
        for c in self._terms.values():
            g = gcd(g, c.numerator * (den // c.denominator))
        return Fraction(g, den)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "MultiPoly") -> None:
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.constant(self.d, other)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            v = out.get(a, 0) + c
            if v:
                out[a] = v
            else:
                out.pop(a, None)
        return MultiPoly._raw(self.d, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self.d, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def scale(self, c) -> "MultiPoly":
        c = parse_rational(c)
        if not c:
            return MultiPoly.zero(self.d)
        return MultiPoly._raw(self.d, {a: v * c for a, v in self._terms.items()})

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        if len(self._terms) * len(other._terms) > 4096:
            from .kronecker import kron_matmul

            return kron_matmul([[self]], [[other]])[0][0]
        out: dict[Monomial, Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0) + ca * cb
        return MultiPoly._raw(self.d, {k: v for k, v in out.items() if v})

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power")
        result = MultiPoly.constant(self.d, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def exact_div(self, c) -> "MultiPoly":
        c = parse_rational(c)
        if not c:
            raise ZeroDivisionError("division by zero scalar")
        return self.scale(1 / c)

    # -- evaluation ---------------------------------------------------------
    def __call__(self, point: Sequence) -> Fraction:
        """Exact evaluation at a point with int/Fraction coordinates."""
        if len(point) != self.d:
            raise ValueError("point has wrong length")
        pt = [parse_rational(x) if not isinstance(x, int) else x for x in point]
        total = Fraction(0)
        for alpha, c in self._terms.items():
            v = c
            for x, e in zip(pt, alpha):
                if e:
                    v *= x**e
            total += v
        return total

    # -- comparison / display -----------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.d == other.d and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == MultiPoly.constant(self.d, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.d, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.d}, {self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for alpha, c in self.items():
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(alpha) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization ------------------------------------------------------
    def to_json(self) -> list[dict]:
        return [{"alpha": list(a), "coeff": format_rational(c)} for a, c in self.items()]

    @classmethod
    def from_json(cls, d: int, data: Iterable[Mapping]) -> "MultiPoly":
        terms: dict[Monomial, Fraction] = {}
        for t in data:
            alpha = tuple(t["alpha"])
            terms[alpha] = terms.get(alpha, Fraction(0)) + parse_rational(t["coeff"])
        return cls(d, terms)
