"""Potential operators L with ker A[xi] = im L[xi], and annihilators G with ker L[xi] = im G[xi].

Both are produced by the same map: for a symbol M with scaled pseudo-inverse
``P/s`` the kernel projector is ``Id - M^+ M``, and ``s Id - P M`` is its
polynomial multiple.  Outputs are divided by their positive integer content
so fixtures are canonical; the scale is kept on the triple.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, prod

import numpy as np

from .polycore import (
    CharPolyData,
    MultiPoly,
    OperatorDescriptor,
    PolyMatrix,
    ScaledPseudoInverse,
    char_poly,
    decell_pinv,
    exact_rank,
    rank_profile,
    sample_point,
)
from .polycore.poly import format_rational, parse_rational


class SynthesisError(ValueError):
    pass


class NonConstantRank(SynthesisError):
    pass


class ZeroOperator(SynthesisError):
    pass


@dataclass(frozen=True)
class KernelData:
    """Everything produced while building ``s Id - P M`` for one symbol."""

    operator: OperatorDescriptor
    raw: PolyMatrix  # s Id - P M before content normalisation
    scale: Fraction  # operator.symbol == scale * raw
    pinv: ScaledPseudoInverse
    char: CharPolyData  # of M M*


def _kernel(op: OperatorDescriptor, samples: int, seed: int, reject_zero: bool) -> KernelData:
    M = op.symbol
    if op.is_zero():
        if reject_zero:
            raise ZeroOperator("operator symbol vanishes identically")
    else:
        prof = rank_profile(M, samples, seed)
        if not prof["constant_rank"]:
            raise NonConstantRank(
                f"sampled ranks {prof['observed_ranks']} differ (witnesses {prof['witnesses']})"
            )
    B = M.matmul(M.T)
    cp = char_poly(B)
    pinv = decell_pinv(M, seed=seed)
    s, P = pinv.denominator, pinv.numerator
    raw = PolyMatrix.identity(op.N, op.d).scale(s) - P.matmul(M)
    content, prim = raw.primitive()
    order = 2 * op.k * cp.r
    return KernelData(OperatorDescriptor.from_symbol(prim, k=order), raw, 1 / content, pinv, cp)


def potential_operator(A: OperatorDescriptor, samples: int = 64, seed: int = 0) -> OperatorDescriptor:
    """Operator L with symbol proportional to ``s_A Id - P_A A[xi]``.

    Raises NonConstantRank if sampled ranks of A[xi] differ and ZeroOperator
    for a vanishing symbol.  For an injective symbol the result is the zero
    operator.
    """
    return _kernel(A, samples, seed, reject_zero=True).operator


def annihilator_operator(L: OperatorDescriptor, samples: int = 64, seed: int = 0) -> OperatorDescriptor:
    """Operator G with ``im G[xi] = ker L[xi]``; same construction as for L."""
    return _kernel(L, samples, seed, reject_zero=False).operator


@dataclass(frozen=True)
class PotentialTriple:
    A: OperatorDescriptor
    L: OperatorDescriptor
    G: OperatorDescriptor
    char_A: CharPolyData | None = None
    char_L: CharPolyData | None = None
    pinv_A: ScaledPseudoInverse | None = field(default=None, repr=False, compare=False)
    pinv_L: ScaledPseudoInverse | None = field(default=None, repr=False, compare=False)
    l_scale: Fraction = Fraction(1)
    g_scale: Fraction = Fraction(1)

    @property
    def k(self) -> int:
        return self.A.k

    @property
    def l(self) -> int:
        return self.L.k

    @property
    def r_a(self) -> int | None:
        return None if self.char_A is None else self.char_A.r

    @property
    def r_l(self) -> int | None:
        return None if self.char_L is None else self.char_L.r

    def potential_pinv(self) -> ScaledPseudoInverse:
        """``L^+ = P_L / s_L`` for the stored (normalised) L."""
        if self.pinv_L is not None:
            return self.pinv_L
        return decell_pinv(self.L.symbol)

    def flags(self) -> dict:
        out = {
            "order_is_2k": self.l == 2 * self.k,
            "G_symmetric": self.G.symbol.is_symmetric(),
        }
        if self.r_a is not None:
            out["order_law_holds"] = self.l == 2 * self.k * self.r_a
        if self.r_l is not None:
            out["G_degree_law_holds"] = self.G.k == 2 * self.l * self.r_l
        return out

    def to_json(self) -> dict:
        data = {
            "A": self.A.to_json(),
            "L": self.L.to_json(),
            "G": self.G.to_json(),
            "k": self.k,
            "l": self.l,
            "deg_G": self.G.k,
            "l_scale": format_rational(self.l_scale),
            "g_scale": format_rational(self.g_scale),
        }
        if self.char_A is not None:
            data["r_A"] = self.char_A.r
            data["char_A"] = self.char_A.to_json()
        if self.char_L is not None:
            data["r_L"] = self.char_L.r
            data["char_L"] = self.char_L.to_json()
        data["flags"] = self.flags()
        return data

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, data: dict) -> "PotentialTriple":
        A = OperatorDescriptor.from_json(data["A"])
        L = OperatorDescriptor.from_json(data["L"], allow_zero=True)
        G = OperatorDescriptor.from_json(data["G"], allow_zero=True)
        char_A = CharPolyData.from_json(A.d, data["char_A"]) if "char_A" in data else None
        char_L = CharPolyData.from_json(A.d, data["char_L"]) if "char_L" in data else None
        return cls(
            A, L, G, char_A, char_L,
            l_scale=parse_rational(data.get("l_scale", "1")),
            g_scale=parse_rational(data.get("g_scale", "1")),
        )

    def report(self) -> str:
        lines = [
            f"A: d={self.A.d} k={self.k} N={self.A.N} m={self.A.m}",
            f"L: order l={self.l} (2k={2 * self.k}), {self.L.N}x{self.L.N}",
            f"G: order {self.G.k}",
        ]
        if self.char_A is not None:
            lines.append(f"r_A={self.char_A.r}  a^A_r={self.char_A[self.char_A.r]}")
        if self.char_L is not None:
            lines.append(f"r_L={self.char_L.r}")
        for key, val in self.flags().items():
            lines.append(f"{key}: {val}")
        if self.L.d <= 3 and len(self.L.symbol.monomials()) <= 12:
            lines.append(f"L[xi] = {self.L.symbol}")
        return "\n".join(lines)


def synthesize(A: OperatorDescriptor, samples: int = 64, seed: int = 0) -> PotentialTriple:
    """Build the chain (A, L, G)."""
    return _synthesize_cached(A, samples, seed)


@lru_cache(maxsize=32)
def _synthesize_cached(A: OperatorDescriptor, samples: int, seed: int) -> PotentialTriple:
    ka = _kernel(A, samples, seed, reject_zero=True)
    kl = _kernel(ka.operator, samples, seed, reject_zero=False)
    return PotentialTriple(
        A, ka.operator, kl.operator, ka.char, kl.char, ka.pinv, kl.pinv, ka.scale, kl.scale
    )


# -- verification -------------------------------------------------------------


@dataclass
class ExactnessReport:
    passed: bool
    AL_zero: bool
    LG_zero: bool
    rank_failures: list = field(default_factory=list)
    witness: tuple | None = None
    samples: int = 0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = f"{status} AL=0:{self.AL_zero} LG=0:{self.LG_zero} rank_failures={len(self.rank_failures)}"
        if self.witness is not None:
            msg += f" witness={list(self.witness)}"
        return msg


def verify_exactness(T: PotentialTriple, samples: int = 100, seed: int = 0) -> ExactnessReport:
    """Symbolic AL = 0, LG = 0 and sampled rank counts of the exact sequence."""
    Asym, Lsym, Gsym = T.A.symbol, T.L.symbol, T.G.symbol
    AL = Asym.matmul(Lsym)
    LG = Lsym.matmul(Gsym)
    al_zero, lg_zero = AL.is_zero(), LG.is_zero()
    N, Np = T.A.N, T.L.N
    rng = np.random.default_rng(seed)
    failures = []
    witness = None
    for _ in range(samples):
        xi = sample_point(T.A.d, rng)
        ra = exact_rank(Asym.evaluate_scaled(xi))
        rl = exact_rank(Lsym.evaluate_scaled(xi))
        rg = exact_rank(Gsym.evaluate_scaled(xi))
        bad = ra + rl != N or rl + rg != Np
        if not bad and not (al_zero and lg_zero):
            bad = any(v for row in AL.evaluate_scaled(xi) for v in row) or any(
                v for row in LG.evaluate_scaled(xi) for v in row
            )
        if bad:
            failures.append({"xi": list(xi), "rank_A": ra, "rank_L": rl, "rank_G": rg})
            if witness is None:
                witness = xi
    passed = al_zero and lg_zero and not failures
    return ExactnessReport(passed, al_zero, lg_zero, failures, witness, samples)


def _ratio(target: PolyMatrix, base: PolyMatrix) -> Fraction | None:
    """c with target == c * base, or None if no such rational exists."""
    if base.is_zero():
        return Fraction(1) if target.is_zero() else None
    i, j = next((i, j) for i, row in enumerate(base.entries) for j, p in enumerate(row) if not p.is_zero())
    alpha, c = next(iter(base.entries[i][j]._terms.items()))
    ratio = target.entries[i][j].coeff(alpha) / c
    return ratio if target == base.scale(ratio) else None


@dataclass
class ExpansionReport:
    holds: bool
    intermediate_holds: bool
    mismatch: tuple | None = None
    samples: int = 0


def expand_g_in_a(T: PotentialTriple, samples: int = 100, seed: int = 0) -> ExpansionReport:
    """Recompute G from the characteristic data of A and L alone.

    With ``E = Id - A^+ A`` and ``L = c s_A E`` the annihilator is
    ``a^L_r Id + [sum_(j<r) a^L_j (c a^A_r)^(2(r-j))] E`` up to the factor
    ``(-1)^r`` that turns ``a^L_r`` into ``s_L``.  Everything is multiplied by
    ``s_A`` to stay polynomial.
    """
    Asym, Lsym, Gsym = T.A.symbol, T.L.symbol, T.G.symbol
    d, N = T.A.d, T.A.N
    pa = decell_pinv(Asym)
    s_a = pa.denominator
    L_raw = PolyMatrix.identity(N, d).scale(s_a) - pa.numerator.matmul(Asym)
    c = _ratio(Lsym, L_raw)
    if c is None:
        return ExpansionReport(False, False, ("L", "not a multiple of s_A Id - P_A A"), samples)

    LLt = Lsym.matmul(Lsym.T)
    cl = char_poly(LLt)
    r = cl.r
    pl = decell_pinv(Lsym)
    G_kernel = PolyMatrix.identity(N, d).scale(pl.denominator) - pl.numerator.matmul(Lsym)
    cg = _ratio(Gsym, G_kernel)
    if cg is None:
        return ExpansionReport(False, False, ("G", "not a multiple of s_L Id - P_L L"), samples)

    bracket = MultiPoly.zero(d)
    cs2 = s_a * s_a * (c * c)
    for j in range(r):
        bracket = bracket + cl[j] * cs2 ** (r - j)
    lhs = G_kernel.scale(s_a).scale(-1 if r % 2 else 1)
    rhs = PolyMatrix.identity(N, d).scale(cl[r] * s_a) + L_raw.scale(bracket)
    holds = lhs == rhs
    mismatch = None
    if not holds:
        for i in range(N):
            for j in range(N):
                if lhs[i, j] != rhs[i, j]:
                    mismatch = (i, j)
                    break
            if mismatch:
                break

    # L L* = (c a^A_r)^2 E, i.e. s_A L L* = c^2 s_A^2 L_raw, checked pointwise
    rng = np.random.default_rng(seed)
    inter = True
    for _ in range(samples):
        xi = sample_point(d, rng)
        sv = s_a(xi)
        left = [[sv * v for v in row] for row in LLt.evaluate(xi)]
        right = [[c * c * sv * sv * v for v in row] for row in L_raw.evaluate(xi)]
        if left != right:
            inter = False
            mismatch = mismatch or ("intermediate", xi)
            break
    return ExpansionReport(holds and inter, inter, mismatch, samples)


# -- Leibniz expansion ----------------------------------------------------------


@dataclass(frozen=True)
class LeibnizTable:
    """``L(chi Phi) = sum L^(alpha,beta) (d_alpha Phi)(d_beta chi)`` for scalar chi."""

    order: int
    entries: dict  # (alpha, beta) -> tuple of tuple of Fraction

    def __getitem__(self, key):
        return self.entries[key]

    def items(self):
        return self.entries.items()


def _multi_binom(gamma, alpha) -> int:
    return prod(comb(g, a) for g, a in zip(gamma, alpha))


def _split(gamma):
    if not gamma:
        yield (), ()
        return
    for a0 in range(gamma[0] + 1):
        for a, b in _split(gamma[1:]):
            yield (a0,) + a, (gamma[0] - a0,) + b


def leibniz_table(L: OperatorDescriptor) -> LeibnizTable:
    entries = {}
    for gamma, mat in L.terms.items():
        for alpha, beta in _split(gamma):
            w = _multi_binom(gamma, alpha)
            entries[(alpha, beta)] = tuple(tuple(w * x for x in row) for row in mat)
    return LeibnizTable(L.k, entries)
