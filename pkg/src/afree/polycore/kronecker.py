"""Polynomial matrix products by Kronecker substitution.

Each entry is packed into one big integer (one fixed-width signed slot per
monomial), the matrix product is done on GMP integers, and the slots are
read back.  For homogeneous operands the last variable is dropped, since
its exponent is implied by the total degree.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm

import gmpy2

from .poly import MultiPoly


def _common_degree(rows) -> int | None:
    degs = {p.degree() for row in rows for p in row if not p.is_zero()}
    if len(degs) == 1 and all(p.is_homogeneous() for row in rows for p in row):
        return degs.pop()
    return None


def _integerize(rows):
    den = lcm(*(p.denominator_lcm() for row in rows for p in row)) if rows else 1
    ints = [
        [{a: c.numerator * (den // c.denominator) for a, c in p._terms.items()} for p in row]
        for row in rows
    ]
    return den, ints


def kron_matmul(A, B, diagonal_only: bool = False):
    """Exact product of polynomial matrices given as nested lists of MultiPoly.

    With ``diagonal_only`` only the diagonal of the (square) product is
    computed; off-diagonal entries are returned as zero.
    """
    p, q = len(A), len(A[0])
    q2, r = len(B), len(B[0])
    if q != q2:
        raise ValueError(f"inner dimensions differ: {q} vs {q2}")
    d = A[0][0].d
    out_zero = MultiPoly.zero(d)
    if any(x.d != d for row in list(A) + list(B) for x in row):
        raise ValueError("mixed polynomial dimensions")

    degA, degB = _common_degree(A), _common_degree(B)
    homogeneous = degA is not None and degB is not None
    if homogeneous:
        nv = d - 1
        dtot = degA + degB
        S = dtot + 1
    else:
        nv = d
        maxA = max((x.degree() for row in A for x in row), default=0)
        maxB = max((x.degree() for row in B for x in row), default=0)
        S = max(maxA, 0) + max(maxB, 0) + 1
    strides = [S**i for i in range(nv)]

    denA, intA = _integerize(A)
    denB, intB = _integerize(B)

    maxcA = max((abs(c) for row in intA for e in row for c in e.values()), default=0)
    maxcB = max((abs(c) for row in intB for e in row for c in e.values()), default=0)
    if maxcA == 0 or maxcB == 0:
        return [[out_zero] * r for _ in range(p)]
    lenA = max(len(e) for row in intA for e in row)
    lenB = max(len(e) for row in intB for e in row)
    bound = q * maxcA * maxcB * min(lenA, lenB)
    w = bound.bit_length() + 2
    wb = (w + 7) // 8
    w = 8 * wb

    def pack(entry: dict) -> "gmpy2.mpz":
        if not entry:
            return gmpy2.mpz(0)
        idx = {sum(a[i] * strides[i] for i in range(nv)): c for a, c in entry.items()}
        top = max(idx) + 1
        pos = bytearray(top * wb)
        neg = bytearray(top * wb)
        for i, c in idx.items():
            if c > 0:
                pos[i * wb:(i + 1) * wb] = c.to_bytes(wb, "little")
            else:
                neg[i * wb:(i + 1) * wb] = (-c).to_bytes(wb, "little")
        return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))

    PA = [[pack(e) for e in row] for row in intA]
    PB = [[pack(e) for e in row] for row in intB]

    # slot indices that can occur in the product
    if homogeneous:
        if nv == 0:
            valid = [((), 0)]
        else:
            valid = []
            _enum(nv, dtot, [], valid, strides)
    else:
        valid = []
        _enum(nv, S - 1, [], valid, strides)
    nslots = max(i for _, i in valid) + 1
    half = 1 << (w - 1)
    bias = int.from_bytes(half.to_bytes(wb, "little") * nslots, "little")
    den = denA * denB

    def unpack(value) -> MultiPoly:
        v = int(value)
        if v == 0:
            return out_zero
        raw = (v + bias).to_bytes(nslots * wb + 1, "little")
        terms = {}
        for exps, i in valid:
            c = int.from_bytes(raw[i * wb:(i + 1) * wb], "little") - half
            if c:
                if homogeneous:
                    alpha = exps + (dtot - sum(exps),)
                else:
                    alpha = exps
                terms[alpha] = Fraction(c, den)
        return MultiPoly._raw(d, terms)

    result = []
    for i in range(p):
        row = []
        for j in range(r):
            if diagonal_only and i != j:
                row.append(out_zero)
                continue
            acc = gmpy2.mpz(0)
            for k in range(q):
                a, b = PA[i][k], PB[k][j]
                if a and b:
                    acc += a * b
            row.append(unpack(acc))
        result.append(row)
    return result


def _enum(nv, budget, prefix, out, strides):
    # all exponent vectors of length nv with sum <= budget
    if len(prefix) == nv:
        out.append((tuple(prefix), sum(e * s for e, s in zip(prefix, strides))))
        return
    for e in range(budget + 1):
        prefix.append(e)
        _enum(nv, budget - e, prefix, out, strides)
        prefix.pop()

