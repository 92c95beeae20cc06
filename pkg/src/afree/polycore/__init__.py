"""Exact polynomial linear algebra for Fourier symbols."""
from .linalg import (
    CharPolyData,
    ScaledPseudoInverse,
    char_poly,
    decell_pinv,
    exact_rank,
    penrose_check,
    rank_profile,
    sample_point,
)
from .matrix import PolyMatrix, adjoint, eval_symbol, matmul
from .operator import (
    FIXTURES,
    InvalidOperator,
    OperatorDescriptor,
    curl,
    divergence,
    fixture,
    laplacian,
    sym_index,
    symbol_of,
    symmetric_divergence,
)
from .poly import MultiPoly, Rational, format_rational, parse_rational

__all__ = [
    "CharPolyData", "FIXTURES", "InvalidOperator", "MultiPoly", "OperatorDescriptor",
    "PolyMatrix", "Rational", "ScaledPseudoInverse", "adjoint", "char_poly", "curl",
    "decell_pinv", "divergence", "eval_symbol", "exact_rank", "fixture", "format_rational",
    "laplacian", "matmul", "parse_rational", "penrose_check", "rank_profile", "sample_point",
    "sym_index", "symbol_of", "symmetric_divergence",
]
