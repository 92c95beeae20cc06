import sympy as sp

from afree.polycore import MultiPoly, PolyMatrix


def to_sympy(p: MultiPoly, xs):
    """Independent conversion used by the symbolic oracles."""
    expr = sp.Integer(0)
    for alpha, c in p.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for x, a in zip(xs, alpha):
            term *= x**a
        expr += term
    return expr


def matrix_to_sympy(M: PolyMatrix, xs):
    return sp.Matrix([[to_sympy(p, xs) for p in row] for row in M.entries])


def from_sympy(expr, xs) -> MultiPoly:
    poly = sp.Poly(sp.expand(expr), *xs)
    terms = {m: sp.Rational(c) for m, c in poly.terms()}
    return MultiPoly(len(xs), {m: f"{c.p}/{c.q}" for m, c in terms.items()})


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
