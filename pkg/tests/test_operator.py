import json

import pytest

from afree.polycore import (
    FIXTURES,
    InvalidOperator,
    MultiPoly,
    OperatorDescriptor,
    PolyMatrix,
    divergence,
    fixture,
    laplacian,
    symbol_of,
)


def x(i, d=2):
    return MultiPoly.variable(d, i)


def test_divergence_symbol():
    assert symbol_of(divergence(2)) == PolyMatrix([[x(0), x(1)]])


def test_laplacian_symbol():
    # sum over alpha in {(2,0), (0,2)} of xi^alpha * 1
    assert symbol_of(laplacian(2))[0, 0] == x(0) * x(0) + x(1) * x(1)


@pytest.mark.parametrize(
    "bad",
    [
        dict(d=2, k=1, N=1, m=1, terms={(1, 0): [[0]]}),
        dict(d=2, k=1, N=1, m=1, terms={(2, 0): [[1]]}),
        dict(d=2, k=1, N=1, m=1, terms={(1, 0, 0): [[1]]}),
        dict(d=2, k=1, N=2, m=1, terms={(1, 0): [[1]]}),
        dict(d=0, k=1, N=1, m=1, terms={}),
    ],
)
def test_invalid_operators_are_rejected(bad):
    with pytest.raises(InvalidOperator):
        OperatorDescriptor(**bad)


def test_zero_operator_needs_opt_in():
    z = OperatorDescriptor.zero(2, 2, 3, 3)
    assert z.is_zero() and z.symbol.is_zero()


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_json_round_trip(name):
    op = fixture(name)
    back = OperatorDescriptor.loads(op.dumps())
    assert back == op
    assert back.dumps() == op.dumps()


def test_json_is_canonical_and_rational():
    op = OperatorDescriptor(2, 1, 1, 1, {(0, 1): [["2/4"]], (1, 0): [[3]]})
    data = json.loads(op.dumps())
    assert [t["alpha"] for t in data["terms"]] == [[1, 0], [0, 1]]
    assert data["terms"][1]["matrix"] == [["1/2"]]


def test_malformed_json():
    with pytest.raises(InvalidOperator):
        OperatorDescriptor.from_json({"d": 2, "k": 1, "N": 1})
    with pytest.raises(InvalidOperator):
        OperatorDescriptor.from_json(
            {"d": 1, "k": 1, "N": 1, "m": 1, "terms": [{"alpha": [1], "matrix": [["1"]]}] * 2}
        )
    with pytest.raises(InvalidOperator):
        OperatorDescriptor.from_json({"d": 1, "k": 1, "N": 1, "m": 1, "terms": [{"alpha": [1], "matrix": [[0.5]]}]})


def test_from_symbol_reads_coefficients():
    op = fixture("curl3")
    assert OperatorDescriptor.from_symbol(op.symbol) == op
    with pytest.raises(InvalidOperator):
        OperatorDescriptor.from_symbol(PolyMatrix([[x(0) + 1]]))
