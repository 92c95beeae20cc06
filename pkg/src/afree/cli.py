"""Command line interface: ``afree <subcommand> ...``.

Exit codes: 0 when every check passes, 1 when a verification or inequality
check fails, 2 on malformed input.  Each run prints one summary line of
``key=value`` pairs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from math import isqrt

import numpy as np

from .polycore import FIXTURES, InvalidOperator, OperatorDescriptor, fixture, symmetric_divergence
from .synthesis import PotentialTriple, SynthesisError, expand_g_in_a, synthesize, verify_exactness
from .torus import (
    FieldFormatError,
    GridSpec,
    NotAFree,
    RankDrop,
    afree_residual,
    atomic_write,
    gen_afree,
    lp_norm,
    potential_residuals,
    read_afld,
    sobolev_bound_experiment,
    sobolev_norm,
    solve_potential_spectral,
    write_afld,
)
from .torus.fields import idft
from .variational import (
    ConvexSet,
    Functional,
    NotInSet,
    NotPSD,
    identity_vector,
    jensen_batch,
    kaq_probe,
    semicontinuity_experiment,
    sym_dim,
)
from .variational.experiments import dpt_generate, dpt_triple

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a float64."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: str, header: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r[h]) for h in header])
    atomic_write(path, buf.getvalue().encode())


def summary(cmd: str, **kv) -> None:
    print(" ".join([cmd] + [f"{k}={fmt(v)}" for k, v in kv.items()]))


# -- loading --------------------------------------------------------------------


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def load_operator(args) -> OperatorDescriptor:
    if getattr(args, "fixture", None):
        return fixture(args.fixture)
    if getattr(args, "operator", None):
        return OperatorDescriptor.from_json(_load_json(args.operator))
    raise InputError("give --operator PATH or --fixture NAME")


def load_triple(args) -> PotentialTriple:
    if getattr(args, "triple", None):
        try:
            return PotentialTriple.from_json(_load_json(args.triple))
        except KeyError as exc:
            raise InputError(f"triple file lacks field {exc}") from exc
    return synthesize(load_operator(args))


# -- subcommands ------------------------------------------------------------------


def cmd_synth(args) -> int:
    A = load_operator(args)
    T = synthesize(A, samples=args.samples, seed=args.seed)
    atomic_write(args.out, (T.dumps() + "\n").encode())
    if args.report:
        atomic_write(args.report, (T.report() + "\n").encode())
    summary("synth", status="ok", l=T.l, deg_G=T.G.k, r_A=T.r_a, r_L=T.r_l, out=args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    T = load_triple(args)
    rep = verify_exactness(T, samples=args.samples, seed=args.seed)
    ok = rep.passed
    extra = {}
    if args.expand:
        ex = expand_g_in_a(T, samples=args.samples, seed=args.seed)
        ok = ok and ex.holds
        extra["expansion"] = ex.holds
    witness = "none" if rep.witness is None else ",".join(map(str, rep.witness))
    summary(
        "verify", status="pass" if ok else "fail", AL_zero=rep.AL_zero, LG_zero=rep.LG_zero,
        rank_failures=len(rep.rank_failures), witness=witness, **extra,
    )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_solve(args) -> int:
    T = load_triple(args)
    U = read_afld(args.field)
    phi_hat = solve_potential_spectral(T, U, tol=args.tol)
    phi = idft(phi_hat)
    write_afld(args.out, phi)
    res = potential_residuals(T, U, phi_hat)
    ok = res["L"] <= args.check and res["G_relative"] <= args.check
    summary(
        "solve", status="ok" if ok else "fail", L_residual=res["L"], G_residual=res["G"],
        G_relative=res["G_relative"], out=args.out,
    )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_genfree(args) -> int:
    T = load_triple(args)
    grid = GridSpec.cube(T.A.d, args.grid)
    if args.dpt_shift is not None:
        dm = sym_dim(T.A.N)
        if dm is None or T.A != symmetric_divergence(dm):
            raise InputError("--dpt-shift needs the symmetric divergence operator")
        U = dpt_generate(dm, grid, args.band, args.dpt_shift, args.seed)
    else:
        U = gen_afree(T, grid, args.band, args.seed)
    write_afld(args.out, U)
    summary("genfree", status="ok", sup=U.sup_norm(), A_residual=afree_residual(T.A, U), out=args.out)
    return EXIT_OK


def cmd_norm(args) -> int:
    f = read_afld(args.field)
    out = {"lp": lp_norm(f, args.p)}
    if args.sobolev is not None:
        out["sobolev"] = sobolev_norm(f, args.sobolev, args.p)
    summary("norm", status="ok", p=args.p, **out)
    return EXIT_OK


def cmd_jensen(args) -> int:
    if args.dim not in (2, 3):
        raise InputError("--dim must be 2 or 3")
    grid = GridSpec.cube(args.dim, args.grid)
    rows = jensen_batch(args.dim, args.trials, grid, args.band, args.seed, shift=args.shift, tol=args.tol)
    if args.report:
        write_csv(args.report, ["trial", "lhs", "rhs", "gap", "satisfied"], rows)
    bad = sum(not r["satisfied"] for r in rows)
    summary("jensen", status="pass" if not bad else "fail", trials=len(rows), violations=bad,
            min_gap=min((r["gap"] for r in rows), default=0.0))
    return EXIT_OK if not bad else EXIT_FAIL


def _matrix_dim(N: int) -> int:
    dm = sym_dim(N)
    if dm is None:
        dm = isqrt(N)
        if dm * dm != N:
            raise InputError(f"{N} components do not encode a square matrix")
    return dm


def _functional(name: str, N: int, pexp: float) -> Functional:
    if name in ("detpow", "negdetpow"):
        return getattr(Functional, name)(_matrix_dim(N))
    if name in ("pnorm", "negpnorm"):
        return getattr(Functional, name)(pexp)
    raise InputError(f"unknown functional {name!r}")


def cmd_lsc(args) -> int:
    U = read_afld(args.base)
    A = load_operator(args)
    if A.N != U.N or A.d != U.grid.d:
        raise InputError("operator and field dimensions differ")
    res = afree_residual(A, U)
    if res > args.afree_tol:
        raise NotAFree(f"base field has A-residual {res:.3e}")
    F = _functional(args.functional, U.N, args.pexp)
    if F.kind == "detpow":
        K = ConvexSet.psd(F.dm, full=U.N == F.dm**2)
        if K.distance(U.values).min() < -1e-12:
            raise NotInSet("base field leaves the PSD cone")
    try:
        nlist = [int(x) for x in args.nlist.split(",")]
    except ValueError as exc:
        raise InputError(f"bad --nlist {args.nlist!r}") from exc
    rep = semicontinuity_experiment(F, U, args.mode, nlist, tol=args.tol)
    if args.report:
        write_csv(args.report, ["n", "value", "limit", "ordered"], rep.rows)
    summary("lsc", status="pass" if rep.ordered else "fail", mode=rep.mode, limit=rep.limit_value,
            spread=rep.spread)
    return EXIT_OK if rep.ordered else EXIT_FAIL


def _zeta(spec: str, N: int, dm: int | None) -> np.ndarray:
    if spec == "id":
        if dm is None:
            raise InputError("--zeta id needs a matrix-valued operator")
        return identity_vector(dm) if N == dm * (dm + 1) // 2 else np.eye(dm).ravel()
    try:
        z = np.array([float(x) for x in spec.split(",")])
    except ValueError as exc:
        raise InputError(f"bad --zeta {spec!r}") from exc
    if z.size != N:
        raise InputError(f"--zeta needs {N} components")
    return z


def cmd_probe(args) -> int:
    if args.operator or args.fixture:
        T = synthesize(load_operator(args))
    else:
        T = dpt_triple(args.dim)
    N = T.A.N
    dm = sym_dim(N) if args.constraint == "psd" or args.zeta == "id" else None
    F = _functional(args.functional, N, args.pexp)
    if args.constraint == "psd":
        if dm is None:
            raise InputError("psd constraint needs symmetric-matrix fields")
        K = ConvexSet.psd(dm)
    else:
        K = ConvexSet.whole_space(N)
    zeta = _zeta(args.zeta, N, dm)
    grid = GridSpec.cube(T.A.d, args.grid) if args.grid else None
    rep = kaq_probe(F, K, T, zeta, args.trials, args.seed, grid=grid, band=args.band)
    if args.report:
        write_csv(args.report, ["trial", "F_zeta", "mean_F", "gap", "violation"], rep.rows)
    summary("probe", status="pass" if not rep.violations else "fail", functional=rep.functional,
            trials=len(rep.rows), violations=rep.violations)
    return EXIT_OK if not rep.violations else EXIT_FAIL


def cmd_bound(args) -> int:
    T = load_triple(args)
    try:
        sizes = [int(x) for x in args.grids.split(",")]
        ps = tuple(float(x) for x in args.p.split(",")) if args.p else None
    except ValueError as exc:
        raise InputError("bad --grids or --p") from exc
    grids = [GridSpec.cube(T.A.d, n) for n in sizes]
    rep = sobolev_bound_experiment(T, grids, args.trials, args.seed, band=args.band, ps=ps)
    rows = []
    for g in rep["grids"]:
        for p, v in g["max_ratio"].items():
            rows.append({"grid": g["dims"][0], "p": p, "max_ratio": v})
    if args.report:
        write_csv(args.report, ["grid", "p", "max_ratio"], rows)
    worst = max((c for ch in rep["changes"] for c in ch.values()), default=0.0)
    ok = rep["finite"] and worst < args.max_change
    summary("bound", status="pass" if ok else "fail", l=rep["l"], max_change=worst)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fixtures(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    for name in sorted(FIXTURES):
        op = fixture(name)
        atomic_write(os.path.join(args.out_dir, f"{name}.json"), (op.dumps() + "\n").encode())
    T = synthesize(fixture("div2"))
    atomic_write(os.path.join(args.out_dir, "div2_triple.json"), (T.dumps() + "\n").encode())
    atomic_write(os.path.join(args.out_dir, "div2_report.txt"), (T.report() + "\n").encode())
    summary("fixtures", status="ok", count=len(FIXTURES), out_dir=args.out_dir)
    return EXIT_OK


# -- wiring -------------------------------------------------------------------------


def _operator_flags(p, triple: bool = False) -> None:
    p.add_argument("--operator", help="operator JSON file")
    p.add_argument("--fixture", choices=sorted(FIXTURES), help="bundled operator instead of --operator")
    if triple:
        p.add_argument("--triple", help="synthesized triple JSON (skips synthesis)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="afree", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize the potential L and annihilator G of an operator")
    _operator_flags(p)
    p.add_argument("--out", required=True, help="triple JSON output")
    p.add_argument("--report", help="optional human-readable report")
    p.add_argument("--samples", type=int, default=64, help="rank-profile sample count")
    p.add_argument("--seed", type=int, default=0, help="seed for rank sampling")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="check A L = 0, L G = 0 and the rank counts of a triple")
    p.add_argument("--triple", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--expand", action="store_true", help="also recompute G from the data of A and L")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="solve L Phi = U, G Phi = 0 for an A-free field")
    _operator_flags(p, triple=True)
    p.add_argument("--field", required=True, help="AFLD input field U")
    p.add_argument("--out", required=True, help="AFLD output potential")
    p.add_argument("--tol", type=float, default=1e-10, help="A-freeness tolerance on the input")
    p.add_argument("--check", type=float, default=1e-9, help="pass threshold for the output residuals")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("genfree", help="random band-limited A-free field")
    _operator_flags(p, triple=True)
    p.add_argument("--grid", type=int, required=True, help="points per axis")
    p.add_argument("--band", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dpt-shift", type=float, help="symmetric divergence only: output c Id + oscillation (PSD)")
    p.set_defaults(func=cmd_genfree)

    p = sub.add_parser("norm", help="L^p and W^{l,p} norms of a field")
    p.add_argument("--field", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--sobolev", type=int, help="derivative order l")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser(
        "jensen", help="Jensen check on random DPT fields; CSV columns trial,lhs,rhs,gap,satisfied"
    )
    p.add_argument("--dim", type=int, required=True, help="matrix dimension 2 or 3")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--band", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--shift", type=float, default=1.0, help="constant c in c Id + oscillation")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_jensen)

    p = sub.add_parser(
        "lsc", help="integrals along oscillation sequences; CSV columns n,value,limit,ordered"
    )
    _operator_flags(p)
    p.add_argument("--functional", required=True, choices=["detpow", "negdetpow", "pnorm", "negpnorm"])
    p.add_argument("--pexp", type=float, default=2.0, help="exponent for pnorm")
    p.add_argument("--base", required=True, help="AFLD base field")
    p.add_argument("--nlist", default="1,2,4,8")
    p.add_argument("--mode", choices=["auto", "lsc", "usc"], default="auto")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--afree-tol", type=float, default=1e-8)
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_lsc)

    p = sub.add_parser(
        "probe", help="K-A-quasiconvexity falsifier; CSV columns trial,F_zeta,mean_F,gap,violation"
    )
    _operator_flags(p)
    p.add_argument("--functional", required=True, choices=["detpow", "negdetpow", "pnorm", "negpnorm"])
    p.add_argument("--pexp", type=float, default=2.0)
    p.add_argument("--zeta", default="id", help="'id' or comma-separated components")
    p.add_argument("--dim", type=int, default=2, help="matrix dimension of the default symmetric-divergence triple")
    p.add_argument("--constraint", choices=["psd", "none"], default="psd")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--band", type=int, default=3)
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("bound", help="W^{l,p}/L^p ratio experiment; CSV columns grid,p,max_ratio")
    _operator_flags(p, triple=True)
    p.add_argument("--grids", default="32,64")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--band", type=int, default=4)
    p.add_argument("--p", help="comma-separated exponents (default 2,d+1)")
    p.add_argument("--max-change", type=float, default=0.05)
    p.add_argument("--report", help="CSV output")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("fixtures", help="write the bundled operators and the 2D divergence golden triple")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_fixtures)
    return ap


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "func")}
        return cls(ns.command, opts)


_COMMANDS = {
    "synth": cmd_synth, "verify": cmd_verify, "solve": cmd_solve, "genfree": cmd_genfree,
    "norm": cmd_norm, "jensen": cmd_jensen, "lsc": cmd_lsc, "probe": cmd_probe,
    "bound": cmd_bound, "fixtures": cmd_fixtures,
}

_INPUT_ERRORS = (
    InputError, InvalidOperator, FieldFormatError, NotAFree, NotInSet, NotPSD, RankDrop,
    SynthesisError, OSError, KeyError, ValueError,
)


def run(config: RunConfig) -> int:
    args = argparse.Namespace(**config.options)
    try:
        return _COMMANDS[config.command](args)
    except _INPUT_ERRORS as exc:
        name = type(exc).__name__
        print(f"{config.command} status=error error={name} message={exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INPUT
    return run(RunConfig.from_namespace(ns))


if __name__ == "__main__":
    sys.exit(main())
