"""Command-line entry point.

Exit codes: 0 success, 1 invalid input or usage, 2 a verification that ran
and FAILED.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import explicit_models as em
from . import g2forms, qcoh, superpotential as sp, threeman, wallcross
from .catalog import Catalog, CatalogError
from .novikov import INF, as_cutoff, as_fraction, fmt_cutoff, fmt_rational

EXIT_OK, EXIT_INVALID, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    """Bad input: reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# -- input helpers --------------------------------------------------------------

def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _parsed(path: str, fn):
    obj = load_json(path)
    try:
        return fn(obj)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"'{text}' is not a rational p/q") from exc


def cutoff_arg(text: str):
    try:
        return as_cutoff(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"'{text}' is not a cutoff") from exc


def seed_arg(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"'{text}' is not an unsigned integer") from exc
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number") from exc
    if not v > 0:
        raise argparse.ArgumentTypeError("value must be positive")
    return v


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _load_catalog(path: str) -> Catalog:
    return _parsed(path, Catalog.from_json)


def _load_theta(path: str | None, n: int) -> sp.ThetaPoint:
    if path is None:
        return sp.ThetaPoint.one(n)
    theta = _parsed(path, sp.ThetaPoint.from_json)
    if theta.n != n:
        raise UsageError(f"{path}: theta has {theta.n} components, expected {n}")
    return theta


def _need_cutoff(args):
    if args.cutoff is None or args.cutoff == INF:
        raise UsageError("a finite --cutoff is required")
    return args.cutoff


def _gw_from_args(args) -> sp.GwTable:
    cut = _need_cutoff(args)
    if args.catalog:
        return sp.extract_gw(_load_catalog(args.catalog), cut)
    if args.gw:
        def parse(obj):
            return sp.GwTable.from_json(obj["gw"], int(obj["n"]), obj["gamma"], cut)
        return _parsed(args.gw, parse)
    raise UsageError("give --catalog or --gw")


# -- phi ----------------------------------------------------------------------

def cmd_phi_eval(args) -> int:
    c = _load_catalog(args.catalog)
    theta = _load_theta(args.theta, c.n)
    val = sp.eval_phi(c, theta, _need_cutoff(args))
    _emit(args, {"phi": val.to_json(), "text": str(val)}, str(val))
    return EXIT_OK


def cmd_phi_gw(args) -> int:
    gw = _gw_from_args(args)
    lines = [f"{list(k)}  {fmt_rational(v)}" for k, v in gw.coeffs.items()] or ["(all GW vanish)"]
    _emit(args, {"n": gw.n, "gamma": [fmt_rational(g) for g in gw.gamma],
                 "cutoff": fmt_cutoff(gw.cutoff), "gw": gw.to_json()}, "\n".join(lines))
    return EXIT_OK


def cmd_phi_crit(args) -> int:
    gw = _gw_from_args(args)
    res = sp.solve_critical(gw)
    if isinstance(res, sp.Obstructed):
        text = (f"Obstructed at level {fmt_rational(res.level)}: leading gradient "
                f"({', '.join(fmt_rational(x) for x in res.leading)})")
        _emit(args, res.to_json(), text)
        return EXIT_OK
    text = "\n".join(f"lambda_{i + 1} = {l}" for i, l in enumerate(res.lambdas))
    _emit(args, {"obstructed": False, "theta": res.to_json()}, text)
    return EXIT_OK


# -- transitions ---------------------------------------------------------------

def cmd_transition_apply(args) -> int:
    c = _load_catalog(args.catalog)
    params = load_json(args.params) if args.params else {}
    try:
        t = wallcross.Transition.from_json(params, args.kind)
        if t.kind == "X":
            after, u = wallcross.cycle_cross(c, str(t.params["record"]), t.params["delta"],
                                             int(t.params.get("eps", 1)))
        else:
            after, u = wallcross.apply(c, t), None
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"transition ({args.kind}): {exc}") from exc
    payload = {"catalog": after.to_json()}
    if u is not None:
        payload["reparametrization"] = u.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(after.to_json(), fh, indent=2, sort_keys=True)
    if not args.verify:
        _emit(args, payload, json.dumps(after.to_json(), indent=2, sort_keys=True))
        return EXIT_OK
    cut = _need_cutoff(args)
    if u is not None:
        rep = wallcross.verify_reparam(c, after, u, cut, args.samples, args.seed)
    else:
        rep = wallcross.verify_invariance(c, after, cut, args.samples, args.seed)
    payload["verify"] = rep.to_json()
    _emit(args, payload, rep.summary())
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- qcoh -----------------------------------------------------------------------

def cmd_qcoh_compute(args) -> int:
    cut = _need_cutoff(args)
    ring = _parsed(args.ring, qcoh.CohRingData.from_json)
    gw = _gw_from_args(args)
    if args.theta:
        theta = _load_theta(args.theta, gw.n)
    else:
        theta = sp.solve_critical(gw)
        if isinstance(theta, sp.Obstructed):
            _emit(args, theta.to_json(), f"Obstructed at level {fmt_rational(theta.level)}: no critical point")
            return EXIT_OK
    if not sp.is_critical(gw, theta, cut):
        raise UsageError("theta is not a critical point of Phi at this cutoff")
    try:
        res = qcoh.compute(ring, gw, theta, cut)
    except qcoh.QcohError as exc:
        raise UsageError(str(exc)) from exc
    tors = ", ".join(f"q^{fmt_rational(v)}" for v in res.torsion) or "none"
    text = "\n".join([
        "d = " + "; ".join("[" + ", ".join(str(e) for e in r) + "]" for r in res.d),
        f"QH^3 rank {len(res.kernel)}",
        f"QH^4 free rank {res.free_rank}, torsion {tors}",
        "ranks " + " ".join(str(r) for r in res.ranks()),
    ] + [f"note: {n}" for n in res.notes])
    _emit(args, res.to_json(), text)
    return EXIT_OK


# -- topology -------------------------------------------------------------------

def cmd_topo_cone(args) -> int:
    inp = _parsed(args.input, threeman.ConeSmoothingInput.from_json)
    try:
        rep = threeman.cone_smoothings(inp)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = "\n".join([
        f"kernel slope b = {rep.slope}",
        f"I(N0) = {rep.i_link}",
        f"I(N~1), I(N~2), I(N~3) = {rep.i_fillings}",
        f"pairings c_a = {rep.pairings}",
        f"signed sum = {rep.signed_sum}  {'PASS' if rep.ok else 'FAIL'}",
    ])
    _emit(args, rep.to_json(), text)
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- explicit models ----------------------------------------------------------

def cmd_lawlor_angles(args) -> int:
    try:
        p = em.LawlorParams(tuple(args.a))
        ang = em.lawlor_angles(p, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = "\n".join([f"phi = ({', '.join(repr(x) for x in ang.phi)})",
                      f"s = {ang.s!r}",
                      f"phi_1 + phi_2 + phi_3 - pi = {ang.total - math.pi:.3e}"])
    _emit(args, {"a": list(p.a), "phi": list(ang.phi), "s": ang.s}, text)
    return EXIT_OK


def cmd_lawlor_invert(args) -> int:
    try:
        p = em.lawlor_invert(args.phi[0], args.phi[1], args.s, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    except em.ConvergenceError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(args, {"a": list(p.a)}, f"a = ({', '.join(repr(x) for x in p.a)})")
    return EXIT_OK


def cmd_hl_check(args) -> int:
    try:
        r1 = em.hl_graph_check(args.family, args.s, args.samples, args.r, args.seed)
        r2 = em.hl_graph_check(args.family, 2 * args.s, args.samples, args.r, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ratio = r2 / r1 if r1 else float("nan")
    ok = bool(abs(ratio - 4.0) <= 1.0)
    rows = [("s", "max residual"), (repr(args.s), f"{r1:.6e}"), (repr(2 * args.s), f"{r2:.6e}")]
    text = "\n".join(f"{a:<24}{b}" for a, b in rows)
    text += f"\nratio {ratio:.4f} (O(s^2) predicts 4)  {'PASS' if ok else 'FAIL'}"
    _emit(args, {"family": args.family, "s": args.s, "residual": r1, "residual_2s": r2,
                 "ratio": ratio, "pass": ok}, text)
    return EXIT_OK if ok else EXIT_FAIL


def u1_jcheck(samples: int, seed: int) -> dict:
    """Randomized checks of the U(1) quotient and its almost complex structure."""
    import random
    rng = random.Random(seed)
    gen = np.random.default_rng(seed)
    y_exact = True
    orbit_exact = True
    for _ in range(samples):
        x = [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(7)]
        y = em.u1_reduce(x)
        y_exact &= y[3] ** 2 + y[4] ** 2 + y[5] ** 2 == (x[3] ** 2 + x[4] ** 2 + x[5] ** 2 + x[6] ** 2) ** 2
        c, s = em.rational_rotation(Fraction(rng.randint(-30, 30), rng.randint(1, 9)))
        orbit_exact &= em.u1_reduce(em.u1_act(x, c, s)) == y
    j_err = 0.0
    prop_err = 0.0
    for _ in range(samples):
        x = gen.normal(size=7)
        y = em.u1_reduce(x)
        j = em.j_matrix(y)
        j_err = max(j_err, float(np.max(np.abs(j @ j + np.eye(6)))))
        plane = em.invariant_associative_plane(x, gen.normal(size=7))
        prop_err = max(prop_err, em.jholo_residual(y, em.reduced_tangent(x, plane)))
    ex_err = 0.0
    half_plane = np.eye(6)[:, [0, 3]]
    for _ in range(samples):
        y = (gen.normal(), 0.0, 0.0, abs(gen.normal()) + 1e-3, 0.0, 0.0)
        ex_err = max(ex_err, em.jholo_residual(y, half_plane))
        x = np.array([gen.normal(), 0, 0, gen.normal(), gen.normal(), 0, 0])
        ex_err = max(ex_err, em.jholo_residual(em.u1_reduce(x), em.reduced_tangent(x, np.eye(7)[:, [0, 3, 4]])))
    return {"y_identity_exact": bool(y_exact), "orbit_invariance_exact": bool(orbit_exact),
            "max_J2_plus_I": j_err, "example_residual": ex_err, "invariant_associative_residual": prop_err,
            "pass": bool(y_exact and orbit_exact and j_err < 1e-12 and ex_err < 1e-12 and prop_err < 1e-10)}


def cmd_u1_jcheck(args) -> int:
    rep = u1_jcheck(args.samples, args.seed)
    text = "\n".join(f"{k:<32}{v}" for k, v in rep.items())
    _emit(args, rep, text)
    return EXIT_OK if rep["pass"] else EXIT_FAIL


def cmd_g2_check_tame(args) -> int:
    phi = _parsed(args.phi, g2forms.Form.from_json)
    psi = _parsed(args.psi, g2forms.Form.from_json)
    try:
        rep = g2forms.tameness_check(phi, psi, args.samples, args.seed)
    except (ValueError, g2forms.NotPositiveError) as exc:
        raise UsageError(str(exc)) from exc
    text = f"min phi|_V = {rep.minimum!r} over {rep.samples} planes  {'PASS' if rep.passed else 'FAIL'}"
    _emit(args, rep.to_json(), text)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="g2wall", description="Superpotentials, wall-crossing and G2 model computations.")
    sub = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def common(p, cutoff=False, seed=False):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if cutoff:
            p.add_argument("--cutoff", type=cutoff_arg, help="area cutoff A as p/q")
        if seed:
            p.add_argument("--seed", type=seed_arg, default=0)

    phi = sub.add_parser("phi", help="superpotential").add_subparsers(dest="cmd", required=True,
                                                                      parser_class=_Parser)
    p = phi.add_parser("eval")
    p.add_argument("--catalog", required=True)
    p.add_argument("--theta")
    common(p, cutoff=True)
    p.set_defaults(func=cmd_phi_eval)
    for name, fn in (("gw", cmd_phi_gw), ("crit", cmd_phi_crit)):
        p = phi.add_parser(name)
        p.add_argument("--catalog")
        p.add_argument("--gw", help="file {n, gamma, gw: [{class, gw}]}")
        common(p, cutoff=True)
        p.set_defaults(func=fn)

    tr = sub.add_parser("transition").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = tr.add_parser("apply")
    p.add_argument("--kind", required=True, choices=wallcross.KINDS)
    p.add_argument("--catalog", required=True)
    p.add_argument("--params")
    p.add_argument("--out", help="write the new catalog here")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--samples", type=int, default=3)
    common(p, cutoff=True, seed=True)
    p.set_defaults(func=cmd_transition_apply)

    qc = sub.add_parser("qcoh").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = qc.add_parser("compute")
    p.add_argument("--ring", required=True)
    p.add_argument("--catalog")
    p.add_argument("--gw")
    p.add_argument("--theta", help="critical point; solved for when omitted")
    common(p, cutoff=True)
    p.set_defaults(func=cmd_qcoh_compute)

    tp = sub.add_parser("topo").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = tp.add_parser("prop51", help="I-invariants of the three cone smoothings")
    p.add_argument("--input", required=True)
    common(p)
    p.set_defaults(func=cmd_topo_cone)

    lw = sub.add_parser("lawlor").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = lw.add_parser("angles")
    p.add_argument("--a", type=positive_float, nargs=3, required=True)
    p.add_argument("--tol", type=positive_float, default=1e-10)
    common(p)
    p.set_defaults(func=cmd_lawlor_angles)
    p = lw.add_parser("invert")
    p.add_argument("--phi", type=float, nargs=2, required=True)
    p.add_argument("--s", type=positive_float, required=True)
    p.add_argument("--tol", type=positive_float, default=1e-8)
    common(p)
    p.set_defaults(func=cmd_lawlor_invert)

    hl = sub.add_parser("hl").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = hl.add_parser("check")
    p.add_argument("--family", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--s", type=positive_float, default=1e-3)
    p.add_argument("--r", type=positive_float, default=1.0)
    p.add_argument("--samples", type=int, default=50)
    common(p, seed=True)
    p.set_defaults(func=cmd_hl_check)

    u1 = sub.add_parser("u1").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = u1.add_parser("jcheck")
    p.add_argument("--samples", type=int, default=1000)
    common(p, seed=True)
    p.set_defaults(func=cmd_u1_jcheck)

    g2 = sub.add_parser("g2").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = g2.add_parser("check-tame")
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--samples", type=int, default=1000)
    common(p, seed=True)
    p.set_defaults(func=cmd_g2_check_tame)
    return top


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CatalogError, wallcross.TransitionError, qcoh.QcohError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
