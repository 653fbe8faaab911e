"""
cli.py

Command-line front end (`hj`):

  construct thm3                      power-sum hypersurface with forms in general position
  check thm4 | corollary              closed-form hyperbolicity certificates
  borel threshold | cartan | partition | chart
  grassmann codim | scan | member | evidence
  jet derivative | pullback | wronskian
  nev profile | defect | curvature | calculus | theta
  config show | set

Reports are single-line JSON records on stdout (or `--human` key: value
blocks); diagnostics go to stderr.

Exit codes:
  0  success / certified
  1  usage or input error
  2  rejected (a witness is reported)
  3  unknown (ball arithmetic could not decide)
"""

from __future__ import annotations

import argparse
import logging
import random
import re
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from borel import (
    PowerSumInstance,
    borel_threshold,
    cartan_truncation_bookkeeping,
    find_borel_partition,
    prefactor_exponent,
    projective_names,
    series_spec,
    wronskian_chart_transfer,
)
from fields import ball_center_text, ball_from_parts, parse_fraction
from grassmann import (
    HyperplaneSet,
    canonical_partition,
    codim_report,
    emptiness_evidence,
    prop4_threshold_scan,
    random_forms,
    stratum_membership,
)
from hypersurf import (
    HYPERBOLIC_CERTIFIED,
    REJECTED,
    Theorem4Instance,
    check_corollary,
    check_theorem4,
    construct_theorem3,
)
from jetalg import (
    CurveGerm,
    format_jet_differential,
    parse_jet_differential,
    pullback,
    wronskian_as_jet,
    wronskian_jet,
)
from nevanlinna import (
    EllipticModel,
    HolomorphicSample,
    calculus_lemma_probe,
    characteristic,
    curvature_identity_check,
    defect_estimate,
    radius_grid,
    sample_from_text,
)
from polycore import TruncatedSeries
from polytext import parse_ball_literal, parse_polynomial
from report_io import emit_record, render_human, utc_now
from settings_store import (
    DEFAULT_SETTINGS_PATH,
    RunConfig,
    config_path,
    load_run_config,
    merge_settings,
)

logger = logging.getLogger("hj")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_UNKNOWN = 3

Records = List[Dict[str, Any]]
Handler = Callable[[argparse.Namespace, RunConfig], Tuple[Records, int]]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


# ----------------------------
# Argument helpers
# ----------------------------


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, f"Expected comma-separated integers, got {text!r}") from None


def _matrix(text: str) -> List[List[Fraction]]:
    """'1,0,2;0,1,-1/2' -> rows of Fractions."""
    rows = []
    for chunk in text.split(";"):
        if chunk.strip():
            rows.append([parse_fraction(x) for x in chunk.split(",")])
    if not rows:
        raise CliError(EXIT_USAGE, f"Empty matrix {text!r}")
    return rows


def parse_complex(text: str) -> complex:
    """'i', '2', '0.5+1.2i', '-i' -> complex."""
    t = text.strip().replace(" ", "").replace("i", "j")
    t = re.sub(r"(?<![\d.])j", "1j", t)
    try:
        return complex(t)
    except ValueError:
        raise CliError(EXIT_USAGE, f"Invalid complex number {text!r}") from None


def _coefficient(text: str) -> Any:
    """Rational, ball literal "(re,im)" or complex like "2-3i"; the last two become balls."""
    raw = text.strip()
    if raw.startswith("("):
        return parse_ball_literal(raw)
    if "i" in raw or "j" in raw:
        c = parse_complex(raw)
        return ball_from_parts(Fraction(c.real), Fraction(c.imag))
    return parse_fraction(raw)


def _verdict_code(verdict: str) -> int:
    if verdict == HYPERBOLIC_CERTIFIED:
        return EXIT_OK
    if verdict == REJECTED:
        return EXIT_REJECTED
    return EXIT_UNKNOWN


def _germ(texts: Sequence[str], order: int) -> CurveGerm:
    return CurveGerm.from_polynomials([parse_polynomial(t) for t in texts], order)


# ----------------------------
# construct / check
# ----------------------------


def cmd_construct_thm3(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    inst = construct_theorem3(args.n, seed=cfg.seed, evidence_trials=args.evidence_trials)
    rec = inst.to_json()
    if args.emit_poly:
        rec["polynomial"] = str(inst.defining_polynomial())
    return [rec], EXIT_OK


def cmd_check_thm4(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    inst = Theorem4Instance(args.n, parse_polynomial(args.g))
    verdict = check_theorem4(inst, cfg.precision, cfg.max_precision)
    rec = {"n": args.n, "g": str(inst.g), **verdict.to_json()}
    if args.emit_poly:
        rec["polynomial"] = str(inst.hypersurface())
    return [rec], _verdict_code(verdict.verdict)


def cmd_check_corollary(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    a = [_coefficient(x) for x in (args.a0, args.a1, args.a2)]
    verdict = check_corollary(args.n, *a, precision=cfg.precision, max_precision=cfg.max_precision)
    shown = [str(x) if isinstance(x, Fraction) else ball_center_text(x) for x in a]
    rec = {"n": args.n, "a": shown, **verdict.to_json()}
    return [rec], _verdict_code(verdict.verdict)


# ----------------------------
# borel
# ----------------------------


def cmd_borel_threshold(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    deltas = _int_list(args.deltas)
    rec: Dict[str, Any] = {"n": args.n, "deltas": deltas, "threshold": borel_threshold(args.n, deltas)}
    if args.p is not None:
        rec["p"] = args.p
        rec["prefactor_exponent"] = prefactor_exponent(args.n, args.p, deltas)
    return [rec], EXIT_OK


def cmd_borel_cartan(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    return [cartan_truncation_bookkeeping(args.n, args.p)], EXIT_OK


def cmd_borel_partition(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    series = [series_spec(text, cfg.truncation) for text in args.f]
    part = find_borel_partition(series, depth=args.depth)
    if part is None:
        return [{"found": False, "partition": None}], EXIT_REJECTED
    return [{"found": True, "q": part.q, "partition": part.to_json()}], EXIT_OK


def cmd_borel_chart(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    names = projective_names(args.n)
    gs = [parse_polynomial(t, names) for t in args.g]
    inst = PowerSumInstance(args.n, args.p, _int_list(args.deltas), gs)
    report = wronskian_chart_transfer(inst, _germ(args.germ, cfg.truncation))
    return [report.to_json()], EXIT_OK if report.identity_holds else EXIT_REJECTED


# ----------------------------
# grassmann
# ----------------------------


def cmd_grassmann_codim(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    return [codim_report(args.k, args.m, _int_list(args.blocks)).to_json()], EXIT_OK


def cmd_grassmann_scan(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    return [prop4_threshold_scan(args.m, args.N).to_json()], EXIT_OK


def cmd_grassmann_member(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    W = _matrix(args.W)
    forms = _matrix(args.forms)
    return [{"k": len(W), "member": stratum_membership(W, forms)}], EXIT_OK


def cmd_grassmann_evidence(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    sizes = _int_list(args.blocks)
    if args.forms:
        forms = _matrix(args.forms)
    else:
        forms = random_forms(args.m, sum(sizes), random.Random(cfg.seed))
    H = HyperplaneSet(args.m, forms)
    report = emptiness_evidence(H, canonical_partition(sizes), args.k, args.trials, seed=cfg.seed)
    return [report.to_json()], EXIT_OK


# ----------------------------
# jet
# ----------------------------


def cmd_jet_derivative(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    omega = parse_jet_differential(args.omega, args.n)
    out = omega
    for _ in range(args.times):
        out = out.total_derivative()
    return [
        {
            "n": omega.n,
            "input": format_jet_differential(omega),
            "times": args.times,
            "result": format_jet_differential(out),
            "weights": sorted(out.weights()),
            "order": out.order,
        }
    ], EXIT_OK


def _series_json(s: TruncatedSeries) -> Dict[str, Any]:
    return {"var": s.var, "order": s.order, "coefficients": [s.field.format(c) for c in s.coeffs]}


def cmd_jet_pullback(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    germ = _germ(args.germ, cfg.truncation)
    omega = parse_jet_differential(args.omega, args.n or germ.n)
    tau = pullback(omega, germ)
    return [{"omega": format_jet_differential(omega), "weight": omega.homogeneous_weight(), "pullback": _series_json(tau)}], EXIT_OK


def cmd_jet_wronskian(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    polys = [parse_polynomial(t) for t in args.poly]
    rec: Dict[str, Any] = {"entries": [str(p) for p in polys]}
    if args.germ:
        germ = _germ(args.germ, cfg.truncation)
        rec["jet"] = format_jet_differential(wronskian_jet(polys, germ.n))
        w = wronskian_as_jet(polys, germ, cfg.truncation)
    else:
        w = wronskian_as_jet(polys, None, cfg.truncation)
    rec["series"] = _series_json(w)
    rec["identically_zero"] = w.is_zero()
    return [rec], EXIT_OK


# ----------------------------
# nev
# ----------------------------


def cmd_nev_profile(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    F = sample_from_text(args.f)
    radii = radius_grid(args.grid, args.rmin, args.rmax)
    target = None if args.a is None else (parse_complex(args.a) if "i" in args.a else parse_fraction(args.a))
    profile = characteristic(F, radii, cfg.nodes, truncation=args.trunc, proximity_to=target)
    records: Records = [{"kind": "radius", **rec} for rec in profile.records()]
    summary = {"kind": "summary", "sample": F.to_json(), "nodes": profile.nodes, "degree_check": profile.degree_check}
    records.append(summary)
    ok = profile.degree_check is None or profile.degree_check["ok"]
    return records, EXIT_OK if ok else EXIT_REJECTED


def cmd_nev_defect(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    model = EllipticModel(parse_complex(args.tau), parse_complex(args.point))
    prof = defect_estimate(model, parse_complex(args.c), radius_grid(args.grid, 1.0, args.rmax), cfg.nodes)
    records: Records = [{"kind": "radius", **rec} for rec in prof.records()]
    ratios = prof.ratios
    slack = max(prof.quad_error) if prof.quad_error else 0.0
    records.append(
        {
            "kind": "summary",
            "tau": [model.tau.real, model.tau.imag],
            "norm_constant": prof.norm_constant,
            "final_ratio": ratios[-1],
            "non_increasing": all(b <= a + slack for a, b in zip(ratios, ratios[1:])),
            "growth_exponent": prof.growth_exponent() if len(ratios) >= 2 else None,
        }
    )
    return records, EXIT_OK


_CURVATURE_SAMPLES = {
    "exp": lambda order: HolomorphicSample.from_series(TruncatedSeries.exp_series(order)),
    "sin": lambda order: HolomorphicSample.from_series(TruncatedSeries.sin_series(order)),
}


def cmd_nev_curvature(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    maker = _CURVATURE_SAMPLES.get(args.w)
    w = maker(cfg.truncation) if maker else HolomorphicSample.from_polynomial(parse_polynomial(args.w))
    rec = curvature_identity_check(w, args.h, args.radius)
    rec["tolerance"] = args.tol
    return [rec], EXIT_OK if rec["residual"] < args.tol else EXIT_REJECTED


_LOG_G = {
    "one": lambda z: np.zeros(z.shape),
    "exp-abs2": lambda z: np.abs(z) ** 2,
    "abs2-plus-1": lambda z: np.log1p(np.abs(z) ** 2),
}


def cmd_nev_calculus(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    report = calculus_lemma_probe(_LOG_G[args.g], radius_grid(args.grid, 1.0, args.rmax), args.constant, cfg.nodes)
    return [{"g": args.g, **report.to_json()}], EXIT_OK


def cmd_nev_theta(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    model = EllipticModel(parse_complex(args.tau), parse_complex(args.point))
    rec = model.transformation_residual(count=args.count, seed=cfg.seed)
    ok = max(rec["residual_1"], rec["residual_tau"]) < args.tol
    rec["tolerance"] = args.tol
    return [rec], EXIT_OK if ok else EXIT_REJECTED


# ----------------------------
# config
# ----------------------------


def cmd_config_show(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    return [{"path": config_path(getattr(args, "config", None))}], EXIT_OK


def cmd_config_set(args: argparse.Namespace, cfg: RunConfig) -> Tuple[Records, int]:
    partial: Dict[str, Any] = {}
    for item in args.pairs:
        if "=" not in item:
            raise CliError(EXIT_USAGE, f"Expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        partial[k.strip()] = v.strip()
    path = config_path(getattr(args, "config", None)) or DEFAULT_SETTINGS_PATH
    saved = merge_settings(partial, path=path)
    return [{"path": path, "saved": saved}], EXIT_OK


# ----------------------------
# Parser
# ----------------------------


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="config file (.json or key=value lines)")
    common.add_argument("--seed", type=int)
    common.add_argument("--precision", type=int, help="starting ball precision in bits")
    common.add_argument("--max-precision", dest="max_precision", type=int)
    common.add_argument("--truncation", type=int, help="series truncation order")
    common.add_argument("--nodes", type=int, help="quadrature nodes per circle")
    common.add_argument("--output", help="append JSON lines to this file instead of stdout")
    common.add_argument("-v", "--verbose", dest="verbosity", action="count")
    common.add_argument("--human", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    ap = _ArgumentParser(prog="hj", description="Jet differentials, Borel reductions and hyperbolicity certificates", parents=[common])
    groups = ap.add_subparsers(dest="group", required=True, parser_class=_ArgumentParser)

    def group(name: str, help_text: str) -> Tuple[str, Any]:
        sub = groups.add_parser(name, help=help_text).add_subparsers(dest="verb", required=True, parser_class=_ArgumentParser)
        return name, sub

    def verb(g: Tuple[str, Any], name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        label, sub = g
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler, command=f"{label} {name}")
        return p

    g = group("construct", "build explicit hypersurfaces")
    p = verb(g, "thm3", cmd_construct_thm3, "power sum of N = 4n-3 forms")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit-poly", action="store_true", help="also print the expanded polynomial (n <= 3)")
    p.add_argument("--evidence-trials", type=int, default=2)

    g = group("check", "closed-form certificates")
    p = verb(g, "thm4", cmd_check_thm4, "x0^n + x1^n + x2^n + x3^(n-2) g")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", required=True, help="homogeneous quadratic in x0..x3 with g(0,0,0,x3) = x3^2")
    p.add_argument("--emit-poly", action="store_true")
    p = verb(g, "corollary", cmd_check_corollary, "diagonal g = x3^2 + a0 x0^2 + a1 x1^2 + a2 x2^2")
    p.add_argument("--n", type=int, required=True)
    for name in ("--a0", "--a1", "--a2"):
        p.add_argument(name, required=True, help="rational, complex (2-3i) or ball literal (re,im)")

    g = group("borel", "Borel lemma reductions")
    p = verb(g, "threshold", cmd_borel_threshold, "sum of deltas + (n+1)(n-1)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--deltas", required=True)
    p.add_argument("--p", type=int)
    p = verb(g, "cartan", cmd_borel_cartan, "truncated-counting bookkeeping")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p = verb(g, "partition", cmd_borel_partition, "partition series summing to zero")
    p.add_argument("--f", action="append", required=True, help="'<coef>@exp:<scale>' or a polynomial; repeat")
    p.add_argument("--depth", type=int)
    p = verb(g, "chart", cmd_borel_chart, "Wronskian identity between the z- and w-charts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--deltas", required=True)
    p.add_argument("--g", action="append", required=True, help="g_j in x0..xn; repeat n+1 times")
    p.add_argument("--germ", action="append", required=True, help="x_j(zeta) polynomial; repeat n+1 times")

    g = group("grassmann", "degeneracy strata of k-planes")
    p = verb(g, "codim", cmd_grassmann_codim, "codimension count for one stratum")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--blocks", required=True, help="block sizes, e.g. 3,2,2")
    p = verb(g, "scan", cmd_grassmann_scan, "all block multisets and k")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p = verb(g, "member", cmd_grassmann_member, "exact stratum membership")
    p.add_argument("--W", required=True, help="rows spanning W, e.g. '1,0,0;0,1,0'")
    p.add_argument("--forms", required=True)
    p = verb(g, "evidence", cmd_grassmann_evidence, "seeded emptiness evidence")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--blocks", required=True)
    p.add_argument("--forms")
    p.add_argument("--trials", type=int, default=5)

    g = group("jet", "jet differential algebra")
    p = verb(g, "derivative", cmd_jet_derivative, "total derivative d")
    p.add_argument("--omega", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--times", type=int, default=1)
    p = verb(g, "pullback", cmd_jet_pullback, "f*omega along a polynomial germ")
    p.add_argument("--omega", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--germ", action="append", required=True)
    p = verb(g, "wronskian", cmd_jet_wronskian, "Wronskian of polynomials")
    p.add_argument("--poly", action="append", required=True)
    p.add_argument("--germ", action="append")

    g = group("nev", "Nevanlinna functionals")
    p = verb(g, "profile", cmd_nev_profile, "T, N, m on a radius grid")
    p.add_argument("--f", required=True, help="rational:<num>/<den>")
    p.add_argument("--rmin", type=float, default=1.0)
    p.add_argument("--rmax", type=float, default=1000.0)
    p.add_argument("--grid", default="log:32")
    p.add_argument("--trunc", type=int)
    p.add_argument("--a", help="proximity target value")
    p = verb(g, "defect", cmd_nev_defect, "m/T for a line in an elliptic curve")
    p.add_argument("--tau", default="i")
    p.add_argument("--c", default="1")
    p.add_argument("--point", default="0")
    p.add_argument("--grid", default="5,10,20,40")
    p.add_argument("--rmax", type=float, default=40.0)
    p = verb(g, "curvature", cmd_nev_curvature, "finite-difference curvature identity")
    p.add_argument("--w", default="zeta", help="'exp', 'sin' or a polynomial in one variable")
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p = verb(g, "calculus", cmd_nev_calculus, "calculus-lemma probe")
    p.add_argument("--g", choices=sorted(_LOG_G), default="exp-abs2")
    p.add_argument("--grid", default="lin:20")
    p.add_argument("--rmax", type=float, default=20.0)
    p.add_argument("--constant", type=float, default=2.0)
    p = verb(g, "theta", cmd_nev_theta, "theta transformation residuals")
    p.add_argument("--tau", default="i")
    p.add_argument("--point", default="0")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-12)

    g = group("config", "run configuration")
    verb(g, "show", cmd_config_show, "effective configuration")
    p = verb(g, "set", cmd_config_set, "persist key=value defaults")
    p.add_argument("pairs", nargs="+")
    return ap


# ----------------------------
# Dispatch
# ----------------------------


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else (logging.INFO if verbosity == 1 else logging.DEBUG)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def _emit(record: Dict[str, Any], cfg: Optional[RunConfig]) -> None:
    if cfg is not None and cfg.human:
        out = render_human(record) + "\n\n"
        if cfg.output:
            with open(cfg.output, "a", encoding="utf-8") as f:
                f.write(out)
        else:
            sys.stdout.write(out)
            sys.stdout.flush()
        return
    emit_record(record, path=cfg.output if cfg is not None else None)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    cfg: Optional[RunConfig] = None
    command = " ".join(argv[:2])
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        overrides = {k: getattr(args, k, None) for k in ("seed", "precision", "max_precision", "truncation", "nodes", "output", "verbosity", "human")}
        cfg = load_run_config(getattr(args, "config", None), overrides=overrides)
        setup_logging(cfg.verbosity)
        records, code = args.handler(args, cfg)
        for i, rec in enumerate(records):
            out = {"command": command, "ok": code == EXIT_OK, **rec}
            if i == len(records) - 1:
                out["exit_code"] = code
                out["config"] = cfg.to_dict()
                out["generated_at"] = utc_now()
            _emit(out, cfg)
        return code
    except CliError as e:
        return _fail(command, e.message, "usage", e.code, cfg)
    except (ValueError, ArithmeticError) as e:
        return _fail(command, str(e), type(e).__name__, EXIT_USAGE, cfg)


def _fail(command: str, message: str, kind: str, code: int, cfg: Optional[RunConfig]) -> int:
    sys.stderr.write(f"hj: error: {message}\n")
    _emit({"command": command, "ok": False, "error": message, "kind": kind, "exit_code": code, "generated_at": utc_now()}, cfg)
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
