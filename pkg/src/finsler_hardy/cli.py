"""Command-line entry point.

    finsler-hardy constants --n 3 --alpha 0 --b 2
    finsler-hardy verify --n 2 --alpha 0.5 --b 2 --norm lp:4 --k 2
    finsler-hardy sharpness --kind K --eps 0.2,0.1,0.05 --format csv
    finsler-hardy suite --quick --seed 7

Every flag can also come from an INI file (``--config run.ini``) with the
sections [params], [norm], [domain], [quadrature], [sweep], [output] and
[run]; flags given on the command line win.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or parameter
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys

import numpy as np

from . import __version__
from .constants import ParameterError, const_C, const_H, const_K, const_K_theta
from .finsler_core import LiftedNorm, NormError, NormSpec
from .ground_state import (
    GroundState,
    GroundStateError,
    ProblemParams,
    make_hyper_params,
    ode_oracle,
    slope_limit,
)
from .hypergeom import HypergeomError, classify_case, hyp2f1, hyp2f1_derivative, region_of
from .quadrature import DomainSpec, QuadratureError
from .report import emit_report, sweep_dict
from .suite import CONE_THETA, run_suite, suite_ok
from .sweeps import (
    no_Lp_improvement_demo,
    sharpness_K_sweep,
    sharpness_remainder_sweep,
    weight_power_failure_sweep,
)
from .verifier import THREADS_ENV, bump_corpus, deficit_cone, deficit_series

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# flag dest -> (INI section, key)
CONFIG_KEYS = {
    "n": ("params", "n"), "alpha": ("params", "alpha"), "b": ("params", "b"), "theta": ("params", "theta"),
    "norm": ("norm", "spec"), "domain": ("domain", "kind"), "radius": ("domain", "radius"),
    "radial_levels": ("quadrature", "radial_levels"), "angular_nodes": ("quadrature", "angular_nodes"),
    "jacobi_order": ("quadrature", "jacobi_order"),
    "k": ("sweep", "k"), "kind": ("sweep", "kind"), "eps": ("sweep", "eps"), "m": ("sweep", "m"),
    "epsilon": ("sweep", "epsilon"), "count": ("sweep", "count"),
    "output": ("output", "path"), "format": ("output", "format"),
    "seed": ("run", "seed"), "threads": ("run", "threads"),
}


class UsageError(ValueError):
    pass


class CheckFailure(Exception):
    def __init__(self, check, values):
        super().__init__(f"{check}: {values}")
        self.check = check
        self.values = values


def parse_norm(text, n):
    """'euclidean', 'lp:P' or 'ellipsoid:a11,a12,...' (row-major n x n)."""
    text = text.strip().lower()
    name, _, arg = text.partition(":")
    if name in ("euclidean", "l2"):
        return NormSpec.euclidean(n)
    if name == "lp":
        if not arg:
            raise UsageError("lp norm needs an exponent, e.g. lp:4")
        return NormSpec.lp(float(arg), n)
    if name == "ellipsoid":
        vals = [float(v) for v in arg.split(",") if v]
        if len(vals) != n * n:
            raise UsageError(f"ellipsoid needs {n * n} matrix entries, got {len(vals)}")
        return NormSpec.ellipsoid(np.array(vals).reshape(n, n))
    raise UsageError(f"unknown norm {text!r}; use euclidean, lp:P or ellipsoid:...")


def float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def build_parser():
    ap = argparse.ArgumentParser(prog="finsler-hardy", description="Weighted Finsler trace-Hardy laboratory.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, params=True):
        p.add_argument("--config", help="INI file; command-line flags override it")
        p.add_argument("--output", "-o", default=None, help="output path, '-' for stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None, help=f"worker threads (also {THREADS_ENV})")
        p.add_argument("--radial-levels", type=int, default=None, dest="radial_levels")
        p.add_argument("--angular-nodes", type=int, default=None, dest="angular_nodes")
        p.add_argument("--jacobi-order", type=int, default=None, dest="jacobi_order")
        if params:
            p.add_argument("--n", type=int, default=None)
            p.add_argument("--alpha", type=float, default=None)
            p.add_argument("--b", type=float, default=None)
            p.add_argument("--norm", default=None, help="euclidean | lp:P | ellipsoid:a11,a12,...")

    p = sub.add_parser("constants", help="sharp constants K, H, C (and K_theta)")
    common(p)
    p.add_argument("--theta", type=float, default=None)

    p = sub.add_parser("hypergeom", help="evaluate 2F1(a, b; c; z)")
    common(p, params=False)
    p.add_argument("--abc", required=False, default=None, help="a,b,c")
    p.add_argument("--z", default=None, help="comma-separated z <= 0")

    p = sub.add_parser("ground-state", help="profile B against the ODE oracle")
    common(p)
    p.add_argument("--t", default=None, help="comma-separated t > 0")

    p = sub.add_parser("verify", help="deficits on a seeded bump corpus")
    common(p)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--domain", choices=("cylinder", "half-ball"), default=None)
    p.add_argument("--radius", type=float, default=None)

    p = sub.add_parser("sharpness", help="near-optimizer sweeps")
    common(p)
    p.add_argument("--kind", choices=("K", "remainder", "weight-power", "no-lp"), default=None)
    p.add_argument("--eps", default=None, help="comma list; for remainder, groups separated by ';'")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", default=None)
    p.add_argument("--epsilon", type=float, default=None)

    p = sub.add_parser("cone", help="cone constant and cone deficits")
    common(p)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--count", type=int, default=None)

    p = sub.add_parser("suite", help="acceptance battery")
    common(p, params=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true")
    g.add_argument("--full", action="store_true")
    return ap


DEFAULTS = {
    "n": 3, "alpha": 0.0, "b": 2.0, "theta": None, "norm": "euclidean", "domain": "cylinder", "radius": 1.0,
    "radial_levels": None, "angular_nodes": None, "jacobi_order": None,
    "k": None, "kind": "K", "eps": None, "m": "3,5,8", "epsilon": 0.5, "count": 1,
    "output": None, "format": "json", "seed": 7, "threads": None,
}

CASTS = {"n": int, "alpha": float, "b": float, "theta": float, "radius": float, "radial_levels": int,
         "angular_nodes": int, "jacobi_order": int, "k": int, "epsilon": float, "count": int, "seed": int,
         "threads": int}


def resolve(args):
    """Merge defaults < INI file < flags into one namespace."""
    cfg = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise UsageError(f"cannot read config file {args.config!r}")
        for dest, (sec, key) in CONFIG_KEYS.items():
            if cp.has_option(sec, key):
                raw = cp.get(sec, key)
                try:
                    cfg[dest] = CASTS[dest](raw) if dest in CASTS else raw
                except ValueError as exc:
                    raise UsageError(f"[{sec}] {key} = {raw!r}: {exc}") from None
    out = dict(DEFAULTS)
    out.update(cfg)
    for dest in DEFAULTS:
        v = getattr(args, dest, None)
        if v is not None:
            out[dest] = v
    out["verb"] = args.verb
    out["quick"] = not getattr(args, "full", False)
    for key in ("abc", "z", "t"):
        out[key] = getattr(args, key, None)
    return argparse.Namespace(**out)


def _params(cfg):
    try:
        return ProblemParams(cfg.n, cfg.alpha, cfg.b)
    except (GroundStateError, ParameterError) as exc:
        raise UsageError(f"invalid parameters: the inequalities need -1 < alpha < 1, "
                         f"2 - alpha <= b < n + 1 and n >= 1 ({exc})") from None


def _lifted(cfg):
    return LiftedNorm(parse_norm(cfg.norm, cfg.n))


def _quad(cfg, levels, order):
    lv = levels if cfg.radial_levels is None else cfg.radial_levels
    od = order if cfg.jacobi_order is None else cfg.jacobi_order
    if lv < 0 or od < 2:
        raise UsageError("need radial_levels >= 0 and jacobi_order >= 2")
    return lv, od


def _angular(cfg):
    a = 24 if cfg.angular_nodes is None else cfg.angular_nodes
    if a < 4:
        raise UsageError("need angular_nodes >= 4")
    return a


def _norm_info(lifted):
    base = lifted.base
    d = {"family": base.family, "dim": base.dim}
    if base.p is not None:
        d["p"] = base.p
    if base.matrix is not None:
        d["matrix"] = base.matrix
    return d


# ---------------------------------------------------------------------------
# verbs


def cmd_constants(cfg):
    p = _params(cfg)
    h = make_hyper_params(p)
    out = {"params": {"n": p.n, "alpha": p.alpha, "b": p.b}, "K": const_K(p.n, p.alpha, p.b),
           "H": const_H(p.n, p.alpha), "hardy_coeff": p.hardy_coeff, "C2": h.C2,
           "case_tags": [h.case1.tag.value, h.case2.tag.value]}
    if p.b >= 2.0:
        out["C"] = const_C(p.n, p.b)
    if cfg.theta is not None:
        if p.alpha != 0.0:
            raise UsageError("the cone constant is defined for alpha = 0")
        r = const_K_theta(p.n, p.b, cfg.theta, strict=False)
        out["K_theta"] = {"theta": cfg.theta, "value": r.value, "hypergeometric_form": r.hypergeometric_form,
                          "discrepancy": r.discrepancy}
        if not r.consistent:
            raise CheckFailure("K_theta forms", out["K_theta"])
    return out


def cmd_hypergeom(cfg):
    if not cfg.abc or cfg.z is None:
        raise UsageError("hypergeom needs --abc a,b,c and --z values")
    abc = float_list(cfg.abc)
    if len(abc) != 3:
        raise UsageError("--abc takes three numbers")
    a, b, c = abc
    rows = []
    for z in float_list(cfg.z):
        rows.append({"z": z, "value": hyp2f1(a, b, c, z), "derivative": hyp2f1_derivative(a, b, c, z),
                     "region": region_of(z), "case": classify_case(a, b, c, z).tag.value})
    return {"a": a, "b": b, "c": c, "values": rows}


def cmd_ground_state(cfg):
    p = _params(cfg)
    gs = GroundState.build(p.n, p.alpha, p.b, _lifted(cfg))
    t = np.array(float_list(cfg.t) if cfg.t else np.logspace(-2, 2, 9).tolist())
    if np.any(t <= 0):
        raise UsageError("t values must be positive")
    t = np.sort(t)
    ref = ode_oracle(p, t, T=max(1e3, 10 * t[-1]), t_min=min(1e-5, t[0] / 20))
    B = np.asarray(gs.B(t), dtype=float)
    rel = np.abs(B - ref.B) / np.abs(ref.B)
    lim, _ = slope_limit(gs)
    out = {"params": {"n": p.n, "alpha": p.alpha, "b": p.b}, "norm": _norm_info(gs.norm),
           "beta": p.beta, "degree": p.degree, "K": p.K, "slope_limit": lim,
           "far_coefficient": {"hypergeometric": gs.L, "ode": ref.L},
           "profile": [{"t": ti, "B": bi, "B_prime": float(gs.B_prime(ti)), "B_ode": oi, "rel_err": ri}
                       for ti, bi, oi, ri in zip(t, B, ref.B, rel)],
           "max_rel_err": float(rel.max())}
    if rel.max() > 1e-6 or abs(lim - p.K) > 1e-6:
        raise CheckFailure("ground state vs ODE oracle", {"max_rel_err": float(rel.max()), "slope_limit": lim})
    return out


def _report_entry(u, r):
    return {"test_function": u.describe(), "terms": {"energy": r.energy, "trace": r.trace_term,
            "hardy": r.hardy_term, "remainders": list(r.remainder_terms)},
            "deficit": r.deficit, "error": r.quadrature_error, "verdict": r.verdict,
            "hardy_structural_zero": r.hardy_structural_zero, "node_count": r.node_count}


def _summarise(p, lifted, dom, entries, extra=None):
    worst = min(entries, key=lambda e: e["deficit"] + e["error"])
    out = {"params": {"n": p.n, "alpha": p.alpha, "b": p.b}, "norm": _norm_info(lifted),
           "domain": dom.describe(), "terms": worst["terms"], "deficit": worst["deficit"],
           "error": worst["error"], "verdict": "PASS" if all(e["verdict"] == "PASS" for e in entries) else "FAIL",
           "corpus": entries}
    if extra:
        out.update(extra)
    return out


def cmd_verify(cfg):
    p = _params(cfg)
    lifted = _lifted(cfg)
    k = 0 if cfg.k is None else cfg.k
    if k < 0:
        raise UsageError("k must be >= 0")
    levels, order = _quad(cfg, 0, 10)
    if cfg.domain == "half-ball":
        dom = DomainSpec.wulff_half_ball(lifted, cfg.radius)
    else:
        dom = DomainSpec.cylinder(lifted, cfg.radius, cfg.radius)
    corpus = bump_corpus(dom, cfg.count, cfg.seed)
    entries = [_report_entry(u, deficit_series(u, p, lifted, dom, k, levels, order)) for u in corpus]
    out = _summarise(p, lifted, dom, entries, {"k": k, "seed": cfg.seed})
    if out["verdict"] != "PASS":
        raise CheckFailure("deficit non-negativity", out)
    return out


def cmd_cone(cfg):
    p = _params(cfg)
    if p.alpha != 0.0:
        raise UsageError("the cone inequalities are unweighted: use --alpha 0")
    if p.b < 2.0:
        raise UsageError("the cone inequalities need 2 <= b < n + 1")
    theta = CONE_THETA if cfg.theta is None else cfg.theta
    if not 0.0 < theta < math.pi / 2:
        raise UsageError("theta must lie in (0, pi/2)")
    r = const_K_theta(p.n, p.b, theta, strict=False)
    lifted = _lifted(cfg)
    levels, order = _quad(cfg, 0, 10)
    k = 0 if cfg.k is None else cfg.k
    dom = DomainSpec.cone(lifted, theta, cfg.radius)
    corpus = bump_corpus(dom, cfg.count, cfg.seed)
    entries = [_report_entry(u, deficit_cone(u, p.n, p.b, theta, lifted, dom, k, levels, order)) for u in corpus]
    out = _summarise(p, lifted, dom, entries, {
        "k": k, "seed": cfg.seed, "theta": theta,
        "K_theta": {"value": r.value, "hypergeometric_form": r.hypergeometric_form, "discrepancy": r.discrepancy},
        "C": const_C(p.n, p.b)})
    if not r.consistent:
        raise CheckFailure("K_theta forms", out["K_theta"])
    if out["verdict"] != "PASS":
        raise CheckFailure("cone deficit non-negativity", out)
    return out


def _remainder_eps(text, k):
    if text is None:
        e = [0.05, 0.02, 0.01, 0.004, 0.002]
        return [tuple([0.0] * k + [v]) for v in e]
    groups = [float_list(g) for g in str(text).split(";") if g.strip()]
    if len(groups) == 1 and len(groups[0]) != k + 1:
        return [tuple([0.0] * k + [v]) for v in groups[0]]
    for g in groups:
        if len(g) != k + 1:
            raise UsageError(f"each remainder eps group needs k + 1 = {k + 1} entries")
    return [tuple(g) for g in groups]


def cmd_sharpness(cfg):
    p = _params(cfg)
    lifted = _lifted(cfg)
    ang = _angular(cfg)
    kind = cfg.kind
    if kind == "K":
        levels, order = _quad(cfg, 1, 8)
        eps = float_list(cfg.eps) if cfg.eps else [0.2, 0.1, 0.05]
        sw = sharpness_K_sweep(p, lifted, eps, levels, order, angular_order=ang)
    elif kind == "remainder":
        levels, _ = _quad(cfg, 1, 16)
        k = 1 if cfg.k is None else cfg.k
        if k < 1:
            raise UsageError("the remainder sweep needs k >= 1")
        dom = DomainSpec.wulff_half_ball(lifted, cfg.radius)
        sw = sharpness_remainder_sweep(p, lifted, dom, k, _remainder_eps(cfg.eps, k), levels=levels,
                                       angular_order=ang)
    elif kind == "weight-power":
        levels, _ = _quad(cfg, 1, 16)
        k = 1 if cfg.k is None else cfg.k
        dom = DomainSpec.wulff_half_ball(lifted, cfg.radius)
        sw = weight_power_failure_sweep(p, lifted, dom, k, cfg.epsilon, int_list(cfg.m), levels=levels,
                                        angular_order=ang)
    else:
        levels, _ = _quad(cfg, 1, 16)
        eps = float_list(cfg.eps) if cfg.eps else [0.4, 0.2, 0.1]
        sw = no_Lp_improvement_demo(p, lifted, eps, levels=levels, angular_order=ang)
    if cfg.format == "csv":
        return sw
    out = sweep_dict(sw)
    out["norm"] = _norm_info(lifted)
    return out


def cmd_suite(cfg):
    results = run_suite(quick=cfg.quick, seed=cfg.seed, log=lambda s: print(s, file=sys.stderr))
    out = {"mode": "quick" if cfg.quick else "full", "seed": cfg.seed,
           "checks": [r.as_dict() for r in results], "ok": suite_ok(results)}
    if not out["ok"]:
        raise CheckFailure("suite", out)
    return out


COMMANDS = {"constants": cmd_constants, "hypergeom": cmd_hypergeom, "ground-state": cmd_ground_state,
            "verify": cmd_verify, "sharpness": cmd_sharpness, "cone": cmd_cone, "suite": cmd_suite}


def run(cfg):
    """Execute one resolved configuration; returns (exit code, report or None)."""
    if cfg.format == "csv" and not (cfg.verb == "sharpness"):
        raise UsageError("csv output is only available for sweeps")
    if cfg.threads is not None:
        if cfg.threads < 1:
            raise UsageError("threads must be >= 1")
        os.environ[THREADS_ENV] = str(cfg.threads)
    report = COMMANDS[cfg.verb](cfg)
    return EXIT_OK, report


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve(args)
        code, report = run(cfg)
    except (UsageError, NormError, ParameterError, GroundStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailure as exc:
        print(f"check failed: {exc.check}", file=sys.stderr)
        emit_report(exc.values, "json", cfg.output)
        return EXIT_CHECK
    except (QuadratureError, HypergeomError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit_report(report, cfg.format, cfg.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
