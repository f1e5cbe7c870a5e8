"""Command-line entry point.

Exit codes: 0 success, 1 domain/validation error, 2 usage error.  Every
command writes ``manifest.json`` (command + resolved parameters) into --out.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import exponents as ex
from . import kato as kt
from . import regions as rg
from . import specfun as sf
from .params import DomainError, FLRWParams, ModelParams, load_config, model_from_mapping, validate

FMT = "%.12g"


def fmt(x: Any) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, (float, np.floating)):
        return FMT % x
    if isinstance(x, ex.RootDescriptor):
        return "all_p" if x.all_p else FMT % x.value
    return str(x)


class Output:
    def __init__(self, args):
        self.dir = Path(args.out)
        self.quiet = args.quiet
        self.dir.mkdir(parents=True, exist_ok=True)

    def print(self, *cols) -> None:
        if not self.quiet:
            print("\t".join(fmt(c) for c in cols))

    def csv(self, name: str, header: Sequence[str], rows) -> Path:
        path = self.dir / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(c) for c in r])
        return path

    def json(self, name: str, obj) -> Path:
        path = self.dir / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n",
                        encoding="utf-8")
        return path

    def manifest(self, command: str, params: dict) -> None:
        self.json("manifest.json", {"command": command, "params": params})


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, ex.RootDescriptor):
        return None if o.all_p else o.value
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# --- model parameters from flags / config --------------------------------------------

MODEL_FLAGS = ("n", "alpha", "mu", "p", "epsilon", "R", "nonlinearity", "w")


def _add_model_flags(sp, need_p: bool = True):
    sp.add_argument("--config", help="key = value file or a manifest.json")
    sp.add_argument("--n", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--w", type=float, help="FLRW constant; overrides alpha and mu")
    if need_p:
        sp.add_argument("--p", type=float)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--R", type=float)
        sp.add_argument("--nonlinearity", choices=["ut", "grad", "time", "space"])


def _config(args) -> dict:
    return dict(load_config(args.config)) if getattr(args, "config", None) else {}


def _model(args, cfg: Optional[dict] = None) -> ModelParams:
    cfg = _config(args) if cfg is None else cfg
    over = {k: getattr(args, k, None) for k in MODEL_FLAGS}
    if over.get("w") is not None:
        cfg.pop("alpha", None)
        cfg.pop("mu", None)
    elif over.get("alpha") is not None or over.get("mu") is not None:
        cfg.pop("w", None)
    return model_from_mapping(cfg, **over)


# --- subcommands ------------------------------------------------------------------

def cmd_exponents(args, out: Output) -> int:
    n = args.n if args.n is not None else 3
    if args.w is not None:
        es = ex.flrw_thresholds(n, args.w)
        params = {"n": n, "w": args.w}
    else:
        alpha = args.alpha if args.alpha is not None else 0.0
        mu = args.mu if args.mu is not None else 0.0
        es = ex.threshold_set(n, alpha, mu)
        params = {"n": n, "alpha": alpha, "mu": mu}
    rows = es.rows()
    for name, val in rows:
        out.print(name, val)
    out.csv("exponents.csv", ["name", "value"], rows)
    if args.w is not None and n >= 2:
        cw = ex.critical_w(n)
        out.print("w_star", cw.value)
    out.manifest("exponents", params)
    return 0


def _bound_row(b):
    return [b.source, b.applicable, b.kind.value, b.exponent, b.s, b.ell, b.m, b.condition,
            b.data_condition]


def cmd_bounds(args, out: Output) -> int:
    m = _model(args)
    bs = rg.applicable_bounds(m)
    header = ["source", "applicable", "kind", "exponent", "s", "ell", "m", "condition", "data"]
    out.print(*header)
    rows = [_bound_row(b) for b in bs]
    for r in rows:
        out.print(*r)
    res = rg.classify_region(m)
    out.print("region", res.label)
    if res.bound is not None:
        out.print("best", res.bound.source, res.bound.describe())
    out.csv("bounds.csv", header, rows)
    out.manifest("bounds", m.to_dict())
    return 0


def cmd_regions(args, out: Output) -> int:
    spec = rg.FIGURES[args.figure]
    if args.resolution is not None:
        from dataclasses import replace
        spec = replace(spec, resolution=args.resolution)
    grid = rg.region_grid(spec, curve_samples=args.curve_samples)
    out.csv("grid.csv", ["x", "p", "region", "bound_kind", "exponent"],
            ([r.x, r.p, r.region, r.bound_kind, r.exponent] for r in grid.rows))
    curve_rows = [(name, x, p) for name, pts in grid.curves.items() for x, p in pts]
    out.csv("curves.csv", ["curve_name", "x", "p"], curve_rows)
    counts: dict[str, int] = {}
    for r in grid.rows:
        counts[r.region] = counts.get(r.region, 0) + 1
    for k in sorted(counts):
        out.print(k, counts[k])
    out.manifest("regions", {"figure": args.figure, "x_axis": spec.x_axis,
                             "x_range": list(spec.x_range), "p_range": list(spec.p_range),
                             "n": spec.n, "alpha": spec.alpha,
                             "nonlinearity": spec.nonlinearity.value,
                             "resolution": spec.resolution, "curve_samples": args.curve_samples})
    return 0


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise DomainError(f"bad number list {text!r}") from exc


def cmd_bessel(args, out: Output) -> int:
    ctx = sf.BesselContext(args.nu, tol=args.tol)
    header = ["nu", "t", "K", "dK", "d2K", "ode_B0", "recurrence_B2", "asymptotic_B1"]
    rows = []
    for t in _floats(args.t):
        if not t > 0:
            raise DomainError(f"t must be > 0 (got {t})")
        K, K1, K2 = sf.bessel_k_derivs(ctx, t)
        res = sf.identity_residuals(ctx, t)
        rows.append([args.nu, t, K, K1, K2, res["ode_B0"], res["recurrence_B2"],
                     res["asymptotic_B1"]])
    out.print(*header)
    for r in rows:
        out.print(*r)
    out.csv("bessel.csv", header, rows)
    out.manifest("bessel", {"nu": args.nu, "t": args.t, "tol": args.tol})
    return 0


def cmd_testfn_check(args, out: Output) -> int:
    n = args.n if args.n is not None else 3
    if args.w is not None:
        f = FLRWParams(n, args.w)
        alpha, mu = f.alpha, f.mu
    else:
        alpha = args.alpha if args.alpha is not None else 1.0 / 3.0
        mu = args.mu if args.mu is not None else 1.0
    m = validate(ModelParams(n, alpha, mu, 2.0))
    tf = sf.TestFunction.phi(m)
    rng = np.random.default_rng(args.seed)
    rows = []
    for _ in range(args.samples):
        t = float(rng.uniform(1.0, 20.0))
        r = float(rng.uniform(0.0, 3.0))
        v = sf.phi_pde_residual(tf, t, r)
        rows.append(["pde_residual", t, r, v, 1e-8, v <= 1e-8])
        v = sf.phi_t_ratio_residual(tf, t)
        rows.append(["phi_t_ratio", t, r, v, 1e-10, v <= 1e-10])
    for t in (1.0, 2.0, 5.0, 10.0, 50.0, 100.0):
        v = sf.phi_integral_ratio(tf, t, args.R)
        rows.append(["volume_ratio", t, args.R, v, "", ""])
    ctx = sf.BesselContext.from_model(m)
    M = sf.ratio_bound(ctx, 1.0)
    rows.append(["ratio_bound", 1.0, "", M, "", ""])
    if args.q is not None:
        tq = sf.TestFunction.phi_q(m, args.q)
        for t in (5.0, 10.0, 20.0):
            A = float(np.asarray((t ** (1 - alpha) - 1) / (1 - alpha)))
            for r in (0.0, A / 2, A):
                v = sf.phi_q_envelope_ratio(tq, t, r)
                rows.append(["phi_q_envelope", t, r, v, "[0.02,50]", 0.02 <= v <= 50])
    header = ["check", "t", "r", "value", "tolerance", "pass"]
    out.csv("testfn.csv", header, rows)
    failed = [r for r in rows if r[5] is False]
    out.print("checks", len(rows))
    out.print("failed", len(failed))
    out.manifest("testfn-check", {"n": n, "alpha": alpha, "mu": mu, "q": args.q, "R": args.R,
                                  "samples": args.samples, "seed": args.seed})
    return 0


def cmd_kato(args, out: Output) -> int:
    prob = kt.KatoProblem(p=args.p, a=args.a, b=args.b, c=args.c, q=args.q, r=args.r,
                          mu=args.mu, A0=args.A0, A1=args.A1, R=args.R, T0=args.T0,
                          T1=args.T1, order=args.order)
    b = kt.lifespan_bound(prob)
    res: dict[str, Any] = {"M": prob.M, "bound": b.describe(), "kind": b.kind.value,
                           "exponent": b.exponent, "s": b.s, "ell": b.ell, "m": b.m}
    if prob.order is kt.KatoOrder.FIRST:
        res["E"] = kt.growth_E(prob)
        try:
            res["divergence_time"] = kt.divergence_time(prob, delta=args.delta)
        except kt.HorizonExceeded as exc:
            res["divergence_time"] = None
            res["divergence_note"] = str(exc)
    if args.oracle:
        try:
            res["oracle_T"] = kt.ode_oracle(prob)
        except kt.HorizonExceeded as exc:
            res["oracle_T"] = None
            res["oracle_note"] = str(exc)
    for k, v in res.items():
        out.print(k, v)
    out.json("kato.json", res)
    params = {k: getattr(args, k) for k in ("p", "a", "b", "c", "q", "r", "mu", "A0", "A1",
                                            "R", "T0", "T1", "order", "delta", "oracle")}
    out.manifest("kato", params)
    return 0


SOLVER_KEYS = {"dr": float, "t_max": float, "cfl": float, "threshold": float,
               "nonlinear": "bool", "amp": float, "u1_factor": float, "u1_bump": float,
               "dt_max": float, "diag_every": int}


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"expected a boolean, got {v!r}")


def _solver_config(args):
    from .solver import Profile, SolverConfig

    cfg = _config(args)
    m = _model(args, dict(cfg))
    kw: dict[str, Any] = {}
    for k, typ in SOLVER_KEYS.items():
        v = getattr(args, k, None)
        if v is None:
            v = cfg.get(k)
        if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none")):
            continue
        try:
            kw[k] = _bool(v) if typ == "bool" else typ(v)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"bad value for {k}: {v!r}") from exc
    prof = Profile(**{k: kw.pop(k) for k in ("amp", "u1_factor", "u1_bump") if k in kw})
    sc = SolverConfig(model=m, profile=prof, **kw)
    params = m.to_dict()
    if args.w is not None:
        params["w"] = args.w
    elif cfg.get("w") is not None and args.alpha is None and args.mu is None:
        params["w"] = float(cfg["w"])
    params.update({"dr": sc.dr, "t_max": sc.t_max, "cfl": sc.cfl, "threshold": sc.threshold,
                   "nonlinear": sc.nonlinear, "amp": prof.amp, "u1_factor": prof.u1_factor,
                   "u1_bump": prof.u1_bump, "dt_max": sc.dt_max, "diag_every": sc.diag_every})
    return sc, params, cfg


def _add_solver_flags(sp):
    sp.add_argument("--dr", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--cfl", type=float)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--linear", dest="nonlinear", action="store_const", const=False)


def cmd_simulate(args, out: Output) -> int:
    from .solver import run

    sc, params, _ = _solver_config(args)
    o = run(sc)
    cols = ["t", "int_u", "int_ut", "sup_v", "support_radius", "support_violation"]
    out.csv("run.csv", cols, ([d[c] for c in cols] for d in o.diagnostics))
    summary = o.summary()
    summary["parameters"] = params
    out.json("summary.json", summary)
    for k in ("blew_up", "T_num", "reason", "sensitivity", "converged", "steps"):
        out.print(k, summary[k])
    out.manifest("simulate", params)
    return 0


def cmd_sweep(args, out: Output) -> int:
    from .sweep import compare_prediction, run_sweep

    sc, params, cfg = _solver_config(args)
    eps_text = args.eps if args.eps is not None else cfg.get("eps")
    if eps_text is None:
        raise DomainError("sweep needs --eps")
    eps = _floats(str(eps_text)) if not isinstance(eps_text, list) else [float(e) for e in eps_text]
    hf = args.horizon_factor if args.horizon_factor is not None else float(cfg.get("horizon_factor", 100.0))
    slack = args.slack if args.slack is not None else float(cfg.get("slack", 1e3))
    res = run_sweep(sc, eps, horizon_factor=hf, workers=args.workers)
    rep = compare_prediction(res, slack=slack)
    out.csv("sweep.csv", ["epsilon", "T_num", "converged"],
            ([p.epsilon, p.T_num, p.converged] for p in res.points))
    fit = {"slope": res.fit.slope if res.fit else None,
           "intercept": res.fit.intercept if res.fit else None,
           "r2": res.fit.r2 if res.fit else None,
           "predicted_k": rep.predicted_k, "verdict": rep.verdict,
           "ratio": rep.ratio, "censored": rep.censored, "note": res.note or rep.message}
    out.json("fit.json", fit)
    for p in res.points:
        out.print(p.epsilon, p.T_num, p.converged)
    out.print("slope", fit["slope"])
    out.print("verdict", rep.verdict)
    params.update({"eps": eps, "horizon_factor": hf, "slack": slack})
    out.manifest("sweep", params)
    return 0


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    ap = argparse.ArgumentParser(prog="flrw-blowup", parents=[common],
                                 description="Blow-up exponents, lifespan bounds and simulations.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exponents", parents=[common], help="critical exponents table")
    _add_model_flags(sp, need_p=False)
    sp.set_defaults(func=cmd_exponents)

    sp = sub.add_parser("bounds", parents=[common], help="lifespan bounds at one point")
    _add_model_flags(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("regions", parents=[common], help="region grid and curves for a figure")
    sp.add_argument("--figure", type=int, required=True, choices=sorted(rg.FIGURES))
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--curve-samples", dest="curve_samples", type=int, default=400)
    sp.set_defaults(func=cmd_regions)

    sp = sub.add_parser("bessel", parents=[common], help="K_nu and identity residuals")
    sp.add_argument("--nu", type=float, required=True)
    sp.add_argument("--t", required=True, help="comma-separated arguments")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_bessel)

    sp = sub.add_parser("testfn-check", parents=[common], help="test-function residual report")
    sp.add_argument("--n", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--w", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--R", type=float, default=0.5)
    sp.add_argument("--samples", type=int, default=20)
    sp.set_defaults(func=cmd_testfn_check)

    sp = sub.add_parser("kato", parents=[common], help="iteration-lemma bound and oracle")
    sp.add_argument("--p", type=float, required=True)
    for name, dflt in (("a", 0.0), ("b", 0.0), ("c", 1.0), ("q", 0.0), ("r", 0.0), ("mu", 0.0),
                       ("A0", 1.0), ("A1", 1.0), ("R", 1.0), ("T0", 1.0), ("T1", 2.0)):
        sp.add_argument(f"--{name}", type=float, default=dflt)
    sp.add_argument("--order", choices=[o.value for o in kt.KatoOrder], default="first")
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--oracle", action="store_true")
    sp.set_defaults(func=cmd_kato)

    sp = sub.add_parser("simulate", parents=[common], help="one radial simulation")
    _add_model_flags(sp)
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", parents=[common], help="epsilon sweep and scaling fit")
    _add_model_flags(sp)
    _add_solver_flags(sp)
    sp.add_argument("--eps", help="comma-separated, strictly decreasing")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--horizon-factor", dest="horizon_factor", type=float)
    sp.add_argument("--slack", type=float)
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for k, v in (("quiet", False), ("seed", 0), ("out", "flrw_out")):
        if not hasattr(args, k):
            setattr(args, k, v)
    try:
        out = Output(args)
        return args.func(args, out)
    except (DomainError, kt.HorizonExceeded, sf.QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
