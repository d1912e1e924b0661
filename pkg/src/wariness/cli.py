"""Command-line front end: ``wariness check|step|simulate|trap|sweep``.

Economies are described by one JSON file::

    {"n": 1.1, "beta": 0.7, "gamma": "inf", "utility": "log",
     "production": {"A": 3.6, "a": 0.3, "rho": -0.6, "B": 0.0},
     "solver": {"grid_points": 4096},
     "reference": {"x_poverty": 0.0887}}

Numbers are written with 12 significant digits and absent values as ``NA``.
Exit status is 0 on success, 1 on a numerical failure and 2 on a bad
configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from . import __version__
from .analysis import (THRESHOLD_NAMES, check_assum_poverty, check_collapse, check_h_increasing,
                       check_regime_lock, check_uniqueness, poverty_thresholds, threshold_value,
                       verify_trap)
from .dynamics import LimitKind, parse_policy, policy_name, simulate, step_solutions
from .errors import ConfigError, WarinessError
from .model import (INF, EconomyConfig, LogUtility, Preferences, ProductionSpec, SolverSettings,
                    regime_thresholds)

NA = "NA"
_TOP_KEYS = {"n", "beta", "gamma", "utility", "production", "solver", "reference", "name",
             "description"}
_SWEEP_PARAMS = ("A", "a", "rho", "B", "n", "beta", "gamma")
_POLICIES = ("lowest", "highest", "nearest", "stay:lowest", "stay:highest", "stay:nearest")


def fmt(x) -> str:
    """Locale-free rendering: 12 significant digits, ``NA`` for missing."""
    if x is None:
        return NA
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return NA
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return fmt(x)
        return float(format(x, ".12g"))
    if isinstance(x, (np.integer,)):
        return int(x)
    if hasattr(x, "value") and not isinstance(x, (int, float, str)):
        return x.value
    return x


# -- configuration ---------------------------------------------------------------

def _number(raw: dict, key: str, path: str, allow_inf: bool = False) -> float:
    if key not in raw:
        raise ConfigError(f"{path}{key}", "missing required field")
    v = raw[key]
    if allow_inf and isinstance(v, str) and v.strip().lower() in ("inf", "infinity", "+inf"):
        return INF
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}", f"expected a number, got {v!r}")
    return float(v)


def parse_config(raw: Any) -> tuple[EconomyConfig, dict]:
    """Validate a decoded JSON document; return the economy and its reference block."""
    if not isinstance(raw, dict):
        raise ConfigError("$", "top level must be an object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(key, "unknown field")
    n = _number(raw, "n", "")
    beta = _number(raw, "beta", "")
    gamma = _number(raw, "gamma", "", allow_inf=True) if "gamma" in raw else 0.0
    utility = raw.get("utility", "log")
    if utility != "log":
        raise ConfigError("utility", f"only 'log' is supported in config files, got {utility!r}")
    prod_raw = raw.get("production")
    if not isinstance(prod_raw, dict):
        raise ConfigError("production", "missing or not an object")
    for key in prod_raw:
        if key not in ("A", "a", "rho", "B"):
            raise ConfigError(f"production.{key}", "unknown field")
    prod_vals = {k: _number(prod_raw, k, "production.") for k in ("A", "a", "rho")}
    prod_vals["B"] = _number(prod_raw, "B", "production.") if "B" in prod_raw else 0.0
    solver_raw = raw.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise ConfigError("solver", "not an object")
    allowed = {f.name for f in fields(SolverSettings)}
    solver_vals = {}
    for key in solver_raw:
        if key not in allowed:
            raise ConfigError(f"solver.{key}", "unknown field")
        solver_vals[key] = _number(solver_raw, key, "solver.")
        if key in ("grid_points", "max_iter", "window"):
            if solver_vals[key] != int(solver_vals[key]):
                raise ConfigError(f"solver.{key}", "expected an integer")
            solver_vals[key] = int(solver_vals[key])
    reference = raw.get("reference", {})
    if not isinstance(reference, dict):
        raise ConfigError("reference", "not an object")
    for key in reference:
        _number(reference, key, "reference.")

    def build(path, ctor, **kw):
        try:
            return ctor(**kw)
        except WarinessError as exc:
            raise ConfigError(path, str(exc)) from None

    prefs = build("beta/gamma", Preferences, beta=beta, gamma=gamma)
    prod = build("production", ProductionSpec, **prod_vals)
    solver = build("solver", SolverSettings, **solver_vals)
    econ = build("n", EconomyConfig, n=n, prefs=prefs, production=prod, utility=LogUtility(),
                 solver=solver)
    return econ, dict(reference)


def load_config(path: str) -> tuple[EconomyConfig, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, f"cannot read: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return parse_config(raw)


def resolved_config(econ: EconomyConfig, reference: dict) -> dict:
    p = econ.production
    out = {"n": econ.n, "beta": econ.prefs.beta, "gamma": econ.prefs.gamma,
           "utility": econ.utility.kind,
           "production": {"A": p.A, "a": p.a, "rho": p.rho, "B": p.B},
           "solver": asdict(econ.solver)}
    if reference:
        out["reference"] = reference
    return out


@dataclass
class RunManifest:
    command: str
    config: dict
    solver: dict
    version: str
    duration_s: float
    arguments: dict

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True)


# -- output helpers ----------------------------------------------------------------

def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# -- commands ------------------------------------------------------------------------

def cmd_check(econ: EconomyConfig, reference: dict, args) -> tuple[str, int]:
    prefs = econ.prefs
    hc = check_h_increasing(econ.production)
    un = check_uniqueness(econ)
    lock = check_regime_lock(econ)
    col = check_collapse(econ)
    r_low, r_high = regime_thresholds(prefs)
    rows = [
        ["h_increasing", hc.holds,
         f"criterion={fmt(hc.criterion)};direct_min={fmt(hc.direct_min)};"
         f"x_c={fmt(hc.x_c)};routes_agree={fmt(hc.agree)}"],
        ["uniqueness", un.holds,
         f"marginal_decreasing={fmt(un.marginal_decreasing)};h_increasing={fmt(un.h_increasing)};"
         f"witness={NA if un.witness is None else fmt(un.witness[0]) + '..' + fmt(un.witness[1])}"],
        ["regime_lock", lock.value,
         f"r_low={fmt(r_low)};r_high={fmt(r_high)};degenerate_band={fmt(r_low == r_high)}"],
        ["collapse", col.collapses,
         f"case={fmt(col.case)};M1={fmt(col.m_values.M1)};M2={fmt(col.m_values.M2)};"
         f"M3={fmt(col.m_values.M3)};uniqueness_premise={fmt(col.uniqueness_premise)}"],
    ]
    for label, b in (("assum_poverty_beta1", prefs.beta1), ("assum_poverty_beta2", prefs.beta2)):
        if econ.production.rho < 0:
            ap = check_assum_poverty(econ, b)
            rows.append([label, ap.holds,
                         f"nonempty={fmt(ap.nonempty)};monotone_in_b={fmt(ap.monotone_in_b)};"
                         f"small_k_ratio={fmt(ap.small_k_ratio)}"])
        else:
            rows.append([label, None, "requires rho<0"])
    if args.format == "json":
        return _json([{"check": r[0], "result": r[1], "detail": r[2]} for r in rows]), 0
    return _csv(rows, ["check", "result", "detail"]), 0


def _first_k0(args) -> float:
    if not args.k0:
        raise ConfigError("--k0", "required for this command")
    return args.k0[0]


def cmd_step(econ: EconomyConfig, reference: dict, args) -> tuple[str, int]:
    k0 = _first_k0(args)
    sols = step_solutions(econ, k0)
    print(f"{len(sols)} solution(s) for k_t={fmt(k0)}", file=sys.stderr)
    if args.format == "json":
        return _json({"k_t": k0, "count": len(sols),
                      "solutions": [{"k_next": s.k_next, "regime": int(s.regime),
                                     "residual": s.residual} for s in sols]}), 0
    rows = [[s.k_next, int(s.regime), s.residual] for s in sols]
    return _csv(rows, ["k_next", "regime", "residual"]), 0


def cmd_simulate(econ: EconomyConfig, reference: dict, args) -> tuple[str, int]:
    if not args.k0:
        raise ConfigError("--k0", "required for this command")
    policy = parse_policy(args.policy)
    T = args.T if args.T is not None else econ.solver.max_iter
    trajs = [(k0, simulate(econ, k0, policy, T)) for k0 in args.k0]
    status = 1 if any(t.limit.kind is LimitKind.NO_STEP for _, t in trajs) else 0
    summary = [[k0, t.limit.kind.value, t.limit.k_star, len(t.path) - 1, policy_name(policy)]
               for k0, t in trajs]
    if args.format == "json":
        return _json([{"k0": k0, "policy": policy_name(policy),
                       "limit": t.limit.kind.value, "k_star": t.limit.k_star,
                       "path": [{"t": s, "k": k, "regime": int(r)} for s, k, r in t.path]}
                      for k0, t in trajs]), status
    rows = [[k0, s, k, int(r)] for k0, t in trajs for s, k, r in t.path]
    text = _csv(rows, ["k0", "t", "k", "regime"])
    text += "\n" + _csv(summary, ["k0", "limit", "k_star", "steps", "policy"])
    return text, status


def cmd_trap(econ: EconomyConfig, reference: dict, args) -> tuple[str, int]:
    ref = reference.get("x_poverty")
    rep = poverty_thresholds(econ, reference=ref)
    checks = verify_trap(econ, rep, parse_policy(args.policy))
    if args.format == "json":
        return _json({
            "case": rep.case_label, "regime_lock": rep.regime_lock.value,
            "verdict": rep.verdict, "trap": rep.trap,
            "upper_steady_state": rep.upper_steady_state,
            "thresholds": rep.thresholds, "omega_bound": rep.omega_bound,
            "collapse_case": rep.collapse.case,
            "x_poverty_audit": rep.audit,
            "verification": [asdict(c) for c in checks]}), 0
    rows = [["case", rep.case_label, NA], ["regime_lock", rep.regime_lock.value, NA],
            ["verdict", rep.verdict, NA], ["trap", rep.trap, NA],
            ["upper_steady_state", rep.upper_steady_state, NA],
            ["collapse_case", rep.collapse.case, NA], ["omega_bound", rep.omega_bound, NA]]
    for name in sorted(rep.thresholds):
        rows.append([f"threshold.{name}", rep.thresholds[name], NA])
    for a in rep.audit:
        note = ("no reference" if a["reference"] is None else
                f"reference={fmt(a['reference'])};raw={fmt(a['raw'])};"
                f"raw_agrees={fmt(a['raw_agrees'])};"
                f"{'agree' if a['agrees'] else 'disagree'}")
        rows.append([f"x_poverty_{a['reading']}", a["value"], note])
    for c in checks:
        rows.append([f"verify.k0={fmt(c.k0)}", c.observed, f"expected={c.expected};ok={fmt(c.ok)}"])
    return _csv(rows, ["item", "value", "note"]), 0


def cmd_sweep(econ: EconomyConfig, reference: dict, args) -> tuple[str, int]:
    if args.param not in _SWEEP_PARAMS:
        raise ConfigError("--param", f"expected one of {', '.join(_SWEEP_PARAMS)}")
    if args.from_ is None or args.to is None or args.steps is None:
        raise ConfigError("--from/--to/--steps", "all three are required for sweep")
    if args.steps < 1:
        raise ConfigError("--steps", "must be >= 1")
    targets = [t.strip() for t in (args.target or "").split(",") if t.strip()]
    if not targets:
        raise ConfigError("--target", "required for sweep")
    for t in targets:
        if t not in THRESHOLD_NAMES:
            raise ConfigError("--target", f"unknown threshold {t!r}")
    values = np.linspace(args.from_, args.to, args.steps)
    records = []
    for v in values:
        row: list = [float(v)]
        notes = []
        try:
            e = econ.with_param(args.param, float(v))
        except WarinessError as exc:
            e = None
            notes.append(f"invalid: {exc}")
        for t in targets:
            x = None
            if e is not None:
                try:
                    x = threshold_value(e, t)
                except WarinessError as exc:
                    notes.append(f"{t}: {exc}")
                if x is None and not notes:
                    notes.append(f"{t} absent")
            row.append(x)
        row.append("ok" if all(x is not None for x in row[1:]) else "missing")
        row.append("; ".join(notes) if notes else None)
        records.append(row)
    header = [args.param] + targets + ["status", "note"]
    if args.format == "json":
        return _json([dict(zip(header, r)) for r in records]), 0
    return _csv(records, header), 0


COMMANDS = {"check": cmd_check, "step": cmd_step, "simulate": cmd_simulate,
            "trap": cmd_trap, "sweep": cmd_sweep}


def _k0_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or any(not (math.isfinite(v) and v > 0) for v in vals):
        raise argparse.ArgumentTypeError("k0 values must be finite and > 0")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wariness", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"),
                       default="json" if name == "trap" else "csv")
        p.add_argument("--policy", choices=_POLICIES, default="nearest")
        if name in ("step", "simulate"):
            p.add_argument("--k0", type=_k0_list, metavar="V[,V...]")
        if name == "simulate":
            p.add_argument("--T", type=int, default=None, help="horizon (default max_iter)")
        if name == "sweep":
            p.add_argument("--param")
            p.add_argument("--from", dest="from_", type=float)
            p.add_argument("--to", type=float)
            p.add_argument("--steps", type=int, help="number of grid points, endpoints included")
            p.add_argument("--target", help="threshold name(s), comma-separated")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        econ, reference = load_config(args.config)
        text, status = COMMANDS[args.command](econ, reference, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WarinessError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    manifest = RunManifest(args.command, resolved_config(econ, reference),
                           asdict(econ.solver), __version__,
                           round(time.perf_counter() - start, 6),
                           {k: v for k, v in vars(args).items() if k not in ("command",)})
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(manifest.to_json() + "\n")
    else:
        sys.stdout.write(text)
        print(manifest.to_json(), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
