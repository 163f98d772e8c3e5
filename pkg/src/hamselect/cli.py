"""Command-line front end: ``hamselect {bounds,risk,sweep,verify}``.

Exit codes: 0 success, 1 runtime or verification failure, 2 configuration
error. Output is written only after the whole computation succeeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import bounds, dist, risklab, verify
from ._solve import SolverError
from .bounds import TwoPointModel
from .dist import DomainError

BOUNDS_COLUMNS = ("d", "s", "family", "a", "a2", "sigma", "nu", "k", "psi_sep", "t1", "t2",
                  "psi_t1", "psi_t2", "theorem8_lower", "theorem8_applicable",
                  "block_lower", "exact_recovery_blocked")
RESULT_COLUMNS = risklab.CELL_FIELDS + risklab.RESULT_FIELDS
DEFAULT_REPS = 10_000
DEFAULT_SEED = 0


class ConfigError(Exception):
    pass


def load_schema(name: str) -> dict:
    text = resources.files("hamselect").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _validate(obj, schema_name):
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"{schema_name}: {where}: {e.message}")


def _read_config(path, schema_name):
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    _validate(cfg, schema_name)
    return cfg


def _sigma(cfg):
    return math.sqrt(cfg["sigma2"]) if "sigma2" in cfg else float(cfg.get("sigma", 1.0))


def _spec_from(cfg) -> dist.DistributionSpec:
    a = math.sqrt(cfg["a2"]) if "a2" in cfg else float(cfg["a"])
    sig = _sigma(cfg)
    fam = cfg["family"]
    if fam == "gaussian":
        return dist.gaussian(a, sig)
    if fam == "subbotin":
        return dist.subbotin(float(cfg.get("nu", 2.0)), a, sig)
    return dist.chi_square(int(cfg.get("k", 1)), a, sigma=sig)


def _model_from(cfg) -> TwoPointModel:
    try:
        return TwoPointModel(_spec_from(cfg), cfg["d"], cfg["s"],
                             bool(cfg.get("diagnostic", False)))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _model_fields(model: TwoPointModel, cfg=None) -> dict:
    spec = model.spec
    a2 = float(cfg["a2"]) if cfg and "a2" in cfg else spec.a ** 2
    return {"family": spec.kind, "d": model.d, "s": model.s,
            "k": spec.k if spec.kind == "chi2" else None,
            "nu": spec.nu if spec.kind == "subbotin" else None,
            "sigma": spec.sigma, "a": spec.a, "a2": a2}


# -- emission ----------------------------------------------------------------

def _clean(v):
    if isinstance(v, (np.floating, float)):
        return None if not math.isfinite(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows, columns, fmt) -> str:
    rows = [{c: _clean(r.get(c)) for c in columns} for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- subcommands -----------------------------------------------------------------

def run_bounds(args) -> int:
    cfg = _read_config(args.config, "bounds_config")
    entries = cfg.get("models", [cfg])
    models = [_model_from(m) for m in entries]
    rows = []
    for model, entry in zip(models, entries):
        rep = bounds.bounds_report(model)
        rows.append({**_model_fields(model, entry), **rep.as_dict()})
    _emit(render(rows, BOUNDS_COLUMNS, args.format), args.out)
    return 0


def run_risk(args) -> int:
    cfg = _read_config(args.config, "risk_config")
    model = _model_from(cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED))
    reps = args.reps if args.reps is not None else int(cfg.get("reps", DEFAULT_REPS))
    kinds = tuple(cfg.get("risk_kinds", ["hamming"]))
    sels = []
    for name in cfg["selectors"]:
        if name == "threshold":
            if "lam" not in cfg:
                raise ConfigError("selector 'threshold' needs 'lam'")
            sels.append({"name": name, "lam": cfg["lam"]})
        else:
            sels.append(name)
    try:
        res = risklab.estimate_risks(model, sels, reps, seed, cfg.get("truth"), kinds=kinds,
                                     group=bool(cfg.get("group", False)), threads=args.threads)
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    base = _model_fields(model, cfg)
    rows = [{**base, "selector": sel, "risk_kind": kind, "mean": est.mean,
             "stderr": est.stderr, "reps": est.reps, "seed": seed, "error": None}
            for (sel, kind), est in res.items()]
    _emit(render(rows, RESULT_COLUMNS, args.format), args.out)
    return 0


def sweep_config_from(cfg, seed=None, reps=None) -> risklab.SweepConfig:
    unit = "a2" if "a2" in cfg else "a"
    try:
        return risklab.SweepConfig(
            family=cfg["family"], d=cfg["d"], s=cfg["s"], amplitudes=cfg[unit],
            amplitude_unit=unit, amplitude_mode=cfg.get("amplitude_mode", "absolute"),
            selectors=cfg["selectors"], risk_kinds=cfg.get("risk_kinds", ["hamming"]),
            reps=reps if reps is not None else int(cfg.get("reps", DEFAULT_REPS)),
            master_seed=seed if seed is not None else int(cfg.get("seed", DEFAULT_SEED)),
            nu=cfg.get("nu", [2.0]), k=cfg.get("k", [1]), sigma=_sigma(cfg),
            group=bool(cfg.get("group", False)))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def run_sweep(args) -> int:
    cfg = sweep_config_from(_read_config(args.config, "sweep_config"), args.seed, args.reps)
    rows = risklab.phase_transition_sweep(cfg, threads=args.threads)
    _emit(render(rows, RESULT_COLUMNS, args.format), args.out)
    return 0


def run_verify(args) -> int:
    names = verify.SUITES if args.suite == "all" else (args.suite,)
    reports = [verify.run_suite(n) for n in names]
    report = {"passed": all(r["passed"] for r in reports), "suites": reports}
    for r in reports:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['suite']}")
        for c in r["checks"]:
            print(f"    {'ok  ' if c['passed'] else 'FAIL'} {c['name']}  {json.dumps(c['detail'])}")
    text = json.dumps(report, indent=2) + "\n"
    if args.out is not None:
        _emit(text, args.out)
    return 0 if report["passed"] else 1


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamselect",
                                description="Support recovery selectors, risk bounds and "
                                            "Monte Carlo experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_mc=True):
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if with_mc:
            sp.add_argument("--seed", type=_u64, help="master seed (overrides config)")
            sp.add_argument("--reps", type=_positive, help="replications (overrides config)")
            sp.add_argument("--threads", type=_positive,
                            help="worker threads (default: $HAMSELECT_THREADS or 1)")

    common(sub.add_parser("bounds", help="deterministic risk bounds for one or more models"),
           with_mc=False)
    common(sub.add_parser("risk", help="Monte Carlo risk of selectors on one model"))
    common(sub.add_parser("sweep", help="factorial Monte Carlo sweep"))
    v = sub.add_parser("verify", help="run built-in property suites")
    v.add_argument("suite", choices=verify.SUITES + ("all",))
    v.add_argument("--out", help="write the JSON report here")
    return p


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


_COMMANDS = {"bounds": run_bounds, "risk": run_risk, "sweep": run_sweep, "verify": run_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, DomainError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
