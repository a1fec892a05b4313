"""Command-line front end.

Subcommands: ``fit``, ``monitor``, ``critical-values``, ``table2``, ``table4``
and ``simulate``. ``monitor`` exits with 0 on detection, 1 without one and 2
on usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import harness
from .arma import ArmaModel, residuals, simulate_path, validate_model
from .delay import BreakSpec
from .detectors import MonitorConfig, Scheme, Target, run_monitor
from .estimation import FittedModel, fit, select_order
from .exceptions import ArmaMonitorError, ParseError
from .limits import MCConfig, build_table, critical_value

DEFAULT_SEED = 20130701
EXIT_DETECTED, EXIT_NONE, EXIT_ERROR = 0, 1, 2


# -- input files ----------------------------------------------------------

@dataclass(frozen=True)
class SeriesFile:
    values: np.ndarray
    timestamps: list | None = None
    transform: str = "none"


def parse_series(text: str, transform: str = "none") -> SeriesFile:
    """One value per line, or ``timestamp,value``; ``#`` starts a comment line."""
    values, stamps = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) > 2:
            raise ParseError(f"expected 'value' or 'timestamp,value', got {line!r}", lineno)
        try:
            val = float(parts[-1])
        except ValueError:
            raise ParseError(f"not a number: {parts[-1]!r}", lineno) from None
        if not math.isfinite(val):
            raise ParseError(f"non-finite value {parts[-1]!r}", lineno)
        values.append(val)
        stamps.append(parts[0] if len(parts) == 2 else None)
    y = np.array(values)
    has_stamps = any(s is not None for s in stamps)
    transform = transform.lower()
    if transform == "logdiff":
        if np.any(y <= 0):
            raise ParseError("logdiff needs strictly positive values")
        y = np.diff(np.log(y))
        stamps = stamps[1:]
    elif transform != "none":
        raise ParseError(f"unknown transform {transform!r}")
    return SeriesFile(y, stamps if has_stamps else None, transform)


def read_series(path, transform: str = "none") -> SeriesFile:
    return parse_series(Path(path).read_text(), transform)


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` comments."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _floats(text) -> tuple:
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


# -- model files ----------------------------------------------------------

def model_report(fitted: FittedModel, presample: int, transform: str) -> dict:
    se = None if fitted.standard_errors is None else [float(v) for v in fitted.standard_errors]
    return {"mu": fitted.model.mu, "phi": list(fitted.model.phi),
            "theta": list(fitted.model.theta), "sigma": fitted.model.sigma,
            "sigma2": fitted.sigma_sq_hat, "eta2": fitted.eta_sq_hat, "m": fitted.m,
            "presample": presample, "aic": fitted.aic, "standard_errors": se,
            "transform": transform}


def fitted_from_report(report: dict, series: np.ndarray) -> FittedModel:
    """Rebuild the training state of a saved fit from the full series."""
    model = validate_model(report["mu"], report["phi"], report["theta"], report["sigma"])
    P, m = int(report["presample"]), int(report["m"])
    train = series[: P + m]
    if train.size < P + m:
        raise ArmaMonitorError("series shorter than the training window of the model")
    e = residuals(model, train, P)
    se = report.get("standard_errors")
    return FittedModel(model, float(report["eta2"]), m, float(report["aic"]),
                       None if se is None else np.array(se, dtype=float), e, train)


# -- commands -----------------------------------------------------------------

def cmd_fit(args) -> int:
    series = read_series(args.input, args.transform).values
    if args.auto:
        p, q = select_order(series[: args.m + args.p_max], args.p_max, args.q_max)
    else:
        p, q = args.p, args.q
    if p + args.m > series.size:
        raise ArmaMonitorError(f"m + p = {p + args.m} exceeds the series length {series.size}")
    fitted = fit(series[: p + args.m], p, q)
    report = model_report(fitted, p, args.transform)
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(f"ARMA({p},{q})  m={fitted.m}  mu={fitted.model.mu:.6g}  sigma^2={fitted.sigma_sq_hat:.6g}"
          f"  eta^2={fitted.eta_sq_hat:.6g}  AIC={fitted.aic:.2f}")
    names = ["mu"] + [f"phi{j}" for j in range(1, p + 1)] + [f"theta{j}" for j in range(1, q + 1)]
    vals = [fitted.model.mu, *fitted.model.phi, *fitted.model.theta]
    for name, v, s in zip(names, vals, fitted.standard_errors):
        print(f"  {name:<8s} {v: .6g} ({s:.3g})")
    print(f"  monitored values: {series.size - p - fitted.m}")
    return 0


def cmd_monitor(args) -> int:
    series = read_series(args.input, args.transform).values
    report = json.loads(Path(args.model).read_text())
    fitted = fitted_from_report(report, series)
    P = int(report["presample"])
    stream = series[P + fitted.m:]
    if stream.size == 0:
        raise ArmaMonitorError("nothing to monitor after the training window")
    c = args.threshold if args.threshold is not None else critical_value(
        args.gamma, args.alpha, args.scheme)
    config = MonitorConfig(args.gamma, args.alpha, args.scheme, args.target, fitted.m, c,
                           args.horizon)
    res = run_monitor(fitted, stream, config)
    offset = P + fitted.m
    if res.stopped:
        print(f"detected at lag {res.stop_index} (observation {offset + res.stop_index})")
        print(f"  detector {res.detector_value_at_stop:.6g} >= boundary {res.boundary_value_at_stop:.6g}")
    else:
        print(f"{res.status.value} (observed {res.lags_observed} lags)")
    payload = res.to_dict()
    payload["absolute_index"] = None if res.stop_index is None else offset + res.stop_index
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
    else:
        print(json.dumps(payload))
    return EXIT_DETECTED if res.stopped else EXIT_NONE


def emit_table(rows: list[dict], fmt: str, out=None) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, keys, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        cells = [[_fmt(r[k]) for k in keys] for r in rows]
        widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
        lines = ["  ".join(k.rjust(w) for k, w in zip(keys, widths))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
        text = "\n".join(lines) + "\n"
    (out or sys.stdout).write(text)
    return text


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4f}" if abs(v) < 10 else f"{v:.1f}"
    return str(v)


def _settings(args, keys: dict) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, conv in keys.items():
        val = getattr(args, key, None)
        if val is None and key in cfg:
            val = conv(cfg[key])
        out[key] = val
    return out


def cmd_critical_values(args) -> int:
    s = _settings(args, {"gammas": _floats, "alphas": _floats, "R": int, "G": int, "seed": int,
                         "n_jobs": int})
    config = MCConfig(G=s["G"] or 10_000, R=s["R"] or 100_000, seed=s["seed"] or DEFAULT_SEED)
    gammas = s["gammas"] or (0.0, 0.25, 0.49)
    alphas = s["alphas"] or (0.05, 0.10)
    table = build_table(gammas, alphas, config=config, n_jobs=s["n_jobs"] or 1)
    if args.out:
        table.save(args.out)
    rows = [{"gamma": g, "alpha": a, "scheme": sc.value, "c": c, "R": config.R,
             "G": config.G, "seed": config.seed} for g, a, sc, c in table.rows()]
    emit_table(rows, args.format)
    return 0


def _run_design(specs: dict, args) -> int:
    rows = []
    for label, spec in specs.items():
        summary = harness.run_experiment(spec, n_jobs=args.n_jobs or 1)
        for row in summary.rows():
            rows.append({"case": label, **row})
    emit_table(rows, args.format)
    return 0


def _design_kwargs(args) -> dict:
    s = _settings(args, {"replications": int, "seed": int, "gammas": _floats, "alpha": float,
                         "horizon": int, "n_jobs": int})
    args.n_jobs = s.pop("n_jobs")
    return {k: v for k, v in s.items() if v is not None}


def cmd_table2(args) -> int:
    kw = _design_kwargs(args)
    cases = [c.strip() for c in args.cases.split(",")]
    return _run_design({c: harness.eeg_spec(c, **kw) for c in cases}, args)


def cmd_table4(args) -> int:
    kw = _design_kwargs(args)
    orders = [tuple(int(v) for v in o.split(",")) for o in args.orders.split(";")]
    return _run_design({f"ARMA({p},{q})": harness.ibm_spec((p, q), **kw) for p, q in orders},
                       args)


def cmd_simulate(args) -> int:
    model = validate_model(args.mu, _floats(args.phi), _floats(args.theta), args.sigma)
    rng = np.random.default_rng(args.seed)
    if args.break_at is None:
        y = simulate_path(model, args.n, rng=rng, family=args.family)
    else:
        if not 2 <= args.break_at <= args.n:
            raise ArmaMonitorError("--break-at must lie in [2, n]")
        # one "training" value, so monitoring lag k* is series position k* + 1
        brk = BreakSpec(args.break_kind, args.break_at - 1, args.delta)
        spec = harness.ExperimentSpec(model, m=1, brk=brk, innovations=args.family,
                                      horizon=args.n - 1, fit_order=(0, 0))
        y = harness.simulate_replication(spec, rng)
    text = "\n".join(repr(float(v)) for v in y) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="armamonitor", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an ARMA model to the training window")
    p.add_argument("input")
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--auto", action="store_true", help="select (p, q) by AIC")
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--q-max", type=int, default=2)
    p.add_argument("--m", type=int, required=True, help="training size (after the presample)")
    p.add_argument("--transform", choices=["none", "logdiff"], default="none")
    p.add_argument("--out", help="model report file (JSON)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("monitor", help="monitor the observations after the training window")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="page")
    p.add_argument("--target", choices=[t.value for t in Target], default="general")
    p.add_argument("--horizon", type=int)
    p.add_argument("--threshold", type=float, help="override the critical value")
    p.add_argument("--transform", choices=["none", "logdiff"], default="none")
    p.add_argument("--json", help="write the machine-readable report here")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("critical-values", help="simulate critical values")
    p.add_argument("--config")
    p.add_argument("--gammas", type=_floats)
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--R", type=int)
    p.add_argument("--G", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--out", help="write a cache file")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_critical_values)

    for name, func, extra in (("table2", cmd_table2, ("--cases", "TP1,TP2")),
                              ("table4", cmd_table4, ("--orders", "2,2;4,0"))):
        p = sub.add_parser(name, help=f"reproduce the simulated columns of {name}")
        p.add_argument("--config")
        p.add_argument("--replications", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--gammas", type=_floats)
        p.add_argument("--alpha", type=float)
        p.add_argument("--horizon", type=int)
        p.add_argument("--n-jobs", type=int)
        p.add_argument(extra[0], default=extra[1])
        p.add_argument("--format", choices=["text", "csv"], default="text")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="write a simulated series")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--phi", default="")
    p.add_argument("--theta", default="")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=["gaussian", "laplace"], default="gaussian")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--break-at", type=int, help="1-based index of the first changed value")
    p.add_argument("--break-kind", choices=["mean", "scale"], default="scale")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ArmaMonitorError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
