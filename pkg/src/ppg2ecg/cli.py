"""Command-line entry point.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 when the
input data cannot be processed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import _jsonio
from .config import PipelineConfig
from .errors import DataError, InvalidConfig, NumericalError
from .evaluation import (
    DEFAULT_GRID,
    evaluation_report,
    metrics_csv,
    metrics_for,
    parse_grid,
    profile_report,
    sweep_lx,
    sweep_report,
)
from .io import ingest, write_cycles, write_session, write_vector
from .preprocess import preprocess_session
from .regression import apply_model, config_for_model, load_model, run_on_cycles, save_model
from .synth import SynthConfig, generate

log = logging.getLogger("ppg2ecg")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_json(path):
    try:
        return _jsonio.load(path)
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None
    except ValueError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _pipeline_config(args) -> PipelineConfig:
    data = _load_json(args.config) if getattr(args, "config", None) else {}
    if args.scheme:
        data["scheme"] = args.scheme
    return PipelineConfig.from_dict(data)


def _ingest_all(dirs):
    sessions = [ingest(d) for d in dirs]
    ids = [s.session_id for s in sessions]
    if len(set(ids)) != len(ids):
        raise UsageError(f"duplicate session ids: {ids}")
    return sorted(sessions, key=lambda s: s.session_id)


def cmd_synth(args):
    data = dict(_load_json(args.config)) if args.config else {}
    n_sessions = int(data.pop("n_sessions", 1))
    if args.seed is not None:
        data["seed"] = args.seed
    base = SynthConfig.from_dict(data)
    out = Path(args.out)
    for i in range(n_sessions):
        if n_sessions == 1:
            cfg, target = base, out
        else:
            sid = f"{base.session_id}_{i:03d}"
            cfg, target = replace(base, seed=base.seed + i, session_id=sid), out / sid
        session, truth = generate(cfg)
        write_session(session, target, truth)
        log.info("wrote %s (%d samples, %d beats)", target, len(session), truth.n_cycles)


def cmd_preprocess(args):
    cfg = _pipeline_config(args)
    cps = preprocess_session(ingest(args.inp), cfg)
    write_cycles(cps, args.out)
    log.info("%d cycle pairs, cycle delay %d, sample shift %d", cps.n_cycles, cps.cycle_delay, cps.sample_shift)


def cmd_train(args):
    cfg = _pipeline_config(args)
    run = run_on_cycles(preprocess_session(ingest(args.inp), cfg), cfg)
    save_model(run.model, args.model)
    log.info("trained on %d cycles, %d held out", run.n_train, run.n_test)


def cmd_reconstruct(args):
    model = load_model(args.model)
    cfg = config_for_model(model, _pipeline_config(args))
    run = apply_model(preprocess_session(ingest(args.inp), cfg), model, cfg.train_fraction)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_vector(run.reconstruction, out / "y_hat.csv", "y_hat")
    write_vector(run.reference, out / "y_ref.csv", "y_ref")
    log.info("reconstructed %d test cycles", run.n_test)


def cmd_evaluate(args):
    cfg = _pipeline_config(args)
    model = load_model(args.model) if args.model else None
    if model is not None:
        cfg = config_for_model(model, cfg)
    metrics = []
    for s in _ingest_all(args.inp):
        cps = preprocess_session(s, cfg)
        run = apply_model(cps, model, cfg.train_fraction) if model else run_on_cycles(cps, cfg)
        m = metrics_for(run, s)
        log.info("%s: rrmse %.4f, rho %.4f", s.session_id, m.rrmse, m.rho)
        metrics.append(m)
    report = evaluation_report(metrics, cfg)
    report["seed"] = args.seed
    _jsonio.dump(report, args.report)
    Path(args.csv or Path(args.report).with_suffix(".csv")).write_text(metrics_csv(metrics), encoding="utf-8")


def cmd_sweep(args):
    cfg = _pipeline_config(args)
    grid = parse_grid(args.grid) if args.grid else list(DEFAULT_GRID)
    curves = {}
    for s in _ingest_all(args.inp):
        curves[s.session_id] = sweep_lx(s, grid, cfg)
        log.info("%s: swept %d values of L_x", s.session_id, len(grid))
    report = sweep_report(curves, cfg)
    report["seed"] = args.seed
    _jsonio.dump(report, args.report)
    flat = [m for pts in curves.values() for _, m in pts]
    Path(args.csv or Path(args.report).with_suffix(".csv")).write_text(metrics_csv(flat), encoding="utf-8")


def cmd_profile_test(args):
    report = _load_json(args.report)
    if report.get("kind") != "evaluation":
        raise UsageError(f"{args.report} is not an evaluation report")
    if args.scheme:
        report = dict(report, sessions=[s for s in report["sessions"] if s["scheme"] == args.scheme])
    result = profile_report(report)
    _jsonio.dump(result, args.out)
    for name in ("rrmse", "rho"):
        r = result[name]
        log.info("%s: R^2 %.4f, p %.4g (n=%d)", name, r["r_squared"], r["p_value"], r["n"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--scheme", choices=("SR", "R2R"), default=argparse.SUPPRESS,
                        help="segmentation scheme (overrides the config)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="only report errors")

    p = _Parser(prog="ppg2ecg", description="Reconstruct ECG waveforms from PPG.", parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("synth", cmd_synth, "generate synthetic session(s)")
    sp.add_argument("--config", help="synth config JSON (n_sessions > 1 writes subdirectories)")
    sp.add_argument("--out", required=True)

    sp = add("preprocess", cmd_preprocess, "write aligned, normalized cycle pairs")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)

    sp = add("train", cmd_train, "train a subject-dependent model")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--config")
    sp.add_argument("--model", required=True)

    sp = add("reconstruct", cmd_reconstruct, "reconstruct the held-out ECG cycles")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)

    sp = add("evaluate", cmd_evaluate, "per-session metrics and aggregates")
    sp.add_argument("--in", dest="inp", nargs="+", required=True)
    sp.add_argument("--config")
    sp.add_argument("--model", help="evaluate a stored model instead of retraining")
    sp.add_argument("--report", required=True)
    sp.add_argument("--csv", help="flat CSV path (default: report path with .csv suffix)")

    sp = add("sweep", cmd_sweep, "metrics as a function of L_x")
    sp.add_argument("--in", dest="inp", nargs="+", required=True)
    sp.add_argument("--grid", default="2:2:40", help="start:step:stop or a comma list")
    sp.add_argument("--config")
    sp.add_argument("--report", required=True)
    sp.add_argument("--csv")

    sp = add("profile-test", cmd_profile_test, "regress metrics on age and weight")
    sp.add_argument("--report", required=True, help="evaluation report JSON")
    sp.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("scheme", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(format="%(levelname)s: %(message)s", stream=sys.stderr)
    log.setLevel(logging.ERROR if args.quiet else logging.INFO)
    try:
        args.func(args)
    except (UsageError, InvalidConfig) as exc:
        print(f"ppg2ecg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, NumericalError, OSError) as exc:
        print(f"ppg2ecg: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
