"""qleak command line: compute leakage, sweep depolarizing noise, verify
structural properties.

Exit codes: 0 success, 2 invalid input or schema, 3 numerical failure,
4 unsupported configuration (e.g. per-qubit noise on a non-power-of-two
dimension), 5 property-check failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble_io import (
    builtin_names,
    load_channel,
    matrix_to_pairs,
    pairs_to_matrix,
    resolve_ensemble,
)
from .exceptions import (
    DegenerateDrawError,
    DimensionOverflowError,
    EnsembleConfigError,
    ImaginaryLeakError,
    InvalidChannelError,
    InvalidProbabilityError,
    NotPsdError,
    NumericalFailureError,
    QLeakError,
    UnsupportedDimensionError,
)
from .leakage import (
    AscentConfig,
    PropertyCheck,
    compute_leakage,
    noisy_leakage_global,
    noisy_leakage_local_bound,
    verify_properties,
)
from .states import Povm, depolarizing_global, depolarizing_local

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_UNSUPPORTED = 4
EXIT_PROPERTY = 5

# Hidden hook for failure-path testing: path to a JSON file whose
# {"elements": [...]} matrices replace the optimizer's POVM in `verify`.
INJECT_POVM_ENV = "QLEAK_INJECT_POVM"


def _ascent_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--mu", type=float, default=0.1, help="ascent step size")
    parser.add_argument("--eps", type=float, default=1e-9,
                        help="absolute objective-change termination threshold")
    parser.add_argument("--max-iters", type=int, default=10000)
    parser.add_argument("--restarts", type=int, default=10)
    parser.add_argument("--povm-size", type=int, default=None,
                        help="measurement outcomes per restart (default dim^2)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-backtracking", action="store_true",
                        help="disable step halving on objective decrease")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="restart-level parallelism")


def _config_from_args(args) -> AscentConfig:
    return AscentConfig(
        mu=args.mu,
        eps=args.eps,
        max_iters=args.max_iters,
        restarts=args.restarts,
        seed=args.seed,
        povm_size=args.povm_size,
        backtracking=not args.no_backtracking,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qleak",
        description="Maximal quantum leakage of classical-quantum ensembles.",
    )
    parser.add_argument("--version", action="version", version=f"qleak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser(
        "compute", help="optimize the leakage of one ensemble",
        description="Run subgradient ascent with restarts and write the "
                    "result JSON plus one convergence CSV per restart.")
    compute.add_argument("--ensemble", required=True,
                         help=f"path to an ensemble JSON file, or one of "
                              f"{', '.join('builtin:' + n for n in builtin_names())}")
    _ascent_flags(compute)
    compute.add_argument("--out", required=True, help="output directory")

    sweep = sub.add_parser(
        "noise-sweep", help="leakage vs depolarizing noise strength",
        description="Optimize the leakage of the noise-mapped ensemble over "
                    "a grid of probability parameters and compare with the "
                    "closed-form transfer.")
    sweep.add_argument("--ensemble", required=True)
    sweep.add_argument("--channel", required=True, choices=("global", "local"))
    sweep.add_argument("--p-start", type=float, default=0.0)
    sweep.add_argument("--p-end", type=float, default=1.0)
    sweep.add_argument("--p-steps", type=int, default=21)
    _ascent_flags(sweep)
    sweep.add_argument("--out", required=True, help="output directory")

    verify = sub.add_parser(
        "verify", help="run the structural property checks",
        description="Check nonnegativity, ceiling, independence, "
                    "measurement dominance, data processing and noise "
                    "transfer on one ensemble; exit 5 on any failure.")
    verify.add_argument("--ensemble", required=True)
    verify.add_argument("--channel-file", default=None,
                        help="JSON channel used for the data-processing check")
    _ascent_flags(verify)
    verify.add_argument("--out", default=None,
                        help="optional directory for the JSON report")
    return parser


def _manifest(command: str, cfg: AscentConfig, resolved_povm_size: int,
              input_path: str, input_sha256: str, wall_seconds: float,
              extra: dict | None = None) -> dict:
    config = dataclasses.asdict(cfg)
    config["povm_size"] = resolved_povm_size
    config["backtracking"] = cfg.backtracking
    if extra:
        config.update(extra)
    return {
        "command": command,
        "config": config,
        "input_path": input_path,
        "input_sha256": input_sha256,
        "tool_version": __version__,
        "timings": {
            "started_utc": datetime.now(timezone.utc).isoformat(),
            "wall_seconds": round(wall_seconds, 6),
        },
    }


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_trace_csv(path: Path, trace, manifest: dict):
    with path.open("w", newline="") as fh:
        fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective", "leakage_bits", "step_size"])
        writer.writerows(trace.rows())


def _cmd_compute(args) -> int:
    ensemble, digest = resolve_ensemble(args.ensemble)
    cfg = _config_from_args(args)
    started = time.perf_counter()
    report = compute_leakage(ensemble, cfg, threads=max(1, args.threads))
    wall = time.perf_counter() - started

    manifest = _manifest("compute", cfg, cfg.resolved_povm_size(ensemble.dim),
                         args.ensemble, digest, wall)
    best_trace = report.traces[report.best_restart]
    result = {
        "leakage_bits": report.leakage_bits,
        "objective": best_trace.objectives[-1],
        "ceiling_bits": report.ceiling_bits,
        "best_restart": report.best_restart,
        "restart_leakages": report.restart_leakages,
        "converged": report.converged_flags,
        "optimal_povm": [matrix_to_pairs(el) for el in report.optimal_povm],
        "manifest": manifest,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "result.json", result)
    for i, trace in enumerate(report.traces):
        _write_trace_csv(out / f"trace_restart_{i:02d}.csv", trace, manifest)
    converged = sum(report.converged_flags)
    print(f"leakage_bits={report.leakage_bits:.6f} "
          f"(ceiling {report.ceiling_bits:.6f}), "
          f"{converged}/{len(report.traces)} restarts converged "
          f"-> {out / 'result.json'}")
    return EXIT_OK


def _cmd_noise_sweep(args) -> int:
    ensemble, digest = resolve_ensemble(args.ensemble)
    cfg = _config_from_args(args)
    if not (0.0 <= args.p_start <= args.p_end <= 1.0):
        raise EnsembleConfigError(
            f"invalid p grid: need 0 <= p_start <= p_end <= 1, "
            f"got [{args.p_start}, {args.p_end}]"
        )
    if args.p_steps < 2:
        raise EnsembleConfigError("p grid needs at least 2 points")
    qubits = None
    if args.channel == "local":
        qubits = int(round(math.log2(ensemble.dim)))
        if 2 ** qubits != ensemble.dim:
            raise UnsupportedDimensionError(
                f"local channel needs a power-of-two dimension, got {ensemble.dim}"
            )

    started = time.perf_counter()
    threads = max(1, args.threads)
    q0 = compute_leakage(ensemble, cfg, threads=threads).leakage_bits
    grid = np.linspace(args.p_start, args.p_end, args.p_steps)
    rows = []
    for p in grid:
        p = float(p)
        if args.channel == "global":
            channel = depolarizing_global(p, ensemble.dim)
            formula = noisy_leakage_global(q0, p)
        else:
            channel = depolarizing_local(p, qubits)
            formula = noisy_leakage_local_bound(q0, p, qubits)
        direct = compute_leakage(ensemble.transform(channel), cfg,
                                 threads=threads).leakage_bits
        ratio = direct / q0 if q0 > 1e-12 else 1.0
        rows.append((p, direct, formula, ratio))
    wall = time.perf_counter() - started

    manifest = _manifest(
        "noise-sweep", cfg, cfg.resolved_povm_size(ensemble.dim),
        args.ensemble, digest, wall,
        extra={"channel": args.channel, "p_start": args.p_start,
               "p_end": args.p_end, "p_steps": args.p_steps,
               "noiseless_leakage_bits": q0},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "noise_sweep.csv"
    with path.open("w", newline="") as fh:
        fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["p", "direct_leakage_bits", "formula_bits", "ratio"])
        writer.writerows(rows)
    print(f"noiseless leakage_bits={q0:.6f}, {len(rows)} grid points -> {path}")
    return EXIT_OK


def _load_injected_povm(path: str) -> list[np.ndarray]:
    cfg = json.loads(Path(path).read_text())
    return [pairs_to_matrix(el, f"injected element {i}")
            for i, el in enumerate(cfg.get("elements", []))]


def _cmd_verify(args) -> int:
    ensemble, digest = resolve_ensemble(args.ensemble)
    cfg = _config_from_args(args)
    channel = None
    channel_sha = None
    if args.channel_file:
        channel = load_channel(args.channel_file, ensemble.dim)
        channel_sha = hashlib.sha256(Path(args.channel_file).read_bytes()).hexdigest()

    probe = None
    injected_failure = None
    inject_path = os.environ.get(INJECT_POVM_ENV)
    if inject_path:
        try:
            probe = Povm(_load_injected_povm(inject_path))
        except (QLeakError, OSError, json.JSONDecodeError) as exc:
            injected_failure = PropertyCheck(
                "injected_povm_valid", False, f"injected POVM rejected: {exc}")

    started = time.perf_counter()
    report = verify_properties(ensemble, cfg, channel=channel,
                               threads=max(1, args.threads), probe_povm=probe)
    wall = time.perf_counter() - started
    if injected_failure is not None:
        report.checks.append(injected_failure)

    width = max(len(c.name) for c in report.checks)
    for check in report.checks:
        status = "SKIP" if check.skipped else ("PASS" if check.passed else "FAIL")
        print(f"{check.name:<{width}}  {status:<4}  {check.detail}")
    verdict = "all checks passed" if report.all_passed else "FAILURES detected"
    print(verdict)

    if args.out:
        manifest = _manifest(
            "verify", cfg, cfg.resolved_povm_size(ensemble.dim),
            args.ensemble, digest, wall,
            extra={"channel_file": args.channel_file,
                   "channel_sha256": channel_sha},
        )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload = report.as_dict()
        payload["manifest"] = manifest
        _write_json(out / "verify_report.json", payload)
    return EXIT_OK if report.all_passed else EXIT_PROPERTY


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (UnsupportedDimensionError, DimensionOverflowError)):
        return EXIT_UNSUPPORTED
    if isinstance(exc, (NumericalFailureError, NotPsdError, DegenerateDrawError,
                        ImaginaryLeakError, InvalidChannelError,
                        np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (EnsembleConfigError, InvalidProbabilityError, QLeakError,
                        ValueError, OSError)):
        return EXIT_INPUT
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "compute": _cmd_compute,
        "noise-sweep": _cmd_noise_sweep,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:  # noqa: BLE001 - mapped to the exit-code contract
        code = _exit_code(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
