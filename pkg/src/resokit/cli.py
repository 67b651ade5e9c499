"""Command-line entry point: resonance | selftest | evolve | normalform | report-data.

Exit codes: 0 on success, 1 on invariant failure, 2 on usage errors.
Identical (config, seed, version) reproduce bit-identical CSV outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_hash, dump_config, experiment_config, load_config
from .evolution import (
    DiagnosticsSeries,
    InstabilityError,
    integrate,
)
from .grid import ConfigurationError, save_snapshot
from .normalform import REPORT_HEADER, report_rows, run_normal_form
from .resonance import ALL_PHASES, PhaseSpec, check_null_identity, cloud_rows, resonant_sets
from .selftest import run_selftest

USAGE_ERROR = 2
INVARIANT_ERROR = 1


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(out: Path, subcommand: str, cfg: dict, seed: int,
                   outputs: list, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config_hash": config_hash(cfg),
        "code_version": __version__,
        "seed": seed,
        "outputs": sorted(str(p.name) for p in outputs),
        "wall_clock_s": round(time.time() - started, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (out / "config.txt").write_text(dump_config(cfg))


def cmd_resonance(cfg: dict, out: Path, seed: int, phases=None) -> int:
    started = time.time()
    outputs = []
    labels = phases or [p.label for p in ALL_PHASES]
    for label in labels:
        spec = PhaseSpec.from_label(label)
        n = int(cfg["resonance.quad_points"] if spec.arity == 2
                else cfg["resonance.cubic_points"])
        sets = resonant_sets(spec, box_radius=float(cfg["resonance.box_radius"]),
                             points_per_axis=n)
        coords = [f"x{i}" for i in range(spec.dim)]
        path = out / f"resonance_{label.replace('+', 'p').replace('-', 'm')}.csv"
        write_csv(path, coords + ["abs_phase", "abs_grad", "classification"],
                  cloud_rows(sets))
        outputs.append(path)
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((10_000, 6)) * 5.0
    res = check_null_identity(pts[:, 0:2], pts[:, 2:4], pts[:, 4:6])
    path = out / "identity_report.csv"
    write_csv(path, ["points", "max_residual"], [(len(pts), float(np.max(np.abs(res))))])
    outputs.append(path)
    write_manifest(out, "resonance", cfg, seed, outputs, started)
    return 0


def cmd_selftest(cfg: dict, out: Path, seed: int) -> int:
    started = time.time()
    ok, results = run_selftest(cfg, seed)
    path = out / "selftest.csv"
    write_csv(path, ["invariant", "ok", "detail"],
              [(name, int(good), detail.replace(",", ";")) for name, good, detail in results])
    for name, good, detail in results:
        print(f"[{'pass' if good else 'FAIL'}] {name}: {detail}")
    write_manifest(out, "selftest", cfg, seed, [path], started)
    return 0 if ok else INVARIANT_ERROR


def cmd_evolve(cfg: dict, out: Path, seed: int) -> int:
    started = time.time()
    run = experiment_config(cfg)
    try:
        traj = integrate(run)
    except InstabilityError as err:
        dump = out / "instability_dump.csv"
        write_csv(dump, ["t", "l2_f"], err.history)
        print(f"integration aborted: {err}", file=sys.stderr)
        write_manifest(out, "evolve", cfg, seed, [dump], started)
        return INVARIANT_ERROR
    diag_path = out / "diagnostics.csv"
    write_csv(diag_path, DiagnosticsSeries.HEADER, traj.diagnostics.rows())
    snap_path = out / "profile_final.npz"
    save_snapshot(snap_path, traj.fields[-1])
    write_manifest(out, "evolve", cfg, seed, [diag_path, snap_path], started)
    return 0


def cmd_normalform(cfg: dict, out: Path, seed: int) -> int:
    started = time.time()
    run = experiment_config(cfg)
    result = run_normal_form(run, cadence=int(cfg["normalform.cadence"]),
                             refine_steps=int(cfg["normalform.refine_steps"]),
                             delta_t=float(cfg["cutoffs.delta_t"]),
                             delta_s=float(cfg["cutoffs.delta_s"]))
    rows = report_rows(result)
    report_path = out / "norm_report.csv"
    write_csv(report_path, REPORT_HEADER, rows)
    resid_path = out / "residuals.csv"
    write_csv(resid_path, ["t", "residual_l2"],
              list(zip(result.times, result.residuals())))
    write_manifest(out, "normalform", cfg, seed, [report_path, resid_path], started)
    return 0


def cmd_report_data(cfg: dict, out: Path, seed: int) -> int:
    """Everything the figure layer consumes: resonant clouds plus matched
    baseline/contrast evolution runs and the norm report."""
    started = time.time()
    rc = cmd_resonance(cfg, out, seed, phases=["++", "-+"])
    if rc:
        return rc
    base_dir = out / "run_baseline"
    contrast_dir = out / "run_contrast"
    for sub, gamma in ((base_dir, 0j), (contrast_dir, 1 + 0j)):
        sub.mkdir(parents=True, exist_ok=True)
        sub_cfg = dict(cfg)
        sub_cfg["nl.gamma"] = gamma
        rc = cmd_evolve(sub_cfg, sub, seed)
        if rc:
            return rc
    nf_dir = out / "run_normalform"
    nf_dir.mkdir(parents=True, exist_ok=True)
    rc = cmd_normalform(cfg, nf_dir, seed)
    if rc:
        return rc
    write_manifest(out, "report-data", cfg, seed, [], started)
    return 0


COMMANDS = {
    "resonance": cmd_resonance,
    "selftest": cmd_selftest,
    "evolve": cmd_evolve,
    "normalform": cmd_normalform,
    "report-data": cmd_report_data,
}


def _apply_sweep_value(cfg: dict, key: str, raw: str) -> dict:
    from .config import _parse_value

    if key not in cfg:
        raise ConfigurationError(f"sweep key {key!r} is not a config key")
    new = dict(cfg)
    new[key] = _parse_value(raw)
    return new


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="resokit",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=str, default=None, help="config file path")
    parser.add_argument("--out", type=str, default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sweep", type=str, default=None,
                        help="KEY=V1,V2,... fan out independent runs")
    parser.add_argument("--phases", type=str, default=None,
                        help="comma list of phase labels for the resonance subcommand")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigurationError, OSError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return USAGE_ERROR

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    command = COMMANDS[args.subcommand]
    if args.subcommand == "resonance" and args.phases is not None:
        labels = [p.strip() for p in args.phases.split(",")]
        try:
            for label in labels:
                PhaseSpec.from_label(label)
        except ConfigurationError as err:
            print(f"usage error: {err}", file=sys.stderr)
            return USAGE_ERROR
        command = lambda cfg_, out_, seed_: cmd_resonance(cfg_, out_, seed_, phases=labels)

    try:
        if args.sweep is None:
            return command(cfg, out, args.seed)
        if "=" not in args.sweep:
            print("sweep must look like KEY=V1,V2,...", file=sys.stderr)
            return USAGE_ERROR
        key, values = args.sweep.split("=", 1)
        rc_total = 0
        for raw in values.split(","):
            sub_cfg = _apply_sweep_value(cfg, key.strip(), raw)
            sub_out = out / f"sweep_{key.strip().replace('.', '_')}_{raw.strip()}"
            sub_out.mkdir(parents=True, exist_ok=True)
            rc_total = max(rc_total, command(sub_cfg, sub_out, args.seed))
        return rc_total
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
