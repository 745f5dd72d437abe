"""Command-line front end: reproducible preparation, scan, and report runs.

Commands
  fec prepare   write the circuit, target amplitudes and signatures for one
                angle pair
  fec scan      run an angle grid (exact, density-mode noisy, or sampled),
                write scan.csv / anchors.csv / ellipse.json / report.txt
  fec report    aggregate several scan directories into one comparison table
                plus gnuplot-ready plot data
  fec oracle    run the brute-force RDM oracle suite

Every run directory receives a config.json that reproduces the run via
--config.  The FEC_SEED environment variable overrides the configured seed.
Outputs never overwrite existing files unless --force is given.  Exit codes:
0 success, 2 usage error, 3 missing input, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    FitError,
    ScanConfig,
    ScanGrid,
    anchor_records,
    fit_ellipse,
    ellipse_json,
    load_scan_csv,
    scan,
    scan_records_csv,
)
from .mitigation import project_density
from .noise import DeviceModel, load_device_model, load_preset, PRESET_NAMES
from .oracle import run_suite
from .prep import FecAngles, Representation, SynthesisError, build_fec_target, export_qasm, synthesize_circuit
from .rdm import signatures
from .sim import run_circuit

USAGE_ERROR, MISSING_INPUT, NUMERICAL_FAILURE = 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a prepare or scan run."""

    command: str
    representation: str = "bosonic"
    theta1: float | None = None
    theta2: float | None = None
    theta1_points: int | None = None
    theta2_points: int | None = None
    shots: int | None = None
    trials: int = 1
    noise: str | None = None        # preset name
    calibration: str | None = None  # calibration file path
    mitigation: str = "default"
    seed: int = 0

    def __post_init__(self):
        if self.representation not in ("bosonic", "fermionic"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.mitigation not in ("off", "default", "strict6"):
            raise ValueError(f"unknown mitigation mode {self.mitigation!r}")
        if self.noise and self.calibration:
            raise ValueError("give either a noise preset or a calibration file, not both")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def device_model(self) -> DeviceModel | None:
        if self.calibration:
            return load_device_model(self.calibration)
        if self.noise:
            return load_preset(self.noise)
        return None

    def effective_seed(self) -> int:
        env = os.environ.get("FEC_SEED")
        return int(env) if env else self.seed


def _write_atomic(path: Path, text: str, force: bool) -> None:
    if path.exists() and not force:
        raise ValueError(f"refusing to overwrite {path} (use --force)")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_config(config: RunConfig, out: Path, force: bool) -> None:
    doc = asdict(config)
    doc["output_dir"] = str(out)
    _write_atomic(out / "config.json", json.dumps(doc, indent=2) + "\n", force)


def _load_config(path: str) -> RunConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    doc.pop("output_dir", None)
    return RunConfig(**doc)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_prepare(args) -> int:
    config = _load_config(args.config) if args.config else RunConfig(
        command="prepare",
        representation=args.rep,
        theta1=args.theta1,
        theta2=args.theta2,
        seed=args.seed,
    )
    if config.theta1 is None or config.theta2 is None:
        raise ValueError("prepare requires --theta1 and --theta2")
    out = _out_dir(args)
    rep = Representation(config.representation)
    angles = FecAngles(config.theta1, config.theta2)

    circuit = synthesize_circuit(rep, angles)
    target = build_fec_target(rep, angles)
    sig = signatures(target.psi, rep)

    _write_config(config, out, args.force)
    _write_atomic(out / "circuit.qasm", export_qasm(circuit), args.force)
    amps = [[float(a.real), float(a.imag)] for a in target.psi.amplitudes]
    state_doc = {"n_qubits": target.psi.n_qubits, "amplitudes": amps}
    _write_atomic(out / "state.json", json.dumps(state_doc) + "\n", args.force)
    sig_doc = {
        "representation": config.representation,
        "theta1": angles.theta1,
        "theta2": angles.theta2,
        "delta": target.delta,
        "lambda_D": sig.lambda_d,
        "lambda_G": sig.lambda_g,
        "n_gates": len(circuit.gates),
        "n_two_qubit_gates": circuit.two_qubit_count(),
    }
    _write_atomic(out / "signatures.json", json.dumps(sig_doc, indent=2) + "\n", args.force)
    overlap = abs(run_circuit(circuit).overlap(target.psi))
    print(f"prepared {config.representation} target at theta1={angles.theta1:.6f} "
          f"theta2={angles.theta2:.6f}: lambda_D={sig.lambda_d:.6f} lambda_G={sig.lambda_g:.6f} "
          f"(circuit overlap {overlap:.12f})")
    return 0


def _record_report(records, title: str) -> str:
    lines = [title, "theta1/pi  lambda_G_full lambda_D_full   lambda_G_proj lambda_D_proj"]
    for rec in records:
        f, p = rec.full, rec.projected
        proj = f"{p.lambda_g:13.4f} {p.lambda_d:13.4f}" if p else f"{'-':>13} {'-':>13}"
        lines.append(f"{rec.angles.theta1 / np.pi:9.3f}  {f.lambda_g:13.4f} {f.lambda_d:13.4f}   {proj}")
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> int:
    config = _load_config(args.config) if args.config else RunConfig(
        command="scan",
        representation=args.rep,
        theta1_points=args.theta1_points,
        theta2_points=args.theta2_points,
        shots=args.shots,
        trials=args.trials,
        noise=args.noise,
        calibration=args.calibration,
        mitigation=args.mitigation,
        seed=args.seed,
    )
    out = _out_dir(args)
    rep = Representation(config.representation)
    n1 = config.theta1_points or 32
    n2 = config.theta2_points or 1
    theta2 = (np.pi,) if n2 == 1 else tuple(np.linspace(0.0, 2.0 * np.pi, n2, endpoint=False))
    grid = ScanGrid(tuple(np.linspace(0.0, np.pi, n1)), theta2)
    scan_config = ScanConfig(
        noise=config.device_model(),
        shots=config.shots if config.trials >= 2 else None,
        trials=config.trials,
        seed=config.effective_seed(),
        mitigation=config.mitigation,
    )

    records = scan(rep, grid, scan_config)
    anchors = anchor_records(rep, scan_config)

    _write_config(config, out, args.force)
    _write_atomic(out / "scan.csv", scan_records_csv(records), args.force)
    _write_atomic(out / "anchors.csv", scan_records_csv(anchors), args.force)
    fit = fit_ellipse([(r.full.lambda_g, r.full.lambda_d) for r in records])
    _write_atomic(out / "ellipse.json", ellipse_json(fit), args.force)
    noise_name = config.noise or (config.calibration and Path(config.calibration).stem) or "noiseless"
    title = f"# {noise_name} / {config.representation} preparation (anchor angles, theta2=pi)"
    _write_atomic(out / "report.txt", _record_report(anchors, title), args.force)
    print(f"scan complete: {len(records)} records, ellipse rms {fit.rms_residual:.6f} -> {out}")
    return 0


def cmd_report(args) -> int:
    inputs = [Path(p) for p in args.scan_dirs]
    missing = [str(p) for p in inputs
               if not ((p / "anchors.csv").exists() and (p / "config.json").exists())]
    if not inputs or missing:
        detail = ", ".join(missing) if missing else "no scan directories given"
        print(f"missing scan inputs: {detail}", file=sys.stderr)
        return MISSING_INPUT
    out = _out_dir(args)

    sections = []
    plot_blocks = []
    for p in inputs:
        doc = json.loads((p / "config.json").read_text(encoding="utf-8"))
        noise_name = doc.get("noise") or (doc.get("calibration") and Path(doc["calibration"]).stem) or "noiseless"
        label = f"{noise_name} / {doc['representation']} preparation"
        anchors = load_scan_csv(p / "anchors.csv")
        sections.append(_record_report(anchors, f"## {label}"))
        rows = [f"# {label}", "# theta1 lambda_G_full lambda_D_full lambda_G_proj lambda_D_proj"]
        source = p / "scan.csv"
        for rec in (load_scan_csv(source) if source.exists() else anchors):
            f, pr = rec.full, rec.projected
            rows.append(
                f"{rec.angles.theta1!r} {f.lambda_g!r} {f.lambda_d!r} "
                f"{(pr.lambda_g if pr else float('nan'))!r} {(pr.lambda_d if pr else float('nan'))!r}"
            )
        plot_blocks.append("\n".join(rows))

    _write_atomic(out / "report.txt", "\n".join(sections), args.force)
    _write_atomic(out / "plot.dat", "\n\n\n".join(plot_blocks) + "\n", args.force)
    gp = [
        "set xlabel 'lambda_G'",
        "set ylabel 'lambda_D'",
        "set key outside",
        "plot \\",
    ]
    for i, p in enumerate(inputs):
        tail = ", \\" if i < len(inputs) - 1 else ""
        gp.append(f"  'plot.dat' index {i} using 2:3 with points title '{p.name} full'{tail}")
    _write_atomic(out / "plot.gp", "\n".join(gp) + "\n", args.force)
    print(f"report written for {len(inputs)} scans -> {out}")
    return 0


def cmd_oracle(args) -> int:
    checks = run_suite(n_random=args.random, seed=args.seed)
    failed = 0
    for chk in checks:
        status = "PASS" if chk.passed else "FAIL"
        print(f"[{status}] {chk.name}: {chk.detail}")
        failed += not chk.passed
    if failed:
        print(f"{failed} oracle check(s) failed", file=sys.stderr)
        return NUMERICAL_FAILURE
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fec",
        description="Prepare, measure and analyze fermion-exciton condensate states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--seed", type=int, default=0, help="master seed (FEC_SEED overrides)")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("prepare", help="write circuit, state and signatures for one angle pair")
    p.add_argument("--rep", choices=("bosonic", "fermionic"), default="bosonic")
    p.add_argument("--theta1", type=float)
    p.add_argument("--theta2", type=float)
    p.add_argument("--config", help="load a previously written config.json")
    add_common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("scan", help="run an angle grid and fit the trade-off ellipse")
    p.add_argument("--rep", choices=("bosonic", "fermionic"), default="bosonic")
    p.add_argument("--theta1-points", type=int, default=32)
    p.add_argument("--theta2-points", type=int, default=1)
    p.add_argument("--shots", type=int)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--noise", choices=PRESET_NAMES)
    p.add_argument("--calibration", help="path to a calibration JSON file")
    p.add_argument("--mitigation", choices=("off", "default", "strict6"), default="default")
    p.add_argument("--config", help="load a previously written config.json")
    add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="aggregate scan directories into one table")
    p.add_argument("scan_dirs", nargs="*", help="scan output directories")
    add_common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("oracle", help="run the brute-force RDM oracle suite")
    p.add_argument("--random", type=int, default=20, help="number of random oracle states")
    add_common(p, with_out=False)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return MISSING_INPUT
    except (SynthesisError, FitError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
