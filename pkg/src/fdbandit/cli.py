"""Command-line front end: ``fdbandit run | sweep | spectrum``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .core import ConfigError
from .experiment import (
    EnsembleResult,
    ExperimentConfig,
    RunTrace,
    aggregate,
    run_single,
    simulate_choices,
    stats_snapshot,
    sweep_alpha,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class CliIOError(Exception):
    pass


def fmt(value) -> str:
    """Shortest round-trip decimal for floats, plain digits for integers."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise CliIOError(f"cannot read config {path}: {err}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError("<file>", f"not valid YAML: {err}") from None
    return ExperimentConfig.from_dict(raw)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def trace_rows(trace: RunTrace):
    K = trace.n_arms
    for t in range(1, trace.horizon + 1):
        row = [t, trace.arms[t - 1], trace.rewards[t - 1]]
        for i in range(K):
            row += [trace.pulls[t - 1, i], trace.means[t - 1, i]]
        yield row


def write_trace(trace: RunTrace, path: Path) -> None:
    header = ["t", "arm", "reward"]
    for i in range(trace.n_arms):
        header += [f"pulls_{i}", f"mean_{i}"]
    _write_csv(path, header, trace_rows(trace))


def spectrum_rows(reference: RunTrace, result: EnsembleResult, times):
    """Amplitude and frequency come from the reference run, energy from the ensemble."""
    for t in times:
        t = int(t)
        energy = np.bincount(result.choices[:, t - 1].astype(np.int64),
                             minlength=result.config.n_arms) / result.replications
        snap = stats_snapshot(reference.stats_at(t), t, energy)
        for i, comp in enumerate(snap.components):
            yield [t, i, comp.amplitude, comp.frequency, comp.energy]


def write_spectrum(reference: RunTrace, result: EnsembleResult, times, path: Path) -> None:
    _write_csv(path, ["t", "arm", "amplitude", "frequency", "energy"],
               spectrum_rows(reference, result, times))


def write_manifest(out_dir: Path, config: ExperimentConfig, command: str, files: list[str],
                   extra: dict | None = None) -> None:
    digests = {}
    for name in files:
        digests[name] = hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
    manifest = {
        "tool_version": __version__,
        "command": command,
        "config_hash": config.digest(),
        "instance_hash": config.instance.digest(),
        "master_seed": config.master_seed,
        "files": digests,
    }
    if extra:
        manifest.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _prepare_out_dir(out_dir: str | Path) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise CliIOError(f"output directory {out} is not writable: {err}") from None
    return out


def cmd_run(config_path, out_dir, workers: int = 1) -> int:
    config = load_config(config_path)
    out = _prepare_out_dir(out_dir)
    if config.replications == 1:
        write_trace(run_single(config, 0), out / "trace.csv")
        files = ["trace.csv"]
    else:
        result = aggregate(config, simulate_choices(config, workers))
        reference = run_single(config.replace(record_spectral=False), 0)
        with open(out / "ensemble.json", "w") as fh:
            json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        _write_csv(out / "regret.csv", ["t", "mean_regret", "std_regret"],
                   ([t, m, s] for t, (m, s) in enumerate(zip(result.regret_mean, result.regret_std), 1)))
        write_spectrum(reference, result, config.grid, out / "spectrum.csv")
        files = ["ensemble.json", "regret.csv", "spectrum.csv"]
    write_manifest(out, config, "run", files)
    return EXIT_OK


def parse_float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as comma-separated numbers") from None
    if not values or any(not math.isfinite(v) for v in values):
        raise ConfigError(name, f"need finite comma-separated numbers, got {text!r}")
    return values


def parse_alphas(text: str) -> list[float]:
    alphas = parse_float_list(text, "alphas")
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise ConfigError("alphas", f"each alpha must lie in (0, 1], got {a}")
    return alphas


def parse_times(text: str, horizon: int) -> list[int]:
    times = []
    for v in parse_float_list(text, "at"):
        if v != int(v) or not 1 <= v <= horizon:
            raise ConfigError("at", f"times must be integers in [1, {horizon}], got {v}")
        times.append(int(v))
    return times


def cmd_sweep(config_path, alphas: str, out_dir, workers: int = 1) -> int:
    config = load_config(config_path)
    values = parse_alphas(alphas)
    out = _prepare_out_dir(out_dir)
    rows = sweep_alpha(config, values, workers)
    header = ["alpha", "mean_regret", "ci_half_width", "v_of_T"]
    header += [f"mean_pulls_{i}" for i in range(config.n_arms)]
    _write_csv(out / "sweep.csv", header,
               ([r.alpha, r.mean_regret, r.ci_half_width, r.v_of_T, *r.mean_pulls] for r in rows))
    write_manifest(out, config, "sweep", ["sweep.csv"],
                   {"alphas": values, "v_of_T_mode": "ensemble"})
    return EXIT_OK


def cmd_spectrum(config_path, at: str, out_dir, workers: int = 1) -> int:
    config = load_config(config_path)
    times = parse_times(at, config.horizon)
    out = _prepare_out_dir(out_dir)
    result = aggregate(config, simulate_choices(config, workers))
    reference = run_single(config.replace(record_spectral=False), 0)
    write_spectrum(reference, result, times, out / "spectrum.csv")
    write_trace(reference, out / "trace.csv")
    write_manifest(out, config, "spectrum", ["spectrum.csv", "trace.csv"], {"times": times})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdbandit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one run (R=1) or an ensemble")
    run.add_argument("config")
    run.add_argument("out_dir")

    sweep = sub.add_parser("sweep", help="compare gain-decay exponents with shared seeds")
    sweep.add_argument("config")
    sweep.add_argument("--alphas", required=True, help="comma-separated, each in (0, 1]")
    sweep.add_argument("out_dir")

    spec = sub.add_parser("spectrum", help="per-arm spectral components at chosen times")
    spec.add_argument("config")
    spec.add_argument("--at", required=True, help="comma-separated time steps")
    spec.add_argument("out_dir")

    for p in (run, sweep, spec):
        p.add_argument("--workers", type=int, default=1, help="worker processes for replications")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out_dir, args.workers)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.alphas, args.out_dir, args.workers)
        return cmd_spectrum(args.config, args.at, args.out_dir, args.workers)
    except ConfigError as err:
        print(f"fdbandit: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (CliIOError, OSError) as err:
        print(f"fdbandit: I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
