"""Command-line experiment runner.

    tfd-otoc oracle       --config run.ini [--out DIR]
    tfd-otoc tfd-optimize --config run.ini [--seed N] [--jobs K]
    tfd-otoc run          --config run.ini [--seed N] [--jobs K]
    tfd-otoc sweep        --config run.ini [--seed N] [--jobs K]

Exit status: 0 on success, 2 for configuration or usage problems, 3 for
numerical or internal failures. Results are computed first (in parallel when
``--jobs`` > 1) and written afterwards from this process only, so the files
do not depend on the number of workers.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import RunConfig, dumps, load
from .errors import ArgumentError, ConfigError, NumericalError, OtocError, ReferenceNotFoundError
from .protocol import DECAY_SOURCES, OtocSeries, temperature_sweep
from .spinchain import Temperature, build_hamiltonian, diagonalize, exact_otoc, exact_tfd_state
from .statevector import PauliString
from .tfd import FIDELITY_TARGET, TfdAnsatz, optimize_tfd, prepare_state, reference_parameters, tfd_fidelity

log = logging.getLogger("tfd_otoc")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

SERIES_COLUMNS = (
    ("O_exact", "o_exact"),
    ("O_state", "o_state"),
    ("O_sampled", "o_sampled"),
    ("O_postselected", "o_postselected"),
    ("kept_fraction", "kept_fraction"),
    ("std_error", "std_error"),
)


def fmt(x) -> str:
    """12 significant digits; None becomes an empty cell."""
    if x is None:
        return ""
    x = float(x)
    if not math.isfinite(x):
        raise NumericalError(f"refusing to write non-finite value {x}")
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return f"{x:.12g}"


def plot_x(temp: Temperature) -> float:
    """Compactified temperature T / (1 + T) so that T = inf lands on x = 1."""
    return 1.0 if temp.is_infinite else temp.value / (1.0 + temp.value)


def _write(path: Path, lines: list[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_dat(path: Path, header: str, xs, ys):
    rows = [f"# {header}"]
    rows += [f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys) if y is not None]
    _write(path, rows)


def _series_rows(series: OtocSeries) -> list[str]:
    label = series.temperature.label
    return [
        ",".join([label, fmt(p.t)] + [fmt(getattr(p, attr)) for _, attr in SERIES_COLUMNS])
        for p in series.points
    ]


SERIES_HEADER = "temperature,t," + ",".join(name for name, _ in SERIES_COLUMNS)


def _manifest(cfg: RunConfig, command: str) -> str:
    doc = {
        "command": command,
        "seed": cfg.seed,
        "config": dumps(cfg),
        "versions": {
            "tfd_otoc": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True)


# -- commands ----------------------------------------------------------------

def cmd_oracle(cfg: RunConfig, out: Path, jobs: int) -> int:
    sd = diagonalize(build_hamiltonian(cfg.tfim))
    n = cfg.n_sites
    w = PauliString.from_sites(n, {cfg.w_site - 1: "X"})
    v = PauliString.from_sites(n, {cfg.v_site - 1: "Z"})
    times = [0.0] + cfg.experiment(cfg.temperatures[0]).schedule.cumulative_times
    rows = ["temperature,t,O_exact"]
    curves = {}
    for temp in cfg.temperatures:
        values = [exact_otoc(sd, temp, t, w, v) for t in times]
        curves[temp] = values
        rows += [f"{temp.label},{fmt(t)},{fmt(o)}" for t, o in zip(times, values)]
    _write(out / "oracle.csv", rows)
    if "dat" in cfg.formats:
        for temp, values in curves.items():
            _write_dat(out / f"oracle_T{temp.label}.dat", f"t O_exact (T={temp.label})", times, values)
    _write(out / "manifest.json", [_manifest(cfg, "oracle")])
    return EXIT_OK


def _optimize_job(args):
    cfg, temp = args
    sd = diagonalize(build_hamiltonian(cfg.tfim))
    ansatz = TfdAnsatz.for_temperature(cfg.n_sites, temp, cfg.topology)
    res = optimize_tfd(ansatz, temp, sd, cfg.optimizer)
    try:
        ref = reference_parameters(temp)
        ref_fid = tfd_fidelity(prepare_state(ansatz, ref.thetas), exact_tfd_state(sd, temp))
    except ReferenceNotFoundError:
        ref_fid = None
    return ansatz.layout.value, res.params.thetas, res.fidelity, ref_fid


def _map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_tfd_optimize(cfg: RunConfig, out: Path, jobs: int) -> int:
    results = _map(_optimize_job, [(cfg, t) for t in cfg.temperatures], jobs)
    rows = ["temperature,layout,theta1,theta2,theta3,theta4,fidelity,reference_fidelity"]
    for temp, (layout, thetas, fid, ref_fid) in zip(cfg.temperatures, results):
        cells = [fmt(x) for x in thetas] + [""] * (4 - len(thetas))
        rows.append(",".join([temp.label, layout, *cells, fmt(fid), fmt(ref_fid)]))
        if fid < FIDELITY_TARGET:
            print(
                f"warning: T={temp.label} fidelity {fid:.6f} is below the {FIDELITY_TARGET} target",
                file=sys.stderr,
            )
    _write(out / "tfd_parameters.csv", rows)
    _write(out / "manifest.json", [_manifest(cfg, "tfd-optimize")])
    return EXIT_OK


def _sweep(cfg: RunConfig, jobs: int):
    base = cfg.experiment(cfg.temperatures[0])
    source = "reference" if cfg.prep == "reference" else "optimized"
    return temperature_sweep(base, cfg.temperatures, source, cfg.optimizer, jobs)


def _warn_fidelity(entries):
    for temp, e in entries.items():
        if e.prep_fidelity is not None and e.prep_fidelity < FIDELITY_TARGET:
            print(
                f"warning: T={temp.label} preparation fidelity {e.prep_fidelity:.6f} "
                f"is below the {FIDELITY_TARGET} target",
                file=sys.stderr,
            )


def cmd_run(cfg: RunConfig, out: Path, jobs: int) -> int:
    entries = _sweep(cfg, jobs)
    _warn_fidelity(entries)
    rows = [SERIES_HEADER]
    for e in entries.values():
        rows += _series_rows(e.series)
    _write(out / "series.csv", rows)
    _write(out / "manifest.json", [_manifest(cfg, "run")])
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int) -> int:
    entries = _sweep(cfg, jobs)
    _warn_fidelity(entries)
    names = ["lambda_" + s.removeprefix("o_") for s in DECAY_SOURCES]
    rows = ["temperature," + ",".join(names)]
    for temp, e in entries.items():
        rows.append(",".join([temp.label] + [fmt(e.rates[s]) for s in DECAY_SOURCES]))
        _write(out / f"series_T{temp.label}.csv", [SERIES_HEADER] + _series_rows(e.series))
    _write(out / "decay_rates.csv", rows)
    if "dat" in cfg.formats:
        xs = [plot_x(t) for t in entries]
        for name, src in zip(names, DECAY_SOURCES):
            ys = [e.rates[src] for e in entries.values()]
            if any(y is not None for y in ys):
                _write_dat(out / f"{name}.dat", f"T/(1+T) {name}", xs, ys)
        for temp, e in entries.items():
            _write_dat(out / f"series_T{temp.label}.dat", f"t O_exact (T={temp.label})",
                       e.series.times, e.series.values("o_exact"))
    _write(out / "manifest.json", [_manifest(cfg, "sweep")])
    return EXIT_OK


COMMANDS = {
    "oracle": cmd_oracle,
    "tfd-optimize": cmd_tfd_optimize,
    "run": cmd_run,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfd-otoc", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--seed", type=int, help="overrides [experiment] seed")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        cfg = load(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"--seed must be non-negative, got {args.seed}")
            cfg = replace(cfg, seed=args.seed)
        out = Path(args.out if args.out is not None else cfg.output_dir)
        return COMMANDS[args.command](cfg, out, args.jobs)
    except (ConfigError, ArgumentError, ReferenceNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OtocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ArithmeticError, np.linalg.LinAlgError, MemoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
