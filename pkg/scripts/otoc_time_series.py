"""OTOC versus time at a few temperatures: exact curve on a fine grid plus the
Trotterized protocol values at the measured times.

    python3 scripts/otoc_time_series.py --temps 0.5 2 inf --out results/time_series
"""

import argparse
from pathlib import Path

import numpy as np

from tfd_otoc import OtocExperiment, PauliString, Temperature, TfimParams, build_hamiltonian, diagonalize, exact_otoc, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sites", type=int, default=3)
    ap.add_argument("--temps", nargs="+", default=["0.5", "2", "inf"])
    ap.add_argument("--t-max", type=float, default=1.5)
    ap.add_argument("--out", default="results/time_series")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tfim = TfimParams(args.sites)
    sd = diagonalize(build_hamiltonian(tfim))
    w = PauliString.from_sites(args.sites, {0: "X"})
    v = PauliString.from_sites(args.sites, {0: "Z"})
    grid = np.linspace(0, args.t_max, 151)
    for label in args.temps:
        temp = Temperature.parse(label)
        curve = [exact_otoc(sd, temp, t, w, v) for t in grid]
        np.savetxt(out / f"exact_T{temp.label}.dat", np.column_stack([grid, curve]), fmt="%.12g", header="t O_exact")
        series = run_experiment(OtocExperiment(tfim, temp))
        pts = np.array([[p.t, p.o_state] for p in series.points])
        np.savetxt(out / f"trotter_T{temp.label}.dat", pts, fmt="%.12g", header="t O_state")
        print(f"T={temp.label:>4}: " + "  ".join(f"t={p.t:g} exact {p.o_exact:+.4f} trotter {p.o_state:+.4f}" for p in series.points))


if __name__ == "__main__":
    main()
