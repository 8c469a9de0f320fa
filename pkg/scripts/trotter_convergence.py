"""Trotter error of the two-copy circuit at t = 0.8 as the step shrinks.

    python3 scripts/trotter_convergence.py
"""

import argparse

from tfd_otoc import TEMPERATURE_GRID, OtocExperiment, TfimParams, TrotterSchedule, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--steps", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()

    print(f"{'T':>5} " + " ".join(f"dt={dt:<8g}" for dt in args.steps))
    for temp in TEMPERATURE_GRID:
        errs = []
        for dt in args.steps:
            p = run_experiment(OtocExperiment(TfimParams(3), temp, schedule=TrotterSchedule.uniform(dt, 0.8))).at(0.8)
            errs.append(abs(p.o_state - p.o_exact))
        print(f"{temp.label:>5} " + " ".join(f"{e:<11.2e}" for e in errs))


if __name__ == "__main__":
    main()
