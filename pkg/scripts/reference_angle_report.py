"""Fidelity of the tabulated TFD angles under each circuit layout, next to
freshly optimized angles.

The tabulated angles were fitted for a hardware gate set whose conventions
(rotation sign, gate order, Z-rotation placement) are not pinned down, so
their fidelity here is a measurement, not a requirement.

    python3 scripts/reference_angle_report.py
"""

import argparse

from tfd_otoc import TEMPERATURE_GRID, OptimizerConfig, TfdAnsatz, TfimParams, build_hamiltonian, diagonalize, exact_tfd_state
from tfd_otoc.tfd import optimize_tfd, prepare_state, reference_parameters, tfd_fidelity


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--restarts", type=int, default=20)
    args = ap.parse_args()

    sd = diagonalize(build_hamiltonian(TfimParams(3)))
    print(f"{'T':>5} {'layout':>11} {'topology':>9} {'tabulated':>10} {'optimized':>10}  angles (units of pi)")
    for temp in TEMPERATURE_GRID:
        target = exact_tfd_state(sd, temp)
        for topology in ("centered", "uniform"):
            ansatz = TfdAnsatz.for_temperature(3, temp, topology)
            ref = tfd_fidelity(prepare_state(ansatz, reference_parameters(temp).thetas), target)
            res = optimize_tfd(ansatz, temp, sd, OptimizerConfig(restarts=args.restarts))
            angles = " ".join(f"{x:+.4f}" for x in res.params.thetas)
            print(f"{temp.label:>5} {ansatz.layout.value:>11} {topology:>9} {ref:10.5f} {res.fidelity:10.5f}  {angles}")
            if ansatz.layout.n_params == 2:
                break  # topology only affects the four-parameter layout


if __name__ == "__main__":
    main()
