"""Decay rate against temperature for the exact OTOC, the noiseless Trotter
circuit and the noisy sampled circuit with and without parity postselection.

    python3 scripts/decay_rate_sweep.py --shots 20000 --out results/decay_sweep
"""

import argparse
from pathlib import Path

from tfd_otoc import TEMPERATURE_GRID, NoiseModel, OptimizerConfig, OtocExperiment, PrepMode, TfimParams, temperature_sweep
from tfd_otoc.cli import plot_x
from tfd_otoc.protocol import DECAY_SOURCES


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sites", type=int, default=3)
    ap.add_argument("--shots", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--noise-scale", type=float, default=1.0, help="multiplies the default error rates")
    ap.add_argument("--out", default="results/decay_sweep")
    args = ap.parse_args()

    d = NoiseModel()
    nm = NoiseModel(d.p1 * args.noise_scale, d.p2 * args.noise_scale, d.p_readout * args.noise_scale)
    base = OtocExperiment(
        TfimParams(args.sites), TEMPERATURE_GRID[0], prep=PrepMode.VARIATIONAL,
        shots=args.shots, noise=nm, seed=args.seed, pad_depth=True, allow_starved=True,
    )
    entries = temperature_sweep(base, list(TEMPERATURE_GRID), "optimized", OptimizerConfig(seed=args.seed), args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print("T      fidelity  " + "  ".join(f"{s:>15}" for s in DECAY_SOURCES))
    for src in DECAY_SOURCES:
        with open(out / f"lambda_{src.removeprefix('o_')}.dat", "w") as fh:
            fh.write(f"# T/(1+T) lambda from {src}\n")
            for temp, e in entries.items():
                if e.rates[src] is not None:
                    fh.write(f"{plot_x(temp):.12g} {e.rates[src]:.12g}\n")
    for temp, e in entries.items():
        print(f"{temp.label:<6} {e.prep_fidelity:.5f}  " + "  ".join(f"{e.rates[s]:>15.4f}" for s in DECAY_SOURCES))


if __name__ == "__main__":
    main()
