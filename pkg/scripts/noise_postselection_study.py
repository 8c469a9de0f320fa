"""How much of the noise does parity postselection remove?

Scales the default error rates and reports the discarded fraction of shots
and the deviation of raw and postselected estimates from the noiseless
circuit value at t = 0.8.

    python3 scripts/noise_postselection_study.py --temp inf
"""

import argparse

from tfd_otoc import NoiseModel, OtocExperiment, PrepMode, Temperature, TfimParams, run_experiment
from tfd_otoc.protocol import resolve_tfd_parameters


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--temp", default="inf")
    ap.add_argument("--shots", type=int, default=20_000)
    ap.add_argument("--scales", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tfim = TfimParams(3)
    temp = Temperature.parse(args.temp)
    params, fid = resolve_tfd_parameters(tfim, temp, "optimized")
    print(f"T={temp.label}, preparation fidelity {fid:.5f}, {args.shots} shots")
    print(f"{'scale':>6} {'discarded':>10} {'noiseless':>10} {'raw':>9} {'post':>9} {'|raw-ideal|':>12} {'|post-ideal|':>13}")
    d = NoiseModel()
    for s in args.scales:
        nm = NoiseModel(min(1.0, d.p1 * s), min(1.0, d.p2 * s), min(1.0, d.p_readout * s))
        exp = OtocExperiment(
            tfim, temp, prep=PrepMode.VARIATIONAL, tfd_params=params, shots=args.shots,
            noise=nm, seed=args.seed, pad_depth=True, allow_starved=True,
        )
        p = run_experiment(exp).at(0.8)
        post = p.o_postselected if p.o_postselected is not None else float("nan")
        print(
            f"{s:6.2f} {1 - p.kept_fraction:10.3f} {p.o_state:10.4f} {p.o_sampled:9.4f} {post:9.4f} "
            f"{abs(p.o_sampled - p.o_state):12.4f} {abs(post - p.o_state):13.4f}"
        )


if __name__ == "__main__":
    main()
