"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run under pytest, or directly with ``python3 tests/test_acceptance.py`` for the
summary alone.
"""

import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from tfd_otoc.cli import main as cli_main
from tfd_otoc.noise import NoiseModel
from tfd_otoc.protocol import (
    Evolution,
    OtocExperiment,
    PrepMode,
    TrotterSchedule,
    decay_rate,
    resolve_tfd_parameters,
    run_experiment,
)
from tfd_otoc.rng import substream
from tfd_otoc.spinchain import (
    INFINITE,
    TEMPERATURE_GRID,
    ZERO,
    PauliString,
    Temperature,
    TfimParams,
    build_hamiltonian,
    diagonalize,
    exact_otoc,
    gate_matrix,
)
from tfd_otoc.statevector import GateKind, GateOp, StateVector, apply_gate
from tfd_otoc.tfd import OptimizerConfig, TfdAnsatz, optimize_tfd

FIXTURES = Path(__file__).parent / "fixtures"
TIMES = (0.0, 0.2, 0.4, 0.8)

IDENTITY_TOL = 1e-10
FIDELITY_MIN = 0.97
INFINITE_FIDELITY_MIN = 1 - 1e-9
TROTTER_RATIO_MIN = 1.8
KERNEL_TOL = 1e-12
SAMPLING_SIGMAS = 5.0
SAMPLING_RATE_MIN = 0.99


def _frozen_lambdas():
    rows = (FIXTURES / "decay_rates.csv").read_text().splitlines()[1:]
    out = {}
    for row in rows:
        n, label, value = row.split(",")
        out[(int(n), Temperature.parse(label))] = float(value)
    return out


def criterion_1():
    worst = 0.0
    for n in (2, 3):
        sd = diagonalize(build_hamiltonian(TfimParams(n)))
        w = PauliString.from_sites(n, {0: "X"})
        v = PauliString.from_sites(n, {0: "Z"})
        for temp in TEMPERATURE_GRID:
            series = run_experiment(OtocExperiment(TfimParams(n), temp, evolution=Evolution.EXACT))
            for t in TIMES:
                p = series.at(t)
                worst = max(worst, abs(p.o_state - exact_otoc(sd, temp, t, w, v)))
    return worst <= IDENTITY_TOL, f"max |o_state - oracle| = {worst:.2e} over N=2,3, 7 temperatures, 4 times"


def criterion_2():
    o0 = run_experiment(OtocExperiment(TfimParams(3), INFINITE, evolution=Evolution.EXACT)).at(0.0).o_state
    return abs(o0 + 1) <= IDENTITY_TOL, f"O(0) at T=inf is {o0:.12f}"


def criterion_3():
    sd = diagonalize(build_hamiltonian(TfimParams(3)))
    fids = {}
    for temp in TEMPERATURE_GRID:
        res = optimize_tfd(TfdAnsatz.for_temperature(3, temp), temp, sd, OptimizerConfig(restarts=20, seed=0))
        fids[temp] = res.fidelity
    ok = all(f >= FIDELITY_MIN for f in fids.values()) and fids[INFINITE] >= INFINITE_FIDELITY_MIN
    detail = ", ".join(f"T={t.label}: {f:.6f}" for t, f in fids.items())
    return ok, detail


def criterion_4():
    ratios = []
    for temp in (ZERO, Temperature(2), INFINITE):
        errs = []
        for dt in (0.1, 0.05, 0.025):
            p = run_experiment(OtocExperiment(TfimParams(3), temp, schedule=TrotterSchedule.uniform(dt, 0.8))).at(0.8)
            errs.append(abs(p.o_state - p.o_exact))
        ratios += [errs[0] / errs[1], errs[1] / errs[2]]
    return min(ratios) >= TROTTER_RATIO_MIN, "halving ratios " + ", ".join(f"{r:.3f}" for r in ratios)


def criterion_5():
    kept, worst_parity = [], 0.0
    for temp in (ZERO, Temperature(2), INFINITE):
        series = run_experiment(OtocExperiment(TfimParams(3), temp, shots=100_000, seed=1))
        kept += [p.kept_fraction for p in series.points]
        worst_parity = max(worst_parity, max(abs(p.parity + 1) for p in series.points))
    ok = all(k == 1.0 for k in kept) and worst_parity <= IDENTITY_TOL
    return ok, f"kept fractions {sorted(set(kept))}, max |parity + 1| = {worst_parity:.1e}"


def criterion_6():
    lam = {}
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "sweep.ini"
        cfg.write_text(
            "[model]\nn_sites = 3\nJ = 1\ng = 1\n"
            "[experiment]\ntemperatures = 0, 0.5, 1, 2, 3.5, 6, inf\nevolution = exact\n"
        )
        code = cli_main(["sweep", "--config", str(cfg), "--out", tmp])
        curve = [ln for ln in (Path(tmp) / "lambda_exact.dat").read_text().splitlines() if not ln.startswith("#")]
    sd_series = {
        t: run_experiment(OtocExperiment(TfimParams(3), t, evolution=Evolution.EXACT)) for t in TEMPERATURE_GRID
    }
    for t, s in sd_series.items():
        lam[t] = decay_rate(s).value
    frozen = _frozen_lambdas()
    drift = max(abs(lam[t] - frozen[(3, t)]) for t in TEMPERATURE_GRID)
    ok = code == 0 and len(curve) == 7 and lam[INFINITE] > lam[ZERO] > 0 and drift <= IDENTITY_TOL
    return ok, f"lambda(0) = {lam[ZERO]:.6f}, lambda(inf) = {lam[INFINITE]:.6f}, fixture drift {drift:.1e}, {len(curve)} plot rows"


def criterion_7():
    hits = total = 0
    for seed in range(20):
        series = run_experiment(OtocExperiment(TfimParams(3), Temperature(2), shots=100_000, seed=seed))
        for p in series.points:
            total += 1
            hits += abs(p.o_sampled - p.o_state) <= SAMPLING_SIGMAS * p.std_error
    rate = hits / total
    return rate >= SAMPLING_RATE_MIN, f"{hits}/{total} points within 5 standard errors ({rate:.1%})"


def criterion_8():
    tfim = TfimParams(3)
    ok, parts = True, []
    for temp in (Temperature(2), INFINITE):
        params, _ = resolve_tfd_parameters(tfim, temp, "optimized")
        exp = OtocExperiment(
            tfim, temp, prep=PrepMode.VARIATIONAL, tfd_params=params,
            shots=20_000, noise=NoiseModel(), seed=8, pad_depth=True,
        )
        p = run_experiment(exp).at(0.8)
        damped = abs(p.o_postselected) < abs(p.o_state)
        closer = abs(p.o_postselected - p.o_state) < abs(p.o_sampled - p.o_state)
        ok &= damped and closer and p.kept_fraction < 1
        parts.append(
            f"T={temp.label}: noiseless {p.o_state:.4f}, raw {p.o_sampled:.4f}, "
            f"postselected {p.o_postselected:.4f}, kept {p.kept_fraction:.3f}"
        )
    return ok, "; ".join(parts)


def criterion_9():
    rng = substream(2024)
    kinds = list(GateKind)
    worst = 0.0
    for _ in range(1000):
        kind = kinds[rng.integers(len(kinds))]
        targets = tuple(int(q) for q in rng.permutation(4)[: kind.arity])
        angle = float(rng.uniform(-2 * math.pi, 2 * math.pi)) if kind.has_angle else None
        op = GateOp(kind, targets, angle)
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        state = StateVector(4, v / np.linalg.norm(v))
        expected = gate_matrix(op, 4) @ state.amplitudes
        worst = max(worst, np.max(np.abs(apply_gate(state, op).amplitudes - expected)))
    return worst <= KERNEL_TOL, f"max deviation {worst:.2e} over 1000 random gates"


def criterion_10():
    config = (
        "[model]\nn_sites = 3\nJ = 1\ng = 1\n"
        "[experiment]\ntemperatures = 0, 2, inf\nprep = optimized\nshots = 2000\nseed = 11\npad_depth = true\n"
        "[noise]\nenabled = true\n[optimizer]\nrestarts = 3\n"
    )
    mismatches = []
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "det.ini"
        cfg.write_text(config)
        for command in ("oracle", "tfd-optimize", "run", "sweep"):
            outs = []
            for k, jobs in enumerate((1, 1, 2)):
                out = Path(tmp) / f"{command}{k}"
                if cli_main([command, "--config", str(cfg), "--out", str(out), "--jobs", str(jobs)]) != 0:
                    mismatches.append(f"{command} failed")
                outs.append({p.name: p.read_bytes() for p in out.iterdir()})
            if any(o != outs[0] for o in outs[1:]):
                mismatches.append(command)
    return not mismatches, "byte-identical for oracle, tfd-optimize, run, sweep (jobs 1, 1, 2)" if not mismatches else f"differs: {mismatches}"


CRITERIA = [
    (1, "two-copy protocol equals the thermal OTOC", criterion_1, 5),
    (2, "O(0) = -1 at infinite temperature", criterion_2, 1),
    (3, "variational TFD fidelity", criterion_3, 60),
    (4, "first-order Trotter convergence", criterion_4, 5),
    (5, "parity postselection keeps every noiseless shot", criterion_5, 10),
    (6, "decay rate grows from T=0 to T=inf", criterion_6, 5),
    (7, "sampled estimates within 5 standard errors", criterion_7, 60),
    (8, "noise damps the OTOC and postselection mitigates it", criterion_8, 120),
    (9, "gate kernels match dense matrices", criterion_9, 5),
    (10, "CLI output independent of repetition and --jobs", criterion_10, 30),
]


def run_criterion(number, title, fn, budget):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {number:2d}: {title} ({elapsed:.2f}s, budget {budget}s) - {detail}"
    return ok and in_time, line


@pytest.mark.parametrize("number,title,fn,budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, budget, capsys):
    ok, line = run_criterion(number, title, fn, budget)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
