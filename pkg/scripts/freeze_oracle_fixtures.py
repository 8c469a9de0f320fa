"""Freeze OTOC and decay-rate fixtures from a brute-force matrix-exponential oracle.

The brute force builds the chain Hamiltonian from Kronecker products, forms
rho^(1/2) with scipy.linalg.expm (or the ground-state projector at T = 0) and
evaluates Tr(rho^(1/2) W V(t) W rho^(1/2) V(t)) directly. Nothing from the
package's spectral code is used; the package is only consulted afterwards as a
cross-check, and the script refuses to write if the two disagree.

    python3 scripts/freeze_oracle_fixtures.py [--out tests/fixtures]
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np
from scipy.linalg import eigh, expm

from tfd_otoc import TEMPERATURE_GRID, PauliString, TfimParams, build_hamiltonian, diagonalize, exact_otoc

TIMES = (0.0, 0.2, 0.4, 0.8)
SITES = (2, 3)
AGREEMENT = 1e-10

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def site_op(op, site, n):
    # qubit k is bit k, so qubit 0 is the rightmost Kronecker factor
    mats = [op if k == site else I2 for k in reversed(range(n))]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def hamiltonian(n, J=1.0, g=1.0):
    h = sum(J * site_op(X, i, n) @ site_op(X, i + 1, n) for i in range(n - 1))
    return h + sum(g * site_op(Z, i, n) for i in range(n))


def sqrt_rho(h, temp):
    if temp == 0:
        _, vecs = eigh(h)
        g0 = vecs[:, :1]
        return g0 @ g0.conj().T
    if math.isinf(temp):
        return np.eye(len(h)) / math.sqrt(len(h))
    half = expm(-h / (2 * temp))
    return half / math.sqrt(np.trace(half @ half).real)


def brute_otoc(n, temp, t):
    h = hamiltonian(n)
    w, v = site_op(X, 0, n), site_op(Z, 0, n)
    u = expm(-1j * h * t)
    vt = u.conj().T @ v @ u
    s = sqrt_rho(h, temp)
    val = np.trace(s @ w.conj().T @ vt.conj().T @ w @ s @ vt)
    assert abs(val.imag) < 1e-12
    return val.real


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "fixtures"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows, lam_rows, worst = [], [], 0.0
    for n in SITES:
        sd = diagonalize(build_hamiltonian(TfimParams(n)))
        w = PauliString.from_sites(n, {0: "X"})
        v = PauliString.from_sites(n, {0: "Z"})
        for temp in TEMPERATURE_GRID:
            values = {}
            for t in TIMES:
                o = brute_otoc(n, temp.value, t)
                worst = max(worst, abs(o - exact_otoc(sd, temp, t, w, v)))
                values[t] = o
                rows.append([n, temp.label, repr(t), f"{o:.17g}"])
            lam = (values[0.8] - values[0.4]) / 0.4
            lam_rows.append([n, temp.label, f"{lam:.17g}"])
    if worst > AGREEMENT:
        raise SystemExit(f"package oracle disagrees with brute force by {worst:.3e}; nothing written")

    with open(out / "otoc_oracle.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["n_sites", "temperature", "t", "O"])
        wr.writerows(rows)
    with open(out / "decay_rates.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["n_sites", "temperature", "lambda"])
        wr.writerows(lam_rows)
    print(f"wrote {len(rows)} OTOC values and {len(lam_rows)} decay rates to {out} (max deviation {worst:.2e})")


if __name__ == "__main__":
    main()
