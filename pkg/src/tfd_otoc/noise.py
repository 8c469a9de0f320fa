"""Stochastic Pauli noise on pure-state trajectories.

After every gate, with probability ``p1`` (one-qubit gate) or ``p2``
(two-qubit gate), one Pauli drawn uniformly from the non-identity Paulis on
the gate's targets is inserted. Each shot is its own trajectory. Readout
errors flip each measured bit independently with probability ``p_readout``.

Trajectories are propagated as a stacked array of shape ``(n_traj, 2**n)`` so
that the gate kernels run once per gate, not once per shot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .statevector import Circuit, StateVector, apply_kernel, apply_pauli_array

ONE_QUBIT_PAULIS = ("X", "Y", "Z")
TWO_QUBIT_PAULIS = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]

# rows per trajectory chunk are capped so a chunk stays near 64 MiB
_CHUNK_AMPLITUDES = 1 << 22


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.005
    p2: float = 0.015
    p_readout: float = 0.01

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ArgumentError(f"{name}={p} is not a probability")

    @classmethod
    def from_fidelities(cls, f1: float, f2: float, p_readout: float = 0.01) -> "NoiseModel":
        return cls(1.0 - f1, 1.0 - f2, p_readout)

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_readout == 0.0


def chunk_size(n_qubits: int) -> int:
    return max(1, min(4096, _CHUNK_AMPLITUDES >> n_qubits))


def _insert_errors(states: np.ndarray, targets, p: float, rng: np.random.Generator):
    n_traj = states.shape[0]
    hit = rng.random(n_traj) < p
    paulis = ONE_QUBIT_PAULIS if len(targets) == 1 else TWO_QUBIT_PAULIS
    which = rng.integers(0, len(paulis), size=n_traj)
    rows = np.flatnonzero(hit)
    if rows.size == 0:
        return
    for k in np.unique(which[rows]):
        sel = rows[which[rows] == k]
        sub = np.ascontiguousarray(states[sel])
        flat = sub.reshape(-1)
        for q, letter in zip(targets, paulis[k]):
            apply_pauli_array(flat, letter, q)
        states[sel] = sub


def run_trajectories(
    initial: StateVector,
    circuit: Circuit,
    nm: NoiseModel,
    rng: np.random.Generator,
    n_traj: int,
) -> np.ndarray:
    """Propagate ``n_traj`` independent noisy trajectories; returns shape (n_traj, 2**n)."""
    if circuit.n_qubits != initial.n_qubits:
        raise ArgumentError("circuit and state widths differ")
    states = np.tile(initial.amplitudes, (n_traj, 1))
    flat = states.reshape(-1)
    for op in circuit.ops:
        apply_kernel(flat, op.kind, op.targets, op.angle)
        p = nm.p2 if op.is_two_qubit else nm.p1
        if p > 0.0:
            _insert_errors(states, op.targets, p, rng)
    return states


def apply_noisy_circuit(
    state: StateVector, circuit: Circuit, nm: NoiseModel, rng: np.random.Generator
) -> StateVector:
    """One trajectory of ``circuit`` under ``nm`` (readout noise is not applied here)."""
    out = run_trajectories(state, circuit, nm, rng, 1)[0]
    return StateVector(state.n_qubits, out)


def measure_trajectories(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One computational-basis outcome per trajectory row."""
    cum = np.cumsum(np.abs(states) ** 2, axis=1)
    u = rng.random(states.shape[0]) * cum[:, -1]
    idx = (cum < u[:, None]).sum(axis=1)
    return np.minimum(idx, states.shape[1] - 1)


def flip_bits(indices: np.ndarray, n_bits: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Readout noise on integer-encoded outcomes."""
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"p_readout={p} is not a probability")
    flips = rng.random((len(indices), n_bits)) < p
    masks = flips.astype(np.int64) @ (1 << np.arange(n_bits, dtype=np.int64))
    return np.asarray(indices, dtype=np.int64) ^ masks


def apply_readout_noise(bits: str, p_readout: float, rng: np.random.Generator) -> str:
    if not 0.0 <= p_readout <= 1.0:
        raise ArgumentError(f"p_readout={p_readout} is not a probability")
    flips = rng.random(len(bits)) < p_readout
    return "".join(("1" if b == "0" else "0") if f else b for b, f in zip(bits, flips))
