"""Dense state-vector simulator.

Basis index ``b`` stores qubit ``k`` in bit ``k`` (qubit 0 is least significant).
For a two-copy system of ``N`` sites, qubits ``0..N-1`` are copy A and
``N..2N-1`` are copy B.

Gate kernels work on flat complex arrays of length ``batch * 2**n`` and update
them in place, so the same code drives a single state and a stack of
trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, CapacityError, ConsistencyError
from .rng import substream

MAX_QUBITS = 26
IMAG_TOL = 1e-9


class GateKind(enum.Enum):
    RZ = "RZ"
    RX = "RX"
    XX = "XX"
    ZZ = "ZZ"
    PAULI_X = "X"
    PAULI_Z = "Z"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.XX, GateKind.ZZ) else 1

    @property
    def has_angle(self) -> bool:
        return self not in (GateKind.PAULI_X, GateKind.PAULI_Z)


@dataclass(frozen=True)
class GateOp:
    """One gate. Rotations are ``exp(-i angle/2 P)`` with ``P`` the gate's Pauli."""

    kind: GateKind
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != self.kind.arity:
            raise ArgumentError(f"{self.kind.value} takes {self.kind.arity} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ArgumentError(f"duplicate targets {self.targets}")
        if any(t < 0 for t in self.targets):
            raise ArgumentError(f"negative target in {self.targets}")
        if self.kind.has_angle:
            if self.angle is None or not np.isfinite(self.angle):
                raise ArgumentError(f"{self.kind.value} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ArgumentError(f"{self.kind.value} takes no angle")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind.arity == 2

    def inverse(self) -> "GateOp":
        if self.kind.has_angle:
            return GateOp(self.kind, self.targets, -self.angle)
        return self


def rz(q, theta):
    return GateOp(GateKind.RZ, (q,), theta)


def rx(q, theta):
    return GateOp(GateKind.RX, (q,), theta)


def xx(a, b, theta):
    return GateOp(GateKind.XX, (a, b), theta)


def zz(a, b, theta):
    return GateOp(GateKind.ZZ, (a, b), theta)


def pauli_x(q):
    return GateOp(GateKind.PAULI_X, (q,))


def pauli_z(q):
    return GateOp(GateKind.PAULI_Z, (q,))


@dataclass
class Circuit:
    n_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        self.ops = list(self.ops)
        for op in self.ops:
            self._check(op)

    def _check(self, op: GateOp):
        if max(op.targets) >= self.n_qubits:
            raise ArgumentError(f"{op} targets a qubit outside 0..{self.n_qubits - 1}")

    def append(self, op: GateOp) -> "Circuit":
        self._check(op)
        self.ops.append(op)
        return self

    def extend(self, ops) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ArgumentError("cannot concatenate circuits of different width")
        return Circuit(self.n_qubits, self.ops + other.ops)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def gate_counts(self) -> tuple[int, int]:
        """(single-qubit count, two-qubit count)."""
        n2 = sum(op.is_two_qubit for op in self.ops)
        return len(self.ops) - n2, n2


@dataclass(frozen=True)
class PauliString:
    """Per-qubit letters; ``letters[k]`` acts on qubit ``k``."""

    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set("IXYZ"):
            raise ArgumentError(f"bad Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_sites(cls, n_qubits: int, sites: dict[int, str]) -> "PauliString":
        letters = ["I"] * n_qubits
        for q, p in sites.items():
            if not 0 <= q < n_qubits:
                raise ArgumentError(f"qubit {q} outside 0..{n_qubits - 1}")
            letters[q] = p
        return cls("".join(letters))

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def support(self) -> list[tuple[int, str]]:
        return [(q, p) for q, p in enumerate(self.letters) if p != "I"]


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size != 1 << self.n_qubits:
            raise ArgumentError(f"need {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, got shape {amps.shape}")
        self.amplitudes = amps

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def check_capacity(n_qubits: int):
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits={n_qubits} outside supported range 1..{MAX_QUBITS}")


def new_zero_state(n_qubits: int) -> StateVector:
    check_capacity(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(n_qubits: int, index: int) -> StateVector:
    check_capacity(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


# -- kernels ---------------------------------------------------------------

def _view(amps: np.ndarray, shape) -> np.ndarray:
    v = amps.view()
    v.shape = shape  # raises rather than silently copying
    return v


def _one_qubit(amps, q):
    return _view(amps, (-1, 2, 1 << q))


def _two_qubit(amps, a, b):
    lo, hi = (a, b) if a < b else (b, a)
    return _view(amps, (-1, 2, 1 << (hi - lo - 1), 2, 1 << lo))


def apply_pauli_array(amps: np.ndarray, letter: str, q: int):
    """Multiply by a single-qubit Pauli in place."""
    v = _one_qubit(amps, q)
    if letter == "X":
        v[:, [0, 1]] = v[:, [1, 0]]
    elif letter == "Z":
        v[:, 1] *= -1
    elif letter == "Y":
        a0 = v[:, 0].copy()
        v[:, 0] = -1j * v[:, 1]
        v[:, 1] = 1j * a0
    elif letter != "I":
        raise ArgumentError(f"unknown Pauli {letter!r}")


def apply_kernel(amps: np.ndarray, kind: GateKind, targets: tuple[int, ...], angle: float | None = None):
    """In-place gate application on a flat (possibly batched) amplitude array.

    No validation; callers go through :func:`apply_gate` unless they have
    already checked targets (the optimizer's inner loop does).
    """
    if kind is GateKind.PAULI_X:
        apply_pauli_array(amps, "X", targets[0])
        return
    if kind is GateKind.PAULI_Z:
        apply_pauli_array(amps, "Z", targets[0])
        return

    half = 0.5 * angle
    c, s = math.cos(half), math.sin(half)
    if kind is GateKind.RZ:
        v = _one_qubit(amps, targets[0])
        v *= np.array([complex(c, -s), complex(c, s)]).reshape(1, 2, 1)
    elif kind is GateKind.RX:
        v = _one_qubit(amps, targets[0])
        flipped = v[:, ::-1] * complex(0.0, -s)
        v *= c
        v += flipped
    elif kind is GateKind.ZZ:
        v = _two_qubit(amps, *targets)
        even, odd = complex(c, -s), complex(c, s)
        v *= np.array([[even, odd], [odd, even]]).reshape(1, 2, 1, 2, 1)
    elif kind is GateKind.XX:
        v = _two_qubit(amps, *targets)
        flipped = v[:, ::-1, :, ::-1] * complex(0.0, -s)
        v *= c
        v += flipped
    else:  # pragma: no cover
        raise ArgumentError(f"unsupported gate {kind}")


def apply_gate_array(amps: np.ndarray, op: GateOp):
    apply_kernel(amps, op.kind, op.targets, op.angle)


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    if max(op.targets) >= state.n_qubits:
        raise ArgumentError(f"{op} targets a qubit outside 0..{state.n_qubits - 1}")
    apply_gate_array(state.amplitudes, op)
    return state


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    if circuit.n_qubits != state.n_qubits:
        raise ArgumentError(f"circuit has {circuit.n_qubits} qubits, state has {state.n_qubits}")
    for op in circuit.ops:
        apply_gate_array(state.amplitudes, op)
    return state


def apply_pauli_string(state: StateVector, p: PauliString) -> StateVector:
    if p.n_qubits != state.n_qubits:
        raise ArgumentError(f"Pauli string has {p.n_qubits} qubits, state has {state.n_qubits}")
    for q, letter in p.support():
        apply_pauli_array(state.amplitudes, letter, q)
    return state


# -- measurements ----------------------------------------------------------

def expectation_pauli(state: StateVector, p: PauliString) -> float:
    moved = apply_pauli_string(state.copy(), p)
    value = np.vdot(state.amplitudes, moved.amplitudes)
    if abs(value.imag) > IMAG_TOL:
        raise ConsistencyError(f"<{p.letters}> has imaginary part {value.imag:.3e}")
    return float(value.real)


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise ArgumentError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner_product(a, b)) ** 2


def sample_indices(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw basis indices from |amplitude|^2."""
    if shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")
    probs = state.probabilities()
    probs /= probs.sum()
    return rng.choice(probs.size, size=shots, p=probs)


def index_to_bitstring(index: int, n_qubits: int) -> str:
    """Character ``k`` of the result is the bit of qubit ``k``."""
    return format(int(index), f"0{n_qubits}b")[::-1]


def bitstring_to_index(bits: str) -> int:
    return int(bits[::-1], 2)


def sample_bitstrings(state: StateVector, shots: int, seed: int) -> list[str]:
    idx = sample_indices(state, shots, substream(seed))
    return [index_to_bitstring(i, state.n_qubits) for i in idx]
