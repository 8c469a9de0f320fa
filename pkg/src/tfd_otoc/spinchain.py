"""Exact-diagonalization reference for the open transverse-field Ising chain.

    H = J * sum_{i<N} X_i X_{i+1} + g * sum_i Z_i

Operators are plain ``numpy`` arrays in the computational basis of the
little-endian qubit ordering used by :mod:`tfd_otoc.statevector`. Everything
temperature dependent is evaluated through the eigen-decomposition, with
Boltzmann weights shifted by the ground energy so large ``beta`` never
overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .errors import ArgumentError, CapacityError, ConsistencyError, DegeneracyError, NumericalError
from .statevector import GateKind, GateOp, PauliString, StateVector

MAX_SITES = 13
MAX_GATE_MATRIX_QUBITS = 6
HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-9

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class TfimParams:
    n_sites: int
    coupling: float = 1.0
    field: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ArgumentError(f"n_sites must be a positive integer, got {self.n_sites}")
        if not (math.isfinite(self.coupling) and math.isfinite(self.field)):
            raise ArgumentError("coupling and field must be finite")


@dataclass(frozen=True, order=True)
class Temperature:
    """Dimensionless k_B T / J. ``0`` means the ground-state limit, ``inf`` means beta = 0."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v < 0:
            raise ArgumentError(f"temperature must be >= 0, got {self.value}")
        object.__setattr__(self, "value", v)

    @classmethod
    def parse(cls, text) -> "Temperature":
        if isinstance(text, Temperature):
            return text
        if isinstance(text, str):
            t = text.strip().lower()
            if t in ("inf", "infinite", "infinity", "∞"):
                return cls(math.inf)
            try:
                return cls(float(t))
            except ValueError:
                raise ArgumentError(f"cannot parse temperature {text!r}") from None
        return cls(float(text))

    @property
    def is_zero(self) -> bool:
        return self.value == 0.0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def beta(self) -> float:
        if self.is_infinite:
            return 0.0
        if self.is_zero:
            return math.inf
        return 1.0 / self.value

    @property
    def label(self) -> str:
        if self.is_infinite:
            return "inf"
        return format(self.value, "g")

    def __str__(self):
        return self.label


ZERO = Temperature(0.0)
INFINITE = Temperature(math.inf)
TEMPERATURE_GRID = tuple(Temperature(v) for v in (0, 0.5, 1, 2, 3.5, 6, math.inf))


def pauli_matrix(p: PauliString) -> np.ndarray:
    # qubit 0 is the least significant bit, so it is the rightmost Kronecker factor
    return reduce(np.kron, [_PAULI[c] for c in reversed(p.letters)])


def build_hamiltonian(p: TfimParams) -> np.ndarray:
    n = p.n_sites
    if n > MAX_SITES:
        raise CapacityError(f"n_sites={n} exceeds dense limit {MAX_SITES}")
    dim = 1 << n
    idx = np.arange(dim)
    h = np.zeros((dim, dim))
    z = 1 - 2 * ((idx[:, None] >> np.arange(n)) & 1)
    h[idx, idx] = p.field * z.sum(axis=1)
    for i in range(n - 1):
        flipped = idx ^ ((1 << i) | (1 << (i + 1)))
        h[flipped, idx] += p.coupling
    return h


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def n_sites(self) -> int:
        return self.dim.bit_length() - 1

    def weights(self, temp: Temperature) -> np.ndarray:
        """Normalized Boltzmann probabilities p_n = exp(-beta E_n) / Z."""
        e = self.eigenvalues
        if temp.is_zero:
            if self.dim > 1 and e[1] - e[0] <= DEGENERACY_TOL:
                raise DegeneracyError(
                    f"ground state is degenerate (gap {e[1] - e[0]:.3e}); zero-temperature state is ambiguous"
                )
            w = np.zeros_like(e)
            w[0] = 1.0
            return w
        w = np.exp(-temp.beta * (e - e[0]))
        return w / w.sum()

    def log_partition_function(self, temp: Temperature) -> float:
        if temp.is_zero:
            raise ArgumentError("partition function diverges relative to ground state at T=0; use weights()")
        e = self.eigenvalues
        return float(-temp.beta * e[0] + np.log(np.exp(-temp.beta * (e - e[0])).sum()))

    def function(self, values: np.ndarray) -> np.ndarray:
        """V diag(values) V^T."""
        v = self.eigenvectors
        return (v * values) @ v.T

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i H t)."""
        return self.function(np.exp(-1j * self.eigenvalues * t))

    def thermal_state(self, temp: Temperature) -> np.ndarray:
        return self.function(self.weights(temp))


def diagonalize(h: np.ndarray) -> SpectralDecomposition:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ArgumentError(f"need a square matrix, got shape {h.shape}")
    if np.iscomplexobj(h):
        if np.max(np.abs(h.imag), initial=0.0) > HERMITIAN_TOL:
            raise ArgumentError("matrix is not real")
        h = h.real
    if np.max(np.abs(h - h.T), initial=0.0) > HERMITIAN_TOL:
        raise ArgumentError("matrix is not symmetric")
    h = 0.5 * (h + h.T)
    try:
        evals, evecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    residual = np.linalg.norm(h @ evecs - evecs * evals, axis=0)
    bound = RESIDUAL_TOL * np.maximum(1.0, np.abs(evals))
    if np.any(residual > bound):
        worst = int(np.argmax(residual / bound))
        raise NumericalError(f"eigenpair {worst} residual {residual[worst]:.3e} exceeds {bound[worst]:.3e}")
    orth = np.max(np.abs(evecs.T @ evecs - np.eye(h.shape[0])), initial=0.0)
    if orth > RESIDUAL_TOL:
        raise NumericalError(f"eigenvectors not orthonormal (deviation {orth:.3e})")
    return SpectralDecomposition(evals, evecs)


def _pair_matrix(state: StateVector, n_sites: int) -> np.ndarray:
    """View a 2N-qubit state as M[b, a] with a indexing copy A and b copy B."""
    if state.n_qubits != 2 * n_sites:
        raise ArgumentError(f"expected {2 * n_sites} qubits, got {state.n_qubits}")
    dim = 1 << n_sites
    return state.amplitudes.reshape(dim, dim)


def exact_tfd_state(sd: SpectralDecomposition, temp: Temperature) -> StateVector:
    """sum_n sqrt(p_n) |n>_A |n>_B with real eigenvectors standing in for |n*>."""
    if not np.isrealobj(sd.eigenvectors):
        raise ConsistencyError("eigenvectors must be real so that |n*> = |n>")
    amp = np.sqrt(sd.weights(temp))
    m = sd.function(amp)  # M[b, a] = sum_n amp_n v_n[b] v_n[a]
    return StateVector(2 * sd.n_sites, m.reshape(-1).astype(complex))


def exact_two_copy_evolve(state: StateVector, sd: SpectralDecomposition, t: float) -> StateVector:
    """Apply exp(-i H t) to copy A and exp(+i H t) to copy B."""
    m = _pair_matrix(state, sd.n_sites)
    u = sd.propagator(t)
    out = u.conj() @ m @ u.T
    return StateVector(state.n_qubits, out.reshape(-1))


def reduced_state_a(state: StateVector, n_sites: int) -> np.ndarray:
    """Density matrix of copy A after tracing out copy B."""
    m = _pair_matrix(state, n_sites)
    return m.T @ m.conj()


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def exact_otoc(
    sd: SpectralDecomposition,
    temp: Temperature,
    t: float,
    w: PauliString,
    v: PauliString,
) -> float:
    """Tr(rho^1/2 W^dag V(t)^dag W rho^1/2 V(t)) with V(t) = e^{iHt} V e^{-iHt}."""
    n = sd.n_sites
    if w.n_qubits != n or v.n_qubits != n:
        raise ArgumentError(f"operators must act on {n} sites")
    sqrt_rho = sd.function(np.sqrt(sd.weights(temp)))
    u = sd.propagator(t)
    wm = pauli_matrix(w)
    vt = u.conj().T @ pauli_matrix(v) @ u
    value = np.trace(sqrt_rho @ wm.conj().T @ vt.conj().T @ wm @ sqrt_rho @ vt)
    if abs(value.imag) > 1e-9:
        raise ConsistencyError(f"OTOC has imaginary part {value.imag:.3e}")
    return float(value.real)


def gate_matrix(op: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n unitary of ``op`` built from Kronecker products."""
    if n_qubits > MAX_GATE_MATRIX_QUBITS:
        raise CapacityError(f"gate_matrix limited to {MAX_GATE_MATRIX_QUBITS} qubits, got {n_qubits}")
    if max(op.targets) >= n_qubits:
        raise ArgumentError(f"{op} does not fit in {n_qubits} qubits")
    letter = {
        GateKind.RZ: "Z", GateKind.PAULI_Z: "Z", GateKind.ZZ: "Z",
        GateKind.RX: "X", GateKind.PAULI_X: "X", GateKind.XX: "X",
    }[op.kind]
    p = pauli_matrix(PauliString.from_sites(n_qubits, {q: letter for q in op.targets}))
    if not op.kind.has_angle:
        return p
    return math.cos(op.angle / 2) * np.eye(1 << n_qubits) - 1j * math.sin(op.angle / 2) * p


# -- regression fixture table ---------------------------------------------

def write_otoc_table(path, rows) -> None:
    """rows: iterable of (Temperature, t, O)."""
    lines = ["# temperature t O"]
    for temp, t, o in rows:
        lines.append(f"{temp.label} {t:.12g} {o:.12g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_otoc_table(path) -> list[tuple[Temperature, float, float]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        temp, t, o = line.split()
        rows.append((Temperature.parse(temp), float(t), float(o)))
    return rows
