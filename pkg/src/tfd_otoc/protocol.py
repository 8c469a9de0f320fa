"""Two-copy OTOC measurement pipeline.

Per cumulative time ``t_k`` a run prepares the TFD state, applies ``W`` to
copy A, evolves copy A with ``H`` and copy B with ``-H`` (Trotterized or
exact), and measures the mirrored correlator ``V_A^dag (x) V_B^T``. In
sampling mode each shot yields one bitstring which serves both the
correlator estimate and the global Z-parity filter.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, ConfigError, PostselectionStarvedError
from .noise import NoiseModel, chunk_size, flip_bits, measure_trajectories, run_trajectories
from .rng import substream
from .spinchain import (
    SpectralDecomposition,
    Temperature,
    TfimParams,
    build_hamiltonian,
    diagonalize,
    exact_otoc,
    exact_tfd_state,
    exact_two_copy_evolve,
)
from .statevector import (
    Circuit,
    GateKind,
    GateOp,
    PauliString,
    StateVector,
    apply_circuit,
    expectation_pauli,
    new_zero_state,
    rz,
    sample_indices,
    xx,
)
from .tfd import (
    Layout,
    OptimizerConfig,
    TfdAnsatz,
    TfdParameters,
    build_tfd_circuit,
    optimize_tfd,
    prepare_state,
    reference_parameters,
    tfd_fidelity,
)

log = logging.getLogger(__name__)

T_EARLY = 0.4
T_LATE = 0.8
TIME_TOL = 1e-9


@dataclass(frozen=True)
class TrotterSchedule:
    step_durations: tuple[float, ...] = (0.2, 0.2, 0.4)

    def __post_init__(self):
        steps = tuple(float(d) for d in self.step_durations)
        if any(not (d > 0 and math.isfinite(d)) for d in steps):
            raise ArgumentError(f"Trotter steps must be positive, got {steps}")
        object.__setattr__(self, "step_durations", steps)

    @classmethod
    def uniform(cls, dt: float, total: float) -> "TrotterSchedule":
        n = round(total / dt)
        if n < 1 or abs(n * dt - total) > 1e-9:
            raise ArgumentError(f"total {total} is not a multiple of dt {dt}")
        return cls((dt,) * n)

    @property
    def cumulative_times(self) -> list[float]:
        return [float(t) for t in np.cumsum(self.step_durations)]


DEFAULT_STEP_ORDER = ("A_bonds", "A_fields", "B_bonds", "B_fields")


def build_trotter_step(p: TfimParams, dt: float, order=DEFAULT_STEP_ORDER) -> Circuit:
    """First-order step of exp(-i (H_A - H_B) dt) on 2N qubits."""
    if not dt > 0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    n = p.n_sites
    bond_angle = 2.0 * p.coupling * dt
    field_angle = 2.0 * p.field * dt
    blocks = {
        "A_bonds": [xx(i, i + 1, bond_angle) for i in range(n - 1)],
        "A_fields": [rz(i, field_angle) for i in range(n)],
        "B_bonds": [xx(n + i, n + i + 1, -bond_angle) for i in range(n - 1)],
        "B_fields": [rz(n + i, -field_angle) for i in range(n)],
    }
    if sorted(order) != sorted(blocks):
        raise ArgumentError(f"step order must be a permutation of {sorted(blocks)}")
    circ = Circuit(2 * n)
    for name in order:
        circ.extend(blocks[name])
    return circ


def _identity_run(kind: GateKind, targets, count: int) -> list[GateOp]:
    """``count`` gates whose product is exactly the identity."""
    half = math.pi / 2
    if count == 1:
        return [GateOp(kind, targets, 0.0)]
    ops = []
    pairs, odd = divmod(count, 2)
    if odd:
        pairs -= 1
    for _ in range(pairs):
        ops += [GateOp(kind, targets, half), GateOp(kind, targets, -half)]
    if odd:
        ops += [GateOp(kind, targets, half), GateOp(kind, targets, half), GateOp(kind, targets, -2 * half)]
    return ops


def pad_to_depth(circuit: Circuit, target_1q: int, target_2q: int) -> Circuit:
    """Append identity-acting gates until the gate counts reach the targets."""
    n1, n2 = circuit.gate_counts()
    if target_1q < n1 or target_2q < n2:
        raise ArgumentError(f"cannot pad ({n1}, {n2}) gates down to ({target_1q}, {target_2q})")
    q1 = next((op.targets for op in circuit.ops if not op.is_two_qubit), (0,))
    q2 = next((op.targets for op in circuit.ops if op.is_two_qubit), (0, 1))
    out = Circuit(circuit.n_qubits, circuit.ops)
    if target_1q > n1:
        out.extend(_identity_run(GateKind.RZ, q1, target_1q - n1))
    if target_2q > n2:
        out.extend(_identity_run(GateKind.XX, q2, target_2q - n2))
    return out


def max_prep_counts(n_sites: int, topology: str = "centered") -> tuple[int, int]:
    """Largest (1q, 2q) counts over all preparation layouts; the common padding target."""
    counts = []
    for layout in Layout:
        ansatz = TfdAnsatz.default(n_sites, layout, topology)
        circ = build_tfd_circuit(ansatz, TfdParameters((0.0,) * ansatz.n_params))
        counts.append(circ.gate_counts())
    return max(c[0] for c in counts), max(c[1] for c in counts)


class PrepMode(enum.Enum):
    EXACT_TFD = "exact"
    VARIATIONAL = "variational"


class Evolution(enum.Enum):
    TROTTER = "trotter"
    EXACT = "exact"


@dataclass
class OtocExperiment:
    tfim: TfimParams
    temp: Temperature
    prep: PrepMode = PrepMode.EXACT_TFD
    tfd_params: TfdParameters | None = None
    topology: str = "centered"
    w_site: int = 1
    w_pauli: str = "X"
    v_site: int = 1
    v_pauli: str = "Z"
    schedule: TrotterSchedule = field(default_factory=TrotterSchedule)
    evolution: Evolution = Evolution.TROTTER
    shots: int | None = None
    noise: NoiseModel | None = None
    seed: int = 0
    pad_depth: bool = False
    stream: int = 0
    allow_starved: bool = False

    def validate(self):
        n = self.tfim.n_sites
        for name in ("w_site", "v_site"):
            site = getattr(self, name)
            if not 1 <= site <= n:
                raise ConfigError(f"{name}={site} outside 1..{n}")
        if self.w_pauli not in ("X", "Z"):
            raise ConfigError(f"w_pauli must be X or Z, got {self.w_pauli!r}")
        if self.v_pauli not in ("X", "Y", "Z"):
            raise ConfigError(f"v_pauli must be X, Y or Z, got {self.v_pauli!r}")
        if self.shots is not None:
            if self.shots < 1:
                raise ConfigError(f"shots must be >= 1, got {self.shots}")
            if self.v_pauli != "Z":
                raise ConfigError("sampling mode measures in the computational basis; v_pauli must be Z")
        if self.noise is not None and self.evolution is Evolution.EXACT:
            raise ConfigError("noise requires TROTTER evolution (exact evolution is not a circuit)")
        if self.noise is not None and self.shots is None:
            raise ConfigError("noise requires shots")
        if self.prep is PrepMode.VARIATIONAL and self.tfd_params is None:
            raise ConfigError("VARIATIONAL preparation needs tfd_params")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass
class OtocPoint:
    t: float
    o_exact: float
    o_state: float
    parity: float
    o_sampled: float | None = None
    o_postselected: float | None = None
    kept_fraction: float | None = None
    std_error: float | None = None


@dataclass
class OtocSeries:
    temperature: Temperature
    points: list[OtocPoint] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [p.t for p in self.points]

    def values(self, use: str) -> list[float | None]:
        return [getattr(p, use) for p in self.points]

    def at(self, t: float) -> OtocPoint:
        for p in self.points:
            if abs(p.t - t) <= TIME_TOL:
                return p
        raise ArgumentError(f"series has no point at t={t}")


@dataclass(frozen=True)
class DecayRate:
    value: float
    source: str
    t_early: float = T_EARLY
    t_late: float = T_LATE


DECAY_SOURCES = ("o_exact", "o_state", "o_sampled", "o_postselected")


def decay_rate(series: OtocSeries, use: str = "o_exact") -> DecayRate:
    """Finite-difference slope (O(0.8) - O(0.4)) / 0.4, in units of J."""
    if use not in DECAY_SOURCES:
        raise ArgumentError(f"use must be one of {DECAY_SOURCES}")
    early, late = series.at(T_EARLY), series.at(T_LATE)
    o1, o2 = getattr(early, use), getattr(late, use)
    if o1 is None or o2 is None:
        raise ArgumentError(f"{use} missing at t={T_EARLY} or t={T_LATE}")
    return DecayRate((o2 - o1) / (T_LATE - T_EARLY), use)


def parity_of(indices: np.ndarray) -> np.ndarray:
    """Global Z-parity (+1/-1) of integer-encoded bitstrings."""
    idx = np.asarray(indices, dtype=np.uint64)
    ones = np.zeros(idx.shape, dtype=np.int64)
    while np.any(idx):
        ones += (idx & np.uint64(1)).astype(np.int64)
        idx = idx >> np.uint64(1)
    return 1 - 2 * (ones & 1)


def postselect(shots: list[str], keep_parity: int = -1) -> tuple[list[str], float]:
    """Keep bitstrings whose product of (+1 for '0', -1 for '1') equals ``keep_parity``."""
    if not shots:
        return [], 0.0
    want_odd = keep_parity == -1
    kept = [s for s in shots if (s.count("1") % 2 == 1) == want_odd]
    return kept, len(kept) / len(shots)


def correlator_values(indices: np.ndarray, qa: int, qb: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64)
    za = 1 - 2 * ((idx >> qa) & 1)
    zb = 1 - 2 * ((idx >> qb) & 1)
    return za * zb


def shot_statistics(indices: np.ndarray, qa: int, qb: int, keep_parity: int = -1) -> dict:
    v = correlator_values(indices, qa, qb)
    kept = parity_of(indices) == keep_parity
    n_kept = int(kept.sum())
    stats = {
        "o_sampled": float(v.mean()),
        "kept_fraction": n_kept / len(v),
        "o_postselected": None,
        "std_error": None,
    }
    if n_kept:
        vk = v[kept]
        stats["o_postselected"] = float(vk.mean())
        stats["std_error"] = float(vk.std(ddof=1) / math.sqrt(n_kept)) if n_kept > 1 else 0.0
    return stats


def _prep(exp: OtocExperiment, sd: SpectralDecomposition) -> tuple[StateVector, Circuit | None]:
    """Noiseless prepared state and, for variational prep, the circuit that made it."""
    n = exp.tfim.n_sites
    if exp.prep is PrepMode.EXACT_TFD:
        return exact_tfd_state(sd, exp.temp), None
    ansatz = TfdAnsatz.for_temperature(n, exp.temp, exp.topology)
    circ = build_tfd_circuit(ansatz, exp.tfd_params)
    if exp.pad_depth:
        circ = pad_to_depth(circ, *max_prep_counts(n, exp.topology))
    return apply_circuit(new_zero_state(2 * n), circ), circ


def run_experiment(exp: OtocExperiment) -> OtocSeries:
    exp.validate()
    n = exp.tfim.n_sites
    sd = diagonalize(build_hamiltonian(exp.tfim))
    w_op = GateOp(GateKind.PAULI_X if exp.w_pauli == "X" else GateKind.PAULI_Z, (exp.w_site - 1,))
    w_single = PauliString.from_sites(n, {exp.w_site - 1: exp.w_pauli})
    v_single = PauliString.from_sites(n, {exp.v_site - 1: exp.v_pauli})
    qa, qb = exp.v_site - 1, n + exp.v_site - 1
    mirrored = PauliString.from_sites(2 * n, {qa: exp.v_pauli, qb: exp.v_pauli})
    transpose_sign = -1.0 if exp.v_pauli == "Y" else 1.0  # Y^T = -Y
    parity_op = PauliString("Z" * (2 * n))
    keep_parity = -1 if exp.w_pauli == "X" else 1

    prepared, prep_circuit = _prep(exp, sd)
    state = apply_circuit(prepared.copy(), Circuit(2 * n, [w_op]))
    start = state.copy()

    times = [0.0] + exp.schedule.cumulative_times
    steps = [build_trotter_step(exp.tfim, dt) for dt in exp.schedule.step_durations]
    series = OtocSeries(exp.temp)
    for k, t in enumerate(times):
        if k > 0:
            if exp.evolution is Evolution.TROTTER:
                apply_circuit(state, steps[k - 1])
            else:
                state = exact_two_copy_evolve(start, sd, t)
        point = OtocPoint(
            t=t,
            o_exact=exact_otoc(sd, exp.temp, t, w_single, v_single),
            o_state=transpose_sign * expectation_pauli(state, mirrored),
            parity=expectation_pauli(state, parity_op),
        )
        if exp.shots is not None:
            if exp.noise is None:
                indices = sample_indices(state, exp.shots, substream(exp.seed, exp.stream, k))
            else:
                body = Circuit(2 * n, [w_op])
                for step in steps[:k]:
                    body = body + step
                if prep_circuit is None:
                    initial, circuit = prepared, body
                else:
                    initial, circuit = new_zero_state(2 * n), prep_circuit + body
                indices = _noisy_shots(initial, circuit, exp.noise, exp.shots, exp.seed, exp.stream, k)
            stats = shot_statistics(indices, qa, qb, keep_parity)
            if stats["o_postselected"] is None:
                msg = f"postselection kept no shots at T={exp.temp.label}, t={t:g}"
                if not exp.allow_starved:
                    raise PostselectionStarvedError(msg)
                log.warning(msg)
            point = replace(point, **stats)
        series.points.append(point)
    return series


def _noisy_shots(initial, circuit, nm: NoiseModel, shots: int, seed: int, stream: int, k: int) -> np.ndarray:
    """One trajectory per shot, in fixed-size chunks with their own substreams."""
    size = chunk_size(initial.n_qubits)
    out = []
    for c, start in enumerate(range(0, shots, size)):
        rng = substream(seed, stream, k, c)
        n_traj = min(size, shots - start)
        states = run_trajectories(initial, circuit, nm, rng, n_traj)
        idx = measure_trajectories(states, rng)
        if nm.p_readout > 0:
            idx = flip_bits(idx, initial.n_qubits, nm.p_readout, rng)
        out.append(idx)
    return np.concatenate(out)


# -- sweeps ----------------------------------------------------------------

@dataclass
class SweepEntry:
    series: OtocSeries
    rates: dict[str, float | None]
    params: TfdParameters | None = None
    prep_fidelity: float | None = None

    @property
    def decay(self) -> DecayRate:
        return DecayRate(self.rates["o_exact"], "o_exact")


def resolve_tfd_parameters(
    tfim: TfimParams,
    temp: Temperature,
    source: str,
    topology: str = "centered",
    optimizer: OptimizerConfig | None = None,
) -> tuple[TfdParameters, float]:
    """Parameters from the reference table or the optimizer, with their fidelity to the exact TFD."""
    sd = diagonalize(build_hamiltonian(tfim))
    ansatz = TfdAnsatz.for_temperature(tfim.n_sites, temp, topology)
    if source == "reference":
        params = reference_parameters(temp)
        fid = tfd_fidelity(prepare_state(ansatz, params.thetas), exact_tfd_state(sd, temp))
        return params, fid
    if source == "optimized":
        res = optimize_tfd(ansatz, temp, sd, optimizer)
        return res.params, res.fidelity
    raise ArgumentError(f"unknown parameter source {source!r}")


def _sweep_job(args) -> SweepEntry:
    exp, source, optimizer = args
    params = fid = None
    if exp.prep is PrepMode.VARIATIONAL:
        params, fid = resolve_tfd_parameters(exp.tfim, exp.temp, source, exp.topology, optimizer)
        exp = replace(exp, tfd_params=params)
    series = run_experiment(exp)
    rates = {}
    for use in DECAY_SOURCES:
        try:
            rates[use] = decay_rate(series, use).value
        except ArgumentError:
            rates[use] = None
    return SweepEntry(series, rates, params, fid)


def temperature_sweep(
    base: OtocExperiment,
    temps: list[Temperature],
    source: str = "optimized",
    optimizer: OptimizerConfig | None = None,
    jobs: int = 1,
) -> dict[Temperature, SweepEntry]:
    """Run ``base`` at each temperature; job ``i`` uses random stream ``i``.

    ``source`` ("reference" or "optimized") supplies the angles when ``base``
    uses variational preparation.
    """
    jobs_args = [
        (replace(base, temp=temp, stream=i, tfd_params=None if base.prep is PrepMode.VARIATIONAL else base.tfd_params),
         source, optimizer)
        for i, temp in enumerate(temps)
    ]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_job, jobs_args))
    else:
        results = [_sweep_job(a) for a in jobs_args]
    return dict(zip(temps, results))
