"""Variational thermofield-double preparation.

Angles are carried in units of pi everywhere except inside
:func:`build_tfd_circuit`, which is the only place they become radians.

Three circuit layouts are provided:

* ``INFINITE_T`` (2 parameters): XX(t1) on every mirrored pair (i, N+i), then
  Z(t2) on the copy-A qubit. At t1 = t2 = 1/2 this is exactly the product of
  Bell pairs.
* ``ZERO_T`` (2 parameters): XX(t1) on every mirrored pair, then an XY-type
  rotation with angle t2 on every intra-copy bond. The XY rotation is an XX
  gate conjugated by fixed Z(+-1/2) rotations, which keeps the circuit real
  so that it can reach |E0>|E0> (a product state between the copies).
* ``FINITE_T`` (4 parameters): the ``INFINITE_T`` layer, then XX(t3) on every
  intra-copy bond of both copies, then ZZ(t4) on every mirrored pair. The
  default ``"centered"`` topology applies one more ZZ(t4) to the central
  pair(s); ``"uniform"`` omits it.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import minimize

from .errors import ArgumentError, ReferenceNotFoundError
from .rng import substream
from .spinchain import SpectralDecomposition, Temperature, exact_tfd_state
from .statevector import Circuit, GateKind, GateOp, StateVector, apply_kernel, inner_product

log = logging.getLogger(__name__)

FIDELITY_TARGET = 0.97


class Layout(enum.Enum):
    INFINITE_T = "infinite_t"
    ZERO_T = "zero_t"
    FINITE_T = "finite_t"

    @property
    def n_params(self) -> int:
        return 4 if self is Layout.FINITE_T else 2


def layout_for(temp: Temperature) -> Layout:
    if temp.is_infinite:
        return Layout.INFINITE_T
    if temp.is_zero:
        return Layout.ZERO_T
    return Layout.FINITE_T


@dataclass(frozen=True)
class AnsatzGate:
    """Angle in units of pi is ``scale * thetas[slot]``, or ``scale`` itself when ``slot`` is None."""

    kind: GateKind
    targets: tuple[int, ...]
    slot: int | None
    scale: float = 1.0


@dataclass(frozen=True)
class TfdAnsatz:
    n_sites: int
    layout: Layout
    gates: tuple[AnsatzGate, ...]
    topology: str = "centered"

    def __post_init__(self):
        n_qubits = 2 * self.n_sites
        used = set()
        for g in self.gates:
            GateOp(g.kind, g.targets, 0.0 if g.kind.has_angle else None)  # arity/duplicate check
            if max(g.targets) >= n_qubits:
                raise ArgumentError(f"ansatz gate {g} does not fit in {n_qubits} qubits")
            if g.slot is not None:
                if not 0 <= g.slot < self.n_params:
                    raise ArgumentError(f"slot {g.slot} outside 0..{self.n_params - 1}")
                used.add(g.slot)
        if used != set(range(self.n_params)):
            raise ArgumentError(f"{self.layout.name} ansatz must use every parameter slot, used {sorted(used)}")

    @property
    def n_params(self) -> int:
        return self.layout.n_params

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_sites

    @classmethod
    def default(cls, n_sites: int, layout: Layout, topology: str = "centered") -> "TfdAnsatz":
        n = n_sites
        pairs = [(i, n + i) for i in range(n)]
        bonds = [(c + i, c + i + 1) for c in (0, n) for i in range(n - 1)]
        gates = [AnsatzGate(GateKind.XX, p, 0) for p in pairs]
        if layout is Layout.ZERO_T:
            for a, b in bonds:
                gates += [
                    AnsatzGate(GateKind.RZ, (b,), None, 0.5),
                    AnsatzGate(GateKind.XX, (a, b), 1),
                    AnsatzGate(GateKind.RZ, (b,), None, -0.5),
                ]
            return cls(n, layout, tuple(gates), topology)
        gates += [AnsatzGate(GateKind.RZ, (i,), 1) for i in range(n)]
        if layout is Layout.FINITE_T:
            if topology not in ("centered", "uniform"):
                raise ArgumentError(f"unknown topology {topology!r}")
            gates += [AnsatzGate(GateKind.XX, b, 2) for b in bonds]
            gates += [AnsatzGate(GateKind.ZZ, p, 3) for p in pairs]
            if topology == "centered":
                centre = sorted({(n - 1) // 2, n // 2})
                gates += [AnsatzGate(GateKind.ZZ, pairs[i], 3) for i in centre]
        return cls(n, layout, tuple(gates), topology)

    @classmethod
    def for_temperature(cls, n_sites: int, temp: Temperature, topology: str = "centered") -> "TfdAnsatz":
        return cls.default(n_sites, layout_for(temp), topology)


@dataclass(frozen=True)
class TfdParameters:
    thetas: tuple[float, ...]
    temperature: Temperature | None = None

    def __post_init__(self):
        thetas = tuple(float(x) for x in self.thetas)
        if not all(math.isfinite(x) for x in thetas):
            raise ArgumentError(f"non-finite angle in {thetas}")
        object.__setattr__(self, "thetas", thetas)


def _reference_table() -> dict[str, tuple[float, ...]]:
    text = resources.files("tfd_otoc").joinpath("data/tfd_reference.csv").read_text()
    rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#"))]
    header, *params = rows
    table = {}
    for col, label in enumerate(header[1:], start=1):
        values = [r[col] for r in params]
        table[Temperature.parse(label).label] = tuple(float(v) for v in values if v.strip())
    return table


def reference_parameters(temp: Temperature) -> TfdParameters:
    table = _reference_table()
    try:
        thetas = table[temp.label]
    except KeyError:
        raise ReferenceNotFoundError(
            f"no tabulated angles for T={temp.label}; tabulated: {', '.join(table)}"
        ) from None
    return TfdParameters(thetas, temp)


def _angles(ansatz: TfdAnsatz, thetas) -> list[float]:
    return [
        math.pi * (g.scale if g.slot is None else g.scale * thetas[g.slot])
        for g in ansatz.gates
    ]


def build_tfd_circuit(ansatz: TfdAnsatz, params: TfdParameters) -> Circuit:
    if len(params.thetas) != ansatz.n_params:
        raise ArgumentError(f"{ansatz.layout.name} takes {ansatz.n_params} angles, got {len(params.thetas)}")
    ops = [GateOp(g.kind, g.targets, a) for g, a in zip(ansatz.gates, _angles(ansatz, params.thetas))]
    return Circuit(ansatz.n_qubits, ops)


def prepare_state(ansatz: TfdAnsatz, thetas) -> StateVector:
    """Run the ansatz on |0...0> without building GateOp objects (optimizer hot path)."""
    amps = np.zeros(1 << ansatz.n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    for g, angle in zip(ansatz.gates, _angles(ansatz, thetas)):
        apply_kernel(amps, g.kind, g.targets, angle)
    return StateVector(ansatz.n_qubits, amps)


def tfd_fidelity(prepared: StateVector, exact: StateVector) -> float:
    for s in (prepared, exact):
        if abs(s.norm_sq() - 1.0) > 1e-9:
            raise ArgumentError(f"state not normalized (norm^2 = {s.norm_sq():.12f})")
    return min(1.0, abs(inner_product(exact, prepared)) ** 2)


@dataclass
class OptimizerConfig:
    restarts: int = 20
    seed: int = 0
    xatol: float = 1e-6
    max_evals: int = 2000

    def __post_init__(self):
        if self.restarts < 1 or self.max_evals < 1:
            raise ArgumentError("restarts and max_evals must be >= 1")


@dataclass
class OptimizationResult:
    params: TfdParameters
    fidelity: float
    restart_fidelities: list[float] = field(default_factory=list)
    evaluations: int = 0

    @property
    def running_best(self) -> list[float]:
        return list(np.maximum.accumulate(self.restart_fidelities))


def optimize_tfd(
    ansatz: TfdAnsatz,
    temp: Temperature,
    sd: SpectralDecomposition,
    cfg: OptimizerConfig | None = None,
) -> OptimizationResult:
    """Nelder-Mead on 1 - fidelity from ``cfg.restarts`` random starts in (-1, 1].

    Restart ``r`` draws its start from ``substream(cfg.seed, r)``. The first
    restart reaching the best fidelity wins.
    """
    cfg = cfg or OptimizerConfig()
    target = exact_tfd_state(sd, temp).amplitudes

    def infidelity(thetas):
        psi = prepare_state(ansatz, thetas).amplitudes
        return 1.0 - abs(np.vdot(target, psi)) ** 2

    best_x, best_f = None, -1.0
    fidelities, evals = [], 0
    for r in range(cfg.restarts):
        rng = substream(cfg.seed, r)
        x0 = 1.0 - rng.uniform(0.0, 2.0, ansatz.n_params)  # (-1, 1]
        res = minimize(
            infidelity,
            x0,
            method="Nelder-Mead",
            options={"xatol": cfg.xatol, "fatol": math.inf, "maxfev": cfg.max_evals},
        )
        evals += res.nfev
        f = 1.0 - float(res.fun)
        fidelities.append(f)
        if f > best_f:
            best_x, best_f = res.x, f
    log.debug("T=%s best fidelity %.6f after %d evaluations", temp.label, best_f, evals)
    return OptimizationResult(TfdParameters(tuple(best_x), temp), min(best_f, 1.0), fidelities, evals)
