import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfd_otoc.errors import ArgumentError, ReferenceNotFoundError
from tfd_otoc.spinchain import INFINITE, TEMPERATURE_GRID, ZERO, Temperature, TfimParams, build_hamiltonian, diagonalize, exact_tfd_state
from tfd_otoc.statevector import GateKind, PauliString, apply_circuit, expectation_pauli, new_zero_state
from tfd_otoc.tfd import (
    AnsatzGate,
    Layout,
    OptimizerConfig,
    TfdAnsatz,
    TfdParameters,
    build_tfd_circuit,
    layout_for,
    optimize_tfd,
    prepare_state,
    reference_parameters,
    tfd_fidelity,
)

SD3 = diagonalize(build_hamiltonian(TfimParams(3)))
thetas = st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4)


def test_layout_selection():
    assert layout_for(ZERO) is Layout.ZERO_T
    assert layout_for(INFINITE) is Layout.INFINITE_T
    assert layout_for(Temperature(2)) is Layout.FINITE_T


@pytest.mark.parametrize(
    "layout,topology,counts",
    [
        (Layout.INFINITE_T, "centered", (3, 3)),
        (Layout.ZERO_T, "centered", (8, 7)),
        (Layout.FINITE_T, "centered", (3, 11)),
        (Layout.FINITE_T, "uniform", (3, 10)),
    ],
)
def test_gate_counts(layout, topology, counts):
    ansatz = TfdAnsatz.default(3, layout, topology)
    circ = build_tfd_circuit(ansatz, TfdParameters((0.1,) * ansatz.n_params))
    assert circ.gate_counts() == counts


def test_centre_pairs_for_even_chain():
    ansatz = TfdAnsatz.default(4, Layout.FINITE_T)
    zz = [g.targets for g in ansatz.gates if g.kind is GateKind.ZZ]
    assert zz[4:] == [(1, 5), (2, 6)]


def test_every_slot_must_be_used():
    with pytest.raises(ArgumentError):
        TfdAnsatz(2, Layout.INFINITE_T, (AnsatzGate(GateKind.XX, (0, 2), 0),))
    with pytest.raises(ArgumentError):
        TfdAnsatz.default(3, Layout.FINITE_T, "ring")


def test_infinite_temperature_is_exact_at_half_pi():
    ansatz = TfdAnsatz.for_temperature(3, INFINITE)
    psi = prepare_state(ansatz, (0.5, 0.5))
    assert tfd_fidelity(psi, exact_tfd_state(SD3, INFINITE)) == pytest.approx(1.0, abs=1e-12)


@given(thetas)
def test_fast_path_matches_circuit(ts):
    ansatz = TfdAnsatz.default(3, Layout.FINITE_T)
    a = prepare_state(ansatz, ts)
    b = apply_circuit(new_zero_state(6), build_tfd_circuit(ansatz, TfdParameters(ts)))
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-13)


@given(st.sampled_from(list(Layout)), thetas)
def test_ansatz_preserves_even_parity(layout, ts):
    ansatz = TfdAnsatz.default(3, layout)
    psi = prepare_state(ansatz, ts[: ansatz.n_params])
    assert expectation_pauli(psi, PauliString("Z" * 6)) == pytest.approx(1.0, abs=1e-12)


def test_wrong_parameter_count():
    with pytest.raises(ArgumentError):
        build_tfd_circuit(TfdAnsatz.default(3, Layout.ZERO_T), TfdParameters((0.1, 0.2, 0.3)))
    with pytest.raises(ArgumentError):
        TfdParameters((0.1, float("nan")))


def test_reference_table():
    assert reference_parameters(INFINITE).thetas == (0.5, 0.5)
    assert reference_parameters(ZERO).thetas == (0.146, 0.258)
    assert reference_parameters(Temperature(2)).thetas == (0.643, 0.248, -0.070, 1.254)
    assert {len(reference_parameters(t).thetas) for t in TEMPERATURE_GRID} == {2, 4}
    with pytest.raises(ReferenceNotFoundError):
        reference_parameters(Temperature(1.5))


def test_fidelity_requires_normalized_states():
    psi = exact_tfd_state(SD3, Temperature(1))
    bad = psi.copy()
    bad.amplitudes *= 2
    with pytest.raises(ArgumentError):
        tfd_fidelity(bad, psi)


def test_optimizer_is_seeded_and_reports_running_best():
    ansatz = TfdAnsatz.for_temperature(3, Temperature(2))
    cfg = OptimizerConfig(restarts=3, seed=4)
    a = optimize_tfd(ansatz, Temperature(2), SD3, cfg)
    b = optimize_tfd(ansatz, Temperature(2), SD3, cfg)
    assert a.params == b.params and a.fidelity == b.fidelity
    assert len(a.restart_fidelities) == 3
    assert a.running_best == sorted(a.running_best)
    assert a.fidelity == pytest.approx(max(a.restart_fidelities))
    assert a.evaluations > 0


@pytest.mark.parametrize("temp", TEMPERATURE_GRID)
def test_two_site_optimizer_reaches_target(temp):
    sd = diagonalize(build_hamiltonian(TfimParams(2)))
    res = optimize_tfd(TfdAnsatz.for_temperature(2, temp), temp, sd, OptimizerConfig(restarts=5))
    assert res.fidelity >= 0.97
