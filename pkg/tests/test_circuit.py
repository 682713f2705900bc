from __future__ import annotations

import numpy as np
import pytest

from dflo import circuit, evolve, model, oracle, state
from dflo.circuit import Lindblad, Measure, PrepareNumber, PrepareVacuum, Program, Unitary
from dflo.errors import NonPhysicalResidue, ProgramError, ValidationError

from conftest import hopping_hamiltonian, random_antisymmetric

SHOTS = 100_000


def _within_3_sigma(count, shots, p):
    return abs(count - shots * p) <= 3 * np.sqrt(shots * p * (1 - p))


# -- program invariants --------------------------------------------------------------


def test_program_requires_leading_preparation():
    with pytest.raises(ProgramError) as info:
        Program(1, [Measure([0])])
    assert info.value.gate_index == 0
    with pytest.raises(ProgramError):
        Program(1, [])


def test_program_single_preparation():
    with pytest.raises(ProgramError) as info:
        Program(1, [PrepareVacuum(), Measure([0]), PrepareVacuum()])
    assert info.value.gate_index == 2


def test_program_dimension_and_range_checks():
    with pytest.raises(ProgramError):
        Program(2, [PrepareNumber([1])])
    with pytest.raises(ProgramError):
        Program(1, [PrepareVacuum(), Lindblad(model.damping_model(2), 1.0)])
    with pytest.raises(ProgramError):
        Program(2, [PrepareVacuum(), Measure([2])])
    with pytest.raises(ProgramError):
        Program(2, [PrepareVacuum(), Measure([0, 0])])
    with pytest.raises(ProgramError) as info:
        Program(1, [PrepareVacuum(), Unitary(model.QuadraticHamiltonian.zero(1), -1.0)])
    assert info.value.gate_index == 1
    with pytest.raises(ProgramError):
        Program(1, [PrepareVacuum(), Lindblad(model.damping_model(), 1.0, "unitary")])


def test_measured_modes_count():
    p = Program(3, [PrepareVacuum(), Measure([0, 2]), Measure([1])])
    assert p.measured_modes == 3


# -- single runs -----------------------------------------------------------------------------


def test_vacuum_measure_all():
    result = circuit.run(Program(3, [PrepareVacuum(), Measure([0, 1, 2])]), seed=0)
    assert result.bits == "000"
    assert all(r.probability == 1.0 for r in result.records)
    assert np.array_equal(result.final_state, state.vacuum(3))


def test_run_to_dict_is_json_ready_and_has_no_timings():
    import json

    result = circuit.run(Program(1, [PrepareNumber([1]), Lindblad(model.damping_model(), 0.5), Measure([0])]), 3)
    d = result.to_dict()
    assert set(d) == {"records", "outcomes", "final_state", "backends"}
    assert d["backends"] == [None, "lyapunov", None]
    json.dumps(d)
    assert len(result.timings) == 3


def test_damping_program_probability_and_frequency():
    program = Program(1, [PrepareNumber([1]), Lindblad(model.damping_model(), 0.5), Measure([0])])
    rec = circuit.run(program, seed=1).records[0]
    p1 = np.exp(-1.0)
    assert (rec.probability if rec.outcome else 1 - rec.probability) == pytest.approx(p1, abs=1e-12)
    hist = circuit.sample_shots(program, SHOTS, seed=7)
    assert _within_3_sigma(hist.get("1", 0), SHOTS, p1)


def test_unitary_then_jump_free_lindblad_equals_merged_evolution(rng):
    h = model.QuadraticHamiltonian(random_antisymmetric(rng, 4))
    prog = Program(2, [PrepareNumber([1, 0]), Unitary(h, 0.3), Lindblad(model.LindbladModel.unitary(h), 0.5)])
    merged = Program(2, [PrepareNumber([1, 0]), Unitary(h, 0.8)])
    a = circuit.run(prog, 0).final_state
    b = circuit.run(merged, 0).final_state
    assert np.abs(state.occupations(a) - state.occupations(b)).max() <= 1e-9
    assert circuit.run(prog, 0).backends[2] == "unitary"


def test_run_matches_oracle_on_mixed_program():
    prog = Program(
        2,
        [
            PrepareNumber([1, 0]),
            Unitary(hopping_hamiltonian(), np.pi / 4),
            Lindblad(model.damping_model(2, rate=0.3, mode=1), 0.4),
        ],
    )
    rho = oracle.dense_unitary_evolve(oracle.number_state_density([1, 0]), hopping_hamiltonian(), np.pi / 4)
    rho = oracle.dense_lindblad_evolve(rho, prog.gates[2].model, 0.4)
    assert np.allclose(circuit.run(prog, 0).final_state, oracle.dense_covariance(rho), atol=1e-10)


def test_errors_carry_gate_index():
    prog = Program(1, [PrepareVacuum(), Lindblad(model.damping_model(), 1e4, "homogeneous")])
    with pytest.raises(Exception) as info:
        circuit.run(prog, 0)
    assert info.value.gate_index == 1


def test_debug_mode_detects_unphysical_state(monkeypatch):
    prog = Program(1, [PrepareVacuum(), Lindblad(model.damping_model(), 0.1)])
    assert circuit.run(prog, 0, debug=True).bits == ""

    def broken(m, mdl, t, backend="auto"):
        return 2.0 * m, evolve.Backend.LYAPUNOV

    monkeypatch.setattr(evolve, "evolve_with_backend", broken)
    circuit.run(prog, 0)  # unchecked
    with pytest.raises(NonPhysicalResidue):
        circuit.run(prog, 0, debug=True)


# -- shots --------------------------------------------------------------------------------------


def test_sample_shots_vacuum_single_bin():
    hist = circuit.sample_shots(Program(4, [PrepareVacuum(), Measure([0, 1, 2, 3])]), 500, seed=3)
    assert hist == {"0000": 500}


def test_sample_shots_maximally_mixed():
    prog = Program(1, [PrepareVacuum(), Lindblad(model.loss_gain_model(1.0, 1.0), 30.0), Measure([0])])
    hist = circuit.sample_shots(prog, SHOTS, seed=11)
    assert set(hist) == {"0", "1"}
    assert _within_3_sigma(hist["1"], SHOTS, 0.5)


def test_sample_shots_deterministic_and_shot_k_is_stream_k():
    prog = Program(2, [PrepareNumber([1, 0]), Unitary(hopping_hamiltonian(), np.pi / 4), Measure([0, 1])])
    assert circuit.sample_shots(prog, 200, 42) == circuit.sample_shots(prog, 200, 42)
    one = circuit.sample_shots(prog, 1, 42)
    assert one == {circuit.run(prog, 42, stream=0).bits: 1}
    hist = {}
    for k in range(50):
        bits = circuit.run(prog, 42, stream=k).bits
        hist[bits] = hist.get(bits, 0) + 1
    assert circuit.sample_shots(prog, 50, 42) == dict(sorted(hist.items()))


def test_prefix_caching_matches_independent_runs():
    prog = Program(
        2,
        [
            PrepareNumber([1, 1]),
            Lindblad(model.damping_model(2, rate=0.5), 0.6),
            Measure([0]),
            Unitary(hopping_hamiltonian(), 0.4),
            Measure([1]),
        ],
    )
    shots = 3000
    cached = circuit.sample_shots(prog, shots, 9)
    independent = {}
    for k in range(shots):
        bits = circuit.run(prog, 9, stream=k).bits
        independent[bits] = independent.get(bits, 0) + 1
    assert cached == dict(sorted(independent.items()))


def test_sample_shots_rejects_zero():
    with pytest.raises(ValidationError):
        circuit.sample_shots(Program(1, [PrepareVacuum()]), 0, 0)
