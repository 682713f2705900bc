from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from dflo import evolve, model, oracle, state
from dflo.errors import IndexOutOfRange, LengthMismatch, NotAntisymmetric, OddDimension, SelfHopping

from conftest import random_antisymmetric


def _dense_dirac(n, energies=(), hoppings=(), pairings=()):
    a = [oracle.annihilation_operator(n, j) for j in range(n)]
    ad = [x.conj().T for x in a]
    op = np.zeros((2**n, 2**n), dtype=complex)
    for j, eps in energies:
        op += eps * ad[j] @ a[j]
    for j, k, t in hoppings:
        op += t * ad[j] @ a[k] + np.conj(t) * ad[k] @ a[j]
    for j, k, s in pairings:
        op += s * ad[j] @ ad[k] + np.conj(s) * a[k] @ a[j]
    return op


def _equal_up_to_constant(a, b, tol=1e-12):
    d = a - b
    shift = np.trace(d) / d.shape[0]
    return np.linalg.norm(d - shift * np.eye(d.shape[0])) <= tol


def test_single_energy_term_gives_minus_epsilon():
    h = model.hamiltonian_from_dirac(1, energies=[(0, 0.7)]).h
    assert np.array_equal(h, [[0.0, -0.7], [0.7, 0.0]])


def test_empty_dirac_hamiltonian_is_zero():
    assert np.array_equal(model.hamiltonian_from_dirac(3).h, np.zeros((6, 6)))


def test_hopping_matches_dense_operator():
    h = model.hamiltonian_from_dirac(2, hoppings=[(0, 1, 1.0)])
    assert _equal_up_to_constant(oracle.dense_hamiltonian(h), _dense_dirac(2, hoppings=[(0, 1, 1.0)]))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_dirac_round_trip_random(n, seed):
    rng = np.random.default_rng(seed)
    energies = [(j, float(rng.normal())) for j in range(n)]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    hop = [(j, k, complex(rng.normal(), rng.normal())) for j, k in pairs]
    pair = [(j, k, complex(rng.normal(), rng.normal())) for j, k in pairs]
    h = model.hamiltonian_from_dirac(n, energies, hop, pair)
    assert _equal_up_to_constant(oracle.dense_hamiltonian(h), _dense_dirac(n, energies, hop, pair), 1e-11)


def test_dirac_hamiltonian_errors():
    with pytest.raises(SelfHopping):
        model.hamiltonian_from_dirac(2, hoppings=[(1, 1, 1.0)])
    with pytest.raises(SelfHopping):
        model.hamiltonian_from_dirac(2, pairings=[(0, 0, 1.0)])
    with pytest.raises(IndexOutOfRange):
        model.hamiltonian_from_dirac(2, energies=[(2, 1.0)])


def test_hamiltonian_validation():
    with pytest.raises(NotAntisymmetric):
        model.QuadraticHamiltonian(np.ones((2, 2)))
    with pytest.raises(OddDimension):
        model.QuadraticHamiltonian(np.zeros((3, 3)))


def test_jump_annihilator_and_creator():
    assert np.allclose(model.jump_from_dirac(1, [0], [1]).coeffs, [0.5, -0.5j])
    assert np.allclose(model.jump_from_dirac(1, [1], [0]).coeffs, [0.5, 0.5j])
    assert np.array_equal(model.jump_from_dirac(2, [0, 0], [0, 0]).coeffs, np.zeros(4))


def test_jump_matches_dense_annihilator():
    for n, j in [(1, 0), (3, 1)]:
        beta = np.zeros(n)
        beta[j] = 1.0
        l = model.jump_from_dirac(n, np.zeros(n), beta)
        assert np.allclose(oracle.dense_jump(l.coeffs), oracle.annihilation_operator(n, j), atol=1e-15)


def test_jump_length_mismatch():
    with pytest.raises(LengthMismatch):
        model.jump_from_dirac(2, [1.0], [0.0, 0.0])


def test_bath_matrix_examples():
    assert np.array_equal(model.bath_matrix(model.LindbladModel.unitary(model.QuadraticHamiltonian.zero(1))), np.zeros((2, 2)))
    b = model.bath_matrix(model.damping_model())
    assert np.allclose(b, [[0.25, 0.25j], [-0.25j, 0.25]])


def test_bath_matrix_two_jumps_is_sum(rng):
    l1 = model.LindbladOperator(rng.normal(size=4) + 1j * rng.normal(size=4))
    l2 = model.LindbladOperator(rng.normal(size=4) + 1j * rng.normal(size=4))
    m = model.LindbladModel(model.QuadraticHamiltonian.zero(2), (l1, l2))
    b = model.bath_matrix(m)
    assert np.allclose(b, np.outer(l1.coeffs, l1.coeffs.conj()) + np.outer(l2.coeffs, l2.coeffs.conj()))
    assert np.array_equal(b, b.conj().T)
    assert np.min(np.linalg.eigvalsh(b)) >= -model.PSD_TOL


def test_drift_noise_without_jumps_is_plus_h(rng):
    # the covariance rotates as exp(+h t); see the dense-oracle test below
    h = random_antisymmetric(rng, 4)
    x, y = model.drift_and_noise(model.LindbladModel.unitary(model.QuadraticHamiltonian(h)))
    assert np.array_equal(x, h)
    assert np.array_equal(y, np.zeros((4, 4)))


def test_drift_sign_agrees_with_dense_unitary_dynamics(rng):
    h = model.QuadraticHamiltonian(random_antisymmetric(rng, 4, 0.5))
    rho = oracle.dense_unitary_evolve(oracle.number_state_density([1, 0]), h, 0.3)
    x, _ = model.drift_and_noise(model.LindbladModel.unitary(h))
    r = la.expm(x * 0.3)
    predicted = r @ state.number_state([1, 0]) @ r.T
    assert np.allclose(oracle.dense_covariance(rho), predicted, atol=1e-12)


def test_drift_noise_damping_and_pumping():
    x, y = model.drift_and_noise(model.damping_model())
    assert np.allclose(x, -np.eye(2)) and np.allclose(y, [[0, 2], [-2, 0]])
    x, y = model.drift_and_noise(model.pumping_model())
    assert np.allclose(x, -np.eye(2)) and np.allclose(y, [[0, -2], [2, 0]])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_drift_is_dissipative(n, seed):
    m = model.random_model(n, np.random.default_rng(seed), n_jumps=3)
    x, y = model.drift_and_noise(m)
    assert np.max(np.linalg.eigvalsh(0.5 * (x + x.T))) <= 1e-12
    assert np.array_equal(y, -y.T)


def test_third_quantized_no_jumps(rng):
    h = random_antisymmetric(rng, 4)
    l = model.third_quantized_matrix(model.LindbladModel.unitary(model.QuadraticHamiltonian(h)))
    assert np.array_equal(l[0::2, 0::2], h) and np.array_equal(l[1::2, 1::2], h)
    assert not l[0::2, 1::2].any() and not l[1::2, 0::2].any()


def test_third_quantized_damping_entries():
    l = model.third_quantized_matrix(model.damping_model())
    expected = {(0, 1): 1j, (0, 2): -1j, (0, 3): 1, (1, 2): 1, (1, 3): 1j, (2, 3): 1j}
    for (i, j), v in expected.items():
        assert l[i, j] == pytest.approx(v, abs=1e-15)
    assert np.allclose(l + l.T, 0)
    assert np.allclose(np.diag(l), 0)


def test_third_quantized_antisymmetric_random(rng):
    l = model.third_quantized_matrix(model.random_model(3, rng, n_jumps=3))
    assert np.linalg.norm(l + l.T) <= 1e-12


def test_adjoint_third_quantized():
    l = model.third_quantized_matrix(model.damping_model())
    adj = model.adjoint_third_quantized(l)
    assert np.array_equal(adj, -l.conj())
    assert np.array_equal(model.adjoint_third_quantized(adj), l)
    real = np.array([[0.0, 2.0], [-2.0, 0.0]])
    assert np.array_equal(model.adjoint_third_quantized(real), -real)


def test_third_quantized_consistent_with_lyapunov(rng):
    for n in (1, 2, 3):
        m = model.random_model(n, rng, n_jumps=2)
        m0 = state.number_state([1] * n)
        a = evolve.dissipative_evolve(m0, m, 0.8, "lyapunov")
        b = evolve.dissipative_evolve(m0, m, 0.8, "third_quantized")
        assert np.abs(a - b).max() <= 1e-8


def test_loss_gain_model_rates():
    m = model.loss_gain_model(2.0, 1.0)
    assert len(m.jumps) == 2
    assert np.allclose(m.jumps[0].coeffs, np.sqrt(2.0) * np.array([0.5, -0.5j]))
