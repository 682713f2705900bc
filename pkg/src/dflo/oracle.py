"""Dense brute-force reference for small systems (N <= 5 modes).

Everything here works with explicit ``2^N x 2^N`` density matrices built from
a Jordan-Wigner representation of the Majorana operators, and with the
``4^N x 4^N`` vectorized Liouvillian.  Nothing in this module calls the
covariance-matrix fast paths (``state``, ``evolve``, ``measure``), so
agreement between the two is a genuine cross-check.

Basis convention: qubit state ``|0>`` is an empty mode, ``|1>`` occupied;
mode 0 is the most significant tensor factor.
"""

from __future__ import annotations

import functools
import itertools
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp

from .errors import IndexOutOfRange, NonPhysicalResidue, TooManyModes, ValidationError
from .model import LindbladModel, QuadraticHamiltonian

ORACLE_MAX_MODES = 5
STIFF_JUMP_NORM = 10.0

_I2 = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|: removes a particle


class MeasurementTable(NamedTuple):
    probabilities: dict[str, float]
    states: dict[str, np.ndarray]


def _check_modes(n: int, max_modes: int = ORACLE_MAX_MODES) -> int:
    if n < 1:
        raise ValidationError("need at least one mode")
    if n > max_modes:
        raise TooManyModes(f"dense oracle supports at most {max_modes} modes, got {n}")
    return n


def _modes_of_rho(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2**n != dim:
        raise ValidationError(f"density matrix must be 2^N x 2^N, got {rho.shape}")
    return _check_modes(n)


def _kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return functools.reduce(np.kron, factors)


@functools.lru_cache(maxsize=None)
def _annihilators(n: int) -> tuple[np.ndarray, ...]:
    ops = []
    for j in range(n):
        ops.append(_kron_all([_Z] * j + [_LOWER] + [_I2] * (n - j - 1)))
    return tuple(ops)


def annihilation_operator(n: int, j: int) -> np.ndarray:
    """``a_j`` (0-based mode) via Jordan-Wigner."""
    _check_modes(n)
    if not 0 <= j < n:
        raise IndexOutOfRange(f"mode {j} out of range for {n} modes")
    return _annihilators(n)[j].copy()


def majorana_operator(n: int, index: int) -> np.ndarray:
    """Majorana operator ``c_index`` (0-based): ``c_2j = a_j + a_j^dag``, ``c_2j+1 = i(a_j - a_j^dag)``."""
    _check_modes(n)
    if not 0 <= index < 2 * n:
        raise IndexOutOfRange(f"Majorana index {index} out of range for {n} modes")
    a = _annihilators(n)[index // 2]
    if index % 2 == 0:
        return a + a.conj().T
    return 1j * (a - a.conj().T)


@functools.lru_cache(maxsize=None)
def _majoranas(n: int) -> tuple[np.ndarray, ...]:
    return tuple(majorana_operator(n, k) for k in range(2 * n))


def _contract(coeffs: np.ndarray, n: int) -> np.ndarray:
    return np.tensordot(coeffs, np.array(_majoranas(n)), axes=1)


def dense_hamiltonian(h: QuadraticHamiltonian | np.ndarray) -> np.ndarray:
    """``H = (i/4) sum_jk h[j,k] c_j c_k`` as a dense Hermitian matrix."""
    h = h.h if isinstance(h, QuadraticHamiltonian) else np.asarray(h, dtype=float)
    n = _check_modes(h.shape[0] // 2)
    cs = np.array(_majoranas(n))
    op = 0.25j * np.einsum("jk,jab,kbc->ac", h, cs, cs)
    return 0.5 * (op + op.conj().T)


def dense_jump(coeffs: np.ndarray) -> np.ndarray:
    """``L = sum_j l_j c_j``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = _check_modes(coeffs.size // 2)
    return _contract(coeffs, n)


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Vectorized (column-stacking) generator of
    ``drho/dt = -i[H, rho] + sum (2 L rho L^dag - {L^dag L, rho})``."""
    n = _check_modes(model.modes)
    dim = 2**n
    eye = np.eye(dim)
    ham = dense_hamiltonian(model.hamiltonian)
    # vec(A rho B) = (B^T kron A) vec(rho)
    sup = -1j * (np.kron(eye, ham) - np.kron(ham.T, eye))
    for jump in model.jumps:
        l = dense_jump(jump.coeffs)
        ldl = l.conj().T @ l
        sup += 2.0 * np.kron(l.conj(), l) - np.kron(eye, ldl) - np.kron(ldl.T, eye)
    return sup


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    rho = v.reshape(dim, dim, order="F")
    return 0.5 * (rho + rho.conj().T)


def dense_lindblad_evolve(rho, model: LindbladModel, t: float) -> np.ndarray:
    """Density matrix after time ``t`` under the master equation.

    Exponentiates the Liouvillian; for stiff models (some jump vector with
    norm above 10) integrates adaptively instead, with tight tolerances.
    """
    rho = np.asarray(rho, dtype=complex)
    n = _modes_of_rho(rho)
    if n != model.modes:
        raise ValidationError(f"density matrix has {n} modes, model {model.modes}")
    if t == 0:
        return rho.copy()
    sup = liouvillian(model)
    v0 = _vec(rho)
    stiff = any(np.linalg.norm(j.coeffs) > STIFF_JUMP_NORM for j in model.jumps)
    if not stiff:
        v = la.expm(sup * t) @ v0
    else:
        sol = solve_ivp(
            lambda _, y: sup @ y, (0.0, t), v0, method="DOP853", rtol=1e-12, atol=1e-13
        )
        v = sol.y[:, -1]
    return _unvec(v, rho.shape[0])


def dense_unitary_evolve(rho, h: QuadraticHamiltonian | np.ndarray, t: float) -> np.ndarray:
    """``exp(-iHt) rho exp(iHt)``."""
    rho = np.asarray(rho, dtype=complex)
    u = la.expm(-1j * t * dense_hamiltonian(h))
    return u @ rho @ u.conj().T


def dense_steady_state(model: LindbladModel) -> np.ndarray:
    """Density matrix spanning the (assumed one-dimensional) kernel of the Liouvillian."""
    sup = liouvillian(model)
    _, _, vh = np.linalg.svd(sup)
    dim = 2**model.modes
    rho = vh[-1].conj().reshape(dim, dim, order="F")
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def dense_covariance(rho, imag_tol: float = 1e-8) -> np.ndarray:
    """``M[j, k] = (i/2) tr(rho [c_j, c_k])``."""
    rho = np.asarray(rho, dtype=complex)
    n = _modes_of_rho(rho)
    cs = _majoranas(n)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for j, k in itertools.combinations(range(2 * n), 2):
        comm = cs[j] @ cs[k] - cs[k] @ cs[j]
        m[j, k] = 0.5j * np.trace(rho @ comm)
        m[k, j] = -m[j, k]
    residue = float(np.max(np.abs(m.imag)))
    if residue > imag_tol:
        raise NonPhysicalResidue(f"covariance has imaginary part {residue:.3e}")
    return m.real


def number_projector(n: int, j: int, bit: int) -> np.ndarray:
    a = annihilation_operator(n, j)
    occ = a.conj().T @ a
    return occ if bit else np.eye(2**n) - occ


def dense_measure_distribution(rho, modes: Sequence[int]) -> MeasurementTable:
    """Joint outcome probabilities on ``modes`` and the conditioned density matrices.

    Keys are bit strings in the order of ``modes``.  Outcomes of probability
    zero map to ``None`` in ``states``.
    """
    rho = np.asarray(rho, dtype=complex)
    n = _modes_of_rho(rho)
    modes = list(modes)
    for j in modes:
        if not 0 <= j < n:
            raise IndexOutOfRange(f"mode {j} out of range for {n} modes")
    probs, states = {}, {}
    for bits in itertools.product((0, 1), repeat=len(modes)):
        proj = np.eye(2**n, dtype=complex)
        for j, b in zip(modes, bits):
            proj = proj @ number_projector(n, j, b)
        post = proj @ rho @ proj
        p = float(np.trace(post).real)
        key = "".join(map(str, bits))
        probs[key] = max(p, 0.0)
        states[key] = post / p if p > 1e-14 else None
    return MeasurementTable(probs, states)


def _pfaffian_small(a: np.ndarray) -> complex:
    # expansion along the first row; fine for the <= 6x6 blocks used here
    n = a.shape[0]
    if n == 0:
        return 1.0
    total = 0.0
    rest = list(range(1, n))
    for pos, k in enumerate(rest):
        others = [i for i in rest if i != k]
        total += (-1) ** pos * a[0, k] * _pfaffian_small(a[np.ix_(others, others)])
    return total


def wick_check(rho, m, max_order: int = 4) -> float:
    """Largest deviation ``|i^p tr(rho c_j1...c_j2p) - Pf(M[j1..j2p])|`` over
    increasing index tuples of length ``2p <= max_order``."""
    rho = np.asarray(rho, dtype=complex)
    n = _modes_of_rho(rho)
    m = np.asarray(m, dtype=float)
    if max_order > 4 and n > 3:
        raise TooManyModes("order-6 Wick checks are limited to N <= 3")
    cs = _majoranas(n)
    worst = 0.0
    for order in range(2, max_order + 1, 2):
        for idx in itertools.combinations(range(2 * n), order):
            prod = functools.reduce(np.matmul, (cs[i] for i in idx))
            moment = (1j ** (order // 2)) * np.trace(rho @ prod)
            pf = _pfaffian_small(m[np.ix_(idx, idx)])
            worst = max(worst, abs(moment - pf))
    return float(worst)


def number_state_density(bits: Sequence[int]) -> np.ndarray:
    n = _check_modes(len(bits))
    index = int("".join(str(int(b)) for b in bits), 2)
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[index, index] = 1.0
    return rho


def vacuum_density(n: int) -> np.ndarray:
    return number_state_density([0] * n)


def gaussian_density(rotation, values) -> np.ndarray:
    """``rho = 2^-N prod_j (I + i l_j c'_2j c'_2j+1)`` with eigenmodes ``c' = R^T c``.

    Its covariance matrix is ``R blockdiag([[0, l_j], [-l_j, 0]]) R^T``.
    """
    rotation = np.asarray(rotation, dtype=float)
    values = np.asarray(values, dtype=float)
    n = _check_modes(values.size)
    cs = np.array(_majoranas(n))
    primed = np.tensordot(rotation.T, cs, axes=1)
    rho = np.eye(2**n, dtype=complex)
    for j, lam in enumerate(values):
        rho = rho @ (np.eye(2**n) + 1j * lam * primed[2 * j] @ primed[2 * j + 1])
    rho /= 2**n
    return 0.5 * (rho + rho.conj().T)


def non_gaussian_density(coherence: float = 0.1, stray: float = 0.1) -> np.ndarray:
    """Two-mode negative control that violates Wick's formula at fourth order.

    Populations ``(1 - stray)/2`` on ``|00>`` and ``|11>``, ``stray`` on
    ``|01>``, and a coherence between ``|00>`` and ``|11>`` far below the
    ``(1 - stray)/2`` a Gaussian state with these populations would need.
    """
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = 0.5 * (1.0 - stray)
    rho[1, 1] = stray
    rho[0, 3] = rho[3, 0] = coherence
    return rho
