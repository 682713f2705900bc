"""Quadratic Hamiltonians, linear Lindblad operators, and the matrices derived from them.

Conventions (Majorana basis, 0-based indices)::

    c[2j]   = a_j + a_j^dag
    c[2j+1] = i (a_j - a_j^dag)

so that ``a_j = (c[2j] - i c[2j+1]) / 2`` and ``a_j^dag = (c[2j] + i c[2j+1]) / 2``.

A Hamiltonian matrix ``h`` stands for ``(i/4) sum_pq h[p, q] c_p c_q`` and a
jump vector ``l`` for ``L = sum_p l[p] c_p``.  The master equation is::

    d rho / dt = -i [H, rho] + sum_mu (2 L rho L^dag - {L^dag L, rho})

with no factor 1/2 in front of the dissipator.  A jump ``sqrt(g) * a`` thus
empties a mode at rate ``2 g``: occupations decay as ``exp(-2 g t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    LengthMismatch,
    OddDimension,
    SelfHopping,
    ValidationError,
    ZeroModes,
)
from .linalg import check_antisymmetric

PSD_TOL = 1e-10

# Majorana coefficients of a_j and a_j^dag within the (c[2j], c[2j+1]) pair.
_ANNIHILATE = np.array([0.5, -0.5j])
_CREATE = np.array([0.5, 0.5j])


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Real antisymmetric ``2N x 2N`` matrix ``h`` of ``H = (i/4) c.h.c``."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        check_antisymmetric(h, "Hamiltonian matrix")
        if h.shape[0] % 2:
            raise OddDimension("Hamiltonian matrix must have even dimension 2N")
        h = 0.5 * (h - h.T)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def modes(self) -> int:
        return self.h.shape[0] // 2

    @classmethod
    def zero(cls, modes: int) -> "QuadraticHamiltonian":
        return cls(np.zeros((2 * modes, 2 * modes)))


@dataclass(frozen=True)
class LindbladOperator:
    """Complex Majorana coefficients of a linear jump operator."""

    coeffs: np.ndarray

    def __post_init__(self):
        l = np.array(self.coeffs, dtype=complex).reshape(-1)
        if l.size == 0 or l.size % 2:
            raise LengthMismatch(f"jump vector length must be even and positive, got {l.size}")
        if not np.all(np.isfinite(l)):
            raise ValidationError("jump vector has non-finite entries")
        l.setflags(write=False)
        object.__setattr__(self, "coeffs", l)

    @property
    def modes(self) -> int:
        return self.coeffs.size // 2


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: QuadraticHamiltonian
    jumps: tuple[LindbladOperator, ...] = field(default=())

    def __post_init__(self):
        jumps = tuple(
            j if isinstance(j, LindbladOperator) else LindbladOperator(j) for j in self.jumps
        )
        for k, j in enumerate(jumps):
            if j.modes != self.hamiltonian.modes:
                raise DimensionMismatch(
                    f"jump {k} acts on {j.modes} modes, Hamiltonian on {self.hamiltonian.modes}"
                )
        object.__setattr__(self, "jumps", jumps)

    @property
    def modes(self) -> int:
        return self.hamiltonian.modes

    @property
    def is_unitary(self) -> bool:
        """True when every jump operator vanishes identically."""
        return all(not np.any(j.coeffs) for j in self.jumps)

    @classmethod
    def unitary(cls, hamiltonian: QuadraticHamiltonian | np.ndarray) -> "LindbladModel":
        if not isinstance(hamiltonian, QuadraticHamiltonian):
            hamiltonian = QuadraticHamiltonian(hamiltonian)
        return cls(hamiltonian, ())


class DriftNoisePair(NamedTuple):
    """Real matrices of ``dM/dt = X M + M X^T + Y``."""

    x: np.ndarray
    y: np.ndarray


def _check_mode(j: int, n: int, what: str = "mode") -> int:
    if not 0 <= j < n:
        raise IndexOutOfRange(f"{what} index {j} out of range for {n} modes")
    return int(j)


def _dirac_vectors(n: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    ann = np.zeros(2 * n, dtype=complex)
    cre = np.zeros(2 * n, dtype=complex)
    ann[2 * j : 2 * j + 2] = _ANNIHILATE
    cre[2 * j : 2 * j + 2] = _CREATE
    return ann, cre


def hamiltonian_from_dirac(
    n: int,
    energies: Iterable[tuple[int, float]] = (),
    hoppings: Iterable[tuple[int, int, complex]] = (),
    pairings: Iterable[tuple[int, int, complex]] = (),
) -> QuadraticHamiltonian:
    """Majorana matrix of a Hamiltonian given in creation/annihilation form.

    The operator is::

        sum eps_j a_j^dag a_j
        + sum (t_jk a_j^dag a_k + conj(t_jk) a_k^dag a_j)
        + sum (s_jk a_j^dag a_k^dag + conj(s_jk) a_k a_j)

    Additive constants are dropped.  Mode indices are 0-based.
    """
    if n < 1:
        raise ZeroModes("a Hamiltonian needs at least one mode")
    vecs = [_dirac_vectors(n, j) for j in range(n)]
    coef = np.zeros((2 * n, 2 * n), dtype=complex)
    for j, eps in energies:
        j = _check_mode(j, n)
        ann, cre = vecs[j]
        coef += float(eps) * np.outer(cre, ann)
    for name, terms in (("hopping", hoppings), ("pairing", pairings)):
        for j, k, amp in terms:
            j, k = _check_mode(j, n), _check_mode(k, n)
            if j == k:
                raise SelfHopping(f"{name} term couples mode {j} to itself")
            amp = complex(amp)
            (ann_j, cre_j), (ann_k, cre_k) = vecs[j], vecs[k]
            if name == "hopping":
                coef += amp * np.outer(cre_j, ann_k) + np.conj(amp) * np.outer(cre_k, ann_j)
            else:
                coef += amp * np.outer(cre_j, cre_k) + np.conj(amp) * np.outer(ann_k, ann_j)
    # sum coef_pq c_p c_q = (i/4) c.h.c + const  =>  h = -2i (coef - coef^T)
    h = -2j * (coef - coef.T)
    if np.max(np.abs(h.imag), initial=0.0) > 1e-12:
        raise ValidationError("Dirac-form Hamiltonian is not Hermitian")
    return QuadraticHamiltonian(h.real)


def jump_from_dirac(n: int, adag_coeffs: Sequence[complex], a_coeffs: Sequence[complex]) -> LindbladOperator:
    """Jump operator ``L = sum_j alpha_j a_j^dag + beta_j a_j`` in the Majorana basis."""
    alpha = np.asarray(adag_coeffs, dtype=complex).reshape(-1)
    beta = np.asarray(a_coeffs, dtype=complex).reshape(-1)
    if alpha.size != n or beta.size != n:
        raise LengthMismatch(
            f"expected coefficient vectors of length {n}, got {alpha.size} and {beta.size}"
        )
    l = np.empty(2 * n, dtype=complex)
    l[0::2] = (alpha + beta) / 2
    l[1::2] = 1j * (alpha - beta) / 2
    return LindbladOperator(l)


def bath_matrix(model: LindbladModel) -> np.ndarray:
    """Hermitian PSD matrix ``B[j, k] = sum_mu l_mu[j] conj(l_mu[k])``."""
    n2 = 2 * model.modes
    b = np.zeros((n2, n2), dtype=complex)
    for jump in model.jumps:
        b += np.outer(jump.coeffs, jump.coeffs.conj())
    # rounding can leave b[j,k] and conj(b[k,j]) a few ulps apart
    return 0.5 * (b + b.conj().T)


def drift_and_noise(model: LindbladModel) -> DriftNoisePair:
    """Drift ``X = h - 4 Re(B)`` and noise ``Y = 8 Im(B)`` of the covariance flow.

    The Hamiltonian enters with a plus sign: ``H = (i/4) c.h.c`` rotates the
    covariance matrix as ``M -> exp(h t) M exp(h t)^T``.  For any model
    ``X + X^T = -4 Re(B) <= 0``.
    """
    b = bath_matrix(model)
    x = model.hamiltonian.h - 2.0 * (b + b.conj()).real
    y = (4j * (b.conj() - b)).real
    return DriftNoisePair(x, 0.5 * (y - y.T))


def third_quantized_matrix(model: LindbladModel) -> np.ndarray:
    """``4N x 4N`` antisymmetric matrix ``L`` of the even-sector Liouvillian.

    Blocks, with ``B`` the bath matrix and super-Majorana pairs
    ``(2j, 2j+1)`` attached to Majorana ``j``::

        L[2j,   2k]   = h[j,k] - 2 B[j,k] + 2 B[k,j]
        L[2j+1, 2k+1] = h[j,k] + 2 B[j,k] - 2 B[k,j]
        L[2j,   2k+1] = 4i B[k,j]
        L[2j+1, 2k]   = -4i B[j,k]
    """
    h = model.hamiltonian.h
    b = bath_matrix(model)
    n2 = h.shape[0]
    l = np.empty((2 * n2, 2 * n2), dtype=complex)
    l[0::2, 0::2] = h - 2 * b + 2 * b.T
    l[1::2, 1::2] = h + 2 * b - 2 * b.T
    l[0::2, 1::2] = 4j * b.T
    l[1::2, 0::2] = -4j * b
    return l


def adjoint_third_quantized(l: np.ndarray) -> np.ndarray:
    """``L^dag = -conj(L)`` for antisymmetric ``L``."""
    return -np.conj(np.asarray(l))


# -- common model families ---------------------------------------------------


def damping_model(modes: int = 1, rate: float = 1.0, mode: int | None = None) -> LindbladModel:
    """Jumps ``sqrt(rate) a_j`` on one mode (or on every mode when ``mode`` is None)."""
    targets = range(modes) if mode is None else [_check_mode(mode, modes)]
    jumps = []
    for j in targets:
        beta = np.zeros(modes)
        beta[j] = np.sqrt(rate)
        jumps.append(jump_from_dirac(modes, np.zeros(modes), beta))
    return LindbladModel(QuadraticHamiltonian.zero(modes), tuple(jumps))


def pumping_model(modes: int = 1, rate: float = 1.0, mode: int | None = None) -> LindbladModel:
    """Jumps ``sqrt(rate) a_j^dag``; the mirror image of :func:`damping_model`."""
    targets = range(modes) if mode is None else [_check_mode(mode, modes)]
    jumps = []
    for j in targets:
        alpha = np.zeros(modes)
        alpha[j] = np.sqrt(rate)
        jumps.append(jump_from_dirac(modes, alpha, np.zeros(modes)))
    return LindbladModel(QuadraticHamiltonian.zero(modes), tuple(jumps))


def loss_gain_model(gamma: float, kappa: float) -> LindbladModel:
    """Single mode with loss ``sqrt(gamma) a`` and gain ``sqrt(kappa) a^dag``.

    The steady-state occupation is ``kappa / (gamma + kappa)``.
    """
    loss = jump_from_dirac(1, [0.0], [np.sqrt(gamma)])
    gain = jump_from_dirac(1, [np.sqrt(kappa)], [0.0])
    return LindbladModel(QuadraticHamiltonian.zero(1), (loss, gain))


def random_model(
    modes: int,
    rng: np.random.Generator,
    n_jumps: int | None = None,
    h_norm: float = 2.0,
    jump_norm: float = 1.0,
) -> LindbladModel:
    """Random model with ``|h|_2 = h_norm`` and jump vectors of norm at most ``jump_norm``."""
    n2 = 2 * modes
    g = rng.normal(size=(n2, n2))
    h = g - g.T
    nrm = np.linalg.norm(h, 2)
    if nrm > 0:
        h *= h_norm / nrm
    if n_jumps is None:
        n_jumps = int(rng.integers(0, 4))
    jumps = []
    for _ in range(n_jumps):
        l = rng.normal(size=n2) + 1j * rng.normal(size=n2)
        l *= jump_norm * rng.uniform(0.3, 1.0) / np.linalg.norm(l)
        jumps.append(LindbladOperator(l))
    return LindbladModel(QuadraticHamiltonian(h), tuple(jumps))
