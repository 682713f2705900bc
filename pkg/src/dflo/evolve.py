"""Time evolution of covariance matrices.

Three independent routes for dissipative dynamics are provided and are
expected to agree:

``lyapunov``
    ``M(t) = M0 + exp(X t) (M(0) - M0) exp(X t)^T`` with ``M0`` the fixed
    point from a Bartels-Stewart solve.  Production path; all factors stay
    bounded for every ``t``.
``homogeneous``
    The affine flow embedded in a linear one of twice the size.  Simple but
    ``exp(Z t)`` grows exponentially, so admissible only for short times.
``third_quantized``
    Heisenberg evolution of the ``4N`` super-Majorana operators, keeping only
    the bounded eigencomponents of the propagator.  Needs a diagonalizable,
    well-conditioned generator.
"""

from __future__ import annotations

import enum
import logging
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IllConditionedSpectrum,
    NegativeTime,
    NonPhysicalResidue,
    NoUniqueSteadyState,
    SingularSystem,
    TimeTooLarge,
    ValidationError,
)
from .linalg import (
    LYAP_TOL,
    eigendecompose,
    lyapunov_residual,
    matrix_exp,
    schur_decompose,
    solve_lyapunov,
    solve_lyapunov_dense,
)
from .model import (
    LindbladModel,
    QuadraticHamiltonian,
    drift_and_noise,
    third_quantized_matrix,
)
from .state import as_covariance

logger = logging.getLogger(__name__)

CROSS_TOL = 1e-8
IMAG_TOL = 1e-8
COND_MAX = 1e10
HOMOGENEOUS_HORIZON = 20.0
HOMOGENEOUS_GROWTH_MAX = 1e8
# below this size a singular-but-consistent Lyapunov system falls back to lstsq
DENSE_FALLBACK_MAX_DIM = 16


class Backend(str, enum.Enum):
    AUTO = "auto"
    LYAPUNOV = "lyapunov"
    HOMOGENEOUS = "homogeneous"
    THIRD_QUANTIZED = "third_quantized"
    # resolved path only; not a user selector
    UNITARY = "unitary"


class SteadyState(NamedTuple):
    m0: np.ndarray
    residual: float


def _antisym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.T)


def _check_dims(m: np.ndarray, modes: int) -> None:
    if m.shape != (2 * modes, 2 * modes):
        raise DimensionMismatch(
            f"state has shape {m.shape}, model acts on {modes} modes ({2 * modes}x{2 * modes})"
        )


def _check_time(t: float) -> float:
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError("evolution time must be finite")
    if t < 0:
        raise NegativeTime(f"dissipative evolution needs t >= 0, got {t}")
    return t


def unitary_evolve(m, hamiltonian: QuadraticHamiltonian | np.ndarray, t: float) -> np.ndarray:
    """Evolve under ``H = (i/4) c.h.c`` for time ``t`` (negative ``t`` allowed).

    ``M(t) = R M R^T`` with ``R = exp(h t)`` in SO(2N).
    """
    m = as_covariance(m)
    h = hamiltonian.h if isinstance(hamiltonian, QuadraticHamiltonian) else np.asarray(hamiltonian)
    if h.shape != m.shape:
        raise DimensionMismatch(f"Hamiltonian shape {h.shape} does not match state {m.shape}")
    if not np.isfinite(t):
        raise ValidationError("evolution time must be finite")
    r = matrix_exp(h, t)
    return _antisym(r @ m @ r.T)


def steady_state(model: LindbladModel) -> SteadyState:
    """Fixed point ``X M0 + M0 X^T + Y = 0`` of the covariance flow.

    Raises
    ------
    NoUniqueSteadyState
        When ``X`` has eigenvalue pairs with ``l_i + conj(l_j) = 0``, e.g. for
        purely unitary dynamics or dark subspaces.
    """
    x, y = drift_and_noise(model)
    try:
        m0 = solve_lyapunov(x, y)
    except SingularSystem as exc:
        raise NoUniqueSteadyState(str(exc)) from exc
    return SteadyState(m0, lyapunov_residual(x, y, m0))


def _fixed_point(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Some fixed point of the flow: unique when it exists, else a particular one."""
    try:
        return solve_lyapunov(x, y)
    except SingularSystem:
        if x.shape[0] > DENSE_FALLBACK_MAX_DIM:
            raise
    m0 = solve_lyapunov_dense(x, y, lstsq=True)
    scale = np.linalg.norm(x) * np.linalg.norm(m0) + np.linalg.norm(y)
    if lyapunov_residual(x, y, m0) > LYAP_TOL * max(scale, 1.0):
        raise NoUniqueSteadyState("Lyapunov system is singular and inconsistent")
    return m0


def _lyapunov_propagate(m: np.ndarray, x: np.ndarray, m0: np.ndarray, t: float) -> np.ndarray:
    e = matrix_exp(x, t)
    return _antisym(m0 + e @ (m - m0) @ e.T)


def evolve_lyapunov(m, model: LindbladModel, t: float) -> np.ndarray:
    """Closed-form propagation around a fixed point."""
    m = as_covariance(m)
    _check_dims(m, model.modes)
    t = _check_time(t)
    if model.is_unitary:
        return unitary_evolve(m, model.hamiltonian, t)
    x, y = drift_and_noise(model)
    try:
        m0 = _fixed_point(x, y)
    except SingularSystem as exc:
        raise NoUniqueSteadyState(str(exc)) from exc
    return _lyapunov_propagate(m, x, m0, t)


def homogeneous_generator(model: LindbladModel) -> np.ndarray:
    """Block matrix ``Z = [[X, Y], [0, -X^T]]``."""
    x, y = drift_and_noise(model)
    n2 = x.shape[0]
    z = np.zeros((2 * n2, 2 * n2))
    z[:n2, :n2] = x
    z[:n2, n2:] = y
    z[n2:, n2:] = -x.T
    return z


def homogeneous_time_limit(model: LindbladModel, horizon: float = HOMOGENEOUS_HORIZON) -> float:
    return horizon / max(1.0, float(np.linalg.norm(homogeneous_generator(model), 2)))


def evolve_homogeneous(
    m,
    model: LindbladModel,
    t: float,
    t_max: float | None = None,
    return_k: bool = False,
):
    """Evolve via ``Omega(t) = exp(Z t) [M; I] exp(X^T t)``.

    The auxiliary block ``K(t)`` is identically ``I`` in exact arithmetic; its
    deviation is a direct error gauge and is returned with ``return_k=True``.

    Raises
    ------
    TimeTooLarge
        If ``t`` exceeds ``t_max`` (default ``20 / max(1, |Z|_2)``) or
        ``exp(Z t)`` grows beyond 1e8.
    """
    m = as_covariance(m)
    _check_dims(m, model.modes)
    t = _check_time(t)
    z = homogeneous_generator(model)
    if t_max is None:
        t_max = HOMOGENEOUS_HORIZON / max(1.0, float(np.linalg.norm(z, 2)))
    if t > t_max:
        raise TimeTooLarge(f"t = {t} exceeds the homogeneous method's limit {t_max:.4g}")
    n2 = m.shape[0]
    ez = matrix_exp(z, t)
    if np.linalg.norm(ez, 2) > HOMOGENEOUS_GROWTH_MAX:
        raise TimeTooLarge("exp(Z t) overflows the homogeneous method's growth guard")
    omega0 = np.vstack([m, np.eye(n2)])
    omega = ez @ omega0 @ matrix_exp(z[:n2, :n2].T, t)
    m_t = _antisym(omega[:n2])
    if return_k:
        return m_t, omega[n2:]
    return m_t


# -- third quantization --------------------------------------------------------

# phase pattern i^(x+y) of the readout, and its conjugate for the initial data
_READOUT_PHASE = np.array([[1.0, 1j], [1j, -1.0]])
_INITIAL_PHASE = np.conj(_READOUT_PHASE)


def heisenberg_generator(model: LindbladModel) -> np.ndarray:
    """Generator ``W`` of the super-Majorana Heisenberg flow, ``c_hat(t) = exp(W t) c_hat``.

    ``W = D L D`` with ``D = diag(1, -1, 1, -1, ...)`` and ``L`` the
    third-quantized matrix.
    """
    l = third_quantized_matrix(model)
    d = np.tile([1.0, -1.0], l.shape[0] // 2)
    return d[:, None] * l * d[None, :]


def omega_initial(m: np.ndarray) -> np.ndarray:
    """``4N x 4N`` matrix of second moments of the super-Majorana modes.

    Entry ``(2a+x, 2b+y)`` is ``2 (-i)^(x+y) M[a, b]`` for ``a != b``; the
    same-pair entries ``(2a, 2a+1)`` carry the identity component ``+2``.
    """
    n2 = m.shape[0]
    omega = np.kron(m, 2.0 * _INITIAL_PHASE)
    k = np.arange(n2)
    omega[2 * k, 2 * k + 1] = 2.0
    omega[2 * k + 1, 2 * k] = -2.0
    return omega


def omega_readout(omega: np.ndarray) -> np.ndarray:
    """Covariance ``M[j, k] = tr(Omega Lambda(j, k)^T) / 16`` for every pair at once."""
    n2 = omega.shape[0] // 2
    blocks = omega.reshape(n2, 2, n2, 2)
    m = np.einsum("jxky,xy->jk", blocks, _READOUT_PHASE) / 8.0
    m = np.triu(m, 1)
    return m - m.T


def evolve_third_quantized(
    m,
    model: LindbladModel,
    t: float,
    cond_max: float = COND_MAX,
    imag_tol: float = IMAG_TOL,
) -> np.ndarray:
    """Evolve through the bounded part of ``Omega(t) = R Omega(0) R^T``, ``R = exp(W t)``.

    With ``W = V diag(l) V^{-1}``, entry ``(a, b)`` of ``V^{-1} Omega(0) V^{-T}``
    picks up ``exp((l_a + l_b) t)``.  Components with ``Re(l_a + l_b) > 0``
    cancel in the readout exactly and are dropped rather than computed.

    Raises
    ------
    IllConditionedSpectrum
        If the eigenvector matrix has 1-norm condition number above ``cond_max``
        (defective or nearly defective generator).
    """
    m = as_covariance(m)
    _check_dims(m, model.modes)
    t = _check_time(t)
    w = heisenberg_generator(model)
    eig = eigendecompose(w)
    if not np.isfinite(eig.condition_estimate) or eig.condition_estimate > cond_max:
        raise IllConditionedSpectrum(
            f"eigenvector condition number {eig.condition_estimate:.3e} exceeds {cond_max:.1e}; "
            "use the lyapunov backend"
        )
    lam, v, vinv = eig.values, eig.vectors, eig.inverse_vectors
    coeffs = vinv @ omega_initial(m) @ vinv.T
    rates = lam[:, None] + lam[None, :]
    zero_tol = 1e-9 * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    keep = rates.real <= zero_tol
    factors = np.zeros_like(rates)
    factors[keep] = np.exp(rates[keep] * t)
    omega_t = v @ (factors * coeffs) @ v.T
    m_t = omega_readout(omega_t)
    residue = float(np.max(np.abs(m_t.imag), initial=0.0))
    if residue > imag_tol:
        raise NonPhysicalResidue(f"imaginary readout residue {residue:.3e} exceeds {imag_tol:.1e}")
    return _antisym(m_t.real)


# -- dispatch ------------------------------------------------------------------


def resolve_backend(
    model: LindbladModel, t: float, backend: Backend | str = Backend.AUTO
) -> Backend:
    """The path ``auto`` would take, without evolving anything.

    ``auto``: no jumps -> unitary; regular ``X`` -> lyapunov; otherwise
    homogeneous if ``t`` is admissible, else third_quantized.
    """
    backend = Backend(backend)
    if backend is not Backend.AUTO:
        return backend
    if model.is_unitary:
        return Backend.UNITARY
    x, y = drift_and_noise(model)
    try:
        solve_lyapunov(x, y)
        return Backend.LYAPUNOV
    except SingularSystem:
        pass
    if t <= homogeneous_time_limit(model):
        return Backend.HOMOGENEOUS
    return Backend.THIRD_QUANTIZED


def evolve_with_backend(
    m, model: LindbladModel, t: float, backend: Backend | str = Backend.AUTO
) -> tuple[np.ndarray, Backend]:
    """Like :func:`dissipative_evolve`, also returning the path that ran."""
    backend = Backend(backend)
    t = _check_time(t)
    if backend is Backend.AUTO:
        m = as_covariance(m)
        _check_dims(m, model.modes)
        if model.is_unitary:
            return unitary_evolve(m, model.hamiltonian, t), Backend.UNITARY
        x, y = drift_and_noise(model)
        try:
            m0 = solve_lyapunov(x, y)
            return _lyapunov_propagate(m, x, m0, t), Backend.LYAPUNOV
        except SingularSystem:
            logger.info("Lyapunov system singular; falling back")
        if t <= homogeneous_time_limit(model):
            return evolve_homogeneous(m, model, t), Backend.HOMOGENEOUS
        return evolve_third_quantized(m, model, t), Backend.THIRD_QUANTIZED
    if backend is Backend.LYAPUNOV:
        path = Backend.UNITARY if model.is_unitary else Backend.LYAPUNOV
        return evolve_lyapunov(m, model, t), path
    if backend is Backend.HOMOGENEOUS:
        return evolve_homogeneous(m, model, t), backend
    if backend is Backend.THIRD_QUANTIZED:
        return evolve_third_quantized(m, model, t), backend
    raise ValidationError(f"{backend.value!r} is not a selectable backend")


def dissipative_evolve(m, model: LindbladModel, t: float, backend: Backend | str = Backend.AUTO) -> np.ndarray:
    """Covariance matrix after evolving under ``model`` for time ``t >= 0``."""
    return evolve_with_backend(m, model, t, backend)[0]


def trajectory(
    m,
    model: LindbladModel,
    times: Sequence[float],
    backend: Backend | str = Backend.AUTO,
) -> list[np.ndarray]:
    """States at each of the strictly increasing, non-negative ``times``.

    The Lyapunov path solves for the fixed point once and reuses it.
    """
    m = as_covariance(m)
    _check_dims(m, model.modes)
    times = [float(t) for t in times]
    for t in times:
        _check_time(t)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError("times must be strictly increasing")
    path = resolve_backend(model, times[-1] if times else 0.0, backend)
    if path is Backend.UNITARY:
        return [unitary_evolve(m, model.hamiltonian, t) for t in times]
    if path is Backend.LYAPUNOV:
        x, y = drift_and_noise(model)
        try:
            m0 = _fixed_point(x, y)
        except SingularSystem as exc:
            raise NoUniqueSteadyState(str(exc)) from exc
        return [_lyapunov_propagate(m, x, m0, t) for t in times]
    return [evolve_with_backend(m, model, t, path)[0] for t in times]
