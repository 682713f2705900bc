"""Dense matrix kernels: Schur form, exponentials, Pfaffians, Lyapunov solves.

All routines are pure functions of their arguments and never modify their
inputs.  Matrices are plain :class:`numpy.ndarray` objects.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as la

from .errors import (
    IterationLimitExceeded,
    NonSquare,
    NotAntisymmetric,
    OddDimension,
    SingularSystem,
    ValidationError,
)

SCHUR_TOL = 1e-12
EIG_TOL = 1e-12
LYAP_TOL = 1e-10
PF_TOL = 1e-9
ASYM_RTOL = 1e-12
# relative gap below which lambda_i + conj(lambda_j) counts as zero
SINGULAR_RTOL = 1e-10


class SchurForm(NamedTuple):
    """``a = unitary @ triangular @ unitary.conj().T`` with ``triangular`` upper triangular."""

    unitary: np.ndarray
    triangular: np.ndarray


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    inverse_vectors: np.ndarray
    condition_estimate: float


def _square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def antisymmetry_defect(a: np.ndarray, tile: int = 128) -> float:
    """Frobenius norm of ``a + a.T``.

    Large matrices are processed in square tiles so the transposed access
    stays in cache; a plain ``a + a.T`` scales worse than O(n^2) in practice.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if n <= tile:
        return float(np.linalg.norm(a + a.T))
    total = 0.0
    for i in range(0, n, tile):
        for j in range(i, n, tile):
            blk = a[i : i + tile, j : j + tile] + a[j : j + tile, i : i + tile].T
            s = float(np.vdot(blk, blk).real)
            total += s if i == j else 2.0 * s
    return float(np.sqrt(total))


def check_antisymmetric(a, name: str = "matrix", rtol: float = ASYM_RTOL) -> np.ndarray:
    a = _square(a, name)
    scale = max(float(np.linalg.norm(a)), 1.0)
    if antisymmetry_defect(a) > rtol * scale:
        raise NotAntisymmetric(
            f"{name} is not antisymmetric (|A + A^T| = {antisymmetry_defect(a):.3e})"
        )
    return a


def schur_decompose(a, max_sweeps: int | None = None) -> SchurForm:
    """Complex Schur decomposition ``a = U T U^H``.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Real or complex square matrix.
    max_sweeps : int, optional
        QR sweep budget; defaults to ``30 * n``.  LAPACK enforces its own
        budget of the same order, and a non-converged factorization is
        reported as :class:`IterationLimitExceeded` either way.

    Returns
    -------
    SchurForm
        ``triangular`` has exact zeros below the diagonal.
    """
    a = _square(a)
    n = a.shape[0]
    if n == 0:
        return SchurForm(np.eye(0, dtype=complex), np.zeros((0, 0), dtype=complex))
    if max_sweeps is None:
        max_sweeps = 30 * n
    try:
        t, u = la.schur(a.astype(complex, copy=False), output="complex")
    except la.LinAlgError as exc:
        raise IterationLimitExceeded(
            f"QR iteration did not converge (budget {max_sweeps} sweeps)"
        ) from exc
    return SchurForm(u, np.triu(t))


def eigendecompose(a) -> EigenDecomposition:
    """Eigendecomposition ``a = V diag(values) V^{-1}`` with a 1-norm condition number of ``V``."""
    a = _square(a)
    values, vectors = np.linalg.eig(a)
    try:
        inverse = np.linalg.inv(vectors)
    except np.linalg.LinAlgError:
        return EigenDecomposition(values, vectors, np.full_like(vectors, np.nan), np.inf)
    kappa = float(np.linalg.norm(vectors, 1) * np.linalg.norm(inverse, 1))
    return EigenDecomposition(values, vectors, inverse, kappa)


def matrix_exp(a, t: float = 1.0) -> np.ndarray:
    """``exp(a * t)`` by scaling and squaring with a diagonal Pade approximant."""
    a = _square(a)
    if not np.isfinite(t):
        raise ValidationError("t must be finite")
    if t == 0:
        return np.eye(a.shape[0], dtype=a.dtype if np.iscomplexobj(a) else float)
    return la.expm(a * t)


def _householder(x: np.ndarray) -> tuple[np.ndarray, float, float]:
    # Reflector P = I - tau v v^T with P x = alpha e_1.
    sigma = float(x[1:] @ x[1:])
    if sigma == 0.0:
        return np.zeros_like(x), 0.0, float(x[0])
    norm_x = np.sqrt(x[0] ** 2 + sigma)
    v = x.copy()
    if x[0] <= 0:
        v[0] -= norm_x
        alpha = norm_x
    else:
        v[0] += norm_x
        alpha = -norm_x
    v /= np.linalg.norm(v)
    return v, 2.0, float(alpha)


def pfaffian(a, asym_rtol: float = ASYM_RTOL) -> float:
    """Pfaffian of a real antisymmetric matrix.

    The matrix is reduced to tridiagonal form by Householder reflections;
    the Pfaffian is then the product of every other superdiagonal entry,
    times the determinant of the accumulated reflectors.

    Raises
    ------
    NotAntisymmetric
        If ``|A + A^T|_F > asym_rtol * |A|_F``.
    OddDimension
        For odd-sized input.  Mathematically the Pfaffian would be zero, but
        an odd index set is always a caller error here.
    """
    a = check_antisymmetric(np.asarray(a, dtype=float), "pfaffian input", asym_rtol)
    n = a.shape[0]
    if n % 2:
        raise OddDimension(f"Pfaffian needs an even dimension, got {n}")
    if n == 0:
        return 1.0
    a = 0.5 * (a - a.T)
    pf = 1.0
    for i in range(n - 2):
        v, tau, alpha = _householder(a[i + 1 :, i])
        if tau:
            sub = a[i + 1 :, i + 1 :]
            w = tau * (sub @ v)
            sub += np.outer(v, w) - np.outer(w, v)
            a[i + 1, i] = alpha
            a[i, i + 1] = -alpha
            a[i + 2 :, i] = 0.0
            a[i, i + 2 :] = 0.0
            pf *= 1.0 - tau
        if i % 2 == 0:
            pf *= -alpha
    return float(pf * a[n - 2, n - 1])


def _lyapunov_separation(diag: np.ndarray) -> float:
    return float(np.min(np.abs(diag[:, None] + diag.conj()[None, :])))


def solve_lyapunov(
    x,
    y,
    schur: SchurForm | None = None,
    singular_rtol: float = SINGULAR_RTOL,
) -> np.ndarray:
    """Solve ``X M + M X^T + Y = 0`` for real antisymmetric ``M`` (Bartels-Stewart).

    ``X`` is brought to complex Schur form ``X = U T U^H``.  The transformed
    unknown ``K = U^H M U`` satisfies ``T K + K T^H = -U^H Y U``, whose columns
    are found from last to first by shifted triangular solves.

    Parameters
    ----------
    x, y : array_like, shape (n, n)
        Real drift matrix and real antisymmetric noise matrix.
    schur : SchurForm, optional
        Precomputed Schur form of ``x``, to amortize repeated solves.
    singular_rtol : float
        A pair of eigenvalues with ``|l_i + conj(l_j)| <= singular_rtol * |X|_F``
        makes the system singular.

    Raises
    ------
    SingularSystem
        No unique solution exists (e.g. purely unitary dynamics).
    """
    x = _square(x, "X")
    y = check_antisymmetric(y, "Y", rtol=1e-10)
    n = x.shape[0]
    if y.shape != x.shape:
        raise ValidationError(f"X and Y shapes differ: {x.shape} vs {y.shape}")
    if n == 0:
        return np.zeros((0, 0))
    u, t = schur if schur is not None else schur_decompose(x)
    d = np.diag(t).copy()
    scale = max(float(np.linalg.norm(x)), np.finfo(float).tiny)
    sep = _lyapunov_separation(d)
    if sep <= singular_rtol * scale:
        raise SingularSystem(
            f"X has eigenvalues with l_i + conj(l_j) ~ 0 (separation {sep:.3e}); "
            "the Lyapunov equation has no unique solution"
        )
    rhs = -(u.conj().T @ y @ u)
    k = np.zeros((n, n), dtype=complex)
    shifted = t.copy()
    idx = np.arange(n)
    tc = t.conj()
    for m in range(n - 1, -1, -1):
        col = rhs[:, m]
        if m + 1 < n:
            col = col - k[:, m + 1 :] @ tc[m, m + 1 :]
        shifted[idx, idx] = d + np.conj(d[m])
        k[:, m] = la.solve_triangular(shifted, col, check_finite=False)
    m_full = u @ k @ u.conj().T
    m_real = m_full.real
    return 0.5 * (m_real - m_real.T)


def lyapunov_residual(x: np.ndarray, y: np.ndarray, m: np.ndarray) -> float:
    return float(np.linalg.norm(x @ m + m @ x.T + y))


def solve_lyapunov_dense(x, y, lstsq: bool = False) -> np.ndarray:
    """Reference solver on the vectorized system of ``n(n-1)/2`` antisymmetric unknowns.

    Costs O(n^6); meant for cross-checks and tiny singular-but-consistent
    systems (``lstsq=True`` returns the minimum-norm particular solution).
    """
    x = _square(x, "X")
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    iu = np.triu_indices(n, 1)
    cols = []
    for a, b in zip(*iu):
        e = np.zeros((n, n))
        e[a, b], e[b, a] = 1.0, -1.0
        cols.append((x @ e + e @ x.T)[iu])
    if not cols:
        return np.zeros((n, n))
    op = np.array(cols).T
    target = -y[iu]
    if lstsq:
        sol = np.linalg.lstsq(op, target, rcond=None)[0]
    else:
        try:
            sol = np.linalg.solve(op, target)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("vectorized Lyapunov system is singular") from exc
    m = np.zeros((n, n))
    m[iu] = sol
    return m - m.T
