"""Gaussian states as real antisymmetric covariance matrices.

A covariance matrix is a plain ``(2N, 2N)`` float array with entries
``M[j, k] = (i/2) tr(rho [c_j, c_k])``.  Functions here never mutate their
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadBit,
    IndexOutOfRange,
    NotIncreasing,
    OddCount,
    OddDimension,
    ValidationError,
    ZeroModes,
)
from .linalg import check_antisymmetric, pfaffian

VAL_TOL = 1e-8


class WilliamsonForm(NamedTuple):
    """``M = rotation @ blockdiag([[0, l], [-l, 0]]) @ rotation.T`` with ``rotation`` in SO(2N)."""

    rotation: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    antisymmetry_defect: float
    max_excess: float
    values: np.ndarray
    valid: bool
    pure: bool
    maximally_mixed: bool


def as_covariance(m, name: str = "covariance matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    check_antisymmetric(m, name, rtol=1e-10)
    if m.shape[0] % 2:
        raise OddDimension(f"{name} must have even dimension 2N, got {m.shape[0]}")
    return m


def modes_of(m: np.ndarray) -> int:
    return np.shape(m)[0] // 2


def vacuum(n: int) -> np.ndarray:
    if n < 1:
        raise ZeroModes("need at least one mode")
    return number_state([0] * n)


def number_state(bits: Sequence[int]) -> np.ndarray:
    """Covariance matrix of ``|n_1, ..., n_N>``."""
    bits = list(bits)
    if not bits:
        raise ZeroModes("need at least one mode")
    for b in bits:
        if b not in (0, 1) or isinstance(b, float) and not float(b).is_integer():
            raise BadBit(f"occupation bits must be 0 or 1, got {b!r}")
    n = len(bits)
    m = np.zeros((2 * n, 2 * n))
    for j, b in enumerate(bits):
        m[2 * j, 2 * j + 1] = 1 - 2 * int(b)
        m[2 * j + 1, 2 * j] = -(1 - 2 * int(b))
    return m


def _check_mode(m: np.ndarray, j: int) -> None:
    if not 0 <= j < modes_of(m):
        raise IndexOutOfRange(f"mode {j} out of range for {modes_of(m)} modes")


def occupation(m, j: int) -> float:
    """Mean occupation ``<a_j^dag a_j> = (1 - M[2j, 2j+1]) / 2``, clamped to [0, 1]."""
    m = np.asarray(m)
    _check_mode(m, j)
    return float(min(1.0, max(0.0, 0.5 * (1.0 - m[2 * j, 2 * j + 1]))))


def occupations(m) -> np.ndarray:
    m = np.asarray(m)
    k = np.arange(modes_of(m))
    return np.clip(0.5 * (1.0 - m[2 * k, 2 * k + 1]), 0.0, 1.0)


def wick_moment(m, indices: Sequence[int]) -> float:
    """``i^p tr(rho c_{j1} ... c_{j2p})`` for strictly increasing indices, via a Pfaffian."""
    m = np.asarray(m)
    idx = list(indices)
    if len(idx) % 2:
        raise OddCount(f"need an even number of indices, got {len(idx)}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise NotIncreasing(f"indices must be strictly increasing: {idx}")
    if idx and not (0 <= idx[0] and idx[-1] < m.shape[0]):
        raise IndexOutOfRange(f"indices {idx} out of range for dimension {m.shape[0]}")
    if not idx:
        return 1.0
    sub = m[np.ix_(idx, idx)]
    return pfaffian(0.5 * (sub - sub.T))


def williamson(m, zero_tol: float = 1e-12) -> WilliamsonForm:
    """Williamson normal form of a real antisymmetric matrix.

    Built from the eigenvectors of the Hermitian matrix ``iM`` (eigenvalues
    ``+-l_j``).  For ``i M v = l v`` with ``v = (x + iy)/sqrt(2)``, the pair
    ``(y, x)`` spans one block.  Values come back non-negative and sorted by
    decreasing size; when the rotation would otherwise have determinant -1,
    a zero block absorbs the reflection if one exists, else the last block
    is flipped and its value becomes negative.
    """
    m = check_antisymmetric(np.asarray(m, dtype=float), "covariance matrix", rtol=1e-10)
    m = 0.5 * (m - m.T)
    dim = m.shape[0]
    if dim % 2:
        raise OddDimension("Williamson form needs even dimension")
    n = dim // 2
    evals, evecs = np.linalg.eigh(1j * m)
    # eigh sorts ascending; the top n eigenvalues are the non-negative l_j
    order = np.argsort(-evals, kind="stable")[:n]
    lam = np.clip(evals[order], 0.0, None)
    scale = max(1.0, float(np.max(np.abs(evals), initial=0.0)))
    nonzero = lam > zero_tol * scale
    blocks = []
    for k in np.flatnonzero(nonzero):
        v = evecs[:, order[k]] * np.sqrt(2.0)
        # phase gauge: largest component purely +imaginary, so the block's
        # first column points along its dominant Majorana axis
        p = int(np.argmax(np.abs(v) > np.abs(v).max() - 1e-9))
        v = v * (1j * abs(v[p]) / v[p])
        key = (-round(float(lam[k]) / 1e-9), p)
        blocks.append((key, lam[k], v))
    blocks.sort(key=lambda item: item[0])
    cols = []
    for _, _, v in blocks:
        cols.extend([v.imag, v.real])
    lam_sorted = np.array([b[1] for b in blocks])
    basis = np.array(cols).T if cols else np.zeros((dim, 0))
    n_zero = n - int(nonzero.sum())
    if n_zero:
        # real orthonormal complement for the kernel
        q, _ = np.linalg.qr(np.hstack([basis, np.eye(dim)]))
        kernel = q[:, basis.shape[1] : dim]
        basis = np.hstack([basis, kernel])
    # re-orthonormalize (degenerate clusters); keeps column pairing
    q, r = np.linalg.qr(basis)
    rot = q * np.sign(np.diag(r))[None, :]
    values = np.concatenate([lam_sorted, np.zeros(n_zero)])
    if np.linalg.det(rot) < 0:
        if n_zero:
            rot[:, -1] *= -1
        else:
            rot[:, [-2, -1]] = rot[:, [-1, -2]]
            values[-1] = -values[-1]
    return WilliamsonForm(rot, values)


def from_williamson(rotation, values) -> np.ndarray:
    """Inverse of :func:`williamson`."""
    rotation = np.asarray(rotation, dtype=float)
    values = np.asarray(values, dtype=float)
    n = values.size
    if rotation.shape != (2 * n, 2 * n):
        raise ValidationError("rotation must be (2N, 2N) for N values")
    block = np.zeros((2 * n, 2 * n))
    k = np.arange(n)
    block[2 * k, 2 * k + 1] = values
    block[2 * k + 1, 2 * k] = -values
    m = rotation @ block @ rotation.T
    return 0.5 * (m - m.T)


def validate(m, val_tol: float = VAL_TOL) -> Diagnostics:
    """Physicality diagnostics; never raises on bad content."""
    m = np.asarray(m, dtype=float)
    defect = float(np.linalg.norm(m + m.T))
    sym = 0.5 * (m - m.T)
    ev = np.linalg.eigvalsh(1j * sym) if sym.size else np.zeros(0)
    values = np.sort(np.abs(ev))[::-1][: m.shape[0] // 2]
    excess = float(np.max(values, initial=0.0) - 1.0)
    scale = max(1.0, float(np.linalg.norm(m)))
    valid = defect <= 1e-10 * scale and excess <= val_tol and m.shape[0] % 2 == 0
    pure = bool(values.size) and bool(np.all(np.abs(values - 1.0) <= val_tol))
    mixed = bool(np.all(values <= val_tol))
    return Diagnostics(defect, excess, values, bool(valid), pure, mixed)
