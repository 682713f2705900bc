"""Occupation-number measurements on Gaussian states.

Measuring mode ``j`` yields outcome ``n`` with probability
``P_j(1) = (1 - M[2j, 2j+1]) / 2``; the conditioned state is again Gaussian
and its covariance matrix follows from Wick's theorem in O(N^2).
Modes are 0-based here; serialized records use 1-based modes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import blas

from .errors import DuplicateMode, ImpossibleOutcome, IndexOutOfRange, ValidationError
from .state import as_covariance, modes_of

P_FLOOR = 1e-12


class RandomSource:
    """Seeded, counter-based (Philox) source of uniform draws.

    Identical seeds give identical draw sequences on every platform, since
    numpy's Philox bit generator and ``Generator.random`` are specified
    bit-exactly.

    Parameters
    ----------
    seed : int
        Non-negative master seed (up to 64 bits).
    stream : int, optional
        Independent sub-stream index; ``RandomSource(s, k)`` is the stream
        used for shot ``k`` of a multi-shot run with master seed ``s``.
    """

    def __init__(self, seed: int, stream: int | None = None):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit non-negative integer, got {seed}")
        self.seed = seed
        self.stream = stream
        entropy = [seed] if stream is None else [seed, int(stream)]
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
        self.draws = 0

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def derive(self, stream: int) -> "RandomSource":
        """Independent stream keyed by ``(seed, stream)``."""
        return RandomSource(self.seed, stream)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream={self.stream}, draws={self.draws})"


@dataclass(frozen=True)
class MeasurementRecord:
    mode: int
    outcome: int
    probability: float

    def to_dict(self) -> dict:
        return {"mode": self.mode + 1, "outcome": self.outcome, "probability": self.probability}


def _check_mode(m: np.ndarray, j: int) -> int:
    n = modes_of(m)
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)) or not 0 <= j < n:
        raise IndexOutOfRange(f"mode {j} out of range for {n} modes")
    return int(j)


def _check_bit(n) -> int:
    if n not in (0, 1):
        raise ValidationError(f"outcome must be 0 or 1, got {n!r}")
    return int(n)


def outcome_probability(m, j: int) -> float:
    """Probability ``P_j(1)`` of finding mode ``j`` occupied, clamped to [0, 1]."""
    m = np.asarray(m, dtype=float)
    j = _check_mode(m, j)
    return float(min(1.0, max(0.0, 0.5 * (1.0 - m[2 * j, 2 * j + 1]))))


def _probability(m: np.ndarray, j: int, n: int) -> float:
    p1 = outcome_probability(m, j)
    return p1 if n else 1.0 - p1


def _update(m: np.ndarray, j: int, n: int, p: float) -> np.ndarray:
    a, b = 2 * j, 2 * j + 1
    u, v = m[a], m[b]
    scale = (-1) ** n / (2.0 * p)
    # two in-place BLAS rank-1 updates on the Fortran-ordered view of the
    # copy: no full-size temporaries and no transposed pass, so the cost is
    # a clean O(N^2)
    out = m.copy()
    ft = out.T
    blas.dger(-scale, v, u, a=ft, overwrite_a=1)
    blas.dger(scale, u, v, a=ft, overwrite_a=1)
    out[[a, b], :] = 0.0
    out[:, [a, b]] = 0.0
    out[a, b] = 1.0 - 2.0 * n
    out[b, a] = -(1.0 - 2.0 * n)
    return out


def apply_outcome(m, j: int, n: int, p_floor: float = P_FLOOR) -> np.ndarray:
    """Covariance matrix conditioned on mode ``j`` having occupation ``n``.

    With ``a, b = 2j, 2j+1`` and ``P = P_j(n)``::

        M'[p, q] = M[p, q] - (-1)^n / (2P) * (M[a, p] M[b, q] - M[a, q] M[b, p])

    for ``p, q`` outside ``{a, b}``; rows and columns ``a, b`` are cleared
    and ``M'[a, b] = 1 - 2n``.  This is the projector update ``Pi rho Pi / P``
    pushed through Wick's theorem.

    Raises
    ------
    ImpossibleOutcome
        If ``P_j(n) < p_floor``.
    """
    m = as_covariance(m)
    j = _check_mode(m, j)
    n = _check_bit(n)
    p = _probability(m, j, n)
    if p < p_floor:
        raise ImpossibleOutcome(f"outcome {n} on mode {j} has probability {p:.3e} < {p_floor:.0e}")
    return _update(m, j, n, p)


def _sample(m: np.ndarray, j: int, rng: RandomSource, p_floor: float) -> tuple[MeasurementRecord, np.ndarray]:
    p1 = min(1.0, max(0.0, 0.5 * (1.0 - m[2 * j, 2 * j + 1])))
    u = rng.uniform()
    if p1 < p_floor:
        n = 0
    elif 1.0 - p1 < p_floor:
        n = 1
    else:
        n = 1 if u < p1 else 0
    p = p1 if n else 1.0 - p1
    return MeasurementRecord(j, n, p), _update(m, j, n, p)


def sample_mode(m, j: int, rng: RandomSource, p_floor: float = P_FLOOR) -> tuple[MeasurementRecord, np.ndarray]:
    """Draw an outcome for mode ``j`` and return the record and updated state.

    One uniform draw ``u`` per measurement: outcome 1 iff ``u < P_j(1)``.
    Outcomes with probability below ``p_floor`` are never selected.
    """
    m = as_covariance(m)
    return _sample(m, _check_mode(m, j), rng, p_floor)


def _check_subset(m: np.ndarray, modes: Sequence[int]) -> list[int]:
    modes = [_check_mode(m, j) for j in modes]
    if len(set(modes)) != len(modes):
        raise DuplicateMode(f"modes listed more than once: {modes}")
    return modes


def sample_subset(
    m, modes: Sequence[int], rng: RandomSource, p_floor: float = P_FLOOR
) -> tuple[list[MeasurementRecord], np.ndarray]:
    """Measure ``modes`` one after another, in the given order."""
    m = as_covariance(m)
    modes = _check_subset(m, modes)
    records = []
    for j in modes:
        rec, m = _sample(m, j, rng, p_floor)
        records.append(rec)
    return records, m


def outcome_distribution(m, modes: Sequence[int], p_floor: float = P_FLOOR) -> dict[str, float]:
    """Exact joint distribution of outcomes on ``modes`` from the conditional recursion.

    Keys are bit strings in measurement order; outcomes whose probability
    falls below ``p_floor`` at any step get probability 0.  Costs
    ``O(2^|S| N^2)``, so only for small subsets.
    """
    m = as_covariance(m)
    modes = _check_subset(m, modes)
    table = {}
    for bits in itertools.product((0, 1), repeat=len(modes)):
        state, prob = m, 1.0
        for j, n in zip(modes, bits):
            p = _probability(state, j, n)
            if p < p_floor:
                prob = 0.0
                break
            prob *= p
            state = _update(state, j, n, p)
        table["".join(map(str, bits))] = prob
    return table
