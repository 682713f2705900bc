"""Straight-line programs of preparations, evolutions and measurements.

A program starts with exactly one preparation gate, followed by any mix of
unitary, Lindblad and measurement gates.  Execution is deterministic given
the seed: measurement draws come from a :class:`~dflo.measure.RandomSource`,
and shot ``k`` of a multi-shot run uses the independent stream ``(seed, k)``.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import evolve, measure
from .errors import DfloError, NonPhysicalResidue, ProgramError, ValidationError
from .evolve import Backend
from .model import LindbladModel, QuadraticHamiltonian
from .state import number_state, vacuum, validate


@dataclass(frozen=True)
class PrepareVacuum:
    pass


@dataclass(frozen=True)
class PrepareNumber:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))


@dataclass(frozen=True)
class Unitary:
    hamiltonian: QuadraticHamiltonian
    t: float


@dataclass(frozen=True)
class Lindblad:
    model: LindbladModel
    t: float
    backend: Backend = Backend.AUTO

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))


@dataclass(frozen=True)
class Measure:
    """Measure ``modes`` (0-based) in the listed order."""

    modes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(j) for j in self.modes))


Gate = Union[PrepareVacuum, PrepareNumber, Unitary, Lindblad, Measure]
_PREPARATIONS = (PrepareVacuum, PrepareNumber)


def _gate_modes(gate: Gate) -> int | None:
    if isinstance(gate, PrepareNumber):
        return len(gate.bits)
    if isinstance(gate, Unitary):
        return gate.hamiltonian.modes
    if isinstance(gate, Lindblad):
        return gate.model.modes
    return None


@dataclass(frozen=True)
class Program:
    modes: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.modes < 1:
            raise ProgramError("a program needs at least one mode")
        if not self.gates or not isinstance(self.gates[0], _PREPARATIONS):
            raise ProgramError("the first gate must be a preparation", 0)
        for i, gate in enumerate(self.gates):
            if i and isinstance(gate, _PREPARATIONS):
                raise ProgramError("only one preparation is allowed, as the first gate", i)
            n = _gate_modes(gate)
            if n is not None and n != self.modes:
                raise ProgramError(f"gate acts on {n} modes, program has {self.modes}", i)
            if isinstance(gate, (Unitary, Lindblad)):
                if not np.isfinite(gate.t) or gate.t < 0:
                    raise ProgramError(f"gate time must be finite and >= 0, got {gate.t}", i)
            if isinstance(gate, Lindblad) and gate.backend is Backend.UNITARY:
                raise ProgramError("'unitary' is not a selectable backend", i)
            if isinstance(gate, Measure):
                if any(not 0 <= j < self.modes for j in gate.modes):
                    raise ProgramError(f"measured modes {list(gate.modes)} out of range", i)
                if len(set(gate.modes)) != len(gate.modes):
                    raise ProgramError(f"measured modes {list(gate.modes)} repeat", i)

    @property
    def measured_modes(self) -> int:
        return sum(len(g.modes) for g in self.gates if isinstance(g, Measure))


@dataclass
class RunResult:
    records: list[measure.MeasurementRecord]
    final_state: np.ndarray
    timings: list[float] = field(default_factory=list)
    backends: list[str | None] = field(default_factory=list)

    @property
    def bits(self) -> str:
        return "".join(str(r.outcome) for r in self.records)

    def to_dict(self) -> dict:
        """JSON-ready summary; timings are left out so output is reproducible."""
        return {
            "records": [r.to_dict() for r in self.records],
            "outcomes": self.bits,
            "final_state": self.final_state.tolist(),
            "backends": self.backends,
        }


def _apply(gate: Gate, m: np.ndarray | None, modes: int, rng: measure.RandomSource, records: list):
    """Apply one gate; returns the new state and the evolution path used (if any)."""
    if isinstance(gate, PrepareVacuum):
        return vacuum(modes), None
    if isinstance(gate, PrepareNumber):
        return number_state(gate.bits), None
    if isinstance(gate, Unitary):
        return evolve.unitary_evolve(m, gate.hamiltonian, gate.t), None
    if isinstance(gate, Lindblad):
        out, path = evolve.evolve_with_backend(m, gate.model, gate.t, gate.backend)
        return out, path.value
    if isinstance(gate, Measure):
        recs, out = measure.sample_subset(m, gate.modes, rng)
        records.extend(recs)
        return out, None
    raise ValidationError(f"unknown gate {gate!r}")


def _execute(
    program: Program, gates: Sequence[Gate], start: int, m, rng: measure.RandomSource, debug: bool = False
) -> RunResult:
    records: list[measure.MeasurementRecord] = []
    timings, backends = [], []
    for i, gate in enumerate(gates, start=start):
        t0 = time.perf_counter()
        try:
            m, path = _apply(gate, m, program.modes, rng, records)
        except DfloError as exc:
            if getattr(exc, "gate_index", None) is None:
                exc.gate_index = i
            raise
        timings.append(time.perf_counter() - t0)
        if debug:
            diag = validate(m)
            if not diag.valid:
                raise NonPhysicalResidue(
                    f"state after gate {i} is unphysical (excess {diag.max_excess:.3e}, "
                    f"antisymmetry defect {diag.antisymmetry_defect:.3e})"
                )
        backends.append(path)
    return RunResult(records, m, timings, backends)


def run(program: Program, seed: int, stream: int | None = None, debug: bool = False) -> RunResult:
    """Execute ``program`` once.

    Parameters
    ----------
    seed : int
        Master seed for measurement draws.
    stream : int, optional
        Sub-stream index; ``run(p, s, stream=k)`` reproduces shot ``k`` of
        ``sample_shots(p, shots, s)``.
    debug : bool
        Validate the state after every gate (costs an extra O(N^3) each).
    """
    rng = measure.RandomSource(seed, stream)
    return _execute(program, program.gates, 0, None, rng, debug)


def _first_measure(program: Program) -> int:
    for i, gate in enumerate(program.gates):
        if isinstance(gate, Measure):
            return i
    return len(program.gates)


def sample_shots(program: Program, shots: int, seed: int) -> dict[str, int]:
    """Histogram of measurement bit strings over ``shots`` independent runs.

    Everything before the first measurement is deterministic, so it is
    computed once and shared; each shot replays only the rest with its own
    random stream.  Keys are bit strings in measurement order, sorted.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    cut = _first_measure(program)
    prefix = _execute(program, program.gates[:cut], 0, None, measure.RandomSource(seed))
    tail = program.gates[cut:]
    counts: Counter[str] = Counter()
    for k in range(shots):
        rng = measure.RandomSource(seed, k)
        result = _execute(program, tail, cut, prefix.final_state, rng)
        counts[result.bits] += 1
    return dict(sorted(counts.items()))
