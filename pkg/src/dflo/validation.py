"""Oracle-agreement checks shared by the ``validate`` command and the tests.

Each check compares a fast covariance-matrix result with the dense
reference in :mod:`dflo.oracle` and reports the largest deviation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import evolve, measure, oracle
from .circuit import Lindblad, Measure, PrepareNumber, PrepareVacuum, Program, Unitary
from .errors import IllConditionedSpectrum, NoUniqueSteadyState, TimeTooLarge, TooManyModes
from .model import LindbladModel, random_model
from .state import number_state, vacuum

ORACLE_TOL = 1e-6
CROSS_TOL = 1e-8
PROB_TOL = 1e-8
WICK_TOL = 1e-6
CHECK_TIMES = (0.1, 0.5, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def _require_small(modes: int) -> None:
    if modes > oracle.ORACLE_MAX_MODES:
        raise TooManyModes(
            f"oracle validation supports at most {oracle.ORACLE_MAX_MODES} modes, got {modes}"
        )


def _initial_bits(modes: int) -> list[list[int]]:
    alternating = [(j + 1) % 2 for j in range(modes)]
    return [[0] * modes, alternating]


def check_model(
    model: LindbladModel, times: Iterable[float] = CHECK_TIMES, tol_scale: float = 1.0, label: str = ""
) -> list[CheckResult]:
    """Oracle and backend-agreement checks for one model."""
    n = model.modes
    _require_small(n)
    prefix = f"{label}: " if label else ""
    times = list(times)
    oracle_dev = backend_dev = 0.0
    wick_dev = 0.0
    for bits in _initial_bits(n):
        m0 = number_state(bits)
        rho0 = oracle.number_state_density(bits)
        for t in times:
            fast = evolve.dissipative_evolve(m0, model, t, "lyapunov")
            rho = oracle.dense_lindblad_evolve(rho0, model, t)
            oracle_dev = max(oracle_dev, _max_abs(fast, oracle.dense_covariance(rho)))
            if n <= 3:
                wick_dev = max(wick_dev, oracle.wick_check(rho, oracle.dense_covariance(rho), 4))
            for backend in ("homogeneous", "third_quantized"):
                try:
                    other = evolve.dissipative_evolve(m0, model, t, backend)
                except (TimeTooLarge, IllConditionedSpectrum):
                    continue
                backend_dev = max(backend_dev, _max_abs(fast, other))
    results = [
        CheckResult(prefix + "lyapunov vs dense master equation", oracle_dev, ORACLE_TOL * tol_scale),
        CheckResult(prefix + "backend agreement", backend_dev, CROSS_TOL * tol_scale),
    ]
    if n <= 3:
        results.append(CheckResult(prefix + "Wick factorization (order 4)", wick_dev, WICK_TOL * tol_scale))
    try:
        ss = evolve.steady_state(model)
    except NoUniqueSteadyState:
        pass
    else:
        dense = oracle.dense_covariance(oracle.dense_steady_state(model))
        results.append(CheckResult(prefix + "steady state vs dense kernel", _max_abs(ss.m0, dense), ORACLE_TOL * tol_scale))
    return results


def check_program(program: Program, tol_scale: float = 1.0) -> list[CheckResult]:
    """Follow ``program`` with both representations side by side.

    Measurements compare the exact joint outcome tables and then condition
    both states on the most likely outcome, so the walk is deterministic.
    """
    n = program.modes
    _require_small(n)
    state_dev = prob_dev = 0.0
    m, rho = None, None
    for gate in program.gates:
        if isinstance(gate, PrepareVacuum):
            m, rho = vacuum(n), oracle.vacuum_density(n)
        elif isinstance(gate, PrepareNumber):
            m, rho = number_state(gate.bits), oracle.number_state_density(gate.bits)
        elif isinstance(gate, Unitary):
            m = evolve.unitary_evolve(m, gate.hamiltonian, gate.t)
            rho = oracle.dense_unitary_evolve(rho, gate.hamiltonian, gate.t)
        elif isinstance(gate, Lindblad):
            m = evolve.dissipative_evolve(m, gate.model, gate.t, gate.backend)
            rho = oracle.dense_lindblad_evolve(rho, gate.model, gate.t)
        elif isinstance(gate, Measure):
            fast = measure.outcome_distribution(m, gate.modes)
            table = oracle.dense_measure_distribution(rho, gate.modes)
            prob_dev = max(prob_dev, max(abs(fast[k] - table.probabilities[k]) for k in fast))
            best = max(sorted(table.probabilities), key=lambda k: table.probabilities[k])
            for j, bit in zip(gate.modes, best):
                m = measure.apply_outcome(m, j, int(bit))
            rho = table.states[best]
        state_dev = max(state_dev, _max_abs(m, oracle.dense_covariance(rho)))
    return [
        CheckResult("program states vs dense", state_dev, ORACLE_TOL * tol_scale),
        CheckResult("measurement tables vs dense", prob_dev, PROB_TOL * tol_scale),
    ]


def random_suite(count: int, seed: int, max_modes: int = 4) -> list[LindbladModel]:
    """Seeded random models: N in 1..max_modes, 0-3 jumps with norm <= 1, |h|_2 <= 2."""
    rng = np.random.default_rng(seed)
    models = []
    for _ in range(count):
        n = int(rng.integers(1, max_modes + 1))
        models.append(
            random_model(n, rng, n_jumps=int(rng.integers(0, 4)), h_norm=float(rng.uniform(0.0, 2.0)))
        )
    return models


def check_random_suite(count: int = 10, seed: int = 0, tol_scale: float = 1.0) -> list[CheckResult]:
    results = []
    for k, model in enumerate(random_suite(count, seed)):
        results.extend(check_model(model, tol_scale=tol_scale, label=f"random #{k} (N={model.modes}, {len(model.jumps)} jumps)"))
    return results
