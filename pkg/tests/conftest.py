from __future__ import annotations

import numpy as np
import pytest

from dflo import evolve, model, state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_antisymmetric(rng, n, scale=1.0):
    g = rng.normal(size=(n, n))
    return scale * (g - g.T)


def random_rotation(rng, n):
    """Random element of SO(n)."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_covariance(rng, modes, pure=False):
    values = np.ones(modes) if pure else rng.uniform(0.0, 1.0, size=modes)
    return state.from_williamson(random_rotation(rng, 2 * modes), values)


def hopping_hamiltonian(amplitude=1.0):
    """Two modes, a1^dag a2 + h.c. (0-based modes 0 and 1)."""
    return model.hamiltonian_from_dirac(2, hoppings=[(0, 1, amplitude)])


def beam_splitter_state():
    """|10> sent through a 50:50 beam splitter: (|10> + |01>)/sqrt(2) up to phase."""
    return evolve.unitary_evolve(state.number_state([1, 0]), hopping_hamiltonian(), np.pi / 4)


# -- acceptance summary --------------------------------------------------------------


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config._acceptance_lines

    def report(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
