"""Shared oracles for the test suite.

The two oracles here are independent of the production kernel: a direct
application of the two-particle Hamiltonian to an assembled wavefunction, and
an exact eigendecomposition of finite chains.
"""

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twoelectron.lattice import DOT, ImpurityChain, SideDot
from twoelectron.scattering import scattering_state_grid

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


# ---------------------------------------------------------------------------
# single-particle Hamiltonians, site by site

def hopping_row(chain, s):
    """Nonzero entries ``(site, H[s, site])`` of the one-particle Hamiltonian."""
    if isinstance(chain, ImpurityChain):
        out = [(0, chain.eps)] if s == 0 else []
        for n in (s - 1, s + 1):
            out.append((n, -chain.gamma if 0 in (s, n) else -1.0))
        return out
    if s == DOT:
        return [(DOT, chain.eps_d), (0, -chain.gamma)]
    out = [(s - 1, -1.0), (s + 1, -1.0)]
    if s == 0:
        out.append((DOT, -chain.gamma))
    return out


def schroedinger_residual(inp, L=20):
    """``max |(H - E) psi|`` over all site pairs with ``|l| <= L`` (plus the dot)."""
    c1, c2 = inp.chains
    dot = [DOT] if isinstance(c1, SideDot) else []
    inner = list(range(-L, L + 1)) + dot
    outer = list(range(-L - 1, L + 2)) + dot
    psi = scattering_state_grid(inp, outer, outer)
    idx = {s: i for i, s in enumerate(outer)}
    E, g, contact = inp.energy, inp.coupling, inp.contact
    worst = 0.0
    for a in inner:
        for b in inner:
            v = -E * psi[idx[a], idx[b]]
            for n, h in hopping_row(c1, a):
                v += h * psi[idx[n], idx[b]]
            for n, h in hopping_row(c2, b):
                v += h * psi[idx[a], idx[n]]
            if (a, b) == contact:
                v += g * psi[idx[a], idx[b]]
            worst = max(worst, abs(v))
    return worst


# ---------------------------------------------------------------------------
# finite chains

def finite_hamiltonian(chain, N):
    """Dense Hamiltonian on sites ``-N..N`` (plus the dot, stored last)."""
    sites = list(range(-N, N + 1)) + ([DOT] if isinstance(chain, SideDot) else [])
    idx = {s: i for i, s in enumerate(sites)}
    H = np.zeros((len(sites), len(sites)))
    for s in sites:
        for n, h in hopping_row(chain, s):
            if n in idx:
                H[idx[s], idx[n]] = h
    return H, idx


@pytest.fixture(scope="session")
def perfect_chain_spectrum():
    """Eigenvalues and contact weights of a perfect 1201-site chain."""
    H, idx = finite_hamiltonian(ImpurityChain(0.0, 1.0), 600)
    w, v = np.linalg.eigh(H)
    return w, v[idx[0]] ** 2


# ---------------------------------------------------------------------------
# acceptance report

ACCEPTANCE = []


def record_criterion(number, ok, detail):
    """Store a one-line verdict for the terminal summary; returns ``ok``."""
    ACCEPTANCE.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
