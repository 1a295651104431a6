import math

import numpy as np
import pytest

from twoelectron.errors import ConvergenceError, DomainError
from twoelectron.lattice import ImpurityChain, dispersion
from twoelectron.observables import delta_j
from twoelectron.pumping import (
    PumpProtocol,
    cycle_average,
    cycle_average_result,
    instantaneous_delta_j,
    resonance_onsite,
)
from twoelectron.scattering import TwoParticleInput

K = 1.35
GAMMAS = (0.6, 0.6)


def test_no_interaction_no_pumped_correction():
    p = PumpProtocol(0.01, 0.35, n_samples=64)
    assert cycle_average(p, K, K, 0.0, GAMMAS) == 0.0
    assert instantaneous_delta_j(p, 10.0, K, K, 0.0, GAMMAS) == 0.0


def test_quasi_static_sample_is_the_frozen_problem():
    p = PumpProtocol(0.02, 0.7, n_samples=64)
    t = 0.3 * p.period
    frozen = p.frozen_model(t, 0.8, (0.4, 0.6))
    assert frozen.eps_I == math.cos(0.02 * t) and frozen.eps_II == math.cos(0.02 * t + 0.7)
    direct = delta_j(TwoParticleInput(K, K, frozen), 50, 1).delta_j
    assert instantaneous_delta_j(p, t, K, K, 0.8, (0.4, 0.6)) == direct


def test_time_reversal_symmetry_without_phase():
    # phi = 0 gives identical dots whose energies satisfy eps(t) = eps(T - t)
    p = PumpProtocol(0.01, 0.0, n_samples=64)
    T = p.period
    for t in (0.1 * T, 0.37 * T):
        a = instantaneous_delta_j(p, t, K, K, 0.8, GAMMAS)
        b = instantaneous_delta_j(p, T - t, K, K, 0.8, GAMMAS)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-13)


def test_average_is_independent_of_time_origin():
    a = cycle_average(PumpProtocol(0.01, 0.35, n_samples=64), K, K, 0.8, GAMMAS)
    b = cycle_average(PumpProtocol(0.01, 0.35, n_samples=64, t0=123.4), K, K, 0.8, GAMMAS)
    assert abs(a - b) < 1e-6


def test_conductor_exchange_reverses_the_phase():
    p = PumpProtocol(0.01, 0.35, n_samples=64)
    q = PumpProtocol(0.01, -0.35, n_samples=64)
    a = cycle_average(p, K, K, 0.8, GAMMAS, conductor=1)
    b = cycle_average(q, K, K, 0.8, GAMMAS, conductor=2)
    assert abs(a - b) < 1e-6


def test_average_is_grid_converged():
    p = PumpProtocol(0.01, 0.35, n_samples=64)
    res = cycle_average_result(p, K, K, 0.8, GAMMAS)
    assert res.error_estimate <= 1e-4 * max(abs(res.value), 1e-3)
    dense = cycle_average(PumpProtocol(0.01, 0.35, n_samples=512), K, K, 0.8, GAMMAS)
    assert abs(res.value - dense) < 1e-5
    hs = [h for h, _ in res.eta_trace]
    assert hs == sorted(hs, reverse=True)


def test_average_reports_non_convergence():
    p = PumpProtocol(0.01, 0.35, n_samples=64)
    with pytest.raises(ConvergenceError) as info:
        cycle_average_result(p, K, K, 0.8, GAMMAS, rtol=1e-15, max_samples=64)
    assert [n for n, _ in info.value.trace] == [64]


def test_resonance_onsite_limits():
    for k in (0.4, 1.35, 2.5):
        lo, hi = resonance_onsite(k, 1e-8)
        assert lo == pytest.approx(dispersion(k), abs=1e-12) and hi == pytest.approx(dispersion(k), abs=1e-12)
    assert resonance_onsite(math.pi / 2, 0.6) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_resonance_onsite_maximises_transmission():
    k, gamma = 1.35, 0.1
    eps = np.linspace(-1.0, 1.0, 200001)
    T = [abs(ImpurityChain(e, gamma).amplitudes(k)[0]) ** 2 for e in eps[::50]]
    fine = eps[::50][int(np.argmax(T))]
    assert abs(resonance_onsite(k, gamma)[0] - fine) < 1e-3


def test_protocol_validation():
    for bad in (dict(omega=0.0, phi=0.1), dict(omega=0.1, phi=float("nan")),
                dict(omega=0.1, phi=0.1, n_samples=32), dict(omega=0.1, phi=0.1, n_samples=64.5)):
        with pytest.raises(DomainError):
            PumpProtocol(**bad)
    p = PumpProtocol(0.1, 0.2, n_samples=64)
    for t in (-1e-9, p.period):
        with pytest.raises(DomainError):
            instantaneous_delta_j(p, t, K, K, 0.5, GAMMAS)
    g = PumpProtocol(0.1, 0.2, n_samples=64, t0=5.0).t_grid
    assert len(g) == 64 and np.all(np.diff(g) > 0) and g[0] >= 0 and g[-1] < p.period
