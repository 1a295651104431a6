"""Quasi-static two-dot pump.

The dot energies follow ``eps_I(t) = cos(omega t)`` and
``eps_II(t) = cos(omega t + phi)``.  At each instant the static scattering
problem is solved with the frozen energies; the drive frequency only sets the
period.  No Floquet side bands are included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .lattice import ParallelModel, check_momentum, dispersion
from .observables import DEFAULT_SITE, delta_j
from .quadrature import IntegralResult, richardson
from .scattering import TwoParticleInput


@dataclass(frozen=True)
class PumpProtocol:
    """Drive ``eps_I = cos(omega t)``, ``eps_II = cos(omega t + phi)``.

    Parameters
    ----------
    omega : float
        Drive frequency, ``T = 2 pi / omega``.
    phi : float
        Phase lag of conductor II.
    n_samples : int
        Samples per period of the base grid (at least 64).
    t0 : float
        Global time shift of the grid; sample times are reduced mod ``T``.
    """

    omega: float
    phi: float
    n_samples: int = 256
    t0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be positive, got {self.omega!r}")
        if not math.isfinite(self.phi):
            raise DomainError("phi must be finite")
        if int(self.n_samples) != self.n_samples or self.n_samples < 64:
            raise DomainError(f"n_samples must be an integer >= 64, got {self.n_samples!r}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def grid(self, n: int | None = None) -> np.ndarray:
        """Uniform sample times in ``[0, T)``, sorted."""
        n = self.n_samples if n is None else n
        T = self.period
        return np.sort(np.mod(self.t0 + T * np.arange(n) / n, T))

    @property
    def t_grid(self) -> np.ndarray:
        return self.grid()

    def onsite(self, t: float) -> tuple[float, float]:
        w = self.omega * t
        return math.cos(w), math.cos(w + self.phi)

    def frozen_model(self, t: float, lam: float, gammas) -> ParallelModel:
        eI, eII = self.onsite(t)
        gI, gII = gammas
        return ParallelModel(eI, eII, gI, gII, lam)


def instantaneous_delta_j(protocol: PumpProtocol, t, k1, k2, lam, gammas,
                          conductor: int = 1, site: int = DEFAULT_SITE) -> float:
    """``delta j`` in the chosen conductor for the model frozen at time ``t``."""
    t = float(t)
    if not (0.0 <= t < protocol.period):
        raise DomainError(f"t must lie in [0, T), got {t!r}")
    model = protocol.frozen_model(t, lam, gammas)
    if model.lam == 0.0:
        return 0.0
    return delta_j(TwoParticleInput(k1, k2, model), site, conductor).delta_j


def _samples(protocol, times, k1, k2, lam, gammas, conductor, site):
    return np.array([instantaneous_delta_j(protocol, t, k1, k2, lam, gammas, conductor, site)
                     for t in times])


def cycle_average_result(protocol: PumpProtocol, k1, k2, lam, gammas, conductor: int = 1,
                         site: int = DEFAULT_SITE, rtol: float = 1e-4,
                         max_samples: int = 4096) -> IntegralResult:
    """Period average ``<delta j> = (1/T) int_0^T delta j(t) dt`` with diagnostics.

    Periodic trapezoid rule, doubling the grid until successive averages agree
    to ``rtol``.  The tolerance is measured against the larger of ``|<dj>|``
    and the mean of ``|dj(t)|``, so averages that nearly cancel still
    terminate.  The value is the Richardson combination (in ``h^2``) of the
    last pair; ``eta_trace`` holds ``(1/n, average)`` per grid.

    Raises
    ------
    ConvergenceError
        If ``max_samples`` is reached first; ``trace`` holds ``(n, average)``.
    """
    if float(lam) == 0.0:
        return IntegralResult(0.0, 0.0)
    n = protocol.n_samples
    T = protocol.period
    vals = _samples(protocol, protocol.grid(n), k1, k2, lam, gammas, conductor, site)
    trace = [(n, float(vals.mean()))]
    while True:
        if 2 * n > max_samples:
            raise ConvergenceError("cycle average did not converge", trace)
        # the new samples sit halfway between the old ones
        mid = np.mod(protocol.t0 + T * (np.arange(n) + 0.5) / n, T)
        vals = np.concatenate([vals, _samples(protocol, mid, k1, k2, lam, gammas, conductor, site)])
        n *= 2
        avg = float(vals.mean())
        prev = trace[-1][1]
        trace.append((n, avg))
        scale = max(abs(avg), float(np.abs(vals).mean()))
        if abs(avg - prev) <= rtol * scale:
            best, _ = richardson([(2.0 / n) ** 2, (1.0 / n) ** 2], [prev, avg])
            return IntegralResult(float(best.real), abs(avg - prev),
                                  eta_trace=[(1.0 / m, v) for m, v in trace])


def cycle_average(protocol: PumpProtocol, k1, k2, lam, gammas, conductor: int = 1,
                  site: int = DEFAULT_SITE, rtol: float = 1e-4, max_samples: int = 4096) -> float:
    """Cycle-averaged ``delta j``; see :func:`cycle_average_result`."""
    return float(cycle_average_result(protocol, k1, k2, lam, gammas, conductor, site, rtol, max_samples).value)


def resonance_onsite(k, gamma) -> tuple[float, float]:
    """On-site energy at which a dot with coupling ``gamma`` is resonant at ``k``.

    The two branches ``E - gamma^2 (E -/+ sqrt(E^2 - 4))`` with
    ``sqrt(E^2 - 4) = i sqrt(4 - E^2)`` inside the band.  The resonance
    criterion is a vanishing real part of the transmission denominator, so
    the real part of each branch is returned; both equal ``E (1 - gamma^2)``
    and reduce to ``E_k`` as ``gamma -> 0``.
    """
    k = check_momentum(k)
    E = dispersion(k)
    root = 1j * math.sqrt(4.0 - E * E)
    minus = E - gamma**2 * (E - root)
    plus = E - gamma**2 * (E + root)
    return float(minus.real), float(plus.real)
