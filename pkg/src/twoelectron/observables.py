"""Two-particle currents and density correlators.

All currents are bond currents ``2 Im <c+_l c_{l+1}>`` on unit-hopping bonds,
reported in plane-wave normalisation with the extensive factors (the number
of lattice sites) stripped.  The interaction-induced change of the current
carried by particle ``a`` splits into

* ``j_s``: the scattered-wave term ``<S|j|S>``,
  ``2 g^2 |psi(c)|^2 int d eps rho_spec(eps) Im[G_a(l)* G_a(l+1)](E - eps)``;
* ``j_c``: the cross term ``<S|j|phi> + <phi|j|S>``, which reduces to the
  on-shell Green's function ``G_a(E_ka + i0)``.

``conductor=1`` is conductor I (or the spin-up electron), ``conductor=2``
conductor II (spin-down).  The closed form for perfect chains is the total
``delta j_1 + delta j_2``: each conductor alone carries
``sgn(k_a) Im K / |1/lam - K|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError
from .lattice import DOT, ImpurityChain, ParallelModel, SideDotModel, check_momentum, dispersion
from .quadrature import IntegralResult, band_integral
from .scattering import (
    TwoParticleInput,
    contact_kernel,
    green_sites,
    kernel_grid,
    psi_at_contact,
    wave_sites,
)

DEFAULT_SITE = 50


@dataclass(frozen=True)
class CurrentBreakdown:
    """Interaction-induced current change on bond ``(site, site+1)``."""

    j_s: float
    j_c: float
    delta_j: float
    lead: str
    site: int
    conductor: int
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CorrelatorSet:
    """Marginal and joint right-lead densities, normalisation stripped."""

    n_I: float
    n_II: float
    n_In_II: float
    covariance: float
    sites: tuple


def _roles(inp: TwoParticleInput, conductor: int):
    first, second = inp.chains
    if conductor == 1:
        return first, second, inp.k1, inp.k2
    if conductor == 2:
        return second, first, inp.k2, inp.k1
    raise DomainError(f"conductor must be 1 or 2, got {conductor!r}")


def lead_of(chain, l: int) -> str:
    """``'input'`` left of the impurity, ``'output'`` right of it."""
    if isinstance(chain, ImpurityChain):
        return "output" if l >= 1 else "input"
    return "output" if l >= 0 else "input"


def incident_current(inp: TwoParticleInput):
    """Noninteracting currents ``(2|t1|^2 sin k1, 2|t2|^2 sin k2)``."""
    first, second = inp.chains
    t1, _ = first.amplitudes(inp.k1)
    t2, _ = second.amplitudes(inp.k2)
    return 2.0 * abs(t1) ** 2 * math.sin(inp.k1), 2.0 * abs(t2) ** 2 * math.sin(inp.k2)


@lru_cache(maxsize=4096)
def spectator_integral(active, spectator, E: float, l: int, band_only: bool = False,
                       rtol: float = 1e-10, atol: float = 1e-12) -> IntegralResult:
    """``Z_l = sum over spectator states of |chi(c)|^2 Im[G(l)* G(l+1)](E - e)``.

    The band part is an integral over the spectator's local density of states
    at its contact; only energies where ``E - e`` lies inside the active band
    contribute.  Bound states of the spectator add point masses.
    """
    sites = [l, l + 1]

    def J(w):
        G = green_sites(active, w, sites, band_only=band_only)
        out = np.imag(np.conj(G[..., 0]) * G[..., 1])
        return np.where(np.abs(w) < 2.0, out, 0.0)

    lo, hi = max(-2.0, E - 2.0), min(2.0, E + 2.0)
    pts = []
    hs, ha = spectator.resonance_energy(), active.resonance_energy()
    if hs is not None:
        pts.append(hs)
    if ha is not None:
        pts.append(E - ha)
    c = spectator.contact

    def integrand(x):
        rho = -green_sites(spectator, x, [c]).imag[:, 0] / math.pi
        return rho * J(E - x)

    res = band_integral(integrand, lo, hi, breakpoints=pts, rtol=rtol, atol=atol)
    value = float(np.real(res.value))
    if not band_only:
        for b in spectator.bound_states():
            value += b.contact**2 * float(J(np.array([E - b.energy]))[0])
    return IntegralResult(value, res.error_estimate)


def current_j_s(inp: TwoParticleInput, l: int = DEFAULT_SITE, conductor: int = 1) -> float:
    """Scattered-wave contribution ``<S|j_l|S>`` for the chosen conductor."""
    active, spectator, _, _ = _roles(inp, conductor)
    l = active.check_bond(l)
    g = inp.coupling
    if g == 0.0:
        return 0.0
    cv = psi_at_contact(inp)
    Z = spectator_integral(active, spectator, inp.energy, l, inp.band_only, inp.rtol, inp.atol).value
    return 2.0 * g * g * abs(cv.psi) ** 2 * Z


def current_j_c(inp: TwoParticleInput, l: int = DEFAULT_SITE, conductor: int = 1) -> float:
    """Cross contribution ``<S|j_l|phi> + <phi|j_l|S>`` for the chosen conductor."""
    active, spectator, ka, ks = _roles(inp, conductor)
    l = active.check_bond(l)
    g = inp.coupling
    if g == 0.0:
        return 0.0
    cv = psi_at_contact(inp)
    phi_a = wave_sites(active, ka, [l, l + 1])
    if phi_a[0] == 0 and phi_a[1] == 0:
        return 0.0
    G = green_sites(active, dispersion(ka), [l, l + 1], band_only=inp.band_only)
    phi_s = complex(wave_sites(spectator, ks, [spectator.contact])[0])
    bracket = np.conj(phi_a[0]) * G[1] - np.conj(phi_a[1]) * G[0]
    return 2.0 * float(np.imag(g * cv.psi * np.conj(phi_s) * bracket))


def delta_j(inp: TwoParticleInput, l: int = DEFAULT_SITE, conductor: int = 1) -> CurrentBreakdown:
    """``delta j = j_s + j_c`` on bond ``(l, l+1)`` of the chosen conductor."""
    active, _, _, _ = _roles(inp, conductor)
    l = active.check_bond(l)
    js = current_j_s(inp, l, conductor)
    jc = current_j_c(inp, l, conductor)
    meta = {}
    if inp.coupling != 0.0:
        cv = psi_at_contact(inp)
        meta = {"K_error": cv.integral_meta.error_estimate, "warnings": cv.warnings}
    return CurrentBreakdown(js, jc, js + jc, lead_of(active, l), l, conductor, meta)


def total_delta_j(inp: TwoParticleInput, l: int = DEFAULT_SITE) -> float:
    """Sum of the current changes in both conductors at bond ``l``."""
    return delta_j(inp, l, 1).delta_j + delta_j(inp, l, 2).delta_j


def closed_form_delta_j(k1, k2, lam, model: ParallelModel | None = None) -> float:
    """``Im K / |1/lam - K|^2 (sgn k1 + sgn k2)`` for perfect chains.

    ``K`` is the contact kernel of two perfect chains at ``E_k1 + E_k2``.
    The value is the total change summed over both conductors.
    """
    if model is not None and not (isinstance(model, ParallelModel) and model.is_perfect):
        raise DomainError("closed form needs eps_I = eps_II = 0 and gamma_I = gamma_II = 1")
    k1, k2 = check_momentum(k1), check_momentum(k2)
    lam = float(lam)
    if lam == 0.0:
        return 0.0
    free = ImpurityChain(0.0, 1.0)
    K = contact_kernel(free, free, dispersion(k1) + dispersion(k2)).value
    return K.imag / abs(1.0 / lam - K) ** 2 * (math.copysign(1.0, k1) + math.copysign(1.0, k2))


# ---------------------------------------------------------------------------
# side-coupled dot

def triplet_current(model: SideDotModel, k1, k2) -> float:
    """Current ``2(|t_k1|^2 sin k1 + |t_k2|^2 sin k2)`` of the triplet channel."""
    ch = model.chain
    t1, _ = ch.amplitudes(k1)
    t2, _ = ch.amplitudes(k2)
    return 2.0 * (abs(t1) ** 2 * math.sin(k1) + abs(t2) ** 2 * math.sin(k2))


def filtering_input(model: SideDotModel, band_only: bool = False) -> TwoParticleInput:
    k0 = model.k0
    return TwoParticleInput(k0, k0, model, band_only=band_only)


def singlet_current_Js(model: SideDotModel, l: int = DEFAULT_SITE, band_only: bool = False) -> float:
    """``Js = (j_s_up + j_s_down) / 2`` at ``k1 = k2 = k0`` in the output lead."""
    if l < 0:
        raise DomainError("Js is evaluated in the output lead (l >= 0)")
    inp = filtering_input(model, band_only)
    return 0.5 * (current_j_s(inp, l, 1) + current_j_s(inp, l, 2))


def singlet_current_limit(model: SideDotModel, l: int = DEFAULT_SITE, band_only: bool = False) -> float:
    """``U -> infinity`` limit of :func:`singlet_current_Js`: ``2 |phi(d,d)|^2 Z / |K|^2``."""
    inp = filtering_input(model, band_only)
    ch = model.chain
    K = contact_kernel(ch, ch, inp.energy, band_only).value
    phi = inp.incoming(DOT, DOT)
    Z = spectator_integral(ch, ch, inp.energy, l, band_only).value
    return 2.0 * abs(phi) ** 2 * Z / abs(K) ** 2


# ---------------------------------------------------------------------------
# density correlators

def _check_right_lead(inp: TwoParticleInput, l, m):
    if not (isinstance(l, (int, np.integer)) and isinstance(m, (int, np.integer))) or l <= 0 or m <= 0:
        raise DomainError("correlators are defined for right-lead sites l, m > 0")
    if inp.k1 <= 0 or inp.k2 <= 0:
        raise DomainError("correlators need left-incident momenta k1, k2 > 0")


def _window_marginal(inp, fixed_first: bool, site: int, W: int, chunk: int = 256):
    first, second = inp.chains
    g = inp.coupling
    cv = psi_at_contact(inp) if g != 0.0 else None
    others = list(range(-W, W + 1))
    if fixed_first:
        fixed = complex(wave_sites(first, inp.k1, [site])[0])
        phis = wave_sites(second, inp.k2, others)
    else:
        fixed = complex(wave_sites(second, inp.k2, [site])[0])
        phis = wave_sites(first, inp.k1, others)
    num = 0.0
    for s in range(0, len(others), chunk):
        block = others[s:s + chunk]
        psi = fixed * phis[s:s + chunk]
        if cv is not None:
            if fixed_first:
                K = kernel_grid(first, second, inp.energy, [site], block, inp.band_only, inp.rtol, inp.atol).value[0]
            else:
                K = kernel_grid(first, second, inp.energy, block, [site], inp.band_only, inp.rtol, inp.atol).value[:, 0]
            psi = psi + g * K * cv.psi
        num += float(np.sum(np.abs(psi) ** 2))
    return num / float(np.sum(np.abs(phis) ** 2))


def density_correlators(inp: TwoParticleInput, l: int, m: int, window=None,
                        tol: float = 1e-3, max_window: int = 2048) -> CorrelatorSet:
    """Right-lead densities ``<n_I(l)>``, ``<n_II(m)>`` and their correlation.

    Normalisation factors are stripped: ``n_I`` is ``sum_m' |psi(l, m')|^2``
    divided by ``sum_m' |phi_II(m')|^2`` over the window ``|m'| <= W`` (and
    symmetrically for ``n_II``); ``n_In_II = |psi(l, m)|^2``.  At ``lam = 0``
    the covariance vanishes identically.

    ``window=None`` returns the infinite-window limit, in which the marginals
    reduce to the incoming densities because the scattered weight along a line
    grows only logarithmically with ``W``.  An integer ``window`` evaluates the
    finite sums; ``window='auto'`` doubles ``W`` from 64 until the marginals
    change by less than ``tol`` (relative).
    """
    _check_right_lead(inp, l, m)
    first, second = inp.chains
    g = inp.coupling
    psi = complex(wave_sites(first, inp.k1, [l])[0] * wave_sites(second, inp.k2, [m])[0])
    if g != 0.0:
        cv = psi_at_contact(inp)
        K = kernel_grid(first, second, inp.energy, [l], [m], inp.band_only, inp.rtol, inp.atol).value[0, 0]
        psi = psi + g * K * cv.psi
    joint = abs(psi) ** 2

    if window is None:
        n1 = abs(complex(wave_sites(first, inp.k1, [l])[0])) ** 2
        n2 = abs(complex(wave_sites(second, inp.k2, [m])[0])) ** 2
    elif window == "auto":
        W = 64
        trace = []
        prev = None
        while True:
            cur = (_window_marginal(inp, True, l, W), _window_marginal(inp, False, m, W))
            trace.append((W, cur))
            if prev is not None and all(abs(a - b) <= tol * abs(a) for a, b in zip(cur, prev)):
                break
            if 2 * W > max_window:
                raise ConvergenceError("correlator window did not converge", trace)
            prev = cur
            W *= 2
        n1, n2 = cur
    else:
        W = int(window)
        if W < 1:
            raise DomainError("window must be a positive integer")
        n1 = _window_marginal(inp, True, l, W)
        n2 = _window_marginal(inp, False, m, W)
    return CorrelatorSet(n1, n2, joint, joint - n1 * n2, (int(l), int(m)))


def covariance_expansion(inp: TwoParticleInput, l: int, m: int) -> float:
    """Infinite-window covariance from ``2 Re[phi* S] + |S|^2`` with ``S = g K psi(c)``.

    Independent route to :func:`density_correlators` (``window=None``): the
    scattered amplitude is used directly instead of assembling ``psi``.
    """
    _check_right_lead(inp, l, m)
    first, second = inp.chains
    g = inp.coupling
    if g == 0.0:
        return 0.0
    cv = psi_at_contact(inp)
    phi = complex(first.wavefunction(inp.k1, l) * second.wavefunction(inp.k2, m))
    S = g * cv.psi * kernel_grid(first, second, inp.energy, [l], [m], inp.band_only, inp.rtol, inp.atol).value[0, 0]
    return float(2.0 * (np.conj(phi) * S).real + abs(S) ** 2)
