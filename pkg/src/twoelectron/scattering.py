"""Two-particle Lippmann-Schwinger scattering with a single contact interaction.

The interaction acts on one site pair ``c = (c1, c2)`` only (the two dots of
the parallel model, or the doubly occupied side dot).  The scattering state
is therefore fixed by the kernel ``K(l) = <l|G0+(E)|c>``:

    psi(l) = phi(l) + g K(l) psi(c),     psi(c) = phi(c) / (1 - g K(c)).

The kernel is evaluated as a nested spectral integral.  The inner momentum
integral that carries the pole is the single-particle Green's function of the
second particle, known in closed form; the outer integral runs over the band
spectral density of the first particle:

    K(l1, l2) = int d eps rho1_{l1}(eps) G2_{l2}(E - eps) + bound-state terms.

By default the bound states of both chains are included, which makes ``K``
the exact column of the free two-particle Green's function.  With
``band_only=True`` only the band-band term is kept (momentum integrals over
scattering states alone) and a completeness warning is attached whenever a
chain has bound states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, ResonanceError
from .lattice import (
    DOT,
    ImpurityChain,
    ParallelModel,
    SideDot,
    SideDotModel,
    check_momentum,
    dispersion,
    momentum_from_energy,
)
from .quadrature import IntegralResult, band_integral

PARALLEL = "parallel-distinguishable"
SINGLET = "singlet-spatial"

Model = Union[ParallelModel, SideDotModel]
Chain = Union[ImpurityChain, SideDot]

RESONANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class TwoParticleInput:
    """Incoming product state ``phi1_{k1}(l1) phi2_{k2}(l2)`` and the model.

    For the parallel model particle 1 lives on conductor I and particle 2 on
    conductor II; no antisymmetrisation is needed.  For the side dot particle
    1 is the spin-up and particle 2 the spin-down electron.
    """

    k1: float
    k2: float
    model: Model
    channel: str | None = None
    band_only: bool = False
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "k1", check_momentum(self.k1))
        object.__setattr__(self, "k2", check_momentum(self.k2))
        if not (self.rtol > 0 and self.atol >= 0):
            raise DomainError("rtol must be > 0 and atol >= 0")
        expected = PARALLEL if isinstance(self.model, ParallelModel) else SINGLET
        if not isinstance(self.model, (ParallelModel, SideDotModel)):
            raise DomainError(f"unsupported model {type(self.model).__name__}")
        if self.channel is None:
            object.__setattr__(self, "channel", expected)
        elif self.channel != expected:
            raise DomainError(f"channel {self.channel!r} does not match {type(self.model).__name__}")

    @property
    def chains(self) -> tuple[Chain, Chain]:
        if isinstance(self.model, ParallelModel):
            return self.model.branch("I"), self.model.branch("II")
        c = self.model.chain
        return c, c

    @property
    def energy(self) -> float:
        return dispersion(self.k1) + dispersion(self.k2)

    @property
    def coupling(self) -> float:
        return self.model.coupling

    @property
    def contact(self):
        c1, c2 = self.chains
        return c1.contact, c2.contact

    def incoming(self, l1, l2):
        """``phi_k(l1, l2)`` for scalar sites."""
        c1, c2 = self.chains
        return complex(c1.wavefunction(self.k1, l1) * c2.wavefunction(self.k2, l2))

    def with_model(self, model: Model) -> "TwoParticleInput":
        return TwoParticleInput(self.k1, self.k2, model, self.channel, self.band_only, self.rtol, self.atol)


@dataclass(frozen=True)
class ContactValue:
    """``psi+`` on the contact pair and the ingredients it was built from."""

    psi: complex
    K_at_contact: complex
    phi: complex
    coupling: float
    integral_meta: IntegralResult
    warnings: tuple = ()

    @property
    def denominator(self) -> complex:
        return 1.0 - self.coupling * self.K_at_contact


# ---------------------------------------------------------------------------
# site-resolved single-particle helpers

def _split_sites(sites):
    sites = list(sites)
    ints = [i for i, s in enumerate(sites) if not isinstance(s, str)]
    dots = [i for i, s in enumerate(sites) if isinstance(s, str)]
    for i in dots:
        if sites[i] != DOT:
            raise DomainError(f"unknown site label {sites[i]!r}")
    return sites, ints, dots


def green_sites(chain: Chain, z, sites: Sequence, band_only: bool = False):
    """``G_{l,c}(z)`` for every ``l`` in ``sites``; shape ``z.shape + (len(sites),)``."""
    z = np.asarray(z, dtype=complex)
    sites, ints, dots = _split_sites(sites)
    out = np.empty(z.shape + (len(sites),), dtype=complex)
    if ints:
        ls = np.array([sites[i] for i in ints])
        out[..., ints] = chain.green(z[..., None], ls)
    for i in dots:
        out[..., i] = chain.green(z, DOT)
    if band_only:
        for b in chain.bound_states():
            amp = bound_sites(chain, b, sites)
            out = out - amp * b.contact / (z[..., None] - b.energy)
    return out


def bound_sites(chain: Chain, b, sites: Sequence):
    sites, ints, dots = _split_sites(sites)
    out = np.empty(len(sites))
    if ints:
        out[ints] = chain.bound_amplitude(b, np.array([sites[i] for i in ints]))
    for i in dots:
        out[i] = b.contact
    return out


def density_sites(chain: Chain, eps, sites: Sequence):
    """Band spectral density ``-Im G_{l,c}(eps + i0)/pi`` on ``sites``."""
    return -green_sites(chain, np.asarray(eps, dtype=float), sites).imag / math.pi


def wave_sites(chain: Chain, k: float, sites: Sequence):
    sites, ints, dots = _split_sites(sites)
    out = np.empty(len(sites), dtype=complex)
    if ints:
        out[ints] = chain.wavefunction(k, np.array([sites[i] for i in ints]))
    for i in dots:
        out[i] = chain.wavefunction(k, DOT)
    return out


def breakpoints(E: float, first: Chain, second: Chain):
    """Singular and near-singular abscissae of ``rho1(eps) G2(E - eps)``."""
    pts = [E - 2.0, E + 2.0]
    h1, h2 = first.resonance_energy(), second.resonance_energy()
    if h1 is not None:
        pts.append(h1)
    if h2 is not None:
        pts.append(E - h2)
    return pts


def completeness_warnings(chains, band_only: bool):
    if not band_only:
        return ()
    out = []
    for name, ch in zip(("first", "second"), chains):
        bs = ch.bound_states()
        if bs:
            energies = ", ".join(f"{b.energy:.6g}" for b in bs)
            out.append(f"{name} chain has bound states at E = {energies}; band-only spectral sum is incomplete")
    return tuple(out)


# ---------------------------------------------------------------------------
# kernel

def kernel_grid(first: Chain, second: Chain, E, sites1: Sequence, sites2: Sequence,
                band_only: bool = False, rtol: float = 1e-10, atol: float = 1e-12) -> IntegralResult:
    """``K(l1, l2) = <l1, l2|G0+(E)|c1, c2>`` on the grid ``sites1 x sites2``.

    ``E`` may be complex with positive imaginary part, in which case the
    regularised value at finite broadening is returned.
    """
    E = complex(E)
    sites1, sites2 = list(sites1), list(sites2)

    def integrand(x):
        rho = density_sites(first, x, sites1)
        g2 = green_sites(second, E - x, sites2, band_only=True)
        return rho[:, :, None] * g2[:, None, :]

    res = band_integral(integrand, breakpoints=breakpoints(E.real, first, second), rtol=rtol, atol=atol)
    value = res.value
    if not band_only:
        b1s, b2s = first.bound_states(), second.bound_states()
        for b2 in b2s:
            chi2 = bound_sites(second, b2, sites2) * b2.contact
            g1 = green_sites(first, E - b2.energy, sites1, band_only=True)
            value = value + np.outer(g1, chi2)
        for b1 in b1s:
            chi1 = bound_sites(first, b1, sites1) * b1.contact
            g2 = green_sites(second, E - b1.energy, sites2, band_only=True)
            value = value + np.outer(chi1, g2)
        for b1 in b1s:
            for b2 in b2s:
                chi1 = bound_sites(first, b1, sites1) * b1.contact
                chi2 = bound_sites(second, b2, sites2) * b2.contact
                value = value + np.outer(chi1, chi2) / (E - b1.energy - b2.energy)
    return IntegralResult(value, res.error_estimate, warnings=completeness_warnings((first, second), band_only))


@lru_cache(maxsize=4096)
def contact_kernel(first: Chain, second: Chain, E: float, band_only: bool = False,
                   rtol: float = 1e-10, atol: float = 1e-12) -> IntegralResult:
    """Memoised ``K(c)`` at the contact pair (keyed on exact parameter values)."""
    res = kernel_grid(first, second, E, [first.contact], [second.contact], band_only, rtol, atol)
    return IntegralResult(complex(res.value[0, 0]), res.error_estimate, warnings=res.warnings)


def kernel_K(inp: TwoParticleInput, l1, l2):
    """Kernel ``K_E(l1, l2)`` at the input's total energy."""
    first, second = inp.chains
    if (l1, l2) == inp.contact:
        return contact_kernel(first, second, inp.energy, inp.band_only, inp.rtol, inp.atol).value
    res = kernel_grid(first, second, inp.energy, [l1], [l2], inp.band_only, inp.rtol, inp.atol)
    return complex(res.value[0, 0])


def psi_at_contact(inp: TwoParticleInput) -> ContactValue:
    """``psi+(c) = phi(c) / (1 - g K(c))``."""
    first, second = inp.chains
    meta = contact_kernel(first, second, inp.energy, inp.band_only, inp.rtol, inp.atol)
    K = meta.value
    g = inp.coupling
    phi = inp.incoming(*inp.contact)
    den = 1.0 - g * K
    if abs(den) < RESONANCE_FLOOR:
        raise ResonanceError(f"|1 - gK| = {abs(den):.3g} below {RESONANCE_FLOOR}")
    return ContactValue(phi / den, K, phi, g, meta, meta.warnings)


def scattering_state(inp: TwoParticleInput, l1, l2) -> complex:
    """``psi+(l1, l2) = phi(l1, l2) + g K(l1, l2) psi+(c)``."""
    g = inp.coupling
    phi = inp.incoming(l1, l2)
    if g == 0.0:
        return phi
    cv = psi_at_contact(inp)
    return phi + g * kernel_K(inp, l1, l2) * cv.psi


def scattering_state_grid(inp: TwoParticleInput, sites1: Sequence, sites2: Sequence):
    """``psi+`` on ``sites1 x sites2`` (one kernel evaluation for the grid)."""
    first, second = inp.chains
    phi = np.outer(wave_sites(first, inp.k1, sites1), wave_sites(second, inp.k2, sites2))
    g = inp.coupling
    if g == 0.0:
        return phi
    cv = psi_at_contact(inp)
    K = kernel_grid(first, second, inp.energy, sites1, sites2, inp.band_only, inp.rtol, inp.atol).value
    return phi + g * K * cv.psi


def delta_S(model: ParallelModel, E1, E2, E3, E4, band_only: bool = False) -> complex:
    """Interaction correction to the two-particle S-matrix.

    ``-2 pi i lam phi*_{E1,E2}(0) phi_{E3,E4}(0) / (1 - lam K_{E3+E4}(0))``
    with left-incident states ``k = arccos(-E/2)``.  The elastic
    ``delta(E1-E3) delta(E2-E4)`` part is not included.  Off the energy shell
    ``E1 + E2 != E3 + E4`` the value is formal.
    """
    if not isinstance(model, ParallelModel):
        raise DomainError("delta_S is defined for the parallel model")
    k1, k2, k3, k4 = (momentum_from_energy(e) for e in (E1, E2, E3, E4))
    lam = model.lam
    if lam == 0.0:
        return 0j
    I, II = model.branch("I"), model.branch("II")
    phi_out = complex(I.wavefunction(k1, 0) * II.wavefunction(k2, 0))
    phi_in = complex(I.wavefunction(k3, 0) * II.wavefunction(k4, 0))
    K = contact_kernel(I, II, float(E3) + float(E4), band_only).value
    den = 1.0 - lam * K
    if abs(den) < RESONANCE_FLOOR:
        raise ResonanceError(f"|1 - lam K| = {abs(den):.3g} below {RESONANCE_FLOOR}")
    return -2j * math.pi * lam * np.conj(phi_out) * phi_in / den
