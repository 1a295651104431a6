"""Single-particle physics of the two impurity models.

Both models live on infinite tight-binding chains with unit lead hopping and
dispersion ``E_k = -2 cos k``.  Scattering states use plane-wave
normalisation (unit amplitude on the incoming wave).  ``k > 0`` labels a
state incident from the left, ``k < 0`` the spatial mirror image incident
from the right.

Besides amplitudes and wavefunctions this module provides the closed-form
retarded Green's functions ``G_{l,c}(z)`` between an arbitrary site ``l`` and
the interaction contact ``c`` of each chain, together with the bound states
that lie outside the band.  Everything two-particle is assembled from these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, NumericError

DOT = "d"
"""Site label of the side-coupled dot."""

Site = Union[int, str]

_EDGE_TOL = 1e-12


def check_momentum(k) -> float:
    """Validate a scattering momentum and return it as a float.

    Raises
    ------
    DomainError
        If ``k`` is not finite or ``|k|`` is not strictly inside ``(0, pi)``.
    """
    k = float(k)
    if not math.isfinite(k):
        raise DomainError(f"momentum must be finite, got {k!r}")
    a = abs(k)
    if a < _EDGE_TOL or a > math.pi - _EDGE_TOL:
        raise DomainError(f"|k| must lie strictly inside (0, pi); got k={k!r} (band edge)")
    return k


def dispersion(k) -> float:
    """Single-particle band energy ``-2 cos k`` of an admissible momentum."""
    return -2.0 * math.cos(check_momentum(k))


def momentum_from_energy(E) -> float:
    """Left-incident momentum ``arccos(-E/2)`` of an in-band energy."""
    E = float(E)
    if not math.isfinite(E) or abs(E) >= 2.0 - _EDGE_TOL:
        raise DomainError(f"energy {E!r} is not strictly inside the band (-2, 2)")
    return math.acos(-E / 2.0)


# ---------------------------------------------------------------------------
# free chain

def free_zeta(z):
    """Decaying root ``zeta`` of ``zeta**2 + z*zeta + 1 = 0``.

    For ``Im z > 0`` this is the root with ``|zeta| < 1``.  On the real axis
    inside the band the retarded limit ``zeta = exp(ik)`` with ``0 < k < pi``
    is returned; outside the band ``zeta`` is real with ``|zeta| < 1``.
    """
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z * z - 4.0)
    # build the large root without cancellation, then invert it
    use_minus = (np.conj(z) * s).real >= 0.0
    big = np.where(use_minus, (-z - s) / 2.0, (-z + s) / 2.0)
    small = 1.0 / big
    on_circle = np.abs(np.abs(small) - 1.0) < 1e-12
    small = np.where(on_circle & (small.imag < 0.0), np.conj(small), small)
    return small


def free_green(z, n):
    """Free-chain Green's function ``<n|(z - H)^-1|0>``."""
    zeta = free_zeta(z)
    n = np.abs(np.asarray(n))
    return zeta**n / (zeta - 1.0 / zeta)


# ---------------------------------------------------------------------------
# bound states

@dataclass(frozen=True)
class BoundState:
    """Normalisable eigenstate below or above the band.

    ``zeta`` is the real decay factor (``|zeta| < 1``), ``energy`` equals
    ``-(zeta + 1/zeta)`` and ``contact`` is the (real, positive) amplitude of
    the normalised state on the contact site.
    """

    energy: float
    zeta: float
    contact: float


def _real_unit_roots(coeffs):
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        if abs(r.imag) > 1e-10 * max(1.0, abs(r)):
            continue
        x = float(r.real)
        if 0.0 < abs(x) < 1.0 - 1e-13:
            out.append(x)
    return sorted(out, key=lambda x: -(x + 1.0 / x))


# ---------------------------------------------------------------------------
# single chains

@dataclass(frozen=True)
class ImpurityChain:
    """Chain with an impurity site 0 of energy ``eps`` and tunnelling ``gamma``.

    The bonds ``(-1, 0)`` and ``(0, 1)`` carry hopping ``gamma``; every other
    bond carries unit hopping.  The contact is site 0.
    """

    eps: float
    gamma: float

    contact = 0

    def __post_init__(self):
        for name in ("eps", "gamma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.gamma <= 0.0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")

    # -- scattering states -------------------------------------------------
    def amplitudes(self, k):
        """Transmission and reflection amplitudes ``(t, r)`` at ``|k|``."""
        k = abs(check_momentum(k))
        g2 = self.gamma**2
        den = 2.0 * g2 * np.exp(1j * k) - self.eps - 2.0 * math.cos(k)
        if den == 0:
            raise NumericError("transmission denominator vanished")
        t = 2j * g2 * math.sin(k) / den
        return complex(t), complex(t - 1.0)

    def wavefunction(self, k, l):
        """Scattering state ``phi_k(l)``; ``l`` may be an integer array."""
        k = check_momentum(k)
        l = np.asarray(l)
        if k < 0:
            l = -l
            k = -k
        t, r = self.amplitudes(k)
        lf = l.astype(float)
        left = np.exp(1j * k * lf) + r * np.exp(-1j * k * lf)
        right = t * np.exp(1j * k * lf)
        out = np.where(l <= -1, left, np.where(l >= 1, right, t / self.gamma))
        return out[()] if out.ndim == 0 else out

    # -- Green's functions -------------------------------------------------
    def green(self, z, l):
        """Retarded ``G_{l,0}(z)``; broadcasts over ``z`` and integer ``l``."""
        zeta = free_zeta(z)
        g00 = 1.0 / (np.asarray(z, dtype=complex) - self.eps + 2.0 * self.gamma**2 * zeta)
        l = np.abs(np.asarray(l))
        return np.where(l == 0, g00, self.gamma * zeta**l * g00)

    def bound_states(self):
        """Bound states of the isolated chain (energies outside ``[-2, 2]``)."""
        g2 = self.gamma**2
        out = []
        for x in _real_unit_roots([2.0 * g2 - 1.0, -self.eps, -1.0]):
            w = 1.0 / (1.0 + 2.0 * g2 * x * x / (1.0 - x * x))
            out.append(BoundState(energy=-(x + 1.0 / x), zeta=x, contact=math.sqrt(w)))
        return tuple(out)

    def bound_amplitude(self, b: BoundState, l):
        """Normalised bound-state amplitude at integer site(s) ``l``."""
        l = np.abs(np.asarray(l))
        return np.where(l == 0, b.contact, self.gamma * b.zeta ** l * b.contact)

    def resonance_energy(self):
        """Energy of maximal transmission, or ``None`` if outside the band."""
        if self.gamma >= 1.0:
            return None
        e = self.eps / (1.0 - self.gamma**2)
        return e if abs(e) < 2.0 else None

    def check_bond(self, l: int) -> int:
        """Validate that bond ``(l, l+1)`` carries unit hopping."""
        if not isinstance(l, (int, np.integer)):
            raise DomainError(f"bond index must be an integer, got {l!r}")
        if l in (-1, 0):
            raise DomainError("bonds (-1,0) and (0,1) touch the dot; pick l <= -2 or l >= 1")
        return int(l)


@dataclass(frozen=True)
class SideDot:
    """Perfect chain with a dot of energy ``eps_d`` side-coupled to site 0.

    The contact is the dot, labelled :data:`DOT`.
    """

    eps_d: float
    gamma: float

    contact = DOT

    def __post_init__(self):
        for name in ("eps_d", "gamma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.gamma <= 0.0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")

    @property
    def k0(self):
        """Momentum of the transmission zero, ``E_k0 = eps_d`` (``None`` off band)."""
        return math.acos(-self.eps_d / 2.0) if abs(self.eps_d) < 2.0 else None

    def _detuning(self, k):
        # 2cos k + eps_d, written as a product so that it is exactly 0 at k0
        k0 = self.k0
        if k0 is None:
            return 2.0 * math.cos(k) + self.eps_d
        return -4.0 * math.sin(0.5 * (k + k0)) * math.sin(0.5 * (k - k0))

    def _den(self, k):
        return 2j * self._detuning(k) * math.sin(k) + self.gamma**2

    def amplitudes(self, k):
        """``t = 2i(2cos k + eps_d) sin k / (2i(2cos k + eps_d) sin k + gamma^2)``."""
        k = abs(check_momentum(k))
        t = 2j * self._detuning(k) * math.sin(k) / self._den(k)
        return complex(t), complex(t - 1.0)

    def dot_amplitude(self, k) -> complex:
        """Dot-site value of ``phi_k``, in the form finite at ``E_k = eps_d``."""
        k = abs(check_momentum(k))
        return complex(2j * self.gamma * math.sin(k) / self._den(k))

    def wavefunction(self, k, l):
        """Scattering state ``phi_k(l)``; ``l`` is :data:`DOT` or wire site(s)."""
        k = check_momentum(k)
        if isinstance(l, str):
            if l != DOT:
                raise DomainError(f"unknown site label {l!r}")
            return self.dot_amplitude(k)
        l = np.asarray(l)
        if k < 0:
            l = -l
            k = -k
        t, r = self.amplitudes(k)
        lf = l.astype(float)
        left = np.exp(1j * k * lf) + r * np.exp(-1j * k * lf)
        out = np.where(l <= 0, left, t * np.exp(1j * k * lf))
        return out[()] if out.ndim == 0 else out

    def green(self, z, l):
        """Retarded ``G_{l,d}(z)`` for ``l`` = :data:`DOT` or wire site(s)."""
        z = np.asarray(z, dtype=complex)
        g00 = free_green(z, 0)
        gdd = 1.0 / (z - self.eps_d - self.gamma**2 * g00)
        if isinstance(l, str):
            return gdd
        return -self.gamma * free_green(z, l) * gdd

    def bound_states(self):
        e, g2 = self.eps_d, self.gamma**2
        out = []
        for x in _real_unit_roots([1.0, e, g2, -e, -1.0]):
            q = 1.0 - x * x
            w = 1.0 / (1.0 + g2 * (1.0 + x * x) * x * x / q**3)
            out.append(BoundState(energy=-(x + 1.0 / x), zeta=x, contact=math.sqrt(w)))
        return tuple(out)

    bound_states.__doc__ = ImpurityChain.bound_states.__doc__

    def bound_amplitude(self, b: BoundState, l):
        if isinstance(l, str):
            return np.asarray(b.contact)
        g = free_green(b.energy, l).real
        return -self.gamma * g * b.contact

    def resonance_energy(self):
        return self.eps_d if abs(self.eps_d) < 2.0 else None

    def check_bond(self, l: int) -> int:
        if not isinstance(l, (int, np.integer)):
            raise DomainError(f"bond index must be an integer wire site, got {l!r}")
        return int(l)


Chain = Union[ImpurityChain, SideDot]


def green_band(chain: Chain, z, l):
    """``G_{l,c}(z)`` with the bound-state poles subtracted."""
    g = chain.green(z, l)
    z = np.asarray(z, dtype=complex)
    for b in chain.bound_states():
        g = g - chain.bound_amplitude(b, l) * b.contact / (z - b.energy)
    return g


def spectral_density(chain: Chain, eps, l):
    """Band spectral density ``-Im G_{l,c}(eps + i0) / pi`` for ``|eps| < 2``."""
    return -chain.green(np.asarray(eps, dtype=float), l).imag / math.pi


# ---------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class ParallelModel:
    """Two parallel conductors whose dot sites interact capacitively.

    Attributes
    ----------
    eps_I, eps_II : float
        On-site energies of the two dots (hopping units).
    gamma_I, gamma_II : float
        Dot-lead tunnelling, strictly positive.
    lam : float
        Inter-dot interaction strength ``lambda >= 0``.
    """

    eps_I: float = 0.0
    eps_II: float = 0.0
    gamma_I: float = 1.0
    gamma_II: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        for name in ("eps_I", "eps_II", "gamma_I", "gamma_II", "lam"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.gamma_I <= 0 or self.gamma_II <= 0:
            raise DomainError("gamma_I and gamma_II must be > 0 (zero tunnelling disconnects a conductor)")
        if self.lam < 0:
            raise DomainError(f"lam must be >= 0, got {self.lam!r}")

    def branch(self, which: str) -> ImpurityChain:
        if which == "I":
            return ImpurityChain(self.eps_I, self.gamma_I)
        if which == "II":
            return ImpurityChain(self.eps_II, self.gamma_II)
        raise DomainError(f"branch must be 'I' or 'II', got {which!r}")

    @property
    def coupling(self) -> float:
        return self.lam

    @property
    def is_perfect(self) -> bool:
        return self.eps_I == 0 and self.eps_II == 0 and self.gamma_I == 1 and self.gamma_II == 1


@dataclass(frozen=True)
class SideDotModel:
    """Interacting dot (energy ``eps_d``, repulsion ``U``) side-coupled to a wire."""

    eps_d: float = 0.0
    gamma: float = 0.3
    U: float = 0.0

    def __post_init__(self):
        for name in ("eps_d", "gamma", "U"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma!r}")
        if self.U < 0:
            raise DomainError(f"U must be >= 0, got {self.U!r}")

    @property
    def chain(self) -> SideDot:
        return SideDot(self.eps_d, self.gamma)

    @property
    def coupling(self) -> float:
        return self.U

    @property
    def k0(self) -> float:
        """Filtering momentum ``arccos(-eps_d / 2)`` where ``t`` vanishes."""
        return momentum_from_energy(self.eps_d)


# ---------------------------------------------------------------------------
# functional surface

def parallel_amplitudes(model: ParallelModel, branch: str, k):
    """``(t, r)`` of conductor ``branch`` at momentum ``k``."""
    return model.branch(branch).amplitudes(k)


def sidedot_amplitudes(model: SideDotModel, k):
    return model.chain.amplitudes(k)


def parallel_wavefunction(model: ParallelModel, branch: str, k, l):
    return model.branch(branch).wavefunction(k, l)


def sidedot_wavefunction(model: SideDotModel, k, l):
    return model.chain.wavefunction(k, l)


def bound_state_scan(model, branch: str | None = None):
    """Energies of bound states of the noninteracting single-particle chain.

    An empty list means the band states alone form a complete basis.
    """
    if isinstance(model, ParallelModel):
        chain = model.branch(branch or "I")
    elif isinstance(model, SideDotModel):
        chain = model.chain
    else:
        chain = model
    return [b.energy for b in chain.bound_states()]
