"""Regularised Brillouin-zone integration.

Two families of evaluators live here.

* ``bz_integrate_1d`` / ``bz_integrate_2d`` evaluate
  ``int dq/2pi f(q) / (E + 2cos q + i eta)`` (and its two-momentum analogue)
  with the periodic trapezoid rule on a geometric ladder of ``eta`` values and
  extrapolate ``eta -> 0+`` (Richardson / Neville).  ``principal_value_split``
  computes the same limit through a Sokhotski-Plemelj split and serves as an
  independent check.

* ``band_integral`` integrates a function over a real energy interval with
  integrable square-root singularities at known break points.  It is the
  outer integral of the nested kernel evaluation, where the pole-carrying
  inner momentum integral has already been done in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError

TWO_PI = 2.0 * math.pi


@dataclass
class IntegralResult:
    """Value of a regularised integral with its error estimate.

    ``eta_trace`` lists the ``(eta, value)`` pairs used for extrapolation in
    strictly decreasing ``eta``; it is empty for evaluators that work at
    ``eta = 0`` directly.
    """

    value: complex
    error_estimate: float
    eta_trace: list = field(default_factory=list)
    warnings: tuple = ()

    def __post_init__(self):
        etas = [e for e, _ in self.eta_trace]
        if any(b >= a for a, b in zip(etas, etas[1:])):
            raise ValueError("eta_trace must be strictly decreasing in eta")
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


def _default_etas():
    return tuple(0.1 / 2**j for j in range(8))


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings of the eta-extrapolated evaluators.

    ``eta_sequence`` must be positive and strictly decreasing.  The trapezoid
    grid starts at ``panel_count`` nodes (at least as fine as the smallest
    eta requires) and doubles until two successive refinements agree to
    ``tolerance / 4``.
    """

    eta_sequence: tuple = field(default_factory=_default_etas)
    panel_count: int = 64
    extrapolation: str = "richardson"
    tolerance: float = 1e-6
    max_nodes: int = 2**22

    def __post_init__(self):
        etas = tuple(float(e) for e in self.eta_sequence)
        object.__setattr__(self, "eta_sequence", etas)
        if not etas or any(e <= 0 or not math.isfinite(e) for e in etas):
            raise DomainError("eta_sequence must contain positive finite values")
        if any(b >= a for a, b in zip(etas, etas[1:])):
            raise DomainError("eta_sequence must be strictly decreasing")
        if int(self.panel_count) < 64:
            raise DomainError("panel_count must be >= 64")
        if self.extrapolation not in ("richardson", "none"):
            raise DomainError("extrapolation must be 'richardson' or 'none'")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")


DEFAULT_2D = QuadratureConfig(eta_sequence=tuple(0.2 / 2**j for j in range(5)), tolerance=1e-5)


# ---------------------------------------------------------------------------
# eta -> 0 extrapolation

def richardson(etas: Sequence[float], values: Sequence[complex]):
    """Polynomial (Neville) extrapolation of ``values(eta)`` to ``eta = 0``.

    Returns ``(estimate, error)`` where ``error`` is the larger of the last
    two corrections on the tableau diagonal.
    """
    x = np.asarray(etas, dtype=float)
    n = len(x)
    T = [np.asarray(values, dtype=complex)]
    diag = [T[0][-1]]
    for m in range(1, n):
        prev = T[-1]
        cur = np.empty(n - m, dtype=complex)
        for i in range(n - m):
            # tableau entry built on nodes i .. i+m
            cur[i] = prev[i + 1] + (prev[i + 1] - prev[i]) * x[i + m] / (x[i] - x[i + m])
        T.append(cur)
        diag.append(cur[-1])
    best = diag[-1]
    if n == 1:
        return best, 0.0
    err = abs(diag[-1] - diag[-2])
    if n >= 3:
        err = max(err, abs(diag[-2] - diag[-3]))
    return complex(best), float(err)


def _extrapolate(trace, cfg: QuadratureConfig, quad_err: float):
    etas = [e for e, _ in trace]
    vals = [v for _, v in trace]
    if cfg.extrapolation == "none" or len(trace) == 1:
        spread = abs(vals[-1] - vals[-2]) if len(vals) > 1 else 0.0
        return complex(vals[-1]), spread + quad_err
    best, err = richardson(etas, vals)
    return best, err + quad_err


# ---------------------------------------------------------------------------
# periodic trapezoid

def _trapezoid_periodic(g: Callable, n0: int, tol: float, max_nodes: int):
    """Mean of periodic ``g`` over ``[-pi, pi)`` with nested grid doubling."""
    n = n0
    q = -math.pi + TWO_PI * np.arange(n) / n
    total = np.sum(g(q))
    est = total / n
    while True:
        if 2 * n > max_nodes:
            raise ConvergenceError(f"trapezoid did not converge with {n} nodes", [(n, est)])
        mid = -math.pi + TWO_PI * (np.arange(n) + 0.5) / n
        total = total + np.sum(g(mid))
        n *= 2
        new = total / n
        if abs(new - est) < tol:
            return complex(new), float(abs(new - est))
        est = new


def _start_nodes(cfg: QuadratureConfig, eta: float) -> int:
    need = 8.0 / eta
    n = int(cfg.panel_count)
    while n < need:
        n *= 2
    return n


def bz_integrate_1d(f: Callable, E: float, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """``lim_{eta->0+} int_{-pi}^{pi} dq/2pi f(q) / (E + 2cos q + i eta)``.

    ``f`` must accept a numpy array of momenta.  Raises
    :class:`ConvergenceError` if the extrapolated error exceeds
    ``cfg.tolerance``.
    """
    cfg = cfg or QuadratureConfig()
    E = float(E)
    trace = []
    qerr = 0.0
    for eta in cfg.eta_sequence:
        g = lambda q, eta=eta: f(q) / (E + 2.0 * np.cos(q) + 1j * eta)
        v, e = _trapezoid_periodic(g, _start_nodes(cfg, eta), cfg.tolerance * 1e-3, cfg.max_nodes)
        trace.append((eta, v))
        qerr = max(qerr, e)
    value, err = _extrapolate(trace, cfg, qerr)
    if err > cfg.tolerance:
        raise ConvergenceError(f"eta extrapolation spread {err:.3g} exceeds tolerance", trace)
    return IntegralResult(value, err, trace)


def _trapezoid_2d(g: Callable, n0: int, tol: float, max_nodes: int, chunk: int = 2**22):
    def grid_sum(n, o1, o2):
        q1 = -math.pi + TWO_PI * (np.arange(n) + o1) / n
        q2 = -math.pi + TWO_PI * (np.arange(n) + o2) / n
        rows = max(1, chunk // n)
        acc = 0.0 + 0.0j
        for s in range(0, n, rows):
            Q1, Q2 = np.meshgrid(q1[s:s + rows], q2, indexing="ij")
            acc += np.sum(g(Q1, Q2))
        return acc

    n = n0
    total = grid_sum(n, 0.0, 0.0)
    est = total / (n * n)
    while True:
        if 2 * n > max_nodes:
            raise ConvergenceError(f"2D trapezoid did not converge with {n}^2 nodes", [(n, est)])
        # the doubled grid contains the old one; add the three half-shifted sub-grids
        total = total + grid_sum(n, 0.5, 0.0) + grid_sum(n, 0.0, 0.5) + grid_sum(n, 0.5, 0.5)
        n *= 2
        new = total / (n * n)
        if abs(new - est) < tol:
            return complex(new), float(abs(new - est))
        est = new


def bz_integrate_2d(f: Callable, E: float, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """``lim_{eta->0+} iint dq1 dq2/(2pi)^2 f / (E + 2cos q1 + 2cos q2 + i eta)``.

    Uses a tensor periodic trapezoid grid per ``eta``; the default ladder is
    shorter than in 1D because the cost grows like ``1/eta^2``.
    """
    cfg = cfg or DEFAULT_2D
    E = float(E)
    trace = []
    qerr = 0.0
    for eta in cfg.eta_sequence:
        g = lambda a, b, eta=eta: f(a, b) / (E + 2.0 * np.cos(a) + 2.0 * np.cos(b) + 1j * eta)
        v, e = _trapezoid_2d(g, _start_nodes(cfg, eta), cfg.tolerance * 1e-2, min(cfg.max_nodes, 2**15))
        trace.append((eta, v))
        qerr = max(qerr, e)
    value, err = _extrapolate(trace, cfg, qerr)
    if err > cfg.tolerance:
        raise ConvergenceError(f"eta extrapolation spread {err:.3g} exceeds tolerance", trace)
    return IntegralResult(value, err, trace)


def principal_value_split(f: Callable, E: float, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """Same limit as :func:`bz_integrate_1d`, via principal value plus delta term.

    For ``|E| < 2`` the on-shell momenta are ``+-k`` with ``E = -2cos k``.
    The subtraction ``c(q) = a + b sin q`` matches ``f`` at both of them and
    has vanishing principal value, so ``(f - c)/(E + 2cos q)`` is regular and
    the trapezoid rule converges spectrally.  The delta-shell term is
    ``-i (f(k) + f(-k)) / (4 sin k)``.
    """
    cfg = cfg or QuadratureConfig()
    E = float(E)
    tol = cfg.tolerance * 1e-3
    if abs(E) >= 2.0:
        if abs(E) == 2.0:
            raise DomainError("principal value split undefined at a band edge")
        v, e = _trapezoid_periodic(lambda q: f(q) / (E + 2.0 * np.cos(q)), cfg.panel_count, tol, cfg.max_nodes)
        return IntegralResult(v, e)

    k = math.acos(-E / 2.0)
    fp, fm = complex(f(np.array([k]))[0]), complex(f(np.array([-k]))[0])
    a = 0.5 * (fp + fm)
    b = (fp - fm) / (2.0 * math.sin(k))

    def regular(q):
        d = E + 2.0 * np.cos(q)
        return (f(q) - a - b * np.sin(q)) / d

    # a node landing on +-k gives 0/0; shift the grid by half a spacing and retry
    for offset in (0.0, 0.5, 0.25):
        try:
            with np.errstate(divide="raise", invalid="raise"):
                v, e = _trapezoid_shifted(regular, cfg.panel_count, tol, cfg.max_nodes, offset, k)
            break
        except FloatingPointError:
            continue
    else:
        raise ConvergenceError("on-shell momentum coincides with quadrature nodes")
    delta = -1j * (fp + fm) / (4.0 * math.sin(k))
    return IntegralResult(v + delta, e)


def _trapezoid_shifted(g, n0, tol, max_nodes, offset, k):
    n = n0
    prev = None
    while True:
        q = -math.pi + TWO_PI * (np.arange(n) + offset) / n
        if np.min(np.abs(np.abs(q) - k)) < 1e-13:
            raise FloatingPointError
        val = complex(np.mean(g(q)))
        if prev is not None and abs(val - prev) < tol:
            return val, abs(val - prev)
        if 2 * n > max_nodes:
            raise ConvergenceError("principal-value trapezoid did not converge", [(n, val)])
        prev = val
        n *= 2


# ---------------------------------------------------------------------------
# real-axis spectral integrals

@lru_cache(maxsize=None)
def _gauss_cosine(n: int):
    """Gauss-Legendre rule on [0, 1] composed with ``u -> (1 - cos(pi u))/2``.

    The map clusters nodes quadratically at both ends, which turns inverse
    square-root endpoint singularities into smooth integrands.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    theta = 0.5 * math.pi * (x + 1.0)
    s = 0.5 * (1.0 - np.cos(theta))
    ds = 0.25 * math.pi * np.sin(theta) * w
    return s, ds


def band_integral(
    f: Callable,
    lo: float = -2.0,
    hi: float = 2.0,
    breakpoints: Sequence[float] = (),
    rtol: float = 1e-10,
    atol: float = 1e-12,
    n_start: int = 32,
    n_max: int = 8192,
) -> IntegralResult:
    """``int_lo^hi f(x) dx`` for ``f`` with algebraic singularities at break points.

    The interval is split at every break point, each piece is integrated with
    a cosine-mapped Gauss-Legendre rule, and the node count doubles until two
    successive estimates agree.  ``f`` receives a 1D array of abscissae and
    may return an array whose leading axis runs over them; the result then
    keeps the trailing shape.
    """
    pts = [lo, hi] + [float(b) for b in breakpoints if lo < b < hi]
    pts = sorted(pts)
    cuts = [pts[0]]
    for p in pts[1:]:
        if p - cuts[-1] > 1e-12 * max(1.0, abs(p)):
            cuts.append(p)
    if len(cuts) == 1:
        cuts.append(hi)
    total = 0.0
    err = 0.0
    for a, b in zip(cuts, cuts[1:]):
        n = n_start
        prev = None
        while True:
            s, ds = _gauss_cosine(n)
            x = a + (b - a) * s
            vals = np.asarray(f(x))
            cur = np.tensordot((b - a) * ds, vals, axes=(0, 0))
            if prev is not None:
                diff = float(np.max(np.abs(cur - prev)))
                if diff <= atol + rtol * float(np.max(np.abs(cur))):
                    break
            if n >= n_max:
                raise ConvergenceError(
                    f"band integral on [{a:.6g}, {b:.6g}] not converged at {n} nodes",
                    [(n, prev), (n, cur)],
                )
            prev = cur
            n *= 2
        total = total + cur
        err += diff
    return IntegralResult(total, err)
