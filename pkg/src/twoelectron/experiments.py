"""Named experiments: one parameter point in, a list of table rows out.

Every experiment has a fixed column list (``columns(cfg)``): the model
parameters first, then the experiment's own columns.  Rows are plain tuples of
floats, ints and short strings.
"""

from __future__ import annotations

from .config import MODEL_PARAMS, RunConfig
from .errors import ConfigError, DomainError
from .lattice import ParallelModel, SideDotModel, check_momentum, dispersion, momentum_from_energy
from .observables import (
    closed_form_delta_j,
    covariance_expansion,
    delta_j,
    density_correlators,
    singlet_current_Js,
    singlet_current_limit,
    total_delta_j,
    triplet_current,
)
from .pumping import PumpProtocol, cycle_average_result, instantaneous_delta_j
from .scattering import TwoParticleInput, contact_kernel, delta_S, psi_at_contact

_OWN_COLUMNS = {
    "amplitudes": ("k", "E", "branch", "t_re", "t_im", "r_re", "r_im", "unitarity_defect"),
    "kernel": ("k1", "k2", "E", "K_re", "K_im", "K_err"),
    "deltaS": ("E1", "E2", "E3", "E4", "dS_re", "dS_im", "K_err"),
    "current": ("k1", "k2", "site", "conductor", "lead", "j_s", "j_c", "delta_j", "K_err"),
    "closed-form-check": ("k1", "k2", "site", "delta_j_total", "closed_form", "abs_diff", "K_err"),
    "pump": ("k1", "k2", "omega", "phi", "site", "conductor", "t", "eps_I_t", "eps_II_t", "delta_j", "K_err"),
    "pump-average": ("k1", "k2", "omega", "phi", "n_samples", "site", "conductor", "average", "average_err"),
    "singlet": ("site", "k0", "Js", "Js_limit", "triplet_current", "K_err"),
    "correlators": ("k1", "k2", "l", "m", "n_I", "n_II", "n_In_II", "covariance", "covariance_expansion", "K_err"),
    "conservation-check": ("k1", "k2", "site", "conductor", "delta_j_input", "delta_j_output", "rel_diff", "K_err"),
}


def columns(cfg: RunConfig) -> tuple:
    return MODEL_PARAMS[cfg.model] + _OWN_COLUMNS[cfg.experiment]


def _model(cfg, p):
    try:
        if cfg.model == "parallel":
            return ParallelModel(*(float(p[k]) for k in MODEL_PARAMS["parallel"]))
        return SideDotModel(*(float(p[k]) for k in MODEL_PARAMS["sidedot"]))
    except (TypeError, ValueError) as exc:
        raise DomainError(str(exc)) from exc


def _int(p, name):
    v = p[name]
    if isinstance(v, bool) or not float(v).is_integer():
        raise ConfigError(f"{name} must be an integer", {f"params.{name}": "must be an integer"})
    return int(v)


def _momenta(cfg, p, model):
    ks = []
    for name in ("k1", "k2"):
        v = p[name]
        if v == "k0":
            if not isinstance(model, SideDotModel):
                raise ConfigError("k0 needs the side-dot model", {f"params.{name}": "k0 needs model sidedot"})
            v = model.k0
        try:
            ks.append(check_momentum(float(v)))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), {f"params.{name}": str(exc)}) from exc
    return ks


def build_point(cfg: RunConfig, p: dict) -> dict:
    """Construct and domain-check the objects of one grid point."""
    model = _model(cfg, p)
    exp = cfg.experiment
    out = {"model": model}
    q = {"rtol": float(cfg.quadrature.rtol), "atol": float(cfg.quadrature.atol)}
    if exp == "amplitudes":
        try:
            out["k"] = check_momentum(float(p["k"]))
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), {"params.k": str(exc)}) from exc
    elif exp == "deltaS":
        for name in ("E1", "E2", "E3", "E4"):
            momentum_from_energy(float(p[name]))
    elif exp == "singlet":
        if model.k0 is None:
            raise ConfigError("|eps_d| must be < 2 for a filtering point", {"params.eps_d": "outside the band"})
        site = _int(p, "site")
        model.chain.check_bond(site)
        if site < 0:
            raise ConfigError("Js is evaluated in the output lead", {"params.site": "must be >= 0"})
    elif exp in ("pump", "pump-average"):
        out["protocol"] = PumpProtocol(float(p["omega"]), float(p["phi"]), _int(p, "n_samples"))
        k1, k2 = _momenta(cfg, p, model)
        out["ks"] = (k1, k2)
        if _int(p, "conductor") not in (1, 2):
            raise ConfigError("conductor must be 1 or 2", {"params.conductor": "must be 1 or 2"})
        model.branch("I").check_bond(_int(p, "site"))
    elif exp == "closed-form-check":
        if not model.is_perfect:
            raise ConfigError("closed-form-check needs perfect chains",
                              {"params": "eps_I = eps_II = 0 and gamma_I = gamma_II = 1 required"})
        k1, k2 = _momenta(cfg, p, model)
        out["inp"] = TwoParticleInput(k1, k2, model, **q)
        model.branch("I").check_bond(_int(p, "site"))
    elif exp == "conservation-check":
        k1, k2 = _momenta(cfg, p, model)
        out["inp"] = TwoParticleInput(k1, k2, model, **q)
        site = _int(p, "site")
        if site <= 0:
            raise ConfigError("site is the output-lead bond; its mirror -site is used", {"params.site": "must be > 0"})
    else:
        k1, k2 = _momenta(cfg, p, model)
        out["inp"] = TwoParticleInput(k1, k2, model, **q)
        if exp == "current":
            if _int(p, "conductor") not in (1, 2):
                raise ConfigError("conductor must be 1 or 2", {"params.conductor": "must be 1 or 2"})
            chain = out["inp"].chains[_int(p, "conductor") - 1]
            chain.check_bond(_int(p, "site"))
        if exp == "correlators":
            l, m = _int(p, "l"), _int(p, "m")
            if l <= 0 or m <= 0 or k1 <= 0 or k2 <= 0:
                raise ConfigError("correlators need l, m > 0 and k1, k2 > 0",
                                  {"params": "l, m, k1, k2 must be positive"})
    return out


def run_point(cfg: RunConfig, p: dict) -> list[tuple]:
    """Evaluate one grid point; returns rows matching :func:`columns`."""
    obj = build_point(cfg, p)
    model = obj["model"]
    head = tuple(float(p[k]) for k in MODEL_PARAMS[cfg.model])
    exp = cfg.experiment
    q = {"rtol": float(cfg.quadrature.rtol), "atol": float(cfg.quadrature.atol)}

    if exp == "amplitudes":
        k = obj["k"]
        chains = [("I", model.branch("I")), ("II", model.branch("II"))] if cfg.model == "parallel" \
            else [("d", model.chain)]
        rows = []
        for name, ch in chains:
            t, r = ch.amplitudes(k)
            rows.append(head + (k, dispersion(k), name, t.real, t.imag, r.real, r.imag,
                                abs(t) ** 2 + abs(r) ** 2 - 1.0))
        return rows

    if exp == "kernel":
        inp = obj["inp"]
        first, second = inp.chains
        res = contact_kernel(first, second, inp.energy, False, q["rtol"], q["atol"])
        return [head + (inp.k1, inp.k2, inp.energy, res.value.real, res.value.imag, res.error_estimate)]

    if exp == "deltaS":
        Es = tuple(float(p[n]) for n in ("E1", "E2", "E3", "E4"))
        dS = delta_S(model, *Es)
        err = contact_kernel(model.branch("I"), model.branch("II"), Es[2] + Es[3]).error_estimate
        return [head + Es + (dS.real, dS.imag, err)]

    if exp == "current":
        inp = obj["inp"]
        b = delta_j(inp, _int(p, "site"), _int(p, "conductor"))
        return [head + (inp.k1, inp.k2, b.site, b.conductor, b.lead, b.j_s, b.j_c, b.delta_j, _kerr(inp))]

    if exp == "closed-form-check":
        inp = obj["inp"]
        site = _int(p, "site")
        total = total_delta_j(inp, site)
        cf = closed_form_delta_j(inp.k1, inp.k2, model.lam, model)
        return [head + (inp.k1, inp.k2, site, total, cf, abs(total - cf), _kerr(inp))]

    if exp == "pump":
        proto = obj["protocol"]
        k1, k2 = obj["ks"]
        site, cond = _int(p, "site"), _int(p, "conductor")
        gammas = (model.gamma_I, model.gamma_II)
        rows = []
        for t in proto.t_grid:
            eI, eII = proto.onsite(t)
            dj = instantaneous_delta_j(proto, t, k1, k2, model.lam, gammas, cond, site)
            inp = TwoParticleInput(k1, k2, proto.frozen_model(t, model.lam, gammas), **q)
            rows.append(head + (k1, k2, proto.omega, proto.phi, site, cond, float(t), eI, eII, dj, _kerr(inp)))
        return rows

    if exp == "pump-average":
        proto = obj["protocol"]
        k1, k2 = obj["ks"]
        site, cond = _int(p, "site"), _int(p, "conductor")
        res = cycle_average_result(proto, k1, k2, model.lam, (model.gamma_I, model.gamma_II), cond, site)
        return [head + (k1, k2, proto.omega, proto.phi, proto.n_samples, site, cond, res.value, res.error_estimate)]

    if exp == "singlet":
        site = _int(p, "site")
        k0 = model.k0
        Js = singlet_current_Js(model, site)
        lim = singlet_current_limit(model, site)
        err = contact_kernel(model.chain, model.chain, 2 * dispersion(k0)).error_estimate
        return [head + (site, k0, Js, lim, triplet_current(model, k0, k0), err)]

    if exp == "correlators":
        inp = obj["inp"]
        l, m = _int(p, "l"), _int(p, "m")
        c = density_correlators(inp, l, m)
        return [head + (inp.k1, inp.k2, l, m, c.n_I, c.n_II, c.n_In_II, c.covariance,
                        covariance_expansion(inp, l, m), _kerr(inp))]

    if exp == "conservation-check":
        inp = obj["inp"]
        site = _int(p, "site")
        rows = []
        for cond in (1, 2):
            a = delta_j(inp, -site, cond).delta_j
            b = delta_j(inp, site, cond).delta_j
            rel = abs(a - b) / max(abs(a), abs(b)) if (a or b) else 0.0
            rows.append(head + (inp.k1, inp.k2, site, cond, a, b, rel, _kerr(inp)))
        return rows

    raise ConfigError(f"unknown experiment {exp!r}", {"experiment": "unknown"})


def _kerr(inp: TwoParticleInput) -> float:
    if inp.coupling == 0.0:
        return 0.0
    return float(psi_at_contact(inp).integral_meta.error_estimate)


def error_columns(cfg: RunConfig) -> tuple:
    """Columns holding quadrature error estimates (summarised in the header)."""
    return tuple(c for c in columns(cfg) if c.endswith("_err"))

