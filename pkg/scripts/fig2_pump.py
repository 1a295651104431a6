"""delta j^I(t) over one drive period for gamma = 0.2, 0.4, 0.6 at lam = 0.8.

Prints, per gamma, the sign changes of delta j(t) in terms of eps_I(t) next
to the resonance value eps = E_k (1 - gamma^2).
"""

import itertools

from twoelectron.pumping import resonance_onsite

from _common import run


def main():
    rows = run("fig2_pump.yaml", "fig2_pump.csv")
    for gamma, grp in itertools.groupby(rows, key=lambda r: r["gamma_I"]):
        grp = list(grp)
        res = resonance_onsite(grp[0]["k1"], gamma)[0]
        flips = [0.5 * (a["eps_I_t"] + b["eps_I_t"])
                 for a, b in zip(grp, grp[1:]) if (a["delta_j"] > 0) != (b["delta_j"] > 0)]
        span = (min(r["delta_j"] for r in grp), max(r["delta_j"] for r in grp))
        print(f"gamma={gamma}: resonance eps_I={res:+.4f}; sign changes near eps_I="
              + ", ".join(f"{e:+.3f}" for e in flips) + f"; delta j in [{span[0]:.4g}, {span[1]:.4g}]")


if __name__ == "__main__":
    main()
