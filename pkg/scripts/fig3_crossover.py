"""Cycle-averaged delta j^I against lam at gamma = 0.6, plus the time traces.

The average is expected to change from positive to negative as lam grows.
"""

from _common import run


def main():
    run("fig3_pump_interaction.yaml", "fig3_pump_interaction.csv")
    rows = run("fig3_crossover.yaml", "fig3_crossover.csv")
    for r in rows:
        print(f"lam={r['lam']:<5g} <delta j>={r['average']:+.6e}  (err {r['average_err']:.1e})")
    flips = [(a["lam"], b["lam"]) for a, b in zip(rows, rows[1:]) if a["average"] > 0 > b["average"]]
    print("sign change + to - between lam", flips[0] if flips else "none found")


if __name__ == "__main__":
    main()
