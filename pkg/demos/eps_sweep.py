"""How the light-cone speed and the decay margins move with eps.

One free Gaussian trajectory is computed once and reused for every eps.
Run from the repository root: ``python3 demos/eps_sweep.py``.
"""

from __future__ import annotations

import math
from pathlib import Path

from nlsdecay.cli import load_config
from nlsdecay.harness import sweep

CONFIG = Path(__file__).parent / "configs" / "free_gaussian.ini"


def main():
    config = load_config(CONFIG)
    norm0 = math.pi**0.25
    fractions = [0.2, 0.4, 0.6, 0.8, 0.9, 0.95]
    reports = sweep(config, [f * norm0 for f in fractions])
    print(f"{'eps/||u0||':>10} {'M0':>9} {'r=2':>10} {'r=4':>10} {'r=inf':>10}  verdict")
    for frac, rep in zip(fractions, reports):
        margins = []
        for name in ("decay_r2", "decay_r4", "decay_rinf"):
            check = rep.bounds.check(name)
            margins.append("skipped" if check.status == "skipped" else f"{check.min_margin:.4f}")
        verdict = "pass" if rep.passed else "fail"
        print(f"{frac:>10.2f} {rep.M0:>9.4f} " + " ".join(f"{m:>10}" for m in margins) + f"  {verdict}")
    # as eps approaches ||u0|| the cone widens until it leaves the box and the checks are skipped


if __name__ == "__main__":
    main()
