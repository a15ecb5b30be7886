"""Infinite-average constants versus the minimal static solution.

Runs the average mode on a static problem for a ladder of horizons and
reports the distance of C_n and Z_n to the static minimal solution.

    python3 scripts/average_equivalence.py --horizons 100,200,400,800 --order 3
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from evokit.dynamic import DynamicProblem, solve_dynamic
from evokit.errors import AverageNonConvergent
from evokit.operators import SX, SZ
from evokit.static import solve_static_matrices
from evokit.unperturbed import StaticH0


@dataclass
class Config:
    horizons: list = field(default_factory=lambda: [100.0, 200.0, 400.0, 800.0])
    order: int = 3


def run(cfg: Config) -> list[dict]:
    H0, H1 = 0.5 * SZ, SX
    st = solve_static_matrices(H0, [H1], order=cfg.order)
    rows = []
    for T in cfg.horizons:
        t0 = time.perf_counter()
        try:
            sol = solve_dynamic(DynamicProblem(StaticH0(H0), (H1,), t_max=T), "average", order=cfg.order)
        except AverageNonConvergent as exc:
            rows.append({"horizon": T, "status": f"tail test failed ({exc})"})
            continue
        row = {"horizon": T, "status": "ok", "seconds": time.perf_counter() - t0}
        for n in range(1, cfg.order + 1):
            row[f"dC{n}"] = float(np.linalg.norm(sol.C_const(n) - st.C[n - 1]))
            row[f"dZ{n}"] = float(np.linalg.norm(sol.Zinit[n - 1] - st.Z[n - 1]))
        rows.append(row)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizons", type=lambda s: [float(x) for x in s.split(",")],
                   default=[100.0, 200.0, 400.0, 800.0])
    p.add_argument("--order", type=int, default=Config.order)
    cfg = Config(**vars(p.parse_args(argv)))
    for r in run(cfg):
        print("  ".join(f"{k}={v:.2e}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))


if __name__ == "__main__":
    main()
