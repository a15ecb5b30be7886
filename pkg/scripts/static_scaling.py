"""Order-scaling study for the time-independent expansion.

For random Hermitian problems of a given dimension, measures
|U_exact - U_[N]|_F over a lambda ladder for each truncation order and fits
the log-log slope (expected N + 1).

    python3 scripts/static_scaling.py --dim 4 --samples 5 --out results/static.csv
"""
from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from evokit.operators import random_hermitian
from evokit.oracle import order_scaling_check
from evokit.static import assemble_static_evolutor, exact_static_evolutor, solve_static_matrices


@dataclass
class Config:
    dim: int = 4
    samples: int = 5
    max_order: int = 4
    t: float = 1.5
    lambdas: list = field(default_factory=lambda: [0.08, 0.04, 0.02, 0.01])
    seed: int = 0
    out: str | None = None


def random_problem(rng, dim):
    H0 = np.diag(np.arange(dim) + rng.uniform(0, 0.4, dim))
    return H0, random_hermitian(rng, dim, 0.5), random_hermitian(rng, dim, 0.5)


def run(cfg: Config) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for s in range(cfg.samples):
        H0, H1, H2 = random_problem(rng, cfg.dim)
        sol = solve_static_matrices(H0, [H1, H2], order=cfg.max_order)
        for N in range(1, cfg.max_order + 1):
            errs = {l: float(np.linalg.norm(exact_static_evolutor(sol.problem, l, cfg.t)
                                            - assemble_static_evolutor(sol, l, cfg.t, N)))
                    for l in cfg.lambdas}
            v = order_scaling_check(errs, N)
            rows.append({"sample": s, "order": N, "slope": v.slope, "expected": N + 1,
                         "verdict": "pass" if v.passed else "fail",
                         "err_max_lambda": errs[max(cfg.lambdas)]})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(Config()).items():
        if isinstance(default, list):
            p.add_argument(f"--{name}", type=lambda x: [float(v) for v in x.split(",")], default=default)
        else:
            p.add_argument(f"--{name}", type=type(default) if default is not None else str, default=default)
    cfg = Config(**vars(p.parse_args(argv)))
    rows = run(cfg)
    print(f"{'sample':>6} {'N':>2} {'slope':>7} {'expect':>6}  verdict")
    for r in rows:
        print(f"{r['sample']:>6} {r['order']:>2} {r['slope']:7.3f} {r['expected']:>6}  {r['verdict']}")
    if cfg.out:
        write_csv(cfg.out, rows)


def write_csv(path, rows):
    import os
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
