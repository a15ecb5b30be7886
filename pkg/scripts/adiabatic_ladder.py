"""Adiabatic residual and reference error along a time-scale ladder.

H0(t) = f(t) sz with f(t) = 1 + t/T and H1 = g sx. The first-order residual
should be g/(2T); the error against the reference propagator at t = T
should fall as T grows (fixed lambda).

    python3 scripts/adiabatic_ladder.py --scales 10,20,40,80 --lam 0.05
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from evokit.adiabatic import AdiabaticProblem, assemble_adiabatic_evolutor, solve_adiabatic
from evokit.operators import I2, SX, SZ
from evokit.oracle import propagate_exact
from evokit.quadrature import PiecewiseLinear
from evokit.unperturbed import CommutingFamily


@dataclass
class Config:
    scales: list = field(default_factory=lambda: [10.0, 20.0, 40.0, 80.0])
    lam: float = 0.05
    g: float = 1.0
    order: int = 2


def ramp(T: float) -> CommutingFamily:
    return CommutingFamily(((I2 + SZ) / 2, (I2 - SZ) / 2),
                           (PiecewiseLinear(((0.0, 1.0), (T, 2.0))),
                            PiecewiseLinear(((0.0, -1.0), (T, -2.0)))))


def run(cfg: Config) -> list[dict]:
    rows = []
    for T in cfg.scales:
        prob = AdiabaticProblem(ramp(T), (cfg.g * SX,), t_max=T, order=cfg.order)
        sol = solve_adiabatic(prob)
        U = propagate_exact(prob.hamiltonian, cfg.lam, T, tol=1e-11).U
        err = float(np.linalg.norm(U - assemble_adiabatic_evolutor(sol, cfg.lam, T)))
        rows.append({"T": T, "residual_1": sol.residuals[0], "predicted": cfg.g / (2 * T),
                     "oracle_error": err, "panels": sol.grid.panels})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scales", type=lambda s: [float(x) for x in s.split(",")], default=[10.0, 20.0, 40.0, 80.0])
    p.add_argument("--lam", type=float, default=Config.lam)
    p.add_argument("--g", type=float, default=Config.g)
    p.add_argument("--order", type=int, default=Config.order)
    cfg = Config(**vars(p.parse_args(argv)))
    print(f"{'T':>6} {'residual_1':>11} {'g/(2T)':>9} {'oracle err':>11}")
    for r in run(cfg):
        print(f"{r['T']:6.0f} {r['residual_1']:11.3e} {r['predicted']:9.3e} {r['oracle_error']:11.3e}")


if __name__ == "__main__":
    main()
