"""Command-line entry point: ``evokit <command> --config FILE [overrides]``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .adiabatic import (AdiabaticProblem, assemble_adiabatic_evolutor, intertwining_defect,
                        solve_adiabatic)
from .config import ProblemConfig, parse_config, parse_document, with_overrides
from .dynamic import (DynamicProblem, assemble_general_evolutor, effective_hamiltonian,
                      periodicity_defect, solve_dynamic, zero_average_defect)
from .errors import EvokitError, InsufficientData, SchemaError, UnitarityError
from .operators import UNIT_TOL, dagger, expm_hermitian, fro_norm, unitarity_defect
from .oracle import order_scaling_check, propagate_exact
from .report import RunReport, encode_matrix, write_results
from .static import (StaticProblem, assemble_static_evolutor, effective_eigenvalues,
                     solve_static)

COMMANDS = ("expand", "evolve", "compare", "floquet", "adiabatic")
AVERAGE_HORIZON = 800.0


def thread_count() -> int:
    """Worker cap from EVOKIT_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("EVOKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# solver dispatch


class Model:
    """A solved problem exposing truncated evolutors and the exact reference."""

    def __init__(self, cfg: ProblemConfig, mode: str, horizon: float):
        self.cfg = cfg
        self.mode = mode
        run = cfg.run
        N = run.order
        if mode == "static":
            H0 = cfg.h0.H0
            pert = tuple(p(0.0) for p in cfg.perturbation)
            self.problem = StaticProblem(H0, pert, N)
            self.solution = solve_static(self.problem)
        elif mode == "adiabatic":
            self.problem = AdiabaticProblem(cfg.h0, cfg.perturbation, horizon, N)
            self.solution = solve_adiabatic(self.problem, config=run.quad)
        elif mode == "custom":
            raise SchemaError("run.mode", "custom mode is only available through the library API")
        else:
            self.problem = DynamicProblem(cfg.h0, cfg.perturbation, horizon, run.period)
            self.solution = solve_dynamic(self.problem, mode, N, tau=run.tau, config=run.quad)

    def evolutor(self, lam: float, t: float, order: int | None = None) -> np.ndarray:
        if self.mode == "static":
            return assemble_static_evolutor(self.solution, lam, t, order)
        if self.mode == "adiabatic":
            return assemble_adiabatic_evolutor(self.solution, lam, t, order)
        return assemble_general_evolutor(self.solution, lam, t, order)

    def exact(self, lam: float, t: float) -> np.ndarray:
        if self.mode == "static":
            return expm_hermitian(self.problem.hamiltonian(lam), t)
        return propagate_exact(self.problem.hamiltonian, lam, t, self.cfg.run.oracle_tol).U


def _horizon(cfg: ProblemConfig, mode: str) -> float:
    run = cfg.run
    h = max(max(run.times), run.horizon or 0.0)
    if mode == "floquet":
        span = run.tau or run.period
        h = max(h, span * max(run.periods), span)
    if mode == "average" and run.horizon is None:
        h = max(h, AVERAGE_HORIZON)
    return max(h, 1e-3)


def _coefficients(model: Model, times) -> list:
    sol = model.solution
    out = []
    if model.mode == "static":
        for n in range(1, sol.order + 1):
            out.append({"order": n, "C": encode_matrix(sol.C[n - 1]), "Z": encode_matrix(sol.Z[n - 1])})
        return out
    if model.mode in ("floquet", "average"):
        for n in range(1, sol.order + 1):
            out.append({"order": n, "C": encode_matrix(sol.C[n - 1][0]),
                        "Z": encode_matrix(sol.Zinit[n - 1])})
        return out
    for n in range(1, sol.order + 1):
        samples = []
        for t in times:
            entry = {"t": float(t)}
            if model.mode == "adiabatic":
                entry["frakC"] = encode_matrix(sol._sample([sol.frakC[n - 1]], t)[0])
            entry["C"] = encode_matrix(sol._sample([sol.C[n - 1]], t)[0])
            Zsrc = sol.Z if model.mode == "adiabatic" else sol.Zfun
            entry["Z"] = encode_matrix(sol._sample([Zsrc[n - 1]], t)[0])
            samples.append(entry)
        out.append({"order": n, "samples": samples})
    return out


def _verdicts(rows: list, key_t: float, N: int) -> list:
    out = []
    for n in range(1, N + 1):
        errs = {r["lambda"]: r["frob_error"] for r in rows if r["order"] == n and r["t"] == key_t
                and r["lambda"] > 0}
        try:
            v = order_scaling_check(errs, n)
            out.append({"order": n, "t": key_t, "expected_slope": n + 1, "slope": v.slope,
                        "verdict": "pass" if v.passed else "fail"})
        except InsufficientData as exc:
            out.append({"order": n, "t": key_t, "expected_slope": n + 1, "slope": None,
                        "verdict": f"insufficient data ({exc})"})
    return out


def _error_rows(model: Model, lambdas, times, orders) -> list:
    def one(lam):
        rows = []
        for t in times:
            exact = model.exact(lam, t)
            for n in orders:
                rows.append({"lambda": float(lam), "t": float(t), "order": int(n),
                             "frob_error": float(fro_norm(exact - model.evolutor(lam, t, n)))})
        return rows
    return [r for rows in parallel_map(one, list(lambdas)) for r in rows]


def run(command: str, cfg: ProblemConfig) -> RunReport:
    """Execute ``command`` on a validated config and return the report."""
    if command not in COMMANDS:
        raise SchemaError("command", f"expected one of {list(COMMANDS)}")
    run_cfg = cfg.run
    mode = run_cfg.mode
    if command == "floquet":
        if mode not in ("floquet", "average"):
            mode = "floquet"
        if mode == "floquet" and run_cfg.period is None and run_cfg.tau is None:
            raise SchemaError("run.period", "floquet needs a declared period or tau")
    if command == "adiabatic":
        if mode != "adiabatic":
            raise SchemaError("run.mode", "the adiabatic command needs mode 'adiabatic' and h0 'levels'")
    timing = {}
    t0 = time.perf_counter()
    model = Model(cfg, mode, _horizon(cfg, mode))
    timing["solve_s"] = time.perf_counter() - t0
    report = RunReport(command, mode, run_cfg.order, config=cfg.document)
    times = list(run_cfg.times)
    N = run_cfg.order
    t1 = time.perf_counter()

    if command == "expand":
        report.coefficients = _coefficients(model, times)
        if mode == "static":
            report.results["effective_eigenvalues"] = [
                {"lambda": float(l), "levels": [[float(x) for x in ev]
                                                for ev in effective_eigenvalues(model.solution, l)]}
                for l in run_cfg.lambdas]
            report.results["commutant_residuals"] = model.solution.residuals["commutant"]

    elif command == "evolve":
        def one(lam):
            out = []
            for t in times:
                U = model.evolutor(lam, t)
                defect = unitarity_defect(U)
                if defect > UNIT_TOL:
                    raise UnitarityError(f"evolutor at lambda={lam}, t={t} has defect {defect:.2e}")
                out.append({"lambda": float(lam), "t": float(t), "order": N, "U": encode_matrix(U),
                            "unitarity_defect": defect})
            return out
        report.evolutors = [e for es in parallel_map(one, list(run_cfg.lambdas)) for e in es]

    elif command == "compare":
        report.errors = _error_rows(model, run_cfg.lambdas, times, range(1, N + 1))
        key_t = max(times)
        report.verdicts = _verdicts(report.errors, key_t, N)

    elif command == "floquet":
        sol = model.solution
        report.coefficients = _coefficients(model, times)
        span = sol.tau if mode == "floquet" else None
        report.results["effective_hamiltonian"] = [
            {"lambda": float(l), "h": encode_matrix(effective_hamiltonian(sol, l))}
            for l in run_cfg.lambdas]
        if mode == "floquet":
            report.results["zero_average_defect"] = zero_average_defect(sol)
            if model.problem.period:
                report.results["periodicity_defect"] = periodicity_defect(sol)
            strobe = [m * span for m in run_cfg.periods]

            def one(lam):
                h = effective_hamiltonian(sol, lam)
                rows = []
                for t in strobe:
                    U = propagate_exact(model.problem.hamiltonian, lam, t, run_cfg.oracle_tol).U
                    T = dagger(model.problem.unperturbed.propagator(t)) @ U
                    rows.append({"lambda": float(lam), "t": float(t), "order": N,
                                 "frob_error": float(fro_norm(T - expm_hermitian(h, t)))})
                return rows
            report.errors = [r for rs in parallel_map(one, list(run_cfg.lambdas)) for r in rs]
            report.verdicts = []
            for t in strobe:
                report.verdicts.extend(_verdicts(report.errors, float(t), N)[-1:])

    elif command == "adiabatic":
        sol = model.solution
        report.coefficients = _coefficients(model, times)
        report.results["residual_max"] = list(sol.residuals)
        report.results["commutant"] = sol.diagnostics["commutant"]
        grid_t = sol.grid.times
        for n, curve in enumerate(sol.residual_curves, start=1):
            for t in times:
                report.residuals.append({"order": n, "t": float(t),
                                         "residual": float(np.interp(t, grid_t, curve))})
        report.errors = _error_rows(model, run_cfg.lambdas, times, [N])
        report.results["intertwining_defect"] = [
            {"lambda": float(l), "t": float(t), "defect": intertwining_defect(sol, l, t)}
            for l in run_cfg.lambdas for t in times]

    timing["report_s"] = time.perf_counter() - t1
    report.timing = timing
    return report


# ----------------------------------------------------------------------------
# argument handling


def _lambda_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> dict:
    try:
        if ":" in text:
            t_max, pts = text.split(":", 1)
            return {"t_max": float(t_max), "points": int(pts)}
        return {"t_max": float(text), "points": 2}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected T_MAX[:POINTS], got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evokit", description="Perturbative unitary evolutors with oracle checks.")
    p.add_argument("--version", action="version", version=f"evokit {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON problem document")
    p.add_argument("--order", type=int, help="perturbative order N")
    p.add_argument("--lambda", dest="lam", type=_lambda_list, help="comma-separated lambda values")
    p.add_argument("--mode", help="static | magnus | floquet | average | custom | adiabatic")
    p.add_argument("--tau", type=float, help="averaging span for floquet mode")
    p.add_argument("--grid", type=_grid, help="report times as T_MAX[:POINTS]")
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--output", help="output directory (report.json, errors.csv, residuals.csv)")
    return p


def load(args) -> ProblemConfig:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError("--config", f"cannot read file ({exc.strerror})") from None
    base = parse_config(text)  # validates the document as written
    # --output is kept out of the document so reports do not depend on where they are written
    over = dict(order=args.order, mode=args.mode, tau=args.tau, quad_tol=args.tol, t=args.grid)
    over["lambda"] = args.lam
    if all(v is None for v in over.values()):
        return base
    return parse_document(with_overrides(base.document, **over))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args)
        report = run(args.command, cfg)
        out = args.output or cfg.run.output
        if out:
            write_results(report, out)
            print(f"evokit {args.command}: wrote {out}")
        else:
            print(json.dumps(report.to_dict(), indent=2))
    except EvokitError as exc:
        print(f"evokit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (SchemaError, ValueError)) else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
