"""Declarative problem documents (JSON) and their validation.

Document layout::

    {
      "schema_version": 1,
      "dimension": 2,
      "h0": {"pauli": {"z": 0.5}},                 # or "matrix", "spin", "levels"
      "perturbation": [                           # order 1, 2, ...
        [{"pauli": {"x": 1.0}, "waveform": {"type": "constant", "value": 1.0}}]
      ],
      "run": {"mode": "static", "order": 2, "lambda": [0.2, 0.1, 0.05],
              "t": {"t_max": 1.0, "points": 5}}
    }

Matrices are lists of rows whose entries are real numbers or ``[re, im]``
pairs. Every problem is reported with the path of the offending field.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import HermiticityError, PeriodMismatch, SchemaError
from .operators import HERM_TOL, SX, SY, SZ, hermitian, spin_operators
from .quadrature import Constant, DrivenOperator, QuadratureConfig, Waveform, waveform_from_dict
from .series import MAX_ORDER
from .unperturbed import CommutingFamily, StaticH0

SCHEMA_VERSION = 1
RUN_MODES = ("static", "magnus", "floquet", "average", "custom", "adiabatic")


@dataclass(frozen=True)
class RunConfig:
    mode: str
    order: int = 2
    lambdas: tuple = (0.1,)
    times: tuple = (1.0,)
    tau: float | None = None
    period: float | None = None
    horizon: float | None = None
    periods: tuple = (1, 2, 4)
    oracle_tol: float = 1e-10
    herm_tol: float = HERM_TOL
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    output: str | None = None
    seed: int = 0


@dataclass(frozen=True, eq=False)
class ProblemConfig:
    dimension: int
    h0: StaticH0 | CommutingFamily
    perturbation: tuple  # DrivenOperator per order
    run: RunConfig
    document: dict

    @property
    def is_static(self) -> bool:
        return isinstance(self.h0, StaticH0) and all(p.is_static for p in self.perturbation)

    @property
    def mode(self) -> str:
        return self.run.mode

    @property
    def order(self) -> int:
        return self.run.order


# ----------------------------------------------------------------------------
# field readers


def _require(doc: dict, key: str, path: str):
    if not isinstance(doc, dict):
        raise SchemaError(path or "<root>", "expected an object")
    if key not in doc:
        raise SchemaError(f"{path}.{key}" if path else key, "required field is missing")
    return doc[key]


def _number(x, path: str, positive: bool = False, integer: bool = False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(path, "expected a number")
    if not math.isfinite(x):
        raise SchemaError(path, "expected a finite number")
    if integer and int(x) != x:
        raise SchemaError(path, "expected an integer")
    if positive and x <= 0:
        raise SchemaError(path, "expected a positive number")
    return int(x) if integer else float(x)


def parse_complex(x, path: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(_number(x, path))
    if isinstance(x, list) and len(x) == 2:
        return complex(_number(x[0], f"{path}[0]"), _number(x[1], f"{path}[1]"))
    raise SchemaError(path, "expected a number or an [re, im] pair")


def parse_matrix(rows, dim: int, path: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != dim:
        raise SchemaError(path, f"expected a list of {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise SchemaError(f"{path}[{i}]", f"expected a row of {dim} entries")
        for j, x in enumerate(row):
            out[i, j] = parse_complex(x, f"{path}[{i}][{j}]")
    return out


def _coefficient_operator(spec: dict, dim: int, path: str) -> np.ndarray:
    """An operator given as "matrix", "pauli" or "spin" coefficients."""
    keys = [k for k in ("matrix", "pauli", "spin") if k in spec]
    if len(keys) != 1:
        raise SchemaError(path, "expected exactly one of 'matrix', 'pauli', 'spin'")
    key = keys[0]
    if key == "matrix":
        return parse_matrix(spec["matrix"], dim, f"{path}.matrix")
    coeffs = spec[key]
    if not isinstance(coeffs, dict):
        raise SchemaError(f"{path}.{key}", "expected an object of coefficients")
    if key == "pauli":
        if dim != 2:
            raise SchemaError(f"{path}.pauli", "Pauli coefficients need dimension 2")
        basis = {"i": np.eye(2), "x": SX, "y": SY, "z": SZ}
    else:
        sx, sy, sz = spin_operators(dim)
        basis = {"i": np.eye(dim), "x": sx, "y": sy, "z": sz}
    out = np.zeros((dim, dim), dtype=complex)
    for name, value in coeffs.items():
        if name not in basis:
            raise SchemaError(f"{path}.{key}.{name}", f"unknown component; expected one of {sorted(basis)}")
        out = out + _number(value, f"{path}.{key}.{name}") * basis[name]
    return out


def _hermitian_at(M: np.ndarray, path: str, tol: float) -> np.ndarray:
    try:
        return hermitian(M, tol=tol)
    except HermiticityError as exc:
        raise HermiticityError(f"{path}: {exc}", matrix=M) from None


def _waveform(spec, path: str) -> Waveform:
    if not isinstance(spec, dict) or "type" not in spec:
        raise SchemaError(path, "expected a waveform object with a 'type'")
    try:
        return waveform_from_dict(spec)
    except KeyError:
        raise SchemaError(f"{path}.type", "unknown waveform type") from None
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"invalid waveform parameters ({exc})") from None


def _parse_h0(spec, dim: int, tol: float):
    path = "h0"
    if not isinstance(spec, dict):
        raise SchemaError(path, "expected an object")
    if "levels" in spec:
        levels = spec["levels"]
        if not isinstance(levels, list) or len(levels) < 1:
            raise SchemaError(f"{path}.levels", "expected a non-empty list")
        projectors, energies = [], []
        for k, lev in enumerate(levels):
            p = f"{path}.levels[{k}]"
            P = _hermitian_at(parse_matrix(_require(lev, "projector", p), dim, f"{p}.projector"),
                              f"{p}.projector", tol)
            projectors.append(P)
            energies.append(_waveform(_require(lev, "energy", p), f"{p}.energy"))
        try:
            fam = CommutingFamily(tuple(projectors), tuple(energies))
            fam.S0  # validates resolution of identity and idempotence
        except ValueError as exc:
            raise SchemaError(f"{path}.levels", str(exc)) from None
        return fam
    return StaticH0(_hermitian_at(_coefficient_operator(spec, dim, path), path, tol))


def _parse_perturbation(spec, dim: int, tol: float) -> tuple:
    if not isinstance(spec, list):
        raise SchemaError("perturbation", "expected a list (one entry per order)")
    out = []
    for n, terms in enumerate(spec):
        p = f"perturbation[{n}]"
        if not isinstance(terms, list) or not terms:
            raise SchemaError(p, "expected a non-empty list of {matrix, waveform} terms")
        parsed = []
        for k, term in enumerate(terms):
            q = f"{p}[{k}]"
            if not isinstance(term, dict):
                raise SchemaError(q, "expected an object")
            M = _hermitian_at(_coefficient_operator(term, dim, q), q, tol)
            w = _waveform(term["waveform"], f"{q}.waveform") if "waveform" in term else Constant(1.0)
            parsed.append((M, w))
        out.append(DrivenOperator(tuple(parsed)))
    return tuple(out)


def _parse_times(spec, path: str) -> tuple:
    if isinstance(spec, list):
        if not spec:
            raise SchemaError(path, "expected at least one time")
        ts = tuple(_number(x, f"{path}[{i}]") for i, x in enumerate(spec))
        if any(t < 0 for t in ts):
            raise SchemaError(path, "times must be non-negative")
        return ts
    if isinstance(spec, dict):
        t_max = _number(_require(spec, "t_max", path), f"{path}.t_max", positive=True)
        pts = _number(spec.get("points", 2), f"{path}.points", positive=True, integer=True)
        if pts < 1:
            raise SchemaError(f"{path}.points", "expected at least 1 point")
        if pts == 1:
            return (t_max,)
        return tuple(float(x) for x in np.linspace(0.0, t_max, pts))
    return (_number(spec, path, positive=True),)


def _parse_run(spec, static: bool, declared_period) -> RunConfig:
    path = "run"
    if spec is None:
        spec = {}
    if not isinstance(spec, dict):
        raise SchemaError(path, "expected an object")
    period = spec.get("period", declared_period)
    if period is not None:
        period = _number(period, f"{path}.period", positive=True)
    default = "static" if static else ("floquet" if period else "magnus")
    mode = spec.get("mode", default)
    if mode not in RUN_MODES:
        raise SchemaError(f"{path}.mode", f"expected one of {list(RUN_MODES)}")
    order = _number(spec.get("order", 2), f"{path}.order", positive=True, integer=True)
    if order > MAX_ORDER:
        raise SchemaError(f"{path}.order", f"expected at most {MAX_ORDER}")
    lam = spec.get("lambda", [0.1])
    lam = lam if isinstance(lam, list) else [lam]
    if not lam:
        raise SchemaError(f"{path}.lambda", "expected at least one value")
    lambdas = tuple(_number(x, f"{path}.lambda[{i}]") for i, x in enumerate(lam))
    times = _parse_times(spec.get("t", [1.0]), f"{path}.t")
    tau = spec.get("tau")
    if tau is not None:
        tau = _number(tau, f"{path}.tau", positive=True)
    if mode == "floquet":
        if tau is None and period is None:
            raise SchemaError(f"{path}.period", "floquet mode needs a period or tau")
        if tau is not None and period is not None:
            m0 = tau / period
            if abs(m0 - round(m0)) > 1e-9 * max(1.0, m0) or round(m0) < 1:
                raise PeriodMismatch(f"{path}.tau: {tau} is not a positive multiple of period {period}")
    horizon = spec.get("horizon")
    if horizon is not None:
        horizon = _number(horizon, f"{path}.horizon", positive=True)
    periods = spec.get("periods", [1, 2, 4])
    if not isinstance(periods, list) or not periods:
        raise SchemaError(f"{path}.periods", "expected a non-empty list of integers")
    periods = tuple(_number(m, f"{path}.periods[{i}]", positive=True, integer=True)
                    for i, m in enumerate(periods))
    tols = spec.get("tolerances", {})
    if not isinstance(tols, dict):
        raise SchemaError(f"{path}.tolerances", "expected an object")
    qkw = {}
    for key in ("quad_tol", "avg_tol", "dt_max"):
        if key in tols:
            qkw[key] = _number(tols[key], f"{path}.tolerances.{key}", positive=True)
    for key in ("panels", "max_refinements"):
        if key in spec:
            qkw[key] = _number(spec[key], f"{path}.{key}", integer=True)
    if qkw.get("panels", 4) < 4:
        raise SchemaError(f"{path}.panels", "expected at least 4")
    oracle_tol = _number(tols.get("oracle_tol", 1e-10), f"{path}.tolerances.oracle_tol", positive=True)
    herm_tol = _number(tols.get("herm_tol", HERM_TOL), f"{path}.tolerances.herm_tol", positive=True)
    output = spec.get("output")
    if output is not None and not isinstance(output, str):
        raise SchemaError(f"{path}.output", "expected a path string")
    seed = _number(spec.get("seed", 0), f"{path}.seed", integer=True)
    return RunConfig(mode, order, lambdas, times, tau, period, horizon, periods, oracle_tol,
                     herm_tol, QuadratureConfig(**qkw), output, seed)


def parse_document(doc: Any) -> ProblemConfig:
    """Validate a decoded JSON document."""
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "expected an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version (expected {SCHEMA_VERSION})")
    dim = _number(_require(doc, "dimension", ""), "dimension", positive=True, integer=True)
    run_spec = doc.get("run", {})
    tol = HERM_TOL
    if isinstance(run_spec, dict) and isinstance(run_spec.get("tolerances"), dict):
        tol = _number(run_spec["tolerances"].get("herm_tol", HERM_TOL), "run.tolerances.herm_tol",
                      positive=True)
    h0 = _parse_h0(_require(doc, "h0", ""), dim, tol)
    pert = _parse_perturbation(_require(doc, "perturbation", ""), dim, tol)
    static = isinstance(h0, StaticH0) and all(p.is_static for p in pert)
    run = _parse_run(run_spec, static, None)
    if run.mode == "static" and not static:
        raise SchemaError("run.mode", "static mode needs a constant H0 and constant perturbations")
    if run.mode == "adiabatic" and not isinstance(h0, CommutingFamily):
        raise SchemaError("h0", "adiabatic mode needs 'levels' (fixed projectors with energy waveforms)")
    return ProblemConfig(dim, h0, pert, run, doc)


def parse_config(text: str) -> ProblemConfig:
    """Parse and validate a JSON problem document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"<line {exc.lineno}, column {exc.colno}>", f"invalid JSON ({exc.msg})") from None
    return parse_document(doc)


def with_overrides(doc: dict, **overrides) -> dict:
    """Copy of ``doc`` with run-block fields replaced (None values are ignored)."""
    out = json.loads(json.dumps(doc))
    run = out.setdefault("run", {})
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("quad_tol",):
            run.setdefault("tolerances", {})[key] = value
        else:
            run[key] = value
    return out
