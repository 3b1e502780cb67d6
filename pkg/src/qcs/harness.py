"""Configuration-driven experiment runner and report emission.

Configs are JSON objects with a ``kind`` plus a per-kind payload; matrices
are lists of rows whose entries are reals or [re, im] pairs, rationals are
"p/q" strings, and map specs follow :class:`qcs.measure_maps.MapSpec`.
Reports serialize deterministically (sorted keys, floats at 17 significant
digits), so identical config and seed reproduce identical numeric fields.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import QcsError, SchemaError
from .measure_maps import (
    MapSpec,
    build_map,
    compose,
    level_function,
    to_fraction,
)
from .spectral import (
    HermitianOperator,
    PiecewiseFn,
    PureState,
    borel_apply,
    spectral_cdf,
)
from .states import (
    BarrierComplex,
    ObservableFunction,
    no_go_witness,
    repair_barrier,
    sample_values,
    squaring_witness_model,
    value_distribution,
)
from .stats import ks_statistic, ks_threshold
from . import verify as verify_module
from .dynamics import EquivalenceComplex, evolve
from .phase_space import (
    PhaseSpaceState,
    build_measure,
    momentum_observable,
    position_observable,
    realize_barrier,
    spin_observable,
    to_unit_interval,
)

KINDS = ("measure", "dynamics", "example4", "cat", "phase_space", "verify_suite")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    payload: dict
    experiment_id: str
    seed: int = 0
    samples: int = 0

    @classmethod
    def from_json(cls, obj: Any) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise SchemaError("config must be a JSON object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise SchemaError(f"kind must be one of {KINDS}, got {kind!r}")
        seed = obj.get("seed", 0)
        samples = obj.get("samples", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise SchemaError("seed must be a nonnegative integer")
        if not isinstance(samples, int) or isinstance(samples, bool) or samples < 0:
            raise SchemaError("samples must be a nonnegative integer")
        return cls(
            kind=kind,
            payload=dict(obj),
            experiment_id=str(obj.get("id", kind)),
            seed=seed,
            samples=samples,
        )


@dataclass(frozen=True)
class Report:
    experiment: str
    results: dict
    seed: int
    runtime: float


# ---------------------------------------------------------------------------
# Payload parsing

def _entry_to_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        re, im = x
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            return complex(float(re), float(im))
    raise SchemaError(f"matrix entries must be reals or [re, im] pairs, got {x!r}")


def parse_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError("matrix must be a nonempty list of rows")
    rows = []
    for row in obj:
        if not isinstance(row, list) or len(row) != len(obj):
            raise SchemaError("matrix must be square")
        rows.append([_entry_to_complex(x) for x in row])
    return np.array(rows, dtype=complex)


def parse_vector(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError("vector must be a nonempty list")
    return np.array([_entry_to_complex(x) for x in obj], dtype=complex)


def parse_hermitian(obj, what: str) -> HermitianOperator:
    try:
        return HermitianOperator(parse_matrix(obj))
    except QcsError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def parse_state(obj, normalize: bool, what: str) -> PureState:
    vec = parse_vector(obj)
    try:
        return PureState.normalized(vec) if normalize else PureState(vec)
    except QcsError as exc:
        raise SchemaError(f"{what}: {exc}") from exc


def parse_map_spec(obj, default: MapSpec | None = None) -> MapSpec:
    if obj is None:
        if default is None:
            raise SchemaError("missing map spec")
        return default
    try:
        return MapSpec.from_json(obj)
    except QcsError as exc:
        raise SchemaError(f"bad map spec: {exc}") from exc


def parse_piecewise_fn(obj) -> PiecewiseFn:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("function spec must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "identity":
        return PiecewiseFn.identity()
    if kind == "square":
        return PiecewiseFn.square()
    if kind == "abs":
        return PiecewiseFn.absolute()
    if kind == "constant":
        return PiecewiseFn.constant(float(obj["c"]))
    if kind == "affine":
        return PiecewiseFn.affine(float(obj["a"]), float(obj["b"]))
    if kind == "poly":
        lo = float(obj.get("lo", -math.inf))
        hi = float(obj.get("hi", math.inf))
        return PiecewiseFn.from_poly([float(c) for c in obj["coeffs"]], lo, hi)
    raise SchemaError(f"unknown function kind {kind!r}")


def parse_barrier_complex(obj) -> BarrierComplex:
    if obj is None:
        return BarrierComplex.identity()
    if isinstance(obj, dict) and "kind" in obj:
        return BarrierComplex(parse_map_spec(obj))
    if not isinstance(obj, dict):
        raise SchemaError("barrier complex must be an object")
    default = parse_map_spec(obj.get("default"), MapSpec.identity())
    overrides = {}
    for entry in obj.get("overrides", []):
        if not isinstance(entry, dict) or "map" not in entry:
            raise SchemaError("barrier override needs a 'map'")
        key = (entry.get("operator"), entry.get("state"))
        overrides[key] = parse_map_spec(entry["map"])
    try:
        return BarrierComplex(default, overrides)
    except QcsError as exc:
        raise SchemaError(f"bad barrier complex: {exc}") from exc


def parse_equivalences(obj) -> EquivalenceComplex:
    if obj is None:
        return EquivalenceComplex.identity()
    if isinstance(obj, dict) and "kind" in obj:
        return EquivalenceComplex(parse_map_spec(obj))
    if not isinstance(obj, dict):
        raise SchemaError("equivalence complex must be an object")
    default = parse_map_spec(obj.get("default"), MapSpec.identity())
    overrides = {}
    for entry in obj.get("overrides", []):
        if not isinstance(entry, dict) or "map" not in entry:
            raise SchemaError("equivalence override needs a 'map'")
        overrides[entry.get("state")] = parse_map_spec(entry["map"])
    try:
        return EquivalenceComplex(default, overrides)
    except QcsError as exc:
        raise SchemaError(f"bad equivalence complex: {exc}") from exc


# ---------------------------------------------------------------------------
# Experiments

def _run_measure(config: ExperimentConfig) -> dict:
    payload = config.payload
    if "operator" not in payload or "state" not in payload:
        raise SchemaError("measure experiment needs 'operator' and 'state'")
    a = parse_hermitian(payload["operator"], "operator")
    psi = parse_state(payload["state"], bool(payload.get("normalize", False)), "state")
    barrier = build_map(parse_map_spec(payload.get("barrier"), MapSpec.identity()))
    cdf = spectral_cdf(a, psi)
    dist = value_distribution(a, psi, barrier)
    exact_rows = [
        {"eigenvalue": v, "probability": float(p), "probability_exact": str(p)}
        for v, p in dist
    ]
    max_err = max(
        abs(float(p) - w) for (_, p), w in zip(dist, cdf.weights)
    )
    results: dict[str, Any] = {
        "distribution": exact_rows,
        "spectral_weights": list(cdf.weights),
        "max_error": max_err,
        "rows": [
            {"eigenvalue": row["eigenvalue"], "probability": row["probability"]}
            for row in exact_rows
        ],
    }
    n = config.samples
    if n > 0:
        samples = sample_values(a, psi, barrier, config.seed, n)
        stat = ks_statistic(samples, cdf)
        threshold = ks_threshold(n, 0.99)
        results["ks"] = {
            "n": n,
            "statistic": stat,
            "threshold_99": threshold,
            "passed": bool(stat < threshold),
        }
        out_path = payload.get("samples_out")
        if out_path:
            with open(out_path, "w") as fh:
                for x in samples:
                    fh.write(f"{float(x):.17g}\n")
            results["samples_path"] = str(out_path)
    return results


def _run_dynamics(config: ExperimentConfig) -> dict:
    payload = config.payload
    for key in ("H", "A", "psi0", "times"):
        if key not in payload:
            raise SchemaError(f"dynamics experiment needs '{key}'")
    h = parse_hermitian(payload["H"], "H")
    a = parse_hermitian(payload["A"], "A")
    psi0 = parse_state(payload["psi0"], bool(payload.get("normalize", False)), "psi0")
    times = payload["times"]
    if not isinstance(times, list) or not all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in times
    ):
        raise SchemaError("times must be a list of reals")
    barriers = parse_barrier_complex(payload.get("barrier"))
    parse_equivalences(payload.get("sigma"))  # validated; evolution uses spectral exponentials
    f = ObservableFunction(a, barriers)
    rows = []
    worst = 0.0
    for t in times:
        psi_t = evolve(h, float(t), psi0)
        op_side = a.expectation(psi_t)
        label_side = f.expectation(psi_t)
        gap = abs(op_side - label_side)
        worst = max(worst, gap)
        rows.append(
            {"t": float(t), "operator_side": op_side, "label_side": label_side, "gap": gap}
        )
    return {"rows": rows, "max_gap": worst, "passed": bool(worst < 1e-10)}


def _run_example4(config: ExperimentConfig) -> dict:
    payload = config.payload
    model = squaring_witness_model()
    alpha = build_map(parse_map_spec(payload.get("barrier"), MapSpec.identity()))
    square = PiecewiseFn.square()
    cdf = spectral_cdf(model.operator, model.state)
    a2 = borel_apply(square, model.operator)
    cdf2 = spectral_cdf(a2, model.state)
    witness = no_go_witness(alpha)
    beta = repair_barrier(model.operator, square, alpha, model.state)
    repaired = no_go_witness(alpha, squared_barrier=beta)
    shift = compose(build_map(MapSpec.rotation(Fraction(3, 8))), alpha)
    shift_matches = level_function(cdf2, beta).equal_ae(level_function(cdf2, shift))
    return {
        "cdf": [{"value": v, "level": c} for v, c in zip(cdf.support, cdf.levels)],
        "squared_cdf": [{"value": v, "level": c} for v, c in zip(cdf2.support, cdf2.levels)],
        "disagreement": float(witness.disagreement),
        "disagreement_exact": str(witness.disagreement),
        "repaired_disagreement": float(repaired.disagreement),
        "repaired_disagreement_exact": str(repaired.disagreement),
        "repair_equals_shift_ae": bool(shift_matches),
        "passed": bool(
            witness.disagreement == Fraction(1, 2)
            and repaired.disagreement == 0
            and shift_matches
        ),
        "rows": [
            {"quantity": "disagreement", "value": float(witness.disagreement)},
            {"quantity": "repaired_disagreement", "value": float(repaired.disagreement)},
        ],
    }


def _run_cat(config: ExperimentConfig) -> dict:
    payload = config.payload
    if "p" not in payload or "z" not in payload:
        raise SchemaError("cat experiment needs 'p' and 'z'")
    try:
        p = to_fraction(payload["p"])
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational p: {exc}") from exc
    if not (0 < p < 1):
        raise SchemaError("p must lie strictly between 0 and 1")
    z_raw = payload["z"]
    if isinstance(z_raw, bool) or not isinstance(z_raw, (int, float, str)):
        raise SchemaError("z must be a real in ]0,1[")
    z = to_fraction(z_raw)
    if not (0 < z < 1):
        raise SchemaError("z must lie strictly between 0 and 1")
    alpha = build_map(parse_map_spec(payload.get("barrier"), MapSpec.identity()))
    level = alpha(z)
    awake = level > 1 - p
    return {
        "survival_weight": float(p),
        "label": float(z),
        "barrier_level": float(level),
        "threshold": float(1 - p),
        "value": 1 if awake else 0,
        "outcome": "awake" if awake else "asleep",
    }


def _run_phase_space(config: ExperimentConfig) -> dict:
    payload = config.payload
    for key in ("sigma", "N", "dq", "psi", "observable"):
        if key not in payload:
            raise SchemaError(f"phase_space experiment needs '{key}'")
    try:
        spin = Fraction(str(payload["sigma"]))
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad spin: {exc}") from exc
    n = payload["N"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise SchemaError("N must be an integer >= 2")
    dq = payload["dq"]
    if not isinstance(dq, (int, float)) or isinstance(dq, bool) or not dq > 0:
        raise SchemaError("dq must be positive")
    psi_rows = payload["psi"]
    if not isinstance(psi_rows, list):
        raise SchemaError("psi must be a list of sector arrays")
    amps = np.array([[_entry_to_complex(x) for x in row] for row in psi_rows], dtype=complex)
    if amps.ndim != 2 or amps.shape[1] != n:
        raise SchemaError("psi sector arrays must have length N")
    try:
        if payload.get("normalize", False):
            state = PhaseSpaceState.normalized(spin, amps, float(dq))
        else:
            state = PhaseSpaceState(spin, amps, float(dq))
    except QcsError as exc:
        raise SchemaError(f"bad phase-space state: {exc}") from exc
    obs_spec = payload["observable"]
    if not isinstance(obs_spec, dict) or "kind" not in obs_spec:
        raise SchemaError("observable must be an object with a 'kind'")
    okind = obs_spec["kind"]
    if okind == "position":
        obs = position_observable(parse_piecewise_fn(obs_spec.get("g", {"kind": "identity"})), state)
        fn_vals = [
            parse_piecewise_fn(obs_spec.get("g", {"kind": "identity"}))(q) for q in state.q_grid
        ]
        dens = ((np.abs(state.amplitudes) ** 2) * state.dq).sum(axis=0)
        op_side = math.fsum(v * float(w) for v, w in zip(fn_vals, dens))
    elif okind == "momentum":
        fn = parse_piecewise_fn(obs_spec.get("f", {"kind": "identity"}))
        obs = momentum_observable(fn, state)
        dens = ((np.abs(state.momentum_amplitudes) ** 2) * state.dp).sum(axis=0)
        op_side = math.fsum(fn(p) * float(w) for p, w in zip(state.p_grid, dens))
    elif okind == "spin":
        obs = spin_observable(state)
        masses = state.sector_masses()
        op_side = math.fsum(float(s) * float(m) for s, m in zip(state.sector_labels, masses))
    else:
        raise SchemaError(f"unknown observable kind {okind!r}")
    equiv = to_unit_interval(build_measure(state))
    barrier, _ = realize_barrier(obs, equiv)
    label_side = math.fsum(
        v * float(hi - lo) for lo, hi, v in level_function(obs.cdf, barrier).cells()
    )
    gap = abs(op_side - label_side)
    return {
        "distribution": [
            {"value": v, "level": c} for v, c in zip(obs.cdf.support, obs.cdf.levels)
        ],
        "operator_side": op_side,
        "label_side": label_side,
        "gap": gap,
        "passed": bool(gap < 1e-12),
        "rows": [
            {"value": v, "weight": w} for v, w in zip(obs.cdf.support, obs.cdf.weights)
        ],
    }


def _run_verify_suite(config: ExperimentConfig) -> dict:
    suite = config.payload.get("suite", "all")
    if not isinstance(suite, str):
        raise SchemaError("suite must be a string")
    try:
        outcomes = verify_module.run_suite(suite)
    except KeyError as exc:
        raise SchemaError(str(exc)) from exc
    return {
        "suite": suite,
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
                "seconds": round(r.seconds, 3),
            }
            for r in outcomes
        ],
        "passed": all(r.passed for r in outcomes),
        "rows": [{"name": r.name, "passed": int(r.passed)} for r in outcomes],
    }


_RUNNERS = {
    "measure": _run_measure,
    "dynamics": _run_dynamics,
    "example4": _run_example4,
    "cat": _run_cat,
    "phase_space": _run_phase_space,
    "verify_suite": _run_verify_suite,
}


def run_experiment(config: ExperimentConfig) -> Report:
    started = time.perf_counter()
    results = _RUNNERS[config.kind](config)
    return Report(
        experiment=config.experiment_id,
        results=results,
        seed=config.seed,
        runtime=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Deterministic serialization

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if value is None:
        return "null"
    if isinstance(value, Fraction):
        return json.dumps(str(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        items = sorted(value.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in items) + "}"
    if isinstance(value, (np.floating,)):
        return format(float(value), ".17g")
    if isinstance(value, (np.integer,)):
        return str(int(value))
    raise SchemaError(f"cannot serialize {type(value).__name__}")


def render_report(report: Report, fmt: str) -> str:
    if fmt == "json":
        body = {
            "experiment": report.experiment,
            "seed": report.seed,
            "results": report.results,
            "runtime_seconds": round(report.runtime, 6),
        }
        return _fmt(body) + "\n"
    if fmt == "csv":
        rows = report.results.get("rows")
        if rows:
            header = list(rows[0].keys())
            lines = [",".join(header)]
            for row in rows:
                lines.append(
                    ",".join(
                        format(row[k], ".17g") if isinstance(row[k], float) else str(row[k])
                        for k in header
                    )
                )
        else:
            lines = ["key,value"]
            for k in sorted(report.results):
                v = report.results[k]
                if isinstance(v, (int, float, str, bool)):
                    lines.append(f"{k},{_fmt(v) if not isinstance(v, str) else v}")
        return "\n".join(lines) + "\n"
    raise SchemaError(f"unknown report format {fmt!r}")


def emit_report(report: Report, fmt: str, path: str) -> None:
    text = render_report(report, fmt)
    with open(path, "w") as fh:
        fh.write(text)
