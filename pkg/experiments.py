"""Experiment configs, runs over refinement ladders, sweeps, the property matrix and result files."""
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from diagnostics import EnergyVariant, VelocitySource, energy_trace, eoc, error_norms
from errors import ConfigError, DomainError, WaveSolverError
from mesh_spaces import MAX_DEGREE, NODAL, build_spatial_mesh, build_temporal_mesh
from plotting import render_convergence, render_energy_drift
from presets import FIG1, FIG2, LADDERS, QUICK_LADDERS, build_problem, resolve_preset
from rk_reference import integrate_reference, symplectic_residual
from solver_linear import MethodId, SolutionBundle, WaveProblem, linear_equivalence_check
from solver_semilinear import (FixedPointConfig, semilinear_equivalence_check, sine_gordon, slab_step_map,
                               solve_semilinear)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

OUTPUTS = ("energy_trace", "errors", "eoc", "equivalence", "instability_sweep", "table1_matrix")
DEFAULT_OUTPUTS = ["energy_trace", "errors"]
DEFAULT_RATIOS = [0.1, 0.5, 1.0, 2.0, 4.0]
REFERENCE_METHODS = (MethodId.GAUSS_RK, MethodId.LOBATTO_IIIAB)
CONSERVATIVE_METHODS = (MethodId.STABILIZED, MethodId.DGCG)

ENERGY_TOLERANCE = 1e-10
RAW_DRIFT_FACTOR = 1e3
EQUIVALENCE_TOLERANCE = 1e-9
EQUIVALENCE_FIXED_POINT = FixedPointConfig(tolerance=1e-13)
EOC_TOLERANCE = 0.2
EOC_CHECKED_RUNGS = 2
GROWTH_LIMIT = 1e3
SWEEP_N_X = 384
QUICK_SWEEP_N_X = 96
PLOT_FORMATS = ("svg", "png")

YES, NO, CONDITIONAL = "✓", "×", "△"
TABLE1_METHODS = (MethodId.UNSTABILIZED, MethodId.STABILIZED, MethodId.GAUSS_LEGENDRE, MethodId.GAUSS_LOBATTO)
EXPECTED_TABLE1 = {
    MethodId.UNSTABILIZED: (CONDITIONAL, NO, YES),
    MethodId.STABILIZED: (YES, YES, NO),
    MethodId.GAUSS_LEGENDRE: (YES, NO, YES),
    MethodId.GAUSS_LOBATTO: (CONDITIONAL, NO, YES),
}
TABLE1_ENERGY_TOLERANCE = 1e-9
TABLE1_ENERGY_LOAD_POINTS = 12
TABLE1_SYMPLECTIC_TOLERANCE = 1e-7
TABLE1_FIXED_POINT = FixedPointConfig(tolerance=5e-14)


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment, stored as JSON."""
    preset: str
    methods: List[str]
    degrees: List[Tuple[int, int]] = field(default_factory=lambda: [(1, 1)])
    ladder: List[Tuple[int, int]] = field(default_factory=list)
    quick_ladder: Optional[List[Tuple[int, int]]] = None
    fixed_point: FixedPointConfig = field(default_factory=FixedPointConfig)
    outputs: List[str] = field(default_factory=lambda: list(DEFAULT_OUTPUTS))
    output_dir: str = "results"
    seed: int = 0
    ratios: List[float] = field(default_factory=lambda: list(DEFAULT_RATIOS))
    equivalence_trials: int = 20
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        problems = []
        preset = data.get("preset", "")
        try:
            fixed_point = FixedPointConfig.from_dict(data.get("fixed_point"))
        except (DomainError, TypeError, ValueError) as exc:
            problems.append(f"fixed_point: {exc}")
            fixed_point = FixedPointConfig()
        ladder = data.get("ladder")
        if ladder is None:
            ladder = LADDERS.get(_preset_key(preset), [])
        quick = data.get("quick_ladder")
        config = cls(
            preset=preset,
            methods=list(data.get("methods", [])),
            degrees=[tuple(d) for d in data.get("degrees", [(1, 1)])],
            ladder=[tuple(s) for s in ladder],
            quick_ladder=None if quick is None else [tuple(s) for s in quick],
            fixed_point=fixed_point,
            outputs=list(data.get("outputs", DEFAULT_OUTPUTS)),
            output_dir=data.get("output_dir", "results"),
            seed=int(data.get("seed", 0)),
            ratios=[float(r) for r in data.get("ratios", DEFAULT_RATIOS)],
            equivalence_trials=int(data.get("equivalence_trials", 20)),
            jobs=int(data.get("jobs", 1)),
        )
        unknown = set(data) - set(cls.__dataclass_fields__)
        problems.extend(f"unknown key {key!r}" for key in sorted(unknown))
        problems.extend(config.problems())
        if problems:
            raise ConfigError(problems)
        return config

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path, 'r') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"{path}: {exc}"]) from exc
        return cls.from_dict(data)

    def problems(self) -> List[str]:
        """Every schema violation, empty when the config is valid."""
        found = []
        if _preset_key(self.preset) is None:
            found.append(f"unknown preset {self.preset!r}")
        if not self.methods:
            found.append("methods must be nonempty")
        for name in self.methods:
            try:
                MethodId.parse(name)
            except DomainError:
                found.append(f"unknown method {name!r}")
        if not self.degrees:
            found.append("degrees must be nonempty")
        for degree in self.degrees:
            if len(degree) != 2 or not all(1 <= int(p) <= MAX_DEGREE for p in degree):
                found.append(f"degrees entry {list(degree)} must be [p_t, p_x] within [1, {MAX_DEGREE}]")
        for name, ladder in (("ladder", self.ladder), ("quick_ladder", self.quick_ladder or [(1, 1)])):
            if not ladder:
                found.append(f"{name} must be nonempty")
            for size in ladder:
                if len(size) != 2 or int(size[0]) < 1 or int(size[1]) < 1:
                    found.append(f"{name} entry {list(size)} must be [N_t, N_x] with positive sizes")
        for output in self.outputs:
            if output not in OUTPUTS:
                found.append(f"unknown output {output!r}")
        if not self.ratios or any(r <= 0.0 for r in self.ratios):
            found.append("ratios must be positive")
        if self.equivalence_trials < 1:
            found.append("equivalence_trials must be at least 1")
        if self.jobs < 1:
            found.append("jobs must be at least 1")
        return found

    def validate(self) -> "ExperimentConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    @property
    def preset_key(self) -> str:
        return resolve_preset(self.preset)

    @property
    def method_ids(self) -> List[MethodId]:
        return [MethodId.parse(name) for name in self.methods]

    def ladder_for(self, quick: bool) -> List[Tuple[int, int]]:
        if not quick:
            return list(self.ladder)
        if self.quick_ladder is not None:
            return list(self.quick_ladder)
        return QUICK_LADDERS.get(self.preset_key, self.ladder)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "methods": list(self.methods),
            "degrees": [list(d) for d in self.degrees],
            "ladder": [list(s) for s in self.ladder],
            "quick_ladder": None if self.quick_ladder is None else [list(s) for s in self.quick_ladder],
            "fixed_point": self.fixed_point.to_dict(),
            "outputs": list(self.outputs),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "ratios": list(self.ratios),
            "equivalence_trials": self.equivalence_trials,
            "jobs": self.jobs,
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _preset_key(name: str) -> Optional[str]:
    try:
        return resolve_preset(name)
    except DomainError:
        return None


@dataclass
class RunRecord:
    """Everything needed to reproduce and judge one (method, degrees, mesh) run."""
    preset: str
    method: str
    p_t: int
    p_x: int
    N_t: int
    N_x: int
    h_t: float
    h_x: float
    seed: int
    config_hash: str
    status: str = "ok"
    norms: Dict[str, float] = field(default_factory=dict)
    energy_drift: Optional[float] = None
    raw_energy_drift: Optional[float] = None
    iterations: Dict[str, float] = field(default_factory=dict)
    blowup_slab: Optional[int] = None
    error: Optional[str] = None
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    expected: str

    def to_dict(self) -> dict:
        value = self.value if math.isfinite(self.value) else str(self.value)
        return {"name": self.name, "passed": bool(self.passed), "value": value, "expected": self.expected}


@dataclass
class RunReport:
    config_hash: str
    seed: int
    records: List[RunRecord] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    eoc: List[dict] = field(default_factory=list)
    equivalence: List[dict] = field(default_factory=list)
    sweep: List[dict] = field(default_factory=list)
    table1: List[dict] = field(default_factory=list)
    files: List[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "records": [record.to_dict() for record in self.records],
            "checks": [check.to_dict() for check in self.checks],
            "eoc": self.eoc,
            "equivalence": self.equivalence,
            "sweep": self.sweep,
            "table1": self.table1,
        }

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, "report.json")
        with open(path, 'w') as f:
            json.dump(_finite(self.to_dict()), f, indent=2)
        self.files.append(path)
        return path


def _finite(value):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else str(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def solve_method(problem: WaveProblem, method: MethodId, fp: Optional[FixedPointConfig] = None,
                 progress: bool = False, load_points: Optional[int] = None) -> SolutionBundle:
    """Any of the seven schemes on a problem, linear or semilinear."""
    method = MethodId(method)
    if method in REFERENCE_METHODS:
        return integrate_reference(problem, method, fp=fp, progress=progress)
    return solve_semilinear(problem, method=method, fp=fp, progress=progress, load_points=load_points)


def _energy_variant(problem: WaveProblem) -> EnergyVariant:
    return EnergyVariant.LINEAR if problem.nonlinearity is None else EnergyVariant.SEMILINEAR


def _iteration_stats(iterations: Sequence[int]) -> Dict[str, float]:
    if not iterations:
        return {}
    return {"min": int(min(iterations)), "max": int(max(iterations)), "mean": float(np.mean(iterations))}


def execute_run(config: ExperimentConfig, method: MethodId, degrees: Tuple[int, int], sizes: Tuple[int, int],
                config_hash: str, progress: bool = False) -> Tuple[RunRecord, List[dict], List[dict]]:
    """One solve plus the requested diagnostics; solver errors are recorded, not raised."""
    (p_t, p_x), (N_t, N_x) = degrees, sizes
    start = time.perf_counter()
    problem = build_problem(config.preset, N_t, N_x, p_t, p_x)
    record = RunRecord(config.preset_key, method.value, p_t, p_x, N_t, N_x, problem.temporal_mesh.h,
                       problem.spatial_mesh.h, config.seed, config_hash)
    energy_rows, error_rows = [], []
    keys = {"method": method.value, "p_t": p_t, "p_x": p_x, "N_t": N_t, "N_x": N_x}
    try:
        bundle = solve_method(problem, method, config.fixed_point, progress)
        record.iterations = _iteration_stats(bundle.iterations)
        record.blowup_slab = bundle.blowup_slab
        if bundle.blowup_slab is not None:
            record.status = "blowup"
        else:
            if "energy_trace" in config.outputs:
                trace = energy_trace(bundle, problem, _energy_variant(problem), VelocitySource.RECONSTRUCTION)
                record.energy_drift = trace.max_drift()
                drift = trace.drift()
                energy_rows = [dict(keys, t_j=float(t), E=float(e), drift=float(d))
                               for t, e, d in zip(trace.times, trace.values, drift)]
                if bundle.U.space != NODAL:
                    raw = energy_trace(bundle, problem, _energy_variant(problem), VelocitySource.RAW)
                    record.raw_energy_drift = raw.max_drift()
            wants_errors = "errors" in config.outputs or "eoc" in config.outputs
            if wants_errors and problem.exact is not None and bundle.U.space != NODAL:
                exact = problem.exact
                report = error_norms(bundle, exact.displacement, exact.velocity, exact.gradient)
                record.norms = report.norms
                error_rows = [dict(keys, h_t=record.h_t, h_x=record.h_x, norm_name=name, value=value)
                              for name, value in report.norms.items()]
    except WaveSolverError as exc:
        record.status = "error"
        record.error = str(exc)
        logger.error("%s p=(%d,%d) N=(%d,%d) failed: %s", method.value, p_t, p_x, N_t, N_x, exc)
    record.wall_time = time.perf_counter() - start
    logger.info("%s p=(%d,%d) N=(%d,%d): %s in %.2fs", method.value, p_t, p_x, N_t, N_x, record.status,
                record.wall_time)
    return record, energy_rows, error_rows


def _map(jobs: int, fn: Callable, items: Iterable) -> list:
    """Apply fn in a thread pool when jobs > 1; results keep submission order."""
    items = list(items)
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))


def expected_orders(p_t: int, p_x: int) -> Dict[str, int]:
    return {
        "C0_L2_U": min(p_x + 1, p_t + 1),
        "C0_L2_V": min(p_x + 1, p_t + 1),
        "L2L2_dtU": min(p_x + 1, p_t),
    }


def eoc_rows(records: Sequence[RunRecord]) -> List[dict]:
    """Observed orders between successive ladder entries of every (method, p_t, p_x) group."""
    groups: Dict[Tuple[str, int, int], List[RunRecord]] = {}
    for record in records:
        if record.status == "ok" and record.norms:
            groups.setdefault((record.method, record.p_t, record.p_x), []).append(record)
    rows = []
    for (method, p_t, p_x), group in groups.items():
        group = sorted(group, key=lambda r: -r.h_t)
        if len(group) < 2:
            continue
        for name in group[0].norms:
            h = [r.h_t for r in group]
            values = [r.norms.get(name, float("nan")) for r in group]
            try:
                rates = eoc(h, values)
            except DomainError as exc:
                logger.warning("no EOC for %s %s: %s", method, name, exc)
                continue
            for k, rate in enumerate(rates):
                rows.append({"method": method, "p_t": p_t, "p_x": p_x, "norm_name": name,
                             "N_t": group[k + 1].N_t, "N_x": group[k + 1].N_x, "rate": float(rate)})
    return rows


def eoc_checks(rows: Sequence[dict], rungs: int = EOC_CHECKED_RUNGS) -> List[Check]:
    """Expected orders on the last `rungs` h-halvings of every (method, p_t, p_x, norm) series."""
    series: Dict[Tuple[str, int, int, str], List[dict]] = {}
    for row in rows:
        series.setdefault((row["method"], row["p_t"], row["p_x"], row["norm_name"]), []).append(row)
    checks = []
    for (method, p_t, p_x, name), group in series.items():
        expected = expected_orders(p_t, p_x).get(name)
        if expected is None:
            continue
        for row in sorted(group, key=lambda r: r["N_t"])[-rungs:]:
            checks.append(Check(f"EOC {method} p=({p_t},{p_x}) {name} N=({row['N_t']},{row['N_x']})",
                                abs(row["rate"] - expected) <= EOC_TOLERANCE, row["rate"],
                                f"{expected} +- {EOC_TOLERANCE}"))
    return checks


def random_problem(rng: np.random.Generator, nonlinear: bool = False, max_slabs: int = 8, max_elements: int = 12,
                   max_degree: int = 3) -> WaveProblem:
    """Small problem on (0, 1) with random wave speed, source, initial data and meshes."""
    T = float(rng.uniform(0.25, 1.0))
    N_t = int(rng.integers(2 if nonlinear else 1, max_slabs + 1))
    N_x = int(rng.integers(2, max_elements + 1))
    p_t, p_x = (int(p) for p in rng.integers(1, max_degree + 1, size=2))
    c0, c1 = float(rng.uniform(0.5, 1.5)), float(rng.uniform(0.0, 0.5))
    a = rng.normal(size=6)

    def source(x, t):
        return a[0] * np.sin(np.pi * x) * np.cos(2.0 * t) + a[1] * x * (1.0 - x) * t

    return WaveProblem(
        build_spatial_mesh(0.0, 1.0, N_x, p_x),
        build_temporal_mesh(T, N_t, p_t),
        wave_speed=lambda x: c0 + c1 * x * x,
        source=source,
        initial_displacement=lambda x: x * (1.0 - x) * (a[2] + a[3] * x),
        initial_velocity=lambda x: x * (1.0 - x) * (a[4] + a[5] * x),
        initial_displacement_dx=lambda x: (1.0 - 2.0 * x) * (a[2] + a[3] * x) + x * (1.0 - x) * a[3],
        nonlinearity=sine_gordon() if nonlinear else None,
        name="random",
    )


def _nodal_discrepancy(first: SolutionBundle, second: SolutionBundle) -> Tuple[float, float]:
    a, b = first.U.nodal_values(), second.U.nodal_values()
    return float(np.max(np.abs(a - b))), max(1.0, float(np.max(np.abs(b))))


def equivalence_trials(seed: int, trials: int) -> List[dict]:
    """Randomized cross-checks of the equivalent scheme pairs."""
    rows = []
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        problem = random_problem(rng)
        result = linear_equivalence_check(problem)
        rows.append({"kind": "stabilized-dgcg-linear", "trial": k,
                     "discrepancy": max(result["displacement"], result["velocity"]), "scale": result["scale"]})

        problem = random_problem(rng, nonlinear=True)
        result = semilinear_equivalence_check(problem, fp=EQUIVALENCE_FIXED_POINT)
        rows.append({"kind": "stabilized-dgcg-sine-gordon", "trial": k,
                     "discrepancy": max(result["displacement"], result["velocity"]), "scale": result["scale"]})

        small = random_problem(rng, nonlinear=bool(k % 2), max_elements=10, max_degree=2)
        for scheme, reference in ((MethodId.GAUSS_LEGENDRE, MethodId.GAUSS_RK),
                                  (MethodId.GAUSS_LOBATTO, MethodId.LOBATTO_IIIAB)):
            discrepancy, scale = _nodal_discrepancy(
                solve_method(small, scheme, EQUIVALENCE_FIXED_POINT),
                solve_method(small, reference, EQUIVALENCE_FIXED_POINT))
            rows.append({"kind": f"{scheme.value}-{reference.value}", "trial": k,
                         "discrepancy": discrepancy, "scale": scale})
    logger.info("ran %d equivalence trials", trials)
    return rows


def instability_sweep(preset: str = FIG1, methods: Sequence[MethodId] = TABLE1_METHODS,
                      ratios: Sequence[float] = DEFAULT_RATIOS, p_t: int = 1, p_x: int = 1,
                      N_x: int = SWEEP_N_X, fp: Optional[FixedPointConfig] = None,
                      progress: bool = False) -> pd.DataFrame:
    """Bounded or blown-up per method at every ratio h_t / h_x on a fixed spatial mesh."""
    base = build_problem(preset, 1, N_x, p_t, p_x)
    h_x, T = base.spatial_mesh.h, base.temporal_mesh.T
    rows = []
    for ratio in ratios:
        N_t = max(1, int(math.ceil(T / (ratio * h_x) - 1e-9)))
        problem = base.with_meshes(temporal_mesh=build_temporal_mesh(T, N_t, p_t))
        for method in methods:
            method = MethodId(method)
            row = {"ratio": float(ratio), "method": method.value, "N_t": N_t, "N_x": N_x,
                   "h_t": problem.temporal_mesh.h, "h_x": h_x, "blowup_slab": None, "growth": float("inf"),
                   "bounded": False, "error": None}
            try:
                bundle = solve_method(problem, method, fp, progress)
                row["blowup_slab"] = bundle.blowup_slab
                if bundle.blowup_slab is None:
                    trace = energy_trace(bundle, problem, _energy_variant(problem))
                    row["growth"] = trace.growth_factor()
                    row["bounded"] = bool(row["growth"] <= GROWTH_LIMIT)
            except WaveSolverError as exc:
                row["error"] = str(exc)
                logger.warning("sweep %s at ratio %g failed: %s", method.value, ratio, exc)
            logger.info("sweep ratio %g %s: %s", ratio, method.value, "bounded" if row["bounded"] else "unbounded")
            rows.append(row)
    return pd.DataFrame(rows)


def sweep_checks(sweep: pd.DataFrame) -> List[Check]:
    checks = []
    smallest = sweep["ratio"].min()
    for method, group in sweep.groupby("method", sort=False):
        bounded = group["bounded"].astype(bool)
        first = bool(group.loc[group["ratio"] == smallest, "bounded"].all())
        checks.append(Check(f"sweep {method} bounded at ratio {smallest:g}", first, float(smallest), "bounded"))
        if method in (MethodId.STABILIZED.value, MethodId.GAUSS_LEGENDRE.value):
            checks.append(Check(f"sweep {method} bounded at every ratio", bool(bounded.all()),
                                float(group["growth"].max()), f"growth <= {GROWTH_LIMIT:g}"))
        if method in (MethodId.UNSTABILIZED.value, MethodId.GAUSS_LOBATTO.value):
            checks.append(Check(f"sweep {method} blows up at some ratio", bool((~bounded).any()),
                                float((~bounded).sum()), "at least one unbounded ratio"))
    return checks


def _stability_symbol(sweep: pd.DataFrame, method: MethodId) -> str:
    group = sweep[sweep["method"] == method.value].sort_values("ratio")
    bounded = group["bounded"].astype(bool).tolist()
    if all(bounded):
        return YES
    return CONDITIONAL if bounded and bounded[0] else NO


def table1_matrix(quick: bool = True, sweep: Optional[pd.DataFrame] = None, progress: bool = False) -> pd.DataFrame:
    """Stability, nodal energy preservation and symplecticity of the four second-order schemes.

    Stability comes from the ratio sweep on the linear pulse; the other two
    columns are measured on the sine-Gordon breather.
    """
    if sweep is None:
        sweep = instability_sweep(N_x=QUICK_SWEEP_N_X if quick else SWEEP_N_X, progress=progress)

    energy_problem = build_problem(FIG2, 8, 40, 1, 1)
    map_problem = build_problem(FIG2, 1, 10, 1, 1)
    exact = map_problem.exact
    ops = map_problem.operators
    state = (ops.interpolate(lambda x: exact.displacement(x, 1.0)),
             ops.mass @ ops.interpolate(lambda x: exact.velocity(x, 1.0)))

    rows = []
    for method in TABLE1_METHODS:
        bundle = solve_semilinear(energy_problem, method=method, fp=TABLE1_FIXED_POINT,
                                  load_points=TABLE1_ENERGY_LOAD_POINTS)
        drift = energy_trace(bundle, energy_problem, EnergyVariant.SEMILINEAR).max_drift()
        step = slab_step_map(map_problem, method, fp=TABLE1_FIXED_POINT)
        residual = symplectic_residual(step, ops.num_dofs, state=state)
        rows.append({
            "method": method.value,
            "stability": _stability_symbol(sweep, method),
            "energy": YES if drift <= TABLE1_ENERGY_TOLERANCE else NO,
            "symplecticity": YES if residual <= TABLE1_SYMPLECTIC_TOLERANCE else NO,
            "energy_drift": drift,
            "symplectic_residual": residual,
        })
        logger.info("table1 %s: drift %.3e, symplectic residual %.3e", method.value, drift, residual)
    return pd.DataFrame(rows)


def table1_checks(table: pd.DataFrame) -> List[Check]:
    checks = []
    for method, expected in EXPECTED_TABLE1.items():
        row = table[table["method"] == method.value].iloc[0]
        observed = (row["stability"], row["energy"], row["symplecticity"])
        checks.append(Check(f"table1 {method.value}", observed == expected, float(row["symplectic_residual"]),
                            " ".join(expected)))
    return checks


def _write_csv(rows, path: str, report: RunReport):
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
    frame.to_csv(path, index=False)
    report.files.append(path)
    logger.info("wrote %s", path)


def _plots(energy: List[dict], errors: List[dict], out_dir: str, report: RunReport):
    if energy:
        frame = pd.DataFrame(energy)
        series = {}
        for (method, p_t, p_x, N_t, N_x), group in frame.groupby(["method", "p_t", "p_x", "N_t", "N_x"], sort=False):
            series[f"{method} p=({p_t},{p_x}) N=({N_t},{N_x})"] = (group["t_j"].to_numpy(), group["drift"].to_numpy())
        for extension in PLOT_FORMATS:
            report.files.append(render_energy_drift(series, os.path.join(out_dir, f"energy_drift.{extension}")))
    if errors:
        frame = pd.DataFrame(errors)
        for (p_t, p_x), by_degree in frame.groupby(["p_t", "p_x"], sort=False):
            series = {}
            for (method, norm), group in by_degree.groupby(["method", "norm_name"], sort=False):
                group = group.sort_values("h_t", ascending=False)
                if len(group) >= 2:
                    series[f"{method} {norm}"] = (group["h_t"].to_numpy(), group["value"].to_numpy())
            if series:
                for extension in PLOT_FORMATS:
                    path = os.path.join(out_dir, f"convergence_p{p_t}_{p_x}.{extension}")
                    report.files.append(render_convergence(series, path, slopes=(p_t, p_t + 1)))


def run(config: ExperimentConfig, quick: bool = False, out_dir: Optional[str] = None,
        progress: bool = False) -> RunReport:
    """Execute every requested analysis of a config and write the result files."""
    config.validate()
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    digest = config.config_hash()
    report = RunReport(digest, config.seed)
    methods = config.method_ids
    ladder = config.ladder_for(quick)

    energy_rows, error_rows = [], []
    if {"energy_trace", "errors", "eoc"} & set(config.outputs):
        tasks = [(method, tuple(degrees), tuple(sizes))
                 for degrees in config.degrees for method in methods for sizes in ladder]
        results = _map(config.jobs, lambda task: execute_run(config, *task, digest, progress), tasks)
        for record, energy, errors in results:
            report.records.append(record)
            energy_rows.extend(energy)
            error_rows.extend(errors)
        report.checks.extend(_run_checks(config, report.records))

    if "eoc" in config.outputs:
        report.eoc = eoc_rows(report.records)
        report.checks.extend(eoc_checks(report.eoc))
        _write_csv(report.eoc, os.path.join(out_dir, "eoc.csv"), report)

    if "equivalence" in config.outputs:
        report.equivalence = equivalence_trials(config.seed, config.equivalence_trials)
        frame = pd.DataFrame(report.equivalence)
        for kind, group in frame.groupby("kind", sort=False):
            worst = float((group["discrepancy"] / group["scale"]).max())
            report.checks.append(Check(f"equivalence {kind}", worst <= EQUIVALENCE_TOLERANCE, worst,
                                       f"<= {EQUIVALENCE_TOLERANCE:g}"))
        _write_csv(frame, os.path.join(out_dir, "equivalence.csv"), report)

    sweep = None
    if "instability_sweep" in config.outputs or "table1_matrix" in config.outputs:
        degrees = config.degrees[0]
        sweep_methods = [m for m in methods if m not in REFERENCE_METHODS] \
            if "table1_matrix" not in config.outputs else list(TABLE1_METHODS)
        sweep = instability_sweep(FIG1, sweep_methods, config.ratios, degrees[0], degrees[1],
                                  QUICK_SWEEP_N_X if quick else SWEEP_N_X, config.fixed_point, progress)
        report.sweep = sweep.to_dict(orient="records")
        report.checks.extend(sweep_checks(sweep))
        _write_csv(sweep, os.path.join(out_dir, "sweep.csv"), report)

    if "table1_matrix" in config.outputs:
        table = table1_matrix(quick, sweep, progress)
        report.table1 = table.to_dict(orient="records")
        report.checks.extend(table1_checks(table))
        _write_csv(table, os.path.join(out_dir, "table1.csv"), report)

    if error_rows:
        _write_csv(error_rows, os.path.join(out_dir, "errors.csv"), report)
    if energy_rows:
        _write_csv(energy_rows, os.path.join(out_dir, "energy.csv"), report)
    _plots(energy_rows, error_rows, out_dir, report)
    report.write(out_dir)
    failed = [check.name for check in report.checks if not check.passed]
    logger.info("%d checks, %d failed", len(report.checks), len(failed))
    return report


def _run_checks(config: ExperimentConfig, records: Sequence[RunRecord]) -> List[Check]:
    """Energy conservation and its raw-derivative negative control on the linear pulse."""
    checks = []
    for record in records:
        label = f"{record.method} p=({record.p_t},{record.p_x}) N=({record.N_t},{record.N_x})"
        if record.status != "ok":
            checks.append(Check(f"run {label}", False, float("nan"), "status ok"))
            continue
        if config.preset_key != FIG1 or record.energy_drift is None:
            continue
        if MethodId(record.method) not in CONSERVATIVE_METHODS:
            continue
        checks.append(Check(f"energy drift {label}", record.energy_drift <= ENERGY_TOLERANCE,
                            record.energy_drift, f"<= {ENERGY_TOLERANCE:g}"))
        if record.raw_energy_drift is not None:
            floor = max(record.energy_drift, np.finfo(float).eps)
            checks.append(Check(f"raw-derivative drift {label}",
                                record.raw_energy_drift >= RAW_DRIFT_FACTOR * floor,
                                record.raw_energy_drift, f">= {RAW_DRIFT_FACTOR:g} x reconstructed drift"))
    return checks
