"""Scenario files, the four analysis commands and their on-disk formats.

Scenario files are one JSON document.  Unbounded limits are written as
``null`` (JSON has no infinity) and the frequency grid is either an
explicit list or a ``{"fmin", "fmax", "points", "spacing"}`` spec.
Radians are canonical everywhere; degrees only appear as extra columns.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .harmonic_balance import (BalanceProblem, NoRootFound, check_no_limit_cycle,
                               frequency_response, limits_reached,
                               linear_frequency_response, solve_candidates)
from .model import (SaturationLimits, Scenario,
                    SolverSettings, ValidationError, default_frequency_grid,
                    derive_loop_gains)
from .oscillation_stability import (classify_candidates, open_loop_locus,
                                    select_response, winding_number)
from .time_domain_oracle import (Divergence, NonConvergence, decay_check,
                                 estimate_frequency_response)

__all__ = [
    "SWEEP_COLUMNS", "HEATMAP_LAYERS", "SweepRow", "SweepResult", "HeatmapResult",
    "MethodVerdict", "VerdictReport", "LimitCycleVerdict", "LocusResult",
    "load_scenario", "scenario_from_dict", "scenario_to_dict", "save_scenario",
    "run_sweep", "run_heatmap", "verdict_string_stability", "verdict_limit_cycle",
    "run_locus", "sweep_to_csv", "emit",
]

SWEEP_COLUMNS = ("f_hz", "mag_idf", "phase_idf_rad", "phase_idf_unwrapped", "mag_lin",
                 "phase_lin_rad", "mag_sim", "phase_sim_rad", "B", "stable", "warnings")
DEGREE_COLUMNS = ("phase_idf_deg", "phase_idf_unwrapped_deg", "phase_lin_deg",
                  "phase_sim_deg")
HEATMAP_LAYERS = ("mag_lin", "phase_lin", "mag_idf", "phase_idf",
                  "mag_diff", "phase_diff", "limits_reached")
NA = "NA"
STRING_STABILITY_TOL = 1e-9
DECAY_OFFSETS = (0.1, 1.0, 10.0)
RESIDUAL_FLAG = 0.1


# -- scenario files -----------------------------------------------------------

def _bound(value, default):
    return default if value is None else float(value)


def _finite_or_none(x):
    return None if math.isinf(x) else x


def _require(mapping, key, where):
    if not isinstance(mapping, dict):
        raise ValidationError(where, "must be a JSON object")
    if key not in mapping:
        raise ValidationError(f"{where}.{key}" if where else key, "missing required field")
    return mapping[key]


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"must be a number, got {value!r}")
    return float(value)


def _grid_from(spec, solver):
    if spec is None:
        return default_frequency_grid(fmin=solver.freq_floor_hz)
    if isinstance(spec, list):
        return tuple(_number(f, "freq_grid[]") for f in spec)
    if isinstance(spec, dict):
        allowed = {"fmin", "fmax", "points", "spacing"}
        extra = set(spec) - allowed
        if extra:
            raise ValidationError("freq_grid", f"unknown keys {sorted(extra)}")
        return default_frequency_grid(
            fmin=_number(spec.get("fmin", solver.freq_floor_hz), "freq_grid.fmin"),
            fmax=_number(spec.get("fmax", 0.5), "freq_grid.fmax"),
            points=int(spec.get("points", 50)),
            spacing=spec.get("spacing", "log"))
    raise ValidationError("freq_grid", "must be a list or an object")


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a validated :class:`Scenario` from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "scenario must be a JSON object")
    known = {"gains", "limits", "leader_amplitude", "freq_grid", "solver",
             "standstill_distance", "name", "description"}
    extra = set(doc) - known
    if extra:
        raise ValidationError("<root>", f"unknown keys {sorted(extra)}")

    g = _require(doc, "gains", "")
    gains = derive_loop_gains(_number(_require(g, "k_d", "gains"), "gains.k_d"),
                              _number(_require(g, "k_v", "gains"), "gains.k_v"),
                              _number(_require(g, "tau", "gains"), "gains.tau"))

    lim = doc.get("limits") or {}
    if not isinstance(lim, dict):
        raise ValidationError("limits", "must be a JSON object")
    extra = set(lim) - {"a_min", "a_max", "v_min", "v_max", "v_e"}
    if extra:
        raise ValidationError("limits", f"unknown keys {sorted(extra)}")
    for key, value in lim.items():
        if value is not None:
            _number(value, f"limits.{key}")
    limits = SaturationLimits(
        a_min=_bound(lim.get("a_min"), -math.inf),
        a_max=_bound(lim.get("a_max"), math.inf),
        v_min=_bound(lim.get("v_min"), -math.inf),
        v_max=_bound(lim.get("v_max"), math.inf),
        v_e=_bound(lim.get("v_e"), 0.0))

    solver_doc = doc.get("solver") or {}
    if not isinstance(solver_doc, dict):
        raise ValidationError("solver", "must be a JSON object")
    names = {f.name for f in dataclasses.fields(SolverSettings)}
    extra = set(solver_doc) - names
    if extra:
        raise ValidationError("solver", f"unknown keys {sorted(extra)}")
    solver = SolverSettings(**solver_doc)

    R = _number(_require(doc, "leader_amplitude", ""), "leader_amplitude")
    grid = _grid_from(doc.get("freq_grid"), solver)
    return Scenario(gains, limits, R, grid, solver,
                    _number(doc.get("standstill_distance", 0.0), "standstill_distance"))


def load_scenario(path) -> Scenario:
    """Read and validate a scenario JSON file.

    Raises
    ------
    ValidationError
        On malformed JSON or any broken field rule; ``field`` names the key.
    OSError
        If the file cannot be read.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError("<file>", f"{path}: invalid JSON ({exc})") from exc
    try:
        return scenario_from_dict(doc)
    except TypeError as exc:
        raise ValidationError("<file>", f"{path}: {exc}") from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    """Fully resolved document; feeding it back reproduces the scenario."""
    g, lim = scenario.gains, scenario.limits
    return {
        "gains": {"k_d": g.k_d, "k_v": g.k_v, "tau": g.tau},
        "limits": {"a_min": _finite_or_none(lim.a_min), "a_max": _finite_or_none(lim.a_max),
                   "v_min": _finite_or_none(lim.v_min), "v_max": _finite_or_none(lim.v_max),
                   "v_e": lim.v_e},
        "leader_amplitude": scenario.leader_amplitude,
        "freq_grid": list(scenario.freq_grid),
        "solver": dataclasses.asdict(scenario.solver),
        "standstill_distance": scenario.standstill_distance,
    }


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n",
                          encoding="utf-8")


def _scenario_echo(scenario):
    g = scenario.gains
    return {**scenario_to_dict(scenario),
            "derived": {"k1": g.k1, "k2": g.k2, "k3": g.k3,
                        "vt_min": _finite_or_none(scenario.limits.vt_min),
                        "vt_max": _finite_or_none(scenario.limits.vt_max),
                        "loop": scenario.loop.value}}


# -- one frequency ------------------------------------------------------------

@dataclass
class _Analysis:
    point: object = None
    candidate: object = None
    limits_reached: bool = False
    warnings: list = field(default_factory=list)


def _analyse(scenario, omega, full_sweep=False, R=None):
    """Selected IDF response at one frequency with its warnings."""
    R = scenario.leader_amplitude if R is None else R
    out = _Analysis()
    problem = BalanceProblem(scenario.loop, scenario.gains, scenario.limits, R, omega)
    try:
        candidates = solve_candidates(problem, scenario.solver)
    except NoRootFound as exc:
        out.warnings.append(f"no_root: {exc}")
        return out, problem
    sweep = scenario.omegas if full_sweep else None
    candidates = classify_candidates(candidates, problem, scenario.solver.theta_samples, sweep)
    report = select_response(candidates)
    if report.indeterminate:
        out.warnings.append(f"indeterminate: {len(report.indeterminate)} candidate(s)")
    if report.selected is None:
        out.warnings.append(f"no_stable_solution: {len(candidates)} candidate(s)")
        return out, problem
    if report.ambiguous:
        stable = sum(c.stability.value == "stable" for c in candidates)
        out.warnings.append(f"ambiguous: {stable} stable candidates, smallest B selected")
    out.candidate = report.selected
    out.point = frequency_response(report.selected, problem)
    out.limits_reached = limits_reached(report.selected, problem)
    return out, problem


def _unwrap_from_first(values):
    """Unwrap a phase sequence that may contain NaN gaps, seeded at the first value."""
    values = np.asarray(values, dtype=float)
    out = np.full_like(values, np.nan)
    ok = np.isfinite(values)
    if ok.any():
        out[ok] = np.unwrap(values[ok])
    return out


# -- sweep --------------------------------------------------------------------

@dataclass
class SweepRow:
    f_hz: float
    mag_idf: float | None = None
    phase_idf_rad: float | None = None
    phase_idf_unwrapped: float | None = None
    mag_lin: float | None = None
    phase_lin_rad: float | None = None
    mag_sim: float | None = None
    phase_sim_rad: float | None = None
    B: float | None = None
    stable: str | None = None
    limits_reached: bool | None = None
    warnings: list = field(default_factory=list)


@dataclass
class SweepResult:
    scenario: Scenario
    rows: list
    with_sim: bool = False
    full_sweep: bool = False
    warnings: list = field(default_factory=list)

    @property
    def all_failed(self) -> bool:
        return all(r.mag_idf is None for r in self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.rows], dtype=float)


def run_sweep(scenario: Scenario, with_sim: bool = False,
              full_sweep: bool = False) -> SweepResult:
    """Linear, IDF and (optionally) simulated response on the scenario grid.

    Per-frequency failures are recorded in the row's ``warnings`` and leave
    the affected columns empty; only an unusable scenario raises.
    """
    if scenario.leader_amplitude == 0:
        raise ValidationError(
            "leader_amplitude", "R = 0 has no frequency response; "
            "use 'verdict --limit-cycle' instead")
    rows = []
    for f, w in zip(scenario.freq_grid, scenario.omegas):
        row = SweepRow(f)
        lin = linear_frequency_response(scenario.gains, w)
        row.mag_lin, row.phase_lin_rad = lin.magnitude, lin.phase
        res, _ = _analyse(scenario, w, full_sweep)
        row.warnings += res.warnings
        if res.point is not None:
            row.mag_idf, row.phase_idf_rad = res.point.magnitude, res.point.phase
            row.B = res.candidate.B
            row.stable = res.candidate.stability.value
            row.limits_reached = res.limits_reached
        else:
            row.stable = "none"
        if with_sim:
            try:
                sim, fit = estimate_frequency_response(scenario, w)
                row.mag_sim, row.phase_sim_rad = sim.magnitude, sim.phase
                if fit.residual_fraction > RESIDUAL_FLAG:
                    row.warnings.append(
                        f"sim_harmonics: {fit.residual_fraction:.3f} of energy outside "
                        "the first harmonic")
            except NonConvergence as exc:
                row.warnings.append(f"sim_nonconvergence: {exc}")
            except Divergence as exc:
                row.warnings.append(f"sim_divergence: {exc}")
        rows.append(row)
    unwrapped = _unwrap_from_first([np.nan if r.phase_idf_rad is None else r.phase_idf_rad
                                    for r in rows])
    for r, u in zip(rows, unwrapped):
        r.phase_idf_unwrapped = None if np.isnan(u) else float(u)
    return SweepResult(scenario, rows, with_sim, full_sweep, scenario.warnings())


# -- heatmap ------------------------------------------------------------------

@dataclass
class HeatmapResult:
    """Layers indexed ``[i_ratio, i_freq]``.

    Phase layers are unwrapped along frequency.  Difference layers are
    ``linear - IDF``.  Cells without a stable candidate hold NaN.
    """

    scenario: Scenario
    freqs: np.ndarray
    ratios: np.ndarray
    ratio_basis: str
    layers: dict
    cell_warnings: dict = field(default_factory=dict)


def _ratio_basis(limits):
    if limits.accel_active:
        return "a_bound", limits.a_bound
    if limits.speed_active:
        return "vt_bound", limits.vt_bound
    raise ValidationError("limits", "heatmap needs at least one active saturation")


def run_heatmap(scenario: Scenario, f_range=(0.1, 0.5), ratio_range=(0.0, 8.0),
                resolution=(40, 40), full_sweep: bool = False) -> HeatmapResult:
    """Sensitivity of the response to frequency and leader amplitude.

    ``resolution`` is ``(n_freq, n_ratio)``.  The leader amplitude of each
    row is ``ratio * a_bound`` (``vt_bound`` when acceleration is
    unbounded).  A zero ratio gives the linear response with no limit
    reached.
    """
    nf, nr = resolution
    if nf < 2 or nr < 2:
        raise ValidationError("resolution", "must be at least 2x2")
    if not 0 < f_range[0] < f_range[1]:
        raise ValidationError("f_range", f"need 0 < fmin < fmax, got {f_range}")
    if not 0 <= ratio_range[0] < ratio_range[1]:
        raise ValidationError("ratio_range", f"need 0 <= min < max, got {ratio_range}")
    basis, bound = _ratio_basis(scenario.limits)
    freqs = np.linspace(*f_range, nf)
    ratios = np.linspace(*ratio_range, nr)
    omegas = 2 * np.pi * freqs
    grid_scn = scenario.with_grid(tuple(freqs))

    lin = [linear_frequency_response(scenario.gains, w) for w in omegas]
    lin_mag = np.array([p.magnitude for p in lin])
    lin_phase = _unwrap_from_first([p.phase for p in lin])
    shape = (nr, nf)
    layers = {"mag_lin": np.broadcast_to(lin_mag, shape).copy(),
              "phase_lin": np.broadcast_to(lin_phase, shape).copy(),
              "mag_idf": np.full(shape, np.nan), "phase_idf": np.full(shape, np.nan),
              "limits_reached": np.zeros(shape, dtype=bool)}
    warnings = {}
    for i, ratio in enumerate(ratios):
        R = ratio * bound
        if R == 0:
            layers["mag_idf"][i] = lin_mag
            layers["phase_idf"][i] = lin_phase
            continue
        principal = np.full(nf, np.nan)
        for j, w in enumerate(omegas):
            res, _ = _analyse(grid_scn, w, full_sweep, R=R)
            if res.warnings:
                warnings[(i, j)] = res.warnings
            if res.point is None:
                continue
            layers["mag_idf"][i, j] = res.point.magnitude
            principal[j] = res.point.phase
            layers["limits_reached"][i, j] = res.limits_reached
        unwrapped = _unwrap_from_first(principal)
        # seed the unwrapped branch on the linear one at the lowest valid frequency
        ok = np.flatnonzero(np.isfinite(unwrapped))
        if ok.size:
            k = ok[0]
            unwrapped += 2 * np.pi * np.round((lin_phase[k] - unwrapped[k]) / (2 * np.pi))
        layers["phase_idf"][i] = unwrapped
    layers["mag_diff"] = layers["mag_lin"] - layers["mag_idf"]
    layers["phase_diff"] = layers["phase_lin"] - layers["phase_idf"]
    return HeatmapResult(scenario, freqs, ratios, basis, layers, warnings)


# -- verdicts -----------------------------------------------------------------

@dataclass
class MethodVerdict:
    method: str
    max_magnitude: float
    argmax_f_hz: float
    string_stable: bool
    missing_rows: int = 0


@dataclass
class VerdictReport:
    linear: MethodVerdict
    idf: MethodVerdict | None
    sweep: SweepResult
    active_limits: list
    sim: MethodVerdict | None = None


def _method_verdict(name, freqs, mags, missing=0):
    mags = np.asarray(mags, dtype=float)
    ok = np.isfinite(mags)
    if not ok.any():
        return None
    k = int(np.nanargmax(np.where(ok, mags, -np.inf)))
    peak = float(mags[k])
    return MethodVerdict(name, peak, float(freqs[k]),
                         peak <= 1.0 + STRING_STABILITY_TOL, missing)


def _active_limits(limits):
    out = []
    if limits.accel_active:
        out.append("acceleration")
    if limits.speed_active:
        out.append("speed")
    return out


def verdict_string_stability(scenario: Scenario, with_sim: bool = False,
                             full_sweep: bool = False) -> VerdictReport:
    """Peak ``|F|`` over the grid and the string-stability call per method."""
    sweep = run_sweep(scenario, with_sim, full_sweep)
    freqs = np.array(scenario.freq_grid)
    mag_idf = sweep.column("mag_idf")
    report = VerdictReport(
        _method_verdict("linear", freqs, sweep.column("mag_lin")),
        _method_verdict("idf", freqs, mag_idf, int(np.isnan(mag_idf).sum())),
        sweep, _active_limits(scenario.limits))
    if with_sim:
        mag_sim = sweep.column("mag_sim")
        report.sim = _method_verdict("simulation", freqs, mag_sim,
                                     int(np.isnan(mag_sim).sum()))
    return report


@dataclass
class LimitCycleVerdict:
    balance: object
    decays: list

    @property
    def passed(self) -> bool:
        return self.balance.no_limit_cycle and all(d.passed for d in self.decays)


def verdict_limit_cycle(scenario: Scenario, offsets=DECAY_OFFSETS) -> LimitCycleVerdict:
    """Zero-input checks: no balance root and decay from position offsets."""
    still = scenario.with_amplitude(0.0)
    balance = check_no_limit_cycle(still.gains, still.limits, still.omegas, still.solver)
    decays = [decay_check(still, x) for x in offsets]
    return LimitCycleVerdict(balance, decays)


# -- locus --------------------------------------------------------------------

@dataclass
class LocusResult:
    f_hz: float
    theta: np.ndarray
    values: np.ndarray
    winding: float
    stability: str
    B: float


def run_locus(scenario: Scenario, f_hz: float, theta_samples: int | None = None) -> LocusResult:
    """Open-loop incremental locus of the selected candidate at ``f_hz``.

    The exported curve repeats its first point at theta = 2*pi so it closes.
    """
    omega = 2 * math.pi * f_hz
    res, problem = _analyse(scenario, omega)
    if res.candidate is None:
        raise NoRootFound("; ".join(res.warnings) or "no candidate selected")
    n = theta_samples or scenario.solver.theta_samples
    pts = open_loop_locus(res.candidate, problem, n, endpoint=True)
    values = np.array([p.value for p in pts])
    return LocusResult(f_hz, np.array([p.theta for p in pts]), values,
                       winding_number(values[:-1]), res.candidate.stability.value,
                       res.candidate.B)


# -- emission -----------------------------------------------------------------

def _fmt(x):
    if x is None:
        return NA
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return NA
    return f"{x:.9g}"


def _deg(x):
    return None if x is None else math.degrees(x)


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def sweep_to_csv(result: SweepResult, degrees: bool = False) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(SWEEP_COLUMNS + (DEGREE_COLUMNS if degrees else ()))
    for r in result.rows:
        cells = [r.f_hz, r.mag_idf, r.phase_idf_rad, r.phase_idf_unwrapped, r.mag_lin,
                 r.phase_lin_rad, r.mag_sim, r.phase_sim_rad, r.B, r.stable,
                 "; ".join(r.warnings)]
        if degrees:
            cells += [_deg(r.phase_idf_rad), _deg(r.phase_idf_unwrapped),
                      _deg(r.phase_lin_rad), _deg(r.phase_sim_rad)]
        w.writerow([_fmt(c) for c in cells])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _meta(scenario, warnings=(), **extra):
    return {"tool": "satfr", "version": __version__,
            "scenario": _scenario_echo(scenario),
            "warnings": list(warnings), **extra}


def _dump(path, doc):
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"
    return _write(path, text)


def _write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _sweep_json(result):
    rows = [{**dataclasses.asdict(r)} for r in result.rows]
    return {**_meta(result.scenario, result.warnings, with_sim=result.with_sim,
                    full_sweep=result.full_sweep), "columns": list(SWEEP_COLUMNS),
            "rows": rows}


def _layer_csv(result, name):
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["ratio"] + [_fmt(f) for f in result.freqs])
    for ratio, row in zip(result.ratios, result.layers[name]):
        w.writerow([_fmt(ratio)] + [_fmt(v) for v in row])
    return buf.getvalue()


def _verdict_json(report: VerdictReport):
    doc = _meta(report.sweep.scenario, report.sweep.warnings,
                active_limits=report.active_limits)
    for key in ("linear", "idf", "sim"):
        v = getattr(report, key)
        doc[key] = None if v is None else dataclasses.asdict(v)
    doc["rows"] = [dataclasses.asdict(r) for r in report.sweep.rows]
    return doc


def _limit_cycle_json(scenario, report: LimitCycleVerdict):
    b = report.balance
    return {**_meta(scenario), "passed": report.passed,
            "balance": {"loop": b.loop.value, "b_max": b.b_max,
                        "min_g_over_B": b.min_g_over_B, "roots": b.roots,
                        "no_limit_cycle": b.no_limit_cycle},
            "decay": [dataclasses.asdict(d) for d in report.decays]}


def _locus_csv(result: LocusResult):
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["theta", "re", "im"])
    for th, z in zip(result.theta, result.values):
        w.writerow([_fmt(th), _fmt(z.real), _fmt(z.imag)])
    return buf.getvalue()


def emit(result, fmt: str, out_dir, stem: str = "result", degrees: bool = False,
         scenario: Scenario | None = None) -> list[Path]:
    """Write ``result`` under ``out_dir`` and return the paths written.

    Sweeps and loci become one CSV or one JSON file; heatmaps always write
    one CSV per layer plus ``<stem>_index.json``; verdicts are JSON only.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    if isinstance(result, SweepResult):
        if fmt == "csv":
            return [_write(out_dir / f"{stem}.csv", sweep_to_csv(result, degrees))]
        return [_dump(out_dir / f"{stem}.json", _sweep_json(result))]
    if isinstance(result, HeatmapResult):
        paths = []
        files = {}
        for name in HEATMAP_LAYERS:
            p = _write(out_dir / f"{stem}_{name}.csv", _layer_csv(result, name))
            paths.append(p)
            files[name] = p.name
        index = {**_meta(result.scenario, result.scenario.warnings()),
                 "ratio_basis": result.ratio_basis,
                 "freqs_hz": result.freqs.tolist(), "ratios": result.ratios.tolist(),
                 "layers": files,
                 "layout": "rows are ratios, columns are frequencies",
                 "cell_warnings": [{"ratio": float(result.ratios[i]),
                                    "f_hz": float(result.freqs[j]), "warnings": w}
                                   for (i, j), w in sorted(result.cell_warnings.items())]}
        paths.append(_dump(out_dir / f"{stem}_index.json", index))
        return paths
    if isinstance(result, VerdictReport):
        return [_dump(out_dir / f"{stem}.json", _verdict_json(result))]
    if isinstance(result, LimitCycleVerdict):
        if scenario is None:
            raise ValueError("limit-cycle verdicts need the scenario for metadata")
        return [_dump(out_dir / f"{stem}.json", _limit_cycle_json(scenario, result))]
    if isinstance(result, LocusResult):
        if fmt == "csv":
            return [_write(out_dir / f"{stem}.csv", _locus_csv(result))]
        doc = {"f_hz": result.f_hz, "B": result.B, "stability": result.stability,
               "winding": result.winding, "theta": result.theta.tolist(),
               "re": result.values.real.tolist(), "im": result.values.imag.tolist()}
        if scenario is not None:
            doc = {**_meta(scenario), **doc}
        return [_dump(out_dir / f"{stem}.json", doc)]
    raise TypeError(f"cannot emit {type(result).__name__}")
