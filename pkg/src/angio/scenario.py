"""Scenario and sweep-grid configuration.

Scenarios are plain JSON objects.  Validation is strict and runs before any
computation: unknown fields are rejected, and every diagnostic names the
offending field by its dotted path (``scenario.params.alpha``).  A parsed
:class:`Scenario` keeps the normalized configuration dict, so serializing
and reloading round-trips exactly.
"""

from __future__ import annotations

import copy
import itertools
import json
import math
from dataclasses import dataclass
from typing import Any

from .analysis import (
    EquilibriumPoint,
    NoEquilibrium,
    StabilityCriterion,
    StabilityReport,
    asymptotic_attractor_check,
    burton_check,
    equilibrium_for,
    model1_local_stability,
    model2_local_stability,
)
from .dde import HistoryFunction, IntegratorOptions, PositivityMode, Trajectory, integrate
from .errors import AngioError
from .models import (
    DelayKind,
    DelaySpec,
    ModelKind,
    ModelParams,
    TreatmentSchedule,
    constant_rate,
    exp_decay_rate,
    inverse_decay_rate,
    pk_infusion_rate,
)

SWEEP_DEFAULT_HORIZON = 500.0
SWEEP_DEFAULT_HISTORY = {"kind": "equilibrium_offset", "x_scale": 1.1, "K_scale": 1.0}
SWEEP_DEFAULT_CAP = 1_000_000


class ScenarioError(AngioError, ValueError):
    """Configuration rejected; the message names the offending field."""


class _Section:
    """One JSON object level with strict key accounting."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: expected an object")
        self._data = dict(data)
        self.path = path

    def _pop(self, key: str, required: bool, default):
        if key in self._data:
            return self._data.pop(key)
        if required:
            raise ScenarioError(f"{self.path}: missing required field '{key}'")
        return default

    def number(self, key: str, *, required: bool = True, default: float | None = None,
               minimum: float | None = None, exclusive_minimum: float | None = None) -> float | None:
        raw = self._pop(key, required, default)
        if raw is None:
            return None
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(raw):
            raise ScenarioError(f"{self.path}.{key}: expected a finite number, got {raw!r}")
        value = float(raw)
        if minimum is not None and value < minimum:
            raise ScenarioError(f"{self.path}.{key}: must be >= {minimum}, got {value}")
        if exclusive_minimum is not None and value <= exclusive_minimum:
            raise ScenarioError(f"{self.path}.{key}: must be > {exclusive_minimum}, got {value}")
        return value

    def integer(self, key: str, *, required: bool = True, default: int | None = None,
                minimum: int | None = None) -> int | None:
        raw = self._pop(key, required, default)
        if raw is None:
            return None
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ScenarioError(f"{self.path}.{key}: expected an integer, got {raw!r}")
        if minimum is not None and raw < minimum:
            raise ScenarioError(f"{self.path}.{key}: must be >= {minimum}, got {raw}")
        return raw

    def string(self, key: str, *, choices: tuple[str, ...] | None = None,
               required: bool = True, default: str | None = None) -> str | None:
        raw = self._pop(key, required, default)
        if raw is None:
            return None
        if not isinstance(raw, str):
            raise ScenarioError(f"{self.path}.{key}: expected a string, got {raw!r}")
        if choices is not None and raw not in choices:
            raise ScenarioError(
                f"{self.path}.{key}: expected one of {sorted(choices)}, got {raw!r}")
        return raw

    def child(self, key: str, *, required: bool = True, default=None):
        raw = self._pop(key, required, default)
        return raw

    def pair_of_numbers(self, key: str) -> tuple[float, float]:
        raw = self._pop(key, True, None)
        if (not isinstance(raw, list) or len(raw) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw)):
            raise ScenarioError(f"{self.path}.{key}: expected a pair of numbers")
        return float(raw[0]), float(raw[1])

    def finish(self) -> None:
        if self._data:
            unknown = sorted(self._data)[0]
            raise ScenarioError(f"{self.path}: unknown field '{unknown}'")


def _parse_channel(raw: Any, path: str) -> tuple[dict, Any, float]:
    """One treatment channel -> (normalized config, rate function, limit)."""
    sec = _Section(raw, path)
    kind = sec.string("kind", choices=("constant", "exp_decay", "inverse_decay", "pk"))
    if kind == "constant":
        value = sec.number("value", minimum=0.0)
        sec.finish()
        fn, limit = constant_rate(value)
        return {"kind": kind, "value": value}, fn, limit
    if kind in ("exp_decay", "inverse_decay"):
        limit = sec.number("limit", minimum=0.0)
        amplitude = sec.number("amplitude")
        rate = sec.number("rate", exclusive_minimum=0.0)
        sec.finish()
        build = exp_decay_rate if kind == "exp_decay" else inverse_decay_rate
        try:
            fn, lim = build(limit, amplitude, rate)
        except AngioError as exc:
            raise ScenarioError(f"{path}: {exc}") from exc
        return {"kind": kind, "limit": limit, "amplitude": amplitude, "rate": rate}, fn, lim
    infusion = sec.number("infusion", minimum=0.0)
    clearance = sec.number("clearance", exclusive_minimum=0.0)
    initial = sec.number("initial", required=False, default=0.0, minimum=0.0)
    sec.finish()
    fn, lim = pk_infusion_rate(infusion, clearance, initial)
    return {"kind": kind, "infusion": infusion, "clearance": clearance, "initial": initial}, fn, lim


@dataclass
class Scenario:
    """A validated simulation/analysis configuration.

    ``config`` is the normalized dict (defaults filled in); building it back
    with :func:`parse_scenario` yields an identical scenario.
    """

    config: dict
    params: ModelParams
    schedule: TreatmentSchedule
    delay: DelaySpec
    t_span: tuple[float, float]
    options: IntegratorOptions
    stride: int
    treatment_constant: bool

    def to_dict(self) -> dict:
        return copy.deepcopy(self.config)

    def equilibrium(self) -> EquilibriumPoint | NoEquilibrium:
        p0, c0 = self.schedule.declared_limits
        return equilibrium_for(self.params, p0, c0)

    def build_history(self) -> HistoryFunction:
        spec = self.config["history"]
        if spec["kind"] == "constant":
            return HistoryFunction.constant((spec["x"], spec["K"]))
        eq = self.equilibrium()
        if isinstance(eq, NoEquilibrium):
            raise ScenarioError(
                "scenario.history: equilibrium_offset needs a positive "
                f"equilibrium, but {eq.reason}")
        return HistoryFunction.constant(
            (eq.x_star * spec["x_scale"], eq.K_star * spec["K_scale"]))

    def run(self) -> Trajectory:
        return integrate(self.params, self.schedule, self.delay,
                         self.build_history(), self.t_span, self.options)


def parse_scenario(obj: Any, *, require_runnable: bool = True) -> Scenario:
    """Validate a raw JSON object and assemble the runnable pieces.

    With ``require_runnable`` (the default) an equilibrium-relative history
    that lacks an equilibrium is rejected here rather than at run time.
    Sweeps disable that: grid points without an equilibrium are a reportable
    outcome there, not an input mistake.
    """
    root = _Section(obj, "scenario")
    model = root.string("model", choices=("model1", "model2", "model3"))
    kind = ModelKind(model)

    psec = _Section(root.child("params"), "scenario.params")
    alpha = psec.number("alpha", exclusive_minimum=0.0)
    beta = psec.number("beta", exclusive_minimum=0.0)
    gamma = psec.number("gamma", minimum=0.0)
    delta = psec.number("delta", exclusive_minimum=0.0)
    params_cfg = {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta}
    richards_m = None
    if kind is ModelKind.MODEL3:
        richards_m = psec.number("richards_m", exclusive_minimum=0.0)
        if richards_m == 1.0:
            raise ScenarioError(
                "scenario.params.richards_m: must differ from 1 (the Gompertz "
                "limit is model1)")
        params_cfg["richards_m"] = richards_m
    psec.finish()
    try:
        params = ModelParams(kind=kind, alpha=alpha, beta=beta, gamma=gamma,
                             delta=delta, richards_m=richards_m)
    except AngioError as exc:
        raise ScenarioError(f"scenario.params: {exc}") from exc

    tsec = _Section(root.child("treatment"), "scenario.treatment")
    p_cfg, p_fn, p_lim = _parse_channel(tsec.child("p"), "scenario.treatment.p")
    c_cfg, c_fn, c_lim = _parse_channel(tsec.child("c"), "scenario.treatment.c")
    tsec.finish()
    schedule = TreatmentSchedule(p=p_fn, c=c_fn, declared_limits=(p_lim, c_lim))
    treatment_constant = p_cfg["kind"] == "constant" and c_cfg["kind"] == "constant"

    dsec = _Section(root.child("delay"), "scenario.delay")
    dkind = dsec.string("kind", choices=("none", "constant", "varying"))
    if dkind == "none":
        dsec.finish()
        delay = DelaySpec.none()
        delay_cfg: dict = {"kind": "none"}
    elif dkind == "constant":
        tau = dsec.number("tau", exclusive_minimum=0.0)
        dsec.finish()
        delay = DelaySpec.constant(tau)
        delay_cfg = {"kind": "constant", "tau": tau}
    else:
        tau_min = dsec.number("tau_min", exclusive_minimum=0.0)
        tau_max = dsec.number("tau_max", exclusive_minimum=0.0)
        period = dsec.number("period", exclusive_minimum=0.0)
        dsec.finish()
        if tau_max < tau_min:
            raise ScenarioError("scenario.delay: tau_max must be >= tau_min")
        mid = 0.5 * (tau_min + tau_max)
        amp = 0.5 * (tau_max - tau_min)
        omega = 2.0 * math.pi / period

        def lag_fn(t: float, _mid=mid, _amp=amp, _omega=omega) -> float:
            return t - (_mid + _amp * math.sin(_omega * t))

        delay = DelaySpec.varying(lag_fn, tau_min, tau_max)
        delay_cfg = {"kind": "varying", "tau_min": tau_min, "tau_max": tau_max,
                     "period": period}

    hsec = _Section(root.child("history"), "scenario.history")
    hkind = hsec.string("kind", choices=("constant", "equilibrium_offset"))
    if hkind == "constant":
        hx = hsec.number("x", exclusive_minimum=0.0)
        hK = hsec.number("K", exclusive_minimum=0.0)
        hsec.finish()
        history_cfg = {"kind": "constant", "x": hx, "K": hK}
    else:
        x_scale = hsec.number("x_scale", required=False, default=1.0, exclusive_minimum=0.0)
        K_scale = hsec.number("K_scale", required=False, default=1.0, exclusive_minimum=0.0)
        hsec.finish()
        history_cfg = {"kind": "equilibrium_offset", "x_scale": x_scale, "K_scale": K_scale}

    t0, t_end = root.pair_of_numbers("t_span")
    if not t_end > t0:
        raise ScenarioError(f"scenario.t_span: end {t_end} must exceed start {t0}")

    isec = _Section(root.child("integrator", required=False, default={}), "scenario.integrator")
    substeps = isec.integer("substeps_per_delay", required=False, default=64, minimum=4)
    max_step = isec.number("max_step", required=False, exclusive_minimum=0.0)
    fixed_step = isec.number("fixed_step", required=False, exclusive_minimum=0.0)
    mode = isec.string("positivity_mode", choices=("original", "log"),
                       required=False, default="original")
    isec.finish()
    options = IntegratorOptions(
        substeps_per_delay=substeps,
        max_step=math.inf if max_step is None else max_step,
        positivity_mode=PositivityMode(mode),
        fixed_step=fixed_step,
    )
    integrator_cfg = {"substeps_per_delay": substeps, "positivity_mode": mode}
    if max_step is not None:
        integrator_cfg["max_step"] = max_step
    if fixed_step is not None:
        integrator_cfg["fixed_step"] = fixed_step

    osec = _Section(root.child("output", required=False, default={}), "scenario.output")
    stride = osec.integer("stride", required=False, default=1, minimum=1)
    osec.finish()

    root.finish()

    config = {
        "model": model,
        "params": params_cfg,
        "treatment": {"p": p_cfg, "c": c_cfg},
        "delay": delay_cfg,
        "history": history_cfg,
        "t_span": [t0, t_end],
        "integrator": integrator_cfg,
        "output": {"stride": stride},
    }
    scenario = Scenario(
        config=config, params=params, schedule=schedule, delay=delay,
        t_span=(t0, t_end), options=options, stride=stride,
        treatment_constant=treatment_constant,
    )
    if require_runnable:
        # fail fast on a history that cannot be built (missing equilibrium)
        scenario.build_history()
    return scenario


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_scenario(obj)


def stability_report(scenario: Scenario) -> StabilityReport:
    """Pick and run the stability criterion matching a scenario's structure."""
    params = scenario.params
    limits = scenario.schedule.declared_limits
    p0, c0 = limits
    tau = scenario.delay.tau_max
    undelayed = scenario.delay.kind is DelayKind.NONE

    if params.kind is ModelKind.MODEL3:
        raise ScenarioError(
            "scenario.model: no stability criterion covers model3; simulate instead")

    if params.kind is ModelKind.MODEL1:
        if scenario.treatment_constant:
            return model1_local_stability(params, p0, c0)
        return asymptotic_attractor_check(params, scenario.schedule, tau)

    # model2
    if undelayed:
        report = burton_check(params, p0, c0)
        if not scenario.treatment_constant:
            values = dict(report.condition_values)
            values["p_limit"] = p0
            values["c_limit"] = c0
            report = StabilityReport(
                theorem=report.theorem,
                condition_values=values,
                verdict=report.verdict,
                notes=report.notes + ("verdict taken at the declared treatment limits",),
            )
        return report
    if scenario.treatment_constant:
        return model2_local_stability(params, p0, c0, tau)
    return asymptotic_attractor_check(params, scenario.schedule, tau)


# ---------------------------------------------------------------------------
# sweep grids


@dataclass
class SweepGrid:
    base: dict                     # normalized scenario config with sweep defaults
    axes: list[tuple[str, list[float]]]
    cap: int

    @property
    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    def point_configs(self):
        """Yield (axis_values, config) in deterministic grid order.

        Axes iterate in file order with the rightmost axis fastest, like a
        nested loop written in the order the axes were declared.
        """
        value_lists = [values for _, values in self.axes]
        for combo in itertools.product(*value_lists):
            cfg = copy.deepcopy(self.base)
            for (path, _), value in zip(self.axes, combo):
                _set_by_path(cfg, path, value)
            yield combo, cfg


def _set_by_path(cfg: dict, dotted: str, value: float) -> None:
    keys = dotted.split(".")
    node = cfg
    for i, key in enumerate(keys[:-1]):
        if not isinstance(node, dict) or key not in node:
            raise ScenarioError(
                f"sweep.axes: path '{dotted}' does not match the base scenario "
                f"(missing '{'.'.join(keys[: i + 1])}')")
        node = node[key]
    if not isinstance(node, dict):
        raise ScenarioError(f"sweep.axes: path '{dotted}' does not lead into an object")
    node[keys[-1]] = value


def parse_sweep(obj: Any) -> SweepGrid:
    root = _Section(obj, "sweep")
    base_raw = root.child("base")
    if not isinstance(base_raw, dict):
        raise ScenarioError("sweep.base: expected a scenario object")
    base = copy.deepcopy(base_raw)
    base.setdefault("t_span", [0.0, SWEEP_DEFAULT_HORIZON])
    base.setdefault("history", copy.deepcopy(SWEEP_DEFAULT_HISTORY))

    axes_raw = root.child("axes")
    if not isinstance(axes_raw, dict) or not axes_raw:
        raise ScenarioError("sweep.axes: expected a non-empty object of value lists")
    axes: list[tuple[str, list[float]]] = []
    for path, values in axes_raw.items():
        if (not isinstance(values, list) or not values
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values)):
            raise ScenarioError(f"sweep.axes.{path}: expected a non-empty list of numbers")
        axes.append((path, [float(v) for v in values]))

    cap = root.integer("cap", required=False, default=SWEEP_DEFAULT_CAP, minimum=1)
    root.finish()

    grid = SweepGrid(base=base, axes=axes, cap=cap)
    if grid.size > cap:
        raise ScenarioError(
            f"sweep: grid has {grid.size} points, exceeding the cap of {cap}")
    # validate the base once up front so obvious mistakes fail before the
    # sweep; equilibrium existence stays a per-point outcome, not an error
    first = next(grid.point_configs())[1]
    parse_scenario(first, require_runnable=False)
    return grid


def load_sweep(path: str) -> SweepGrid:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_sweep(obj)
