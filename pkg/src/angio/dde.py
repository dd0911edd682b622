"""Fixed-step method-of-steps integrator for retarded systems.

The solver marches classical fourth-order Runge-Kutta steps whose size never
exceeds the minimal lag tau_min.  Every lagged lookup therefore lands in the
history function or in a mesh segment that was finalized on an earlier step,
which is what makes the method of steps well defined without iteration.
Dense output between mesh knots is the cubic Hermite interpolant built from
the stored endpoint values and endpoint derivatives, so the interpolation
error matches the O(h^4) accuracy of the stepper.

Undelayed problems (``DelaySpec.none()``) integrate with a single global
fixed step; scalar test problems ride through the same machinery with
state dimension 1.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DivergenceFault,
    DomainError,
    ParameterError,
    PositivityFault,
    RangeError,
)
from .models import (
    DelayKind,
    DelaySpec,
    ModelParams,
    State,
    TreatmentSchedule,
    growth_rates,
    log_growth_rates,
)

Vector = tuple[float, ...]
RHS = Callable[[float, Vector, Vector], Vector]

# slack applied to domain-boundary comparisons, relative to the time scale
_EDGE_TOL = 1e-9


class PositivityMode(str, Enum):
    ORIGINAL = "original"  # integrate (x, K); halt on leaving the positive cone
    LOG = "log"            # integrate (ln x, ln K); positivity is structural


@dataclass(frozen=True)
class HistoryFunction:
    """Initial data phi on the lookback interval [t0 - tau_max, t0].

    ``values`` maps a time to the state tuple.  phi may touch zero inside the
    interval, but phi(t0) - the initial point of the integration - must be
    strictly positive componentwise for the growth models.
    """

    values: Callable[[float], Vector]

    @classmethod
    def constant(cls, state: Sequence[float] | State) -> "HistoryFunction":
        if isinstance(state, State):
            state = state.as_tuple()
        frozen = tuple(float(c) for c in state)
        return cls(values=lambda t: frozen)

    @classmethod
    def from_callable(cls, fn: Callable[[float], Sequence[float]]) -> "HistoryFunction":
        return cls(values=lambda t: tuple(float(c) for c in fn(t)))

    def __call__(self, t: float) -> Vector:
        return self.values(t)


@dataclass(frozen=True)
class IntegratorOptions:
    """Stepping controls.

    substeps_per_delay : steps per window of length tau_min (>= 4)
    max_step           : upper bound on the step size
    positivity_mode    : coordinate choice for the growth models
    fixed_step         : exact global step override; delayed problems clip it
                         to tau_min so lagged lookups stay finalized
    """

    substeps_per_delay: int = 64
    max_step: float = math.inf
    positivity_mode: PositivityMode = PositivityMode.ORIGINAL
    fixed_step: float | None = None

    def __post_init__(self):
        if self.substeps_per_delay < 4:
            raise ParameterError(
                f"substeps_per_delay must be at least 4, got {self.substeps_per_delay}"
            )
        if not self.max_step > 0.0:
            raise ParameterError(f"max_step must be positive, got {self.max_step}")
        if self.fixed_step is not None and not self.fixed_step > 0.0:
            raise ParameterError(f"fixed_step must be positive, got {self.fixed_step}")


def _hermite(tl: float, tr: float, yl: Vector, yr: Vector,
             fl: Vector, fr: Vector, t: float) -> Vector:
    # cubic Hermite on [tl, tr]; exact at both knots by construction
    h = tr - tl
    s = (t - tl) / h
    r = 1.0 - s
    h00 = (1.0 + 2.0 * s) * r * r
    h10 = s * r * r
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return tuple(
        h00 * yl[i] + h10 * h * fl[i] + h01 * yr[i] + h11 * h * fr[i]
        for i in range(len(yl))
    )


@dataclass
class Trajectory:
    """Piecewise-cubic numerical solution over [t0 - tau_max, t_end].

    ``times`` is the strictly increasing step mesh starting at t0; ``states``
    and ``derivs`` hold the stepper's endpoint values and right-hand sides at
    each knot.  Queries at t <= t0 defer to the attached history function.
    ``coords`` records the integration coordinates ("original" or "log");
    :func:`eval_trajectory` always reports original coordinates.
    """

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    history: HistoryFunction
    lookback: float              # tau_max; 0 for undelayed problems
    coords: str = "original"

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def eval_raw(self, t: float) -> Vector:
        """Interpolated state at t, in the integration coordinates."""
        span = max(1.0, abs(self.t_end - self.t0))
        if t < self.t0 - self.lookback - _EDGE_TOL * span or t > self.t_end + _EDGE_TOL * span:
            raise RangeError(
                f"t={t} outside trajectory domain "
                f"[{self.t0 - self.lookback}, {self.t_end}]"
            )
        if t <= self.t0:
            return self.history(max(t, self.t0 - self.lookback))
        times = self.times
        i = int(np.searchsorted(times, t, side="right")) - 1
        if i >= len(times) - 1:
            return tuple(float(c) for c in self.states[-1])
        if times[i] == t:
            return tuple(float(c) for c in self.states[i])
        return _hermite(
            float(times[i]), float(times[i + 1]),
            tuple(float(c) for c in self.states[i]),
            tuple(float(c) for c in self.states[i + 1]),
            tuple(float(c) for c in self.derivs[i]),
            tuple(float(c) for c in self.derivs[i + 1]),
            t,
        )

    def eval(self, t: float) -> Vector:
        """Interpolated state at t, in original coordinates."""
        raw = self.eval_raw(t)
        if self.coords == "log":
            return tuple(math.exp(c) for c in raw)
        return raw

    def states_original(self) -> np.ndarray:
        """Knot states mapped back to original coordinates."""
        if self.coords == "log":
            return np.exp(self.states)
        return self.states


def eval_trajectory(traj: Trajectory, t: float) -> Vector:
    """State at time t in original coordinates (history times included)."""
    return traj.eval(t)


def solve_dde(rhs: RHS, history: HistoryFunction, delay: DelaySpec,
              t_span: tuple[float, float], options: IntegratorOptions | None = None,
              *, positive_cone: bool = False, coords: str = "original") -> Trajectory:
    """Integrate y'(t) = rhs(t, y(t), y(h(t))) over t_span by the method of steps.

    ``rhs`` receives the lagged state as its third argument; for undelayed
    problems that argument is simply the current state.  With
    ``positive_cone=True`` the solver halts with :class:`PositivityFault` as
    soon as a completed step leaves the open positive cone (math domain
    errors inside a stage are treated the same way).  Nonfinite states raise
    :class:`DivergenceFault`.  Both faults carry the partial trajectory.
    """
    opts = options or IntegratorOptions()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ParameterError(f"need t_end > t0, got span [{t0}, {t_end}]")

    span = t_end - t0
    if delay.kind is DelayKind.NONE:
        h = opts.fixed_step if opts.fixed_step is not None else min(opts.max_step, span / 1000.0)
        h = min(h, span)
    else:
        # divide each lag window into equal substeps; max_step/fixed_step can
        # only refine, never widen past tau_min
        target = delay.tau_min / opts.substeps_per_delay
        target = min(target, opts.max_step)
        if opts.fixed_step is not None:
            target = min(opts.fixed_step, delay.tau_min)
        n_sub = max(opts.substeps_per_delay, math.ceil(delay.tau_min / target - 1e-12))
        h = delay.tau_min / n_sub

    y0 = tuple(float(c) for c in history(t0))
    dim = len(y0)
    if positive_cone and any(c <= 0.0 for c in y0):
        raise ParameterError(f"initial state must be strictly positive, got {y0}")

    times: list[float] = [t0]
    states: list[Vector] = [y0]
    derivs: list[Vector] = []

    def finalize() -> Trajectory | None:
        # a fault on the very first rhs evaluation leaves no usable segment
        n = min(len(times), len(derivs))
        if n == 0:
            return None
        return Trajectory(
            times=np.asarray(times[:n], dtype=float),
            states=np.asarray(states[:n], dtype=float),
            derivs=np.asarray(derivs[:n], dtype=float),
            history=history,
            lookback=delay.tau_max,
            coords=coords,
        )

    def lagged(s: float) -> Vector:
        # s never exceeds the finalized frontier: the step size is <= tau_min
        if s <= t0:
            return history(s)
        i = bisect_right(times, s) - 1
        if i >= len(times) - 1:
            return states[-1]
        if times[i] == s:
            return states[i]
        return _hermite(times[i], times[i + 1], states[i], states[i + 1],
                        derivs[i], derivs[i + 1], s)

    if delay.kind is DelayKind.NONE:
        def field_at(t: float, y: Vector) -> Vector:
            return rhs(t, y, y)
    else:
        delayed_time = delay.delayed_time

        def field_at(t: float, y: Vector) -> Vector:
            return rhs(t, y, lagged(delayed_time(t)))

    def checked_field(t: float, y: Vector) -> Vector:
        try:
            return field_at(t, y)
        except OverflowError:
            raise DivergenceFault(
                f"state overflowed during evaluation at t={t}", time=t,
                trajectory=finalize()) from None
        except (ValueError, ZeroDivisionError):
            if positive_cone:
                raise PositivityFault(
                    f"state left the positive cone near t={t}", time=t,
                    trajectory=finalize()) from None
            raise DivergenceFault(
                f"right-hand side undefined at t={t}", time=t,
                trajectory=finalize()) from None

    fuzz = _EDGE_TOL * max(1.0, abs(t_end))
    if delay.kind is DelayKind.BOUNDED_VARYING:
        lag0 = t0 - delay.delayed_time(t0)
        if not (delay.tau_min - fuzz <= lag0 <= delay.tau_max + fuzz):
            raise ParameterError(
                f"lag function gives t-h(t)={lag0} at t={t0}, outside "
                f"[{delay.tau_min}, {delay.tau_max}]"
            )

    f = checked_field(t0, y0)
    derivs.append(f)

    k = 0
    t = t0
    y = y0
    rng = range(dim)
    while t < t_end - fuzz:
        k += 1
        t_next = t0 + k * h
        if t_next > t_end:
            t_next = t_end
        hk = t_next - t
        half = 0.5 * hk

        if delay.kind is DelayKind.BOUNDED_VARYING:
            lag = t_next - delay.delayed_time(t_next)
            if not (delay.tau_min - fuzz <= lag <= delay.tau_max + fuzz):
                raise ParameterError(
                    f"lag function gives t-h(t)={lag} at t={t_next}, outside "
                    f"[{delay.tau_min}, {delay.tau_max}]"
                )

        k1 = f
        k2 = checked_field(t + half, tuple(y[i] + half * k1[i] for i in rng))
        k3 = checked_field(t + half, tuple(y[i] + half * k2[i] for i in rng))
        k4 = checked_field(t_next, tuple(y[i] + hk * k3[i] for i in rng))
        sixth = hk / 6.0
        y_next = tuple(
            y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in rng
        )

        for c in y_next:
            if not math.isfinite(c):
                raise DivergenceFault(
                    f"state became nonfinite at t={t_next}", time=t_next,
                    trajectory=finalize())
        if positive_cone and any(c <= 0.0 for c in y_next):
            raise PositivityFault(
                f"state left the positive cone at t={t_next}", time=t_next,
                trajectory=finalize())

        f_next = checked_field(t_next, y_next)
        times.append(t_next)
        states.append(y_next)
        derivs.append(f_next)
        t, y, f = t_next, y_next, f_next

    return finalize()


def integrate(params: ModelParams, schedule: TreatmentSchedule, delay: DelaySpec,
              history: HistoryFunction, t_span: tuple[float, float],
              options: IntegratorOptions | None = None) -> Trajectory:
    """Simulate one growth model; returns a dense :class:`Trajectory`.

    In ``PositivityMode.ORIGINAL`` the (x, K) system is integrated directly
    and leaving the open positive cone is a fault.  In ``PositivityMode.LOG``
    the logarithmic system is integrated instead, so iterates are positive by
    construction; the returned trajectory still evaluates in original
    coordinates.
    """
    opts = options or IntegratorOptions()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ParameterError(f"need t_end > t0, got span [{t0}, {t_end}]")

    y0 = history(t0)
    if len(y0) != 2:
        raise ParameterError(f"growth-model history must be 2-dimensional, got {len(y0)}")
    if not (y0[0] > 0.0 and y0[1] > 0.0):
        raise ParameterError(f"history at t0 must be strictly positive, got {y0}")
    if delay.kind is not DelayKind.NONE:
        for i in range(17):
            s = t0 - delay.tau_max * i / 16.0
            vals = history(s)
            if any(c < 0.0 for c in vals):
                raise ParameterError(f"history must be nonnegative, got {vals} at t={s}")
    schedule.spot_check_nonnegative(t0, t_end)

    if opts.positivity_mode is PositivityMode.LOG:
        rates = log_growth_rates(params, schedule)

        def rhs(t: float, y: Vector, ylag: Vector) -> Vector:
            return rates(t, y[0], y[1], ylag[0])

        base = history

        def log_values(t: float) -> Vector:
            vals = base(t)
            return tuple(math.log(c) if c > 0.0 else -math.inf for c in vals)

        log_history = HistoryFunction(values=log_values)
        return solve_dde(rhs, log_history, delay, (t0, t_end), opts,
                         positive_cone=False, coords="log")

    rates = growth_rates(params, schedule)

    def rhs(t: float, y: Vector, ylag: Vector) -> Vector:
        return rates(t, y[0], y[1], ylag[0])

    return solve_dde(rhs, history, delay, (t0, t_end), opts,
                     positive_cone=True, coords="original")


def convergence_metric(traj: Trajectory, equilibrium, tail_fraction: float = 0.1) -> float:
    """Sup over the trailing window of the relative max-norm deviation.

    ``equilibrium`` is an object with positive ``x_star``/``K_star``
    attributes, or any sequence of nonzero reference components matching the
    trajectory dimension.  The window is the final ``tail_fraction`` of
    [t0, t_end]; the window's left edge is sampled exactly, then every mesh
    knot inside it.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ParameterError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    if hasattr(equilibrium, "x_star"):
        ref = (float(equilibrium.x_star), float(equilibrium.K_star))
    else:
        ref = tuple(float(c) for c in equilibrium)
    if len(ref) != traj.dim:
        raise ParameterError(
            f"reference has {len(ref)} components, trajectory has {traj.dim}")
    if any(r == 0.0 for r in ref):
        raise ParameterError("reference components must be nonzero")

    t_tail = traj.t_end - tail_fraction * (traj.t_end - traj.t0)
    worst = 0.0
    vals = traj.eval(t_tail)
    for i, r in enumerate(ref):
        worst = max(worst, abs(float(vals[i]) - r) / abs(r))
    sample = traj.states_original()[traj.times >= t_tail]
    for i, r in enumerate(ref):
        dev = float(np.max(np.abs(sample[:, i] - r))) / abs(r)
        worst = max(worst, dev)
    return worst
