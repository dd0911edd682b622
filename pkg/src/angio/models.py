"""Tumor growth under angiogenic control, with delayed vascular stimulation.

Three closely related planar models of a tumor volume x(t) coupled to its
effective carrying capacity K(t) (the vascular support).  All three share the
capacity equation ingredients: stimulation by the (possibly lagged) tumor,
spontaneous loss, inhibition scaling with the tumor surface x^(2/3), and an
anti-angiogenic drug acting on K.  They differ in the growth law and in what
the stimulation is proportional to:

* model1: Gompertz growth, stimulation proportional to the lagged tumor size.
* model2: Gompertz growth, stimulation proportional to the capacity itself.
* model3: Richards (generalized logistic) growth with exponent m, capacity
  equation as in model1.

Treatment enters through two nonnegative rate functions: p(t) kills tumor
cells directly, c(t) suppresses the vasculature.  The lag is described by a
``DelaySpec``: the delayed argument h(t) satisfies t - h(t) in
[tau_min, tau_max] with tau_min > 0 (or h(t) = t for the undelayed kind).

The module also provides the change to logarithmic deviation coordinates
u = ln(x/x*), v = ln(K/K*) about a positive equilibrium (x*, K*), the
second-order scalar reduction of model2, and the one-compartment
pharmacokinetic concentration solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable

from scipy.integrate import quad

from .errors import DomainError, ParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .analysis import EquilibriumPoint

RateFunction = Callable[[float], float]

_TWO_THIRDS = 2.0 / 3.0


class ModelKind(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"
    MODEL3 = "model3"


def _surface(x: float) -> float:
    # x^(2/3), extended continuously by 0 at x = 0 so lagged lookups into a
    # history that touches zero stay well defined.
    if x <= 0.0:
        return 0.0
    return math.pow(x, _TWO_THIRDS)


@dataclass(frozen=True)
class ModelParams:
    """Rate constants of one model variant.

    alpha       tumor growth rate (> 0)
    beta        vascular stimulation coefficient (> 0)
    gamma       spontaneous vascular loss rate (>= 0)
    delta       inhibition coefficient on the x^(2/3) term (> 0)
    richards_m  growth exponent, required for MODEL3 only (> 0, != 1)
    """

    kind: ModelKind
    alpha: float
    beta: float
    gamma: float
    delta: float
    richards_m: float | None = None

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ParameterError(f"gamma must be nonnegative, got {self.gamma}")
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if self.kind is ModelKind.MODEL3:
            m = self.richards_m
            if m is None or not math.isfinite(m) or m <= 0.0 or m == 1.0:
                raise ParameterError(
                    "model3 requires a Richards exponent richards_m > 0, != 1"
                )
        elif self.richards_m is not None:
            raise ParameterError("richards_m only applies to model3")


@dataclass(frozen=True)
class State:
    """Point of the (x, K) phase plane; both components are positive along
    any admissible trajectory in original coordinates."""

    x: float
    K: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.K)


def _check_current(state: State) -> None:
    if not (state.x > 0.0 and state.K > 0.0):
        raise DomainError(
            f"state must be strictly positive, got x={state.x}, K={state.K}"
        )


def _check_delayed(delayed_x: float) -> None:
    if not (delayed_x >= 0.0 and math.isfinite(delayed_x)):
        raise DomainError(f"delayed x must be finite and nonnegative, got {delayed_x}")


# ---------------------------------------------------------------------------
# treatment schedules


@dataclass(frozen=True)
class TreatmentSchedule:
    """Pair of treatment rate functions.

    p : tumor kill rate, t -> p(t) >= 0
    c : vascular suppression rate, t -> c(t) >= 0
    declared_limits : (p0, c0) the rates converge to, when known.  Stability
        checks of time-varying treatments are run at these limits.
    """

    p: RateFunction
    c: RateFunction
    declared_limits: tuple[float, float] | None = None

    @classmethod
    def constant(cls, p0: float, c0: float) -> "TreatmentSchedule":
        if p0 < 0.0 or c0 < 0.0:
            raise ParameterError("treatment rates must be nonnegative")
        return cls(p=lambda t: p0, c=lambda t: c0, declared_limits=(p0, c0))

    def is_constant(self) -> bool:
        lim = self.declared_limits
        if lim is None:
            return False
        # cheap structural probe: constant schedules return their limits
        return self.p(0.0) == lim[0] == self.p(1.0) and self.c(0.0) == lim[1] == self.c(1.0)

    def spot_check_nonnegative(self, t0: float, t_end: float, samples: int = 33) -> None:
        """Raise if p or c is negative at any of ``samples`` probe times."""
        for i in range(samples):
            t = t0 + (t_end - t0) * i / (samples - 1)
            if self.p(t) < 0.0:
                raise ParameterError(f"treatment rate p({t}) = {self.p(t)} is negative")
            if self.c(t) < 0.0:
                raise ParameterError(f"treatment rate c({t}) = {self.c(t)} is negative")


def constant_rate(value: float) -> tuple[RateFunction, float]:
    """Constant rate; returns (function, limit)."""
    if value < 0.0:
        raise ParameterError(f"rate must be nonnegative, got {value}")
    return (lambda t: value), value


def exp_decay_rate(limit: float, amplitude: float, rate: float) -> tuple[RateFunction, float]:
    """limit + amplitude * exp(-rate * t); returns (function, limit)."""
    if rate <= 0.0:
        raise ParameterError(f"decay rate must be positive, got {rate}")
    if limit < 0.0 or limit + amplitude < 0.0:
        # monotone between t=0 value and the limit, so checking both suffices
        raise ParameterError("rate function would go negative")
    return (lambda t: limit + amplitude * math.exp(-rate * t)), limit


def inverse_decay_rate(limit: float, amplitude: float, rate: float) -> tuple[RateFunction, float]:
    """limit + amplitude / (1 + rate * t); returns (function, limit)."""
    if rate <= 0.0:
        raise ParameterError(f"decay rate must be positive, got {rate}")
    if limit < 0.0 or limit + amplitude < 0.0:
        raise ParameterError("rate function would go negative")
    return (lambda t: limit + amplitude / (1.0 + rate * t)), limit


def pk_infusion_rate(infusion: float, clearance: float, initial: float = 0.0) -> tuple[RateFunction, float]:
    """Drug concentration under constant infusion, as a closed form.

    Solves dc/dt = infusion - clearance * c, c(0) = initial, giving
    c(t) = c_inf + (initial - c_inf) * exp(-clearance * t) with the plateau
    c_inf = infusion / clearance.  Returns (function, plateau).
    """
    if clearance <= 0.0:
        raise ParameterError(f"clearance must be positive, got {clearance}")
    if infusion < 0.0 or initial < 0.0:
        raise ParameterError("infusion and initial concentration must be nonnegative")
    plateau = infusion / clearance
    gap = initial - plateau
    return (lambda t: plateau + gap * math.exp(-clearance * t)), plateau


def pk_concentration(v: RateFunction, q: float, c0: float, t: float, t0: float = 0.0) -> float:
    """Concentration at time t under dc/dt = v(t) - q c, c(t0) = c0.

    Parameters
    ----------
    v : administration rate function, v(t) >= 0
    q : clearance rate, > 0
    c0 : initial concentration, >= 0
    t : query time, >= t0

    Uses the integrating-factor form c(t) = c0 e^{-q (t-t0)} +
    int_{t0}^{t} e^{-q (t-s)} v(s) ds with adaptive quadrature for the
    convolution integral, so v only needs to be piecewise continuous.
    """
    if q <= 0.0:
        raise ParameterError(f"clearance rate q must be positive, got {q}")
    if c0 < 0.0:
        raise ParameterError(f"initial concentration must be nonnegative, got {c0}")
    if t < t0:
        raise DomainError(f"query time {t} lies before the initial time {t0}")
    if t == t0:
        return c0
    decayed = c0 * math.exp(-q * (t - t0))
    absorbed, _ = quad(lambda s: math.exp(-q * (t - s)) * v(s), t0, t, limit=200)
    return decayed + absorbed


# ---------------------------------------------------------------------------
# delay specification


class DelayKind(str, Enum):
    NONE = "none"
    CONSTANT_LAG = "constant"
    BOUNDED_VARYING = "varying"


@dataclass(frozen=True)
class DelaySpec:
    """Delayed-argument description.

    ``delayed_time(t)`` returns h(t), the time at which the lagged state is
    read.  The lag t - h(t) stays within [tau_min, tau_max]; vanishing lags
    are rejected for the delayed kinds because the stepping scheme relies on
    tau_min > 0 to keep lagged lookups inside finalized mesh segments.
    """

    kind: DelayKind
    tau_min: float
    tau_max: float
    lag_fn: Callable[[float], float] | None = None  # h(t), BOUNDED_VARYING only

    @classmethod
    def none(cls) -> "DelaySpec":
        return cls(kind=DelayKind.NONE, tau_min=0.0, tau_max=0.0)

    @classmethod
    def constant(cls, tau: float) -> "DelaySpec":
        if not (tau > 0.0 and math.isfinite(tau)):
            raise ParameterError(
                f"constant lag must be positive, got {tau}; use DelaySpec.none() "
                "for the undelayed problem"
            )
        return cls(kind=DelayKind.CONSTANT_LAG, tau_min=tau, tau_max=tau)

    @classmethod
    def varying(cls, lag_fn: Callable[[float], float], tau_min: float, tau_max: float) -> "DelaySpec":
        if not (0.0 < tau_min <= tau_max) or not math.isfinite(tau_max):
            raise ParameterError(
                f"need 0 < tau_min <= tau_max < inf, got [{tau_min}, {tau_max}]"
            )
        return cls(kind=DelayKind.BOUNDED_VARYING, tau_min=tau_min, tau_max=tau_max, lag_fn=lag_fn)

    def delayed_time(self, t: float) -> float:
        if self.kind is DelayKind.NONE:
            return t
        if self.kind is DelayKind.CONSTANT_LAG:
            return t - self.tau_min
        return self.lag_fn(t)


# ---------------------------------------------------------------------------
# right-hand sides, original coordinates


def rhs_model1(t: float, current: State, delayed_x: float, params: ModelParams,
               sched: TreatmentSchedule) -> tuple[float, float]:
    """Time derivative (dx/dt, dK/dt) of model1 at one point.

    dx/dt = alpha x ln(K/x) - p(t) x
    dK/dt = beta x_h - gamma K - delta x_h^(2/3) K - c(t) K

    where x_h = ``delayed_x`` is the tumor size at the lagged time h(t).
    """
    _check_current(current)
    _check_delayed(delayed_x)
    x, K = current.x, current.K
    dx = params.alpha * x * math.log(K / x) - sched.p(t) * x
    dK = (params.beta * delayed_x - params.gamma * K
          - params.delta * _surface(delayed_x) * K - sched.c(t) * K)
    return dx, dK


def rhs_model2(t: float, current: State, delayed_x: float, params: ModelParams,
               sched: TreatmentSchedule) -> tuple[float, float]:
    """Model2 derivative: stimulation proportional to K rather than x_h.

    dK/dt = (beta - gamma) K - delta x_h^(2/3) K - c(t) K
    """
    _check_current(current)
    _check_delayed(delayed_x)
    x, K = current.x, current.K
    dx = params.alpha * x * math.log(K / x) - sched.p(t) * x
    dK = ((params.beta - params.gamma) * K
          - params.delta * _surface(delayed_x) * K - sched.c(t) * K)
    return dx, dK


def rhs_model3(t: float, current: State, delayed_x: float, params: ModelParams,
               sched: TreatmentSchedule) -> tuple[float, float]:
    """Model3 derivative: Richards growth with exponent m, capacity as model1.

    dx/dt = alpha x (1 - (x/K)^m) - p(t) x
    """
    _check_current(current)
    _check_delayed(delayed_x)
    if params.kind is not ModelKind.MODEL3:
        raise ParameterError("rhs_model3 requires model3 parameters")
    x, K = current.x, current.K
    dx = params.alpha * x * (1.0 - math.pow(x / K, params.richards_m)) - sched.p(t) * x
    dK = (params.beta * delayed_x - params.gamma * K
          - params.delta * _surface(delayed_x) * K - sched.c(t) * K)
    return dx, dK


def growth_rates(params: ModelParams, sched: TreatmentSchedule) -> Callable[[float, float, float, float], tuple[float, float]]:
    """Unchecked scalar-form rates f(t, x, K, x_h) -> (dx/dt, dK/dt).

    This is the integrator's hot path: no validation, plain floats.  Domain
    violations surface as math errors, which the stepper converts to faults.
    """
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    p, c = sched.p, sched.c
    if params.kind is ModelKind.MODEL1:
        def rates(t, x, K, x_h):
            return (a * x * math.log(K / x) - p(t) * x,
                    b * x_h - (g + d * _surface(x_h) + c(t)) * K)
    elif params.kind is ModelKind.MODEL2:
        def rates(t, x, K, x_h):
            return (a * x * math.log(K / x) - p(t) * x,
                    (b - g - d * _surface(x_h) - c(t)) * K)
    else:
        m = params.richards_m

        def rates(t, x, K, x_h):
            return (a * x * (1.0 - math.pow(x / K, m)) - p(t) * x,
                    b * x_h - (g + d * _surface(x_h) + c(t)) * K)
    return rates


def log_growth_rates(params: ModelParams, sched: TreatmentSchedule) -> Callable[[float, float, float, float], tuple[float, float]]:
    """Rates in logarithmic coordinates (lx, lK) = (ln x, ln K).

    f(t, lx, lK, lx_h) -> (d lx/dt, d lK/dt).  Dividing the original rates by
    x and K respectively removes the positivity constraint: trajectories of
    this field correspond to structurally positive (x, K).
    """
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    p, c = sched.p, sched.c
    if params.kind is ModelKind.MODEL1:
        def rates(t, lx, lK, lx_h):
            x_h = math.exp(lx_h)
            return (a * (lK - lx) - p(t),
                    b * x_h * math.exp(-lK) - g - d * _surface(x_h) - c(t))
    elif params.kind is ModelKind.MODEL2:
        def rates(t, lx, lK, lx_h):
            return (a * (lK - lx) - p(t),
                    b - g - d * _surface(math.exp(lx_h)) - c(t))
    else:
        m = params.richards_m

        def rates(t, lx, lK, lx_h):
            x_h = math.exp(lx_h)
            return (a * (1.0 - math.exp(m * (lx - lK))) - p(t),
                    b * x_h * math.exp(-lK) - g - d * _surface(x_h) - c(t))
    return rates


# ---------------------------------------------------------------------------
# deviation coordinates about an equilibrium


def to_exponential_coords(s: State, eq: "EquilibriumPoint") -> tuple[float, float]:
    """Map (x, K) to the deviation coordinates (u, v) = (ln(x/x*), ln(K/K*))."""
    _check_current(s)
    return math.log(s.x / eq.x_star), math.log(s.K / eq.K_star)


def from_exponential_coords(u: float, v: float, eq: "EquilibriumPoint") -> State:
    """Inverse of :func:`to_exponential_coords`."""
    return State(x=eq.x_star * math.exp(u), K=eq.K_star * math.exp(v))


def model1_deviation_rhs(t: float, u: float, v: float, delayed_u: float,
                         params: ModelParams, p0: float, c0: float) -> tuple[float, float]:
    """Model1 under constant treatment, written in deviation coordinates.

    With eta = beta e^{-p0/alpha} and u_h the lagged u value:

        du/dt = -alpha u + alpha v
        dv/dt = eta e^{u_h - v} - gamma - c0 - (eta - gamma - c0) e^{2 u_h / 3}

    The origin is the equilibrium; the subtracted e^{2 u_h / 3} term carries
    the coefficient delta x*^(2/3) = eta - gamma - c0.
    """
    eta = params.beta * math.exp(-p0 / params.alpha)
    du = -params.alpha * u + params.alpha * v
    dv = (eta * math.exp(delayed_u - v) - params.gamma - c0
          - (eta - params.gamma - c0) * math.exp(_TWO_THIRDS * delayed_u))
    return du, dv


def model2_deviation_rhs(t: float, u: float, v: float, delayed_u: float,
                         params: ModelParams, c0: float) -> tuple[float, float]:
    """Model2 under constant treatment, in deviation coordinates.

        du/dt = -alpha u + alpha v
        dv/dt = (beta - gamma - c0) (1 - e^{2 u_h / 3})
    """
    du = -params.alpha * u + params.alpha * v
    dv = (params.beta - params.gamma - c0) * (1.0 - math.exp(_TWO_THIRDS * delayed_u))
    return du, dv


def lienard_rhs(t: float, u: float, w: float, delayed_u: float,
                params: ModelParams, c0: float = 0.0) -> tuple[float, float]:
    """Scalar second-order reduction of model2, as a first-order pair.

    Eliminating v from the deviation form of model2 gives

        u'' + alpha u' + A (e^{2 u_h / 3} - 1) = 0,  A = alpha (beta - gamma - c0)

    so with w = du/dt the pair is (w, -alpha w - A (e^{2 u_h / 3} - 1)).
    """
    if params.kind is not ModelKind.MODEL2:
        raise ParameterError("the scalar reduction applies to model2 only")
    A = params.alpha * (params.beta - params.gamma - c0)
    return w, -params.alpha * w - A * (math.exp(_TWO_THIRDS * delayed_u) - 1.0)
