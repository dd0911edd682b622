"""Equilibria and stability certificates for the delayed growth models.

The certificates follow one common pattern: bound the linearized (or
comparison) system by a constant matrix test.  A square matrix with
nonpositive off-diagonal entries (a Z-matrix) whose leading principal minors
are all strictly positive is a nonsingular M-matrix; for the comparison
systems built here, that property certifies decay of deviations to zero
regardless of the lag size.  The delay-dependent certificate for model2 and
the global criterion for its undelayed scalar reduction complement it.

Every check returns a :class:`StabilityReport`: which criterion ran, the
numbers entering its inequalities, and a verdict.  Verdicts are certificates,
not dichotomies - ``NotCertified`` means the sufficient condition failed, not
that the equilibrium is unstable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import InternalCheckError, ParameterError
from .models import ModelKind, ModelParams, TreatmentSchedule

_MAX_MINOR_DIM = 12


class Verdict(str, Enum):
    CERTIFIED_STABLE = "CertifiedStable"
    NOT_CERTIFIED = "NotCertified"
    NO_EQUILIBRIUM = "NoEquilibrium"


class StabilityCriterion(str, Enum):
    """Which sufficient condition a report applied."""

    M_MATRIX_GLOBAL = "m_matrix_global_attraction"
    MODEL1_LOCAL = "model1_local_m_matrix"
    MODEL2_LOCAL = "model2_local_delay_bound"
    LIENARD_GLOBAL = "lienard_global_burton"
    MODEL1_LIMIT = "model1_limit_treatment"
    MODEL2_LIMIT = "model2_limit_treatment"


@dataclass(frozen=True)
class EquilibriumPoint:
    """Positive equilibrium (x*, K*); ``eta`` is the treatment-adjusted
    stimulation rate beta e^{-p0/alpha} (model1 only, None otherwise)."""

    x_star: float
    K_star: float
    eta: float | None = None


@dataclass(frozen=True)
class NoEquilibrium:
    """Existence condition failed; ``marginal`` marks the equality case,
    where the formula collapses to x* = 0 and no positive equilibrium
    exists."""

    reason: str
    marginal: bool = False


@dataclass(frozen=True)
class StabilityReport:
    theorem: StabilityCriterion
    condition_values: dict[str, float]
    verdict: Verdict
    notes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "condition_values": dict(self.condition_values),
            "verdict": self.verdict.value,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Linearization:
    """Constant-coefficient linearization in deviation coordinates.

    ``matrix[i][j]`` multiplies deviation j in equation i; entries listed in
    ``delayed_entries`` act on the lagged argument u(h(t)) instead of u(t).
    """

    matrix: np.ndarray
    delayed_entries: tuple[tuple[int, int], ...]


_REL_TOL = 1e-12


def _existence(margin: float, scale: float, reason: str):
    """Shared shape of the three existence checks: margin must be positive."""
    if margin <= _REL_TOL * scale:
        marginal = abs(margin) <= _REL_TOL * scale
        return NoEquilibrium(reason=reason, marginal=marginal)
    return None


def equilibrium_model1(params: ModelParams, p0: float, c0: float) -> EquilibriumPoint | NoEquilibrium:
    """Positive equilibrium of model1 under constant treatment (p0, c0).

    With eta = beta e^{-p0/alpha}, it exists iff eta > gamma + c0
    (equivalently beta > (gamma + c0) e^{p0/alpha}) and equals

        x* = ((eta - gamma - c0) / delta)^(3/2),   K* = x* e^{p0/alpha}.
    """
    if params.kind is not ModelKind.MODEL1:
        raise ParameterError("equilibrium_model1 requires model1 parameters")
    eta = params.beta * math.exp(-p0 / params.alpha)
    margin = eta - params.gamma - c0
    missing = _existence(margin, eta, "stimulation does not exceed loss plus suppression")
    if missing is not None:
        return missing
    x_star = math.pow(margin / params.delta, 1.5)
    return EquilibriumPoint(x_star=x_star, K_star=x_star * math.exp(p0 / params.alpha), eta=eta)


def equilibrium_model2(params: ModelParams, p0: float, c0: float) -> EquilibriumPoint | NoEquilibrium:
    """Positive equilibrium of model2: exists iff beta > gamma + c0, with

        x* = ((beta - gamma - c0) / delta)^(3/2),   K* = x* e^{p0/alpha}.
    """
    if params.kind is not ModelKind.MODEL2:
        raise ParameterError("equilibrium_model2 requires model2 parameters")
    margin = params.beta - params.gamma - c0
    missing = _existence(margin, params.beta, "stimulation does not exceed loss plus suppression")
    if missing is not None:
        return missing
    x_star = math.pow(margin / params.delta, 1.5)
    return EquilibriumPoint(x_star=x_star, K_star=x_star * math.exp(p0 / params.alpha))


def equilibrium_model3(params: ModelParams, p0: float, c0: float) -> EquilibriumPoint | NoEquilibrium:
    """Positive equilibrium of model3 (Richards growth).

    Stationary growth forces the size ratio rho = x*/K* = (1 - p0/alpha)^(1/m),
    which requires p0 < alpha; the capacity equation then gives

        x* = ((beta rho - gamma - c0) / delta)^(3/2),   K* = x* / rho

    and existence additionally needs beta rho > gamma + c0.  Unlike the
    Gompertz variants there is no exponential K*/x* relation; the ratio comes
    from inverting the Richards growth law.
    """
    if params.kind is not ModelKind.MODEL3:
        raise ParameterError("equilibrium_model3 requires model3 parameters")
    kill_margin = params.alpha - p0
    if kill_margin <= _REL_TOL * params.alpha:
        return NoEquilibrium(
            reason="kill rate reaches the growth rate; growth cannot be stationary",
            marginal=abs(kill_margin) <= _REL_TOL * params.alpha,
        )
    rho = math.pow(1.0 - p0 / params.alpha, 1.0 / params.richards_m)
    margin = params.beta * rho - params.gamma - c0
    missing = _existence(margin, params.beta * rho,
                         "stimulation does not exceed loss plus suppression")
    if missing is not None:
        return missing
    x_star = math.pow(margin / params.delta, 1.5)
    return EquilibriumPoint(x_star=x_star, K_star=x_star / rho)


def equilibrium_for(params: ModelParams, p0: float, c0: float) -> EquilibriumPoint | NoEquilibrium:
    """Dispatch to the equilibrium of ``params.kind``."""
    if params.kind is ModelKind.MODEL1:
        return equilibrium_model1(params, p0, c0)
    if params.kind is ModelKind.MODEL2:
        return equilibrium_model2(params, p0, c0)
    return equilibrium_model3(params, p0, c0)


def equilibrium_residual(params: ModelParams, p0: float, c0: float,
                         eq: EquilibriumPoint) -> float:
    """Largest relative residual of the stationarity equations at ``eq``.

    Each equation's residual is scaled by the magnitude of its largest
    constituent term, so the value is a dimensionless consistency measure
    (machine-epsilon sized for a correct closed form).
    """
    x, K = eq.x_star, eq.K_star
    surface = math.pow(x, 2.0 / 3.0)
    if params.kind is ModelKind.MODEL3:
        growth = params.alpha * x * (1.0 - math.pow(x / K, params.richards_m))
    else:
        growth = params.alpha * x * math.log(K / x)
    g1 = abs(growth - p0 * x)
    s1 = max(params.alpha * x, abs(growth), p0 * x)

    if params.kind is ModelKind.MODEL2:
        terms = (params.beta * K, params.gamma * K, params.delta * surface * K, c0 * K)
        g2 = abs(terms[0] - terms[1] - terms[2] - terms[3])
    else:
        terms = (params.beta * x, params.gamma * K, params.delta * surface * K, c0 * K)
        g2 = abs(terms[0] - terms[1] - terms[2] - terms[3])
    s2 = max(terms)
    return max(g1 / s1, g2 / s2)


# ---------------------------------------------------------------------------
# M-matrix test


@dataclass(frozen=True)
class MMatrixDiagnostic:
    is_z_matrix: bool
    minors: tuple[float, ...]          # leading principal minors, empty if not Z
    inverse_nonnegative: bool | None   # None when singular/ill-conditioned
    reason: str | None = None


def _det_by_cofactors(m: np.ndarray) -> float:
    """Determinant by Laplace cofactor expansion, memoized on column sets.

    Deterministic and free of pivoting artifacts; the memoization keeps the
    cost at O(2^n n), comfortable for the n <= 12 sizes handled here.
    """
    n = m.shape[0]
    if n == 0:
        return 1.0
    rows = [tuple(float(v) for v in row) for row in m]
    cache: dict[int, float] = {}
    full = (1 << n) - 1

    def minor(mask: int) -> float:
        # determinant of the submatrix of the last popcount(mask) rows and
        # the columns in mask
        if mask == 0:
            return 1.0
        got = cache.get(mask)
        if got is not None:
            return got
        row = n - bin(mask).count("1")
        total = 0.0
        sign = 1.0
        rest = mask
        while rest:
            low = rest & -rest
            j = low.bit_length() - 1
            a = rows[row][j]
            if a != 0.0:
                total += sign * a * minor(mask ^ low)
            sign = -sign
            rest ^= low
        cache[mask] = total
        return total

    return minor(full)


def leading_principal_minors(matrix) -> tuple[float, ...]:
    """All leading principal minors det(M[:k, :k]), k = 1..n."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"need a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > _MAX_MINOR_DIM:
        raise ParameterError(f"matrix dimension {n} exceeds the supported {_MAX_MINOR_DIM}")
    return tuple(_det_by_cofactors(m[:k, :k]) for k in range(1, n + 1))


def is_m_matrix(matrix) -> tuple[bool, MMatrixDiagnostic]:
    """Nonsingular M-matrix test with a dual-characterization cross-check.

    Primary test: all off-diagonal entries <= 0 (Z-matrix) and every leading
    principal minor strictly positive.  When the matrix is comfortably
    nonsingular the entrywise-nonnegative-inverse characterization is also
    evaluated; disagreement between the two raises
    :class:`InternalCheckError` since they are provably equivalent.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"need a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n > _MAX_MINOR_DIM:
        raise ParameterError(f"matrix dimension {n} exceeds the supported {_MAX_MINOR_DIM}")

    off = m - np.diag(np.diag(m))
    if np.any(off > 0.0):
        return False, MMatrixDiagnostic(
            is_z_matrix=False, minors=(), inverse_nonnegative=None,
            reason="NotZMatrix: a positive off-diagonal entry",
        )

    minors = leading_principal_minors(m)
    verdict = all(v > 0.0 for v in minors)

    scale = float(np.max(np.abs(m))) if m.size else 0.0
    inverse_ok: bool | None = None
    # cross-check only away from singularity, where float inverses are trustworthy
    well_conditioned = scale > 0.0 and all(
        abs(minors[k - 1]) > 1e-9 * scale**k for k in range(1, n + 1)
    )
    if well_conditioned:
        inv = np.linalg.inv(m)
        tol = 1e-9 * max(1.0, float(np.max(np.abs(inv))))
        inverse_ok = bool(np.all(inv >= -tol))
        if inverse_ok != verdict:
            raise InternalCheckError(
                "minor test and nonnegative-inverse test disagree on "
                f"{m.tolist()}: minors={minors}, inverse_nonnegative={inverse_ok}"
            )
    return verdict, MMatrixDiagnostic(
        is_z_matrix=True, minors=minors, inverse_nonnegative=inverse_ok,
        reason=None if verdict else "a leading principal minor is not positive",
    )


@dataclass(frozen=True)
class ComparisonMatrix:
    """Constant comparison matrix of a delayed linear system, plus the bounds
    it was assembled from."""

    matrix: np.ndarray
    decay_rates: np.ndarray      # a_i, instantaneous self-decay lower bounds
    coupling_bounds: np.ndarray  # sup |off-diagonal instantaneous coefficients|
    delay_bounds: np.ndarray     # sup |delayed coefficients|


def comparison_matrix(decay_rates, coupling_bounds, delay_bounds) -> ComparisonMatrix:
    """Assemble the comparison matrix B of a delayed linear system.

    For dx_i/dt = -a_i(t) x_i + sum_j A_ij(t) x_j + sum_j B_ij(t) x_j(h(t))
    with a_i(t) >= decay_rates[i] > 0, |A_ij(t)| <= coupling_bounds[i][j]
    (i != j), |B_ij(t)| <= delay_bounds[i][j], the matrix has entries

        B_ii = decay_rates[i] - delay_bounds[i][i]
        B_ij = -coupling_bounds[i][j] - delay_bounds[i][j]   (i != j)

    If B is a nonsingular M-matrix, every solution decays to zero, whatever
    the (bounded-lag) delay; see :func:`m_matrix_certificate`.
    """
    a = np.asarray(decay_rates, dtype=float)
    A = np.asarray(coupling_bounds, dtype=float)
    B = np.asarray(delay_bounds, dtype=float)
    n = a.shape[0]
    if a.ndim != 1:
        raise ParameterError("decay_rates must be a vector")
    if A.shape != (n, n) or B.shape != (n, n):
        raise ParameterError(
            f"bound matrices must be {n}x{n}, got {A.shape} and {B.shape}")
    if np.any(a <= 0.0):
        raise ParameterError("decay rates must be strictly positive")
    off_mask = ~np.eye(n, dtype=bool)
    if np.any(A[off_mask] < 0.0) or np.any(B < 0.0):
        raise ParameterError("coefficient bounds must be nonnegative")

    m = -A - B
    np.fill_diagonal(m, a - np.diag(B))
    return ComparisonMatrix(matrix=m, decay_rates=a.copy(),
                            coupling_bounds=A.copy(), delay_bounds=B.copy())


def m_matrix_certificate(decay_rates, coupling_bounds, delay_bounds,
                         *, margin: float = 0.0) -> StabilityReport:
    """Delay-independent decay certificate from the comparison matrix test."""
    cm = comparison_matrix(decay_rates, coupling_bounds, delay_bounds)
    _, diag = is_m_matrix(cm.matrix)
    values = {f"minor_{k}": v for k, v in enumerate(diag.minors, start=1)}
    certified = diag.is_z_matrix and all(v > margin for v in diag.minors)
    return StabilityReport(
        theorem=StabilityCriterion.M_MATRIX_GLOBAL,
        condition_values=values,
        verdict=Verdict.CERTIFIED_STABLE if certified else Verdict.NOT_CERTIFIED,
        notes=("certificate is independent of the lag bound",),
    )


# ---------------------------------------------------------------------------
# model-specific certificates


def linearize_model1(params: ModelParams, p0: float, c0: float) -> Linearization:
    """Linearization of model1 about its equilibrium, in deviation coordinates.

    du/dt = -alpha u + alpha v
    dv/dt = ((eta + 2 gamma + 2 c0) / 3) u(h(t)) - eta v

    with eta = beta e^{-p0/alpha}.  Only the (2, 1) entry acts on the lagged
    argument.  Requires the positive equilibrium to exist.
    """
    eq = equilibrium_model1(params, p0, c0)
    if isinstance(eq, NoEquilibrium):
        raise ParameterError(f"no positive equilibrium to linearize about: {eq.reason}")
    eta = eq.eta
    matrix = np.array([
        [-params.alpha, params.alpha],
        [(eta + 2.0 * params.gamma + 2.0 * c0) / 3.0, -eta],
    ])
    return Linearization(matrix=matrix, delayed_entries=((1, 0),))


def model1_local_stability(params: ModelParams, p0: float, c0: float,
                           *, margin: float = 0.0) -> StabilityReport:
    """Delay-independent local stability certificate for model1.

    Applies the comparison-matrix test to the linearization: the test matrix

        [[ alpha,                      -alpha ]
         [ -(eta + 2 gamma + 2 c0)/3,   eta   ]]

    is an M-matrix exactly when eta > gamma + c0, i.e. exactly when the
    positive equilibrium exists; its determinant is
    (2 alpha / 3)(eta - gamma - c0).  The verdict holds for every lag bound.
    """
    if params.kind is not ModelKind.MODEL1:
        raise ParameterError("model1_local_stability requires model1 parameters")
    eta = params.beta * math.exp(-p0 / params.alpha)
    threshold = (params.gamma + c0) * math.exp(p0 / params.alpha)
    eq = equilibrium_model1(params, p0, c0)
    if isinstance(eq, NoEquilibrium):
        return StabilityReport(
            theorem=StabilityCriterion.MODEL1_LOCAL,
            condition_values={
                "eta": eta,
                "loss_plus_suppression": params.gamma + c0,
                "beta_threshold": threshold,
                "existence_margin": eta - params.gamma - c0,
            },
            verdict=Verdict.NO_EQUILIBRIUM,
            notes=(("existence margin is zero to working precision",) if eq.marginal else ()),
        )

    lin = linearize_model1(params, p0, c0)
    delayed_gain = float(lin.matrix[1, 0])
    cm = comparison_matrix(
        decay_rates=[params.alpha, eta],
        coupling_bounds=[[0.0, params.alpha], [0.0, 0.0]],
        delay_bounds=[[0.0, 0.0], [delayed_gain, 0.0]],
    )
    _, diag = is_m_matrix(cm.matrix)
    certified = diag.is_z_matrix and all(v > margin for v in diag.minors)
    det = diag.minors[-1]
    return StabilityReport(
        theorem=StabilityCriterion.MODEL1_LOCAL,
        condition_values={
            "eta": eta,
            "loss_plus_suppression": params.gamma + c0,
            "beta_threshold": threshold,
            "delayed_gain": delayed_gain,
            "minor_1": diag.minors[0],
            "minor_2": det,
        },
        verdict=Verdict.CERTIFIED_STABLE if certified else Verdict.NOT_CERTIFIED,
        notes=("certificate is independent of the lag bound",),
    )


def model2_local_stability(params: ModelParams, p0: float, c0: float, tau: float,
                           *, margin: float = 0.0) -> StabilityReport:
    """Lag-bound-dependent stability condition for model2.

    With the excess growth E = beta - gamma - c0 and a lag bounded by
    t - h(t) <= tau, the certified region is 0 < E < 1.5 tau; the underlying
    damping-to-restoring ratio is |b|/a = (2/3) E.  The condition is applied
    exactly as stated by its source even though the certified region widens
    as the lag bound grows - the opposite of the usual destabilizing role of
    delays - so treat generous-tau certificates with care.
    """
    if params.kind is not ModelKind.MODEL2:
        raise ParameterError("model2_local_stability requires model2 parameters")
    if not tau > 0.0:
        raise ParameterError(f"lag bound tau must be positive, got {tau}")
    excess = params.beta - params.gamma - c0
    values = {
        "excess_growth": excess,
        "bound": 1.5 * tau,
        "damping_ratio": 2.0 * excess / 3.0,
        "tau": tau,
    }
    notes = ("certified region widens with the lag bound; condition applied as stated",)
    if excess <= _REL_TOL * params.beta:
        return StabilityReport(
            theorem=StabilityCriterion.MODEL2_LOCAL,
            condition_values=values,
            verdict=Verdict.NO_EQUILIBRIUM,
            notes=notes,
        )
    certified = (excess > margin) and (excess < 1.5 * tau - margin)
    return StabilityReport(
        theorem=StabilityCriterion.MODEL2_LOCAL,
        condition_values=values,
        verdict=Verdict.CERTIFIED_STABLE if certified else Verdict.NOT_CERTIFIED,
        notes=notes,
    )


def burton_check(params: ModelParams, p0: float, c0: float,
                 *, margin: float = 0.0) -> StabilityReport:
    """Global criterion for the undelayed scalar reduction of model2.

    The reduction u'' + alpha u' + g(u) = 0 with
    g(u) = A (e^{2u/3} - 1), A = alpha (beta - gamma - c0) has globally
    asymptotically stable origin when the damping is positive and g keeps the
    sign of u, which here comes down to A > 0.  With A <= 0 the restoring
    term loses its sign condition and the criterion certifies nothing.
    """
    if params.kind is not ModelKind.MODEL2:
        raise ParameterError("burton_check requires model2 parameters")
    excess = params.beta - params.gamma - c0
    gain = params.alpha * excess
    certified = gain > margin
    return StabilityReport(
        theorem=StabilityCriterion.LIENARD_GLOBAL,
        condition_values={
            "damping": params.alpha,
            "restoring_gain": gain,
            "excess_growth": excess,
        },
        verdict=Verdict.CERTIFIED_STABLE if certified else Verdict.NOT_CERTIFIED,
        notes=("applies to the undelayed reduction; the verdict is global",),
    )


def asymptotic_attractor_check(params: ModelParams, schedule: TreatmentSchedule,
                               tau: float, *, margin: float = 0.0) -> StabilityReport:
    """Stability of the limit system of a converging treatment schedule.

    When p(t) and c(t) converge to declared limits (p0, c0), deviations from
    the (p0, c0)-equilibrium inherit the constant-treatment verdict at those
    limits: the time-varying terms are a vanishing perturbation.  Requires
    ``schedule.declared_limits``.
    """
    if schedule.declared_limits is None:
        raise ParameterError("schedule must declare its treatment limits")
    p0, c0 = schedule.declared_limits
    if params.kind is ModelKind.MODEL1:
        base = model1_local_stability(params, p0, c0, margin=margin)
        criterion = StabilityCriterion.MODEL1_LIMIT
    elif params.kind is ModelKind.MODEL2:
        base = model2_local_stability(params, p0, c0, tau, margin=margin)
        criterion = StabilityCriterion.MODEL2_LIMIT
    else:
        raise ParameterError("no limit-treatment certificate for model3")
    values = dict(base.condition_values)
    values["p_limit"] = p0
    values["c_limit"] = c0
    return StabilityReport(
        theorem=criterion,
        condition_values=values,
        verdict=base.verdict,
        notes=base.notes + ("verdict taken at the declared treatment limits",),
    )
