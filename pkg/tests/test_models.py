"""Model right-hand sides, treatment schedules, and coordinate changes."""

import math
import random

import pytest

from angio import (
    DelaySpec,
    DomainError,
    EquilibriumPoint,
    ModelKind,
    ModelParams,
    ParameterError,
    State,
    TreatmentSchedule,
    constant_rate,
    equilibrium_for,
    exp_decay_rate,
    from_exponential_coords,
    growth_rates,
    inverse_decay_rate,
    lienard_rhs,
    log_growth_rates,
    model1_deviation_rhs,
    model2_deviation_rhs,
    pk_concentration,
    pk_infusion_rate,
    rhs_model1,
    rhs_model2,
    rhs_model3,
    to_exponential_coords,
)


def sched(p0, c0):
    return TreatmentSchedule.constant(p0, c0)


class TestRhsValues:
    def test_model1_hand_value(self):
        # dx = 1*1*ln(e/1) = 1; dK = 2*1 - (0.1 + 1 + 0.1)*e
        params = ModelParams(ModelKind.MODEL1, alpha=1.0, beta=2.0, gamma=0.1, delta=1.0)
        dx, dK = rhs_model1(0.0, State(1.0, math.e), 1.0, params, sched(0.0, 0.1))
        assert dx == pytest.approx(1.0, abs=1e-14)
        assert dK == pytest.approx(2.0 - 1.2 * math.e, rel=1e-14)

    def test_model2_balances_at_zero(self):
        # beta - gamma - delta*1 - c = 0 kills the K equation regardless of K
        params = ModelParams(ModelKind.MODEL2, alpha=1.0, beta=2.0, gamma=0.5, delta=1.0)
        _, dK = rhs_model2(3.0, State(0.7, 2.0), 1.0, params, sched(0.2, 0.5))
        assert dK == pytest.approx(0.0, abs=1e-14)

    def test_model3_hand_value(self):
        params = ModelParams(ModelKind.MODEL3, alpha=1.0, beta=2.0, gamma=0.1,
                             delta=1.0, richards_m=2.0)
        dx, dK = rhs_model3(0.0, State(1.0, 2.0), 1.0, params, sched(0.25, 0.1))
        assert dx == pytest.approx(1.0 * (1.0 - 0.25) - 0.25, rel=1e-14)
        assert dK == pytest.approx(2.0 - (0.1 + 1.0 + 0.1) * 2.0, rel=1e-14)

    def test_surface_term_vanishes_at_zero_delayed_state(self):
        params = ModelParams(ModelKind.MODEL1, alpha=1.0, beta=2.0, gamma=0.3, delta=5.0)
        _, dK = rhs_model1(0.0, State(1.0, 1.0), 0.0, params, sched(0.0, 0.0))
        assert dK == pytest.approx(-0.3, rel=1e-14)

    def test_rhs_rejects_nonpositive_state(self):
        params = ModelParams(ModelKind.MODEL1, alpha=1.0, beta=2.0, gamma=0.1, delta=1.0)
        with pytest.raises(DomainError):
            rhs_model1(0.0, State(0.0, 1.0), 1.0, params, sched(0.0, 0.0))
        with pytest.raises(DomainError):
            rhs_model1(0.0, State(1.0, -2.0), 1.0, params, sched(0.0, 0.0))

    def test_rhs_rejects_negative_delayed_value(self):
        params = ModelParams(ModelKind.MODEL2, alpha=1.0, beta=2.0, gamma=0.1, delta=1.0)
        with pytest.raises(DomainError):
            rhs_model2(0.0, State(1.0, 1.0), -0.5, params, sched(0.0, 0.0))

    def test_hot_path_matches_validated_rhs(self):
        """The unchecked closures must agree with the public functions."""
        rng = random.Random(20240811)
        table = {
            ModelKind.MODEL1: rhs_model1,
            ModelKind.MODEL2: rhs_model2,
            ModelKind.MODEL3: rhs_model3,
        }
        for kind, public in table.items():
            m = 1.7 if kind is ModelKind.MODEL3 else None
            params = ModelParams(kind, alpha=0.9, beta=2.1, gamma=0.2, delta=0.7,
                                 richards_m=m)
            schedule = sched(0.3, 0.15)
            fast = growth_rates(params, schedule)
            for _ in range(200):
                x = rng.uniform(0.05, 5.0)
                K = rng.uniform(0.05, 5.0)
                xh = rng.uniform(0.0, 5.0)
                want = public(0.0, State(x, K), xh, params, schedule)
                got = fast(0.0, x, K, xh)
                assert got[0] == pytest.approx(want[0], rel=1e-14, abs=1e-14)
                assert got[1] == pytest.approx(want[1], rel=1e-14, abs=1e-14)

    def test_log_rates_follow_chain_rule(self):
        # d(ln x)/dt = (dx/dt)/x must hold exactly in exact arithmetic
        rng = random.Random(77)
        for kind in ModelKind:
            m = 0.5 if kind is ModelKind.MODEL3 else None
            params = ModelParams(kind, alpha=1.2, beta=1.8, gamma=0.1, delta=0.4,
                                 richards_m=m)
            schedule = sched(0.1, 0.05)
            fast = growth_rates(params, schedule)
            logfast = log_growth_rates(params, schedule)
            for _ in range(100):
                x = rng.uniform(0.1, 4.0)
                K = rng.uniform(0.1, 4.0)
                xh = rng.uniform(0.05, 4.0)
                dx, dK = fast(1.0, x, K, xh)
                du, dv = logfast(1.0, math.log(x), math.log(K), math.log(xh))
                assert du == pytest.approx(dx / x, rel=1e-12, abs=1e-12)
                assert dv == pytest.approx(dK / K, rel=1e-12, abs=1e-12)


class TestSchedules:
    def test_constant_limits(self):
        f, lim = constant_rate(0.4)
        assert lim == 0.4 and f(0.0) == 0.4 and f(100.0) == 0.4

    def test_exp_decay_shape(self):
        f, lim = exp_decay_rate(0.2, 0.5, 2.0)
        assert lim == 0.2
        assert f(0.0) == pytest.approx(0.7)
        assert f(10.0) == pytest.approx(0.2 + 0.5 * math.exp(-20.0), rel=1e-14)

    def test_inverse_decay_shape(self):
        f, lim = inverse_decay_rate(0.1, 0.9, 1.0)
        assert lim == 0.1
        assert f(0.0) == pytest.approx(1.0)
        assert f(9.0) == pytest.approx(0.1 + 0.09, rel=1e-14)

    def test_negative_rate_rejected(self):
        with pytest.raises(ParameterError):
            constant_rate(-0.1)
        with pytest.raises(ParameterError):
            exp_decay_rate(0.1, -0.5, 1.0)
        with pytest.raises(ParameterError):
            inverse_decay_rate(-0.1, 0.5, 1.0)

    def test_constant_schedule_probe(self):
        assert sched(0.1, 0.2).is_constant()
        varying = TreatmentSchedule(p=lambda t: 0.1 + math.exp(-t), c=lambda t: 0.2,
                                    declared_limits=(0.1, 0.2))
        assert not varying.is_constant()

    def test_spot_check_flags_negative_rate(self):
        bad = TreatmentSchedule(p=lambda t: math.cos(t), c=lambda t: 0.0)
        with pytest.raises(ParameterError):
            bad.spot_check_nonnegative(0.0, 10.0)

    def test_pk_plateau_reached(self):
        f, plateau = pk_infusion_rate(2.0, 1.0)
        assert plateau == 2.0
        assert f(0.0) == pytest.approx(0.0, abs=1e-15)
        # closed form is 2(1 - e^{-t}) for these constants
        assert f(1.5) == pytest.approx(2.0 * (1.0 - math.exp(-1.5)), rel=1e-14)
        assert f(50.0) == pytest.approx(2.0, rel=1e-12)

    def test_pk_concentration_matches_closed_form(self):
        got = pk_concentration(lambda t: 2.0, q=1.0, c0=0.0, t=1.5)
        assert got == pytest.approx(2.0 * (1.0 - math.exp(-1.5)), rel=1e-9)

    def test_pk_concentration_varying_input(self):
        # v(t)=e^{-t}, q=2, c0=1 has the exact solution c(t)=e^{-t}
        for t in (0.0, 0.3, 1.0, 4.0):
            got = pk_concentration(lambda s: math.exp(-s), q=2.0, c0=1.0, t=t)
            assert got == pytest.approx(math.exp(-t), rel=1e-9)

    def test_pk_concentration_guards(self):
        with pytest.raises(ParameterError):
            pk_concentration(lambda t: 1.0, q=0.0, c0=0.0, t=1.0)
        with pytest.raises(ParameterError):
            pk_concentration(lambda t: 1.0, q=1.0, c0=-1.0, t=1.0)
        with pytest.raises(DomainError):
            pk_concentration(lambda t: 1.0, q=1.0, c0=0.0, t=-1.0)


class TestParamValidation:
    def test_positive_rates_required(self):
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL1, alpha=0.0, beta=1.0, gamma=0.0, delta=1.0)
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL1, alpha=1.0, beta=-1.0, gamma=0.0, delta=1.0)
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL1, alpha=1.0, beta=1.0, gamma=-0.1, delta=1.0)
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL1, alpha=1.0, beta=1.0, gamma=0.0, delta=math.inf)

    def test_richards_exponent_rules(self):
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL3, alpha=1.0, beta=1.0, gamma=0.0, delta=1.0)
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL3, alpha=1.0, beta=1.0, gamma=0.0, delta=1.0,
                        richards_m=1.0)
        with pytest.raises(ParameterError):
            ModelParams(ModelKind.MODEL1, alpha=1.0, beta=1.0, gamma=0.0, delta=1.0,
                        richards_m=0.5)
        ModelParams(ModelKind.MODEL3, alpha=1.0, beta=1.0, gamma=0.0, delta=1.0,
                    richards_m=0.5)

    def test_delay_spec_validation(self):
        with pytest.raises(ParameterError):
            DelaySpec.constant(0.0)
        with pytest.raises(ParameterError):
            DelaySpec.varying(lambda t: t - 1.0, tau_min=2.0, tau_max=1.0)
        with pytest.raises(ParameterError):
            DelaySpec.varying(lambda t: t - 1.0, tau_min=0.0, tau_max=1.0)
        spec = DelaySpec.constant(2.5)
        assert spec.delayed_time(10.0) == 7.5
        assert DelaySpec.none().delayed_time(10.0) == 10.0


class TestExponentialCoords:
    def test_round_trip(self):
        rng = random.Random(4242)
        eq = EquilibriumPoint(x_star=0.8, K_star=2.3)
        for _ in range(1000):
            s = State(rng.uniform(1e-3, 50.0), rng.uniform(1e-3, 50.0))
            u, v = to_exponential_coords(s, eq)
            back = from_exponential_coords(u, v, eq)
            assert back.x == pytest.approx(s.x, rel=1e-14)
            assert back.K == pytest.approx(s.K, rel=1e-14)

    def test_equilibrium_maps_to_origin(self):
        eq = EquilibriumPoint(x_star=1.7, K_star=0.4)
        u, v = to_exponential_coords(State(1.7, 0.4), eq)
        assert u == 0.0 and v == 0.0


class TestDeviationForms:
    """The equilibrium-centered systems must be change-of-variable images of
    the original right-hand sides, not independent formulas."""

    def test_model1_deviation_matches_chain_rule(self):
        rng = random.Random(90210)
        params = ModelParams(ModelKind.MODEL1, alpha=1.0, beta=4.0, gamma=0.5, delta=1.0)
        p0, c0 = math.log(2.0), 0.5
        eq = equilibrium_for(params, p0, c0)
        fast = growth_rates(params, sched(p0, c0))
        for _ in range(300):
            u = rng.uniform(-2.0, 2.0)
            v = rng.uniform(-2.0, 2.0)
            uh = rng.uniform(-2.0, 2.0)
            x, K = eq.x_star * math.exp(u), eq.K_star * math.exp(v)
            xh = eq.x_star * math.exp(uh)
            dx, dK = fast(0.0, x, K, xh)
            du, dv = model1_deviation_rhs(0.0, u, v, uh, params, p0, c0)
            assert du == pytest.approx(dx / x, rel=1e-11, abs=1e-12)
            assert dv == pytest.approx(dK / K, rel=1e-11, abs=1e-12)

    def test_model1_deviation_fixes_origin(self):
        params = ModelParams(ModelKind.MODEL1, alpha=1.3, beta=3.0, gamma=0.2, delta=0.8)
        du, dv = model1_deviation_rhs(0.0, 0.0, 0.0, 0.0, params, 0.4, 0.1)
        assert du == pytest.approx(0.0, abs=1e-14)
        assert dv == pytest.approx(0.0, abs=1e-14)

    def test_model2_deviation_matches_chain_rule(self):
        rng = random.Random(555)
        params = ModelParams(ModelKind.MODEL2, alpha=0.7, beta=2.0, gamma=0.4, delta=1.2)
        p0, c0 = 0.2, 0.3
        eq = equilibrium_for(params, p0, c0)
        fast = growth_rates(params, sched(p0, c0))
        for _ in range(300):
            u = rng.uniform(-2.0, 2.0)
            v = rng.uniform(-2.0, 2.0)
            uh = rng.uniform(-2.0, 2.0)
            x, K = eq.x_star * math.exp(u), eq.K_star * math.exp(v)
            xh = eq.x_star * math.exp(uh)
            dx, dK = fast(0.0, x, K, xh)
            du, dv = model2_deviation_rhs(0.0, u, v, uh, params, c0)
            assert du == pytest.approx(dx / x, rel=1e-11, abs=1e-12)
            assert dv == pytest.approx(dK / K, rel=1e-11, abs=1e-12)

    def test_lienard_hand_value(self):
        params = ModelParams(ModelKind.MODEL2, alpha=1.0, beta=1.5, gamma=0.3, delta=1.0)
        # alpha*(beta-gamma-c0) = 1 with c0 = 0.2; at u_h=0 the restoring term is 0
        du, dw = lienard_rhs(0.0, 0.5, 1.0, 0.0, params, c0=0.2)
        assert du == 1.0
        assert dw == pytest.approx(-1.0, rel=1e-14)

    def test_lienard_is_derivative_of_first_order_form(self):
        # w' from the scalar form equals alpha*(v' - u') computed from the
        # planar deviation system whenever w = alpha*(v - u)
        rng = random.Random(31337)
        params = ModelParams(ModelKind.MODEL2, alpha=1.4, beta=2.2, gamma=0.3, delta=0.9)
        c0 = 0.4
        for _ in range(200):
            u = rng.uniform(-1.5, 1.5)
            v = rng.uniform(-1.5, 1.5)
            uh = rng.uniform(-1.5, 1.5)
            du, dv = model2_deviation_rhs(0.0, u, v, uh, params, c0)
            w = params.alpha * (v - u)
            got_du, got_dw = lienard_rhs(0.0, u, w, uh, params, c0=c0)
            assert got_du == pytest.approx(w, rel=1e-14, abs=1e-14)
            assert got_dw == pytest.approx(params.alpha * (dv - du), rel=1e-11, abs=1e-12)

    def test_lienard_requires_matching_model(self):
        params = ModelParams(ModelKind.MODEL1, alpha=1.0, beta=2.0, gamma=0.1, delta=1.0)
        with pytest.raises(ParameterError):
            lienard_rhs(0.0, 0.0, 0.0, 0.0, params, c0=0.0)
