import math

import numpy as np
import pytest

from whataboutism import analytic
from whataboutism import dynamics
from whataboutism import exceptions
from whataboutism import model


def test_self_map_values(reference_params):
    derived = model.derive(reference_params)
    x2 = derived.c_at(2) * derived.theta_at(2)
    assert dynamics.self_map(reference_params, 2, 0.0) == 0.0
    assert dynamics.self_map(reference_params, 2, x2) == pytest.approx(x2, rel=1e-12)
    for x in (1e-6, 0.01, 0.3, 0.9):
        assert dynamics.self_map(reference_params, 1, x) < x


def test_self_map_sign_property(params_factory):
    """c phi(x) - x is positive below c theta and negative above it when
    theta > 0, and negative everywhere on (0, 1) otherwise.
    """
    rng = np.random.default_rng(41)
    for _ in range(1000):
        params = params_factory(rng)
        derived = model.derive(params)
        for m in params.levels:
            fixed = max(0.0, derived.c_at(m) * derived.theta_at(m))
            x = rng.uniform(0.0, 1.0, 16)
            x = x[np.abs(x - fixed) > 1e-9 * max(fixed, 1e-3)]
            gap = dynamics.self_map(params, m, x, derived) - x
            assert np.all(np.sign(gap) == np.where(x < fixed, 1.0, -1.0))


def test_iterate_reference_set(reference_params):
    trace = dynamics.iterate(reference_params, 2, 0.5, tol=1e-12)
    assert trace.converged
    assert trace.limit == pytest.approx(0.0254464, abs=1e-7)
    assert trace.residual <= 1e-10

    trace = dynamics.iterate(reference_params, 1, 0.5)
    assert trace.converged
    assert trace.limit == pytest.approx(0.0, abs=1e-11)


def test_iterate_from_zero(reference_params):
    for m in reference_params.levels:
        trace = dynamics.iterate(reference_params, m, 0.0)
        assert trace.converged
        assert trace.limit == 0.0
        assert trace.iterates == (0.0, 0.0)


def test_iterate_reports_non_convergence(reference_params, caplog):
    trace = dynamics.iterate(reference_params, 2, 0.5, tol=1e-12, max_iter=3)
    assert not trace.converged
    assert trace.limit is None
    assert len(trace.iterates) == 4
    assert 'did not converge' in caplog.text


def test_iterate_conjugate_form(reference_params):
    """The conjugate map converges to theta in its own coordinate."""
    trace = dynamics.iterate(reference_params, 2, 0.5, form='stability_map')
    assert trace.limit == pytest.approx(0.075, rel=1e-9)


def test_iterate_rejects_inputs(reference_params):
    with pytest.raises(exceptions.RangeViolation):
        dynamics.iterate(reference_params, 2, -0.1)
    with pytest.raises(exceptions.ValidationError):
        dynamics.iterate(reference_params, 2, 0.5, form='newton')


def test_iteration_trace_frame(reference_params):
    frame = dynamics.iterate(reference_params, 1, 0.5).to_frame()
    assert list(frame.columns) == ['step', 'value']
    assert frame['value'].iloc[0] == 0.5


def test_fixed_point_oracle(params_factory):
    """Iterating from random interior starts always lands on max{0, c theta}."""
    rng = np.random.default_rng(43)
    for _ in range(200):
        params = params_factory(rng)
        derived = model.derive(params)
        for m in params.levels:
            expected = max(0.0, derived.c_at(m) * derived.theta_at(m))
            for x0 in rng.uniform(0.0, 1.0, 10):
                trace = dynamics.iterate(params, m, x0, tol=1e-13)
                assert trace.converged
                assert trace.residual <= 1e-10
                assert trace.limit == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_multi_start_order_and_workers(reference_params):
    starts = [0.9, 0.5, 0.1, 0.0]
    serial = dynamics.multi_start(reference_params, 2, starts, workers=1)
    parallel = dynamics.multi_start(reference_params, 2, starts, workers=4)
    assert serial == parallel
    assert [trace.iterates[0] for trace in serial] == starts
    assert serial[-1].limit == 0.0
    assert serial[0].limit == pytest.approx(0.0254464, abs=1e-7)


def test_check_stability_reference_set(reference_params):
    family = analytic.enumerate_pspe(reference_params)
    stable_report = dynamics.check_stability(reference_params, family.profiles[0])
    assert stable_report.stable
    assert stable_report.witness is None

    breakdown_report = dynamics.check_stability(reference_params, family.profiles[1])
    assert not breakdown_report.stable
    m, witness = breakdown_report.witness
    derived = model.derive(reference_params)
    assert m == 2
    assert 0.0 < witness < derived.c_at(2) * derived.theta_at(2)


def test_check_stability_breakdown_params(breakdown_params):
    family = analytic.enumerate_pspe(breakdown_params)
    assert len(family) == 1
    assert dynamics.check_stability(breakdown_params, family.stable).stable


def test_check_stability_reports_forms(reference_params):
    """The conjugate form agrees with the self-map; the literal reading does not."""
    report = dynamics.check_stability(reference_params, analytic.stable_profile(reference_params))
    level = report.levels[1]
    assert level.forms_agree
    assert level.conjugate_margin < 1.0
    assert level.literal_margin > 1.0
    assert level.derivative < 1.0
    assert level.fixed_points == pytest.approx((0.0, 0.0254464), abs=1e-7)
    assert level.stable_point == level.fixed_points[-1]


def test_stability_selection(pspe_params_factory):
    """Exactly the m* = M profile is stable; every other PSPE has an
    expanding perturbation.
    """
    rng = np.random.default_rng(47)
    for _ in range(50):
        params = pspe_params_factory(rng)
        M = model.derive(params).M
        for profile in analytic.enumerate_pspe(params).profiles:
            report = dynamics.check_stability(params, profile)
            if profile.mstar == M:
                assert report.stable
            else:
                assert not report.stable
                m, witness = report.witness
                assert M <= m < profile.mstar
                assert witness > 0.0
                moved = abs(dynamics.self_map(params, m, witness) - profile.abstain_at(m))
                assert moved >= abs(witness - profile.abstain_at(m))


@pytest.mark.parametrize('seed', [5, 11, 23])
def test_stable_profile_always_stable(pspe_params_factory, seed):
    """The m* = M profile passes the stability test on every draw."""
    rng = np.random.default_rng(seed)
    for _ in range(200):
        params = pspe_params_factory(rng)
        report = dynamics.check_stability(params, analytic.stable_profile(params))
        assert report.stable, params
        assert report.witness is None


def test_stable_profile_one_ulp_off(reference_params):
    """Abstention that differs from c theta in the last bits is tested at c theta."""
    derived = model.derive(reference_params)
    x2 = derived.c_at(2) * derived.theta_at(2)
    profile = model.profile_from_abstain(reference_params, [0.0, np.nextafter(x2, 1.0)])
    report = dynamics.check_stability(reference_params, profile)
    assert report.stable
    assert report.levels[1].point == x2
    assert report.levels[1].contraction_margin < 1.0

    single = model.validate(model.ModelParams(n=1, lam=0.40611, g=(1.13521,), b=(1.72887,)))
    assert dynamics.check_stability(single, analytic.stable_profile(single)).stable


def test_stability_forms_agree(params_factory):
    """The self-map and its conjugate give the same verdict at every level of every PSPE."""
    rng = np.random.default_rng(61)
    for _ in range(200):
        params = params_factory(rng)
        for profile in analytic.enumerate_pspe(params).profiles:
            report = dynamics.check_stability(params, profile)
            assert all(level.forms_agree for level in report.levels), params


def test_stability_report_dict(reference_params):
    report = dynamics.check_stability(reference_params, analytic.stable_profile(reference_params))
    document = report.to_dict()
    assert document['mstar'] == 2
    assert document['stable'] is True
    assert [level['m'] for level in document['levels']] == [1, 2]


def test_benchmark_recursion_examples():
    params = model.validate(model.ModelParams(n=1, lam=0.25, g=(1.5,), b=(1.5,)))
    stationary = dynamics.benchmark_recursion(params, 1, 0.28125, 10000)
    assert not stationary.exited
    assert stationary.direction == 0
    assert set(stationary.values) == {0.28125}

    upward = dynamics.benchmark_recursion(params, 1, 0.3, 200)
    assert upward.exited
    assert upward.direction == 1
    assert upward.values[-1] > 1.5
    assert all(b > a for a, b in zip(upward.values, upward.values[1:]))

    downward = dynamics.benchmark_recursion(params, 1, 0.25, 200)
    assert downward.exited
    assert downward.direction == -1
    assert downward.values[-1] < 0.0
    assert all(b < a for a, b in zip(downward.values, downward.values[1:]))


def test_benchmark_recursion_rejects_start():
    params = model.validate(model.ModelParams(n=1, lam=0.25, g=(1.5,), b=(1.5,)))
    with pytest.raises(exceptions.RangeViolation):
        dynamics.benchmark_recursion(params, 1, 1.6, 10)


def test_benchmark_divergence(params_factory):
    """Every start other than v* leaves [0, g] on the side it started."""
    rng = np.random.default_rng(53)
    for _ in range(100):
        params = params_factory(rng)
        solution = analytic.solve_benchmark(params)
        for m in params.levels:
            stationary = solution.cutoff[m - 1]
            v0 = rng.uniform(0.0, params.g_at(m))
            if v0 == stationary:
                continue
            trace = dynamics.benchmark_recursion(params, m, v0, 200)
            assert trace.exited
            assert trace.direction == (1 if v0 > stationary else -1)
            exit_value = trace.values[-1]
            assert exit_value > params.g_at(m) if trace.direction > 0 else exit_value < 0.0

            fixed = dynamics.benchmark_recursion(params, m, stationary, 10000)
            assert not fixed.exited
            assert max(abs(v - stationary) for v in fixed.values) <= 1e-12


def test_mirror_system_uniqueness(params_factory):
    """The only solutions of the two-equation system are (0, 0) and, when
    theta > 0, the symmetric interior point.
    """
    rng = np.random.default_rng(59)
    for _ in range(1000):
        params = params_factory(rng, max_n=1)
        derived = model.derive(params)
        solutions = dynamics.solve_mirror_system(params, 1, grid_points=400)
        interior = derived.c_at(1) * derived.theta_at(1)
        if derived.theta_at(1) > 0.0:
            assert len(solutions) == 2
            x, y = solutions[1]
            assert x == pytest.approx(interior, rel=1e-9)
            assert y == pytest.approx(interior, rel=1e-9)
        else:
            assert len(solutions) == 1
        assert solutions[0] == (0.0, 0.0)


def test_mirror_system_rejects_cap(reference_params):
    with pytest.raises(exceptions.RangeViolation):
        dynamics.solve_mirror_system(reference_params, 2, T=0.01)
    assert dynamics.solve_mirror_system(reference_params, 2, T=math.inf)[1][0] == \
        pytest.approx(0.0254464, abs=1e-7)
