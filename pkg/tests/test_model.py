import json

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from whataboutism import exceptions
from whataboutism import model

REL = 1e-12


def test_validate_reference_set(reference_params):
    """The reference set satisfies every restriction and is returned unchanged."""
    assert model.validate(reference_params) is reference_params


@pytest.mark.parametrize('params, error', [
    (model.ModelParams(n=1, lam=0.25, g=(1.0,), b=(1.5,)), exceptions.RangeViolation),
    (model.ModelParams(n=1, lam=0.25, g=(1.5,), b=(2.0,)), exceptions.RangeViolation),
    (model.ModelParams(n=1, lam=0.5, g=(1.5,), b=(1.5,)), exceptions.RangeViolation),
    (model.ModelParams(n=1, lam=0.0, g=(1.5,), b=(1.5,)), exceptions.RangeViolation),
    (model.ModelParams(n=0, lam=0.25, g=(), b=()), exceptions.RangeViolation),
    (model.ModelParams(n=2, lam=0.25, g=(1.2, 1.8), b=(1.1, 1.9)), exceptions.OrderingViolation),
    (model.ModelParams(n=2, lam=0.25, g=(1.8, 1.2), b=(1.9, 1.1)), exceptions.OrderingViolation),
    (model.ModelParams(n=2, lam=0.25, g=(1.5, 1.5), b=(1.1, 1.9)), exceptions.OrderingViolation),
    (model.ModelParams(n=2, lam=0.25, g=(1.8,), b=(1.1, 1.9)), exceptions.LengthMismatch),
    (model.ModelParams(n=2, lam=0.3, g=(1.8, 1.2), b=(1.1, 1.9), cbar=2.0),
     exceptions.MicrofoundationMismatch),
    (model.ModelParams(n=2, lam=0.25, g=(1.8, 1.2), b=(1.1, 1.9), cbar=1.9),
     exceptions.CbarTooSmall),
])
def test_validate_rejects(params, error):
    """Each restriction violation raises its own ValidationError subclass."""
    with pytest.raises(error):
        model.validate(params)


def test_validation_error_names_field():
    """The offending input is reported through the ``field`` attribute."""
    with pytest.raises(exceptions.ValidationError) as excinfo:
        model.validate(model.ModelParams(n=2, lam=0.25, g=(1.8,), b=(1.1, 1.9)))
    assert excinfo.value.field == 'g'


def test_derive_reference_set(reference_params):
    """theta, c and M match hand-computed values."""
    derived = model.derive(reference_params)
    assert derived.theta == pytest.approx((-1.325, 0.075), rel=REL)
    assert derived.c == pytest.approx((0.275 / 2.6, 0.475 / 1.4), rel=REL)
    assert derived.M == 2
    assert derived.boundary_levels == ()


def test_derive_boundary_theta_excluded_from_M(caplog):
    """theta_m = 0 exactly does not count as positive and is flagged."""
    # 1 + 0.25 * 1.5 / 2 = 1.1875; all values are exact in binary.
    params = model.validate(model.ModelParams(n=1, lam=0.25, g=(1.1875,), b=(1.5,)))
    derived = model.derive(params)
    assert derived.theta == (0.0,)
    assert derived.M == 2
    assert derived.boundary_levels == (1,)
    assert 'breakdown boundary' in caplog.text


def test_derive_breakdown_everywhere(breakdown_params):
    derived = model.derive(breakdown_params)
    assert all(theta < 0.0 for theta in derived.theta)
    assert derived.M == breakdown_params.n + 1


def test_derived_invariants(params_factory):
    """theta increases in m and stays below 1; c lies in (0, 1); theta > 0 from M on."""
    rng = np.random.default_rng(11)
    for _ in range(200):
        params = params_factory(rng)
        derived = model.derive(params)
        theta = np.asarray(derived.theta)
        assert np.all(np.diff(theta) > 0.0)
        assert np.all(theta < 1.0)
        assert all(0.0 < c < 1.0 for c in derived.c)
        assert np.all(theta[derived.M - 1:] > 0.0)
        assert np.all(theta[:derived.M - 1] <= 0.0)


def test_phi_values(reference_params):
    derived = model.derive(reference_params)
    x2 = derived.c_at(2) * derived.theta_at(2)
    assert model.phi(reference_params, 2, 0.0) == 0.0
    assert x2 == pytest.approx(0.0254464, abs=1e-7)
    assert model.phi(reference_params, 2, x2) == pytest.approx(0.075, rel=REL)


@settings(max_examples=300)
@given(z=st.floats(0.0, 1e6), m=st.sampled_from([1, 2]))
def test_phi_bounded_and_increasing(z, m):
    """phi_m stays below 1 + lambda b_m and is increasing."""
    params = model.ModelParams(n=2, lam=0.25, g=(1.8, 1.2), b=(1.1, 1.9))
    value = model.phi(params, m, z)
    assert 0.0 <= value < 1.0 + params.condemnation_rate(m)
    assert model.phi(params, m, z + 1.0) > value


def test_lambda_from_cbar():
    assert model.lambda_from_cbar(2.0, 1.9) == 0.25
    assert model.lambda_from_cbar(1e12, 1.9) < 1e-11
    with pytest.raises(exceptions.CbarTooSmall):
        model.lambda_from_cbar(1.9, 1.9)


@pytest.mark.parametrize('cbar, b', [(2.0, 1.1), (2.0, 1.9), (3.5, 1.4)])
def test_condemnation_rate_integral(cbar, b):
    """The double integral over the uniform microfoundation gives lambda * b."""
    expected = model.lambda_from_cbar(cbar, b) * b
    assert model.condemnation_rate_integral(cbar, b) == pytest.approx(expected, rel=1e-9)


def test_state_ordering_and_mirror():
    state = model.StateId(1, 2)
    assert state.mirror() == model.StateId(2, 2)
    assert state.mirror().mirror() == state
    assert model.StateId(2, 2).is_at_least_as_sensitive_as(model.StateId(1, 1))
    assert not model.StateId(1, 1).is_at_least_as_sensitive_as(model.StateId(2, 2))
    assert model.StateId.parse('2,1') == model.StateId(2, 1)
    assert str(model.StateId(2, 1)) == '2,1'
    assert len(model.all_states(3)) == 6


def test_state_parse_rejects_garbage():
    with pytest.raises(exceptions.InvalidState):
        model.StateId.parse('camp two')


def test_check_state(reference_params):
    with pytest.raises(exceptions.InvalidState):
        model.check_state(reference_params, model.StateId(3, 1))
    with pytest.raises(exceptions.InvalidState):
        model.check_state(reference_params, model.StateId(1, 3))


def test_profile_from_cutoff_abstain_is_cutoff_over_g(reference_params):
    profile = model.profile_from_cutoff(reference_params, [0.0, 0.6])
    assert profile.abstain == (0.0, 0.6 / 1.2)
    assert profile.rebuttal_target[model.StateId(1, 2)] == model.StateId(2, 2)
    assert not profile.is_pspe


def test_profile_from_cutoff_rejects(reference_params):
    with pytest.raises(exceptions.LengthMismatch):
        model.profile_from_cutoff(reference_params, [0.1])
    with pytest.raises(exceptions.RangeViolation):
        model.profile_from_cutoff(reference_params, [0.1, 1.3])


def test_profile_dict_round_trip(reference_params):
    """A profile written to JSON and read back is identical."""
    profile = model.profile_from_cutoff(reference_params, [0.0, 0.0305357142857142],
                                        mstar=2, is_pspe=True)
    restored = model.profile_from_dict(reference_params,
                                       json.loads(json.dumps(profile.to_dict())))
    assert restored == profile


def test_scaled_drops_cbar(reference_params):
    scaled = reference_params.scaled(1.01)
    assert scaled.cbar is None
    assert scaled.lam == reference_params.lam
    assert scaled.g == pytest.approx((1.818, 1.212))
    assert scaled.b == pytest.approx((1.111, 1.919))


def test_load_params(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps({'n': 2, 'lambda': 0.25, 'g': [1.8, 1.2], 'b': [1.1, 1.9],
                                'cbar': 2}))
    params = model.load_params(path)
    assert params.g == (1.8, 1.2)
    assert params.cbar == 2.0


@pytest.mark.parametrize('document, field', [
    ({'n': 2, 'g': [1.8, 1.2], 'b': [1.1, 1.9]}, 'lambda'),
    ({'n': 2, 'lambda': 0.25, 'g': 1.8, 'b': [1.1, 1.9]}, 'g'),
    ({'n': 2, 'lambda': 0.25, 'g': [1.8], 'b': [1.1, 1.9]}, 'g'),
    ({'n': 2.0, 'lambda': 0.25, 'g': [1.8, 1.2], 'b': [1.1, 1.9]}, 'n'),
])
def test_load_params_rejects(tmp_path, document, field):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps(document))
    with pytest.raises(exceptions.ValidationError) as excinfo:
        model.load_params(path)
    assert excinfo.value.field == field


def test_load_params_missing_file(tmp_path):
    with pytest.raises(exceptions.ConfigNotFound):
        model.load_params(tmp_path / 'missing.json')


def test_package_exports():
    import whataboutism
    assert whataboutism.validate is model.validate
    assert whataboutism.check_stability.__module__ == 'whataboutism.dynamics'
    assert whataboutism.ConfigNotFound is exceptions.ConfigNotFound
    for helper in ('stats', 'integrate', 'optimize', 'np', 'pd', 'logger', 'dataclass'):
        assert not hasattr(whataboutism, helper), helper
