"""Closed forms for the benchmark SPE, the PSPE family and equilibrium statistics."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from whataboutism import exceptions
from whataboutism import model

__all__ = [
    'BenchmarkSolution',
    'PspeFamily',
    'WhataboutismStats',
    'PolarizationResponse',
    'solve_benchmark',
    'benchmark_profile',
    'pspe_profile',
    'confirm_pspe',
    'stable_profile',
    'enumerate_pspe',
    'alpha_closed_form',
    'mu_and_target',
    'whataboutism_frequency',
    'whataboutism_stats',
    'two_state_indifference',
    'two_state_cutoff',
    'two_state_equilibria',
    'polarization_derivatives',
    'polarization_response',
    'comparative_statics',
    'equilibrium_records',
]

logger = logging.getLogger(__name__)

DEFAULT_POLARIZATION_STEP = 1e-5


@dataclass(frozen=True)
class BenchmarkSolution:
    """Unique SPE of the game without whataboutism, per sensitivity level."""
    cutoff: Tuple[float, ...]
    abstain: Tuple[float, ...]


@dataclass(frozen=True)
class PspeFamily:
    """All PSPE, ordered by breakdown threshold m* = M, ..., n+1.

    Higher m* means pointwise weakly less abstention (more offensive speech).
    """
    profiles: Tuple[model.EquilibriumProfile, ...]
    stable_index: int

    @property
    def stable(self):
        return self.profiles[self.stable_index]

    def __len__(self):
        return len(self.profiles)


@dataclass(frozen=True)
class WhataboutismStats:
    """Per-level rebuttal statistics of a profile.

    alpha: probability that a sampled mirror-state path supports a rebuttal.
    mu: probability that external condemnation cannot be rebutted.
    frequency: probability that whataboutism is used in level m, i.e. both
        mirror states end in an offence terminated by the rival camp.
    """
    alpha: Tuple[float, ...]
    mu: Tuple[float, ...]
    frequency: Tuple[float, ...]


class PolarizationResponse(NamedTuple):
    abstain_sign: int
    frequency_sign: int


def _theta(lb, g):
    # Single predicate for "an interior cutoff exists": theta > 0, which is
    # the same inequality as g < 1 + b lambda / 2.
    return lb - 2.0 * g + 2.0


def solve_benchmark(params):
    """Solves the benchmark game, where every condemnation costs 1.

    Args:
        params: validated ModelParams.

    Returns:
        BenchmarkSolution with cutoff_m = lambda g_m b_m / (2 g_m - 1) and
        abstain_m = cutoff_m / g_m, which always lies in (0, 1).
    """
    cutoff = tuple(params.lam * g * b / (2.0 * g - 1.0) for g, b in zip(params.g, params.b))
    abstain = tuple(v / g for v, g in zip(cutoff, params.g))
    return BenchmarkSolution(cutoff=cutoff, abstain=abstain)


def benchmark_profile(params):
    """The benchmark cutoffs as a (non-PSPE) profile, e.g. for simulation."""
    return model.profile_from_cutoff(params, solve_benchmark(params).cutoff)


def pspe_profile(params, mstar, derived=None):
    """PSPE with breakdown threshold `mstar`.

    Levels below m* always offend (cutoff 0); levels m >= m* use the cutoff
    c_m theta_m g_m. Rebuttals target the mirror state.

    Raises:
        InvalidThreshold: if mstar is outside {M, ..., n+1}.
    """
    derived = derived or model.derive(params)
    if isinstance(mstar, bool) or not isinstance(mstar, (int, np.integer)) \
            or not derived.M <= mstar <= params.n + 1:
        raise exceptions.InvalidThreshold(
            f'm*={mstar} is not an equilibrium threshold; it must lie in '
            f'{{{derived.M}, ..., {params.n + 1}}}.',
            field='mstar',
        )

    cutoff = []
    for m in params.levels:
        if m < mstar:
            cutoff.append(0.0)
        else:
            cutoff.append(derived.c_at(m) * derived.theta_at(m) * params.g_at(m))
    return model.profile_from_cutoff(params, cutoff, mstar=int(mstar), is_pspe=True)


def confirm_pspe(params, profile, rtol=1e-9):
    """Keeps the PSPE tag of a loaded profile only if its cutoffs match
    `pspe_profile(params, mstar)`; otherwise returns an untagged copy.
    """
    if not profile.is_pspe:
        return profile
    try:
        expected = pspe_profile(params, profile.mstar)
    except exceptions.InvalidThreshold:
        expected = None
    if expected is not None and np.allclose(profile.cutoff, expected.cutoff, rtol=rtol, atol=1e-12):
        return profile
    logger.warning('Profile with m*=%s is not a PSPE of these parameters; dropping the tag.',
                   profile.mstar)
    return dataclasses.replace(profile, is_pspe=False)


def stable_profile(params, derived=None):
    """The unique dynamically stable PSPE, m* = M."""
    derived = derived or model.derive(params)
    return pspe_profile(params, derived.M, derived)


def enumerate_pspe(params):
    """Every PSPE, one per m* in {M, ..., n+1}; the stable one comes first."""
    derived = model.derive(params)
    profiles = tuple(pspe_profile(params, mstar, derived)
                     for mstar in range(derived.M, params.n + 2))
    logger.debug('Found %d PSPE (M=%d, n=%d)', len(profiles), derived.M, params.n)
    return PspeFamily(profiles=profiles, stable_index=0)


def alpha_closed_form(params, profile, state):
    """Ex-ante probability that the game in `state` is terminated by the rival camp.

    Works for any cutoff profile, not only equilibria.
    """
    x = profile.abstain_at(state.m)
    half_lb = 0.5 * params.condemnation_rate(state.m)
    return (1.0 - x) * half_lb / (half_lb + 0.5 * x)


def mu_and_target(params, profile, state):
    """Probability that external condemnation in `state` cannot be rebutted,
    and the rebuttal state that attains it.

    The minimum runs over rival-camp states at least as sensitive as `state`;
    ties go to the least sensitive minimizer.

    Returns:
        (mu, StateId)
    """
    model.check_state(params, state)
    rival = 3 - state.camp
    candidates = [model.StateId(rival, m) for m in range(state.m, params.n + 1)]
    target = min(candidates, key=lambda s: 1.0 - alpha_closed_form(params, profile, s))
    mu = 1.0 - alpha_closed_form(params, profile, target)

    if profile.is_pspe and target != state.mirror():
        logger.warning('Rebuttal in state %s targets %s instead of the mirror state.',
                       state, target)
    return mu, target


def whataboutism_frequency(params, m, derived=None):
    """Frequency of whataboutism in level m at the stable PSPE: min{1, (1 - theta_m)^2}."""
    derived = derived or model.derive(params)
    return min(1.0, (1.0 - derived.theta_at(m)) ** 2)


def whataboutism_stats(params, profile):
    """alpha, mu and whataboutism frequency for every level of `profile`."""
    alpha, mu, frequency = [], [], []
    for m in params.levels:
        state = model.StateId(1, m)
        a = alpha_closed_form(params, profile, state)
        alpha.append(a)
        mu.append(mu_and_target(params, profile, state)[0])
        # Both mirror states must end in an unrebuked offence.
        frequency.append(a * alpha_closed_form(params, profile, state.mirror()))
    return WhataboutismStats(alpha=tuple(alpha), mu=tuple(mu), frequency=tuple(frequency))


def two_state_indifference(v, g, b, lam):
    """Payoff from a=1 of the marginal agent in the two-state example with cutoff v."""
    return v - 0.5 * v / g - 0.5 * lam * b * (v + b * lam * v) / (v + b * lam * g)


def two_state_cutoff(g, b, lam):
    """Interior cutoff of the two-state example, or 0 when norms break down."""
    params = model.validate(model.ModelParams(n=1, lam=lam, g=(g,), b=(b,)))
    lb = params.condemnation_rate(1)
    theta = _theta(lb, g)
    if theta > 0.0:
        return lb * g / (2.0 * g - 1.0) * theta
    return 0.0


def two_state_equilibria(g, b, lam):
    """All cutoffs solving the two-state indifference equation: 0 and, when
    it exists, the interior one.
    """
    interior = two_state_cutoff(g, b, lam)
    return (0.0, interior) if interior > 0.0 else (0.0,)


def _stable_quantities(params, m):
    derived = model.derive(params)
    abstain = stable_profile(params, derived).abstain_at(m)
    return abstain, whataboutism_frequency(params, m, derived)


def _validated(params, error=exceptions.ScaleOutOfRange):
    try:
        return model.validate(params)
    except exceptions.ValidationError as e:
        raise error(f'Perturbed parameters are invalid: {e}', field=e.field) from e


def _scaled_or_none(params, k_polarization):
    try:
        return model.validate(params.scaled(k_polarization))
    except exceptions.ValidationError:
        return None


def polarization_derivatives(params, m, k_polarization=1.0, h=DEFAULT_POLARIZATION_STEP):
    """Finite differences of stable abstention and whataboutism frequency in
    level m with respect to the polarization scale k.

    The step is relative: k +/- h k. The difference is central when both
    neighbours are admissible and one-sided when only one of them is, e.g.
    at k = 1 with g_n within a step of 1.

    Returns:
        (d abstain / dk, d frequency / dk)

    Raises:
        ScaleOutOfRange: if k itself, or both k +/- step, push g or b out of range.
    """
    if k_polarization < 1.0:
        raise exceptions.ScaleOutOfRange(f'k_polarization={k_polarization} must be >= 1.',
                                         field='k_polarization')
    center = _validated(params.scaled(k_polarization))
    step = h * k_polarization
    upper = _scaled_or_none(params, k_polarization + step)
    lower = _scaled_or_none(params, k_polarization - step)
    if upper is None and lower is None:
        raise exceptions.ScaleOutOfRange(
            f'k_polarization={k_polarization} +/- {step} both leave the admissible range.',
            field='k_polarization')

    if upper is not None and lower is not None:
        high, low, span = upper, lower, 2.0 * step
    elif upper is not None:
        logger.debug('Forward difference at k=%g: k - %g is out of range.', k_polarization, step)
        high, low, span = upper, center, step
    else:
        logger.debug('Backward difference at k=%g: k + %g is out of range.', k_polarization, step)
        high, low, span = center, lower, step
    return tuple((u - l) / span for u, l in zip(_stable_quantities(high, m),
                                                _stable_quantities(low, m)))


def polarization_response(params, m, k_polarization=1.0, h=DEFAULT_POLARIZATION_STEP):
    """Signs of the polarization derivatives; (-1, +1) for m >= M at k = 1."""
    d_abstain, d_frequency = polarization_derivatives(params, m, k_polarization, h)
    return PolarizationResponse(int(np.sign(d_abstain)), int(np.sign(d_frequency)))


def comparative_statics(params, m, h=1e-6):
    """Finite-difference derivatives of stable abstention and whataboutism
    frequency in level m with respect to lambda, b_m and g_m.

    For m >= M abstention rises with lambda and b_m and falls with g_m;
    frequency moves the opposite way. Below M both are locally constant.

    Returns:
        dict mapping 'lambda', 'b', 'g' to (d abstain, d frequency).
    """
    base = dataclasses.replace(params, cbar=None)

    def perturbed(name, delta):
        if name == 'lambda':
            return dataclasses.replace(base, lam=base.lam + delta)
        values = list(getattr(base, name))
        values[m - 1] += delta
        return dataclasses.replace(base, **{name: tuple(values)})

    statics = {}
    for name, value in (('lambda', base.lam), ('b', base.b_at(m)), ('g', base.g_at(m))):
        step = h * value
        upper = _stable_quantities(_validated(perturbed(name, step), exceptions.RangeViolation), m)
        lower = _stable_quantities(_validated(perturbed(name, -step), exceptions.RangeViolation), m)
        statics[name] = tuple((u - l) / (2.0 * step) for u, l in zip(upper, lower))
    return statics


def equilibrium_records(params):
    """Per-level summary of the benchmark and the stable PSPE, ready for JSON/CSV."""
    derived = model.derive(params)
    benchmark = solve_benchmark(params)
    stable = stable_profile(params, derived)
    stats = whataboutism_stats(params, stable)

    records = []
    for m in params.levels:
        records.append({
            'm': m,
            'c': derived.c_at(m),
            'theta': derived.theta_at(m),
            'x_benchmark': benchmark.abstain[m - 1],
            'x_stable': stable.abstain_at(m),
            'cutoff_stable': stable.cutoff_at(m),
            'alpha': stats.alpha[m - 1],
            'mu': stats.mu[m - 1],
            'whataboutism_frequency': whataboutism_frequency(params, m, derived),
        })
    return records
