"""Seeded Monte Carlo engine that plays the game under a cutoff profile and
checks the analytic quantities against simulated frequencies.

Randomness is organised in fixed blocks of CHUNK_SIZE episodes. Block i of
a state draws from the substream (seed, stream, camp, m, i), so estimates are
bit-identical whatever the number of worker threads.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats

from whataboutism import analytic
from whataboutism import behavior
from whataboutism import exceptions
from whataboutism import model
from whataboutism.utils import parallel_utils
from whataboutism.utils import rng_utils

__all__ = [
    'EpisodeRecord',
    'EpisodeBatch',
    'EstimateReport',
    'GeometricFit',
    'run_episode',
    'simulate_episodes',
    'estimate_alpha',
    'sample_rebuttal',
    'estimate_rebuttal_failure',
    'marginal_payoff_closed_form',
    'estimate_marginal_payoff',
    'estimate_whataboutism_frequency',
    'expected_length',
    'geometric_length_test',
    'verify_profile',
]

logger = logging.getLogger(__name__)

CHUNK_SIZE = 2 ** 16
MIN_EPISODES = 10 ** 4
SAFETY_CAP = 10 ** 9

# Substream tags, one per estimator, so estimators never share draws.
EPISODE_STREAM = 0
REBUTTAL_STREAM = 1
PAYOFF_STREAM = 2
PAIR_STREAM = 3

SAME = 'same'
RIVAL = 'rival'


@dataclass(frozen=True)
class EpisodeRecord:
    """One play path; ``terminator_camp`` is relative to the first mover."""
    state: model.StateId
    stage1_offended: bool
    length: int
    terminator_camp: str
    own_camp_all_supported: bool


@dataclass(frozen=True)
class EpisodeBatch:
    """Many play paths in one state, stored column-wise."""
    state: model.StateId
    stage1_offended: np.ndarray
    length: np.ndarray
    rival_terminated: np.ndarray

    @property
    def n_episodes(self):
        return int(self.length.size)

    def record(self, index):
        rival = bool(self.rival_terminated[index])
        return EpisodeRecord(state=self.state,
                             stage1_offended=bool(self.stage1_offended[index]),
                             length=int(self.length[index]),
                             terminator_camp=RIVAL if rival else SAME,
                             own_camp_all_supported=rival)

    def to_frame(self):
        return pd.DataFrame({
            'episode_index': np.arange(self.n_episodes),
            'camp': self.state.camp,
            'm': self.state.m,
            'stage1_offended': self.stage1_offended,
            'length': self.length,
            'terminator': np.where(self.rival_terminated, RIVAL, SAME),
            'all_supported': self.rival_terminated,
        })


@dataclass(frozen=True)
class EstimateReport:
    """A Monte Carlo estimate next to its analytic reference value."""
    quantity: str
    n_episodes: int
    estimate: float
    std_error: float
    analytic: float
    z_score: float
    state: Optional[str] = None

    def within(self, bound):
        return abs(self.z_score) <= bound

    def to_dict(self):
        return {
            'quantity': self.quantity,
            'state': self.state,
            'n_episodes': self.n_episodes,
            'estimate': self.estimate,
            'std_error': self.std_error,
            'analytic': self.analytic,
            'z_score': self.z_score,
        }


@dataclass(frozen=True)
class GeometricFit:
    """Chi-squared goodness of fit of (length - 1) to Geometric(p)."""
    p: float
    statistic: float
    p_value: float
    bins: int
    observed_mean: float
    expected_mean: float


def _z_score(estimate, analytic_value, std_error):
    if std_error > 0.0:
        return (estimate - analytic_value) / std_error
    if estimate == analytic_value:
        return 0.0
    return math.copysign(math.inf, estimate - analytic_value)


def _proportion_report(quantity, successes, n, analytic_value, state=None):
    estimate = successes / n
    std_error = math.sqrt(estimate * (1.0 - estimate) / n)
    return EstimateReport(quantity=quantity, n_episodes=n, estimate=estimate,
                          std_error=std_error, analytic=float(analytic_value),
                          z_score=_z_score(estimate, analytic_value, std_error),
                          state=None if state is None else str(state))


def _check_episodes(n_episodes):
    if isinstance(n_episodes, bool) or not isinstance(n_episodes, (int, np.integer)) \
            or n_episodes < MIN_EPISODES:
        raise exceptions.TooFewEpisodes(
            f'At least {MIN_EPISODES} episodes are needed, got {n_episodes}.', field='episodes'
        )
    return int(n_episodes)


def _chunks(n_episodes):
    return [(index, min(CHUNK_SIZE, n_episodes - start))
            for index, start in enumerate(range(0, n_episodes, CHUNK_SIZE))]


def _play(params, profile, m, size, rng, valuation, rival_rule):
    """Plays `size` independent episodes at level m; returns
    (stage1_offended, length, rival_terminated).
    """
    g = params.g_at(m)
    cutoff = profile.cutoff_at(m)

    # Indifference resolves to a=1.
    offended = valuation.sample(rng, g, size) >= cutoff
    length = np.ones(size, dtype=np.int64)
    rival = np.zeros(size, dtype=bool)

    active = np.flatnonzero(offended)
    stage = 1
    while active.size:
        stage += 1
        if stage > SAFETY_CAP:
            raise exceptions.SafetyCapExceeded(
                f'{active.size} episode(s) at m={m} ran past {SAFETY_CAP} stages.'
            )
        length[active] = stage
        rival_mover = rng.random(active.size) < 0.5
        rival_condemns = rival_rule.condemns(rng, params, m, active.size)
        same_condemns = valuation.sample(rng, g, active.size) < cutoff

        stop_rival = rival_mover & rival_condemns
        stop_same = ~rival_mover & same_condemns
        rival[active[stop_rival]] = True
        active = active[~(stop_rival | stop_same)]

    return offended, length, rival


def run_episode(params, profile, state, rng, valuation=behavior.UNIFORM, rival_rule='exogenous'):
    """Plays a single episode in `state` with generator `rng`."""
    model.check_state(params, state)
    offended, length, rival = _play(params, profile, state.m, 1, rng, valuation,
                                    behavior.get_rival_rule(rival_rule))
    return EpisodeBatch(state, offended, length, rival).record(0)


def simulate_episodes(params, profile, state, n_episodes, seed, workers=None,
                      valuation=behavior.UNIFORM, rival_rule='exogenous', stream=EPISODE_STREAM):
    """Plays `n_episodes` independent episodes in `state`.

    Returns:
        EpisodeBatch, identical for identical (seed, stream, state, n_episodes).
    """
    model.check_state(params, state)
    seed = rng_utils.check_seed(seed)
    rule = behavior.get_rival_rule(rival_rule)
    logger.info('Simulating %d episode(s) in state %s', n_episodes, state)

    def play_chunk(chunk):
        index, size = chunk
        rng = rng_utils.substream(seed, stream, state.camp, state.m, index)
        return _play(params, profile, state.m, size, rng, valuation, rule)

    parts = parallel_utils.ordered_map(play_chunk, _chunks(n_episodes), workers=workers)
    if not parts:
        empty = np.zeros(0, dtype=bool)
        return EpisodeBatch(state, empty, np.zeros(0, dtype=np.int64), empty)
    offended, length, rival = (np.concatenate(column) for column in zip(*parts))
    return EpisodeBatch(state, offended, length, rival)


def estimate_alpha(params, profile, state, n_episodes, seed, workers=None, **kwargs):
    """Fraction of episodes terminated by the rival camp, against alpha."""
    n_episodes = _check_episodes(n_episodes)
    batch = simulate_episodes(params, profile, state, n_episodes, seed, workers=workers, **kwargs)
    return _proportion_report('alpha', int(batch.rival_terminated.sum()), n_episodes,
                              analytic.alpha_closed_form(params, profile, state), state)


def sample_rebuttal(params, profile, state, rng, **kwargs):
    """Draws one play path from the rebuttal target of `state`.

    Returns:
        True iff the rival camp offended at stage 1 and never condemned itself.
    """
    _, target = analytic.mu_and_target(params, profile, state)
    episode = run_episode(params, profile, target, rng, **kwargs)
    return episode.stage1_offended and episode.own_camp_all_supported


def estimate_rebuttal_failure(params, profile, state, n_episodes, seed, workers=None, **kwargs):
    """Failure rate of sampled rebuttals in `state`, against mu."""
    n_episodes = _check_episodes(n_episodes)
    mu, target = analytic.mu_and_target(params, profile, state)
    batch = simulate_episodes(params, profile, target, n_episodes, seed, workers=workers,
                              stream=REBUTTAL_STREAM, **kwargs)
    failures = n_episodes - int((batch.stage1_offended & batch.rival_terminated).sum())
    return _proportion_report('rebuttal_failure', failures, n_episodes, mu, state)


def marginal_payoff_closed_form(params, profile, state, value, whataboutism=True,
                                valuation=behavior.UNIFORM):
    """Expected payoff from a=1 of an agent with intrinsic value `value`."""
    m = state.m
    # A same-camp successor condemns when its valuation falls below the cutoff.
    x = float(valuation.cdf(profile.cutoff_at(m), params.g_at(m)))
    external = analytic.mu_and_target(params, profile, state)[0] if whataboutism else 1.0
    return value - 0.5 * x - 0.5 * params.condemnation_rate(m) * external


def estimate_marginal_payoff(params, profile, state, n_episodes, seed, value=None,
                             whataboutism=True, workers=None, valuation=behavior.UNIFORM,
                             rival_rule='exogenous'):
    """Monte Carlo estimate of the payoff from playing a=1.

    Each sample draws the immediate successor: a same-camp successor condemns
    when its valuation is below the cutoff (cost 1); a rival successor
    condemns by the rival rule, and the cost 1 is avoided when a rebuttal path
    sampled from the target state succeeds. With ``whataboutism=False`` every
    condemnation costs 1, as in the benchmark.

    Args:
        value: intrinsic value of the agent; defaults to the cutoff, i.e. the
            marginal agent, whose analytic payoff is 0 at a PSPE.

    Raises:
        NotInterior: if `value` is None and the cutoff of the state is 0.
    """
    model.check_state(params, state)
    n_episodes = _check_episodes(n_episodes)
    seed = rng_utils.check_seed(seed)
    rule = behavior.get_rival_rule(rival_rule)
    m = state.m
    cutoff = profile.cutoff_at(m)

    if value is None:
        if cutoff <= 0.0 or (profile.mstar is not None and m < profile.mstar):
            raise exceptions.NotInterior(
                f'State {state} has no marginal agent: its cutoff is pinned at 0.'
            )
        value = cutoff
    analytic_value = marginal_payoff_closed_form(params, profile, state, value, whataboutism,
                                                 valuation)

    target = analytic.mu_and_target(params, profile, state)[1]
    g = params.g_at(m)

    def sample_chunk(chunk):
        index, size = chunk
        rng = rng_utils.substream(seed, PAYOFF_STREAM, state.camp, m, index)
        rival_mover = rng.random(size) < 0.5
        rival_condemns = rule.condemns(rng, params, m, size)
        same_condemns = valuation.sample(rng, g, size) < cutoff

        internal = ~rival_mover & same_condemns
        external = rival_mover & rival_condemns
        unrebutted = external.copy()
        if whataboutism:
            offended, _, rival = _play(params, profile, target.m, int(external.sum()), rng,
                                       valuation, rule)
            unrebutted[external] = ~(offended & rival)
        return value - internal.astype(float) - unrebutted.astype(float)

    payoffs = np.concatenate(parallel_utils.ordered_map(sample_chunk, _chunks(n_episodes),
                                                        workers=workers))
    estimate = float(payoffs.mean())
    std_error = float(payoffs.std(ddof=1) / math.sqrt(n_episodes))
    return EstimateReport(quantity='marginal_payoff', n_episodes=n_episodes, estimate=estimate,
                          std_error=std_error, analytic=float(analytic_value),
                          z_score=_z_score(estimate, analytic_value, std_error), state=str(state))


def _frequency_reference(params, profile, m):
    derived = model.derive(params)
    if profile.is_pspe and profile.mstar == derived.M:
        return analytic.whataboutism_frequency(params, m, derived)
    return analytic.whataboutism_stats(params, profile).frequency[m - 1]


def estimate_whataboutism_frequency(params, profile, m, n_pairs, seed, workers=None, **kwargs):
    """Fraction of independent mirror-state pairs in which both episodes end
    in an offence terminated by the rival camp.
    """
    n_pairs = _check_episodes(n_pairs)
    hits = None
    for camp in model.CAMPS:
        batch = simulate_episodes(params, profile, model.StateId(camp, m), n_pairs, seed,
                                  workers=workers, stream=PAIR_STREAM, **kwargs)
        supports = batch.stage1_offended & batch.rival_terminated
        hits = supports if hits is None else hits & supports
    return _proportion_report('whataboutism_frequency', int(hits.sum()), n_pairs,
                              _frequency_reference(params, profile, m), f'*,{m}')


def expected_length(params, profile, m, rival_rule='exogenous'):
    """Mean episode length given a stage-1 offence: 1 + 1 / p with
    p = (rival condemnation rate + abstention) / 2.
    """
    rule = behavior.get_rival_rule(rival_rule)
    return 1.0 + 1.0 / _termination_probability(params, profile, m, rule)


def _termination_probability(params, profile, m, rule):
    return 0.5 * rule.rate(params, m) + 0.5 * profile.abstain_at(m)


def geometric_length_test(params, profile, batch, rival_rule='exogenous', min_expected=5.0):
    """Chi-squared test that (length - 1) of offended episodes is Geometric(p).

    Bins k = 1, ..., K - 1 individually and pools k >= K; every bin has an
    expected count of at least `min_expected`.
    """
    rule = behavior.get_rival_rule(rival_rule)
    p = _termination_probability(params, profile, batch.state.m, rule)
    stages = batch.length[batch.stage1_offended] - 1
    n = int(stages.size)
    if n == 0:
        raise exceptions.ValidationError('No offended episodes to test.', field='batch')

    distribution = stats.geom(p)
    K = 1
    while n * distribution.pmf(K) >= min_expected and n * distribution.sf(K) >= min_expected:
        K += 1
    counts = np.bincount(np.minimum(stages, K), minlength=K + 1)[1:]
    expected = n * np.append(distribution.pmf(np.arange(1, K)), distribution.sf(K - 1))
    statistic, p_value = stats.chisquare(counts, expected * (n / expected.sum()))
    return GeometricFit(p=p, statistic=float(statistic), p_value=float(p_value), bins=K,
                        observed_mean=float(stages.mean()) + 1.0,
                        expected_mean=expected_length(params, profile, batch.state.m, rule))


def verify_profile(params, profile, n_episodes, seed, states=None, workers=None, **kwargs):
    """Runs every estimator against `profile`.

    For each state: alpha, rebuttal failure and the marginal agent's payoff
    (the v=0 agent where the cutoff is pinned at 0). For each level touched
    by `states`: the whataboutism frequency.

    Returns:
        list of EstimateReport in a fixed order.
    """
    states = model.all_states(params.n) if states is None else list(states)
    reports = []
    for state in states:
        reports.append(estimate_alpha(params, profile, state, n_episodes, seed,
                                      workers=workers, **kwargs))
        reports.append(estimate_rebuttal_failure(params, profile, state, n_episodes, seed,
                                                 workers=workers, **kwargs))
        try:
            reports.append(estimate_marginal_payoff(params, profile, state, n_episodes, seed,
                                                    workers=workers, **kwargs))
        except exceptions.NotInterior:
            logger.info('State %s is in breakdown; reporting the payoff of the v=0 agent.', state)
            reports.append(estimate_marginal_payoff(params, profile, state, n_episodes, seed,
                                                    value=0.0, workers=workers, **kwargs))
    for m in sorted({state.m for state in states}):
        reports.append(estimate_whataboutism_frequency(params, profile, m, n_episodes, seed,
                                                       workers=workers, **kwargs))
    return reports
