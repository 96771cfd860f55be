"""Primitives, derived quantities and parameter restrictions of the whataboutism game."""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np
from scipy import integrate

from whataboutism import exceptions
from whataboutism.utils import io_utils

__all__ = [
    'CAMPS',
    'ModelParams',
    'StateId',
    'DerivedQuantities',
    'EquilibriumProfile',
    'all_states',
    'check_state',
    'mirror_targets',
    'profile_from_cutoff',
    'profile_from_abstain',
    'profile_from_dict',
    'validate',
    'lambda_from_cbar',
    'condemnation_rate_integral',
    'derive',
    'phi',
    'params_from_dict',
    'load_params',
]

logger = logging.getLogger(__name__)

CAMPS = (1, 2)

# Relative tolerance for lambda == 1 / (2 cbar).
MICROFOUNDATION_RTOL = 1e-12

# |theta_m| below this is flagged as lying on the breakdown boundary.
THETA_BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Primitives of the game.

    Sequences are indexed by sensitivity level; ``g[0]`` belongs to m=1.
    Construction does not validate; call `validate` (or use `load_params`).

    Attributes:
        n: number of sensitivity levels per camp.
        lam: external-condemnation intensity lambda.
        g: upper bounds of offender utility, one per level.
        b: upper bounds of victim disutility, one per level.
        cbar: optional condemnation-cost bound of the microfoundation.
    """
    n: int
    lam: float
    g: Tuple[float, ...]
    b: Tuple[float, ...]
    cbar: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'g', tuple(float(x) for x in self.g))
        object.__setattr__(self, 'b', tuple(float(x) for x in self.b))

    @property
    def levels(self):
        return range(1, self.n + 1)

    def g_at(self, m):
        return self.g[m - 1]

    def b_at(self, m):
        return self.b[m - 1]

    def condemnation_rate(self, m):
        """Probability lambda * b_m that a rival-camp mover condemns."""
        return self.lam * self.b[m - 1]

    def scaled(self, k_polarization):
        """Returns the parameters with every g_m and b_m multiplied by k.

        lambda is kept; cbar is dropped because k * b_n may exceed it.
        """
        return dataclasses.replace(
            self,
            g=tuple(k_polarization * x for x in self.g),
            b=tuple(k_polarization * x for x in self.b),
            cbar=None,
        )

    def to_dict(self):
        data = {'n': self.n, 'lambda': self.lam, 'g': list(self.g), 'b': list(self.b)}
        if self.cbar is not None:
            data['cbar'] = self.cbar
        return data


@dataclass(frozen=True, order=True)
class StateId:
    """A state: the camp that moves first and the sensitivity level m."""
    camp: int
    m: int

    def mirror(self):
        """The rival camp's state of equal sensitivity."""
        return StateId(3 - self.camp, self.m)

    def is_at_least_as_sensitive_as(self, other):
        return self.m >= other.m

    def __str__(self):
        return f'{self.camp},{self.m}'

    @classmethod
    def parse(cls, text):
        """Parses ``'camp,m'`` as used on the command line."""
        try:
            camp, m = (int(part) for part in str(text).split(','))
        except ValueError as e:
            raise exceptions.InvalidState(
                f'State must be written as "camp,m", got {text!r}.', field='state'
            ) from e
        return cls(camp, m)


def all_states(n):
    """All 2n states, camp-major and in increasing sensitivity."""
    return [StateId(camp, m) for camp in CAMPS for m in range(1, n + 1)]


def check_state(params, state):
    """Raises InvalidState unless `state` belongs to the game of `params`."""
    if state.camp not in CAMPS or not 1 <= state.m <= params.n:
        raise exceptions.InvalidState(
            f'State {state} is not one of the 2n={2 * params.n} states.', field='state'
        )
    return state


@dataclass(frozen=True)
class DerivedQuantities:
    """c_m (benchmark abstention), theta_m (whataboutism discount) and M.

    ``boundary_levels`` lists the levels whose theta_m is within
    THETA_BOUNDARY_TOL of zero.
    """
    c: Tuple[float, ...]
    theta: Tuple[float, ...]
    M: int
    boundary_levels: Tuple[int, ...] = ()

    def c_at(self, m):
        return self.c[m - 1]

    def theta_at(self, m):
        return self.theta[m - 1]


@dataclass(frozen=True)
class EquilibriumProfile:
    """Symmetric, stationary cutoff profile shared by both camps.

    ``cutoff`` is authoritative and ``abstain`` is always ``cutoff / g``.
    Profiles built by the analytic module carry ``is_pspe=True`` and their
    breakdown threshold ``mstar``; arbitrary profiles used for simulation
    have ``is_pspe=False`` and usually ``mstar=None``.
    """
    mstar: Optional[int]
    cutoff: Tuple[float, ...]
    abstain: Tuple[float, ...]
    rebuttal_target: Mapping[StateId, StateId] = field(default_factory=dict)
    is_pspe: bool = False

    def cutoff_at(self, m):
        return self.cutoff[m - 1]

    def abstain_at(self, m):
        return self.abstain[m - 1]

    def to_dict(self):
        return {
            'mstar': self.mstar,
            'is_pspe': self.is_pspe,
            'cutoff': list(self.cutoff),
            'abstain': list(self.abstain),
            'rebuttal_target': [
                {'camp': s.camp, 'm': s.m, 'target_camp': t.camp, 'target_m': t.m}
                for s, t in sorted(self.rebuttal_target.items())
            ],
        }


def mirror_targets(n):
    return {state: state.mirror() for state in all_states(n)}


def profile_from_cutoff(params, cutoff, mstar=None, is_pspe=False, rebuttal_target=None):
    """Builds a profile from per-level cutoffs v*_m.

    Args:
        params: validated ModelParams.
        cutoff: n cutoffs, each in [0, g_m].
        mstar: breakdown threshold, if the profile is a PSPE.
        is_pspe: tag enabling equilibrium-only identities.
        rebuttal_target: defaults to the mirror-state map.

    Returns:
        EquilibriumProfile
    """
    cutoff = tuple(float(v) for v in cutoff)
    if len(cutoff) != params.n:
        raise exceptions.LengthMismatch(
            f'Expected {params.n} cutoffs, got {len(cutoff)}.', field='cutoff'
        )
    for m, v in zip(params.levels, cutoff):
        if not 0.0 <= v <= params.g_at(m):
            raise exceptions.RangeViolation(
                f'cutoff[{m}]={v} is outside [0, g_{m}={params.g_at(m)}].', field='cutoff'
            )
    abstain = tuple(v / g for v, g in zip(cutoff, params.g))
    if rebuttal_target is None:
        rebuttal_target = mirror_targets(params.n)
    return EquilibriumProfile(mstar=mstar, cutoff=cutoff, abstain=abstain,
                              rebuttal_target=rebuttal_target, is_pspe=is_pspe)


def profile_from_abstain(params, abstain, mstar=None, is_pspe=False):
    """Builds a profile from abstention probabilities x_m in [0, 1]."""
    abstain = [float(x) for x in abstain]
    if len(abstain) != params.n:
        raise exceptions.LengthMismatch(
            f'Expected {params.n} abstention probabilities, got {len(abstain)}.',
            field='abstain',
        )
    if any(not 0.0 <= x <= 1.0 for x in abstain):
        raise exceptions.RangeViolation('Abstention probabilities must lie in [0, 1].',
                                        field='abstain')
    cutoff = [min(x * g, g) for x, g in zip(abstain, params.g)]
    return profile_from_cutoff(params, cutoff, mstar=mstar, is_pspe=is_pspe)


def profile_from_dict(params, data):
    """Inverse of EquilibriumProfile.to_dict."""
    if not isinstance(data, dict) or 'cutoff' not in data:
        raise exceptions.ValidationError('Profile must be an object with a "cutoff" array.',
                                         field='cutoff')
    targets = None
    if data.get('rebuttal_target'):
        targets = {
            StateId(int(r['camp']), int(r['m'])): StateId(int(r['target_camp']), int(r['target_m']))
            for r in data['rebuttal_target']
        }
    mstar = data.get('mstar')
    return profile_from_cutoff(params, data['cutoff'],
                               mstar=None if mstar is None else int(mstar),
                               is_pspe=bool(data.get('is_pspe', False)),
                               rebuttal_target=targets)


def _check_open_interval(name, values, low, high):
    for m, value in enumerate(values, start=1):
        if not (math.isfinite(value) and low < value < high):
            raise exceptions.RangeViolation(
                f'{name}[{m}]={value} must lie in the open interval ({low}, {high}).',
                field=name,
            )


def validate(params):
    """Checks every restriction on the primitives.

    Bounds are open intervals and are compared exactly, without tolerance.

    Args:
        params: ModelParams.

    Returns:
        The same ModelParams, unchanged.

    Raises:
        RangeViolation, LengthMismatch, OrderingViolation, CbarTooSmall,
        MicrofoundationMismatch.
    """
    if isinstance(params.n, bool) or not isinstance(params.n, (int, np.integer)) or params.n < 1:
        raise exceptions.RangeViolation(f'n must be a positive integer, got {params.n!r}.',
                                        field='n')
    for name, values in (('g', params.g), ('b', params.b)):
        if len(values) != params.n:
            raise exceptions.LengthMismatch(
                f'{name} has {len(values)} entries but n={params.n}.', field=name
            )

    lam = params.lam
    if not (math.isfinite(lam) and 0.0 < lam < 0.5):
        raise exceptions.RangeViolation(f'lambda={lam} must lie in (0, 1/2).', field='lambda')
    _check_open_interval('g', params.g, 1.0, 2.0)
    _check_open_interval('b', params.b, 1.0, 2.0)

    if any(later >= earlier for earlier, later in zip(params.g, params.g[1:])):
        raise exceptions.OrderingViolation(
            f'g must be strictly decreasing in m, got {params.g}.', field='g'
        )
    if any(later <= earlier for earlier, later in zip(params.b, params.b[1:])):
        raise exceptions.OrderingViolation(
            f'b must be strictly increasing in m, got {params.b}.', field='b'
        )
    for m in params.levels:
        if not params.condemnation_rate(m) < 1.0:
            raise exceptions.RangeViolation(f'lambda * b[{m}] must be below 1.', field='b')

    if params.cbar is not None:
        expected = lambda_from_cbar(params.cbar, params.b[-1])
        if abs(lam - expected) > MICROFOUNDATION_RTOL * expected:
            raise exceptions.MicrofoundationMismatch(
                f'lambda={lam} does not match 1/(2 cbar)={expected} for cbar={params.cbar}.',
                field='cbar',
            )
    return params


def lambda_from_cbar(cbar, b_max):
    """Aggregate condemnation intensity implied by costs c ~ U[0, cbar].

    Args:
        cbar: condemnation-cost bound.
        b_max: the largest victim disutility bound b_n.

    Returns:
        1 / (2 cbar), which is below 1/2.
    """
    if not (math.isfinite(cbar) and cbar > b_max):
        raise exceptions.CbarTooSmall(f'cbar={cbar} must exceed b_n={b_max}.', field='cbar')
    return 1.0 / (2.0 * cbar)


def condemnation_rate_integral(cbar, b):
    """Numerically integrates the microfounded probability of external condemnation.

    A rival with disutility u ~ U[0, b] condemns iff u exceeds a cost
    c ~ U[0, cbar]; the result equals lambda * b with lambda = 1 / (2 cbar).
    """
    area, _ = integrate.dblquad(lambda c, u: 1.0, 0.0, b, lambda u: 0.0, lambda u: u,
                                epsabs=1e-13, epsrel=1e-13)
    return area / (cbar * b)


def derive(params):
    """Computes c_m, theta_m and M for validated parameters.

    M is the lowest m with theta_m > 0, or n + 1 if there is none.
    """
    lb = params.lam * np.asarray(params.b)
    g = np.asarray(params.g)
    c = lb / (2.0 * g - 1.0)
    theta = lb - 2.0 * g + 2.0

    positive = np.flatnonzero(theta > 0.0)
    M = int(positive[0]) + 1 if positive.size else params.n + 1

    boundary = tuple(int(i) + 1 for i in np.flatnonzero(np.abs(theta) < THETA_BOUNDARY_TOL))
    if boundary:
        logger.warning('theta_m is within %g of zero at level(s) %s; breakdown boundary.',
                       THETA_BOUNDARY_TOL, list(boundary))

    return DerivedQuantities(c=tuple(c.tolist()), theta=tuple(theta.tolist()), M=M,
                             boundary_levels=boundary)


def phi(params, m, z):
    """phi_m(z) = (lambda b_m z + z) / (lambda b_m + z).

    Accepts scalars or numpy arrays with z >= 0. phi_m(0) = 0 and phi_m is
    strictly increasing with supremum 1 + lambda b_m.
    """
    lb = params.condemnation_rate(m)
    return (lb * z + z) / (lb + z)


def params_from_dict(data):
    """Builds and validates ModelParams from a decoded JSON object."""
    if not isinstance(data, dict):
        raise exceptions.ValidationError('Parameters must be a JSON object.')
    for key in ('n', 'lambda', 'g', 'b'):
        if key not in data:
            raise exceptions.ValidationError(f'Missing parameter "{key}".', field=key)
    for key in ('g', 'b'):
        if not isinstance(data[key], list):
            raise exceptions.ValidationError(f'"{key}" must be an array.', field=key)
    if isinstance(data['n'], bool) or not isinstance(data['n'], int):
        raise exceptions.RangeViolation('"n" must be an integer.', field='n')

    try:
        params = ModelParams(
            n=data['n'],
            lam=float(data['lambda']),
            g=data['g'],
            b=data['b'],
            cbar=None if data.get('cbar') is None else float(data['cbar']),
        )
    except (TypeError, ValueError) as e:
        raise exceptions.ValidationError(f'Non-numeric parameter: {e}') from e
    return validate(params)


def load_params(path):
    """Loads and validates a parameter file (keys n, lambda, g, b, optional cbar)."""
    return params_from_dict(io_utils.read_json(path, what='parameter'))
