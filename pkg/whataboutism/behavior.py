"""Implements abstract classes for agent behavior and the concrete rules of the game."""

from abc import ABC, abstractmethod

import numpy as np

from whataboutism import exceptions


__all__ = [
    'ValuationDistribution',
    'UniformValuation',
    'CondemnationRule',
    'ExogenousCondemnation',
    'MicrofoundedCondemnation',
    'UNIFORM',
    'RIVAL_RULES',
    'get_rival_rule',
]


class ValuationDistribution(ABC):
    """Distribution of a first-camp agent's intrinsic value v on [0, g_m]."""

    @abstractmethod
    def sample(self, rng, upper, size):
        """Draw `size` independent valuations.

        Args:
            rng: numpy Generator.
            upper: support bound g_m.
            size: number of draws.

        Returns:
            Numpy array of valuations."""
        pass

    @abstractmethod
    def cdf(self, v, upper):
        """Probability that a valuation lies below v."""
        pass


class UniformValuation(ValuationDistribution):
    """v ~ U[0, g_m], the only distribution with closed-form equilibria."""

    def sample(self, rng, upper, size):
        return rng.uniform(0.0, upper, size)

    def cdf(self, v, upper):
        return np.clip(np.asarray(v, dtype=float) / upper, 0.0, 1.0)


class CondemnationRule(ABC):
    """How a rival-camp mover decides whether to condemn."""

    @abstractmethod
    def condemns(self, rng, params, m, size):
        """Return a boolean array: True where the rival mover plays a=0."""
        pass

    @abstractmethod
    def rate(self, params, m):
        """Probability that a single rival mover condemns in level m."""
        pass


class ExogenousCondemnation(CondemnationRule):
    """Rival movers condemn with probability lambda * b_m (a biased coin)."""

    def condemns(self, rng, params, m, size):
        return rng.random(size) < params.condemnation_rate(m)

    def rate(self, params, m):
        return params.condemnation_rate(m)


class MicrofoundedCondemnation(CondemnationRule):
    """Rival movers draw a disutility u ~ U[0, b_m] and a cost c ~ U[0, cbar]
    and condemn iff u > c. The implied rate is b_m / (2 cbar) = lambda * b_m.
    """

    def condemns(self, rng, params, m, size):
        if params.cbar is None:
            raise exceptions.ValidationError(
                'The microfounded condemnation rule needs cbar.', field='cbar'
            )
        disutility = rng.uniform(0.0, params.b_at(m), size)
        cost = rng.uniform(0.0, params.cbar, size)
        return disutility > cost

    def rate(self, params, m):
        return params.b_at(m) / (2.0 * params.cbar)


UNIFORM = UniformValuation()

RIVAL_RULES = {
    'exogenous': ExogenousCondemnation(),
    'microfounded': MicrofoundedCondemnation(),
}


def get_rival_rule(name):
    """Looks up a condemnation rule by name ('exogenous' or 'microfounded')."""
    if isinstance(name, CondemnationRule):
        return name
    try:
        return RIVAL_RULES[name]
    except KeyError:
        raise exceptions.ValidationError(
            f'Unknown rival rule {name!r}; expected one of {sorted(RIVAL_RULES)}.',
            field='rival_rule',
        ) from None
