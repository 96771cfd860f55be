import numpy as np

from whataboutism import exceptions

MAX_SEED = 2 ** 64 - 1


def check_seed(seed):
    """Validates a master seed.

    Parameters
    ----------
    seed : int or None
        Unsigned 64-bit master seed.

    Returns
    -------
    int
        The seed.

    Raises
    ------
    exceptions.SeedMissing
        If `seed` is None; every simulation must be reproducible.
    exceptions.RangeViolation
        If `seed` is not an integer in [0, 2**64).
    """
    if seed is None:
        raise exceptions.SeedMissing(
            'A seed is required so that simulations are reproducible.',
            field='seed',
        )
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise exceptions.RangeViolation(
            f'Seed must be an integer, got {seed!r}.', field='seed'
        )
    if not 0 <= int(seed) <= MAX_SEED:
        raise exceptions.RangeViolation(
            f'Seed must lie in [0, 2**64), got {seed}.', field='seed'
        )
    return int(seed)


def substream(seed, *key):
    """Returns an independent generator for the substream `key` of `seed`.

    The same ``(seed, key)`` always yields the same stream, whichever thread
    asks for it and in whatever order.

    Parameters
    ----------
    seed : int
        Master seed.
    *key : int
        Non-negative integers identifying the substream (for example a
        stream tag, the state and a block index).

    Returns
    -------
    numpy.random.Generator
    """
    sequence = np.random.SeedSequence(entropy=check_seed(seed),
                                      spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))
