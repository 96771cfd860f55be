"""Fixed-point machinery for the equilibrium self-map, the dynamic-stability
test and the divergence of the benchmark stage recursion.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from whataboutism import analytic
from whataboutism import exceptions
from whataboutism import model
from whataboutism.utils import parallel_utils

__all__ = [
    'IterationTrace',
    'LevelStability',
    'StabilityReport',
    'RecursionTrace',
    'self_map',
    'stability_map',
    'iterate',
    'multi_start',
    'check_stability',
    'benchmark_recursion',
    'solve_mirror_system',
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10 ** 6
DEFAULT_DELTA = 1e-3
DEFAULT_GRID_POINTS = 64

# Relative distance below which two points are treated as one.
SAME_POINT_RTOL = 1e-12

FORMS = ('self_map', 'stability_map')


@dataclass(frozen=True)
class IterationTrace:
    """Iterates x^0, x^1, ... of a map; ``limit`` is None unless converged.

    ``residual`` is |x - F(x)| at the last iterate.
    """
    iterates: Tuple[float, ...]
    converged: bool
    limit: Optional[float]
    residual: float

    def to_frame(self):
        return pd.DataFrame({'step': np.arange(len(self.iterates)),
                             'value': np.asarray(self.iterates)})


@dataclass(frozen=True)
class LevelStability:
    """Outcome of the stability test at one sensitivity level.

    Attributes:
        m: sensitivity level.
        fixed_points: non-negative fixed points of the self-map.
        stable_point: the fixed point the self-map contracts to.
        point: the profile's abstention x_m around which perturbations are taken.
        contraction_margin: largest |c phi(x') - c phi(x)| / |x' - x| on the grid.
        conjugate_margin: the same ratio for z -> phi(c z) around z = x / c.
        literal_margin: the ratio for z -> phi(c z) taken around z = x itself.
        derivative: slope of the self-map at x.
        stable: contraction_margin < 1.
        witness: a perturbation x' that does not contract, if any.
    """
    m: int
    fixed_points: Tuple[float, ...]
    stable_point: float
    point: float
    contraction_margin: float
    conjugate_margin: float
    literal_margin: float
    derivative: float
    stable: bool
    witness: Optional[float]

    @property
    def forms_agree(self):
        return self.stable == (self.conjugate_margin < 1.0)


@dataclass(frozen=True)
class StabilityReport:
    mstar: Optional[int]
    levels: Tuple[LevelStability, ...]

    @property
    def stable(self):
        return all(level.stable for level in self.levels)

    @property
    def witness(self):
        """(m, x') for the first level that fails to contract, else None."""
        for level in self.levels:
            if not level.stable:
                return level.m, level.witness
        return None

    def to_dict(self):
        return {
            'mstar': self.mstar,
            'stable': self.stable,
            'levels': [
                {
                    'm': level.m,
                    'fixed_points': list(level.fixed_points),
                    'stable_point': level.stable_point,
                    'point': level.point,
                    'contraction_margin': level.contraction_margin,
                    'conjugate_margin': level.conjugate_margin,
                    'literal_margin': level.literal_margin,
                    'derivative': level.derivative,
                    'stable': level.stable,
                    'witness': level.witness,
                }
                for level in self.levels
            ],
        }


@dataclass(frozen=True)
class RecursionTrace:
    """Trajectory of the benchmark stage recursion.

    ``direction`` is +1 (diverges upward), -1 (downward) or 0 (stationary);
    ``exited`` flags a trajectory truncated when it left [0, g_m].
    """
    values: Tuple[float, ...]
    exited: bool
    direction: int
    exit_step: Optional[int]


def self_map(params, m, x, derived=None):
    """x -> c_m phi_m(x), the best reply to population abstention x."""
    derived = derived or model.derive(params)
    return derived.c_at(m) * model.phi(params, m, x)


def stability_map(params, m, z, derived=None):
    """z -> phi_m(c_m z), conjugate to the self-map through x = c_m z."""
    derived = derived or model.derive(params)
    return model.phi(params, m, derived.c_at(m) * z)


def iterate(params, m, x0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, form='self_map'):
    """Iterates the self-map (or its conjugate) until successive iterates
    differ by at most `tol`.

    A run that reaches `max_iter` is returned as a non-converged trace.
    """
    if form not in FORMS:
        raise exceptions.ValidationError(f'Unknown form {form!r}.', field='form')
    if not (math.isfinite(x0) and x0 >= 0.0):
        raise exceptions.RangeViolation(f'x0={x0} must be non-negative.', field='x0')

    derived = model.derive(params)
    func = self_map if form == 'self_map' else stability_map

    iterates = [float(x0)]
    x = float(x0)
    converged = False
    for _ in range(max_iter):
        x_next = float(func(params, m, x, derived))
        iterates.append(x_next)
        if abs(x_next - x) <= tol:
            converged = True
            x = x_next
            break
        x = x_next

    residual = abs(x - float(func(params, m, x, derived)))
    if not converged:
        logger.warning('Iteration at m=%d from x0=%g did not converge in %d steps '
                       '(residual %g).', m, x0, max_iter, residual)
    return IterationTrace(iterates=tuple(iterates), converged=converged,
                          limit=x if converged else None, residual=residual)


def multi_start(params, m, starts, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, workers=None):
    """Runs `iterate` from every start; traces come back in the order of `starts`."""
    return parallel_utils.ordered_map(
        lambda x0: iterate(params, m, x0, tol=tol, max_iter=max_iter),
        starts,
        workers=workers,
    )


def _same_point(a, b):
    return abs(a - b) <= SAME_POINT_RTOL * max(1.0, abs(a), abs(b))


def _perturbations(point, delta, grid_points, fixed_points, upper):
    half = max(1, grid_points // 2)
    offsets = delta * np.arange(1, half + 1) / half
    grid = np.concatenate([point - offsets[::-1], point + offsets])
    # Fixed points closer than delta would hide between grid nodes.
    extra = [0.5 * (point + fp) for fp in fixed_points
             if abs(fp - point) < delta and not _same_point(fp, point)]
    grid = np.concatenate([grid, np.asarray(extra, dtype=float)])
    grid = grid[(grid >= 0.0) & (grid < upper) & (grid != point)]
    return np.sort(grid)


def _max_ratio(func, point, grid):
    if grid.size == 0:
        return 0.0, None
    ratios = np.abs(func(grid) - func(point)) / np.abs(grid - point)
    worst = int(np.argmax(ratios))
    failing = np.flatnonzero(ratios >= 1.0)
    witness = float(grid[failing[0]]) if failing.size else None
    return float(ratios[worst]), witness


def check_stability(params, profile, delta=DEFAULT_DELTA, grid_points=DEFAULT_GRID_POINTS):
    """Tests a profile for dynamic stability.

    At every level, abstention is perturbed on a symmetric grid of
    `grid_points` points within `delta` (clipped to [0, 1)) and the self-map
    must move every perturbation strictly closer: |c phi(x') - c phi(x)| < |x' - x|.
    The conjugate map z -> phi(c z) is tested in its own coordinate z = x / c.

    Returns:
        StabilityReport; only the m* = M profile of a PSPE family is stable.
    """
    derived = model.derive(params)
    levels = []
    for m in params.levels:
        c, theta = derived.c_at(m), derived.theta_at(m)
        lb = params.condemnation_rate(m)
        x = profile.abstain_at(m)
        fixed_points = (0.0, c * theta) if theta > 0.0 else (0.0,)
        # Test a profile sitting on a fixed point at that fixed point.
        x = next((fp for fp in fixed_points if _same_point(fp, x)), x)
        stable_point = fixed_points[-1]

        grid = _perturbations(x, delta, grid_points, fixed_points, 1.0)
        margin, witness = _max_ratio(lambda v: self_map(params, m, v, derived), x, grid)

        z = x / c
        z_grid = _perturbations(z, delta, grid_points, [fp / c for fp in fixed_points], 1.0 / c)
        conjugate_margin, _ = _max_ratio(lambda v: stability_map(params, m, v, derived), z, z_grid)
        literal_margin, _ = _max_ratio(lambda v: stability_map(params, m, v, derived), x, grid)

        derivative = c * (1.0 + lb) * lb / (lb + x) ** 2
        levels.append(LevelStability(
            m=m,
            fixed_points=fixed_points,
            stable_point=stable_point,
            point=x,
            contraction_margin=margin,
            conjugate_margin=conjugate_margin,
            literal_margin=literal_margin,
            derivative=derivative,
            stable=margin < 1.0,
            witness=witness,
        ))

    report = StabilityReport(mstar=profile.mstar, levels=tuple(levels))
    for level in report.levels:
        if not level.forms_agree:
            logger.warning('Stability verdicts of the self-map and its conjugate disagree at m=%d.',
                           level.m)
    return report


def benchmark_recursion(params, m, v0, steps):
    """Runs the benchmark stage recursion v^{k+1} = 2 g v^k - lambda b g forward.

    Written around the stationary cutoff v*, v^{k+1} - v* = 2 g (v^k - v*),
    so a start at v* stays exactly there. Any other start diverges
    monotonically and the trajectory is truncated at the first value outside
    [0, g_m].
    """
    g = params.g_at(m)
    if not 0.0 <= v0 <= g:
        raise exceptions.RangeViolation(f'v0={v0} must lie in [0, g_{m}={g}].', field='v0')

    stationary = analytic.solve_benchmark(params).cutoff[m - 1]
    deviation = v0 - stationary
    values = [float(v0)]
    exited = False
    exit_step = None
    for step in range(1, steps + 1):
        deviation *= 2.0 * g
        value = stationary + deviation
        values.append(value)
        if not 0.0 <= value <= g:
            exited = True
            exit_step = step
            break

    return RecursionTrace(values=tuple(values), exited=exited,
                          direction=int(np.sign(v0 - stationary)), exit_step=exit_step)


def solve_mirror_system(params, m, T=math.inf, grid_points=2000):
    """Finds every solution of x = c min{phi(y), T}, y = c min{phi(x), T}.

    Solutions are the roots of x -> F(F(x)) - x with F(y) = c min{phi(y), T}
    on [0, c min{T, 1 + lambda b}]. Sign changes on a mixed geometric and
    linear grid are refined by bisection.

    Returns:
        Sorted tuple of (x, y) pairs; (0, 0) is always among them.
    """
    derived = model.derive(params)
    theta = derived.theta_at(m)
    if not (T > 0.0 and T >= theta):
        raise exceptions.RangeViolation(f'T={T} must be positive and at least theta_{m}={theta}.',
                                        field='T')
    c = derived.c_at(m)
    lb = params.condemnation_rate(m)

    def best_reply(y):
        return c * min(float(model.phi(params, m, y)), T)

    def gap(x):
        return best_reply(best_reply(x)) - x

    upper = c * min(T, 1.0 + lb)
    half = max(2, grid_points // 2)
    grid = np.unique(np.concatenate([
        np.geomspace(upper * 1e-12, upper, half),
        np.linspace(0.0, upper, half + 1)[1:],
    ]))
    values = np.array([gap(x) for x in grid])

    roots = [0.0]
    for left, right, f_left, f_right in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if f_left == 0.0:
            roots.append(float(left))
        elif f_left * f_right < 0.0:
            roots.append(optimize.bisect(gap, left, right, xtol=1e-16, rtol=4 * np.finfo(float).eps))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))

    unique = []
    for root in sorted(roots):
        if not unique or root - unique[-1] > 1e-12:
            unique.append(root)
    return tuple((x, best_reply(x)) for x in unique)
