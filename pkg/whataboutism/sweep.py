"""Parameter sweeps over lambda, the polarization scale and uniform g/b scalings."""
import dataclasses
import logging
import math
import pathlib
from dataclasses import dataclass
from typing import Tuple

import pandas as pd

from whataboutism import analytic
from whataboutism import exceptions
from whataboutism import model
from whataboutism.utils import io_utils
from whataboutism.utils import parallel_utils

logger = logging.getLogger(__name__)

AXES = ('lambda', 'k_polarization', 'g_scalar', 'b_scalar')
QUANTITIES = ('abstain', 'cutoff', 'whataboutism_frequency', 'alpha', 'mu')

# Direction in which each stable quantity must move (weakly) as the axis value
# grows; quantities without a definite direction are left unchecked.
EXPECTED_DIRECTION = {
    'lambda': {'abstain': 1, 'cutoff': 1, 'whataboutism_frequency': -1, 'alpha': -1, 'mu': 1},
    'b_scalar': {'abstain': 1, 'cutoff': 1, 'whataboutism_frequency': -1, 'alpha': -1, 'mu': 1},
    'g_scalar': {'abstain': -1, 'cutoff': -1, 'whataboutism_frequency': 1, 'alpha': 1, 'mu': -1},
    'k_polarization': {'abstain': -1, 'whataboutism_frequency': 1, 'alpha': 1, 'mu': -1},
}


@dataclass(frozen=True)
class SweepSpec:
    """A grid over one axis applied to a base parameter set."""
    axis: str
    values: Tuple[float, ...]
    base: model.ModelParams
    outputs: Tuple[str, ...] = QUANTITIES


@dataclass(frozen=True)
class SkippedPoint:
    axis_value: float
    reason: str


@dataclass(frozen=True)
class SweepResult:
    """Tidy rows sorted by (axis_value, m, quantity), plus skipped grid points
    and monotonicity violations.
    """
    frame: pd.DataFrame
    skipped: Tuple[SkippedPoint, ...]
    violations: Tuple[dict, ...]


def sweep_from_dict(data, base_dir='.'):
    """Builds a SweepSpec from decoded JSON.

    The base parameters are given inline under ``base`` or as a path under
    ``base_config`` (relative to `base_dir`).
    """
    if not isinstance(data, dict):
        raise exceptions.InvalidSweep('A sweep must be a JSON object.')
    axis = data.get('axis')
    if axis not in AXES:
        raise exceptions.InvalidSweep(f'axis must be one of {AXES}, got {axis!r}.', field='axis')

    values = data.get('values')
    if not isinstance(values, list) or not values:
        raise exceptions.InvalidSweep('values must be a non-empty array.', field='values')
    try:
        values = tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise exceptions.InvalidSweep(f'values must be numbers: {e}', field='values') from e
    if not all(math.isfinite(v) for v in values):
        raise exceptions.InvalidSweep('values must be finite.', field='values')

    outputs = tuple(data.get('outputs') or QUANTITIES)
    unknown = sorted(set(outputs) - set(QUANTITIES))
    if unknown:
        raise exceptions.InvalidSweep(f'Unknown output(s) {unknown}; expected {QUANTITIES}.',
                                      field='outputs')

    if 'base' in data:
        base = model.params_from_dict(data['base'])
    elif 'base_config' in data:
        base = model.load_params(pathlib.Path(base_dir, data['base_config']))
    else:
        raise exceptions.InvalidSweep('A sweep needs "base" or "base_config".', field='base')
    return SweepSpec(axis=axis, values=values, base=base, outputs=outputs)


def load_sweep(path):
    path = pathlib.Path(path)
    return sweep_from_dict(io_utils.read_json(path, what='sweep'), base_dir=path.parent)


def apply_axis(base, axis, value):
    """The parameters at one grid point (not yet validated).

    cbar is dropped whenever lambda or b move, since it pins lambda to b_n's range.
    """
    if axis == 'lambda':
        return dataclasses.replace(base, lam=value, cbar=None)
    if axis == 'k_polarization':
        return base.scaled(value)
    if axis == 'g_scalar':
        return dataclasses.replace(base, g=tuple(value * g for g in base.g))
    if axis == 'b_scalar':
        return dataclasses.replace(base, b=tuple(value * b for b in base.b), cbar=None)
    raise exceptions.InvalidSweep(f'Unknown axis {axis!r}.', field='axis')


def evaluate_point(spec, value):
    """Returns (rows, skipped) for a single axis value."""
    try:
        params = model.validate(apply_axis(spec.base, spec.axis, value))
    except exceptions.ValidationError as e:
        logger.warning('Skipping %s=%g: %s', spec.axis, value, e)
        return [], SkippedPoint(axis_value=value, reason=str(e))

    derived = model.derive(params)
    benchmark = analytic.solve_benchmark(params)
    stable = analytic.stable_profile(params, derived)
    stats = analytic.whataboutism_stats(params, stable)

    rows = []
    for m in params.levels:
        stable_values = {
            'abstain': stable.abstain_at(m),
            'cutoff': stable.cutoff_at(m),
            'whataboutism_frequency': analytic.whataboutism_frequency(params, m, derived),
            'alpha': stats.alpha[m - 1],
            'mu': stats.mu[m - 1],
        }
        benchmark_values = {
            'abstain': benchmark.abstain[m - 1],
            'cutoff': benchmark.cutoff[m - 1],
        }
        for quantity in spec.outputs:
            rows.append({
                'axis': spec.axis,
                'axis_value': value,
                'm': m,
                'quantity': quantity,
                'stable': stable_values[quantity],
                'benchmark': benchmark_values.get(quantity, math.nan),
                'theta': derived.theta_at(m),
            })
    return rows, None


def check_monotonicity(frame, axis):
    """Finds consecutive axis values where a stable quantity moves against
    its expected direction.
    """
    directions = EXPECTED_DIRECTION[axis]
    violations = []
    for (m, quantity), group in frame.groupby(['m', 'quantity'], sort=True):
        direction = directions.get(quantity)
        if direction is None:
            continue
        group = group.sort_values('axis_value')
        points = list(zip(group['axis_value'], group['stable']))
        for (v0, y0), (v1, y1) in zip(points, points[1:]):
            if (y1 - y0) * direction < 0.0:
                violations.append({'axis': axis, 'm': int(m), 'quantity': quantity,
                                   'from_value': float(v0), 'to_value': float(v1),
                                   'from': float(y0), 'to': float(y1)})
    for violation in violations:
        logger.warning('Monotonicity violation: %s', violation)
    return violations


def run_sweep(spec, workers=None):
    """Evaluates every grid point (possibly in parallel) into a SweepResult."""
    results = parallel_utils.ordered_map(lambda value: evaluate_point(spec, value),
                                         spec.values, workers=workers)
    rows = [row for point_rows, _ in results for row in point_rows]
    skipped = tuple(skip for _, skip in results if skip is not None)

    columns = ['axis', 'axis_value', 'm', 'quantity', 'stable', 'benchmark', 'theta']
    frame = pd.DataFrame(rows, columns=columns)
    order = {quantity: i for i, quantity in enumerate(QUANTITIES)}
    frame = frame.sort_values(['axis_value', 'm', 'quantity'],
                              key=lambda col: col.map(order) if col.name == 'quantity' else col,
                              kind='mergesort').reset_index(drop=True)
    violations = tuple(check_monotonicity(frame, spec.axis)) if len(frame) else ()
    return SweepResult(frame=frame, skipped=skipped, violations=violations)
