"""
Linear steering inequalities and the steering-vs-work correlation.

S_n = (1/n) sum_k |<sigma_k (x) sigma_k>| over n measurement settings; an LHS model
obeys S_n <= 1/sqrt(n). The sign of each term is chosen by Bob's optimal alignment.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

import bounds
import engine
import qmath
import states
from engine import Strategy
from errors import InvalidParam, InvalidState

logger = logging.getLogger(__name__)

DEFAULT_AXES = {2: ('z', 'y'), 3: ('z', 'y', 'x')}


@dataclass(frozen=True)
class SteeringReport:
    n: int
    axes: tuple
    correlators: tuple
    s_n: float
    bound: float
    violation: float


@dataclass(frozen=True)
class ScatterResult:
    table: pd.DataFrame
    rank_correlation: float

    def pairs(self):
        """(steering_violation, work_violation) tuples in grid order"""
        return list(zip(self.table['Steering_Violation'], self.table['Work_Violation']))


def linear_steering(rho, n, axes=None):
    """
    Evaluate the n-setting linear steering inequality.

    Args:
        rho: 4x4 bath (x) medium state
        n: 2 or 3 settings
        axes: optional explicit axes, defaults to (z, y) or (z, y, x)
    """
    if n not in DEFAULT_AXES:
        raise InvalidParam(f"linear steering uses 2 or 3 settings, got {n}")
    axes = tuple(axes) if axes is not None else DEFAULT_AXES[n]
    if len(axes) != n or len(set(axes)) != n or not set(axes) <= set('xyz'):
        raise InvalidParam(f"need {n} distinct axes out of x, y, z, got {axes}")

    rho = qmath.validate_density(rho)
    if rho.shape != (4, 4):
        raise InvalidState("shape", "steering is evaluated on 4x4 pair states")

    correlators = tuple(
        qmath.expectation(rho, qmath.tensor(qmath.PAULI[k], qmath.PAULI[k])) for k in axes
    )
    s_n = float(np.mean(np.abs(correlators)))
    bound = 1 / np.sqrt(n)
    return SteeringReport(n=n, axes=axes, correlators=correlators, s_n=s_n,
                          bound=float(bound), violation=float(s_n - bound))


def settings_for(strategy):
    """Steering axes matching the strategy's decompositions, at least two of them"""
    strategy = Strategy.of(strategy)
    axes = tuple(engine.AXES[i] for i in strategy.support())
    if len(axes) < 2:
        axes = DEFAULT_AXES[2]
    return axes


def rank_correlation(x, y, decimals=12):
    """Spearman correlation; values are rounded first so round-off does not split ties"""
    x = np.round(np.asarray(x, dtype=float), decimals)
    y = np.round(np.asarray(y, dtype=float), decimals)
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return float('nan')
    return float(spearmanr(x, y)[0])


def correlation_scatter(family, strategy, eta_grid, q_grid):
    """
    Steering violation against work violation over an (eta, q) grid.

    Args:
        family: state family
        strategy: mixing weights, also selecting the steering settings
        eta_grid: iterable of constructor eta values
        q_grid: iterable of q values

    Returns:
        ScatterResult with the per-point table and the Spearman rank correlation
    """
    family = states.StateFamily.parse(family)
    strategy = Strategy.of(strategy)
    axes = settings_for(strategy)

    rows = []
    for eta, q in itertools.product(eta_grid, q_grid):
        rho = states.family_state(family, eta, q)
        rows.append({
            'Eta': float(eta),
            'Q': float(q),
            'Steering_Violation': linear_steering(rho, len(axes), axes).violation,
            'Work_Violation': bounds.violation(rho, strategy),
        })
    table = pd.DataFrame(rows, columns=['Eta', 'Q', 'Steering_Violation', 'Work_Violation'])
    rho_s = rank_correlation(table['Steering_Violation'], table['Work_Violation'])
    logger.info("scatter %s over %d points: spearman %.6f", family.value, len(table), rho_s)
    return ScatterResult(table=table, rank_correlation=rho_s)
