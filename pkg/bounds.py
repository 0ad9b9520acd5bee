"""
Local-hidden-state (LHS) bound on the average extracted work.

The closed form below is the optimized work-extraction inequality for decompositions
D1..D3 mixed with weights (c1, c2, c3). It is cross-checked by an independent linear
program over hidden-state ensembles supported on a spiral discretization of the sphere.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, linprog

import engine
import qmath
import states
from engine import Strategy
from errors import InfeasibleConstraint, InvalidParam, NoConvergence, NoCrossing
from states import StateFamily

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 1000
SUPPORT_THRESHOLD = 1e-12
LP_METHODS = ("highs-ds", "highs")


@dataclass(frozen=True)
class LhsBoundQuery:
    eta: float
    strategy: Strategy

    def __post_init__(self):
        if not np.isfinite(self.eta) or abs(self.eta) > 1:
            raise InvalidParam(f"eta must lie in [-1, 1], got {self.eta}")
        object.__setattr__(self, 'eta', float(self.eta))
        object.__setattr__(self, 'strategy', Strategy.of(self.strategy))


@dataclass(frozen=True)
class LhsEnsemble:
    """Hidden pure states (unit Bloch vectors) with their weights"""
    weights: np.ndarray
    vectors: np.ndarray

    def mean(self):
        return self.weights @ self.vectors

    def __len__(self):
        return len(self.weights)


def quantum_optimum(eta):
    """(1+eta)/2, the work of the pure entangled state under any strategy"""
    return (1 + eta) / 2


def lhs_bound_closed(query):
    """1/2 (eta + (c2+c3) eta^2 + sqrt(c1^2 + (c2^2+c3^2)(1-eta^2)))"""
    eta = query.eta
    c1, c2, c3 = query.strategy
    root = np.sqrt(c1 ** 2 + (c2 ** 2 + c3 ** 2) * max(0.0, 1 - eta ** 2))
    return float(0.5 * (eta + (c2 + c3) * eta ** 2 + root))


def lhs_bound_is_tight(query, tol=1e-12):
    """
    Whether some LHS ensemble attains the closed form.

    The closed form bounds c1 E|v_z| + s (c2 E|v_y| + c3 E|v_x|), s = sqrt(1-eta^2), by
    Cauchy-Schwarz; the aligned ensemble only exists while its z-component can still
    average to eta.
    """
    eta = query.eta
    c1, c2, c3 = query.strategy
    norm = np.sqrt(c1 ** 2 + (c2 ** 2 + c3 ** 2) * max(0.0, 1 - eta ** 2))
    if norm == 0:
        return True
    return bool(abs(eta) <= c1 / norm + tol)


def sphere_points(n):
    """
    Deterministic Fibonacci spiral on the unit sphere, poles included.

    Args:
        n: number of points

    Returns:
        (n, 3) array of unit vectors
    """
    golden_ratio = (1 + np.sqrt(5)) / 2
    z = np.linspace(1.0, -1.0, n)
    phi = np.arange(n) * (2 * np.pi / golden_ratio)
    r = np.sqrt(np.clip(1 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def hidden_state_gain(query, vectors):
    """
    f(v) = sum_i c_i max_+- [E(v) - E(R_i^+- v)] for each row v of vectors.

    Alice knows the hidden state and announces whichever outcome yields more work.
    """
    vectors = np.atleast_2d(vectors)
    gain = np.zeros(len(vectors))
    for i in query.strategy.support():
        d = engine.make_decomposition(i, query.eta)
        branch_works = []
        for r in d.bloch_rotations():
            # E(v) = (1 + v_z)/2
            branch_works.append((vectors[:, 2] - vectors @ r[2]) / 2)
        gain += query.strategy[i - 1] * np.maximum(*branch_works)
    return gain


def lhs_bound_oracle(query, resolution=20000):
    """
    Maximize the hidden-state average work by linear programming.

    Args:
        query: LhsBoundQuery
        resolution: number of sphere points (at least 1000)

    Returns:
        (optimal value, LhsEnsemble with at most 4 support points)

    Raises:
        InfeasibleConstraint: if the discretization cannot reproduce (0, 0, eta)
        NoConvergence: if the solver stops without an optimal vertex
    """
    if resolution < MIN_RESOLUTION:
        raise InvalidParam(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")

    points = sphere_points(int(resolution))
    gain = hidden_state_gain(query, points)

    # Normalization plus the three components of the average Bloch vector
    a_eq = np.vstack([np.ones(len(points)), points.T])
    b_eq = np.array([1.0, 0.0, 0.0, query.eta])

    # Dual simplex returns a basic solution, so at most 4 weights are nonzero.
    # HiGHS' own method choice (with crossover) is the fallback when it stalls.
    for method in LP_METHODS:
        res = linprog(-gain, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method=method)
        if res.status == 2:
            raise InfeasibleConstraint(f"no ensemble averages to (0, 0, {query.eta}): {res.message}")
        if res.status == 0 and res.x is not None:
            break
        logger.warning("LP method %s stopped with status %d at eta=%.6g: %s",
                       method, res.status, query.eta, res.message)
    else:
        raise NoConvergence(f"LP solver status {res.status}: {res.message}")

    support = np.flatnonzero(res.x > SUPPORT_THRESHOLD)
    weights = res.x[support] / res.x[support].sum()
    ensemble = LhsEnsemble(weights=weights, vectors=points[support])
    value = float(weights @ gain[support])
    logger.info("oracle eta=%.6g c=%s n=%d: %.12g (support %d)",
                query.eta, tuple(query.strategy), resolution, value, len(ensemble))
    return value, ensemble


def replay_ensemble(ensemble, query):
    """
    Run a classical engine on the ensemble: the medium holds hidden pure state v with
    probability p, Alice announces the better outcome for v, Bob applies U_i^+-.
    """
    decompositions = {i: engine.make_decomposition(i, query.eta) for i in query.strategy.support()}
    total = 0.0
    for p, v in zip(ensemble.weights, ensemble.vectors):
        rho = qmath.state_of(v)
        e_init = qmath.energy(rho)
        for i, d in decompositions.items():
            best = max(e_init - qmath.energy(qmath.conjugate(u, rho)) for u in (d.u_plus, d.u_minus))
            total += p * query.strategy[i - 1] * best
    return float(total)


def violation(rho, strategy):
    """Average work minus the closed-form bound at the state's effective eta; > 0 is quantum"""
    strategy = Strategy.of(strategy)
    query = LhsBoundQuery(states.effective_eta(rho), strategy)
    return engine.average_work(rho, strategy) - lhs_bound_closed(query)


def violation_boundary(family, strategy, eta, xtol=1e-12):
    """
    The mixing weight q* where the violation changes sign.

    Args:
        family: GIBBS_INVARIANT or WERNER
        strategy: mixing weights
        eta: constructor Gibbs parameter, |eta| < 1

    Raises:
        NoCrossing: if the violation has one sign on all of [0, 1]
    """
    family = StateFamily.parse(family)
    if family not in (StateFamily.GIBBS_INVARIANT, StateFamily.WERNER):
        raise InvalidParam(f"boundary needs a q-parameterized family, got {family.value}")
    if not np.isfinite(eta) or abs(eta) >= 1:
        raise InvalidParam(f"eta must lie in (-1, 1), got {eta}")
    strategy = Strategy.of(strategy)

    def g(q):
        return violation(states.family_state(family, eta, q), strategy)

    low, high = g(0.0), g(1.0)
    if low == 0:
        return 0.0
    if high == 0:
        return 1.0
    if np.sign(low) == np.sign(high):
        raise NoCrossing(f"violation keeps sign {np.sign(low):+.0f} on [0, 1] "
                         f"for {family.value} at eta={eta}")
    return float(bisect(g, 0.0, 1.0, xtol=xtol))
