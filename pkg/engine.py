"""
The Szilard engine protocol.

Alice measures the bath along the axis of decomposition D_i, Bob applies U_i^+ or U_i^-
to the medium depending on the outcome, and the work is the drop in the medium's
energy Tr(rho H_M) between the initial reduced state and the final state.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

import qmath
import states
from errors import DecompositionMismatch, InvalidParam, InvalidStrategy, InvalidState

logger = logging.getLogger(__name__)

# Bath measurement axis per decomposition: D1 -> sigma_z, D2 -> sigma_y, D3 -> sigma_x
AXES = {1: 'z', 2: 'y', 3: 'x'}
ETA_TOLERANCE = 1e-9
ZERO_PROBABILITY = 1e-12


class Strategy(NamedTuple):
    """Mixing weights (c1, c2, c3) over the decompositions D1..D3"""
    c1: float
    c2: float
    c3: float

    @classmethod
    def of(cls, weights, tol=1e-9):
        """Validate and build a strategy from any 3-sequence or Strategy"""
        try:
            c = tuple(float(x) for x in weights)
        except (TypeError, ValueError):
            raise InvalidStrategy(f"strategy must be three numbers, got {weights!r}")
        if len(c) != 3:
            raise InvalidStrategy(f"strategy must have three weights, got {len(c)}")
        if not all(np.isfinite(x) for x in c) or min(c) < 0:
            raise InvalidStrategy(f"weights must be finite and nonnegative, got {c}")
        if abs(sum(c) - 1) > tol:
            raise InvalidStrategy(f"weights must sum to 1, got {sum(c)!r}")
        return cls(*c)

    def support(self):
        """Indices i with c_i > 0"""
        return [i for i, c in zip((1, 2, 3), self) if c > 0]


W1 = Strategy(1.0, 0.0, 0.0)
W2 = Strategy(0.5, 0.5, 0.0)
W3 = Strategy(1 / 3, 1 / 3, 1 / 3)
PRESETS = {'w1': W1, 'w2': W2, 'w3': W3}


@dataclass(frozen=True)
class Decomposition:
    """Measurement axis on the bath plus the conditional extraction unitaries"""
    index: int
    eta: float
    axis: str
    alpha: float
    n_plus: np.ndarray
    n_minus: np.ndarray
    u_plus: np.ndarray
    u_minus: np.ndarray
    # Bath eigenvectors of the measured Pauli, labeled by the outcome they announce
    phi_plus: np.ndarray
    phi_minus: np.ndarray

    @property
    def proj_plus(self):
        return np.outer(self.phi_plus, np.conj(self.phi_plus))

    @property
    def proj_minus(self):
        return np.outer(self.phi_minus, np.conj(self.phi_minus))

    def unitary(self, sign):
        return self.u_plus if sign > 0 else self.u_minus

    def bloch_rotations(self):
        """Bloch-space rotation matrices (R^+, R^-) of U^+ and U^-"""
        return qmath.bloch_rotation_of(self.u_plus), qmath.bloch_rotation_of(self.u_minus)


@dataclass(frozen=True)
class EngineRun:
    """One protocol evaluation; missing branches (zero probability) carry None"""
    decomposition: int
    p_plus: float
    p_minus: float
    w_plus: Optional[float]
    w_minus: Optional[float]
    average: float
    initial_energy: float
    pre_states: dict = field(default_factory=dict)
    post_states: dict = field(default_factory=dict)


def extraction_angle(eta):
    """alpha = 2 arctan sqrt((1+eta)/(1-eta)), via cos(alpha) = -eta, sin(alpha) = sqrt(1-eta^2)"""
    s = np.sqrt(max(0.0, 1 - eta * eta))
    return float(np.arctan2(s, -eta))


def _target_vectors(index, eta):
    s = np.sqrt(max(0.0, 1 - eta * eta))
    if index == 1:
        return np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])
    if index == 2:
        return np.array([0.0, -s, eta]), np.array([0.0, s, eta])
    return np.array([s, 0.0, eta]), np.array([-s, 0.0, eta])


def _unitaries(index, alpha):
    if index == 1:
        return qmath.SIGMA_X.copy(), qmath.I2.copy()
    axis = np.array([1.0, 0.0, 0.0]) if index == 2 else np.array([0.0, 1.0, 0.0])
    return qmath.rotation(axis, alpha), qmath.rotation(-axis, alpha)


def _steered_state(rho, bath_proj):
    """Normalized medium state after the bath outcome bath_proj, or None if it never occurs"""
    full = qmath.tensor(bath_proj, qmath.I2)
    p = float(np.real(np.trace(full @ rho)))
    if p < ZERO_PROBABILITY:
        return p, None
    return p, qmath.reduce_to_medium(full @ rho @ full) / p


def _label_outcomes(axis, eta, n_plus, n_minus):
    """
    Order the two bath eigenvectors so that '+' steers rho_1(eta) toward n_plus.

    Falls back to the +1 eigenvector of the measured Pauli when the steered
    states cannot tell the outcomes apart (|eta| = 1).
    """
    _, vecs = np.linalg.eigh(qmath.PAULI[axis])
    # eigh sorts ascending: column 1 is the +1 eigenvector
    candidates = [vecs[:, 1], vecs[:, 0]]
    rho1 = states.pure_entangled(eta)

    def mismatch(first, second):
        total = 0.0
        for phi, target in ((first, n_plus), (second, n_minus)):
            _, steered = _steered_state(rho1, np.outer(phi, np.conj(phi)))
            if steered is not None:
                total += np.linalg.norm(qmath.bloch_of(steered) - target)
        return total

    keep = mismatch(candidates[0], candidates[1])
    swap = mismatch(candidates[1], candidates[0])
    if swap < keep - 1e-9:
        return candidates[1], candidates[0]
    return candidates[0], candidates[1]


def make_decomposition(index, eta):
    """
    Build decomposition D_index for the Gibbs parameter eta.

    Args:
        index: 1, 2 or 3
        eta: medium Gibbs parameter in [-1, 1]; the endpoints use the limits of alpha

    Raises:
        InvalidParam: for an unknown index or eta out of range
    """
    if index not in AXES:
        raise InvalidParam(f"decomposition index must be 1, 2 or 3, got {index!r}")
    if not np.isfinite(eta) or abs(eta) > 1:
        raise InvalidParam(f"eta must lie in [-1, 1], got {eta}")
    eta = float(eta)

    alpha = extraction_angle(eta)
    n_plus, n_minus = _target_vectors(index, eta)
    u_plus, u_minus = _unitaries(index, alpha)
    phi_plus, phi_minus = _label_outcomes(AXES[index], eta, n_plus, n_minus)
    return Decomposition(
        index=index,
        eta=eta,
        axis=AXES[index],
        alpha=alpha,
        n_plus=n_plus,
        n_minus=n_minus,
        u_plus=u_plus,
        u_minus=u_minus,
        phi_plus=phi_plus,
        phi_minus=phi_minus,
    )


def _check_inputs(rho, d):
    rho = qmath.validate_density(rho)
    if rho.shape != (4, 4):
        raise InvalidState("shape", "the engine runs on 4x4 bath-medium states")
    eta = states.effective_eta(rho)
    if abs(eta - d.eta) > ETA_TOLERANCE:
        raise DecompositionMismatch(
            f"decomposition D{d.index} built for eta={d.eta:.12g}, state carries {eta:.12g}"
        )
    return rho


def _assemble(d, e_init, branches):
    """branches: {sign: (probability, pre_state or None, post_state or None)}"""
    probs, works, pre, post = {}, {}, {}, {}
    for sign, (p, before, after) in branches.items():
        probs[sign] = p
        if after is None:
            works[sign] = None
            continue
        pre[sign] = before
        post[sign] = after
        works[sign] = e_init - qmath.energy(after)
    average = sum(probs[s] * works[s] for s in branches if works[s] is not None)
    return EngineRun(
        decomposition=d.index,
        p_plus=probs[+1],
        p_minus=probs[-1],
        w_plus=works[+1],
        w_minus=works[-1],
        average=float(average),
        initial_energy=e_init,
        pre_states=pre,
        post_states=post,
    )


def run_protocol(rho, d):
    """
    Measure-then-feedback evaluation of one decomposition.

    Args:
        rho: 4x4 bath (x) medium state
        d: Decomposition built with effective_eta(rho)

    Returns:
        EngineRun with branch probabilities, conditional states and works
    """
    rho = _check_inputs(rho, d)
    e_init = qmath.energy(qmath.reduce_to_medium(rho))

    branches = {}
    for sign, proj in ((+1, d.proj_plus), (-1, d.proj_minus)):
        p, steered = _steered_state(rho, proj)
        if steered is None:
            branches[sign] = (p, None, None)
        else:
            branches[sign] = (p, steered, qmath.conjugate(d.unitary(sign), steered))

    run = _assemble(d, e_init, branches)
    logger.debug("D%d eta=%.6g: p+=%.6g p-=%.6g W=%.12g",
                 d.index, d.eta, run.p_plus, run.p_minus, run.average)
    return run


def run_protocol_deferred(rho, d):
    """
    Circuit evaluation: rotate the bath into the computational basis, fully dephase it,
    apply CROT(U^+, U^-) controlled on the bath, then trace the bath out.
    """
    rho = _check_inputs(rho, d)
    e_init = qmath.energy(qmath.reduce_to_medium(rho))

    # Bath |0> <- outcome '+', bath |1> <- outcome '-'
    basis_change = np.array([np.conj(d.phi_plus), np.conj(d.phi_minus)])
    rotated = qmath.conjugate(qmath.tensor(basis_change, qmath.I2), rho)

    dephased = sum(
        qmath.conjugate(qmath.tensor(p, qmath.I2), rotated) for p in (qmath.PROJ0, qmath.PROJ1)
    )
    crot = qmath.tensor(qmath.PROJ0, d.u_plus) + qmath.tensor(qmath.PROJ1, d.u_minus)
    final = qmath.conjugate(crot, dephased)

    branches = {}
    for sign, k in ((+1, 0), (-1, 1)):
        block = slice(2 * k, 2 * k + 2)
        p = float(np.real(np.trace(dephased[block, block])))
        if p < ZERO_PROBABILITY:
            branches[sign] = (p, None, None)
        else:
            branches[sign] = (p, dephased[block, block] / p, final[block, block] / p)

    run = _assemble(d, e_init, branches)
    medium_final = qmath.reduce_to_medium(final)
    # The channel's output must agree with the branch bookkeeping
    channel_work = e_init - qmath.energy(medium_final)
    if abs(channel_work - run.average) > 1e-12:
        logger.warning("deferred channel work %.15g differs from branch sum %.15g",
                       channel_work, run.average)
    return replace(run, average=channel_work)


def decompositions_for(rho, strategy):
    """Decompositions in the strategy's support, built at the state's effective eta"""
    strategy = Strategy.of(strategy)
    eta = states.effective_eta(rho)
    return {i: make_decomposition(i, eta) for i in strategy.support()}


def average_work(rho, strategy):
    """Sum_i c_i * run_protocol(rho, D_i).average"""
    strategy = Strategy.of(strategy)
    total = 0.0
    for i, d in decompositions_for(rho, strategy).items():
        total += strategy[i - 1] * run_protocol(rho, d).average
    return float(total)


def work_table(rho, strategy):
    """One row per decomposition in the strategy's support"""
    strategy = Strategy.of(strategy)
    rows = []
    for i, d in decompositions_for(rho, strategy).items():
        run = run_protocol(rho, d)
        rows.append({
            'Decomposition': f"D{i}",
            'Axis': d.axis,
            'Weight': strategy[i - 1],
            'P_Plus': run.p_plus,
            'P_Minus': run.p_minus,
            'W_Plus': run.w_plus,
            'W_Minus': run.w_minus,
            'Average': run.average,
        })
    return pd.DataFrame(rows, columns=['Decomposition', 'Axis', 'Weight', 'P_Plus',
                                       'P_Minus', 'W_Plus', 'W_Minus', 'Average'])
