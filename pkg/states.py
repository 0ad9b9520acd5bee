"""
State families of the engine, parameterized by the Gibbs parameter eta and mixing weight q.

rho_1 (pure entangled), rho_2 (classically correlated), the Gibbs-invariant mixture
q rho_1 + (1-q) rho_2 and the Werner mixture q rho_1 + (1-q) I/4.
"""

import logging
from enum import Enum

import numpy as np

import qmath
from errors import InvalidParam, NonDiagonalReduced

logger = logging.getLogger(__name__)


class StateFamily(str, Enum):
    PURE_ENTANGLED = "pure"
    CLASSICAL_CORRELATED = "classical"
    GIBBS_INVARIANT = "gibbs_invariant"
    WERNER = "werner"

    @classmethod
    def parse(cls, value):
        """Accept a member, its value, or a case/dash-insensitive spelling"""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "pure": cls.PURE_ENTANGLED,
            "pure_entangled": cls.PURE_ENTANGLED,
            "rho1": cls.PURE_ENTANGLED,
            "classical": cls.CLASSICAL_CORRELATED,
            "classical_correlated": cls.CLASSICAL_CORRELATED,
            "rho2": cls.CLASSICAL_CORRELATED,
            "gibbs_invariant": cls.GIBBS_INVARIANT,
            "gi": cls.GIBBS_INVARIANT,
            "werner": cls.WERNER,
        }
        if key not in aliases:
            raise InvalidParam(f"unknown state family {value!r}")
        return aliases[key]


def _check_eta(eta):
    if not np.isfinite(eta) or abs(eta) > 1:
        raise InvalidParam(f"eta must lie in [-1, 1], got {eta}")


def _check_q(q):
    if not np.isfinite(q) or q < 0 or q > 1:
        raise InvalidParam(f"q must lie in [0, 1], got {q}")


def gibbs_from_beta(beta):
    """eta = (e^-beta - 1)/(e^-beta + 1), with k_B T absorbed into beta"""
    if not np.isfinite(beta):
        raise InvalidParam(f"beta must be finite, got {beta}")
    # Same value as the ratio above, stable for large |beta|
    return float(-np.tanh(beta / 2))


def gibbs(eta):
    """Medium Gibbs state: p(|1>) = (1+eta)/2, p(|0>) = (1-eta)/2"""
    _check_eta(eta)
    return np.diag([(1 - eta) / 2, (1 + eta) / 2]).astype(complex)


def _amplitudes(eta):
    return np.sqrt((1 + eta) / 2), np.sqrt((1 - eta) / 2)


def pure_entangled(eta):
    """rho_1 = |psi><psi| with |psi> = sqrt((1+eta)/2)|11> + sqrt((1-eta)/2)|00>"""
    _check_eta(eta)
    a, b = _amplitudes(eta)
    psi = np.zeros(4, dtype=complex)
    psi[3] = a
    psi[0] = b
    return np.outer(psi, np.conj(psi))


def classical_correlated(eta):
    """rho_2 = (1+eta)/2 |11><11| + (1-eta)/2 |00><00|"""
    _check_eta(eta)
    return np.diag([(1 - eta) / 2, 0, 0, (1 + eta) / 2]).astype(complex)


def gibbs_invariant(eta, q):
    """q rho_1 + (1-q) rho_2; the medium marginal is gibbs(eta) for every q"""
    _check_q(q)
    return q * pure_entangled(eta) + (1 - q) * classical_correlated(eta)


def werner(eta, q):
    """q rho_1 + (1-q) I/4; the medium marginal is gibbs(q * eta)"""
    _check_q(q)
    return q * pure_entangled(eta) + (1 - q) * qmath.I4 / 4


def product_gibbs(eta_bath, eta_medium):
    """Uncorrelated gibbs(eta_bath) (x) gibbs(eta_medium)"""
    return qmath.tensor(gibbs(eta_bath), gibbs(eta_medium))


def family_state(family, eta, q=1.0):
    """
    Build a member of a state family.

    Args:
        family: StateFamily or its name
        eta: constructor Gibbs parameter
        q: mixing weight, ignored for the pure and classical families
    """
    family = StateFamily.parse(family)
    if family is StateFamily.PURE_ENTANGLED:
        return pure_entangled(eta)
    if family is StateFamily.CLASSICAL_CORRELATED:
        return classical_correlated(eta)
    if family is StateFamily.GIBBS_INVARIANT:
        return gibbs_invariant(eta, q)
    return werner(eta, q)


def effective_eta(rho, tol=1e-9):
    """
    The Gibbs parameter actually carried by the medium: v_z of its reduced state.

    Raises:
        NonDiagonalReduced: if the reduced state has transverse Bloch components above tol
    """
    v = qmath.bloch_of(qmath.partial_trace_bath(rho))
    transverse = float(np.hypot(v[0], v[1]))
    if transverse > tol:
        raise NonDiagonalReduced(f"reduced medium state has transverse Bloch norm {transverse:.3e}")
    return float(v[2])
