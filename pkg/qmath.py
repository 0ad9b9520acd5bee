"""
Small dense operator algebra for one qubit (2x2) and the bath-medium pair (4x4).

Conventions used everywhere in the package:

* Basis index 0 is |0> (ground), index 1 is |1> (excited).
* sigma_z is defined with sigma_z|1> = +|1>, so a Bloch vector has
  v_z = p(1) - p(0) and the Gibbs state with populations (1 +- eta)/2 sits at (0, 0, eta).
  sigma_y carries the matching sign so that sigma_x sigma_y = i sigma_z and
  exp(-i a/2 n.sigma) is a right-handed rotation of the Bloch vector about n.
* Pair operators are ordered bath (x) medium: entry [(2i+k), (2j+l)] = A[i, j] * B[k, l].
"""

import logging

import numpy as np

from errors import InvalidBloch, InvalidState

logger = logging.getLogger(__name__)

TOLERANCE = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
PAULI = {'x': SIGMA_X, 'y': SIGMA_Y, 'z': SIGMA_Z}

PROJ0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ1 = np.array([[0, 0], [0, 1]], dtype=complex)

# Medium Hamiltonian H_M = |1><1|
H_MEDIUM = PROJ1


def tensor(a, b):
    """Kronecker product in bath (x) medium order"""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a):
    return np.conj(np.asarray(a)).T


def conjugate(u, rho):
    """Return U rho U^dagger"""
    return u @ rho @ dagger(u)


def expectation(rho, op):
    """Real part of Tr(rho op); exact for Hermitian op"""
    return float(np.real(np.trace(rho @ op)))


def energy(rho):
    """Internal energy Tr(rho H_M) of a medium state, i.e. the |1> population"""
    return float(np.real(rho[1, 1]))


def validate_density(rho, tol=TOLERANCE):
    """
    Check that rho is a density operator.

    Args:
        rho: 2x2 or 4x4 array-like
        tol: tolerance shared by the Hermiticity, trace and positivity checks

    Returns:
        rho as a complex numpy array

    Raises:
        InvalidState: with ``check`` set to the first failed check
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        raise InvalidState("shape", f"expected 2x2 or 4x4, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("shape", "non-finite entries")

    asym = np.max(np.abs(rho - dagger(rho)))
    if asym > tol:
        raise InvalidState("hermiticity", f"max |rho - rho^dagger| = {asym:.3e}")

    trace_error = abs(np.trace(rho) - 1)
    if trace_error > tol:
        raise InvalidState("trace", f"|Tr(rho) - 1| = {trace_error:.3e}")

    # Symmetrize before the eigensolver so that sub-tolerance asymmetry is ignored
    min_eig = np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0]
    if min_eig < -tol:
        raise InvalidState("positivity", f"minimum eigenvalue {min_eig:.3e}")

    return rho


def is_density(rho, tol=TOLERANCE):
    try:
        validate_density(rho, tol)
    except InvalidState:
        return False
    return True


def partial_trace_bath(rho):
    """Reduced state of the medium (second factor) of a valid 4x4 state"""
    rho = validate_density(rho)
    if rho.shape != (4, 4):
        raise InvalidState("shape", "partial trace needs a 4x4 pair state")
    return reduce_to_medium(rho)


def reduce_to_medium(op):
    """Trace the bath out of any 4x4 operator, without validation"""
    # [(2i+k),(2j+l)] -> [i,k,j,l], sum over i == j
    return np.einsum('ikil->kl', op.reshape(2, 2, 2, 2))


def bloch_of(rho):
    """Bloch vector (vx, vy, vz) of a valid qubit state"""
    rho = validate_density(rho)
    if rho.shape != (2, 2):
        raise InvalidState("shape", "Bloch vectors are defined for 2x2 states")
    return np.array([expectation(rho, PAULI[k]) for k in 'xyz'])


def state_of(v):
    """Qubit density matrix (I + v.sigma)/2 for |v| <= 1"""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidBloch(f"expected a finite 3-vector, got {v!r}")
    norm = np.linalg.norm(v)
    if norm > 1 + 1e-9:
        raise InvalidBloch(f"|v| = {norm:.12g} exceeds 1")
    return (I2 + v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z) / 2


def rotation(axis, angle):
    """
    Single-qubit unitary exp(-i angle/2 n.sigma).

    Args:
        axis: unit 3-vector n (normalized here)
        angle: rotation angle in radians, right-handed about n
    """
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    generator = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * generator


def bloch_rotation_of(u):
    """3x3 real matrix R with bloch(U rho U^dagger) = R bloch(rho)"""
    paulis = [PAULI[k] for k in 'xyz']
    r = np.empty((3, 3))
    for j, sj in enumerate(paulis):
        for k, sk in enumerate(paulis):
            r[j, k] = 0.5 * np.real(np.trace(sj @ u @ sk @ dagger(u)))
    return r


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))
