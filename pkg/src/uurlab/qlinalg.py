"""Small dense complex linear algebra for finite-dimensional quantum systems.

States and operators are plain numpy arrays.  A pure state is a 1-d complex
array (ket), a mixed state a 2-d density matrix.  The ``as_*`` helpers validate
and coerce inputs; every other function in the package goes through them.
"""

import numpy as np

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)


class DimensionError(ValueError):
    """Operands act on Hilbert spaces of different dimension."""


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    return np.allclose(m, dagger(m), rtol=0, atol=tol)


def as_hermitian(m, tol=HERMITIAN_TOL):
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise NotHermitianError("operator is not Hermitian")
    return m


def as_unitary(u, tol=UNITARY_TOL):
    u = as_matrix(u)
    if not np.allclose(dagger(u) @ u, np.eye(len(u)), rtol=0, atol=tol):
        raise NotUnitaryError("operator is not unitary")
    return u


def as_ket(psi, tol=NORM_TOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size < 1:
        raise InvalidStateError(f"expected a 1-d amplitude vector, got shape {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > tol:
        raise InvalidStateError("state vector is not normalised")
    return psi


def as_density(state, tol=NORM_TOL):
    """Return a validated density matrix; a ket is promoted to its projector."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        psi = as_ket(state, tol)
        return np.outer(psi, psi.conj())
    rho = as_matrix(state)
    if not is_hermitian(rho, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidStateError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho


def state_dim(state):
    return np.shape(state)[0]


def check_dims(dim, *ops):
    for op in ops:
        if np.shape(op) != (dim, dim):
            raise DimensionError(f"operator of shape {np.shape(op)} does not act on dimension {dim}")


def expectation(state, op):
    """tr(rho op), or <psi|op|psi> when ``state`` is a ket."""
    op = np.asarray(op, dtype=complex)
    state = np.asarray(state, dtype=complex)
    check_dims(state.shape[0], op)
    if state.ndim == 1:
        psi = as_ket(state)
        return complex(np.vdot(psi, op @ psi))
    rho = as_density(state)
    # tr(rho op) without forming the product
    return complex(np.sum(rho.T * op))


def sqrtm_psd(rho):
    """Principal square root of a positive semidefinite matrix."""
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def expm_i_hermitian(h, t=1.0):
    """e^{i t H} for Hermitian H by eigendecomposition (unitary to roundoff)."""
    h = as_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ dagger(v)


def psd_diagnostics(m):
    """Return ``(det, min_eig)`` of a Hermitian matrix.

    The determinant comes from LU (numpy), the minimum eigenvalue from a
    Hermitian eigensolver.  For Hermitian input the determinant is real up to
    roundoff; it is returned as a complex number so callers can check that.
    """
    m = as_hermitian(m)
    det = complex(np.linalg.det(m))
    min_eig = float(np.linalg.eigvalsh(m).min())
    return det, min_eig


def phase_fidelity(x, y):
    """|tr(X^dagger Y)| / dim; equals 1 iff X and Y agree up to a global phase (for unitaries)."""
    x = as_matrix(x)
    y = as_matrix(y)
    return abs(np.trace(dagger(x) @ y)) / len(x)


def equal_up_to_phase(x, y, tol=1e-10):
    return abs(phase_fidelity(x, y) - 1.0) <= tol


# ---------------------------------------------------------------------------
# Bloch sphere


def _unit(axis, tol=1e-10):
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,):
        raise ValueError("axis must be a real 3-vector")
    if abs(np.linalg.norm(axis) - 1.0) > tol:
        raise ValueError("axis must be a unit vector")
    return axis


def pauli_dot(r):
    r = np.asarray(r, dtype=float)
    return r[0] * SX + r[1] * SY + r[2] * SZ


def rotation_unitary(axis, angle):
    """cos(angle/2) I + i sin(angle/2) axis.sigma.

    Under rho -> U rho U^dagger the Bloch vector turns through ``angle`` about
    ``axis`` in the clockwise (left-handed) sense; so e^{i pi sigma_y / 8} is
    ``rotation_unitary((0, 1, 0), pi / 4)``.
    """
    n = _unit(axis)
    return np.cos(angle / 2) * I2 + 1j * np.sin(angle / 2) * pauli_dot(n)


def rotation_matrix(axis, angle):
    """3x3 orthogonal matrix acting on Bloch vectors as ``rotation_unitary(axis, angle)`` does."""
    n = _unit(axis)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    # Rodrigues formula for a right-handed turn by -angle
    return np.eye(3) - np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def bloch_to_state(r):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    if np.linalg.norm(r) > 1 + 1e-12:
        raise InvalidStateError("Bloch vector longer than 1")
    return 0.5 * (I2 + pauli_dot(r))


def state_to_bloch(state):
    rho = as_density(state)
    if rho.shape != (2, 2):
        raise DimensionError("Bloch vectors are defined for qubits only")
    return np.array([np.trace(rho @ s).real for s in PAULI])


def bloch_map(direction, value):
    """Map between qubit density matrices and Bloch vectors.

    ``direction`` is ``"to-state"`` or ``"to-vector"``.
    """
    if direction == "to-state":
        return bloch_to_state(value)
    if direction == "to-vector":
        return state_to_bloch(value)
    raise ValueError(f"unknown direction {direction!r}")


def bloch_ket(r):
    """Pure qubit ket whose Bloch vector is the unit vector ``r``."""
    r = np.asarray(r, dtype=float)
    r = r / np.linalg.norm(r)
    theta = np.arccos(np.clip(r[2], -1.0, 1.0))
    phi = np.arctan2(r[1], r[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def spherical_ket(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def ket_to_bloch(psi):
    psi = as_ket(psi)
    if psi.shape != (2,):
        raise DimensionError("Bloch vectors are defined for qubits only")
    return np.array([np.vdot(psi, s @ psi).real for s in PAULI])


# ---------------------------------------------------------------------------
# Random sampling.  ``seed`` may be an int or a numpy Generator.


def _ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_random_unitary(dim, seed=None):
    """Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed."""
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(dim, seed=None):
    rng = np.random.default_rng(seed)
    psi = _ginibre(rng, dim, 1)[:, 0]
    return psi / np.linalg.norm(psi)


def random_density_matrix(dim, seed=None, purity_mix=None):
    """Random full-rank density matrix A A^dagger / tr(A A^dagger).

    With ``purity_mix = p`` the result is blended as p |psi><psi| + (1 - p) rho
    with an independent random pure state, which pushes the purity up.
    """
    rng = np.random.default_rng(seed)
    a = _ginibre(rng, dim, dim)
    rho = a @ dagger(a)
    rho /= np.trace(rho).real
    if purity_mix is not None:
        psi = random_pure_state(dim, rng)
        rho = purity_mix * np.outer(psi, psi.conj()) + (1 - purity_mix) * rho
    return 0.5 * (rho + dagger(rho))


def random_hermitian(dim, seed=None):
    rng = np.random.default_rng(seed)
    a = _ginibre(rng, dim, dim)
    return 0.5 * (a + dagger(a))


def random_unit_vector(seed=None, size=3):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    return v / np.linalg.norm(v)


def mixed_qubit(r):
    """Qubit density matrix with Bloch vector r (alias of bloch_to_state)."""
    return bloch_to_state(r)
