"""Unitary uncertainty relation: Gram matrix positivity and its corollaries.

For a state rho and unitaries U_1..U_n (with U_0 = I prepended) the Gram
matrix G_jk = <U_j^dagger U_k> is positive semidefinite.  Everything in this
module is a view of that one fact: the determinant form, the two-unitary
variance form, the Bargmann-phase forms, the Schur-complement matrix form and
the small-angle Robertson-Schroedinger limit.
"""

from dataclasses import asdict, dataclass, field
from itertools import permutations

import numpy as np

from .qlinalg import (
    DimensionError,
    as_density,
    as_hermitian,
    as_unitary,
    check_dims,
    dagger,
    expectation,
    expm_i_hermitian,
    pauli_dot,
    psd_diagnostics,
    state_to_bloch,
)

DET_TOL = 1e-9
PSD_TOL = 1e-10
INDETERMINATE_CUTOFF = 1e-12


@dataclass(frozen=True)
class RelationReport:
    """Outcome of evaluating one inequality.

    ``sense`` is ``">="`` when the relation reads lhs >= rhs and ``"<="`` for
    lhs <= rhs; ``slack`` is oriented so that a non-negative value means the
    relation holds.  ``status`` is ``"ok"``, ``"indeterminate"`` (the relation
    is undefined for this input) or ``"infeasible"`` (the inputs violate it).
    """

    name: str
    lhs: float
    rhs: float
    sense: str = ">="
    tol: float = DET_TOL
    lhs_se: float | None = None
    rhs_se: float | None = None
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    @property
    def slack(self):
        if self.status == "indeterminate":
            return float("nan")
        d = self.lhs - self.rhs
        return d if self.sense == ">=" else -d

    @property
    def saturated(self):
        return self.status != "indeterminate" and abs(self.slack) <= self.tol

    @property
    def holds(self):
        return self.status == "indeterminate" or self.slack >= -self.tol

    def to_dict(self):
        d = asdict(self)
        d["slack"] = self.slack
        d["saturated"] = self.saturated
        d["holds"] = self.holds
        return d


@dataclass(frozen=True)
class BargmannValue:
    value: complex

    @property
    def modulus(self):
        return abs(self.value)

    @property
    def phase(self):
        """Principal argument in (-pi, pi]."""
        p = float(np.angle(self.value))
        return np.pi if p == -np.pi else p


def _prepare(state, unitaries):
    rho = as_density(state)
    us = [as_unitary(u) for u in unitaries]
    check_dims(len(rho), *us)
    return rho, us


def gram_matrix(state, unitaries):
    """(n+1)x(n+1) matrix of <U_j^dagger U_k> with U_0 = I at index 0."""
    rho, us = _prepare(state, unitaries)
    ops = [np.eye(len(rho), dtype=complex)] + us
    m = len(ops)
    g = np.empty((m, m), dtype=complex)
    for j in range(m):
        g[j, j] = 1.0
        for k in range(j + 1, m):
            g[j, k] = expectation(rho, dagger(ops[j]) @ ops[k])
            g[k, j] = np.conj(g[j, k])
    return g


def permutation_expansion(g):
    """Leibniz expansion sum_P sgn(P) prod_j G[j, P(j)].

    Each summand is a product of generalised Bargmann invariants and so is
    separately invariant under U_j -> e^{i phi_j} U_j.
    """
    g = np.asarray(g, dtype=complex)
    m = len(g)
    total = 0j
    for perm in permutations(range(m)):
        inversions = sum(1 for a in range(m) for b in range(a + 1, m) if perm[a] > perm[b])
        term = 1 + 0j
        for j, pj in enumerate(perm):
            term *= g[j, pj]
        total += -term if inversions % 2 else term
    return total


def uur_evaluate(state, unitaries, tol=DET_TOL):
    """det G >= 0, reported together with the stronger G >= 0 diagnostic."""
    g = gram_matrix(state, unitaries)
    det, min_eig = psd_diagnostics(g)
    return RelationReport(
        name="uur-det",
        lhs=det.real,
        rhs=0.0,
        tol=tol,
        extra={"min_eig": min_eig, "det_imag": det.imag, "psd": min_eig >= -PSD_TOL, "n": len(g) - 1},
    )


def variance_unitary(state, u):
    """Var U = 1 - |<U>|^2."""
    rho = as_density(state)
    u = as_unitary(u)
    check_dims(len(rho), u)
    return float(min(_centred_variance(rho, u), 1.0))


def _centred_variance(rho, u):
    # <(U - <U>)^dagger (U - <U>)> avoids the cancellation in 1 - |<U>|^2 for U near a multiple of I
    du = u - expectation(rho, u) * np.eye(len(u))
    return max(expectation(rho, dagger(du) @ du).real, 0.0)


def uur_pair(state, u, v, tol=DET_TOL):
    """Var U Var V >= |<U^dagger V> - <U^dagger><V>|^2."""
    rho, (u, v) = _prepare(state, [u, v])
    eu = expectation(rho, u)
    ev = expectation(rho, v)
    euv = expectation(rho, dagger(u) @ v)
    lhs = _centred_variance(rho, u) * _centred_variance(rho, v)
    rhs = abs(euv - np.conj(eu) * ev) ** 2
    return RelationReport(name="uur-pair", lhs=lhs, rhs=rhs, tol=tol)


def bargmann_invariant(state, unitaries):
    """Cyclic product <U_1^dagger U_2><U_2^dagger U_3>...<U_m^dagger U_1>.

    For a pure state this is tr(P_1 P_2 ... P_m) with P_j the projector on
    U_j|psi>, and it is unchanged by U_j -> e^{i phi_j} U_j.
    """
    if len(unitaries) < 2:
        raise ValueError("a Bargmann invariant needs at least two unitaries")
    rho, us = _prepare(state, unitaries)
    value = 1 + 0j
    for j, uj in enumerate(us):
        uk = us[(j + 1) % len(us)]
        value *= expectation(rho, dagger(uj) @ uk)
    return BargmannValue(complex(value))


def uur_bargmann_pair(state, u, v, tol=DET_TOL):
    """cos Phi >= (|<U>|^2 + |<V>|^2 + |<U^dagger V>|^2 - 1) / (2 |<U><U^dagger V><V^dagger>|).

    Phi is the phase of <U><U^dagger V><V^dagger>.  When that product vanishes
    the relation is undefined and the report is ``indeterminate``; use
    :func:`uur_pair` then.
    """
    rho, (u, v) = _prepare(state, [u, v])
    eu = expectation(rho, u)
    ev = expectation(rho, v)
    euv = expectation(rho, dagger(u) @ v)
    b = eu * euv * np.conj(ev)
    numer = abs(eu) ** 2 + abs(ev) ** 2 + abs(euv) ** 2 - 1
    if abs(b) < INDETERMINATE_CUTOFF:
        return RelationReport(
            name="uur-bargmann", lhs=float("nan"), rhs=float("nan"), tol=tol,
            status="indeterminate", extra={"bargmann": b},
        )
    phi = BargmannValue(complex(b)).phase
    return RelationReport(
        name="uur-bargmann", lhs=float(np.cos(phi)), rhs=numer / (2 * abs(b)), tol=tol,
        extra={"phi": phi, "bargmann": complex(b)},
    )


def variance_hermitian(state, a):
    """<A^2> - <A>^2 for Hermitian A (not to be confused with variance_unitary)."""
    rho = as_density(state)
    a = as_hermitian(a)
    check_dims(len(rho), a)
    m1 = expectation(rho, a).real
    return expectation(rho, a @ a).real - m1 * m1


def covariance(state, a, b):
    """Symmetrised quantum covariance <(AB + BA)/2> - <A><B>."""
    rho = as_density(state)
    a = as_hermitian(a)
    b = as_hermitian(b)
    check_dims(len(rho), a, b)
    return (0.5 * expectation(rho, a @ b + b @ a) - expectation(rho, a) * expectation(rho, b)).real


def rs_pair(state, a, b, tol=1e-10):
    """Robertson-Schroedinger: Var A Var B >= |<[A,B]>|^2 / 4 + Cov(A,B)^2."""
    rho = as_density(state)
    a = as_hermitian(a)
    b = as_hermitian(b)
    check_dims(len(rho), a, b)
    lhs = variance_hermitian(rho, a) * variance_hermitian(rho, b)
    comm = expectation(rho, a @ b - b @ a)
    rhs = 0.25 * abs(comm) ** 2 + covariance(rho, a, b) ** 2
    return RelationReport(name="robertson-schroedinger", lhs=lhs, rhs=rhs, tol=tol)


@dataclass(frozen=True)
class RSLimitRow:
    eps: float
    var_u_scaled: float
    var_v_scaled: float
    lhs_scaled: float
    rhs_scaled: float
    err_var_u: float
    err_var_v: float
    err_lhs: float
    err_rhs: float


@dataclass(frozen=True)
class RSLimitTable:
    rows: list
    var_a: float
    var_b: float
    rs_lhs: float
    rs_rhs: float
    constant: float

    def ratios(self, column):
        """Error ratios between successive rows for ``column`` (e.g. ``"err_lhs"``)."""
        errs = [getattr(r, column) for r in self.rows]
        return [e0 / e1 if e1 > 0 else float("inf") for e0, e1 in zip(errs, errs[1:])]


def rs_limit_probe(state, a, b, eps_list):
    """Small-angle limit of the two-unitary relation with U = e^{i eps A}, V = e^{i eps B}.

    Each row holds Var U / eps^2, Var V / eps^2, lhs / eps^4 and rhs / eps^4
    and their distances from the Robertson-Schroedinger quantities.  The
    reported ``constant`` is the smallest C with every distance <= C eps.
    """
    rho = as_density(state)
    a = as_hermitian(a)
    b = as_hermitian(b)
    check_dims(len(rho), a, b)
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(e > 0.5 for e in eps_list):
        raise ValueError("eps values must not exceed 0.5")
    var_a = variance_hermitian(rho, a)
    var_b = variance_hermitian(rho, b)
    rs = rs_pair(rho, a, b)
    rows = []
    for eps in eps_list:
        u = expm_i_hermitian(a, eps)
        v = expm_i_hermitian(b, eps)
        rep = uur_pair(rho, u, v)
        vu = variance_unitary(rho, u) / eps**2
        vv = variance_unitary(rho, v) / eps**2
        ls = rep.lhs / eps**4
        rsc = rep.rhs / eps**4
        rows.append(RSLimitRow(eps, vu, vv, ls, rsc, abs(vu - var_a), abs(vv - var_b),
                               abs(ls - rs.lhs), abs(rsc - rs.rhs)))
    constant = max(max(r.err_var_u, r.err_var_v, r.err_lhs, r.err_rhs) / r.eps for r in rows)
    return RSLimitTable(rows, var_a, var_b, rs.lhs, rs.rhs, constant)


def schwarz_matrix_check(state, unitaries):
    """Minimum eigenvalue of C - u u^dagger with u_j = <U_j>, C_jk = <U_j^dagger U_k>.

    C - u u^dagger is the Schur complement of the leading 1 in G, so it is PSD
    exactly when G is.
    """
    if len(unitaries) < 1:
        raise ValueError("need at least one unitary")
    g = gram_matrix(state, unitaries)
    u = g[0, 1:]
    c = g[1:, 1:]
    m = c - np.outer(u.conj(), u)
    return float(np.linalg.eigvalsh(0.5 * (m + dagger(m))).min())


def qubit_tight_relation(state, a, b, tol=1e-10):
    """State-independent qubit relation for A = a.sigma, B = b.sigma.

    Checks <AB> = a.b + i (a x b).r, evaluates
    <A>^2 + <B>^2 - 2(a.b)<A><B> <= 1 - (a.b)^2 - ((a x b).r)^2
    (stored in ``extra``) and returns the chained relation
    dA^2 + dB^2 + 2|a.b| sqrt(1 - dA^2) sqrt(1 - dB^2) >= 1 + (a.b)^2.
    """
    rho = as_density(state)
    if rho.shape != (2, 2):
        raise DimensionError("qubit_tight_relation needs a qubit state")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for vec in (a, b):
        if abs(np.linalg.norm(vec) - 1) > 1e-10:
            raise ValueError("directions must be unit vectors")
    r = state_to_bloch(rho)
    A = pauli_dot(a)
    B = pauli_dot(b)
    ab = float(a @ b)
    triple = float(np.cross(a, b) @ r)
    identity_residual = abs(expectation(rho, A @ B) - (ab + 1j * triple))
    ea = expectation(rho, A).real
    eb = expectation(rho, B).real
    s13_lhs = ea**2 + eb**2 - 2 * ab * ea * eb
    s13_rhs = 1 - ab**2 - triple**2
    da2 = 1 - ea**2
    db2 = 1 - eb**2
    lhs = da2 + db2 + 2 * abs(ab) * np.sqrt(max(1 - da2, 0.0)) * np.sqrt(max(1 - db2, 0.0))
    return RelationReport(
        name="qubit-tight",
        lhs=float(lhs),
        rhs=1 + ab**2,
        tol=tol,
        extra={
            "identity_residual": float(identity_residual),
            "s13_lhs": float(s13_lhs),
            "s13_rhs": float(s13_rhs),
            "s13_slack": float(s13_rhs - s13_lhs),
            "bloch_radius": float(np.linalg.norm(r)),
            "chain": [float(lhs), 2 - s13_lhs, 1 + ab**2 + triple**2, 1 + ab**2],
        },
    )


def cyclic_bargmann(g, indices):
    """Generalised Bargmann invariant G[j1,j2] G[j2,j3] ... G[jm,j1] read off a Gram matrix."""
    value = 1 + 0j
    for p, j in enumerate(indices):
        value *= g[j, indices[(p + 1) % len(indices)]]
    return value


def bargmann_n3_relation(state, u, v, w, tol=DET_TOL):
    """Three-unitary relation written with generalised Bargmann invariants.

    Labels 1..4 stand for I, U, V, W.  Returns the variance form
    Var U Var(V^dag W) + Var V Var(U^dag W) + Var W Var(U^dag V)
      >= 2 - 2 Re{B123 + B124 + B134 + B234} + 2 Re{B1234 + B1243 + B1324}.
    """
    g = gram_matrix(state, [u, v, w])
    B = lambda *idx: cyclic_bargmann(g, [i - 1 for i in idx])
    t = {(j, k): abs(g[j - 1, k - 1]) ** 2 for j in range(1, 5) for k in range(j + 1, 5)}
    lhs = (1 - t[1, 2]) * (1 - t[3, 4]) + (1 - t[1, 3]) * (1 - t[2, 4]) + (1 - t[1, 4]) * (1 - t[2, 3])
    triples = B(1, 2, 3) + B(1, 2, 4) + B(1, 3, 4) + B(2, 3, 4)
    quads = B(1, 2, 3, 4) + B(1, 2, 4, 3) + B(1, 3, 2, 4)
    rhs = 2 - 2 * triples.real + 2 * quads.real
    return RelationReport(name="uur-bargmann-n3", lhs=float(lhs), rhs=float(rhs), tol=tol)
