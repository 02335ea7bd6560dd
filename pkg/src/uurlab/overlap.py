"""Overlap uncertainty relation for pure-state transition probabilities.

Three pure states obey T12 + T13 + T23 - 2 sqrt(T12 T13 T23) <= 1, with
equality exactly when they lie on a common Fubini-Study geodesic (for qubits,
Bloch vectors on a great semicircle).  This module evaluates the relation,
its geometry, the four-state generalisation, and the search for minimum
uncertainty qubit states of the triple (psi, U psi, V psi).
"""

from dataclasses import dataclass, field

import numpy as np

from .qlinalg import (
    DimensionError,
    as_ket,
    as_unitary,
    dagger,
    equal_up_to_phase,
    ket_to_bloch,
    spherical_ket,
)
from .uur import RelationReport

OUR_TOL = 1e-10
FAMILY_TOL = 1e-9
ORTHOGONAL_CUTOFF = 1e-9


class UndefinedPhaseError(ValueError):
    """A Bargmann phase was requested for states with a vanishing overlap."""


def _kets(*states):
    kets = [as_ket(s) for s in states]
    d = kets[0].shape[0]
    for k in kets[1:]:
        if k.shape[0] != d:
            raise DimensionError("states live in different dimensions")
    return kets


def transition_probability(psi1, psi2):
    """|<psi1|psi2>|^2."""
    a, b = _kets(psi1, psi2)
    return float(min(abs(np.vdot(a, b)) ** 2, 1.0))


def fubini_study_angle(psi1, psi2):
    """arccos |<psi1|psi2>| in [0, pi/2], computed without cancellation near 0."""
    a, b = _kets(psi1, psi2)
    ov = np.vdot(a, b)
    perp = np.linalg.norm(b - ov * a)
    return float(np.arctan2(perp, abs(ov)))


@dataclass(frozen=True)
class OverlapTriple:
    T12: float
    T13: float
    T23: float

    def __post_init__(self):
        for name in ("T12", "T13", "T23"):
            t = getattr(self, name)
            if not (0.0 <= t <= 1.0) or not np.isfinite(t):
                raise ValueError(f"{name}={t} is not a probability in [0, 1]")

    @classmethod
    def from_states(cls, psi1, psi2, psi3):
        return cls(transition_probability(psi1, psi2), transition_probability(psi1, psi3),
                   transition_probability(psi2, psi3))

    @classmethod
    def clipped(cls, t12, t13, t23):
        """Build a triple from noisy estimates, clipping each into [0, 1]."""
        return cls(*(float(np.clip(t, 0.0, 1.0)) for t in (t12, t13, t23)))

    @property
    def thetas(self):
        """(theta12, theta13, theta23) with theta = arccos sqrt(T)."""
        return tuple(float(np.arccos(np.sqrt(t))) for t in (self.T12, self.T13, self.T23))


def our_lhs(t12, t13, t23):
    return t12 + t13 + t23 - 2 * np.sqrt(t12 * t13 * t23)


def our_evaluate(triple, tol=OUR_TOL):
    """T12 + T13 + T23 - 2 sqrt(T12 T13 T23) <= 1.

    A triple with lhs > 1 cannot be realised by any three pure states and is
    reported ``infeasible``.
    """
    lhs = float(our_lhs(triple.T12, triple.T13, triple.T23))
    status = "infeasible" if lhs > 1 + tol else "ok"
    return RelationReport(name="our", lhs=lhs, rhs=1.0, sense="<=", tol=tol, status=status)


BRANCHES = ("t23=t12+t13", "t12=t13+t23", "t13=t12+t23")


@dataclass(frozen=True)
class GeodesicResult:
    thetas: tuple  # (theta12, theta13, theta23)
    branch: str
    residual: float
    defects: dict
    in_polytope: bool


def in_polytope(t12, t23, t13, tol=1e-9):
    """Membership of (theta12, theta23, theta13) in the hull of the OUR-allowed angle triples.

    The hull of (0,0,0), (0,p,p), (p,0,p), (p,p,0), (p,p,p) with p = pi/2 is the
    cube [0, p]^3 cut by the three triangle inequalities.
    """
    x, y, z = t12, t23, t13
    half = np.pi / 2
    in_cube = all(-tol <= v <= half + tol for v in (x, y, z))
    return in_cube and x <= y + z + tol and y <= x + z + tol and z <= x + y + tol


def geodesic_check(psi1, psi2, psi3):
    a, b, c = _kets(psi1, psi2, psi3)
    t12 = fubini_study_angle(a, b)
    t13 = fubini_study_angle(a, c)
    t23 = fubini_study_angle(b, c)
    defects = {
        BRANCHES[0]: abs(t23 - (t12 + t13)),
        BRANCHES[1]: abs(t12 - (t13 + t23)),
        BRANCHES[2]: abs(t13 - (t12 + t23)),
    }
    branch = min(BRANCHES, key=defects.get)
    return GeodesicResult((t12, t13, t23), branch, defects[branch], defects, in_polytope(t12, t23, t13))


@dataclass(frozen=True)
class TraceTriangleResult:
    reports: list
    our: RelationReport

    @property
    def all_hold(self):
        return all(r.holds for r in self.reports)

    @property
    def weaker_witness(self):
        """True when the trace-distance triangle inequalities pass but the OUR fails."""
        return self.all_hold and self.our.status == "infeasible"


def trace_triangle_evaluate(triple, tol=OUR_TOL):
    """sqrt(1 - T_ij) <= sqrt(1 - T_ik) + sqrt(1 - T_jk) in all three arrangements."""
    d = {(1, 2): triple.T12, (1, 3): triple.T13, (2, 3): triple.T23}
    dist = {k: np.sqrt(max(1 - t, 0.0)) for k, t in d.items()}
    reports = []
    for side, others in (((1, 2), ((1, 3), (2, 3))), ((1, 3), ((1, 2), (2, 3))), ((2, 3), ((1, 2), (1, 3)))):
        reports.append(RelationReport(
            name=f"trace-triangle-{side[0]}{side[1]}", lhs=float(dist[side]),
            rhs=float(dist[others[0]] + dist[others[1]]), sense="<=", tol=tol,
        ))
    return TraceTriangleResult(reports, our_evaluate(triple, tol))


def _bloch_angle(r1, r2):
    return float(np.arctan2(np.linalg.norm(np.cross(r1, r2)), r1 @ r2))


def spherical_triangle_area(r1, r2, r3):
    """Area of the spherical triangle on unit vectors r1, r2, r3 (l'Huilier's formula)."""
    a = _bloch_angle(r2, r3)
    b = _bloch_angle(r1, r3)
    c = _bloch_angle(r1, r2)
    s = 0.5 * (a + b + c)
    prod = np.tan(s / 2) * np.tan((s - a) / 2) * np.tan((s - b) / 2) * np.tan((s - c) / 2)
    return float(4 * np.arctan(np.sqrt(max(prod, 0.0))))


@dataclass(frozen=True)
class AreaPhaseResult:
    phi: float
    area: float
    defect: float


def bargmann_area_check(psi1, psi2, psi3):
    """Compare the Bargmann phase of three qubit states with their Bloch-triangle area.

    The area equals 2 |Phi|.
    """
    a, b, c = _kets(psi1, psi2, psi3)
    if a.shape != (2,):
        raise DimensionError("the area-phase identity is a qubit statement")
    ov = (np.vdot(a, b), np.vdot(b, c), np.vdot(c, a))
    if min(abs(x) for x in ov) < ORTHOGONAL_CUTOFF:
        raise UndefinedPhaseError("a pair of states is orthogonal; the Bargmann phase is undefined")
    phi = float(np.angle(ov[0] * ov[1] * ov[2]))
    area = spherical_triangle_area(ket_to_bloch(a), ket_to_bloch(b), ket_to_bloch(c))
    return AreaPhaseResult(phi, area, abs(area - 2 * abs(phi)))


def _triple_angles(u, v, psi):
    up = u @ psi
    vp = v @ psi
    return fubini_study_angle(psi, up), fubini_study_angle(psi, vp), fubini_study_angle(up, vp)


def _fs_angle_batch(a, b):
    ov = np.einsum("...i,...i->...", a.conj(), b)
    perp = np.linalg.norm(b - ov[..., None] * a, axis=-1)
    return np.arctan2(perp, abs(ov))


def _triple_angles_batch(u, v, kets):
    up = kets @ u.T
    vp = kets @ v.T
    return _fs_angle_batch(kets, up), _fs_angle_batch(kets, vp), _fs_angle_batch(up, vp)


def mus_residual(u, v, psi):
    """Distance of psi from being a minimum uncertainty state of the OUR for (psi, U psi, V psi).

    min over the sign of | theta_UV - |theta_U +- theta_V| | with
    theta_X = arccos |<psi|X|psi>|.
    """
    psi = as_ket(psi)
    u = as_unitary(u)
    v = as_unitary(v)
    if u.shape != (len(psi), len(psi)) or v.shape != u.shape:
        raise DimensionError("operators and state dimensions differ")
    tu, tv, tuv = _triple_angles(u, v, psi)
    return float(min(abs(tuv - (tu + tv)), abs(tuv - abs(tu - tv))))


def _bloch_rotation(u):
    """3x3 rotation matrix R with bloch(U rho U^dagger) = R bloch(rho) for a qubit unitary."""
    from .qlinalg import PAULI

    return np.array([[0.5 * np.trace(si @ u @ sj @ dagger(u)).real for sj in PAULI] for si in PAULI])


@dataclass
class MusSolutionSet:
    """Grid evaluation and extracted minimum-uncertainty-state families."""

    grid: list  # rows (theta, phi, our_lhs, residual)
    families: list = field(default_factory=list)  # each a list of (theta, phi, residual)
    known_axis_hits: dict = field(default_factory=dict)
    degenerate: bool = False
    resolution: int = 0

    @property
    def family_count(self):
        return len(self.families)

    def surface_rows(self):
        return [dict(theta=t, phi=p, our_lhs=v, residual=r) for t, p, v, r in self.grid]


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        self.parent[self.find(i)] = self.find(j)


def _bloch_xyz(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _rotation_axis(r):
    w, vecs = np.linalg.eig(r)
    k = int(np.argmin(abs(w - 1)))
    axis = np.real(vecs[:, k])
    return axis / np.linalg.norm(axis)


def mus_scan(u, v, grid_resolution=64, family_tol=FAMILY_TOL, axis_tol=1e-6):
    """Locate the minimum uncertainty qubit states of the OUR for fixed U and V.

    The Bloch sphere is sampled on a cell-centred (theta, phi) grid with
    ``grid_resolution`` polar and ``2 * grid_resolution`` azimuthal points.
    Saturation means a, R_U a, R_V a lie on a common great circle, so the
    sign changes of the coplanarity volume a . (R_U a x R_V a) bracket every
    candidate; each bracket is bisected along its grid edge and kept when the
    residual at the root is <= ``family_tol`` (which rejects great-circle
    configurations not contained in a semicircle).  Roots in the same grid
    cell are linked, and the linked components are the families.

    When the residual vanishes on the whole grid (U and V equal up to phase,
    or one of them trivial) the result is flagged ``degenerate`` instead.
    """
    u = as_unitary(u)
    v = as_unitary(v)
    if u.shape != (2, 2) or v.shape != (2, 2):
        raise DimensionError("mus_scan is defined for qubit unitaries")
    if grid_resolution < 32:
        raise ValueError("grid_resolution must be at least 32")
    n_t, n_p = grid_resolution, 2 * grid_resolution
    thetas = (np.arange(n_t) + 0.5) * np.pi / n_t
    phis = np.arange(n_p) * 2 * np.pi / n_p
    ru = _bloch_rotation(u)
    rv = _bloch_rotation(v)

    def bloch(t, p):
        return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)

    def volume(t, p):
        a = bloch(t, p)
        return np.einsum("...i,...i->...", a, np.cross(a @ ru.T, a @ rv.T))

    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    vol = volume(tt, pp)
    kets = np.stack([np.cos(tt / 2), np.exp(1j * pp) * np.sin(tt / 2)], axis=-1)
    tu, tv, tuv = _triple_angles_batch(u, v, kets)
    residuals = np.minimum(abs(tuv - (tu + tv)), abs(tuv - abs(tu - tv)))
    cu, cv, cuv = np.cos(tu), np.cos(tv), np.cos(tuv)
    lhs = cu**2 + cv**2 + cuv**2 - 2 * cu * cv * cuv
    grid = [(float(a), float(b), float(c), float(d))
            for a, b, c, d in zip(tt.ravel(), pp.ravel(), lhs.ravel(), residuals.ravel())]

    axis_hits = {}
    for label, r in (("U", ru), ("V", rv)):
        if np.allclose(r, np.eye(3), atol=1e-12):
            continue
        axis = _rotation_axis(r)
        for sign, name in ((1, "+"), (-1, "-")):
            a = sign * axis
            psi = spherical_ket(np.arccos(np.clip(a[2], -1, 1)), np.arctan2(a[1], a[0]))
            axis_hits[f"{name}{label}"] = {
                "bloch": a.tolist(),
                "residual": mus_residual(u, v, psi),
            }

    if np.max(residuals) <= family_tol:
        for hit in axis_hits.values():
            hit["hit"] = hit["residual"] <= axis_tol
        return MusSolutionSet(grid, [], axis_hits, degenerate=True, resolution=grid_resolution)

    def refine(t0, p0, t1, p1, g0):
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            g = volume(t0 + mid * (t1 - t0), p0 + mid * (p1 - p0))
            if (g > 0) == (g0 > 0):
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        s = 0.5 * (lo + hi)
        return t0 + s * (t1 - t0), p0 + s * (p1 - p0)

    roots = []  # (theta, phi, residual, branch, cells)
    dphi = 2 * np.pi / n_p

    def edge(i0, j0, i1, j1, cells):
        g0, g1 = vol[i0, j0], vol[i1, j1 % n_p]
        if g0 == 0 or g0 * g1 > 0:
            return
        p1 = pp[i0, j0] + dphi if i0 == i1 else pp[i1, j1 % n_p]
        t, p = refine(tt[i0, j0], pp[i0, j0], tt[i1, j1 % n_p], p1, g0)
        tu, tv, tuv = _triple_angles(u, v, spherical_ket(t, p))
        plus, minus = abs(tuv - (tu + tv)), abs(tuv - abs(tu - tv))
        res = min(plus, minus)
        if res <= family_tol:
            roots.append((float(t), float(np.mod(p, 2 * np.pi)), float(res), "+" if plus <= minus else "-", cells))

    for i in range(n_t):
        for j in range(n_p):
            # azimuthal edge on ring i, between cells (i-1, j) and (i, j)
            edge(i, j, i, j + 1, [(i - 1, j), (i, j)])
            if i + 1 < n_t:
                # polar edge between rings i and i+1, between cells (i, j-1) and (i, j)
                edge(i, j, i + 1, j, [(i, (j - 1) % n_p), (i, j)])

    # Roots of the same sign branch are linked when their cells touch (including
    # diagonally); the regions poleward of the outer rings count as one cell each.
    def canon(c):
        if c[0] < 0:
            return ("cap", "north")
        if c[0] >= n_t - 1:
            return ("cap", "south")
        return c

    def neighbours(c):
        if c[0] == "cap":
            ring = 0 if c[1] == "north" else n_t - 2
            return [c] + [(ring, j) for j in range(n_p)]
        i, j = c
        out = []
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                out.append(canon((i + di, (j + dj) % n_p)))
        return out

    uf = _UnionFind(len(roots))
    by_cell = {}
    for k, root in enumerate(roots):
        for c in root[4]:
            by_cell.setdefault((root[3], canon(c)), []).append(k)
    for (branch, c), members in by_cell.items():
        for nb in neighbours(c):
            for k in by_cell.get((branch, nb), ()):
                uf.union(members[0], k)
        for k in members[1:]:
            uf.union(members[0], k)
    # The residual depends only on the ray pair {psi, psi_perp} (a and -a on the
    # sphere), so a component and its antipodal image are one family.
    comps = {}
    for k in range(len(roots)):
        comps.setdefault(uf.find(k), []).append(k)
    comps = list(comps.values())
    xyz = np.array([_bloch_xyz(r[0], r[1]) for r in roots]).reshape(-1, 3)
    link = 2.5 * np.pi / n_t
    for x in range(len(comps)):
        for y in range(x + 1, len(comps)):
            kx, ky = comps[x], comps[y]
            if roots[kx[0]][3] != roots[ky[0]][3]:
                continue
            cos = np.clip(-xyz[kx] @ xyz[ky].T, -1, 1)
            if np.arccos(cos.max()) <= link:
                uf.union(kx[0], ky[0])
    groups = {}
    for k in range(len(roots)):
        groups.setdefault(uf.find(k), []).append(roots[k][:4])
    families = sorted(groups.values(), key=lambda f: (-len(f), f[0]))

    for hit in axis_hits.values():
        a = np.asarray(hit["bloch"])
        best = np.inf
        for fam_idx, fam in enumerate(families):
            pts = np.array([_bloch_xyz(t, p) for t, p, *_ in fam])
            dist = float(np.min(np.arccos(np.clip(pts @ a, -1, 1))))
            if dist < best:
                best = dist
                hit["family"] = fam_idx
        hit["distance"] = best
        hit["hit"] = hit["residual"] <= axis_tol and best <= 2 * np.pi / n_t

    return MusSolutionSet(grid, families, axis_hits, degenerate=False, resolution=grid_resolution)


def commute_up_to_phase(u, v, tol=1e-10):
    return equal_up_to_phase(u @ v, v @ u, tol)


def our4_evaluate(psi1, psi2, psi3, psi4, tol=OUR_TOL):
    """Four-state overlap relation 1 <= sum of pair, triangle and 4-cycle terms.

    With psi4 orthogonal to the others its slack is exactly half the slack of
    the three-state relation on psi1..psi3.
    """
    kets = _kets(psi1, psi2, psi3, psi4)
    T = {}
    for j in range(4):
        for k in range(j + 1, 4):
            T[j + 1, k + 1] = T[k + 1, j + 1] = transition_probability(kets[j], kets[k])
    rhs = (0.5 * (1 - T[1, 2]) * (1 - T[3, 4]) + 0.5 * (1 - T[1, 3]) * (1 - T[2, 4])
           + 0.5 * (1 - T[1, 4]) * (1 - T[2, 3])
           + np.sqrt(T[1, 2] * T[2, 3] * T[1, 3]) + np.sqrt(T[1, 2] * T[2, 4] * T[1, 4])
           + np.sqrt(T[1, 3] * T[3, 4] * T[1, 4]) + np.sqrt(T[2, 3] * T[3, 4] * T[2, 4])
           + np.sqrt(T[1, 2] * T[2, 3] * T[3, 4] * T[1, 4])
           + np.sqrt(T[1, 2] * T[1, 3] * T[2, 4] * T[3, 4])
           + np.sqrt(T[1, 3] * T[1, 4] * T[2, 3] * T[2, 4]))
    return RelationReport(name="our4", lhs=1.0, rhs=float(rhs), sense="<=", tol=tol,
                          extra={"T": {f"{j}{k}": T[j, k] for (j, k) in T if j < k}})
