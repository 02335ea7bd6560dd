"""Experiment pipelines: simulated interferometer sweeps and their analytic references."""

import numpy as np

from .interferometer import (
    InterferometerConfig,
    WaveplateStack,
    relation_from_scans,
    simulate_four_scans,
    waveplate_stack_unitary,
)
from .overlap import mus_scan, our_lhs
from .qlinalg import as_unitary, dagger, expectation, rotation_unitary
from .uur import uur_bargmann_pair

H_KET = np.array([1.0, 0.0], dtype=complex)


def equilateral_rotations(side_rad):
    """Rotations U, V taking the |H> Bloch vector (+z) to the other two vertices
    of an equilateral spherical triangle with the given side, placed
    symmetrically about the xz meridian."""
    c = np.cos(side_rad)
    half_gap = 0.5 * np.arccos(np.clip(c / (1 + c), -1.0, 1.0))
    verts = [np.array([np.sin(side_rad) * np.cos(p), np.sin(side_rad) * np.sin(p), c]) for p in (half_gap, -half_gap)]
    ops = []
    for v in verts:
        axis = np.cross([0.0, 0.0, 1.0], v)
        axis /= np.linalg.norm(axis)
        # rotation_unitary turns Bloch vectors clockwise, so a negative angle
        # carries +z onto v
        ops.append(rotation_unitary(axis, -side_rad))
    return ops[0], ops[1], verts


def saturation_curve(t):
    """cos Phi at saturation of the pure-state relation for T12 = T13 = T23 = T."""
    t = np.asarray(t, dtype=float)
    return (3 * t - 1) / (2 * t**1.5)


def fig3_sweep(n_points=13, side_min_deg=10.0, side_max_deg=120.0, counts_scale=4000.0,
               phase_points=24, seed=0, input_state=H_KET):
    """Equilateral-triangle sweep of the Bargmann-phase UUR on a fixed input.

    Every row carries the analytic values, a noise-free reconstruction and a
    Poisson-noise reconstruction (with standard errors).
    """
    grid = tuple(np.linspace(0.0, 2 * np.pi, phase_points, endpoint=False))
    clean = InterferometerConfig(phase_grid=grid, counts_scale=counts_scale, noise=False, seed=seed)
    noisy = InterferometerConfig(phase_grid=grid, counts_scale=counts_scale, noise=True, seed=seed)
    rows = []
    for k, side in enumerate(np.deg2rad(np.linspace(side_min_deg, side_max_deg, n_points))):
        u, v, _ = equilateral_rotations(side)
        exact = uur_bargmann_pair(input_state, u, v)
        eu, ev = expectation(input_state, u), expectation(input_state, v)
        euv = expectation(input_state, dagger(u) @ v)
        t_true = (abs(eu) ** 2 + abs(ev) ** 2 + abs(euv) ** 2) / 3
        rc = relation_from_scans("uur-eq5", simulate_four_scans(clean, input_state, u, v, 4 * k))
        rn = relation_from_scans("uur-eq5", simulate_four_scans(noisy, input_state, u, v, 4 * k))
        x = rn.extra
        rows.append({
            "side_deg": float(np.rad2deg(side)),
            "T": t_true,
            "theory": float(saturation_curve(t_true)),
            "lhs_exact": exact.lhs,
            "rhs_exact": exact.rhs,
            "lhs_noiseless": rc.lhs,
            "rhs_noiseless": rc.rhs,
            "T_noisy": (x["V_UI"] ** 2 + x["V_IV"] ** 2 + x["V_UV"] ** 2) / 3,
            "lhs_noisy": rn.lhs,
            "lhs_se": rn.lhs_se,
            "rhs_noisy": rn.rhs,
            "rhs_se": rn.rhs_se,
        })
    return rows


def linear_polarisation(h_deg):
    """State after a preparation HWP at angle h acting on |H>: cos 2h |H> + sin 2h |V>."""
    h = np.deg2rad(h_deg)
    return np.array([np.cos(2 * h), np.sin(2 * h)], dtype=complex)


def our_lhs_analytic(psi, u, v):
    t12 = abs(expectation(psi, u)) ** 2
    t13 = abs(expectation(psi, v)) ** 2
    t23 = abs(expectation(psi, dagger(u) @ v)) ** 2
    return float(our_lhs(t12, t13, t23))


def fig4_sweep(stack_u=(36.0, 0.0), stack_v=(0.0, 36.0), h_start_deg=0.0, h_stop_deg=90.0, h_step_deg=1.0,
               counts_scale=4000.0, phase_points=24, seed=0, waveplate_error_deg=0.0, convention_id=None):
    """OUR left-hand side for a family of linearly polarised inputs and fixed U, V."""
    kw = {} if convention_id is None else {"convention_id": convention_id}
    su = WaveplateStack(*stack_u, **kw)
    sv = WaveplateStack(*stack_v, **kw)
    u = waveplate_stack_unitary(su)
    v = waveplate_stack_unitary(sv)
    grid = tuple(np.linspace(0.0, 2 * np.pi, phase_points, endpoint=False))
    clean = InterferometerConfig(phase_grid=grid, counts_scale=counts_scale, noise=False, seed=seed)
    noisy = InterferometerConfig(phase_grid=grid, counts_scale=counts_scale, noise=True, seed=seed,
                                 waveplate_error_deg=waveplate_error_deg)
    rows = []
    for k, h in enumerate(np.arange(h_start_deg, h_stop_deg, h_step_deg)):
        psi = linear_polarisation(h)
        rc = relation_from_scans("our-eq6", simulate_four_scans(clean, psi, su, sv, 4 * k), assume_pure=True)
        rn = relation_from_scans("our-eq6", simulate_four_scans(noisy, psi, su, sv, 4 * k), assume_pure=True)
        rows.append({
            "h_deg": float(h),
            "analytic": our_lhs_analytic(psi, u, v),
            "lhs_noiseless": rc.lhs,
            "lhs_noisy": rn.lhs,
            "lhs_se": rn.lhs_se,
        })
    return rows


def mus_angles(rows, tol=1e-9):
    """Input angles where the analytic OUR curve reaches 1."""
    return [r["h_deg"] for r in rows if r["analytic"] >= 1 - tol]


def family_crossings_on_linear_plane(solution, plane_tol=1e-9):
    """Preparation-HWP angles (deg, mod 90) where mus_scan families meet the xz great circle.

    Linearly polarised inputs have Bloch vectors (sin 4h, 0, cos 4h).  Two
    kinds of meeting point are collected: rotation-axis solutions lying on the
    circle (the families pass through them), and places where neighbouring
    points of one family sit on opposite sides of y = 0, interpolated to the
    crossing.  Each maps to h = atan2(x, z) / 4.
    """
    def to_h(c):
        h = float(np.mod(np.rad2deg(np.arctan2(c[0], c[2])) / 4, 90.0))
        return 0.0 if h > 90.0 - 1e-9 else h

    hs = []
    for hit in solution.known_axis_hits.values():
        c = np.asarray(hit["bloch"])
        if abs(c[1]) <= plane_tol and hit["residual"] <= 1e-9:
            hs.append(to_h(c))
    link = 2.5 * np.pi / solution.resolution
    for fam in solution.families:
        pts = np.array([[np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)] for t, p, *_ in fam])
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                a, b = pts[i], pts[j]
                if a[1] * b[1] < 0 and np.arccos(np.clip(a @ b, -1, 1)) <= link:
                    hs.append(to_h(a + (b - a) * a[1] / (a[1] - b[1])))
    out = []
    for h in sorted(hs):
        if not out or h - out[-1] > 1e-6:
            out.append(h)
    return out


def fig4_mus_scan(stack_u=(36.0, 0.0), stack_v=(0.0, 36.0), resolution=64, convention_id=None):
    """mus_scan for the fixed Fig. 4 operators."""
    kw = {} if convention_id is None else {"convention_id": convention_id}
    u = waveplate_stack_unitary(WaveplateStack(*stack_u, **kw))
    v = waveplate_stack_unitary(WaveplateStack(*stack_v, **kw))
    return mus_scan(as_unitary(u), as_unitary(v), resolution)
