import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uurlab.overlap import (
    BRANCHES,
    OverlapTriple,
    UndefinedPhaseError,
    bargmann_area_check,
    fubini_study_angle,
    geodesic_check,
    in_polytope,
    mus_residual,
    mus_scan,
    our4_evaluate,
    our_evaluate,
    spherical_triangle_area,
    trace_triangle_evaluate,
    transition_probability,
)
from uurlab.qlinalg import (
    DimensionError,
    bloch_ket,
    haar_random_unitary,
    random_pure_state,
    random_unit_vector,
    rotation_unitary,
    spherical_ket,
)

Z_UP = np.array([1, 0], dtype=complex)
Z_DOWN = np.array([0, 1], dtype=complex)
X_UP = np.array([1, 1], dtype=complex) / np.sqrt(2)
Y_UP = np.array([1, 1j], dtype=complex) / np.sqrt(2)
FIG_S2 = (rotation_unitary([0, 1, 0], np.pi / 4), rotation_unitary([0, 0, 1], np.pi / 4))


def great_circle_kets(rng, count=3, semicircle=True):
    """Qubit kets whose Bloch vectors lie on one random great circle (within a semicircle if asked)."""
    n = random_unit_vector(rng)
    e1 = np.cross(n, random_unit_vector(rng))
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    angles = rng.uniform(0, np.pi if semicircle else 2 * np.pi, count)
    return [bloch_ket(np.cos(a) * e1 + np.sin(a) * e2) for a in angles]


class TestTransitionProbability:
    def test_self(self):
        psi = random_pure_state(3, 0)
        assert transition_probability(psi, psi) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert transition_probability(Z_UP, Z_DOWN) == 0.0

    def test_equator(self):
        assert transition_probability(Z_UP, X_UP) == pytest.approx(0.5)

    def test_symmetric(self):
        a, b = random_pure_state(4, 1), random_pure_state(4, 2)
        assert transition_probability(a, b) == pytest.approx(transition_probability(b, a), abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            transition_probability(Z_UP, random_pure_state(3, 0))

    def test_small_angle_accuracy(self):
        eps = 1e-9
        psi = np.array([np.cos(eps), np.sin(eps)], dtype=complex)
        assert fubini_study_angle(Z_UP, psi) == pytest.approx(eps, rel=1e-6)


class TestOverlapTriple:
    def test_out_of_range(self):
        with pytest.raises(ValueError):
            OverlapTriple(1.2, 0.5, 0.5)

    def test_thetas(self):
        t = OverlapTriple(1.0, 0.5, 0.0)
        np.testing.assert_allclose(t.thetas, [0.0, np.pi / 4, np.pi / 2], atol=1e-12)

    def test_clipped(self):
        t = OverlapTriple.clipped(1.0000001, -1e-6, 0.3)
        assert (t.T12, t.T13, t.T23) == (1.0, 0.0, 0.3)


class TestOurEvaluate:
    def test_identical(self):
        r = our_evaluate(OverlapTriple(1, 1, 1))
        assert r.lhs == pytest.approx(1.0) and r.saturated

    def test_witness_infeasible(self):
        r = our_evaluate(OverlapTriple(0.0, 0.75, 0.75))
        assert r.lhs == pytest.approx(1.5) and r.status == "infeasible" and not r.holds

    def test_collinear(self):
        r = our_evaluate(OverlapTriple.from_states(Z_UP, X_UP, Z_DOWN))
        assert (r.lhs, r.saturated) == (pytest.approx(1.0), True)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
    @settings(max_examples=200, deadline=None)
    def test_validity(self, seed, d):
        rng = np.random.default_rng(seed)
        kets = [random_pure_state(d, rng) for _ in range(3)]
        r = our_evaluate(OverlapTriple.from_states(*kets))
        assert r.lhs <= 1 + 1e-12 and r.status == "ok"
        g = geodesic_check(*kets)
        assert g.in_polytope
        assert all(t.holds for t in trace_triangle_evaluate(OverlapTriple.from_states(*kets)).reports)

    @pytest.mark.parametrize("seed", range(20))
    def test_saturation_iff_geodesic(self, seed):
        rng = np.random.default_rng(seed)
        on = great_circle_kets(rng)
        assert our_evaluate(OverlapTriple.from_states(*on)).lhs == pytest.approx(1.0, abs=1e-10)
        assert geodesic_check(*on).residual <= 1e-8
        generic = [random_pure_state(2, rng) for _ in range(3)]
        sat = our_evaluate(OverlapTriple.from_states(*generic)).saturated
        assert sat == (geodesic_check(*generic).residual <= 1e-8)


class TestGeodesic:
    def test_identical(self):
        g = geodesic_check(Z_UP, Z_UP, Z_UP)
        assert g.residual == 0 and all(v == 0 for v in g.defects.values())

    def test_quarter_points(self):
        g = geodesic_check(Z_UP, X_UP, Z_DOWN)
        np.testing.assert_allclose(g.thetas, [np.pi / 4, np.pi / 2, np.pi / 4], atol=1e-15)
        assert g.branch == BRANCHES[2] and g.residual <= 1e-15

    def test_octant_not_geodesic(self):
        g = geodesic_check(Z_UP, X_UP, Y_UP)
        assert g.residual > 0.2
        for v in g.defects.values():
            assert v == pytest.approx(np.pi / 4)

    @pytest.mark.parametrize("point,inside", [
        ((0, 0, 0), True), ((np.pi / 2, np.pi / 2, np.pi / 2), True), ((0, np.pi / 2, np.pi / 2), True),
        ((np.pi / 2, 0, 0), False), ((0.1, 0.1, 0.3), False), ((1.0, 1.0, 1.0), True), ((1.7, 1.0, 1.0), False),
    ])
    def test_polytope(self, point, inside):
        assert in_polytope(*point) == inside


class TestTraceTriangle:
    def test_degenerate(self):
        r = trace_triangle_evaluate(OverlapTriple(1, 1, 1))
        assert r.all_hold and all(x.saturated for x in r.reports)

    def test_witness(self):
        r = trace_triangle_evaluate(OverlapTriple(0.0, 0.75, 0.75))
        assert r.all_hold and r.weaker_witness

    def test_collinear(self):
        r = trace_triangle_evaluate(OverlapTriple(0.5, 0.0, 0.5))
        assert r.all_hold and r.our.saturated and not r.weaker_witness


class TestAreaPhase:
    def test_great_circle(self):
        r = bargmann_area_check(Z_UP, X_UP, bloch_ket([1, 0, -1]))
        assert abs(r.phi) <= 1e-15 and abs(r.area) <= 1e-12

    def test_octant(self):
        r = bargmann_area_check(X_UP, Y_UP, Z_UP)
        assert abs(r.phi) == pytest.approx(np.pi / 4, abs=1e-12)
        assert r.area == pytest.approx(np.pi / 2, abs=1e-12)

    def test_near_degenerate(self):
        r = bargmann_area_check(Z_UP, spherical_ket(1e-3, 0.0), X_UP)
        assert r.area <= 1e-3 and abs(r.phi) <= 1e-3 and r.defect <= 1e-8

    def test_orthogonal_pair(self):
        with pytest.raises(UndefinedPhaseError):
            bargmann_area_check(Z_UP, Z_DOWN, X_UP)

    def test_qubit_only(self):
        with pytest.raises(DimensionError):
            bargmann_area_check(*(random_pure_state(3, s) for s in range(3)))

    @pytest.mark.parametrize("seed", range(30))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        assert bargmann_area_check(*(random_pure_state(2, rng) for _ in range(3))).defect <= 1e-8

    def test_area_of_octant_triangle(self):
        assert spherical_triangle_area(np.eye(3)[0], np.eye(3)[1], np.eye(3)[2]) == pytest.approx(np.pi / 2)


class TestMusResidual:
    def test_equal_unitaries(self):
        u = haar_random_unitary(2, 3)
        assert mus_residual(u, u, random_pure_state(2, 4)) <= 1e-12

    @pytest.mark.parametrize("axis", [[0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]])
    def test_axis_states(self, axis):
        assert mus_residual(*FIG_S2, bloch_ket(axis)) <= 1e-9

    def test_generic_point(self):
        assert mus_residual(*FIG_S2, bloch_ket([1, 1, 1])) > 1e-3

    @pytest.mark.parametrize("seed", range(10))
    def test_zero_iff_saturated(self, seed):
        rng = np.random.default_rng(seed)
        u, v = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
        psi = random_pure_state(2, rng)
        sat = our_evaluate(OverlapTriple.from_states(psi, u @ psi, v @ psi)).saturated
        assert sat == (mus_residual(u, v, psi) <= 1e-9)


class TestMusScan:
    def test_degenerate(self):
        u = rotation_unitary([0, 0, 1], 0.8)
        res = mus_scan(u, u, 32)
        assert res.degenerate and res.family_count == 0

    @pytest.mark.parametrize("resolution", [32, 64])
    def test_fig_s2(self, resolution):
        res = mus_scan(*FIG_S2, resolution)
        assert not res.degenerate and res.family_count == 2
        assert all(h["hit"] and h["residual"] <= 1e-6 for h in res.known_axis_hits.values())
        assert set(res.known_axis_hits) == {"+U", "-U", "+V", "-V"}
        for fam in res.families:
            assert all(r <= 1e-9 for _, _, r, _ in fam)
            psi = spherical_ket(*fam[len(fam) // 2][:2])
            assert our_evaluate(OverlapTriple.from_states(psi, FIG_S2[0] @ psi, FIG_S2[1] @ psi)).saturated

    def test_refinement_oracle(self):
        u = rotation_unitary([1, 0, 0], np.pi / 2)
        v = rotation_unitary([0, 1, 0], np.pi / 2)
        coarse, fine = mus_scan(u, v, 32), mus_scan(u, v, 128)
        assert coarse.family_count == fine.family_count == 2

        def xyz(fam):
            return np.array([[np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)] for t, p, *_ in fam])

        fine_pts = np.vstack([xyz(f) for f in fine.families])
        for fam in coarse.families:
            gap = np.arccos(np.clip(xyz(fam) @ fine_pts.T, -1, 1)).min(axis=1)
            assert gap.max() <= np.pi / 32

    def test_surface_rows(self):
        res = mus_scan(*FIG_S2, 32)
        rows = res.surface_rows()
        assert len(rows) == 32 * 64 and set(rows[0]) == {"theta", "phi", "our_lhs", "residual"}
        assert max(r["our_lhs"] for r in rows) <= 1 + 1e-12

    def test_qubits_only(self):
        with pytest.raises(DimensionError):
            mus_scan(np.eye(3), np.eye(3))

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            mus_scan(*FIG_S2, 16)


class TestFourState:
    def test_identical(self):
        r = our4_evaluate(*[Z_UP] * 4)
        assert r.holds

    @pytest.mark.parametrize("seed", range(10))
    def test_qutrit_construction_saturates(self, seed):
        rng = np.random.default_rng(seed)
        kets = [np.append(k, 0) for k in great_circle_kets(rng)] + [np.array([0, 0, 1], dtype=complex)]
        assert abs(our4_evaluate(*kets).slack) <= 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_orthogonal_fourth_halves_three_state_slack(self, seed):
        rng = np.random.default_rng(seed)
        kets = [np.append(random_pure_state(2, rng), 0) for _ in range(3)]
        four = our4_evaluate(*kets, np.array([0, 0, 1], dtype=complex))
        three = our_evaluate(OverlapTriple.from_states(*kets))
        assert four.slack == pytest.approx(0.5 * three.slack, abs=1e-10)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_random_qutrits(self, seed):
        rng = np.random.default_rng(seed)
        assert our4_evaluate(*(random_pure_state(3, rng) for _ in range(4))).slack >= -1e-10
