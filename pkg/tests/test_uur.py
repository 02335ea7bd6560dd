import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uurlab.qlinalg import (
    I2,
    SX,
    SY,
    SZ,
    DimensionError,
    NotHermitianError,
    dagger,
    expm_i_hermitian,
    haar_random_unitary,
    mixed_qubit,
    psd_diagnostics,
    random_density_matrix,
    random_hermitian,
    random_pure_state,
    random_unit_vector,
    rotation_unitary,
)
from uurlab.uur import (
    BargmannValue,
    RelationReport,
    bargmann_invariant,
    bargmann_n3_relation,
    gram_matrix,
    permutation_expansion,
    qubit_tight_relation,
    rs_limit_probe,
    rs_pair,
    schwarz_matrix_check,
    uur_bargmann_pair,
    uur_evaluate,
    uur_pair,
    variance_unitary,
)

KET0 = np.array([1, 0], dtype=complex)
RHO0 = np.diag([1.0, 0.0]).astype(complex)
# |0> -> |+> and |0> -> |+i>
TO_X = np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2)
TO_Y = np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)


def gram_oracle(rho, unitaries):
    """G_jk = tr(v_j^dagger v_k) with v_j = U_j rho^{1/2} (explicit qubit square root)."""
    sd = np.sqrt(max(np.linalg.det(rho).real, 0.0))
    root = (rho + sd * I2) / np.sqrt(np.trace(rho).real + 2 * sd)
    vs = [root] + [u @ root for u in unitaries]
    return np.array([[np.trace(dagger(a) @ b) for b in vs] for a in vs])


class TestRelationReport:
    def test_slack_orientation(self):
        assert RelationReport("a", 2.0, 1.0).slack == 1.0
        assert RelationReport("b", 2.0, 1.0, sense="<=").slack == -1.0

    def test_saturation_and_holds(self):
        r = RelationReport("c", 1.0, 1.0 + 1e-12)
        assert r.saturated and r.holds
        assert not RelationReport("d", 0.0, 1.0).holds

    def test_indeterminate_has_nan_slack(self):
        r = RelationReport("e", float("nan"), float("nan"), status="indeterminate")
        assert np.isnan(r.slack) and r.holds and not r.saturated

    def test_to_dict(self):
        d = RelationReport("f", 1.0, 0.5, lhs_se=0.1).to_dict()
        assert d["slack"] == 0.5 and d["holds"] and d["lhs_se"] == 0.1


class TestBargmannValue:
    @pytest.mark.parametrize("value,phase", [(1j, np.pi / 2), (-1 + 0j, np.pi), (complex(-1, -0.0), np.pi)])
    def test_principal_phase(self, value, phase):
        assert BargmannValue(value).phase == pytest.approx(phase)


class TestGramMatrix:
    def test_empty_list(self):
        np.testing.assert_allclose(gram_matrix(RHO0, []), [[1]])

    def test_identity_gives_ones(self):
        g = gram_matrix(random_density_matrix(2, 1), [I2])
        np.testing.assert_allclose(g, np.ones((2, 2)), atol=1e-14)
        assert abs(psd_diagnostics(g)[0]) <= 1e-14

    def test_sigma_x_on_ket0(self):
        np.testing.assert_allclose(gram_matrix(RHO0, [SX]), np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_square_root_oracle(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(2, rng)
        us = [haar_random_unitary(2, rng) for _ in range(2)]
        np.testing.assert_allclose(gram_matrix(rho, us), gram_oracle(rho, us), atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            gram_matrix(RHO0, [np.eye(3)])

    @pytest.mark.parametrize("seed", range(5))
    def test_rephasing_invariance(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(3, rng)
        us = [haar_random_unitary(3, rng) for _ in range(3)]
        phases = rng.uniform(0, 2 * np.pi, 3)
        g = gram_matrix(rho, us)
        h = gram_matrix(rho, [np.exp(1j * p) * u for p, u in zip(phases, us)])
        k = np.diag(np.exp(-1j * np.concatenate([[0.0], phases])))
        np.testing.assert_allclose(h, k @ g @ dagger(k), atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), np.linalg.eigvalsh(g), atol=1e-10)
        assert uur_evaluate(rho, us).lhs == pytest.approx(
            uur_evaluate(rho, [np.exp(1j * p) * u for p, u in zip(phases, us)]).lhs, abs=1e-10)

    def test_mixture_convexity(self):
        rng = np.random.default_rng(5)
        us = [haar_random_unitary(3, rng) for _ in range(2)]
        kets = [random_pure_state(3, rng) for _ in range(3)]
        p = np.array([0.2, 0.5, 0.3])
        rho = sum(w * np.outer(k, k.conj()) for w, k in zip(p, kets))
        mix = sum(w * gram_matrix(k, us) for w, k in zip(p, kets))
        np.testing.assert_allclose(gram_matrix(rho, us), mix, atol=1e-10)


class TestUurEvaluate:
    def test_pure_qubit_two_paulis(self):
        r = uur_evaluate(KET0, [SX, SY])
        assert r.saturated and abs(r.lhs) <= 1e-15

    def test_maximally_mixed_two_paulis(self):
        # every off-diagonal entry vanishes on I/2 (<sx sy> = <i sz> = 0), so G = I
        r = uur_evaluate(I2 / 2, [SX, SY])
        assert r.lhs == pytest.approx(1.0, abs=1e-15)
        assert not r.saturated

    def test_mixed_commuting_phase_gates(self):
        r = uur_evaluate(I2 / 2, [expm_i_hermitian(SZ, 0.3), expm_i_hermitian(SZ, 0.7)])
        assert abs(r.lhs) <= 1e-10 and r.saturated

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_permutation_expansion_matches_det(self, n):
        rng = np.random.default_rng(n)
        for _ in range(20):
            g = gram_matrix(random_density_matrix(3, rng), [haar_random_unitary(3, rng) for _ in range(n)])
            assert abs(permutation_expansion(g) - np.linalg.det(g)) <= 1e-10

    @pytest.mark.parametrize("d", [2, 3])
    def test_pure_state_saturation(self, d):
        rng = np.random.default_rng(10 + d)
        for _ in range(50):
            r = uur_evaluate(random_pure_state(d, rng), [haar_random_unitary(d, rng) for _ in range(d)])
            assert abs(r.lhs) <= 1e-9 and r.saturated

    def test_extra_diagnostics(self):
        r = uur_evaluate(random_density_matrix(3, 2), [haar_random_unitary(3, 3)])
        assert r.extra["psd"] and r.extra["n"] == 1 and abs(r.extra["det_imag"]) <= 1e-12


class TestVariance:
    def test_identity(self):
        assert variance_unitary(random_density_matrix(2, 0), I2) == 0.0

    def test_orthogonalising(self):
        assert variance_unitary(RHO0, SX) == pytest.approx(1.0)

    def test_phase_gate_mixed(self):
        assert variance_unitary(I2 / 2, expm_i_hermitian(SZ, 0.3)) == pytest.approx(np.sin(0.3) ** 2, abs=1e-14)


class TestUurPair:
    def test_pure_qubit_paulis(self):
        r = uur_pair(RHO0, SX, SY)
        assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0) and r.saturated

    def test_mixed_paulis(self):
        r = uur_pair(I2 / 2, SX, SY)
        assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(0.0, abs=1e-15)

    def test_random_pure_qutrit_holds(self):
        r = uur_pair(random_pure_state(3, 1), haar_random_unitary(3, 2), haar_random_unitary(3, 3))
        assert r.slack > 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_slack_equals_det(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(3, rng)
        u, v = haar_random_unitary(3, rng), haar_random_unitary(3, rng)
        assert uur_pair(rho, u, v).slack == pytest.approx(uur_evaluate(rho, [u, v]).lhs, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_pure_qubits_saturate(self, seed):
        rng = np.random.default_rng(seed)
        assert uur_pair(random_pure_state(2, rng), haar_random_unitary(2, rng), haar_random_unitary(2, rng)).saturated


class TestBargmann:
    def test_all_identity(self):
        b = bargmann_invariant(RHO0, [I2, I2, I2])
        assert b.value == 1 and b.phase == 0

    def test_orthogonal_leg_gives_zero(self):
        assert bargmann_invariant(KET0, [I2, SX, TO_X]).modulus == 0

    def test_octant_triple(self):
        b = bargmann_invariant(KET0, [I2, TO_X, TO_Y])
        assert b.value == pytest.approx((1 + 1j) / 4, abs=1e-15)
        assert b.phase == pytest.approx(np.pi / 4)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            bargmann_invariant(KET0, [SX])

    def test_projective_invariant_for_pure_states(self):
        rng = np.random.default_rng(3)
        psi = random_pure_state(3, rng)
        us = [haar_random_unitary(3, rng) for _ in range(4)]
        proj = [np.outer(u @ psi, (u @ psi).conj()) for u in us]
        oracle = np.trace(proj[0] @ proj[1] @ proj[2] @ proj[3])
        assert bargmann_invariant(psi, us).value == pytest.approx(oracle, abs=1e-12)

    def test_rephasing_invariance(self):
        rng = np.random.default_rng(4)
        rho = random_density_matrix(2, rng)
        us = [haar_random_unitary(2, rng) for _ in range(3)]
        rephased = [np.exp(1j * p) * u for p, u in zip(rng.uniform(0, 6, 3), us)]
        assert abs(bargmann_invariant(rho, us).value - bargmann_invariant(rho, rephased).value) <= 1e-12


class TestUurBargmannPair:
    def test_small_rotations_saturate(self):
        r = uur_bargmann_pair(KET0, rotation_unitary([1, 0, 0], 0.2), rotation_unitary([0, 1, 0], 0.3))
        assert r.saturated

    def test_indeterminate(self):
        r = uur_bargmann_pair(RHO0, SX, SY)
        assert r.status == "indeterminate" and r.holds

    def test_octant(self):
        r = uur_bargmann_pair(KET0, TO_X, TO_Y)
        assert abs(r.extra["phi"]) == pytest.approx(np.pi / 4)
        assert r.saturated

    @pytest.mark.parametrize("seed", range(10))
    def test_agrees_with_pair_verdict(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(2 + seed % 2, rng)
        u, v = haar_random_unitary(len(rho), rng), haar_random_unitary(len(rho), rng)
        a, b = uur_bargmann_pair(rho, u, v), uur_pair(rho, u, v)
        assert a.holds == b.holds
        # slack of the phase form times 2|B| is the determinant
        assert a.slack * 2 * abs(a.extra["bargmann"]) == pytest.approx(b.slack, abs=1e-12)

    def test_branch_irrelevant(self):
        r = uur_bargmann_pair(KET0, TO_X, TO_Y)
        assert np.cos(r.extra["phi"]) == pytest.approx(np.cos(r.extra["phi"] - 2 * np.pi))


class TestRobertsonSchroedinger:
    def test_paulis_on_ket0(self):
        r = rs_pair(RHO0, SX, SY)
        assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0)

    def test_self_case(self):
        a = random_hermitian(3, 1)
        r = rs_pair(random_density_matrix(3, 2), a, a)
        assert r.saturated and r.lhs == pytest.approx(r.rhs, rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_qutrit(self, seed):
        rng = np.random.default_rng(seed)
        assert rs_pair(random_density_matrix(3, rng), random_hermitian(3, rng), random_hermitian(3, rng)).holds

    def test_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            rs_pair(RHO0, np.array([[0, 1], [0, 0]]), SX)


class TestRsLimit:
    def test_equal_operators_converge(self):
        a = random_hermitian(2, 3)
        rho = random_density_matrix(2, 4)
        t = rs_limit_probe(rho, a, a, [0.1, 0.01, 0.001])
        assert t.rows[-1].err_lhs < t.rows[0].err_lhs
        assert t.rs_lhs == pytest.approx(t.var_a**2)

    def test_paulis_on_ket0_second_order(self):
        # <e^{i eps sx}> = cos eps on |0>, so Var U / eps^2 = sin^2(eps)/eps^2 = 1 - eps^2/3 + O(eps^4)
        t = rs_limit_probe(RHO0, SX, SY, [0.1, 0.01, 0.001])
        for row in t.rows:
            assert row.var_u_scaled == pytest.approx(np.sin(row.eps) ** 2 / row.eps**2, abs=1e-12)
            assert row.err_var_u == pytest.approx(row.eps**2 / 3, rel=1e-2)
        assert all(r.err_lhs <= t.constant * r.eps for r in t.rows)

    def test_error_shrinks(self):
        t = rs_limit_probe(RHO0, SX, SY, [0.5, 0.05])
        assert t.rows[0].err_lhs / t.rows[1].err_lhs >= 10

    @pytest.mark.parametrize("eps", [[0.0], [-0.1], [0.6]])
    def test_bad_eps(self, eps):
        with pytest.raises(ValueError):
            rs_limit_probe(RHO0, SX, SY, eps)


class TestSchwarz:
    def test_identity(self):
        assert schwarz_matrix_check(RHO0, [I2]) == pytest.approx(0.0, abs=1e-15)

    def test_paulis(self):
        assert schwarz_matrix_check(RHO0, [SX, SY]) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_and_schur_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(3, rng)
        us = [haar_random_unitary(3, rng) for _ in range(1 + seed % 3)]
        m = schwarz_matrix_check(rho, us)
        assert m >= -1e-10
        assert (m >= -1e-10) == uur_evaluate(rho, us).extra["psd"]
        # det G = det(C - u u^dagger) for the Schur complement of the leading 1
        g = gram_matrix(rho, us)
        schur = g[1:, 1:] - np.outer(g[0, 1:].conj(), g[0, 1:])
        assert np.linalg.det(schur).real == pytest.approx(np.linalg.det(g).real, abs=1e-12)

    def test_needs_unitary(self):
        with pytest.raises(ValueError):
            schwarz_matrix_check(RHO0, [])


class TestQubitTight:
    def test_orthogonal_axes(self):
        r = qubit_tight_relation(RHO0, [0, 0, 1], [1, 0, 0])
        assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(1.0) and r.saturated

    @pytest.mark.parametrize("r_vec", [[0, 0, 1.0], [0, 0, 0.6], [0.5, 0.1, 0.2], [0, 0, 0]])
    def test_parallel_axes(self, r_vec):
        # with a = b the chained lhs is 2 dA^2 + 2 (1 - dA^2) = 2 for every state
        a = np.array([0, 0, 1.0])
        r = qubit_tight_relation(mixed_qubit(r_vec), a, a)
        assert r.rhs == 2.0 and r.lhs == pytest.approx(2.0, abs=1e-14) and r.saturated

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_identity_and_pure_equality(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_unit_vector(rng), random_unit_vector(rng)
        pure = qubit_tight_relation(mixed_qubit(random_unit_vector(rng)), a, b)
        assert pure.extra["identity_residual"] <= 1e-10
        assert abs(pure.extra["s13_slack"]) <= 1e-9
        mixed = qubit_tight_relation(mixed_qubit(0.7 * random_unit_vector(rng)), a, b)
        assert mixed.holds and mixed.extra["s13_slack"] >= -1e-10

    def test_chain_is_monotone(self):
        r = qubit_tight_relation(mixed_qubit([0.3, 0.2, 0.1]), random_unit_vector(1), random_unit_vector(2))
        c = r.extra["chain"]
        assert c[0] >= c[1] - 1e-12 and c[1] >= c[2] - 1e-12 and c[2] >= c[3] - 1e-12

    def test_non_qubit(self):
        with pytest.raises(DimensionError):
            qubit_tight_relation(np.eye(3) / 3, [0, 0, 1], [1, 0, 0])


class TestBargmannN3:
    @pytest.mark.parametrize("seed", range(8))
    def test_slack_equals_det(self, seed):
        rng = np.random.default_rng(seed)
        d = 2 + seed % 3
        rho = random_density_matrix(d, rng)
        us = [haar_random_unitary(d, rng) for _ in range(3)]
        r = bargmann_n3_relation(rho, *us)
        assert r.slack == pytest.approx(uur_evaluate(rho, us).lhs, abs=1e-9)
        assert r.holds

    @pytest.mark.parametrize("seed", range(5))
    def test_pure_qubit_equality(self, seed):
        rng = np.random.default_rng(100 + seed)
        r = bargmann_n3_relation(random_pure_state(2, rng), *(haar_random_unitary(2, rng) for _ in range(3)))
        assert r.saturated
