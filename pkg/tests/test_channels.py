import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossbar_rb import channels as ch
from crossbar_rb.channels import QuantumChannel
from crossbar_rb.spin_model import basis_state, projector, triplet_zero

seeds = st.integers(0, 2**32 - 1)


def haar_state(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return v / np.linalg.norm(v)


def completely_depolarizing():
    return QuantumChannel.depolarizing(0.0)


class TestRepresentation:
    def test_vec_convention(self):
        rho = np.arange(16).reshape(4, 4)
        np.testing.assert_array_equal(ch.vec(rho)[:4], rho[:, 0])
        np.testing.assert_array_equal(ch.unvec(ch.vec(rho)), rho)

    @settings(max_examples=25)
    @given(seeds)
    def test_superop_matches_kraus_action(self, seed):
        rng = np.random.default_rng(seed)
        chan = ch.random_channel(rng)
        rho = ch.density_matrix(haar_state(rng))
        direct = sum(k @ rho @ k.conj().T for k in chan.kraus)
        np.testing.assert_allclose(chan(rho), direct, atol=1e-13)

    def test_ptm_of_identity(self):
        np.testing.assert_allclose(QuantumChannel.identity().ptm, np.eye(16), atol=1e-15)

    def test_pauli_order(self):
        assert ch.PAULI_LABELS[:6] == ["II", "IX", "IY", "IZ", "XI", "XX"]
        assert ch.PAULI_LABELS[-1] == "ZZ"

    def test_random_channel_is_cptp(self, rng):
        for _ in range(5):
            assert ch.random_channel(rng).is_cptp()

    def test_non_cp_detected(self):
        transpose = np.zeros((16, 16))
        for i in range(4):
            for j in range(4):
                transpose[j * 4 + i, i * 4 + j] = 1  # vec index of (i, j) is j*4+i
        chan = QuantumChannel(transpose)
        assert chan.is_trace_preserving()
        assert not chan.is_completely_positive()


class TestFromUnitary:
    def test_identity(self):
        assert ch.from_unitary(np.eye(4)).allclose(QuantumChannel.identity())

    @settings(max_examples=25)
    @given(seeds)
    def test_composition_law(self, seed):
        rng = np.random.default_rng(seed)
        U, V = ch.random_unitary(rng), ch.random_unitary(rng)
        assert (ch.from_unitary(U) @ ch.from_unitary(V)).allclose(ch.from_unitary(U @ V))

    def test_choi_rank_one(self, rng):
        w = np.linalg.eigvalsh(ch.from_unitary(ch.random_unitary(rng)).choi)
        assert np.sum(w > 1e-10) == 1
        assert w.max() == pytest.approx(4.0)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            ch.from_unitary(np.ones((4, 4)))

    def test_spectrum_preserved(self, rng):
        rho = ch.random_channel(rng)(ch.density_matrix(haar_state(rng)))
        out = ch.apply(ch.from_unitary(ch.random_unitary(rng)), rho)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12)


class TestErrorChannel:
    def test_same_gate_is_identity(self, rng):
        U = ch.random_unitary(rng)
        assert ch.error_channel(U, U).allclose(QuantumChannel.identity())

    @settings(max_examples=25)
    @given(seeds)
    def test_factorization(self, seed):
        rng = np.random.default_rng(seed)
        Ui, Ua = ch.random_unitary(rng), ch.random_unitary(rng)
        assert ch.from_unitary(Ua).allclose(ch.from_unitary(Ui) @ ch.error_channel(Ui, Ua))

    def test_average_fidelity_three_ways(self, rng, table):
        Ui, Ua = ch.random_unitary(rng), ch.random_unitary(rng)
        err = ch.error_channel(Ui, Ua)
        dU = Ui.conj().T @ Ua
        formula = (abs(np.trace(dU)) ** 2 + 4) / 20
        assert ch.average_fidelity(err) == pytest.approx(formula, abs=1e-12)
        tw = ch.twirl_explicit(err, table)
        p = tw.ptm[1, 1]
        assert p + (1 - p) / 4 == pytest.approx(formula, abs=1e-10)
        # Haar-random pure states
        samples = []
        for _ in range(20000):
            psi = haar_state(rng)
            samples.append(abs(np.vdot(psi, dU @ psi)) ** 2)
        se = np.std(samples) / np.sqrt(len(samples))
        assert abs(np.mean(samples) - formula) < 5 * se


class TestMeasurementChannel:
    def test_identity_projector(self):
        assert ch.measurement_channel(np.eye(4)).allclose(QuantumChannel.identity())

    def test_idempotent(self):
        M = ch.measurement_channel(projector(triplet_zero()))
        assert (M @ M).allclose(M)

    def test_rejects_non_projector(self):
        with pytest.raises(ValueError):
            ch.measurement_channel(0.5 * np.eye(4))

    def test_eigenstate_unchanged(self):
        P = projector(triplet_zero())
        np.testing.assert_allclose(ch.apply(ch.measurement_channel(P), P), P, atol=1e-15)

    def test_uu_state_invariant_under_T0_pinching(self):
        rho = projector(basis_state("uu"))
        np.testing.assert_allclose(ch.measurement_channel(projector(triplet_zero()))(rho), rho, atol=1e-15)

    @pytest.mark.parametrize("psi", [triplet_zero(), basis_state("uu"), np.array([1, 1j, 0, 1]) / np.sqrt(3)])
    def test_rank_one_depolarization_three_fifths(self, table, psi):
        M = ch.measurement_channel(projector(psi))
        # PTM trace: four Paulis at weight 1 plus the remaining trace split gives 10
        assert np.trace(M.ptm) == pytest.approx(10.0, abs=1e-12)
        assert ch.depolarization_parameter_analytic(M) == pytest.approx(0.6, abs=1e-12)
        assert ch.twirl_explicit(M, table).ptm[5, 5] == pytest.approx(0.6, abs=1e-12)


class TestDepolarization:
    def test_diag_example(self):
        U = np.diag([1, 1j, 1j, 1])
        chan = ch.from_unitary(U)
        assert ch.average_fidelity(chan) == pytest.approx(0.6, abs=1e-12)
        assert ch.depolarization_parameter_analytic(chan) == pytest.approx(7 / 15, abs=1e-12)
        f = ch.average_fidelity(chan)
        # inverting F_avg = p + (1 - p)/d
        assert (4 * f - 1) / 3 == pytest.approx(7 / 15, abs=1e-12)

    def test_identity(self):
        assert ch.depolarization_parameter_analytic(QuantumChannel.identity()) == pytest.approx(1.0)

    @given(st.floats(-1 / 15, 1))
    def test_depolarizing_round_trip(self, p):
        assert ch.depolarization_parameter_analytic(QuantumChannel.depolarizing(p)) == pytest.approx(p, abs=1e-12)

    def test_cptp_range(self, rng):
        for _ in range(20):
            p = ch.depolarization_parameter_analytic(ch.random_channel(rng, n_kraus=int(rng.integers(1, 6))))
            assert -1 / 15 - 1e-12 <= p <= 1 + 1e-12


class TestTwirl:
    def test_identity_and_full_depolarizer(self, table):
        assert ch.twirl_explicit(QuantumChannel.identity(), table).allclose(QuantumChannel.identity(), 1e-12)
        tw = ch.twirl_explicit(completely_depolarizing(), table)
        assert ch.depolarization_parameter_analytic(tw) == pytest.approx(0.0, abs=1e-12)

    def test_random_channel_becomes_depolarizing(self, table, rng):
        chan = ch.random_channel(rng)
        tw = ch.twirl_explicit(chan, table)
        p = ch.depolarization_parameter_analytic(chan)
        expected = np.diag([1.0] + [p] * 15)
        assert np.max(np.abs(tw.ptm - expected)) < 1e-9
        assert tw.allclose(QuantumChannel.depolarizing(p), 1e-9)

    def test_projection_and_fidelity(self, table, rng):
        chan = ch.random_channel(rng, n_kraus=2)
        tw = ch.twirl_explicit(chan, table)
        assert ch.twirl_explicit(tw, table).allclose(tw, 1e-9)
        assert ch.average_fidelity(tw) == pytest.approx(ch.average_fidelity(chan), abs=1e-9)

    def test_commutes_with_cliffords(self, table, rng):
        tw = ch.twirl_explicit(ch.random_channel(rng), table)
        for i in rng.integers(0, len(table), 20):
            C = ch.from_unitary(table[i])
            assert (C @ tw).allclose(tw @ C, 1e-9)

    def test_worker_count_does_not_change_result(self, table, rng):
        chan = ch.random_channel(rng)
        a = ch.twirl_explicit(chan, table, workers=1)
        b = ch.twirl_explicit(chan, table, workers=4)
        np.testing.assert_array_equal(a.superop, b.superop)


class TestComposition:
    def test_associative_and_cptp(self, rng):
        a, b, c = (ch.random_channel(rng) for _ in range(3))
        assert ((a @ b) @ c).allclose(a @ (b @ c))
        assert ch.compose(a, b, c).allclose(a @ (b @ c))
        assert ch.compose(a, b, c).is_cptp()

    def test_empty_compose(self):
        assert ch.compose().allclose(QuantumChannel.identity())

    def test_rightmost_acts_first(self):
        P = projector(basis_state("uu"))
        U = np.kron([[0, 1], [1, 0]], np.eye(2))
        flip_then_measure = ch.compose(ch.measurement_channel(P), ch.from_unitary(U))
        out = flip_then_measure(projector(basis_state("du")))
        np.testing.assert_allclose(out, P, atol=1e-15)


class TestApply:
    def test_identity(self, rng):
        rho = ch.density_matrix(haar_state(rng))
        np.testing.assert_allclose(ch.apply(QuantumChannel.identity(), rho), rho)

    def test_rejects_invalid_state(self):
        with pytest.raises(ValueError):
            ch.apply(QuantumChannel.identity(), 2 * np.eye(4))
        with pytest.raises(ValueError):
            ch.apply(QuantumChannel.identity(), np.diag([1.5, -0.5, 0, 0]))

    def test_warns_on_non_trace_preserving(self):
        with pytest.warns(RuntimeWarning):
            ch.apply(QuantumChannel(0.5 * np.eye(16)), np.eye(4) / 4)

    def test_no_warning_for_cptp(self, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            ch.apply(ch.random_channel(rng), np.eye(4) / 4)
