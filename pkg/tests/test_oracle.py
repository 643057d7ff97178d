import math

import numpy as np
import pytest

from kerrmzi import analytic
from kerrmzi.config import build_config
from kerrmzi.oracle import (
    MODE_A,
    MODE_B,
    MODE_C,
    ConvergenceError,
    TruncationError,
    apply_beam_splitter,
    apply_kerr,
    apply_loss,
    apply_two_mode_squeezer,
    coherent_product_state,
    kraus_completeness_defect,
    loss_kraus_operators,
    mean_amplitude,
    mean_photon,
    mode_populations,
    numeric_slope,
    oracle_qfi,
    prepare_input,
    quadrature_stats,
    reduced_density,
    simulate,
    to_density,
)

CANON = build_config(alpha=1.0, g1=0.3, g2=0.6, transmissivity=0.25)


def vacuum(cutoff=12):
    return coherent_product_state([0.0, 0.0, 0.0], cutoff)


class TestPreparation:
    def test_vacuum_input(self):
        state = prepare_input(build_config(), cutoff=10)
        assert state.amplitudes[0, 0, 0] == 1.0
        assert state.norm_sq == pytest.approx(1.0)
        assert all(mean_photon(state, m) == 0.0 for m in range(3))

    def test_coherent_mean_photon(self):
        state = prepare_input(build_config(alpha=1.0), cutoff=15)
        assert mean_photon(state, MODE_C) == pytest.approx(1.0, abs=1e-8)

    def test_cutoff_too_small_for_alpha(self):
        with pytest.raises(TruncationError, match="prepare"):
            prepare_input(build_config(alpha=2.0), cutoff=8)

    def test_cutoff_floor(self):
        with pytest.raises(ValueError, match="cutoff"):
            prepare_input(build_config(), cutoff=1)

    def test_coherent_phase_carried(self):
        state = coherent_product_state([0.0, 0.0, 0.5j], cutoff=12)
        assert mean_amplitude(state, MODE_C) == pytest.approx(0.5j, abs=1e-10)


class TestTwoModeSqueezer:
    def test_unit_gain_is_identity(self):
        state = vacuum()
        out = apply_two_mode_squeezer(state, 1.0, 0.3, MODE_A, MODE_B)
        assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-14)

    def test_vacuum_occupancy_is_g_squared(self):
        g = 0.4
        out = apply_two_mode_squeezer(vacuum(), math.hypot(1, g), 0.0, MODE_A, MODE_B)
        assert mean_photon(out, MODE_A) == pytest.approx(g * g, abs=1e-10)
        assert mean_photon(out, MODE_B) == pytest.approx(g * g, abs=1e-10)
        assert out.norm_sq == pytest.approx(1.0, abs=1e-12)

    def test_bogoliubov_action_on_means(self):
        g, theta = 0.5, 0.8
        gain = math.hypot(1, g)
        seed_a, seed_b = 0.3 + 0.1j, 0.2 - 0.25j
        state = coherent_product_state([seed_a, seed_b, 0.0], cutoff=18)
        out = apply_two_mode_squeezer(state, gain, theta, MODE_A, MODE_B)
        expect_a = gain * seed_a + g * np.exp(1j * theta) * np.conj(seed_b)
        expect_b = gain * seed_b + g * np.exp(1j * theta) * np.conj(seed_a)
        assert mean_amplitude(out, MODE_A) == pytest.approx(expect_a, abs=1e-6)
        assert mean_amplitude(out, MODE_B) == pytest.approx(expect_b, abs=1e-6)

    def test_gain_below_one_rejected(self):
        with pytest.raises(ValueError):
            apply_two_mode_squeezer(vacuum(), 0.9, 0.0, MODE_A, MODE_B)


class TestBeamSplitter:
    def test_full_transmission_passes_b_untouched(self):
        # T = 1 is the identity on the transmitted mode; the reflected port
        # carries the fixed mirror-phase convention (c -> -c), which cancels
        # on the second pass
        state = coherent_product_state([0.0, 0.4, 0.2j], cutoff=12)
        out = apply_beam_splitter(state, 1.0, MODE_B, MODE_C)
        assert mean_amplitude(out, MODE_B) == pytest.approx(
            mean_amplitude(state, MODE_B), abs=1e-12
        )
        assert mean_amplitude(out, MODE_C) == pytest.approx(
            -mean_amplitude(state, MODE_C), abs=1e-12
        )
        again = apply_beam_splitter(out, 1.0, MODE_B, MODE_C)
        assert np.allclose(again.amplitudes, state.amplitudes, atol=1e-12)

    def test_double_pass_at_zero_phase_is_identity(self):
        state = coherent_product_state([0.0, 0.3, 0.5], cutoff=12)
        out = apply_beam_splitter(state, 0.3, MODE_B, MODE_C)
        out = apply_beam_splitter(out, 0.3, MODE_B, MODE_C)
        assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-12)

    def test_coherent_means_follow_matrix(self):
        t = 0.3
        seed_b, seed_c = 0.4 + 0.2j, -0.3 + 0.1j
        state = coherent_product_state([0.0, seed_b, seed_c], cutoff=14)
        out = apply_beam_splitter(state, t, MODE_B, MODE_C)
        rt, rr = math.sqrt(t), math.sqrt(1 - t)
        assert mean_amplitude(out, MODE_B) == pytest.approx(
            rt * seed_b + rr * seed_c, abs=1e-8
        )
        assert mean_amplitude(out, MODE_C) == pytest.approx(
            rr * seed_b - rt * seed_c, abs=1e-8
        )

    def test_out_of_range_transmissivity(self):
        with pytest.raises(ValueError):
            apply_beam_splitter(vacuum(), 1.5, MODE_B, MODE_C)

    def test_photon_number_conserved(self):
        state = coherent_product_state([0.0, 0.6, 0.8], cutoff=14)
        before = mean_photon(state, MODE_B) + mean_photon(state, MODE_C)
        out = apply_beam_splitter(state, 0.37, MODE_B, MODE_C)
        after = mean_photon(out, MODE_B) + mean_photon(out, MODE_C)
        assert after == pytest.approx(before, abs=1e-12)


class TestKerr:
    def test_zero_phase_is_identity(self):
        state = coherent_product_state([0.0, 0.4, 0.0], cutoff=10)
        out = apply_kerr(state, 0.0, 0.0, MODE_B)
        assert np.array_equal(out.amplitudes, state.amplitudes)

    def test_single_photon_phase(self):
        state = vacuum(8)
        amps = np.zeros_like(state.amplitudes)
        amps[0, 1, 0] = 1.0
        state.amplitudes = amps
        out = apply_kerr(state, 0.2, 0.05, MODE_B)
        assert out.amplitudes[0, 1, 0] == pytest.approx(np.exp(1j * 0.25), abs=1e-14)

    def test_norm_exactly_preserved(self):
        state = coherent_product_state([0.0, 0.8, 0.0], cutoff=14)
        out = apply_kerr(state, 0.3, 0.11, MODE_B)
        assert out.norm_sq == pytest.approx(state.norm_sq, abs=1e-15)

    def test_heisenberg_matrix_element(self):
        # the annihilator matrix element from the two-photon level picks up
        # e^{i(phi_l + 3 phi_n)}, the n = 1 value of e^{i(phi_l + phi_n(2n+1))}
        phi_l, phi_n = 0.4, 0.13
        c = 6
        u = np.diag(np.exp(1j * (phi_l * np.arange(c) + phi_n * np.arange(c) ** 2)))
        a = np.diag(np.sqrt(np.arange(1, c)), k=1)
        evolved = u.conj().T @ a @ u
        assert evolved[1, 2] == pytest.approx(
            a[1, 2] * np.exp(1j * (phi_l + 3 * phi_n)), abs=1e-14
        )


class TestLossChannel:
    def test_eta_one_is_identity(self):
        rho = to_density(coherent_product_state([0.0, 0.5, 0.0], cutoff=10))
        out = apply_loss(rho, 1.0, MODE_B)
        assert np.array_equal(out.tensor, rho.tensor)

    def test_kraus_completeness(self):
        for eta in (0.0, 0.25, 0.8, 1.0):
            assert kraus_completeness_defect(eta, 12) < 1e-12

    def test_coherent_stays_coherent(self):
        eta, alpha = 0.6, 0.8
        rho = to_density(coherent_product_state([0.0, 0.0, alpha], cutoff=14))
        out = apply_loss(rho, eta, MODE_C)
        assert mean_amplitude(out, MODE_C) == pytest.approx(
            math.sqrt(eta) * alpha, abs=1e-9
        )
        assert mean_photon(out, MODE_C) == pytest.approx(eta * alpha**2, abs=1e-9)
        assert out.trace == pytest.approx(1.0, abs=1e-12)

    def test_thermal_occupancy_scales(self):
        g = 0.5
        state = apply_two_mode_squeezer(
            vacuum(14), math.hypot(1, g), 0.0, MODE_A, MODE_B
        )
        rho = apply_loss(to_density(state), 0.4, MODE_B)
        assert mean_photon(rho, MODE_B) == pytest.approx(0.4 * g * g, abs=1e-9)

    def test_eta_zero_empties_the_mode(self):
        rho = to_density(coherent_product_state([0.0, 0.7, 0.0], cutoff=10))
        out = apply_loss(rho, 0.0, MODE_B)
        assert mean_photon(out, MODE_B) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_pure_state(self):
        with pytest.raises(TypeError):
            apply_loss(vacuum(), 0.5, MODE_B)

    def test_kraus_matrix_elements(self):
        eta = 0.49
        k1 = loss_kraus_operators(eta, 6)[1]
        assert k1[2, 3] == pytest.approx(
            math.sqrt(3 * eta**2 * (1 - eta)), abs=1e-14
        )


class TestQuadratureStats:
    def test_vacuum_convention(self):
        mean, var = quadrature_stats(vacuum(), MODE_A)
        assert mean == pytest.approx(0.0, abs=1e-14)
        assert var == pytest.approx(1.0, abs=1e-12)

    def test_coherent_mean(self):
        theta = 0.7
        alpha = 0.9 * np.exp(1j * theta)
        state = coherent_product_state([alpha, 0.0, 0.0], cutoff=15)
        mean, _ = quadrature_stats(state, MODE_A)
        assert mean == pytest.approx(2 * 0.9 * math.sin(theta), abs=1e-8)

    def test_single_squeezer_variance_matches_closed_form(self):
        # g2 = 0 readout: the variance reduces to the one-squeezer combination
        cfg = build_config(alpha=0.5, g1=0.4, g2=0.0, transmissivity=0.25)
        state = simulate(cfg, cutoff=14)
        _, var = quadrature_stats(state, MODE_A)
        assert var == pytest.approx(analytic.noise_at_zero(cfg), abs=1e-8)


class TestSimulate:
    def test_identity_pipeline_returns_vacuum(self):
        cfg = build_config(alpha=0.0, g1=0.0, g2=0.0)
        state = simulate(cfg, cutoff=8)
        assert abs(state.amplitudes[0, 0, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_arm_occupancy_after_first_splitter(self):
        cfg = build_config(alpha=1.0, g1=0.3, transmissivity=0.25)
        state = prepare_input(cfg, cutoff=15)
        state = apply_two_mode_squeezer(
            state, cfg.nbs1.gain, cfg.nbs1.phase, MODE_A, MODE_B
        )
        state = apply_beam_splitter(state, 0.25, MODE_B, MODE_C)
        expected = 0.25 * 0.09 + 0.75 * 1.0
        assert mean_photon(state, MODE_B) == pytest.approx(expected, abs=1e-8)

    def test_variance_matches_closed_form(self):
        state = simulate(CANON, cutoff=15)
        _, var = quadrature_stats(state, MODE_A)
        assert var == pytest.approx(analytic.noise_at_zero(CANON), abs=1e-4)

    def test_lossless_returns_pure_lossy_returns_density(self):
        from kerrmzi.oracle import DensityOperator, FockState

        assert isinstance(simulate(CANON, cutoff=12, budget=1e-6), FockState)
        lossy = build_config(
            alpha=0.5, g1=0.2, g2=0.3, transmissivity=0.25, eta_d=0.8
        )
        assert isinstance(simulate(lossy, cutoff=8, budget=1e-4), DensityOperator)

    def test_density_is_physical(self):
        lossy = build_config(
            alpha=0.8, g1=0.25, g2=0.5, transmissivity=0.25,
            eta_a=0.9, eta_b=0.8, eta_c=0.7, eta_d=0.6,
        )
        rho = simulate(lossy, cutoff=8, budget=5e-4)
        assert rho.trace == pytest.approx(1.0, abs=1e-10)
        assert rho.hermiticity_defect() < 1e-10
        assert rho.min_eigenvalue() > -1e-8

    def test_truncation_budget_names_stage(self):
        cfg = build_config(alpha=1.0, g1=0.3, g2=0.6, transmissivity=0.25)
        with pytest.raises(TruncationError, match="prepare"):
            simulate(cfg, cutoff=8, budget=1e-8)

    def test_detection_loss_scales_slope(self):
        import dataclasses

        lossy = dataclasses.replace(
            CANON, loss=dataclasses.replace(CANON.loss, eta_det=0.5)
        )
        est_full = numeric_slope(CANON, cutoff=12, budget=1e-6)
        est_half = numeric_slope(lossy, cutoff=12, budget=1e-6)
        assert est_half.value == pytest.approx(
            est_full.value * math.sqrt(0.5), rel=1e-6
        )


class TestNumericSlope:
    def test_matches_closed_form(self):
        est = numeric_slope(CANON, cutoff=15)
        assert abs(est.value) == pytest.approx(
            analytic.slope_at_zero(CANON), rel=1e-3
        )
        assert abs(est.value) == pytest.approx(1.34580, abs=2e-5)
        assert est.error < 1e-6

    def test_zero_readout_gain_gives_zero(self):
        cfg = build_config(alpha=1.0, g1=0.3, g2=0.0, transmissivity=0.25)
        est = numeric_slope(cfg, cutoff=12, budget=1e-6)
        assert abs(est.value) < 1e-10

    def test_sign_flips_with_pump_phase(self):
        # rotating theta_alpha by pi flips cos(theta2 - theta_alpha) and with
        # it the slope sign, leaving the magnitude untouched
        flipped = build_config(
            alpha=1.0, theta_alpha=math.pi, g1=0.3, g2=0.6, transmissivity=0.25
        )
        a = numeric_slope(CANON, cutoff=12, budget=1e-6)
        b = numeric_slope(flipped, cutoff=12, budget=1e-6)
        assert b.value == pytest.approx(-a.value, rel=1e-9)

    def test_unconverged_raises(self):
        with pytest.raises(ConvergenceError):
            numeric_slope(CANON, cutoff=12, rel_tol=1e-18, abs_tol=1e-18)


class TestOracleQfi:
    def test_vacuum_is_zero(self):
        cfg = build_config(alpha=0.0, g1=0.0)
        assert oracle_qfi(cfg, cutoff=8) == pytest.approx(0.0, abs=1e-12)

    def test_matches_polynomial(self):
        f = oracle_qfi(CANON, cutoff=15)
        poly = analytic.qfi_nonlinear(1.0, 0.18, CANON.splitter).f
        assert f == pytest.approx(poly, rel=1e-3)

    def test_full_transmission_keeps_arm_dark(self):
        cfg = build_config(alpha=1.0, g1=0.0, transmissivity=1.0)
        assert oracle_qfi(cfg, cutoff=12) == pytest.approx(0.0, abs=1e-10)

    def test_lossy_config_rejected(self):
        cfg = build_config(alpha=0.5, g1=0.2, eta_c=0.9)
        with pytest.raises(ValueError, match="lossless"):
            oracle_qfi(cfg, cutoff=8)


class TestReducedDensity:
    def test_pure_and_density_paths_agree(self):
        state = simulate(CANON, cutoff=12, budget=1e-6)
        rho = to_density(state)
        for mode in range(3):
            np.testing.assert_allclose(
                reduced_density(state, mode),
                reduced_density(rho, mode),
                atol=1e-12,
            )

    def test_populations_sum_to_one(self):
        state = simulate(CANON, cutoff=12, budget=1e-6)
        for mode in range(3):
            assert mode_populations(state, mode).sum() == pytest.approx(
                1.0, abs=1e-10
            )
