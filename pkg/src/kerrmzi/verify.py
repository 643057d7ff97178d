"""Cross-check suites: algebraic identities of the closed forms and
Fock-simulator comparisons, each emitting a machine-readable record.

The ``mutate`` hook deliberately perturbs the analytic side of one named
check so the harness itself can be shown to catch a wrong coefficient.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import analytic, oracle
from .config import (
    InterferometerConfig,
    PhaseShift,
    SplitterParams,
    build_config,
    config_digest,
)

_MUTATION_FACTOR = 1.0 + 1e-3


@dataclass(frozen=True)
class CheckRecord:
    """One verification outcome.

    ``analytic`` and ``oracle`` are the two compared values (for identity
    checks the right-hand side plays the oracle role); ``rel_err`` is
    their relative discrepancy, or the worst one over the randomized
    draws the check ran.
    """

    check: str
    config_digest: str
    analytic: float
    oracle: float
    rel_err: float
    tol: float
    passed: bool
    cutoff: int | None = None
    converged: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _record(check, digest, lhs, rhs, tol, cutoff=None, converged=True, scale=None):
    denom = max(abs(lhs), abs(rhs)) if scale is None else scale
    rel = abs(lhs - rhs) / denom if denom > 0 else abs(lhs - rhs)
    return CheckRecord(
        check=check,
        config_digest=digest,
        analytic=lhs,
        oracle=rhs,
        rel_err=rel,
        tol=tol,
        passed=bool(rel <= tol and converged),
        cutoff=cutoff,
        converged=converged,
    )


def _maybe_mutate(name: str, value: float, mutate: str | None) -> float:
    return value * _MUTATION_FACTOR if mutate == name else value


def _random_config(rng) -> InterferometerConfig:
    return build_config(
        alpha=rng.uniform(0.1, 6.0),
        theta_alpha=rng.uniform(-math.pi, math.pi),
        g1=rng.uniform(0.0, 3.0),
        theta1=rng.uniform(-math.pi, math.pi),
        g2=rng.uniform(0.1, 4.0),
        theta2=rng.uniform(-math.pi, math.pi),
        transmissivity=rng.uniform(0.05, 0.95),
    )


def run_analytic_suite(seed: int = 0, draws: int = 2000, mutate: str | None = None):
    """Identity checks of the closed-form layer over randomized parameters."""
    rng = np.random.default_rng(seed)
    records = []

    # unitarity and commutator preservation of the transfer coefficients
    worst_u1 = worst_u2 = worst_comm = 0.0
    for _ in range(draws):
        cfg = _random_config(rng)
        tc = analytic.transfer_coefficients(
            cfg.splitter,
            cfg.nbs1,
            cfg.nbs2,
            PhaseShift(rng.uniform(-math.pi, math.pi), rng.uniform(-0.5, 0.5)),
            int(rng.integers(0, 30)),
        )
        worst_u1 = max(worst_u1, abs(abs(tc.m1) ** 2 + abs(tc.m0) ** 2 - 1.0))
        worst_u2 = max(worst_u2, abs(abs(tc.m2) ** 2 + abs(tc.m0) ** 2 - 1.0))
        worst_comm = max(
            worst_comm,
            abs(abs(tc.a) ** 2 - abs(tc.b) ** 2 - abs(tc.c) ** 2 - 1.0),
        )
    records.append(
        _record("unitarity_m1_m0", "randomized",
                _maybe_mutate("unitarity_m1_m0", 1.0 + worst_u1, mutate), 1.0, 1e-12)
    )
    records.append(_record("unitarity_m2_m0", "randomized", 1.0 + worst_u2, 1.0, 1e-12))
    records.append(
        _record("commutator_abc", "randomized",
                _maybe_mutate("commutator_abc", 1.0 + worst_comm, mutate), 1.0, 1e-12)
    )

    # lossless reduction of the lossy formulas, and the N_g bookkeeping
    # consistency between the two slope forms
    worst_slope = worst_noise = 0.0
    for _ in range(draws):
        cfg = _random_config(rng)
        s_lossless = analytic.slope_at_zero(cfg)
        s_lossy = analytic.lossy_slope_at_zero(cfg)
        n_lossless = analytic.noise_at_zero(cfg)
        n_lossy = analytic.lossy_noise_at_zero(cfg)
        if s_lossless > 0:
            worst_slope = max(worst_slope, abs(s_lossy - s_lossless) / s_lossless)
        worst_noise = max(worst_noise, abs(n_lossy - n_lossless) / abs(n_lossless))
    records.append(
        _record("lossless_reduction_slope", "randomized",
                _maybe_mutate("lossless_reduction_slope", 1.0 + worst_slope, mutate),
                1.0, 1e-14)
    )
    records.append(
        _record("lossless_reduction_noise", "randomized", 1.0 + worst_noise, 1.0, 1e-14)
    )

    # QFI polynomial reassembly and the moment-based re-derivation of the
    # linear-phase information
    worst_reasm = worst_lin = 0.0
    for _ in range(draws):
        n_alpha = rng.uniform(0.0, 50.0)
        n_g = rng.uniform(0.0, 20.0)
        sp = SplitterParams(rng.uniform(0.0, 1.0))
        q = analytic.qfi_nonlinear(n_alpha, n_g, sp)
        reassembled = (
            n_alpha**3 * q.s1 + n_alpha**2 * q.s2 + n_alpha * q.s3 + q.s4
        )
        if q.f > 0:
            worst_reasm = max(worst_reasm, abs(q.f - reassembled) / q.f)
        f_lin = analytic.qfi_linear(n_alpha, n_g, sp)
        f_mom = analytic.qfi_linear_from_arm_moments(n_alpha, n_g, sp)
        if f_lin > 0:
            worst_lin = max(worst_lin, abs(f_lin - f_mom) / f_lin)
    records.append(
        _record("qfi_reassembly", "randomized",
                _maybe_mutate("qfi_reassembly", 1.0 + worst_reasm, mutate), 1.0, 1e-10)
    )
    records.append(
        _record("qfi_linear_moments", "randomized", 1.0 + worst_lin, 1.0, 1e-10)
    )

    # quantum bound: delta_phi >= qcrb wherever both are defined
    worst_violation = 0.0
    for _ in range(draws // 4):
        cfg = _random_config(rng)
        try:
            report = analytic.sensitivity(cfg)
        except analytic.UndefinedSensitivityError:
            continue
        if report.delta_phi < report.qcrb:
            worst_violation = max(
                worst_violation, (report.qcrb - report.delta_phi) / report.qcrb
            )
    records.append(
        _record("qcrb_bound", "randomized", 1.0 + worst_violation, 1.0, 1e-12)
    )

    # closed-form optimal split ratio vs numeric argmax of the slope
    worst_t = 0.0
    for _ in range(draws // 10):
        n_alpha = rng.uniform(1e-3, 1e4)
        g1 = rng.uniform(0.0, 5.0)
        t_formula = analytic.optimal_transmissivity(n_alpha, g1)
        t_numeric = analytic.argmax_slope_transmissivity(n_alpha, g1)
        worst_t = max(worst_t, abs(t_formula - t_numeric))
    records.append(
        _record("optimal_split_argmax", "randomized",
                _maybe_mutate("optimal_split_argmax", 1.0 + worst_t, mutate),
                1.0, 1e-4)
    )

    # balanced decomposition: g * (sum of terms) equals the slope
    worst_bal = 0.0
    for _ in range(draws // 4):
        g = rng.uniform(0.05, 3.0)
        cfg = build_config(
            alpha=rng.uniform(0.1, 10.0), g1=g, g2=g,
            transmissivity=rng.uniform(0.05, 0.95),
        )
        terms = analytic.balanced_terms(cfg)
        slope = analytic.slope_at_zero(cfg)
        combined = cfg.nbs1.g * sum(terms)
        worst_bal = max(worst_bal, abs(combined - slope) / slope)
    records.append(
        _record("balanced_decomposition", "randomized", 1.0 + worst_bal, 1.0, 1e-12)
    )

    # detection loss is exactly a 1/sqrt(eta) penalty for balanced configs
    worst_det = 0.0
    base = build_config(alpha=4.0, g1=1.2, g2=1.2, transmissivity=0.25)
    dphi_balance = analytic.sensitivity(base).delta_phi
    for eta in np.linspace(0.1, 1.0, 10):
        cfg = dataclasses.replace(
            base, loss=dataclasses.replace(base.loss, eta_det=float(eta))
        )
        dphi = analytic.detection_loss_sensitivity(cfg)
        worst_det = max(worst_det, abs(dphi * math.sqrt(eta) / dphi_balance - 1.0))
    records.append(
        _record("detection_loss_identity", config_digest(base),
                1.0 + worst_det, 1.0, 1e-12)
    )

    # the linear-phase slope peaks at T = 1/2
    t_star = analytic.argmax_linear_slope_transmissivity(xtol=1e-9)
    records.append(
        _record("linear_argmax_half", "none", t_star, 0.5, 1e-6, scale=1.0)
    )

    return records


_SMALL_TRANSMISSIVITIES = (0.25, 0.5, 0.75)


def _random_small_config(rng) -> InterferometerConfig:
    return build_config(
        alpha=rng.uniform(0.2, 1.2),
        g1=rng.uniform(0.05, 0.5),
        g2=rng.uniform(0.1, 1.0),
        transmissivity=float(
            _SMALL_TRANSMISSIVITIES[rng.integers(0, len(_SMALL_TRANSMISSIVITIES))]
        ),
    )


def run_oracle_suite(
    seed: int = 0,
    cutoff: int = 15,
    lossy_cutoff: int = 8,
    mutate: str | None = None,
    budget: float = 1e-6,
    lossy_budget: float = 5e-4,
):
    """Fock-simulator checks of the closed forms at desk-scale parameters.

    The canonical slope and variance comparisons carry a converged flag
    obtained by doubling the cutoff and requiring the simulator value to
    move by less than a tenth of the comparison tolerance.
    """
    rng = np.random.default_rng(seed)
    records = []

    # squeezer sends vacuum to a pair with per-mode occupancy g^2
    cfg = build_config(g1=0.4)
    state = oracle.prepare_input(cfg, cutoff, budget)
    state = oracle.apply_two_mode_squeezer(
        state, cfg.nbs1.gain, cfg.nbs1.phase, oracle.MODE_A, oracle.MODE_B
    )
    records.append(
        _record("tmsv_occupancy", config_digest(cfg),
                _maybe_mutate("tmsv_occupancy", cfg.nbs1.g ** 2, mutate),
                oracle.mean_photon(state, oracle.MODE_A), 1e-8,
                cutoff=cutoff, scale=1.0)
    )

    # coherent preparation lands at |alpha|^2 photons
    cfg = build_config(alpha=1.0)
    state = oracle.prepare_input(cfg, cutoff, budget)
    records.append(
        _record("coherent_mean_photon", config_digest(cfg), 1.0,
                oracle.mean_photon(state, oracle.MODE_C), 1e-8, cutoff=cutoff)
    )

    # splitter convention: coherent seeds recover the scalar two-port
    # coefficients at a pure linear phase
    phi_l = 0.7
    t = 0.35
    beta = 0.4
    cfg = build_config(transmissivity=t, phi_l=phi_l)
    tc = analytic.transfer_coefficients(
        cfg.splitter, cfg.nbs1, cfg.nbs2, PhaseShift(phi_l, 0.0), 0
    )
    seeded = oracle.coherent_product_state([0.0, beta, 0.0], cutoff, budget)
    seeded = oracle.apply_beam_splitter(seeded, t, oracle.MODE_B, oracle.MODE_C)
    seeded = oracle.apply_kerr(seeded, phi_l, 0.0, oracle.MODE_B)
    seeded = oracle.apply_beam_splitter(seeded, t, oracle.MODE_B, oracle.MODE_C)
    m1_est = oracle.mean_amplitude(seeded, oracle.MODE_B) / beta
    m0_est = oracle.mean_amplitude(seeded, oracle.MODE_C) / beta
    records.append(
        _record("bs_convention_m1", config_digest(cfg),
                _maybe_mutate("bs_convention_m1", abs(tc.m1 - m1_est), mutate),
                0.0, 1e-8, cutoff=cutoff, scale=1.0)
    )
    records.append(
        _record("bs_convention_m0", config_digest(cfg), abs(tc.m0 - m0_est),
                0.0, 1e-8, cutoff=cutoff, scale=1.0)
    )

    # loss channel: complete, and coherent states stay coherent
    eta = 0.6
    records.append(
        _record("loss_cptp", "none", oracle.kraus_completeness_defect(eta, cutoff),
                0.0, 1e-12, cutoff=cutoff, scale=1.0)
    )
    rho = oracle.to_density(oracle.coherent_product_state([0.0, 0.0, 0.8], cutoff, budget))
    rho = oracle.apply_loss(rho, eta, oracle.MODE_C)
    amp = oracle.mean_amplitude(rho, oracle.MODE_C)
    records.append(
        _record("loss_coherent_amplitude", "none",
                abs(amp - math.sqrt(eta) * 0.8), 0.0, 1e-8,
                cutoff=cutoff, scale=1.0)
    )

    # slope and variance against the closed forms, canonical small config
    canon = build_config(alpha=1.0, g1=0.3, g2=0.6, transmissivity=0.25)
    slope_an = _maybe_mutate("slope_vs_closed_form",
                             analytic.slope_at_zero(canon), mutate)
    var_an = _maybe_mutate("variance_vs_closed_form",
                           analytic.noise_at_zero(canon), mutate)
    est = oracle.numeric_slope(canon, cutoff=cutoff, budget=budget)
    est2 = oracle.numeric_slope(canon, cutoff=2 * cutoff, budget=budget)
    converged = abs(est2.value - est.value) <= 1e-4 * abs(est2.value)
    records.append(
        _record("slope_vs_closed_form", config_digest(canon), slope_an,
                abs(est.value), 1e-3, cutoff=cutoff, converged=converged)
    )
    _, var0 = oracle.quadrature_stats(
        oracle.simulate(canon, cutoff=cutoff, budget=budget), oracle.MODE_A
    )
    _, var0_big = oracle.quadrature_stats(
        oracle.simulate(canon, cutoff=2 * cutoff, budget=budget), oracle.MODE_A
    )
    records.append(
        _record("variance_vs_closed_form", config_digest(canon), var_an, var0,
                1e-4, cutoff=cutoff,
                converged=abs(var0_big - var0) <= 1e-5 * abs(var0_big))
    )

    # nonlinear-phase Fisher information against the printed polynomial
    worst = 0.0
    worst_digest = ""
    for _ in range(6):
        cfg = _random_small_config(rng)
        f_oracle = oracle.oracle_qfi(cfg, cutoff=cutoff, budget=budget)
        f_poly = analytic.qfi_nonlinear(
            cfg.coherent.n_alpha, 2.0 * cfg.nbs1.g ** 2, cfg.splitter
        ).f
        rel = abs(f_oracle - f_poly) / f_poly
        if rel > worst:
            worst, worst_digest = rel, config_digest(cfg)
    records.append(
        _record("qfi_vs_polynomial", worst_digest,
                _maybe_mutate("qfi_vs_polynomial", 1.0 + worst, mutate),
                1.0, 1e-3, cutoff=cutoff)
    )

    # lossy pipeline against the loss formulas (density-operator path)
    worst_s = worst_v = 0.0
    worst_digest = ""
    for _ in range(3):
        etas = rng.uniform(0.35, 1.0, size=4)
        cfg = build_config(
            alpha=1.0, g1=0.3, g2=0.6, transmissivity=0.25,
            eta_a=float(etas[0]), eta_b=float(etas[1]),
            eta_c=float(etas[2]), eta_d=float(etas[3]),
        )
        est = oracle.numeric_slope(cfg, cutoff=lossy_cutoff, budget=lossy_budget)
        _, var = oracle.quadrature_stats(
            oracle.simulate(cfg, cutoff=lossy_cutoff, budget=lossy_budget),
            oracle.MODE_A,
        )
        s_rel = abs(abs(est.value) - analytic.lossy_slope_at_zero(cfg)) / (
            analytic.lossy_slope_at_zero(cfg)
        )
        v_rel = abs(var - analytic.lossy_noise_at_zero(cfg)) / (
            analytic.lossy_noise_at_zero(cfg)
        )
        if max(s_rel, v_rel) > max(worst_s, worst_v):
            worst_digest = config_digest(cfg)
        worst_s = max(worst_s, s_rel)
        worst_v = max(worst_v, v_rel)
    records.append(
        _record("lossy_slope_vs_closed_form", worst_digest,
                _maybe_mutate("lossy_slope_vs_closed_form", 1.0 + worst_s, mutate),
                1.0, 1e-3, cutoff=lossy_cutoff)
    )
    records.append(
        _record("lossy_noise_vs_closed_form", worst_digest, 1.0 + worst_v,
                1.0, 1e-3, cutoff=lossy_cutoff)
    )

    # sensing-arm occupancy after the first splitter: T g1^2 + R N_alpha
    cfg = build_config(alpha=0.9, g1=0.35, transmissivity=0.3)
    state = oracle.prepare_input(cfg, cutoff, budget)
    state = oracle.apply_two_mode_squeezer(
        state, cfg.nbs1.gain, cfg.nbs1.phase, oracle.MODE_A, oracle.MODE_B
    )
    state = oracle.apply_beam_splitter(
        state, cfg.splitter.transmissivity, oracle.MODE_B, oracle.MODE_C
    )
    expected = (
        cfg.splitter.transmissivity * cfg.nbs1.g ** 2
        + cfg.splitter.reflectivity * cfg.coherent.n_alpha
    )
    records.append(
        _record("arm_occupancy", config_digest(cfg), expected,
                oracle.mean_photon(state, oracle.MODE_B), 1e-6, cutoff=cutoff)
    )

    return records


def run_suite(name: str, seed: int = 0, cutoff: int = 15, mutate: str | None = None):
    """Run one of the named suites: 'analytic', 'oracle', or 'all'."""
    if name == "analytic":
        return run_analytic_suite(seed=seed, mutate=mutate)
    if name == "oracle":
        return run_oracle_suite(seed=seed, cutoff=cutoff, mutate=mutate)
    if name == "all":
        return run_analytic_suite(seed=seed, mutate=mutate) + run_oracle_suite(
            seed=seed, cutoff=cutoff, mutate=mutate
        )
    raise ValueError(f"unknown suite '{name}' (expected analytic, oracle, or all)")
