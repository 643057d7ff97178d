"""Closed-form sensitivity, Fisher-information, and loss expressions.

Everything here is evaluated at the phi = 0 operating point of the
interferometer; behaviour away from that point is the job of the Fock
simulator in :mod:`kerrmzi.oracle`.  All functions are pure.

Notation: G_i, g_i are the squeezer gain pairs (G^2 - g^2 = 1), T and
R = 1 - T the splitter coefficients, N_alpha = |alpha|^2 the pump photon
number and N_g = 2 g1^2 the photon number spontaneously emitted by the
first squeezer.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .config import (
    InterferometerConfig,
    KerrMediumSpec,
    SensitivityReport,
    SplitterParams,
    SqueezerParams,
    PhaseShift,
    phase_sensing_photons,
)


class UndefinedSensitivityError(ArithmeticError):
    """Raised when the homodyne slope vanishes and delta_phi is undefined."""


@dataclass(frozen=True)
class TransferCoefficients:
    """Scalar input-output coefficients of the interferometer at a fixed
    photon number n of the sensing arm.

    m1, m0, m2 describe the inner two-port stage; a, b, c describe the
    readout-port combination of the full three-port network.  They satisfy
    |m1|^2 + |m0|^2 = 1 and |a|^2 - |b|^2 - |c|^2 = 1.
    """

    m0: complex
    m1: complex
    m2: complex
    a: complex
    b: complex
    c: complex


@dataclass(frozen=True)
class QfiBreakdown:
    """Quantum Fisher information for the nonlinear phase, as the cubic
    polynomial f = N_alpha^3 s1 + N_alpha^2 s2 + N_alpha s3 + s4."""

    s1: float
    s2: float
    s3: float
    s4: float
    f: float


def transfer_coefficients(
    splitter: SplitterParams,
    nbs1: SqueezerParams,
    nbs2: SqueezerParams,
    phase: PhaseShift,
    n: int,
) -> TransferCoefficients:
    """Evaluate the transfer coefficients with the sensing-arm photon
    number operator replaced by the scalar n >= 0.

    The accumulated phase is phi_l + phi_n (2n + 1), so the two-port stage
    reduces to m1 = R + T e^{i phi}, m0 = sqrt(TR) (e^{i phi} - 1),
    m2 = R e^{i phi} + T, and the readout combination is
    a = G2 G1 + g2 g1 e^{i(th2 - th1)} m1*, b = G2 g1 e^{i th1}
    + G1 g2 e^{i th2} m1*, c = g2 e^{i th2} m0*.
    """
    if n < 0:
        raise ValueError(f"photon number n must be >= 0 (got {n})")
    t = splitter.transmissivity
    r = splitter.reflectivity
    ph = cmath.exp(1j * (phase.linear + phase.nonlinear * (2 * n + 1)))
    m0 = math.sqrt(t * r) * (ph - 1.0)
    m1 = r + t * ph
    m2 = r * ph + t
    e1 = cmath.exp(1j * nbs1.phase)
    e2 = cmath.exp(1j * nbs2.phase)
    g1, g2 = nbs1.g, nbs2.g
    a = nbs2.gain * nbs1.gain + g2 * g1 * e2 * e1.conjugate() * m1.conjugate()
    b = nbs2.gain * g1 * e1 + nbs1.gain * g2 * e2 * m1.conjugate()
    c = g2 * e2 * m0.conjugate()
    return TransferCoefficients(m0=m0, m1=m1, m2=m2, a=a, b=b, c=c)


def slope_at_zero(config: InterferometerConfig) -> float:
    """Magnitude of the homodyne-quadrature slope d<Y>/dphi at phi = 0:

        2 g2 sqrt(TR) N_alpha^{1/2} (1 + 2 R N_alpha + 4 T g1^2)
            * |cos(theta2 - theta_alpha)|
    """
    t = config.splitter.transmissivity
    r = config.splitter.reflectivity
    n_alpha = config.coherent.n_alpha
    g1, g2 = config.nbs1.g, config.nbs2.g
    cosm = abs(math.cos(config.nbs2.phase - config.coherent.phase))
    return (
        2.0
        * g2
        * math.sqrt(t * r)
        * math.sqrt(n_alpha)
        * (1.0 + 2.0 * r * n_alpha + 4.0 * t * g1**2)
        * cosm
    )


def noise_at_zero(config: InterferometerConfig) -> float:
    """Quadrature variance <D^2 Y> at phi = 0 (vacuum level is 1):

        G2^2 G1^2 + g1^2 g2^2 + G2^2 g1^2 + G1^2 g2^2
            + 4 G2 G1 g1 g2 cos(theta2 - theta1)

    Independent of the splitter and of the pump.
    """
    G1, g1 = config.nbs1.gain, config.nbs1.g
    G2, g2 = config.nbs2.gain, config.nbs2.g
    cos21 = math.cos(config.nbs2.phase - config.nbs1.phase)
    return (
        G2**2 * G1**2
        + g1**2 * g2**2
        + G2**2 * g1**2
        + G1**2 * g2**2
        + 4.0 * G2 * G1 * g1 * g2 * cos21
    )


def linear_only_slope(config: InterferometerConfig) -> float:
    """Slope with the nonlinear contribution dropped:
    2 g2 sqrt(TR) N_alpha^{1/2} |cos(theta2 - theta_alpha)|.  Its optimum
    over T sits at T = 1/2."""
    t = config.splitter.transmissivity
    r = config.splitter.reflectivity
    cosm = abs(math.cos(config.nbs2.phase - config.coherent.phase))
    return 2.0 * config.nbs2.g * math.sqrt(t * r) * config.coherent.magnitude * cosm


def lossy_slope_at_zero(config: InterferometerConfig) -> float:
    """Slope at phi = 0 with internal (eta_d on the sensing arm, eta_c on
    the other) and external (eta_a, eta_b) transmissions:

        2 g2 sqrt(eta_b eta_d T R) N_alpha^{1/2} (1 + 2 R N_alpha + 2 T N_g)
            * |cos(theta2 - theta_alpha)|

    Reduces to the lossless slope at all eta = 1 (2 T N_g = 4 T g1^2).
    """
    t = config.splitter.transmissivity
    r = config.splitter.reflectivity
    n_alpha = config.coherent.n_alpha
    n_g = 2.0 * config.nbs1.g**2
    cosm = abs(math.cos(config.nbs2.phase - config.coherent.phase))
    eta_b, eta_d = config.loss.eta_b, config.loss.eta_d
    return (
        2.0
        * config.nbs2.g
        * math.sqrt(eta_b * eta_d * t * r)
        * math.sqrt(n_alpha)
        * (1.0 + 2.0 * r * n_alpha + 2.0 * t * n_g)
        * cosm
    )


def lossy_noise_at_zero(config: InterferometerConfig) -> float:
    """Quadrature variance at phi = 0 with internal and external losses.

    Vacuum admixture terms (1 - eta) enter with unit variance; the
    correlated cross term is weighted by sqrt(eta_d) T + sqrt(eta_c) R.
    Reduces to the lossless variance at all eta = 1.
    """
    t = config.splitter.transmissivity
    r = config.splitter.reflectivity
    G1, g1 = config.nbs1.gain, config.nbs1.g
    G2, g2 = config.nbs2.gain, config.nbs2.g
    cos21 = math.cos(config.nbs2.phase - config.nbs1.phase)
    ea, eb = config.loss.eta_a, config.loss.eta_b
    ec, ed = config.loss.eta_c, config.loss.eta_d
    w = math.sqrt(ed) * t + math.sqrt(ec) * r
    return (
        ea * G2**2 * G1**2
        + eb * g2**2 * g1**2 * w**2
        + ea * G2**2 * g1**2
        + eb * g2**2 * G1**2 * w**2
        + eb * g2**2 * t * r * (math.sqrt(ed) - math.sqrt(ec)) ** 2
        + (1.0 - ea) * G2**2
        + (1.0 - eb) * g2**2
        + eb * (1.0 - ec) * g2**2 * r
        + eb * (1.0 - ed) * g2**2 * t
        + 4.0 * math.sqrt(ea * eb) * G2 * G1 * g1 * g2 * w * cos21
    )


def sql_nonlinear(n_ps: float) -> float:
    """Standard quantum limit for a photon-number-squared phase:
    N_ps^{-3/2}."""
    if n_ps <= 0:
        raise ValueError(f"n_ps must be positive (got {n_ps})")
    return n_ps**-1.5


def optimal_split_ratio(n_alpha: float, g1: float) -> float:
    """Closed-form optimum of slope_at_zero over the split ratio:

        R/T = [3 N_a - 6 g1^2
               + sqrt(9 N_a^2 - 28 N_a g1^2 + 2 N_a + 36 g1^4 + 4 g1^2 + 1)]
              / (2 N_a + 1)

    Approaches 3 for strong pumping.  Independent of g2.
    """
    if n_alpha < 0 or g1 < 0:
        raise ValueError("n_alpha and g1 must be >= 0")
    disc = (
        9.0 * n_alpha**2
        - 28.0 * n_alpha * g1**2
        + 2.0 * n_alpha
        + 36.0 * g1**4
        + 4.0 * g1**2
        + 1.0
    )
    if disc < 0:
        raise ValueError(
            f"negative discriminant for n_alpha={n_alpha}, g1={g1} ({disc})"
        )
    return (3.0 * n_alpha - 6.0 * g1**2 + math.sqrt(disc)) / (2.0 * n_alpha + 1.0)


def optimal_transmissivity(n_alpha: float, g1: float) -> float:
    """The closed-form optimum expressed as T = 1 / (1 + R/T)."""
    return 1.0 / (1.0 + optimal_split_ratio(n_alpha, g1))


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_argmax(f, lo: float, hi: float, xtol: float = 1e-10) -> float:
    """Abscissa of the maximum of a unimodal f on [lo, hi] by golden-section
    search, to within xtol."""
    x1 = hi - _INV_GOLDEN * (hi - lo)
    x2 = lo + _INV_GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > xtol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INV_GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INV_GOLDEN * (hi - lo)
            f1 = f(x1)
    return 0.5 * (lo + hi)


def argmax_slope_transmissivity(n_alpha: float, g1: float, xtol: float = 1e-10) -> float:
    """Numeric argmax over T of the slope profile sqrt(T(1-T)) *
    (1 + 2(1-T) N_a + 4 T g1^2) -- a regression guard for the closed form.

    The T-independent prefactors of the slope do not move the argmax, so
    they are dropped.  The profile is strictly log-concave on (0, 1),
    hence unimodal and safe for golden-section search.
    """

    def profile(t: float) -> float:
        return math.sqrt(t * (1.0 - t)) * (
            1.0 + 2.0 * (1.0 - t) * n_alpha + 4.0 * t * g1**2
        )

    return golden_section_argmax(profile, 0.0, 1.0, xtol)


def argmax_linear_slope_transmissivity(xtol: float = 1e-10) -> float:
    """Numeric argmax over T of the linear-only slope, which is maximal
    where sqrt(T(1-T)) is, i.e. at T = 1/2."""
    return golden_section_argmax(lambda t: math.sqrt(t * (1.0 - t)), 0.0, 1.0, xtol)


def qfi_nonlinear(n_alpha: float, n_g: float, splitter: SplitterParams) -> QfiBreakdown:
    """Quantum Fisher information 4 [<n^4> - <n^2>^2] of the sensing arm
    for the photon-number-squared phase, as a cubic in N_alpha."""
    if n_alpha < 0 or n_g < 0:
        raise ValueError("n_alpha and n_g must be >= 0")
    r = splitter.reflectivity
    t = splitter.transmissivity
    s1 = 16.0 * r**4 + 16.0 * r**3 * t * (n_g + 1.0)
    s2 = (
        24.0 * r**4
        + r**3 * t * (88.0 * n_g + 48.0)
        + r**2 * t**2 * (52.0 * n_g**2 + 88.0 * n_g + 24.0)
    )
    s3 = (
        4.0 * r**4
        + r**3 * t * (52.0 * n_g + 12.0)
        + r**2 * t**2 * (96.0 * n_g**2 + 104.0 * n_g + 12.0)
        + r * t**3 * (40.0 * n_g**3 + 96.0 * n_g**2 + 52.0 * n_g + 4.0)
    )
    s4 = (
        t**4 * (5.0 * n_g**4 + 16.0 * n_g**3 + 13.0 * n_g**2 + 2.0 * n_g)
        + t**3 * r * (16.0 * n_g**3 + 26.0 * n_g**2 + 6.0 * n_g)
        + t**2 * r**2 * (13.0 * n_g**2 + 6.0 * n_g)
        + 2.0 * t * r**3 * n_g
    )
    f = n_alpha**3 * s1 + n_alpha**2 * s2 + n_alpha * s3 + s4
    return QfiBreakdown(s1=s1, s2=s2, s3=s3, s4=s4, f=f)


def qfi_linear(n_alpha: float, n_g: float, splitter: SplitterParams) -> float:
    """Fisher information 4 <D^2 n> of the sensing arm for a linear phase:

        N_alpha [4 R^2 + 4 R T (N_g + 1)] + N_g [T^2 N_g + 2 T R] + 2 T^2 N_g
    """
    if n_alpha < 0 or n_g < 0:
        raise ValueError("n_alpha and n_g must be >= 0")
    r = splitter.reflectivity
    t = splitter.transmissivity
    return (
        n_alpha * (4.0 * r**2 + 4.0 * r * t * (n_g + 1.0))
        + n_g * (t**2 * n_g + 2.0 * t * r)
        + 2.0 * t**2 * n_g
    )


def qfi_linear_from_arm_moments(
    n_alpha: float, n_g: float, splitter: SplitterParams
) -> float:
    """Independent re-derivation of the linear-phase Fisher information.

    The sensing arm carries a displaced thermal state with coherent part
    x = R N_alpha and thermal occupancy t = T N_g / 2, for which
    Var(n) = x (2t + 1) + t (t + 1); the information is 4 Var(n).
    """
    x = splitter.reflectivity * n_alpha
    th = splitter.transmissivity * n_g / 2.0
    return 4.0 * (x * (2.0 * th + 1.0) + th * (th + 1.0))


def qcrb(f: float, repeats: int = 1) -> float:
    """Cramer-Rao sensitivity floor 1 / sqrt(m f) for m independent runs."""
    if f <= 0:
        raise ValueError(f"Fisher information must be positive (got {f})")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1 (got {repeats})")
    return 1.0 / math.sqrt(repeats * f)


def is_balanced(config: InterferometerConfig) -> bool:
    """True for the balanced readout configuration G1 = G2,
    theta_alpha = 0, theta1 = 0, theta2 = pi."""
    return (
        config.nbs1.gain == config.nbs2.gain
        and config.coherent.phase == 0.0
        and config.nbs1.phase == 0.0
        and config.nbs2.phase == math.pi
    )


def balanced_terms(config: InterferometerConfig):
    """The three slope contributions of the balanced configuration:

        T_lin         = 2 sqrt(TR) N_alpha^{1/2}
        T_nonlin      = 4 R sqrt(TR) N_alpha^{3/2}
        T_nonlin_corr = 4 T sqrt(TR) N_alpha^{1/2} N_g

    with g * (sum of terms) equal to the slope.  None when the
    configuration is not balanced.
    """
    if not is_balanced(config):
        return None
    t = config.splitter.transmissivity
    r = config.splitter.reflectivity
    n_alpha = config.coherent.n_alpha
    n_g = 2.0 * config.nbs1.g**2
    root = math.sqrt(t * r) * math.sqrt(n_alpha)
    return (
        2.0 * root,
        4.0 * r * root * n_alpha,
        4.0 * t * root * n_g,
    )


def sensitivity(config: InterferometerConfig, repeats: int = 1) -> SensitivityReport:
    """Full sensitivity report at phi = 0.

    Internal/external losses enter through the lossy slope and variance
    (which reduce to the lossless forms at eta = 1); detection loss mixes
    in vacuum, scaling the slope by sqrt(eta_det) and the variance to
    eta_det * var + (1 - eta_det).  Raises UndefinedSensitivityError when
    the slope vanishes.
    """
    slope = lossy_slope_at_zero(config)
    noise = lossy_noise_at_zero(config)
    eta = config.loss.eta_det
    if eta != 1.0:
        slope *= math.sqrt(eta)
        noise = eta * noise + (1.0 - eta)
    if slope <= 0.0:
        raise UndefinedSensitivityError(
            "undefined sensitivity: homodyne slope is zero "
            "(g2 = 0, alpha = 0, eta_b*eta_d = 0, or cos(theta2 - theta_alpha) = 0)"
        )
    delta_phi = math.sqrt(noise) / slope
    n_ps = phase_sensing_photons(config)
    sql = sql_nonlinear(n_ps) if n_ps > 0 else math.inf
    fisher = qfi_nonlinear(
        config.coherent.n_alpha, 2.0 * config.nbs1.g**2, config.splitter
    ).f
    bound = qcrb(fisher, repeats) if fisher > 0 else math.inf
    terms = balanced_terms(config) if config.loss.is_lossless() else None
    if terms is None:
        return SensitivityReport(slope, noise, delta_phi, sql, bound)
    return SensitivityReport(
        slope, noise, delta_phi, sql, bound, terms[0], terms[1], terms[2]
    )


def detection_loss_sensitivity(config: InterferometerConfig) -> float:
    """delta_phi with detection loss eta_det only (internal and external
    transmissions taken ideal).

    The detected mode is sqrt(eta) a + sqrt(1-eta) v, so the slope picks a
    factor sqrt(eta) and the variance becomes eta * var + (1 - eta); for
    the balanced configuration this is exactly a 1/sqrt(eta) penalty.
    """
    eta = config.loss.eta_det
    if eta <= 0.0:
        raise ValueError(f"eta_det must be in (0,1] (got {eta})")
    slope = math.sqrt(eta) * slope_at_zero(config)
    noise = eta * noise_at_zero(config) + (1.0 - eta)
    if slope <= 0.0:
        raise UndefinedSensitivityError(
            "undefined sensitivity: homodyne slope is zero"
        )
    return math.sqrt(noise) / slope


def nonlinear_index(medium: KerrMediumSpec, chi3: float) -> float:
    """Intensity-dependent refractive-index coefficient n2 = 3 chi3 /
    (4 n0^2 eps0 c), so that n = n0 + n2 <I>."""
    return 3.0 * chi3 / (4.0 * medium.n0**2 * medium.epsilon0 * medium.c)


def chi3_phase(medium: KerrMediumSpec, chi3: float) -> float:
    """Nonlinear phase produced by a third-order susceptibility:
    phi_n = 3 chi3 <I> k L / (4 n0^2 eps0 c)."""
    return (
        3.0
        * chi3
        * medium.intensity
        * medium.wavenumber
        * medium.length
        / (4.0 * medium.n0**2 * medium.epsilon0 * medium.c)
    )


def chi3_uncertainty(medium: KerrMediumSpec, delta_phi_n: float) -> float:
    """Susceptibility uncertainty reached by a phase measurement of
    uncertainty delta_phi_n: the inverse slope of chi3_phase,
    4 n0^2 eps0 c / (3 <I> k L) * delta_phi_n."""
    if delta_phi_n < 0:
        raise ValueError(f"delta_phi_n must be >= 0 (got {delta_phi_n})")
    return (
        4.0
        * medium.n0**2
        * medium.epsilon0
        * medium.c
        / (3.0 * medium.intensity * medium.wavenumber * medium.length)
        * delta_phi_n
    )
