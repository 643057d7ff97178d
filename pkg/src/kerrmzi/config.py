"""Physical parameter types, validation, and config-file parsing.

Conventions used throughout the package:

* squeezer elements are parameterized by their gain G >= 1, with the
  companion amplitude g = sqrt(G^2 - 1) always derived, never stored;
* beam splitters store the transmissivity T only, reflectivity is
  R = 1 - T by construction;
* all angles are plain radians, no mod-2pi normalization;
* loss coefficients eta are intensity transmissions in [0, 1].

All types are immutable value objects and safe to share between threads.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import re
from dataclasses import dataclass, field, fields

# SI values, used as defaults for the Kerr-medium description.
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
SPEED_OF_LIGHT = 299792458.0  # m/s


class InvalidConfigError(ValueError):
    """Raised when a configuration violates one or more type invariants.

    The ``errors`` attribute lists every violated invariant, one message
    per violation, each naming the offending field and bound.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ConfigFileError(ValueError):
    """Raised on unreadable or malformed configuration files."""


def _finite(value) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


@dataclass(frozen=True)
class CoherentInput:
    """Coherent drive |alpha| e^{i theta} injected into the pump port."""

    magnitude: float = 0.0
    phase: float = 0.0

    @property
    def n_alpha(self) -> float:
        """Mean photon number |alpha|^2."""
        return self.magnitude**2

    @property
    def amplitude(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    def invariant_errors(self):
        errs = []
        if not _finite(self.magnitude):
            errs.append("coherent.magnitude not finite")
        elif self.magnitude < 0:
            errs.append(f"coherent.magnitude negative (got {self.magnitude})")
        if not _finite(self.phase):
            errs.append("coherent.phase not finite")
        return errs


@dataclass(frozen=True)
class SqueezerParams:
    """A two-mode squeezing element with gain G >= 1 and pump phase theta."""

    gain: float = 1.0
    phase: float = 0.0

    @classmethod
    def from_g(cls, g: float, phase: float = 0.0) -> "SqueezerParams":
        """Build from the squeeze amplitude g, so that G = sqrt(1 + g^2)."""
        return cls(gain=math.hypot(1.0, g), phase=phase)

    @property
    def g(self) -> float:
        """Companion amplitude g = sqrt(G^2 - 1); satisfies G^2 - g^2 = 1."""
        return math.sqrt(self.gain**2 - 1.0)

    @property
    def r(self) -> float:
        """Squeezing parameter r = arccosh(G), used by the Fock simulator."""
        return math.acosh(self.gain)

    def invariant_errors(self, label: str = "squeezer"):
        errs = []
        if not _finite(self.gain):
            errs.append(f"{label}.gain not finite")
        elif self.gain < 1.0:
            errs.append(f"{label}.gain below 1 (got {self.gain})")
        if not _finite(self.phase):
            errs.append(f"{label}.phase not finite")
        return errs


@dataclass(frozen=True)
class SplitterParams:
    """A lossless beam splitter; only T is stored so R + T = 1 cannot drift."""

    transmissivity: float = 0.5

    @property
    def reflectivity(self) -> float:
        return 1.0 - self.transmissivity

    def invariant_errors(self):
        t = self.transmissivity
        if not _finite(t):
            return ["splitter.transmissivity not finite"]
        if not 0.0 <= t <= 1.0:
            return [f"transmissivity outside [0,1] (got {t})"]
        return []


@dataclass(frozen=True)
class PhaseShift:
    """Linear and nonlinear phase accumulated in the Kerr arm."""

    linear: float = 0.0
    nonlinear: float = 0.0

    def invariant_errors(self):
        errs = []
        if not _finite(self.linear):
            errs.append("phase.linear not finite")
        if not _finite(self.nonlinear):
            errs.append("phase.nonlinear not finite")
        return errs


@dataclass(frozen=True)
class LossParams:
    """Intensity transmissions of the four fictitious loss ports plus the
    detection efficiency.  All ones means lossless."""

    eta_a: float = 1.0
    eta_b: float = 1.0
    eta_c: float = 1.0
    eta_d: float = 1.0
    eta_det: float = 1.0

    def is_lossless(self) -> bool:
        return (
            self.eta_a == 1.0
            and self.eta_b == 1.0
            and self.eta_c == 1.0
            and self.eta_d == 1.0
            and self.eta_det == 1.0
        )

    def invariant_errors(self):
        errs = []
        for name in ("eta_a", "eta_b", "eta_c", "eta_d"):
            v = getattr(self, name)
            if not _finite(v):
                errs.append(f"loss.{name} not finite")
            elif not 0.0 <= v <= 1.0:
                errs.append(f"loss.{name} outside [0,1] (got {v})")
        v = self.eta_det
        if not _finite(v):
            errs.append("loss.eta_det not finite")
        elif not 0.0 < v <= 1.0:
            errs.append(f"loss.eta_det outside (0,1] (got {v})")
        return errs


@dataclass(frozen=True)
class InterferometerConfig:
    """Complete parameter set of the interferometer.

    ``nbs1`` seeds the correlated mode pair, ``nbs2`` performs the active
    correlation readout, ``splitter`` is used for both linear beam
    splitters, ``coherent`` is the pump-port input and ``phase`` the shift
    applied in the sensing arm.
    """

    nbs1: SqueezerParams = field(default_factory=SqueezerParams)
    nbs2: SqueezerParams = field(default_factory=SqueezerParams)
    splitter: SplitterParams = field(default_factory=SplitterParams)
    coherent: CoherentInput = field(default_factory=CoherentInput)
    phase: PhaseShift = field(default_factory=PhaseShift)
    loss: LossParams = field(default_factory=LossParams)

    @property
    def n_ps(self) -> float:
        """Phase-sensing photon budget 2 g1^2 + |alpha|^2."""
        return 2.0 * self.nbs1.g**2 + self.coherent.n_alpha

    def invariant_errors(self):
        errs = []
        errs += self.nbs1.invariant_errors("nbs1")
        errs += self.nbs2.invariant_errors("nbs2")
        errs += self.splitter.invariant_errors()
        errs += self.coherent.invariant_errors()
        errs += self.phase.invariant_errors()
        errs += self.loss.invariant_errors()
        return errs


@dataclass(frozen=True)
class KerrMediumSpec:
    """Kerr medium description used to convert the nonlinear phase to and
    from the third-order susceptibility.

    Units are documented conventions (SI), not enforced: intensity in
    W/m^2, wavenumber in 1/m, length in m.
    """

    n0: float
    intensity: float
    wavenumber: float
    length: float
    epsilon0: float = VACUUM_PERMITTIVITY
    c: float = SPEED_OF_LIGHT

    def invariant_errors(self):
        errs = []
        for f in fields(self):
            v = getattr(self, f.name)
            if not _finite(v):
                errs.append(f"medium.{f.name} not finite")
            elif v <= 0:
                errs.append(f"medium.{f.name} not strictly positive (got {v})")
        return errs


@dataclass(frozen=True)
class SensitivityReport:
    """Sensitivity figures for one configuration at the phi = 0 operating
    point.  The three slope terms are only present for the balanced,
    lossless configuration where the decomposition applies."""

    slope: float
    noise: float
    delta_phi: float
    sql: float
    qcrb: float
    term_lin: float | None = None
    term_nonlin: float | None = None
    term_nonlin_corr: float | None = None

    CSV_FIELDS = (
        "slope",
        "noise",
        "delta_phi",
        "sql",
        "qcrb",
        "term_lin",
        "term_nonlin",
        "term_nonlin_corr",
    )

    def to_dict(self) -> dict:
        """Flat key-value record; absent terms are omitted."""
        rec = {
            "slope": self.slope,
            "noise": self.noise,
            "delta_phi": self.delta_phi,
            "sql": self.sql,
            "qcrb": self.qcrb,
        }
        if self.term_lin is not None:
            rec["term_lin"] = self.term_lin
            rec["term_nonlin"] = self.term_nonlin
            rec["term_nonlin_corr"] = self.term_nonlin_corr
        return rec

    @classmethod
    def csv_header(cls) -> str:
        return ",".join(cls.CSV_FIELDS)

    def csv_row(self) -> str:
        vals = []
        for name in self.CSV_FIELDS:
            v = getattr(self, name)
            vals.append("" if v is None else format(v, ".17g"))
        return ",".join(vals)


def validation_errors(config: InterferometerConfig):
    """All violated invariants of ``config``, empty when valid."""
    return config.invariant_errors()


def validate(config: InterferometerConfig) -> InterferometerConfig:
    """Return ``config`` unchanged if every invariant holds.

    Raises InvalidConfigError carrying the full list of violations
    otherwise.  Idempotent by construction.
    """
    errs = validation_errors(config)
    if errs:
        raise InvalidConfigError(errs)
    return config


def validate_medium(medium: KerrMediumSpec) -> KerrMediumSpec:
    errs = medium.invariant_errors()
    if errs:
        raise InvalidConfigError(errs)
    return medium


def phase_sensing_photons(config: InterferometerConfig) -> float:
    """Photon budget N_ps = 2 g1^2 + |alpha|^2 used to normalize the SQL.

    Counts both modes emitted by the first squeezer plus the coherent
    pump, the convention all sensitivity limits here are quoted against.
    """
    return 2.0 * config.nbs1.g**2 + config.coherent.n_alpha


def build_config(
    alpha: float = 0.0,
    theta_alpha: float = 0.0,
    g1: float = 0.0,
    theta1: float = 0.0,
    g2: float = 0.0,
    theta2: float = math.pi,
    transmissivity: float = 0.5,
    phi_l: float = 0.0,
    phi_n: float = 0.0,
    eta_a: float = 1.0,
    eta_b: float = 1.0,
    eta_c: float = 1.0,
    eta_d: float = 1.0,
    eta_det: float = 1.0,
) -> InterferometerConfig:
    """Convenience constructor from scalar parameters.

    Squeezers are specified by their amplitudes g (not gains); the default
    theta2 = pi together with theta1 = theta_alpha = 0 is the optimal
    phase-matching point.
    """
    return validate(
        InterferometerConfig(
            nbs1=SqueezerParams.from_g(g1, theta1),
            nbs2=SqueezerParams.from_g(g2, theta2),
            splitter=SplitterParams(transmissivity),
            coherent=CoherentInput(alpha, theta_alpha),
            phase=PhaseShift(phi_l, phi_n),
            loss=LossParams(eta_a, eta_b, eta_c, eta_d, eta_det),
        )
    )


def config_digest(config) -> str:
    """Short stable digest of a config (or any nested dataclass tree)."""

    def flatten(obj, prefix=""):
        out = {}
        if hasattr(obj, "__dataclass_fields__"):
            for f in fields(obj):
                out.update(flatten(getattr(obj, f.name), f"{prefix}{f.name}."))
        else:
            out[prefix.rstrip(".")] = repr(obj)
        return out

    blob = json.dumps(flatten(config), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


# --- configuration file parsing -------------------------------------------
#
# INI-style, one section per component type, one key per field:
#
#   [nbs1]      gain, phase
#   [nbs2]      gain, phase
#   [splitter]  transmissivity
#   [coherent]  magnitude, phase
#   [phase]     linear, nonlinear
#   [loss]      eta_a, eta_b, eta_c, eta_d, eta_det
#   [medium]    n0, intensity, wavenumber, length, epsilon0, c
#
# Missing keys fall back to the dataclass defaults ([medium] has no
# defaults for its first four fields); unknown sections or keys are
# rejected with the offending line cited.

_CONFIG_SCHEMA = {
    "nbs1": ("gain", "phase"),
    "nbs2": ("gain", "phase"),
    "splitter": ("transmissivity",),
    "coherent": ("magnitude", "phase"),
    "phase": ("linear", "nonlinear"),
    "loss": ("eta_a", "eta_b", "eta_c", "eta_d", "eta_det"),
    "medium": ("n0", "intensity", "wavenumber", "length", "epsilon0", "c"),
}


def _find_line(text: str, key: str) -> str:
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*[=:]", re.IGNORECASE)
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return f"line {i}"
    return "line unknown"


def _parse_sections(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigFileError(f"{source}: {exc}") from exc

    values: dict = {}
    for section in parser.sections():
        if section not in _CONFIG_SCHEMA:
            raise ConfigFileError(f"{source}: unknown section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _CONFIG_SCHEMA[section]:
                raise ConfigFileError(
                    f"{source}: unknown key '{key}' in [{section}] ({_find_line(text, key)})"
                )
            try:
                values[section][key] = float(raw)
            except ValueError:
                raise ConfigFileError(
                    f"{source}: [{section}] {key}: not a number "
                    f"(got {raw!r}, {_find_line(text, key)})"
                ) from None
    return values


def parse_config(text: str, source: str = "<string>") -> InterferometerConfig:
    """Parse an interferometer config from INI text and validate it."""
    values = _parse_sections(text, source)
    values.pop("medium", None)
    cfg = InterferometerConfig(
        nbs1=SqueezerParams(**values.get("nbs1", {})),
        nbs2=SqueezerParams(**values.get("nbs2", {})),
        splitter=SplitterParams(**values.get("splitter", {})),
        coherent=CoherentInput(**values.get("coherent", {})),
        phase=PhaseShift(**values.get("phase", {})),
        loss=LossParams(**values.get("loss", {})),
    )
    return validate(cfg)


def load_config(path) -> InterferometerConfig:
    with open(path, "r") as fh:
        return parse_config(fh.read(), source=str(path))


def parse_medium(text: str, source: str = "<string>") -> KerrMediumSpec:
    """Parse the [medium] section of a config file."""
    values = _parse_sections(text, source)
    if "medium" not in values:
        raise ConfigFileError(f"{source}: missing [medium] section")
    sec = values["medium"]
    for required in ("n0", "intensity", "wavenumber", "length"):
        if required not in sec:
            raise ConfigFileError(f"{source}: [medium] missing key '{required}'")
    return validate_medium(KerrMediumSpec(**sec))


def load_medium(path) -> KerrMediumSpec:
    with open(path, "r") as fh:
        return parse_medium(fh.read(), source=str(path))
