"""Three-node topology, link budget and rate/threshold bookkeeping.

Powers inside a :class:`ScenarioConfig` are linear and normalised to the
receiver noise variance. Scenario files are flat ``key = value`` text; a
key ending in ``_db`` is read in decibels and stored linear under the key
without the suffix. Optional ``[section]`` blocks define named variants
that override the flat base keys.
"""

import configparser
import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

__all__ = [
    "ConfigParseError",
    "Duplex",
    "RicianPower",
    "LinkGeometry",
    "SiProfile",
    "RatePlan",
    "ScenarioConfig",
    "Thresholds",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "omega_from_budget",
    "alpha_scale",
    "thresholds",
    "si_suppression_db",
    "variable_rate_threshold",
    "default_scenario",
    "parse_scenarios",
    "load_scenarios",
    "load_scenario",
    "dump_scenario",
]

# (4 pi 10^9 / 3 10^8)^2: free-space constant for d in km and f_c in MHz
_FSPL_CONSTANT = (4.0 * math.pi * 1e9 / 3e8) ** 2


class ConfigParseError(ValueError):
    """A scenario file could not be read into a valid configuration."""


class Duplex(enum.Enum):
    HBD = "hbd"
    HD = "hd"


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RicianPower:
    """Received power ``|h|^2 * mean_power`` of a Rician-faded link."""

    k_factor: float
    mean_power: float

    def __post_init__(self):
        if not self.k_factor >= 0:
            raise ValueError("k_factor must be >= 0")
        if not self.mean_power > 0:
            raise ValueError("mean_power must be > 0")


@dataclass(frozen=True)
class LinkGeometry:
    d_ref_km: float
    d_link_km: float
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        if not (self.d_ref_km > 0 and self.d_link_km > 0):
            raise ValueError("distances must be > 0")
        if self.path_loss_exponent < 0:
            raise ValueError("path_loss_exponent must be >= 0")


@dataclass(frozen=True)
class SiProfile:
    """Residual self-interference at the full-duplex ground station.

    ``phase_noise_power`` is already divided by the noise variance.
    ``alpha_gg = 0`` switches the residual SI off entirely.
    """

    alpha_gg: float = 1.0
    epsilon: float = 0.001
    phase_noise_power: float = 10.0 ** -1.5
    k_si: float = 15.0

    def __post_init__(self):
        for name in ("alpha_gg", "epsilon", "phase_noise_power", "k_si"):
            if not getattr(self, name) >= 0:
                raise ValueError("%s must be >= 0" % name)


@dataclass(frozen=True)
class RatePlan:
    """Hybrid-duplex rates in bit/s/Hz. HD rates are always twice these."""

    r1_hbd: float = 0.5
    rgs_hbd: float = 0.5

    def __post_init__(self):
        if not (self.r1_hbd >= 0 and self.rgs_hbd >= 0):
            raise ValueError("rates must be >= 0")

    @property
    def r1_hd(self):
        return 2.0 * self.r1_hbd

    @property
    def rgs_hd(self):
        return 2.0 * self.rgs_hbd


@dataclass(frozen=True)
class ScenarioConfig:
    omega_x: float = 10.0
    alpha_g2: float = 1.0
    alpha_12: float = 0.5
    si: SiProfile = field(default_factory=SiProfile)
    rates: RatePlan = field(default_factory=RatePlan)
    k_x1: float = 15.0
    k_xgs: float = 15.0
    k_y1: float = 15.0

    def __post_init__(self):
        if not self.omega_x > 0:
            raise ValueError("omega_x must be > 0")
        if not self.alpha_g2 > 0:
            raise ValueError("alpha_g2 must be > 0")
        if not self.alpha_12 >= 0:
            raise ValueError("alpha_12 must be >= 0")
        for name in ("k_x1", "k_xgs", "k_y1"):
            if not getattr(self, name) >= 0:
                raise ValueError("%s must be >= 0" % name)

    def replace(self, **changes):
        """Copy with top-level fields or any SiProfile/RatePlan field changed."""
        si_keys = {f.name for f in dataclasses.fields(SiProfile)}
        rate_keys = {f.name for f in dataclasses.fields(RatePlan)}
        si = {k: changes.pop(k) for k in list(changes) if k in si_keys}
        rates = {k: changes.pop(k) for k in list(changes) if k in rate_keys}
        if si:
            changes["si"] = dataclasses.replace(self.si, **si)
        if rates:
            changes["rates"] = dataclasses.replace(self.rates, **rates)
        return dataclasses.replace(self, **changes)

    def with_omega_db(self, omega_db):
        return dataclasses.replace(self, omega_x=db_to_linear(omega_db))

    # mean powers of the random variables entering the outage events
    @property
    def mean_si_phase(self):
        return self.omega_x * self.si.alpha_gg * self.si.phase_noise_power

    @property
    def mean_si_estimation(self):
        return self.omega_x * self.si.alpha_gg * self.si.epsilon

    @property
    def mean_x_gs(self):
        return self.omega_x * self.alpha_g2

    @property
    def mean_y1(self):
        return self.omega_x * self.alpha_12

    def flat(self):
        """Flat key/value view matching the scenario-file keys."""
        out = {
            "omega_x": self.omega_x,
            "alpha_g2": self.alpha_g2,
            "alpha_12": self.alpha_12,
            "k_x1": self.k_x1,
            "k_xgs": self.k_xgs,
            "k_y1": self.k_y1,
        }
        out.update(dataclasses.asdict(self.si))
        out.update(dataclasses.asdict(self.rates))
        return out


class Thresholds(NamedTuple):
    gs_hbd: float
    as2_hbd: float
    gs_hd: float
    as2_hd: float


def omega_from_budget(pt_watts, fc_mhz, d_km, noise_var, constant=1.0):
    """Average received SNR of a free-space link.

    ``pt_watts`` and ``noise_var`` must share units. ``constant`` is the
    otherwise unspecified proportionality factor (1 = pure free space).
    """
    for v in (pt_watts, fc_mhz, d_km, noise_var, constant):
        if not v > 0:
            raise ValueError("link-budget inputs must be > 0")
    return constant * pt_watts / (_FSPL_CONSTANT * fc_mhz**2 * d_km**2 * noise_var)


def alpha_scale(geom):
    """Mean-power scaling ``(d_ref / d_link) ** n`` relative to the reference link."""
    return (geom.d_ref_km / geom.d_link_km) ** geom.path_loss_exponent


def thresholds(rates):
    """SINR thresholds ``2^R - 1`` (HBD) and ``2^(2R) - 1`` (HD) per node."""
    return Thresholds(
        gs_hbd=2.0**rates.r1_hbd - 1.0,
        as2_hbd=2.0**rates.rgs_hbd - 1.0,
        gs_hd=2.0 ** (2.0 * rates.r1_hbd) - 1.0,
        as2_hd=2.0 ** (2.0 * rates.rgs_hbd) - 1.0,
    )


def si_suppression_db(si, noise_var):
    """Overall SI suppression ``1 / (alpha_gg * epsilon * noise_var)`` in dB.

    ``noise_var`` is in watts; a -115 dBm floor gives 163-175 dB over
    ``alpha_gg in {1, 1.5}`` and ``epsilon in {0.01, 0.001}``.
    """
    if not (si.alpha_gg > 0 and si.epsilon > 0 and noise_var > 0):
        raise ValueError("alpha_gg, epsilon and noise_var must all be > 0")
    return -10.0 * math.log10(si.alpha_gg * si.epsilon * noise_var)


def variable_rate_threshold(omega, rf, duplex=Duplex.HBD):
    """Threshold for a rate of ``rf * log2(1 + omega)`` (HD: twice that rate)."""
    if not omega > 0:
        raise ValueError("omega must be > 0")
    if rf < 0:
        raise ValueError("rf must be >= 0")
    exponent = rf if Duplex(duplex) is Duplex.HBD else 2.0 * rf
    return math.expm1(exponent * math.log1p(omega))


def default_scenario():
    """Reference parameter set: K = 15 everywhere, phase noise -130 dBm over a
    -115 dBm floor, alpha_gg = 1, epsilon = 1e-3, alpha_g2 = 1, alpha_12 = 0.5,
    R1 = Rgs = 0.5 bit/s/Hz and omega_x = 10 dB."""
    return ScenarioConfig()


# ---------------------------------------------------------------------------
# scenario files

_FIELD_KEYS = set(ScenarioConfig().flat())
_BUDGET_KEYS = {"pt_watts", "pt_dbm", "fc_mhz", "noise_var", "noise_dbm", "budget_constant"}
_GEOMETRY_KEYS = {"d_ref_km", "d_g2_km", "d_12_km", "path_loss_exponent"}
_BASE_SECTION = "__base__"


def _parse_values(items, where):
    values = {}
    for raw_key, raw in items:
        key = raw_key.strip().lower()
        try:
            number = float(raw.split("#", 1)[0].strip())
        except ValueError:
            raise ConfigParseError("%s: %s is not a number: %r" % (where, key, raw)) from None
        if key.endswith("_dbm"):
            values[key] = number
            continue
        if key.endswith("_db"):
            key = key[:-3]
            number = db_to_linear(number)
        if key not in _FIELD_KEYS | _BUDGET_KEYS | _GEOMETRY_KEYS:
            raise ConfigParseError("%s: unknown key %r" % (where, raw_key))
        values[key] = number
    return values


def _build(values, where):
    values = dict(values)
    if "pt_dbm" in values:
        values["pt_watts"] = dbm_to_watts(values.pop("pt_dbm"))
    if "noise_dbm" in values:
        values["noise_var"] = dbm_to_watts(values.pop("noise_dbm"))
    budget = {k: values.pop(k) for k in list(values) if k in _BUDGET_KEYS}
    geometry = {k: values.pop(k) for k in list(values) if k in _GEOMETRY_KEYS}
    unknown = {k for k in values if k not in _FIELD_KEYS}
    if unknown:
        raise ConfigParseError("%s: unknown keys %s" % (where, sorted(unknown)))
    try:
        if budget:
            needed = {"pt_watts", "fc_mhz", "noise_var"}
            if not needed <= set(budget) or "d_ref_km" not in geometry:
                raise ConfigParseError("%s: link budget needs %s and d_ref_km" % (where, sorted(needed)))
            if "omega_x" in values:
                raise ConfigParseError("%s: give omega_x or a link budget, not both" % where)
            values["omega_x"] = omega_from_budget(
                budget["pt_watts"], budget["fc_mhz"], geometry["d_ref_km"],
                budget["noise_var"], budget.get("budget_constant", 1.0))
        links = {"d_g2_km": "alpha_g2", "d_12_km": "alpha_12"}
        if any(k in geometry for k in links):
            if "d_ref_km" not in geometry:
                raise ConfigParseError("%s: link distances need d_ref_km" % where)
            n = geometry.get("path_loss_exponent", 2.0)
            for key, target in links.items():
                if key in geometry:
                    if target in values:
                        raise ConfigParseError("%s: give %s or %s, not both" % (where, target, key))
                    values[target] = alpha_scale(LinkGeometry(geometry["d_ref_km"], geometry[key], n))
        return ScenarioConfig().replace(**values)
    except ConfigParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigParseError("%s: %s" % (where, exc)) from None


def parse_scenarios(text, where="<string>"):
    """Parse scenario text into ``{variant_name: ScenarioConfig}``.

    A file without sections yields a single variant named ``"default"``.
    Keys missing from the file take the :func:`default_scenario` values.
    """
    parser = configparser.ConfigParser(
        default_section="__defaults_unused__", inline_comment_prefixes=("#", ";"),
        interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[%s]\n%s" % (_BASE_SECTION, text), source=where)
    except configparser.Error as exc:
        raise ConfigParseError(str(exc)) from None
    base = _parse_values(parser.items(_BASE_SECTION), where)
    variants = [s for s in parser.sections() if s != _BASE_SECTION]
    if not variants:
        return {"default": _build(base, where)}
    out = {}
    for name in variants:
        merged = dict(base)
        merged.update(_parse_values(parser.items(name), "%s[%s]" % (where, name)))
        out[name] = _build(merged, "%s[%s]" % (where, name))
    return out


def load_scenarios(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError("cannot read %s: %s" % (path, exc)) from None
    return parse_scenarios(text, str(path))


def load_scenario(path):
    """Load a file that must hold exactly one scenario."""
    variants = load_scenarios(path)
    if len(variants) != 1:
        raise ConfigParseError("%s defines %d variants, expected one" % (path, len(variants)))
    return next(iter(variants.values()))


def dump_scenario(cfg, path=None):
    """Serialise ``cfg`` as flat linear ``key = value`` lines."""
    text = "".join("%s = %r\n" % (k, v) for k, v in cfg.flat().items())
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
