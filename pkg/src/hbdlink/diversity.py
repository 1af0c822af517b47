"""Finite-SNR diversity gains and the finite-SNR diversity-multiplexing tradeoff.

For an outage ``P(omega)`` the fixed-rate gain is
``d_f = -(omega / P) dP/domega``. With a variable rate
``r_f log2(1 + omega)`` the threshold moves with ``omega`` and the same
log-slope includes the threshold variation, giving ``d_f*``.

Each outage series is a sum of terms ``coef * gamma^a * omega^b``, so the
derivative series follows term by term: ``omega * d/domega`` multiplies a
term by ``b + c * a`` with ``c = (omega / gamma) dgamma/domega``.
Equivalently each term's derivative is ``coef * g_func(a-1, b, omega, r_f)``.
"""

import enum
import math
from dataclasses import dataclass, field

from .outage import (
    Detector,
    Mode,
    NonConvergent,
    SeriesControl,
    _evaluate,
    convergence_bound,
)
from .scenario import Duplex, thresholds, variable_rate_threshold
from .specfun import hyp1f1_neg_int, ln_factorial

__all__ = [
    "RateMode",
    "DiversityResult",
    "DegenerateOutage",
    "g_func",
    "normalized_moment",
    "df_fixed",
    "df_variable",
    "df_system",
    "asymptotic_check",
    "COROLLARY_LIMITS",
]

_DEGENERATE_BELOW = 1e-300
_HD_MODES = (Mode.GS_HD, Mode.AS2_HD)

# high-SNR limits of the fixed-rate gains
COROLLARY_LIMITS = {
    Mode.GS_HBD: 0.0,
    Mode.AS2_II: 0.0,
    Mode.AS2_SIC: 0.0,
    Mode.GS_HD: 1.0,
    Mode.AS2_HD: 1.0,
}


class RateMode(enum.Enum):
    FIXED = "fixed"
    VARIABLE = "variable"


class DegenerateOutage(ArithmeticError):
    """The outage is too small (below 1e-300) to divide by."""


@dataclass(frozen=True)
class DiversityResult:
    """A diversity gain with the series diagnostics behind it.

    ``diagnostics`` carries ``terms_used``, ``converged``,
    ``convergence_bound_satisfied`` and the outage ``probability``; system
    results add a ``components`` mapping of per-node results.
    """

    gain: float
    mode: Mode
    rate_mode: RateMode
    rf: float = float("nan")
    diagnostics: dict = field(default_factory=dict)


def g_func(i, j, omega, rf):
    """``d/domega [gamma^(i+1) omega^j]`` for ``gamma = (1+omega)^rf - 1``.

    Written out, ``gamma^i omega^j [gamma j / omega + (i+1) rf (1+omega)^(rf-1)]``.
    Pass ``2 * rf`` for half-duplex thresholds.

    Examples
    --------
    >>> g_func(0, 0, 10.0, 1.0)
    1.0
    """
    if not omega > 0:
        raise ValueError("omega must be > 0")
    if rf < 0:
        raise ValueError("rf must be >= 0")
    gamma = math.expm1(rf * math.log1p(omega))
    bracket = gamma * j / omega + (i + 1) * rf * (1.0 + omega) ** (rf - 1.0)
    if i == 0:
        return omega**j * bracket
    return gamma**i * omega**j * bracket


def normalized_moment(l, scale, k_factor=0.0):
    """``E[Z^l] / omega^l`` for a power whose mean is ``scale * omega``.

    ``k_factor = 0`` covers the exponential case, ``l! * scale^l``.
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if scale < 0 or k_factor < 0:
        raise ValueError("scale and k_factor must be >= 0")
    if l == 0:
        return 1.0
    if scale == 0:
        return 0.0
    return math.exp(ln_factorial(l) + l * math.log(scale / (1.0 + k_factor))) * hyp1f1_neg_int(l, k_factor)


def _slope_coefficient(omega, r):
    # (omega / gamma) dgamma/domega for gamma = (1+omega)^r - 1
    return r * omega * (1.0 + omega) ** (r - 1.0) / math.expm1(r * math.log1p(omega))


def _gain(mode, cfg, ctl, gamma_gs, gamma_2, c, rate_mode, rf):
    ctl = ctl or SeriesControl()
    outcome = _evaluate(mode, cfg, ctl, gamma_gs, gamma_2, c=c, want_slope=True)
    diag = {
        "terms_used": outcome.terms_used,
        "converged": outcome.converged,
        "convergence_bound_satisfied": convergence_bound(mode, cfg, gamma_gs, gamma_2),
        "probability": outcome.value,
        "complement": outcome.complement,
        "dps": outcome.dps,
    }
    gain = -outcome.slope / outcome.value if outcome.value != 0 else float("nan")
    result = DiversityResult(gain=gain, mode=mode, rate_mode=rate_mode, rf=rf, diagnostics=diag)
    if not outcome.converged:
        raise NonConvergent("%s derivative series did not settle within %d terms"
                            % (mode.value, ctl.max_terms), result)
    if not abs(outcome.value) >= _DEGENERATE_BELOW:
        raise DegenerateOutage("outage %.3g too small for a diversity gain" % outcome.value)
    return result


def df_fixed(mode, cfg, ctl=None):
    """Fixed-rate finite-SNR diversity gain of one node/detector mode."""
    mode = Mode(mode)
    if mode is Mode.SYSTEM:
        raise ValueError("use df_system for the system-level gain")
    th = thresholds(cfg.rates)
    if mode in _HD_MODES:
        g_gs, g_2 = th.gs_hd, th.as2_hd
    else:
        g_gs, g_2 = th.gs_hbd, th.as2_hbd
    return _gain(mode, cfg, ctl, g_gs, g_2, 0.0, RateMode.FIXED, float("nan"))


def df_variable(mode, cfg, rf, ctl=None):
    """Variable-rate gain ``d_f*`` at multiplexing gain ``rf`` in ``[0, 1]``.

    Every node uses the threshold ``(1+omega)^rf - 1`` (HD: ``2 rf``).
    """
    mode = Mode(mode)
    if mode is Mode.SYSTEM:
        raise ValueError("use df_system for the system-level gain")
    if not 0.0 <= rf <= 1.0:
        raise ValueError("rf must lie in [0, 1]")
    duplex = Duplex.HD if mode in _HD_MODES else Duplex.HBD
    gamma = variable_rate_threshold(cfg.omega_x, rf, duplex)
    if gamma == 0:
        raise DegenerateOutage("rf = 0 gives a zero threshold and zero outage")
    r = 2.0 * rf if duplex is Duplex.HD else rf
    c = _slope_coefficient(cfg.omega_x, r)
    return _gain(mode, cfg, ctl, gamma, gamma, c, RateMode.VARIABLE, rf)


def df_system(detector, rate_mode, cfg, rf=None, ctl=None):
    """System gain ``min(d_gs, d_as2)`` for the chosen AS-2 detector.

    ``Detector.HD`` takes the minimum of the two half-duplex gains.
    """
    detector = Detector(detector)
    rate_mode = RateMode(rate_mode)
    if detector is Detector.HD:
        parts = (Mode.GS_HD, Mode.AS2_HD)
    elif detector is Detector.II:
        parts = (Mode.GS_HBD, Mode.AS2_II)
    else:
        parts = (Mode.GS_HBD, Mode.AS2_SIC)
    if rate_mode is RateMode.VARIABLE:
        if rf is None:
            raise ValueError("variable-rate system gain needs rf")
        results = {m: df_variable(m, cfg, rf, ctl) for m in parts}
    else:
        results = {m: df_fixed(m, cfg, ctl) for m in parts}
    low = min(results.values(), key=lambda r: r.gain)
    diag = dict(low.diagnostics)
    diag["components"] = {m.value: r for m, r in results.items()}
    return DiversityResult(gain=low.gain, mode=Mode.SYSTEM, rate_mode=rate_mode,
                           rf=float("nan") if rf is None else rf, diagnostics=diag)


def asymptotic_check(mode, cfg, omega_high_db=60.0, ctl=None):
    """Fixed-rate gain of ``mode`` at a very high reference SNR.

    Compare against ``COROLLARY_LIMITS[mode]`` (0 for the interference- or
    SI-limited HBD modes, 1 for half duplex).
    """
    return df_fixed(mode, cfg.with_omega_db(omega_high_db), ctl).gain
