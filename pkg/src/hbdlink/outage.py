"""Closed-form outage probabilities of the hybrid-duplex link.

All series are summed by :mod:`hbdlink._series` in adaptive extended
precision, then reported as doubles. The scalar helpers
(:func:`alpha_term`, :func:`moment_rician`, :func:`moment_exponential`)
work in plain floating point for callers who want single terms.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from . import _series
from .scenario import thresholds
from .specfun import hyp1f1_neg_int, laguerre0, ln_factorial

__all__ = [
    "Mode",
    "Node",
    "Detector",
    "SeriesControl",
    "OutageResult",
    "NonConvergent",
    "DivergenceWarning",
    "ToleranceNotReached",
    "alpha_term",
    "moment_rician",
    "moment_exponential",
    "outage_gs_hbd",
    "outage_as2_ii",
    "outage_as2_sic",
    "outage_hd",
    "outage_system",
    "outage",
    "convergence_bound",
    "sic_quadrature",
]


class Mode(enum.Enum):
    GS_HBD = "gs_hbd"
    AS2_II = "as2_ii"
    AS2_SIC = "as2_sic"
    GS_HD = "gs_hd"
    AS2_HD = "as2_hd"
    SYSTEM = "system"


class Node(enum.Enum):
    GS = "gs"
    AS2 = "as2"


class Detector(enum.Enum):
    """Receiver at AS-2; ``HD`` selects the half-duplex reference system."""

    II = "ii"
    SIC = "sic"
    HD = "hd"


class NonConvergent(ArithmeticError):
    """A series hit ``max_terms`` before the stopping rule fired, or settled
    on a value outside ``[0, 1]``.

    The partial, unconverged result is kept on ``result`` for diagnostics.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DivergenceWarning(RuntimeWarning):
    """A sufficient convergence condition of a closed form does not hold."""


class ToleranceNotReached(ArithmeticError):
    """Numerical quadrature could not certify the requested tolerance."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite series.

    A sum stops once, for ``consecutive_small`` successive outer blocks,
    every one of its component series adds no more than ``rel_tol`` times
    the running result (or its complement, whichever is smaller).
    """

    max_terms: int = 200
    rel_tol: float = 1e-10
    consecutive_small: int = 3

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.consecutive_small < 1:
            raise ValueError("consecutive_small must be >= 1")


@dataclass(frozen=True)
class OutageResult:
    """Outage probability plus truncation diagnostics.

    ``complement`` is ``1 - probability`` carried from the extended
    precision sum, so it stays accurate when the outage is close to one.
    ``components`` holds named sub-results (series parts of the SIC form,
    or the per-node results of a system outage).
    """

    probability: float
    terms_used: int
    converged: bool
    convergence_bound_satisfied: bool
    mode: Mode
    complement: float = float("nan")
    components: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# scalar helpers


def alpha_term(q, omega, k, gamma):
    """Term ``q`` of the Rician power CDF series.

    ``(-1)^q e^{-K} L_q(K) / (q+1)! * ((1+K) gamma / omega)^(q+1)``,
    assembled in log space with the sign tracked separately.

    Examples
    --------
    >>> alpha_term(0, 4.0, 0.0, 1.0)
    0.25
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    if not omega > 0:
        raise ValueError("omega must be > 0")
    if k < 0 or gamma < 0:
        raise ValueError("k and gamma must be >= 0")
    if gamma == 0:
        return 0.0
    lag = laguerre0(q, k)
    if lag == 0:
        return 0.0
    sign = -1.0 if (q % 2) ^ (lag < 0) else 1.0
    log_mag = (-k + math.log(abs(lag)) - ln_factorial(q + 1)
               + (q + 1) * math.log((1.0 + k) * gamma / omega))
    return sign * math.exp(log_mag)


def moment_rician(l, mean_power, k):
    """``E[Z^l]`` of a Rician power with the given mean and K factor."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if not mean_power > 0:
        raise ValueError("mean_power must be > 0")
    if k < 0:
        raise ValueError("k must be >= 0")
    if l == 0:
        return 1.0
    log_mag = ln_factorial(l) + l * math.log(mean_power / (1.0 + k))
    return math.exp(log_mag) * hyp1f1_neg_int(l, k)


def moment_exponential(l, mean_power):
    """``E[Z^l] = l! * mean^l`` of an exponential power."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if mean_power < 0:
        raise ValueError("mean_power must be >= 0")
    if l == 0:
        return 1.0
    if mean_power == 0:
        return 0.0
    return math.exp(ln_factorial(l) + l * math.log(mean_power))


# ---------------------------------------------------------------------------
# series assembly shared with the diversity module


def _hd_params(node, cfg):
    if Node(node) is Node.GS:
        return cfg.omega_x, cfg.k_x1
    return cfg.mean_x_gs, cfg.k_xgs


def _components(mode, cfg, gamma_gs, gamma_2):
    """Signed series components for ``mode`` at explicit thresholds."""
    mode = Mode(mode)
    if mode is Mode.GS_HBD:
        streams = []
        if cfg.si.alpha_gg > 0 and cfg.si.phase_noise_power > 0:
            streams.append(_series.rician_moments(cfg.mean_si_phase, cfg.si.k_si))
        if cfg.si.alpha_gg > 0 and cfg.si.epsilon > 0:
            streams.append(_series.exponential_moments(cfg.mean_si_estimation))
        x = (1 + cfg.k_x1) * gamma_gs / cfg.omega_x
        return [(1, _series.moment_component(cfg.k_x1, x, streams))]
    if mode is Mode.AS2_II:
        streams = []
        if cfg.alpha_12 > 0:
            streams.append(_series.rician_moments(cfg.mean_y1, cfg.k_y1))
        x = (1 + cfg.k_xgs) * gamma_2 / cfg.mean_x_gs
        return [(1, _series.moment_component(cfg.k_xgs, x, streams))]
    if mode is Mode.AS2_SIC:
        if not cfg.alpha_12 > 0:
            raise ValueError("the SIC detector needs alpha_12 > 0")
        x_y = (1 + cfg.k_y1) * gamma_gs / cfg.mean_y1
        p1 = _series.moment_component(
            cfg.k_y1, x_y, [_series.rician_moments(cfg.mean_x_gs, cfg.k_xgs)])
        cdf_x = _series.hd_component(cfg.k_xgs, (1 + cfg.k_xgs) * gamma_2 / cfg.mean_x_gs)
        cauchy = _series.cauchy_component(
            cfg.k_y1, x_y, cfg.k_xgs, (1 + cfg.k_xgs) / cfg.mean_x_gs, gamma_2)
        return [(1, p1), (1, cdf_x), (-1, cauchy)]
    if mode is Mode.GS_HD:
        omega, k = _hd_params(Node.GS, cfg)
        return [(1, _series.hd_component(k, (1 + k) * gamma_gs / omega))]
    if mode is Mode.AS2_HD:
        omega, k = _hd_params(Node.AS2, cfg)
        return [(1, _series.hd_component(k, (1 + k) * gamma_2 / omega))]
    raise ValueError("no series for mode %s" % mode)


_SIC_PARTS = ("interference_detection", "soi_cdf", "cauchy")


def convergence_bound(mode, cfg, gamma_gs=None, gamma_2=None):
    """Sufficient convergence condition of the closed form for ``mode``.

    Thresholds default to the fixed-rate values of ``cfg.rates``.
    """
    mode = Mode(mode)
    th = thresholds(cfg.rates)
    gamma_gs = th.gs_hbd if gamma_gs is None else gamma_gs
    gamma_2 = th.as2_hbd if gamma_2 is None else gamma_2
    if mode is Mode.GS_HBD:
        si = cfg.si.alpha_gg * cfg.si.epsilon
        return si == 0 or gamma_gs <= 1.0 / (3.0 * (1 + cfg.k_x1) * si)
    if mode is Mode.AS2_II:
        if cfg.alpha_12 == 0:
            return True
        return gamma_2 <= cfg.alpha_g2 * (1 + cfg.k_y1) / (2.0 * (1 + cfg.k_xgs) * cfg.alpha_12)
    if mode is Mode.AS2_SIC:
        return gamma_gs <= (cfg.alpha_12 / (1 + cfg.k_y1)) / (2.0 * cfg.alpha_g2 / (1 + cfg.k_xgs))
    return True


def _evaluate(mode, cfg, ctl, gamma_gs, gamma_2, c=0.0, want_slope=False):
    ctl = ctl or SeriesControl()
    comps = _components(mode, cfg, gamma_gs, gamma_2)
    return _series.evaluate(comps, ctl.max_terms, ctl.rel_tol, ctl.consecutive_small,
                            c=c, want_slope=want_slope)


def _finish(mode, outcome, bound_ok, ctl):
    p = outcome.value
    converged = outcome.converged
    tol = ctl.rel_tol
    if converged:
        if -tol <= p <= 1 + tol:
            p = min(max(p, 0.0), 1.0)
        else:
            converged = False
    parts = {}
    if mode is Mode.AS2_SIC:
        parts = dict(zip(_SIC_PARTS, outcome.parts))
    result = OutageResult(
        probability=p,
        terms_used=outcome.terms_used,
        converged=converged,
        convergence_bound_satisfied=bound_ok,
        mode=mode,
        complement=min(max(outcome.complement, 0.0), 1.0) if converged else outcome.complement,
        components=parts,
    )
    if not converged:
        why = ("did not settle within %d terms" % ctl.max_terms if not outcome.converged
               else "settled outside [0, 1] at %r" % p)
        raise NonConvergent("%s series %s" % (mode.value, why), result)
    return result


def _fixed_outage(mode, cfg, ctl):
    ctl = ctl or SeriesControl()
    th = thresholds(cfg.rates)
    if mode in (Mode.GS_HD, Mode.AS2_HD):
        g_gs, g_2 = th.gs_hd, th.as2_hd
    else:
        g_gs, g_2 = th.gs_hbd, th.as2_hbd
    if mode is Mode.AS2_SIC and not cfg.alpha_12 > 0:
        raise ValueError("SIC needs an interferer: alpha_12 must be > 0")
    bound_ok = convergence_bound(mode, cfg, g_gs, g_2)
    if mode is Mode.AS2_SIC and not bound_ok:
        warnings.warn("SIC series convergence condition fails at gamma_gs=%g" % g_gs,
                      DivergenceWarning, stacklevel=3)
    outcome = _evaluate(mode, cfg, ctl, g_gs, g_2)
    return _finish(mode, outcome, bound_ok, ctl)


def outage_gs_hbd(cfg, ctl=None):
    """Outage at the full-duplex ground station under residual SI.

    Sums ``alpha(q) * E[(1 + Y_si1 + Y_si2)^(q+1)]`` over ``q``; the
    expectation expands into multinomial-weighted products of moments.
    """
    return _fixed_outage(Mode.GS_HBD, cfg, ctl)


def outage_as2_ii(cfg, ctl=None):
    """Outage at AS-2 when AS-1's signal is treated as noise."""
    return _fixed_outage(Mode.AS2_II, cfg, ctl)


def outage_as2_sic(cfg, ctl=None):
    """Outage at AS-2 with successive interference cancellation.

    The probability is ``P1 + F_X(gamma_2) - C`` where ``P1`` is the
    probability that the interferer cannot be decoded, ``F_X`` the CDF of
    the signal power and ``C`` the overlap of both events, summed as a
    Cauchy product of the interferer CDF and the signal density series.
    A :class:`DivergenceWarning` is emitted when the sufficient condition
    for the ``P1`` series does not hold; the result is still returned.
    """
    return _fixed_outage(Mode.AS2_SIC, cfg, ctl)


def outage_hd(node, cfg, ctl=None):
    """Half-duplex outage at ``node`` (rate doubled, no interference)."""
    mode = Mode.GS_HD if Node(node) is Node.GS else Mode.AS2_HD
    return _fixed_outage(mode, cfg, ctl)


def outage(mode, cfg, ctl=None):
    """Dispatch on a per-node ``Mode`` (not ``SYSTEM``)."""
    mode = Mode(mode)
    if mode is Mode.SYSTEM:
        raise ValueError("use outage_system for the system-level outage")
    return _fixed_outage(mode, cfg, ctl)


def outage_system(detector, cfg, ctl=None):
    """Worst-node outage ``max(P_gs, P_as2)`` for the chosen detector.

    ``Detector.HD`` compares the two half-duplex outages instead.
    """
    detector = Detector(detector)
    if detector is Detector.HD:
        parts = (Mode.GS_HD, Mode.AS2_HD)
    elif detector is Detector.II:
        parts = (Mode.GS_HBD, Mode.AS2_II)
    else:
        parts = (Mode.GS_HBD, Mode.AS2_SIC)
    results = {m: _fixed_outage(m, cfg, ctl) for m in parts}
    worst = max(results.values(), key=lambda r: r.probability)
    return OutageResult(
        probability=worst.probability,
        terms_used=max(r.terms_used for r in results.values()),
        converged=all(r.converged for r in results.values()),
        convergence_bound_satisfied=all(r.convergence_bound_satisfied for r in results.values()),
        mode=Mode.SYSTEM,
        complement=worst.complement,
        components={m.value: r for m, r in results.items()},
    )


# ---------------------------------------------------------------------------
# quadrature oracle


def _rician_pdf(z, omega, k):
    # (1+K)/omega exp(-K - (1+K)z/omega) I0(2 sqrt(K(1+K)z/omega)), via i0e
    s = (1.0 + k) / omega
    u = 2.0 * np.sqrt(k * s * z)
    return s * np.exp(u - k - s * z) * special.i0e(u)


def _upper_quantile(omega, k, tail=1e-12):
    return stats.ncx2.isf(tail, 2, 2.0 * k) * omega / (2.0 * (1.0 + k))


def sic_quadrature(cfg, abs_tol=1e-9):
    """SIC outage by 2-D adaptive quadrature of the joint density.

    Integrates ``f_X(x) f_Y(y)`` over ``{y < gamma_gs (1 + x)}`` plus
    ``{y >= gamma_gs (1 + x), x < gamma_2}``, with each power truncated at
    its ``1 - 1e-12`` quantile. Raises :class:`ToleranceNotReached` when the
    summed error estimate exceeds ``abs_tol``.
    """
    if not abs_tol > 0:
        raise ValueError("abs_tol must be > 0")
    th = thresholds(cfg.rates)
    g_gs, g_2 = th.gs_hbd, th.as2_hbd
    om_x, k_x = cfg.mean_x_gs, cfg.k_xgs
    om_y, k_y = cfg.mean_y1, cfg.k_y1
    x_max = _upper_quantile(om_x, k_x)
    y_max = _upper_quantile(om_y, k_y)
    f = lambda y, x: _rician_pdf(x, om_x, k_x) * _rician_pdf(y, om_y, k_y)
    opts = dict(epsabs=abs_tol / 4, epsrel=1e-12)
    # region P1: y below the interference-detection line
    x_edge = min(x_max, max(0.0, y_max / g_gs - 1.0)) if g_gs > 0 else 0.0
    p1, e1 = 0.0, 0.0
    if g_gs > 0:
        p1, e1 = integrate.dblquad(f, 0.0, x_edge, 0.0, lambda x: g_gs * (1 + x), **opts)
        if x_edge < x_max:
            a, e = integrate.dblquad(f, x_edge, x_max, 0.0, y_max, **opts)
            p1, e1 = p1 + a, e1 + e
    # region P2: interference decoded but the signal itself fails
    p2, e2 = 0.0, 0.0
    x_top = min(g_2, x_max)
    if x_top > 0:
        p2, e2 = integrate.dblquad(
            f, 0.0, x_top, lambda x: min(g_gs * (1 + x), y_max), y_max, **opts)
    if e1 + e2 > abs_tol:
        raise ToleranceNotReached("quadrature error estimate %.3g exceeds %.3g" % (e1 + e2, abs_tol))
    return p1 + p2
