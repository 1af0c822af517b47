"""Extended-precision evaluation of the outage power series.

Every outage expression is a sum of terms ``coef * gamma**a * omega**b``
where ``omega`` is the reference SNR and ``gamma`` the SINR threshold.
A *component* is a callable ``factory(ctx)`` returning an iterator of
blocks ``(v, vb, va, mag)``, one per outer series index, where

* ``v``  is the sum of the terms in the block,
* ``vb`` is the same sum with each term weighted by its ``b`` exponent,
* ``va`` is the same sum weighted by its ``a`` exponent,
* ``mag`` is the sum of absolute term values (cancellation monitor).

From these, ``omega * dP/domega`` is ``vb + c * va`` with
``c = (omega / gamma) * dgamma/domega`` (0 for a fixed threshold).

The terms alternate and can exceed the result by tens of orders of
magnitude, so blocks are accumulated in a private mpmath context whose
working precision is raised until the observed cancellation is covered.
"""

import math
from dataclasses import dataclass

from mpmath import ctx_mp

__all__ = ["SeriesOutcome", "evaluate", "hd_component", "moment_component",
           "cauchy_component", "rician_moments", "exponential_moments"]

_START_DPS = 30
_GUARD_DIGITS = 25
_MAX_DPS = 1000


@dataclass
class SeriesOutcome:
    value: float
    complement: float
    slope: float  # omega * dP/domega, includes the threshold-variation term
    parts: list  # per-component value as float, before the sign is applied
    terms_used: int
    converged: bool
    dps: int


def _log10_abs(ctx, x):
    if x == 0:
        return None
    return float(ctx.log10(abs(x)))


def _run(components, max_terms, rel_tol, consecutive, c, want_slope, dps):
    ctx = ctx_mp.MPContext()
    ctx.dps = dps
    c = ctx.mpf(c)
    iters = [factory(ctx) for _sign, factory in components]
    signs = [sign for sign, _factory in components]
    n_comp = len(components)
    v = [ctx.zero] * n_comp
    vb = [ctx.zero] * n_comp
    va = [ctx.zero] * n_comp
    small = 0
    done = False
    terms = 0
    max_mag = ctx.zero
    max_mag_d = ctx.zero
    for n in range(max_terms):
        blocks = []
        for idx in range(n_comp):
            bv, bb, ba, mag = next(iters[idx])
            v[idx] += bv
            vb[idx] += bb
            va[idx] += ba
            if mag > max_mag:
                max_mag = mag
            mag_d = mag * (n + 2) * (1 + abs(c))
            if mag_d > max_mag_d:
                max_mag_d = mag_d
            blocks.append((bv, bb, ba))
        terms = n + 1
        total = ctx.fsum(s * x for s, x in zip(signs, v))
        scale_v = min(abs(total), abs(1 - total))
        if want_slope:
            total_d = ctx.fsum(s * (xb + c * xa) for s, xb, xa in zip(signs, vb, va))
            scale_d = abs(total_d)
        # partial totals mean nothing mid-series, so every component must be
        # small against them at the same time, several blocks in a row
        ok = True
        for bv, bb, ba in blocks:
            ok = ok and abs(bv) <= rel_tol * scale_v
            if want_slope:
                ok = ok and abs(bb + c * ba) <= rel_tol * scale_d
        small = small + 1 if ok else 0
        if small >= consecutive:
            done = True
            break
    total = ctx.fsum(s * x for s, x in zip(signs, v))
    total_d = ctx.fsum(s * (xb + c * xa) for s, xb, xa in zip(signs, vb, va))
    # digits required to resolve the result against the largest term seen
    need = 0.0
    lm = _log10_abs(ctx, max_mag)
    if lm is not None:
        lq = _log10_abs(ctx, min(abs(total), abs(1 - total)))
        need = max(need, lm - (lq if lq is not None else -dps))
    if want_slope:
        lm = _log10_abs(ctx, max_mag_d)
        if lm is not None:
            lq = _log10_abs(ctx, total_d)
            need = max(need, lm - (lq if lq is not None else -dps))
    outcome = SeriesOutcome(
        value=float(total),
        complement=float(1 - total),
        slope=float(total_d),
        parts=[float(x) for x in v],
        terms_used=terms,
        converged=done,
        dps=dps,
    )
    return outcome, need + _GUARD_DIGITS


def evaluate(components, max_terms, rel_tol, consecutive, c=0.0, want_slope=False):
    """Sum ``sign * component`` over ``components`` with adaptive precision.

    Parameters
    ----------
    components : list of (int, callable)
        Pairs ``(sign, factory)``; ``factory(ctx)`` yields blocks.
    max_terms, rel_tol, consecutive :
        Truncation policy. A component stops once ``consecutive`` successive
        blocks are within ``rel_tol`` of the running total (and, when
        ``want_slope`` is set, of the running slope).
    c : float
        Threshold-variation coefficient ``(omega / gamma) dgamma/domega``.
    want_slope : bool
        Also require the slope series to satisfy the stopping rule.
    """
    dps = _START_DPS
    while True:
        outcome, need = _run(components, max_terms, rel_tol, consecutive, c, want_slope, dps)
        if need <= dps or dps >= _MAX_DPS:
            return outcome
        dps = min(_MAX_DPS, max(int(math.ceil(need)), 2 * dps))


# ---------------------------------------------------------------------------
# block generators


def _laguerre_stream(ctx, x):
    """Yield L_0(x), L_1(x), ... by the three-term recurrence."""
    prev, cur = ctx.zero, ctx.one
    n = 0
    while True:
        yield cur
        prev, cur = cur, ((2 * n + 1 - x) * cur - n * prev) / (n + 1)
        n += 1


def _cdf_coefficients(ctx, k, x):
    """Yield ``(-1)^q e^{-K} L_q(K) x^(q+1)`` (the CDF kernel times (q+1)!)."""
    k = ctx.mpf(k)
    x = ctx.mpf(x)
    lag = _laguerre_stream(ctx, k)
    p = ctx.exp(-k) * x
    q = 0
    while True:
        val = p * next(lag)
        yield -val if q & 1 else val
        p *= x
        q += 1


def hd_component(k, x):
    """Rician power CDF ``sum_q alpha_q`` with ``x = (1+K) gamma / omega``.

    Term ``q`` scales as ``gamma^(q+1) omega^-(q+1)``.
    """

    def factory(ctx):
        coeffs = _cdf_coefficients(ctx, k, x)
        q = 0
        fact = ctx.one
        while True:
            fact *= q + 1
            t = next(coeffs) / fact
            yield t, -(q + 1) * t, (q + 1) * t, abs(t)
            q += 1

    return factory


def _scaled_moments(ctx, mean_power, k):
    """Yield ``E[Z^l] / l!`` for a Rician power with the given mean and K."""
    base = ctx.mpf(mean_power) / (1 + ctx.mpf(k))
    lag = _laguerre_stream(ctx, -ctx.mpf(k))
    p = ctx.one
    while True:
        yield p * next(lag)
        p *= base


def _exp_moments(ctx, mean_power):
    """Yield ``E[Z^l] / l!`` for an exponential power: ``mean^l``."""
    base = ctx.mpf(mean_power)
    p = ctx.one
    while True:
        yield p
        p *= base


def rician_moments(mean_power, k):
    return lambda ctx: _scaled_moments(ctx, mean_power, k)


def exponential_moments(mean_power):
    return lambda ctx: _exp_moments(ctx, mean_power)


def moment_component(k, x, moment_streams):
    """``sum_q alpha_q E[(1 + W)^(q+1)]`` with ``W`` a sum of independent powers.

    ``moment_streams`` holds one or two factories ``f(ctx)`` (see
    :func:`rician_moments`, :func:`exponential_moments`) yielding
    ``E[Z^l]/l!`` for each independent summand of ``W``, whose means are
    all proportional to omega. Term ``(q, l3)`` with ``l3`` the power of the constant 1
    scales as ``gamma^(q+1) omega^(-l3)``.
    """

    def factory(ctx):
        coeffs = _cdf_coefficients(ctx, k, x)
        streams = [f(ctx) for f in moment_streams]
        seqs = [[] for _ in streams]
        conv = []  # conv[m] = coefficient of t^m in prod_i sum_l E[Z_i^l]/l! t^l
        inv_fact = [ctx.one]
        q = 0
        while True:
            top = q + 1
            # extend each moment list and the convolution to index `top`
            while len(conv) <= top:
                m = len(conv)
                for s, seq in zip(streams, seqs):
                    seq.append(next(s))
                if not seqs:
                    conv.append(ctx.one if m == 0 else ctx.zero)
                elif len(seqs) == 1:
                    conv.append(seqs[0][m])
                else:
                    a, b = seqs
                    conv.append(ctx.fsum(a[i] * b[m - i] for i in range(m + 1)))
                inv_fact.append(inv_fact[-1] / len(inv_fact))
            inner = ctx.zero
            inner_b = ctx.zero
            for l3 in range(top + 1):
                t = conv[top - l3] * inv_fact[l3]
                inner += t
                inner_b -= l3 * t
            cq = next(coeffs)
            t = cq * inner
            yield t, cq * inner_b, top * t, abs(t)
            q += 1

    return factory



def cauchy_component(k_y, x_y, k_x, x_x1, gamma2):
    """``int_0^gamma2 F_Y(gamma_gs (1 + x)) f_X(x) dx`` as a Cauchy product.

    ``F_Y(gamma_gs (1+x)) = sum_i alpha_Y(i) (1+x)^(i+1)`` with
    ``x_y = (1+K_Y) gamma_gs / omega_Y`` and the density
    ``f_X(x) = sum_k (k+1) alpha_X(k; 1) x^k`` with ``x_x1 = (1+K_X)/omega_X``.
    Block ``n`` collects the pairs ``i + k = n``; each term scales as
    ``omega^-(n+2)``. The ``va`` weight counts powers of both thresholds,
    which is the right weight when they vary together.
    """

    def factory(ctx):
        g = ctx.mpf(gamma2)
        cy = _cdf_coefficients(ctx, k_y, x_y)
        cx = _cdf_coefficients(ctx, k_x, x_x1)
        ay = []  # alpha_Y(i)
        dx = []  # (k+1) alpha_X(k; 1)
        fact = [ctx.one]
        # rows[i+1][k] = B(i, k) = int_0^g (1+x)^(i+1) x^k dx ; rows[0] is i = -1
        rows = [[]]
        gpow = [ctx.one]  # g^j
        opg = [ctx.one]  # (1+g)^j
        n = 0
        while True:
            fact.append(fact[-1] * (n + 1))
            ay.append(next(cy) / fact[n + 1])
            dx.append(next(cx) / fact[n])
            gpow.append(gpow[-1] * g)
            opg.append(opg[-1] * (1 + g))
            # extend B rows along the new anti-diagonal
            r0 = rows[0]
            while len(r0) < n + 2:
                kk = len(r0)
                r0.append(g ** (kk + 1) / (kk + 1))
            rows.append([])
            for i in range(n + 1):
                prev, row = rows[i], rows[i + 1]
                kk = n - i
                while len(row) <= kk:
                    j = len(row)
                    row.append(prev[j] + prev[j + 1])
            v = ctx.zero
            va = ctx.zero
            mag = ctx.zero
            for i in range(n + 1):
                kk = n - i
                w = ay[i] * dx[kk]
                b = rows[i + 1][kk]
                t = w * b
                v += t
                va += w * ((i + 1) * b + gpow[kk + 1] * opg[i + 1])
                mag += abs(t)
            yield v, -(n + 2) * v, va, mag
            n += 1

    return factory
