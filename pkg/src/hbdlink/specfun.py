"""Scalar special functions used by the outage closed forms.

Everything here is a pure function of its arguments built on the
``math`` module only, so the routines are safe to call from any thread.
"""

import math

__all__ = [
    "laguerre0",
    "hyp1f1_neg_int",
    "bessel_i0",
    "bessel_i0e",
    "marcum_q1",
    "marcum_q1_complement",
    "ln_factorial",
]

# Switch-over between the I0 power series and its large-argument expansion.
_I0_ASYMPTOTIC_FROM = 30.0
# Poisson sums run up to this many standard deviations (+ a constant) past
# the mean, so the neglected upper mass stays far below 1e-20.
_POISSON_SIGMAS = 12.0
_POISSON_PAD = 40


def _check_finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError("non-finite argument: %r" % (v,))


def laguerre0(q, x):
    """Zero-order Laguerre polynomial ``L_q(x)`` by forward recurrence.

    ``(n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}`` is used instead of the
    explicit binomial sum, which cancels badly for large ``q``.
    """
    if q < 0:
        raise ValueError("q must be >= 0")
    _check_finite(x)
    prev, cur = 0.0, 1.0
    for n in range(q):
        prev, cur = cur, ((2 * n + 1 - x) * cur - n * prev) / (n + 1)
    return cur


def hyp1f1_neg_int(l, k_factor):
    """``1F1(-l; 1; -K)`` for integer ``l >= 0``.

    With a non-positive integer first argument the series terminates, and
    the result is the Laguerre polynomial ``L_l(-K)`` (all terms positive).
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if k_factor < 0:
        raise ValueError("k_factor must be >= 0")
    return laguerre0(l, -k_factor)


def _i0_series(x):
    # sum (x^2/4)^k / (k!)^2 ; positive terms, no cancellation
    y = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while term > 1e-17 * total:
        k += 1
        term *= y / (k * k)
        total += term
    return total


def _i0e_asymptotic(x):
    # e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    total = 1.0
    term = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (k * 8.0 * x)
        if nxt > term or nxt < 1e-17 * total:
            break
        term = nxt
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i0e(x):
    """Exponentially scaled modified Bessel function ``exp(-x) I0(x)``."""
    _check_finite(x)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x < _I0_ASYMPTOTIC_FROM:
        return _i0_series(x) * math.exp(-x)
    return _i0e_asymptotic(x)


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Relative accuracy is about 1e-13 on ``[0, 700]``. Raises
    ``OverflowError`` when ``I0(x)`` is not representable as a double.
    """
    _check_finite(x)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x < _I0_ASYMPTOTIC_FROM:
        return _i0_series(x)
    scaled = _i0e_asymptotic(x)
    log_val = x + math.log(scaled)
    if log_val > 709.782712893384:
        raise OverflowError("I0(%g) exceeds the double range" % x)
    return math.exp(x) * scaled


def _poisson_pmf(j, lam):
    if lam == 0.0:
        return 1.0 if j == 0 else 0.0
    return math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))


def _poisson_window(lam):
    spread = _POISSON_SIGMAS * math.sqrt(lam) + _POISSON_PAD
    return max(0, int(math.floor(lam - spread))), int(math.ceil(lam + spread))


def _marcum_parts(a, b):
    """Return ``(Q1(a, b), 1 - Q1(a, b))`` from positive-term sums.

    Uses the Poisson-mixture form ``Q1(a, b) = P[N_mu <= N_lam]`` with
    independent ``N_lam ~ Poisson(a^2/2)`` and ``N_mu ~ Poisson(b^2/2)``,
    so both the value and its complement are sums of non-negative terms.
    """
    _check_finite(a, b)
    if a < 0 or b < 0:
        raise ValueError("Marcum Q arguments must be >= 0")
    lam = 0.5 * a * a
    mu = 0.5 * b * b
    if mu == 0.0:
        return 1.0, 0.0
    # the product P[N_lam = k] P[N_mu > k] can peak far outside either
    # marginal window (deep tails), so k runs from 0 to the larger window top
    top = max(_poisson_window(lam)[1], _poisson_window(mu)[1])
    pmf_mu = [_poisson_pmf(j, mu) for j in range(top + 2)]
    # prefix[i] = P[N_mu <= i], suffix[i] = P[N_mu > i]; both built from
    # positive accumulations so tiny tails keep relative accuracy
    n = len(pmf_mu)
    prefix = [0.0] * n
    suffix = [0.0] * n
    acc = 0.0
    for i in range(n):
        acc += pmf_mu[i]
        prefix[i] = acc
    acc = 0.0
    for i in range(n - 1, -1, -1):
        suffix[i] = acc
        acc += pmf_mu[i]
    q = 0.0
    p = 0.0
    for k in range(top + 1):
        w = _poisson_pmf(k, lam)
        q += w * prefix[k]
        p += w * suffix[k]
    # the smaller sum carries full relative accuracy; derive the larger one
    if p <= q:
        return 1.0 - p, p
    return q, 1.0 - q


def marcum_q1(a, b):
    """First-order Marcum Q function ``Q1(a, b)``.

    Absolute accuracy is better than 1e-12 for moderate arguments; the
    result always lies in ``[0, 1]``.

    Examples
    --------
    >>> round(marcum_q1(0.0, 2.0), 10)
    0.1353352832
    """
    return _marcum_parts(a, b)[0]


def marcum_q1_complement(a, b):
    """``1 - Q1(a, b)`` evaluated directly, keeping relative accuracy when
    the complement is tiny (the Rician power CDF far in the lower tail)."""
    return _marcum_parts(a, b)[1]


def ln_factorial(n):
    """``ln(n!)``; exact integer path up to ``n = 20``, log-gamma beyond."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n <= 20:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)
