"""Monte-Carlo outage estimates by direct simulation of the received powers.

Samples are drawn in fixed-size chunks. Chunk ``i`` of mode ``m`` uses its
own Philox stream seeded from ``SeedSequence(seed, spawn_key=(m, i))``, so
a mode's estimate does not depend on which other modes were simulated, and
chunks can be evaluated in any order. Powers are drawn with unit mean and
scaled afterwards, which lets :func:`mc_outage_sweep` reuse one set of
draws across a whole SNR axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .outage import Mode
from .scenario import thresholds

__all__ = ["McEstimate", "sample_rician_power", "mc_outage", "mc_outage_sweep", "CHUNK"]

CHUNK = 1_000_000

_MODE_INDEX = {Mode.GS_HBD: 0, Mode.AS2_II: 1, Mode.AS2_SIC: 2, Mode.GS_HD: 3, Mode.AS2_HD: 4}


@dataclass(frozen=True)
class McEstimate:
    """Empirical outage frequency with its binomial standard error.

    For the SIC mode ``detail`` counts the samples failing each stage.
    """

    probability: float
    std_error: float
    samples: int
    seed: int
    detail: dict = field(default_factory=dict)


def sample_rician_power(k, mean_power, rng, size=None):
    """Draw ``|h|^2 * mean_power`` with ``h`` Rician of unit mean power.

    ``h = sqrt(K/(K+1)) + sqrt(1/(2(K+1))) (n1 + j n2)`` with independent
    standard normals ``n1, n2``; ``K = 0`` gives an exponential power.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if not mean_power > 0:
        raise ValueError("mean_power must be > 0")
    los = math.sqrt(k / (k + 1.0))
    sigma = math.sqrt(0.5 / (k + 1.0))
    re = los + sigma * rng.standard_normal(size)
    im = sigma * rng.standard_normal(size)
    return (re * re + im * im) * mean_power


def _rng(seed, mode, chunk):
    ss = np.random.SeedSequence(seed, spawn_key=(_MODE_INDEX[mode], chunk))
    return np.random.Generator(np.random.Philox(ss))


def _chunk_sizes(samples):
    full, rest = divmod(samples, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _draw(mode, cfg, rng, n):
    """Unit-mean draws for every random power the mode's event needs."""
    if mode is Mode.GS_HBD:
        return (sample_rician_power(cfg.k_x1, 1.0, rng, n),
                sample_rician_power(cfg.si.k_si, 1.0, rng, n),
                rng.standard_exponential(n))
    if mode in (Mode.AS2_II, Mode.AS2_SIC):
        return (sample_rician_power(cfg.k_xgs, 1.0, rng, n),
                sample_rician_power(cfg.k_y1, 1.0, rng, n))
    if mode is Mode.GS_HD:
        return (sample_rician_power(cfg.k_x1, 1.0, rng, n),)
    return (sample_rician_power(cfg.k_xgs, 1.0, rng, n),)


def _count(mode, cfg, draws):
    """Outage count (and SIC stage counts) for one chunk at ``cfg.omega_x``."""
    th = thresholds(cfg.rates)
    om = cfg.omega_x
    if mode is Mode.GS_HBD:
        u_x, u_phase, u_est = draws
        x1 = om * u_x
        y = cfg.mean_si_phase * u_phase + cfg.mean_si_estimation * u_est
        return int(np.count_nonzero(x1 <= th.gs_hbd * (1.0 + y))), {}
    if mode is Mode.AS2_II:
        u_x, u_y = draws
        x = cfg.mean_x_gs * u_x
        y1 = cfg.mean_y1 * u_y
        return int(np.count_nonzero(x <= th.as2_hbd * (1.0 + y1))), {}
    if mode is Mode.AS2_SIC:
        u_x, u_y = draws
        x = cfg.mean_x_gs * u_x
        y1 = cfg.mean_y1 * u_y
        # stage 1: AS-1's codeword cannot be decoded with the SOI as noise
        stage1 = y1 < th.gs_hbd * (1.0 + x)
        # stage 2: after cancellation, the SOI itself is below threshold
        stage2 = x < th.as2_hbd
        fails = stage1 | stage2
        return int(np.count_nonzero(fails)), {
            "stage1_fail": int(np.count_nonzero(stage1)),
            "stage2_fail": int(np.count_nonzero(stage2 & ~stage1)),
            "stage2_any": int(np.count_nonzero(stage2)),
        }
    if mode is Mode.GS_HD:
        return int(np.count_nonzero(om * draws[0] <= th.gs_hd)), {}
    return int(np.count_nonzero(cfg.mean_x_gs * draws[0] <= th.as2_hd)), {}


def _estimate(count, detail, samples, seed):
    p = count / samples
    return McEstimate(probability=p, std_error=math.sqrt(p * (1.0 - p) / samples),
                      samples=samples, seed=seed, detail=detail)


def mc_outage_sweep(mode, cfgs, samples=10_000_000, seed=0):
    """Estimates for configurations differing only in ``omega_x``.

    All configurations share one set of draws, so the estimates along the
    axis are correlated but each one equals :func:`mc_outage` on its own.
    """
    mode = Mode(mode)
    if mode is Mode.SYSTEM:
        raise ValueError("simulate the per-node modes and take the max")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    cfgs = list(cfgs)
    if not cfgs:
        return []
    ks = {(c.k_x1, c.k_xgs, c.k_y1, c.si.k_si) for c in cfgs}
    if len(ks) != 1:
        raise ValueError("configurations in one sweep must share their K factors")
    if mode is Mode.AS2_SIC and any(not c.alpha_12 > 0 for c in cfgs):
        raise ValueError("the SIC detector needs alpha_12 > 0")
    counts = [0] * len(cfgs)
    details = [{} for _ in cfgs]
    for idx, n in enumerate(_chunk_sizes(samples)):
        draws = _draw(mode, cfgs[0], _rng(seed, mode, idx), n)
        for j, cfg in enumerate(cfgs):
            c, d = _count(mode, cfg, draws)
            counts[j] += c
            for key, val in d.items():
                details[j][key] = details[j].get(key, 0) + val
    return [_estimate(c, d, samples, seed) for c, d in zip(counts, details)]


def mc_outage(mode, cfg, samples=10_000_000, seed=0):
    """Monte-Carlo outage of one mode at ``cfg``; reproducible given ``seed``."""
    return mc_outage_sweep(mode, [cfg], samples, seed)[0]
