import math
import warnings

import mpmath
import numpy as np
import pytest
from scipy import stats

from hbdlink.montecarlo import sample_rician_power
from hbdlink.outage import (
    Detector,
    DivergenceWarning,
    Mode,
    Node,
    NonConvergent,
    OutageResult,
    SeriesControl,
    ToleranceNotReached,
    alpha_term,
    convergence_bound,
    moment_exponential,
    moment_rician,
    outage,
    outage_as2_ii,
    outage_as2_sic,
    outage_gs_hbd,
    outage_hd,
    outage_system,
    sic_quadrature,
)
from hbdlink.scenario import default_scenario, thresholds
from hbdlink.specfun import marcum_q1_complement

# 50-digit mpmath evaluation of the CDF kernel at (q=3, omega=1, K=15, gamma=0.4142)
ALPHA_3 = 0.006613694324868971
# quadrature-checked SIC outage for alpha_12 = 5 at 5 dB (see test_sic_matches_quadrature)
SIC_5DB = 0.00030159445419717675


@pytest.fixture
def cfg():
    return default_scenario()


def _rician_cdf(gamma, omega, k):
    return marcum_q1_complement(math.sqrt(2 * k), math.sqrt(2 * (1 + k) * gamma / omega))


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=0.0)


def test_alpha_term_values():
    assert alpha_term(0, 4.0, 0.0, 1.0) == 0.25
    for q in range(6):
        assert alpha_term(q, 2.0, 15.0, 0.0) == 0.0
    assert alpha_term(3, 1.0, 15.0, 0.4142) == pytest.approx(ALPHA_3, rel=1e-13)


def test_alpha_term_against_mpmath():
    mpmath.mp.dps = 40
    for q in (0, 1, 5, 17, 40, 90):
        for k in (0.0, 2.5, 15.0):
            k_mp = mpmath.mpf(k)
            ref = ((-1) ** q * mpmath.exp(-k_mp) * mpmath.laguerre(q, 0, k_mp)
                   / mpmath.factorial(q + 1) * ((1 + k_mp) * mpmath.mpf(0.7) / 3) ** (q + 1))
            assert alpha_term(q, 3.0, k, 0.7) == pytest.approx(float(ref), rel=1e-9, abs=1e-300)


def test_alpha_term_sum_is_rician_cdf():
    total = sum(alpha_term(q, 2.0, 5.0, 0.3) for q in range(60))
    assert total == pytest.approx(_rician_cdf(0.3, 2.0, 5.0), abs=1e-12)


def test_moments():
    assert moment_rician(0, 3.0, 15.0) == 1.0
    for k in (0.0, 4.0, 15.0):
        assert moment_rician(1, 2.5, k) == pytest.approx(2.5, rel=1e-14)
    # exact: 3! (2/16)^3 L_3(-15)
    assert moment_rician(3, 2.0, 15.0) == pytest.approx(11.0859375, rel=1e-14)
    assert moment_exponential(0, 0.3) == 1.0
    assert moment_exponential(2, 0.5) == 0.5
    assert moment_exponential(3, 0.0) == 0.0


def test_moments_against_samples():
    rng = np.random.Generator(np.random.Philox(11))
    z = sample_rician_power(15.0, 2.0, rng, 2_000_000)
    z3 = z**3
    assert abs(z3.mean() - moment_rician(3, 2.0, 15.0)) <= 3 * z3.std() / math.sqrt(z.size)
    e = rng.standard_exponential(2_000_000) * 0.1
    e4 = e**4
    assert abs(e4.mean() - moment_exponential(4, 0.1)) <= 3 * e4.std() / math.sqrt(e.size)


def test_gs_without_si_reduces_to_rician_cdf(cfg):
    ideal = cfg.replace(alpha_gg=0.0)
    g = thresholds(cfg.rates).gs_hbd
    for db in (0, 7, 15, 30):
        c = ideal.with_omega_db(db)
        assert outage_gs_hbd(c).probability == pytest.approx(_rician_cdf(g, c.omega_x, 15.0), abs=1e-10)


def test_ii_without_interference_reduces_to_rician_cdf(cfg):
    free = cfg.replace(alpha_12=0.0)
    g = thresholds(cfg.rates).as2_hbd
    for db in (0, 10, 20):
        c = free.with_omega_db(db)
        assert outage_as2_ii(c).probability == pytest.approx(_rician_cdf(g, c.omega_x, 15.0), abs=1e-10)


def test_zero_thresholds_give_zero_outage(cfg):
    zero = cfg.replace(r1_hbd=0.0, rgs_hbd=0.0, alpha_12=5.0)
    for mode in (Mode.GS_HBD, Mode.AS2_II, Mode.AS2_SIC, Mode.GS_HD, Mode.AS2_HD):
        assert outage(mode, zero).probability == 0.0


def test_hd_rayleigh_closed_form(cfg):
    c = cfg.replace(omega_x=1.0, k_x1=0.0, r1_hbd=0.5)  # gamma_HD = 1
    assert outage_hd(Node.GS, c).probability == pytest.approx(1 - math.exp(-1), abs=1e-12)


@pytest.mark.parametrize("k", [0.0, 5.0, 15.0])
@pytest.mark.parametrize("ratio", [1e-3, 0.05, 0.5, 1.0, 2.0])
def test_hd_matches_marcum(cfg, k, ratio):
    c = cfg.replace(k_xgs=k, omega_x=1.0 / ratio)  # gamma_HD = 1 so gamma/omega = ratio
    res = outage_hd(Node.AS2, c)
    assert res.converged
    assert res.probability == pytest.approx(_rician_cdf(1.0, c.omega_x, k), abs=1e-8)


def test_hd_complement_is_accurate_near_one(cfg):
    c = cfg.replace(omega_x=1.0, r1_hbd=1.5)  # gamma_HD = 7, outage ~ 1
    res = outage_hd(Node.GS, c, SeriesControl(max_terms=800))
    assert res.probability == pytest.approx(1.0, abs=1e-15)
    assert res.complement == pytest.approx(stats.ncx2.sf(2 * 16 * 7, 2, 30), rel=1e-8)


def test_sic_components_and_duality(cfg):
    c = cfg.replace(alpha_12=5.0).with_omega_db(5)
    res = outage_as2_sic(c)
    assert res.probability == pytest.approx(SIC_5DB, rel=1e-12)
    g2 = thresholds(c.rates).as2_hbd
    assert res.components["soi_cdf"] == pytest.approx(_rician_cdf(g2, c.mean_x_gs, 15.0), abs=1e-14)
    # the overlap term can never exceed either event it intersects
    assert 0 <= res.components["cauchy"] <= res.components["soi_cdf"]


def test_sic_matches_quadrature(cfg):
    for a12, db in ((5.0, 5), (10.0, 0), (5.0, 20)):
        c = cfg.replace(alpha_12=a12).with_omega_db(db)
        assert outage_as2_sic(c).probability == pytest.approx(sic_quadrature(c), abs=1e-9)


def test_sic_quadrature_partition(cfg):
    c = cfg.replace(alpha_12=5.0).with_omega_db(5)
    # a huge stage-2 threshold makes P1 and P2 cover the whole quadrant
    assert sic_quadrature(c.replace(rgs_hbd=12.0)) == pytest.approx(1.0, abs=1e-9)
    assert sic_quadrature(c.replace(r1_hbd=14.0)) == pytest.approx(1.0, abs=1e-9)


def test_sic_quadrature_errors(cfg):
    c = cfg.replace(alpha_12=5.0)
    with pytest.raises(ValueError):
        sic_quadrature(c, abs_tol=0.0)
    with pytest.raises(ToleranceNotReached):
        sic_quadrature(c, abs_tol=1e-30)


def test_sic_divergence_warning(cfg):
    c = cfg.replace(alpha_12=0.5)
    assert not convergence_bound(Mode.AS2_SIC, c)
    with pytest.warns(DivergenceWarning):
        try:
            res = outage_as2_sic(c)
        except NonConvergent as exc:
            res = exc.result
    assert res.convergence_bound_satisfied is False
    with pytest.raises(ValueError):
        outage_as2_sic(cfg.replace(alpha_12=0.0))


def test_nonconvergent_keeps_partial_result(cfg):
    c = cfg.replace(alpha_12=10.0)  # far outside the II bound
    with pytest.raises(NonConvergent) as info:
        outage_as2_ii(c, SeriesControl(max_terms=50))
    assert isinstance(info.value.result, OutageResult)
    assert info.value.result.converged is False


def test_convergence_bounds(cfg):
    assert convergence_bound(Mode.GS_HBD, cfg)
    assert convergence_bound(Mode.AS2_II, cfg.replace(alpha_12=0.5))
    assert not convergence_bound(Mode.AS2_II, cfg.replace(alpha_12=5.0))
    assert convergence_bound(Mode.AS2_SIC, cfg.replace(alpha_12=5.0))
    assert convergence_bound(Mode.GS_HD, cfg)
    assert convergence_bound(Mode.AS2_II, cfg.replace(alpha_12=0.0))


def test_system_is_max_of_components(cfg):
    for a12 in (0.1, 0.5):
        c = cfg.replace(alpha_12=a12)
        sys_res = outage_system(Detector.II, c)
        parts = [outage_gs_hbd(c).probability, outage_as2_ii(c).probability]
        assert sys_res.probability == max(parts)
        assert sys_res.mode is Mode.SYSTEM
    ideal = cfg.replace(alpha_gg=0.0, alpha_12=0.0)
    assert outage_system("ii", ideal).probability == max(
        outage_gs_hbd(ideal).probability, outage_as2_ii(ideal).probability)
    hd = outage_system(Detector.HD, cfg)
    assert hd.probability == outage_hd(Node.GS, cfg).probability


def test_system_dominated_by_ii_at_weak_interference(cfg):
    for a12 in (0.1, 0.5):
        for db in range(0, 31, 2):
            c = cfg.replace(alpha_12=a12).with_omega_db(db)
            assert outage_system(Detector.II, c).probability == outage_as2_ii(c).probability


def test_monotone_in_omega_with_error_floor(cfg):
    dbs = range(0, 31, 2)
    for mode, c in ((Mode.GS_HD, cfg), (Mode.GS_HBD, cfg.replace(epsilon=0.01)),
                    (Mode.AS2_II, cfg.replace(alpha_12=0.5)), (Mode.AS2_SIC, cfg.replace(alpha_12=5.0))):
        ps = [outage(mode, c.with_omega_db(db)).probability for db in dbs]
        assert all(b <= a for a, b in zip(ps, ps[1:])), mode
    # HBD curves flatten to a positive floor, HD keeps falling
    gs = [outage_gs_hbd(cfg.with_omega_db(db)).probability for db in (40, 50, 60)]
    assert gs[-1] > 0 and gs[-1] / gs[0] > 0.5
    hd = [outage_hd(Node.GS, cfg.with_omega_db(db)).probability for db in (40, 60)]
    assert hd[1] / hd[0] < 0.02


def test_ii_nondecreasing_in_alpha(cfg):
    c = cfg.with_omega_db(10)
    ps = [outage_as2_ii(c.replace(alpha_12=a)).probability for a in (0.0, 0.05, 0.1, 0.3, 0.5)]
    assert all(b >= a for a, b in zip(ps, ps[1:]))


def test_probabilities_in_unit_interval(cfg):
    ctl = SeriesControl(max_terms=600)
    for db in (-10, 0, 10, 30):
        for mode, c in ((Mode.GS_HBD, cfg), (Mode.GS_HD, cfg), (Mode.AS2_HD, cfg),
                        (Mode.AS2_II, cfg.replace(alpha_12=0.1)), (Mode.AS2_SIC, cfg.replace(alpha_12=10.0))):
            p = outage(mode, c.with_omega_db(db), ctl).probability
            assert 0.0 <= p <= 1.0


def test_unequal_rate_split(cfg):
    c = cfg.replace(r1_hbd=0.8, rgs_hbd=0.2, alpha_12=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DivergenceWarning)
        res = outage_as2_sic(c)
    assert res.probability == pytest.approx(sic_quadrature(c), abs=1e-9)
