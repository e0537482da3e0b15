"""Lyapunov bounds, verdicts, thresholds, modulus bounds and the bounds report"""

import json
import math

import pytest

from intermittency.bounds import (
    BoundedProfile,
    BoundsReport,
    Clipped,
    Constant,
    DeadZone,
    General,
    Linear,
    ModelSpec,
    Sine,
    SublinearRequest,
    Verdict,
    anderson_verdict,
    carlen_kree_theta,
    exact_anderson_gamma,
    full_report,
    gamma2_lower_bound,
    gamma_p_upper_bound,
    holder_indices,
    ratio_check,
    spatial_modulus_bound,
    sublinear_sufficient_eta,
    temporal_modulus_bound,
    transient_smallness_threshold,
)
from intermittency.common.errors import ConfigError, DomainError, UnsupportedModelError
from intermittency.common.result_writers import decode_value, encode_value
from intermittency.hermite import largest_hermite_zero
from intermittency.levy_symbol import BrownianScaled, Recurrence, StableSym, SumStable
from intermittency.upsilon import stable_nu

TRANSIENT = SumStable(((1.0, 0.5), (1.0, 1.5)))


def pam(alpha=2.0, lam=1.0, kappa=1.0, eta=1.0):
    return ModelSpec(StableSym(kappa, alpha), Linear(lam), Constant(eta))


@pytest.mark.parametrize("alpha", [1.25, 1.5, 2.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("kappa", [0.5, 1.0])
def test_upper_and_lower_pinch_at_two(alpha, lam, kappa):
    m = pam(alpha, lam, kappa)
    upper = gamma_p_upper_bound(m, 2)
    lower = gamma2_lower_bound(m)
    assert lower.applicable
    assert upper == pytest.approx(lower.value, rel=1e-6)
    if alpha == 2.0:
        assert upper == pytest.approx(lam ** 4 / (8 * kappa), rel=1e-8)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 2.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("kappa", [0.5, 1.0])
@pytest.mark.parametrize("p", [2, 4, 6])
def test_upper_bound_closed_form(alpha, lam, kappa, p):
    z = largest_hermite_zero(p)
    expected = 0.5 * p * (stable_nu(alpha) ** alpha * (z * lam) ** (2 * alpha) / kappa) ** (1 / (alpha - 1))
    assert gamma_p_upper_bound(pam(alpha, lam, kappa), p) == pytest.approx(expected, rel=1e-6)


def test_fourth_moment_upper_bound_brownian():
    assert gamma_p_upper_bound(pam(), 4) == pytest.approx((3 + math.sqrt(6)) ** 2 / 4, rel=1e-12)


def test_carlen_kree_variant_dominates():
    m = pam(1.5)
    for p in (2, 4, 8):
        assert gamma_p_upper_bound(m, p, carlen_kree=True) >= gamma_p_upper_bound(m, p)


def test_upper_bound_rejects_odd_order_and_no_local_times():
    with pytest.raises(DomainError):
        gamma_p_upper_bound(pam(), 3)
    with pytest.raises(UnsupportedModelError, match="no solution theory"):
        gamma_p_upper_bound(pam(alpha=1.0), 2)


def test_exact_anderson_values():
    assert exact_anderson_gamma(2, 1.0, 1.0) == pytest.approx(0.125)
    assert exact_anderson_gamma(4, 1.0, 1.0) == pytest.approx(1.25)
    assert exact_anderson_gamma(6, 1.0, 1.0) == pytest.approx(4.375)
    assert exact_anderson_gamma(2, 2.0, 2.0) == pytest.approx(1.0)


@pytest.mark.parametrize("p", range(2, 101, 2))
def test_ratio_check_within_bounds(p):
    theta, ratio = ratio_check(p, 1.3, 0.7)
    assert theta == pytest.approx(carlen_kree_theta(p, 1.3, 0.7))
    assert 1.0 <= ratio <= 48 * (1 + 1 / (p * p - 1)) * (1 + 1e-12)


@pytest.mark.parametrize("p", [2, 4])
def test_ratio_check_upper_equality(p):
    _, ratio = ratio_check(p, 1.0, 1.0)
    assert ratio == pytest.approx(48 * (1 + 1 / (p * p - 1)), rel=1e-12)


def test_lower_bound_hypotheses():
    zero_data = gamma2_lower_bound(pam(eta=0.0))
    assert zero_data.value == 0 and not zero_data.applicable
    bounded = gamma2_lower_bound(ModelSpec(BrownianScaled(1.0), Sine(1.0, 0.5), Constant(1.0)))
    assert bounded.value == 0 and "inf |sigma(x)/x| = 0" in bounded.reason
    saturated = gamma2_lower_bound(ModelSpec(TRANSIENT, Linear(1.0), Constant(1.0)))
    assert saturated.value == 0 and saturated.applicable


def test_anderson_verdicts():
    assert anderson_verdict(pam(1.5)).verdict is Verdict.YES
    weak = anderson_verdict(ModelSpec(TRANSIENT, Linear(1.0), Constant(1.0)))
    assert weak.verdict is Verdict.NO
    assert weak.upsilon_sup == pytest.approx(0.5, rel=1e-7)
    strong = anderson_verdict(ModelSpec(TRANSIENT, Linear(2.0), Constant(1.0)))
    assert strong.verdict is Verdict.YES
    assert strong.gamma2 > 0


def test_anderson_verdict_needs_linear_sigma():
    with pytest.raises(DomainError):
        anderson_verdict(ModelSpec(BrownianScaled(1.0), Sine(1.0, 0.5), Constant(1.0)))


def test_transient_smallness_threshold():
    assert transient_smallness_threshold(TRANSIENT, 2) == pytest.approx(math.sqrt(2), rel=1e-7)
    assert transient_smallness_threshold(TRANSIENT, 4) < transient_smallness_threshold(TRANSIENT, 2)
    with pytest.raises(DomainError):
        transient_smallness_threshold(StableSym(1.0, 1.5), 2)


def test_below_smallness_threshold_upper_bound_vanishes():
    delta = transient_smallness_threshold(TRANSIENT, 4)
    m = ModelSpec(TRANSIENT, Linear(0.9 * delta), Constant(1.0))
    assert gamma_p_upper_bound(m, 4) == 0.0


def test_sublinear_threshold():
    m = ModelSpec(BrownianScaled(1.0), DeadZone(2.0, 1.0), Constant(10.0))
    A = m.sigma.linearity_onset(1.0)
    assert A == pytest.approx(2.0)
    threshold = sublinear_sufficient_eta(m, A, 1.0, 1.0 / 128)
    assert threshold.upsilon == pytest.approx(4.0, rel=1e-14)
    assert threshold.eta0 == pytest.approx(4.0, rel=1e-14)
    assert threshold.prose_eta == pytest.approx(8.0, rel=1e-14)


def test_sublinear_boundary_is_strict():
    m = ModelSpec(BrownianScaled(1.0), DeadZone(2.0, 1.0), Constant(10.0))
    with pytest.raises(DomainError, match="strictly"):
        sublinear_sufficient_eta(m, 2.0, 1.0, 1.0 / 8)


def test_sublinear_needs_recurrence_and_valid_slope():
    dead = DeadZone(2.0, 1.0)
    with pytest.raises(DomainError):
        sublinear_sufficient_eta(ModelSpec(TRANSIENT, dead, Constant(1.0)), 2.0, 1.0, 0.01)
    with pytest.raises(DomainError):
        sublinear_sufficient_eta(ModelSpec(BrownianScaled(1.0), dead, Constant(1.0)), 2.0, 3.0, 0.01)


def test_nonlinearity_constants():
    assert Linear(-1.5).lip == 1.5 and Linear(-1.5).q_inf == 1.5
    sine = Sine(1.0, 0.5)
    assert (sine.sigma0, sine.lip, sine.q_inf, sine.bound_sup) == (1.0, 0.5, 0.0, 1.5)
    clipped = Clipped(2.0, 3.0)
    assert clipped.bound_sup == 3.0 and clipped.q_asymp == 0.0
    dead = DeadZone(2.0, 0.0)
    assert dead.q_inf == 2.0


@pytest.mark.parametrize("factory", [lambda: Linear(0.0), lambda: Sine(1.0, 1.0), lambda: Sine(1.0, 0.0),
                                     lambda: Clipped(1.0, -1.0), lambda: DeadZone(1.0, -0.5),
                                     lambda: General(0.0, 1.0, 2.0, 0.5), lambda: Constant(-1.0),
                                     lambda: BoundedProfile(2.0, 1.0), lambda: BoundedProfile(0.0, 1.0, "saw")])
def test_invalid_model_pieces(factory):
    with pytest.raises(ConfigError):
        factory()


def test_general_is_not_evaluable():
    g = General(0.0, 1.0, 0.5, 0.5)
    assert gamma_p_upper_bound(ModelSpec(BrownianScaled(1.0), g, Constant(1.0)), 2) == pytest.approx(0.125)
    with pytest.raises(UnsupportedModelError):
        g(1.0)


def test_holder_indices():
    assert holder_indices(StableSym(1.0, 2.0)) == pytest.approx((0.25, 0.5))
    assert holder_indices(StableSym(1.0, 1.5)) == pytest.approx((1 / 6, 0.5))
    assert holder_indices(StableSym(1.0, 2.0), theta=0.2) == pytest.approx((0.2 / 2.2, 0.2))


def test_spatial_modulus_bound_grows_with_lag():
    m = pam()
    values = [spatial_modulus_bound(m, 2, 1.0, delta, 1.0) for delta in (0.0, 0.01, 0.1, 1.0)]
    assert values[0] == 0.0
    assert all(a < b for a, b in zip(values, values[1:]))
    # half-power scaling at small lags for the heat generator
    ratio = spatial_modulus_bound(m, 2, 1.0, 0.04, 1.0) / spatial_modulus_bound(m, 2, 1.0, 0.01, 1.0)
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_temporal_modulus_bound():
    m = pam()
    assert temporal_modulus_bound(m, 2, 1.0, 1.0, 1.0, 1.0) == 0.0
    short = temporal_modulus_bound(m, 2, 1.0, 1.0, 1.01, 1.0)
    longer = temporal_modulus_bound(m, 2, 1.0, 1.0, 1.1, 1.0)
    assert 0 < short < longer
    with pytest.raises(DomainError):
        temporal_modulus_bound(m, 2, 1.0, 2.0, 1.0, 1.0)


def test_full_report_pam():
    report = full_report(pam(), [2, 4, 6], holder_theta=None)
    assert report.weakly_intermittent is Verdict.YES
    assert report.gamma2_lower == pytest.approx(0.125, rel=1e-12)
    assert report.gamma_p_upper[2] == pytest.approx(0.125, rel=1e-12)
    assert report.exact_anderson == pytest.approx({2: 0.125, 4: 1.25, 6: 4.375})
    assert report.recurrence is Recurrence.RECURRENT
    assert report.upsilon_sup == math.inf
    assert report.holder_exponents == pytest.approx((0.25, 0.5))
    assert report.errors == {}


def test_full_report_transient_is_not_intermittent():
    report = full_report(ModelSpec(TRANSIENT, Linear(1.0), Constant(1.0)), [2, 4])
    assert report.weakly_intermittent is Verdict.NO
    assert report.delta_p[2] == pytest.approx(math.sqrt(2), rel=1e-7)
    assert report.gamma2_lower == 0.0


def test_full_report_bounded_sigma_is_subdiffusive():
    report = full_report(ModelSpec(BrownianScaled(1.0), Sine(1.0, 0.5), Constant(0.0)), [2])
    assert report.weakly_intermittent is Verdict.UNKNOWN
    assert report.subdiffusive
    assert report.subdiffusive_exponent == pytest.approx(0.5)


def test_full_report_sublinear():
    m = ModelSpec(BrownianScaled(1.0), DeadZone(2.0, 1.0), Constant(10.0))
    report = full_report(m, [2], sublinear=SublinearRequest(q0=1.0, beta=1.0 / 128))
    assert report.sublinear_eta0 == pytest.approx(4.0)
    failed = full_report(m, [2], sublinear=SublinearRequest(q0=1.0, beta=1.0 / 8))
    assert failed.sublinear_eta0 is None
    assert "sublinear_eta0" in failed.errors


def test_full_report_no_local_times():
    with pytest.raises(UnsupportedModelError, match="no solution theory"):
        full_report(pam(alpha=1.0), [2])


def test_report_survives_json():
    report = full_report(ModelSpec(TRANSIENT, Linear(2.0), Constant(1.0)), [2, 4], holder_theta=0.5)
    text = json.dumps(encode_value(report.to_dict()), allow_nan=False)
    restored = BoundsReport.from_dict(decode_value(json.loads(text)))
    assert restored == report
    rows = report.csv_rows("transient")
    assert [row["p"] for row in rows] == [2, 4]


@pytest.mark.parametrize("m", [
    pam(alpha=1.5),
    ModelSpec(BrownianScaled(1.0), Linear(1.0), Constant(1.0)),
    ModelSpec(TRANSIENT, Linear(2.0), Constant(1.0)),
])
def test_upper_bound_per_order_is_nondecreasing(m):
    per_order = [gamma_p_upper_bound(m, p) / p for p in range(2, 41, 2)]
    assert all(b >= a for a, b in zip(per_order, per_order[1:]))
    assert per_order[0] > 0


@pytest.mark.parametrize("p", [2, 4])
def test_brownian_upper_bound_scaling(p):
    base = gamma_p_upper_bound(pam(), p)
    assert gamma_p_upper_bound(pam(kappa=2.0), p) == pytest.approx(base / 2, rel=1e-8)
    assert gamma_p_upper_bound(pam(lam=2.0), p) == pytest.approx(base * 16, rel=1e-8)


def test_spatial_modulus_bound_half_power_law():
    m = pam()
    scaled = [spatial_modulus_bound(m, 2, 1.0, delta, 1.0) / delta ** 0.5 for delta in (0.1, 0.05, 0.025)]
    assert max(scaled) / min(scaled) < 1.05


def test_temporal_modulus_bound_quarter_power_law():
    m = pam()
    scaled = [temporal_modulus_bound(m, 2, 1.0, 1.0, 1.0 + h, 1.0) / h ** 0.25 for h in (0.1, 0.05, 0.025)]
    assert max(scaled) / min(scaled) < 1.25
