"""Transition densities, L2 norms, dissipation and the periodic semigroup"""

import math

import numpy as np
import pytest
from scipy import integrate

from intermittency.common.errors import DomainError, ResolutionError
from intermittency.kernel import (
    FrequencyGrid,
    KernelEvaluator,
    density,
    density_on_grid,
    dissipation_integral,
    l2_norm_sq,
    semigroup_apply,
    semigroup_spatial_modulus,
    spectral_multiplier,
)
from intermittency.levy_symbol import BrownianScaled, Custom, StableSym, SumStable
from intermittency.upsilon import UpsilonEvaluator, upsilon_of


def test_brownian_density_at_origin():
    assert density(KernelEvaluator(BrownianScaled(1.0)), 1.0, 0.0) == pytest.approx((4 * math.pi) ** -0.5, rel=1e-14)


def test_fourier_inversion_matches_gaussian():
    x = np.linspace(-4.0, 4.0, 17)
    inverted = density(KernelEvaluator(StableSym(0.5, 2.0)), 2.0, x)
    exact = density(KernelEvaluator(BrownianScaled(0.5)), 2.0, x)
    np.testing.assert_allclose(inverted, exact, atol=1e-9)


@pytest.mark.parametrize("sym", [StableSym(1.0, 1.5), SumStable(((1.0, 0.5), (1.0, 1.5)))])
def test_grid_density_has_unit_mass(sym):
    x, p = density_on_grid(KernelEvaluator(sym), 1.0)
    assert p.sum() * (x[1] - x[0]) == pytest.approx(1.0, abs=1e-12)
    assert np.argmax(p) == x.size // 2


def test_coarse_inversion_grid_refused():
    ev = KernelEvaluator(StableSym(1.0, 1.5), grid=FrequencyGrid(xi_max=1.0))
    with pytest.raises(ResolutionError):
        density(ev, 1.0, 0.0)


def test_density_needs_positive_time():
    with pytest.raises(DomainError):
        density(KernelEvaluator(StableSym(1.0, 1.5)), 0.0, 0.0)


def test_brownian_l2_norm():
    assert l2_norm_sq(KernelEvaluator(BrownianScaled(1.0)), 1.0) == pytest.approx((8 * math.pi) ** -0.5, rel=1e-14)


@pytest.mark.parametrize("s", [0.01, 1.0, 50.0])
def test_l2_norm_quadrature_matches_stable_closed_form(s):
    custom = KernelEvaluator(Custom(lambda x: x ** 1.5, declared_small=1.5, declared_large=1.5))
    stable = KernelEvaluator(StableSym(1.0, 1.5))
    assert l2_norm_sq(custom, s) == pytest.approx(l2_norm_sq(stable, s), rel=1e-6)


def test_l2_norm_matches_grid_density():
    ev = KernelEvaluator(StableSym(1.0, 1.5))
    x, p = density_on_grid(ev, 0.5)
    assert np.sum(p * p) * (x[1] - x[0]) == pytest.approx(l2_norm_sq(ev, 0.5), rel=1e-6)


def test_brownian_dissipation():
    assert dissipation_integral(KernelEvaluator(BrownianScaled(2.0)), 3.0) == pytest.approx(
        math.sqrt(3.0 / (2 * math.pi * 2.0)), rel=1e-14)


def test_dissipation_quadrature_matches_closed_form():
    custom = KernelEvaluator(Custom(lambda x: x ** 1.5, declared_small=1.5, declared_large=1.5))
    stable = KernelEvaluator(StableSym(1.0, 1.5))
    assert dissipation_integral(custom, 2.0) == pytest.approx(dissipation_integral(stable, 2.0), rel=1e-6)


def test_dissipation_without_local_times_is_infinite():
    assert dissipation_integral(KernelEvaluator(StableSym(1.0, 1.0)), 1.0) == math.inf


def test_semigroup_keeps_constants_and_damps_modes():
    length, n = 16.0, 64
    x = np.arange(n) * length / n
    ev = KernelEvaluator(StableSym(1.0, 1.5))
    np.testing.assert_allclose(semigroup_apply(ev, 2.0, np.full(n, 3.0), length), 3.0, rtol=1e-14)
    mode = np.cos(2 * math.pi * x / length)
    expected = math.exp(-0.5 * (2 * math.pi / length) ** 1.5) * mode
    np.testing.assert_allclose(semigroup_apply(ev, 0.5, mode, length), expected, atol=1e-13)
    np.testing.assert_array_equal(semigroup_apply(ev, 0.0, mode, length), mode)


def test_spectral_multiplier_shape():
    multiplier = spectral_multiplier(BrownianScaled(1.0), 32, 8.0, 0.1)
    assert multiplier.shape == (17,)
    assert multiplier[0] == 1.0
    assert np.all(np.diff(multiplier) < 0)


def test_semigroup_spatial_modulus():
    length, n = 10.0, 100
    step_profile = (np.arange(n) < n // 2).astype(float)
    assert semigroup_spatial_modulus(step_profile, 0.5, length) == 1.0
    assert semigroup_spatial_modulus(np.full(n, 2.0), 0.5, length) == 0.0
    x = np.arange(n) * length / n
    smooth = np.sin(2 * math.pi * x / length)
    assert semigroup_spatial_modulus(smooth, 0.5, length) <= 2 * math.pi / length * 0.5


@pytest.mark.parametrize("sym", [BrownianScaled(1.0), StableSym(1.0, 1.5), SumStable(((1.0, 0.5), (1.0, 1.5)))])
def test_semigroup_property(sym):
    length, n = 16.0, 64
    ev = KernelEvaluator(sym)
    profile = np.random.default_rng(7).standard_normal(n)
    composed = semigroup_apply(ev, 0.3, semigroup_apply(ev, 0.7, profile, length), length)
    direct = semigroup_apply(ev, 1.0, profile, length)
    assert np.linalg.norm(composed - direct) <= 1e-8 * np.linalg.norm(direct)


@pytest.mark.parametrize("sym, times", [
    (StableSym(1.0, 1.5), np.logspace(-3, 3, 13)),
    (BrownianScaled(0.5), np.logspace(-3, 3, 13)),
    (SumStable(((1.0, 0.5), (1.0, 1.5))), [0.1, 1.0, 10.0]),
])
def test_l2_norm_decreases_in_time(sym, times):
    ev = KernelEvaluator(sym)
    values = [l2_norm_sq(ev, s) for s in times]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


@pytest.mark.parametrize("sym", [BrownianScaled(1.0), StableSym(1.0, 1.5)])
def test_laplace_transform_of_l2_norm_is_upsilon(sym):
    ev = KernelEvaluator(sym)
    beta = 1.0
    head, _ = integrate.quad(lambda s: math.exp(-beta * s) * l2_norm_sq(ev, s), 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(lambda s: math.exp(-beta * s) * l2_norm_sq(ev, s), 1.0, math.inf, limit=200)
    assert head + tail == pytest.approx(upsilon_of(UpsilonEvaluator(sym), beta), rel=1e-6)


def test_stable_dissipation_scales_with_time():
    ev = KernelEvaluator(StableSym(1.0, 1.5))
    for t in (1.0, 2.0, 4.0):
        ratio = dissipation_integral(ev, 2 * t) / dissipation_integral(ev, t)
        assert ratio == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-12)
    custom = KernelEvaluator(Custom(lambda x: x ** 1.5, declared_small=1.5, declared_large=1.5))
    assert dissipation_integral(custom, 2.0) / dissipation_integral(custom, 1.0) == pytest.approx(
        2.0 ** (1.0 / 3.0), rel=1e-5)


@pytest.mark.parametrize("sym", [BrownianScaled(1.0), StableSym(1.0, 1.5)])
def test_dissipation_grows_sublinearly(sym):
    ev = KernelEvaluator(sym)
    per_time = [dissipation_integral(ev, t) / t for t in (1.0, 10.0, 100.0, 1000.0)]
    assert all(b < a for a, b in zip(per_time, per_time[1:]))


@pytest.mark.parametrize("sym", [StableSym(1.0, 1.5), SumStable(((1.0, 0.5), (1.0, 1.5)))])
def test_density_is_symmetric(sym):
    x = np.linspace(0.1, 3.0, 7)
    ev = KernelEvaluator(sym)
    np.testing.assert_allclose(density(ev, 1.0, x), density(ev, 1.0, -x), rtol=1e-12)
