"""Levy symbol evaluation and recurrence / local-time classification"""

import math

import numpy as np
import pytest

from intermittency.common.errors import ClassificationIndeterminateError, ConfigError, SymbolEvaluationError
from intermittency.levy_symbol import (
    BrownianScaled,
    Custom,
    Recurrence,
    StableSym,
    SumStable,
    TabulatedExponent,
    classify_recurrence,
    has_local_times,
    re_psi,
)
from intermittency.upsilon import UpsilonEvaluator, upsilon_of

SYMBOLS = [
    BrownianScaled(1.0),
    StableSym(1.0, 2.0),
    StableSym(0.5, 1.5),
    StableSym(2.0, 0.7),
    SumStable(((1.0, 0.5), (1.0, 1.5))),
    Custom(lambda x: x ** 1.5 + x ** 0.5, declared_small=0.5, declared_large=1.5),
]


def test_stable_value():
    assert re_psi(StableSym(1.0, 2.0), 3.0) == 9.0


def test_sum_stable_value():
    assert re_psi(SumStable(((1.0, 0.5), (1.0, 1.5))), 1.0) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("sym", SYMBOLS)
def test_symmetric_nonnegative_zero_at_origin(sym):
    xi = np.linspace(-20.0, 20.0, 81)
    values = sym.re_psi(xi)
    assert np.all(values >= 0)
    np.testing.assert_array_equal(values, sym.re_psi(-xi))
    assert sym.re_psi(0.0) == 0.0


def test_array_and_scalar_agree():
    sym = StableSym(1.0, 1.5)
    xi = np.array([0.5, 2.0])
    np.testing.assert_allclose(sym.re_psi(xi), [sym.re_psi(0.5), sym.re_psi(2.0)])
    assert isinstance(sym.re_psi(2.0), float)


@pytest.mark.parametrize("alpha", np.linspace(0.1, 2.0, 20))
def test_stable_classification_follows_index(alpha):
    sym = StableSym(1.0, float(alpha))
    expected = Recurrence.RECURRENT if alpha >= 1 else Recurrence.TRANSIENT
    assert classify_recurrence(sym) is expected
    assert has_local_times(sym) == (alpha > 1)


def test_reference_values():
    assert classify_recurrence(StableSym(1.0, 1.5)) is Recurrence.RECURRENT
    assert classify_recurrence(BrownianScaled(1.0)) is Recurrence.RECURRENT
    mixed = SumStable(((1.0, 0.5), (1.0, 1.5)))
    assert classify_recurrence(mixed) is Recurrence.TRANSIENT
    assert has_local_times(mixed)
    assert has_local_times(StableSym(1.0, 1.5))
    assert not has_local_times(StableSym(1.0, 1.0))


@pytest.mark.parametrize("sym", SYMBOLS)
def test_local_times_imply_finite_upsilon(sym):
    if has_local_times(sym):
        for beta in (0.1, 1.0, 10.0):
            assert math.isfinite(upsilon_of(UpsilonEvaluator(sym), beta))


def test_custom_negative_value_names_frequency():
    sym = Custom(lambda x: x - 2.0, declared_small=1.0, declared_large=1.0, label="shifted")
    with pytest.raises(SymbolEvaluationError, match="xi=1.0"):
        sym.re_psi(np.array([1.0, 3.0]))


def test_custom_nan_rejected():
    sym = Custom(lambda x: np.full_like(x, np.nan), declared_small=2.0, declared_large=2.0)
    with pytest.raises(SymbolEvaluationError):
        sym.re_psi(1.0)


def test_custom_estimated_exponents():
    sym = Custom(lambda x: x ** 2)
    assert classify_recurrence(sym) is Recurrence.RECURRENT
    assert has_local_times(sym)


def test_custom_boundary_slope_is_indeterminate():
    sym = Custom(lambda x: 3.0 * x)
    with pytest.raises(ClassificationIndeterminateError):
        classify_recurrence(sym)
    with pytest.raises(ClassificationIndeterminateError):
        has_local_times(sym)


def test_sum_stable_term_limits():
    with pytest.raises(ConfigError, match="generator.terms"):
        SumStable(tuple((1.0, 1.5) for _ in range(5)))
    with pytest.raises(ConfigError):
        SumStable(())


@pytest.mark.parametrize("kwargs", [{"kappa": 0.0, "alpha": 1.5}, {"kappa": 1.0, "alpha": 2.5},
                                    {"kappa": 1.0, "alpha": 0.0}])
def test_stable_parameter_validation(kwargs):
    with pytest.raises(ConfigError):
        StableSym(**kwargs)


def test_tail_term_of_sum():
    assert SumStable(((2.0, 0.5), (3.0, 1.5))).tail_term() == (3.0, 1.5)


def test_tabulated_power_law_is_exact():
    xi = np.logspace(-2, 2, 9)
    table = TabulatedExponent(tuple(xi), tuple(xi ** 1.5), 1.5, 1.5)
    points = np.array([1e-4, 0.03, 0.5, 7.0, 1e3])
    np.testing.assert_allclose(table(points), points ** 1.5, rtol=1e-12)
    sym = Custom(table, table.small_exponent, table.large_exponent, label="tabulated")
    assert sym.re_psi(0.0) == 0.0
    assert classify_recurrence(sym) is Recurrence.RECURRENT
    assert has_local_times(sym)
    expected = upsilon_of(UpsilonEvaluator(StableSym(1.0, 1.5)), 0.5)
    assert upsilon_of(UpsilonEvaluator(sym), 0.5) == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("xi, values, small, large, field_name", [
    ((1.0,), (1.0,), 1.0, 1.5, "generator.xi"),
    ((1.0, 2.0), (1.0,), 1.0, 1.5, "generator.xi"),
    ((2.0, 1.0), (1.0, 2.0), 1.0, 1.5, "generator.xi"),
    ((0.0, 1.0), (1.0, 2.0), 1.0, 1.5, "generator.xi"),
    ((1.0, 2.0), (1.0, 0.0), 1.0, 1.5, "generator.re_psi"),
    ((1.0, 2.0), (1.0, 2.0), 0.0, 1.5, "generator.small_exponent"),
    ((1.0, 2.0), (1.0, 2.0), 1.0, -1.0, "generator.large_exponent"),
])
def test_tabulated_validation(xi, values, small, large, field_name):
    with pytest.raises(ConfigError) as info:
        TabulatedExponent(xi, values, small, large)
    assert info.value.field == field_name
