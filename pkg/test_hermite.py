"""Largest Hermite zeros"""

import math

import pytest

from intermittency.common.errors import DomainError
from intermittency.hermite import carlen_kree_bound, hermite_he, largest_hermite_zero, newton_correction


def test_low_orders():
    assert largest_hermite_zero(2) == pytest.approx(1.0, abs=1e-12)
    assert largest_hermite_zero(4) == pytest.approx(math.sqrt(3 + math.sqrt(6)), abs=1e-12)


@pytest.mark.parametrize("p", [2, 4, 6, 10, 20])
def test_is_a_root(p):
    z = largest_hermite_zero(p)
    assert abs(newton_correction(p, z)) < 1e-12 * z


def test_below_carlen_kree_and_ratio_increasing():
    ratios = []
    for p in range(2, 201, 2):
        z = largest_hermite_zero(p)
        assert z <= carlen_kree_bound(p)
        ratios.append(z / carlen_kree_bound(p))
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_large_order_is_finite():
    assert math.isfinite(largest_hermite_zero(1000))


@pytest.mark.parametrize("p", [0, 3, 1002, 2.0])
def test_invalid_orders(p):
    with pytest.raises(DomainError):
        largest_hermite_zero(p)


def test_recurrence_values():
    assert hermite_he(0, 1.7) == 1.0
    assert hermite_he(3, 2.0) == pytest.approx(2.0 ** 3 - 3 * 2.0)


def test_sixth_order():
    # largest root of x^6 - 15 x^4 + 45 x^2 - 15
    assert largest_hermite_zero(6) == pytest.approx(3.324257434, abs=1e-6)


@pytest.mark.parametrize("p", [2, 4, 6, 10, 20, 50])
def test_sign_change_and_no_larger_root(p):
    z = largest_hermite_zero(p)
    assert hermite_he(p, z - 1e-6) * hermite_he(p, z + 1e-6) < 0
    assert all(hermite_he(p, z + d) > 0 for d in (0.01, 0.1, 1.0, 5.0))
