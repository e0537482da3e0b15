"""
Levy Symbols
Characteristic exponents of symmetric one-dimensional Levy processes and the
recurrence / local-time classification of their symmetrization.

The normalization is E exp(i xi X_t) = exp(-t Psi(xi)); the generator acts as
the Fourier multiplier -Psi. Only the real part is exposed: the symmetrized
process has exponent 2 Re Psi and nothing downstream needs Im Psi.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from intermittency.common.errors import (
    ClassificationIndeterminateError,
    ConfigError,
    SymbolEvaluationError,
)

logger = logging.getLogger(__name__)

MAX_SUM_TERMS = 4

# Sample points for the log-log slope of a Custom exponent without declared behavior
_SMALL_SAMPLES = (1e-6, 1e-5, 1e-4)
_LARGE_SAMPLES = (1e4, 1e5, 1e6)
_SLOPE_MARGIN = 0.05


class Recurrence(str, Enum):
    RECURRENT = "recurrent"
    TRANSIENT = "transient"


class LevySymbol(ABC):
    """Real part of a Levy exponent, evaluable on scalars and numpy arrays"""

    name = "levy"

    def re_psi(self, xi):
        """Evaluate Re Psi(xi); symmetric in xi and zero at the origin"""
        x = np.abs(np.asarray(xi, dtype=float))
        values = self._evaluate(x)
        if np.ndim(values) == 0:
            return float(values)
        return values

    @abstractmethod
    def _evaluate(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def power_terms(self) -> Optional[Tuple[Tuple[float, float], ...]]:
        """(kappa, alpha) pairs for closed-form variants, None otherwise"""

    @property
    def small_exponent(self) -> Optional[float]:
        """Power-law exponent of Re Psi as xi -> 0"""
        terms = self.power_terms()
        return min(alpha for _, alpha in terms) if terms else None

    @property
    def large_exponent(self) -> Optional[float]:
        """Power-law exponent of Re Psi as xi -> infinity"""
        terms = self.power_terms()
        return max(alpha for _, alpha in terms) if terms else None

    def tail_term(self) -> Tuple[float, float]:
        """(kappa, alpha) with Re Psi(xi) ~ kappa |xi|^alpha for large xi"""
        terms = self.power_terms()
        if terms:
            alpha = max(a for _, a in terms)
            kappa = sum(k for k, a in terms if a == alpha)
            return kappa, alpha
        alpha = self.large_exponent
        if alpha is None:
            alpha = _estimate_slope(self, _LARGE_SAMPLES)
        top = _LARGE_SAMPLES[-1]
        return self.re_psi(top) / top ** alpha, alpha

    def stable_params(self) -> Optional[Tuple[float, float]]:
        """(kappa, alpha) when the symbol is a single stable term"""
        terms = self.power_terms()
        if terms and len(terms) == 1:
            return terms[0]
        return None

    @abstractmethod
    def describe(self) -> dict:
        ...


@dataclass(frozen=True)
class BrownianScaled(LevySymbol):
    """Psi(xi) = kappa xi^2, the generator kappa d^2/dx^2"""

    kappa: float
    name = "brownian"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigError("diffusivity must be positive", field="generator.kappa")

    def _evaluate(self, x):
        return self.kappa * x * x

    def power_terms(self):
        return ((self.kappa, 2.0),)

    def describe(self):
        return {"variant": self.name, "kappa": self.kappa}


@dataclass(frozen=True)
class StableSym(LevySymbol):
    """Psi(xi) = kappa |xi|^alpha, the generator -kappa (-Laplacian)^(alpha/2)"""

    kappa: float
    alpha: float
    name = "stable"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigError("scale must be positive", field="generator.kappa")
        if not 0 < self.alpha <= 2:
            raise ConfigError("index must lie in (0, 2]", field="generator.alpha")

    def _evaluate(self, x):
        if self.alpha == 2:
            return self.kappa * x * x
        return self.kappa * x ** self.alpha

    def power_terms(self):
        return ((self.kappa, float(self.alpha)),)

    def describe(self):
        return {"variant": self.name, "kappa": self.kappa, "alpha": self.alpha}


@dataclass(frozen=True)
class SumStable(LevySymbol):
    """Psi(xi) = sum_i kappa_i |xi|^alpha_i with one to four terms"""

    terms: Tuple[Tuple[float, float], ...]
    name = "sum_stable"

    def __post_init__(self):
        terms = tuple((float(k), float(a)) for k, a in self.terms)
        object.__setattr__(self, "terms", terms)
        if not 1 <= len(terms) <= MAX_SUM_TERMS:
            raise ConfigError(f"between 1 and {MAX_SUM_TERMS} terms required, got {len(terms)}",
                              field="generator.terms")
        for i, (kappa, alpha) in enumerate(terms):
            if not kappa > 0:
                raise ConfigError("scale must be positive", field=f"generator.terms[{i}]")
            if not 0 < alpha <= 2:
                raise ConfigError("index must lie in (0, 2]", field=f"generator.terms[{i}]")

    def _evaluate(self, x):
        total = np.zeros_like(x, dtype=float)
        for kappa, alpha in self.terms:
            total = total + kappa * x ** alpha
        return total

    def power_terms(self):
        return self.terms

    def describe(self):
        return {"variant": self.name, "terms": [list(t) for t in self.terms]}


@dataclass(frozen=True)
class Custom(LevySymbol):
    """User-supplied Re Psi with declared power-law behavior at 0 and infinity.

    The evaluator must accept numpy arrays of nonnegative frequencies. Declared
    exponents make both classifications decidable; without them the exponents
    are estimated numerically and ambiguous slopes are rejected.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    declared_small: Optional[float] = None
    declared_large: Optional[float] = None
    label: str = field(default="custom")
    name = "custom"

    def _evaluate(self, x):
        values = np.asarray(self.evaluator(x), dtype=float)
        values = np.where(x == 0, 0.0, values)
        bad = np.isnan(values) | (values < 0)
        if np.any(bad):
            where = float(np.asarray(x)[bad].flat[0]) if np.ndim(x) else float(x)
            raise SymbolEvaluationError(
                f"custom exponent '{self.label}' returned an invalid real part at xi={where}")
        return values

    def power_terms(self):
        return None

    @property
    def small_exponent(self):
        return self.declared_small

    @property
    def large_exponent(self):
        return self.declared_large

    def describe(self):
        return {"variant": self.name, "label": self.label,
                "small_exponent": self.declared_small, "large_exponent": self.declared_large}


@dataclass(frozen=True)
class TabulatedExponent:
    """Re Psi from a table, interpolated in log-log coordinates.

    Outside the table the exponent continues as a power law with the given small
    and large exponents. Picklable, so Custom symbols built on it can cross to
    worker processes.
    """

    xi: Tuple[float, ...]
    values: Tuple[float, ...]
    small_exponent: float
    large_exponent: float

    def __post_init__(self):
        xi = tuple(float(v) for v in self.xi)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "values", values)
        if len(xi) < 2 or len(xi) != len(values):
            raise ConfigError("need at least two (xi, Re Psi) pairs of equal length", field="generator.xi")
        if not xi[0] > 0 or any(b <= a for a, b in zip(xi, xi[1:])):
            raise ConfigError("frequencies must be positive and strictly increasing", field="generator.xi")
        if not all(v > 0 for v in values):
            raise ConfigError("tabulated values must be positive", field="generator.re_psi")
        if not self.small_exponent > 0:
            raise ConfigError("exponent at the origin must be positive", field="generator.small_exponent")
        if not self.large_exponent > 0:
            raise ConfigError("exponent at infinity must be positive", field="generator.large_exponent")

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        lo, hi = self.xi[0], self.xi[-1]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inside = np.exp(np.interp(np.log(x), np.log(self.xi), np.log(self.values)))
            below = self.values[0] * (x / lo) ** self.small_exponent
            above = self.values[-1] * (x / hi) ** self.large_exponent
        return np.where(x < lo, below, np.where(x > hi, above, inside))


def _estimate_slope(sym: LevySymbol, points) -> float:
    values = [sym.re_psi(p) for p in points]
    if min(values) <= 0:
        return math.nan
    slopes = [
        (math.log(values[i + 1]) - math.log(values[i])) / (math.log(points[i + 1]) - math.log(points[i]))
        for i in range(len(points) - 1)
    ]
    # A drifting slope means the sampled range is not yet asymptotic
    if abs(slopes[0] - slopes[-1]) > _SLOPE_MARGIN:
        return math.nan
    return float(np.mean(slopes))


def _decide(sym: LevySymbol, exponent: Optional[float], points, what: str) -> float:
    if exponent is not None:
        return exponent
    estimate = _estimate_slope(sym, points)
    if not math.isfinite(estimate) or abs(estimate - 1.0) < _SLOPE_MARGIN:
        raise ClassificationIndeterminateError(
            f"cannot decide {what} for '{getattr(sym, 'label', sym.name)}': declare the power-law exponent")
    logger.debug("estimated %s exponent %.4f for %s", what, estimate, sym.name)
    return estimate


def re_psi(sym: LevySymbol, xi):
    return sym.re_psi(xi)


def classify_recurrence(sym: LevySymbol) -> Recurrence:
    """Recurrent iff the integral of 1/Re Psi over [-1, 1] diverges.

    Near the origin Re Psi behaves like |xi|^a with a the smallest exponent, so
    the integral diverges exactly when a >= 1.
    """
    exponent = _decide(sym, sym.small_exponent, _SMALL_SAMPLES, "recurrence")
    return Recurrence.RECURRENT if exponent >= 1 else Recurrence.TRANSIENT


def has_local_times(sym: LevySymbol) -> bool:
    """True iff Upsilon(beta) is finite, i.e. the largest exponent exceeds 1"""
    exponent = _decide(sym, sym.large_exponent, _LARGE_SAMPLES, "local times")
    return exponent > 1
