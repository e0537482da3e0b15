"""
Potential Integral
Upsilon(beta) = (1/2pi) * integral of d(xi) / (beta + 2 Re Psi(xi)) over the line,
its generalized inverse, and its supremum.

Stable symbols use the closed form Upsilon(beta) = nu kappa^(-1/alpha) beta^(-1+1/alpha)
with nu = csc(pi/alpha) / (2^(1/alpha) alpha). The secant printed in some references
is undefined at alpha = 2 and contradicts the Brownian value gamma(2) = lambda^4/(8 kappa);
the cosecant follows from integral_0^inf dx/(1+x^alpha) = (pi/alpha) csc(pi/alpha) and is
confirmed by the quadrature path (see test_upsilon.py).
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from intermittency.common.errors import AccuracyError, DomainError, UnsupportedModelError
from intermittency.levy_symbol import (
    LevySymbol,
    Recurrence,
    classify_recurrence,
    has_local_times,
)

logger = logging.getLogger(__name__)

INFINITY = math.inf
MAX_BRACKET_STEPS = 200
RICHARDSON_MAX_RATIO = 0.9
SUP_CROSS_CHECK = 1e-6


def stable_nu(alpha: float) -> float:
    """nu = csc(pi/alpha) / (2^(1/alpha) alpha); exact at alpha = 2"""
    if alpha == 2:
        return 2.0 ** -1.5
    return 1.0 / (math.sin(math.pi / alpha) * 2.0 ** (1.0 / alpha) * alpha)


def upsilon_closed_form(kappa: float, alpha: float, beta: float) -> float:
    if alpha <= 1:
        return INFINITY
    if alpha == 2:
        return stable_nu(2.0) / math.sqrt(kappa * beta)
    return stable_nu(alpha) * kappa ** (-1.0 / alpha) * beta ** (-1.0 + 1.0 / alpha)


@dataclass(frozen=True)
class UpsilonEvaluator:
    sym: LevySymbol
    quad_rel_tol: float = 1e-9
    tail_split: Optional[float] = None

    def __call__(self, beta: float) -> float:
        return upsilon_of(self, beta)


def _crossover(sym: LevySymbol, level: float) -> float:
    """Frequency where 2 Re Psi reaches level; 1.0 when it cannot be bracketed"""
    if level <= 0:
        return 1.0

    def gap(log_xi):
        value = 2.0 * sym.re_psi(math.exp(log_xi))
        return (math.log(value) if value > 0 else -800.0) - math.log(level)

    try:
        return math.exp(optimize.brentq(gap, -60.0, 60.0, xtol=1e-10))
    except ValueError:
        return 1.0


def _dominance_point(sym: LevySymbol) -> float:
    """Frequency beyond which the leading power term dominates the others"""
    terms = sym.power_terms()
    if not terms:
        return 1.0
    kappa_m, alpha_m = max(terms, key=lambda t: t[1])
    point = 0.0
    for kappa, alpha in terms:
        if alpha < alpha_m:
            point = max(point, (kappa / kappa_m) ** (1.0 / (alpha_m - alpha)))
    return point


def _decade_points(lo: float, hi: float) -> list:
    points = [0.0]
    edge = lo
    while edge < hi:
        points.append(edge)
        edge *= 10.0
    points.append(hi)
    return points


def half_line_integral(
    func: Callable[[float], float],
    sym: LevySymbol,
    level: float,
    rel_tol: float,
    tail: Optional[Tuple[float, float]] = None,
    split: Optional[float] = None,
    what: str = "integral",
) -> float:
    """Integrate func over [0, inf) split at the crossover scale.

    tail=(c, p) declares func(xi) ~ c xi^-p for large xi (p > 1); that power law is
    integrated analytically beyond the split and only the faster-decaying remainder
    goes through quadrature.
    """
    scale = _crossover(sym, level) if level > 0 else 1e-8
    cut = split if split is not None else 10.0 * max(scale, _dominance_point(sym), 1e-12)
    cut = max(cut, 10.0 * scale)
    lo = min(scale, cut / 10.0)
    total = 0.0
    error = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        edges = _decade_points(lo, cut)
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            value, err = integrate.quad(func, a, b, epsabs=1e-15, epsrel=rel_tol / 10.0, limit=400)
            total += value
            error += err
        if tail is not None:
            coef, power = tail
            remainder = lambda xi: func(xi) - coef * xi ** (-power)
            value, err = integrate.quad(remainder, cut, np.inf, epsabs=1e-15,
                                        epsrel=rel_tol / 10.0, limit=400)
            total += value + coef * cut ** (1.0 - power) / (power - 1.0)
            error += err
        else:
            value, err = integrate.quad(func, cut, np.inf, epsabs=1e-15,
                                        epsrel=rel_tol / 10.0, limit=400)
            total += value
            error += err
    if not math.isfinite(total) or error > rel_tol * abs(total) + 1e-13:
        raise AccuracyError(f"{what} did not reach relative tolerance {rel_tol:.1e}", achieved=error)
    return total


def upsilon_quadrature(ev: UpsilonEvaluator, beta: float) -> float:
    """Upsilon by quadrature for any symbol with local times; beta = 0 is allowed"""
    sym = ev.sym
    kappa_t, alpha_t = sym.tail_term()

    def integrand(xi):
        return 1.0 / (beta + 2.0 * sym.re_psi(xi))

    value = half_line_integral(
        integrand, sym, beta, ev.quad_rel_tol,
        tail=(1.0 / (2.0 * kappa_t), alpha_t), split=ev.tail_split,
        what=f"Upsilon({beta:g})",
    )
    return value / math.pi


def upsilon_of(ev: UpsilonEvaluator, beta: float) -> float:
    if not beta > 0:
        raise DomainError(f"Upsilon requires beta > 0, got {beta}")
    if not has_local_times(ev.sym):
        return INFINITY
    params = ev.sym.stable_params()
    if params is not None:
        return upsilon_closed_form(params[0], params[1], beta)
    return upsilon_quadrature(ev, beta)


def _extrapolate_tail(values) -> float:
    """Aitken step on the last three samples of a sequence with geometric increments"""
    x0, x1, x2 = values[-3:]
    d1, d2 = x1 - x0, x2 - x1
    if d1 > 0 and d2 > 0:
        ratio = d2 / d1
        if ratio < RICHARDSON_MAX_RATIO:
            return x2 + d2 * ratio / (1.0 - ratio)
    return x2


def upsilon_sup(ev: UpsilonEvaluator) -> float:
    """lim_{beta -> 0} Upsilon(beta): infinite for recurrent symmetrizations.

    In the transient case Upsilon(10^-k), k = 2..8, is required to be
    nondecreasing and the sequence is extrapolated to beta = 0. The
    extrapolation has to agree with the beta = 0 integral (finite at both
    ends) to a relative 1e-6, otherwise AccuracyError.
    """
    if not has_local_times(ev.sym):
        return INFINITY
    if classify_recurrence(ev.sym) is Recurrence.RECURRENT:
        return INFINITY
    samples = []
    for k in range(2, 9):
        value = upsilon_quadrature(ev, 10.0 ** -k)
        if samples and value < samples[-1] * (1.0 - 1e-9):
            raise AccuracyError(
                f"Upsilon(1e-{k}) = {value:.12g} below Upsilon(1e-{k - 1}) = {samples[-1]:.12g}",
                achieved=samples[-1] - value)
        samples.append(value)
    extrapolated = _extrapolate_tail(samples)
    direct = upsilon_quadrature(ev, 0.0)
    if abs(extrapolated - direct) > SUP_CROSS_CHECK * direct:
        raise AccuracyError(
            f"extrapolated sup Upsilon {extrapolated:.12g} disagrees with the beta = 0 integral {direct:.12g}",
            achieved=abs(extrapolated - direct))
    logger.debug("sup Upsilon = %.12g (Upsilon(1e-8) = %.12g, beta = 0 integral %.12g)",
                 extrapolated, samples[-1], direct)
    return extrapolated


def upsilon_inverse(ev: UpsilonEvaluator, t: float) -> float:
    """sup{beta > 0 : Upsilon(beta) > t}, with sup of the empty set = 0"""
    if not t > 0:
        raise DomainError(f"Upsilon inverse requires t > 0, got {t}")
    if not has_local_times(ev.sym):
        raise UnsupportedModelError("generator admits no solution theory (Upsilon is infinite)")
    params = ev.sym.stable_params()
    if params is not None:
        kappa, alpha = params
        if alpha == 2:
            return stable_nu(2.0) ** 2 / (kappa * t * t)
        return (stable_nu(alpha) / (kappa ** (1.0 / alpha) * t)) ** (alpha / (alpha - 1.0))
    if classify_recurrence(ev.sym) is Recurrence.TRANSIENT and upsilon_sup(ev) <= t:
        return 0.0

    lo = hi = 1.0
    steps = 0
    while upsilon_of(ev, lo) <= t:
        lo *= 0.5
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            return 0.0
    while upsilon_of(ev, hi) > t:
        hi *= 2.0
        steps += 1
        if steps > 2 * MAX_BRACKET_STEPS:
            raise AccuracyError(f"could not bracket Upsilon inverse at t={t}")
    log_beta = optimize.brentq(
        lambda y: upsilon_of(ev, math.exp(y)) - t,
        math.log(lo), math.log(hi), xtol=1e-14, rtol=4 * np.finfo(float).eps,
        maxiter=MAX_BRACKET_STEPS,
    )
    return math.exp(log_beta)
