"""
Second-Moment Renewal Solver
For sigma(u) = lam u and u0 = eta the second moment is spatially constant and solves
    f(t) = eta^2 + lam^2 * integral_0^t f(s) ||p_(t-s)||^2 ds,
a Volterra equation whose kernel is weakly singular (like s^(-1/alpha)) at zero.
Its Laplace transform is (eta^2/beta) / (1 - lam^2 Upsilon(beta)) while that is finite.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from intermittency.bounds import STRICT_GUARD, ModelSpec
from intermittency.common.errors import DomainError, StepSizeError
from intermittency.common.moment_curve import MomentCurve, fit_late_gamma
from intermittency.kernel import KernelEvaluator, l2_norm_sq
from intermittency.levy_symbol import LevySymbol, has_local_times
from intermittency.upsilon import MAX_BRACKET_STEPS, UpsilonEvaluator, upsilon_of

logger = logging.getLogger(__name__)

# Kernel profile nodes for symbols without a closed-form L2 norm
_PROFILE_NODES = 256


class Divergence(str, Enum):
    FINITE = "finite"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class VolterraProblem:
    sym: LevySymbol
    lam: float
    eta: float
    t_max: float
    step: float

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError(f"renewal problem needs eta > 0, got {self.eta}")
        if not self.step > 0 or not self.t_max > self.step:
            raise DomainError(f"need 0 < step < t_max, got step={self.step}, t_max={self.t_max}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.step))

    def kernel_k(self, t: float) -> float:
        return self.lam ** 2 * l2_norm_sq(KernelEvaluator(self.sym), t)


def _panel_moments(n: int, gamma: float):
    """A_m, B_m: integrals of u^-gamma and (u - m) u^-gamma over [m, m+1]"""
    m = np.arange(n, dtype=float)
    a = ((m + 1.0) ** (1.0 - gamma) - m ** (1.0 - gamma)) / (1.0 - gamma)
    b = ((m + 1.0) ** (2.0 - gamma) - m ** (2.0 - gamma)) / (2.0 - gamma) - m * a
    return a, b


def _regular_part(prob: VolterraProblem, gamma: float, midpoints: np.ndarray) -> np.ndarray:
    """g(tau) = k(tau) tau^gamma at the panel midpoints"""
    if prob.sym.stable_params() is not None:
        unit = l2_norm_sq(KernelEvaluator(prob.sym), 1.0)
        return np.full(midpoints.size, prob.lam ** 2 * unit)
    if midpoints.size <= _PROFILE_NODES:
        return np.array([prob.kernel_k(tau) * tau ** gamma for tau in midpoints])
    nodes = np.geomspace(midpoints[0], midpoints[-1], _PROFILE_NODES)
    values = np.array([prob.kernel_k(tau) * tau ** gamma for tau in nodes])
    spline = CubicSpline(np.log(nodes), np.log(values))
    return np.exp(spline(np.log(midpoints)))


def solve_second_moment(prob: VolterraProblem) -> MomentCurve:
    """Product-trapezoid solution on a uniform mesh.

    Each panel integrates the s^(-gamma) head of the kernel exactly against the
    linear interpolant of f; the smooth remainder is frozen at the panel midpoint.
    """
    n = prob.n_steps
    h = prob.step
    times = np.arange(n + 1) * h
    f = np.full(n + 1, prob.eta ** 2)
    if prob.lam != 0:
        if not has_local_times(prob.sym):
            raise DomainError("kernel ||p_s||^2 is not integrable at 0 (no local times)")
        _, alpha = prob.sym.tail_term()
        gamma = 1.0 / alpha
        a, b = _panel_moments(n, gamma)
        g = _regular_part(prob, gamma, (np.arange(n) + 0.5) * h)
        scale = h ** (1.0 - gamma)
        diagonal = scale * (a[0] - b[0]) * g[0]
        if diagonal >= 1.0:
            raise StepSizeError(f"step {h:g} too coarse: implicit weight {diagonal:.3f} >= 1")
        lagged = scale * (a - b) * g
        lagged[1:] += scale * b[:-1] * g[:-1]
        closing = scale * b * g
        for step in range(1, n + 1):
            history = closing[step - 1] * f[0]
            if step > 1:
                # f[step-1], ..., f[1] against lags 1..step-1
                history += np.dot(lagged[1:step], f[step - 1:0:-1])
            f[step] = (prob.eta ** 2 + history) / (1.0 - diagonal)
            if not f[step] > 0 or not math.isfinite(f[step]):
                raise StepSizeError(f"renewal solution lost positivity at t={times[step]:g}")
        if np.any(np.diff(f) < -1e-12 * f[1:]):
            raise StepSizeError("renewal solution is not nondecreasing; refine the step")

    curve = MomentCurve(p=2, times=times, moments=f, stderr=np.zeros_like(f), source="renewal",
                        meta={"lambda": prob.lam, "eta": prob.eta, "step": h})
    curve.fitted_gamma = fit_late_gamma(curve)
    logger.info("renewal solve: %d steps, late slope %.6g", n, curve.fitted_gamma.slope)
    return curve


def solve_lattice_second_moment(
    sym: LevySymbol, lam: float, eta: float, dt: float, n_steps: int, n_points: int, length: float
) -> MomentCurve:
    """Exact second moment of the exponential Euler scheme for linear sigma and constant data.

    f_n = eta^2 + lam^2 dt sum_{j<n} f_j K_(n-j), K_m = (1/L) sum_k exp(-2 m dt Re Psi(2 pi k / L)).
    """
    omega = 2.0 * math.pi * np.fft.fftfreq(n_points, d=length / n_points)
    decay = sym.re_psi(omega)
    lags = np.arange(1, n_steps + 1)
    kernel = np.array([np.exp(-2.0 * m * dt * decay).sum() for m in lags]) / length
    f = np.full(n_steps + 1, eta ** 2)
    weight = lam ** 2 * dt
    for step in range(1, n_steps + 1):
        f[step] = eta ** 2 + weight * np.dot(f[:step], kernel[step - 1::-1])
    times = np.arange(n_steps + 1) * dt
    return MomentCurve(p=2, times=times, moments=f, stderr=np.zeros_like(f), source="lattice",
                       meta={"lambda": lam, "eta": eta, "dt": dt, "n_points": n_points, "length": length})


def laplace_fixed_point(prob: VolterraProblem, beta: float) -> float:
    """(eta^2/beta) / (1 - lam^2 Upsilon(beta)), or inf once the renewal series diverges"""
    if not beta > 0:
        raise DomainError(f"Laplace variable must be positive, got {beta}")
    if prob.lam == 0:
        return prob.eta ** 2 / beta
    product = prob.lam ** 2 * upsilon_of(UpsilonEvaluator(prob.sym), beta)
    if product >= 1.0:
        return math.inf
    return prob.eta ** 2 / beta / (1.0 - product)


def mesh_laplace_transform(curve: MomentCurve, beta: float) -> float:
    """Trapezoid integral of exp(-beta t) f(t) on the mesh plus an exponential tail"""
    weighted = np.exp(-beta * curve.times) * curve.moments
    value = integrate.trapezoid(weighted, curve.times)
    growth = curve.fitted_gamma.slope if curve.fitted_gamma is not None else 0.0
    if beta > growth:
        value += weighted[-1] / (beta - growth)
    return float(value)


def divergence_threshold(prob: VolterraProblem, rel_tol: float = 1e-12) -> float:
    """The beta where laplace_fixed_point flips from finite (above) to divergent (below)"""
    if prob.lam == 0:
        return 0.0
    hi = 1.0
    steps = 0
    while math.isinf(laplace_fixed_point(prob, hi)):
        hi *= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise DomainError("renewal transform diverges for every sampled beta")
    lo = hi
    while not math.isinf(laplace_fixed_point(prob, lo)):
        lo *= 0.5
        steps += 1
        if steps > 2 * MAX_BRACKET_STEPS:
            logger.debug("no divergence down to beta=%g: transient saturation", lo)
            return 0.0
    while hi - lo > rel_tol * hi:
        mid = math.sqrt(lo * hi)
        if math.isinf(laplace_fixed_point(prob, mid)):
            lo = mid
        else:
            hi = mid
    return hi


def divergence_scan(
    m: ModelSpec,
    beta: float,
    q0: float,
    A: float,
    eta_grid: Iterable[float],
    upsilon_value: Optional[float] = None,
) -> Dict[float, Divergence]:
    """Divergent iff eta^2 > A^2 q0^2 Upsilon(beta), the renewal-series criterion"""
    upsilon = upsilon_value if upsilon_value is not None else upsilon_of(m.upsilon(), beta)
    if not q0 * q0 * upsilon > 1.0 + STRICT_GUARD:
        raise DomainError(f"need q0^2 Upsilon(beta) > 1 strictly, got {q0 * q0 * upsilon:.12g}")
    threshold = A * q0 * math.sqrt(upsilon)
    return {
        eta: Divergence.DIVERGENT if eta > threshold else Divergence.FINITE
        for eta in eta_grid
    }
