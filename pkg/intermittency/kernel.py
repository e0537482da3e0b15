"""
Transition Kernels
Densities p_t of the Levy semigroup, their L2 norms, the time-integrated
dissipation, and the spectral action of the semigroup on periodic profiles.

Pointwise densities are restricted to symmetric symbols (Im Psi = 0), where
p_t(x) = (1/pi) * integral_0^inf cos(xi x) exp(-t Re Psi(xi)) d(xi).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from intermittency.common.errors import AccuracyError, DomainError, ResolutionError
from intermittency.levy_symbol import BrownianScaled, LevySymbol, has_local_times
from intermittency.upsilon import _crossover, half_line_integral

logger = logging.getLogger(__name__)

# t * Re Psi(xi_max) required for a trustworthy inversion grid
MIN_DECAY = 20.0
AUTO_DECAY = 40.0
DEFAULT_MODES = 2 ** 14
_DENSITY_CHUNK = 256


@dataclass(frozen=True)
class FrequencyGrid:
    xi_max: float
    n_modes: int = DEFAULT_MODES


@dataclass(frozen=True)
class KernelEvaluator:
    sym: LevySymbol
    grid: Optional[FrequencyGrid] = None
    quad_rel_tol: float = 1e-9

    def frequency_grid(self, t: float) -> FrequencyGrid:
        if self.grid is not None:
            grid = self.grid
        else:
            grid = FrequencyGrid(xi_max=_crossover(self.sym, 2.0 * AUTO_DECAY / t))
        decay = t * self.sym.re_psi(grid.xi_max)
        if decay < MIN_DECAY:
            raise ResolutionError(
                f"inversion grid xi_max={grid.xi_max:g} leaves t*Re Psi = {decay:.2f} < {MIN_DECAY:g}")
        return grid


def _stable_l2_constant(kappa: float, alpha: float) -> float:
    """c with ||p_s||^2 = c s^(-1/alpha) for Psi = kappa |xi|^alpha"""
    return gamma_fn(1.0 + 1.0 / alpha) * (2.0 * kappa) ** (-1.0 / alpha) / math.pi


def density(ev: KernelEvaluator, t: float, x):
    """p_t(x) by trapezoidal Fourier inversion; closed form for Brownian symbols"""
    if not t > 0:
        raise DomainError(f"density requires t > 0, got {t}")
    xs = np.asarray(x, dtype=float)
    if isinstance(ev.sym, BrownianScaled):
        kappa = ev.sym.kappa
        values = np.exp(-xs * xs / (4.0 * kappa * t)) / math.sqrt(4.0 * math.pi * kappa * t)
    else:
        grid = ev.frequency_grid(t)
        xi = np.linspace(0.0, grid.xi_max, grid.n_modes)
        weights = np.full(grid.n_modes, xi[1] - xi[0])
        weights[0] *= 0.5
        weights[-1] *= 0.5
        spectrum = weights * np.exp(-t * ev.sym.re_psi(xi))
        flat = xs.ravel()
        values = np.empty_like(flat)
        for start in range(0, flat.size, _DENSITY_CHUNK):
            chunk = flat[start:start + _DENSITY_CHUNK]
            values[start:start + _DENSITY_CHUNK] = np.cos(np.outer(chunk, xi)) @ spectrum / math.pi
        values = values.reshape(xs.shape)
    return float(values) if values.ndim == 0 else values


def density_on_grid(ev: KernelEvaluator, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """p_t sampled on the real-space grid dual to the inversion grid.

    Same trapezoid rule as density(), evaluated for all dual points at once with an
    inverse real FFT. The discrete mass sum(p) dx equals exp(-t Psi(0)) = 1 exactly.
    """
    if not t > 0:
        raise DomainError(f"density requires t > 0, got {t}")
    grid = ev.frequency_grid(t)
    xi = np.linspace(0.0, grid.xi_max, grid.n_modes)
    d_xi = xi[1] - xi[0]
    n_points = 2 * (grid.n_modes - 1)
    coefficients = np.exp(-t * ev.sym.re_psi(xi))
    values = d_xi * n_points / (2.0 * math.pi) * np.fft.irfft(coefficients, n_points)
    dx = 2.0 * math.pi / (d_xi * n_points)
    x = (np.arange(n_points) - n_points // 2) * dx
    return x, np.fft.fftshift(values)


def l2_norm_sq(ev: KernelEvaluator, s: float) -> float:
    """||p_s||^2 = (1/2pi) * integral of exp(-2 s Re Psi(xi)) d(xi) (Plancherel)"""
    if not s > 0:
        raise DomainError(f"L2 norm requires s > 0, got {s}")
    params = ev.sym.stable_params()
    if params is not None:
        kappa, alpha = params
        if alpha == 2:
            return 1.0 / math.sqrt(8.0 * math.pi * kappa * s)
        return _stable_l2_constant(kappa, alpha) * s ** (-1.0 / alpha)
    large = ev.sym.large_exponent
    if large is not None and large <= 0:
        return math.inf
    integral = half_line_integral(
        lambda xi: math.exp(-2.0 * s * ev.sym.re_psi(xi)), ev.sym, 1.0 / s,
        ev.quad_rel_tol, what=f"||p_{s:g}||^2",
    )
    return integral / math.pi


def dissipation_integral(ev: KernelEvaluator, t: float) -> float:
    """integral_0^t ||p_s||^2 ds; infinite without local times.

    The s^(-1/alpha) singularity at 0 (alpha the large-frequency exponent) is removed
    by the substitution s = v^(alpha/(alpha-1)).
    """
    if not t > 0:
        raise DomainError(f"dissipation integral requires t > 0, got {t}")
    if not has_local_times(ev.sym):
        return math.inf
    params = ev.sym.stable_params()
    if params is not None:
        kappa, alpha = params
        if alpha == 2:
            return math.sqrt(t / (2.0 * math.pi * kappa))
        exponent = 1.0 - 1.0 / alpha
        return _stable_l2_constant(kappa, alpha) * t ** exponent / exponent

    _, alpha = ev.sym.tail_term()
    power = alpha / (alpha - 1.0)

    def integrand(v):
        return l2_norm_sq(ev, v ** power) * power * v ** (power - 1.0)

    value, err = integrate.quad(integrand, 0.0, t ** (1.0 / power),
                                epsabs=1e-14, epsrel=1e-8, limit=200)
    if err > 1e-7 * abs(value) + 1e-13:
        raise AccuracyError(f"dissipation integral at t={t:g} inaccurate", achieved=err)
    return value


def spectral_multiplier(sym: LevySymbol, n_points: int, length: float, t: float) -> np.ndarray:
    """exp(-t Re Psi(2 pi k / L)) for the real-FFT modes k = 0..N/2"""
    omega = 2.0 * math.pi * np.fft.rfftfreq(n_points, d=length / n_points)
    return np.exp(-t * sym.re_psi(omega))


def semigroup_apply(ev: KernelEvaluator, t: float, u0: np.ndarray, length: float) -> np.ndarray:
    """Periodic convolution of a sampled profile with the kernel, done spectrally"""
    profile = np.asarray(u0, dtype=float)
    if t < 0:
        raise DomainError(f"semigroup time must be nonnegative, got {t}")
    if t == 0:
        return profile.copy()
    n_points = profile.shape[-1]
    multiplier = spectral_multiplier(ev.sym, n_points, length, t)
    return np.fft.irfft(np.fft.rfft(profile, axis=-1) * multiplier, n_points, axis=-1)


def semigroup_spatial_modulus(profile: np.ndarray, delta: float, length: float) -> float:
    """Uniform modulus sup_{|a-b|<delta} |u0(a) - u0(b)| of a periodic profile.

    It bounds the spatial oscillation of P_t u0 uniformly in t, since the
    semigroup averages translates of u0.
    """
    values = np.asarray(profile, dtype=float)
    dx = length / values.size
    modulus = 0.0
    lag = 1
    while lag * dx < delta and lag <= values.size // 2:
        modulus = max(modulus, float(np.max(np.abs(values - np.roll(values, lag)))))
        lag += 1
    return modulus
