"""
Intermittency Bounds
Analytic moment Lyapunov bounds, weak-intermittency verdicts, smallness and
sublinearity thresholds, and modulus-of-continuity bounds for the stochastic
convolution, gathered into a BoundsReport for one model.
"""

import logging
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import integrate

from intermittency.common.errors import (
    AccuracyError,
    BoundsConsistencyError,
    ConfigError,
    DomainError,
    LabError,
    UnsupportedModelError,
)
from intermittency.hermite import carlen_kree_bound, largest_hermite_zero
from intermittency.levy_symbol import (
    LevySymbol,
    Recurrence,
    classify_recurrence,
    has_local_times,
)
from intermittency.upsilon import (
    UpsilonEvaluator,
    half_line_integral,
    upsilon_inverse,
    upsilon_of,
    upsilon_sup,
)

logger = logging.getLogger(__name__)

DEFAULT_BETAS = (0.1, 1.0, 10.0)
STRICT_GUARD = 1e-12


class Verdict(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------

class Nonlinearity(ABC):
    """sigma together with the constants the bounds need"""

    kind = "nonlinearity"

    @property
    @abstractmethod
    def sigma0(self) -> float:
        ...

    @property
    @abstractmethod
    def lip(self) -> float:
        ...

    @property
    @abstractmethod
    def q_inf(self) -> float:
        """inf over x != 0 of |sigma(x)/x|"""

    @property
    @abstractmethod
    def q_asymp(self) -> float:
        """liminf over |x| -> infinity of |sigma(x)/x|"""

    @property
    def bound_sup(self) -> Optional[float]:
        return None

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        ...

    def describe(self) -> dict:
        return {
            "kind": self.kind, "sigma0": self.sigma0, "lip": self.lip,
            "q_inf": self.q_inf, "q_asymp": self.q_asymp, "bound_sup": self.bound_sup,
        }


@dataclass(frozen=True)
class Linear(Nonlinearity):
    lam: float
    kind = "linear"

    def __post_init__(self):
        if self.lam == 0 or not math.isfinite(self.lam):
            raise ConfigError("slope must be a nonzero real", field="sigma.lambda")

    sigma0 = property(lambda self: 0.0)
    lip = property(lambda self: abs(self.lam))
    q_inf = property(lambda self: abs(self.lam))
    q_asymp = property(lambda self: abs(self.lam))

    def __call__(self, x):
        return self.lam * x

    def describe(self):
        return {**super().describe(), "lambda": self.lam}


@dataclass(frozen=True)
class General(Nonlinearity):
    """Parameter-only sigma: usable by the bounds, not by the simulator"""

    sigma0_value: float
    lip_value: float
    q_inf_value: float
    q_asymp_value: float
    bound_sup_value: Optional[float] = None
    kind = "general"

    def __post_init__(self):
        _check_constants(self.lip_value, self.q_inf_value, self.q_asymp_value, self.bound_sup_value)

    sigma0 = property(lambda self: self.sigma0_value)
    lip = property(lambda self: self.lip_value)
    q_inf = property(lambda self: self.q_inf_value)
    q_asymp = property(lambda self: self.q_asymp_value)
    bound_sup = property(lambda self: self.bound_sup_value)

    def __call__(self, x):
        raise UnsupportedModelError("a parameter-only nonlinearity cannot be evaluated; use sine, clipped or dead_zone")


@dataclass(frozen=True)
class Sine(Nonlinearity):
    """sigma(x) = a + b sin(x) with 0 < b < a: bounded above and away from zero"""

    a: float
    b: float
    kind = "sine"

    def __post_init__(self):
        if not 0 < self.b < self.a:
            raise ConfigError("sine nonlinearity needs 0 < b < a", field="sigma.b")

    sigma0 = property(lambda self: self.a)
    lip = property(lambda self: self.b)
    q_inf = property(lambda self: 0.0)
    q_asymp = property(lambda self: 0.0)
    bound_sup = property(lambda self: self.a + self.b)

    def __call__(self, x):
        return self.a + self.b * np.sin(x)


@dataclass(frozen=True)
class Clipped(Nonlinearity):
    """sigma(x) = clip(lam x, -c, c)"""

    lam: float
    c: float
    kind = "clipped"

    def __post_init__(self):
        if self.lam == 0:
            raise ConfigError("slope must be nonzero", field="sigma.lambda")
        if not self.c > 0:
            raise ConfigError("clip level must be positive", field="sigma.c")

    sigma0 = property(lambda self: 0.0)
    lip = property(lambda self: abs(self.lam))
    q_inf = property(lambda self: 0.0)
    q_asymp = property(lambda self: 0.0)
    bound_sup = property(lambda self: self.c)

    def __call__(self, x):
        return np.clip(self.lam * x, -self.c, self.c)


@dataclass(frozen=True)
class DeadZone(Nonlinearity):
    """sigma(x) = lam sign(x) max(|x| - w, 0): linear at infinity, flat near 0"""

    lam: float
    w: float
    kind = "dead_zone"

    def __post_init__(self):
        if self.lam == 0:
            raise ConfigError("slope must be nonzero", field="sigma.lambda")
        if not self.w >= 0:
            raise ConfigError("dead-zone width must be nonnegative", field="sigma.w")

    sigma0 = property(lambda self: 0.0)
    lip = property(lambda self: abs(self.lam))
    q_inf = property(lambda self: 0.0 if self.w > 0 else abs(self.lam))
    q_asymp = property(lambda self: abs(self.lam))

    def __call__(self, x):
        return self.lam * np.sign(x) * np.maximum(np.abs(x) - self.w, 0.0)

    def linearity_onset(self, q0: float) -> float:
        """Smallest A with |sigma(z)| >= q0 |z| whenever |z| >= A"""
        slope = abs(self.lam)
        if not 0 < q0 < slope:
            raise DomainError(f"linearity onset needs 0 < q0 < {slope}, got {q0}")
        return slope * self.w / (slope - q0)


def _check_constants(lip, q_inf, q_asymp, bound_sup):
    if not 0 < lip < math.inf:
        raise ConfigError("Lipschitz constant must be positive and finite", field="sigma.lip")
    if not 0 <= q_inf <= lip:
        raise ConfigError("need 0 <= q_inf <= lip", field="sigma.q_inf")
    if not 0 <= q_asymp <= lip:
        raise ConfigError("need 0 <= q_asymp <= lip", field="sigma.q_asymp")
    if bound_sup is not None and bound_sup < 0:
        raise ConfigError("sup |sigma| must be nonnegative", field="sigma.bound_sup")


# ---------------------------------------------------------------------------
# Initial data and models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    eta: float
    kind = "constant"

    def __post_init__(self):
        if not self.eta >= 0:
            raise ConfigError("initial level must be nonnegative", field="u0.eta")

    @property
    def lower(self) -> float:
        return self.eta

    @property
    def upper(self) -> float:
        return self.eta

    def sample(self, n_points: int, length: float) -> np.ndarray:
        return np.full(n_points, float(self.eta))

    def describe(self) -> dict:
        return {"kind": self.kind, "eta": self.eta}


@dataclass(frozen=True)
class BoundedProfile:
    """Profile between lower and upper; the tag selects the shape on the periodic grid"""

    lower: float
    upper: float
    tag: str = "cosine"
    kind = "bounded"

    def __post_init__(self):
        if not self.lower >= 0:
            raise ConfigError("profile lower bound must be nonnegative", field="u0.lower")
        if not self.upper >= self.lower:
            raise ConfigError("profile upper bound must be >= lower bound", field="u0.upper")
        if self.tag not in ("cosine", "step"):
            raise ConfigError(f"unknown profile tag '{self.tag}', expected cosine or step", field="u0.tag")

    def sample(self, n_points: int, length: float) -> np.ndarray:
        x = np.arange(n_points) * (length / n_points)
        if self.tag == "cosine":
            shape = 0.5 * (1.0 + np.cos(2.0 * math.pi * x / length))
        else:
            shape = (x < 0.5 * length).astype(float)
        return self.lower + (self.upper - self.lower) * shape

    def describe(self) -> dict:
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper, "tag": self.tag}


@dataclass(frozen=True)
class ModelSpec:
    sym: LevySymbol
    sigma: Nonlinearity
    u0: object

    @property
    def eta(self) -> float:
        return self.u0.lower

    def upsilon(self) -> UpsilonEvaluator:
        return UpsilonEvaluator(self.sym)

    def describe(self) -> dict:
        return {"generator": self.sym.describe(), "sigma": self.sigma.describe(), "u0": self.u0.describe()}


# ---------------------------------------------------------------------------
# Lyapunov bounds
# ---------------------------------------------------------------------------

def _check_even(p) -> None:
    if not isinstance(p, (int, np.integer)) or p < 2 or p % 2:
        raise DomainError(f"moment order must be an even integer >= 2, got {p}")


def _require_local_times(sym: LevySymbol) -> None:
    if not has_local_times(sym):
        raise UnsupportedModelError("generator admits no solution theory (Upsilon is infinite)")


def gamma_p_upper_bound(m: ModelSpec, p: int, carlen_kree: bool = False) -> float:
    """inf{beta > 0 : Upsilon(2 beta/p) < (z_p lip)^-2} = (p/2) Upsilon^-1((z_p lip)^-2)"""
    _check_even(p)
    _require_local_times(m.sym)
    z = carlen_kree_bound(p) if carlen_kree else largest_hermite_zero(p)
    level = (z * m.sigma.lip) ** -2
    return 0.5 * p * upsilon_inverse(m.upsilon(), level)


@dataclass(frozen=True)
class LowerBound:
    value: float
    applicable: bool
    reason: Optional[str] = None


def gamma2_lower_bound(m: ModelSpec) -> LowerBound:
    """Upsilon^-1(1/q^2) with q = inf |sigma(x)/x|, when inf u0 > 0 and q > 0"""
    if not m.eta > 0:
        return LowerBound(0.0, False, "initial data not bounded away from zero")
    q = m.sigma.q_inf
    if not q > 0:
        return LowerBound(0.0, False, "no lower-bound hypothesis: inf |sigma(x)/x| = 0")
    if not has_local_times(m.sym):
        return LowerBound(0.0, False, "generator admits no solution theory (Upsilon is infinite)")
    value = upsilon_inverse(m.upsilon(), q ** -2)
    if value == 0:
        return LowerBound(0.0, True, "transient saturation: sup Upsilon < q^-2")
    return LowerBound(value, True)


@dataclass(frozen=True)
class AndersonVerdict:
    verdict: Verdict
    case: str
    gamma2: Optional[float]
    upsilon_sup: float


def anderson_verdict(m: ModelSpec) -> AndersonVerdict:
    """Weak intermittency of the linear equation: iff Upsilon(beta) >= lam^-2 for some beta > 0"""
    if not isinstance(m.sigma, Linear):
        raise DomainError("the Anderson criterion applies to linear sigma only")
    if not m.eta > 0:
        raise DomainError("the Anderson criterion needs inf u0 > 0")
    _require_local_times(m.sym)
    ev = m.upsilon()
    threshold = m.sigma.lam ** -2
    sup = upsilon_sup(ev)
    if classify_recurrence(m.sym) is Recurrence.RECURRENT:
        return AndersonVerdict(Verdict.YES, "recurrent", upsilon_inverse(ev, threshold), sup)
    # sup Upsilon is approached as beta -> 0 but never attained
    if sup > threshold:
        return AndersonVerdict(Verdict.YES, "transient, sup Upsilon > lambda^-2",
                               upsilon_inverse(ev, threshold), sup)
    return AndersonVerdict(Verdict.NO, "transient, sup Upsilon <= lambda^-2", None, sup)


def exact_anderson_gamma(p: int, lam: float, kappa: float) -> float:
    """p (p^2 - 1) lam^4 / (48 kappa) for the equation driven by kappa d^2/dx^2"""
    if not isinstance(p, (int, np.integer)) or p < 2:
        raise DomainError(f"moment order must be an integer >= 2, got {p}")
    if not kappa > 0:
        raise DomainError(f"diffusivity must be positive, got {kappa}")
    return p * (p * p - 1) * lam ** 4 / (48.0 * kappa)


def carlen_kree_theta(p: int, lam: float, kappa: float) -> float:
    return p ** 3 * lam ** 4 / kappa


def ratio_check(p: int, lam: float, kappa: float) -> Tuple[float, float]:
    """(theta(p), theta(p) / exact gamma(p)), asserting 1 <= ratio <= 48 (1 + 1/(p^2 - 1))"""
    _check_even(p)
    theta = carlen_kree_theta(p, lam, kappa)
    ratio = theta / exact_anderson_gamma(p, lam, kappa)
    upper = 48.0 * (1.0 + 1.0 / (p * p - 1))
    if not 1.0 <= ratio <= upper * (1.0 + STRICT_GUARD):
        raise BoundsConsistencyError(f"ratio {ratio:.12g} outside [1, {upper:.12g}] at p={p}")
    return theta, ratio


def transient_smallness_threshold(sym: LevySymbol, p: int) -> float:
    """delta(p) = 1 / (z_p sqrt(sup Upsilon)); Lip below it makes the p-th upper bound vanish"""
    _check_even(p)
    if classify_recurrence(sym) is Recurrence.RECURRENT:
        raise DomainError("smallness threshold is defined for transient symmetrizations only")
    sup = upsilon_sup(UpsilonEvaluator(sym))
    return 1.0 / (largest_hermite_zero(p) * math.sqrt(sup))


@dataclass(frozen=True)
class SublinearThreshold:
    eta0: float
    prose_eta: float
    upsilon: float
    A: float
    q0: float
    beta: float


def sublinear_sufficient_eta(m: ModelSpec, A: float, q0: float, beta: float) -> SublinearThreshold:
    """eta0 = A q0 sqrt(Upsilon(beta)): inf u0 above it forces F_beta to diverge.

    prose_eta = A q0 Upsilon(beta) is reported alongside; the divergence estimate
    eta^2 > A^2 q0^2 Upsilon(beta) is what the computation uses.
    """
    if not A >= 0:
        raise DomainError(f"linearity onset A must be nonnegative, got {A}")
    if not 0 < q0 < m.sigma.q_asymp:
        raise DomainError(f"need 0 < q0 < asymptotic slope {m.sigma.q_asymp}, got q0={q0}")
    if classify_recurrence(m.sym) is not Recurrence.RECURRENT:
        raise DomainError("sublinear criterion needs a recurrent symmetrization")
    upsilon = upsilon_of(m.upsilon(), beta)
    if not q0 * q0 * upsilon > 1.0 + STRICT_GUARD:
        raise DomainError(f"need q0^2 Upsilon(beta) > 1 strictly, got {q0 * q0 * upsilon:.12g}")
    eta0 = A * q0 * math.sqrt(upsilon)
    prose = A * q0 * upsilon
    if eta0 != prose:
        logger.debug("sublinear threshold: key estimate %.6g, prose form %.6g", eta0, prose)
    return SublinearThreshold(eta0, prose, upsilon, A, q0, beta)


# ---------------------------------------------------------------------------
# Modulus bounds
# ---------------------------------------------------------------------------

def spatial_modulus_bound(m: ModelSpec, p: int, beta: float, delta: float, norm_sigma_u: float,
                          rel_tol: float = 1e-9) -> float:
    """sqrt(p/pi) * norm * sqrt(integral of (1 - cos(xi delta)) / (beta + 2 Re Psi(xi)) d(xi))

    The exp(t beta/p) factor is left to the caller.
    """
    _check_even(p)
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if delta < 0:
        raise DomainError(f"lag must be nonnegative, got {delta}")
    if delta == 0 or norm_sigma_u == 0:
        return 0.0
    _require_local_times(m.sym)
    # integral over [0, inf) of 1/(beta + 2 Re Psi) is pi Upsilon(beta)
    whole = math.pi * upsilon_of(m.upsilon(), beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        oscillating, err = integrate.quad(
            lambda xi: 1.0 / (beta + 2.0 * m.sym.re_psi(xi)), 0.0, np.inf,
            weight="cos", wvar=delta, epsabs=rel_tol * whole, limlst=200,
        )
    gap = whole - oscillating
    if err > 1e-4 * gap + 1e-7 * whole:
        raise AccuracyError(f"spatial modulus integral at delta={delta:g} inaccurate", achieved=err)
    integral = 2.0 * max(gap, 0.0)
    return math.sqrt(p / math.pi) * norm_sigma_u * math.sqrt(integral)


def temporal_modulus_bound(m: ModelSpec, p: int, beta: float, t: float, T: float, norm_sigma_u: float,
                           rel_tol: float = 1e-9) -> float:
    """Bound on the L^p increment of the stochastic convolution between times t and T"""
    _check_even(p)
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not 0 <= t <= T:
        raise DomainError(f"need 0 <= t <= T, got t={t}, T={T}")
    if T == t or norm_sigma_u == 0:
        return 0.0
    _require_local_times(m.sym)
    sym = m.sym
    h = T - t
    b = beta / p
    kappa_t, alpha_t = sym.tail_term()

    def integrand(xi):
        r = sym.re_psi(xi)
        return (1.0 - math.exp(-h * r)) ** 2 / (b + r)

    half = half_line_integral(integrand, sym, 2.0 / h, rel_tol, tail=(1.0 / kappa_t, alpha_t),
                              what=f"temporal modulus at T-t={h:g}")
    d1 = math.exp(beta * t / p) * math.sqrt(p / math.pi) * norm_sigma_u * math.sqrt(2.0 * half)
    d2 = math.sqrt(8.0 * p) * math.exp(beta * T / p) * norm_sigma_u * math.sqrt(upsilon_of(m.upsilon(), 1.0 / h))
    return d1 + d2


def holder_indices(sym: LevySymbol, theta: Optional[float] = None) -> Tuple[float, float]:
    """(temporal, spatial) Holder indices; theta adds the deterministic part for Holder data"""
    _require_local_times(sym)
    _, alpha = sym.tail_term()
    temporal = (alpha - 1.0) / (2.0 * alpha)
    spatial = min(0.5, alpha - 1.0)
    if theta is not None:
        temporal = min(temporal, theta / (theta + alpha))
        spatial = min(spatial, theta)
    return temporal, spatial


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class BoundsReport:
    model: dict
    upsilon_samples: List[Tuple[float, float]]
    gamma2_lower: float
    gamma_p_upper: Dict[int, float]
    weakly_intermittent: Verdict
    recurrence: Recurrence
    local_times: bool
    delta_p: Dict[int, float] = field(default_factory=dict)
    verdict_reason: Optional[str] = None
    gamma2_lower_reason: Optional[str] = None
    upsilon_sup: Optional[float] = None
    carlen_kree_upper: Dict[int, float] = field(default_factory=dict)
    sublinear_eta0: Optional[float] = None
    sublinear_prose_eta: Optional[float] = None
    exact_anderson: Optional[Dict[int, float]] = None
    holder_exponents: Optional[Tuple[float, float]] = None
    subdiffusive: bool = False
    subdiffusive_exponent: Optional[float] = None
    errors: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "upsilon_samples": [[b, u] for b, u in self.upsilon_samples],
            "gamma2_lower": self.gamma2_lower,
            "gamma2_lower_reason": self.gamma2_lower_reason,
            "gamma_p_upper": {str(p): v for p, v in self.gamma_p_upper.items()},
            "carlen_kree_upper": {str(p): v for p, v in self.carlen_kree_upper.items()},
            "weakly_intermittent": self.weakly_intermittent.value,
            "verdict_reason": self.verdict_reason,
            "recurrence": self.recurrence.value,
            "local_times": self.local_times,
            "upsilon_sup": self.upsilon_sup,
            "delta_p": {str(p): v for p, v in self.delta_p.items()},
            "sublinear_eta0": self.sublinear_eta0,
            "sublinear_prose_eta": self.sublinear_prose_eta,
            "exact_anderson": None if self.exact_anderson is None
            else {str(p): v for p, v in self.exact_anderson.items()},
            "holder_exponents": None if self.holder_exponents is None
            else {"temporal": self.holder_exponents[0], "spatial": self.holder_exponents[1]},
            "subdiffusive": self.subdiffusive,
            "subdiffusive_exponent": self.subdiffusive_exponent,
            "errors": dict(self.errors),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundsReport":
        def int_keys(mapping):
            return {int(k): v for k, v in (mapping or {}).items()}

        holder = data.get("holder_exponents")
        exact = data.get("exact_anderson")
        return cls(
            model=data["model"],
            upsilon_samples=[(b, u) for b, u in data["upsilon_samples"]],
            gamma2_lower=data["gamma2_lower"],
            gamma2_lower_reason=data.get("gamma2_lower_reason"),
            gamma_p_upper=int_keys(data["gamma_p_upper"]),
            carlen_kree_upper=int_keys(data.get("carlen_kree_upper")),
            weakly_intermittent=Verdict(data["weakly_intermittent"]),
            verdict_reason=data.get("verdict_reason"),
            recurrence=Recurrence(data["recurrence"]),
            local_times=data["local_times"],
            upsilon_sup=data.get("upsilon_sup"),
            delta_p=int_keys(data.get("delta_p")),
            sublinear_eta0=data.get("sublinear_eta0"),
            sublinear_prose_eta=data.get("sublinear_prose_eta"),
            exact_anderson=None if exact is None else int_keys(exact),
            holder_exponents=None if holder is None else (holder["temporal"], holder["spatial"]),
            subdiffusive=data.get("subdiffusive", False),
            subdiffusive_exponent=data.get("subdiffusive_exponent"),
            errors=dict(data.get("errors", {})),
        )

    def csv_rows(self, label: str) -> List[dict]:
        """One flat row per requested moment order"""
        rows = []
        for p, upper in sorted(self.gamma_p_upper.items()):
            rows.append({
                "model": label,
                "p": p,
                "gamma_p_upper": upper,
                "carlen_kree_upper": self.carlen_kree_upper.get(p, ""),
                "gamma2_lower": self.gamma2_lower,
                "exact_anderson": "" if self.exact_anderson is None else self.exact_anderson.get(p, ""),
                "delta_p": self.delta_p.get(p, ""),
                "weakly_intermittent": self.weakly_intermittent.value,
                "recurrence": self.recurrence.value,
            })
        return rows


@dataclass(frozen=True)
class SublinearRequest:
    q0: float
    beta: float
    A: Optional[float] = None


def _is_gaussian_generator(sym: LevySymbol) -> Optional[float]:
    params = sym.stable_params()
    if params is not None and params[1] == 2:
        return params[0]
    return None


def full_report(
    m: ModelSpec,
    p_list: Iterable[int],
    beta_list: Iterable[float] = DEFAULT_BETAS,
    sublinear: Optional[SublinearRequest] = None,
    holder_theta: Optional[float] = None,
) -> BoundsReport:
    p_list = sorted(set(p_list))
    _require_local_times(m.sym)
    ev = m.upsilon()
    errors: Dict[str, str] = {}
    recurrence = classify_recurrence(m.sym)

    samples = []
    for beta in beta_list:
        try:
            samples.append((beta, upsilon_of(ev, beta)))
        except LabError as exc:
            errors[f"upsilon[{beta:g}]"] = str(exc)

    sup = None
    try:
        sup = upsilon_sup(ev)
    except LabError as exc:
        errors["upsilon_sup"] = str(exc)

    upper: Dict[int, float] = {}
    ck_upper: Dict[int, float] = {}
    for p in p_list:
        try:
            upper[p] = gamma_p_upper_bound(m, p)
            ck_upper[p] = gamma_p_upper_bound(m, p, carlen_kree=True)
        except LabError as exc:
            errors[f"gamma_p_upper[{p}]"] = str(exc)

    lower = gamma2_lower_bound(m)

    delta_p: Dict[int, float] = {}
    if recurrence is Recurrence.TRANSIENT:
        for p in p_list:
            try:
                delta_p[p] = transient_smallness_threshold(m.sym, p)
            except LabError as exc:
                errors[f"delta_p[{p}]"] = str(exc)

    anderson = None
    if isinstance(m.sigma, Linear) and m.eta > 0:
        try:
            anderson = anderson_verdict(m)
        except LabError as exc:
            errors["anderson_verdict"] = str(exc)

    exact = None
    kappa = _is_gaussian_generator(m.sym)
    if isinstance(m.sigma, Linear) and kappa is not None:
        exact = {p: exact_anderson_gamma(p, m.sigma.lam, kappa) for p in p_list}

    eta0 = prose = None
    if sublinear is not None:
        try:
            A = sublinear.A
            if A is None:
                if not isinstance(m.sigma, DeadZone):
                    raise DomainError("linearity onset A must be given for this nonlinearity")
                A = m.sigma.linearity_onset(sublinear.q0)
            threshold = sublinear_sufficient_eta(m, A, sublinear.q0, sublinear.beta)
            eta0, prose = threshold.eta0, threshold.prose_eta
        except LabError as exc:
            errors["sublinear_eta0"] = str(exc)

    holder = None
    try:
        holder = holder_indices(m.sym, holder_theta)
    except LabError as exc:
        errors["holder_exponents"] = str(exc)

    if 2 in upper and lower.value > upper[2] * (1.0 + 1e-9):
        errors["consistency"] = str(BoundsConsistencyError(
            f"lower bound {lower.value:.12g} exceeds upper bound {upper[2]:.12g} at p=2"))

    finite_upper = len(upper) == len(p_list) and all(math.isfinite(v) for v in upper.values())
    if lower.value > 0 and finite_upper:
        verdict, reason = Verdict.YES, "gamma(2) > 0 and gamma(p) finite for every requested p"
    elif anderson is not None and anderson.verdict is Verdict.NO:
        verdict, reason = Verdict.NO, anderson.case
    else:
        verdict = Verdict.UNKNOWN
        reason = lower.reason or "upper bounds incomplete"

    subdiffusive = m.sigma.bound_sup is not None
    _, alpha = m.sym.tail_term()
    report = BoundsReport(
        model=m.describe(),
        upsilon_samples=samples,
        gamma2_lower=lower.value,
        gamma2_lower_reason=lower.reason,
        gamma_p_upper=upper,
        carlen_kree_upper=ck_upper,
        weakly_intermittent=verdict,
        verdict_reason=reason,
        recurrence=recurrence,
        local_times=True,
        upsilon_sup=sup,
        delta_p=delta_p,
        sublinear_eta0=eta0,
        sublinear_prose_eta=prose,
        exact_anderson=exact,
        holder_exponents=holder,
        subdiffusive=subdiffusive,
        subdiffusive_exponent=(alpha - 1.0) / alpha if subdiffusive else None,
        errors=errors,
    )
    logger.info("bounds report: verdict=%s, %d field errors", verdict.value, len(errors))
    return report
