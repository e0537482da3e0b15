"""
Moment Curves
Time series t -> E|u(t,.)|^p shared by the renewal solver and the simulator,
with least-squares growth-rate fits and flat CSV / JSON forms.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import stats

from intermittency.common.errors import DomainError, ResolutionError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["t", "p", "moment", "stderr", "n_paths", "source"]


@dataclass(frozen=True)
class GammaFit:
    slope: float
    stderr: float
    window: Tuple[float, float]
    refused: bool = False
    reason: Optional[str] = None

    def to_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "window": list(self.window),
                "refused": self.refused, "reason": self.reason}

    @classmethod
    def from_dict(cls, data: dict) -> "GammaFit":
        return cls(data["slope"], data["stderr"], tuple(data["window"]),
                   data.get("refused", False), data.get("reason"))


@dataclass
class MomentCurve:
    p: int
    times: np.ndarray
    moments: np.ndarray
    stderr: np.ndarray
    source: str = "renewal"
    n_paths: int = 0
    fitted_gamma: Optional[GammaFit] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.moments = np.asarray(self.moments, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if not self.times.shape == self.moments.shape == self.stderr.shape:
            raise DomainError("times, moments and stderr must have equal length")

    def window_mask(self, t_start: float, t_end: Optional[float] = None) -> np.ndarray:
        t_end = self.times[-1] if t_end is None else t_end
        return (self.times >= t_start) & (self.times <= t_end)

    def csv_rows(self) -> List[dict]:
        return [
            {"t": float(t), "p": self.p, "moment": float(m), "stderr": float(s),
             "n_paths": self.n_paths, "source": self.source}
            for t, m, s in zip(self.times, self.moments, self.stderr)
        ]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "source": self.source,
            "n_paths": self.n_paths,
            "times": self.times.tolist(),
            "moments": self.moments.tolist(),
            "stderr": self.stderr.tolist(),
            "fitted_gamma": None if self.fitted_gamma is None else self.fitted_gamma.to_dict(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MomentCurve":
        fit = data.get("fitted_gamma")
        return cls(
            p=data["p"], times=data["times"], moments=data["moments"], stderr=data["stderr"],
            source=data.get("source", "renewal"), n_paths=data.get("n_paths", 0),
            fitted_gamma=None if fit is None else GammaFit.from_dict(fit),
            meta=data.get("meta", {}),
        )


def fit_gamma(curve: MomentCurve, t_start: float, t_end: Optional[float] = None) -> GammaFit:
    """OLS slope of log(moment) against t over [t_start, t_end]"""
    mask = curve.window_mask(t_start, t_end) & (curve.moments > 0)
    if mask.sum() < 3:
        raise ResolutionError(f"fewer than 3 positive moments in fit window [{t_start:g}, {t_end}]")
    times = curve.times[mask]
    result = stats.linregress(times, np.log(curve.moments[mask]))
    return GammaFit(float(result.slope), float(result.stderr), (float(times[0]), float(times[-1])))


def fit_late_gamma(curve: MomentCurve, fraction: float = 1.0 / 3.0) -> GammaFit:
    """Slope over the last `fraction` of the time horizon"""
    t_start = curve.times[-1] - fraction * (curve.times[-1] - curve.times[0])
    return fit_gamma(curve, t_start)


def growth_exponent(curve: MomentCurve, t_min: float) -> GammaFit:
    """log-log OLS slope of the moment for t >= t_min; c t^a growth gives a"""
    if not t_min > 0:
        raise DomainError(f"log-log fit needs t_min > 0, got {t_min}")
    mask = (curve.times >= t_min) & (curve.moments > 0)
    if mask.sum() < 3:
        raise ResolutionError(f"fewer than 3 positive moments beyond t={t_min:g}")
    times = curve.times[mask]
    result = stats.linregress(np.log(times), np.log(curve.moments[mask]))
    if not math.isfinite(result.slope):
        raise ResolutionError("log-log growth fit is not finite")
    return GammaFit(float(result.slope), float(result.stderr), (float(times[0]), float(times[-1])))
