"""
SPDE Simulator
Monte Carlo solver of du = L u dt + sigma(u) dW on a periodic grid.

Exponential Euler: u_(n+1) = E_dt [u_n + sigma(u_n) xi_n sqrt(dt/dx)], where E_dt
multiplies Fourier mode k by exp(-dt Re Psi(2 pi k / L)) and xi_n holds N
independent standard normals. A white-noise cell of area dt*dx has variance
dt*dx; dividing by the cell width dx to get a density gives N(0, dt/dx) per cell.

Randomness: path m draws from its own Philox stream keyed by (seed, m), so a
path's noise never depends on which worker runs it. Paths run in fixed batches
and their per-path statistics are merged in path order, which makes every
output bit-identical for any worker count.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from intermittency.bounds import ModelSpec, gamma_p_upper_bound
from intermittency.common.errors import (
    BlowUpError,
    ConfigError,
    DomainError,
    EnsembleAbortError,
    LabError,
    ResolutionError,
)
from intermittency.common.moment_curve import GammaFit, MomentCurve, fit_gamma
from intermittency.hermite import largest_hermite_zero
from intermittency.kernel import spectral_multiplier
from intermittency.upsilon import upsilon_of

logger = logging.getLogger(__name__)

BATCH_SIZE = 64
NOISE_CHUNK = 50
ABORT_FRACTION = 0.01
TAIL_TOP_FRACTION = 0.01
TAIL_REFUSE_SHARE = 0.5
HOMOGENEITY_Z = 4.0
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GridSpec:
    length: float
    n_points: int
    dt: float
    t_max: float
    n_paths: int
    seed: int
    record_every: int = 10

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError("domain length must be positive", field="grid.L")
        if self.n_points < 4 or self.n_points & (self.n_points - 1):
            raise ConfigError("grid points must be a power of 2 (>= 4)", field="grid.N")
        if not self.dt > 0:
            raise ConfigError("time step must be positive", field="grid.dt")
        if not self.t_max >= self.dt:
            raise ConfigError("horizon must be at least one time step", field="grid.T")
        if self.n_paths < 1:
            raise ConfigError("ensemble size must be >= 1", field="grid.M")
        if not 0 <= self.seed <= SEED_MASK:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="seed")
        if self.record_every < 1:
            raise ConfigError("record stride must be >= 1", field="grid.record_every")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def noise_scale(self) -> float:
        return math.sqrt(self.dt / self.dx)

    def record_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.record_every)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps


@dataclass
class Field:
    values: np.ndarray
    time: float


def path_generator(seed: int, path: int) -> np.random.Generator:
    """Counter-based stream for one path; independent of scheduling"""
    return np.random.Generator(np.random.Philox(key=np.array([seed & SEED_MASK, path], dtype=np.uint64)))


def check_grid(grid: GridSpec, model: ModelSpec) -> List[str]:
    """Soft constraints: time step against the growth scale and periodic-domain width"""
    notes = []
    kappa, alpha = model.sym.tail_term()
    width = 8.0 * math.sqrt(2.0 * kappa * grid.t_max) if alpha == 2 else 8.0 * (kappa * grid.t_max) ** (1.0 / alpha)
    if grid.length < width:
        notes.append(f"domain length {grid.length:g} below 8x the spreading width {width:.3g}; wrap-around possible")
    try:
        rate = gamma_p_upper_bound(model, 2)
    except LabError:
        rate = 0.0
    if rate > 0 and grid.dt > 0.1 / rate:
        notes.append(f"dt={grid.dt:g} exceeds 0.1 / gamma(2) = {0.1 / rate:.3g}")
    for note in notes:
        logger.warning(note)
    return notes


def advance(u: np.ndarray, grid: GridSpec, model: ModelSpec, noise: np.ndarray, multiplier: np.ndarray,
            driver: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Exponential Euler update of a field or a (paths, N) stack.

    sigma is evaluated at driver (u itself unless given). Returns the stepped
    values and a per-path finiteness mask.
    """
    source = u if driver is None else driver
    with np.errstate(over="ignore", invalid="ignore"):
        kicked = u + model.sigma(source) * noise * grid.noise_scale
        values = np.fft.irfft(np.fft.rfft(kicked, axis=-1) * multiplier, grid.n_points, axis=-1)
    return values, np.all(np.isfinite(values), axis=-1)


def step(state: Field, grid: GridSpec, model: ModelSpec, noise: np.ndarray,
         multiplier: Optional[np.ndarray] = None) -> Field:
    """One exponential Euler step; works on a single field or a (paths, N) stack"""
    if multiplier is None:
        multiplier = spectral_multiplier(model.sym, grid.n_points, grid.length, grid.dt)
    values, finite = advance(state.values, grid, model, noise, multiplier)
    if not np.all(finite):
        raise BlowUpError("non-finite field", step_index=int(round(state.time / grid.dt)) + 1)
    return Field(values, state.time + grid.dt)


# ---------------------------------------------------------------------------
# Ensemble
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _BatchTask:
    grid: GridSpec
    model: ModelSpec
    p_list: Tuple[int, ...]
    start: int
    stop: int
    zero_noise: bool
    keep_snapshot: bool


@dataclass
class _BatchResult:
    start: int
    path_means: Dict[int, np.ndarray]
    alive: np.ndarray
    site_sum: np.ndarray
    site_sumsq: np.ndarray
    negatives: int
    snapshot: Optional[np.ndarray]


def _noise_chunks(generators, n_points, n_steps, zero_noise):
    """Yield (steps, paths, N) noise blocks, each path reading its own stream in order"""
    done = 0
    while done < n_steps:
        size = min(NOISE_CHUNK, n_steps - done)
        if zero_noise:
            block = np.zeros((size, len(generators), n_points))
        else:
            block = np.stack([g.standard_normal((size, n_points)) for g in generators], axis=1)
        yield block
        done += size


def _run_batch(task: _BatchTask) -> _BatchResult:
    grid, model = task.grid, task.model
    n_batch = task.stop - task.start
    generators = [path_generator(grid.seed, m) for m in range(task.start, task.stop)]
    multiplier = spectral_multiplier(model.sym, grid.n_points, grid.length, grid.dt)
    record = grid.record_steps()
    record_slot = {int(s): i for i, s in enumerate(record)}
    means = {p: np.zeros((n_batch, record.size)) for p in task.p_list}
    alive = np.ones(n_batch, dtype=bool)
    negatives = 0

    u = np.tile(model.u0.sample(grid.n_points, grid.length), (n_batch, 1))

    def capture(slot):
        nonlocal negatives, alive
        magnitude = np.abs(u)
        overflow = np.zeros(n_batch, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            for p in task.p_list:
                means[p][:, slot] = np.mean(magnitude ** p, axis=1)
                overflow |= ~np.isfinite(means[p][:, slot])
        overflow &= alive
        if np.any(overflow):
            # |u|^p left the float range although u is finite; the path counts as blown
            logger.debug("paths %s overflowed a moment at record slot %d", np.flatnonzero(overflow) + task.start, slot)
            alive &= ~overflow
            u[~alive] = 0.0
            for p in task.p_list:
                means[p][~alive, slot] = 0.0
        negatives += int(np.count_nonzero(u[alive] < 0))

    capture(0)
    n = 0
    for block in _noise_chunks(generators, grid.n_points, grid.n_steps, task.zero_noise):
        for noise in block:
            u, finite = advance(u, grid, model, noise, multiplier)
            n += 1
            if not np.all(finite[alive]):
                logger.debug("paths %s blew up at step %d", np.flatnonzero(alive & ~finite) + task.start, n)
                alive &= finite
                u[~alive] = 0.0
            if n in record_slot:
                capture(record_slot[n])

    final_sq = u[alive] ** 2
    return _BatchResult(
        start=task.start,
        path_means={p: means[p][alive] for p in task.p_list},
        alive=alive,
        site_sum=final_sq.sum(axis=0),
        site_sumsq=(final_sq ** 2).sum(axis=0),
        negatives=negatives,
        snapshot=u[0].copy() if task.keep_snapshot and alive[0] else None,
    )


@dataclass
class EnsembleDiagnostics:
    n_paths: int
    blown_paths: int
    negative_count: int
    homogeneity_max_z: float
    homogeneity_ok: bool
    jensen_ok: Optional[bool]
    tail_fraction: Dict[int, float]
    grid_notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "blown_paths": self.blown_paths,
            "negative_count": self.negative_count,
            "homogeneity_max_z": self.homogeneity_max_z,
            "homogeneity_ok": self.homogeneity_ok,
            "jensen_ok": self.jensen_ok,
            "tail_fraction": {str(p): v for p, v in self.tail_fraction.items()},
            "grid_notes": list(self.grid_notes),
        }


@dataclass
class EnsembleResult:
    curves: List[MomentCurve]
    diagnostics: EnsembleDiagnostics
    snapshot: Optional[Field] = None

    def curve(self, p: int) -> MomentCurve:
        for c in self.curves:
            if c.p == p:
                return c
        raise KeyError(p)


def _tail_share(values: np.ndarray) -> float:
    """Share of the total carried by the top 1% of paths (at least one path)"""
    total = values.sum()
    if not total > 0:
        return 0.0
    top = max(1, int(math.ceil(TAIL_TOP_FRACTION * values.size)))
    return float(np.sort(values)[-top:].sum() / total)


def _homogeneity(site_sum, site_sumsq, n_paths) -> float:
    """Largest |z| of per-site second moments against their common mean"""
    if n_paths < 2:
        return 0.0
    mean = site_sum / n_paths
    var = np.maximum(site_sumsq / n_paths - mean ** 2, 0.0) * n_paths / (n_paths - 1)
    se = np.sqrt(var / n_paths)
    grand = mean.mean()
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (mean - grand) / se, 0.0)
    return float(np.max(np.abs(z)))


def run_ensemble(
    grid: GridSpec,
    model: ModelSpec,
    p_list: Sequence[int],
    workers: int = 1,
    fit_window: Optional[Tuple[float, float]] = None,
    zero_noise: bool = False,
    keep_snapshot: bool = False,
) -> EnsembleResult:
    """M independent paths; moments averaged over sites and paths, merged in path order"""
    p_list = tuple(sorted(set(int(p) for p in p_list)))
    if not p_list or min(p_list) < 1:
        raise DomainError(f"moment orders must be positive integers, got {p_list}")
    notes = check_grid(grid, model)
    tasks = [
        _BatchTask(grid, model, p_list, start, min(start + BATCH_SIZE, grid.n_paths), zero_noise,
                   keep_snapshot and start == 0)
        for start in range(0, grid.n_paths, BATCH_SIZE)
    ]
    logger.info("ensemble: %d paths in %d batches, %d steps, %d workers",
                grid.n_paths, len(tasks), grid.n_steps, workers)
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            results = pool.map(_run_batch, tasks)
    else:
        results = [_run_batch(task) for task in tasks]
    results.sort(key=lambda r: r.start)

    blown = sum(int((~r.alive).sum()) for r in results)
    if blown >= ABORT_FRACTION * grid.n_paths:
        raise EnsembleAbortError(
            "ensemble aborted, reduce dt or the noise strength",
            blown_paths=blown, total_paths=grid.n_paths)
    if blown:
        logger.warning("%d paths blew up and were dropped", blown)

    n_alive = grid.n_paths - blown
    times = grid.record_steps() * grid.dt
    if fit_window is None:
        fit_window = (0.5 * grid.t_max, grid.t_max)

    curves = []
    tail = {}
    for p in p_list:
        per_path = np.concatenate([r.path_means[p] for r in results], axis=0)
        moments = per_path.mean(axis=0)
        stderr = per_path.std(axis=0, ddof=1) / math.sqrt(n_alive) if n_alive > 1 else np.zeros_like(moments)
        curve = MomentCurve(p=p, times=times, moments=moments, stderr=stderr, source="simulation",
                            n_paths=n_alive, meta={"seed": grid.seed})
        end_slot = int(np.searchsorted(times, fit_window[1], side="right")) - 1
        tail[p] = _tail_share(per_path[:, end_slot])
        curve.fitted_gamma = _fit_or_refuse(curve, fit_window, tail[p])
        curves.append(curve)

    site_sum = np.sum([r.site_sum for r in results], axis=0)
    site_sumsq = np.sum([r.site_sumsq for r in results], axis=0)
    max_z = _homogeneity(site_sum, site_sumsq, n_alive)

    jensen = None
    if 2 in p_list and 4 in p_list:
        second = curves[p_list.index(2)].moments
        fourth = curves[p_list.index(4)].moments
        jensen = bool(np.all(fourth >= second ** 2 * (1.0 - 1e-12)))

    diagnostics = EnsembleDiagnostics(
        n_paths=n_alive,
        blown_paths=blown,
        negative_count=sum(r.negatives for r in results),
        homogeneity_max_z=max_z,
        homogeneity_ok=max_z <= HOMOGENEITY_Z,
        jensen_ok=jensen,
        tail_fraction=tail,
        grid_notes=notes,
    )
    snapshot = None
    if keep_snapshot and results[0].snapshot is not None:
        snapshot = Field(results[0].snapshot, grid.n_steps * grid.dt)
    return EnsembleResult(curves, diagnostics, snapshot)


def _fit_or_refuse(curve: MomentCurve, window: Tuple[float, float], tail: float) -> GammaFit:
    if tail > TAIL_REFUSE_SHARE:
        return GammaFit(math.nan, math.nan, window, refused=True,
                        reason=f"top 1% of paths carry {tail:.0%} of the moment")
    try:
        return fit_gamma(curve, *window)
    except LabError as exc:
        return GammaFit(math.nan, math.nan, window, refused=True, reason=str(exc))


# ---------------------------------------------------------------------------
# Picard iteration
# ---------------------------------------------------------------------------

@dataclass
class PicardResult:
    gaps: List[float]
    stderr: List[float]
    ratios: List[float]
    contraction: float
    flagged: List[int]

    def to_dict(self) -> dict:
        return {"gaps": self.gaps, "stderr": self.stderr, "ratios": self.ratios,
                "contraction": self.contraction, "flagged": self.flagged}


def picard_diagnostic(grid: GridSpec, model: ModelSpec, beta: float, p: int, n_iters: int) -> PicardResult:
    """Gaps ||v_(n+1) - v_n||_(p,beta) of the discrete Picard map under one frozen noise.

    The norm is sup over mesh times of (exp(-beta t) E|.|^p)^(1/p), with E the
    average over paths and sites.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if n_iters < 2:
        raise DomainError("need at least two Picard iterations")
    contraction = largest_hermite_zero(p) * model.sigma.lip * math.sqrt(upsilon_of(model.upsilon(), 2.0 * beta / p))
    if not contraction < 1:
        raise DomainError(
            f"contraction condition z_p^2 Lip^2 Upsilon(2 beta/p) < 1 fails: constant {contraction:.4g}")

    n_steps = grid.n_steps
    noise = np.stack([path_generator(grid.seed, m).standard_normal((n_steps, grid.n_points))
                      for m in range(grid.n_paths)], axis=1)
    multiplier = spectral_multiplier(model.sym, grid.n_points, grid.length, grid.dt)
    start = np.tile(model.u0.sample(grid.n_points, grid.length), (grid.n_paths, 1))
    discount = np.exp(-beta * np.arange(n_steps + 1) * grid.dt)

    # v_0 = deterministic semigroup orbit of u0
    previous = np.empty((n_steps + 1,) + start.shape)
    previous[0] = start
    for k in range(n_steps):
        previous[k + 1] = np.fft.irfft(np.fft.rfft(previous[k], axis=-1) * multiplier, grid.n_points, axis=-1)

    gaps, errors = [], []
    for _ in range(n_iters):
        current = np.empty_like(previous)
        current[0] = start
        for k in range(n_steps):
            current[k + 1], _ = advance(current[k], grid, model, noise[k], multiplier, driver=previous[k])
        if not np.all(np.isfinite(current)):
            raise BlowUpError("Picard iterate became non-finite")
        per_path = np.mean(np.abs(current - previous) ** p, axis=2)
        weighted = discount[:, None] * per_path
        mean = weighted.mean(axis=1)
        worst = int(np.argmax(mean))
        gap = float(mean[worst] ** (1.0 / p))
        se_mean = float(weighted[worst].std(ddof=1) / math.sqrt(grid.n_paths)) if grid.n_paths > 1 else 0.0
        gaps.append(gap)
        errors.append(gap / p * se_mean / mean[worst] if mean[worst] > 0 else 0.0)
        previous = current

    # ratios[i] = g_(i+2) / g_(i+1); the contraction is only expected from n = 2 on
    ratios, flagged = [], []
    for i in range(len(gaps) - 1):
        a, b = gaps[i], gaps[i + 1]
        if a == 0:
            ratios.append(0.0)
            continue
        ratio = b / a
        ratios.append(ratio)
        relative = math.hypot(errors[i] / a, errors[i + 1] / b if b > 0 else 0.0)
        if i + 1 >= 2 and ratio > contraction + 3.0 * ratio * relative:
            flagged.append(i + 1)
    if flagged:
        logger.warning("Picard gap ratios exceed the contraction constant at iterations %s", flagged)
    return PicardResult(gaps, errors, ratios, contraction, flagged)


# ---------------------------------------------------------------------------
# Holder exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderEstimate:
    direction: str
    exponent: float
    stderr: float
    lags: Tuple[float, ...]
    variogram: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {"direction": self.direction, "exponent": self.exponent, "stderr": self.stderr,
                "lags": list(self.lags), "variogram": list(self.variogram)}


def _spatial_lags(grid: GridSpec) -> List[int]:
    lags = []
    lag = 2
    while lag <= grid.n_points // 8 and lag * grid.dx <= grid.length / 32:
        lags.append(lag)
        lag *= 2
    return lags


def _temporal_lags(grid: GridSpec, model: ModelSpec, span_steps: int) -> List[int]:
    """Dyadic step counts above the lattice relaxation time 1/Re Psi(pi/dx)"""
    lattice_time = 1.0 / model.sym.re_psi(math.pi / grid.dx)
    lags = []
    lag = 1
    while lag <= span_steps // 4 and lag * grid.dt <= 0.5:
        if lag * grid.dt >= 4.0 * lattice_time:
            lags.append(lag)
        lag *= 2
    return lags


def holder_estimate(grid: GridSpec, model: ModelSpec, direction: str, burn_in: float = 5.0,
                    n_anchors: int = 8) -> HolderEstimate:
    """Half the log-log slope of the variogram over dyadic lags (the L2-Holder index)"""
    if direction not in ("space", "time"):
        raise DomainError(f"direction must be 'space' or 'time', got {direction!r}")
    burn_steps = int(round(burn_in / grid.dt))
    span = grid.n_steps - burn_steps
    if span < 4:
        raise ResolutionError("no simulated time left after burn-in")
    if direction == "space":
        lags = _spatial_lags(grid)
    else:
        lags = _temporal_lags(grid, model, span)
    if len(lags) < 3:
        raise ResolutionError(f"only {len(lags)} usable dyadic lags; need at least 3")

    max_lag = 0 if direction == "space" else lags[-1]
    anchors = np.unique(np.linspace(burn_steps, grid.n_steps - max_lag, n_anchors).astype(int))
    wanted = set(anchors.tolist())
    if direction == "time":
        wanted |= {a + lag for a in anchors.tolist() for lag in lags}

    multiplier = spectral_multiplier(model.sym, grid.n_points, grid.length, grid.dt)
    per_path = np.zeros((grid.n_paths, len(lags)))
    for m in range(grid.n_paths):
        rng = path_generator(grid.seed, m)
        u = model.u0.sample(grid.n_points, grid.length)
        kept = {}
        for n in range(1, grid.n_steps + 1):
            u, _ = advance(u, grid, model, rng.standard_normal(grid.n_points), multiplier)
            if n in wanted:
                kept[n] = u.copy()
        if not all(np.all(np.isfinite(v)) for v in kept.values()):
            raise BlowUpError(f"path {m} became non-finite during the variogram run")
        for j, lag in enumerate(lags):
            if direction == "space":
                values = [np.mean((kept[a] - np.roll(kept[a], -lag)) ** 2) for a in anchors]
            else:
                values = [np.mean((kept[a + lag] - kept[a]) ** 2) for a in anchors]
            per_path[m, j] = np.mean(values)
    sums = per_path.mean(axis=0)
    scale = grid.dx if direction == "space" else grid.dt
    lag_values = np.array(lags, dtype=float) * scale
    result = stats.linregress(np.log(lag_values), np.log(sums))
    estimate = HolderEstimate(direction, 0.5 * float(result.slope), 0.5 * float(result.stderr),
                              tuple(lag_values.tolist()), tuple(sums.tolist()))
    logger.info("%s Holder index %.3f +/- %.3f", direction, estimate.exponent, estimate.stderr)
    return estimate
