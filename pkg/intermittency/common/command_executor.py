"""
Command Executor
Runs the bounds, simulate, renewal and classify commands against a loaded
configuration and writes their outputs.
"""

import dataclasses
import logging
import math
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from intermittency.bounds import (
    Constant,
    DeadZone,
    Linear,
    SublinearRequest,
    exact_anderson_gamma,
    full_report,
    gamma2_lower_bound,
    gamma_p_upper_bound,
    holder_indices,
    sublinear_sufficient_eta,
    transient_smallness_threshold,
)
from intermittency.common.config_loader import RunConfig
from intermittency.common.errors import DomainError, LabError
from intermittency.common.moment_curve import CSV_COLUMNS, MomentCurve
from intermittency.common.result_writers import ResultWriter
from intermittency.levy_symbol import Recurrence, classify_recurrence, has_local_times
from intermittency.renewal import (
    VolterraProblem,
    divergence_threshold,
    laplace_fixed_point,
    mesh_laplace_transform,
    solve_lattice_second_moment,
    solve_second_moment,
)
from intermittency.simulator import holder_estimate, picard_diagnostic, run_ensemble
from intermittency.upsilon import UpsilonEvaluator, upsilon_inverse, upsilon_sup

logger = logging.getLogger(__name__)

COMMANDS = ("bounds", "simulate", "renewal", "classify")
AGREEMENT_HORIZON = 20.0


def _label(config: RunConfig) -> str:
    return config.optional("output.label", str, "a string", Path(config.source).stem)


def _linear_constant(model) -> bool:
    return isinstance(model.sigma, Linear) and isinstance(model.u0, Constant) and model.u0.eta > 0


def cmd_bounds(config: RunConfig, writer: ResultWriter, seed: Optional[int] = None) -> Dict:
    model = config.model()
    report = full_report(
        model, config.p_list(), config.beta_list(), config.sublinear(),
        holder_theta=config.optional("bounds.holder_theta", float, "a positive real"),
    )
    writer.write_json("bounds_report", {"command": "bounds", "label": _label(config), "seed": seed,
                                        **report.to_dict()})
    writer.write_csv("bounds_report", report.csv_rows(_label(config)))
    return {
        "verdict": report.weakly_intermittent.value,
        "gamma2_lower": report.gamma2_lower,
        "gamma_p_upper": report.gamma_p_upper,
        "errors": report.errors,
    }


def _renewal_problem(config: RunConfig, model, default_t_max: float) -> VolterraProblem:
    return VolterraProblem(
        model.sym, model.sigma.lam, model.u0.eta,
        t_max=config.optional("renewal.t_max", float, "a positive real", default_t_max),
        step=config.optional("renewal.step", float, "a positive real", 0.02),
    )


def _agreement(sim: MomentCurve, renewal: MomentCurve, lattice: MomentCurve) -> Dict:
    """Simulation vs continuum renewal within 3 standard errors plus the lattice bias"""
    mask = sim.times <= AGREEMENT_HORIZON
    times = sim.times[mask]
    continuum = np.interp(times, renewal.times, renewal.moments)
    discrete = np.interp(times, lattice.times, lattice.moments)
    bias = np.abs(discrete - continuum)
    allowed = 3.0 * sim.stderr[mask] + bias + 1e-12 * continuum
    excess = np.abs(sim.moments[mask] - continuum) - allowed
    return {
        "horizon": AGREEMENT_HORIZON,
        "agrees": bool(np.all(excess <= 0)),
        "worst_time": float(times[int(np.argmax(excess))]),
        "max_grid_bias": float(bias.max()),
    }


def cmd_simulate(config: RunConfig, writer: ResultWriter, seed: int, threads: int = 1) -> Dict:
    model = config.model()
    grid = config.grid(seed)
    p_list = config.p_list()
    window = config.optional("simulate.fit_window", list, "[t_start, t_end]")
    result = run_ensemble(
        grid, model, p_list, workers=threads,
        fit_window=tuple(float(v) for v in window) if window else None,
        keep_snapshot=config.optional("output.snapshot", bool, "true or false", False),
    )
    rows = [row for curve in result.curves for row in curve.csv_rows()]
    writer.write_csv("moments", rows, CSV_COLUMNS)

    summary: Dict = {
        "command": "simulate",
        "label": _label(config),
        "seed": seed,
        "model": model.describe(),
        "grid": dataclasses.asdict(grid),
        "fits": {str(c.p): c.fitted_gamma.to_dict() for c in result.curves},
        "diagnostics": result.diagnostics.to_dict(),
        "predictions": {},
        "errors": {},
    }
    predictions = summary["predictions"]
    try:
        predictions["gamma_p_upper"] = {str(p): gamma_p_upper_bound(model, p) for p in p_list}
        predictions["gamma2_lower"] = gamma2_lower_bound(model).value
        kappa_alpha = model.sym.stable_params()
        if isinstance(model.sigma, Linear) and kappa_alpha and kappa_alpha[1] == 2:
            predictions["exact"] = {str(p): exact_anderson_gamma(p, model.sigma.lam, kappa_alpha[0])
                                    for p in p_list}
    except LabError as exc:
        summary["errors"]["predictions"] = str(exc)

    if _linear_constant(model) and 2 in p_list:
        try:
            renewal = solve_second_moment(_renewal_problem(config, model, max(grid.t_max, 60.0)))
            lattice = solve_lattice_second_moment(model.sym, model.sigma.lam, model.u0.eta, grid.dt,
                                                  grid.n_steps, grid.n_points, grid.length)
            writer.write_csv("lattice_moment", lattice.csv_rows()[::grid.record_every], CSV_COLUMNS)
            predictions["renewal_slope"] = renewal.fitted_gamma.slope
            summary["agreement"] = _agreement(result.curve(2), renewal, lattice)
        except LabError as exc:
            summary["errors"]["renewal"] = str(exc)

    if config.optional("simulate.holder", bool, "true or false", False):
        holder_grid = dataclasses.replace(
            grid, n_paths=config.optional("simulate.holder_paths", int, "a positive integer", 16))
        burn_in = config.optional("simulate.burn_in", float, "a nonnegative real", 5.0)
        summary["holder"] = {}
        for direction in ("space", "time"):
            try:
                summary["holder"][direction] = holder_estimate(holder_grid, model, direction, burn_in).to_dict()
            except LabError as exc:
                summary["errors"][f"holder_{direction}"] = str(exc)
        try:
            temporal, spatial = holder_indices(model.sym)
            summary["holder"]["predicted"] = {"temporal": temporal, "spatial": spatial}
        except LabError as exc:
            summary["errors"]["holder_predicted"] = str(exc)

    if config.get("simulate.picard") is not None:
        picard_grid = dataclasses.replace(
            grid,
            n_paths=config.optional("simulate.picard.paths", int, "a positive integer", 8),
            t_max=config.optional("simulate.picard.T", float, "a positive real", min(grid.t_max, 4.0)),
        )
        try:
            summary["picard"] = picard_diagnostic(
                picard_grid, model,
                beta=config.require("simulate.picard.beta", float, "a positive real"),
                p=config.optional("simulate.picard.p", int, "an even integer", 2),
                n_iters=config.optional("simulate.picard.iterations", int, "an integer >= 2", 6),
            ).to_dict()
        except LabError as exc:
            summary["errors"]["picard"] = str(exc)

    if result.snapshot is not None:
        writer.write_snapshot("snapshot_path0", result.snapshot.values, {
            "N": grid.n_points, "L": grid.length, "t": result.snapshot.time, "seed": seed})

    summary["curves"] = [c.to_dict() for c in result.curves]
    writer.write_json("simulation_summary", summary)
    return {"fits": summary["fits"], "predictions": predictions, "errors": summary["errors"]}


def cmd_renewal(config: RunConfig, writer: ResultWriter, seed: Optional[int] = None) -> Dict:
    model = config.model()
    if not _linear_constant(model):
        raise DomainError("the renewal solver needs linear sigma and constant initial data eta > 0")
    problem = _renewal_problem(config, model, 120.0)
    curve = solve_second_moment(problem)
    writer.write_csv("renewal_moment", curve.csv_rows(), CSV_COLUMNS)

    transforms = []
    for beta in config.optional("renewal.transform_betas", list, "a list of positive reals", [0.5, 1.0, 2.0]):
        closed = laplace_fixed_point(problem, float(beta))
        entry = {"beta": float(beta), "closed_form": closed}
        if math.isfinite(closed):
            mesh = mesh_laplace_transform(curve, float(beta))
            entry.update({"mesh": mesh, "relative_error": abs(mesh - closed) / closed})
        transforms.append(entry)

    refinement = None
    if config.optional("renewal.richardson", bool, "true or false", True):
        fine = solve_second_moment(dataclasses.replace(problem, step=problem.step / 2.0))
        coarse_slope, fine_slope = curve.fitted_gamma.slope, fine.fitted_gamma.slope
        refinement = {"fine_slope": fine_slope,
                      "relative_shift": abs(fine_slope - coarse_slope) / abs(fine_slope) if fine_slope else 0.0}

    flip = divergence_threshold(problem)
    inverse = upsilon_inverse(UpsilonEvaluator(model.sym), model.sigma.lam ** -2)
    summary = {
        "command": "renewal",
        "label": _label(config),
        "seed": seed,
        "model": model.describe(),
        "curve": curve.to_dict(),
        "transforms": transforms,
        "refinement": refinement,
        "divergence_threshold": {"bisection": flip, "upsilon_inverse": inverse,
                                 "difference": abs(flip - inverse)},
    }
    writer.write_json("renewal_summary", summary)
    return {"slope": curve.fitted_gamma.slope, "divergence_threshold": flip}


def cmd_classify(config: RunConfig, writer: ResultWriter, seed: Optional[int] = None) -> Dict:
    sym = config.generator()
    local_times = has_local_times(sym)
    recurrence = classify_recurrence(sym)
    document: Dict = {
        "command": "classify",
        "label": _label(config),
        "seed": seed,
        "generator": sym.describe(),
        "recurrence": recurrence.value,
        "local_times": local_times,
        "upsilon_sup": upsilon_sup(UpsilonEvaluator(sym)) if local_times else math.inf,
        "delta_p": {},
        "errors": {},
    }
    if not local_times:
        document["errors"]["solution_theory"] = "generator admits no solution theory (Upsilon is infinite)"
    if recurrence is Recurrence.TRANSIENT and local_times:
        for p in config.p_list("classify.p_list"):
            document["delta_p"][str(p)] = transient_smallness_threshold(sym, p)
    if local_times:
        temporal, spatial = holder_indices(sym)
        document["holder_exponents"] = {"temporal": temporal, "spatial": spatial}

    request: Optional[SublinearRequest] = config.sublinear()
    if request is not None and "sigma" in config.data:
        model = config.model()
        try:
            A = request.A
            if A is None and isinstance(model.sigma, DeadZone):
                A = model.sigma.linearity_onset(request.q0)
            if A is None:
                raise DomainError("linearity onset A must be given for this nonlinearity")
            threshold = sublinear_sufficient_eta(model, A, request.q0, request.beta)
            document["sublinear"] = dataclasses.asdict(threshold)
        except LabError as exc:
            document["errors"]["sublinear"] = str(exc)

    writer.write_json("classification", document)
    return {"recurrence": recurrence.value, "local_times": local_times, "delta_p": document["delta_p"]}


class CommandExecutor:
    """Dispatches one command and reports how long it took"""

    def __init__(self, config: RunConfig, writer: ResultWriter, seed: Optional[int], threads: int = 1):
        self.config = config
        self.writer = writer
        self.seed = seed
        self.threads = threads

    def execute(self, command: str) -> Dict:
        if command not in COMMANDS:
            raise DomainError(f"unknown command {command!r}, expected one of {', '.join(COMMANDS)}")
        print(f"Executing {command} ({self.config.source})")
        start = time.time()
        if command == "bounds":
            summary = cmd_bounds(self.config, self.writer, self.seed)
        elif command == "simulate":
            summary = cmd_simulate(self.config, self.writer, self.seed, self.threads)
        elif command == "renewal":
            summary = cmd_renewal(self.config, self.writer, self.seed)
        else:
            summary = cmd_classify(self.config, self.writer, self.seed)
        elapsed = time.time() - start
        for field_name, message in summary.get("errors", {}).items():
            logger.warning("%s: %s", field_name, message)
        print(f"   {command}: {len(self.writer.written)} files in {elapsed:.3f}s")
        return summary

    @property
    def written(self) -> List[Path]:
        return list(self.writer.written)
