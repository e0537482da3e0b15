#!/usr/bin/env python3
"""
Weak-Intermittency Laboratory - Demo Script
Compares the three estimates of the second-moment growth rate for the
parabolic Anderson model with Brownian generator: closed form, renewal
solver and a small Monte Carlo ensemble.
"""

import argparse
import sys
import time

from intermittency.bounds import exact_anderson_gamma, gamma_p_upper_bound
from intermittency.common.config_loader import ConfigLoader
from intermittency.common.errors import LabError
from intermittency.common.moment_curve import fit_gamma, fit_late_gamma
from intermittency.renewal import VolterraProblem, solve_second_moment
from intermittency.simulator import run_ensemble


# Small enough to finish in well under a minute on one core
QUICK_GRID = ("grid.N=128", "grid.L=32.0", "grid.T=10.0", "grid.M=200", "simulate.fit_window=[4.0, 10.0]")


class DemoRunner:
    """Simple demo runner with nice output formatting"""

    def __init__(self, preset: str = "pam_brownian", quick: bool = True, threads: int = 1):
        overrides = QUICK_GRID if quick else ()
        self.config = ConfigLoader().load(preset, overrides)
        self.model = self.config.model()
        self.threads = threads

    def print_header(self, title: str):
        """Print a formatted header"""
        print("\n" + "=" * 60)
        print(f"INTERMITTENCY DEMO: {title}")
        print("=" * 60)

    def print_separator(self):
        """Print a separator line"""
        print("-" * 60)

    def analytic(self) -> float:
        kappa, alpha = self.model.sym.stable_params() or (None, None)
        if alpha != 2:
            raise LabError("closed-form comparison needs the Brownian generator")
        gamma = exact_anderson_gamma(2, self.model.sigma.lam, kappa)
        print("\nANALYTIC")
        print(f"   gamma(2) = lambda^4 / (8 kappa) = {gamma:.6f}")
        print(f"   upper bound for p=2: {gamma_p_upper_bound(self.model, 2):.6f}")
        return gamma

    def renewal(self) -> float:
        problem = VolterraProblem(self.model.sym, self.model.sigma.lam, self.model.u0.eta,
                                  t_max=self.config.optional("renewal.t_max", float, "a positive real", 120.0),
                                  step=self.config.optional("renewal.step", float, "a positive real", 0.02))
        start = time.time()
        curve = solve_second_moment(problem)
        fit = fit_late_gamma(curve)
        print("\nRENEWAL SOLVER")
        print(f"   {problem.n_steps} steps of size {problem.step} up to t = {problem.t_max}")
        print(f"   fitted slope of (1/t) log E|u|^2: {fit.slope:.6f} +/- {fit.stderr:.1e}")
        print(f"   solve time: {time.time() - start:.3f} seconds")
        return fit.slope

    def simulation(self) -> float:
        grid = self.config.grid(self.config.seed or 0)
        window = tuple(float(v) for v in self.config.require("simulate.fit_window", list, "[t_start, t_end]"))
        start = time.time()
        result = run_ensemble(grid, self.model, [2], workers=self.threads, fit_window=window)
        curve = result.curve(2)
        fit = curve.fitted_gamma or fit_gamma(curve, *window)
        print("\nMONTE CARLO")
        print(f"   N={grid.n_points} L={grid.length} dt={grid.dt} T={grid.t_max} M={grid.n_paths}")
        print(f"   fitted slope over t in [{window[0]}, {window[1]}]: {fit.slope:.6f} +/- {fit.stderr:.1e}")
        if fit.refused:
            print(f"   WARNING: fit refused ({fit.reason})")
        print(f"   run time: {time.time() - start:.3f} seconds")
        return fit.slope

    def run_comparison(self):
        self.print_header("SECOND MOMENT GROWTH, PARABOLIC ANDERSON MODEL")
        exact = self.analytic()
        self.print_separator()
        renewal = self.renewal()
        self.print_separator()
        simulated = self.simulation()

        self.print_separator()
        print("\nCOMPARISON")
        print(f"   {'source':<12} {'gamma(2)':>12} {'rel. error':>12}")
        for name, value in (("analytic", exact), ("renewal", renewal), ("monte carlo", simulated)):
            print(f"   {name:<12} {value:>12.6f} {abs(value - exact) / exact:>12.2%}")
        print("\n" + "=" * 60)
        print("Demo completed!")
        print("=" * 60)


def main():
    """Main demo function"""
    parser = argparse.ArgumentParser(description='Weak-Intermittency Laboratory Demo')
    parser.add_argument('--preset', '-p', default='pam_brownian', help='Preset to demonstrate')
    parser.add_argument('--full', action='store_true', help='Use the preset grid instead of the quick one')
    parser.add_argument('--threads', '-t', type=int, default=1, help='Worker processes for the simulator')
    args = parser.parse_args()

    try:
        DemoRunner(args.preset, quick=not args.full, threads=args.threads).run_comparison()
    except LabError as e:
        print(f"ERROR: {e}")
        sys.exit(e.exit_code)
    except KeyboardInterrupt:
        print("\nDemo interrupted by user")
        sys.exit(1)


if __name__ == "__main__":
    main()
