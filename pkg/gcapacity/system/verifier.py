'''
Systematized experiments: the three-way verification of the two-point capacity
c({B_T ∈ {b, l}}) and the non-quasi-continuity demo for I_{x0}(B_T).
'''
import logging
import math

import numpy as np

from ..analysis.borel_set import BorelSetSpec, Interval
from ..analysis.capacity import CapacityParams, capacity_point, monotone_capacity_sequence, u_n
from ..analysis.special_fn import (exit_probability_quadrature, exit_probability_spectral,
                                   two_barrier_series_detail)
from ..errors import DomainError
from ..pde.gheat_pde import GridConfig, solve_batch, tent, value_at_zero
from ..simulation.control_mc import McConfig, simulate_hitting_probability
from ..utils import log_and_print
from .report import RunReport

logger = logging.getLogger(__name__)

DEFAULT_N_LIST = (1, 10, 100)
DEFAULT_K_LIST = (1, 2, 4, 8, 16, 32, 64)
DEFAULT_TENT_LIST = (1, 2, 4, 8, 16, 32, 64, 128, 256)


class ThreeWayVerifier:
    """
    Cross-validates the closed-form two-point capacity against the density
    quadrature, the G-heat PDE solver and bang-bang Monte Carlo.

    Attributes
    ----------
    b, l : float
        Barriers, b < 0 < l.
    params : CapacityParams
        σ̄, T and the series settings (σ̲ must be 0).
    dx : float
        Spatial step of the PDE grid.
    dt : float, optional
        Time step of the PDE grid; None uses the stability limit.
    half_width : float
        Minimum half-width of the PDE domain; widened to cover the barriers
        plus 6σ̄√(T + 1).
    n_list : tuple of int
        Indices n of the u_n initial data solved by the PDE.
    k_list : tuple of float
        Steepness values of the continuous approximations φ_k of the indicator.
    mc_config : McConfig
        Monte Carlo settings.
    pde_tol, monotone_tol, series_tol : float
        Tolerances of the u_n, φ_64 and spectral/quadrature checks.
    mc_allowance : float
        Discretization-bias allowance added to 3 standard errors.
    max_workers : int, optional
        Threads for the batched PDE solves.
    verbose : bool
        Whether to print progress messages.

    Methods
    -------
    run()
        Computes every value and returns the `RunReport`.
    """

    def __init__(self, b: float, l: float, params: CapacityParams, dx: float = 5e-3,
                 dt: float | None = None, half_width: float = 8.0, n_list=DEFAULT_N_LIST,
                 k_list=DEFAULT_K_LIST, mc_config: McConfig | None = None, pde_tol: float = 5e-3,
                 monotone_tol: float = 1e-2, series_tol: float = 1e-8,
                 mc_allowance: float = 2e-3, max_workers: int | None = None,
                 verbose: bool = False):
        self.b = float(b)
        self.l = float(l)
        self.params = params
        self.dx = dx
        self.dt = dt
        self.half_width = half_width
        self.n_list = tuple(n_list)
        self.k_list = tuple(k_list)
        self.mc_config = mc_config or McConfig(n_paths=1_000_000, dt=1e-4)
        self.pde_tol = pde_tol
        self.monotone_tol = monotone_tol
        self.series_tol = series_tol
        self.mc_allowance = mc_allowance
        self.max_workers = max_workers
        self.verbose = verbose

        self._assertions()
        self.params.require_degenerate()

        reach = max(abs(self.b), self.l) + 6.0 * params.sigma_bar * math.sqrt(params.horizon_T + 1.0)
        self.grid = GridConfig.symmetric(max(self.half_width, reach), self.dx, dt=self.dt)
        self.report = RunReport(command="verify", inputs=self._inputs())
        self.series_value = None

    def run(self) -> RunReport:
        """Runs the four computations and returns the report."""
        log_and_print(f"Verifying c(B_T in {{{self.b}, {self.l}}}) on {self.grid}", logger,
                      self.verbose)

        self._closed_form()
        self._pde_u_n()
        self._monotone_approximation()
        self._monte_carlo()

        log_and_print(f"Verification {'passed' if self.report.passed else 'failed'}", logger,
                      self.verbose)
        return self.report

    def _closed_form(self):
        """Series value, checked against the spectral expansion and the density integral."""
        p = self.params
        series = two_barrier_series_detail(self.b, self.l, p.horizon_T, p.sigma_bar, p.series)
        self.series_value = float(series.value)
        self.report.outputs["series"] = self.series_value
        self.report.outputs["truncation_index"] = series.n_terms

        spectral = exit_probability_spectral(p.horizon_T, 0.0, self.b, self.l, p.sigma_bar, p.series)
        self.report.add_check("series_vs_spectral", self.series_value, spectral, self.series_tol,
                              oracle="eigenfunction expansion of the survival probability")

        integral = exit_probability_quadrature(p.horizon_T, 0.0, self.b, self.l, p.sigma_bar, p.series)
        self.report.outputs["density_integral"] = integral
        self.report.add_check("series_vs_density_integral", self.series_value, integral,
                              self.series_tol, oracle="quadrature of the exit-time density")

        log_and_print(f"series = {self.series_value:.12f} (|i| <= {series.n_terms})", logger,
                      self.verbose)

    def _pde_u_n(self):
        """PDE solves from u_n(0, ·) against the closed form u_n(T, 0)."""
        p, x = self.params, self.grid.nodes()
        initials = np.stack([u_n(n, 0.0, x, self.b, self.l, p) for n in self.n_list])
        finals = solve_batch(initials, p.horizon_T, p, self.grid, max_workers=self.max_workers)
        pde_values = value_at_zero(finals, self.grid)

        closed = {}
        for n, value in zip(self.n_list, pde_values):
            expected = u_n(n, p.horizon_T, 0.0, self.b, self.l, p)
            closed[n] = expected
            self.report.add_check(f"pde_u_{n}", value, expected, self.pde_tol,
                                  oracle=f"closed-form u_{n}(T, 0)")
        self.report.outputs["pde_u_n"] = dict(zip(map(str, self.n_list), pde_values))
        self.report.outputs["closed_form_u_n"] = {str(n): v for n, v in closed.items()}

        log_and_print(f"PDE u_n(T, 0): {np.array2string(pde_values, precision=6)}", logger,
                      self.verbose)

    def _monotone_approximation(self):
        """φ_k ↓ I_{(−∞, b] ∪ [l, ∞)}: nonincreasing PDE values approaching the series."""
        outer = BorelSetSpec(intervals=(Interval(-math.inf, self.b, False, True),
                                        Interval(self.l, math.inf, True, False)))
        values = monotone_capacity_sequence(outer, self.params, self.grid, self.k_list,
                                            max_workers=self.max_workers)
        self.report.outputs["phi_k_values"] = {f"{k:g}": v for k, v in zip(self.k_list, values)}

        steps = np.diff(values)
        self.report.add_flag("phi_k_nonincreasing", bool(np.all(steps <= 1e-12)),
                             oracle="monotone convergence of G-expectations",
                             observed=float(np.max(steps, initial=0.0)))
        self.report.add_check(f"phi_{self.k_list[-1]:g}_vs_series", values[-1], self.series_value,
                              self.monotone_tol, oracle="closed-form two-point series")

    def _monte_carlo(self):
        """Bang-bang hitting probability against the series."""
        estimate = simulate_hitting_probability(self.b, self.l, self.params, self.mc_config)
        self.report.outputs["monte_carlo"] = estimate.to_record()
        self.report.add_check("mc_bang_bang_vs_series", estimate.mean, self.series_value,
                              3.0 * estimate.std_error + self.mc_allowance,
                              oracle="closed-form two-point series (3 std errors + dt allowance)")
        if estimate.coarse_step:
            self.report.notes.append("warning: Monte Carlo step is coarse for these barriers")

        log_and_print(f"Monte Carlo: {estimate!r}", logger, self.verbose)

    def _inputs(self) -> dict:
        return {
            "b": self.b, "l": self.l,
            "sigma_bar": self.params.sigma_bar, "T": self.params.horizon_T,
            "tol": self.params.series.tol, "dx": self.dx, "dt": self.dt,
            "domain": [self.grid.x_min, self.grid.x_max],
            "n_list": self.n_list, "k_list": self.k_list,
            "paths": self.mc_config.n_paths, "dt_mc": self.mc_config.dt,
            "seed": self.mc_config.seed, "bridge": self.mc_config.bridge_correction,
        }

    def _assertions(self):
        """Performs assertions to validate input parameters."""
        message = f"Barriers must satisfy b < 0 < l, got b={self.b}, l={self.l}"
        if not (math.isfinite(self.b) and math.isfinite(self.l) and self.b < 0 < self.l):
            raise DomainError(message)

        message = "n_list and k_list must be nonempty"
        if not self.n_list or not self.k_list:
            raise DomainError(message)

    def __repr__(self):
        return (
            f"{self.__class__.__name__}(\n"
            f"  b={self.b}, l={self.l},\n"
            f"  params={self.params},\n"
            f"  grid={self.grid},\n"
            f"  mc_config={self.mc_config}\n"
            ")"
        )


class NonQuasiContinuityDemo:
    """
    Evaluates Ê[h_n(B_T)] for the tents h_n ↓ I_{x0} and compares the limit with
    c({B_T = x0}) = Φ(|x0|/(σ̄√T)).

    A strictly positive limit is the quantitative obstruction that keeps
    I_{x0}(B_T) out of the closure of continuous functionals: every continuous
    approximation from above costs at least c({B_T = x0}).

    Attributes
    ----------
    x0 : float
        Tent centre.
    params : CapacityParams
        σ̄ and T (σ̲ must be 0 for the closed-form comparison).
    n_list : tuple of int
        Increasing tent indices.
    dx : float
        Spatial step of the PDE grid.
    dt : float, optional
        Time step of the PDE grid; None uses the stability limit.
    tol : float
        Allowed gap between the last term and the closed form.
    max_workers : int, optional
        Threads for the batched solve.
    verbose : bool
        Whether to print progress messages.
    """

    def __init__(self, x0: float, params: CapacityParams, n_list=DEFAULT_TENT_LIST,
                 dx: float = 5e-3, dt: float | None = None, tol: float = 5e-3,
                 max_workers: int | None = None, verbose: bool = False):
        self.x0 = float(x0)
        self.params = params
        self.n_list = tuple(n_list)
        self.dx = dx
        self.dt = dt
        self.tol = tol
        self.max_workers = max_workers
        self.verbose = verbose

        self._assertions()
        self.grid = GridConfig.padded(abs(self.x0) + 1.0, params, params.horizon_T, dx=dx, dt=dt)

    def run(self) -> RunReport:
        """Solves the tent sequence and returns the report."""
        p, x = self.params, self.grid.nodes()
        report = RunReport(command="demo-nonqc",
                           inputs={"x0": self.x0, "sigma_bar": p.sigma_bar, "T": p.horizon_T,
                                   "n_list": self.n_list, "dx": self.dx, "dt": self.dt})

        initials = np.stack([tent(self.x0, n)(x) for n in self.n_list])
        finals = solve_batch(initials, p.horizon_T, p, self.grid, max_workers=self.max_workers)
        values = value_at_zero(finals, self.grid)
        limit = capacity_point(self.x0, p)

        report.outputs["sequence"] = dict(zip(map(str, self.n_list), values))
        report.outputs["closed_form_limit"] = limit
        report.outputs["gap"] = float(values[-1] - limit)

        steps = np.diff(values)
        if self.x0 != 0:
            report.add_flag("sequence_strictly_decreasing", bool(np.all(steps < 0)),
                            oracle="monotone convergence of G-expectations",
                            observed=float(np.max(steps, initial=-math.inf)))
        else:
            report.add_flag("sequence_nonincreasing", bool(np.all(steps <= 1e-12)),
                            oracle="monotone convergence of G-expectations",
                            observed=float(np.max(steps, initial=0.0)))
        report.add_check("limit_vs_point_capacity", values[-1], limit, self.tol,
                         oracle="closed form Phi(|x0|/(sigma_bar*sqrt(T)))")
        report.add_flag("limit_strictly_positive", bool(values[-1] > 0),
                        oracle="point capacity is positive", observed=float(values[-1]))

        report.notes.append(
            f"Every continuous h >= I_{{{self.x0}}} has E^[h(B_T)] >= c(B_T = {self.x0}) = "
            f"{limit:.6f} > 0, so I_{{{self.x0}}}(B_T) cannot be approximated in L1_G "
            "norm by continuous functionals of B_T.")

        log_and_print(f"tent sequence: {np.array2string(values, precision=6)}", logger, self.verbose)
        return report

    def _assertions(self):
        """Performs assertions to validate input parameters."""
        message = f"x0 must be finite, got {self.x0}"
        if not math.isfinite(self.x0):
            raise DomainError(message)

        message = f"n_list must be a nonempty increasing sequence, got {self.n_list}"
        if not self.n_list or any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise DomainError(message)

    def __repr__(self):
        return (f"{self.__class__.__name__}(x0={self.x0}, params={self.params}, "
                f"n_list={self.n_list}, dx={self.dx})")
