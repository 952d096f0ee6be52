"""Homogenized interface: y-average, planar fit, error norms and eps-sweeps.

The homogenized interface is the plane ``u0 = k (1 - x)`` whose slope
encodes the apparent angle through ``cos(theta_a) = k / sqrt(1 + k^2)``.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .contactline import TotalWettingError, apparent_angle, apparent_cosine
from .solver import Solution, SolverConfig, homogenized_energy, solve_free
from .surface import SurfaceSpec

log = logging.getLogger(__name__)

GRID_TOL = 1e-3


def slope_to_angle(k: float) -> float:
    """Apparent angle of the plane ``k (1 - x)``."""
    return float(math.atan2(1.0, k))


@dataclass(frozen=True)
class HomogenizedFit:
    k: float
    theta_a: float
    window: tuple[float, float]
    residual: float
    planar: bool = True

    def __post_init__(self):
        lo, hi = self.window
        if not 0.1 <= lo < hi < 1.0:
            raise ValueError("fit window must satisfy 0.1 <= x_lo < x_hi < 1")

    @property
    def cos_theta_a(self) -> float:
        return self.k / math.sqrt(1.0 + self.k * self.k)

    def profile(self, x):
        return self.k * (1.0 - np.asarray(x, float))


def y_average(sol: Solution) -> tuple[np.ndarray, np.ndarray]:
    """``(X, ubar)`` on physical abscissae ``X`` in ``[0, 1]``.

    Every column is interpolated to the common abscissae and the periodic
    trapezoid rule in ``y`` (uniform samples) reduces to the plain mean.
    """
    return sol.interface.average_profile()


def fit_linear(X, ubar, window=(0.3, 0.9), n_resample: int = 201,
               planar_tol: float = 10 * GRID_TOL) -> HomogenizedFit:
    """Least-squares plane through ``(1, 0)`` fitted to ``ubar`` on ``window``.

    The profile is resampled uniformly on the window so that clustered
    grid nodes do not dominate the fit.
    """
    lo, hi = map(float, window)
    X, ubar = np.asarray(X, float), np.asarray(ubar, float)
    xs = np.linspace(lo, hi, n_resample)
    us = np.interp(xs, X, ubar)
    w = 1.0 - xs
    k = float(w @ us / (w @ w))
    res = float(np.max(np.abs(us - k * w)))
    fit = HomogenizedFit(k, slope_to_angle(k), (lo, hi), res, res <= planar_tol)
    if not fit.planar:
        log.warning("not planar on window %s: residual %.3g", fit.window, res)
    return fit


def error_norms(sol: Solution, fit: HomogenizedFit, x_min: float | None = None):
    """``(est1, est2)``: distance of the solution from the plane ``fit``.

    est1 is the max-norm of ``ubar - u0`` on ``[x_min, 1]``; by default
    ``x_min = max(0, max_y phi)``, the left end of the range where every
    column is defined.  est2 is the largest ``L1(0, 1)`` distance of a
    single column from ``u0`` (trapezoid rule on the grid abscissae).
    """
    X, ubar = y_average(sol)
    if x_min is None:
        x_min = max(0.0, float(np.max(sol.interface.phi)))
    keep = X >= x_min
    u0 = fit.profile(X)
    est1 = float(np.max(np.abs(ubar - u0)[keep]))
    cols = sol.interface.columns_on(X)
    est2 = float(np.max(np.trapezoid(np.abs(cols - u0[:, None]), X, axis=0)))
    return est1, est2


def homogenized_minimizer(theta_a: float, x=None):
    """``(u0, E(u0))`` for the homogenized energy with apparent angle ``theta_a``."""
    if not 0.0 < theta_a < math.pi:
        raise ValueError("theta_a must lie in (0, pi)")
    c = math.cos(theta_a)
    k = c / math.sqrt(1.0 - c * c)
    x = np.linspace(0.0, 1.0, 101) if x is None else np.asarray(x, float)
    return k * (1.0 - x), 1.0 / math.sqrt(1.0 + k * k)


# ---------------------------------------------------------------------------
# runtime checks of the convergence bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    tol: float = GRID_TOL

    @property
    def slack(self) -> float:
        return self.rhs + self.tol - self.lhs

    @property
    def ok(self) -> bool:
        return bool(self.slack >= 0.0)

    def __str__(self):
        return f"{self.name}: {self.lhs:.6g} <= {self.rhs:.6g} (+{self.tol:g}) {'ok' if self.ok else 'VIOLATED'}"


def bound_checks(sol: Solution, tol: float = GRID_TOL) -> list[BoundCheck]:
    """Column spread, energy of the average and the homogenized-energy bracket."""
    eps, nu = sol.eps, sol.nu
    hsup = sol.surface.geometry.sup_norm
    total = sol.energy.total
    X, ubar = y_average(sol)
    cols = sol.interface.columns_on(X)
    spread = float(np.max(np.trapezoid(np.abs(cols - ubar[:, None]), X, axis=0)))
    cos_a = apparent_cosine(sol.contact_line)
    e_bar = homogenized_energy(X, ubar, cos_a)
    e_u0 = 1.0 / math.sqrt(1.0 + cos_a**2 / (1.0 - cos_a**2))
    return [
        BoundCheck("column spread", spread, eps * total / (1.0 - nu), tol),
        BoundCheck("energy of average", e_bar,
                   total + 2.0 * nu * (1.0 + hsup) * eps / (1.0 - nu), tol),
        BoundCheck("bracket lower", total - eps * hsup, e_u0, tol),
        BoundCheck("bracket upper", e_u0, 1.0, tol),
    ]


# ---------------------------------------------------------------------------
# eps-sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    eps: float
    est1: float
    est2: float
    theta_meas: float
    theta_formula: float
    nu: float
    converged: bool
    status: str
    bounds_ok: bool
    seconds: float = float("nan")


@dataclass
class ConvergenceReport:
    rows: list[SweepRow]
    slope: float | None
    C1: float
    C2: float
    C2_bound: float
    partial: bool
    meta: dict = field(default_factory=dict)

    @property
    def eps(self) -> np.ndarray:
        return np.array([r.eps for r in self.rows])

    @property
    def est1(self) -> np.ndarray:
        return np.array([r.est1 for r in self.rows])

    @property
    def est2(self) -> np.ndarray:
        return np.array([r.est2 for r in self.rows])

    def constant_spread(self, which: str = "est1") -> float:
        """``max(est/eps) / min(est/eps)`` over the sweep."""
        c = getattr(self, which) / self.eps
        return float(c.max() / c.min())

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "est1", "est2", "est1_over_eps", "est2_over_eps",
                        "theta_meas_deg", "cos_theta_meas", "theta_formula_deg",
                        "cos_theta_formula", "nu", "converged", "bounds_ok"])
            for r in self.rows:
                w.writerow([f"{r.eps:.12g}", f"{r.est1:.6e}", f"{r.est2:.6e}",
                            f"{r.est1 / r.eps:.6e}", f"{r.est2 / r.eps:.6e}",
                            f"{math.degrees(r.theta_meas):.6f}", f"{math.cos(r.theta_meas):.9f}",
                            f"{math.degrees(r.theta_formula):.6f}", f"{math.cos(r.theta_formula):.9f}",
                            f"{r.nu:.6f}", int(r.converged), int(r.bounds_ok)])
        return path

    def write_plot_data(self, path) -> Path:
        """Log-log pairs for external plotting."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["log10_eps", "log10_est1", "log10_est2"])
            for r in self.rows:
                w.writerow([f"{math.log10(r.eps):.9f}",
                            f"{math.log10(max(r.est1, 1e-300)):.9f}",
                            f"{math.log10(max(r.est2, 1e-300)):.9f}"])
        return path


def loglog_slope(eps, est, floor: float = 1e-10) -> float | None:
    """Least-squares slope of ``log est`` against ``log eps``; None when est is at noise level."""
    eps, est = np.asarray(eps, float), np.asarray(est, float)
    if np.any(est <= floor):
        return None
    return float(np.polyfit(np.log(eps), np.log(est), 1)[0])


def _sweep_one(family, eps, cfg, seed_height, window):
    import time

    t0 = time.perf_counter()
    spec = family(eps)
    sol = solve_free(spec, seed_height, cfg)
    X, ubar = y_average(sol)
    fit = fit_linear(X, ubar, window)
    est1, est2 = error_norms(sol, fit)
    try:
        theta_f = apparent_angle(sol.contact_line)
    except TotalWettingError:
        theta_f = float("nan")
    ok = all(c.ok for c in bound_checks(sol)) if sol.converged else False
    return SweepRow(float(eps), est1, est2, fit.theta_a, theta_f, sol.nu,
                    sol.converged, sol.status, ok, time.perf_counter() - t0)


def convergence_study(family: Callable[[float], SurfaceSpec], eps_list: Sequence[float],
                      cfg: SolverConfig = SolverConfig(), seed_height: float = 0.0,
                      window=(0.3, 0.9), workers: int = 1) -> ConvergenceReport:
    """Solve on every eps of ``eps_list`` and fit the rate of est1.

    ``family(eps)`` builds the surface.  Solves run on a thread pool when
    ``workers > 1``; rows are always ordered by decreasing eps.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("need at least three eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda e: _sweep_one(family, e, cfg, seed_height, window), eps_list))
    else:
        rows = [_sweep_one(family, e, cfg, seed_height, window) for e in eps_list]
    eps = np.array(eps_list)
    est1 = np.array([r.est1 for r in rows])
    est2 = np.array([r.est2 for r in rows])
    nu = max(r.nu for r in rows)
    hsup = family(eps_list[0]).geometry.sup_norm
    return ConvergenceReport(
        rows=rows,
        slope=loglog_slope(eps, est1),
        C1=float(np.max(est1 / eps)),
        C2=float(np.max(est2 / eps)),
        C2_bound=(1.0 + nu) * (1.0 + hsup) / (1.0 - nu) if nu < 1 else float("inf"),
        partial=not all(r.converged for r in rows),
    )
