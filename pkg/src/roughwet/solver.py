"""Interface energy on a boundary-fitted grid and the stationary wetting solve.

The liquid-air interface ``z = u(x, y)`` lives on ``phi(y) < x < 1`` over
one period in ``y``.  The domain is mapped to the unit rectangle by
``x = phi(y) + xhat (1 - phi(y))``.  Each grid cell is split into
triangles along both diagonals (each split weighted 1/2) and the area
integrand is integrated exactly for piecewise-linear ``u``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .contactline import (
    ContactLine,
    apparent_cosine,
    lift_contact_line,
    partial_wetting_margin,
    periodic_derivative,
    write_contact_line_csv,
)
from .optimize import lbfgs
from .surface import SurfaceSpec

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class PartialWettingError(SolverError):
    """``nu >= 1``: the interface energy is not coercive."""


class StripExhaustedError(SolverError):
    """The contact line left the strip ``|z| < M``."""


@dataclass(frozen=True)
class SolverConfig:
    nx: int = 128              # cells across (0, 1); nodes = nx + 1
    ny: int = 64               # nodes per period in y
    stretch: float = 6.0       # wall clustering of the xhat grid; 0 = uniform
    gtol: float = 1e-9
    max_iter: int = 2000
    memory: int = 10
    armijo_c: float = 1e-4
    shrink: float = 0.5
    fp_damping: float = 0.7
    fp_tol: float = 1e-8
    fp_max_iter: int = 200
    fp_max_step: float = 0.125  # cap on the line update, in periods
    relaxation: str = "aitken"  # or "fixed"
    M: float = 4.0
    line_element: str = "projected"

    def __post_init__(self):
        for name in ("gtol", "fp_tol", "M", "fp_max_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.fp_damping <= 1.0:
            raise ValueError("fp_damping must lie in (0, 1]")
        if self.nx < 2 or self.ny < 16:
            raise ValueError("grid too coarse (need nx >= 2, ny >= 16)")
        if self.relaxation not in ("aitken", "fixed"):
            raise ValueError("relaxation must be 'aitken' or 'fixed'")


def xhat_nodes(nx: int, stretch: float = 0.0) -> np.ndarray:
    """Nodes on ``[0, 1]``, clustered towards the wall when ``stretch > 0``."""
    s = np.linspace(0.0, 1.0, nx + 1)
    if stretch <= 0.0:
        return s
    return np.expm1(stretch * s) / np.expm1(stretch)


@dataclass
class DiscreteInterface:
    """Nodal heights ``u[i, j]`` at ``xhat[i]``, ``y[j]``; ``u[-1, :] = 0``."""

    xhat: np.ndarray
    y: np.ndarray
    phi: np.ndarray
    u: np.ndarray
    eps: float

    @property
    def shape(self):
        return self.u.shape

    @property
    def x(self) -> np.ndarray:
        """Physical x of every node."""
        return self.phi[None, :] + self.xhat[:, None] * (1.0 - self.phi[None, :])

    def check(self, M: float | None = None) -> None:
        if np.any(self.u[-1] != 0.0):
            raise SolverError("interface must vanish on x = 1")
        if M is not None and np.max(np.abs(self.u)) >= M:
            raise StripExhaustedError("interface leaves the strip |z| < M")

    def average_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """y-average at common physical abscissae ``X = xhat`` in ``[0, 1]``."""
        X = self.xhat
        x = self.x
        cols = np.stack([np.interp(X, x[:, j], self.u[:, j]) for j in range(self.y.size)], axis=1)
        return X, cols.mean(axis=1)

    def columns_on(self, X: np.ndarray) -> np.ndarray:
        """Each column interpolated to physical abscissae ``X``; shape (len(X), ny)."""
        x = self.x
        return np.stack([np.interp(X, x[:, j], self.u[:, j]) for j in range(self.y.size)], axis=1)


def flat_seed(cl: ContactLine, cfg: SolverConfig, height: float = 0.0) -> DiscreteInterface:
    """Linear seed from ``height`` at the wall to 0 at ``x = 1``."""
    xh = xhat_nodes(cfg.nx, cfg.stretch)
    u = height * (1.0 - xh)[:, None] * np.ones(cl.n)[None, :]
    return DiscreteInterface(xh, cl.y.copy(), cl.phi.copy(), u, cl.eps)


class InterfaceEnergy:
    """Discrete energy ``E(v) = bulk(v) - line(v)`` for a frozen contact line.

    bulk = (1/eps) * integral of sqrt(1 + |grad v|^2) over the mapped domain,
    line = mean over the line samples of v(phi, y) cos(theta_s - theta_g) w.
    """

    def __init__(self, cl: ContactLine, xhat: np.ndarray):
        self.cl = cl
        self.xhat = np.asarray(xhat, float)
        nx1, ny = self.xhat.size, cl.n
        self.shape = (nx1, ny)
        eps = cl.eps
        dy = eps / ny
        phi = cl.phi
        X = phi[None, :] + self.xhat[:, None] * (1.0 - phi[None, :])
        idx = np.arange(nx1 * ny).reshape(nx1, ny)

        i = np.arange(nx1 - 1)[:, None]
        j = np.arange(ny)[None, :]
        jp = (j + 1) % ny
        A, B = idx[i, j], idx[i + 1, j]
        C, D = idx[i + 1, jp], idx[i, jp]
        xA, xB = X[i, j], X[i + 1, j]
        xC, xD = X[i + 1, jp], X[i, jp]
        y0 = np.broadcast_to(cl.y[None, :], xA.shape)
        y1 = y0 + dy
        pts = {"A": (A, xA, y0), "B": (B, xB, y0), "C": (C, xC, y1), "D": (D, xD, y1)}

        rows, cols, gx, gy, area = [], [], [], [], []
        for tri in (("A", "B", "C"), ("A", "C", "D"), ("A", "B", "D"), ("B", "C", "D")):
            (n0, x0, yy0), (n1, x1, yy1), (n2, x2, yy2) = (pts[k] for k in tri)
            det = (x1 - x0) * (yy2 - yy0) - (x2 - x0) * (yy1 - yy0)
            if np.any(det <= 0.0):
                raise SolverError("degenerate mapped cell; refine the grid")
            coef_x = [(yy1 - yy2) / det, (yy2 - yy0) / det, (yy0 - yy1) / det]
            coef_y = [(x2 - x1) / det, (x0 - x2) / det, (x1 - x0) / det]
            t0 = sum(len(a) for a in area)
            nt = det.size
            for node, cx, cy in zip((n0, n1, n2), coef_x, coef_y):
                rows.append(t0 + np.arange(nt))
                cols.append(node.ravel())
                gx.append(cx.ravel())
                gy.append(cy.ravel())
            area.append((0.5 * det).ravel())

        area = np.concatenate(area)
        ntri = area.size
        r, c = np.concatenate(rows), np.concatenate(cols)
        self.Gx = sp.csr_matrix((np.concatenate(gx), (r, c)), shape=(ntri, nx1 * ny))
        self.Gy = sp.csr_matrix((np.concatenate(gy), (r, c)), shape=(ntri, nx1 * ny))
        # two diagonal splits, each weighted 1/2
        self.weight = 0.5 * area / eps
        self.area = float(area.sum()) * 0.5
        self.line_coef = cl.wetting_term() / ny
        free = np.ones(self.shape, bool)
        free[-1, :] = False
        self.free = free.ravel()

    # -- full nodal arrays -------------------------------------------------
    def _grads(self, u):
        v = np.asarray(u, float).ravel()
        return self.Gx @ v, self.Gy @ v

    def bulk(self, u) -> float:
        gx, gy = self._grads(u)
        return float(self.weight @ np.sqrt(1.0 + gx * gx + gy * gy))

    def line(self, u) -> float:
        return float(np.asarray(u).reshape(self.shape)[0] @ self.line_coef)

    def energy(self, u) -> float:
        return self.bulk(u) - self.line(u)

    def energy_change(self, u_old, u_new) -> float:
        """``energy(u_new) - energy(u_old)`` summed termwise without cancellation."""
        ax, ay = self._grads(u_old)
        step = np.asarray(u_new, float).ravel() - np.asarray(u_old, float).ravel()
        dx, dy = self._grads(step)
        bx, by = ax + dx, ay + dy
        dq = dx * (ax + bx) + dy * (ay + by)
        dW = dq / (np.sqrt(1.0 + ax * ax + ay * ay) + np.sqrt(1.0 + bx * bx + by * by))
        return float(self.weight @ dW - step.reshape(self.shape)[0] @ self.line_coef)

    def gradient(self, u) -> np.ndarray:
        """Exact gradient of :meth:`energy` w.r.t. every nodal value."""
        gx, gy = self._grads(u)
        s = self.weight / np.sqrt(1.0 + gx * gx + gy * gy)
        g = self.Gx.T @ (s * gx) + self.Gy.T @ (s * gy)
        g = g.reshape(self.shape)
        g[0] -= self.line_coef
        return g

    def hessian(self, u) -> sp.csr_matrix:
        gx, gy = self._grads(u)
        W = np.sqrt(1.0 + gx * gx + gy * gy)
        a = self.weight / W
        b = self.weight / W**3
        dxx = sp.diags(a - b * gx * gx)
        dyy = sp.diags(a - b * gy * gy)
        dxy = sp.diags(-b * gx * gy)
        H = (self.Gx.T @ dxx @ self.Gx + self.Gy.T @ dyy @ self.Gy
             + self.Gx.T @ dxy @ self.Gy + self.Gy.T @ dxy @ self.Gx)
        return H.tocsc()

    # -- restricted to free nodes -------------------------------------------
    def _embed(self, v_free):
        full = np.zeros(self.free.size)
        full[self.free] = v_free
        return full

    def preconditioner(self, v_free):
        H = self.hessian(self._embed(v_free))[self.free][:, self.free]
        lu = splu(H.tocsc())
        return lu.solve


@dataclass
class EnergyReport:
    bulk: float
    line: float
    total: float
    homogenized: float


@dataclass
class Solution:
    interface: DiscreteInterface
    contact_line: ContactLine
    energy: EnergyReport
    converged: bool
    status: str
    grad_norm: float
    inner_iterations: int
    outer_iterations: int = 1
    seed_height: float | None = None
    nu: float = float("nan")
    history: list = field(default_factory=list)
    young_residual: float = float("nan")

    @property
    def eps(self) -> float:
        return self.contact_line.eps

    @property
    def surface(self) -> SurfaceSpec:
        return self.contact_line.surface


def discrete_energy(v: DiscreteInterface, cl: ContactLine) -> float:
    _check_regime(cl)
    return InterfaceEnergy(cl, v.xhat).energy(v.u)


def energy_gradient(v: DiscreteInterface, cl: ContactLine) -> np.ndarray:
    """Gradient of :func:`discrete_energy`; entries on ``x = 1`` are zero."""
    _check_regime(cl)
    g = InterfaceEnergy(cl, v.xhat).gradient(v.u)
    g[-1] = 0.0
    return g


def _check_regime(cl: ContactLine) -> float:
    nu = partial_wetting_margin(cl)
    if nu >= 1.0:
        raise PartialWettingError(f"outside partial wetting regime (nu = {nu:.4g})")
    return nu


def homogenized_energy(X: np.ndarray, ubar: np.ndarray, cos_theta_a: float) -> float:
    """``int_0^1 sqrt(1 + v'^2) dx - v(0) cos(theta_a)`` for a sampled profile."""
    seg = np.hypot(np.diff(X), np.diff(ubar))
    return float(seg.sum() - np.interp(0.0, X, ubar) * cos_theta_a)


def solve_pinned(cl: ContactLine, cfg: SolverConfig = SolverConfig(),
                 seed: DiscreteInterface | None = None) -> Solution:
    """Minimize the interface energy for a frozen contact line."""
    nu = _check_regime(cl)
    if cl.n != cfg.ny:
        raise SolverError(f"contact line has {cl.n} samples, grid needs {cfg.ny}")
    if seed is None:
        seed = flat_seed(cl, cfg)
    if seed.u.shape != (cfg.nx + 1, cfg.ny):
        raise SolverError("seed grid does not match the solver grid")
    if np.any(seed.u[-1] != 0.0):
        raise SolverError("seed must vanish on x = 1")
    op = InterfaceEnergy(cl, seed.xhat)
    free = op.free

    def f(v):
        return op.energy(op._embed(v))

    def g(v):
        return op.gradient(op._embed(v)).ravel()[free]

    v0 = seed.u.ravel()[free].copy()
    res = lbfgs(
        f, g, v0,
        precondition=op.preconditioner(v0),
        refresh=op.preconditioner,
        memory=cfg.memory, gtol=cfg.gtol, max_iter=cfg.max_iter,
        c1=cfg.armijo_c, shrink=cfg.shrink,
        delta=lambda a, b: op.energy_change(op._embed(a), op._embed(b)),
    )
    u = op._embed(res.x).reshape(op.shape)
    iface = DiscreteInterface(seed.xhat, cl.y.copy(), cl.phi.copy(), u, cl.eps)
    bulk, line = op.bulk(u), op.line(u)
    X, ubar = iface.average_profile()
    report = EnergyReport(bulk, line, bulk - line,
                          homogenized_energy(X, ubar, apparent_cosine(cl)))
    status = "converged" if res.converged else f"not converged: {res.message}"
    sol = Solution(iface, cl, report, res.converged, status, res.grad_norm, res.nit,
                   nu=nu, history=res.f_history)
    sol.young_residual = young_residual(sol)
    if np.max(np.abs(u)) >= cfg.M:
        sol.converged = False
        sol.status = "strip exhausted"
    return sol


def boundary_normals(sol: Solution):
    """Interface normal ``n_Gamma`` at the contact-line nodes, shape (ny, 3).

    ``d/dxhat`` uses a second-order one-sided difference; the tangential
    derivative comes from the trace ``u(phi(y), y)``.
    """
    iface, cl = sol.interface, sol.contact_line
    xh, u = iface.xhat, iface.u
    h1, h2 = xh[1] - xh[0], xh[2] - xh[1]
    du = (-(2 * h1 + h2) / (h1 * (h1 + h2)) * u[0]
          + (h1 + h2) / (h1 * h2) * u[1]
          - h1 / (h2 * (h1 + h2)) * u[2])
    ux = du / (1.0 - iface.phi)
    trace_slope = periodic_derivative(u[0], cl.eps / cl.n)
    uy = trace_slope - cl.dphi * ux
    n = np.stack([-ux, -uy, np.ones_like(ux)], axis=-1)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def young_residual(sol: Solution) -> float:
    """``max |n_Gamma . n_S - cos theta_s|`` along the contact line."""
    cl = sol.contact_line
    n = boundary_normals(sol)
    return float(np.max(np.abs(np.einsum("ij,ij->i", n, cl.solid_normal) - np.cos(cl.theta_s))))


def identity_residual(sol: Solution) -> float:
    """``max |n_Gamma . m_L - cos(theta_s - theta_g)|`` along the contact line."""
    cl = sol.contact_line
    n = boundary_normals(sol)
    return float(np.max(np.abs(np.einsum("ij,ij->i", n, cl.inner_normal)
                               - np.cos(cl.theta_s - cl.theta_g))))


def _same_line_data(a: ContactLine, b: ContactLine, tol: float = 1e-12) -> bool:
    return (np.max(np.abs(a.phi - b.phi)) <= tol
            and np.max(np.abs(a.wetting_term() - b.wetting_term())) <= tol)


def solve_free(spec: SurfaceSpec, seed_height: float = 0.0,
               cfg: SolverConfig = SolverConfig()) -> Solution:
    """Solve the full problem: interface plus self-consistent contact line.

    Outer loop: freeze the line data at ``psi``, minimize the interface
    energy, read the new line height ``u(phi, y)`` and relax towards it.
    The relaxation factor starts at ``cfg.fp_damping`` and is updated by
    Aitken's rule unless ``cfg.relaxation == "fixed"``; each update is
    capped at ``cfg.fp_max_step`` periods.  Different ``seed_height``
    values may land on different solutions.
    """
    if abs(seed_height) >= cfg.M:
        raise StripExhaustedError("seed height outside the strip |z| < M")
    psi = np.full(cfg.ny, float(seed_height))
    lam = cfg.fp_damping
    cap = cfg.fp_max_step * spec.eps
    r_prev = None
    seed = None
    history: list[float] = []
    sol = None
    for k in range(1, cfg.fp_max_iter + 1):
        cl = lift_contact_line(spec, psi, cfg.ny, cfg.line_element)
        if seed is None:
            seed = flat_seed(cl, cfg, float(seed_height))
        sol = solve_pinned(cl, cfg, seed)
        sol.outer_iterations = k
        sol.seed_height = float(seed_height)
        sol.history = history
        if sol.status == "strip exhausted":
            return sol
        if not sol.converged:
            sol.status = f"inner solve failed at outer iteration {k}: {sol.status}"
            return sol
        trace = sol.interface.u[0].copy()
        r = trace - psi
        rnorm = float(np.max(np.abs(r)))
        history.append(rnorm)
        log.debug("outer %d: |psi_new - psi| = %.3e, lambda = %.3g", k, rnorm, lam)
        if rnorm < cfg.fp_tol:
            return sol
        cl_new = lift_contact_line(spec, trace, cfg.ny, cfg.line_element)
        if _same_line_data(cl, cl_new):
            # line data do not depend on the height: u is already self-consistent
            sol.contact_line = cl_new
            sol.young_residual = young_residual(sol)
            return sol
        if cfg.relaxation == "aitken" and r_prev is not None:
            dr = r - r_prev
            dd = float(dr @ dr)
            if dd > 0.0:
                lam = -lam * float(r_prev @ dr) / dd
        step = lam * r
        smax = float(np.max(np.abs(step)))
        if smax > cap:
            step *= cap / smax
            lam *= cap / smax
        psi = psi + step
        r_prev = r
        seed = replace(sol.interface)
        if np.max(np.abs(psi)) >= cfg.M:
            sol.converged = False
            sol.status = "strip exhausted"
            return sol
    sol.converged = False
    sol.status = f"fixed point not converged after {cfg.fp_max_iter} outer iterations"
    return sol


def write_solution_csv(sol: Solution, path: str | Path) -> tuple[Path, Path]:
    """Write nodal heights and the companion contact-line CSV.

    The nodal file starts with ``# key=value`` metadata lines followed by
    columns ``i, j, xhat, x, y, u``.  The contact line goes next to it as
    ``<stem>_line.csv``.
    """
    path = Path(path)
    iface, cl = sol.interface, sol.contact_line
    x = iface.x
    meta = {
        "nx_nodes": iface.u.shape[0], "ny_nodes": iface.u.shape[1],
        "eps": repr(float(sol.eps)), "converged": sol.converged,
        "status": sol.status, "outer_iterations": sol.outer_iterations,
        "energy_total": f"{sol.energy.total:.12g}",
        "young_residual": f"{sol.young_residual:.6g}",
    }
    with path.open("w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["i", "j", "xhat", "x", "y", "u"])
        for i in range(iface.u.shape[0]):
            for j in range(iface.u.shape[1]):
                w.writerow([i, j, f"{iface.xhat[i]:.12g}", f"{x[i, j]:.12g}",
                            f"{iface.y[j]:.12g}", f"{iface.u[i, j]:.12g}"])
    line_path = path.with_name(path.stem + "_line.csv")
    write_contact_line_csv(cl, line_path)
    return path, line_path


def read_solution_csv(path: str | Path) -> tuple[dict, np.ndarray]:
    """Return ``(metadata, u)`` from :func:`write_solution_csv` output."""
    meta = {}
    with Path(path).open() as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
    data = np.genfromtxt(path, delimiter=",", names=True, skip_header=len(meta))
    nx1, ny = int(meta["nx_nodes"]), int(meta["ny_nodes"])
    return meta, data["u"].reshape(nx1, ny)
