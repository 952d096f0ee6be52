"""Periodic rough and chemically patterned walls.

A wall is described on the unit cell by a dimensionless height ``h(Y, Z)``
(the wall sits at ``x = eps * h(y/eps, z/eps)``) and a Young's-angle field
``theta_s(Y, Z)``.  Both are 1-periodic in ``Y`` and ``Z``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

TWO_PI = 2.0 * math.pi


class SurfaceError(ValueError):
    """Invalid surface description."""


class QuadratureError(RuntimeError):
    """Composite quadrature did not reach its tolerance."""


def _zeros(Y, Z):
    return np.zeros(np.broadcast(np.asarray(Y), np.asarray(Z)).shape)


@dataclass(frozen=True)
class CellGeometry:
    """Height of the wall on the unit cell, with its analytic gradient."""

    h: Field
    dh_dY: Field
    dh_dZ: Field
    sup_norm: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    flat: bool = False
    depends_on_z: bool = True

    def __call__(self, Y, Z):
        return self.h(Y, Z)


@dataclass(frozen=True)
class WettabilityField:
    """Young's angle (radians) on the unit cell.

    ``breaks_Y``/``breaks_Z`` list the discontinuity locations inside
    ``(0, 1)`` so quadrature panels can be aligned with them.
    """

    theta: Field
    name: str = "custom"
    params: dict = field(default_factory=dict)
    homogeneous: bool = False
    breaks_Y: tuple = ()
    breaks_Z: tuple = ()

    def __call__(self, Y, Z):
        return self.theta(Y, Z)


@dataclass(frozen=True)
class SurfaceSpec:
    geometry: CellGeometry
    chemistry: WettabilityField
    eps: float
    n_periods: int = 1

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise SurfaceError(f"eps must lie in (0, 1], got {self.eps}")
        if int(self.n_periods) != self.n_periods or self.n_periods < 1:
            raise SurfaceError("strip width must be a positive integer number of periods")

    @property
    def width(self) -> float:
        """Strip width ``a`` in physical units."""
        return self.n_periods * self.eps

    @property
    def is_flat(self) -> bool:
        return self.geometry.flat

    @property
    def is_homogeneous(self) -> bool:
        return self.chemistry.homogeneous


# ---------------------------------------------------------------------------
# physical-scale evaluations
# ---------------------------------------------------------------------------

def physical_height(spec: SurfaceSpec, y, z):
    eps = spec.eps
    return eps * spec.geometry.h(np.asarray(y) / eps, np.asarray(z) / eps)


def height_gradient(spec: SurfaceSpec, y, z):
    """Physical ``(d h_eps/dy, d h_eps/dz)``; the eps factors cancel."""
    eps = spec.eps
    Y, Z = np.asarray(y) / eps, np.asarray(z) / eps
    return spec.geometry.dh_dY(Y, Z), spec.geometry.dh_dZ(Y, Z)


def solid_normal(spec: SurfaceSpec, y, z) -> np.ndarray:
    """Unit normal ``(1, -h_y, -h_z)/norm`` of the wall; shape ``(..., 3)``."""
    hy, hz = height_gradient(spec, y, z)
    hy, hz = np.broadcast_arrays(np.asarray(hy, float), np.asarray(hz, float))
    n = np.stack([np.ones_like(hy), -hy, -hz], axis=-1)
    return n / np.sqrt(1.0 + hy**2 + hz**2)[..., None]


def young_angle(spec: SurfaceSpec, y, z):
    eps = spec.eps
    return spec.chemistry.theta(np.asarray(y) / eps, np.asarray(z) / eps)


# ---------------------------------------------------------------------------
# cell quadrature
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = leggauss(4)


def _panels(n: int, breaks: Sequence[float]) -> np.ndarray:
    edges = set(np.linspace(0.0, 1.0, n + 1).tolist())
    edges.update(float(b) for b in breaks if 0.0 < b < 1.0)
    return np.array(sorted(edges))


def _gauss_points(edges: np.ndarray):
    a, b = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = (mid + half * _GL_NODES).ravel()
    wts = (half * _GL_WEIGHTS).ravel()
    return pts, wts


def cell_quadrature(
    f: Field,
    breaks_Y: Sequence[float] = (),
    breaks_Z: Sequence[float] = (),
    tol: float = 1e-8,
    start: int = 2,
    max_level: int = 10,
) -> float:
    """Integrate ``f`` over the unit cell with composite 4-point Gauss-Legendre.

    Panels are refined dyadically until two successive values agree to
    ``tol`` (absolute plus relative).
    """
    prev = None
    n = start
    for _ in range(max_level):
        yp, yw = _gauss_points(_panels(n, breaks_Y))
        zp, zw = _gauss_points(_panels(n, breaks_Z))
        Yg, Zg = np.meshgrid(yp, zp, indexing="ij")
        val = float(np.einsum("i,ij,j->", yw, np.asarray(f(Yg, Zg), float), zw))
        if prev is not None and abs(val - prev) < tol * (1.0 + abs(val)):
            return val
        prev = val
        n *= 2
    raise QuadratureError(f"cell quadrature did not converge after {max_level} refinements")


def roughness_factor(spec: SurfaceSpec) -> float:
    """True wall area per unit projected area (Wenzel's ``r``)."""
    if spec.is_flat:
        return 1.0
    g = spec.geometry

    def area(Y, Z):
        return np.sqrt(1.0 + g.dh_dY(Y, Z) ** 2 + g.dh_dZ(Y, Z) ** 2)

    return cell_quadrature(area)


def cassie_area_average(spec: SurfaceSpec) -> float:
    """Area average of ``cos theta_s`` over the cell (classical Cassie)."""
    c = spec.chemistry
    return cell_quadrature(
        lambda Y, Z: np.cos(c.theta(Y, Z)), c.breaks_Y, c.breaks_Z
    )


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def flat() -> CellGeometry:
    return CellGeometry(_zeros, _zeros, _zeros, 0.0, "flat", {}, flat=True, depends_on_z=False)


def wave_y(amplitude: float) -> CellGeometry:
    """``h(Y) = -A (1 + sin 2 pi Y)``: ridges running along z."""
    A = float(amplitude)
    return CellGeometry(
        lambda Y, Z: -A * (1.0 + np.sin(TWO_PI * np.asarray(Y))) + 0.0 * np.asarray(Z),
        lambda Y, Z: -A * TWO_PI * np.cos(TWO_PI * np.asarray(Y)) + 0.0 * np.asarray(Z),
        _zeros,
        2.0 * A,
        "wave_y",
        {"amplitude": A},
        flat=(A == 0.0),
        depends_on_z=False,
    )


def wave_z(amplitude: float) -> CellGeometry:
    """``h(Z) = -A (1 + sin 2 pi Z)``: ridges running along y."""
    A = float(amplitude)
    return CellGeometry(
        lambda Y, Z: -A * (1.0 + np.sin(TWO_PI * np.asarray(Z))) + 0.0 * np.asarray(Y),
        _zeros,
        lambda Y, Z: -A * TWO_PI * np.cos(TWO_PI * np.asarray(Z)) + 0.0 * np.asarray(Y),
        2.0 * A,
        "wave_z",
        {"amplitude": A},
        flat=(A == 0.0),
    )


def wave_yz(amplitude: float) -> CellGeometry:
    """Egg-crate ``h = -(A/2)(1 + sin 2 pi Y)(1 + sin 2 pi Z)``."""
    A = float(amplitude)

    def h(Y, Z):
        return -0.5 * A * (1.0 + np.sin(TWO_PI * Y)) * (1.0 + np.sin(TWO_PI * Z))

    def hY(Y, Z):
        return -0.5 * A * TWO_PI * np.cos(TWO_PI * Y) * (1.0 + np.sin(TWO_PI * Z))

    def hZ(Y, Z):
        return -0.5 * A * TWO_PI * (1.0 + np.sin(TWO_PI * Y)) * np.cos(TWO_PI * Z)

    return CellGeometry(h, hY, hZ, 2.0 * A, "wave_yz", {"amplitude": A}, flat=(A == 0.0))


def homogeneous(theta: float) -> WettabilityField:
    t = float(theta)
    return WettabilityField(
        lambda Y, Z: np.full(np.broadcast(np.asarray(Y), np.asarray(Z)).shape, t),
        "homogeneous",
        {"theta": t},
        homogeneous=True,
    )


def _frac(x):
    return np.mod(np.asarray(x, float), 1.0)


def stripes_y(theta1: float, theta2: float, fraction: float = 0.5) -> WettabilityField:
    """``theta1`` on ``frac(Y) < fraction``, ``theta2`` elsewhere."""
    t1, t2, lam = float(theta1), float(theta2), float(fraction)
    return WettabilityField(
        lambda Y, Z: np.where(_frac(Y) < lam, t1, t2) + 0.0 * np.asarray(Z),
        "stripes_y",
        {"theta1": t1, "theta2": t2, "fraction": lam},
        homogeneous=(t1 == t2),
        breaks_Y=(lam,),
    )


def stripes_z(theta1: float, theta2: float, fraction: float = 0.5) -> WettabilityField:
    """``theta1`` on ``frac(Z) < fraction``, ``theta2`` elsewhere."""
    t1, t2, lam = float(theta1), float(theta2), float(fraction)
    return WettabilityField(
        lambda Y, Z: np.where(_frac(Z) < lam, t1, t2) + 0.0 * np.asarray(Y),
        "stripes_z",
        {"theta1": t1, "theta2": t2, "fraction": lam},
        homogeneous=(t1 == t2),
        breaks_Z=(lam,),
    )


def checkerboard(theta1: float, theta2: float) -> WettabilityField:
    t1, t2 = float(theta1), float(theta2)

    def theta(Y, Z):
        same = (_frac(Y) < 0.5) == (_frac(Z) < 0.5)
        return np.where(same, t1, t2)

    return WettabilityField(
        theta, "checkerboard", {"theta1": t1, "theta2": t2},
        homogeneous=(t1 == t2), breaks_Y=(0.5,), breaks_Z=(0.5,),
    )


def patches(theta_base: float, theta_patch: float, size: float = 0.5) -> WettabilityField:
    """Square patches of side ``size`` (centred in the cell) on a base material."""
    tb, tp, s = float(theta_base), float(theta_patch), float(size)
    lo, hi = 0.5 - 0.5 * s, 0.5 + 0.5 * s

    def theta(Y, Z):
        fy, fz = _frac(Y), _frac(Z)
        inside = (fy >= lo) & (fy < hi) & (fz >= lo) & (fz < hi)
        return np.where(inside, tp, tb)

    return WettabilityField(
        theta, "patches", {"theta_base": tb, "theta_patch": tp, "size": s},
        homogeneous=(tb == tp or s == 0.0), breaks_Y=(lo, hi), breaks_Z=(lo, hi),
    )


GEOMETRIES = {"flat": flat, "wave_y": wave_y, "wave_z": wave_z, "wave_yz": wave_yz}
CHEMISTRIES = {
    "homogeneous": homogeneous,
    "stripes_y": stripes_y,
    "stripes_z": stripes_z,
    "checkerboard": checkerboard,
    "patches": patches,
}


def custom_geometry(h: Field, dh_dY: Field, dh_dZ: Field, name: str = "custom",
                    samples: int = 257) -> CellGeometry:
    """Wrap user-supplied evaluators, shifting ``h`` so that ``max h = 0``."""
    s = np.linspace(0.0, 1.0, samples)
    Yg, Zg = np.meshgrid(s, s, indexing="ij")
    vals = np.asarray(h(Yg, Zg), float)
    top = float(vals.max())
    if top > 0.0:
        warnings.warn(
            f"cell height reaches {top:.3g} > 0; shifting so that max h = 0",
            stacklevel=2,
        )
        base = h
        h = lambda Y, Z: base(Y, Z) - top  # noqa: E731
        vals = vals - top
    sup = float(np.abs(vals).max())
    return CellGeometry(h, dh_dY, dh_dZ, sup, name, {})


def make_surface(geometry: str, chemistry: str, eps: float,
                 geometry_params: dict | None = None,
                 chemistry_params: dict | None = None,
                 n_periods: int = 1) -> SurfaceSpec:
    """Build a :class:`SurfaceSpec` from catalog names (angles in radians)."""
    if geometry not in GEOMETRIES:
        raise SurfaceError(f"unknown geometry {geometry!r}")
    if chemistry not in CHEMISTRIES:
        raise SurfaceError(f"unknown chemistry {chemistry!r}")
    g = GEOMETRIES[geometry](**(geometry_params or {}))
    c = CHEMISTRIES[chemistry](**(chemistry_params or {}))
    return SurfaceSpec(g, c, float(eps), n_periods)
