"""Candidate contact lines, advancing/receding angles and closed-form cases.

Candidates are level lines ``psi = z0`` for offsets ``z0`` spanning one
period; each one gives an apparent angle through the line-average formula.
The largest valid angle is reported as advancing, the smallest as receding.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .contactline import (
    TotalWettingError,
    apparent_angle,
    lift_contact_line,
    partial_wetting_margin,
)
from .surface import SurfaceSpec


class NoValidLineError(ValueError):
    pass


@dataclass
class AngleTable:
    surface: SurfaceSpec
    offsets: np.ndarray
    theta_a: np.ndarray     # nan on invalid rows
    nu: np.ndarray
    valid: np.ndarray
    fraction: np.ndarray | None = None  # line-length fraction in the first material

    def __len__(self):
        return self.offsets.size

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            head = ["offset", "theta_a_deg", "cos_theta_a", "nu", "valid"]
            if self.fraction is not None:
                head.append("fraction")
            w.writerow(head)
            for i in range(len(self)):
                row = [f"{self.offsets[i]:.12g}", f"{math.degrees(self.theta_a[i]):.9f}",
                       f"{math.cos(self.theta_a[i]):.12f}", f"{self.nu[i]:.9f}",
                       int(self.valid[i])]
                if self.fraction is not None:
                    row.append(f"{self.fraction[i]:.6f}")
                w.writerow(row)
        return path


def _first_material(spec: SurfaceSpec) -> float | None:
    p = spec.chemistry.params
    for key in ("theta1", "theta_patch"):
        if key in p:
            return p[key]
    return None


def length_fraction(cl, theta1: float) -> float:
    """Share of the (weighted) line length lying on material ``theta1``."""
    on = np.isclose(cl.theta_s, theta1, rtol=0.0, atol=1e-12)
    w = cl.weight
    return float(w[on].sum() / w.sum())


def angle_vs_offset(spec: SurfaceSpec, n_offsets: int = 64, n_samples: int = 256,
                    line_element: str = "projected") -> AngleTable:
    """Apparent angle of the level line ``psi = z0`` for ``n_offsets`` offsets in ``[0, eps)``."""
    if n_offsets < 8:
        raise ValueError("need at least 8 offsets")
    offsets = np.arange(n_offsets) * (spec.eps / n_offsets)
    theta = np.full(n_offsets, np.nan)
    nu = np.empty(n_offsets)
    valid = np.zeros(n_offsets, bool)
    t1 = _first_material(spec)
    frac = np.empty(n_offsets) if t1 is not None else None
    for i, z0 in enumerate(offsets):
        cl = lift_contact_line(spec, float(z0), n_samples, line_element)
        nu[i] = partial_wetting_margin(cl)
        if frac is not None:
            frac[i] = length_fraction(cl, t1)
        if nu[i] >= 1.0:
            continue
        try:
            theta[i] = apparent_angle(cl)
            valid[i] = True
        except TotalWettingError:
            pass
    return AngleTable(spec, offsets, theta, nu, valid, frac)


@dataclass(frozen=True)
class HysteresisRange:
    advancing: float
    receding: float
    advancing_offset: float
    receding_offset: float

    @property
    def width(self) -> float:
        return self.advancing - self.receding


def hysteresis_range(table: AngleTable) -> HysteresisRange:
    if not np.any(table.valid):
        raise NoValidLineError("no partial-wetting contact line found")
    idx = np.flatnonzero(table.valid)
    th = table.theta_a[idx]
    i_adv, i_rec = idx[np.argmax(th)], idx[np.argmin(th)]
    return HysteresisRange(float(table.theta_a[i_adv]), float(table.theta_a[i_rec]),
                           float(table.offsets[i_adv]), float(table.offsets[i_rec]))


def self_consistent_heights(spec: SurfaceSpec, span: float = 2.0, per_period: int = 64,
                            n_samples: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Heights ``z`` where the level line ``psi = z`` is consistent with a plane.

    A planar branch with slope ``k = cot(theta_a)`` meets the wall at height
    ``k (1 - phi)``; the roots of ``z - k(z) (1 - phi(z))`` in ``|z| < span``
    are located on a grid of ``per_period`` points per period and refined with
    ``brentq``.  Returns ``(heights, angles)``.
    """
    def gap(z):
        cl = lift_contact_line(spec, float(z), n_samples)
        try:
            th = apparent_angle(cl)
        except TotalWettingError:
            return float("nan"), float("nan")
        return float(z - (1.0 - np.mean(cl.phi)) / math.tan(th)), th

    zs = np.arange(-span, span, spec.eps / per_period)
    g = np.array([gap(z)[0] for z in zs])
    roots, angles = [], []
    for a, b, ga, gb in zip(zs[:-1], zs[1:], g[:-1], g[1:]):
        if not (np.isfinite(ga) and np.isfinite(gb)) or ga * gb > 0.0:
            continue
        z = a if ga == 0.0 else b if gb == 0.0 else brentq(lambda t: gap(t)[0], a, b, xtol=1e-13)
        roots.append(z)
        angles.append(gap(z)[1])
    return np.array(roots), np.array(angles)


def branch_seed(spec: SurfaceSpec, theta_a: float, span: float = 2.0) -> float:
    """Seed height of the self-consistent planar branch closest to ``theta_a``."""
    z, th = self_consistent_heights(spec, span)
    if z.size == 0:
        raise NoValidLineError("no self-consistent level line in the strip")
    return float(z[np.argmin(np.abs(th - theta_a))])


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile2D:
    """Wall ``x = height(z)`` of a two-dimensional drop with Young's angle ``theta(z)``."""

    height: Callable[[float], float]
    slope: Callable[[float], float]
    theta: Callable[[float], float]


def drop2d_angle(profile: Profile2D, x_ct: float) -> float:
    """``theta_s - theta_g`` at the contact point, ``theta_g`` the wall inclination."""
    return float(profile.theta(x_ct) - math.atan(profile.slope(x_ct)))


def drop2d_range(profile: Profile2D, points) -> tuple[float, float]:
    """``(advancing, receding)`` over the candidate contact points."""
    a = np.array([drop2d_angle(profile, p) for p in points])
    return float(a.max()), float(a.min())


def pillar_cassie_baxter(contact_fraction: float, theta_y: float) -> float:
    """Pillar tops wetted on ``contact_fraction`` of the line, trapped air elsewhere.

    Air acts as a material with Young's angle pi.
    """
    f = float(contact_fraction)
    if not 0.0 <= f <= 1.0:
        raise ValueError("contact fraction must lie in [0, 1]")
    c = f * math.cos(theta_y) - (1.0 - f)
    if c <= -1.0:
        if f > 0.0:
            warnings.warn("complete dewetting predicted", stacklevel=2)
        return math.pi
    return math.acos(min(c, 1.0))
