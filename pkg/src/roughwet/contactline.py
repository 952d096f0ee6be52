"""Contact lines on a periodic wall and the line-averaged apparent angle.

A contact line is sampled on one period ``0 <= y < eps`` as
``x = phi(y)``, ``z = psi(y)`` with ``phi(y) = h_eps(y, psi(y))``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .surface import (
    SurfaceSpec,
    height_gradient,
    physical_height,
    solid_normal,
    young_angle,
)

LINE_ELEMENTS = ("projected", "arclength")


class ContactLineError(ValueError):
    pass


class TotalWettingError(ArithmeticError):
    """The line average of the cosine left [-1, 1]: no apparent angle exists."""

    def __init__(self, average: float):
        super().__init__(
            f"total wetting/dewetting: no apparent angle (line average of cosine = {average:.6g})"
        )
        self.average = average


def periodic_derivative(f: np.ndarray, step: float) -> np.ndarray:
    """Fourth-order central difference of periodic samples."""
    return (
        -np.roll(f, -2) + 8.0 * np.roll(f, -1) - 8.0 * np.roll(f, 1) + np.roll(f, 2)
    ) / (12.0 * step)


@dataclass(frozen=True)
class LineFrame:
    tangent: np.ndarray
    inner_normal: np.ndarray
    solid_normal: np.ndarray
    dphi: float
    dpsi: float


@dataclass(frozen=True, eq=False)
class ContactLine:
    """Samples of a contact line over one period, with frames precomputed."""

    surface: SurfaceSpec
    y: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    dphi: np.ndarray
    dpsi: np.ndarray
    line_element: str = "projected"

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def eps(self) -> float:
        return self.surface.eps

    @property
    def tangent(self) -> np.ndarray:
        t = np.stack([self.dphi, np.ones_like(self.dphi), self.dpsi], axis=-1)
        return t / np.linalg.norm(t, axis=-1, keepdims=True)

    @property
    def inner_normal(self) -> np.ndarray:
        m = np.stack([np.ones_like(self.dphi), -self.dphi, np.zeros_like(self.dphi)], axis=-1)
        return m / np.sqrt(1.0 + self.dphi**2)[:, None]

    @property
    def solid_normal(self) -> np.ndarray:
        return solid_normal(self.surface, self.y, self.psi)

    @property
    def theta_s(self) -> np.ndarray:
        return np.asarray(young_angle(self.surface, self.y, self.psi), float)

    @property
    def theta_g(self) -> np.ndarray:
        s = np.einsum(
            "ij,ij->i", np.cross(self.inner_normal, self.solid_normal), self.tangent
        )
        return np.arcsin(np.clip(s, -1.0, 1.0))

    @property
    def weight(self) -> np.ndarray:
        """Line element relative to ``dy``."""
        if self.line_element == "arclength":
            return np.sqrt(1.0 + self.dphi**2 + self.dpsi**2)
        return np.sqrt(1.0 + self.dphi**2)

    def wetting_term(self) -> np.ndarray:
        """Samples of ``cos(theta_s - theta_g) * weight``."""
        return np.cos(self.theta_s - self.theta_g) * self.weight

    def shifted(self, k: int) -> "ContactLine":
        """Same line with its samples rotated by ``k`` grid steps."""
        dy = self.eps / self.n
        return ContactLine(
            self.surface,
            self.y + k * dy,
            *(np.roll(a, -k) for a in (self.phi, self.psi, self.dphi, self.dpsi)),
            line_element=self.line_element,
        )


def lift_contact_line(
    spec: SurfaceSpec,
    psi: float | np.ndarray | Callable[[np.ndarray], np.ndarray],
    n_samples: int = 256,
    line_element: str = "projected",
) -> ContactLine:
    """Put a height profile ``psi`` (one period) onto the wall.

    ``psi`` may be a constant, an array of ``n_samples`` values on the
    uniform grid ``y_j = j eps / n_samples``, or a callable of ``y``.
    """
    if n_samples < 16:
        raise ContactLineError("need at least 16 samples per period")
    if line_element not in LINE_ELEMENTS:
        raise ContactLineError(f"line_element must be one of {LINE_ELEMENTS}")
    eps = spec.eps
    y = np.arange(n_samples) * (eps / n_samples)
    if callable(psi):
        p0, p1 = float(psi(np.array(0.0))), float(psi(np.array(eps)))
        if abs(p1 - p0) > 1e-10 * (1.0 + abs(p0)):
            raise ContactLineError("psi is not periodic with period eps")
        values = np.asarray(psi(y), float) * np.ones_like(y)
    else:
        values = np.asarray(psi, float)
        if values.ndim == 0:
            values = np.full(n_samples, float(values))
        elif values.shape != (n_samples,):
            raise ContactLineError(
                f"psi has shape {values.shape}, expected ({n_samples},)"
            )
    dpsi = periodic_derivative(values, eps / n_samples)
    phi = np.asarray(physical_height(spec, y, values), float) * np.ones_like(y)
    hy, hz = height_gradient(spec, y, values)
    dphi = np.asarray(hy + hz * dpsi, float) * np.ones_like(y)
    return ContactLine(spec, y, phi, values.copy(), dphi, dpsi, line_element)


def line_frame(cl: ContactLine, j: int) -> LineFrame:
    return LineFrame(
        cl.tangent[j], cl.inner_normal[j], cl.solid_normal[j],
        float(cl.dphi[j]), float(cl.dpsi[j]),
    )


def geometric_angle(cl: ContactLine, j: int | None = None):
    """``arcsin((m_L x n_S) . tau_L)`` at sample ``j`` (all samples if None)."""
    tg = cl.theta_g
    return tg if j is None else float(tg[j])


def apparent_cosine(cl: ContactLine) -> float:
    return float(np.mean(cl.wetting_term()))


def _arccos_or_raise(avg: float) -> float:
    if abs(avg) >= 1.0:
        raise TotalWettingError(avg)
    return float(np.arccos(avg))


def apparent_angle(cl: ContactLine) -> float:
    """Macroscopic angle from the line average of ``cos(theta_s - theta_g)``."""
    return _arccos_or_raise(apparent_cosine(cl))


def modified_cassie(cl: ContactLine) -> float:
    if not cl.surface.is_flat:
        raise ContactLineError(
            "modified Cassie needs a geometrically flat wall; use apparent_angle"
        )
    return _arccos_or_raise(float(np.mean(np.cos(cl.theta_s))))


def modified_wenzel(cl: ContactLine) -> float:
    if not cl.surface.is_homogeneous:
        raise ContactLineError(
            "modified Wenzel needs homogeneous chemistry; use apparent_angle"
        )
    theta_y = cl.theta_s
    return _arccos_or_raise(float(np.mean(np.cos(theta_y - cl.theta_g) * cl.weight)))


def partial_wetting_margin(cl: ContactLine) -> float:
    """``nu = max |cos(theta_s - theta_g) * weight|``; must stay below 1."""
    return float(np.max(np.abs(cl.wetting_term())))


def write_contact_line_csv(cl: ContactLine, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "phi", "psi", "theta_s_deg", "theta_g_deg", "weight"])
        for row in zip(cl.y, cl.phi, cl.psi, np.degrees(cl.theta_s),
                       np.degrees(cl.theta_g), cl.weight):
            w.writerow([f"{v:.12g}" for v in row])
    return path


def read_contact_line_csv(path: str | Path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}
