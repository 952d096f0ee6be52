"""Independent reference values, computed without the package.

Each oracle was evaluated once and the result frozen below; the tests
re-run the cheap ones to guard the frozen numbers.
"""
import math

import numpy as np
from scipy.integrate import quad

A = 0.1


def roughness_wave_y(amplitude=A):
    """Arc-length integral of the wavy profile, by adaptive quadrature."""
    s = 2 * math.pi * amplitude
    return quad(lambda Y: math.hypot(1.0, s * math.cos(2 * math.pi * Y)), 0.0, 1.0,
                epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def nu_wave_y(theta_deg=60.0, amplitude=A, n=1_000_001):
    Y = np.linspace(0.0, 1.0, n)
    s = 2 * math.pi * amplitude
    return float(np.max(abs(math.cos(math.radians(theta_deg))) * np.hypot(1.0, s * np.cos(2 * math.pi * Y))))


def theta_g_wave_z(Z, amplitude=A):
    """Geometric angle of a level line on the z-waves: arctan of the wall slope."""
    return math.atan(-2 * math.pi * amplitude * math.cos(2 * math.pi * Z))


# frozen results
R_WAVE_Y = 1.0923835473311776          # roughness_wave_y()
WENZEL_60_DEG = 56.893857048193446      # arccos(R_WAVE_Y / 2)
NU_WAVE_Y_60 = 0.5905049060006984       # nu_wave_y()
THETA_G_MAX_DEG = 32.14190763534206     # arctan(0.2 pi)
PILLAR_025_100_DEG = 142.505525497925   # arccos(0.25 cos 100 deg - 0.75)
STRIPES_Z_LAMBDA_025_DEG = 104.47751218592994  # arccos(-0.25)
HEIGHT_EXAMPLE = -0.014644660940672627  # 0.5 * (-0.1) (1 - sin(pi/4))
