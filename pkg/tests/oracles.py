"""Independent reference computations used by the test-suite.

Nothing here imports the library's model code; formulas are restated from
scratch so that agreement is a genuine cross-check.
"""

import math

import numpy as np

N_SCAN = 1_000_000
# shared uniform grid over the open interval (0, pi), descending from flat
_ALPHA = np.linspace(math.pi, 0.0, N_SCAN + 2)[1:-1]
_HALF_SIN = np.sin(_ALPHA / 2)
_HALF_COS = np.sin((math.pi - _ALPHA) / 2)
_STRAIN = math.pi - _ALPHA


def closing_moment(alpha, *, E, W, t, L_hinge, d, gamma, k_b, L):
    alpha = np.asarray(alpha, dtype=float)
    k_h = E * W * t**3 / (12 * L_hinge)
    rest = gamma * math.pi * d / 2
    force = np.maximum(0.0, 2 * k_b * (L * np.sin(alpha / 2) - rest))
    return force * (L / 2) * np.cos(alpha / 2) - k_h * (math.pi - alpha)


def brute_force_root(*, E, W, t, L_hinge, d, gamma, k_b, L):
    """First sign change of the closing moment scanning down from flat.

    Returns pi when the moment is not positive just below flat; otherwise
    the linearly interpolated crossing between the bracketing samples.
    """
    k_h = E * W * t**3 / (12 * L_hinge)
    rest = gamma * math.pi * d / 2
    g = np.maximum(0.0, 2 * k_b * (L * _HALF_SIN - rest)) * (L / 2) * _HALF_COS - k_h * _STRAIN
    if not g[0] > 0:
        return math.pi
    nonpos = np.flatnonzero(g <= 0)
    if nonpos.size == 0:
        return None
    i = int(nonpos[0])
    a0, a1, g0, g1 = _ALPHA[i - 1], _ALPHA[i], g[i - 1], g[i]
    return float(a0 + (a1 - a0) * g0 / (g0 - g1))


def kasa_free_circle(points):
    """Circumcircle curvature of three well separated points (no fitting)."""
    p = np.asarray(points, dtype=float)
    a, b, c = p[0], p[len(p) // 2], p[-1]
    ab, bc, ca = np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c)
    cross = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0]
    return 2 * cross / (ab * bc * ca)
