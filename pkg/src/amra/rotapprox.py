"""Closest unimodular integer matrix to a planar rotation.

For ``R_theta`` the rotation by ``theta`` and ``B`` a 2x2 integer matrix
with ``det B = 1``, the mean squared deviation over the unit circle is

    objective(theta, B) = pi * ||R_theta - B||_F^2.

:func:`best_unimodular` evaluates the closed-form case table and
:func:`best_unimodular_bruteforce` searches exhaustively.
"""

from dataclasses import dataclass
from math import cos, isclose, pi, sin, tau

import numpy as np

from .intlat import IntMatrix

TIE_TOL = 1e-12
BOUNDARY_EPS = 1e-12

# Interval endpoints of the case table, in units of pi/12 for exactness.
BOUNDARIES = tuple(k * pi / 12 for k in (2, 3, 4, 8, 9, 10, 14, 15, 16, 20, 21, 22))


def _m(*rows):
    return IntMatrix([list(r) for r in rows])


I2 = _m((1, 0), (0, 1))

# Minimizers on each open interval (BOUNDARIES[i-1], BOUNDARIES[i]); the
# first entry covers the interval that wraps around 0.
_FIRST_HALF = [
    [I2],
    [_m((1, -1), (0, 1)), _m((1, 0), (1, 1))],
    [_m((1, -1), (1, 0)), _m((0, -1), (1, 1))],
    [_m((0, -1), (1, 0))],
    [_m((-1, -1), (1, 0)), _m((0, -1), (1, -1))],
    [_m((-1, -1), (0, -1)), _m((-1, 0), (1, -1))],
    [-I2],
]
# The lower half plane mirrors the upper one by transposition.
_CASES = _FIRST_HALF + [[b.T for b in ms] for ms in reversed(_FIRST_HALF[1:-1])]


def rotation(theta):
    return np.array([[cos(theta), -sin(theta)], [sin(theta), cos(theta)]])


def objective(theta, b):
    """``pi * ||R_theta - B||_F^2``."""
    b = np.asarray(b.tolist() if isinstance(b, IntMatrix) else b, dtype=np.float64)
    if b.shape != (2, 2):
        raise ValueError("objective is defined for 2x2 matrices")
    return float(pi * np.sum((rotation(theta) - b) ** 2))


@dataclass
class RotationSolution:
    theta: float
    minimizers: list
    objective: float

    def to_dict(self):
        return {
            "minimizers": [b.tolist() for b in self.minimizers],
            "objective": self.objective,
            "theta": self.theta,
        }


def normalize_angle(theta):
    t = float(theta) % tau
    return 0.0 if isclose(t, tau, abs_tol=BOUNDARY_EPS) else t


def _sorted_unique(ms):
    return sorted(set(ms), key=lambda b: b.tolist())


def case_index(theta):
    """Indices of the case-table intervals whose closure contains ``theta``."""
    t = normalize_angle(theta)
    for i, b in enumerate(BOUNDARIES):
        if abs(t - b) <= BOUNDARY_EPS:
            return [i, i + 1]
    i = int(np.searchsorted(BOUNDARIES, t))
    return [i % len(BOUNDARIES)]


def best_unimodular(theta):
    """Closed-form minimizers; a boundary angle returns both neighbouring cases."""
    t = normalize_angle(theta)
    if abs(t - tau) <= BOUNDARY_EPS or t < BOUNDARY_EPS:
        t = 0.0
    idx = case_index(t)
    ms = _sorted_unique(b for i in idx for b in _CASES[i % len(_CASES)])
    return RotationSolution(t, ms, objective(t, ms[0]))


def _candidates(radius):
    r = np.arange(-radius, radius + 1)
    a, b, c, d = (x.reshape(-1) for x in np.meshgrid(r, r, r, r, indexing="ij"))
    keep = a * d - b * c == 1
    return np.stack([a[keep], b[keep], c[keep], d[keep]], axis=1)


_CANDIDATE_CACHE = {}


def best_unimodular_bruteforce(theta, radius=3):
    """Exhaustive search over ``det B = 1`` with entries in ``[-radius, radius]``."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    t = normalize_angle(theta)
    if radius not in _CANDIDATE_CACHE:
        _CANDIDATE_CACHE[radius] = _candidates(radius)
    cand = _CANDIDATE_CACHE[radius]
    r = rotation(t).reshape(-1)
    vals = pi * np.sum((cand - r) ** 2, axis=1)
    best = vals.min()
    hits = cand[vals <= best + TIE_TOL]
    ms = _sorted_unique(IntMatrix([[int(p), int(q)], [int(u), int(v)]]) for p, q, u, v in hits)
    return RotationSolution(t, ms, float(best))


def parse_angle(text):
    """Parse ``"0.5"`` (radians), ``"36deg"``, ``"pi/5"`` or ``"2pi/5"``."""
    s = str(text).strip().lower().replace(" ", "")
    if s.endswith("deg"):
        return float(s[:-3]) * pi / 180
    if "pi" in s:
        num, _, den = s.partition("/")
        coef = num.replace("*", "").replace("pi", "")
        c = float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)
        return c * pi / (float(den) if den else 1.0)
    return float(s)
