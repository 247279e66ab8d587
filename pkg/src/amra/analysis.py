"""Continuum-side diagnostics: sum rules, isotropy, cascade samples.

Samples of the refinable function ``phi`` with ``phi^(xi) = prod_j a^((M0^T)^{-j} xi)``
are produced by iterating the subdivision operator on ``delta_0``; after
``J`` steps the value at ``n`` approximates ``phi(M0^{-J} n)``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import sqrt

import numpy as np

from .intlat import IntMatrix, as_intmatrix, coset_index, coset_reps
from .mask import Mask, symbol, tensor
from .ops import Signal, subdivide, transition

DEFAULT_TOL = 1e-10
MAX_SUM_RULE_ORDER = 32


def _multi_indices(dim, order):
    """All multi-indices with ``|beta| == order``, lexicographic."""
    return [b for b in product(range(order + 1), repeat=dim) if sum(b) == order]


def sum_rule_order(a, m0, tol=DEFAULT_TOL, max_order=MAX_SUM_RULE_ORDER):
    """Largest ``tau`` such that all coset moment sums of order ``< tau`` agree.

    For every multi-index ``beta`` with ``|beta| < tau`` and every coset
    representative ``n`` of ``Z^d / M0 Z^d``,
    ``sum_{p in n + M0 Z^d} a(p) p^beta`` equals the same sum over ``M0 Z^d``.
    """
    m0 = as_intmatrix(m0).require_nonsingular()
    if a.dim != m0.dim:
        raise ValueError("mask and matrix dimensions differ")
    pts = a.points()
    vals = a.data.reshape(-1)
    keep = vals != 0
    pts, vals = pts[keep], vals[keep]
    cls = coset_index(m0, pts)
    n_cos = len(coset_reps(m0))
    tau = 0
    for order in range(max_order):
        for beta in _multi_indices(a.dim, order):
            # exact integer monomials; magnitudes stay far below 2^53 for these supports
            mono = np.array([np.prod([int(p) ** b for p, b in zip(pt, beta)]) for pt in pts], dtype=np.float64)
            terms = vals * mono
            sums = np.array([terms[cls == c].sum() for c in range(n_cos)])
            scale = max(1.0, float(np.sum(np.abs(terms))))
            if np.any(np.abs(sums - sums[0]) > tol * scale):
                return tau
        tau = order + 1
    return tau


def is_isotropic(m0, tol=1e-9):
    """Diagonalizable with all eigenvalues of equal modulus (numerical test)."""
    m = as_intmatrix(m0).to_numpy().astype(np.float64)
    w, v = np.linalg.eig(m)
    if not np.isfinite(np.linalg.cond(v)) or np.linalg.cond(v) >= 1e8:
        return False
    mod = np.abs(w)
    return bool(mod.max() - mod.min() <= tol * mod.max())


@dataclass
class GridFunction:
    """Samples ``f(G n)`` stored as a :class:`Signal` over ``n``.

    ``grid`` is the sampling matrix ``G`` as rows of Fractions; for cascade
    output it is ``M0^{-level}``.
    """

    samples: Signal
    grid: list
    level: int = 0
    m0: IntMatrix = None

    @property
    def dim(self):
        return self.samples.dim

    def grid_float(self):
        return np.array([[float(x) for x in row] for row in self.grid])

    def coordinates(self):
        """Physical coordinates of every stored sample, shape ``(N, d)``."""
        s = self.samples
        axes = [np.arange(o, o + n) for o, n in zip(s.offset, s.shape)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, s.dim)
        return pts @ self.grid_float().T

    def values(self):
        return self.samples.data.reshape(-1)

    def restrict_to(self, coarse):
        """Values of ``self`` at the sample points of ``coarse`` (same physical points)."""
        ginv = np.linalg.inv(self.grid_float())
        pts = coarse.coordinates() @ ginv.T
        idx = np.rint(pts).astype(np.int64)
        if not np.allclose(pts, idx, atol=1e-9):
            raise ValueError("coarse grid is not contained in this grid")
        return np.array([self.samples(tuple(k)) for k in idx])

    def to_metadata(self):
        return {
            "grid": [[str(x) for x in row] for row in self.grid],
            "level": self.level,
            "m0": self.m0.tolist() if self.m0 is not None else None,
            "offset": list(self.samples.offset),
            "shape": list(self.samples.shape),
        }


def _inverse_power(m0, level):
    inv = m0.inverse()
    d = m0.dim
    g = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for _ in range(level):
        g = [[sum(g[i][k] * inv[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    return g


def _power(m0, level):
    p = IntMatrix.identity(m0.dim)
    for _ in range(level):
        p = p @ m0
    return p


def cascade(a, m0, levels):
    """``levels``-fold subdivision of ``delta_0``; samples of ``phi`` on ``M0^{-levels} Z^d``.

    The discrete integral ``|det M0|^{-levels} * sum(samples)`` equals
    ``symbol(a, 0)`` to the power ``levels``, so it stays 1 for low-pass masks.
    """
    m0 = as_intmatrix(m0).require_nonsingular()
    if abs(symbol(a, np.zeros(a.dim)) - 1) > 1e-10:
        raise ValueError("cascade needs a low-pass mask with symbol(a, 0) = 1")
    v = Signal.delta((0,) * a.dim)
    for _ in range(int(levels)):
        v = subdivide(a, m0, v)
    return GridFunction(v, _inverse_power(m0, levels), int(levels), m0)


def cascade_difference(a, m0, levels):
    """L-infinity change between ``cascade(levels)`` and ``cascade(levels + 1)`` on the coarse grid."""
    coarse = cascade(a, m0, levels)
    fine = cascade(a, m0, levels + 1)
    return float(np.max(np.abs(fine.restrict_to(coarse) - coarse.values())))


def node_generator_samples(plan, node, levels, base=None, m0=None, force=False):
    """Samples of the generator attached to a tree leaf.

    With ``g_root = phi`` (the cascade of ``base`` under ``m0``) and
    ``T`` the product of the dilation matrices from the root to the
    parent, each step along the path applies

        g_child(u) = |det M_child| sum_k a_child(k) g_parent(u - T k),

    which is the generator at its own scale, ``psi(M_b^{-1} ... M_{b_1}^{-1} u)``.
    Samples live on the cascade grid ``m0^{-levels} Z^d``. The refinable
    pair ``(base, m0)`` defaults to the tensor Haar low-pass mask with
    ``m0 = 2 I``.
    """
    from .tree import validate_plan

    node = tuple(node)
    low, high = plan.leaves()
    if node not in set(low) | set(high):
        raise ValueError(f"{node} is not a leaf of the plan")
    if not force and not validate_plan(plan).certified:
        raise ValueError("plan is not certified")
    d = plan.dim
    m0 = IntMatrix.identity(d) * 2 if m0 is None else as_intmatrix(m0)
    if base is None:
        base = tensor([Mask([0.5, 0.5])] * d)
    phi = cascade(base, m0, levels)
    lam = _power(m0, levels)
    g = phi.samples
    t = IntMatrix.identity(d)
    for i, mat in enumerate(plan.matrix_path(node)):
        a = plan.mask_at(node[: i + 1])
        step = lam @ t
        # subdivide with the roles of mask and signal swapped, then rescale
        out = subdivide(Mask(g.data, g.offset), step, Signal(a.data, a.offset))
        g = out * (abs(mat.det) / abs(step.det))
        t = t @ mat
    return GridFunction(g, phi.grid, phi.level, m0)


def principal_axis_angle(gf):
    """Angle in degrees, in ``[0, 180)``, of the principal axis of ``|f|^2``.

    Uses the ``|f|^2``-weighted second-moment matrix of the sample
    coordinates (2-D only).
    """
    if gf.dim != 2:
        raise ValueError("principal axis is computed for 2-D samples")
    x = gf.coordinates()
    w = np.abs(gf.values()) ** 2
    w = w / w.sum()
    mu = w @ x
    c = (x - mu).T @ ((x - mu) * w[:, None])
    evals, evecs = np.linalg.eigh(c)
    v = evecs[:, np.argmax(evals)]
    return float(np.degrees(np.arctan2(v[1], v[0])) % 180.0)


def _projection_1d(u, g_fine, q):
    """``P g`` on the fine grid for the refinable mask ``u`` (dilation 2).

    Coarse coefficients are Riemann sums ``<g, phi_{J,k}>``; the factor
    ``2^{-2q}`` collects the normalizations of both operator steps.
    """
    phi = cascade(u, [[2]], q).samples
    pm = Mask(phi.data, phi.offset)
    step = [[2**q]]
    return subdivide(pm, step, transition(pm, step, g_fine)) * (2.0 ** (-2 * q))


def projection_errors(u, levels, fine_level=14, half_width=8.0):
    """``||f - P_J f||_{L2}`` for ``f(x) = exp(-|x|^2)`` on R^2, tensor mask ``u x u``, ``M0 = 2 I``.

    The 2-D error is evaluated exactly through the separable identity
    ``||g x g - Pg x Pg||^2 = ||g||^4 - 2 <g, Pg>^2 + ||Pg||^4`` with 1-D
    Riemann sums on the grid ``2^{-fine_level} Z``.
    """
    h = 2.0 ** (-fine_level)
    n = int(half_width / h)
    x = np.arange(-n, n + 1) * h
    g = Signal(np.exp(-(x**2)), (-n,))
    out = []
    for j in levels:
        pg = _projection_1d(u, g, fine_level - j)
        gg = g.norm_sq() * h
        gp = g.inner(pg).real * h
        pp = pg.norm_sq() * h
        out.append(sqrt(max(gg * gg - 2 * gp * gp + pp * pp, 0.0)))
    return out


def projection_error_direct(mask2d, levels, fine_level, half_width=4.0):
    """Direct 2-D counterpart of :func:`projection_errors` for small grids."""
    h = 2.0 ** (-fine_level)
    n = int(half_width / h)
    x = np.arange(-n, n + 1) * h
    f = np.exp(-(x[:, None] ** 2) - x[None, :] ** 2)
    g = Signal(f, (-n, -n))
    out = []
    for j in levels:
        q = fine_level - j
        phi = cascade(mask2d, IntMatrix.identity(2) * 2, q).samples
        pm = Mask(phi.data, phi.offset)
        step = IntMatrix.identity(2) * 2**q
        pg = subdivide(pm, step, transition(pm, step, g)) * (4.0 ** (-2 * q))
        out.append(sqrt((g - pg).norm_sq() * h * h))
    return out


def decay_ratios(errors):
    return [b / a for a, b in zip(errors, errors[1:])]
