"""Exact integer matrix and lattice algebra.

Everything here works on Python ints and ``fractions.Fraction``; no floating
point is involved, so lattice identities (coset membership, lattice
equality) are decided exactly.
"""

from fractions import Fraction
from functools import cached_property
from itertools import product
from math import floor

import numpy as np

MAX_DIM = 4


class SingularMatrixError(ValueError):
    """Raised when a nonsingular integer matrix is required."""


class IntMatrix:
    """Immutable square integer matrix.

    Parameters
    ----------
    rows : sequence of sequences of int
        Row-major entries. Any integer-valued input (including numpy
        integer arrays) is accepted; non-integral values are rejected.
    """

    def __init__(self, rows):
        if isinstance(rows, IntMatrix):
            rows = rows.rows
        elif isinstance(rows, (int, np.integer)):
            rows = [[rows]]
        elif isinstance(rows, np.ndarray):
            rows = rows.tolist()
        rows = tuple(tuple(_as_int(x) for x in row) for row in rows)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ValueError("IntMatrix must be square and non-empty")
        if d > MAX_DIM:
            raise ValueError(f"dimension {d} exceeds supported maximum {MAX_DIM}")
        self.rows = rows

    @classmethod
    def identity(cls, d):
        return cls([[int(i == j) for j in range(d)] for i in range(d)])

    @classmethod
    def diag(cls, *entries):
        d = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(d)] for i in range(d)])

    @property
    def dim(self):
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"IntMatrix({[list(r) for r in self.rows]})"

    def tolist(self):
        return [list(r) for r in self.rows]

    def to_numpy(self):
        return np.array(self.rows, dtype=np.int64)

    @property
    def T(self):
        return IntMatrix(list(zip(*self.rows)))

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            cols = list(zip(*other.rows))
            return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows])
        vec = tuple(other)
        if len(vec) != self.dim:
            raise ValueError("dimension mismatch")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self.rows)

    def __neg__(self):
        return IntMatrix([[-x for x in r] for r in self.rows])

    def __mul__(self, c):
        return IntMatrix([[c * x for x in r] for r in self.rows])

    __rmul__ = __mul__

    @cached_property
    def det(self):
        return det(self)

    @cached_property
    def adjugate(self):
        """Integer adjugate, so that ``M @ adj(M) = det(M) * I``."""
        d = self.dim
        if d == 1:
            return IntMatrix([[1]])
        cof = [[(-1) ** (i + j) * det(_minor(self.rows, i, j)) for j in range(d)] for i in range(d)]
        return IntMatrix(cof).T

    def require_nonsingular(self):
        if self.det == 0:
            raise SingularMatrixError(f"singular matrix {self.tolist()}")
        return self

    def inverse(self):
        """Exact rational inverse as a tuple of tuples of Fractions."""
        self.require_nonsingular()
        dt = self.det
        return tuple(tuple(Fraction(x, dt) for x in row) for row in self.adjugate.rows)

    def solve(self, vec):
        """Exact ``M^{-1} vec`` for an integer or rational vector."""
        return _apply_rational(self.inverse(), vec)

    def is_unimodular(self):
        return abs(self.det) == 1


def _as_int(x):
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("boolean entries are not integers")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    if isinstance(x, float) and x.is_integer():
        return int(x)
    raise ValueError(f"non-integer matrix entry {x!r}")


def _minor(rows, i, j):
    return [[x for c, x in enumerate(r) if c != j] for k, r in enumerate(rows) if k != i]


def _apply_rational(mat, vec):
    return tuple(sum(Fraction(a) * Fraction(b) for a, b in zip(row, vec)) for row in mat)


def as_intmatrix(m):
    return m if isinstance(m, IntMatrix) else IntMatrix(m)


def det(m):
    """Exact determinant via Bareiss fraction-free elimination."""
    rows = m.rows if isinstance(m, IntMatrix) else tuple(tuple(int(x) for x in r) for r in m)
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_factor(m):
    """Factor ``M = E @ D @ F`` with unimodular ``E``, ``F``.

    ``D = diag(d_1, ..., d_m, 1, ..., 1)`` with ``d_1 >= ... >= d_m > 1``;
    the textbook Smith form (ascending divisibility) is computed first and
    then its diagonal is permuted into descending order, the permutation
    being absorbed into ``E`` and ``F``.

    Returns
    -------
    E, D, F : IntMatrix
    """
    m = as_intmatrix(m).require_nonsingular()
    n = m.dim
    a = [list(r) for r in m.rows]
    # Track P, Q with P @ M @ Q = A (A converges to the Smith form) and
    # their inverses, so no rational inversion is needed at the end.
    P = [[int(i == j) for j in range(n)] for i in range(n)]
    Pinv = [r[:] for r in P]
    Q = [r[:] for r in P]
    Qinv = [r[:] for r in P]

    def row_add(i, j, c):  # row_i += c * row_j
        for M_ in (a, P):
            for k in range(n):
                M_[i][k] += c * M_[j][k]
        for k in range(n):  # Pinv: col_j -= c * col_i
            Pinv[k][j] -= c * Pinv[k][i]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        P[i], P[j] = P[j], P[i]
        for k in range(n):
            Pinv[k][i], Pinv[k][j] = Pinv[k][j], Pinv[k][i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        P[i] = [-x for x in P[i]]
        for k in range(n):
            Pinv[k][i] = -Pinv[k][i]

    def col_add(i, j, c):  # col_i += c * col_j
        for M_ in (a, Q):
            for k in range(n):
                M_[k][i] += c * M_[k][j]
        for k in range(n):  # Qinv: row_j -= c * row_i
            Qinv[j][k] -= c * Qinv[i][k]

    def col_swap(i, j):
        for M_ in (a, Q):
            for k in range(n):
                M_[k][i], M_[k][j] = M_[k][j], M_[k][i]
        Qinv[i], Qinv[j] = Qinv[j], Qinv[i]

    for t in range(n):
        while True:
            # pivot: smallest nonzero entry in the trailing block
            cands = [(abs(a[i][j]), i, j) for i in range(t, n) for j in range(t, n) if a[i][j] != 0]
            _, pi, pj = min(cands)
            if pi != t:
                row_swap(t, pi)
            if pj != t:
                col_swap(t, pj)
            p = a[t][t]
            done = True
            for i in range(t + 1, n):
                q = a[i][t] // p
                if q:
                    row_add(i, t, -q)
                if a[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    col_add(j, t, -q)
                if a[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if a[i][j] % p), None)
            if bad is None:
                break
            row_add(t, bad[0], 1)
        if a[t][t] < 0:
            row_neg(t)

    diag_vals = [a[i][i] for i in range(n)]
    order = sorted(range(n), key=lambda i: -diag_vals[i])
    # A = P M Q  =>  M = Pinv A Qinv;  A = Pi^T Ddesc Pi  with  Ddesc = diag(diag_vals[order])
    D = IntMatrix.diag(*[diag_vals[i] for i in order])
    Pinv_m = IntMatrix(Pinv)
    Qinv_m = IntMatrix(Qinv)
    perm = IntMatrix([[int(order[r] == c) for c in range(n)] for r in range(n)])
    E = Pinv_m @ perm.T
    F = perm @ Qinv_m
    return E, D, F


def _unit_box_corners(m):
    d = m.dim
    corners = [m @ c for c in product((0, 1), repeat=d)]
    lo = [min(c[i] for c in corners) for i in range(d)]
    hi = [max(c[i] for c in corners) for i in range(d)]
    return lo, hi


def coset_reps(m):
    """Canonical representatives of ``Z^d / M Z^d``.

    The integer points of the half-open parallelepiped ``M [0,1)^d``,
    sorted lexicographically; the origin is always first.
    """
    m = as_intmatrix(m).require_nonsingular()
    d = m.dim
    lo, hi = _unit_box_corners(m)
    axes = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(d)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    dt = m.det
    y = pts @ m.adjugate.to_numpy().T
    if dt > 0:
        keep = np.all((y >= 0) & (y < dt), axis=1)
    else:
        keep = np.all((y <= 0) & (y > dt), axis=1)
    reps = sorted(tuple(int(x) for x in p) for p in pts[keep])
    assert len(reps) == abs(dt)
    return reps


def coset_index(m, points):
    """Map integer points (N x d array) to the index of their coset rep."""
    m = as_intmatrix(m).require_nonsingular()
    pts = np.asarray(points, dtype=np.int64).reshape(-1, m.dim)
    y = pts @ m.adjugate.to_numpy().T
    fl = np.floor_divide(y, m.det)
    reduced = pts - fl @ m.to_numpy().T
    lookup = {rep: i for i, rep in enumerate(coset_reps(m))}
    return np.array([lookup[tuple(int(x) for x in r)] for r in reduced], dtype=np.int64)


def reduce_mod1(vec):
    return tuple(x - floor(x) for x in vec)


def dual_coset_reps(m):
    """Representatives of ``[(M^T)^{-1} Z^d]`` modulo ``Z^d`` in ``[0,1)^d``.

    Exact rationals, sorted lexicographically (zero first).
    """
    m = as_intmatrix(m).require_nonsingular()
    mt = m.T
    inv = mt.inverse()
    out = {reduce_mod1(_apply_rational(inv, g)) for g in coset_reps(mt)}
    return sorted(out)


def in_dual_lattice(m, omega):
    """True iff ``M^T omega`` is an integer vector, i.e. omega in Omega_M mod 1."""
    m = as_intmatrix(m)
    return all(Fraction(x).denominator == 1 for x in _apply_rational(m.T.rows, omega))


def is_integer_matrix(rat_rows):
    return all(Fraction(x).denominator == 1 for r in rat_rows for x in r)


def lattice_equal(m1, m2):
    """True iff ``M1 Z^d == M2 Z^d``."""
    m1 = as_intmatrix(m1).require_nonsingular()
    m2 = as_intmatrix(m2).require_nonsingular()
    if m1.dim != m2.dim:
        raise ValueError("dimension mismatch")
    a = _rat_matmul(m1.inverse(), m2.rows)
    b = _rat_matmul(m2.inverse(), m1.rows)
    return is_integer_matrix(a) and is_integer_matrix(b)


def _rat_matmul(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum(Fraction(x) * y for x, y in zip(r, c)) for c in cols) for r in a)


def rational_matmul(a, b):
    """Product of two matrices given as nested sequences of ints/Fractions."""
    return _rat_matmul(a, b)


def shear(s, dim=2):
    """Shear matrix ``S_s`` (2-D) or ``S_{s1,s2}`` (3-D, ``s`` a pair)."""
    if dim == 2:
        return IntMatrix([[1, s], [0, 1]])
    if dim == 3:
        s1, s2 = s
        return IntMatrix([[1, s1, s2], [0, 1, 0], [0, 0, 1]])
    raise ValueError("shear matrices defined for dim 2 and 3 only")


def parabolic(c=4, dim=2):
    """Parabolic scaling ``A_c`` for a perfect-square ``c``."""
    r = int(round(c ** 0.5))
    if r * r != c:
        raise ValueError("parabolic scaling needs a perfect square to stay integral")
    return IntMatrix.diag(c, *([r] * (dim - 1)))
