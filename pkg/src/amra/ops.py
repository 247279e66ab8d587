"""Subdivision and transition operators on finitely supported signals.

    [subdivide(a, M, v)](n)  = |det M| * sum_k v(k) a(n - M k)
    [transition(a, M, v)](n) = sum_k v(k) conj(a(k - M n))

Both work in zero-padded, growing-support mode: the output box covers the
full support implied by the input boxes, never cropped. Positive diagonal
dilations use strided slicing; any other ``M`` is reduced to its Smith
diagonal ``D`` through ``M = E D F`` and unimodular changes of variables.
Accumulation runs over mask taps in lexicographic order, so results are
bitwise reproducible.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import ceil, floor

import numpy as np

from .intlat import IntMatrix, as_intmatrix, smith_factor
from .mask import remap


class Signal:
    """Finitely supported data ``v`` on ``Z^d``, zero outside its box.

    Parameters
    ----------
    data : array_like
        Dense values; ``data[k - offset]`` is ``v(k)``.
    offset : sequence of int, optional
        Integer coordinates of ``data[0, ..., 0]``.
    """

    def __init__(self, data, offset=None):
        data = np.asarray(data)
        if not np.iscomplexobj(data):
            data = data.astype(np.float64, copy=False)
        if data.ndim == 0:
            data = data.reshape(1)
        self.data = data
        self.offset = tuple(int(o) for o in offset) if offset is not None else (0,) * data.ndim
        if len(self.offset) != data.ndim:
            raise ValueError("offset length must equal signal dimension")

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((0,) * dim), (0,) * dim)

    @classmethod
    def delta(cls, at):
        at = tuple(at)
        return cls(np.ones((1,) * len(at)), at)

    @property
    def dim(self):
        return self.data.ndim

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_empty(self):
        return self.data.size == 0

    @property
    def hi(self):
        """Exclusive upper corner of the box."""
        return tuple(o + s for o, s in zip(self.offset, self.shape))

    def __repr__(self):
        return f"Signal(offset={self.offset}, shape={self.shape}, dtype={self.data.dtype})"

    def __call__(self, k):
        idx = tuple(int(a) - o for a, o in zip(k, self.offset))
        if any(i < 0 or i >= s for i, s in zip(idx, self.shape)):
            return 0.0
        return self.data[idx]

    def embed(self, offset, shape, dtype=None):
        """Values on another box (zero-filled; entries outside are dropped)."""
        out = np.zeros(shape, dtype=dtype or self.data.dtype)
        src, dst = [], []
        for o, s, so, ss in zip(offset, shape, self.offset, self.shape):
            lo, hi = max(o, so), min(o + s, so + ss)
            if lo >= hi:
                return out
            src.append(slice(lo - so, hi - so))
            dst.append(slice(lo - o, hi - o))
        out[tuple(dst)] = self.data[tuple(src)]
        return out

    def trimmed(self):
        nz = np.nonzero(self.data)
        if len(nz[0]) == 0:
            return Signal.zeros(self.dim)
        lo = [int(ix.min()) for ix in nz]
        hi = [int(ix.max()) + 1 for ix in nz]
        sl = tuple(slice(a, b) for a, b in zip(lo, hi))
        return Signal(self.data[sl].copy(), tuple(o + a for o, a in zip(self.offset, lo)))

    def norm_sq(self):
        return float(np.sum(np.abs(self.data) ** 2))

    def inner(self, other):
        """``sum_k self(k) * conj(other(k))``."""
        lo, shape = union_box([self, other])
        return complex(np.sum(self.embed(lo, shape) * np.conj(other.embed(lo, shape))))

    def max_abs_diff(self, other):
        lo, shape = union_box([self, other])
        if 0 in shape:
            return 0.0
        dtype = np.result_type(self.data.dtype, other.data.dtype)
        diff = self.embed(lo, shape, dtype) - other.embed(lo, shape, dtype)
        return float(np.max(np.abs(diff))) if diff.size else 0.0

    def allclose(self, other, atol=1e-10):
        return self.max_abs_diff(other) <= atol

    def __add__(self, other):
        return add_signals([self, other])

    def __sub__(self, other):
        return add_signals([self, other * -1])

    def __mul__(self, c):
        return Signal(self.data * c, self.offset)

    __rmul__ = __mul__


def union_box(signals):
    signals = [s for s in signals if not s.is_empty]
    if not signals:
        return (0,), (0,)
    d = signals[0].dim
    lo = tuple(min(s.offset[i] for s in signals) for i in range(d))
    hi = tuple(max(s.hi[i] for s in signals) for i in range(d))
    return lo, tuple(h - l for l, h in zip(lo, hi))


def add_signals(signals):
    """Pointwise sum over the union box, accumulated in list order."""
    signals = list(signals)
    if not signals:
        raise ValueError("nothing to add")
    d = signals[0].dim
    nonempty = [s for s in signals if not s.is_empty]
    if not nonempty:
        return Signal.zeros(d)
    lo, shape = union_box(nonempty)
    dtype = np.result_type(*[s.data.dtype for s in nonempty])
    out = np.zeros(shape, dtype=dtype)
    for s in nonempty:
        sl = tuple(slice(o - l, o - l + n) for o, l, n in zip(s.offset, lo, s.shape))
        out[sl] += s.data
    return Signal(out, lo)


def _check(a, m, v):
    m = as_intmatrix(m).require_nonsingular()
    if not (a.dim == m.dim == v.dim):
        raise ValueError(f"dimension mismatch: mask {a.dim}, matrix {m.dim}, signal {v.dim}")
    return m


def _taps(a):
    """Nonzero mask taps ``(point, value)`` in lexicographic order."""
    for idx in zip(*np.nonzero(a.data)):
        yield tuple(o + int(i) for o, i in zip(a.offset, idx)), a.data[idx]


def _positive_diagonal(m):
    d = m.dim
    return all(m[i, j] == 0 for i in range(d) for j in range(d) if i != j) and all(m[i, i] > 0 for i in range(d))


@lru_cache(maxsize=512)
def _reduction(m):
    """``(E^{-1}, D, F)`` and the integer inverses used to reduce ``M = E D F`` to ``D``."""
    e, dm, f = smith_factor(m)
    return e, _int_inverse(e), dm, f, _int_inverse(f)


def _compose(v, u):
    """Signal ``w(x) = v(U x)`` for unimodular ``U``."""
    if v.is_empty:
        return Signal.zeros(v.dim)
    # v(k) lands at x = U^{-1} k
    img = _grid(v.offset, v.shape) @ _int_inverse(u).to_numpy().T
    lo = img.min(axis=0)
    out = np.zeros(tuple(int(x) for x in img.max(axis=0) - lo + 1), dtype=v.data.dtype)
    out[tuple((img - lo).T)] = v.data.reshape(-1)
    return Signal(out, tuple(int(x) for x in lo))


@lru_cache(maxsize=512)
def _int_inverse(u):
    return IntMatrix([[int(x) for x in row] for row in u.inverse()])


def _grid(lo, shape):
    axes = [np.arange(l, l + s, dtype=np.int64) for l, s in zip(lo, shape)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))


def _ceil_div(a, b):
    return -((-a) // b)


def transition_box(a, m, v):
    """Bounding box of ``M^{-1}(supp v - supp a)``, rounded outward.

    Returns ``(lo, shape)``; some entry of ``shape`` is 0 when empty.
    """
    m = as_intmatrix(m)
    inv = m.inverse()
    b_lo = [vo - (ao + asz - 1) for vo, ao, asz in zip(v.offset, a.offset, a.shape)]
    b_hi = [vo + vs - 1 - ao for vo, vs, ao in zip(v.offset, v.shape, a.offset)]
    corners = [
        [sum(Fraction(x) * c for x, c in zip(row, corner)) for row in inv]
        for corner in product(*zip(b_lo, b_hi))
    ]
    lo = [ceil(min(c[i] for c in corners)) for i in range(m.dim)]
    hi = [floor(max(c[i] for c in corners)) for i in range(m.dim)]
    return tuple(lo), tuple(max(h - l + 1, 0) for l, h in zip(lo, hi))


def _crop(out, lo, hit_lo, hit_hi):
    if hit_lo is None:
        return Signal.zeros(out.ndim)
    sl = tuple(slice(a - l, b - l + 1) for a, b, l in zip(hit_lo, hit_hi, lo))
    return Signal(np.ascontiguousarray(out[sl]), tuple(hit_lo))


def _merge_hits(hit_lo, hit_hi, first, last):
    if hit_lo is None:
        return list(first), list(last)
    return [min(x, y) for x, y in zip(hit_lo, first)], [max(x, y) for x, y in zip(hit_hi, last)]


def _transition_diag(a, steps, v):
    d = len(steps)
    # box of n with st*n + j in [vo, vo + vs) for some tap j
    lo = tuple(_ceil_div(vo - (ao + asz - 1), st) for vo, ao, asz, st in zip(v.offset, a.offset, a.shape, steps))
    hi = tuple((vo + vs - 1 - ao) // st for vo, vs, ao, st in zip(v.offset, v.shape, a.offset, steps))
    shape = tuple(max(h - l + 1, 0) for l, h in zip(lo, hi))
    if 0 in shape:
        return Signal.zeros(d)
    out = np.zeros(shape, dtype=np.result_type(v.data.dtype, a.data.dtype))
    hit_lo = hit_hi = None
    for j, aj in _taps(a):
        src, dst, first, last = [], [], [], []
        for ax in range(d):
            st, jj, vo, vs = steps[ax], j[ax], v.offset[ax], v.shape[ax]
            n0 = max(lo[ax], _ceil_div(vo - jj, st))
            n1 = min(hi[ax], (vo + vs - 1 - jj) // st)
            if n0 > n1:
                break
            src.append(slice(st * n0 + jj - vo, st * n1 + jj - vo + 1, st))
            dst.append(slice(n0 - lo[ax], n1 - lo[ax] + 1))
            first.append(n0)
            last.append(n1)
        else:
            out[tuple(dst)] += np.conj(aj) * v.data[tuple(src)]
            hit_lo, hit_hi = _merge_hits(hit_lo, hit_hi, first, last)
    return _crop(out, lo, hit_lo, hit_hi)


def _subdivide_diag(a, steps, v, scale):
    lo = tuple(st * vo + ao for st, vo, ao in zip(steps, v.offset, a.offset))
    shape = tuple(st * (vs - 1) + asz for st, vs, asz in zip(steps, v.shape, a.shape))
    out = np.zeros(shape, dtype=np.result_type(v.data.dtype, a.data.dtype))
    hit_lo = hit_hi = None
    for j, aj in _taps(a):
        first = [st * vo + jj for st, vo, jj in zip(steps, v.offset, j)]
        last = [f + st * (vs - 1) for f, st, vs in zip(first, steps, v.shape)]
        dst = tuple(slice(f - l, f - l + st * (vs - 1) + 1, st) for f, l, st, vs in zip(first, lo, steps, v.shape))
        out[dst] += aj * v.data
        hit_lo, hit_hi = _merge_hits(hit_lo, hit_hi, first, last)
    out *= scale
    return _crop(out, lo, hit_lo, hit_hi)


def transition(a, m, v):
    """Analysis step ``[T v](n) = sum_k v(k) conj(a(k - M n))``."""
    m = _check(a, m, v)
    d = m.dim
    if v.is_empty:
        return Signal.zeros(d)
    if _positive_diagonal(m):
        return _transition_diag(a, [m[i, i] for i in range(d)], v)
    # M = E D F:  T_{a,M} v = (T_{a o E, D} (v o E)) o F
    e, e_inv, dm, f, _ = _reduction(m)
    w = _transition_diag(remap(a, e_inv), [dm[i, i] for i in range(d)], _compose(v, e))
    return _compose(w, f).trimmed()


def subdivide(a, m, v):
    """Synthesis step ``[S v](n) = |det M| sum_k v(k) a(n - M k)``."""
    m = _check(a, m, v)
    d = m.dim
    if v.is_empty:
        return Signal.zeros(d)
    if _positive_diagonal(m):
        return _subdivide_diag(a, [m[i, i] for i in range(d)], v, abs(m.det))
    # M = E D F:  S_{a,M} v = (S_{a o E, D} (v o F^{-1})) o E^{-1}
    e, e_inv, dm, f, f_inv = _reduction(m)
    w = _subdivide_diag(remap(a, e_inv), [dm[i, i] for i in range(d)], _compose(v, f_inv), abs(m.det))
    return _compose(w, e_inv).trimmed()


def reconstruct_step(bank, parts):
    """``sum_i subdivide(a_i, M_i, parts[i])`` for one filter bank."""
    parts = list(parts)
    if len(parts) != len(bank):
        raise ValueError(f"expected {len(bank)} parts, got {len(parts)}")
    return add_signals([subdivide(a, m, p) for (a, m), p in zip(bank, parts)])


def analyze_step(bank, v):
    """``[transition(a_i, M_i, v)]_i`` for one filter bank."""
    return [transition(a, m, v) for a, m in bank]
