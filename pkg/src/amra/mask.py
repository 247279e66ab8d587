"""Finitely supported masks on Z^d.

A mask stores a dense coefficient block over its (minimal) support box plus
the integer offset of the box's lowest corner. The symbol convention is
fixed once, here:

    symbol(a, xi) = sum_k a(k) exp(-i k . xi)

and every other module goes through :func:`symbol` / :func:`correlation`
rather than re-deriving phases.
"""

from fractions import Fraction
from math import lcm

import numpy as np

from .intlat import as_intmatrix

LOW = "low"
HIGH = "high"


def _canonical_dtype(data):
    data = np.asarray(data)
    if np.iscomplexobj(data):
        if not np.any(data.imag):
            return np.ascontiguousarray(data.real, dtype=np.float64)
        return np.ascontiguousarray(data, dtype=np.complex128)
    return np.ascontiguousarray(data, dtype=np.float64)


def _trim(data, offset):
    nz = np.nonzero(data)
    if len(nz[0]) == 0:
        # keep a single zero at the offset so the mask stays addressable
        return np.zeros((1,) * data.ndim, dtype=data.dtype), tuple(offset)
    lo = [int(ix.min()) for ix in nz]
    hi = [int(ix.max()) + 1 for ix in nz]
    sl = tuple(slice(a, b) for a, b in zip(lo, hi))
    return data[sl].copy(), tuple(int(o) + a for o, a in zip(offset, lo))


class Mask:
    """Finitely supported (real or complex) sequence on ``Z^d``.

    Parameters
    ----------
    data : array_like
        Dense coefficients over the support box, indexed ``data[k - offset]``.
    offset : sequence of int, optional
        Lowest corner of the box. Defaults to the origin.
    band : {"low", "high"}
        Band label used when the mask is placed in a filter bank.
    """

    def __init__(self, data, offset=None, band=LOW):
        data = _canonical_dtype(data)
        if data.ndim == 0:
            data = data.reshape(1)
        if offset is None:
            offset = (0,) * data.ndim
        if len(offset) != data.ndim:
            raise ValueError("offset length must equal mask dimension")
        if band not in (LOW, HIGH):
            raise ValueError(f"band must be 'low' or 'high', got {band!r}")
        self.data, self.offset = _trim(data, offset)
        self.data.setflags(write=False)
        self.band = band

    @classmethod
    def delta(cls, dim=1, at=None, band=LOW):
        return cls(np.ones((1,) * dim), offset=at if at is not None else (0,) * dim, band=band)

    @classmethod
    def from_dict(cls, coeffs, band=LOW):
        """Build from ``{point: value}``."""
        pts = np.array(list(coeffs), dtype=np.int64)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        vals = np.array(list(coeffs.values()))
        data = np.zeros(tuple(hi - lo + 1), dtype=np.result_type(vals.dtype, np.float64))
        for p, v in coeffs.items():
            data[tuple(np.array(p) - lo)] = v
        return cls(data, offset=tuple(int(x) for x in lo), band=band)

    @property
    def dim(self):
        return self.data.ndim

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_real(self):
        return not np.iscomplexobj(self.data)

    def __repr__(self):
        return f"Mask(offset={self.offset}, shape={self.shape}, band={self.band!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Mask)
            and self.offset == other.offset
            and self.band == other.band
            and self.data.shape == other.data.shape
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def points(self):
        """Integer coordinates of every box entry, shape ``(N, d)``, C order."""
        grids = np.meshgrid(*[np.arange(o, o + s) for o, s in zip(self.offset, self.shape)], indexing="ij")
        return np.stack(grids, axis=-1).reshape(-1, self.dim)

    def support(self):
        """Nonzero coefficients as ``{point: value}``."""
        return {
            tuple(int(x) for x in p): v
            for p, v in zip(self.points(), self.data.reshape(-1))
            if v != 0
        }

    def __call__(self, k):
        idx = tuple(int(a) - o for a, o in zip(k, self.offset))
        if any(i < 0 or i >= s for i, s in zip(idx, self.shape)):
            return 0.0
        return self.data[idx]

    def with_band(self, band):
        return Mask(self.data, self.offset, band)

    def conj(self):
        return Mask(np.conj(self.data), self.offset, self.band)

    def l2_norm_sq(self):
        return float(np.sum(np.abs(self.data) ** 2))


def symbol(a, xi):
    """Evaluate the symbol by direct summation over the stored box."""
    xi = np.asarray(xi, dtype=np.float64).reshape(-1)
    if xi.shape[0] != a.dim:
        raise ValueError("frequency dimension mismatch")
    phase = np.exp(-1j * (a.points() @ xi))
    return complex(np.sum(a.data.reshape(-1) * phase))


def _phase_array(points, omega):
    """exp(+2 pi i omega . n) for integer points, via exact rational reduction."""
    omega = [Fraction(w) for w in omega]
    q = lcm(*[w.denominator for w in omega]) if omega else 1
    if q == 1:
        return None
    p = np.array([int(w * q) for w in omega], dtype=np.int64)
    num = np.mod(points @ p, q)
    if q == 2:
        return np.where(num == 0, 1.0, -1.0)
    if q == 4:
        table = np.array([1, 1j, -1, -1j])
        return table[num]
    return np.exp(2j * np.pi * num / q)


def _xcorr(x, w):
    """c[m + (sw - 1)] = sum_n x[m + n] * w[n] over all overlapping lags."""
    sx, sw = x.shape, w.shape
    out_shape = tuple(a + b - 1 for a, b in zip(sx, sw))
    dtype = np.result_type(x.dtype, w.dtype)
    taps = np.nonzero(w)
    if len(taps[0]) <= 32:
        out = np.zeros(out_shape, dtype=dtype)
        for t in zip(*taps):
            # lag m ranges over [-t, sx-1-t]; output index m + sw - 1
            sl = tuple(slice(b - 1 - ti, b - 1 - ti + a) for a, b, ti in zip(sx, sw, t))
            out[sl] += w[t] * x
        return out
    # full convolution with the flipped kernel
    wf = w[(slice(None, None, -1),) * w.ndim]
    axes = tuple(range(x.ndim))
    if np.iscomplexobj(x) or np.iscomplexobj(w):
        fx, fw = np.fft.fftn(x, out_shape, axes), np.fft.fftn(wf, out_shape, axes)
        return np.fft.ifftn(fx * fw, out_shape, axes)
    fx, fw = np.fft.rfftn(x, out_shape, axes), np.fft.rfftn(wf, out_shape, axes)
    return np.fft.irfftn(fx * fw, out_shape, axes)


def correlation_array(a, b, omega=None):
    """All Fourier coefficients of ``symbol(a, xi) * conj(symbol(b, xi + 2 pi omega))``.

    With ``P(xi) = sum_m c(m) exp(-i m . xi)``, returns ``(lag_offset, c)``
    where ``c(m) = sum_n a(m + n) conj(b(n)) exp(2 pi i omega . n)``.
    """
    if a.dim != b.dim:
        raise ValueError("mask dimension mismatch")
    w = np.conj(b.data)
    if omega is not None:
        ph = _phase_array(b.points(), omega)
        if ph is not None:
            w = w * ph.reshape(b.shape)
    c = _xcorr(a.data, w)
    lag_offset = tuple(oa - (ob + sb - 1) for oa, ob, sb in zip(a.offset, b.offset, b.shape))
    return lag_offset, c


def correlation(a, b, lag, omega):
    """Single coefficient ``c(lag, omega)`` of :func:`correlation_array`."""
    lag_offset, c = correlation_array(a, b, omega)
    idx = tuple(int(m) - o for m, o in zip(lag, lag_offset))
    if any(i < 0 or i >= s for i, s in zip(idx, c.shape)):
        return 0j
    return complex(c[idx])


def tensor(masks):
    """Tensor product ``U(b_1, ..., b_d) = u_1(b_1) ... u_d(b_d)`` of 1-D masks."""
    masks = list(masks)
    if not masks:
        raise ValueError("tensor of an empty list")
    if any(m.dim != 1 for m in masks):
        raise ValueError("tensor factors must be 1-D masks")
    data = masks[0].data
    for m in masks[1:]:
        data = np.multiply.outer(data, m.data)
    band = HIGH if any(m.band == HIGH for m in masks) else LOW
    return Mask(data, offset=tuple(m.offset[0] for m in masks), band=band)


def remap(u, e):
    """Mask ``a`` with ``a(E m) = U(m)``; equivalently ``a^(xi) = U^(E^T xi)``."""
    e = as_intmatrix(e)
    if e.dim != u.dim:
        raise ValueError("dimension mismatch")
    if not e.is_unimodular():
        raise ValueError("remap requires a unimodular matrix")
    if e == type(e).identity(e.dim):
        return u
    pts = u.points()
    vals = u.data.reshape(-1)
    keep = vals != 0
    pts, vals = pts[keep], vals[keep]
    if len(vals) == 0:
        return Mask(np.zeros((1,) * u.dim), u.offset, u.band)
    img = pts @ e.to_numpy().T
    lo = img.min(axis=0)
    data = np.zeros(tuple(img.max(axis=0) - lo + 1), dtype=u.data.dtype)
    data[tuple((img - lo).T)] = vals
    return Mask(data, offset=tuple(int(x) for x in lo), band=u.band)


remap_by_E = remap


def scale(a, c):
    return Mask(a.data * c, a.offset, a.band)


def shift(a, k):
    return Mask(a.data, tuple(o + int(x) for o, x in zip(a.offset, k)), a.band)
