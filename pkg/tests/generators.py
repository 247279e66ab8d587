"""Random filter banks for property and acceptance tests.

Tight banks are grown from a polyphase construction: filters supported on
one coset representative each with ``A^H A = I / |det M|``, followed by
alternating rounds of translating single filters by lattice vectors and
mixing all filters with a random orthogonal (or unitary) matrix. Both moves
preserve the UEP identity, so the results are certified by construction
without consulting the checker under test.
"""

import numpy as np

from amra.filterbank import FilterBank
from amra.intlat import IntMatrix, coset_reps, parabolic, shear
from amra.mask import HIGH, LOW, Mask, scale

LATTICE_CHOICES = [
    IntMatrix.identity(2) * 2,
    parabolic(4, 2),
    shear(1) @ parabolic(4, 2),
    shear(-1) @ parabolic(4, 2),
    shear(2) @ parabolic(4, 2),
]


def _orthonormal(rng, rows, cols, complex_):
    x = rng.standard_normal((rows, cols))
    if complex_:
        x = x + 1j * rng.standard_normal((rows, cols))
    q, _ = np.linalg.qr(x)
    return q[:, :cols]


def _from_points(values, dim):
    """Mask from ``{point: value}``."""
    pts = np.array(list(values), dtype=int).reshape(-1, dim)
    lo = pts.min(axis=0)
    shape = tuple(pts.max(axis=0) - lo + 1)
    dtype = np.complex128 if any(isinstance(v, complex) or np.iscomplexobj(v) for v in values.values()) else float
    data = np.zeros(shape, dtype=dtype)
    for p, v in values.items():
        data[tuple(np.array(p) - lo)] += v
    return data, tuple(int(x) for x in lo)


def random_tight_masks(rng, m, r=None, rounds=2, complex_=False):
    """``r`` masks forming a tight bank for the single matrix ``m``."""
    m = IntMatrix(m) if not isinstance(m, IntMatrix) else m
    reps = coset_reps(m)
    q = len(reps)
    r = r or q + int(rng.integers(0, 3))
    a = _orthonormal(rng, r, q, complex_) / np.sqrt(q)
    filters = [{tuple(g): a[i, j] for j, g in enumerate(reps)} for i in range(r)]
    mm = np.array(m.tolist())
    for _ in range(rounds):
        for i in range(r):
            n = rng.integers(-1, 2, size=m.dim)
            t = tuple(int(x) for x in mm @ n)
            filters[i] = {tuple(p + s for p, s in zip(k, t)): v for k, v in filters[i].items()}
        mix = _orthonormal(rng, r, r, complex_)
        new = []
        for i in range(r):
            acc = {}
            for j in range(r):
                for k, v in filters[j].items():
                    acc[k] = acc.get(k, 0) + mix[i, j] * v
            new.append(acc)
        filters = new
    out = []
    for i, f in enumerate(filters):
        data, off = _from_points(f, m.dim)
        out.append(Mask(data, off, band=LOW if i == 0 else HIGH))
    return out


def random_tight_bank(rng, m, r=None, rounds=2, complex_=False):
    return FilterBank([(a, m) for a in random_tight_masks(rng, m, r, rounds, complex_)])


def random_multilattice_bank(rng, n_groups=2, complex_=False, rounds=1):
    """Merge of tight banks on distinct lattices, scaled by ``1/sqrt(N)``."""
    idx = rng.choice(len(LATTICE_CHOICES), size=n_groups, replace=False)
    c = 1 / np.sqrt(n_groups)
    lows, highs = [], []
    for i in idx:
        masks = random_tight_masks(rng, LATTICE_CHOICES[i], rounds=rounds, complex_=complex_)
        m = LATTICE_CHOICES[i]
        lows.append((scale(masks[0], c), m))
        highs.extend((scale(a, c), m) for a in masks[1:])
    return FilterBank(lows + highs)


def perturb(rng, bank, size=None):
    """Copy of ``bank`` with one random coefficient shifted by a visible amount."""
    size = size if size is not None else 10 ** rng.uniform(-6, -1)
    i = int(rng.integers(len(bank)))
    items = list(bank)
    a, m = items[i]
    data = np.array(a.data, dtype=np.complex128 if not a.is_real else float)
    idx = tuple(int(rng.integers(s)) for s in data.shape)
    data[idx] += size * (1 if rng.random() < 0.5 else -1)
    items[i] = (Mask(data, a.offset, band=a.band), m)
    return FilterBank(items, bank.separator)


def random_dyadic_bank(rng, dim=2, r=None):
    """Masks with random dyadic-rational taps on random allowed matrices."""
    r = r or int(rng.integers(2, 6))
    items = []
    for i in range(r):
        shape = tuple(int(x) for x in rng.integers(1, 3, size=dim))
        data = rng.integers(-4, 5, size=shape) / 8.0
        if not data.any():
            data.flat[0] = 0.125
        m = LATTICE_CHOICES[int(rng.integers(len(LATTICE_CHOICES)))] if dim == 2 else IntMatrix([[2]])
        items.append((Mask(data, band=LOW if i == 0 else HIGH), m))
    return FilterBank(items)
