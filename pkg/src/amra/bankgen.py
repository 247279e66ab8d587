"""Construction of certified tight-frame filter banks.

One-dimensional seed banks are tensorized along the Smith factorization
``L = E D F`` of a lattice generator, remapped by ``E``, and several such
lattice banks can be merged with a ``1/sqrt(N)`` renormalization. The
shearlet constructors group shear matrices by the lattice they generate.
Every constructor certifies its output and refuses to return a bank that
fails the UEP check.
"""

from dataclasses import dataclass
from itertools import product
from math import sqrt

import numpy as np

from .filterbank import FilterBank
from .intlat import IntMatrix, as_intmatrix, parabolic, shear, smith_factor
from .mask import HIGH, LOW, Mask, remap, scale, tensor
from .uep import DEFAULT_TOL, check_uep_general, check_uep_same_lattice

SEED_NAMES = ("haar", "linear_spline")


class UncertifiedBankError(ValueError):
    """Raised when a constructed bank fails UEP certification."""

    def __init__(self, message, report):
        super().__init__(f"{message} (worst violation {report.worst_violation:.3g})")
        self.report = report


@dataclass(frozen=True)
class SeedBank1D:
    """A 1-D tight frame filter bank for dilation ``dilation``; low filter first."""

    name: str
    dilation: int
    filters: tuple

    def bank(self):
        return FilterBank([(u, IntMatrix([[self.dilation]])) for u in self.filters])


def _haar2():
    return [Mask([0.5, 0.5]), Mask([0.5, -0.5], band=HIGH)]


def _haar4():
    return [
        Mask([0.25, 0.25, 0.25, 0.25]),
        Mask([0.25, 0.25, -0.25, -0.25], band=HIGH),
        Mask([0.25, -0.25, -0.25, 0.25], band=HIGH),
        Mask([0.25, -0.25, 0.25, -0.25], band=HIGH),
    ]


def _spline2():
    r = sqrt(2) / 4
    return [
        Mask([0.25, 0.5, 0.25], offset=(-1,)),
        Mask([r, 0.0, -r], offset=(-1,), band=HIGH),
        Mask([-0.25, 0.5, -0.25], offset=(-1,), band=HIGH),
    ]


def _upsample(u, q):
    data = np.zeros((u.shape[0] - 1) * q + 1, dtype=u.data.dtype)
    data[::q] = u.data
    return Mask(data, offset=(u.offset[0] * q,), band=u.band)


def _compose(inner, outer):
    """Filters ``u_i(xi) * w_j(2 xi)``: a dilation-4 bank from two dilation-2 banks."""
    out = []
    for u in inner:
        for w in outer:
            w2 = _upsample(w, 2)
            data = np.convolve(u.data, w2.data)
            band = LOW if (u.band == LOW and w.band == LOW) else HIGH
            out.append(Mask(data, offset=(u.offset[0] + w2.offset[0],), band=band))
    return out


_BUILDERS = {
    ("haar", 2): _haar2,
    ("haar", 4): _haar4,
    ("linear_spline", 2): _spline2,
    ("linear_spline", 4): lambda: _compose(_spline2(), _spline2()),
}


def seed_bank(name, dilation=2, tol=DEFAULT_TOL):
    """1-D seed bank ``name`` ("haar" or "linear_spline") for ``dilation`` 2 or 4."""
    if name not in SEED_NAMES:
        raise ValueError(f"unknown seed {name!r}; expected one of {SEED_NAMES}")
    builder = _BUILDERS.get((name, int(dilation)))
    if builder is None:
        raise ValueError(f"seed {name!r} is not provided for dilation {dilation}")
    seed = SeedBank1D(name, int(dilation), tuple(builder()))
    report = check_uep_general(seed.bank(), tol)
    if not report.certified:
        raise UncertifiedBankError(f"seed {name}-{dilation} failed certification", report)
    return seed


def _resolve_seed(seed, factor):
    if factor == 1:
        return [Mask.delta(1)]
    if isinstance(seed, str):
        return list(seed_bank(seed, factor).filters)
    if isinstance(seed, SeedBank1D):
        if seed.dilation != factor:
            raise ValueError(f"seed has dilation {seed.dilation}, lattice needs invariant factor {factor}")
        return list(seed.filters)
    if isinstance(seed, dict):
        if factor not in seed:
            raise ValueError(f"no seed bank supplied for invariant factor {factor}")
        return _resolve_seed(seed[factor], factor)
    raise TypeError(f"unsupported seed specification {seed!r}")


def lattice_bank(lattice, seed="haar", tol=DEFAULT_TOL):
    """Tensor-product bank whose filters all carry the matrix ``lattice``.

    ``seed`` is a family name, a :class:`SeedBank1D`, or a map from
    invariant factor to seed. With ``L = E D F`` the filters are
    ``a(E m) = (u_1 x ... x u_d)(m)`` over all combinations of the seed
    filters for each diagonal entry of ``D``, in lexicographic order.
    """
    lattice = as_intmatrix(lattice).require_nonsingular()
    e, dmat, _ = smith_factor(lattice)
    factors = [abs(dmat[i, i]) for i in range(lattice.dim)]
    per_axis = [_resolve_seed(seed, f) for f in factors]
    items = [(remap(tensor(combo), e), lattice) for combo in product(*per_axis)]
    bank = FilterBank.from_labelled(items)
    report = check_uep_same_lattice(bank, tol)
    if not report.certified:
        raise UncertifiedBankError("lattice bank failed certification", report)
    return bank


def tensor_bank(dim, seed="haar", dilation=2, tol=DEFAULT_TOL):
    """Separable bank on ``dilation * I_dim``."""
    return lattice_bank(IntMatrix.identity(dim) * dilation, seed, tol)


def merge_banks(groups, tol=DEFAULT_TOL):
    """Concatenate banks, scaling every filter by ``1/sqrt(N)``; lows first."""
    groups = list(groups)
    if not groups:
        raise ValueError("merge_banks needs at least one bank")
    if len(groups) == 1:
        return groups[0]
    c = 1.0 / sqrt(len(groups))
    items = [(scale(a, c), m) for g in groups for a, m in g]
    bank = FilterBank.from_labelled(items)
    report = check_uep_general(bank, tol)
    if not report.certified:
        raise UncertifiedBankError("merged bank failed certification", report)
    return bank


def _unique(seq):
    out = []
    for x in seq:
        if x not in out:
            out.append(x)
    return out


def _shearlet_bank(classes, class_lattice, shear_matrix, scaling, seed, designation, low, tol):
    """Shared body of the 2-D and 3-D shearlet constructors.

    ``classes`` maps a parity key to the ordered shears in that class.
    Items are built class by class (sorted keys), each class in the
    lexicographic order of :func:`lattice_bank`.
    """
    groups = []
    flat_index = 0
    for key in sorted(classes):
        shears = classes[key]
        base = lattice_bank(class_lattice(key) @ scaling, seed, tol)
        items = []
        for i, (a, _) in enumerate(base):
            idx = flat_index + i
            if designation is not None:
                if idx >= len(designation):
                    raise ValueError(f"designation has {len(designation)} entries, bank needs more")
                k = designation[idx]
                if k not in shears:
                    raise ValueError(f"designated shear {k} for item {idx} is not in its class {shears}")
            else:
                k = shears[i % len(shears)]
            if low is not None:
                a = a.with_band(LOW if idx in low else HIGH)
            items.append((a, shear_matrix(k) @ scaling))
        flat_index += len(base)
        groups.append(FilterBank.from_labelled(items))
    if designation is not None and len(designation) != flat_index:
        raise ValueError(f"designation has {len(designation)} entries, bank has {flat_index} items")
    return merge_banks(groups, tol)


def shearlet_bank_2d(shears, seed="haar", designation=None, low=None, tol=DEFAULT_TOL):
    """Shearlet bank with matrices ``S_k A_4``, ``A_4 = diag(4, 2)``.

    Shears are split by parity into at most two lattice classes; one tensor
    bank per class is merged with ``1/sqrt(N)``. Each filter gets a shear
    from its class, round robin by default, or per item from
    ``designation``. ``low`` optionally lists item indices (in class-major
    construction order) that are treated as low-pass; by default only the
    tensor low filter of each class is.
    """
    shears = _unique(int(k) for k in shears)
    if not shears:
        raise ValueError("at least one shear is required")
    classes = {}
    for k in shears:
        classes.setdefault(k % 2, []).append(k)
    return _shearlet_bank(
        classes, lambda p: shear(p), shear, parabolic(4, 2), seed, designation, low, tol
    )


def shear_class_3d(s):
    return (int(s[0]) % 2, int(s[1]) % 2)


def shearlet_bank_3d(shears, seed="haar", designation=None, low=None, tol=DEFAULT_TOL):
    """3-D shearlet bank with matrices ``S_{s1,s2} A_4``, ``A_4 = diag(4, 2, 2)``.

    Shear pairs fall into four lattice classes by ``(s1 mod 2, s2 mod 2)``.
    """
    shears = _unique((int(s[0]), int(s[1])) for s in shears)
    if not shears:
        raise ValueError("at least one shear pair is required")
    classes = {}
    for s in shears:
        classes.setdefault(shear_class_3d(s), []).append(s)
    return _shearlet_bank(
        classes,
        lambda p: shear(p, dim=3),
        lambda s: shear(s, dim=3),
        parabolic(4, 3),
        seed,
        designation,
        low,
        tol,
    )
