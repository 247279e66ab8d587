"""Filter banks: ordered (mask, dilation matrix) pairs with a low/high split."""

import numpy as np

from .intlat import as_intmatrix
from .mask import HIGH, LOW, Mask, scale


class FilterBank:
    """One expansion step ``{(a_i, M_i)}_{i=1..r}``.

    Items ``0 .. separator-1`` are the low-pass children that get expanded
    further; the rest are high-pass leaves. Band labels on the masks must
    agree with the separator.

    Parameters
    ----------
    items : iterable of (Mask, matrix-like)
    separator : int, optional
        Number of low-pass items. Defaults to the count of leading
        ``"low"`` masks.
    """

    def __init__(self, items, separator=None):
        items = [(a, as_intmatrix(m)) for a, m in items]
        if not items:
            raise ValueError("a filter bank needs at least one item")
        d = items[0][0].dim
        for a, m in items:
            if not isinstance(a, Mask):
                raise TypeError("bank items must hold Mask instances")
            if a.dim != d or m.dim != d:
                raise ValueError("all masks and matrices in a bank must share one dimension")
            m.require_nonsingular()
        if separator is None:
            separator = 0
            while separator < len(items) and items[separator][0].band == LOW:
                separator += 1
        if not 1 <= separator <= len(items):
            raise ValueError(f"separator must satisfy 1 <= s <= r, got {separator} for r={len(items)}")
        bands = [a.band for a, _ in items]
        if any(b != LOW for b in bands[:separator]) or any(b != HIGH for b in bands[separator:]):
            raise ValueError("band labels inconsistent with separator (low items must come first)")
        self.items = tuple(items)
        self.separator = separator
        self.dim = d
        self._cache = {}

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __repr__(self):
        return f"FilterBank(r={len(self)}, s={self.separator}, dim={self.dim})"

    def __eq__(self, other):
        return (
            isinstance(other, FilterBank)
            and self.separator == other.separator
            and len(self) == len(other)
            and all(a == b and m == n for (a, m), (b, n) in zip(self.items, other.items))
        )

    __hash__ = None

    @property
    def r(self):
        return len(self.items)

    @property
    def masks(self):
        return [a for a, _ in self.items]

    @property
    def matrices(self):
        return [m for _, m in self.items]

    @classmethod
    def from_labelled(cls, items):
        """Stable-partition items so low-band masks come first."""
        items = list(items)
        lows = [(a, m) for a, m in items if a.band == LOW]
        highs = [(a, m) for a, m in items if a.band == HIGH]
        return cls(lows + highs, separator=len(lows))

    def relabel(self, low):
        """New bank where exactly the items with indices in ``low`` are low-pass."""
        low = set(low)
        items = [(a.with_band(LOW if i in low else HIGH), m) for i, (a, m) in enumerate(self.items)]
        return FilterBank.from_labelled(items)

    def with_matrices(self, matrices):
        return FilterBank([(a, m) for (a, _), m in zip(self.items, matrices)], self.separator)

    def scaled(self, c):
        return FilterBank([(scale(a, c), m) for a, m in self.items], self.separator)

    def is_real(self):
        return all(a.is_real for a in self.masks)

    def max_abs_coeff(self):
        return max(float(np.max(np.abs(a.data))) for a in self.masks)
