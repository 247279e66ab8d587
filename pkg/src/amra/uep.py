"""Certification of the unitary extension principle for a filter bank.

The general condition: for every ``omega`` in the union of the dual coset
sets of the bank's dilation matrices,

    sum_{i : M_i^T omega in Z^d} a_i^(xi) conj(a_i^(xi + 2 pi omega)) = delta(omega)

as trigonometric polynomials in ``xi``. Every Fourier coefficient of the
left side is computed from the masks and compared with the right side, so
the check is exact up to floating point rounding.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .intlat import coset_index, coset_reps, dual_coset_reps, in_dual_lattice, lattice_equal
from .mask import Mask, correlation_array
from .ops import Signal, analyze_step, reconstruct_step

DEFAULT_TOL = 1e-10
MAX_VIOLATIONS = 100


def _fmt_rational(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class UepReport:
    """Outcome of a UEP check.

    ``violations`` holds at most 100 entries ``(omega, m, residual)`` sorted
    by decreasing residual; ``n_violations`` is the full count.
    """

    certified: bool
    worst_violation: float
    tol: float
    violations: list = field(default_factory=list)
    n_violations: int = 0
    kind: str = "general"

    def to_dict(self):
        return {
            "certified": self.certified,
            "kind": self.kind,
            "n_violations": self.n_violations,
            "tol": self.tol,
            "violations": [
                {"omega": [_fmt_rational(w) for w in om], "m": list(m), "residual": r}
                for om, m, r in self.violations
            ],
            "worst_violation": self.worst_violation,
        }

    def __bool__(self):
        return self.certified


def _collect(residuals, tol, kind):
    """Build a report from ``[(key, lag_offset, residual_array)]``."""
    worst = 0.0
    found = []
    for key, lag_offset, res in residuals:
        if res.size:
            worst = max(worst, float(res.max()))
        for idx in zip(*np.nonzero(res > tol)):
            m = tuple(int(i) + o for i, o in zip(idx, lag_offset))
            found.append((key, m, float(res[idx])))
    found.sort(key=lambda t: (-t[2], t[0], t[1]))
    return UepReport(
        certified=worst <= tol,
        worst_violation=worst,
        tol=tol,
        violations=found[:MAX_VIOLATIONS],
        n_violations=len(found),
        kind=kind,
    )


def omega_set(bank):
    """Exact union of the dual coset sets of all bank matrices, sorted."""
    omegas = set()
    seen = []
    for m in bank.matrices:
        if any(lattice_equal(m, s) for s in seen):
            continue
        seen.append(m)
        omegas.update(dual_coset_reps(m))
    return sorted(omegas)


def uep_polynomial(bank, omega, duals=None):
    """Coefficients of ``sum_i a_i^(xi) conj(a_i^(xi + 2 pi omega))``.

    Only items with ``M_i^T omega`` integral contribute. Returns
    ``(lag_offset, coeffs)`` on a box symmetric about the origin.
    ``duals`` optionally maps each bank matrix to its set of dual coset
    representatives, replacing the per-item membership test.
    """
    if duals is None:
        members = [(a, m) for a, m in bank if in_dual_lattice(m, omega)]
    else:
        omega = tuple(omega)
        members = [(a, m) for a, m in bank if omega in duals[m]]
    half = [max(a.shape[i] for a in bank.masks) - 1 for i in range(bank.dim)]
    out = np.zeros(tuple(2 * h + 1 for h in half), dtype=np.complex128)
    for a, _ in members:
        off, c = correlation_array(a, a, omega)
        sl = tuple(slice(o + h, o + h + s) for o, h, s in zip(off, half, c.shape))
        out[sl] += c
    return tuple(-h for h in half), out


def check_uep_general(bank, tol=DEFAULT_TOL):
    """Certify or refute the general UEP for ``bank``; returns a :class:`UepReport`."""
    key = ("general", tol)
    if key in bank._cache:
        return bank._cache[key]
    residuals = []
    duals = {m: set(dual_coset_reps(m)) for m in set(bank.matrices)}
    for omega in omega_set(bank):
        off, c = uep_polynomial(bank, omega, duals)
        if not any(omega):
            c = c.copy()
            c[tuple(-o for o in off)] -= 1.0
        residuals.append((omega, off, np.abs(c)))
    report = _collect(residuals, tol, "general")
    bank._cache[key] = report
    return report


def common_lattice(bank):
    """The first matrix if all bank matrices generate the same lattice, else ``None``."""
    m0 = bank.matrices[0]
    if all(lattice_equal(m0, m) for m in bank.matrices[1:]):
        return m0
    return None


def check_uep_same_lattice(bank, tol=DEFAULT_TOL):
    """Spatial-domain check for banks on a single lattice ``M Z^d``.

    For every coset representative ``g`` and every lag ``k``,

        sum_i sum_n conj(a_i(k + M n + g)) a_i(M n + g) = delta(k) / |det M|.

    The residual reported for ``(g, k)`` is the absolute deviation. The
    ``omega`` slot of each violation carries the coset representative.
    """
    key = ("same_lattice", tol)
    if key in bank._cache:
        return bank._cache[key]
    m = common_lattice(bank)
    if m is None:
        raise ValueError("bank matrices generate different lattices; use check_uep_general")
    target = 1.0 / abs(m.det)
    reps = coset_reps(m)
    half = [max(a.shape[i] for a in bank.masks) - 1 for i in range(bank.dim)]
    shape = tuple(2 * h + 1 for h in half)
    acc = [np.zeros(shape, dtype=np.complex128) for _ in reps]
    for a, _ in bank:
        cls = coset_index(m, a.points()).reshape(a.shape)
        for gi in range(len(reps)):
            part = np.where(cls == gi, a.data, 0)
            if not np.any(part):
                continue
            # sum_x conj(a(x + k)) part(x), read off as the conjugate correlation
            off, c = correlation_array(a, Mask(part, a.offset), None)
            sl = tuple(slice(o + h, o + h + s) for o, h, s in zip(off, half, c.shape))
            acc[gi][sl] += np.conj(c)
    residuals = []
    lag_offset = tuple(-h for h in half)
    for g, s in zip(reps, acc):
        s[tuple(half)] -= target
        residuals.append((tuple(g), lag_offset, np.abs(s)))
    report = _collect(residuals, tol, "same_lattice")
    bank._cache[key] = report
    return report


def random_signal(dim, rng, max_side=12, complex_=False):
    shape = tuple(int(x) for x in rng.integers(1, max_side + 1, size=dim))
    offset = tuple(int(x) for x in rng.integers(-6, 7, size=dim))
    data = rng.standard_normal(shape)
    if complex_:
        data = data + 1j * rng.standard_normal(shape)
    return Signal(data, offset)


def reconstruction_error(bank, v):
    """Max-abs error of one analysis/synthesis round trip on ``v``."""
    return reconstruct_step(bank, analyze_step(bank, v)).max_abs_diff(v)


def empirical_pr(bank, trials=50, rng=None, tol=DEFAULT_TOL, max_side=12):
    """True iff ``sum_i S_i T_i v = v`` to ``tol`` on ``trials`` random signals."""
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(trials):
        if reconstruction_error(bank, random_signal(bank.dim, rng, max_side)) > tol:
            return False
    return True


def agreement(bank, trials=50, rng=None, tol=DEFAULT_TOL):
    """Whether the UEP verdict matches empirical perfect reconstruction."""
    return check_uep_general(bank, tol).certified == empirical_pr(bank, trials, rng, tol)


def energy_defect(bank, v):
    """Relative defect of ``sum_i |det M_i| ||T_i v||^2 = ||v||^2``."""
    total = sum(abs(m.det) * p.norm_sq() for (_, m), p in zip(bank, analyze_step(bank, v)))
    ref = v.norm_sq()
    return abs(total - ref) / ref if ref else abs(total)
