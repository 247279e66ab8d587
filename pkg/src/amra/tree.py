"""Adaptive multi-level tree transform (decomposition and reconstruction).

A node is identified by its path ``(b_1, ..., b_j)`` of 1-based child
indices; the root is ``()``. A plan assigns a filter bank to every low-pass
node above the final level: by default one bank per level, optionally
overridden per node. Children with index ``<= separator`` continue to the
next level; the others are high-pass leaves and are never expanded.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .filterbank import FilterBank
from .intlat import IntMatrix
from .ops import Signal, reconstruct_step, transition
from .uep import DEFAULT_TOL, check_uep_general


class UncertifiedPlanError(ValueError):
    pass


def node_str(node, depth):
    """Zero-padded serialized form of a path, e.g. ``(2,)`` at depth 3 -> ``"2-0-0"``."""
    if not node:
        return "root" if depth == 0 else "-".join(["0"] * depth)
    return "-".join(str(b) for b in tuple(node) + (0,) * (depth - len(node)))


def parse_node(text):
    if text in ("root", ""):
        return ()
    parts = [int(p) for p in text.split("-")]
    while parts and parts[-1] == 0:
        parts.pop()
    if any(p <= 0 for p in parts):
        raise ValueError(f"malformed node id {text!r}")
    return tuple(parts)


class TreePlan:
    """Per-node expansion specification.

    Parameters
    ----------
    dim : int
    depth : int
        Number of levels ``J``.
    levels : list of FilterBank
        ``levels[j]`` expands the low nodes at level ``j`` (``len == depth``).
    overrides : dict, optional
        ``{node: FilterBank}`` replacing the level bank at specific nodes.
    """

    def __init__(self, dim, depth, levels, overrides=None):
        self.dim = int(dim)
        self.depth = int(depth)
        self.levels = list(levels)
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        if len(self.levels) != self.depth:
            raise ValueError(f"plan of depth {depth} needs {depth} level banks, got {len(self.levels)}")
        self.overrides = {tuple(k): v for k, v in (overrides or {}).items()}
        for bank in self.levels + list(self.overrides.values()):
            if not isinstance(bank, FilterBank):
                raise TypeError("plan banks must be FilterBank instances")
            if bank.dim != self.dim:
                raise ValueError(f"bank of dim {bank.dim} in a plan of dim {self.dim}")
        expandable = set()
        for j in range(self.depth):
            expandable.update(self.low_nodes(j))
        bad = [k for k in self.overrides if k not in expandable]
        if bad:
            raise ValueError(f"overrides at nodes that are never expanded: {bad}")

    def bank_for(self, node):
        node = tuple(node)
        if node in self.overrides:
            return self.overrides[node]
        return self.levels[len(node)]

    def children(self, node):
        """``(low_children, high_children)`` of an expanded node."""
        bank = self.bank_for(node)
        kids = [tuple(node) + (i + 1,) for i in range(len(bank))]
        return kids[: bank.separator], kids[bank.separator:]

    def low_nodes(self, j):
        """Low-pass nodes at level ``j`` (the set L^L_j), in path order."""
        frontier = [()]
        for _ in range(j):
            nxt = []
            for node in frontier:
                nxt.extend(self.children(node)[0])
            frontier = nxt
        return frontier

    def high_nodes(self, j):
        """High-pass leaves created at level ``j >= 1``."""
        out = []
        for node in self.low_nodes(j - 1):
            out.extend(self.children(node)[1])
        return out

    def leaves(self):
        """``(low leaves at level J, high leaves of all levels)``, each sorted."""
        high = []
        for j in range(1, self.depth + 1):
            high.extend(self.high_nodes(j))
        return sorted(self.low_nodes(self.depth)), sorted(high)

    def expansion_nodes(self):
        out = []
        for j in range(self.depth):
            out.extend(self.low_nodes(j))
        return out

    def matrix_path(self, node):
        """Dilation matrices ``M_{b_1}, ..., M_{b_j}`` along the root-to-node path."""
        node = tuple(node)
        return [self.bank_for(node[:i]).matrices[node[i] - 1] for i in range(len(node))]

    def mask_at(self, node):
        node = tuple(node)
        if not node:
            raise ValueError("the root carries no mask")
        return self.bank_for(node[:-1]).masks[node[-1] - 1]

    def accumulated_matrix(self, node):
        """Exact ``N = M_b^{-1} M_{b^(1)}^{-1} ... `` as rows of Fractions."""
        n = [[Fraction(int(i == j)) for j in range(self.dim)] for i in range(self.dim)]
        for m in self.matrix_path(node):
            inv = m.inverse()
            n = [[sum(inv[i][k] * n[k][j] for k in range(self.dim)) for j in range(self.dim)] for i in range(self.dim)]
        return n

    def validate(self, tol=DEFAULT_TOL):
        return validate_plan(self, tol)

    def digest(self):
        from .io import canonical_json, plan_to_dict

        return hashlib.sha256(canonical_json(plan_to_dict(self)).encode()).hexdigest()


@dataclass
class PlanReport:
    """Aggregated UEP verdict over all expansion nodes of a plan."""

    certified: bool
    worst_violation: float
    nodes: dict = field(default_factory=dict)

    def failing(self):
        return [n for n, r in self.nodes.items() if not r.certified]

    def to_dict(self, depth=0):
        return {
            "certified": self.certified,
            "failing_nodes": [node_str(n, depth) for n in self.failing()],
            "worst_violation": self.worst_violation,
        }

    def __bool__(self):
        return self.certified


def validate_plan(plan, tol=DEFAULT_TOL):
    """Run the general UEP check on every expansion node's bank."""
    nodes = {}
    worst = 0.0
    for node in plan.expansion_nodes():
        report = check_uep_general(plan.bank_for(node), tol)
        nodes[node] = report
        worst = max(worst, report.worst_violation)
    return PlanReport(all(r.certified for r in nodes.values()), worst, nodes)


@dataclass
class Pyramid:
    """Coefficients produced by :func:`fad`.

    ``low`` holds the level-``J`` low-pass leaves, ``high`` every high-pass
    leaf; ``digest`` identifies the plan that produced them.
    """

    low: dict
    high: dict
    digest: str
    depth: int

    def leaves(self):
        return {**self.low, **self.high}

    def keys(self):
        return sorted(self.low), sorted(self.high)

    def zero_high(self):
        return Pyramid(dict(self.low), {k: Signal.zeros(v.dim) for k, v in self.high.items()}, self.digest, self.depth)


def _map(fn, args, workers):
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda a: fn(*a), args))


def _require_certified(plan, force, tol):
    if force:
        return
    report = validate_plan(plan, tol)
    if not report.certified:
        raise UncertifiedPlanError(
            f"plan fails UEP at nodes {report.failing()[:5]} (worst {report.worst_violation:.3g}); pass force=True to run anyway"
        )


def _expand(plan, node, v):
    bank = plan.bank_for(node)
    return [(tuple(node) + (i + 1,), transition(a, m, v)) for i, (a, m) in enumerate(bank)]


def fad(plan, v, force=False, workers=1, tol=DEFAULT_TOL):
    """Adaptive decomposition of ``v`` into a :class:`Pyramid`.

    Levels run breadth first; sibling expansions at one level may run on
    ``workers`` threads. Results are assembled in path order, so output is
    identical for any worker count.
    """
    if v.dim != plan.dim:
        raise ValueError(f"signal dim {v.dim} does not match plan dim {plan.dim}")
    _require_certified(plan, force, tol)
    frontier = {(): v}
    high = {}
    for _ in range(plan.depth):
        nodes = sorted(frontier)
        results = _map(lambda n: _expand(plan, n, frontier[n]), [(n,) for n in nodes], workers)
        nxt = {}
        for node, kids in zip(nodes, results):
            bank = plan.bank_for(node)
            for idx, (child, sig) in enumerate(kids):
                (nxt if idx < bank.separator else high)[child] = sig
        frontier = nxt
    return Pyramid(low=frontier, high=high, digest=plan.digest(), depth=plan.depth)


def _check_keys(plan, pyramid):
    low, high = plan.leaves()
    got_low, got_high = pyramid.keys()
    if got_low != low or got_high != high:
        missing = sorted(set(low + high) - set(got_low + got_high))
        extra = sorted(set(got_low + got_high) - set(low + high))
        raise KeyError(f"pyramid does not match plan leaves: missing {missing[:5]}, extra {extra[:5]}")


def far(plan, pyramid, force=False, workers=1, tol=DEFAULT_TOL):
    """Adaptive reconstruction; inverse of :func:`fad` for certified plans."""
    _check_keys(plan, pyramid)
    _require_certified(plan, force, tol)
    values = pyramid.leaves()
    for j in range(plan.depth - 1, -1, -1):
        nodes = plan.low_nodes(j)

        def rebuild(node):
            bank = plan.bank_for(node)
            parts = [values[node + (i + 1,)] for i in range(len(bank))]
            return reconstruct_step(bank, parts)

        for node, sig in zip(nodes, _map(rebuild, [(n,) for n in nodes], workers)):
            values[node] = sig
    return values[()]


def level_energy_defects(plan, v, pyramid=None):
    """Per-level relative defect of ``sum_children |det M| ||child||^2 = ||parent||^2``.

    Returns a list of length ``J`` with the worst defect over the nodes of
    each level.
    """
    pyramid = fad(plan, v, force=True) if pyramid is None else pyramid
    # rebuild intermediate low nodes from the leaves level by level
    values = pyramid.leaves()
    for j in range(plan.depth - 1, -1, -1):
        for node in plan.low_nodes(j):
            bank = plan.bank_for(node)
            values[node] = reconstruct_step(bank, [values[node + (i + 1,)] for i in range(len(bank))])
    out = []
    for j in range(plan.depth):
        worst = 0.0
        for node in plan.low_nodes(j):
            bank = plan.bank_for(node)
            parent = values[node].norm_sq()
            total = sum(abs(m.det) * values[node + (i + 1,)].norm_sq() for i, (_, m) in enumerate(bank))
            worst = max(worst, abs(total - parent) / parent if parent else abs(total))
        out.append(worst)
    return out


def uniform_plan(bank, depth, overrides=None):
    """Plan with the same bank at every level."""
    return TreePlan(bank.dim, depth, [bank] * depth, overrides)


def _is_scalar(x):
    return isinstance(x, (int, np.integer))


def _is_selection(x, dim):
    """Whether ``x`` is a single shear selection rather than a per-level list."""
    items = list(x)
    if not items:
        return False
    if dim == 2:
        return all(_is_scalar(s) for s in items)
    return all(isinstance(s, (list, tuple)) and len(s) == 2 and all(_is_scalar(t) for t in s) for s in items)


def shearlet_plan(depth, shears, seed="haar", dim=2, low=None, overrides=None):
    """Plan with a shearlet bank per level.

    ``shears`` is either one selection used at every level or a list of
    ``depth`` selections (integers in 2-D, pairs in 3-D). ``overrides`` maps
    nodes to alternative shear selections or ready-made banks.
    """
    from .bankgen import shearlet_bank_2d, shearlet_bank_3d

    if depth < 1:
        raise ValueError("a shearlet plan needs depth >= 1")
    if dim not in (2, 3):
        raise ValueError("shearlet plans exist for dim 2 and 3")
    build = shearlet_bank_2d if dim == 2 else shearlet_bank_3d

    per_level = [shears] * depth if _is_selection(shears, dim) else list(shears)
    if len(per_level) != depth:
        raise ValueError(f"need {depth} shear selections, got {len(per_level)}")
    levels = [build(sel, seed, low=low) for sel in per_level]
    ov = {}
    for node, spec in (overrides or {}).items():
        ov[tuple(node)] = spec if isinstance(spec, FilterBank) else build(spec, seed, low=low)
    return TreePlan(dim, depth, levels, ov)


def identity_bank(dim):
    from .mask import Mask

    return FilterBank([(Mask.delta(dim), IntMatrix.identity(dim))])
