"""Acceptance criteria, one test per criterion.

Each test records a one-line ``[PASS]`` / ``[FAIL]`` summary in ``RESULTS``;
the conftest hook prints them at the end of the pytest run. Running this
file directly executes only these tests.
"""

import sys
import tempfile
import time
from contextlib import contextmanager
from math import pi
from pathlib import Path

import numpy as np

from amra.analysis import cascade, decay_ratios, projection_errors, sum_rule_order
from amra.bankgen import lattice_bank, shear_class_3d, shearlet_bank_2d, shearlet_bank_3d, tensor_bank
from amra.intlat import IntMatrix, lattice_equal, parabolic, shear
from amra.io import save_pyramid
from amra.mask import Mask
from amra.ops import Signal
from amra.rotapprox import BOUNDARIES, best_unimodular, best_unimodular_bruteforce
from amra.tree import fad, far, level_energy_defects, shearlet_plan, validate_plan
from amra.uep import check_uep_general, check_uep_same_lattice, empirical_pr
from generators import (
    LATTICE_CHOICES,
    perturb,
    random_dyadic_bank,
    random_multilattice_bank,
    random_tight_bank,
)

RESULTS = {}

HAAR = Mask([0.5, 0.5])
HAT = Mask([0.25, 0.5, 0.25], offset=(-1,))


@contextmanager
def criterion(n, label, limit=None):
    """Time the body and record a pass/fail line for criterion ``n``."""
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
    except BaseException as exc:
        elapsed = time.perf_counter() - t0
        RESULTS[n] = f"[FAIL] criterion {n}: {label} ({elapsed:.2f} s) {type(exc).__name__}: {exc}"
        raise
    elapsed = time.perf_counter() - t0
    detail = info.get("detail", "")
    if limit is not None and elapsed >= limit:
        RESULTS[n] = f"[FAIL] criterion {n}: {label} took {elapsed:.2f} s, limit {limit} s {detail}"
        raise AssertionError(RESULTS[n])
    RESULTS[n] = f"[PASS] criterion {n}: {label} ({elapsed:.2f} s) {detail}".rstrip()


def _mixed_parity_levels(rng, depth):
    levels = []
    for _ in range(depth):
        sel = {int(rng.choice([-2, 0, 2])), int(rng.choice([-1, 1]))}
        sel |= set(int(k) for k in rng.integers(-2, 3, size=int(rng.integers(0, 2))))
        levels.append(sorted(sel))
    return levels


def _c1_banks(rng):
    """Certified constructions, random tight banks, perturbations and random dyadic banks."""
    banks = []
    for seed in ("haar", "linear_spline"):
        for d in (1, 2, 3):
            banks.append(tensor_bank(d, seed))
    for lat in LATTICE_CHOICES + [IntMatrix([[1, 1], [-1, 1]]), IntMatrix([[2, 1], [0, 2]])]:
        banks.append(lattice_bank(lat))
    for _ in range(12):
        banks.append(shearlet_bank_2d(sorted(set(int(k) for k in rng.integers(-2, 3, size=3)))))
    banks.append(shearlet_bank_3d([(0, 0)]))
    banks.append(shearlet_bank_3d([(0, 0), (1, 1)]))
    one_d = [IntMatrix([[2]]), IntMatrix([[3]]), IntMatrix([[-2]])]
    for i in range(60):
        if i % 4 == 0:
            m = one_d[i % 3]
        elif i % 4 == 3:
            m = IntMatrix.identity(3) * 2 if i % 8 == 3 else IntMatrix([[2, 1, 0], [0, 2, 0], [0, 0, 1]])
        else:
            m = LATTICE_CHOICES[i % len(LATTICE_CHOICES)]
        banks.append(random_tight_bank(rng, m, rounds=1 + i % 2, complex_=i % 5 == 0))
    for i in range(20):
        banks.append(random_multilattice_bank(rng, 2 + i % 2, complex_=i % 4 == 0))
    certified = list(banks)
    for i in range(90):
        banks.append(perturb(rng, certified[i % len(certified)]))
    for i in range(30):
        banks.append(random_dyadic_bank(rng, dim=1 + i % 2))
    return banks


def test_criterion_1_uep_iff_pr():
    with criterion(1, "UEP verdict equals empirical PR", limit=30) as info:
        rng = np.random.default_rng(101)
        banks = _c1_banks(rng)
        assert len(banks) >= 200
        mismatches, n_cert = [], 0
        for i, bank in enumerate(banks):
            verdict = check_uep_general(bank, 1e-10).certified
            side = 10 if bank.dim == 3 else 16
            pr = empirical_pr(bank, trials=3, rng=rng, tol=1e-10, max_side=side)
            n_cert += verdict
            if verdict != pr:
                mismatches.append(i)
        info["detail"] = f"{len(banks)} banks, {n_cert} certified, {len(mismatches)} mismatches"
        assert 0 < n_cert < len(banks)
        assert not mismatches, mismatches[:10]


def test_criterion_2_same_lattice_agreement():
    with criterion(2, "spatial and frequency checkers agree", limit=10) as info:
        rng = np.random.default_rng(202)
        banks = []
        lattices = LATTICE_CHOICES + [IntMatrix([[2]]), IntMatrix([[3]]), IntMatrix([[1, 1], [-1, 1]])]
        for i in range(45):
            m = lattices[i % len(lattices)]
            b = random_tight_bank(rng, m, rounds=1 + i % 2, complex_=i % 3 == 0)
            banks.append(perturb(rng, b) if i % 2 else b)
        for lat in LATTICE_CHOICES:
            banks.append(lattice_bank(lat))
            banks.append(lattice_bank(lat, "linear_spline"))
        for i in range(10):
            b = random_dyadic_bank(rng, dim=2)
            m = b.matrices[0]
            banks.append(b.with_matrices([m] * len(b)))
        assert len(banks) >= 50
        disagree = [
            i for i, b in enumerate(banks) if check_uep_same_lattice(b).certified != check_uep_general(b).certified
        ]
        n_cert = sum(check_uep_general(b).certified for b in banks)
        info["detail"] = f"{len(banks)} banks, {n_cert} certified, {len(disagree)} disagreements"
        assert 0 < n_cert < len(banks)
        assert not disagree


def _c3_plan_2d():
    rng = np.random.default_rng(303)
    levels = _mixed_parity_levels(rng, 3)
    plan = shearlet_plan(3, levels)
    v = Signal(rng.standard_normal((64, 64)))
    return plan, v, levels


def test_criterion_3_shearlet_roundtrip():
    with criterion(3, "shearlet roundtrip and per-level energy, 2-D and 3-D") as info:
        t0 = time.perf_counter()
        plan, v, levels = _c3_plan_2d()
        # every level mixes even and odd shears
        assert all({k % 2 for k in sel} == {0, 1} for sel in levels)
        assert validate_plan(plan).certified
        pyr = fad(plan, v)
        err2 = far(plan, pyr).max_abs_diff(v)
        energy2 = max(level_energy_defects(plan, v, pyr))
        t2 = time.perf_counter() - t0
        assert err2 <= 1e-10 and energy2 <= 1e-10
        assert t2 < 10, f"2-D run took {t2:.2f} s"

        t0 = time.perf_counter()
        rng = np.random.default_rng(304)
        plan3 = shearlet_plan(2, [(0, 0), (1, 0), (0, 1), (1, 1)], dim=3)
        v3 = Signal(rng.standard_normal((16, 16, 16)))
        pyr3 = fad(plan3, v3)
        err3 = far(plan3, pyr3).max_abs_diff(v3)
        energy3 = max(level_energy_defects(plan3, v3, pyr3))
        t3 = time.perf_counter() - t0
        info["detail"] = (
            f"2-D err {err2:.1e} energy {energy2:.1e} in {t2:.2f} s; "
            f"3-D err {err3:.1e} energy {energy3:.1e} in {t3:.2f} s"
        )
        assert err3 <= 1e-10 and energy3 <= 1e-10
        assert t3 < 60, f"3-D run took {t3:.2f} s"


def _as_set(sol):
    return {tuple(map(tuple, b.tolist())) for b in sol.minimizers}


def test_criterion_4_rotation_table():
    with criterion(4, "closed-form rotation table equals brute force", limit=5) as info:
        thetas = [2 * pi * i / 720 for i in range(720)] + list(BOUNDARIES)
        bad = []
        for t in thetas:
            cf, bf = best_unimodular(t), best_unimodular_bruteforce(t, 3)
            if _as_set(cf) != _as_set(bf) or abs(cf.objective - bf.objective) > 1e-12:
                bad.append(t)
        assert not bad, bad[:5]
        assert _as_set(best_unimodular(pi / 5)) == {((1, -1), (0, 1)), ((1, 0), (1, 1))}
        assert _as_set(best_unimodular(2 * pi / 5)) == {((0, -1), (1, 0))}
        assert _as_set(best_unimodular(0.0)) == {((1, 0), (0, 1))}
        info["detail"] = f"{len(thetas)} angles"


def test_criterion_5_lattice_parity():
    with criterion(5, "shear lattice parity and 3-D class count", limit=1) as info:
        a4 = parabolic(4)
        for s in range(-10, 11):
            assert lattice_equal(shear(s) @ a4, a4) == (s % 2 == 0)
        a3 = parabolic(4, 3)
        reps = []
        classes = set()
        for s1 in range(-3, 4):
            for s2 in range(-3, 4):
                m = shear((s1, s2), dim=3) @ a3
                classes.add(shear_class_3d((s1, s2)))
                hit = [i for i, r in enumerate(reps) if lattice_equal(m, r)]
                if not hit:
                    reps.append(m)
        assert len(reps) == 4 and len(classes) == 4
        info["detail"] = f"{len(reps)} distinct 3-D lattices"


def test_criterion_6_sum_rules_cascade_order():
    with criterion(6, "sum rules, cascades and approximation ratios", limit=30) as info:
        assert sum_rule_order(HAAR, [[2]]) == 1
        assert sum_rule_order(HAT, [[2]]) == 2
        assert sum_rule_order(Mask.delta(1), [[2]]) == 0
        gh = cascade(HAAR, [[2]], 10)
        x = gh.coordinates()[:, 0]
        inner = (x > 0) & (x < 1)
        e_haar = np.max(np.abs(gh.values()[inner] - 1.0))
        gt = cascade(HAT, [[2]], 10)
        x = gt.coordinates()[:, 0]
        inner = (x > -1) & (x < 1)
        e_hat = np.max(np.abs(gt.values()[inner] - (1 - np.abs(x[inner]))))
        assert e_haar <= 1e-6 and e_hat <= 1e-6
        ratios = {}
        for name, mask, tau in (("haar", HAAR, 1), ("hat", HAT, 2)):
            target = 4.0 ** (-tau / 2)
            r = decay_ratios(projection_errors(mask, [3, 4, 5, 6]))
            ratios[name] = r
            assert all(abs(x - target) <= 0.25 * target for x in r), (name, r)
        info["detail"] = "ratios " + ", ".join(f"{k} {[round(x, 4) for x in v]}" for k, v in ratios.items())


def test_criterion_7_adaptivity():
    with criterion(7, "swapping one interior node's bank keeps PR and energy") as info:
        rng = np.random.default_rng(707)
        worst_err = worst_energy = 0.0
        for trial in range(20):
            levels = _mixed_parity_levels(rng, 3)
            plan = shearlet_plan(3, levels)
            interior = [n for j in (1, 2) for n in plan.low_nodes(j)]
            node = interior[int(rng.integers(len(interior)))]
            kind = trial % 4
            if kind == 0:
                alt = shearlet_bank_2d(_mixed_parity_levels(rng, 1)[0], seed="linear_spline")
            elif kind == 1:
                alt = tensor_bank(2, ["haar", "linear_spline"][trial % 2])
            elif kind == 2:
                alt = random_tight_bank(rng, LATTICE_CHOICES[int(rng.integers(len(LATTICE_CHOICES)))], rounds=1)
            else:
                alt = lattice_bank(shear(1) @ parabolic(4), "linear_spline")
            swapped = shearlet_plan(3, levels, overrides={node: alt})
            assert swapped.bank_for(node) is alt
            assert validate_plan(swapped).certified
            v = Signal(rng.standard_normal((64, 64)))
            pyr = fad(swapped, v)
            err = far(swapped, pyr).max_abs_diff(v)
            energy = max(level_energy_defects(swapped, v, pyr))
            worst_err, worst_energy = max(worst_err, err), max(worst_energy, energy)
            assert err <= 1e-10 and energy <= 1e-10, (trial, node, err, energy)
        info["detail"] = f"20/20 trials, worst err {worst_err:.1e}, worst energy {worst_energy:.1e}"


def test_criterion_8_determinism():
    with criterion(8, "pyramid bytes identical for 1 and 4 workers") as info:
        plan, v, _ = _c3_plan_2d()
        with tempfile.TemporaryDirectory() as tmp:
            dirs = []
            for workers in (1, 4):
                d = Path(tmp) / f"w{workers}"
                save_pyramid(d, plan, fad(plan, v, workers=workers))
                dirs.append(d)
            names = sorted(p.name for p in dirs[0].iterdir())
            assert names == sorted(p.name for p in dirs[1].iterdir())
            for name in names:
                assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name
        info["detail"] = f"{len(names)} files compared"


if __name__ == "__main__":
    import pytest

    code = pytest.main([__file__, "-q"])
    for key in sorted(RESULTS):
        print(RESULTS[key])
    sys.exit(code)
