from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form
from hypothesis import given, settings
from hypothesis import strategies as st

from amra.intlat import (
    IntMatrix,
    SingularMatrixError,
    coset_index,
    coset_reps,
    det,
    dual_coset_reps,
    in_dual_lattice,
    lattice_equal,
    parabolic,
    shear,
    smith_factor,
)
from oracles import dual_lattice_points


def small_matrices(dim, lo=-4, hi=4):
    entries = st.lists(st.integers(lo, hi), min_size=dim * dim, max_size=dim * dim)
    return entries.map(lambda e: IntMatrix([e[i * dim : (i + 1) * dim] for i in range(dim)])).filter(
        lambda m: m.det != 0 and abs(m.det) <= 64
    )


any_matrix = st.one_of(small_matrices(1, 1, 9), small_matrices(2), small_matrices(3, -2, 2))


class TestDet:
    @pytest.mark.parametrize(
        "rows, expected",
        [([[4, 0], [0, 2]], 8), ([[1, 1], [0, 1]], 1), ([[4, 2], [0, 2]], 8), ([[0, -2], [2, 0]], 4)],
    )
    def test_examples(self, rows, expected):
        assert det(rows) == expected

    @given(any_matrix)
    @settings(max_examples=60, deadline=None)
    def test_matches_sympy(self, m):
        assert m.det == int(sympy.Matrix(m.tolist()).det())

    def test_four_by_four(self):
        m = [[2, 1, 0, 3], [1, -1, 2, 0], [0, 4, 1, 1], [5, 0, -2, 1]]
        assert det(m) == int(sympy.Matrix(m).det())

    def test_rejects_non_square_and_large(self):
        with pytest.raises(ValueError):
            IntMatrix([[1, 2]])
        with pytest.raises(ValueError):
            IntMatrix(np.eye(5, dtype=int))

    def test_rejects_non_integers(self):
        with pytest.raises((ValueError, TypeError)):
            IntMatrix([[1.5]])


class TestSmith:
    def test_identity(self):
        e, d, f = smith_factor(IntMatrix.identity(2))
        assert d == IntMatrix.identity(2)
        assert e @ d @ f == IntMatrix.identity(2)

    @pytest.mark.parametrize("rows", [[[4, 0], [0, 2]], [[4, 2], [0, 2]], [[2, 0], [0, 4]]])
    def test_diag_4_2(self, rows):
        m = IntMatrix(rows)
        e, d, f = smith_factor(m)
        assert d == IntMatrix.diag(4, 2)
        assert e @ d @ f == m
        assert abs(e.det) == abs(f.det) == 1

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            smith_factor([[1, 2], [2, 4]])

    @given(any_matrix)
    @settings(max_examples=80, deadline=None)
    def test_roundtrip(self, m):
        e, d, f = smith_factor(m)
        assert e @ d @ f == m
        assert abs(e.det) == 1 and abs(f.det) == 1
        diag = [d[i, i] for i in range(m.dim)]
        assert all(d[i, j] == 0 for i in range(m.dim) for j in range(m.dim) if i != j)
        assert all(x > 0 for x in diag)
        assert diag == sorted(diag, reverse=True)
        # invariant factors agree with sympy's Smith normal form
        snf = smith_normal_form(sympy.Matrix(m.tolist()), domain=sympy.ZZ)
        assert sorted(diag) == sorted(abs(int(snf[i, i])) for i in range(m.dim))


class TestCosets:
    def test_dyadic(self):
        assert coset_reps(IntMatrix.identity(2) * 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_unimodular(self):
        assert coset_reps([[1, 1], [0, 1]]) == [(0, 0)]

    def test_diag_4_2(self):
        assert coset_reps(IntMatrix.diag(4, 2)) == sorted(product(range(4), range(2)))

    def test_dual_dyadic_1d(self):
        assert dual_coset_reps([[2]]) == [(F(0),), (F(1, 2),)]

    def test_dual_diag_4_2(self):
        expect = sorted((F(i, 4), F(j, 2)) for i in range(4) for j in range(2))
        assert dual_coset_reps(IntMatrix.diag(4, 2)) == expect

    def test_dual_sheared(self):
        expect = [
            (F(0), F(0)),
            (F(0), F(1, 2)),
            (F(1, 4), F(1, 4)),
            (F(1, 4), F(3, 4)),
            (F(1, 2), F(0)),
            (F(1, 2), F(1, 2)),
            (F(3, 4), F(1, 4)),
            (F(3, 4), F(3, 4)),
        ]
        assert dual_coset_reps([[4, 2], [0, 2]]) == expect

    @given(any_matrix)
    @settings(max_examples=60, deadline=None)
    def test_counts_and_membership(self, m):
        reps = coset_reps(m)
        duals = dual_coset_reps(m)
        assert len(reps) == len(duals) == abs(m.det)
        assert reps[0] == (0,) * m.dim or (0,) * m.dim in reps
        assert duals[0] == (0,) * m.dim
        assert all(in_dual_lattice(m, w) for w in duals)
        assert all(0 <= x < 1 for w in duals for x in w)
        assert set(duals) == {tuple(F(int(c.p), int(c.q)) for c in w) for w in dual_lattice_points(m)}
        # representatives are pairwise inequivalent
        assert sorted(coset_index(m, np.array(reps))) == list(range(len(reps)))

    @given(any_matrix, st.lists(st.integers(-20, 20), min_size=3, max_size=3))
    @settings(max_examples=40, deadline=None)
    def test_coset_index_consistent(self, m, pt):
        pt = pt[: m.dim]
        i = coset_index(m, np.array([pt]))[0]
        rep = coset_reps(m)[i]
        diff = [a - b for a, b in zip(pt, rep)]
        assert all(x.denominator == 1 for x in m.solve(diff))

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            coset_reps([[0, 0], [0, 1]])
        with pytest.raises(SingularMatrixError):
            dual_coset_reps([[0]])


class TestLatticeEqual:
    a4 = parabolic(4)

    def test_even_shear(self):
        assert lattice_equal(shear(2) @ self.a4, self.a4)

    def test_odd_shear(self):
        assert not lattice_equal(shear(1) @ self.a4, self.a4)

    def test_reflexive(self):
        assert lattice_equal(self.a4, self.a4)

    def test_right_unimodular_factor(self):
        m = IntMatrix([[3, 1], [1, 2]])
        assert lattice_equal(m, m @ IntMatrix([[2, 1], [1, 1]]))

    def test_singular_rejected(self):
        with pytest.raises(SingularMatrixError):
            lattice_equal([[1, 1], [1, 1]], self.a4)

    @given(st.lists(small_matrices(2, -3, 3), min_size=3, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_equivalence_relation(self, ms):
        for a in ms:
            assert lattice_equal(a, a)
            for b in ms:
                assert lattice_equal(a, b) == lattice_equal(b, a)
                for c in ms:
                    if lattice_equal(a, b) and lattice_equal(b, c):
                        assert lattice_equal(a, c)

    @given(small_matrices(2, -3, 3), st.integers(-3, 3), st.integers(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_dual_sets_depend_on_lattice_only(self, m, s, t):
        u = IntMatrix([[1, s], [0, 1]]) @ IntMatrix([[1, 0], [t, 1]])
        m2 = m @ u
        assert lattice_equal(m, m2)
        assert dual_coset_reps(m) == dual_coset_reps(m2)


def test_shear_3d_and_parabolic():
    assert shear((1, 2), dim=3) == IntMatrix([[1, 1, 2], [0, 1, 0], [0, 0, 1]])
    assert parabolic(4, 3) == IntMatrix.diag(4, 2, 2)
    with pytest.raises(ValueError):
        parabolic(3)


def test_inverse_is_exact():
    m = IntMatrix([[4, 2], [0, 2]])
    inv = m.inverse()
    assert [list(r) for r in inv] == [[F(1, 4), F(-1, 4)], [F(0), F(1, 2)]]
