import random
from fractions import Fraction

import numpy as np
import pytest

from indexlab.errors import GradeMismatch, NotInvertible
from indexlab.linalg import ExactMatrix, rank_kernel, sparse_rank
from indexlab.scalars import GaussianRational, GradedScalar


def rational_matrix(rng, rows, cols, lo=-4, hi=4):
    return ExactMatrix(
        rows,
        cols,
        {
            (i, j): Fraction(rng.randint(lo, hi), rng.randint(1, 3))
            for i in range(rows)
            for j in range(cols)
        },
    )


def apply_matrix(m, vec):
    out = [GradedScalar.zero() for _ in range(m.rows)]
    for (i, j), v in m.entries.items():
        out[i] = out[i] + v * vec[j]
    return out


def test_proportional_rows_kernel():
    m = ExactMatrix.from_rows([[1, 2], [2, 4]])
    rank, kernel = rank_kernel(m)
    assert rank == 1
    assert len(kernel) == 1
    assert kernel[0] == [GradedScalar.of(-2), GradedScalar.of(1)]


def test_identity_has_empty_kernel():
    rank, kernel = rank_kernel(ExactMatrix.identity(3))
    assert rank == 3
    assert kernel == []


def test_rank_matches_float_svd_oracle():
    rng = random.Random(23)
    for _ in range(10):
        m = rational_matrix(rng, 6, 6)
        rank, _ = rank_kernel(m)
        sv = np.linalg.svd(m.to_complex(), compute_uv=False)
        assert rank == int(np.sum(sv > 1e-9))


def test_rank_equals_transpose_rank_and_kernel_annihilates():
    rng = random.Random(5)
    for _ in range(50):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        m = ExactMatrix(
            rows,
            cols,
            {
                (i, j): Fraction(rng.randint(-3, 3), rng.randint(1, 2))
                for i in range(rows)
                for j in range(cols)
                if rng.random() < 0.7
            },
        )
        rank, kernel = rank_kernel(m)
        rank_t, _ = rank_kernel(m.transpose())
        assert rank == rank_t
        assert rank + len(kernel) == cols
        for vec in kernel:
            assert all(x.is_zero() for x in apply_matrix(m, vec))


def test_single_grade_entries_allowed_mixed_rejected():
    tpi = GradedScalar.two_pi_i()
    m = ExactMatrix.from_rows([[tpi, GradedScalar.one()], [GradedScalar.one(), GradedScalar.one()]])
    rank, kernel = rank_kernel(m)
    assert rank == 2 and kernel == []
    bad = ExactMatrix.from_rows([[tpi + GradedScalar.one()]])
    with pytest.raises(GradeMismatch):
        rank_kernel(bad)


def test_matrix_arithmetic_and_inverse():
    rng = random.Random(3)
    m = rational_matrix(rng, 4, 4)
    while rank_kernel(m)[0] < 4:
        m = rational_matrix(rng, 4, 4)
    inv = m.inverse()
    assert m * inv == ExactMatrix.identity(4)
    assert inv * m == ExactMatrix.identity(4)
    with pytest.raises(NotInvertible):
        ExactMatrix.from_rows([[1, 2], [2, 4]]).inverse()


def test_trace_and_transpose():
    m = ExactMatrix.from_rows([[1, 2], [3, 4]])
    assert m.trace() == GradedScalar.of(5)
    assert m.transpose().get(0, 1) == GradedScalar.of(3)


def test_sparse_rank_agrees_with_dense():
    rng = random.Random(17)
    for _ in range(25):
        rows = rng.randint(1, 7)
        cols = rng.randint(1, 7)
        m = ExactMatrix(
            rows,
            cols,
            {
                (i, j): Fraction(rng.randint(-2, 2))
                for i in range(rows)
                for j in range(cols)
                if rng.random() < 0.4
            },
        )
        dense_rank, _ = rank_kernel(m)
        columns = []
        for j in range(cols):
            col = {}
            for i in range(rows):
                v = m.get(i, j)
                if not v.is_zero():
                    col[i] = v.require_grade_zero()
            columns.append(col)
        assert sparse_rank(columns) == dense_rank
