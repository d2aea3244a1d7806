import numpy as np
import pytest

from sinereg import (
    DenseOperator,
    DiagonalOperator,
    DimensionError,
    InnerProductSpace,
    MatrixFreeOperator,
    NumericalError,
    build_shift_solver,
    resolvent_apply,
)


def make_ops(rows, cols, seed, weighted=False):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((rows, cols))
    if weighted:
        dom = InnerProductSpace(cols, weights=rng.uniform(0.2, 2.0, cols))
        ran = InnerProductSpace(rows, weights=rng.uniform(0.2, 2.0, rows))
    else:
        dom, ran = InnerProductSpace(cols), InnerProductSpace(rows)
    dense = DenseOperator(a, domain=dom, codomain=ran)
    free = MatrixFreeOperator(dom, ran, dense.apply, dense.apply_adjoint)
    return dense, free


def test_diagonal_componentwise_division():
    op = DiagonalOperator(np.array([2.0]))
    solver = build_shift_solver(op, gamma=1.0)
    assert solver.strategy == "diagonal"
    assert resolvent_apply(solver, np.array([5.0])) == pytest.approx([1.0])


def test_zero_vector_maps_to_zero():
    op = DiagonalOperator(np.array([1.0, 2.0, 3.0]))
    solver = build_shift_solver(op, gamma=0.5)
    assert np.array_equal(solver.apply(np.zeros(3)), np.zeros(3))


def test_large_gamma_neumann_limit():
    rng = np.random.default_rng(4)
    op = DenseOperator(rng.standard_normal((20, 15)) / 4.0)
    solver = build_shift_solver(op, gamma=1e12)
    v = rng.standard_normal(15)
    dev = np.linalg.norm(solver.apply(v) - v) / np.linalg.norm(v)
    assert dev <= 1e-10


def test_dense_residual_tolerance():
    dense, _ = make_ops(30, 20, 7)
    solver = build_shift_solver(dense, gamma=1.0)
    rng = np.random.default_rng(8)
    for _ in range(5):
        v = rng.standard_normal(20)
        res = np.linalg.norm(solver.shifted_apply(solver.apply(v)) - v)
        assert res <= 1e-12 * np.linalg.norm(v)


def test_matches_explicit_inverse():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((10, 10))
    op = DenseOperator(a)
    gamma = 0.7
    solver = build_shift_solver(op, gamma)
    explicit = np.linalg.inv(np.eye(10) + a.T @ a / gamma)
    v = rng.standard_normal(10)
    assert np.linalg.norm(solver.apply(v) - explicit @ v) <= 1e-12 * np.linalg.norm(v)


@pytest.mark.parametrize("weighted", [False, True])
def test_residual_invariant_all_backends(weighted):
    dense, free = make_ops(25, 18, 12, weighted=weighted)
    diag_space = InnerProductSpace(18, weights=np.random.default_rng(1).uniform(0.5, 1.5, 18)) if weighted else InnerProductSpace(18)
    diag = DiagonalOperator(np.random.default_rng(2).uniform(-1, 1, 18), diag_space)
    rng = np.random.default_rng(13)
    for op in (dense, free, diag):
        solver = build_shift_solver(op, gamma=0.3)
        for _ in range(3):
            v = rng.standard_normal(op.domain_dim)
            res = op.domain.norm(solver.shifted_apply(solver.apply(v)) - v)
            assert res <= 1e-12 * op.domain.norm(v)


def test_resolvent_is_positive_definite():
    dense, _ = make_ops(15, 12, 20)
    solver = build_shift_solver(dense, gamma=2.0)
    rng = np.random.default_rng(21)
    for _ in range(10):
        v = rng.standard_normal(12)
        assert dense.domain.inner(solver.apply(v), v) > 0


def test_matrix_free_uses_inner_cg():
    _, free = make_ops(20, 14, 22)
    solver = build_shift_solver(free, gamma=1.0)
    assert solver.strategy == "cg"
    rng = np.random.default_rng(23)
    v = rng.standard_normal(14)
    res = free.domain.norm(solver.shifted_apply(solver.apply(v)) - v)
    assert res <= 1e-12 * free.domain.norm(v)


def test_matrix_free_nonconvergence_reports_residual():
    _, free = make_ops(20, 14, 24)
    solver = build_shift_solver(free, gamma=1e-4, max_iter=2)
    v = np.random.default_rng(25).standard_normal(14)
    with pytest.raises(NumericalError, match="achieved residual"):
        solver.apply(v)


def test_gamma_validation():
    op = DiagonalOperator(np.ones(3))
    with pytest.raises(ValueError):
        build_shift_solver(op, gamma=0.0)
    with pytest.raises(ValueError):
        build_shift_solver(op, gamma=-1.0)


def test_resolvent_apply_type_check():
    with pytest.raises(DimensionError):
        resolvent_apply(object(), np.ones(2))


def test_weighted_diagonal_resolvent_matches_formula():
    n = 16
    space = InnerProductSpace(n, weights=np.full(n, 1.0 / n))
    d = (np.arange(1, n + 1) - 0.5) / n
    op = DiagonalOperator(d, space)
    gamma = 1e-3
    solver = build_shift_solver(op, gamma)
    v = np.random.default_rng(3).standard_normal(n)
    assert solver.apply(v) == pytest.approx(v / (1 + d * d / gamma), rel=1e-14)
