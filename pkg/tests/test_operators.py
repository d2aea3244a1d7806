import numpy as np
import pytest

from sinereg import (
    DataFormatError,
    DenseOperator,
    DiagonalOperator,
    DimensionError,
    InnerProductSpace,
    MatrixFreeOperator,
    load_dense_operator,
    load_diagonal_operator,
    norm_estimate,
    save_dense_operator,
)

from oracles import dense_matrix_of


def random_backends(rows, cols, seed, weighted=False):
    """One operator of each backend with the same underlying matrix."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((rows, cols))
    if weighted:
        dom = InnerProductSpace(cols, weights=rng.uniform(0.2, 2.0, cols))
        ran = InnerProductSpace(rows, weights=rng.uniform(0.2, 2.0, rows))
    else:
        dom = InnerProductSpace(cols)
        ran = InnerProductSpace(rows)
    dense = DenseOperator(a, domain=dom, codomain=ran)
    free = MatrixFreeOperator(dom, ran, dense.apply, dense.apply_adjoint)
    return [dense, free]


class TestApply:
    def test_diagonal_action(self):
        op = DiagonalOperator(np.array([1.0, 2.0, 3.0]))
        assert np.array_equal(op.apply(np.ones(3)), np.array([1.0, 2.0, 3.0]))

    def test_zero_matrix(self):
        op = DenseOperator(np.zeros((4, 3)))
        assert np.array_equal(op.apply(np.array([1.0, -2.0, 5.0])), np.zeros(4))

    def test_dense_hand_product(self):
        op = DenseOperator(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(op.apply(np.array([1.0, 0.0])), np.array([1.0, 3.0]))

    def test_dimension_mismatch(self):
        op = DenseOperator(np.ones((3, 2)))
        with pytest.raises(DimensionError):
            op.apply(np.ones(3))
        with pytest.raises(DimensionError):
            op.apply_adjoint(np.ones(2))


class TestAdjoint:
    def test_diagonal_self_adjoint(self):
        op = DiagonalOperator(np.array([2.0, -1.0, 0.5]),
                              InnerProductSpace(3, weights=np.array([0.1, 1.0, 3.0])))
        y = np.array([1.0, 2.0, 3.0])
        assert np.array_equal(op.apply_adjoint(y), op.apply(y))

    def test_dense_transpose_hand_value(self):
        op = DenseOperator(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.array_equal(op.apply_adjoint(np.array([1.0, 0.0])),
                              np.array([1.0, 2.0]))

    @pytest.mark.parametrize("weighted", [False, True])
    @pytest.mark.parametrize("seed", range(5))
    def test_adjoint_consistency_random_pairing(self, seed, weighted):
        for op in random_backends(50, 30, seed, weighted=weighted):
            rng = np.random.default_rng(seed + 999)
            nrm = op.norm_estimate()
            for _ in range(5):
                u = rng.standard_normal(op.domain_dim)
                v = rng.standard_normal(op.range_dim)
                lhs = op.codomain.inner(op.apply(u), v)
                rhs = op.domain.inner(u, op.apply_adjoint(v))
                bound = 1e-12 * op.domain.norm(u) * op.codomain.norm(v) * nrm
                assert abs(lhs - rhs) <= bound

    def test_adjoint_consistency_diagonal_weighted(self):
        rng = np.random.default_rng(3)
        d = rng.standard_normal(20)
        space = InnerProductSpace(20, weights=rng.uniform(0.5, 1.5, 20))
        op = DiagonalOperator(d, space)
        u, v = rng.standard_normal(20), rng.standard_normal(20)
        lhs = space.inner(op.apply(u), v)
        rhs = space.inner(u, op.apply_adjoint(v))
        assert abs(lhs - rhs) <= 1e-12 * space.norm(u) * space.norm(v) * op.norm_estimate()


class TestNormEstimate:
    def test_diagonal_spectral_norm(self):
        op = DiagonalOperator(np.array([1.0, 2.0, 3.0]))
        assert norm_estimate(op) == pytest.approx(3.0, abs=1e-6)

    def test_identity(self):
        op = DiagonalOperator(np.ones(7))
        assert norm_estimate(op) == pytest.approx(1.0, rel=1e-12)

    def test_zero_operator(self):
        op = DenseOperator(np.zeros((5, 5)))
        assert norm_estimate(op) == 0.0

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((40, 40))
        op = DenseOperator(a)
        top = np.linalg.svd(a, compute_uv=False)[0]
        assert norm_estimate(op) == pytest.approx(top, rel=0.01)

    def test_cached_on_operator(self):
        op = DiagonalOperator(np.array([1.0, 5.0]))
        assert op.norm_estimate() == op.norm_estimate()


class TestBackendsAgree:
    def test_matrix_free_matches_dense(self):
        for op_dense, op_free in [random_backends(12, 8, 21)]:
            x = np.random.default_rng(1).standard_normal(8)
            assert np.array_equal(op_dense.apply(x), op_free.apply(x))
            assert dense_matrix_of(op_free) == pytest.approx(op_dense.matrix)


class TestUnitWeightCoherence:
    def test_explicit_unit_weights_bitwise_equal_euclidean(self):
        rng = np.random.default_rng(17)
        a = rng.standard_normal((9, 6))
        plain = DenseOperator(a)
        explicit = DenseOperator(
            a,
            domain=InnerProductSpace(6, weights=np.ones(6)),
            codomain=InnerProductSpace(9, weights=np.ones(9)),
        )
        x = rng.standard_normal(6)
        y = rng.standard_normal(9)
        assert np.array_equal(plain.apply(x), explicit.apply(x))
        assert np.array_equal(plain.apply_adjoint(y), explicit.apply_adjoint(y))
        assert np.array_equal(plain.apply_adjoint(y), a.T @ y)

    def test_whole_run_bitwise_equal(self):
        from sinereg import Problem, StoppingRule, run_sine

        rng = np.random.default_rng(18)
        a = rng.standard_normal((12, 8))
        y = rng.standard_normal(12)
        rule = StoppingRule(tau=1.1, delta=1e-3, max_iters=6)
        p_plain = Problem(operator=DenseOperator(a), y_delta=y, delta=1e-3)
        p_unit = Problem(
            operator=DenseOperator(
                a,
                domain=InnerProductSpace(8, weights=np.ones(8)),
                codomain=InnerProductSpace(12, weights=np.ones(12)),
            ),
            y_delta=y,
            delta=1e-3,
        )
        rep_plain = run_sine(p_plain, 1.0, rule)
        rep_unit = run_sine(p_unit, 1.0, rule)
        assert np.array_equal(rep_plain.iterate, rep_unit.iterate)
        assert rep_plain.residual_history == rep_unit.residual_history


class TestConstructionValidation:
    def test_dense_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            DenseOperator(np.array([[1.0, np.nan]]))

    def test_diagonal_rejects_matrix(self):
        with pytest.raises(DimensionError):
            DiagonalOperator(np.ones((2, 2)))

    def test_space_shape_mismatch(self):
        with pytest.raises(DimensionError):
            DenseOperator(np.ones((3, 2)), domain=InnerProductSpace(3))


class TestLoaders:
    def test_mtx_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((7, 4))
        path = tmp_path / "op.mtx"
        save_dense_operator(a, path)
        op = load_dense_operator(path)
        assert np.array_equal(op.matrix, a)

    def test_csv_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((5, 5))
        path = tmp_path / "op.csv"
        save_dense_operator(a, path)
        op = load_dense_operator(path)
        assert np.array_equal(op.matrix, a)

    def test_diagonal_from_one_column_csv(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.5\n-2.0\n0.25\n")
        op = load_diagonal_operator(path)
        assert np.array_equal(op.diagonal, np.array([1.5, -2.0, 0.25]))
        assert op.domain_dim == op.range_dim == 3

    def test_diagonal_rejects_two_columns(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n")
        with pytest.raises(DataFormatError):
            load_diagonal_operator(path)

    def test_rejects_nonfinite_entries(self, tmp_path):
        path = tmp_path / "op.csv"
        path.write_text("1.0,2.0\nnan,4.0\n")
        with pytest.raises(DataFormatError):
            load_dense_operator(path)

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "op.csv"
        path.write_text("not,numbers\nat,all\n")
        with pytest.raises(DataFormatError):
            load_dense_operator(path)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_dense_operator(tmp_path / "nope.csv")
