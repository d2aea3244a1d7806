"""Linear operators between weighted inner-product spaces.

Three backends cover the use cases of the solvers: a dense matrix, a
diagonal (multiplication) operator, and a matrix-free pair of callables.
Every backend provides ``apply`` (forward) and ``apply_adjoint``, where the
adjoint is taken with respect to the weighted inner products of the domain
and range spaces, so that <T u, v>_range = <u, T* v>_domain holds in exact
arithmetic.

Operators are immutable after construction and safe to share across
threads for read-only application.
"""

import numpy as np
import scipy.io

from .exceptions import DataFormatError, DimensionError
from .spaces import InnerProductSpace

__all__ = [
    "LinearOperator",
    "DenseOperator",
    "DiagonalOperator",
    "MatrixFreeOperator",
    "norm_estimate",
    "load_dense_operator",
    "load_diagonal_operator",
    "save_dense_operator",
]

_NORM_SEED = 20210828  # fixed start vector for reproducible norm estimates


class LinearOperator:
    """Base class: a linear map between two inner-product spaces.

    Parameters
    ----------
    domain : InnerProductSpace
        Space the operator maps from.
    codomain : InnerProductSpace
        Space the operator maps into.
    """

    def __init__(self, domain, codomain):
        self.domain = domain
        self.codomain = codomain
        self._norm_estimate = None

    @property
    def domain_dim(self):
        return self.domain.dim

    @property
    def range_dim(self):
        return self.codomain.dim

    def apply(self, x):
        """Forward application T x."""
        raise NotImplementedError

    def apply_adjoint(self, y):
        """Adjoint application T* y (weighted adjoint)."""
        raise NotImplementedError

    def normal_apply(self, x):
        """T* T x, the normal-equation operator."""
        return self.apply_adjoint(self.apply(x))

    def norm_estimate(self):
        """Cached operator-norm estimate, see :func:`norm_estimate`."""
        if self._norm_estimate is None:
            self._norm_estimate = norm_estimate(self)
        return self._norm_estimate

    def __repr__(self):
        return (
            f"{type(self).__name__}({self.range_dim}x{self.domain_dim})"
        )


class DenseOperator(LinearOperator):
    """Operator backed by a dense (range_dim x domain_dim) matrix.

    Under weighted spaces the adjoint is W_domain^{-1} A^T W_range, which
    keeps <T u, v>_range = <u, T* v>_domain exact up to rounding.
    """

    def __init__(self, matrix, domain=None, codomain=None):
        a = np.array(matrix, dtype=float)  # own copy; frozen below
        if a.ndim != 2:
            raise DimensionError(f"matrix must be 2-d, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        rows, cols = a.shape
        domain = domain if domain is not None else InnerProductSpace(cols)
        codomain = codomain if codomain is not None else InnerProductSpace(rows)
        if domain.dim != cols or codomain.dim != rows:
            raise DimensionError(
                f"matrix shape {a.shape} inconsistent with spaces "
                f"({codomain.dim}, {domain.dim})"
            )
        super().__init__(domain, codomain)
        self.matrix = a
        self.matrix.setflags(write=False)

    def apply(self, x):
        x = self.domain.check_vector(x, "input")
        return self.matrix @ x

    def apply_adjoint(self, y):
        y = self.codomain.check_vector(y, "input")
        if self.domain.is_unit and self.codomain.is_unit:
            return self.matrix.T @ y
        z = self.matrix.T @ (self.codomain.weights * y)
        return z / self.domain.weights


class DiagonalOperator(LinearOperator):
    """Square multiplication operator x -> d * x on a single space.

    Diagonal matrices commute with the (diagonal) weight matrix, so the
    weighted adjoint coincides with the forward map: the operator is
    self-adjoint in any weighted product on its space.
    """

    def __init__(self, diagonal, space=None):
        d = np.array(diagonal, dtype=float)  # own copy; frozen below
        if d.ndim != 1:
            raise DimensionError(f"diagonal must be 1-d, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("diagonal entries must be finite")
        space = space if space is not None else InnerProductSpace(d.size)
        if space.dim != d.size:
            raise DimensionError(
                f"diagonal length {d.size} does not match space dim {space.dim}"
            )
        super().__init__(space, space)
        self.diagonal = d
        self.diagonal.setflags(write=False)

    def apply(self, x):
        x = self.domain.check_vector(x, "input")
        return self.diagonal * x

    def apply_adjoint(self, y):
        return self.apply(y)


class MatrixFreeOperator(LinearOperator):
    """Operator defined by caller-supplied forward/adjoint callables.

    The caller is responsible for supplying an adjoint consistent with the
    weighted inner products of the given spaces; the adjoint-consistency
    test in the suite is the contract check.
    """

    def __init__(self, domain, codomain, forward, adjoint):
        super().__init__(domain, codomain)
        self._forward = forward
        self._adjoint = adjoint

    def apply(self, x):
        x = self.domain.check_vector(x, "input")
        y = np.asarray(self._forward(x), dtype=float)
        return self.codomain.check_vector(y, "forward output")

    def apply_adjoint(self, y):
        y = self.codomain.check_vector(y, "input")
        x = np.asarray(self._adjoint(y), dtype=float)
        return self.domain.check_vector(x, "adjoint output")


def norm_estimate(op, iters=50, rtol=1e-6, seed=_NORM_SEED):
    """Estimate the operator norm ||T|| by power iteration on T*T.

    Runs at most ``iters`` iterations, stopping early when the Rayleigh
    quotient changes by less than ``rtol`` relatively. The start vector is
    drawn from a fixed seed so that tolerance scaling derived from the
    estimate is reproducible. A zero operator returns 0.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.domain_dim)
    nv = op.domain.norm(v)
    if nv == 0:  # only possible for dim-0 edge cases, guarded anyway
        return 0.0
    v = v / nv
    lam = 0.0
    for k in range(iters):
        u = op.normal_apply(v)
        lam_new = op.domain.inner(u, v)
        nu = op.domain.norm(u)
        if nu == 0.0:
            return 0.0
        v = u / nu
        if k > 0 and abs(lam_new - lam) <= rtol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))


def _load_matrix(path):
    path = str(path)
    try:
        if path.endswith(".mtx") or path.endswith(".mtx.gz"):
            a = scipy.io.mmread(path)
            if hasattr(a, "toarray"):
                a = a.toarray()
            a = np.asarray(a, dtype=float)
        else:
            a = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except OSError:
        raise
    except Exception as exc:
        raise DataFormatError(f"{path}: cannot parse operator file: {exc}") from exc
    if not np.all(np.isfinite(a)):
        raise DataFormatError(f"{path}: operator contains non-finite entries")
    return a


def load_dense_operator(path, domain=None, codomain=None):
    """Load a dense operator from a Matrix Market (.mtx) or CSV file."""
    a = _load_matrix(path)
    try:
        return DenseOperator(a, domain=domain, codomain=codomain)
    except (DimensionError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def load_diagonal_operator(path, space=None):
    """Load a diagonal operator from a one-column CSV file."""
    a = _load_matrix(path)
    if a.ndim != 2 or a.shape[1] != 1:
        raise DataFormatError(
            f"{path}: diagonal operator file must have exactly one column, "
            f"got shape {a.shape}"
        )
    try:
        return DiagonalOperator(a[:, 0], space=space)
    except (DimensionError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def save_dense_operator(matrix, path):
    """Write a dense matrix to .mtx or CSV with full float64 precision."""
    a = np.asarray(matrix, dtype=float)
    path = str(path)
    if path.endswith(".mtx"):
        scipy.io.mmwrite(path, a, precision=17)
    else:
        np.savetxt(path, a, delimiter=",", fmt="%.17e")
