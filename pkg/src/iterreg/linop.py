"""Linear operators: dense matrices, entry masks, 2-D forward differences, block stacks.

Operators map flat float vectors to flat float vectors. A matrix variable over a
p1 x p2 grid is identified with a vector of length p1*p2 in row-major order, so
matrix-valued problems reuse the vector machinery unchanged. Operators are
immutable after construction; ``apply`` and ``adjoint`` are pure and safe to
share across concurrent runs.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

__all__ = [
    "LinearOperator",
    "DenseOperator",
    "MaskOperator",
    "Grad2D",
    "StackedOperator",
    "identity",
    "stack",
    "op_norm",
    "dense_from_csv",
    "mask_from_csv",
]


def as_vector(x, dim, what="vector"):
    """Coerce to a float vector of the given length, else raise ContractViolation."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] != dim:
        raise ContractViolation(f"{what}: expected length {dim}, got shape {v.shape}")
    return v


class LinearOperator:
    """Base class; subclasses provide ``_apply`` and ``_adjoint``.

    Attributes
    ----------
    kind : str
        One of ``dense``, ``mask``, ``grad2d``, ``stacked``.
    in_dim, out_dim : int
        Domain and codomain dimensions (p and n).
    """

    kind = "abstract"

    def __init__(self, in_dim, out_dim):
        in_dim, out_dim = int(in_dim), int(out_dim)
        if in_dim <= 0 or out_dim <= 0:
            raise ContractViolation(f"operator dims must be positive, got {in_dim}x{out_dim}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self._norm_cache = None

    def apply(self, w):
        """Forward map X w."""
        return self._apply(as_vector(w, self.in_dim, f"{self.kind}.apply"))

    def adjoint(self, theta):
        """Adjoint map X^T theta."""
        return self._adjoint(as_vector(theta, self.out_dim, f"{self.kind}.adjoint"))

    def norm_est(self):
        """Cached spectral-norm estimate (power iteration with default settings)."""
        if self._norm_cache is None:
            self._norm_cache = op_norm(self)
        return self._norm_cache

    def as_matrix(self):
        """Dense out_dim x in_dim materialization, built column by column."""
        cols = np.empty((self.out_dim, self.in_dim))
        e = np.zeros(self.in_dim)
        for j in range(self.in_dim):
            e[j] = 1.0
            cols[:, j] = self._apply(e)
            e[j] = 0.0
        return cols

    def _apply(self, w):
        raise NotImplementedError

    def _adjoint(self, theta):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.out_dim}x{self.in_dim}>"


class DenseOperator(LinearOperator):
    """Explicit matrix, stored row-major with rows indexing the output."""

    kind = "dense"

    def __init__(self, matrix):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2:
            raise ContractViolation(f"dense operator needs a 2-D array, got ndim={a.ndim}")
        a.setflags(write=False)
        self.matrix = a
        super().__init__(a.shape[1], a.shape[0])

    def _apply(self, w):
        return self.matrix @ w

    def _adjoint(self, theta):
        return self.matrix.T @ theta

    def as_matrix(self):
        return self.matrix.copy()


def identity(dim):
    """Identity operator on R^dim."""
    return DenseOperator(np.eye(int(dim)))


class MaskOperator(LinearOperator):
    """Keep the observed entries of a p1 x p2 grid, zero out the rest.

    Self-adjoint and idempotent: it is the orthogonal projection onto the
    coordinates listed in ``observed``.
    """

    kind = "mask"

    def __init__(self, grid_shape, observed):
        p1, p2 = (int(grid_shape[0]), int(grid_shape[1]))
        if p1 <= 0 or p2 <= 0:
            raise ContractViolation(f"mask grid must be positive, got {grid_shape}")
        pairs = []
        for i, j in observed:
            i, j = int(i), int(j)
            if not (0 <= i < p1 and 0 <= j < p2):
                raise ContractViolation(f"mask index ({i},{j}) outside {p1}x{p2} grid")
            pairs.append((i, j))
        self.grid_shape = (p1, p2)
        self.observed = tuple(sorted(set(pairs)))
        gain = np.zeros(p1 * p2)
        for i, j in self.observed:
            gain[i * p2 + j] = 1.0
        gain.setflags(write=False)
        self.gain = gain
        super().__init__(p1 * p2, p1 * p2)

    def _apply(self, w):
        return w * self.gain

    def _adjoint(self, theta):
        return theta * self.gain

    def as_matrix(self):
        return np.diag(self.gain)


class Grad2D(LinearOperator):
    """Forward-difference gradient on a p1 x p2 grid, replicate boundary.

    Output stacks the row-direction differences then the column-direction
    ones, each of size p1*p2; the difference at the last row/column is zero.
    """

    kind = "grad2d"

    def __init__(self, p1, p2):
        self.p1, self.p2 = int(p1), int(p2)
        super().__init__(self.p1 * self.p2, 2 * self.p1 * self.p2)

    def _apply(self, w):
        W = w.reshape(self.p1, self.p2)
        dr = np.zeros_like(W)
        dr[:-1, :] = W[1:, :] - W[:-1, :]
        dc = np.zeros_like(W)
        dc[:, :-1] = W[:, 1:] - W[:, :-1]
        return np.concatenate([dr.ravel(), dc.ravel()])

    def _adjoint(self, theta):
        m = self.p1 * self.p2
        a = theta[:m].reshape(self.p1, self.p2)
        b = theta[m:].reshape(self.p1, self.p2)
        out = np.zeros((self.p1, self.p2))
        out[1:, :] += a[:-1, :]
        out[:-1, :] -= a[:-1, :]
        out[:, 1:] += b[:, :-1]
        out[:, :-1] -= b[:, :-1]
        return out.ravel()


class StackedOperator(LinearOperator):
    """Block matrix of child operators; ``None`` entries are zero blocks."""

    kind = "stacked"

    def __init__(self, blocks):
        rows = [tuple(row) for row in blocks]
        if not rows or any(len(row) == 0 for row in rows):
            raise ContractViolation("stacked operator needs a non-empty grid of blocks")
        ncols = len(rows[0])
        if any(len(row) != ncols for row in rows):
            raise ContractViolation("stacked operator rows must have equal length")

        col_dims = [None] * ncols
        row_dims = [None] * len(rows)
        for i, row in enumerate(rows):
            for j, blk in enumerate(row):
                if blk is None:
                    continue
                if not isinstance(blk, LinearOperator):
                    raise ContractViolation(f"block ({i},{j}) is not a LinearOperator")
                if col_dims[j] is None:
                    col_dims[j] = blk.in_dim
                elif col_dims[j] != blk.in_dim:
                    raise ContractViolation(f"column {j} mixes in_dims {col_dims[j]} and {blk.in_dim}")
                if row_dims[i] is None:
                    row_dims[i] = blk.out_dim
                elif row_dims[i] != blk.out_dim:
                    raise ContractViolation(f"row {i} mixes out_dims {row_dims[i]} and {blk.out_dim}")
        if any(d is None for d in col_dims):
            raise ContractViolation("a block column contains only zero blocks; width is ambiguous")
        if any(d is None for d in row_dims):
            raise ContractViolation("a block row contains only zero blocks; height is ambiguous")

        self.blocks = tuple(rows)
        self.col_dims = tuple(col_dims)
        self.row_dims = tuple(row_dims)
        self._col_off = np.concatenate([[0], np.cumsum(col_dims)])
        self._row_off = np.concatenate([[0], np.cumsum(row_dims)])
        super().__init__(int(self._col_off[-1]), int(self._row_off[-1]))

    def children(self):
        return [blk for row in self.blocks for blk in row if blk is not None]

    def _apply(self, w):
        out = np.zeros(self.out_dim)
        for i, row in enumerate(self.blocks):
            r0, r1 = self._row_off[i], self._row_off[i + 1]
            for j, blk in enumerate(row):
                if blk is None:
                    continue
                out[r0:r1] += blk._apply(w[self._col_off[j]:self._col_off[j + 1]])
        return out

    def _adjoint(self, theta):
        out = np.zeros(self.in_dim)
        for i, row in enumerate(self.blocks):
            r0, r1 = self._row_off[i], self._row_off[i + 1]
            for j, blk in enumerate(row):
                if blk is None:
                    continue
                out[self._col_off[j]:self._col_off[j + 1]] += blk._adjoint(theta[r0:r1])
        return out


def stack(blocks):
    """Build a block operator from a list of rows, each a list of operators/None."""
    return StackedOperator(blocks)


def op_norm(op, tol=1e-6, max_iter=1000, seed=0):
    """Estimate the spectral norm of ``op`` by power iteration on X^T X.

    The estimate approaches the true norm from below; consumers that need a
    safe upper bound multiply by 1.01 before use. A zero operator yields 0.
    """
    if tol <= 0:
        raise ContractViolation(f"op_norm tol must be positive, got {tol}")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.in_dim)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(int(max_iter)):
        xv = op._apply(v)
        new_est = float(np.linalg.norm(xv))
        if new_est == 0.0:
            return 0.0
        v = op._adjoint(xv)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return new_est
        v /= nv
        if abs(new_est - est) <= tol * new_est:
            return new_est
        est = new_est
    return est


def dense_from_csv(path):
    """Load a dense operator from CSV; rows index the output dimension."""
    a = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    return DenseOperator(a)


def mask_from_csv(path, p1, p2):
    """Load a mask operator from a CSV of (i, j) observed index pairs."""
    raw = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
    if raw.size == 0:
        pairs = []
    else:
        if raw.shape[1] != 2:
            raise ContractViolation(f"mask CSV must have two columns, got {raw.shape[1]}")
        pairs = [(int(i), int(j)) for i, j in raw]
    return MaskOperator((p1, p2), pairs)
