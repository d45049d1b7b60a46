"""
Minimum-cost bipartite assignment (Kuhn-Munkres) over rectangular cost matrices.

The optimum comes from scipy's shortest augmenting path implementation of the
Hungarian method. Ties are then settled on the zero reduced cost edges, so
the lowest rows are matched first, each to its lowest column, and a given
matrix always yields the same pairs.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from motionoracle.exception import CostMatrixError


logger = logging.getLogger(__name__)


def as_cost_matrix(cost):
    """
    Validates and converts a cost matrix.

    :type cost: numpy.ndarray | Sequence[Sequence[float]]
    :rtype: numpy.ndarray
    :raise CostMatrixError: if the matrix is not 2-D or holds a negative or non-finite entry
    """
    matrix = np.asarray(cost, dtype=np.float64)
    if matrix.ndim == 1 and matrix.size == 0:
        matrix = matrix.reshape(0, 0)
    if matrix.ndim != 2:
        raise CostMatrixError("cost matrix must be 2-D, got shape {}".format(matrix.shape))
    if matrix.size and not np.all(np.isfinite(matrix)):
        raise CostMatrixError("cost matrix holds a non-finite entry")
    if matrix.size and np.any(matrix < 0):
        raise CostMatrixError("cost matrix holds a negative entry")
    return matrix


@dataclass(frozen=True)
class AssignmentResult:
    pairs: Tuple[Tuple[int, int], ...]
    total_cost: float

    @property
    def rows(self):
        return [r for r, _ in self.pairs]

    @property
    def cols(self):
        return [c for _, c in self.pairs]

    def col_for_row(self):
        """
        :rtype: dict[int, int]
        """
        return dict(self.pairs)

    def unmatched_cols(self, n_cols):
        matched = set(self.cols)
        return [c for c in range(n_cols) if c not in matched]

    def unmatched_rows(self, n_rows):
        matched = set(self.rows)
        return [r for r in range(n_rows) if r not in matched]


EMPTY_ASSIGNMENT = AssignmentResult(pairs=(), total_cost=0.0)

# reduced costs up to this fraction of the largest entry count as zero
_TIGHT_TOLERANCE = 1e-10


def _dual_potentials(square, col_of_row):
    """
    Optimal dual of the assignment LP for a known optimal matching.

    The column potentials are shortest path distances over the edges
    col_of_row[r] -> c weighted cost[r, c] - cost[r, col_of_row[r]].

    :type square: numpy.ndarray
    :type col_of_row: numpy.ndarray
    :rtype: tuple[numpy.ndarray, numpy.ndarray]
    :return: row and column potentials
    """
    matched = square[np.arange(len(col_of_row)), col_of_row]
    slack = square - matched[:, None]
    col_pot = np.zeros(square.shape[1])
    for _ in range(square.shape[0] + 1):
        relaxed = np.minimum(col_pot, (col_pot[col_of_row][:, None] + slack).min(axis=0))
        if np.array_equal(relaxed, col_pot):
            break
        col_pot = relaxed
    return matched - col_pot[col_of_row], col_pot


def _alternating_path(tight, row_of_col, first_free, start, target):
    """
    Breadth first search over tight edges from row `start` to column `target`,
    moving through columns held by rows >= first_free only.

    :return: the (row, new column) moves of the path, or None
    """
    parent = {start: None}
    queue = deque([start])
    while queue:
        row = queue.popleft()
        for col in np.flatnonzero(tight[row]):
            col = int(col)
            if col == target:
                moves = [(row, col)]
                while parent[row] is not None:
                    row, col = parent[row]
                    moves.append((row, col))
                return moves
            owner = int(row_of_col[col])
            if owner >= first_free and owner not in parent:
                parent[owner] = (row, col)
                queue.append(owner)
    return None


def _lowest_index_optimum(square, col_of_row, n_rows, n_cols):
    """
    Moves an optimal matching of the padded square matrix to the optimal
    matching whose (row, col) pairs sort lowest.

    Every optimal matching only uses edges of zero reduced cost under an
    optimal dual, so rows are fixed in order to their lowest column that
    still admits a perfect matching of those edges. Columns >= n_cols are
    padding and mean the row stays unmatched.
    """
    row_pot, col_pot = _dual_potentials(square, col_of_row)
    scale = max(1.0, float(square.max()))
    tight = square - row_pot[:, None] - col_pot[None, :] <= _TIGHT_TOLERANCE * scale
    col_of_row = col_of_row.copy()
    row_of_col = np.empty_like(col_of_row)
    row_of_col[col_of_row] = np.arange(len(col_of_row))

    for r in range(n_rows):
        current = int(col_of_row[r])
        for c in np.flatnonzero(tight[r, :current]):
            c = int(c)
            if c >= n_cols:
                break
            start = int(row_of_col[c])
            if start < r:
                continue
            path = _alternating_path(tight, row_of_col, r + 1, start, current)
            if path is None:
                continue
            for row, col in path + [(r, c)]:
                col_of_row[row] = col
                row_of_col[col] = row
            break
    return col_of_row


def solve_assignment(cost):
    """
    Finds the matching of min(n, m) pairs with the least total cost.

    Among equally cheap matchings the one whose sorted pairs come first is
    returned: the lowest rows are matched, each to its lowest column.

    :type cost: numpy.ndarray | Sequence[Sequence[float]]
    :rtype: AssignmentResult

    :param cost: n x m matrix of non-negative finite costs
    :return: the selected (row, col) pairs ordered by row and their summed cost
    """
    matrix = as_cost_matrix(cost)
    n, m = matrix.shape
    if n == 0 or m == 0:
        return EMPTY_ASSIGNMENT

    size = max(n, m)
    square = np.zeros((size, size), dtype=np.float64)
    square[:n, :m] = matrix
    _, col_of_row = linear_sum_assignment(square)
    col_of_row = _lowest_index_optimum(square, col_of_row.astype(np.intp), n, m)

    pairs = tuple((r, int(col_of_row[r])) for r in range(n) if col_of_row[r] < m)
    total_cost = math.fsum(matrix[r, c] for r, c in pairs)
    logger.debug("Solved {n}x{m} assignment, cost {cost}".format(n=n, m=m, cost=total_cost))
    return AssignmentResult(pairs=pairs, total_cost=total_cost)
