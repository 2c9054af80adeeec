"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Small LPs only: the alternating q-step and tests.  Deterministic: entering
variable is the lowest index with a negative reduced cost, the leaving row
breaks ratio ties toward the lowest basic variable index, so identical
inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .core import DimensionMismatch, NonFiniteData, NumericalFailure

_PIVOT_TOL = 1e-10
_FEAS_TOL = 1e-8


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpResult(NamedTuple):
    x: Optional[np.ndarray]
    objective: float
    status: LpStatus


@dataclass(frozen=True)
class LinearProgram:
    """min c.x subject to A_eq x = b_eq, A_ub x <= b_ub, x >= lower_bounds."""

    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lower_bounds: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise DimensionMismatch("objective must be a non-empty vector")
        object.__setattr__(self, "c", c)
        n = c.size
        for mat_name, vec_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            mat = getattr(self, mat_name)
            vec = getattr(self, vec_name)
            if (mat is None) != (vec is None):
                raise DimensionMismatch(f"{mat_name} and {vec_name} must be given together")
            if mat is not None:
                mat = np.atleast_2d(np.array(mat, dtype=float))
                vec = np.atleast_1d(np.array(vec, dtype=float))
                if mat.shape != (vec.size, n):
                    raise DimensionMismatch(
                        f"{mat_name} shape {mat.shape} incompatible with "
                        f"{vec_name} length {vec.size} and {n} variables"
                    )
                object.__setattr__(self, mat_name, mat)
                object.__setattr__(self, vec_name, vec)
        lb = self.lower_bounds
        if lb is not None:
            lb = np.array(lb, dtype=float)
            if lb.shape != (n,):
                raise DimensionMismatch("lower_bounds length must match variables")
            object.__setattr__(self, "lower_bounds", lb)
        for arr in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq, self.lower_bounds):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise NonFiniteData("linear program contains NaN or Inf")


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and abs(tab[r, col]) > 0.0:
            tab[r] -= tab[r, col] * tab[row]
    basis[row] = col


def _simplex(tab: np.ndarray, basis: np.ndarray, n_cols: int) -> LpStatus:
    """Run Bland-rule pivots on a tableau whose last row is the (priced-out)
    objective and last column the rhs.  Returns OPTIMAL or UNBOUNDED."""
    m = tab.shape[0] - 1
    max_pivots = 10_000 + 50 * (m + n_cols)
    for _ in range(max_pivots):
        obj = tab[-1, :n_cols]
        entering = -1
        for j in range(n_cols):
            if obj[j] < -_PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return LpStatus.OPTIMAL
        best_ratio = None
        leave_row = -1
        for i in range(m):
            a = tab[i, entering]
            if a > _PIVOT_TOL:
                ratio = tab[i, -1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio - _PIVOT_TOL
                    or (abs(ratio - best_ratio) <= _PIVOT_TOL and basis[i] < basis[leave_row])
                ):
                    best_ratio = ratio
                    leave_row = i
        if leave_row < 0:
            return LpStatus.UNBOUNDED
        _pivot(tab, basis, leave_row, entering)
    raise NumericalFailure("simplex exceeded the pivot budget")


def solve_lp(lp: LinearProgram) -> LpResult:
    """Solve the linear program.

    Returns
    -------
    LpResult
        ``x`` and ``objective`` on OPTIMAL status (feasible within 1e-8 and
        optimal within 1e-8 of the true value); ``x`` is None and the
        objective NaN for INFEASIBLE / UNBOUNDED.
    """
    n = lp.c.size
    lb = lp.lower_bounds if lp.lower_bounds is not None else np.zeros(n)

    # shift to x' = x - lb >= 0
    rows = []
    rhs = []
    n_eq = 0
    if lp.A_eq is not None:
        for a, b in zip(lp.A_eq, lp.b_eq):
            rows.append(a.copy())
            rhs.append(b - float(a @ lb))
            n_eq += 1
    n_ub = 0
    if lp.A_ub is not None:
        for a, b in zip(lp.A_ub, lp.b_ub):
            rows.append(a.copy())
            rhs.append(b - float(a @ lb))
            n_ub += 1
    m = len(rows)
    if m == 0:
        # only bounds: minimum at x' = 0 when c >= 0, else unbounded
        if np.any(lp.c < -_PIVOT_TOL):
            return LpResult(x=None, objective=float("nan"), status=LpStatus.UNBOUNDED)
        x = lb.copy()
        return LpResult(x=x, objective=float(lp.c @ x), status=LpStatus.OPTIMAL)

    A = np.zeros((m, n + n_ub))
    b = np.asarray(rhs, dtype=float)
    for i, row in enumerate(rows):
        A[i, :n] = row
        if i >= n_eq:
            A[i, n + (i - n_eq)] = 1.0  # slack for the <= row

    # orient rows so rhs >= 0 (flips slack signs too)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] = -b[i]

    n_struct = n + n_ub
    # initial basis: slack where it survived the sign flip, artificial otherwise
    art_cols = []
    basis = np.full(m, -1, dtype=int)
    for i in range(m):
        if i >= n_eq:
            scol = n + (i - n_eq)
            if A[i, scol] > 0.5:
                basis[i] = scol
    for i in range(m):
        if basis[i] < 0:
            art_cols.append(i)
    n_art = len(art_cols)
    total = n_struct + n_art
    tab = np.zeros((m + 1, total + 1))
    tab[:m, :n_struct] = A
    tab[:m, -1] = b
    for k, i in enumerate(art_cols):
        tab[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    if n_art:
        # phase 1: minimize the sum of artificials, priced out over the basis
        tab[-1, n_struct : n_struct + n_art] = 1.0
        for i in range(m):
            if basis[i] >= n_struct:
                tab[-1] -= tab[i]
        status = _simplex(tab, basis, total)
        if status is not LpStatus.OPTIMAL or tab[-1, -1] < -_FEAS_TOL:
            return LpResult(x=None, objective=float("nan"), status=LpStatus.INFEASIBLE)
        # drive any lingering artificial out of the basis, or drop its row
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_struct:
                piv = -1
                for j in range(n_struct):
                    if abs(tab[i, j]) > _PIVOT_TOL:
                        piv = j
                        break
                if piv >= 0:
                    _pivot(tab, basis, i, piv)
                else:
                    keep[i] = False  # redundant constraint row
        if not np.all(keep):
            tab = np.vstack([tab[:m][keep], tab[-1][None, :]])
            basis = basis[keep]
            m = int(keep.sum())
        tab = np.hstack([tab[:, :n_struct], tab[:, -1:]])

    # phase 2: price out the real objective over the current basis
    tab[-1, :] = 0.0
    tab[-1, :n] = lp.c
    for i in range(m):
        if tab[-1, basis[i]] != 0.0:
            tab[-1] -= tab[-1, basis[i]] * tab[i]
    status = _simplex(tab, basis, n_struct)
    if status is LpStatus.UNBOUNDED:
        return LpResult(x=None, objective=float("nan"), status=LpStatus.UNBOUNDED)

    x_std = np.zeros(n_struct)
    for i in range(m):
        x_std[basis[i]] = tab[i, -1]
    x = x_std[:n] + lb
    return LpResult(x=x, objective=float(lp.c @ x), status=LpStatus.OPTIMAL)
