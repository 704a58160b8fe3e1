"""Dense bounded-variable revised primal simplex.

Solves ``min c.x  s.t.  A x = b,  0 <= x <= ub`` with Bland's rule. Columns
can be appended between solves, which keeps the current basis primal
feasible; this is what column generation needs.
"""

from __future__ import annotations

import math

import numpy as np


class Infeasible(Exception):
    """The LP (or a cut requirement) has no feasible solution."""


class Unbounded(Exception):
    pass


class SolverStall(RuntimeError):
    """Pivot or constraint-generation budget exhausted."""


_LOWER, _UPPER, _BASIC = 0, 1, 2


class RevisedSimplex:
    """Revised simplex with an explicit basis inverse.

    Nonbasic columns sit at 0 or at their upper bound. The inverse is
    refactorised every ``refactor_every`` pivots to contain drift.
    """

    def __init__(self, b, tol: float = 1e-9, max_pivots: int | None = None, refactor_every: int = 64):
        self.b = np.asarray(b, dtype=float).copy()
        self.m = len(self.b)
        self.tol = tol
        self.max_pivots = max_pivots
        self.refactor_every = refactor_every
        self._cols = np.zeros((self.m, 16))
        self.cost = np.zeros(16)
        self.ub = np.full(16, math.inf)
        self.status = np.zeros(16, dtype=np.int8)
        self.ncols = 0
        self.basis: list[int] = []
        self.B_inv = np.eye(self.m)
        self.x_B = np.zeros(self.m)
        self.pivots = 0
        self._since_refactor = 0

    # construction -------------------------------------------------------

    def add_column(self, a, cost: float, ub: float = math.inf) -> int:
        j = self.ncols
        if j == self._cols.shape[1]:
            grow = max(16, j)
            self._cols = np.hstack([self._cols, np.zeros((self.m, grow))])
            self.cost = np.concatenate([self.cost, np.zeros(grow)])
            self.ub = np.concatenate([self.ub, np.full(grow, math.inf)])
            self.status = np.concatenate([self.status, np.zeros(grow, dtype=np.int8)])
        self._cols[:, j] = a
        self.cost[j] = cost
        self.ub[j] = ub
        self.status[j] = _LOWER
        self.ncols += 1
        return j

    @property
    def A(self) -> np.ndarray:
        return self._cols[:, : self.ncols]

    def set_basis(self, basis: list[int]) -> None:
        if len(basis) != self.m:
            raise ValueError("basis size must equal the row count")
        for j in self.basis:
            self.status[j] = _LOWER
        self.basis = list(basis)
        for j in self.basis:
            self.status[j] = _BASIC
        self._refactor()
        if np.any(self.x_B < -self.tol) or np.any(self.x_B > self.ub[self.basis] + self.tol):
            raise Infeasible("initial basis is not primal feasible")

    def _refactor(self) -> None:
        if self.m:
            self.B_inv = np.linalg.inv(self.A[:, self.basis])
        at_upper = np.flatnonzero(self.status[: self.ncols] == _UPPER)
        rhs = self.b - self.A[:, at_upper] @ self.ub[at_upper] if len(at_upper) else self.b
        self.x_B = self.B_inv @ rhs
        self._since_refactor = 0

    # solving --------------------------------------------------------------

    def duals(self) -> np.ndarray:
        return self.cost[self.basis] @ self.B_inv

    def reduced_costs(self) -> np.ndarray:
        return self.cost[: self.ncols] - self.duals() @ self.A

    def solution(self) -> np.ndarray:
        x = np.where(self.status[: self.ncols] == _UPPER, self.ub[: self.ncols], 0.0)
        x[self.basis] = self.x_B
        return x

    def objective(self) -> float:
        return float(self.cost[: self.ncols] @ self.solution())

    def optimize(self) -> None:
        tol = self.tol
        while True:
            if self.max_pivots is not None and self.pivots > self.max_pivots:
                raise SolverStall(f"simplex exceeded {self.max_pivots} pivots")
            d = self.reduced_costs()
            st = self.status[: self.ncols]
            ub = self.ub[: self.ncols]
            cand = ((st == _LOWER) & (d < -tol) & (ub > 0)) | ((st == _UPPER) & (d > tol))
            entering = np.flatnonzero(cand)
            if len(entering) == 0:
                return
            j = int(entering[0])  # Bland: lowest index
            direction = 1.0 if st[j] == _LOWER else -1.0
            alpha = self.B_inv @ self._cols[:, j]
            step = direction * alpha

            theta = ub[j]
            leave_row = -1
            leave_to_upper = False
            leave_col = None
            if self.m:
                basis = np.asarray(self.basis)
                bub = self.ub[basis]
                down = step > tol
                up = (step < -tol) & np.isfinite(bub)
                ratio = np.full(self.m, math.inf)
                with np.errstate(invalid="ignore"):
                    ratio[down] = np.maximum(self.x_B[down], 0.0) / step[down]
                    ratio[up] = np.maximum(bub[up] - self.x_B[up], 0.0) / (-step[up])
                best = float(ratio.min())
                if best < theta - 1e-15:
                    # Bland tie-break: smallest basic column index among the minimizers
                    ties = np.flatnonzero(ratio <= best + 1e-15)
                    i = int(ties[np.argmin(basis[ties])])
                    theta, leave_row, leave_to_upper, leave_col = best, i, bool(up[i]), int(basis[i])
            if not math.isfinite(theta):
                raise Unbounded("LP is unbounded")

            self.x_B -= theta * step
            self.pivots += 1
            if leave_row < 0:
                self.status[j] = _UPPER if st[j] == _LOWER else _LOWER
                continue

            entering_value = (0.0 if self.status[j] == _LOWER else self.ub[j]) + direction * theta
            self.status[leave_col] = _UPPER if leave_to_upper else _LOWER
            self.status[j] = _BASIC
            self.basis[leave_row] = j
            self.x_B[leave_row] = entering_value

            piv = alpha[leave_row]
            row = self.B_inv[leave_row] / piv
            self.B_inv -= np.outer(alpha, row)
            self.B_inv[leave_row] = row
            self._since_refactor += 1
            if self._since_refactor >= self.refactor_every:
                self._refactor()


def solve_lp(c, A_eq, b_eq, ub=None, tol: float = 1e-9, max_pivots: int | None = None):
    """Two-phase solve of ``min c.x, A_eq x = b_eq, 0 <= x <= ub``.

    Returns ``(x, objective)``; raises :class:`Infeasible` or :class:`Unbounded`.
    """
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, nvar = A.shape
    ub = np.full(nvar, math.inf) if ub is None else np.asarray(ub, dtype=float)
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    lp = RevisedSimplex(b, tol=tol, max_pivots=max_pivots)
    for j in range(nvar):
        lp.add_column(A[:, j], 0.0, ub[j])
    artificial = [lp.add_column(np.eye(m)[i], 1.0) for i in range(m)]
    lp.set_basis(artificial)
    lp.optimize()
    if lp.objective() > max(tol, 1e-7) * max(1.0, float(np.abs(b).sum())):
        raise Infeasible("phase 1 optimum is positive")

    lp.cost[:nvar] = c
    for j in artificial:
        lp.cost[j] = 0.0
        lp.ub[j] = 0.0
    lp.optimize()
    x = lp.solution()[:nvar]
    return x, float(c @ x)
