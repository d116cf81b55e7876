"""Self-contained dense linear program solver.

The solver accepts problems in the form

    optimize    c' x
    subject to  A x  {>=, <=, =}  b
                lower <= x <= upper   (entries may be -inf / +inf)

and runs a two-phase bounded-variable revised simplex.  Free variables
are handled natively (a nonbasic variable sits at a bound or, if it has
none, at zero), never by splitting into positive and negative parts.

Internally every row gets a slack variable whose bounds encode the row
sense, plus an artificial variable when the initial slack basis is
infeasible for that row.  Slack and artificial columns are unit vectors,
so a basis consists of unit columns plus at most n structural columns,
and every basis solve reduces to a k x k system with k <= n.  This keeps
pivots cheap on problems with very many rows and few variables, which is
the shape of every hull query in this package.

Pivoting is deterministic: Dantzig's rule with lowest-index tie breaks,
switching permanently to Bland's rule after 3 (m + n) consecutive
degenerate pivots.  Solving the same problem twice gives bit-identical
results.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .numerics import as_matrix, as_vector

__all__ = [
    "ObjectiveSense",
    "ConstraintSense",
    "LpStatus",
    "LinearProgram",
    "SolverConfig",
    "LpSolution",
    "IterationLimitError",
    "solve",
    "solve_dual_pair",
    "dual_of_membership",
]

ITERATION_LIMIT_FACTOR = 50
DEGENERATE_SWITCH_FACTOR = 3
DEGENERATE_STEP = 1e-12


class ObjectiveSense(enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"


class ConstraintSense(enum.Enum):
    GE = ">="
    LE = "<="
    EQ = "=="


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"


class IterationLimitError(RuntimeError):
    """Raised when the pivot budget is exhausted; signals numerical
    trouble and is never converted into a solution status."""

    def __init__(self, iterations: int) -> None:
        super().__init__(f"simplex iteration limit reached after {iterations} pivots")
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by the solver and the hull queries.

    feas_tol      absolute tolerance on constraint residuals
    pivot_tol     smallest pivot magnitude accepted during ratio tests
    boundary_tol  relative half-width of the boundary band in hull verdicts
    duality_tol   relative primal-dual objective agreement requirement
    iteration_limit  pivot budget; None means 50 (rows + columns)
    """

    feas_tol: float = 1e-7
    pivot_tol: float = 1e-9
    boundary_tol: float = 1e-7
    duality_tol: float = 1e-7
    iteration_limit: int | None = None

    def __post_init__(self) -> None:
        for name in ("feas_tol", "pivot_tol", "boundary_tol", "duality_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.iteration_limit is not None and self.iteration_limit <= 0:
            raise ValueError("iteration_limit must be positive when given")


@dataclass(frozen=True)
class LinearProgram:
    """Validated dense LP instance.

    constraint_senses holds one ConstraintSense per row; bounds may use
    -inf / +inf.  Everything else must be finite.
    """

    objective_sense: ObjectiveSense
    objective: np.ndarray
    constraint_matrix: np.ndarray
    constraint_senses: tuple[ConstraintSense, ...]
    rhs: np.ndarray
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray

    def __post_init__(self) -> None:
        obj = as_vector(self.objective, "objective")
        mat = as_matrix(self.constraint_matrix, "constraint_matrix")
        rhs = as_vector(self.rhs, "rhs")
        lo = np.asarray(self.lower_bounds, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.upper_bounds, dtype=np.float64).reshape(-1)
        m, n = mat.shape
        if obj.size != n:
            raise ValueError(f"objective has {obj.size} entries for {n} columns")
        if rhs.size != m:
            raise ValueError(f"rhs has {rhs.size} entries for {m} rows")
        if len(self.constraint_senses) != m:
            raise ValueError("one constraint sense required per row")
        if not all(isinstance(s, ConstraintSense) for s in self.constraint_senses):
            raise ValueError("constraint_senses must be ConstraintSense values")
        if lo.size != n or hi.size != n:
            raise ValueError("bound vectors must have one entry per column")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise ValueError("bounds may be infinite but not NaN")
        if (lo > hi).any():
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraint_matrix", mat)
        object.__setattr__(self, "constraint_senses", tuple(self.constraint_senses))
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "lower_bounds", lo)
        object.__setattr__(self, "upper_bounds", hi)

    @property
    def n_rows(self) -> int:
        return self.constraint_matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.constraint_matrix.shape[1]


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    primal: np.ndarray | None
    objective_value: float | None
    iterations: int
    ray: np.ndarray | None = field(default=None)


# Column status codes.
_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3

_SLACK_BOUNDS = {
    ConstraintSense.LE: (0.0, np.inf),
    ConstraintSense.GE: (-np.inf, 0.0),
    ConstraintSense.EQ: (0.0, 0.0),
}


class _Simplex:
    """One solve; columns are [structural | slack | artificial]."""

    def __init__(self, problem: LinearProgram, config: SolverConfig) -> None:
        self.cfg = config
        self.A = problem.constraint_matrix
        self.b = problem.rhs
        self.m, self.n = self.A.shape
        self.flip = problem.objective_sense is ObjectiveSense.MAXIMIZE
        self.c_struct = -problem.objective if self.flip else problem.objective

        m, n = self.m, self.n
        self.lo = np.concatenate([problem.lower_bounds, np.empty(m)])
        self.hi = np.concatenate([problem.upper_bounds, np.empty(m)])
        for i, sense in enumerate(problem.constraint_senses):
            self.lo[n + i], self.hi[n + i] = _SLACK_BOUNDS[sense]

        self.status = np.empty(n + m, dtype=np.int64)
        lo_fin = np.isfinite(self.lo[:n])
        hi_fin = np.isfinite(self.hi[:n])
        near_lo = lo_fin & (~hi_fin | (np.abs(self.lo[:n]) <= np.abs(self.hi[:n])))
        self.status[:n] = np.where(
            near_lo, _AT_LOWER, np.where(hi_fin, _AT_UPPER, _FREE)
        )

        # unit_col[i] is the basic unit column covering row i, or -1 when
        # the row is covered by a structural column instead.
        self.unit_col = np.full(m, -1, dtype=np.int64)
        self.basic_struct: list[int] = []

        # Start from the all-slack basis; rows whose residual violates the
        # slack bounds get an artificial unit column signed like the
        # violation, so artificials start basic and nonnegative.
        resid = self.b - self.A @ self._nonbasic_struct_values()
        art_rows = []
        art_coefs = []
        for i in range(m):
            lo, hi = self.lo[n + i], self.hi[n + i]
            if lo <= resid[i] <= hi:
                self.status[n + i] = _BASIC
                self.unit_col[i] = n + i
            elif resid[i] > hi:
                self.status[n + i] = _AT_UPPER
                art_rows.append(i)
                art_coefs.append(1.0)
            else:
                self.status[n + i] = _AT_LOWER
                art_rows.append(i)
                art_coefs.append(-1.0)
        self.n_art = len(art_rows)
        self.art_row = np.array(art_rows, dtype=np.int64)
        self.total = n + m + self.n_art
        self.status = np.concatenate(
            [self.status, np.full(self.n_art, _BASIC, dtype=np.int64)]
        )
        self.lo = np.concatenate([self.lo, np.zeros(self.n_art)])
        self.hi = np.concatenate([self.hi, np.full(self.n_art, np.inf)])

        # Coefficient of each unit column in its row (slack +1, artificial
        # carries the violation sign); indexed by column id for vector use.
        self.col_coef = np.ones(self.total)
        self.col_coef[n + m :] = np.array(art_coefs)
        self.col_row = np.concatenate(
            [np.full(n, -1, dtype=np.int64), np.arange(m), self.art_row]
        )
        for a, row in enumerate(art_rows):
            self.unit_col[row] = n + m + a

        self.iterations = 0
        self.bland = False
        self._degenerate_run = 0
        limit = config.iteration_limit
        self.limit = ITERATION_LIMIT_FACTOR * (m + n) if limit is None else limit
        self._ray: np.ndarray | None = None

    # -- value bookkeeping -------------------------------------------------

    def _nonbasic_struct_values(self) -> np.ndarray:
        stat = self.status[: self.n]
        return np.where(
            stat == _AT_LOWER,
            self.lo[: self.n],
            np.where(stat == _AT_UPPER, self.hi[: self.n], 0.0),
        )

    def _nonbasic_slack_values(self) -> np.ndarray:
        stat = self.status[self.n : self.n + self.m]
        lo = self.lo[self.n : self.n + self.m]
        hi = self.hi[self.n : self.n + self.m]
        vals = np.zeros(self.m)
        vals[stat == _AT_LOWER] = lo[stat == _AT_LOWER]
        vals[stat == _AT_UPPER] = hi[stat == _AT_UPPER]
        return vals

    def _basis(self):
        """Current basis split: rows covered by structurals, basic
        structural columns, the m-by-k column block, and unit rows."""
        w_rows = np.flatnonzero(self.unit_col < 0)
        s_cols = np.array(sorted(self.basic_struct), dtype=np.int64)
        if w_rows.size != s_cols.size:
            raise AssertionError("basis bookkeeping out of sync")
        a_cols = self.A[:, s_cols] if s_cols.size else np.zeros((self.m, 0))
        u_rows = np.flatnonzero(self.unit_col >= 0)
        return w_rows, s_cols, a_cols, u_rows

    def _basic_values(self, w_rows, s_cols, a_cols, u_rows):
        """Solve for every basic value from scratch; no incremental drift."""
        resid = self.b - self.A @ self._nonbasic_struct_values()
        resid -= self._nonbasic_slack_values()
        if s_cols.size:
            x_s = np.linalg.solve(a_cols[w_rows], resid[w_rows])
        else:
            x_s = np.zeros(0)
        unit_vals = np.zeros(self.m)
        if u_rows.size:
            part = resid[u_rows]
            if s_cols.size:
                part = part - a_cols[u_rows] @ x_s
            unit_vals[u_rows] = part / self.col_coef[self.unit_col[u_rows]]
        return x_s, unit_vals

    def _duals(self, costs, w_rows, s_cols, a_cols, u_rows) -> np.ndarray:
        y = np.zeros(self.m)
        if u_rows.size:
            cols = self.unit_col[u_rows]
            y[u_rows] = costs[cols] / self.col_coef[cols]
        if s_cols.size:
            rhs = costs[s_cols]
            if u_rows.size:
                rhs = rhs - a_cols[u_rows].T @ y[u_rows]
            y[w_rows] = np.linalg.solve(a_cols[w_rows].T, rhs)
        return y

    def _representation(self, col: int, w_rows, s_cols, a_cols, u_rows):
        """Split B^{-1} A_col into (structural part, unit part)."""
        if col < self.n:
            a = self.A[:, col]
        else:
            a = np.zeros(self.m)
            a[self.col_row[col]] = self.col_coef[col]
        if s_cols.size:
            w_s = np.linalg.solve(a_cols[w_rows], a[w_rows])
        else:
            w_s = np.zeros(0)
        w_u = np.zeros(self.m)
        if u_rows.size:
            part = a[u_rows]
            if s_cols.size:
                part = part - a_cols[u_rows] @ w_s
            w_u[u_rows] = part / self.col_coef[self.unit_col[u_rows]]
        return w_s, w_u

    # -- pivot selection -----------------------------------------------------

    def _pick_entering(self, costs, y):
        n, m = self.n, self.m
        d = np.concatenate([costs[:n] - self.A.T @ y, costs[n : n + m] - y])
        stat = self.status[: n + m]
        at_lo = stat == _AT_LOWER
        at_hi = stat == _AT_UPPER
        free = stat == _FREE

        score = np.zeros(n + m)
        score[at_lo] = -d[at_lo]
        score[at_hi] = d[at_hi]
        score[free] = np.abs(d[free])
        score[self.lo[: n + m] == self.hi[: n + m]] = 0.0  # fixed columns never move

        tol = self.cfg.pivot_tol * (1.0 + np.abs(costs).max())
        eligible = score > tol
        if not eligible.any():
            return None
        if self.bland:
            e = int(np.flatnonzero(eligible)[0])
        else:
            e = int(np.argmax(np.where(eligible, score, -np.inf)))
        sigma = 1.0 if (at_lo[e] or (free[e] and d[e] < 0.0)) else -1.0
        return e, sigma

    def _ratio_test(self, e, sigma, w_s, w_u, s_cols, x_s, u_rows, unit_vals):
        """Smallest step that drives a basic variable to one of its bounds,
        with lowest-column-index tie breaks.  Returns (t, leaving column,
        bound hit) or (t_flip, -1, flip) or None when no step blocks."""
        tol = self.cfg.pivot_tol
        cols = np.concatenate([s_cols, self.unit_col[u_rows]])
        vals = np.concatenate([x_s, unit_vals[u_rows]])
        rates = np.concatenate([-sigma * w_s, -sigma * w_u[u_rows]])
        lo, hi = self.lo[cols], self.hi[cols]

        t = np.full(cols.shape, np.inf)
        dec = (rates < -tol) & np.isfinite(lo)
        inc = (rates > tol) & np.isfinite(hi)
        with np.errstate(invalid="ignore"):
            t[dec] = np.maximum(0.0, (vals[dec] - lo[dec]) / (-rates[dec]))
            t[inc] = np.maximum(0.0, (hi[inc] - vals[inc]) / rates[inc])

        t_flip = np.inf
        if np.isfinite(self.lo[e]) and np.isfinite(self.hi[e]):
            t_flip = self.hi[e] - self.lo[e]

        t_min = t.min() if t.size else np.inf
        if not np.isfinite(t_min) and not np.isfinite(t_flip):
            return None
        if t_flip < t_min:
            return t_flip, -1, "flip"
        near = np.flatnonzero(t <= t_min + DEGENERATE_STEP)
        pick = near[np.argmin(cols[near])]
        bound = _AT_LOWER if dec[pick] else _AT_UPPER
        return float(t[pick]), int(cols[pick]), bound

    def _apply_pivot(self, e: int, leaving: int, bound: int) -> None:
        if e >= self.n:
            row = self.col_row[e]
            if self.unit_col[row] >= 0 and self.unit_col[row] != leaving:
                raise AssertionError("pivot would create a parallel unit basis")
        if leaving < self.n:
            self.basic_struct.remove(leaving)
        else:
            self.unit_col[self.col_row[leaving]] = -1
        self.status[leaving] = bound
        if e < self.n:
            self.basic_struct.append(e)
        else:
            self.unit_col[self.col_row[e]] = e
        self.status[e] = _BASIC

    def _run_phase(self, costs: np.ndarray, phase_one: bool) -> str:
        while True:
            w_rows, s_cols, a_cols, u_rows = self._basis()
            x_s, unit_vals = self._basic_values(w_rows, s_cols, a_cols, u_rows)
            y = self._duals(costs, w_rows, s_cols, a_cols, u_rows)
            pick = self._pick_entering(costs, y)
            if pick is None:
                return "optimal"
            e, sigma = pick
            w_s, w_u = self._representation(e, w_rows, s_cols, a_cols, u_rows)
            outcome = self._ratio_test(e, sigma, w_s, w_u, s_cols, x_s, u_rows, unit_vals)
            if outcome is None:
                if phase_one:
                    raise ArithmeticError("phase one became unbounded")
                self._ray = self._build_ray(e, sigma, s_cols, w_s)
                return "unbounded"
            t, leaving, bound = outcome

            self.iterations += 1
            if self.iterations > self.limit:
                raise IterationLimitError(self.iterations)
            if t < DEGENERATE_STEP:
                self._degenerate_run += 1
                if self._degenerate_run > DEGENERATE_SWITCH_FACTOR * (self.m + self.n):
                    self.bland = True
            else:
                self._degenerate_run = 0

            if bound == "flip":
                self.status[e] = _AT_UPPER if self.status[e] == _AT_LOWER else _AT_LOWER
            else:
                self._apply_pivot(e, leaving, bound)

    def _build_ray(self, e: int, sigma: float, s_cols, w_s) -> np.ndarray:
        ray = np.zeros(self.n)
        if e < self.n:
            ray[e] = sigma
        for idx, col in enumerate(s_cols):
            ray[col] -= sigma * w_s[idx]
        return ray

    def _evict_artificials(self) -> None:
        """Pivot basic artificials out after phase one where any replacement
        column has a usable pivot element; rows without one are redundant and
        keep their artificial pinned at zero by the bound clamp."""
        for i in range(self.m):
            col = self.unit_col[i]
            if col < self.n + self.m:
                continue
            w_rows, s_cols, a_cols, _ = self._basis()
            coef = self.col_coef[col]
            if s_cols.size:
                q = np.linalg.solve(a_cols[w_rows].T, self.A[i, s_cols])
                comp = (self.A[i, :] - q @ self.A[w_rows, :]) / coef
            else:
                comp = self.A[i, :] / coef
            entering = -1
            for j in range(self.n):
                if self.status[j] != _BASIC and abs(comp[j]) > self.cfg.pivot_tol:
                    entering = j
                    break
            if entering < 0:
                slack = self.n + i
                if self.status[slack] != _BASIC and self.lo[slack] != self.hi[slack]:
                    entering = slack
            if entering >= 0:
                self._apply_pivot(entering, col, _AT_LOWER)

    def solve(self) -> LpSolution:
        n, m = self.n, self.m
        if self.n_art:
            costs1 = np.zeros(self.total)
            costs1[n + m :] = 1.0
            self._run_phase(costs1, phase_one=True)
            w_rows, s_cols, a_cols, u_rows = self._basis()
            _, unit_vals = self._basic_values(w_rows, s_cols, a_cols, u_rows)
            art_basic = u_rows[self.unit_col[u_rows] >= n + m]
            infeas = float(np.abs(unit_vals[art_basic]).sum()) if art_basic.size else 0.0
            if infeas > self.cfg.feas_tol:
                return LpSolution(LpStatus.INFEASIBLE, None, None, self.iterations)
            self._evict_artificials()
            self.lo[n + m :] = 0.0
            self.hi[n + m :] = 0.0

        costs2 = np.zeros(self.total)
        costs2[:n] = self.c_struct
        outcome = self._run_phase(costs2, phase_one=False)
        if outcome == "unbounded":
            return LpSolution(
                LpStatus.UNBOUNDED, None, None, self.iterations, ray=self._ray
            )

        w_rows, s_cols, a_cols, u_rows = self._basis()
        x_s, unit_vals = self._basic_values(w_rows, s_cols, a_cols, u_rows)
        x = self._nonbasic_struct_values()
        x[self.status[:n] == _BASIC] = 0.0
        for idx, col in enumerate(s_cols):
            x[col] = x_s[idx]
        self._check_feasible(x)
        value = float(self.c_struct @ x)
        if self.flip:
            value = -value
        return LpSolution(LpStatus.OPTIMAL, x, value, self.iterations)

    def _check_feasible(self, x: np.ndarray) -> None:
        resid = self.b - self.A @ x
        lo = self.lo[self.n : self.n + self.m]
        hi = self.hi[self.n : self.n + self.m]
        allowance = self.cfg.feas_tol * (1.0 + np.abs(self.b))
        bad = (resid < lo - allowance) | (resid > hi + allowance)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ArithmeticError(
                f"optimal basis violates row {i} by {resid[i]:.3e}; numerical trouble"
            )


def solve(problem: LinearProgram, config: SolverConfig | None = None) -> LpSolution:
    """Solve a dense LP; deterministic for identical inputs.

    Raises IterationLimitError when the pivot budget runs out and
    ArithmeticError when the final basis fails its feasibility check.
    """
    if not isinstance(problem, LinearProgram):
        raise TypeError("problem must be a LinearProgram")
    cfg = config or SolverConfig()
    return _Simplex(problem, cfg).solve()


def _require_membership_shape(primal: LinearProgram) -> None:
    if primal.objective_sense is not ObjectiveSense.MINIMIZE:
        raise ValueError("membership primal must minimize")
    if any(s is not ConstraintSense.GE for s in primal.constraint_senses):
        raise ValueError("membership primal must use >= rows")
    if not np.all(primal.rhs == -1.0):
        raise ValueError("membership primal must have rhs identically -1")
    if np.isfinite(primal.lower_bounds).any() or np.isfinite(primal.upper_bounds).any():
        raise ValueError("membership primal must have free variables")


def dual_of_membership(primal: LinearProgram) -> LinearProgram:
    """Dual of the free-variable membership LP: maximize -1'y subject to
    M'y = p with y >= 0, one weight per target row."""
    _require_membership_shape(primal)
    mat = primal.constraint_matrix
    r = mat.shape[0]
    return LinearProgram(
        objective_sense=ObjectiveSense.MAXIMIZE,
        objective=-np.ones(r),
        constraint_matrix=mat.T.copy(),
        constraint_senses=(ConstraintSense.EQ,) * mat.shape[1],
        rhs=primal.objective.copy(),
        lower_bounds=np.zeros(r),
        upper_bounds=np.full(r, np.inf),
    )


def solve_dual_pair(
    primal: LinearProgram, config: SolverConfig | None = None
) -> tuple[LpSolution, LpSolution]:
    """Solve a membership-shaped primal and its dual independently.

    Both problems go through the same simplex entry point but as separate
    instances, so agreement of the two objective values is a genuine
    numerical cross-check.  Raises ArithmeticError when strong duality
    fails beyond duality_tol or the statuses are inconsistent (an
    unbounded primal must pair with an infeasible dual).
    """
    cfg = config or SolverConfig()
    primal_sol = solve(primal, cfg)
    dual_sol = solve(dual_of_membership(primal), cfg)

    if primal_sol.status is LpStatus.OPTIMAL and dual_sol.status is LpStatus.OPTIMAL:
        gap = abs(primal_sol.objective_value - dual_sol.objective_value)
        allowed = cfg.duality_tol * (1.0 + abs(primal_sol.objective_value))
        if gap > allowed:
            raise ArithmeticError(
                f"strong duality violated: gap {gap:.3e} exceeds {allowed:.3e}"
            )
    elif primal_sol.status is LpStatus.UNBOUNDED:
        if dual_sol.status is not LpStatus.INFEASIBLE:
            raise ArithmeticError("unbounded primal paired with a feasible dual")
    elif primal_sol.status is LpStatus.INFEASIBLE:
        raise ArithmeticError("membership primal cannot be infeasible (zero is feasible)")
    return primal_sol, dual_sol
