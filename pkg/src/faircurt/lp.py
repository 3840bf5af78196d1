"""Dense two-phase simplex for linear programs with native variable bounds.

Rows may mix senses; simple bounds are handled by the bounded-variable
pivot rules (bound flips) instead of explicit slack rows. Pivoting is
Dantzig with a Bland fallback after a run of degenerate pivots, which
keeps the solver fast and cycle-free. All tie-breaks are by lowest index,
so identical problems solve identically, bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-7
_OPT_TOL = 1e-9
_PIVOT_TOL = 1e-11
_DEGEN_TOL = 1e-10


class IterationLimit(RuntimeError):
    """Pivot cap exhausted; points at a cycling or degeneracy bug."""

    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"simplex iteration limit reached after {iterations} pivots")


class NumericalBreakdown(RuntimeError):
    """A pivot below the stability threshold was forced, or the final
    basic solution failed the feasibility audit."""


@dataclass
class LPRow:
    coeffs: list[tuple[int, float]]  # sparse (var index, value)
    sense: str  # "<=", ">=", "="
    rhs: float
    name: str = ""


@dataclass
class LPProblem:
    n_vars: int
    cost: np.ndarray
    rows: list[LPRow]
    lower: np.ndarray
    upper: np.ndarray
    names: list[str] | None = None

    def validate(self) -> None:
        if len(self.cost) != self.n_vars:
            raise ValueError("cost length does not match n_vars")
        if len(self.lower) != self.n_vars or len(self.upper) != self.n_vars:
            raise ValueError("bound length does not match n_vars")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"lower > upper for variable {self._name(j)}")
        for i, row in enumerate(self.rows):
            if row.sense not in ("<=", ">=", "="):
                raise ValueError(f"row {i}: unknown sense {row.sense!r}")
            if not np.isfinite(row.rhs):
                raise ValueError(f"row {i}: rhs not finite")
            for j, _ in row.coeffs:
                if not 0 <= j < self.n_vars:
                    raise ValueError(f"row {i}: coefficient index {j} out of range")

    def _name(self, j: int) -> str:
        return self.names[j] if self.names else f"x{j}"


@dataclass
class LPSolution:
    status: str
    objective: float
    x: np.ndarray
    iterations: int
    # On infeasibility: (row name, residual infeasibility) of the worst rows.
    infeasible_rows: list[tuple[str, float]] = field(default_factory=list)


def check_feasibility(lp: LPProblem, x: np.ndarray) -> float:
    """Max signed violation of x over all rows and bounds (<= 0 means feasible)."""
    worst = -np.inf
    for row in lp.rows:
        ax = sum(v * x[j] for j, v in row.coeffs)
        if row.sense == "<=":
            worst = max(worst, ax - row.rhs)
        elif row.sense == ">=":
            worst = max(worst, row.rhs - ax)
        else:
            worst = max(worst, abs(ax - row.rhs))
    if lp.n_vars:
        worst = max(worst, np.max(lp.lower - x), np.max(x - lp.upper))
    return float(worst)


def dump_lp(lp: LPProblem) -> str:
    """Human-readable listing (one row per line) for external cross-checks."""
    out = ["minimize " + " + ".join(
        f"{lp.cost[j]:.12g}*{lp._name(j)}" for j in range(lp.n_vars) if lp.cost[j] != 0.0
    )]
    for i, row in enumerate(lp.rows):
        terms = " + ".join(f"{v:.12g}*{lp._name(j)}" for j, v in row.coeffs) or "0"
        label = row.name or f"r{i}"
        out.append(f"{label}: {terms} {row.sense} {row.rhs:.12g}")
    for j in range(lp.n_vars):
        out.append(f"bound: {lp.lower[j]:.12g} <= {lp._name(j)} <= {lp.upper[j]:.12g}")
    return "\n".join(out) + "\n"


class _Tableau:
    """Working state of the bounded-variable simplex in standard form.

    Internal variables are all >= 0 with optional finite upper bound.
    Column layout: [structural | slack/surplus | artificial]."""

    def __init__(self, lp: LPProblem):
        m = len(lp.rows)
        n0 = lp.n_vars
        A0 = np.zeros((m, n0))
        b = np.empty(m)
        senses = []
        for i, row in enumerate(lp.rows):
            for j, v in row.coeffs:
                A0[i, j] += v
            b[i] = row.rhs
            senses.append(row.sense)

        # Shift / reflect / split each variable onto [0, ub'].
        cols: list[np.ndarray] = []
        cint: list[float] = []
        ubs: list[float] = []
        self.recover: list[tuple[int, float, float]] = []  # (orig j, sign, offset)
        for j in range(n0):
            lo, up, cj = lp.lower[j], lp.upper[j], lp.cost[j]
            aj = A0[:, j]
            if np.isfinite(lo):
                cols.append(aj.copy())
                cint.append(cj)
                ubs.append(up - lo)
                self.recover.append((j, 1.0, lo))
                b = b - aj * lo
            elif np.isfinite(up):
                cols.append(-aj)
                cint.append(-cj)
                ubs.append(np.inf)
                self.recover.append((j, -1.0, up))
                b = b - aj * up
            else:  # free: x = x+ - x-
                cols.append(aj.copy())
                cint.append(cj)
                ubs.append(np.inf)
                self.recover.append((j, 1.0, 0.0))
                cols.append(-aj)
                cint.append(-cj)
                ubs.append(np.inf)
                self.recover.append((j, -1.0, 0.0))

        n_int = len(cols)
        A = np.column_stack(cols) if cols else np.zeros((m, 0))
        flip = b < 0
        if np.any(flip):
            A[flip] *= -1.0
            b[flip] *= -1.0
            senses = [
                {"<=": ">=", ">=": "<=", "=": "="}[s] if f else s
                for s, f in zip(senses, flip)
            ]

        n_slack = sum(1 for s in senses if s != "=")
        n_art = sum(1 for s in senses if s != "<=")
        width = n_int + n_slack + n_art
        T = np.zeros((m, width))
        T[:, :n_int] = A
        basis = np.full(m, -1, dtype=int)
        col = n_int
        art = n_int + n_slack
        for i, s in enumerate(senses):
            if s == "<=":
                T[i, col] = 1.0
                basis[i] = col
                col += 1
            elif s == ">=":
                T[i, col] = -1.0
                col += 1
                T[i, art] = 1.0
                basis[i] = art
                art += 1
            else:
                T[i, art] = 1.0
                basis[i] = art
                art += 1

        self.lp = lp
        self.m, self.width, self.n_int = m, width, n_int
        self.art_start = n_int + n_slack
        self.T = T
        self.xB = b.copy()
        self.basis = basis
        self.status = np.zeros(width, dtype=np.int8)  # 0 lower, 1 upper, 2 basic
        self.status[basis] = 2
        self.ub = np.concatenate([np.asarray(ubs), np.full(n_slack + n_art, np.inf)])
        # Fixed variables (ub'=0) never usefully enter; keep them at bound.
        self.barred = self.ub <= 0.0
        self.iterations = 0

    # -- pivoting -----------------------------------------------------------

    def _pivot(self, r: int, j: int, new_value: float, leave_status: int) -> None:
        T = self.T
        piv = T[r, j]
        prow = T[r] / piv
        colj = T[:, j].copy()
        T -= np.outer(colj, prow)
        T[r] = prow
        self.status[self.basis[r]] = leave_status
        self.basis[r] = j
        self.status[j] = 2
        self.xB[r] = new_value

    def optimize(self, c: np.ndarray, barred: np.ndarray, max_iter: int, phase: int) -> str:
        T, xB, basis, status, ub = self.T, self.xB, self.basis, self.status, self.ub
        m = self.m
        degen_run = 0
        bland = False
        while True:
            if self.iterations >= max_iter:
                raise IterationLimit(self.iterations)
            d = c - c[basis] @ T
            d[basis] = 0.0
            cand_lo = (status == 0) & ~barred & (d < -_OPT_TOL)
            cand_up = (status == 1) & ~barred & (d > _OPT_TOL)
            if not cand_lo.any() and not cand_up.any():
                return OPTIMAL
            if bland:
                j = int(np.flatnonzero(cand_lo | cand_up)[0])
            else:
                score = np.where(cand_lo, d, 0.0) - np.where(cand_up, d, 0.0)
                j = int(np.argmin(score))
            sigma = 1.0 if status[j] == 0 else -1.0
            alpha = T[:, j]
            g = sigma * alpha

            ratios = np.full(m, np.inf)
            pos = g > _PIVOT_TOL
            ratios[pos] = xB[pos] / g[pos]
            ubB = ub[basis]
            neg = (g < -_PIVOT_TOL) & np.isfinite(ubB)
            ratios[neg] = (ubB[neg] - xB[neg]) / (-g[neg])
            rmin = ratios.min() if m else np.inf
            t_own = ub[j]

            if t_own <= rmin:
                if not np.isfinite(t_own):
                    if phase == 1:
                        raise NumericalBreakdown("phase-1 objective unbounded")
                    return UNBOUNDED
                # Bound flip: j moves to its other bound, basis unchanged.
                xB -= sigma * t_own * alpha
                status[j] ^= 1
                self.iterations += 1
                step = t_own
            else:
                if not np.isfinite(rmin):
                    # Only blocked by sub-threshold pivots, if any.
                    near = (np.abs(g) > 0) & (np.abs(g) <= _PIVOT_TOL)
                    if near.any():
                        raise NumericalBreakdown("pivot below 1e-11 forced")
                    if phase == 1:
                        raise NumericalBreakdown("phase-1 objective unbounded")
                    return UNBOUNDED
                tied = np.flatnonzero(ratios == rmin)
                r = int(tied[np.argmin(basis[tied])])
                t = rmin
                xB -= sigma * t * alpha
                leave_status = 1 if g[r] < 0 else 0
                new_value = (0.0 if sigma > 0 else ub[j]) + sigma * t
                self._pivot(r, j, new_value, leave_status)
                self.iterations += 1
                step = t

            if step <= _DEGEN_TOL:
                degen_run += 1
                if degen_run > 10 * self.width:
                    bland = True
            else:
                degen_run = 0
                bland = False

    # -- solution recovery ---------------------------------------------------

    def values(self) -> np.ndarray:
        at_up = self.status[: self.n_int] == 1
        v = np.where(at_up, self.ub[: self.n_int], 0.0)
        for r, bj in enumerate(self.basis):
            if bj < self.n_int:
                v[bj] = self.xB[r]
        x = np.zeros(self.lp.n_vars)
        for k, (j, sign, offset) in enumerate(self.recover):
            x[j] += sign * v[k] + offset
        return x


def solve_lp(lp: LPProblem, max_iter: int | None = None) -> LPSolution:
    """Solve min cost.x s.t. rows, lower <= x <= upper.

    Two-phase primal simplex; artificials are used for '>=' and '=' rows in
    phase 1 and barred afterwards. Returns status optimal / infeasible /
    unbounded; raises IterationLimit or NumericalBreakdown on pathology.
    """
    lp.validate()
    m = len(lp.rows)
    if max_iter is None:
        max_iter = 50 * (lp.n_vars + m)

    tb = _Tableau(lp)
    scale = 1.0 + max((abs(r.rhs) for r in lp.rows), default=0.0)

    if tb.art_start < tb.width:
        c1 = np.zeros(tb.width)
        c1[tb.art_start:] = 1.0
        tb.optimize(c1, tb.barred.copy(), max_iter, phase=1)
        art_basic = tb.basis >= tb.art_start
        infeas = float(np.sum(tb.xB[art_basic])) if art_basic.any() else 0.0
        if infeas > 1e-8 * scale:
            rows = []
            for r in np.flatnonzero(art_basic):
                if tb.xB[r] > 1e-8 * scale:
                    name = lp.rows[r].name or f"r{r}"
                    rows.append((name, float(tb.xB[r])))
            rows.sort(key=lambda nv: -nv[1])
            return LPSolution(INFEASIBLE, np.nan, np.full(lp.n_vars, np.nan), tb.iterations,
                              infeasible_rows=rows)
        # Drive residual artificials out of the basis where possible.
        for r in np.flatnonzero(tb.basis >= tb.art_start):
            row = tb.T[r, : tb.art_start]
            elig = np.flatnonzero((np.abs(row) > 1e-9) & ~tb.barred[: tb.art_start])
            if elig.size:
                tb._pivot(int(r), int(elig[0]), 0.0, 0)

    c2 = np.zeros(tb.width)
    c2[: tb.n_int] = [lp.cost[j] * s for j, s, _ in tb.recover]
    barred2 = tb.barred.copy()
    barred2[tb.art_start:] = True
    result = tb.optimize(c2, barred2, max_iter, phase=2)
    if result == UNBOUNDED:
        return LPSolution(UNBOUNDED, np.nan, np.full(lp.n_vars, np.nan), tb.iterations)

    x = tb.values()
    worst = check_feasibility(lp, x)
    if worst > FEAS_TOL * scale:
        raise NumericalBreakdown(f"optimal basis violates feasibility by {worst:.3e}")
    objective = float(lp.cost @ x)
    return LPSolution(OPTIMAL, objective, x, tb.iterations)
