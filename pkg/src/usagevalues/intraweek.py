"""Exact weekly dispatch subproblems for the Bellman recursions.

Three entry points share one engine:

* solve_week_hd       - deterministic weekly dispatch, all controls free,
                        for one disclosed uncertainty block;
* evaluate_recourse   - same problem with the slow units' on/off schedule
                        frozen (the recourse step of a two-stage solve);
* solve_week_dhd      - two-stage extensive form: a single slow on/off plan
                        shared by every scenario, recourse per scenario.

Commitments are binary, so each solve is a small MILP. We run a depth-first
branch-and-bound over the commitment bits in unit-major, hour-minor order
(0 branch first, strict-improvement incumbents, hence the lexicographically
smallest optimal commitment matrix is retained among ties). Bounds come from
the LP relaxation with semi-continuity relaxed and the cost-to-go replaced
by its lower convex envelope over the reachable end-of-week window.

At a leaf the possibly nonconvex piecewise-linear cost-to-go is handled
exactly: if the envelope touches the function at the leaf optimum the
envelope LP is already exact, otherwise the function is split into maximal
convex pieces and one LP is solved per piece (equivalent to enumerating
segments, but grouping whole convex runs into single solves).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import SolverFailure
from .pwl import PiecewiseLinear, clip_points, convex_pieces, lower_convex_envelope
from .scenario_io import WeekBlock
from .simplex import INFEASIBLE, solve_lp
from .system_model import HourlyControl, SystemModel, weekly_cost, weekly_dynamics

CostToGo = PiecewiseLinear

FREE = -1
_INT_TOL = 1e-9
_ENV_TOL = 1e-9


@dataclass(frozen=True)
class WeekSolution:
    """Optimal weekly dispatch: Bellman value, its stage cost and controls."""

    value: float        # stage cost + cost-to-go at x_next
    stage_cost: float
    controls: tuple[HourlyControl, ...]
    x_next: float


@dataclass(frozen=True)
class DhdWeekSolution:
    """Two-stage weekly solution: shared slow plan plus per-scenario recourse."""

    value: float                 # expectation of per-scenario values
    slow_plan: np.ndarray        # (H, n_slow), columns follow model.slow_indices
    per_scenario: tuple[WeekSolution, ...]


class _Extract(NamedTuple):
    commit: np.ndarray  # (H, I) ints
    z: np.ndarray       # (H, I)
    pump: np.ndarray
    turb: np.ndarray
    ens: np.ndarray
    x_next: float


class _Relax(NamedTuple):
    value: float
    u: np.ndarray       # (H, I) floats, fixed entries filled in
    x_next: float
    env_exact: bool


def expectation(values: Sequence[float], probs: Sequence[float]) -> float:
    """Finite-sum expectation, accumulated in scenario order (deterministic)."""
    acc = 0.0
    for p, v in zip(probs, values):
        acc += p * v
    return acc


def _uniform_probs(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


class _WeekProblem:
    """LP scaffolding for one (start stock, uncertainty block, cost-to-go)."""

    def __init__(self, x0: float, block: WeekBlock, ctg: CostToGo, model: SystemModel):
        st = model.storage
        if not st.x_min - 1e-6 <= x0 <= st.x_max + 1e-6:
            raise ValueError(f"start stock {x0} outside [{st.x_min}, {st.x_max}]")
        self.x0 = float(min(max(x0, st.x_min), st.x_max))
        self.block = block
        self.ctg = ctg
        self.model = model
        self.H = block.hours_per_week
        self.I = model.num_units
        if block.num_units != self.I:
            raise ValueError("block and model disagree on the number of units")
        self.demand = block.demand
        self.avail = block.avail
        self.pmin = np.array([u.p_min for u in model.units])
        self.pmax = np.array([u.p_max for u in model.units])
        self.cvar = np.array([u.variable_cost for u in model.units])
        self.cstart = np.array([u.startup_cost for u in model.units])
        self.eta = st.eta
        self.ens_cap = np.maximum(0.0, self.demand + st.pump_max)

        # reachable end-of-week stock window (monotone pump/turb strategies
        # show every point of it is attainable with the hourly box respected)
        lo = max(st.x_min, self.x0 - self.H * st.turb_max, ctg.lo)
        hi = min(st.x_max, self.x0 + self.eta * self.H * st.pump_max, ctg.hi)
        if hi < lo:  # fp corner when pump_max == turb_max == 0
            lo = hi = min(max(self.x0, st.x_min), st.x_max)
        self.win_lo, self.win_hi = lo, hi
        self.win_xs, self.win_ys = clip_points(ctg, lo, hi)
        self.env_m, self.env_a = lower_convex_envelope(self.win_xs, self.win_ys)
        self.pieces = convex_pieces(self.win_xs, self.win_ys)
        self.t_lb = float(np.min(self.win_ys))
        self.t_ub = float(np.max(self.win_ys)) + 1.0
        self._leaf_memo: dict[bytes, tuple[float, _Extract]] = {}

    # ---- LP assembly -----------------------------------------------------

    def _solve(self, fix, tail_m, tail_a, xh_lo, xh_hi):
        """Build and solve one LP for the given commitment fix-state.

        fix is an (H, I) array over {-1 free, 0 off, 1 on}. Returns
        (value, extract, u_values) or None when the terminal window is
        empty or the LP infeasible. The value includes the start-up
        constants of fully fixed transitions.
        """
        if xh_hi < xh_lo:
            return None
        H, I = self.H, self.I
        st = self.model.storage

        cols = []       # (kind, k, i)
        lo, hi, cost = [], [], []

        z_idx = np.full((H, I), -1, dtype=int)
        u_idx = np.full((H, I), -1, dtype=int)
        su_idx = np.full((H, I), -1, dtype=int)

        def add(kind, k, i, lo_v, hi_v, c_v):
            cols.append((kind, k, i))
            lo.append(lo_v)
            hi.append(hi_v)
            cost.append(c_v)
            return len(cols) - 1

        const = 0.0
        for k in range(H):
            for i in range(I):
                f = fix[k, i]
                if self.avail[k, i] == 1 and f != 0:
                    if f == 1:
                        z_idx[k, i] = add("z", k, i, self.pmin[i], self.pmax[i], self.cvar[i])
                    else:
                        z_idx[k, i] = add("z", k, i, 0.0, self.pmax[i], self.cvar[i])
                if f == FREE:
                    u_idx[k, i] = add("u", k, i, 0.0, 1.0, 0.0)
        for k in range(H):
            for i in range(I):
                if self.cstart[i] == 0.0 or fix[k, i] == 0:
                    continue
                prev_free = k > 0 and fix[k - 1, i] == FREE
                if fix[k, i] == FREE or prev_free:
                    su_idx[k, i] = add("su", k, i, 0.0, 1.0, self.cstart[i])
                else:
                    prev = 0 if k == 0 else int(fix[k - 1, i])
                    const += self.cstart[i] * max(int(fix[k, i]) - prev, 0)
        pump_idx = np.array([add("pump", k, -1, 0.0, st.pump_max, 0.0) for k in range(H)])
        turb_idx = np.array([add("turb", k, -1, 0.0, st.turb_max, 0.0) for k in range(H)])
        ens_idx = np.array([add("ens", k, -1, 0.0, self.ens_cap[k], self.model.ens_penalty)
                            for k in range(H)])
        # a finite epigraph box keeps simplex steps at the problem's scale
        t_idx = add("t", -1, -1, self.t_lb, self.t_ub, 1.0)

        ncols = len(cols)
        rows: list[np.ndarray] = []
        rhs: list[float] = []

        def new_row():
            rows.append(np.zeros(ncols))
            return rows[-1]

        for k in range(H):
            row = new_row()
            for i in range(I):
                if z_idx[k, i] >= 0:
                    row[z_idx[k, i]] = -1.0
            row[turb_idx[k]] = -1.0
            row[ens_idx[k]] = -1.0
            row[pump_idx[k]] = 1.0
            rhs.append(-self.demand[k])

        for k in range(H):
            ub = st.x_max if k < H - 1 else xh_hi
            lb = st.x_min if k < H - 1 else xh_lo
            row = new_row()
            row[pump_idx[: k + 1]] = self.eta
            row[turb_idx[: k + 1]] = -1.0
            rhs.append(ub - self.x0)
            row = new_row()
            row[pump_idx[: k + 1]] = -self.eta
            row[turb_idx[: k + 1]] = 1.0
            rhs.append(self.x0 - lb)

        for k in range(H):
            for i in range(I):
                if fix[k, i] == FREE and z_idx[k, i] >= 0:
                    row = new_row()
                    row[z_idx[k, i]] = 1.0
                    row[u_idx[k, i]] = -self.pmax[i]
                    rhs.append(0.0)
                    row = new_row()
                    row[z_idx[k, i]] = -1.0
                    row[u_idx[k, i]] = self.pmin[i]
                    rhs.append(0.0)

        for k in range(H):
            for i in range(I):
                if su_idx[k, i] < 0:
                    continue
                row = new_row()
                row[su_idx[k, i]] = -1.0
                r = 0.0
                if fix[k, i] == FREE:
                    row[u_idx[k, i]] = 1.0
                else:
                    r -= float(fix[k, i])
                if k > 0:
                    if fix[k - 1, i] == FREE:
                        row[u_idx[k - 1, i]] = -1.0
                    else:
                        r += float(fix[k - 1, i])
                # row encodes u_k - u_{k-1} - su <= 0 with fixed terms moved right
                rhs.append(r)

        for m_j, a_j in zip(tail_m, tail_a):
            row = new_row()
            row[pump_idx] += self.eta * m_j
            row[turb_idx] += -m_j
            row[t_idx] = -1.0
            rhs.append(-a_j - m_j * self.x0)

        # starting ens at its cap and su at 1 is primal feasible whenever the
        # terminal window contains x0, which skips the simplex's first phase
        start_upper = np.array([kind in ("ens", "su") for kind, _, _ in cols])
        sol = solve_lp(np.array(cost), np.vstack(rows), np.array(rhs),
                       np.array(lo), np.array(hi), start_at_upper=start_upper)
        if sol.status == INFEASIBLE:
            return None

        x = sol.x
        z = np.zeros((H, I))
        for k in range(H):
            for i in range(I):
                if z_idx[k, i] >= 0:
                    z[k, i] = x[z_idx[k, i]]
        u = fix.astype(float)
        for k in range(H):
            for i in range(I):
                if u_idx[k, i] >= 0:
                    u[k, i] = x[u_idx[k, i]]
        pump = x[pump_idx].copy()
        turb = x[turb_idx].copy()
        ens = x[ens_idx].copy()
        x_next = self.x0 + float(np.sum(self.eta * pump - turb))
        extract = _Extract(None, z, pump, turb, ens, x_next)
        return sol.value + const, extract, u

    # ---- bounding and exact evaluation ------------------------------------

    def _ctg_at(self, x: float) -> float:
        x = min(max(x, self.win_lo), self.win_hi)
        return float(np.interp(x, self.win_xs, self.win_ys))

    def _env_at(self, x: float) -> float:
        return float(np.max(self.env_m * x + self.env_a))

    def relax(self, fix) -> _Relax | None:
        """Lower bound: LP relaxation with the convex-envelope cost-to-go."""
        out = self._solve(fix, self.env_m, self.env_a, self.win_lo, self.win_hi)
        if out is None:
            return None
        value, extract, u = out
        gap = abs(self._env_at(extract.x_next) - self._ctg_at(extract.x_next))
        env_exact = gap <= _ENV_TOL * (1.0 + abs(self._ctg_at(extract.x_next)))
        return _Relax(value, u, extract.x_next, env_exact)

    def leaf(self, commit: np.ndarray, ub: float):
        """Exact value of a fully fixed commitment matrix (or (inf, None)
        as soon as its envelope bound proves it cannot beat ub)."""
        key = commit.tobytes()
        hit = self._leaf_memo.get(key)
        if hit is not None:
            return hit
        out = self._solve(commit, self.env_m, self.env_a, self.win_lo, self.win_hi)
        if out is None:
            return np.inf, None
        value, extract, _ = out
        gap = abs(self._env_at(extract.x_next) - self._ctg_at(extract.x_next))
        if gap <= _ENV_TOL * (1.0 + abs(self._ctg_at(extract.x_next))):
            result = (value, extract._replace(commit=commit.copy()))
            self._leaf_memo[key] = result
            return result
        if value >= ub:
            return np.inf, None
        best_val, best_ext = np.inf, None
        for p_lo, p_hi, m, a in self.pieces:
            out = self._solve(commit, m, a, p_lo, p_hi)
            if out is None:
                continue
            v, ext, _ = out
            if v < best_val:
                best_val, best_ext = v, ext._replace(commit=commit.copy())
        if best_ext is None:
            return np.inf, None
        result = (best_val, best_ext)
        self._leaf_memo[key] = result
        return result


def _branch_and_bound(problem: _WeekProblem, fix0: np.ndarray, cutoff: float = np.inf):
    """DFS over free commitment bits; returns (value, extract) or (inf, None).

    Free bits are explored in unit-major, hour-minor order with the 0 branch
    first, and incumbents are replaced only on strict improvement, so among
    tied optimal leaves the lexicographically smallest commitment matrix is
    kept. A value of `cutoff` or more is treated as useless to the caller.
    """
    H, I = problem.H, problem.I
    order = [(i, k) for i in range(I) for k in range(H) if fix0[k, i] == FREE]
    state = {"val": np.inf, "ext": None}

    def consider(commit):
        val, ext = problem.leaf(commit, min(state["val"], cutoff))
        if val < state["val"] and ext is not None:
            state["val"], state["ext"] = val, ext

    root = problem.relax(fix0)
    if root is None:
        return np.inf, None
    commit0 = fix0.copy()
    for i, k in order:
        commit0[k, i] = 1 if root.u[k, i] >= 0.5 else 0
    consider(commit0)

    def visit(fix, inherited):
        # a child whose branch agrees with the parent's relaxed optimum keeps
        # that optimum verbatim: the restriction cannot move it
        info = inherited if inherited is not None else problem.relax(fix)
        if info is None or info.value >= min(state["val"], cutoff):
            return
        frac = None
        first_free = None
        for i, k in order:
            if fix[k, i] != FREE:
                continue
            if first_free is None:
                first_free = (i, k)
            if abs(info.u[k, i] - round(info.u[k, i])) > _INT_TOL:
                frac = (i, k)
                break
        if frac is None:
            commit = fix.copy()
            for i, k in order:
                if commit[k, i] == FREE:
                    commit[k, i] = 1 if info.u[k, i] >= 0.5 else 0
            consider(commit)
            if first_free is None:
                return
            if info.value >= min(state["val"], cutoff):
                return  # envelope was exact (or candidate dominates): subtree done
            branch = first_free
        else:
            branch = frac
        i, k = branch
        for v in (0, 1):
            child = fix.copy()
            child[k, i] = v
            if abs(info.u[k, i] - v) <= _INT_TOL:
                visit(child, info)
            else:
                visit(child, None)

    visit(fix0.copy(), root)
    if state["val"] >= cutoff:
        return np.inf, None
    return state["val"], state["ext"]


def _make_solution(problem: _WeekProblem, ext: _Extract) -> WeekSolution:
    """Materialise LP output as validated hourly controls."""
    model = problem.model
    st = model.storage
    H, I = problem.H, problem.I
    commit = ext.commit.astype(int)
    z = np.zeros((H, I))
    for k in range(H):
        for i in range(I):
            if commit[k, i] == 1 and problem.avail[k, i] == 1:
                z[k, i] = min(max(ext.z[k, i], problem.pmin[i]), problem.pmax[i])
    pump = np.clip(ext.pump, 0.0, st.pump_max)
    turb = np.clip(ext.turb, 0.0, st.turb_max)
    ens = np.maximum(ext.ens, 0.0)
    controls = tuple(
        HourlyControl(commit[k], z[k], float(pump[k]), float(turb[k]), float(ens[k]))
        for k in range(H)
    )
    x_next = weekly_dynamics(problem.x0, pump, turb, st)
    hours = problem.block.hours()
    for k in range(H):
        resid = turb[k] + float(np.sum(z[k])) + ens[k] - pump[k] - problem.demand[k]
        if resid < -1e-6:
            raise SolverFailure(f"hour {k}: balance violated by {-resid}")
    stage = weekly_cost(problem.x0, controls, hours, model)
    value = stage + problem.ctg(min(max(x_next, problem.ctg.lo), problem.ctg.hi))
    return WeekSolution(value, stage, controls, x_next)


def _fix_from_plan(model: SystemModel, H: int, slow_plan: np.ndarray) -> np.ndarray:
    slow = model.slow_indices
    plan = np.asarray(slow_plan, dtype=int)
    if plan.shape != (H, len(slow)):
        raise ValueError(f"slow plan must have shape ({H}, {len(slow)})")
    if plan.size and not np.all((plan == 0) | (plan == 1)):
        raise ValueError("slow plan entries must be 0 or 1")
    fix = np.full((H, model.num_units), FREE, dtype=np.int8)
    for j, i in enumerate(slow):
        fix[:, i] = plan[:, j]
    return fix


def solve_week_hd(x: float, block: WeekBlock, ctg: CostToGo,
                  model: SystemModel) -> WeekSolution:
    """Globally optimal deterministic weekly dispatch for one block."""
    problem = _WeekProblem(x, block, ctg, model)
    fix0 = np.full((problem.H, problem.I), FREE, dtype=np.int8)
    _, ext = _branch_and_bound(problem, fix0)
    if ext is None:
        raise SolverFailure("weekly problem unexpectedly infeasible")
    return _make_solution(problem, ext)


def evaluate_recourse(x: float, slow_plan: np.ndarray, block: WeekBlock,
                      ctg: CostToGo, model: SystemModel) -> WeekSolution:
    """Optimal recourse for one block with the slow schedule frozen."""
    problem = _WeekProblem(x, block, ctg, model)
    fix0 = _fix_from_plan(model, problem.H, slow_plan)
    _, ext = _branch_and_bound(problem, fix0)
    if ext is None:
        raise SolverFailure("recourse problem unexpectedly infeasible")
    return _make_solution(problem, ext)


def solve_week_dhd(x: float, blocks: Sequence[WeekBlock], ctg: CostToGo,
                   model: SystemModel, probs: Sequence[float] | None = None
                   ) -> DhdWeekSolution:
    """Two-stage extensive-form weekly solve over N scenarios.

    The slow units' on/off plan is decided once (before the scenario is
    known); every scenario then gets its own recourse. With one scenario or
    no slow units the result coincides with averaging solve_week_hd.
    """
    blocks = list(blocks)
    n = len(blocks)
    if n == 0:
        raise ValueError("need at least one scenario block")
    probs = _uniform_probs(n) if probs is None else np.asarray(probs, dtype=float)
    if probs.shape != (n,) or abs(float(np.sum(probs)) - 1.0) > 1e-9:
        raise ValueError("probabilities must match the blocks and sum to 1")
    slow = model.slow_indices
    n_slow = len(slow)
    H = blocks[0].hours_per_week
    problems = [_WeekProblem(x, b, ctg, model) for b in blocks]

    def expand(fix_s):
        fix = np.full((H, model.num_units), FREE, dtype=np.int8)
        for j, i in enumerate(slow):
            fix[:, i] = fix_s[:, j]
        return fix

    state = {"val": np.inf, "plan": None}

    def leaf_eval(plan, lbs):
        partial = 0.0
        for m in range(n):
            tail = sum(probs[q] * lbs[q] for q in range(m, n))
            if partial + tail >= state["val"]:
                return
            cut = (state["val"] - partial - sum(probs[q] * lbs[q] for q in range(m + 1, n)))
            cut /= probs[m]
            val_m, ext = _branch_and_bound(problems[m], expand(plan), cutoff=cut)
            if ext is None or val_m >= cut:
                return
            partial += probs[m] * val_m
        if partial < state["val"]:
            state["val"] = partial
            state["plan"] = plan.copy()

    if n_slow == 0:
        plan = np.zeros((H, 0), dtype=np.int8)
        leaf_eval(plan, [-np.inf] * n)
    else:
        order = [(j, k) for j in range(n_slow) for k in range(H)]

        def relax_all(fix_s):
            infos = []
            for p in problems:
                info = p.relax(expand(fix_s))
                if info is None:
                    return None
                infos.append(info)
            return infos

        root_fix = np.full((H, n_slow), FREE, dtype=np.int8)
        root_infos = relax_all(root_fix)
        if root_infos is None:
            raise SolverFailure("two-stage relaxation unexpectedly infeasible")
        warm = np.zeros((H, n_slow), dtype=np.int8)
        for j, k in order:
            mean_u = expectation([info.u[k, slow[j]] for info in root_infos], probs)
            warm[k, j] = 1 if mean_u >= 0.5 else 0
        leaf_eval(warm, [info.value for info in root_infos])

        def visit(fix_s, inherited):
            infos = inherited if inherited is not None else relax_all(fix_s)
            if infos is None:
                return
            vals = [info.value for info in infos]
            bound = expectation(vals, probs)
            if bound >= state["val"]:
                return
            free = [(j, k) for j, k in order if fix_s[k, j] == FREE]
            if not free:
                leaf_eval(fix_s, vals)
                return
            # branch on the first slow bit whose relaxed values disagree or
            # are fractional; if they all agree on integers, try that plan
            pick = None
            for j, k in free:
                us = [info.u[k, slow[j]] for info in infos]
                ref = round(us[0])
                if any(abs(u - ref) > _INT_TOL for u in us):
                    pick = (j, k)
                    break
            if pick is None:
                plan = fix_s.copy()
                for j, k in free:
                    plan[k, j] = 1 if infos[0].u[k, slow[j]] >= 0.5 else 0
                leaf_eval(plan, vals)
                if bound >= state["val"]:
                    return
                pick = free[0]
            j, k = pick
            for v in (0, 1):
                child = fix_s.copy()
                child[k, j] = v
                if all(abs(info.u[k, slow[j]] - v) <= _INT_TOL for info in infos):
                    visit(child, infos)
                else:
                    visit(child, None)

        visit(root_fix, root_infos)

    if state["plan"] is None:
        raise SolverFailure("two-stage weekly solve found no plan")
    plan = state["plan"].astype(int)
    fix_plan = _fix_from_plan(model, H, plan)
    per_scenario = []
    for m in range(n):
        _, ext = _branch_and_bound(problems[m], fix_plan)
        if ext is None:
            raise SolverFailure(f"scenario {m}: recourse unexpectedly infeasible")
        per_scenario.append(_make_solution(problems[m], ext))
    value = expectation([s.value for s in per_scenario], probs)
    return DhdWeekSolution(value, plan, tuple(per_scenario))
