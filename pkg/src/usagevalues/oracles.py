"""Independent verification oracles for the weekly solves.

Everything here trades speed for trustworthiness: commitments are
enumerated exhaustively instead of branch-and-bound, the continuous part is
solved with scipy's LP solver instead of the in-house simplex, and the LP
matrices are assembled by separate code. Guards keep the enumeration sizes
honest.

`wphr_week_toy` evaluates the nested weekly-planning / hourly-recourse
value on an explicit intra-week scenario tree: the slow plan is chosen
before anything is disclosed, fast commitments and continuous controls are
chosen per tree node knowing the uncertainties up to that hour.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import GuardExceeded
from .intraweek import CostToGo, expectation
from .pwl import convex_pieces
from .scenario_io import WeekBlock
from .system_model import HourlyUncertainty, SystemModel

_ENUM_GUARD = 1 << 16
_TREE_LP_GUARD = 20000


def _segments(ctg: CostToGo, lo: float, hi: float):
    """Raw ctg segments clipped to [lo, hi], as (seg_lo, seg_hi, slope, intercept)."""
    bp, vals = ctg.breakpoints, ctg.values
    out = []
    for j in range(bp.size - 1):
        s_lo, s_hi = float(bp[j]), float(bp[j + 1])
        a_lo, a_hi = max(s_lo, lo), min(s_hi, hi)
        if a_hi < a_lo:
            continue
        m = (vals[j + 1] - vals[j]) / (s_hi - s_lo)
        a = float(vals[j] - m * s_lo)
        out.append((a_lo, a_hi, float(m), a))
    if not out and lo <= hi:  # degenerate single-point window
        y = ctg(min(max(lo, ctg.lo), ctg.hi))
        out.append((lo, hi, 0.0, y))
    return out


def _startup_total(commit: np.ndarray, model: SystemModel) -> float:
    total = 0.0
    prev = np.zeros(model.num_units, dtype=int)
    for k in range(commit.shape[0]):
        for i, u in enumerate(model.units):
            total += u.startup_cost * max(int(commit[k, i]) - prev[i], 0)
        prev = commit[k]
    return total


def _continuous_value(x0: float, block: WeekBlock, commit: np.ndarray,
                      model: SystemModel, seg) -> float:
    """LP value for fixed commitments and one affine cost-to-go segment."""
    st = model.storage
    H = block.hours_per_week
    seg_lo, seg_hi, m_seg, a_seg = seg

    cols = []   # (cost, lo, hi)
    z_pos = {}
    for k in range(H):
        for i, u in enumerate(model.units):
            if commit[k, i] == 1 and block.avail[k, i] == 1:
                z_pos[(k, i)] = len(cols)
                cols.append((u.variable_cost, u.p_min, u.p_max))
    pump0 = len(cols)
    cols += [(m_seg * st.eta, 0.0, st.pump_max) for _ in range(H)]
    turb0 = len(cols)
    cols += [(-m_seg, 0.0, st.turb_max) for _ in range(H)]
    ens0 = len(cols)
    cols += [(model.ens_penalty, 0.0, None) for _ in range(H)]
    n = len(cols)

    A = []
    b = []
    for k in range(H):
        row = np.zeros(n)
        for i in range(model.num_units):
            if (k, i) in z_pos:
                row[z_pos[(k, i)]] = -1.0
        row[turb0 + k] = -1.0
        row[ens0 + k] = -1.0
        row[pump0 + k] = 1.0
        A.append(row)
        b.append(-float(block.demand[k]))
    for k in range(H):
        hi_k = st.x_max if k < H - 1 else seg_hi
        lo_k = st.x_min if k < H - 1 else seg_lo
        row = np.zeros(n)
        row[pump0:pump0 + k + 1] = st.eta
        row[turb0:turb0 + k + 1] = -1.0
        A.append(row)
        b.append(hi_k - x0)
        A.append(-row)
        b.append(x0 - lo_k)

    res = linprog(
        c=np.array([c for c, _, _ in cols]),
        A_ub=np.array(A), b_ub=np.array(b),
        bounds=[(lo, hi) for _, lo, hi in cols],
        method="highs",
    )
    if not res.success:
        return np.inf
    return float(res.fun) + a_seg + m_seg * x0


def _best_dispatch(x0: float, block: WeekBlock, commit: np.ndarray,
                   model: SystemModel, segs) -> float:
    base = _startup_total(commit, model)
    best = np.inf
    for seg in segs:
        v = _continuous_value(x0, block, commit, model, seg)
        if v < best:
            best = v
    return base + best


def _enumerate_commits(H: int, indices: Sequence[int], num_units: int):
    """All 0/1 matrices over the given unit columns, lexicographic order."""
    cells = [(i, k) for i in indices for k in range(H)]
    for bits in product((0, 1), repeat=len(cells)):
        mat = np.zeros((H, num_units), dtype=int)
        for (i, k), v in zip(cells, bits):
            mat[k, i] = v
        yield mat


def _window(x0, model, H, ctg):
    st = model.storage
    lo = max(st.x_min, x0 - H * st.turb_max, ctg.lo)
    hi = min(st.x_max, x0 + st.eta * H * st.pump_max, ctg.hi)
    if hi < lo:
        lo = hi = min(max(x0, st.x_min), st.x_max)
    return lo, hi


def brute_force_week(x: float, blocks, ctg: CostToGo, model: SystemModel,
                     structure: str, probs: Sequence[float] | None = None) -> float:
    """Exhaustive-enumeration value of the weekly problem.

    structure="hd": expectation over blocks of the per-block minimum over
    every commitment matrix. structure="dhd": minimum over slow plans of
    the expectation over blocks of the per-block best fast completion.
    """
    if isinstance(blocks, WeekBlock):
        blocks = [blocks]
    blocks = list(blocks)
    n = len(blocks)
    probs = [1.0 / n] * n if probs is None else list(probs)
    H = blocks[0].hours_per_week
    I = model.num_units
    if 2 ** (H * I) > _ENUM_GUARD:
        raise GuardExceeded(f"2^(H*units) = 2^{H * I} exceeds the enumeration guard")
    lo, hi = _window(x, model, H, ctg)
    segs = _segments(ctg, lo, hi)

    if structure == "hd":
        vals = []
        for block in blocks:
            best = np.inf
            for commit in _enumerate_commits(H, range(I), I):
                v = _best_dispatch(x, block, commit, model, segs)
                if v < best:
                    best = v
            vals.append(best)
        return expectation(vals, probs)

    if structure == "dhd":
        slow = model.slow_indices
        fast = model.fast_indices
        best_total = np.inf
        for plan in _enumerate_commits(H, slow, I):
            vals = []
            for block in blocks:
                best = np.inf
                for fast_part in _enumerate_commits(H, fast, I):
                    commit = plan + fast_part
                    v = _best_dispatch(x, block, commit, model, segs)
                    if v < best:
                        best = v
                vals.append(best)
            total = expectation(vals, probs)
            if total < best_total:
                best_total = total
        return best_total

    raise ValueError(f"unknown structure {structure!r}, expected 'hd' or 'dhd'")


# ---- nested weekly-planning / hourly-recourse oracle ------------------------

@dataclass(frozen=True)
class ScenarioTreeNode:
    """One intra-week branching node: this hour's realisation and children."""

    unc: HourlyUncertainty
    prob: float
    children: tuple["ScenarioTreeNode", ...] = ()


def tree_from_blocks(blocks: Sequence[WeekBlock],
                     probs: Sequence[float] | None = None):
    """Scenario tree induced by prefix-merging equal block histories.

    Blocks sharing the same hour-by-hour prefix share tree nodes, which is
    what gives hour-level information structure its bite: after an hour
    whose realisation is common to several blocks, the decision maker still
    does not know which block it lives in.
    """
    blocks = list(blocks)
    n = len(blocks)
    probs = [1.0 / n] * n if probs is None else list(probs)

    def build(items, hour, mass):
        groups: list[tuple[tuple, list]] = []
        for block, p in items:
            key = (float(block.demand[hour]), tuple(int(v) for v in block.avail[hour]))
            for gk, g in groups:
                if gk == key:
                    g.append((block, p))
                    break
            else:
                groups.append((key, [(block, p)]))
        nodes = []
        for (demand, avail), members in groups:
            gmass = sum(p for _, p in members)
            unc = HourlyUncertainty(demand, np.array(avail))
            if hour + 1 < blocks[0].hours_per_week:
                children = build(members, hour + 1, gmass)
            else:
                children = ()
            nodes.append(ScenarioTreeNode(unc, gmass / mass, tuple(children)))
        return tuple(nodes)

    return build(list(zip(blocks, probs)), 0, 1.0)


def _collect_tree(roots):
    """Flatten to (nodes, parent index, depth, path probability); -1 = root."""
    nodes, parents, depths, pathp = [], [], [], []

    def walk(node, parent, depth, mass):
        idx = len(nodes)
        nodes.append(node)
        parents.append(parent)
        depths.append(depth)
        pathp.append(mass * node.prob)
        for child in node.children:
            walk(child, idx, depth + 1, pathp[idx])
        return idx

    for r in roots:
        walk(r, -1, 0, 1.0)
    return nodes, parents, depths, pathp


def wphr_week_toy(x: float, roots: Sequence[ScenarioTreeNode], ctg: CostToGo,
                  model: SystemModel) -> float:
    """Exact nested value on an intra-week scenario tree, at toy scale only.

    The slow plan (outer minimisation) is enumerated; per slow plan the fast
    commitments are enumerated per tree node (hour-by-hour recourse); the
    continuous dispatch over the whole tree is one LP per combination of
    convex cost-to-go pieces at the leaves.
    """
    nodes, parents, depths, pathp = _collect_tree(roots)
    H = max(depths) + 1
    I = model.num_units
    st = model.storage
    if H > 3:
        raise GuardExceeded("toy oracle limited to weeks of at most 3 hours")
    if I > 2:
        raise GuardExceeded("toy oracle limited to at most 2 units")
    kids = {idx: [] for idx in range(len(nodes))}
    root_ids = []
    for idx, par in enumerate(parents):
        if par >= 0:
            kids[par].append(idx)
        else:
            root_ids.append(idx)
    if any(len(kids[i]) > 3 for i in kids) or len(root_ids) > 3:
        raise GuardExceeded("toy oracle limited to branching of at most 3 per hour")
    for d in range(H - 1):
        for idx, dep in enumerate(depths):
            if dep == d and not kids[idx]:
                raise ValueError("scenario tree must have uniform depth")
    for group in [root_ids] + [kids[i] for i in kids if kids[i]]:
        psum = sum(nodes[i].prob for i in group)
        if abs(psum - 1.0) > 1e-9:
            raise ValueError("sibling probabilities must sum to 1")

    leaves = [idx for idx, dep in enumerate(depths) if dep == H - 1]
    slow = model.slow_indices
    fast = model.fast_indices

    # per-leaf terminal windows and convex pieces
    lo, hi = _window(x, model, H, ctg)
    xs = np.array([lo] + [float(b) for b in ctg.breakpoints if lo < b < hi] + [hi]) \
        if hi > lo else np.array([lo])
    ys = np.array([ctg(min(max(v, ctg.lo), ctg.hi)) for v in xs])
    pieces = convex_pieces(xs, ys)

    n_plans = 2 ** (H * len(slow))
    n_fast = 2 ** (len(fast) * len(nodes))
    n_combo = len(pieces) ** len(leaves)
    if n_plans * n_fast * n_combo > _TREE_LP_GUARD:
        raise GuardExceeded("toy oracle workload guard exceeded")

    best_plan_val = np.inf
    for plan in _enumerate_commits(H, slow, I):
        for fast_bits in product((0, 1), repeat=len(fast) * len(nodes)):
            fast_commit = {}
            pos = 0
            for idx in range(len(nodes)):
                vec = np.zeros(I, dtype=int)
                for i in fast:
                    vec[i] = fast_bits[pos]
                    pos += 1
                fast_commit[idx] = vec
            commit_at = {}
            for idx in range(len(nodes)):
                vec = fast_commit[idx].copy()
                for i in slow:
                    vec[i] = plan[depths[idx], i]
                commit_at[idx] = vec

            # start-up constants along the tree
            const = 0.0
            for idx in range(len(nodes)):
                prev = (np.zeros(I, dtype=int) if parents[idx] < 0
                        else commit_at[parents[idx]])
                for i, u in enumerate(model.units):
                    const += pathp[idx] * u.startup_cost * max(
                        int(commit_at[idx][i]) - int(prev[i]), 0)

            for combo in product(range(len(pieces)), repeat=len(leaves)):
                v = _tree_lp(x, nodes, parents, pathp, leaves, commit_at,
                             model, [pieces[c] for c in combo])
                if v + const < best_plan_val:
                    best_plan_val = v + const
    return best_plan_val


def _tree_lp(x0, nodes, parents, pathp, leaves, commit_at, model, leaf_pieces):
    """Continuous dispatch LP over the whole tree for fixed commitments."""
    st = model.storage
    I = model.num_units
    cols = []
    z_pos = {}
    pump_pos = {}
    turb_pos = {}
    ens_pos = {}
    t_pos = {}
    for idx, node in enumerate(nodes):
        for i, u in enumerate(model.units):
            if commit_at[idx][i] == 1 and node.unc.availability[i] == 1:
                z_pos[(idx, i)] = len(cols)
                cols.append((pathp[idx] * u.variable_cost, u.p_min, u.p_max))
        pump_pos[idx] = len(cols)
        cols.append((0.0, 0.0, st.pump_max))
        turb_pos[idx] = len(cols)
        cols.append((0.0, 0.0, st.turb_max))
        ens_pos[idx] = len(cols)
        cols.append((pathp[idx] * model.ens_penalty, 0.0, None))
    for leaf in leaves:
        t_pos[leaf] = len(cols)
        cols.append((pathp[leaf], None, None))
    n = len(cols)

    def path(idx):
        out = []
        while idx >= 0:
            out.append(idx)
            idx = parents[idx]
        return out[::-1]

    A, b = [], []
    for idx, node in enumerate(nodes):
        row = np.zeros(n)
        for i in range(I):
            if (idx, i) in z_pos:
                row[z_pos[(idx, i)]] = -1.0
        row[turb_pos[idx]] = -1.0
        row[ens_pos[idx]] = -1.0
        row[pump_pos[idx]] = 1.0
        A.append(row)
        b.append(-float(node.unc.residual_demand))
        anc = path(idx)
        stock_row = np.zeros(n)
        for a_idx in anc:
            stock_row[pump_pos[a_idx]] = st.eta
            stock_row[turb_pos[a_idx]] = -1.0
        A.append(stock_row)
        b.append(st.x_max - x0)
        A.append(-stock_row)
        b.append(x0 - st.x_min)
    for j, leaf in enumerate(leaves):
        p_lo, p_hi, m_arr, a_arr = leaf_pieces[j]
        anc = path(leaf)
        stock_row = np.zeros(n)
        for a_idx in anc:
            stock_row[pump_pos[a_idx]] = st.eta
            stock_row[turb_pos[a_idx]] = -1.0
        A.append(stock_row)
        b.append(p_hi - x0)
        A.append(-stock_row)
        b.append(x0 - p_lo)
        for m_j, a_j in zip(m_arr, a_arr):
            row = m_j * stock_row.copy()
            row[t_pos[leaf]] = -1.0
            A.append(row)
            b.append(-a_j - m_j * x0)

    res = linprog(
        c=np.array([c for c, _, _ in cols]),
        A_ub=np.array(A), b_ub=np.array(b),
        bounds=[(lo, hi) for _, lo, hi in cols],
        method="highs",
    )
    if not res.success:
        return np.inf
    return float(res.fun)
