"""Dense bounded-variable simplex for the small weekly dispatch LPs.

Solves   min c.x   s.t.  A x <= b,  lo <= x <= hi

with finite lower bounds and possibly infinite upper bounds. The weekly
subproblems stay below ~100 rows and ~250 columns, so a dense revised
simplex with an explicit basis inverse is both fast enough and fully
deterministic: Dantzig pricing with lowest-index tie-breaking, a switch to
Bland's rule after a run of degenerate pivots, and periodic refactorisation
for numerical hygiene. Determinism of the pivot sequence is what makes
whole-table reruns bit-identical.

The iteration loop is written as plain element-wise code and compiled with
numba when available; interpreted execution follows the exact same
arithmetic, only slower.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import SolverFailure

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_PIV_TOL = 1e-9    # smaller direction entries are treated as noise
_FEAS_REL = 1e-9   # Harris ratio-test relaxation (per-pivot bound overshoot)
_REFACTOR_EVERY = 100
_DEGEN_BEFORE_BLAND = 60

_STATUS_OPTIMAL = 0
_STATUS_UNBOUNDED = 1
_STATUS_ITER_LIMIT = 2


class LpSolution(NamedTuple):
    status: str
    x: np.ndarray | None
    value: float


@njit(cache=True)
def _run_core(M, b, lo, hi, costs, x, basis, in_basis, at_upper, Binv,
              first_art, tol_r, max_iter):
    """Optimise `costs` in place from the current basis; returns a status code."""
    m, N = M.shape
    bland = False
    degen = 0
    since_refactor = 0
    y = np.zeros(m)
    d = np.zeros(m)
    for _ in range(max_iter):
        # duals: y = costs[basis] @ Binv
        for c_i in range(m):
            acc = 0.0
            for r_i in range(m):
                cb = costs[basis[r_i]]
                if cb != 0.0:
                    acc += cb * Binv[r_i, c_i]
            y[c_i] = acc

        # entering variable: most violating reduced cost (first index on ties
        # or in Bland mode)
        e = -1
        sigma = 1.0
        best_v = 0.0
        for j in range(N):
            if in_basis[j] or hi[j] - lo[j] <= 0.0:
                continue
            rj = costs[j]
            for r_i in range(m):
                a = M[r_i, j]
                if a != 0.0:
                    rj -= y[r_i] * a
            if at_upper[j]:
                v = rj if rj > tol_r else 0.0
                s = -1.0
            else:
                v = -rj if rj < -tol_r else 0.0
                s = 1.0
            if v > 0.0:
                if bland:
                    e = j
                    sigma = s
                    break
                if v > best_v:
                    best_v = v
                    e = j
                    sigma = s
        if e < 0:
            return _STATUS_OPTIMAL

        # direction of basic values: x_B -> x_B - sigma * t * d
        for r_i in range(m):
            acc = 0.0
            for c_i in range(m):
                a = M[c_i, e]
                if a != 0.0:
                    acc += Binv[r_i, c_i] * a
            d[r_i] = acc

        # Harris-style two-pass ratio test: pass 1 finds the smallest ratio
        # under a slightly relaxed bound, pass 2 picks the numerically
        # largest pivot among blockers within that relaxed step, so we never
        # divide the basis inverse by a near-zero element.
        t_own = hi[e] - lo[e]
        t_relaxed = np.inf
        for p in range(m):
            sd = sigma * d[p]
            bv = basis[p]
            if sd > _PIV_TOL:
                ratio = (x[bv] - lo[bv] + _FEAS_REL) / sd
            elif sd < -_PIV_TOL and hi[bv] != np.inf:
                ratio = (hi[bv] - x[bv] + _FEAS_REL) / (-sd)
            else:
                continue
            if ratio < 0.0:
                ratio = 0.0
            if ratio < t_relaxed:
                t_relaxed = ratio
        t_row = np.inf
        l = -1
        best_piv = 0.0
        if t_relaxed != np.inf:
            for p in range(m):
                sd = sigma * d[p]
                bv = basis[p]
                if sd > _PIV_TOL:
                    ratio = (x[bv] - lo[bv]) / sd
                elif sd < -_PIV_TOL and hi[bv] != np.inf:
                    ratio = (hi[bv] - x[bv]) / (-sd)
                else:
                    continue
                if ratio < 0.0:
                    ratio = 0.0
                if ratio <= t_relaxed:
                    asd = sd if sd > 0.0 else -sd
                    if (asd > best_piv
                            or (asd == best_piv and l >= 0 and basis[p] < basis[l])):
                        best_piv = asd
                        l = p
                        t_row = ratio
        t = t_own if t_own <= t_row else t_row
        if t == np.inf:
            return _STATUS_UNBOUNDED

        if t <= _PIV_TOL:
            degen += 1
            if degen > _DEGEN_BEFORE_BLAND:
                bland = True
        else:
            degen = 0

        if t > 0.0:
            x[e] += sigma * t
            for p in range(m):
                bv = basis[p]
                x[bv] -= t * sigma * d[p]

        if t_own <= t_row:
            # entering variable runs to its other bound: plain flip
            at_upper[e] = not at_upper[e]
            x[e] = hi[e] if at_upper[e] else lo[e]
            continue

        leaving = basis[l]
        if sigma * d[l] > 0.0:
            x[leaving] = lo[leaving]
            at_upper[leaving] = False
        else:
            x[leaving] = hi[leaving]
            at_upper[leaving] = True
        in_basis[leaving] = False
        if leaving >= first_art:
            # never let an artificial come back
            lo[leaving] = 0.0
            hi[leaving] = 0.0
            x[leaving] = 0.0
        basis[l] = e
        in_basis[e] = True

        piv = d[l]
        for c_i in range(m):
            Binv[l, c_i] /= piv
        for r_i in range(m):
            if r_i == l:
                continue
            f = d[r_i]
            if f != 0.0:
                for c_i in range(m):
                    Binv[r_i, c_i] -= f * Binv[l, c_i]

        since_refactor += 1
        if t > 1e4:
            since_refactor = _REFACTOR_EVERY  # large steps amplify drift
        if since_refactor >= _REFACTOR_EVERY:
            since_refactor = 0
            B = np.empty((m, m))
            for p in range(m):
                bv = basis[p]
                for r_i in range(m):
                    B[r_i, p] = M[r_i, bv]
            Binv[:, :] = np.linalg.inv(B)
            rhs = b.copy()
            for j in range(N):
                if not in_basis[j] and x[j] != 0.0:
                    for r_i in range(m):
                        a = M[r_i, j]
                        if a != 0.0:
                            rhs[r_i] -= a * x[j]
            for p in range(m):
                acc = 0.0
                for c_i in range(m):
                    acc += Binv[p, c_i] * rhs[c_i]
                x[basis[p]] = acc
    return _STATUS_ITER_LIMIT


class _Simplex:
    def __init__(self, c, A, b, lo, hi, tol, start_at_upper=None):
        m, n = A.shape
        self.m = m
        self.n = n
        self.b = b
        self.tol = tol
        self.M = np.hstack([A, np.eye(m)])
        self.lo = np.concatenate([lo, np.zeros(m)])
        self.hi = np.concatenate([hi, np.full(m, np.inf)])
        start = lo.copy()
        if start_at_upper is not None:
            start = np.where(start_at_upper & np.isfinite(hi), hi, start)
        x = np.concatenate([start, np.zeros(m)])
        x[n:] = b - A @ start
        self.x = x
        self.basis = np.arange(n, n + m)
        self.in_basis = np.zeros(n + m, dtype=bool)
        self.in_basis[n:] = True
        self.at_upper = np.zeros(n + m, dtype=bool)
        if start_at_upper is not None:
            self.at_upper[:n] = start_at_upper & np.isfinite(hi)
        self.Binv = np.eye(m)
        self.first_art = n + m  # columns >= this are artificials

    def _add_artificials(self) -> bool:
        """Patch rows whose slack starts negative with artificial columns."""
        xb = self.x[self.basis]
        bad = np.where(xb < -_PIV_TOL)[0]
        if bad.size == 0:
            return False
        k = bad.size
        ntot = self.M.shape[1]
        art = np.zeros((self.m, k))
        art[bad, np.arange(k)] = -1.0
        self.M = np.hstack([self.M, art])
        self.lo = np.concatenate([self.lo, np.zeros(k)])
        self.hi = np.concatenate([self.hi, np.full(k, np.inf)])
        self.in_basis = np.concatenate([self.in_basis, np.zeros(k, dtype=bool)])
        self.at_upper = np.concatenate([self.at_upper, np.zeros(k, dtype=bool)])
        self.x = np.concatenate([self.x, np.zeros(k)])
        for j, pos in enumerate(bad):
            slack = self.basis[pos]
            artv = ntot + j
            self.x[artv] = -self.x[slack]
            self.x[slack] = 0.0
            self.in_basis[slack] = False
            self.basis[pos] = artv
            self.in_basis[artv] = True
            self.Binv[pos, pos] = -1.0
        return True

    def run(self, costs, max_iter):
        rtol = self.tol * max(1.0, float(np.max(np.abs(costs))) if costs.size else 1.0)
        status = _run_core(self.M, self.b, self.lo, self.hi, costs, self.x,
                           self.basis, self.in_basis, self.at_upper, self.Binv,
                           self.first_art, rtol, max_iter)
        if status == _STATUS_UNBOUNDED:
            raise SolverFailure("unbounded linear program")
        if status == _STATUS_ITER_LIMIT:
            raise SolverFailure("simplex iteration limit exceeded")

    def drive_out_artificials(self, max_iter):
        """After phase 1, pivot remaining zero-valued artificials out of the basis."""
        for pos in range(self.m):
            if self.basis[pos] < self.first_art:
                continue
            row = self.Binv[pos] @ self.M[:, : self.first_art]
            cand = np.where((~self.in_basis[: self.first_art]) & (np.abs(row) > 1e-9))[0]
            if cand.size == 0:
                # redundant row: pin the artificial at zero and leave it basic
                art = self.basis[pos]
                self.lo[art] = self.hi[art] = 0.0
                continue
            e = int(cand[0])
            d = self.Binv @ self.M[:, e]
            art = self.basis[pos]
            self.in_basis[art] = False
            self.lo[art] = self.hi[art] = 0.0
            self.x[art] = 0.0
            self.basis[pos] = e
            self.in_basis[e] = True
            piv = d[pos]
            bl = self.Binv[pos] / piv
            self.Binv -= np.outer(d, bl)
            self.Binv[pos] = bl


def solve_lp(c, A, b, lo, hi, tol: float = 1e-9, max_iter: int = 20000,
             start_at_upper=None) -> LpSolution:
    """Solve min c.x s.t. A x <= b, lo <= x <= hi.

    Lower bounds must be finite. `start_at_upper` marks columns whose
    initial nonbasic position is the (finite) upper bound instead of the
    lower one; a caller who knows a feasible corner this way saves the
    whole first phase. Returns an INFEASIBLE solution (x=None) when the
    constraints admit no point; raises SolverFailure on iteration overrun
    or an unbounded objective, which the weekly problems exclude by
    construction.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = c.size
    if A.size == 0:
        A = A.reshape(0, n)
    if not np.all(np.isfinite(lo)):
        raise ValueError("finite lower bounds required")
    if np.any(lo > hi):
        raise ValueError("lower bound above upper bound")

    if A.shape[0] == 0:
        # pure box problem
        if np.any((c < 0) & ~np.isfinite(hi)):
            raise SolverFailure("unbounded linear program")
        x = np.where(c < 0, hi, lo)
        return LpSolution(OPTIMAL, x, float(c @ x))

    sx = _Simplex(c, A, b, lo, hi, tol, start_at_upper)
    if sx._add_artificials():
        phase1 = np.zeros(sx.M.shape[1])
        phase1[sx.first_art:] = 1.0
        sx.run(phase1, max_iter)
        resid = float(np.sum(sx.x[sx.first_art:]))
        if resid > 1e-9 * max(1.0, float(np.max(np.abs(b)))):
            return LpSolution(INFEASIBLE, None, np.inf)
        sx.drive_out_artificials(max_iter)
        # pin every artificial so phase 2 cannot move one
        sx.lo[sx.first_art:] = 0.0
        sx.hi[sx.first_art:] = 0.0
    costs = np.zeros(sx.M.shape[1])
    costs[: n] = c
    sx.run(costs, max_iter)
    x = sx.x[:n].copy()
    return LpSolution(OPTIMAL, x, float(c @ x))
