"""Minimal-norm interpolation and related extremal problems.

Solves, over a multiply connected domain with harmonic-measure machinery:

* minimal sup-norm interpolation f(zeta_j) = tau_j (plain Pick-Nevanlinna),
* Hermite interpolation of values and consecutive derivatives,
* the Schwarz problem max |h'(0)| over inner functions with h(0) = 0,
* maximization of ||f(A)|| over inner functions for a matrix A,

together with the disk Pick-matrix oracle, feasibility classification and
Lipschitz perturbation bounds.

The extremal function factors as m* times an inner function of bounded
order.  The search parametrizes the inner factor by its free zeros, with
forced zeros at nodes carrying zero data, enumerates the admissible integer
winding vectors, and maximizes the interpolation scale c = 1/m* under
equal-ratio constraints by a multistart augmented-Lagrangian scheme.  Phase
and scale unknowns are eliminated analytically: all constraints are ratios
of the gauge-free products, so only the zero positions are optimized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .inner import InnerError, InnerFunction, assemble_inner, order_of
from .laplace import MeasureSet

__all__ = [
    "SolveError",
    "InterpolationProblem",
    "SolverConfig",
    "SolveReport",
    "solve_min_norm",
    "solve_schwarz",
    "solve_hermite",
    "maximize_matrix_norm",
    "pick_min_m_disk",
    "feasibility",
    "lipschitz_bounds",
]


class SolveError(RuntimeError):
    """Solver failure (no feasible start, stall, or invalid problem)."""


@dataclass
class InterpolationProblem:
    """Nodes with value lists; plain problems carry one value per node."""

    zetas: np.ndarray
    data: list

    def __post_init__(self):
        self.zetas = np.asarray(self.zetas, dtype=complex)
        self.data = [np.asarray(np.atleast_1d(d), dtype=complex)
                     for d in self.data]
        r = len(self.zetas)
        if r == 0 or len(self.data) != r:
            raise SolveError("need one data list per node")
        if r > 1:
            dist = np.abs(self.zetas[:, None] - self.zetas[None, :])
            np.fill_diagonal(dist, np.inf)
            if dist.min() < 1e-10:
                raise SolveError("nodes must be pairwise distinct")
        if all(np.all(d == 0) for d in self.data):
            raise SolveError("data must not be all zero")

    @property
    def r(self) -> int:
        return len(self.zetas)

    @property
    def sigma1(self) -> int:
        return sum(len(d) for d in self.data)

    @property
    def plain(self) -> bool:
        return all(len(d) == 1 for d in self.data)

    @property
    def taus(self) -> np.ndarray:
        if not self.plain:
            raise SolveError("taus is defined for plain problems only")
        return np.array([d[0] for d in self.data])

    @classmethod
    def plain_problem(cls, zetas, taus):
        return cls(np.asarray(zetas, dtype=complex),
                   [[t] for t in np.asarray(taus, dtype=complex)])


@dataclass
class SolverConfig:
    starts: int = 12
    seed: int = 0
    tol_solve: float = 1e-9
    tol_integrality: float = 1e-6
    tol_equality: float = 1e-6      # feasibility band around m* = 1
    order_budget: int | None = None
    guard: float | None = None
    outer_iterations: int = 14
    inner_iterations: int = 200
    certificate_tol: float = 1e-4
    probe_count: int = 20
    agreement_window: float = 1e-6


@dataclass
class SolveReport:
    m_star: float
    h: InnerFunction
    order: int
    lam: complex
    rho: np.ndarray
    zeros: list                     # (point, multiplicity)
    objective: float                # log c*
    certificate: object = None
    diagnostics: dict = field(default_factory=dict)
    schwarz_c: float | None = None


# -- gauge-free evaluation machinery ----------------------------------------


class _Workspace:
    """Precomputed per-problem data for fast objective evaluations.

    Evaluation points are the nonzero-data nodes plus, for Hermite data,
    small circles around nodes needing derivatives.  All atom factors are
    evaluated without their phase gauges; gauges cancel in the constraint
    ratios and have unit modulus, so neither c nor the ratio constraints
    are affected.
    """

    def __init__(self, measures: MeasureSet, zetas, guard,
                 circle_nodes=(), circle_counts=32):
        self.measures = measures
        self.domain = measures.domain
        self.k = measures.k
        self.zetas = np.asarray(zetas, dtype=complex)
        self.guard = guard
        # evaluation grid: the nodes themselves, then derivative circles
        pts = [self.zetas]
        self.circles = {}
        for j in circle_nodes:
            zj = self.zetas[j]
            rad = 0.45 * self.domain.distance_to_boundary(zj)
            theta = 2 * np.pi * np.arange(circle_counts) / circle_counts
            circ = zj + rad * np.exp(1j * theta)
            self.circles[j] = (len(np.concatenate(pts)), rad, circle_counts)
            pts.append(circ)
        self.eval_pts = np.concatenate(pts)
        # measure completions at the fixed evaluation points
        if self.k:
            self.s_meas = np.array(
                [measures.omegas[j + 1].completion(self.eval_pts)
                 for j in range(self.k)])
        else:
            self.s_meas = np.zeros((0, len(self.eval_pts)), dtype=complex)
        # precomputed linear map: Dirichlet data -> completion at eval_pts
        smap = measures.solver.data_to_completion_map()
        ker = (measures.solver.cauchy_weight[None, :]
               / (self.domain.nodes[None, :] - self.eval_pts[:, None]))
        self._emap = (ker / ker.sum(axis=1)[:, None]) @ smap
        self._trace_all = np.concatenate(self.domain._trace_pts)

    def atom_factor(self, p: complex):
        """Gauge-free atom values at the evaluation grid and omega(p)."""
        m = self.measures
        if self.k:
            om = m.omega_vector(np.array([p]))[:, 0]
            c = -m.inverse @ om
        else:
            om = np.zeros(0)
            c = np.zeros(0)
        with np.errstate(divide="ignore"):
            data = np.log(np.abs(self.domain.nodes - p)) / (2 * np.pi)
        data = np.nan_to_num(data, neginf=0.0)
        w = 2 * np.pi * ((c @ self.s_meas if self.k else 0.0)
                         - self._emap @ data)
        return (self.eval_pts - p) * np.exp(w), om

    def atom_factor_grad(self, p: complex):
        """Atom values plus d log phi / d(x, y) rows at the grid.

        Returns (vals, om, dlx, dly, domx, domy) where dlx[e] is the
        derivative of log phi_p(eval_pts[e]) with respect to Re p and dly
        with respect to Im p; domx, domy are the matching derivatives of
        omega(p).
        """
        m = self.measures
        nodes = self.domain.nodes
        with np.errstate(divide="ignore", invalid="ignore"):
            q = 1.0 / (nodes - p)
            cols = np.column_stack([np.log(np.abs(nodes - p)),
                                    -q.real, q.imag]) / (2 * np.pi)
        ed = self._emap @ np.nan_to_num(cols, nan=0.0, posinf=0.0,
                                        neginf=0.0)
        if self.k:
            om = m.omega_vector(np.array([p]))[:, 0]
            a = m.omega_grads(np.array([p]))[:, 0]
            domx = a.real
            domy = -a.imag
            ninv = m.inverse
            w = 2 * np.pi * ((-ninv @ om) @ self.s_meas - ed[:, 0])
            dwx = 2 * np.pi * ((-ninv @ domx) @ self.s_meas - ed[:, 1])
            dwy = 2 * np.pi * ((-ninv @ domy) @ self.s_meas - ed[:, 2])
        else:
            om = domx = domy = np.zeros(0)
            w = -2 * np.pi * ed[:, 0]
            dwx = -2 * np.pi * ed[:, 1]
            dwy = -2 * np.pi * ed[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.nan_to_num(1.0 / (self.eval_pts - p),
                                nan=0.0, posinf=0.0, neginf=0.0)
        vals = (self.eval_pts - p) * np.exp(w)
        dlx = -inv + dwx
        dly = -1j * inv + dwy
        return vals, om, dlx, dly, domx, domy

    def atom_log_deriv_at(self, p: complex, at: complex) -> float:
        """log |phi_p'(p)| when evaluated at its own zero (at == p)."""
        m = self.measures
        if self.k:
            om = m.omega_vector(np.array([p]))[:, 0]
            c = -m.inverse @ om
        else:
            c = np.zeros(0)
        data = np.log(np.abs(self.domain.nodes - p)) / (2 * np.pi)
        reg = m.solver.solve(data)
        w = 0.0 + 0.0j
        for j in range(self.k):
            w += c[j] * m.omegas[j + 1].completion(np.array([at]))[0]
        w -= reg.completion(np.array([at]))[0]
        return float(2 * np.pi * np.real(w))

    def unit_values(self, s_vec: np.ndarray):
        """Gauge-free g_rho values at the grid for rho = -s_vec."""
        if self.k == 0:
            return np.ones(len(self.eval_pts), dtype=complex)
        rho = -np.asarray(s_vec, dtype=int)
        c = -self.measures.inverse @ rho
        out = np.exp(2 * np.pi * (c @ self.s_meas))
        for l, b in enumerate(self.measures.solver.hole_centers):
            if rho[l]:
                out = out * (self.eval_pts - b) ** rho[l]
        return out

    def containment_penalty(self, pts: np.ndarray) -> float:
        """Smooth penalty keeping free zeros interior with a guard margin."""
        return self.containment_penalty_grad(pts)[0]

    def containment_penalty_grad(self, pts: np.ndarray):
        """Penalty value and its gradient in the (x1, y1, x2, y2, ...) order."""
        n = len(pts)
        g = np.zeros(2 * n)
        if n == 0:
            return 0.0, g
        diffs = pts[:, None] - self._trace_all[None, :]
        ad = np.abs(diffs)
        jmin = ad.argmin(axis=1)
        rows = np.arange(n)
        d = ad[rows, jmin]
        inside = np.abs(self.domain.winding(pts) - 1.0) < 0.25
        sgn = np.where(inside, 1.0, -1.0)
        gap = np.maximum(self.guard - sgn * d, 0.0)
        # dimensionless in the guard width so a full violation (a point on
        # the boundary) always dominates spurious near-boundary objective
        # gains caused by quadrature breakdown
        scale = 50.0 / max(self.guard, 1e-12) ** 2
        pen = float(scale * np.sum(gap**2))
        nhat = diffs[rows, jmin] / np.maximum(d, 1e-300)
        coef = -2.0 * scale * gap * sgn
        g[0::2] = coef * nhat.real
        g[1::2] = coef * nhat.imag
        return pen, g

    def derivatives(self, values: np.ndarray, j: int, orders: int
                    ) -> np.ndarray:
        """u^(s)(zeta_j), s = 0..orders-1, from the circle samples."""
        start, rad, cnt = self.circles[j]
        circ = values[start:start + cnt]
        theta = 2 * np.pi * np.arange(cnt) / cnt
        out = np.empty(orders, dtype=complex)
        fact = 1.0
        for s in range(orders):
            if s:
                fact *= s
            out[s] = fact * np.mean(circ * np.exp(-1j * s * theta)) / rad**s
        return out


def _auglag(fun, x0, n_cons, cfg: SolverConfig, strict=False):
    """Augmented Lagrangian with L-BFGS-B inner solves.

    fun(x) returns (objective, constraints).  Returns the final point, the
    raw objective, and the final constraint violation.  With strict=True
    the outer loop never stops on stagnation, only on tol_solve.
    """
    x = np.asarray(x0, dtype=float).copy()
    if len(x) == 0 or n_cons == 0 and len(x) == 0:
        obj, cons = fun(x)
        return x, obj, float(np.abs(cons).max()) if n_cons else 0.0
    lam = np.zeros(n_cons)
    mu = 10.0
    prev_viol = np.inf
    has_grad = hasattr(fun, "value_and_grad")
    for _ in range(cfg.outer_iterations):
        if has_grad:
            def lagrangian(xx):
                obj, cons, gobj, jac = fun.value_and_grad(xx)
                if n_cons:
                    mult = lam + mu * cons
                    obj = obj + lam @ cons + 0.5 * mu * (cons @ cons)
                    gobj = gobj + mult @ jac
                return obj, gobj
        else:
            def lagrangian(xx):
                obj, cons = fun(xx)
                if n_cons:
                    obj = obj + lam @ cons + 0.5 * mu * (cons @ cons)
                return obj

        res = minimize(lagrangian, x, method="L-BFGS-B", jac=has_grad,
                       options={"maxiter": cfg.inner_iterations,
                                "ftol": 1e-15, "gtol": 1e-13})
        x = res.x
        obj, cons = fun(x)
        viol = float(np.abs(cons).max()) if n_cons else 0.0
        if viol < cfg.tol_solve:
            break
        if n_cons:
            # stop once the violation stagnates at an acceptable level
            if not strict and viol < 1e3 * cfg.tol_solve \
                    and viol > 0.7 * prev_viol:
                break
            lam = lam + mu * cons
            if viol > 0.25 * prev_viol:
                mu = min(mu * 6.0, 1e9)
            prev_viol = min(prev_viol, viol)
    obj, cons = fun(x)
    return x, obj, float(np.abs(cons).max()) if n_cons else 0.0


def _rho_candidates(k: int, n: int):
    """Admissible s = -rho vectors: s_j >= 1, sum s_j <= n - 1."""
    if k == 0:
        yield np.zeros(0, dtype=int)
        return
    if n < k + 1:
        return
    for total in range(k, n):
        for cuts in itertools.combinations(range(1, total), k - 1):
            parts = np.diff(np.concatenate([[0], cuts, [total]]))
            yield parts.astype(int)


def _random_interior(domain, rng, count, guard):
    """Rejection-sample interior points clear of the boundary."""
    lo_x, hi_x = domain.nodes.real.min(), domain.nodes.real.max()
    lo_y, hi_y = domain.nodes.imag.min(), domain.nodes.imag.max()
    out = []
    for _ in range(200 * count + 50):
        z = complex(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
        if (domain.is_interior(z)[0]
                and domain.distance_to_boundary(z) > 1.2 * guard):
            out.append(z)
            if len(out) == count:
                return np.array(out)
    raise SolveError("interior sampling failed")


@dataclass
class _Candidate:
    n: int
    s_vec: np.ndarray
    logc: float
    x: np.ndarray
    viol: float
    fun: object = None


def _enumerate_and_optimize(ws: _Workspace, cfg: SolverConfig,
                            fun_factory, n_range, n_forced,
                            direct_n0=None, descending=False):
    """Shared candidate loop: orders x winding vectors x multistarts.

    fun_factory(n_free, s_vec) returns the augmented-Lagrangian objective
    for that candidate.  Returns the accepted candidate and the list of all
    converged runs (for the multistart-agreement diagnostic).
    """
    rng = np.random.default_rng(cfg.seed)
    runs = []
    best = None
    orders = list(n_range)
    if descending:
        orders = orders[::-1]
    for n in orders:
        if n == 0:
            if direct_n0 is not None:
                logc = direct_n0()
                if logc is not None:
                    cand = _Candidate(0, np.zeros(ws.k, dtype=int),
                                      logc, np.zeros(0), 0.0)
                    runs.append(cand)
                    if best is None or cand.logc > best.logc + 1e-7:
                        best = cand
            continue
        n_free = n - n_forced
        if n_free < 0:
            continue
        for s_vec in _rho_candidates(ws.k, n):
            fun = fun_factory(n_free, s_vec)
            if fun is None:
                continue
            if n_free == 0:
                x, obj, viol = _auglag(fun, np.zeros(0), fun.n_cons, cfg)
                results = [(x, obj, viol)]
            else:
                results = []
                for start in range(cfg.starts):
                    x0_pts = fun.seed(rng, start)
                    x0 = np.empty(2 * n_free)
                    x0[0::2] = x0_pts.real
                    x0[1::2] = x0_pts.imag
                    x, obj, viol = _auglag(fun, x0, fun.n_cons, cfg)
                    results.append((x, obj, viol))
            for x, obj, viol in results:
                if viol > cfg.tol_equality or not np.isfinite(obj):
                    continue
                cand = _Candidate(n, s_vec, -obj, x, viol, fun)
                runs.append(cand)
                if best is None or cand.logc > best.logc + 1e-7:
                    best = cand
    if best is None:
        raise SolveError("no feasible candidate found in the order range")
    # polish the winner without the stagnation stop for a tighter residual
    if best.viol > cfg.tol_solve and len(best.x) and best.fun is not None:
        x, obj, viol = _auglag(best.fun, best.x, best.fun.n_cons, cfg,
                               strict=True)
        if viol <= best.viol and np.isfinite(obj):
            best = _Candidate(best.n, best.s_vec, -obj, x, viol, best.fun)
    return best, runs


class _RatioObjective:
    """Objective/constraints for one (order, winding) candidate."""

    def __init__(self, ws, cfg, zetas, s_vec, n_free, forced_product,
                 forced_osum, constraints_spec, ref_spec, seeds_hint):
        self.ws = ws
        self.cfg = cfg
        self.s_vec = np.asarray(s_vec, dtype=int)
        self.n_free = n_free
        self.base = ws.unit_values(s_vec) * forced_product
        self.forced_osum = forced_osum
        self.constraints_spec = constraints_spec   # list of (j, s, tau, scale)
        self.ref_spec = ref_spec                   # (j, s, tau)
        self.seeds_hint = seeds_hint
        self.n_cons = 2 * len(constraints_spec) + ws.k

    def seed(self, rng, start_index):
        hints = self.seeds_hint
        if start_index < len(hints):
            base = np.asarray(hints[start_index], dtype=complex)
            if len(base) == self.n_free:
                return base
        return _random_interior(self.ws.domain, rng, self.n_free,
                                self.ws.guard)

    def _values(self, pts, want_grad):
        u = self.base.copy()
        osum = self.forced_osum.copy()
        nf = len(pts)
        dlog = np.zeros((2 * nf, len(u)), dtype=complex) if want_grad else None
        dosum = np.zeros((2 * nf, self.ws.k)) if want_grad else None
        for i, p in enumerate(pts):
            if want_grad:
                vals, om, dlx, dly, domx, domy = self.ws.atom_factor_grad(p)
                dlog[2 * i] = dlx
                dlog[2 * i + 1] = dly
                dosum[2 * i] = domx
                dosum[2 * i + 1] = domy
            else:
                vals, om = self.ws.atom_factor(p)
            u = u * vals
            if self.ws.k:
                osum = osum + om
        return u, osum, dlog, dosum

    def _terms(self, u, j, s, dlog=None):
        if s == 0 and j not in self.ws.circles:
            if dlog is None:
                return u[j], None
            return u[j], u[j] * dlog[:, j]
        val = self.ws.derivatives(u, j, s + 1)[s]
        if dlog is None:
            return val, None
        dval = np.array([self.ws.derivatives(u * dlog[t], j, s + 1)[s]
                         for t in range(dlog.shape[0])])
        return val, dval

    def _assemble(self, x, want_grad):
        pts = x[0::2] + 1j * x[1::2]
        dim = 2 * len(pts)
        u, osum, dlog, dosum = self._values(pts, want_grad)
        jr, sr, tau_r = self.ref_spec
        u_ref, du_ref = self._terms(u, jr, sr, dlog)
        if want_grad:
            pen, dpen = self.ws.containment_penalty_grad(pts)
        else:
            pen = self.ws.containment_penalty(pts)
        if not np.isfinite(u_ref) or abs(u_ref) < 1e-300:
            if want_grad:
                return (1e6 + pen, np.zeros(self.n_cons), dpen,
                        np.zeros((self.n_cons, dim)))
            return 1e6 + pen, np.zeros(self.n_cons)
        ratio_ref = u_ref / tau_r
        cons = np.empty(self.n_cons)
        jac = np.zeros((self.n_cons, dim)) if want_grad else None
        idx = 0
        for (j, s, tau, scale) in self.constraints_spec:
            u_js, du_js = self._terms(u, j, s, dlog)
            factor = tau if tau != 0 else scale
            den = ratio_ref * factor
            val = u_js / den - (1.0 if tau != 0 else 0.0)
            cons[idx] = val.real
            cons[idx + 1] = val.imag
            if want_grad:
                dval = du_js / den - u_js * (du_ref * factor / tau_r) / den**2
                jac[idx] = dval.real
                jac[idx + 1] = dval.imag
            idx += 2
        for jj in range(self.ws.k):
            cons[idx + jj] = osum[jj] - self.s_vec[jj]
            if want_grad:
                jac[idx + jj] = dosum[:, jj]
        obj = -np.log(abs(ratio_ref)) + pen
        if want_grad:
            gobj = -np.real(du_ref / u_ref) + dpen
            return obj, cons, gobj, jac
        return obj, cons

    def __call__(self, x):
        return self._assemble(x, False)

    def value_and_grad(self, x):
        return self._assemble(x, True)


def _hermite_structure(problem: InterpolationProblem):
    """Forced multiplicities, constraint list, and the reference entry."""
    forced = []            # (node index, multiplicity)
    cons = []              # (j, s, tau, scale)
    ref = None
    for j, d in enumerate(problem.data):
        nu = 0
        while nu < len(d) and d[nu] == 0:
            nu += 1
        if nu:
            forced.append((j, nu))
        scale = max(1.0, float(np.abs(d).max()))
        for s in range(nu, len(d)):
            if ref is None and d[s] != 0:
                ref = (j, s, d[s])
            else:
                cons.append((j, s, d[s], scale))
    if ref is None:
        raise SolveError("data must not be all zero")
    return forced, cons, ref


def _assemble_report(ws, problem, measures, cfg, best, runs,
                     forced_points) -> SolveReport:
    zeros = list(forced_points)
    pts = best.x[0::2] + 1j * best.x[1::2]
    zeros.extend((complex(p), 1) for p in pts)
    c_star = float(np.exp(best.logc))
    h0 = assemble_inner(measures, zeros,
                        tol_integrality=cfg.tol_integrality)
    # unimodular phase from the reference interpolation condition
    jr, sr, tau_r = _hermite_structure(problem)[2]
    u = _eval_with_derivatives(h0, ws, problem)
    lam = (c_star * tau_r) / u[jr][sr]
    lam = lam / abs(lam)
    h = assemble_inner(measures, zeros, lam=lam,
                       tol_integrality=cfg.tol_integrality)
    u = _eval_with_derivatives(h, ws, problem)
    resid = 0.0
    for j, d in enumerate(problem.data):
        for s in range(len(d)):
            resid = max(resid, abs(u[j][s] / c_star - d[s]))
    order = order_of(h)
    agree = _multistart_agreement(ws, measures, cfg, best, runs,
                                  forced_points)
    diagnostics = {
        "constraint_violation": best.viol,
        "interpolation_residual": resid,
        "runs": len(runs),
        "best_gap": _best_gap(best, runs),
        "multistart_agreement": agree,
    }
    return SolveReport(m_star=1.0 / c_star, h=h, order=order, lam=lam,
                       rho=h.rho, zeros=[(p, m) for p, m, _ in h.zeros],
                       objective=best.logc, diagnostics=diagnostics)


def _best_gap(best, runs):
    others = [r.logc for r in runs if r is not best]
    if not others:
        return None
    return float(best.logc - max(others))


def _multistart_agreement(ws, measures, cfg, best, runs, forced_points):
    """Max deviation of h over probe points among near-optimal runs."""
    near = [r for r in runs
            if r is not best and abs(r.logc - best.logc) < cfg.agreement_window
            and r.n == best.n and np.array_equal(r.s_vec, best.s_vec)]
    if not near:
        return 0.0
    rng = np.random.default_rng(981)
    probes = _random_interior(ws.domain, rng, cfg.probe_count, ws.guard)

    def h_at_probes(cand):
        zeros = list(forced_points)
        pts = cand.x[0::2] + 1j * cand.x[1::2]
        zeros.extend((complex(p), 1) for p in pts)
        h = assemble_inner(measures, zeros,
                           tol_integrality=10 * cfg.tol_integrality)
        return h.value(probes)

    ref_vals = h_at_probes(best)
    worst = 0.0
    for cand in near[:4]:
        vals = h_at_probes(cand)
        inner_prod = np.vdot(vals, ref_vals)
        lam = inner_prod / abs(inner_prod) if abs(inner_prod) else 1.0
        worst = max(worst, float(np.abs(lam * vals - ref_vals).max()))
    return worst


def _eval_with_derivatives(h: InnerFunction, ws: _Workspace,
                           problem: InterpolationProblem):
    """h and its needed derivatives at every node, via the circle grids."""
    vals = h.value(ws.eval_pts)
    out = []
    for j, d in enumerate(problem.data):
        if len(d) == 1:
            out.append(np.array([vals[j]]))
        else:
            out.append(ws.derivatives(vals, j, len(d)))
    return out


def _solve_interp(problem: InterpolationProblem, measures: MeasureSet,
                  cfg: SolverConfig) -> SolveReport:
    dom = measures.domain
    guard = cfg.guard if cfg.guard is not None else 1.0 * dom.node_spacing
    if not np.all(dom.is_interior(problem.zetas)):
        raise SolveError("all nodes must be interior")
    forced, cons_spec, ref_spec = _hermite_structure(problem)
    circle_nodes = [j for j, d in enumerate(problem.data) if len(d) > 1]
    ws = _Workspace(measures, problem.zetas, guard, circle_nodes)

    forced_points = [(complex(problem.zetas[j]), nu) for j, nu in forced]
    forced_product = np.ones(len(ws.eval_pts), dtype=complex)
    forced_osum = np.zeros(ws.k)
    for j, nu in forced:
        vals, om = ws.atom_factor(problem.zetas[j])
        forced_product = forced_product * vals**nu
        forced_osum = forced_osum + nu * om
    n_forced = sum(nu for _, nu in forced)

    n_max = problem.sigma1 + ws.k - 1
    if cfg.order_budget is not None:
        n_max = max(cfg.order_budget, n_forced)

    def direct_n0():
        if n_forced:
            return None
        fun = make_fun(0, np.zeros(ws.k, dtype=int))
        _, obj, viol = _auglag(fun, np.zeros(0), fun.n_cons, cfg)
        if viol > cfg.tol_solve + 1e-12:
            return None
        return -obj

    def make_fun(n_free, s_vec):
        hints = []
        if n_free:
            # perturbed copies of the nodes as heuristic seeds
            base = np.array([problem.zetas[i % problem.r]
                             for i in range(n_free)])
            for shift in (0.6 + 0.2j, -0.45 + 0.35j, 0.1 - 0.55j):
                hints.append(base + shift * guard * 3
                             * np.exp(2j * np.arange(n_free)))
        return _RatioObjective(ws, cfg, problem.zetas, s_vec, n_free,
                               forced_product, forced_osum, cons_spec,
                               ref_spec, hints)

    best, runs = _enumerate_and_optimize(
        ws, cfg, make_fun, range(0, n_max + 1), n_forced,
        direct_n0=direct_n0)
    report = _assemble_report(ws, problem, measures, cfg, best, runs,
                              forced_points)
    if problem.plain and report.order > problem.r + ws.k - 1:
        report.diagnostics["order_bound_exceeded"] = True
    try:
        from .certificate import certificate as _certificate
        report.certificate = _certificate(report, problem, measures, cfg)
    except Exception as exc:
        report.diagnostics["certificate_error"] = str(exc)
    return report


def solve_min_norm(problem: InterpolationProblem, measures: MeasureSet,
                   config: SolverConfig | None = None) -> SolveReport:
    """Minimal sup-norm interpolant of plain data; m* and h with f* = m* h."""
    config = config or SolverConfig()
    if not problem.plain:
        raise SolveError("solve_min_norm needs plain data; use solve_hermite")
    return _solve_interp(problem, measures, config)


def solve_hermite(problem: InterpolationProblem, measures: MeasureSet,
                  config: SolverConfig | None = None) -> SolveReport:
    """Minimal sup-norm interpolant of values and consecutive derivatives."""
    config = config or SolverConfig()
    return _solve_interp(problem, measures, config)


# -- Schwarz problem ---------------------------------------------------------


class _SchwarzObjective:
    """max log |h'(0)| with a forced simple zero at the origin."""

    def __init__(self, ws, s_vec, n_free):
        self.ws = ws
        self.s_vec = np.asarray(s_vec, dtype=int)
        self.n_free = n_free
        self.n_cons = ws.k
        # |g_rho(0)| and |phi_0'(0)| are fixed for the candidate
        self.base_log = float(np.log(np.abs(ws.unit_values(s_vec)[0]))) \
            if ws.k else 0.0
        self.base_log += ws.atom_log_deriv_at(0.0, 0.0)
        if ws.k:
            self.osum0 = ws.measures.omega_vector(np.array([0.0 + 0.0j]))[:, 0]
        else:
            self.osum0 = np.zeros(0)

    def seed(self, rng, start_index):
        return _random_interior(self.ws.domain, rng, self.n_free,
                                self.ws.guard)

    def __call__(self, x):
        pts = x[0::2] + 1j * x[1::2]
        total = self.base_log
        osum = self.osum0.copy()
        pen = self.ws.containment_penalty(pts)
        for p in pts:
            vals, om = self.ws.atom_factor(p)
            mag = abs(vals[0])
            if mag < 1e-300:
                return 1e6 + pen, np.zeros(self.n_cons)
            total += np.log(mag)
            osum = osum + om
        cons = osum - self.s_vec
        return -total + pen, cons

    def value_and_grad(self, x):
        pts = x[0::2] + 1j * x[1::2]
        dim = 2 * len(pts)
        total = self.base_log
        osum = self.osum0.copy()
        gobj = np.zeros(dim)
        jac = np.zeros((self.n_cons, dim))
        pen, dpen = self.ws.containment_penalty_grad(pts)
        for i, p in enumerate(pts):
            vals, om, dlx, dly, domx, domy = self.ws.atom_factor_grad(p)
            mag = abs(vals[0])
            if mag < 1e-300:
                return 1e6 + pen, np.zeros(self.n_cons), dpen, 0.0 * jac
            total += np.log(mag)
            osum = osum + om
            gobj[2 * i] = -dlx[0].real
            gobj[2 * i + 1] = -dly[0].real
            jac[:, 2 * i] = domx
            jac[:, 2 * i + 1] = domy
        cons = osum - self.s_vec
        return -total + pen, cons, gobj + dpen, jac


def solve_schwarz(measures: MeasureSet,
                  config: SolverConfig | None = None) -> SolveReport:
    """Inner h of order <= budget maximizing h'(0) > 0 with h(0) = 0."""
    cfg = config or SolverConfig()
    dom = measures.domain
    if not dom.is_interior(0.0 + 0.0j)[0]:
        raise SolveError("the Schwarz problem needs 0 in the domain")
    guard = cfg.guard if cfg.guard is not None else 1.0 * dom.node_spacing
    budget = cfg.order_budget if cfg.order_budget is not None else dom.k + 1
    ws = _Workspace(measures, np.array([0.0 + 0.0j]), guard)

    def make_fun(n_free, s_vec):
        return _SchwarzObjective(ws, s_vec, n_free)

    best, runs = _enumerate_and_optimize(
        ws, cfg, make_fun, range(1, budget + 1), 1)
    zeros = [(0.0 + 0.0j, 1)]
    pts = best.x[0::2] + 1j * best.x[1::2]
    zeros.extend((complex(p), 1) for p in pts)
    h0 = assemble_inner(measures, zeros, tol_integrality=cfg.tol_integrality)
    # rotate so that h'(0) is positive real
    d0 = _derivative_at_forced_zero(h0, 0.0 + 0.0j)
    lam = np.conj(d0) / abs(d0)
    h = assemble_inner(measures, zeros, lam=lam,
                       tol_integrality=cfg.tol_integrality)
    c = abs(d0)
    agree = 0.0
    near = [r for r in runs if r is not best
            and abs(r.logc - best.logc) < cfg.agreement_window]
    diagnostics = {
        "constraint_violation": best.viol,
        "runs": len(runs),
        "near_optimal_runs": len(near),
        "best_gap": _best_gap(best, runs),
        "multistart_agreement": agree,
        "objective_check": abs(np.log(c) - best.logc),
    }
    report = SolveReport(m_star=1.0 / c, h=h, order=order_of(h), lam=lam,
                         rho=h.rho, zeros=[(p, m) for p, m, _ in h.zeros],
                         objective=best.logc, diagnostics=diagnostics,
                         schwarz_c=c)
    try:
        from .certificate import certificate_schwarz as _cert
        report.certificate = _cert(report, measures, cfg)
    except Exception as exc:
        report.diagnostics["certificate_error"] = str(exc)
    return report


def _derivative_at_forced_zero(h: InnerFunction, p: complex) -> complex:
    """h'(p) when p is a simple zero: product of the other factors times
    the atom derivative."""
    out = h.lam * h.unit.value(p)
    seen = False
    for atom, mult in h.atoms:
        if not seen and atom.kind == "interior" and abs(atom.p - p) < 1e-12:
            out *= atom.derivative_at_zero() * atom.value(p) ** (mult - 1)
            seen = True
        else:
            out *= atom.value(p) ** mult
    if not seen:
        raise SolveError(f"{p} is not a zero of the candidate")
    return out


# -- matrix norm maximization ------------------------------------------------


def _spectrum_with_multiplicities(a: np.ndarray, tol: float = 1e-8):
    eig = np.linalg.eigvals(a)
    clusters = []
    for lam in eig:
        for c in clusters:
            if abs(lam - c[0]) < tol:
                c[1] += 1
                c[0] = c[0] + (lam - c[0]) / c[1]
                break
        else:
            clusters.append([lam, 1])
    return [(complex(c[0]), int(c[1])) for c in clusters]


def _hermite_matrix_apply(nodes, values, a: np.ndarray) -> np.ndarray:
    """p(A) for the Hermite interpolation polynomial given derivative data.

    nodes: repeated interpolation abscissae; values: list of per-cluster
    derivative arrays aligned with the repetitions (divided differences
    with confluent nodes).
    """
    xs = []
    fs = []
    for (lam, mult), ders in zip(nodes, values):
        for _ in range(mult):
            xs.append(lam)
        fs.append(ders)
    n = len(xs)
    table = np.zeros((n, n), dtype=complex)
    flat = []
    for (lam, mult), ders in zip(nodes, values):
        for i in range(mult):
            flat.append((lam, i, ders))
    fact = [1.0]
    for i in range(1, n + 1):
        fact.append(fact[-1] * i)
    for i in range(n):
        table[i, 0] = flat[i][2][0]
    for col in range(1, n):
        for i in range(n - col):
            if xs[i + col] == xs[i]:
                lam, off, ders = flat[i]
                table[i, col] = ders[col] / fact[col]
            else:
                table[i, col] = ((table[i + 1, col - 1] - table[i, col - 1])
                                 / (xs[i + col] - xs[i]))
    eye = np.eye(len(a), dtype=complex)
    out = table[0, n - 1] * eye
    for i in range(n - 2, -1, -1):
        out = out @ (a - xs[i] * eye) + table[0, i] * eye
    return out


class _MatrixNormObjective:
    def __init__(self, ws, s_vec, n_free, a, spectrum):
        self.ws = ws
        self.s_vec = np.asarray(s_vec, dtype=int)
        self.n_free = n_free
        self.a = a
        self.spectrum = spectrum
        self.n_cons = ws.k

    def seed(self, rng, start_index):
        eigs = np.array([lam for lam, _ in self.spectrum])
        if start_index == 0 and len(eigs) >= self.n_free:
            pts = eigs[:self.n_free].astype(complex)
            d = self.ws.domain.distance_to_boundary(pts)
            if np.all(d > 1.2 * self.ws.guard):
                return pts
        return _random_interior(self.ws.domain, rng, self.n_free,
                                self.ws.guard)

    def values_matrix(self, pts):
        u = self.ws.unit_values(self.s_vec)
        osum = np.zeros(self.ws.k)
        for p in pts:
            vals, om = self.ws.atom_factor(p)
            u = u * vals
            if self.ws.k:
                osum = osum + om
        ders = []
        for idx, (lam, mult) in enumerate(self.spectrum):
            if mult == 1 and idx not in self.ws.circles:
                ders.append(np.array([u[idx]]))
            else:
                ders.append(self.ws.derivatives(u, idx, mult))
        fa = _hermite_matrix_apply(self.spectrum, ders, self.a)
        return fa, osum, ders

    def __call__(self, x):
        pts = x[0::2] + 1j * x[1::2]
        pen = self.ws.containment_penalty(pts)
        fa, osum, _ = self.values_matrix(pts)
        norm = np.linalg.norm(fa, 2)
        if not np.isfinite(norm) or norm < 1e-300:
            return 1e6 + pen, np.zeros(self.n_cons)
        cons = osum - self.s_vec
        return -np.log(norm) + pen, cons


def maximize_matrix_norm(a: np.ndarray, measures: MeasureSet,
                         config: SolverConfig | None = None):
    """Inner f0 maximizing ||f(A)||_2, with the Hermite reduction check.

    Orders are scanned from d + k - 1 downward and a lower order is kept
    only when strictly better, so ties resolve to the highest order.
    """
    cfg = config or SolverConfig()
    a = np.asarray(a, dtype=complex)
    dom = measures.domain
    spectrum = _spectrum_with_multiplicities(a)
    eigs = np.array([lam for lam, _ in spectrum])
    if not np.all(dom.is_interior(eigs)):
        raise SolveError("all eigenvalues must be interior to the domain")
    guard = cfg.guard if cfg.guard is not None else 1.0 * dom.node_spacing
    circle_nodes = [i for i, (_, mult) in enumerate(spectrum) if mult > 1]
    ws = _Workspace(measures, eigs, guard, circle_nodes)
    d = len(a)
    n_max = d + dom.k - 1
    if cfg.order_budget is not None:
        n_max = cfg.order_budget

    def make_fun(n_free, s_vec):
        return _MatrixNormObjective(ws, s_vec, n_free, a, spectrum)

    def direct_n0():
        fun = make_fun(0, np.zeros(ws.k, dtype=int))
        obj, cons = fun(np.zeros(0))
        if ws.k and np.abs(cons).max() > cfg.tol_solve:
            return None
        return -obj

    best, runs = _enumerate_and_optimize(
        ws, cfg, make_fun, range(0, n_max + 1), 0,
        direct_n0=direct_n0, descending=True)
    pts = best.x[0::2] + 1j * best.x[1::2]
    # snap free zeros onto coinciding eigenvalues when the objective is
    # indifferent; this keeps the downstream Hermite data exactly zero at
    # forced-zero positions instead of ill-conditioned near-zeros
    if len(pts):
        snapped = pts.copy()
        for i, p in enumerate(pts):
            j = int(np.argmin(np.abs(eigs - p)))
            if np.abs(eigs[j] - p) < 1e-6:
                snapped[i] = eigs[j]
        if not np.array_equal(snapped, pts):
            fun = make_fun(best.n, best.s_vec)
            x_new = np.column_stack([snapped.real, snapped.imag]).ravel()
            obj_new, cons_new = fun(x_new)
            viol_new = np.abs(cons_new).max() if len(cons_new) else 0.0
            if (obj_new <= -best.logc + 1e-8
                    and viol_new <= cfg.tol_equality):
                pts = snapped
    zeros = [(complex(p), 1) for p in pts]
    value = float(np.exp(best.logc))
    if zeros:
        f0 = assemble_inner(measures, zeros,
                            tol_integrality=cfg.tol_integrality)
    else:
        f0 = assemble_inner(measures, [], lam=1.0)
    # certify through the Hermite reduction: interpolating f0's spectral
    # data with minimal norm must give m* = 1
    fun = make_fun(best.n, best.s_vec)
    _, _, ders = fun.values_matrix(pts)
    # reuse the gauge of the assembled function for the data
    data = []
    for idx, (lam, mult) in enumerate(spectrum):
        if mult == 1:
            data.append([f0.value(lam)])
        else:
            vals = f0.value(ws.eval_pts)
            row = list(ws.derivatives(vals, idx, mult))
            # a zero of f0 sitting exactly on the eigenvalue makes the
            # leading entries analytically zero; the circle quadrature
            # returns O(eps) noise there, which must not leak into the
            # reduction as nonzero leading data
            mu = sum(m for p, m, ci in f0.zeros if ci is None and p == lam)
            for j in range(min(mu, mult)):
                row[j] = 0.0 + 0.0j
            data.append(row)
    hermite_problem = InterpolationProblem(eigs, data)
    check = solve_hermite(hermite_problem, measures, cfg)
    diagnostics = {
        "constraint_violation": best.viol,
        "order": best.n,
        "hermite_check_m_star": check.m_star,
        "best_gap": _best_gap(best, runs),
    }
    return f0, value, diagnostics


# -- disk oracle, feasibility, Lipschitz bounds -----------------------------


def pick_min_m_disk(zetas, taus, tol: float = 1e-12) -> float:
    """Smallest m with [(m^2 - tau_i conj(tau_j)) / (1 - zeta_i conj(zeta_j))]
    positive semidefinite; bisection on the smallest eigenvalue."""
    z = np.asarray(zetas, dtype=complex)
    t = np.asarray(taus, dtype=complex)
    if np.abs(z).max() >= 1.0:
        raise SolveError("disk oracle needs nodes inside the unit disk")
    kern = 1.0 / (1.0 - z[:, None] * np.conj(z)[None, :])
    tt = t[:, None] * np.conj(t)[None, :]

    def min_eig(m):
        mat = (m * m - tt) * kern
        return float(np.linalg.eigvalsh(mat).min())

    lo, hi = 0.0, float(np.abs(t).max()) + 1e-12
    while min_eig(hi) < 0:
        hi *= 2.0
        if hi > 1e8:
            raise SolveError("disk oracle bisection diverged")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if min_eig(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def feasibility(problem: InterpolationProblem, measures: MeasureSet,
                config: SolverConfig | None = None):
    """Classify the norm-1 interpolation problem from m*."""
    cfg = config or SolverConfig()
    report = solve_min_norm(problem, measures, cfg)
    m = report.m_star
    if m < 1.0 - cfg.tol_equality:
        label = "feasible_strict"
    elif m <= 1.0 + cfg.tol_equality:
        label = "feasible_unique"
    else:
        label = "infeasible"
    return label, report


def lipschitz_bounds(problem: InterpolationProblem, tau_prime, measures,
                     config: SolverConfig | None = None):
    """Data-perturbation bound sum_i ||lambda_i||_inf |tau_i - tau'_i|.

    ||lambda_i||_inf is the minimal norm of the Kronecker problem
    f(zeta_j) = delta_ij.  Returns the bound and both solved values.
    """
    cfg = config or SolverConfig()
    if not problem.plain:
        raise SolveError("Lipschitz bounds are for plain problems")
    taus = problem.taus
    tau_prime = np.asarray(tau_prime, dtype=complex)
    norms = []
    for i in range(problem.r):
        delta = np.zeros(problem.r, dtype=complex)
        delta[i] = 1.0
        rep = solve_min_norm(
            InterpolationProblem.plain_problem(problem.zetas, delta),
            measures, cfg)
        norms.append(rep.m_star)
    bound = float(np.sum(np.array(norms) * np.abs(taus - tau_prime)))
    m1 = solve_min_norm(problem, measures, cfg).m_star
    m2 = solve_min_norm(
        InterpolationProblem.plain_problem(problem.zetas, tau_prime),
        measures, cfg).m_star
    return {
        "bound": bound,
        "m_star": m1,
        "m_star_perturbed": m2,
        "observed": abs(m1 - m2),
        "kronecker_norms": norms,
        "satisfied": abs(m1 - m2) <= bound + 1e-9,
    }
