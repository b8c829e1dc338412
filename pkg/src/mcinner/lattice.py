"""Completion of zero sets to integer harmonic-measure sums.

For points zeta_1..zeta_r in a k-connected domain, at most k extra interior
points make every sum of harmonic measures an integer.  The construction
traces one steepest-ascent path of omega_j from the outer boundary to each
hole, reparametrizes it by tau = omega_j, and solves Psi_1(t) = d for the
periodic map Psi_1(t) = sum_j phi_j(t_j) built from the lifted path
coordinates phi_j(tau + l) = phi_j(tau) + l e_j.  A homotopy
Psi_s(t) = (1-s) t + s Psi_1(t) continues the exact s=0 solution t = d to
s=1, and a final Newton polish against exact measure evaluations drives the
integrality residual below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .geometry import Domain
from .laplace import MeasureSet

__all__ = ["LatticeError", "MeasurePath", "PathFamily", "PsiMap",
           "build_paths", "psi", "complete_to_integer"]


class LatticeError(RuntimeError):
    """Path construction or continuation failure."""


@dataclass
class MeasurePath:
    """Steepest-ascent path from Gamma_0 to hole j, parametrized by omega_j."""

    hole: int                      # 1-based hole index
    taus: np.ndarray               # strictly increasing, 0..1
    points: np.ndarray             # complex positions along the path
    omegas: np.ndarray             # (k, len(taus)) measure samples
    pos_interp: object = None
    coord_interp: object = None    # vectorized over the k coordinates

    def __post_init__(self):
        self.pos_interp = PchipInterpolator(
            self.taus, np.column_stack([self.points.real, self.points.imag]))
        self.coord_interp = PchipInterpolator(self.taus, self.omegas.T)

    def position(self, tau: float) -> complex:
        x, y = self.pos_interp(np.clip(tau, 0.0, 1.0))
        return complex(x + 1j * y)

    def lifted(self, t: float) -> np.ndarray:
        """phi_j(t) with the integer lift phi_j(t + l) = phi_j(t) + l e_j."""
        floor = np.floor(t)
        frac = t - floor
        out = np.asarray(self.coord_interp(frac), dtype=float)
        out[self.hole - 1] += floor
        return out


@dataclass
class PathFamily:
    domain: Domain
    measures: MeasureSet
    paths: list
    clearance: float


@dataclass
class PsiMap:
    family: PathFamily

    def psi1(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return sum(p.lifted(t[j]) for j, p in enumerate(self.family.paths))

    def __call__(self, t: np.ndarray, s: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (1.0 - s) * t + s * self.psi1(t)


def _trace_ascent(measures: MeasureSet, hole: int, seed_node: int,
                  step: float, max_steps: int = 4000):
    """RK4 steepest ascent of omega_hole from a Gamma_0 node to the hole."""
    dom = measures.domain
    field = measures.omegas[hole]
    start_bnd = dom.nodes[seed_node]
    z = start_bnd - 1.0 * step * dom.normals[seed_node]
    hole_curve = dom.holes[hole - 1]
    hole_trace = hole_curve.point(
        2 * np.pi * np.arange(4 * hole_curve.n_nodes) / (4 * hole_curve.n_nodes))

    def direction(w):
        a = field.grad(w)
        mag = abs(a)
        if mag < 1e-13:
            raise LatticeError(f"vanishing measure gradient at {w}")
        return np.conj(a) / mag

    pts = [z]
    for _ in range(max_steps):
        d_hole = np.abs(hole_trace - z).min()
        h = min(step, 0.5 * d_hole + 0.25 * step)
        try:
            k1 = direction(z)
            k2 = direction(z + 0.5 * h * k1)
            k3 = direction(z + 0.5 * h * k2)
            k4 = direction(z + h * k3)
        except LatticeError:
            raise
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        pts.append(z)
        if np.abs(hole_trace - z).min() < 0.75 * step:
            break
    else:
        raise LatticeError(f"ascent toward hole {hole} did not terminate")
    end_bnd = hole_trace[np.argmin(np.abs(hole_trace - z))]
    return start_bnd, np.array(pts), end_bnd


def _assemble_path(measures: MeasureSet, hole: int, start_bnd, pts, end_bnd
                   ) -> MeasurePath:
    k = measures.k
    om = measures.omega_vector(pts) if k else np.zeros((0, len(pts)))
    taus = om[hole - 1]
    # enforce strict monotonicity of the parametrizing coordinate
    keep = [0]
    for i in range(1, len(taus)):
        if taus[i] > taus[keep[-1]] + 1e-10:
            keep.append(i)
    keep = np.array(keep)
    taus = taus[keep]
    pts = pts[keep]
    om = om[:, keep]
    if taus[0] < 1e-12 or taus[-1] > 1.0 - 1e-12:
        raise LatticeError("path samples reach the boundary parametrically")
    # boundary anchors carry the exact limiting measure vectors
    taus = np.concatenate([[0.0], taus, [1.0]])
    pts = np.concatenate([[start_bnd], pts, [end_bnd]])
    left = np.zeros((k, 1))
    right = np.zeros((k, 1))
    right[hole - 1, 0] = 1.0
    om = np.concatenate([left, om, right], axis=1)
    return MeasurePath(hole, taus, pts, om)


def build_paths(domain: Domain, measures: MeasureSet, forbidden=(),
                clearance: float = 0.02, seed: int = 0,
                retry_budget: int = 48) -> PathFamily:
    """One measure-ascent path per hole, clear of the forbidden points."""
    forbidden = np.asarray(list(forbidden), dtype=complex)
    if domain.k == 0:
        return PathFamily(domain, measures, [], clearance)
    step = 1.5 * domain.node_spacing
    rng = np.random.default_rng(seed)
    sl0 = domain.curve_slices[0]
    n0 = sl0.stop - sl0.start
    paths = []
    for hole in range(1, domain.k + 1):
        order = list((int(rng.integers(n0)) + np.round(
            n0 * np.arange(retry_budget) / retry_budget).astype(int)) % n0)
        last_err = None
        for seed_node in order:
            try:
                start, pts, end = _trace_ascent(measures, hole, seed_node, step)
            except LatticeError as exc:
                last_err = exc
                continue
            if len(forbidden) and np.abs(
                    pts[:, None] - forbidden[None, :]).min() < clearance:
                last_err = LatticeError("forbidden-point clearance")
                continue
            if any(np.abs(pts[:, None] - q.points[None, :]).min() < clearance
                   for q in paths):
                last_err = LatticeError("path disjointness")
                continue
            try:
                paths.append(_assemble_path(measures, hole, start, pts, end))
            except LatticeError as exc:
                last_err = exc
                continue
            break
        else:
            raise LatticeError(
                f"no admissible path to hole {hole} after {retry_budget} "
                f"seeds (last failure: {last_err})")
    return PathFamily(domain, measures, paths, clearance)


def psi(pmap: PsiMap | PathFamily, t, s: float) -> np.ndarray:
    """Evaluate Psi_s(t) for the path family."""
    if isinstance(pmap, PathFamily):
        pmap = PsiMap(pmap)
    return pmap(np.asarray(t, dtype=float), float(s))


def _newton(func, t0, tol, max_iter=60, fd_step=1e-7):
    t = np.asarray(t0, dtype=float).copy()
    k = len(t)
    for _ in range(max_iter):
        f = func(t)
        if np.abs(f).max() < tol:
            return t, float(np.abs(f).max())
        jac = np.empty((k, k))
        for j in range(k):
            tp = t.copy()
            tp[j] += fd_step
            jac[:, j] = (func(tp) - f) / fd_step
        try:
            dt = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return t, float(np.abs(f).max())
        # damped update with backtracking on the residual norm
        lam = 1.0
        base = np.abs(f).max()
        for _ in range(8):
            cand = t + lam * dt
            if np.abs(func(cand)).max() < base:
                t = cand
                break
            lam *= 0.5
        else:
            return t, float(np.abs(f).max())
    return t, float(np.abs(func(t)).max())


def complete_to_integer(measures: MeasureSet, paths: PathFamily, zetas,
                        tol: float = 1e-6, max_rebuilds: int = 4) -> list:
    """At most k interior points making all measure sums integer.

    Solves Psi_1(t) = d, d_j = -sum_l omega_j(zeta_l), by continuation in s
    from the exact s=0 solution t=d, then polishes t with Newton iterations
    that evaluate the measures exactly at the interpolated path positions.
    """
    dom = measures.domain
    zetas = np.asarray(list(zetas), dtype=complex)
    if dom.k == 0:
        return []
    if len(zetas) != len(set(np.round(zetas, 12))):
        raise LatticeError("input points must be pairwise distinct")
    if len(zetas) and not np.all(dom.is_interior(zetas)):
        raise LatticeError("input points must be interior")
    sums = (measures.omega_vector(zetas).sum(axis=1) if len(zetas)
            else np.zeros(dom.k))
    d = -sums
    if np.abs(d - np.round(d)).max() < tol:
        return []

    for attempt in range(max_rebuilds):
        pmap = PsiMap(paths)
        t = d.copy()
        s = 0.0
        ds = 0.1
        stalled = False
        while s < 1.0 - 1e-12:
            s_next = min(1.0, s + ds)
            t_next, res = _newton(lambda u: pmap(u, s_next) - d, t, 1e-10)
            if res < 1e-9:
                t, s = t_next, s_next
                ds = min(0.25, 1.6 * ds)
            else:
                ds *= 0.5
                if ds < 1e-4:
                    stalled = True
                    break
        if stalled:
            raise LatticeError("homotopy continuation stalled (step below "
                               "minimum)")

        # exact-measure polish at the interpolated positions
        def exact_psi(u):
            out = np.zeros(dom.k)
            for j, p in enumerate(paths.paths):
                floor = np.floor(u[j])
                frac = u[j] - floor
                if frac < 1e-9 or frac > 1 - 1e-9:
                    out += p.lifted(u[j])
                else:
                    out += measures.omega_vector(
                        np.array([p.position(frac)]))[:, 0]
                    out[p.hole - 1] += floor
            return out

        t, res = _newton(lambda u: exact_psi(u) - d, t, 0.1 * tol)
        fracs = t - np.floor(t)
        new_pts = []
        for j, p in enumerate(paths.paths):
            if fracs[j] < 1e-8 or fracs[j] > 1 - 1e-8:
                continue               # landed on the boundary: suppressed
            new_pts.append(p.position(fracs[j]))
        new_pts = np.array(new_pts, dtype=complex)

        total = sums.copy()
        if len(new_pts):
            total += measures.omega_vector(new_pts).sum(axis=1)
        residual = float(np.abs(total - np.round(total)).max())
        if residual > tol:
            raise LatticeError(f"integrality residual {residual:.3e} after "
                               f"polish exceeds {tol:g}")

        # distinctness among the new points and against the inputs
        all_prev = zetas
        ok = True
        clash = None
        if len(new_pts):
            if len(all_prev):
                dmat = np.abs(new_pts[:, None] - all_prev[None, :])
                if dmat.min() < paths.clearance:
                    ok = False
                    clash = new_pts[np.unravel_index(np.argmin(dmat),
                                                     dmat.shape)[0]]
            if ok and len(new_pts) > 1:
                pd = np.abs(new_pts[:, None] - new_pts[None, :])
                np.fill_diagonal(pd, np.inf)
                if pd.min() < paths.clearance:
                    ok = False
                    clash = new_pts[np.unravel_index(np.argmin(pd),
                                                     pd.shape)[0]]
        if ok:
            return [complex(q) for q in new_pts]
        # re-route the paths away from the clash and retry
        paths = build_paths(dom, measures,
                            forbidden=np.concatenate([zetas, [clash]]),
                            clearance=paths.clearance, seed=17 + attempt)
    raise LatticeError("distinctness repair failed after re-routing")
