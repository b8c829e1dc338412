"""Interior Dirichlet solver on multiply connected domains.

Nystrom discretization of the double-layer representation

    u(z) = Re F(z) + sum_l A_l log|z - c_l|,
    F(z) = (1/2 pi i) \\oint mu(w) dw / (w - z),
    A_l  = (1/2 pi) \\int_{Gamma_l} mu dsigma,

with one log source c_l inside each hole (rank completion).  The boundary
values of the holomorphic completion F are recovered through a Kress
splitting of the Cauchy principal value, which makes interior evaluation,
gradients and normal derivatives spectrally accurate up to the boundary
(compensated barycentric Cauchy quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .geometry import Domain

__all__ = [
    "SolverError",
    "LaplaceSolver",
    "HarmonicField",
    "GreenField",
    "MeasureSet",
    "harmonic_measures",
    "green",
    "harmonic_conjugate",
    "winding_number",
]


class SolverError(RuntimeError):
    """Linear-solve or evaluation failure in the boundary-integral solver."""


class LaplaceSolver:
    """Precomputed Nystrom machinery for one domain (immutable, reusable)."""

    def __init__(self, domain: Domain):
        self.domain = domain
        d = domain
        n = d.n_total
        self.hole_centers = np.array(
            [self._hole_center(j) for j in range(d.k)], dtype=complex)

        z = d.nodes
        dz = d.node_dz
        h = np.concatenate([np.full(c.n_nodes, 2 * np.pi / c.n_nodes)
                            for c in d.curves])
        self.param_weight = h
        self.cauchy_weight = dz * h            # v_j = w'(t_j) * h_j

        # raw Cauchy kernel (1/2 pi i) w'(t) h / (w(t) - w(s)), Kress diagonal
        diff = z[None, :] - z[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = dz[None, :] / diff
        idx = np.arange(n)
        raw[idx, idx] = d.node_ddz / (2.0 * d.node_dz)
        ckernel = raw * h[None, :] / (2j * np.pi)

        # smooth part for same-curve blocks: subtract the cot singularity
        self.c_smooth = ckernel.copy()
        for sl in d.curve_slices:
            t = d.node_theta[sl]
            dt = t[None, :] - t[:, None]
            cot = np.zeros_like(dt)
            off = ~np.eye(len(t), dtype=bool)
            cot[off] = 0.5 / np.tan(0.5 * dt[off])
            hh = 2 * np.pi / len(t)
            self.c_smooth[sl, sl] -= cot * hh / (2j * np.pi)

        # Nystrom matrix: mu/2 + Re(kernel) mu + log-source completion
        a = 0.5 * np.eye(n) + np.real(ckernel)
        for l in range(d.k):
            col = np.log(np.abs(z - self.hole_centers[l]))
            row = np.zeros(n)
            sl = d.curve_slices[l + 1]
            row[sl] = d.weights[sl] / (2 * np.pi)
            a += np.outer(col, row)
        self.matrix = a
        try:
            self.lu = lu_factor(a)
        except Exception as exc:  # pragma: no cover
            raise SolverError(f"Nystrom matrix factorization failed: {exc}")
        self.condition_estimate = None
        self._smap = None

    def data_to_completion_map(self) -> np.ndarray:
        """Dense map from Dirichlet data to boundary completion values.

        Row i gives S(w_i) as a linear functional of the data vector; used
        to amortize repeated solves against moving atom positions.
        """
        if self._smap is None:
            d = self.domain
            n = d.n_total
            pv = np.zeros((n, n), dtype=complex)
            for sl in d.curve_slices:
                nc = sl.stop - sl.start
                mult = 0.5 * np.sign(np.fft.fftfreq(nc, d=1.0 / nc))
                pv[sl, sl] = np.fft.ifft(
                    np.fft.fft(np.eye(nc), axis=0) * mult[:, None], axis=0)
            ainv = np.linalg.inv(self.matrix)
            self._smap = (0.5 * np.eye(n) + self.c_smooth + pv) @ ainv
        return self._smap

    def _hole_center(self, j: int) -> complex:
        d = self.domain
        sl = d.curve_slices[j + 1]
        z = d.nodes[sl]
        c = z.mean()
        from .geometry import _winding_of_curve
        if abs(_winding_of_curve(d.holes[j], np.array([c]))[0]) > 0.5:
            return c
        # centroid landed outside a nonconvex hole: search nearby
        rng = np.random.default_rng(1)
        scale = np.abs(z - c).max()
        for _ in range(2000):
            cand = c + scale * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
            if (abs(_winding_of_curve(d.holes[j], np.array([cand]))[0]) > 0.5
                    and np.abs(z - cand).min() > 0.1 * scale):
                return cand
        raise SolverError(f"no interior source point found for hole {j}")

    def _conjugate_pv(self, mu_curve: np.ndarray) -> np.ndarray:
        """(1/2 pi i) PV int mu(t) (1/2) cot((t-s)/2) dt on one curve."""
        n = len(mu_curve)
        freq = np.fft.fftfreq(n, d=1.0 / n)
        mult = 0.5 * np.sign(freq)
        return np.fft.ifft(np.fft.fft(mu_curve) * mult)

    def solve(self, boundary_values: np.ndarray) -> "HarmonicField":
        d = self.domain
        f = np.asarray(boundary_values, dtype=float)
        if f.shape != (d.n_total,):
            raise SolverError(f"need one boundary value per node "
                              f"({d.n_total}), got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise SolverError("boundary values must be finite")
        mu = lu_solve(self.lu, f)
        resid = float(np.abs(self.matrix @ mu - f).max())
        scale = max(1.0, float(np.abs(f).max()))
        if resid > 1e-10 * scale:
            cond = np.linalg.cond(self.matrix)
            raise SolverError(f"linear solve residual {resid:.3e} "
                              f"(condition estimate {cond:.3e})")
        hole_coeffs = np.array(
            [(d.weights[d.curve_slices[l + 1]]
              @ mu[d.curve_slices[l + 1]]) / (2 * np.pi)
             for l in range(d.k)])

        # boundary values of F: mu/2 + smooth part + per-curve cot PV
        s_bnd = 0.5 * mu + self.c_smooth @ mu
        for sl in d.curve_slices:
            s_bnd[sl] += self._conjugate_pv(mu[sl].astype(complex))

        # boundary values of F': spectral d/dtheta divided by w'
        sp_bnd = np.empty_like(s_bnd)
        for sl in d.curve_slices:
            n = sl.stop - sl.start
            freq = np.fft.fftfreq(n, d=1.0 / n)
            ds = np.fft.ifft(1j * freq * np.fft.fft(s_bnd[sl]))
            sp_bnd[sl] = ds / d.node_dz[sl]

        return HarmonicField(self, f, mu, hole_coeffs, s_bnd, sp_bnd, resid)


class HarmonicField:
    """A solved interior Dirichlet problem, evaluable anywhere in the domain.

    The complex gradient convention throughout is a(z) = u_x - i u_y, which
    is the z-derivative of the holomorphic completion of u.
    """

    def __init__(self, solver, data, density, hole_coeffs, s_bnd, sp_bnd,
                 residual):
        self.solver = solver
        self.domain = solver.domain
        self.boundary_data = data
        self.density = density
        self.hole_coeffs = hole_coeffs
        self.s_bnd = s_bnd
        self.sp_bnd = sp_bnd
        self.residual = residual

    # -- holomorphic completion -------------------------------------------

    def completion(self, z):
        """F(z) for interior z, via compensated barycentric Cauchy."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        v = self.solver.cauchy_weight
        w = self.domain.nodes
        with np.errstate(divide="ignore", invalid="ignore"):
            ker = v[None, :] / (w[None, :] - z[:, None])
            out = (ker @ self.s_bnd) / ker.sum(axis=1)
        bad = np.flatnonzero(~np.isfinite(out))
        for i in bad:
            # exact node hit: the barycentric limit is the nodal value
            out[i] = self.s_bnd[np.argmin(np.abs(w - z[i]))]
        return out

    def completion_derivative(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        v = self.solver.cauchy_weight
        w = self.domain.nodes
        with np.errstate(divide="ignore", invalid="ignore"):
            dif = w[None, :] - z[:, None]
            ker = v[None, :] / dif
            den = ker.sum(axis=1)
            s_at = (ker @ self.s_bnd) / den
            num = ((v[None, :] * (self.s_bnd[None, :] - s_at[:, None]))
                   / dif**2).sum(axis=1)
            out = num / den
        bad = np.flatnonzero(~np.isfinite(out))
        for i in bad:
            out[i] = self.sp_bnd[np.argmin(np.abs(w - z[i]))]
        return out

    # -- field values -------------------------------------------------------

    def value(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        u = np.real(self.completion(zz))
        for l, c in enumerate(self.solver.hole_centers):
            u += self.hole_coeffs[l] * np.log(np.abs(zz - c))
        return float(u[0]) if scalar else u

    def grad(self, z):
        """Complex gradient a(z) = u_x - i u_y at interior points."""
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        a = self.completion_derivative(zz)
        with np.errstate(divide="ignore", invalid="ignore"):
            for l, c in enumerate(self.solver.hole_centers):
                a += self.hole_coeffs[l] / (zz - c)
        return complex(a[0]) if scalar else a

    def grad_boundary(self):
        """a(z) = u_x - i u_y at the quadrature nodes."""
        a = self.sp_bnd.copy()
        for l, c in enumerate(self.solver.hole_centers):
            a += self.hole_coeffs[l] / (self.domain.nodes - c)
        return a

    def normal_derivative(self):
        """Outward normal derivative at the quadrature nodes."""
        return np.real(self.grad_boundary() * self.domain.normals)

    def fluxes(self):
        """Per-curve fluxes int_{Gamma_i} d_nu u dsigma, i = 0..k."""
        dn = self.normal_derivative()
        d = self.domain
        return np.array([dn[sl] @ d.weights[sl] for sl in d.curve_slices])


@dataclass
class GreenField:
    """Green function with pole p: G_p = -(1/2 pi) log|z-p| + regular part."""

    pole: complex
    regular: HarmonicField

    def value(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        g = -np.log(np.abs(zz - self.pole)) / (2 * np.pi) + self.regular.value(zz)
        return float(g[0]) if scalar else g

    def grad(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        a = -1.0 / (2 * np.pi * (zz - self.pole)) + self.regular.grad(zz)
        return complex(a[0]) if scalar else a

    def normal_derivative(self):
        dom = self.regular.domain
        a = (self.regular.grad_boundary()
             - 1.0 / (2 * np.pi * (dom.nodes - self.pole)))
        return np.real(a * dom.normals)

    def boundary_fluxes(self):
        dom = self.regular.domain
        dn = self.normal_derivative()
        return np.array([dn[sl] @ dom.weights[sl] for sl in dom.curve_slices])


@dataclass
class MeasureSet:
    """Harmonic measures omega_0..omega_k with period matrix M and N=M^-1."""

    domain: Domain
    solver: LaplaceSolver
    omegas: list          # k+1 HarmonicField instances
    period_matrix: np.ndarray
    inverse: np.ndarray

    @property
    def k(self) -> int:
        return self.domain.k

    def omega_vector(self, z):
        """(omega_1(z), ..., omega_k(z)) as an array (hole measures only)."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([self.omegas[j + 1].value(zz) for j in range(self.k)])

    def omega_grads(self, z):
        """Complex gradients of the hole measures at z, shape (k, len(z))."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.array([self.omegas[j + 1].grad(zz) for j in range(self.k)])


def harmonic_measures(domain: Domain, solver: LaplaceSolver | None = None
                      ) -> MeasureSet:
    """Solve for all harmonic measures and assemble the period matrix."""
    solver = solver or LaplaceSolver(domain)
    omegas = []
    for j in range(domain.k + 1):
        data = np.zeros(domain.n_total)
        data[domain.curve_slices[j]] = 1.0
        omegas.append(solver.solve(data))
    k = domain.k
    m = np.zeros((k, k))
    for j in range(k):
        dn = omegas[j + 1].normal_derivative()
        for i in range(k):
            sl = domain.curve_slices[i + 1]
            m[i, j] = dn[sl] @ domain.weights[sl]
    m = 0.5 * (m + m.T)
    n = np.linalg.inv(m) if k else np.zeros((0, 0))
    return MeasureSet(domain, solver, omegas, m, n)


def green(domain: Domain, measures: MeasureSet, p: complex,
          guard: float | None = None) -> GreenField:
    """Green function of the domain with interior pole p."""
    guard = domain.node_spacing if guard is None else guard
    if not domain.is_interior(p)[0]:
        raise SolverError(f"Green pole {p} is not interior")
    if domain.distance_to_boundary(p) <= guard:
        raise SolverError(f"Green pole {p} violates the boundary guard zone "
                          f"({guard:.3e})")
    data = np.log(np.abs(domain.nodes - p)) / (2 * np.pi)
    regular = measures.solver.solve(data)
    return GreenField(complex(p), regular)


class PeriodError(SolverError):
    """Harmonic conjugate requested for a field with nonzero periods."""


def harmonic_conjugate(field: HarmonicField, base: complex,
                       tol: float = 1e-8):
    """Single-valued conjugate v with v(base) = 0; requires zero periods.

    Returns a callable v(z).  The conjugate periods around the holes are
    -2 pi A_l, so single-valuedness is exactly the vanishing of the hole
    coefficients in the representation.
    """
    if field.domain.k:
        periods = 2 * np.pi * np.abs(field.hole_coeffs)
        if periods.max() > tol:
            bad = [f"Gamma_{l + 1}: period {2 * np.pi * field.hole_coeffs[l]:+.3e}"
                   for l in range(field.domain.k) if periods[l] > tol]
            raise PeriodError("nonzero conjugate periods: " + "; ".join(bad))
    v0 = float(np.imag(field.completion(base))[0])

    def conjugate(z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        v = np.imag(field.completion(zz)) - v0
        return float(v[0]) if scalar else v

    return conjugate


def winding_number(values: np.ndarray, max_step: float = 0.5 * np.pi,
                   round_tol: float = 1e-3):
    """Rotation count of nonvanishing complex samples along a closed curve.

    The samples are assumed to follow the curve's stored direction of
    travel.  Returns (integer winding, rounding residual).
    """
    v = np.asarray(values, dtype=complex)
    mag = np.abs(v)
    if mag.min() <= 1e-8 * mag.max():
        raise SolverError("winding_number: samples too close to zero")
    closed = np.concatenate([v, v[:1]])
    steps = np.angle(closed[1:] / closed[:-1])
    if np.abs(steps).max() > max_step:
        raise SolverError("winding_number: argument jump exceeds pi/2 "
                          "between nodes (resolution too low)")
    raw = steps.sum() / (2 * np.pi)
    wind = int(np.round(raw))
    residual = abs(raw - wind)
    if residual > round_tol:
        raise SolverError(f"winding_number: rounding residual {residual:.3e} "
                          f"exceeds {round_tol:.1e}")
    return wind, residual
