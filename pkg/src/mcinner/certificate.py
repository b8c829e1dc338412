"""Fritz John optimality certificates for the extremal solves.

At an optimum there exist real multipliers, not all zero, such that the
field

    a(z) = d_x H(z) - i d_y H(z)

of the harmonic function H vanishes at every free interior zero of the
extremal inner function and satisfies i z'(sigma) a(z(sigma)) <= 0 along
the boundary (arclength orientation keeping the domain on the left).  H
combines, with one real multiplier each, the log-modulus and argument
fields anchored at the nonzero-data nodes and the harmonic measures; the
phase-stationarity relation removes one argument multiplier, so the field
space has dimension 2 r1 - 1 + k (r1 nonzero-data nodes, k holes).  For
the Schwarz problem H uses the log-modulus field of the origin plus the
measures (dimension k + 1).

Multipliers are recovered a posteriori: a linear program minimizes the
larger of the zero-condition residual and the boundary sign violation
over the unit sup-norm sphere of multipliers.  The report carries the
multipliers in the grouped normalization max |ell| = 1, evaluators for
H and a, the residuals, and an argument-principle consistency count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .laplace import MeasureSet, winding_number

__all__ = ["CertificateError", "CertificateReport", "certificate",
           "certificate_schwarz"]


class CertificateError(RuntimeError):
    """Certificate construction failure."""


@dataclass
class CertificateReport:
    """Fitted Fritz John multipliers and their residuals.

    multipliers: dict with keys 'ell0', 'log', 'arg', 'measure'; the
    groups 'log', 'arg', 'measure' follow the anchor/hole ordering and
    are normalized so the largest absolute entry over all groups is 1.
    residual is max |a| over the free-zero conditions (with derivative
    rows for multiple zeros); sign_margin is max over boundary nodes of
    Re(i z' a), which must be <= slack at an optimum.
    """

    multipliers: dict
    residual: float
    sign_margin: float
    lp_value: float
    boundary_trace: np.ndarray
    boundary_realness: float
    count: dict
    degenerate: bool
    empty: bool
    basis: object = field(repr=False, default=None)
    coeffs: np.ndarray = field(repr=False, default=None)

    def a_value(self, z):
        """The certificate field a at interior points."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        return self.basis.fields(zz) @ self.coeffs

    def h_value(self, z):
        """H at interior points (argument terms on a fixed branch)."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        return self.basis.h_terms(zz) @ self.coeffs


class _CertificateBasis:
    """Meromorphic gradient fields spanning the candidate a(z).

    anchors are the nodes carrying nonzero data (or the origin for the
    Schwarz problem).  Per anchor m the log-modulus field is

        1/(z - zeta_m) + 2 pi (sum_j c_j S_j'(z) - S_reg'(z)),

    the gradient of log|phi_z(zeta_m)| = log|phi_{zeta_m}(z)|.  Argument
    fields enter as anchor pairs (m, 1), m >= 2:

        i/(z - zeta_m) - i/(z - zeta_1) + grad U_m,

    with U_m the harmonic function matching the unwrapped boundary angle
    of (w - zeta_m)/(w - zeta_1); the pairing encodes the relation
    ell_{r1+1} + ... + ell_{2r1} = 0 and keeps the boundary data
    single-valued.  The measure gradients complete the basis.
    """

    def __init__(self, measures: MeasureSet, anchors, with_arg: bool):
        self.measures = measures
        self.domain = measures.domain
        self.anchors = np.asarray(anchors, dtype=complex)
        self.with_arg = with_arg and len(self.anchors) > 1
        dom = self.domain
        solver = measures.solver
        k = dom.k
        self.k = k
        self.log_parts = []          # (c, regular) per anchor
        for zm in self.anchors:
            if k:
                om = measures.omega_vector(np.array([zm]))[:, 0]
                c = -measures.inverse @ om
            else:
                c = np.zeros(0)
            data = np.log(np.abs(dom.nodes - zm)) / (2 * np.pi)
            self.log_parts.append((c, solver.solve(data)))
        self.arg_parts = []          # harmonic correction U_m per pair
        if self.with_arg:
            z1 = self.anchors[0]
            for zm in self.anchors[1:]:
                data = np.empty(dom.n_total)
                for sl in dom.curve_slices:
                    ang = np.angle((dom.nodes[sl] - zm) / (dom.nodes[sl] - z1))
                    data[sl] = np.unwrap(ang)
                self.arg_parts.append(solver.solve(data))
        self.labels = ([("log", m) for m in range(len(self.anchors))]
                       + [("arg", m + 1) for m in range(len(self.arg_parts))]
                       + [("measure", j) for j in range(k)])
        self.dim = len(self.labels)

    def fields(self, z: np.ndarray) -> np.ndarray:
        """Basis fields at interior points, shape (len(z), dim)."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        m = self.measures
        cols = []
        om_der = [m.omegas[j + 1].completion_derivative(zz)
                  for j in range(self.k)]
        for zm, (c, reg) in zip(self.anchors, self.log_parts):
            col = 1.0 / (zz - zm) - 2 * np.pi * reg.completion_derivative(zz)
            for j in range(self.k):
                if c[j]:
                    col = col + 2 * np.pi * c[j] * om_der[j]
            cols.append(col)
        z1 = self.anchors[0]
        for zm, u in zip(self.anchors[1:], self.arg_parts):
            cols.append(1j / (zz - zm) - 1j / (zz - z1) + u.grad(zz))
        for j in range(self.k):
            cols.append(m.omegas[j + 1].grad(zz))
        return np.column_stack(cols)

    def fields_boundary(self) -> np.ndarray:
        dom = self.domain
        m = self.measures
        w = dom.nodes
        cols = []
        om_sp = [m.omegas[j + 1].sp_bnd for j in range(self.k)]
        for zm, (c, reg) in zip(self.anchors, self.log_parts):
            col = 1.0 / (w - zm) - 2 * np.pi * reg.sp_bnd
            for j in range(self.k):
                if c[j]:
                    col = col + 2 * np.pi * c[j] * om_sp[j]
            cols.append(col)
        z1 = self.anchors[0]
        for zm, u in zip(self.anchors[1:], self.arg_parts):
            cols.append(1j / (w - zm) - 1j / (w - z1) + u.grad_boundary())
        for j in range(self.k):
            cols.append(m.omegas[j + 1].grad_boundary())
        return np.column_stack(cols)

    def h_terms(self, z: np.ndarray) -> np.ndarray:
        """Harmonic basis values of H at interior points."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        m = self.measures
        cols = []
        om_val = (m.omega_vector(zz) if self.k
                  else np.zeros((0, len(zz))))
        for zm, (c, reg) in zip(self.anchors, self.log_parts):
            col = (np.log(np.abs(zz - zm))
                   - 2 * np.pi * np.real(reg.completion(zz)))
            for j in range(self.k):
                if c[j]:
                    col = col + 2 * np.pi * c[j] * np.real(
                        m.omegas[j + 1].completion(zz))
            cols.append(col)
        z1 = self.anchors[0]
        for zm, u in zip(self.anchors[1:], self.arg_parts):
            cols.append(-np.angle((zz - zm) / (zz - z1)) + u.value(zz))
        for j in range(self.k):
            cols.append(om_val[j])
        return np.column_stack(cols)

    def pole_residues(self, coeffs: np.ndarray) -> np.ndarray:
        """Residue of a at each anchor for the given basis coefficients."""
        n_a = len(self.anchors)
        res = coeffs[:n_a].astype(complex)
        for m in range(len(self.arg_parts)):
            res[m + 1] += 1j * coeffs[n_a + m]
            res[0] -= 1j * coeffs[n_a + m]
        return res


def _condition_rows(basis: _CertificateBasis, free_zeros) -> np.ndarray:
    """Re/Im rows of the s-th basis derivatives at each free zero."""
    rows = []
    dom = basis.domain
    for p, mult in free_zeros:
        if mult == 1:
            vals = basis.fields(np.array([p]))[0]
            rows.append(vals.real)
            rows.append(vals.imag)
            continue
        rad = dom.distance_to_boundary(p)
        for zm in basis.anchors:
            rad = min(rad, abs(p - zm))
        rad *= 0.45
        cnt = 16
        theta = 2 * np.pi * np.arange(cnt) / cnt
        circ = basis.fields(p + rad * np.exp(1j * theta))
        fact = 1.0
        for s in range(mult):
            if s:
                fact *= s
            der = fact * np.mean(circ * np.exp(-1j * s * theta)[:, None],
                                 axis=0) / rad**s
            rows.append(der.real)
            rows.append(der.imag)
    if not rows:
        return np.zeros((0, basis.dim))
    return np.array(rows)


def _fit_multipliers(m_rows: np.ndarray, b_rows: np.ndarray):
    """min over max|ell|=1 of max(|zero rows|, boundary sign rows)."""
    d = m_rows.shape[1]
    rows = np.vstack([m_rows, -m_rows, b_rows])
    a_ub = np.hstack([rows, -np.ones((rows.shape[0], 1))])
    b_ub = np.zeros(rows.shape[0])
    cost = np.zeros(d + 1)
    cost[-1] = 1.0
    best = None
    for i in range(d):
        for sign in (1.0, -1.0):
            bounds = [(-1.0, 1.0)] * d + [(None, None)]
            bounds[i] = (sign, sign)
            res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds,
                          method="highs")
            if res.status == 0 and (best is None or res.fun < best.fun):
                best = res
    if best is None:
        raise CertificateError("multiplier linear program infeasible")
    return best.x[:d], float(best.fun)


def _count_report(basis: _CertificateBasis, coeffs, free_zeros, bound: int):
    """Argument-principle count of a on an inward-offset contour."""
    dom = basis.domain
    delta = 1.5 * dom.node_spacing
    pts = dom.nodes - delta * dom.normals
    vals = basis.fields(pts) @ coeffs
    total = 0
    clean = True
    for sl in dom.curve_slices:
        try:
            w, resid = winding_number(vals[sl], round_tol=0.25)
        except Exception:
            # a zero of a close to the offset contour spoils the count
            clean = False
            continue
        total += w
        clean = clean and resid < 0.05
    residues = basis.pole_residues(coeffs)
    poles = int(np.sum(np.abs(residues) > 1e-8))
    zeros_detected = total + poles
    free = sum(m for _, m in free_zeros)
    return {
        "winding": int(total),
        "winding_clean": clean,
        "poles": poles,
        "zeros_detected": int(zeros_detected),
        "free_zero_count": int(free),
        "bound": int(bound),
        "consistent": bool(free <= zeros_detected <= bound),
    }


def _build_report(basis: _CertificateBasis, free_zeros, bound: int,
                  arg_group: bool) -> CertificateReport:
    m_rows = _condition_rows(basis, free_zeros)
    dom = basis.domain
    tangent = dom.tangents
    fb = basis.fields_boundary()
    sign_rows = np.real(1j * tangent[:, None] * fb)
    imag_rows = np.imag(1j * tangent[:, None] * fb)
    coeffs, lp_value = _fit_multipliers(m_rows, sign_rows)

    # map to the paper's grouped multipliers and renormalize max|ell| = 1
    n_a = len(basis.anchors)
    n_pairs = len(basis.arg_parts)
    log_group = coeffs[:n_a].copy()
    if arg_group:
        pair = coeffs[n_a:n_a + n_pairs]
        arg_vec = np.concatenate([[-pair.sum()], pair]) if n_a > 1 \
            else np.zeros(1)
    else:
        arg_vec = np.zeros(0)
    measure_group = coeffs[n_a + n_pairs:].copy()
    scale = max(np.abs(np.concatenate([log_group, arg_vec, measure_group])))
    if scale <= 0:
        raise CertificateError("fitted multipliers are all zero")
    coeffs = coeffs / scale
    log_group /= scale
    arg_vec /= scale
    measure_group /= scale

    residual = float(np.abs(m_rows @ coeffs).max()) if len(m_rows) else 0.0
    trace = sign_rows @ coeffs
    margin = float(trace.max())
    realness = float(np.abs(imag_rows @ coeffs).max())
    count = _count_report(basis, coeffs, free_zeros, bound)
    multipliers = {
        "ell0": float(log_group.sum()),
        "log": log_group,
        "arg": arg_vec,
        "measure": measure_group,
    }
    return CertificateReport(
        multipliers=multipliers,
        residual=residual,
        sign_margin=margin,
        lp_value=lp_value / scale,
        boundary_trace=trace,
        boundary_realness=realness,
        count=count,
        degenerate=bool(len(m_rows) < basis.dim),
        empty=not free_zeros,
        basis=basis,
        coeffs=coeffs,
    )


def _free_zero_list(h, forced: dict, skip=(), tol: float = 1e-9):
    """Interior zeros of h minus forced multiplicities and skipped points."""
    out = []
    for p, mult, ci in h.zeros:
        if ci is not None:
            continue                  # boundary atoms carry no equality rows
        if any(abs(p - q) < tol for q in skip):
            continue
        eff = mult
        for q, nu in forced.items():
            if abs(p - q) < tol:
                eff = mult - nu
                break
        if eff > 0:
            out.append((complex(p), int(eff)))
    return out


def certificate(report, problem, measures: MeasureSet,
                config=None) -> CertificateReport:
    """Fritz John certificate of a minimal-norm (plain or Hermite) solve.

    The anchors of H are the nodes whose leading data entry is nonzero;
    zeros forced by vanishing leading data carry no stationarity rows.
    """
    anchors = []
    forced = {}
    for j, d in enumerate(problem.data):
        nu = 0
        while nu < len(d) and d[nu] == 0:
            nu += 1
        if nu:
            forced[complex(problem.zetas[j])] = nu
        if nu < len(d):
            anchors.append(complex(problem.zetas[j]))
    if not anchors:
        raise CertificateError("all data vanish; nothing to certify")
    basis = _CertificateBasis(measures, anchors, with_arg=True)
    free_zeros = _free_zero_list(report.h, forced)
    bound = problem.sigma1 + measures.k - 1
    return _build_report(basis, free_zeros, bound, arg_group=True)


def certificate_schwarz(report, measures: MeasureSet,
                        config=None) -> CertificateReport:
    """Fritz John certificate of a Schwarz solve (pole of H at the origin)."""
    basis = _CertificateBasis(measures, [0.0 + 0.0j], with_arg=False)
    free_zeros = _free_zero_list(report.h, {}, skip=[0.0 + 0.0j])
    return _build_report(basis, free_zeros, measures.k, arg_group=False)
