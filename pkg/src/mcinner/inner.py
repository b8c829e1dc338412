"""Finite-order inner functions on multiply connected domains.

Every inner function of finite order factors as lambda * g_rho * prod phi_p:
a unimodular constant, a zero-free unit g_rho carrying prescribed integer
windings around the holes, and one Blaschke-type atom phi_p per zero.  Both
factor types are exponentials of holomorphic completions of harmonic-measure
combinations, so they evaluate spectrally accurately up to the boundary.

Winding numbers rho_j are counted traversing each hole curve
counterclockwise in the plane.  With the period matrix M of the harmonic
measures and N = M^-1, the unit satisfies log|g_rho| = 2 pi sum_j c_j omega_j
with c = -N rho, and assembled inner functions obey the integrality law
sum_l omega_j(p_l) + rho_j = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .laplace import HarmonicField, MeasureSet, SolverError, winding_number

__all__ = [
    "InnerError",
    "PhiAtom",
    "GRho",
    "InnerFunction",
    "build_phi",
    "build_g_rho",
    "assemble_inner",
    "evaluate",
    "order_of",
    "boundary_modulus_deviation",
    "boundary_limit_check",
]


class InnerError(ValueError):
    """Invalid inner-function parameters (integrality, placement, winding)."""


def _completion_sum(measures: MeasureSet, coeffs: np.ndarray, z: np.ndarray,
                    extra: HarmonicField | None = None,
                    extra_coeff: float = 0.0) -> np.ndarray:
    """2 pi (sum_j coeffs_j S_j(z) + extra_coeff S_extra(z)) at interior z."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    total = np.zeros(len(zz), dtype=complex)
    for j in range(measures.k):
        if coeffs[j] != 0.0:
            total += coeffs[j] * measures.omegas[j + 1].completion(zz)
    if extra is not None and extra_coeff != 0.0:
        total += extra_coeff * extra.completion(zz)
    return 2 * np.pi * total


def _boundary_sum(measures: MeasureSet, coeffs: np.ndarray,
                  extra: HarmonicField | None = None,
                  extra_coeff: float = 0.0) -> np.ndarray:
    total = np.zeros(measures.domain.n_total, dtype=complex)
    for j in range(measures.k):
        if coeffs[j] != 0.0:
            total += coeffs[j] * measures.omegas[j + 1].s_bnd
    if extra is not None and extra_coeff != 0.0:
        total += extra_coeff * extra.s_bnd
    return 2 * np.pi * total


@dataclass
class PhiAtom:
    """Blaschke-type factor with a single zero p, unit modulus on Gamma_0.

    Interior p: phi_p(z) = (z - p) exp(W(z) - i Im W(p)) with
    W = 2 pi (sum_j c_j S_j - S_h), c = -N omega(p), S_h the completion of
    the regular part of the Green function with pole p.  The gauge makes
    phi_p'(p) = exp(Re W(p)) > 0 exactly.  Boundary p: phi_p is the constant
    1 on the outer curve or the unit g_{e_i} for p on hole i.
    """

    measures: MeasureSet
    p: complex
    kind: str                      # 'interior', 'outer', or 'hole'
    c: np.ndarray = field(default=None)
    regular: HarmonicField = field(default=None)
    gauge: complex = 1.0 + 0.0j
    unit: "GRho" = field(default=None)
    conj_period_residual: float = 0.0

    def value(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.kind == "outer":
            out = np.ones(len(zz), dtype=complex)
        elif self.kind == "hole":
            out = self.unit.value(zz)
        else:
            w = _completion_sum(self.measures, self.c, zz, self.regular, -1.0)
            out = (zz - self.p) * np.exp(w) * self.gauge
        return complex(out[0]) if scalar else out

    def boundary_values(self) -> np.ndarray:
        if self.kind == "outer":
            return np.ones(self.measures.domain.n_total, dtype=complex)
        if self.kind == "hole":
            return self.unit.boundary_values()
        w = _boundary_sum(self.measures, self.c, self.regular, -1.0)
        return (self.measures.domain.nodes - self.p) * np.exp(w) * self.gauge

    def log_modulus(self, z):
        """log|phi_p(z)| through the measure/Green representation."""
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.kind == "outer":
            out = np.zeros(len(zz))
        elif self.kind == "hole":
            out = self.unit.log_modulus(zz)
        else:
            m = self.measures
            om_z = (m.omega_vector(zz) if m.k
                    else np.zeros((0, len(zz))))
            quad = self.c @ om_z if m.k else 0.0
            gp = (-np.log(np.abs(zz - self.p)) / (2 * np.pi)
                  + self.regular.value(zz))
            out = 2 * np.pi * quad - 2 * np.pi * gp
        return float(out[0]) if scalar else out

    def derivative_at_zero(self) -> complex:
        """phi_p'(p); positive real by the gauge for interior p."""
        if self.kind != "interior":
            raise InnerError("derivative_at_zero needs an interior atom")
        w = _completion_sum(self.measures, self.c, np.array([self.p]),
                            self.regular, -1.0)[0]
        return float(np.exp(np.real(w)))

    def phase_along(self, path: np.ndarray) -> np.ndarray:
        """arg phi_p tracked continuously along a sampled path."""
        vals = self.value(np.asarray(path, dtype=complex))
        steps = np.angle(vals[1:] / vals[:-1])
        return np.angle(vals[0]) + np.concatenate([[0.0], np.cumsum(steps)])


@dataclass
class GRho:
    """Zero-free unit with integer windings rho around the holes.

    g_rho(z) = exp(2 pi sum_j c_j S_j(z)) prod_l (z - b_l)^{rho_l} / norm,
    with c = -N rho and b_l the interior log-source point of hole l.  The
    normalization fixes g_rho(z0) = 1 at a base node on Gamma_0.
    """

    measures: MeasureSet
    rho: np.ndarray
    c: np.ndarray
    base_point: complex
    norm: complex = 1.0 + 0.0j
    conj_period_residual: float = 0.0

    def _raw(self, z: np.ndarray) -> np.ndarray:
        out = np.exp(_completion_sum(self.measures, self.c, z))
        for l, b in enumerate(self.measures.solver.hole_centers):
            if self.rho[l]:
                out *= (z - b) ** self.rho[l]
        return out

    def value(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        out = self._raw(zz) / self.norm
        return complex(out[0]) if scalar else out

    def boundary_values(self) -> np.ndarray:
        out = np.exp(_boundary_sum(self.measures, self.c))
        for l, b in enumerate(self.measures.solver.hole_centers):
            if self.rho[l]:
                out *= (self.measures.domain.nodes - b) ** self.rho[l]
        return out / self.norm

    def log_modulus(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.measures.k:
            out = 2 * np.pi * (self.c @ self.measures.omega_vector(zz))
        else:
            out = np.zeros(len(zz))
        return float(out[0]) if scalar else out


def build_phi(measures: MeasureSet, p: complex, boundary_curve: int | None = None,
              guard: float | None = None) -> PhiAtom:
    """Atom with sole zero p (interior) or its boundary limit (Eq.-(2) cases).

    For a boundary atom pass the index of the curve carrying p.  Interior
    points closer to the boundary than the guard distance are refused unless
    guard=0 is passed explicitly.
    """
    dom = measures.domain
    p = complex(p)
    if boundary_curve is not None:
        if boundary_curve == 0:
            return PhiAtom(measures, p, "outer")
        if not 1 <= boundary_curve <= dom.k:
            raise InnerError(f"no boundary curve {boundary_curve}")
        rho = np.zeros(dom.k, dtype=int)
        rho[boundary_curve - 1] = 1
        unit = build_g_rho(measures, rho)
        return PhiAtom(measures, p, "hole", unit=unit,
                       conj_period_residual=unit.conj_period_residual)

    if not dom.is_interior(p)[0]:
        raise InnerError(f"atom point {p} is not interior; boundary atoms "
                         f"need an explicit curve index")
    guard = 0.5 * dom.node_spacing if guard is None else guard
    if guard > 0 and dom.distance_to_boundary(p) < guard:
        raise InnerError(f"atom point {p} lies in the boundary guard zone "
                         f"({guard:.3e}) but was not flagged as boundary")

    if measures.k:
        om_p = measures.omega_vector(np.array([p]))[:, 0]
        c = -measures.inverse @ om_p
    else:
        c = np.zeros(0)
    data = np.log(np.abs(dom.nodes - p)) / (2 * np.pi)
    regular = measures.solver.solve(data)
    # hole coefficients of the measure combination cancel those of the
    # regular Green part; the leftover is the conjugate-period residual
    resid = 0.0
    if dom.k:
        comb = -2 * np.pi * regular.hole_coeffs
        for j in range(dom.k):
            comb = comb + 2 * np.pi * c[j] * measures.omegas[j + 1].hole_coeffs
        resid = float(np.abs(comb).max())
        if resid > 1e-6:
            raise SolverError(f"conjugate-period residual {resid:.3e} for "
                              f"atom at {p}")
    w_p = _completion_sum(measures, c, np.array([p]), regular, -1.0)[0]
    gauge = np.exp(-1j * np.imag(w_p))
    return PhiAtom(measures, p, "interior", c=c, regular=regular,
                   gauge=gauge, conj_period_residual=resid)


def build_g_rho(measures: MeasureSet, rho, base_point: complex | None = None
                ) -> GRho:
    """Zero-free unit with winding rho_j around hole j, g(base_point) = 1."""
    dom = measures.domain
    rho = np.asarray(rho, dtype=int)
    if rho.shape != (dom.k,):
        raise InnerError(f"rho must have one entry per hole ({dom.k})")
    c = -measures.inverse @ rho if dom.k else np.zeros(0)
    # single-valuedness: combined hole coefficients must be the integers rho
    resid = 0.0
    if dom.k:
        comb = np.zeros(dom.k)
        for j in range(dom.k):
            comb += 2 * np.pi * c[j] * measures.omegas[j + 1].hole_coeffs
        resid = float(np.abs(comb - rho).max())
        if resid > 1e-6:
            raise SolverError(f"unit winding residual {resid:.3e} "
                              f"for rho={rho.tolist()}")
    z0 = dom.nodes[0] if base_point is None else complex(base_point)
    g = GRho(measures, rho, c, z0, conj_period_residual=resid)
    idx = np.argmin(np.abs(dom.nodes - z0))
    if np.abs(dom.nodes[idx] - z0) < 1e-12:
        g.norm = g.boundary_values()[idx] * g.norm
    else:
        g.norm = g._raw(np.array([z0]))[0]
    return g


@dataclass
class InnerFunction:
    """lambda * g_rho * prod phi_p: an inner function of finite order."""

    measures: MeasureSet
    lam: complex
    zeros: list                    # (point, multiplicity, curve_index|None)
    rho: np.ndarray
    atoms: list
    unit: GRho

    def value(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        out = self.lam * self.unit.value(zz)
        for atom, mult in self.atoms:
            out = out * atom.value(zz) ** mult
        return complex(out[0]) if scalar else out

    def boundary_values(self) -> np.ndarray:
        out = self.lam * self.unit.boundary_values()
        for atom, mult in self.atoms:
            out = out * atom.boundary_values() ** mult
        return out

    def interior_zero_count(self) -> int:
        return sum(m for _, m, ci in self.zeros if ci is None)

    def windings(self):
        """Per-curve winding along the stored direction of travel.

        An interior zero within a few node spacings of the boundary rotates
        the argument faster than the grid can track.  Such a zero p is
        deflated by the exact factor (z - q)/(z - p), q its reflection
        across the nearest boundary point: the factor cancels the fast
        rotation, and its own per-curve winding is a known integer that is
        added back, so the count stays exact.
        """
        vals = self.boundary_values()
        dom = self.measures.domain
        corrections = np.zeros(len(dom.curve_slices), dtype=int)
        for p, mult, ci in self.zeros:
            if ci is not None:
                continue
            if dom.distance_to_boundary(p) >= 3.0 * dom.node_spacing:
                continue
            qc, q = None, None
            for curve_index, trace in enumerate(dom._trace_pts):
                j = int(np.argmin(np.abs(trace - p)))
                cand = 2.0 * trace[j] - p
                if q is None or abs(cand - p) < abs(q - p):
                    qc, q = curve_index, cand
            if dom.is_interior(q)[0]:
                continue                    # reflection failed; track raw
            vals = vals * ((dom.nodes - q) / (dom.nodes - p)) ** mult
            # (z-p)/(z-q) winds +mult around the curve separating p from q
            # (the outer curve if q is beyond it, hole qc if q is inside it)
            corrections[qc] += mult
        raw = [winding_number(vals[sl])[0] for sl in dom.curve_slices]
        return [r + int(c) for r, c in zip(raw, corrections)]


def assemble_inner(measures: MeasureSet, zeros, lam: complex = 1.0 + 0.0j,
                   tol_integrality: float = 1e-6,
                   boundary_tol: float = 1e-9) -> InnerFunction:
    """Build lambda g_rho prod phi_p from a zero multiset.

    `zeros` is a list of points (repetition encodes multiplicity) or of
    (point, multiplicity) pairs.  Points within boundary_tol of the boundary
    become zero-free boundary atoms.  The winding vector is forced by the
    integrality law rho_j = -sum_l omega_j(p_l); a rounding residual above
    tol_integrality raises InnerError with the residual vector.
    """
    dom = measures.domain
    if abs(abs(lam) - 1.0) > 1e-12:
        raise InnerError(f"lambda must be unimodular, got |lambda|={abs(lam)}")
    norm_zeros = []
    for entry in zeros:
        p, mult = entry if isinstance(entry, tuple) else (entry, 1)
        if mult < 1 or mult != int(mult):
            raise InnerError(f"multiplicity must be a positive integer: {mult}")
        norm_zeros.append((complex(p), int(mult)))

    placed = []
    sums = np.zeros(dom.k)
    for p, mult in norm_zeros:
        if dom.distance_to_boundary(p) <= boundary_tol:
            idx = int(np.argmin(np.abs(dom.nodes - p)))
            ci = int(dom.node_curve[idx])
            placed.append((p, mult, ci))
            if ci > 0:
                sums[ci - 1] += mult     # omega(p) = e_i on hole i
        elif dom.is_interior(p)[0]:
            placed.append((p, mult, None))
            if dom.k:
                sums += mult * measures.omega_vector(np.array([p]))[:, 0]
        else:
            raise InnerError(f"zero {p} is outside the closed domain")

    rho_real = -sums
    rho = np.round(rho_real).astype(int)
    residual = np.abs(rho_real - rho)
    if dom.k and residual.max() > tol_integrality:
        raise InnerError(
            "integrality violation: sum of harmonic measures over the zeros "
            f"is off-integer by {residual.tolist()} (tolerance "
            f"{tol_integrality:g}); complete the zero set first")

    atoms = []
    for p, mult, ci in placed:
        atom = build_phi(measures, p, boundary_curve=ci,
                         guard=0.0 if ci is None else None)
        atoms.append((atom, mult))
    unit = build_g_rho(measures, rho)
    return InnerFunction(measures, complex(lam), placed, rho, atoms, unit)


def evaluate(f: InnerFunction, z):
    """f(z) for z in the closed domain."""
    dom = f.measures.domain
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    near = dom.distance_to_boundary(zz) <= 1e-9
    if not np.all(near | dom.is_interior(zz)):
        raise InnerError("evaluation point outside the closed domain")
    return f.value(z)


def order_of(f: InnerFunction) -> int:
    """Total zero count by the argument principle over the full boundary.

    The stored directions of travel keep the domain on the left, so the sum
    of per-curve windings counts interior zeros with multiplicity.
    """
    dom = f.measures.domain
    for p, mult, ci in f.zeros:
        if ci is None and dom.distance_to_boundary(p) < 0.5 * dom.node_spacing:
            raise InnerError(f"zero {p} too close to the boundary for an "
                             f"unambiguous argument-principle count")
    return int(sum(f.windings()))


def boundary_modulus_deviation(f: InnerFunction) -> float:
    """max over nodes of | |f| - 1 |."""
    return float(np.abs(np.abs(f.boundary_values()) - 1.0).max())


def boundary_limit_check(measures: MeasureSet, p_sequence, limit_point: complex,
                         limit_curve: int, exclusion: float = 0.3) -> dict:
    """Convergence report for phi_{p_n} toward the boundary atom at p.

    Compares moduli on the node set at distance >= exclusion from the limit
    point, and reports the best unimodular phase alignment of the last
    iterate.  Non-monotone behavior is reported, not fatal.
    """
    dom = measures.domain
    limit_atom = build_phi(measures, limit_point, boundary_curve=limit_curve)
    mask = np.abs(dom.nodes - limit_point) >= exclusion
    if not mask.any():
        raise InnerError("exclusion radius removes every test node")
    target = limit_atom.boundary_values()[mask]
    sup_errors = []
    aligned_errors = []
    for p in p_sequence:
        atom = build_phi(measures, p, guard=0.0)
        vals = atom.boundary_values()[mask]
        sup_errors.append(float(np.abs(np.abs(vals) - np.abs(target)).max()))
        inner_prod = np.vdot(vals, target)
        lam = inner_prod / abs(inner_prod) if abs(inner_prod) > 0 else 1.0
        aligned_errors.append(float(np.abs(lam * vals - target).max()))
    diffs = np.diff(sup_errors)
    return {
        "modulus_sup_errors": sup_errors,
        "aligned_phase_errors": aligned_errors,
        "monotone": bool((diffs <= 1e-12).all()) if len(diffs) else True,
        "final_modulus_error": sup_errors[-1],
        "final_aligned_error": aligned_errors[-1],
    }
