"""Multiply connected planar domains bounded by analytic Fourier curves.

A domain is an exterior curve plus k interior hole curves, each stored as a
truncated Fourier series z(theta) = sum c_n exp(i n theta).  After loading,
every curve is oriented so that the domain lies to the left of the direction
of travel (outer curve counterclockwise, holes clockwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "BoundaryCurve",
    "BoundaryPoint",
    "Domain",
    "load_domain",
    "parse_domain",
]


class DomainError(ValueError):
    """Invalid domain specification or geometry."""


@dataclass(frozen=True)
class BoundaryCurve:
    """One analytic closed curve, z(theta) = sum_{|n|<=M} c_n e^{i n theta}."""

    coeffs: np.ndarray          # complex, length 2M+1, index n = -M..M
    n_nodes: int                # number of equispaced quadrature nodes

    @property
    def order(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def _modes(self) -> np.ndarray:
        m = self.order
        return np.arange(-m, m + 1)

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        ph = np.exp(1j * np.multiply.outer(theta, self._modes()))
        return ph @ self.coeffs

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self._modes()
        ph = np.exp(1j * np.multiply.outer(theta, n))
        return ph @ (1j * n * self.coeffs)

    def second_derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        n = self._modes()
        ph = np.exp(1j * np.multiply.outer(theta, n))
        return ph @ (-(n**2) * self.coeffs)

    def reversed(self) -> "BoundaryCurve":
        """Same trace, opposite direction of travel (theta -> -theta)."""
        return BoundaryCurve(self.coeffs[::-1].copy(), self.n_nodes)

    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_nodes) / self.n_nodes

    def signed_area(self) -> float:
        """Area enclosed, positive for counterclockwise travel."""
        t = self.thetas()
        z = self.point(t)
        dz = self.derivative(t)
        return float(np.imag(np.conj(z) @ dz) * np.pi / self.n_nodes)


@dataclass(frozen=True)
class BoundaryPoint:
    """A point on the boundary with local frame (domain on the left)."""

    curve_index: int
    theta: float
    position: complex
    unit_tangent: complex
    outward_normal: complex


class Domain:
    """Validated multiply connected domain; immutable after construction."""

    def __init__(self, outer: BoundaryCurve, holes: list[BoundaryCurve]):
        # the solver convention needs the domain to the left of the travel
        # direction on every curve
        self.outer = _orient(outer, counterclockwise=True)
        self.holes = [_orient(h, counterclockwise=False) for h in holes]
        self.k = len(self.holes)
        self.curves = [self.outer] + self.holes
        self._build_nodes()
        self._validate()

    # -- node tables -------------------------------------------------------

    def _build_nodes(self):
        pos, dz, ddz, w, idx, th = [], [], [], [], [], []
        self.curve_slices = []
        start = 0
        for ci, c in enumerate(self.curves):
            t = c.thetas()
            z = c.point(t)
            d1 = c.derivative(t)
            d2 = c.second_derivative(t)
            h = 2.0 * np.pi / c.n_nodes
            pos.append(z)
            dz.append(d1)
            ddz.append(d2)
            w.append(np.abs(d1) * h)
            idx.append(np.full(c.n_nodes, ci))
            th.append(t)
            self.curve_slices.append(slice(start, start + c.n_nodes))
            start += c.n_nodes
        self.nodes = np.concatenate(pos)
        self.node_dz = np.concatenate(dz)
        self.node_ddz = np.concatenate(ddz)
        self.weights = np.concatenate(w)
        self.node_curve = np.concatenate(idx)
        self.node_theta = np.concatenate(th)
        self.n_total = len(self.nodes)
        self.tangents = self.node_dz / np.abs(self.node_dz)
        self.normals = -1j * self.tangents
        # median spacing along each curve, used for guard zones
        self.node_spacing = float(np.median(self.weights))
        # 4x upsampled traces, shared by distance and winding queries
        self._trace_pts = []
        self._trace_dz = []
        for c in self.curves:
            tt = 2 * np.pi * np.arange(4 * c.n_nodes) / (4 * c.n_nodes)
            self._trace_pts.append(c.point(tt))
            self._trace_dz.append(c.derivative(tt))

    # -- validation --------------------------------------------------------

    def _validate(self):
        for ci, c in enumerate(self.curves):
            sl = self.curve_slices[ci]
            d = np.abs(self.node_dz[sl])
            if d.min() < 1e-12 * max(d.max(), 1.0):
                raise DomainError(f"curve {ci}: degenerate parametrization "
                                  f"(z'(theta) ~ 0 at a node)")
            z = self.nodes[sl]
            self._check_simple(ci, z)
        self._check_disjoint()
        self._check_nesting()
        self.interior_reference = self._find_interior_point()
        self._check_connected()

    @staticmethod
    def _check_simple(ci, z):
        n = len(z)
        dist = np.abs(z[:, None] - z[None, :])
        i = np.arange(n)
        sep = np.minimum(np.abs(i[:, None] - i[None, :]),
                         n - np.abs(i[:, None] - i[None, :]))
        mask = sep > 2
        if mask.any() and dist[mask].min() <= 1e-10:
            raise DomainError(f"curve {ci} self-intersects at quadrature "
                              f"resolution")

    def _check_disjoint(self):
        for i in range(len(self.curves)):
            zi = self.nodes[self.curve_slices[i]]
            for j in range(i + 1, len(self.curves)):
                zj = self.nodes[self.curve_slices[j]]
                d = np.abs(zi[:, None] - zj[None, :]).min()
                if d <= 1e-8:
                    raise DomainError(f"curves {i} and {j} intersect "
                                      f"(min node distance {d:.3e})")

    def _check_nesting(self):
        for j, hole in enumerate(self.holes, start=1):
            zh = self.nodes[self.curve_slices[j]]
            wind = _winding_of_curve(self.outer, zh)
            if not np.allclose(wind, 1.0, atol=1e-6):
                raise DomainError(f"hole {j} is not strictly inside the "
                                  f"outer curve")
            for l, other in enumerate(self.holes, start=1):
                if l == j:
                    continue
                wind = np.abs(_winding_of_curve(other, zh))
                if wind.max() > 0.5:
                    raise DomainError(f"hole {j} lies inside hole {l}")

    def _find_interior_point(self) -> complex:
        rng = np.random.default_rng(0)
        lo, hi = self._bbox()
        for _ in range(4000):
            z = complex(rng.uniform(lo.real, hi.real),
                        rng.uniform(lo.imag, hi.imag))
            if (self.contains(z) == "interior"
                    and self.distance_to_boundary(z) > 2 * self.node_spacing):
                return z
        raise DomainError("domain appears to be empty (no interior point "
                          "found by sampling)")

    def _check_connected(self, n_grid: int = 48):
        """Flood-fill connectivity of interior samples on a coarse grid."""
        lo, hi = self._bbox()
        xs = np.linspace(lo.real, hi.real, n_grid)
        ys = np.linspace(lo.imag, hi.imag, n_grid)
        gx, gy = np.meshgrid(xs, ys)
        pts = (gx + 1j * gy).ravel()
        inside = self.is_interior(pts)
        guard = self.distance_to_boundary(pts) > 0.5 * self.node_spacing
        mask = (inside & guard).reshape(n_grid, n_grid)
        if not mask.any():
            return  # too coarse to sample; nonemptiness was checked already
        labels = _flood_components(mask)
        if labels > 1:
            raise DomainError("domain interior appears disconnected at "
                              "sampling resolution")

    def _bbox(self):
        z = self.nodes[self.curve_slices[0]]
        return (complex(z.real.min(), z.imag.min()),
                complex(z.real.max(), z.imag.max()))

    # -- queries -----------------------------------------------------------

    def boundary_point(self, curve_index: int, theta: float) -> BoundaryPoint:
        c = self.curves[curve_index]
        z = complex(c.point(theta))
        d = complex(c.derivative(theta))
        tan = d / abs(d)
        return BoundaryPoint(curve_index, float(theta % (2 * np.pi)), z,
                             tan, -1j * tan)

    def node_points(self) -> list[BoundaryPoint]:
        return [BoundaryPoint(int(self.node_curve[i]),
                              float(self.node_theta[i]),
                              complex(self.nodes[i]),
                              complex(self.tangents[i]),
                              complex(self.normals[i]))
                for i in range(self.n_total)]

    def quadrature(self):
        """(node positions, arclength weights) over the whole boundary."""
        return self.nodes, self.weights

    def distance_to_boundary(self, z):
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        # upsampled trace keeps the estimate well below one node spacing
        dmin = np.full(len(zz), np.inf)
        for zc in self._trace_pts:
            dmin = np.minimum(dmin,
                              np.abs(zc[None, :] - zz[:, None]).min(axis=-1))
        return float(dmin[0]) if scalar else dmin

    def winding(self, z) -> np.ndarray:
        """Total winding of the oriented boundary around z (1 inside)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        total = np.zeros(len(z))
        for w, dw in zip(self._trace_pts, self._trace_dz):
            with np.errstate(divide="ignore", invalid="ignore"):
                ker = dw[None, :] / (w[None, :] - z[:, None])
            raw = np.nan_to_num(np.imag(ker.sum(axis=1)) / len(w), nan=0.0,
                                posinf=0.0, neginf=0.0)
            total += np.round(raw)
        return total

    def contains(self, z, eps: float = 0.0):
        """Classify points as 'interior', 'boundary' (within eps), 'exterior'."""
        scalar = np.isscalar(z) or np.asarray(z).ndim == 0
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.where(np.abs(self.winding(zz) - 1.0) < 0.25,
                       "interior", "exterior").astype(object)
        if eps > 0:
            out[self.distance_to_boundary(zz) < eps] = "boundary"
        return str(out[0]) if scalar else out

    def is_interior(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.abs(self.winding(z) - 1.0) < 0.25


def _flood_components(mask: np.ndarray) -> int:
    """Number of 4-connected True components in a boolean grid."""
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    nr, nc = mask.shape
    for r0 in range(nr):
        for c0 in range(nc):
            if mask[r0, c0] and not seen[r0, c0]:
                count += 1
                stack = [(r0, c0)]
                seen[r0, c0] = True
                while stack:
                    r, c = stack.pop()
                    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                        rr, cc = r + dr, c + dc
                        if (0 <= rr < nr and 0 <= cc < nc
                                and mask[rr, cc] and not seen[rr, cc]):
                            seen[rr, cc] = True
                            stack.append((rr, cc))
    return count


def _winding_of_curve(curve: BoundaryCurve, z: np.ndarray) -> np.ndarray:
    """Winding number of one curve around each z, by quadrature.

    Uses 4x upsampling; reliable away from the curve itself.
    """
    n = 4 * curve.n_nodes
    t = 2 * np.pi * np.arange(n) / n
    w = curve.point(t)
    dw = curve.derivative(t)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore", invalid="ignore"):
        ker = dw[None, :] / (w[None, :] - z[:, None])
    raw = np.nan_to_num(np.imag(ker.sum(axis=1)) / n, nan=0.0,
                        posinf=0.0, neginf=0.0)
    return np.round(raw).astype(float)


# -- domain-spec document ----------------------------------------------------

_GRAMMAR = """\
Domain-spec grammar (UTF-8 text, '#' starts a comment):

    curve (outer|hole)
      nodes  <positive integer>
      coeff  <index> <re> <im>      # one line per Fourier coefficient

Exactly one outer curve; zero or more holes.  Coefficients default to zero.
"""


def parse_domain(text: str) -> Domain:
    """Parse a domain-spec document and return a validated Domain."""
    records = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "curve":
                if len(parts) != 2 or parts[1] not in ("outer", "hole"):
                    raise DomainError("expected 'curve outer' or 'curve hole'")
                current = {"role": parts[1], "nodes": None, "coeffs": {}}
                records.append(current)
            elif parts[0] == "nodes":
                current["nodes"] = int(parts[1])
            elif parts[0] == "coeff":
                idx = int(parts[1])
                current["coeffs"][idx] = float(parts[2]) + 1j * float(parts[3])
            else:
                raise DomainError(f"unknown keyword {parts[0]!r}")
        except DomainError:
            raise
        except Exception as exc:
            raise DomainError(f"line {lineno}: cannot parse {raw!r} ({exc})")
    if not records:
        raise DomainError("empty domain specification")

    outer = None
    holes = []
    for rec in records:
        curve = _record_to_curve(rec)
        if rec["role"] == "outer":
            if outer is not None:
                raise DomainError("multiple outer curves")
            outer = curve
        else:
            holes.append(curve)
    if outer is None:
        raise DomainError("no outer curve")

    outer = _orient(outer, counterclockwise=True)
    holes = [_orient(h, counterclockwise=False) for h in holes]
    return Domain(outer, holes)


def _record_to_curve(rec) -> BoundaryCurve:
    if not rec["coeffs"]:
        raise DomainError("curve without coefficients")
    m = max(abs(i) for i in rec["coeffs"])
    coeffs = np.zeros(2 * m + 1, dtype=complex)
    for i, c in rec["coeffs"].items():
        coeffs[i + m] = c
    n_nodes = rec["nodes"] if rec["nodes"] is not None else max(4 * m + 16, 64)
    if n_nodes < 4 * m + 16:
        raise DomainError(f"quadrature_order {n_nodes} < 4M+16 = {4 * m + 16}")
    return BoundaryCurve(coeffs, n_nodes)


def _orient(curve: BoundaryCurve, counterclockwise: bool) -> BoundaryCurve:
    area = curve.signed_area()
    if abs(area) < 1e-14:
        raise DomainError("curve encloses no area")
    if (area > 0) != counterclockwise:
        return curve.reversed()
    return curve


def load_domain(path) -> Domain:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())
