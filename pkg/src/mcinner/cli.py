"""Command-line front end.

Loads a domain specification and a problem file, runs the requested
construction or solve, and writes a plain-text report plus CSV plot data
(boundary trace, interior grid of |f|, zero list, and the certificate
sign-margin trace when available).  Reports are deterministic for a fixed
seed and config, except for the timestamp line.

Exit codes: 0 success, 2 solved but classified infeasible, 1 failure.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .geometry import BoundaryCurve, Domain, load_domain
from .inner import (InnerFunction, assemble_inner, boundary_modulus_deviation,
                    build_g_rho, build_phi, order_of)
from .interp import (InterpolationProblem, SolverConfig, feasibility,
                     maximize_matrix_norm, pick_min_m_disk, solve_hermite,
                     solve_min_norm, solve_schwarz)
from .laplace import LaplaceSolver, green, harmonic_measures
from .lattice import build_paths, complete_to_integer

__all__ = ["main", "serialize_inner", "load_inner", "parse_problem",
           "emit_plotdata"]

COMMANDS = ["measures", "green", "phi", "inner", "complete", "solve",
            "schwarz", "hermite", "matrixnorm", "pick", "feasibility"]


def _fmt(x) -> str:
    if isinstance(x, (complex, np.complexfloating)):
        return f"{float(np.real(x))!r} {float(np.imag(x))!r}"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, np.ndarray):
        return " ".join(_fmt(v) for v in x.tolist())
    if isinstance(x, (list, tuple)):
        return " ".join(_fmt(v) for v in x)
    return str(x)


# -- problem files -----------------------------------------------------------


def parse_problem(text: str) -> dict:
    """Parse a problem document.

    Directives (one per line, '#' comments):
      node RE IM TAU_RE TAU_IM [TAU1_RE TAU1_IM ...]   interpolation data
      zero RE IM [MULT]                                prescribed zero
      point RE IM                                      probe/pole point
      row RE IM RE IM ...                              matrix row
      lam RE IM                                        unimodular phase
    """
    out = {"nodes": [], "zeros": [], "points": [], "rows": [], "lam": None}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key, vals = tok[0], tok[1:]
        try:
            if key == "node":
                if len(vals) < 4 or len(vals) % 2:
                    raise ValueError("need RE IM plus value pairs")
                nums = [float(v) for v in vals]
                zeta = complex(nums[0], nums[1])
                data = [complex(nums[i], nums[i + 1])
                        for i in range(2, len(nums), 2)]
                out["nodes"].append((zeta, data))
            elif key == "zero":
                nums = [float(v) for v in vals[:2]]
                mult = int(vals[2]) if len(vals) > 2 else 1
                out["zeros"].append((complex(nums[0], nums[1]), mult))
            elif key == "point":
                out["points"].append(complex(float(vals[0]), float(vals[1])))
            elif key == "row":
                nums = [float(v) for v in vals]
                if len(nums) % 2:
                    raise ValueError("matrix rows need RE IM pairs")
                out["rows"].append([complex(nums[i], nums[i + 1])
                                    for i in range(0, len(nums), 2)])
            elif key == "lam":
                out["lam"] = complex(float(vals[0]), float(vals[1]))
            else:
                raise ValueError(f"unknown directive '{key}'")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"problem file line {ln}: {exc}") from None
    return out


def load_problem(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


# -- inner-function serialization --------------------------------------------


def serialize_inner(f: InnerFunction) -> str:
    """Text form reconstructible with load_inner over the same domain."""
    lines = [f"lam {_fmt(f.lam)}"]
    for p, mult, ci in f.zeros:
        curve = "interior" if ci is None else str(ci)
        lines.append(f"zero {_fmt(p)} {mult} {curve}")
    lines.append(f"rho {' '.join(str(int(r)) for r in f.rho)}")
    return "\n".join(lines) + "\n"


def load_inner(measures, text: str) -> InnerFunction:
    lam = 1.0 + 0.0j
    zeros = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "lam":
            lam = complex(float(tok[1]), float(tok[2]))
        elif tok[0] == "zero":
            p = complex(float(tok[1]), float(tok[2]))
            zeros.append((p, int(tok[3])))
        elif tok[0] == "rho":
            pass                    # recomputed from the zeros
        else:
            raise ValueError(f"unknown inner-function line: {line}")
    return assemble_inner(measures, zeros, lam=lam)


# -- plot data ---------------------------------------------------------------


def emit_plotdata(f, domain: Domain, base: str, certificate=None,
                  grid: int = 40):
    """CSV tables for plotting: boundary trace, |f| grid, zeros, margin."""
    vals = (f.boundary_values() if hasattr(f, "boundary_values")
            else f.value(domain.nodes))
    with open(base + "_boundary.csv", "w", encoding="utf-8") as fh:
        fh.write("x,y,abs_f,arg_f\n")
        for w, v in zip(domain.nodes, vals):
            fh.write(f"{float(w.real)!r},{float(w.imag)!r},"
                     f"{float(abs(v))!r},{float(np.angle(v))!r}\n")
    xs = np.linspace(domain.nodes.real.min(), domain.nodes.real.max(), grid)
    ys = np.linspace(domain.nodes.imag.min(), domain.nodes.imag.max(), grid)
    gx, gy = np.meshgrid(xs, ys)
    pts = (gx + 1j * gy).ravel()
    margin = 0.5 * domain.node_spacing
    keep = (np.abs(domain.winding(pts) - 1.0) < 0.25) \
        & (domain.distance_to_boundary(pts) > margin)
    pts = pts[keep]
    gvals = f.value(pts)
    with open(base + "_grid.csv", "w", encoding="utf-8") as fh:
        fh.write("x,y,abs_f\n")
        for w, v in zip(pts, gvals):
            fh.write(f"{float(w.real)!r},{float(w.imag)!r},"
                     f"{float(abs(v))!r}\n")
    with open(base + "_zeros.csv", "w", encoding="utf-8") as fh:
        fh.write("x,y,mult\n")
        for p, mult, ci in getattr(f, "zeros", []):
            if ci is None:
                fh.write(f"{float(p.real)!r},{float(p.imag)!r},{mult}\n")
    if certificate is not None:
        with open(base + "_signmargin.csv", "w", encoding="utf-8") as fh:
            fh.write("x,y,value\n")
            for w, v in zip(domain.nodes, certificate.boundary_trace):
                fh.write(f"{float(w.real)!r},{float(w.imag)!r},"
                         f"{float(v)!r}\n")


# -- report helpers ----------------------------------------------------------


def _report_solve(lines, rep):
    lines.append(("m_star", rep.m_star))
    lines.append(("objective", rep.objective))
    lines.append(("order", rep.order))
    lines.append(("lam", rep.lam))
    lines.append(("rho", list(rep.rho)))
    if rep.schwarz_c is not None:
        lines.append(("schwarz_c", rep.schwarz_c))
    for i, (p, mult) in enumerate(rep.zeros):
        lines.append((f"zero_{i}", [p, mult]))
    for key in sorted(rep.diagnostics):
        lines.append((f"diagnostic.{key}", rep.diagnostics[key]))
    cert = rep.certificate
    if cert is not None:
        lines.append(("certificate.residual", cert.residual))
        lines.append(("certificate.sign_margin", cert.sign_margin))
        lines.append(("certificate.realness", cert.boundary_realness))
        lines.append(("certificate.ell0", cert.multipliers["ell0"]))
        lines.append(("certificate.log", cert.multipliers["log"]))
        lines.append(("certificate.arg", cert.multipliers["arg"]))
        lines.append(("certificate.measure", cert.multipliers["measure"]))
        for key in sorted(cert.count):
            lines.append((f"certificate.count.{key}", cert.count[key]))


def _need(value, what: str):
    if value is None or (hasattr(value, "__len__") and len(value) == 0):
        raise ValueError(f"this command needs {what}")
    return value


# -- command dispatch --------------------------------------------------------


def _dispatch(args, lines):
    domain = None
    measures = None
    if args.domain:
        domain = load_domain(args.domain)
        if args.nodes:
            domain = Domain(
                BoundaryCurve(domain.outer.coeffs, args.nodes),
                [BoundaryCurve(h.coeffs, args.nodes) for h in domain.holes])
    problem = load_problem(args.problem) if args.problem else None

    def get_measures():
        nonlocal measures
        if measures is None:
            measures = harmonic_measures(_need(domain, "--domain"))
        return measures

    cfg = SolverConfig(starts=args.starts, seed=args.seed,
                       tol_solve=args.tol_solve,
                       tol_integrality=args.tol_integrality)

    cmd = args.command
    exit_code = 0
    plot_f = None
    cert = None

    if cmd == "measures":
        ms = get_measures()
        lines.append(("k", domain.k))
        lines.append(("n_total", domain.n_total))
        for i in range(domain.k):
            lines.append((f"period_matrix_row_{i}", ms.period_matrix[i]))
        for j in range(domain.k + 1):
            lines.append((f"flux_row_{j}", ms.omegas[j].fluxes()))
    elif cmd == "green":
        p = _need(problem, "--problem")["points"]
        gp = green(domain, get_measures(), _need(p, "a 'point' line")[0])
        lines.append(("pole", p[0]))
        lines.append(("boundary_fluxes", gp.boundary_fluxes()))
        if len(p) > 1:
            lines.append(("value_at_probe", gp.value(p[1])))
    elif cmd == "phi":
        p = _need(_need(problem, "--problem")["points"], "a 'point' line")
        atom = build_phi(get_measures(), p[0])
        lines.append(("p", p[0]))
        lines.append(("derivative_at_zero", atom.derivative_at_zero()))
        lines.append(("conj_period_residual", atom.conj_period_residual))
        bv = atom.boundary_values()
        lines.append(("boundary_modulus_deviation",
                      float(np.abs(np.abs(bv) - 1.0)
                            [domain.curve_slices[0]].max())))
        plot_f = atom
    elif cmd == "inner":
        zeros = _need(_need(problem, "--problem")["zeros"], "'zero' lines")
        lam = problem["lam"] if problem["lam"] is not None else 1.0 + 0.0j
        f = assemble_inner(get_measures(), zeros, lam=lam,
                           tol_integrality=args.tol_integrality)
        lines.append(("order", order_of(f)))
        lines.append(("rho", list(f.rho)))
        lines.append(("boundary_modulus_deviation",
                      boundary_modulus_deviation(f)))
        lines.append(("windings", f.windings()))
        with open(args.out + ".inner", "w", encoding="utf-8") as fh:
            fh.write(serialize_inner(f))
        plot_f = f
    elif cmd == "complete":
        pts = _need(_need(problem, "--problem")["points"], "'point' lines")
        ms = get_measures()
        paths = build_paths(domain, ms, forbidden=pts, seed=args.seed)
        extra = complete_to_integer(ms, paths, pts,
                                    tol=args.tol_integrality)
        lines.append(("input_count", len(pts)))
        lines.append(("added_count", len(extra)))
        for i, q in enumerate(extra):
            lines.append((f"added_{i}", q))
        total = ms.omega_vector(np.array(list(pts) + extra)).sum(axis=1)
        lines.append(("measure_sums", total))
        lines.append(("integrality_residual",
                      float(np.abs(total - np.round(total)).max())
                      if domain.k else 0.0))
    elif cmd in ("solve", "hermite", "feasibility"):
        nodes = _need(_need(problem, "--problem")["nodes"], "'node' lines")
        zetas = [z for z, _ in nodes]
        if cmd == "hermite":
            ip = InterpolationProblem(np.asarray(zetas, dtype=complex),
                                      [d for _, d in nodes])
            rep = solve_hermite(ip, get_measures(), cfg)
        else:
            if any(len(d) != 1 for _, d in nodes):
                raise ValueError("plain solve needs one value per node; "
                                 "use the hermite command")
            ip = InterpolationProblem.plain_problem(
                zetas, [d[0] for _, d in nodes])
            if cmd == "feasibility":
                label, rep = feasibility(ip, get_measures(), cfg)
                lines.append(("classification", label))
                if label == "infeasible":
                    exit_code = 2
            else:
                rep = solve_min_norm(ip, get_measures(), cfg)
        _report_solve(lines, rep)
        with open(args.out + ".inner", "w", encoding="utf-8") as fh:
            fh.write(serialize_inner(rep.h))
        plot_f, cert = rep.h, rep.certificate
    elif cmd == "schwarz":
        rep = solve_schwarz(get_measures(), cfg)
        _report_solve(lines, rep)
        with open(args.out + ".inner", "w", encoding="utf-8") as fh:
            fh.write(serialize_inner(rep.h))
        plot_f, cert = rep.h, rep.certificate
    elif cmd == "matrixnorm":
        rows = _need(_need(problem, "--problem")["rows"], "'row' lines")
        a = np.array(rows, dtype=complex)
        f0, value, diag = maximize_matrix_norm(a, get_measures(), cfg)
        lines.append(("value", value))
        lines.append(("order", order_of(f0)))
        for key in sorted(diag):
            lines.append((f"diagnostic.{key}", diag[key]))
        with open(args.out + ".inner", "w", encoding="utf-8") as fh:
            fh.write(serialize_inner(f0))
        plot_f = f0
    elif cmd == "pick":
        nodes = _need(_need(problem, "--problem")["nodes"], "'node' lines")
        if any(len(d) != 1 for _, d in nodes):
            raise ValueError("the disk oracle needs plain data")
        m = pick_min_m_disk([z for z, _ in nodes], [d[0] for _, d in nodes])
        lines.append(("m_star", m))
    else:
        raise ValueError(f"unknown command {cmd}")

    if plot_f is not None and domain is not None:
        emit_plotdata(plot_f, domain, args.out, certificate=cert,
                      grid=args.grid)
    return exit_code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcinner",
        description="Inner functions and minimal-norm interpolation on "
                    "multiply connected domains.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--domain", help="domain specification file")
    parser.add_argument("--problem", help="problem file (nodes, zeros, "
                        "points, matrix rows)")
    parser.add_argument("--out", default="report.txt",
                        help="report path (default: report.txt); plot CSVs "
                        "and .inner files use this as base name")
    parser.add_argument("--nodes", type=int, default=0,
                        help="override quadrature nodes per curve (default: "
                        "value from the domain file)")
    parser.add_argument("--seed", type=int, default=0,
                        help="random seed for multistart (default: 0)")
    parser.add_argument("--tol-integrality", type=float, default=1e-6,
                        help="winding integrality tolerance (default: 1e-6)")
    parser.add_argument("--tol-solve", type=float, default=1e-9,
                        help="constraint tolerance for solves "
                        "(default: 1e-9)")
    parser.add_argument("--starts", type=int, default=12,
                        help="multistart budget (default: 12)")
    parser.add_argument("--grid", type=int, default=40,
                        help="interior plot-grid resolution (default: 40)")
    args = parser.parse_args(argv)

    lines = []
    try:
        exit_code = _dispatch(args, lines)
    except Exception as exc:
        print(f"error: {type(exc).__module__}.{type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1

    stamp = datetime.now(timezone.utc).isoformat()
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"tool = mcinner {__version__}\n")
        fh.write(f"timestamp = {stamp}\n")
        fh.write(f"command = {args.command}\n")
        fh.write("[config]\n")
        for key in ("domain", "problem", "out", "nodes", "seed",
                    "tol_integrality", "tol_solve", "starts", "grid"):
            fh.write(f"{key} = {_fmt(getattr(args, key))}\n")
        fh.write("[result]\n")
        fh.write(f"exit_code = {exit_code}\n")
        for key, value in lines:
            fh.write(f"{key} = {_fmt(value)}\n")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
