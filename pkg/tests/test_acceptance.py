"""Acceptance suite: closed-form oracles and property checks at 256 nodes.

Each criterion prints one PASS/FAIL line (bypassing capture so the line
is visible in the test log) and asserts the same condition.
"""

import dataclasses
import sys

import numpy as np
import pytest

from mcinner.inner import (assemble_inner, boundary_modulus_deviation,
                           build_phi, order_of)
from mcinner.interp import (InterpolationProblem, SolveError, SolverConfig,
                            maximize_matrix_norm, pick_min_m_disk,
                            solve_hermite, solve_min_norm, solve_schwarz)
from mcinner.laplace import green
from mcinner.lattice import build_paths, complete_to_integer

from conftest import random_interior

CFG = SolverConfig(starts=6, seed=0)


def report(num, ok, detail):
    line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


def mobius(p, z):
    return (z - p) / (1.0 - np.conj(p) * z)


def robust_solve(problem, measures, cfg=CFG):
    try:
        return solve_min_norm(problem, measures, cfg)
    except SolveError:
        # a larger multistart budget is legitimate for hard instances
        retry = dataclasses.replace(cfg, starts=2 * cfg.starts,
                                    seed=cfg.seed + 101)
        return solve_min_norm(problem, measures, retry)


def plain_instance(domain, rng, r):
    zetas = random_interior(domain, rng, r, margin=0.2)
    taus = rng.uniform(-1, 1, r) + 1j * rng.uniform(-1, 1, r)
    return zetas, taus


# shared solve results: orders for criterion 8, agreement for criterion 12
SOLVED = {"orders": [], "agreement": [], "bounds": []}


def record(rep, bound):
    SOLVED["orders"].append(rep.order)
    SOLVED["bounds"].append(bound)
    SOLVED["agreement"].append(
        float(rep.diagnostics.get("multistart_agreement", 0.0)))


def test_criterion_01_disk_mobius(disk256):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        p, z = random_interior(disk256.domain, rng, 2, margin=0.12,
                               separation=0.05)
        atom = build_phi(disk256, p)
        # gauge-align through the derivative at the zero
        lam = (1.0 - abs(p) ** 2) / (1.0 - abs(p) ** 2) ** 2 \
            / atom.derivative_at_zero()
        lam /= abs(lam)
        worst = max(worst, abs(lam * atom.value(z) - mobius(p, z)))
    report(1, worst < 1e-6, f"disk atom vs Mobius, max error {worst:.3e}")


def test_criterion_02_annulus_measure(annulus256):
    rng = np.random.default_rng(11)
    z = random_interior(annulus256.domain, rng, 100, margin=0.1,
                        separation=0.0)
    err = np.abs(annulus256.omegas[1].value(z)
                 - (1.0 - np.log(np.abs(z)))).max()
    m11 = float(annulus256.period_matrix[0, 0])
    ok = err < 1e-8 and abs(m11 - 2 * np.pi) < 1e-6
    report(2, ok, f"omega_1 error {err:.3e}, m11 - 2pi = "
                  f"{m11 - 2 * np.pi:.3e}")


def test_criterion_03_green(disk256, annulus256):
    worst_sym = worst_flux = 0.0
    for ms, seed in ((disk256, 12), (annulus256, 13)):
        rng = np.random.default_rng(seed)
        poles = random_interior(ms.domain, rng, 10, margin=0.12)
        fields = [green(ms.domain, ms, p) for p in poles]
        for i in range(0, 10, 2):
            worst_sym = max(worst_sym, abs(
                fields[i].value(poles[i + 1]) - fields[i + 1].value(poles[i])))
        for p, g in zip(poles, fields):
            fluxes = g.boundary_fluxes()
            for j in range(ms.k):
                om = float(ms.omegas[j + 1].value(np.array([p]))[0])
                worst_flux = max(worst_flux, abs(fluxes[j + 1] + om))
            worst_flux = max(worst_flux, abs(fluxes.sum() + 1.0))
    ok = worst_sym < 1e-7 and worst_flux < 1e-7
    report(3, ok, f"symmetry {worst_sym:.3e}, flux {worst_flux:.3e}")


def test_criterion_04_order_law(annulus256, two_hole256):
    p1 = np.exp(0.35)
    p2 = np.exp(0.65) * np.exp(0.8j)
    f = assemble_inner(annulus256, [p1, p2])
    dev = boundary_modulus_deviation(f)
    ok = order_of(f) == 2 and dev < 1e-6
    orders_ok = True
    detail_orders = []
    rng = np.random.default_rng(14)
    for ms in (annulus256, two_hole256):
        pts = random_interior(ms.domain, rng, 2, margin=0.25)
        paths = build_paths(ms.domain, ms, forbidden=pts, seed=3)
        extra = complete_to_integer(ms, paths, pts)
        g = assemble_inner(ms, list(pts) + extra)
        detail_orders.append(order_of(g))
        orders_ok = orders_ok and order_of(g) >= ms.k + 1
    report(4, ok and orders_ok,
           f"two-zero order {order_of(f)}, modulus dev {dev:.3e}, "
           f"completed orders {detail_orders} vs k+1")


def test_criterion_05_lattice(annulus256, two_hole256):
    worst = 0.0
    min_dist = np.inf
    count_ok = True
    trials = 0
    for ms, base_seed in ((annulus256, 20), (two_hole256, 40)):
        for t in range(10):
            rng = np.random.default_rng(base_seed + t)
            pts = random_interior(ms.domain, rng,
                                  int(rng.integers(1, 4)), margin=0.2)
            paths = build_paths(ms.domain, ms, forbidden=pts, seed=t)
            extra = complete_to_integer(ms, paths, pts)
            count_ok = count_ok and len(extra) <= ms.k
            allp = np.array(list(pts) + extra)
            total = ms.omega_vector(allp).sum(axis=1)
            worst = max(worst, float(
                np.abs(total - np.round(total)).max()))
            d = np.abs(allp[:, None] - allp[None, :])
            np.fill_diagonal(d, np.inf)
            min_dist = min(min_dist, float(d.min()))
            trials += 1
    ok = trials == 20 and count_ok and worst < 1e-6 and min_dist > 1e-6
    report(5, ok, f"20 completions, integrality {worst:.3e}, "
                  f"min distinctness {min_dist:.3e}")


def test_criterion_06_pick_agreement(disk256):
    rng = np.random.default_rng(30)
    worst = 0.0
    label_ok = True
    for i in range(50):
        r = int(rng.integers(1, 5))
        zetas, taus = plain_instance(disk256.domain, rng, r)
        rep = robust_solve(
            InterpolationProblem.plain_problem(zetas, taus), disk256)
        record(rep, r + disk256.k - 1)
        oracle = pick_min_m_disk(zetas, taus)
        worst = max(worst, abs(rep.m_star - oracle))
        # feasibility classification against the Pick PSD test at m = 1
        mat = ((1.0 - np.outer(taus, taus.conj()))
               / (1.0 - np.outer(zetas, zetas.conj())))
        psd = bool(np.linalg.eigvalsh(mat).min() >= -1e-8)
        solver_feasible = rep.m_star <= 1.0 + CFG.tol_equality
        label_ok = label_ok and (psd == solver_feasible)
    ok = worst < 1e-5 and label_ok
    report(6, ok, f"50 instances, max |m* - oracle| {worst:.3e}, "
                  f"feasibility match {label_ok}")


def test_criterion_07_schwarz(disk256, one_hole256):
    rep = solve_schwarz(disk256, CFG)
    z = np.array([0.5 + 0.2j, -0.4j, 0.1 + 0.7j])
    disk_err = max(abs(rep.schwarz_c - 1.0),
                   float(np.abs(rep.h.value(z) - z).max()))
    rep2 = solve_schwarz(one_hole256, CFG)
    record(rep2, 1 + one_hole256.k)
    cert = rep2.certificate
    cert_ok = (cert is not None and cert.residual < 1e-4
               and cert.sign_margin <= 1e-6)
    ok = disk_err < 1e-6 and rep2.order == 2 and cert_ok
    report(7, ok, f"disk error {disk_err:.3e}; one-hole order {rep2.order}, "
                  f"certificate residual "
                  f"{cert.residual if cert else np.nan:.3e}, "
                  f"margin {cert.sign_margin if cert else np.nan:.3e}")


def test_criterion_09_hermite_schwarz(disk256):
    prob = InterpolationProblem(np.array([0.0 + 0.0j]), [[0.0, 1.0]])
    rep = solve_hermite(prob, disk256, CFG)
    record(rep, prob.sigma1 + disk256.k - 1)
    z = np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.6j])
    err = float(np.abs(rep.m_star * rep.h.value(z) - z).max())
    ok = abs(rep.m_star - 1.0) < 1e-5 and err < 1e-5
    SOLVED["hermite_prob"] = prob
    SOLVED["hermite_m"] = rep.m_star
    SOLVED["hermite_order"] = rep.order
    report(9, ok, f"m* - 1 = {rep.m_star - 1.0:.3e}, |f - z| {err:.3e}")


def test_criterion_10_matrix_norm(disk256):
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    f0, value, diag = maximize_matrix_norm(a, disk256, CFG)
    z = np.array([0.4 + 0.1j, -0.2 - 0.3j])
    got = f0.value(z)
    gauge = z[0] / got[0]
    gauge /= abs(gauge)
    err = float(np.abs(gauge * got - z).max())
    check = diag["hermite_check_m_star"]
    ok = (abs(value - 1.0) < 1e-4 and err < 1e-4
          and abs(check - 1.0) < 1e-4)
    report(10, ok, f"value - 1 = {value - 1.0:.3e}, |f0 - z| {err:.3e}, "
                   f"reduction m* - 1 = {check - 1.0:.3e}")


def test_criterion_11_homogeneity_monotonicity(disk256):
    rng = np.random.default_rng(50)
    worst_h = worst_m = 0.0
    for i in range(20):
        r = 1 + i % 2
        zetas, taus = plain_instance(disk256.domain, rng, r + 1)
        zetas, extra_node = zetas[:r], zetas[r]
        taus = taus[:r]
        rep = robust_solve(
            InterpolationProblem.plain_problem(zetas, taus), disk256)
        record(rep, r + disk256.k - 1)
        lam = rng.uniform(0.3, 2.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        rep_s = robust_solve(
            InterpolationProblem.plain_problem(zetas, lam * taus), disk256)
        worst_h = max(worst_h, abs(rep_s.m_star - abs(lam) * rep.m_star))
        tau0 = rep.m_star * rep.h.value(extra_node)
        rep_a = robust_solve(
            InterpolationProblem.plain_problem(
                list(zetas) + [extra_node], np.append(taus, tau0)), disk256)
        record(rep_a, r + disk256.k)
        worst_m = max(worst_m, abs(rep_a.m_star - rep.m_star))
    ok = worst_h < 1e-6 and worst_m < 1e-6
    report(11, ok, f"20 instances, homogeneity {worst_h:.3e}, "
                   f"monotonicity {worst_m:.3e}")


def test_criterion_08_order_bounds(disk256):
    # runs after 6, 7, 9, 11 have recorded their solves
    bounds_ok = all(o <= b for o, b in zip(SOLVED["orders"],
                                           SOLVED["bounds"]))
    prob = SOLVED.get("hermite_prob")
    assert prob is not None, "criterion 9 must run first"
    enlarged = dataclasses.replace(CFG,
                                   order_budget=SOLVED["hermite_order"] + 1)
    rep = solve_hermite(prob, disk256, enlarged)
    dh = abs(rep.m_star - SOLVED["hermite_m"])
    prob2 = InterpolationProblem.plain_problem(
        [0.0, 0.4, -0.3j], [0.5, -0.2, 0.1 + 0.1j])
    rep_a = solve_min_norm(prob2, disk256, CFG)
    rep_b = solve_min_norm(prob2, disk256,
                           dataclasses.replace(CFG,
                                               order_budget=rep_a.order + 1))
    dp = abs(rep_a.m_star - rep_b.m_star)
    ok = bounds_ok and dh < 1e-6 and dp < 1e-6
    report(8, ok, f"{len(SOLVED['orders'])} solves within order bounds: "
                  f"{bounds_ok}; budget enlargement changes {dh:.3e} "
                  f"(Hermite), {dp:.3e} (plain)")


def test_criterion_12_uniqueness_surrogate():
    agreement = SOLVED["agreement"]
    assert agreement, "criteria 6-9 must run first"
    worst = max(agreement)
    report(12, worst < 1e-4,
           f"multistart agreement over {len(agreement)} solves, "
           f"max spread {worst:.3e}")
