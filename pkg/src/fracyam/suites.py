"""Verification suites: per-module checks gathered into deterministic, id-sorted report lists."""

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import appendix_oracle as apx
from . import energy, extension_verify as ev, interaction as inter, minimizer
from .bubble import (BubbleParams, BubbleTrace, CallableTrace, W_closed_form, W_derivatives_32, extend,
                     extension_jet, w_eval)
from .constants import ParamPoint, constants, gamma_fn, poisson_normalization_check
from .errors import DomainError
from .quad import Boundary, HalfBall, QuadratureSpec, integrate_radial, mc_oracle
from .report import Status, VerificationReport, judge, timed

SUITES = ("constants", "quad", "bubble", "extension", "appendix", "energy", "interaction", "landscape",
          "minimize")
CONSTANT_POINTS = ((3, 0.5), (4, 0.75), (7, 1.5), (8, 1.2))


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _simple(check_id, params, computed, reference, tol, elapsed=0, **details):
    ok = _rel(computed, reference) <= tol if reference != 0 else abs(computed) <= tol
    return VerificationReport(check_id, params, computed, reference, tol, judge(ok), elapsed, details=details)


# constants -------------------------------------------------------------------------

def constants_suite(points=CONSTANT_POINTS, mass_tol=1e-6, fast=False):
    out = []
    for x, ref in ((0.5, math.sqrt(math.pi)), (5.0, 24.0), (-0.5, -2 * math.sqrt(math.pi))):
        with timed() as t:
            v = gamma_fn(x)
        out.append(_simple(f"constants.gamma_fn.x{x:g}", {"x": x}, v, ref, 1e-12, t[0]))
    c = constants(ParamPoint(3, 0.5))
    out.append(_simple("constants.half_order_values", {"n": 3, "gamma": 0.5}, c.kappa_gamma, 1.0, 1e-12,
                       d_gamma=c.d_gamma))
    kappas = [constants(ParamPoint(n, g)).kappa_gamma
              for n in (3, 5, 8, 13) for g in (0.1, 0.45, 0.9, 1.1, 1.49) if g < n / 2]
    out.append(VerificationReport("constants.kappa_positive", {"points": len(kappas)}, min(kappas), "none", 0.0,
                                  judge(min(kappas) > 0)))
    for n, g in points:
        p = ParamPoint(n, g)
        cs = constants(p)
        out.append(_simple("constants.sharp_identity", p.as_dict(), cs.Y_sphere * cs.S_n_gamma, cs.kappa_gamma,
                           1e-14))
        with timed() as t:
            spec = QuadratureSpec(Boundary(), 0.0, n, rel_tol=1e-10, scales=(1.0,))
            res = integrate_radial(lambda r, x: BubbleTrace(p)(r) ** p.crit_exp, spec)
        out.append(_simple("constants.bubble_mass", p.as_dict(), res.value, cs.Y_sphere ** (n / (2 * g)),
                           mass_tol, t[0], converged=res.converged))
    for n, g, xN in ((3, 0.5, 1.0), (7, 1.5, 0.1), (4, 0.75, 10.0)):
        p = ParamPoint(n, g)
        with timed() as t:
            v = poisson_normalization_check(p, xN)
        out.append(_simple("constants.poisson_normalization", {**p.as_dict(), "xN": xN}, v, 1.0, 1e-8, t[0]))
    return out


# quadrature ------------------------------------------------------------------------

def quad_suite(seed=42, samples=200_000, fast=False):
    samples = min(samples, 50_000) if fast else samples
    out = []
    for m, ref, cid in ((0.0, 2 * math.pi / 3, "quad.half_ball_volume"), (1.0, math.pi / 4, "quad.half_ball_moment")):
        with timed() as t:
            res = integrate_radial(lambda r, x: np.ones_like(r), QuadratureSpec(HalfBall(1.0), m, 2))
        out.append(_simple(cid, {"n": 2, "weight_exp": m}, res.value, ref, 1e-10, t[0]))
    spec = QuadratureSpec(HalfBall(1.0), 0.0, 2)
    with timed() as t:
        mc = mc_oracle(lambda r, x: np.ones_like(r), spec, samples, seed)
    # exact importance density for f = 1: the spread is pure roundoff, so floor the error
    z = abs(mc.value - 2 * math.pi / 3) / max(mc.err_estimate, 1e-12 * mc.value)
    out.append(VerificationReport("quad.mc_volume", {"samples": samples, "seed": seed}, z, "none", 3.0,
                                  judge(z <= 3.0), t[0], details={"estimate": mc.value, "std_error": mc.err_estimate}))
    p = ParamPoint(7, 1.5)
    f = lambda r, x: W_closed_form(1.0, r, x) ** 2
    spec = QuadratureSpec(HalfBall(4.0), p.m1, 7)
    with timed() as t:
        det = integrate_radial(f, spec)
        mc = mc_oracle(f, spec, samples, seed)
        again = mc_oracle(f, spec, samples, seed)
    z = abs(mc.value - det.value) / max(mc.err_estimate, 1e-12 * abs(det.value))
    out.append(VerificationReport("quad.mc_cross_oracle", {**p.as_dict(), "samples": samples, "seed": seed},
                                  z, "none", 3.0, judge(z <= 3.0 and again.value == mc.value), t[0],
                                  details={"deterministic": det.value, "monte_carlo": mc.value,
                                           "std_error": mc.err_estimate, "repeatable": again.value == mc.value}))
    return out


# bubble ----------------------------------------------------------------------------

def bubble_suite(seed=42, fast=False):
    rng = np.random.default_rng(seed)
    out = []
    p = ParamPoint(7, 1.5)
    with timed() as t:
        v = float(extension_jet(p, BubbleTrace(p), np.array([1.0]), np.array([1.0]))["W"][0])
    out.append(_simple("bubble.closed_form_match", {**p.as_dict(), "r": 1.0, "xN": 1.0}, v,
                       float(W_closed_form(1.0, 1.0, 1.0)), 1e-6, t[0]))
    al = constants(p).alpha_n_gamma
    out.append(_simple("bubble.closed_form_center", p.as_dict(), float(W_closed_form(1.0, 0.0, 0.0)), al, 1e-14))
    r, x = rng.uniform(0.1, 3.0, 2)
    out.append(_simple("bubble.closed_form_scaling", {**p.as_dict(), "seed": seed},
                       float(W_closed_form(2.0, 2 * r, 2 * x)), 2 ** (-p.nu) * float(W_closed_form(1.0, r, x)), 1e-12))
    h = 1e-5
    dr, dN, _ = W_derivatives_32(1.0, r, x)
    fd_r = (W_closed_form(1.0, r + h, x) - W_closed_form(1.0, r - h, x)) / (2 * h)
    fd_N = (W_closed_form(1.0, r, x + h) - W_closed_form(1.0, r, x - h)) / (2 * h)
    out.append(_simple("bubble.derivative_r", {**p.as_dict(), "seed": seed}, float(dr), float(fd_r), 1e-6))
    out.append(_simple("bubble.derivative_N", {**p.as_dict(), "seed": seed}, float(dN), float(fd_N), 1e-6))
    q = ParamPoint(3, 0.5)
    b = BubbleParams(q, 0.7, rng.uniform(-1, 1, 3))
    xb = rng.uniform(-1, 1, 3)
    lhs = float(w_eval(b, np.asarray(b.sigma) + 0.7 * xb))
    rhs = 0.7 ** (-q.nu) * float(w_eval(BubbleParams(q, 1.0), xb))
    out.append(_simple("bubble.trace_scaling", {**q.as_dict(), "seed": seed}, lhs, rhs, 1e-12))
    with timed() as t:
        near = float(extension_jet(q, BubbleTrace(q), np.array([0.0]), np.array([1e-7]))["W"][0])
    out.append(_simple("bubble.approximate_identity", q.as_dict(), near, float(BubbleTrace(q)(0.0)), 1e-5, t[0]))
    with timed() as t:
        one = extend(ParamPoint(4, 0.75), CallableTrace(lambda s: np.ones_like(s)), np.array([0.3, 2.0]),
                     np.array([0.0, 1.5]))
    out.append(_simple("bubble.constant_data", {"n": 4, "gamma": 0.75}, float(np.max(np.abs(one - 1))), 0.0, 1e-8,
                       t[0]))
    return out


# extension -------------------------------------------------------------------------

GROWTH_POINTS = ((3, 0.5), (10, 0.5), (7, 1.5), (9, 1.5))


def extension_suite(levels=3, growth_points=GROWTH_POINTS, fast=False):
    out = []
    p72 = ParamPoint(7, 1.5)
    profs = ev.refinement_profiles(p72, levels=levels, closed_form=lambda r, x: W_closed_form(1.0, r, x))
    out.append(ev.residual_second_order(p72, profs))
    out.append(ev.identity_DW(p72, profs))
    out.append(ev.bilaplacian_residual(p72, profs[: max(1, levels)]))
    p12 = ParamPoint(3, 0.5)
    out.append(ev.residual_second_order(p12, ev.refinement_profiles(p12, levels=levels)))
    # a trial field that violates the identity must be flagged
    neg = [type(pr)(pr.p, pr.r_grid, pr.xN_grid, pr.values + np.asarray(pr.xN_grid)[:, None] * 0.1 *
                    np.exp(-np.asarray(pr.r_grid))[None, :]) for pr in profs[:1]]
    control = ev.identity_DW(p72, neg)
    out.append(VerificationReport("extension.negative_control", p72.as_dict(), control.computed, "none", 0.0,
                                  judge(control.status is Status.FAIL), control.runtime_ms,
                                  details={"control_status": control.status.value}))
    for n, g in ((3, 0.5), (7, 1.5)):
        reps, _ = ev.neumann_trace_check(ParamPoint(n, g))
        out.extend(reps)
    radii = (2, 4, 8, 16, 32, 64, 128, 256)
    for n, g in growth_points:
        for k in (0, 1, 2):
            out.append(ev.norm_growth(ParamPoint(n, g), k, radii))
    return out


# appendix --------------------------------------------------------------------------

def appendix_suite(steps=40, fast=False):
    steps = min(steps, 12) if fast else steps
    out = apx.identity_check()
    out.append(apx.dilation_check())
    reps, _ = apx.C4_sign_scan(steps=steps)
    out.extend(reps)
    out.extend(apx.log_integrals_72())
    return out


# energy ----------------------------------------------------------------------------

def energy_suite(n=3, gamma=0.5, delta=0.5, fast=False):
    p = ParamPoint(n, gamma)
    out = energy.sharp_constant_check(p, level=0 if fast else 1)
    reps, _ = energy.glued_self_action(p, delta=delta, level=0 if fast else 1)
    out.extend(reps)
    return out


# interaction and landscape ----------------------------------------------------------

def interaction_suite(n=3, gamma=0.5, delta=0.5, d=0.25, fast=False):
    p = ParamPoint(n, gamma)
    out = [inter.interaction_ratio_check(p, delta, d)]
    out.append(inter.higher_exponent_check(p, 2.5, 0.5, delta, d))
    out.append(inter.higher_exponent_check(p, 1.5, 1.5, delta, d))
    out.extend(inter.envelope_checks(p, delta, d))
    return out


def landscape_suite(n=3, gamma=0.5, delta=0.5, radius=0.1, fast=False):
    p = ParamPoint(n, gamma)
    eps = [delta / 16, delta / 32, delta / 64] if fast else None
    reps, _, _ = inter.landscape_check(p, delta, radius, eps_list=eps)
    return reps


# minimizer -------------------------------------------------------------------------

def minimize_suite(n=3, gamma=0.5, seed=42, fast=False):
    reps, _ = minimizer.minimizer_checks(ParamPoint(n, gamma), K=4 if fast else 5, seed=seed)
    return reps


RUNNERS = {
    "constants": constants_suite,
    "quad": quad_suite,
    "bubble": bubble_suite,
    "extension": extension_suite,
    "appendix": appendix_suite,
    "energy": energy_suite,
    "interaction": interaction_suite,
    "landscape": landscape_suite,
    "minimize": minimize_suite,
}
SEEDED = {"quad", "bubble", "minimize"}


def _qualify(rep):
    """Attach the parameter point to the check id so ids stay unique across points."""
    n, g = rep.params.get("n"), rep.params.get("gamma")
    if n is not None and g is not None:
        rep.check_id = f"{rep.check_id}@n={n},gamma={float(g):g}"
    return rep


def _run_one(args):
    name, options, seed, fast = args
    kw = dict(options)
    if name in SEEDED:
        kw.setdefault("seed", seed)
    return [_qualify(r) for r in RUNNERS[name](fast=fast, **kw)]


def worker_count():
    raw = os.environ.get("FRACYAM_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        k = int(raw)
    except ValueError as exc:
        raise DomainError(f"FRACYAM_THREADS must be a positive integer, got {raw!r}") from exc
    if k < 1:
        raise DomainError("FRACYAM_THREADS must be at least 1")
    return k


def run_suite(suite, config=None, seed=42, fast=False):
    """Run one suite (or all of them) and return reports sorted by check id.

    `config` maps a suite name to keyword overrides for that suite's runner.
    """
    config = config or {}
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in RUNNERS:
            raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    unknown = set(config) - set(SUITES)
    if unknown:
        raise DomainError(f"config names unknown suites: {sorted(unknown)}")
    jobs = [(name, config.get(name, {}), seed, fast) for name in names]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_one, jobs))
    else:
        batches = [_run_one(j) for j in jobs]
    reports = sorted((r for b in batches for r in b), key=lambda r: r.check_id)
    ids = [r.check_id for r in reports]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise RuntimeError(f"duplicate check ids: {dup}")
    return reports
