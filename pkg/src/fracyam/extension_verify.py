"""Checks on the extension PDEs, the weighted Neumann traces and the near-ball norm growth."""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bubble import BubbleTrace, RadialProfile, build_profile, extension_jet
from .constants import Regime, constants
from .errors import DomainError
from .quad import HalfBall, QuadratureSpec, radial_rule
from .report import Status, VerificationReport, judge, timed


# finite differences ---------------------------------------------------------------

def fd_weights(z, x, m):
    """Fornberg weights for derivatives 0..m at z from nodes x; returns array (m+1, len(x))."""
    x = np.asarray(x, dtype=float)
    n = x.size
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _diff_axis(V, grid, axis, half=3):
    """First and second derivatives along one axis with centred (2*half+1)-point stencils.

    Returns (d1, d2, valid) where valid marks nodes with a full centred stencil.
    """
    V = np.moveaxis(V, axis, 0)
    n = grid.size
    d1 = np.full(V.shape, np.nan)
    d2 = np.full(V.shape, np.nan)
    for i in range(half, n - half):
        idx = slice(i - half, i + half + 1)
        w = fd_weights(grid[i], grid[idx], 2)
        # derivative weights sum to zero, so differencing against the centre is exact for constants
        dv = V[idx] - V[i]
        d1[i] = np.tensordot(w[1], dv, axes=1)
        d2[i] = np.tensordot(w[2], dv, axes=1)
    valid = np.zeros(n, dtype=bool)
    valid[half:n - half] = True
    return np.moveaxis(d1, 0, axis), np.moveaxis(d2, 0, axis), valid


def profile_derivatives(profile):
    """Interior derivatives of a profile over its positive-x_N rows and positive-r columns."""
    r = np.asarray(profile.r_grid)
    x = np.asarray(profile.xN_grid)[1:]
    V = np.asarray(profile.values)[1:]
    keep = r > 0
    r = r[keep]
    V = V[:, keep]
    Vr, Vrr, okr = _diff_axis(V, r, axis=1)
    VN, VNN, okx = _diff_axis(V, x, axis=0)
    mask = okx[:, None] & okr[None, :]
    R, X = np.meshgrid(r, x)
    return {"W": V, "r": Vr, "rr": Vrr, "N": VN, "NN": VNN, "R": R, "X": X, "mask": mask}


def weighted_laplacian(d, n, m):
    """Delta_m U = U_rr + (n-1)/r U_r + U_NN + m/x_N U_N, with the terms kept separately."""
    terms = [d["rr"], (n - 1) * d["r"] / d["R"], d["NN"], m * d["N"] / d["X"]]
    return sum(terms), sum(np.abs(t) for t in terms)


def log_grid(lo, hi, per_decade):
    k = int(round(math.log10(hi / lo) * per_decade))
    return np.geomspace(lo, hi, k + 1)


def refinement_profiles(p, levels=3, base=24, window=(3e-2, 30.0), closed_form=None, trace=None):
    """Profiles on log grids with base * 2^level points per decade in both directions."""
    out = []
    for lev in range(levels):
        g = log_grid(window[0], window[1], base * 2 ** lev)
        r = np.concatenate([[0.0], g])
        x = np.concatenate([[0.0], g])
        out.append(build_profile(p, trace if trace is not None else BubbleTrace(p), r, x,
                                 closed_form=closed_form))
    return out


def _relative_residual(res, scale, mask):
    rel = np.abs(res) / np.where(scale > 0, scale, 1.0)
    return float(np.max(rel[mask]))


def _residual_study(profiles, compute, tol, check_id, params):
    if isinstance(profiles, RadialProfile):
        profiles = [profiles]
    with timed() as t:
        vals = []
        for prof in profiles:
            if prof.r_grid.size < 6 or prof.xN_grid.size < 6:
                return VerificationReport(check_id, params, None, 0.0, tol, Status.INCONCLUSIVE,
                                          details={"reason": "profile too coarse"})
            vals.append(compute(prof))
        orders = [math.log2(a / b) if a > 0 and b > 0 else float("inf") for a, b in zip(vals, vals[1:])]
    final = vals[-1]
    status = judge(final <= tol)
    return VerificationReport(check_id, params, final, 0.0, tol, status, t[0],
                              details={"residual_per_level": vals, "observed_order": orders})


def residual_second_order(p, profile, tol=1e-6):
    """max |Delta_{m0} W| relative to the sum of its term magnitudes over the interior grid.

    `profile` may be one RadialProfile or a list of successively refined ones.
    """
    def compute(prof):
        d = profile_derivatives(prof)
        res, scale = weighted_laplacian(d, p.n, p.m0)
        return _relative_residual(res, scale, d["mask"])

    return _residual_study(profile, compute, tol, "extension.residual_m0",
                           {**p.as_dict(), "levels": 1 if isinstance(profile, RadialProfile) else len(profile)})


def identity_DW(p, profile, tol=1e-6):
    """Delta_{m1} W = 2 x_N^{-1} d_N W on the interior grid (fourth-order regime only)."""
    if p.regime is not Regime.TYPE_II:
        raise DomainError("identity_DW needs gamma in (1, 2)")

    def compute(prof):
        d = profile_derivatives(prof)
        lap, scale = weighted_laplacian(d, p.n, p.m1)
        rhs = 2.0 * d["N"] / d["X"]
        return _relative_residual(lap - rhs, scale + np.abs(rhs), d["mask"])

    return _residual_study(profile, compute, tol, "extension.identity_DW",
                           {**p.as_dict(), "levels": 1 if isinstance(profile, RadialProfile) else len(profile)})


def bilaplacian_residual(p, profile, tol=1e-4, trace=None):
    """Delta_{m1}^2 W = 0, via Delta_{m1} applied to D = 2 x_N^{-1} d_N W.

    D is taken from the analytic first-order jets on the profile grid so that only one
    finite-difference Laplacian is applied.
    """
    src = trace if trace is not None else BubbleTrace(p)

    def compute(prof):
        r = np.asarray(prof.r_grid)
        r = r[r > 0]
        x = np.asarray(prof.xN_grid)[1:]
        R, X = np.meshgrid(r, x)
        jet = extension_jet(p, src, R.ravel(), X.ravel(), order=1)
        D = 2.0 * jet["N"].reshape(X.shape) / X
        Dr, Drr, okr = _diff_axis(D, r, axis=1)
        DN, DNN, okx = _diff_axis(D, x, axis=0)
        lap, scale = weighted_laplacian({"rr": Drr, "r": Dr, "NN": DNN, "N": DN, "R": R, "X": X}, p.n, p.m1)
        return _relative_residual(lap, scale, okx[:, None] & okr[None, :])

    return _residual_study(profile, compute, tol, "extension.bilaplacian_m1", p.as_dict())


def _shrink(mask, k=3):
    out = mask.copy()
    out[:k] = False
    out[-k:] = False
    out[:, :k] = False
    out[:, -k:] = False
    return out


# Neumann traces ---------------------------------------------------------------------

@dataclass(frozen=True)
class TraceResult:
    r_grid: np.ndarray
    extracted_trace: np.ndarray
    fit_exponent: float
    fit_residual: float
    first_limit: np.ndarray = None


def _template(p):
    """Exponents of the near-boundary series of W - f, where f is the trace."""
    g = p.gamma
    first = [2 * g, 2.0, 2 + 2 * g, 4.0, 4 + 2 * g, 6.0]
    second = [2.0, 2 * g, 4.0, 2 + 2 * g, 6.0, 4 + 2 * g, 8.0]
    return first if p.regime is Regime.TYPE_I else second


def _fit_rows(x, V, exps):
    A = np.stack([x ** e for e in exps], axis=1)
    sc = np.max(np.abs(A), axis=0)
    coef, *_ = np.linalg.lstsq(A / sc, V, rcond=None)
    coef = coef / sc[:, None]
    resid = V - A @ coef
    return coef, resid


def _trace_factor(p):
    kappa = constants(p).kappa_gamma
    g = p.gamma
    return -2.0 * g * kappa if p.regime is Regime.TYPE_I else 8.0 * g * (g - 1.0) * kappa


def neumann_trace(p, profile, window=6, terms=None):
    """Weighted Neumann trace of a profile by least squares on its smallest x_N rows.

    The boundary row is subtracted first, then W - f is fitted by the near-boundary series
    psi x^(2 gamma) + f2 x^2 + ... (first regime) or psi1 x^2 + psi2 x^(2 gamma) + ...
    (second regime).  The trace is -2 gamma kappa psi, resp. 8 gamma (gamma-1) kappa psi2.
    """
    g = p.gamma
    x = np.asarray(profile.xN_grid)[1:1 + window]
    if x.size < window:
        raise DomainError("profile has too few x_N rows for the trace fit")
    V = np.asarray(profile.values)[1:1 + window] - np.asarray(profile.values)[0]
    exps = _template(p)[:terms or min(window - 2, 4)]
    coef, resid = _fit_rows(x, V, exps)
    scale = np.maximum(np.max(np.abs(np.asarray(profile.values)[:1 + window]), axis=0), 1e-300)
    fit_res = float(np.max(np.abs(resid) / scale))
    psi = coef[exps.index(2 * g)]
    return TraceResult(np.asarray(profile.r_grid), _trace_factor(p) * psi, float(2 * g), fit_res)


def _extrapolate(xs, vals, exps):
    """Constant term of a least-squares fit vals ~ c0 + sum c_k xs^e_k, column by column."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if xs.ndim == 1:
        coef, resid = _fit_rows(xs, vals.reshape(xs.size, -1), [0.0] + list(exps))
        return coef[0].reshape(vals.shape[1:]), resid.reshape(vals.shape)
    c0 = np.empty(xs.shape[1])
    resid = np.empty_like(vals)
    for k in range(xs.shape[1]):
        coef, rk = _fit_rows(xs[:, k], vals[:, k:k + 1], [0.0] + list(exps))
        c0[k], resid[:, k] = coef[0, 0], rk[:, 0]
    return c0, resid


def neumann_trace_jet(p, trace, r_grid, x0=1e-2, levels=7, eps=None):
    """Neumann traces from analytic derivative jets, extrapolated to x_N = 0.

    First regime: -kappa x^(1-2g) d_N W.  Second regime: kappa x^(m1) d_N Delta_{m1} W,
    written through Delta_{m1} W = 2 d_N W / x as 2 kappa x^(m1) (W_NN / x - W_N / x^2);
    the first weighted limit x^(m1) d_N W is extrapolated alongside.
    """
    kappa = constants(p).kappa_gamma
    g = p.gamma
    r = np.asarray(r_grid, dtype=float)
    scale = trace.scale if eps is None else eps
    loc = np.sqrt(scale ** 2 + r * r)
    xs = x0 * 2.0 ** -np.arange(levels)
    X = xs[:, None] * loc[None, :]
    R = np.broadcast_to(r, X.shape)
    j = extension_jet(p, trace, R.ravel(), X.ravel(), order=2)
    j = {k: v.reshape(X.shape) for k, v in j.items()}
    t = X / loc  # fit in the scaled height so one template serves every column
    if p.regime is Regime.TYPE_I:
        vals = -kappa * X ** (1 - 2 * g) * j["N"]
        tr, resid = _extrapolate(t, vals, [2 - 2 * g, 2.0, 4 - 2 * g])
        first = None
    else:
        vals = 2.0 * kappa * X ** p.m1 * (j["NN"] / X - j["N"] / X ** 2)
        tr, resid = _extrapolate(t, vals, [2.0, 4 - 2 * g, 4.0])
        lim = X ** p.m1 * j["N"]
        first, _ = _extrapolate(t, lim, [4 - 2 * g, 2.0, 6 - 2 * g])
    res = float(np.max(np.abs(resid) / np.maximum(np.abs(tr), 1e-300)))
    return TraceResult(r, tr, float(2 * g), res, first)


def trace_profile(p, r_grid, x_lo=1e-3, ratio=1.25, rows=8, eps=1.0):
    """Bubble profile whose first rows are geometrically spaced near the boundary, for trace fits."""
    x = x_lo * ratio ** np.arange(rows)
    return build_profile(p, BubbleTrace(p, eps), np.asarray(r_grid, dtype=float), np.concatenate([[0.0], x]))


def neumann_trace_check(p, r_grid=None, tol=1e-4, limit_tol=1e-6, method="jet", eps=1.0):
    """Compare the extracted trace with w^((n+2g)/(n-2g)) on r_grid (default r in [0, 10])."""
    r_grid = np.linspace(0.0, 10.0, 41) if r_grid is None else np.asarray(r_grid, dtype=float)
    tr = BubbleTrace(p, eps)
    with timed() as t:
        if method == "jet":
            res = neumann_trace_jet(p, tr, r_grid)
        else:
            res = neumann_trace(p, trace_profile(p, r_grid, eps=eps), window=8)
        target = tr(r_grid) ** ((p.n + 2 * p.gamma) / (p.n - 2 * p.gamma))
        dev = float(np.max(np.abs(res.extracted_trace / target - 1.0)))
    params = {**p.as_dict(), "method": method}
    reports = [VerificationReport("extension.neumann_trace" + ("" if method == "jet" else ".fit"), params,
                                  dev, 0.0, tol, judge(dev <= tol), t[0],
                                  details={"fit_residual": res.fit_residual})]
    if res.first_limit is not None:
        # measured against the size of the trace so the check is scale free
        lim = float(np.max(np.abs(res.first_limit) / np.abs(tr(r_grid))))
        reports.append(VerificationReport("extension.first_weighted_limit", params, lim, 0.0, limit_tol,
                                          judge(lim <= limit_tol), 0))
    return reports, res


# norm growth ------------------------------------------------------------------------

def predicted_growth(p, k):
    """Exponent e of delta in the half-ball integral; e < 0 bounded, e = 0 log, e > 0 power."""
    return 2 * p.gamma + (2 if p.regime is Regime.TYPE_I else 4) + k - p.n


@lru_cache(maxsize=8)
def _growth_nodes(p, radii, level):
    """Quadrature nodes on the largest ball with the k-independent pieces of the integrand."""
    typeI = p.regime is Regime.TYPE_I
    spec = QuadratureSpec(HalfBall(max(radii)), p.weight_exp, p.n, divergence_declared=True,
                          scales=(1.0,) + radii)
    r, x, w = radial_rule(spec, level)
    j = extension_jet(p, BubbleTrace(p), r, x, order=1 if typeI else 2)
    rho2 = r * r + x * x
    parts = [j["W"] ** 2, rho2 * (j["r"] ** 2 + j["N"] ** 2)]
    if not typeI:
        parts.append(rho2 ** 2 * (j["rr"] ** 2 + (p.n - 1) * j["r_over_r"] ** 2 + 2 * j["rN"] ** 2 + j["NN"] ** 2))
    return np.sqrt(rho2), w * sum(parts)


def half_ball_integrals(p, k, radii, level=0):
    """Integrals I(R) over B+(0, R) at eps = 1 of |x|^k (W^2 + |x|^2 |grad W|^2 [+ |x|^4 |D^2 W|^2]).

    One rule on the largest ball has panel breaks at every R, so each I(R) is a masked sum.
    """
    radii = tuple(float(R) for R in radii)
    rho, base = _growth_nodes(p, radii, level)
    vals = base * rho ** k
    return np.array([float(np.sum(vals[rho <= R * (1 + 1e-12)])) for R in radii])


def classify_growth(values, radii, band=0.3):
    """Label the growth of I(R) from its increments over the outer shells.

    The increment per unit log-radius behaves like R^e; e is the least-squares slope
    over the last three shells.
    """
    I = np.asarray(values, dtype=float)
    rr = np.asarray(radii, dtype=float)
    inc = np.diff(I) / np.diff(np.log(rr))
    xs = np.log(rr[1:])[-3:]
    e = float(np.polyfit(xs, np.log(np.abs(inc[-3:])), 1)[0])
    if abs(e) < band:
        return "log", e
    return ("bounded" if e < 0 else "power"), e


def norm_growth(p, k, delta_over_eps=(2, 4, 8, 16, 32, 64, 128, 256), band=0.3):
    """Classify the growth in delta / eps of the weighted near-ball norm and compare with the trichotomy."""
    if k < 0 or int(k) != k:
        raise DomainError("k must be a nonnegative integer")
    radii = np.asarray(delta_over_eps, dtype=float)
    if radii.size < 4 or np.any(radii < 2) or np.any(np.diff(radii) <= 0):
        raise DomainError("need at least four increasing ratios >= 2")
    with timed() as t:
        I = half_ball_integrals(p, k, radii)
        label, e_obs = classify_growth(I, radii, band)
    e_pred = predicted_growth(p, k)
    expect = "log" if abs(e_pred) < 1e-12 else ("bounded" if e_pred < 0 else "power")
    ok = label == expect and (expect != "power" or abs(e_obs - e_pred) < band)
    return VerificationReport(f"extension.norm_growth.k{int(k)}", {**p.as_dict(), "k": int(k)},
                              label, expect, band, judge(ok), t[0],
                              details={"observed_exponent": e_obs, "predicted_exponent": float(e_pred),
                                       "integrals": I.tolist()})
