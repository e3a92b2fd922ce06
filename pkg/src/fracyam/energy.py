"""Flat-model quadratic forms, normalized energies and glued bubble test functions.

A field is anything with `jet(r, xN, order)` returning derivative arrays keyed like
bubble.JET_KEYS, `boundary(r)` returning its trace, `scales` (length scales used to
place quadrature breaks) and `region` (where its energy is integrated).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .bubble import BubbleTrace, RadialProfile, extension_jet
from .constants import Regime, constants
from .errors import DomainError, NumericError
from .quad import Boundary, HalfBall, HalfSpace, QuadratureSpec, radial_rule
from .report import VerificationReport, judge, timed


# cutoff ---------------------------------------------------------------------------

def smoothstep(s):
    """Quintic C^2 step: 0 for s <= 0, 1 for s >= 1, with derivatives 1 and 2."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 3 * (10 - 15 * s + 6 * s * s), 30 * s * s * (1 - s) ** 2, 60 * s * (1 - s) * (1 - 2 * s)


def cutoff(t):
    """chi(t) = 1 for t <= 1, 0 for t >= 4, quintic in between; returns chi, chi', chi''."""
    h, dh, d2h = smoothstep((np.asarray(t, dtype=float) - 1.0) / 3.0)
    return 1.0 - h, -dh / 3.0, -d2h / 9.0


# fields ---------------------------------------------------------------------------

def _order_for(p):
    return 1 if p.regime is Regime.TYPE_I else 2


class ExtensionField:
    """Extension of radial boundary data (a bubble by default), integrated over the half-space."""

    def __init__(self, p, trace=None, region=None):
        self.p = p
        self.trace = BubbleTrace(p) if trace is None else trace
        self.scales = (float(self.trace.scale),)
        self.region = HalfSpace() if region is None else region

    def jet(self, r, x, order):
        return extension_jet(self.p, self.trace, r, x, order=order)

    def boundary(self, r):
        return self.trace(r)


def green_jet(p, r, x, order, amp=1.0):
    """Jets of amp * |x|^(2 gamma - n); the caller keeps the origin out of the evaluation set."""
    a = 2 * p.gamma - p.n
    rho2 = r * r + x * x
    g = amp * rho2 ** (a / 2.0)
    out = {"W": g}
    if order >= 1:
        d1 = a * g / rho2
        out.update(r=d1 * r, N=d1 * x)
    if order >= 2:
        d2 = a * (a - 2) * g / rho2 ** 2
        out.update(r_over_r=d1, rr=d1 + d2 * r * r, NN=d1 + d2 * x * x, rN=d2 * r * x)
    return out


class GluedField:
    """chi_delta W_eps + (1 - chi_delta) eps^((n - 2 gamma)/2) green_amp |x|^(2 gamma - n).

    chi_delta(x) = chi(|x|^2 / delta^2), so the gluing annulus is delta <= |x| <= 2 delta.
    """

    def __init__(self, p, eps, delta, c0=2.0, green_amp=1.0):
        if not c0 >= 2:
            raise DomainError("gluing constant C0 must be at least 2")
        if not (eps > 0 and c0 * eps <= delta * (1 + 1e-12)):
            raise DomainError(f"need C0 * eps <= delta, got eps={eps}, delta={delta}, C0={c0}")
        self.p, self.eps, self.delta, self.c0 = p, float(eps), float(delta), float(c0)
        self.green_amp = float(green_amp) * self.eps ** p.nu
        self.bubble = BubbleTrace(p, self.eps)
        self.scales = (self.eps, self.delta, 2 * self.delta)
        self.region = HalfSpace()

    def jet(self, r, x, order):
        r = np.asarray(r, dtype=float)
        x = np.asarray(x, dtype=float)
        d2 = self.delta ** 2
        t = (r * r + x * x) / d2
        chi, c1, c2 = cutoff(t)
        inner = t < 4.0
        outer = t > 1.0
        out = {k: np.zeros_like(r) for k in ("W", "r", "N", "r_over_r", "rr", "NN", "rN")}
        # outside the annulus only one piece is alive
        G = green_jet(self.p, r[outer], x[outer], order, self.green_amp)
        for k, v in G.items():
            out[k][outer] = v
        if not np.any(inner):
            return self._trim(out, order)
        ri, xi = r[inner], x[inner]
        Wj = extension_jet(self.p, self.bubble, ri, xi, order=order)
        Gi = green_jet(self.p, ri, np.where(t[inner] > 1.0, xi, np.maximum(xi, self.delta)), order,
                       self.green_amp)
        # U = G + chi (W - G) on the annulus, U = W inside; chi = 1 where t <= 1 masks the fake G there
        a = t[inner] > 1.0
        D = {k: Wj[k] - np.where(a, Gi[k], 0.0) for k in Gi}
        base = {k: np.where(a, Gi[k], 0.0) for k in Gi}
        ch, ch1, ch2 = chi[inner], c1[inner], c2[inner]
        chr_ = ch1 * 2 * ri / d2
        chN = ch1 * 2 * xi / d2
        U = {"W": base["W"] + ch * D["W"]}
        if order >= 1:
            U["r"] = base["r"] + chr_ * D["W"] + ch * D["r"]
            U["N"] = base["N"] + chN * D["W"] + ch * D["N"]
        if order >= 2:
            U["r_over_r"] = base["r_over_r"] + (2 * ch1 / d2) * D["W"] + ch * D["r_over_r"]
            chrr = ch2 * (2 * ri / d2) ** 2 + 2 * ch1 / d2
            chNN = ch2 * (2 * xi / d2) ** 2 + 2 * ch1 / d2
            chrN = ch2 * (2 * ri / d2) * (2 * xi / d2)
            U["rr"] = base["rr"] + chrr * D["W"] + 2 * chr_ * D["r"] + ch * D["rr"]
            U["NN"] = base["NN"] + chNN * D["W"] + 2 * chN * D["N"] + ch * D["NN"]
            U["rN"] = base["rN"] + chrN * D["W"] + chr_ * D["N"] + chN * D["r"] + ch * D["rN"]
        for k, v in U.items():
            out[k][inner] = v
        return self._trim(out, order)

    @staticmethod
    def _trim(out, order):
        keep = {0: ("W",), 1: ("W", "r", "N"),
                2: ("W", "r", "N", "r_over_r", "rr", "NN", "rN")}[order]
        return {k: out[k] for k in keep}

    def boundary(self, r):
        r = np.asarray(r, dtype=float)
        chi, _, _ = cutoff(r * r / self.delta ** 2)
        far = np.where(r > 0, self.green_amp * np.where(r > 0, r, 1.0) ** (2 * self.p.gamma - self.p.n), 0.0)
        return chi * self.bubble(r) + (1 - chi) * far

    def continuity_jump(self, h=1e-9):
        """Largest relative jump of U across the annulus edges |x| = delta and 2 delta."""
        jumps = []
        for rho in (self.delta, 2 * self.delta):
            for phi in (0.3, 1.0):
                pts = np.array([rho - h, rho + h])
                v = self.jet(pts * math.cos(phi), pts * math.sin(phi), 0)["W"]
                jumps.append(abs(v[1] - v[0]) / abs(v).max())
        return max(jumps)


class ProfileField:
    """Spline interpolant of a RadialProfile, integrated over the largest half-ball inside its grid."""

    def __init__(self, profile, degree=5):
        self.p = profile.p
        self.profile = profile
        x = np.asarray(profile.xN_grid)
        r = np.asarray(profile.r_grid)
        k = min(degree, x.size - 1, r.size - 1)
        self._spl = RectBivariateSpline(x, r, np.asarray(profile.values), kx=k, ky=k, s=0)
        self.scales = (float(r[r > 0][0]) * 10, 1.0)
        self.region = HalfBall(float(min(r[-1], x[-1])))

    def jet(self, r, x, order):
        r = np.asarray(r, dtype=float)
        x = np.asarray(x, dtype=float)
        ev = lambda dx, dr: self._spl.ev(x, r, dx=dx, dy=dr)
        out = {"W": ev(0, 0)}
        if order >= 1:
            out["r"] = ev(0, 1)
            out["N"] = ev(1, 0)
        if order >= 2:
            out["r_over_r"] = np.where(r > 0, out["r"] / np.where(r > 0, r, 1.0), ev(0, 2))
            out["rr"] = ev(0, 2)
            out["NN"] = ev(2, 0)
            out["rN"] = ev(1, 1)
        return out

    def boundary(self, r):
        return self._spl.ev(np.zeros_like(np.asarray(r, dtype=float)), r)


def as_field(p, U):
    if isinstance(U, RadialProfile):
        return ProfileField(U)
    if hasattr(U, "jet"):
        return U
    raise DomainError("expected a RadialProfile or a field with jet()")


# forms ------------------------------------------------------------------------------

def weighted_laplacian_jet(j, n, m, x):
    return j["rr"] + (n - 1) * j["r_over_r"] + j["NN"] + m * j["N"] / x


def form_density(p, ju, jv, x):
    """Integrand of the quadratic form (without the weight, which the rule carries)."""
    if p.regime is Regime.TYPE_I:
        return ju["r"] * jv["r"] + ju["N"] * jv["N"]
    lu = weighted_laplacian_jet(ju, p.n, p.m1, x)
    lv = lu if jv is ju else weighted_laplacian_jet(jv, p.n, p.m1, x)
    return lu * lv


def _spec(p, fields, region=None, level=1):
    reg = region if region is not None else fields[0].region
    scales = tuple(sorted(set(s for f in fields for s in f.scales)))
    return QuadratureSpec(reg, p.weight_exp, p.n, scales=scales)


def Q_form(p, U, V=None, region=None, level=1):
    """Flat-model form: int <grad U, grad V> x^m0 (first regime) or int Delta U Delta V x^m1 (second).

    U and V may be RadialProfiles or fields; V defaults to U.
    """
    fu = as_field(p, U)
    fv = fu if V is None or V is U else as_field(p, V)
    r, x, w = radial_rule(_spec(p, [fu, fv], region), level)
    ju = fu.jet(r, x, _order_for(p))
    jv = ju if fv is fu else fv.jet(r, x, _order_for(p))
    val = float(np.dot(w, form_density(p, ju, jv, x)))
    if not math.isfinite(val):
        raise NumericError("quadratic form is not finite", estimate=val)
    return val


def boundary_mass(p, U, level=1):
    """int |u|^(2n/(n-2 gamma)) over the boundary (the whole R^n unless the field is a profile)."""
    f = as_field(p, U)
    reg = Boundary(f.region.radius) if isinstance(f.region, HalfBall) else Boundary()
    spec = QuadratureSpec(reg, 0.0, p.n, scales=tuple(f.scales))
    r, _, w = radial_rule(spec, level)
    return float(np.dot(w, np.abs(f.boundary(r)) ** p.crit_exp))


def energy_bar(p, U, level=1):
    """kappa Q(U, U) / (boundary mass)^((n - 2 gamma)/n)."""
    mass = boundary_mass(p, U, level)
    if not mass > 0:
        raise DomainError("boundary trace vanishes; the quotient is undefined")
    return constants(p).kappa_gamma * Q_form(p, U, region=None, level=level) / mass ** ((p.n - 2 * p.gamma) / p.n)


# glued test functions ---------------------------------------------------------------

@dataclass
class GluedTestFunction:
    p: object
    eps: float
    delta: float
    c0: float = 2.0
    green_amp: float = 1.0

    def __post_init__(self):
        self.field = GluedField(self.p, self.eps, self.delta, self.c0, self.green_amp)

    def profile(self, r_grid, xN_grid):
        r_grid = np.asarray(r_grid, dtype=float)
        xN_grid = np.asarray(xN_grid, dtype=float)
        if xN_grid[0] != 0:
            xN_grid = np.concatenate([[0.0], xN_grid])
        R, X = np.meshgrid(r_grid, xN_grid[1:])
        inner = self.field.jet(R.ravel(), X.ravel(), 0)["W"].reshape(R.shape)
        return RadialProfile(self.p, r_grid, xN_grid, np.vstack([self.field.boundary(r_grid), inner]))

    def energy(self, level=1):
        return energy_bar(self.p, self.field, level)

    def mass(self, level=1):
        return boundary_mass(self.p, self.field, level)


def glued_self_action(p, delta=0.5, eps_list=None, c0=2.0, level=1, ratio_limit=2.0, jump_tol=1e-6):
    """Energy and mass excesses of glued bubbles, normalized by their predicted scalings, over an eps sweep.

    Returns two reports; each passes when the normalized excess keeps one sign and
    max/min stays below ratio_limit across the sweep.
    """
    eps_list = [delta / 8, delta / 16, delta / 32] if eps_list is None else list(eps_list)
    cs = constants(p)
    Y = cs.Y_sphere
    M = Y ** (p.n / (2 * p.gamma))
    rows = []
    with timed() as t:
        for eps in eps_list:
            g = GluedTestFunction(p, eps, delta, c0)
            jump = g.field.continuity_jump()
            if jump > jump_tol:
                raise NumericError(f"glued function jumps by {jump:.2e} across the annulus", estimate=jump)
            E = g.energy(level)
            m = g.mass(level)
            rows.append({"eps": eps, "energy": E, "mass": m,
                         "energy_excess": (E - Y) / (delta ** (2 * p.gamma - p.n) * eps ** (p.n - 2 * p.gamma)),
                         "mass_excess": (m - M) / (eps ** p.n * delta ** (-p.n)),
                         "jump": jump})
    reports = []
    for key in ("energy_excess", "mass_excess"):
        v = np.array([row[key] for row in rows])
        same_sign = bool(np.all(v > 0) or np.all(v < 0))
        spread = float(np.max(np.abs(v)) / np.min(np.abs(v))) if np.all(v != 0) else float("inf")
        reports.append(VerificationReport(
            f"energy.self_action.{key}", {**p.as_dict(), "delta": delta, "C0": c0}, spread, "none",
            ratio_limit, judge(same_sign and spread < ratio_limit), t[0] // 2,
            details={"sweep": rows, "normalized": v.tolist()}))
    return reports, rows


def sharp_constant_check(p, level=1, tol=1e-6):
    """energy_bar of the bubble against the sphere constant, plus the boundary-pairing identity."""
    cs = constants(p)
    with timed() as t:
        W = ExtensionField(p)
        kq = cs.kappa_gamma * Q_form(p, W, level=level)
        mass = boundary_mass(p, W, level)
        E = kq / mass ** ((p.n - 2 * p.gamma) / p.n)
    target = cs.Y_sphere ** (p.n / (2 * p.gamma))
    ok_e = abs(E / cs.Y_sphere - 1) <= tol
    ok_q = abs(kq / target - 1) <= tol
    return [VerificationReport("energy.bubble_quotient", p.as_dict(), E, cs.Y_sphere, tol, judge(ok_e), t[0]),
            VerificationReport("energy.pairing_identity", p.as_dict(), kq, target, tol, judge(ok_q), 0)]
