"""Bubbles on the flat half-space and the Poisson-kernel extension of radial boundary data.

Power-law data amp * (eps^2 + |y|^2)^(-s), which cover the bubbles and finite sums of
them, are extended through a Feynman parametrisation that leaves a single integral
over tau in (0, 1); see _power_jet.  Other radial data go through the direct kernel
integral after the substitution y = x_bar - x_N z:

    W(r, x_N) = p_{n,g} |S^{n-2}| int_0^inf (1+t^2)^(-(n+2g)/2) t^(n-1)
                int_0^pi f(sqrt(q)) sin^(n-2)(theta) dtheta dt,
    q = r^2 + x_N^2 t^2 - 2 r x_N t cos(theta).
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .constants import constants, sphere_area
from .errors import DomainError, NumericError

JET_KEYS = ("W", "r", "N", "rr", "rN", "NN", "Nrr", "r_over_r", "rN_over_r")


def _gl(k):
    x, w = np.polynomial.legendre.leggauss(k)
    return x, w


def _panel_nodes(bounds, k):
    """Gauss-Legendre nodes on consecutive panels; bounds has shape (..., m+1)."""
    x, w = _gl(k)
    a = bounds[..., :-1, None]
    b = bounds[..., 1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    wts = 0.5 * (b - a) * w
    shape = bounds.shape[:-1] + (-1,)
    return nodes.reshape(shape), wts.reshape(shape)


class PowerTrace:
    """Radial boundary data amp * (eps^2 + |y|^2)^(-s); its extension has a one-dimensional representation."""

    def __init__(self, s, eps=1.0, amp=1.0):
        if not eps > 0:
            raise DomainError("eps must be positive")
        if not s > 0:
            raise DomainError("power s must be positive")
        self.s = float(s)
        self.eps = float(eps)
        self.amp = float(amp)
        self.scale = self.eps
        self.decay = 2.0 * self.s

    def terms(self):
        return [self]

    def derivs(self, q, order):
        base = 1.0 / (self.eps ** 2 + q)
        out = []
        v = self.amp * base ** self.s
        coef = 1.0
        for j in range(order + 1):
            out.append(coef * v)
            coef *= -(self.s + j)
            v = v * base
        return out

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.amp * (self.eps ** 2 + s * s) ** (-self.s)


class BubbleTrace(PowerTrace):
    """Boundary bubble w_eps centred at the origin."""

    def __init__(self, p, eps=1.0, amplitude=None):
        alpha = constants(p).alpha_n_gamma if amplitude is None else amplitude
        super().__init__(p.nu, eps, alpha * eps ** p.nu)
        self.p = p
        self.alpha = alpha


class TraceSum:
    """Finite linear combination of PowerTrace terms."""

    def __init__(self, parts):
        self.parts = list(parts)
        self.scale = min(t.scale for t in self.parts)
        self.decay = min(t.decay for t in self.parts)

    def terms(self):
        return self.parts

    def derivs(self, q, order):
        acc = None
        for t in self.parts:
            d = t.derivs(q, order)
            acc = d if acc is None else [a + b for a, b in zip(acc, d)]
        return acc

    def __call__(self, s):
        return sum(t(s) for t in self.parts)


class CallableTrace:
    """Generic radial boundary data f(s); values only, no derivatives."""

    def __init__(self, f, scale=1.0, decay=None):
        self.f = f
        self.scale = float(scale)
        self.decay = decay

    def derivs(self, q, order):
        if order > 0:
            raise DomainError("derivatives need boundary data with q-derivatives")
        return [np.asarray(self.f(np.sqrt(q)), dtype=float)]

    def __call__(self, s):
        return np.asarray(self.f(np.asarray(s, dtype=float)), dtype=float)


class _Rules:
    def __init__(self, kt, kth):
        self.kt = kt
        self.kth = kth
        self.t_geo = np.geomspace(1e-3, 1e3, 13)
        self.loc = np.array([-16, -8, -4, -2, -1, -0.5, -0.25, 0, 0.25, 0.5, 1, 2, 4, 8, 16.0])
        self.th_geo = np.array([0.25, 0.5, 1, 2, 4, 8, 16, 32, 64.0])
        self.u, self.uw = _panel_nodes(np.array([0.0, 0.5, 1.0]), kt)


def _t_rule(rules, r, x, scale):
    # breakpoints for the kernel (scale 1), the data peak at t = r/x and far decay
    n_pts = r.size
    centre = r / x
    width = scale / x
    parts = [
        np.zeros((n_pts, 1)),
        np.broadcast_to(rules.t_geo, (n_pts, rules.t_geo.size)),
        centre[:, None] + width[:, None] * rules.loc,
        width[:, None] * rules.t_geo[::3],
    ]
    tmax = 1e3 * np.maximum(1.0, (r + scale) / x)
    b = np.concatenate(parts, axis=1)
    b = np.sort(np.clip(b, 0.0, tmax[:, None]), axis=1)
    b = np.concatenate([b, tmax[:, None]], axis=1)
    t, tw = _panel_nodes(b, rules.kt)
    # tail [tmax, inf) through t = tmax / u
    tt = tmax[:, None] / rules.u
    tw_tail = rules.uw * tmax[:, None] / rules.u ** 2
    return np.concatenate([t, tt], axis=1), np.concatenate([tw, tw_tail], axis=1)


def _theta_rule(rules, r, x, t, scale):
    # angular peak at theta = 0 has width sqrt((scale^2 + (r - x t)^2) / (r x t))
    rxt = r[:, None] * x[:, None] * t
    d2 = scale * scale + (r[:, None] - x[:, None] * t) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        width = np.sqrt(d2 / rxt)
    width = np.where(np.isfinite(width), width, np.inf)
    b = np.clip(width[..., None] * rules.th_geo, 0.0, math.pi)
    zeros = np.zeros(b.shape[:-1] + (1,))
    pis = np.full(b.shape[:-1] + (1,), math.pi)
    b = np.concatenate([zeros, b, pis], axis=-1)
    return _panel_nodes(b, rules.kth)


def generic_extension_jet(p, trace, r, xN, order=0, kt=16, kth=16, chunk=None):
    """Direct two-dimensional (radius x angle) evaluation of the kernel integral.

    Works for any radial data with q-derivatives; slower than the power-law path.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
    x = np.atleast_1d(np.asarray(xN, dtype=float)).ravel()
    r, x = np.broadcast_arrays(r, x)
    if np.any(x <= 0):
        raise DomainError("extension_jet needs xN > 0; the trace is the boundary data itself")
    n, g = p.n, p.gamma
    const = constants(p).p_n_gamma * (sphere_area(n - 2) if n > 2 else 2.0)
    rules = _Rules(kt, kth)
    keys = ["W"]
    if order >= 1:
        keys += ["r", "N"]
    if order >= 2:
        keys += ["rr", "rN", "NN", "r_over_r", "rN_over_r"]
    if order >= 3:
        keys += ["Nrr"]
    out = {k: np.empty(r.size) for k in keys}
    if chunk is None:
        chunk = max(1, 200000 // (kt * kth * 80))
    for lo in range(0, r.size, chunk):
        sl = slice(lo, lo + chunk)
        res = _jet_block(p, trace, r[sl], x[sl], order, rules, n, g)
        for k in keys:
            out[k][sl] = const * res[k]
    return out


def _jet_block(p, trace, r, x, order, rules, n, g):
    t, tw = _t_rule(rules, r, x, trace.scale)
    th, thw = _theta_rule(rules, r, x, t, trace.scale)
    c = np.cos(th)
    s_pow = np.sin(th) ** (n - 2) if n > 2 else np.ones_like(th)
    kern = (1.0 + t * t) ** (-(n + 2 * g) / 2) * t ** (n - 1) * tw
    R = r[:, None, None]
    X = x[:, None, None]
    T = t[..., None]
    q = R * R + X * X * T * T - 2.0 * R * X * T * c
    q = np.maximum(q, 0.0)
    gs = trace.derivs(q, order)
    wth = thw * s_pow

    def integ(v):
        return np.sum(kern * np.sum(v * wth, axis=-1), axis=-1)

    res = {"W": integ(gs[0])}
    if order >= 1:
        qr = 2.0 * R - 2.0 * X * T * c
        qN = 2.0 * X * T * T - 2.0 * R * T * c
        res["r"] = integ(gs[1] * qr)
        res["N"] = integ(gs[1] * qN)
    if order >= 2:
        qrN = -2.0 * T * c
        res["rr"] = integ(gs[2] * qr * qr + 2.0 * gs[1])
        res["rN"] = integ(gs[2] * qr * qN + gs[1] * qrN)
        res["NN"] = integ(gs[2] * qN * qN + 2.0 * T * T * gs[1])
        # W_r / r: the cos-weighted part is odd-free only after integration, so use
        # the exact identity q_r / r = 2 - 2 x t cos / r away from r = 0 and W_rr at r = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = res["r"] / r
            ratio_N = res["rN"] / r
        small = r < 1e-12
        res["r_over_r"] = np.where(small, res["rr"], ratio)
        if order >= 3:
            nrr = integ(gs[3] * qN * qr * qr + 2.0 * gs[2] * qr * qrN + 2.0 * gs[2] * qN)
            res["Nrr"] = nrr
            res["rN_over_r"] = np.where(small, nrr, ratio_N)
        else:
            res["rN_over_r"] = np.where(small, np.nan, ratio_N)
    return res


def _gauss_jacobi01(k, a, b):
    """Nodes and weights on [0, 1] for the weight t^a (1-t)^b."""
    x, w = special.roots_jacobi(k, b, a)
    return 0.5 * (x + 1.0), w / 2.0 ** (a + b + 1.0)


class _TauRule:
    """Graded rule on [0, 1] for the weight tau^a (1-tau)^b, per evaluation point.

    Layers of width l0 at tau = 0 and l1 at tau = 1 get Gauss-Jacobi panels that
    absorb the endpoint weight; the rest is split geometrically into Gauss-Legendre panels.
    """

    def __init__(self, k=16, m=16):
        self.k = k
        self.m = m
        self.gl = np.polynomial.legendre.leggauss(k)
        self._gj = {}

    def gj(self, a, b):
        key = (round(a, 14), round(b, 14))
        if key not in self._gj:
            self._gj[key] = _gauss_jacobi01(self.k, a, b)
        return self._gj[key]

    def nodes(self, l0, l1, a, b):
        """Nodes tau, their complements 1 - tau (each accurate to full relative precision) and weights."""
        j = np.arange(self.m + 1) / self.m
        xg, wg = self.gl
        l0 = l0[:, None]
        l1 = l1[:, None]

        def graded(l):
            # geometric panels from l up to 1/2, measured from the nearer end
            b = l * (0.5 / l) ** j
            lo = b[:, :-1, None]
            hi = b[:, 1:, None]
            t = (0.5 * (lo + hi) + 0.5 * (hi - lo) * xg).reshape(l.shape[0], -1)
            return t, (0.5 * (hi - lo) * wg).reshape(l.shape[0], -1)

        tm, wm = graded(l0)
        cm, wcm = graded(l1)
        xa, wa = self.gj(a, 0.0)
        xc, wc = self.gj(b, 0.0)
        tl = l0 * xa
        cr = l1 * xc
        T = np.concatenate([tl, tm, 1.0 - cm, 1.0 - cr], axis=1)
        Tc = np.concatenate([1.0 - tl, 1.0 - tm, cm, cr], axis=1)
        w = np.concatenate([wa * l0 ** (a + 1.0) * (1.0 - tl) ** b,
                            wm * tm ** a * (1.0 - tm) ** b,
                            wcm * cm ** b * (1.0 - cm) ** a,
                            wc * l1 ** (b + 1.0) * (1.0 - cr) ** a], axis=1)
        return T, Tc, w


_TAU = _TauRule()
NEAR_BOUNDARY = 1e-3


def _power_jet(p, term, r, x, order):
    """Derivatives of the extension of (eps^2 + |y|^2)^(-s) through the Feynman parametrisation

        W = C v^g int_0^1 tau^(s-1) (1-tau)^(mu-1) Q^(-h) dtau,
        Q = tau eps^2 + (1-tau) v + tau (1-tau) u,  u = r^2, v = x_N^2,

    with mu = (n+2g)/2, h = s + g.  x_N-derivatives use the product rule on v^g G(u, v)
    except in a thin layer near x_N = 0, where that cancels and they are taken at fixed
    sigma = tau / v instead.
    """
    n, g = p.n, p.gamma
    s, eps = term.s, term.eps
    mu = 0.5 * (n + 2.0 * g)
    h = s + g
    C = (term.amp * constants(p).p_n_gamma * math.pi ** (n / 2.0) * special.gamma(h)
         / (special.gamma(s) * special.gamma(mu)))
    u = r * r
    v = x * x
    e2 = eps * eps
    l0 = np.minimum(0.25, v / (e2 + u))
    l1 = np.minimum(0.25, e2 / (e2 + u + v))
    U = u[:, None]
    V = v[:, None]
    T0, C0, w0 = _TAU.nodes(l0, l1, s - 1.0, mu - 1.0)
    Q0 = T0 * e2 + C0 * V + T0 * C0 * U
    # weight * Q^(-h-k) is formed in logs: each factor alone can overflow near x_N = 0
    with np.errstate(divide="ignore"):
        lw0, lq0 = np.log(w0), np.log(Q0)
    E0 = lambda k: np.exp(lw0 - (h + k) * lq0)
    vg = v ** g
    K0 = E0(0)
    res = {"W": C * vg * np.sum(K0, axis=1)}
    if order == 0:
        return res
    c1, c2, c3 = -h, h * (h + 1.0), -h * (h + 1.0) * (h + 2.0)
    P1 = c1 * E0(1)
    P2 = c2 * E0(2)
    T1, C1, w1 = _TAU.nodes(l0, l1, s - 1.0, mu - 2.0)
    Q1 = T1 * e2 + C1 * V + T1 * C1 * U
    with np.errstate(divide="ignore"):
        lw1, lq1 = np.log(w1), np.log(Q1)
    E1 = lambda k: np.exp(lw1 - (h + k) * lq1)
    a0 = T0 * C0
    L0 = V + T0 * U
    L1 = V + T1 * U
    I10 = vg * np.sum(P1 * a0, axis=1)
    G = np.sum(K0, axis=1)
    Gv = np.sum(P1 * C0, axis=1)
    # product rule on v^g G(u, v) away from the boundary, sigma form inside the layer
    I01 = g * v ** (g - 1.0) * G + vg * Gv
    near = v < NEAR_BOUNDARY * (e2 + u)
    if np.any(near):
        I01s = -v ** (g - 1.0) * ((mu - 1.0) * np.sum(T1 * E1(0), axis=1)
                                  + np.sum(P1 * T0 * L0, axis=1))
        I01 = np.where(near, I01s, I01)
    res["r"] = C * 2.0 * r * I10
    res["N"] = C * 2.0 * x * I01
    if order == 1:
        return res
    I20 = vg * np.sum(P2 * a0 * a0, axis=1)
    P1_1 = c1 * E1(1)
    I11 = g * v ** (g - 1.0) * np.sum(P1 * a0, axis=1) + vg * np.sum(P2 * a0 * C0, axis=1)
    if np.any(near):
        I11s = -v ** (g - 1.0) * ((mu - 1.0) * np.sum(T1 * T1 * C1 * P1_1, axis=1)
                                  + np.sum(P2 * T0 * T0 * C0 * L0 + P1 * T0 * T0, axis=1))
        I11 = np.where(near, I11s, I11)
    Gvv = np.sum(P2 * C0 ** 2, axis=1)
    I02 = g * (g - 1.0) * v ** (g - 2.0) * G + 2.0 * g * v ** (g - 1.0) * Gv + vg * Gvv
    if mu > 2.0 + 1e-9 and np.any(near):
        # near the boundary the product rule cancels like v / (eps^2 + u); use the sigma form
        T2, C2, w2 = _TAU.nodes(l0, l1, s - 1.0, mu - 3.0)
        Q2 = T2 * e2 + C2 * V + T2 * C2 * U
        with np.errstate(divide="ignore"):
            K2 = np.exp(np.log(w2) - h * np.log(Q2))
        I02s = v ** (g - 2.0) * ((mu - 1.0) * (mu - 2.0) * np.sum(T2 * T2 * K2, axis=1)
                                 + 2.0 * (mu - 1.0) * np.sum(T1 * T1 * L1 * P1_1, axis=1)
                                 + np.sum(P2 * T0 * T0 * L0 * L0, axis=1))
        I02 = np.where(near, I02s, I02)
    res["rr"] = C * (2.0 * I10 + 4.0 * u * I20)
    res["r_over_r"] = C * 2.0 * I10
    res["NN"] = C * (2.0 * I01 + 4.0 * v * I02)
    res["rN"] = C * 4.0 * r * x * I11
    res["rN_over_r"] = C * 4.0 * x * I11
    if order >= 3:
        P3 = c3 * E0(3)
        P2_1 = c2 * E1(2)
        a1 = T1 * C1
        I21 = (g * v ** (g - 1.0) * np.sum(P2 * a0 * a0, axis=1)
               + vg * np.sum(P3 * a0 * a0 * C0, axis=1))
        if np.any(near):
            I21s = -v ** (g - 1.0) * ((mu - 1.0) * np.sum(T1 * a1 * a1 * P2_1, axis=1)
                                      + np.sum(P3 * T0 * a0 * a0 * L0 + 2.0 * P2 * T0 * T0 * a0, axis=1))
            I21 = np.where(near, I21s, I21)
        res["Nrr"] = C * 2.0 * x * (2.0 * I11 + 4.0 * u * I21)
    return res


def extension_jet(p, trace, r, xN, order=0, chunk=2048):
    """Extension of radial boundary data and its derivatives at points (r, xN), xN > 0.

    order 0 gives W; order 1 adds W_r, W_N; order 2 adds W_rr, W_rN, W_NN and the
    ratios W_r / r, W_rN / r (finite at r = 0); order 3 adds W_Nrr.
    Power-law data (bubbles and their sums) use the one-dimensional representation,
    anything else falls back to the direct kernel integral.
    """
    if not hasattr(trace, "terms"):
        return generic_extension_jet(p, trace, r, xN, order=order)
    r = np.atleast_1d(np.asarray(r, dtype=float)).ravel()
    x = np.atleast_1d(np.asarray(xN, dtype=float)).ravel()
    r, x = np.broadcast_arrays(r, x)
    if np.any(x <= 0):
        raise DomainError("extension_jet needs xN > 0; the trace is the boundary data itself")
    out = None
    for lo in range(0, r.size, chunk):
        sl = slice(lo, lo + chunk)
        acc = None
        for term in trace.terms():
            part = _power_jet(p, term, r[sl], x[sl], order)
            acc = part if acc is None else {k: acc[k] + part[k] for k in acc}
        if out is None:
            out = {k: np.empty(r.size) for k in acc}
        for k in acc:
            out[k][sl] = acc[k]
    return out


def extend(p, boundary, xN, r, **kw):
    """Value of the Poisson-kernel extension of radial boundary data at (r, xN)."""
    trace = boundary if hasattr(boundary, "derivs") else CallableTrace(boundary)
    check_decay(p, trace)
    xN = np.asarray(xN, dtype=float)
    r = np.asarray(r, dtype=float)
    shape = np.broadcast(r, xN).shape
    vals = extension_jet(p, trace, r, xN, order=0, **kw)["W"]
    if not np.all(np.isfinite(vals)):
        raise NumericError("extension produced non-finite values", estimate=vals)
    return vals.reshape(shape) if shape else float(vals[0])


def check_decay(p, trace):
    """Boundary data must grow slower than s^(2 gamma) for the kernel integral to converge."""
    s = np.array([1e3, 1e4])
    v = np.abs(np.asarray(trace(s), dtype=float))
    if not np.all(np.isfinite(v)):
        raise DomainError("boundary data not finite at large radius")
    if v[0] > 0 and v[1] > 0:
        rate = math.log10(v[1] / v[0])
        if rate >= 2.0 * p.gamma:
            raise DomainError(f"boundary data grows like s^{rate:.2f}, not integrable against the kernel")


@dataclass(frozen=True)
class BubbleParams:
    p: object
    eps: float = 1.0
    sigma: tuple = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        sig = np.zeros(self.p.n) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        if sig.shape != (self.p.n,):
            raise DomainError(f"sigma must be a vector of length {self.p.n}")
        object.__setattr__(self, "sigma", tuple(sig))


def w_eval(b, xbar):
    xbar = np.asarray(xbar, dtype=float)
    d2 = np.sum((xbar - np.asarray(b.sigma)) ** 2, axis=-1)
    alpha = constants(b.p).alpha_n_gamma
    return alpha * (b.eps / (b.eps ** 2 + d2)) ** b.p.nu


def _alpha_72():
    from .constants import ParamPoint
    return constants(ParamPoint(7, 1.5)).alpha_n_gamma


def W_closed_form(eps, r, xN):
    """Explicit extension of the bubble for (n, gamma) = (7, 3/2)."""
    r = np.asarray(r, dtype=float)
    xN = np.asarray(xN, dtype=float)
    a = eps / ((eps + xN) ** 2 + r * r)
    return _alpha_72() * (a * a + 4.0 * xN * a ** 3)


def W_derivatives_32(eps, r, xN):
    """Closed-form (d_r W, d_N W, d_rr W - d_r W / r) for (7, 3/2); reduces to the eps = 1 formulas."""
    r = np.asarray(r, dtype=float)
    xN = np.asarray(xN, dtype=float)
    # W_eps(x) = eps^(-2) W_1(x / eps)
    R = r / eps
    X = xN / eps
    al = _alpha_72()
    D = (1.0 + X) ** 2 + R * R
    dr = -4.0 * al * R * (X * X + 8.0 * X + 1.0 + R * R) / D ** 4
    dN = -4.0 * al * X * (X * X + 8.0 * X + 7.0 + R * R) / D ** 4
    drr = 24.0 * al * R * R * (X * X + 10.0 * X + 1.0 + R * R) / D ** 5
    s = eps ** -3
    return dr * s, dN * s, drr * eps ** -4


@dataclass(frozen=True)
class RadialProfile:
    """Samples V[i, j] = V(r_grid[j], xN_grid[i]); xN_grid[0] = 0 is the trace row."""

    p: object
    r_grid: np.ndarray
    xN_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        x = np.asarray(self.xN_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise DomainError("r_grid must be strictly increasing and nonnegative")
        if np.any(np.diff(x) <= 0) or x[0] != 0:
            raise DomainError("xN_grid must be strictly increasing and start with the boundary row 0")
        if v.shape != (x.size, r.size):
            raise DomainError("values must have shape (len(xN_grid), len(r_grid))")
        if not np.all(np.isfinite(v)):
            raise DomainError("profile values must be finite")
        for name, arr in (("r_grid", r), ("xN_grid", x), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def trace(self):
        return self.values[0]

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "xN", "value"])
        for i, x in enumerate(self.xN_grid):
            for j, r in enumerate(self.r_grid):
                w.writerow([repr(float(r)), repr(float(x)), repr(float(self.values[i, j]))])
        return buf.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, p, text):
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["r", "xN", "value"]:
            raise DomainError("profile CSV must start with the header r,xN,value")
        data = np.array([[float(c) for c in row] for row in rows[1:]])
        r = np.unique(data[:, 0])
        x = np.unique(data[:, 1])
        return cls(p, r, x, data[:, 2].reshape(x.size, r.size))


def default_grids(n_r=120, n_x=80):
    r = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, n_r - 1)])
    x = np.concatenate([[0.0], np.geomspace(1e-3, 1e2, n_x - 1)])
    return r, x


def build_profile(p, trace, r_grid=None, xN_grid=None, closed_form=None):
    """Sample the extension of `trace` (or a closed form W(r, xN)) on a grid."""
    dr, dx = default_grids()
    r_grid = dr if r_grid is None else np.asarray(r_grid, dtype=float)
    xN_grid = dx if xN_grid is None else np.asarray(xN_grid, dtype=float)
    if xN_grid[0] != 0:
        xN_grid = np.concatenate([[0.0], xN_grid])
    R, X = np.meshgrid(r_grid, xN_grid[1:])
    if closed_form is not None:
        inner = closed_form(R, X)
        top = closed_form(r_grid, np.zeros_like(r_grid))
    else:
        inner = extension_jet(p, trace, R.ravel(), X.ravel())["W"].reshape(R.shape)
        top = trace(r_grid)
    return RadialProfile(p, r_grid, xN_grid, np.vstack([top, inner]))
