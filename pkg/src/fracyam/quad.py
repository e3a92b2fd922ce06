"""Weighted quadrature over half-balls, the half-space and the boundary for radial integrands.

Integrands are functions f(r, xN) of the tangential radius r = |x_bar| and the height xN.
Half-space integrals use polar coordinates (rho, phi) in the (r, xN) quarter plane,
with r = rho cos(phi), xN = rho sin(phi), so that

    int f x_N^m dx = |S^{n-1}| int int f rho^(n+m) cos^(n-1)(phi) sin^m(phi) dphi drho.

The first phi-panel uses Gauss-Jacobi nodes for the weight phi^m, the remaining panels
are geometrically graded Gauss-Legendre panels.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .constants import sphere_area
from .errors import DomainError


@dataclass(frozen=True)
class HalfBall:
    radius: float


@dataclass(frozen=True)
class HalfSpace:
    pass


@dataclass(frozen=True)
class Boundary:
    radius: float = None


@dataclass(frozen=True)
class QuadratureSpec:
    region: object
    weight_exp: float
    n: int
    rel_tol: float = 1e-8
    abs_tol: float = 1e-300
    max_refine: int = 3
    divergence_declared: bool = False
    scales: tuple = field(default=(1.0,))
    decades_below: float = 6.0

    def __post_init__(self):
        if not self.weight_exp > -1:
            raise DomainError(f"weight exponent {self.weight_exp} <= -1 is not integrable at xN = 0")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.n < 2:
            raise DomainError("n must be at least 2")
        if isinstance(self.region, HalfSpace) and self.divergence_declared:
            raise DomainError("divergent integrands must be integrated over HalfBall regions")
        if isinstance(self.region, HalfBall) and not self.region.radius > 0:
            raise DomainError("half-ball radius must be positive")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    err_estimate: float
    evaluations: int
    converged: bool = True


def _gl(k):
    return np.polynomial.legendre.leggauss(k)


def _panels(bounds, k):
    x, w = _gl(k)
    a = np.asarray(bounds[:-1])[:, None]
    b = np.asarray(bounds[1:])[:, None]
    return (0.5 * (a + b) + 0.5 * (b - a) * x).ravel(), (0.5 * (b - a) * w).ravel()


def _gauss_jacobi_left(k, a, h):
    """Nodes and weights on [0, h] for the weight t^a."""
    x, w = special.roots_jacobi(k, 0.0, a)
    return 0.5 * h * (x + 1.0), w * (0.5 * h) ** (a + 1.0)


def _radius_breaks(spec, rmax, level):
    scales = np.asarray(spec.scales, dtype=float)
    lo = scales.min() * 10.0 ** (-spec.decades_below)
    per_decade = 3 * 2 ** level
    nd = max(1, int(math.ceil(math.log10(rmax / lo) * per_decade)))
    b = list(np.geomspace(lo, rmax, nd + 1))
    for s in scales:
        for c in (0.5, 1.0, 2.0):
            if lo < c * s < rmax:
                b.append(c * s)
    return np.unique(np.concatenate([[0.0], b]))


def _angle_rule(m, level, k):
    # geometric grading toward phi = 0 where x_N^m and x_N^(2 gamma) terms live
    depth = 24 + 4 * level
    ratio = 2.0 ** (-1.0 / 2 ** level)
    nb = int(depth * 2 ** level)
    b = (math.pi / 2) * ratio ** np.arange(nb + 1)
    b = b[::-1]
    phi0, w0 = _gauss_jacobi_left(k, m, b[0])
    # weight phi^m is in w0; divide it out so callers can multiply by sin^m uniformly
    with np.errstate(divide="ignore"):
        w0 = w0 * (np.sin(phi0) / phi0) ** m
    phi1, w1 = _panels(b, k)
    w1 = w1 * np.sin(phi1) ** m
    phi = np.concatenate([phi0, phi1])
    w = np.concatenate([w0, w1])
    return phi, w


def radial_rule(spec, level=0, k=8):
    """Nodes (r, xN) and weights including the measure and the weight x_N^m.

    For Boundary regions xN is identically 0 and the weights carry |S^{n-1}| r^(n-1).
    """
    n, m = spec.n, spec.weight_exp
    area = sphere_area(n - 1)
    reg = spec.region
    if isinstance(reg, Boundary):
        rmax = reg.radius if reg.radius is not None else 1e4 * max(spec.scales)
        rb = _radius_breaks(spec, rmax, level)
        r, w = _panels(rb, k)
        w = w * area * r ** (n - 1)
        if reg.radius is None:
            t, tw = _tail_rule(level, k)
            rt = rmax / t
            r = np.concatenate([r, rt])
            with np.errstate(over="ignore"):
                wt = tw * rmax / t ** 2 * area * rt ** (n - 1)
            wt[~np.isfinite(wt)] = 0.0
            w = np.concatenate([w, wt])
        return r, np.zeros_like(r), w
    if isinstance(reg, HalfBall):
        rmax = reg.radius
    else:
        rmax = 1e4 * max(spec.scales)
    rb = _radius_breaks(spec, rmax, level)
    rho, rw = _panels(rb, k)
    if isinstance(reg, HalfSpace):
        t, tw = _tail_rule(level, k)
        rho = np.concatenate([rho, rmax / t])
        rw = np.concatenate([rw, tw * rmax / t ** 2])
    phi, pw = _angle_rule(m, level, k)
    P, F = np.meshgrid(rho, phi, indexing="ij")
    with np.errstate(over="ignore"):
        radial_w = rw * rho ** (n + m)
    # far tail nodes whose measure overflows carry integrands far below double range
    radial_w[~np.isfinite(radial_w)] = 0.0
    ang_w = pw * np.cos(phi) ** (n - 1)
    W = area * radial_w[:, None] * ang_w[None, :]
    return (P * np.cos(F)).ravel(), (P * np.sin(F)).ravel(), W.ravel()


def _tail_rule(level, k):
    # t in (0, 1] maps to rho = R / t; grade toward t = 0
    nb = 10 * 2 ** level
    b = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, nb + 1)])
    return _panels(b, k)


def integrate_radial(f, spec, k=8):
    """Adaptive weighted integral of f(r, xN) over spec.region; refines until two levels agree."""
    prev = None
    evals = 0
    for level in range(spec.max_refine + 1):
        r, x, w = radial_rule(spec, level, k)
        vals = np.asarray(f(r, x), dtype=float)
        evals += r.size
        if not np.all(np.isfinite(vals)):
            raise DomainError("integrand is not finite at the quadrature nodes")
        cur = float(np.dot(w, vals))
        if prev is not None:
            err = abs(cur - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(cur)):
                return IntegralResult(cur, err, evals, True)
        prev = cur
    return IntegralResult(prev, err, evals, False)


def _mc_normaliser(spec, R):
    n, m = spec.n, spec.weight_exp
    return (sphere_area(n - 1) * R ** (n + m + 1) / (n + m + 1)
            * special.beta((m + 1) / 2.0, n / 2.0) / 2.0)


def mc_oracle(f, spec, n_samples, seed):
    """Monte-Carlo estimate with importance density proportional to r^(n-1) x_N^m on the region.

    Half-balls sample rho with density rho^(n+m) and sin^2(phi) from a Beta((m+1)/2, n/2) law,
    which reproduces the weighted measure exactly, so the estimator is normaliser * mean(f).
    """
    rng = np.random.default_rng(seed)
    reg = spec.region
    n, m = spec.n, spec.weight_exp
    if isinstance(reg, HalfBall):
        R = reg.radius
        rho = R * rng.random(n_samples) ** (1.0 / (n + m + 1))
        s2 = rng.beta((m + 1) / 2.0, n / 2.0, n_samples)
        x = rho * np.sqrt(s2)
        r = rho * np.sqrt(1.0 - s2)
        Z = _mc_normaliser(spec, R)
        vals = np.asarray(f(r, x), dtype=float) * Z
    elif isinstance(reg, Boundary):
        area = sphere_area(n - 1)
        if reg.radius is not None:
            R = reg.radius
            r = R * rng.random(n_samples) ** (1.0 / n)
            vals = np.asarray(f(r, np.zeros_like(r)), dtype=float) * area * R ** n / n
        else:
            # r = u / (1 - u) with u ~ Beta(n, 2): density n(n+1) r^(n-1) (1+r)^(-n-2)
            u = rng.beta(n, 2.0, n_samples)
            r = u / (1.0 - u)
            dens = n * (n + 1) * r ** (n - 1) * (1.0 + r) ** (-n - 2.0)
            vals = np.asarray(f(r, np.zeros_like(r)), dtype=float) * area * r ** (n - 1) / dens
    else:
        raise DomainError("mc_oracle supports HalfBall and Boundary regions")
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n_samples))
    return IntegralResult(mean, se, n_samples, True)
