"""Constrained minimization of the flat-model trace energy over radial boundary data.

Traces are expanded as u = sum_k c_k (1 + s^2)^(-(nu + k)), k = 0..K.  Each basis
function has a one-dimensional extension formula, so the quadratic form reduces to a
Gram-type matrix A_jk = Q(E phi_j, E phi_k) computed once by half-space quadrature, and
the energy and its gradient become exact functions of the coefficients.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize as scipy_minimize, nnls

from .bubble import PowerTrace, extension_jet
from .constants import constants
from .energy import _order_for, form_density
from .errors import DomainError, NumericError
from .quad import Boundary, HalfSpace, QuadratureSpec, radial_rule
from .report import VerificationReport, judge, timed


@dataclass(frozen=True)
class Basis:
    p: object
    K: int = 5
    level: int = 0

    def traces(self):
        return [PowerTrace(self.p.nu + k) for k in range(self.K + 1)]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.stack([t(s) for t in self.traces()], axis=-1)


@lru_cache(maxsize=8)
def form_matrix(basis):
    """A_jk = Q(E phi_j, E phi_k) over the half-space."""
    p = basis.p
    r, x, w = radial_rule(QuadratureSpec(HalfSpace(), p.weight_exp, p.n), basis.level)
    jets = [extension_jet(p, t, r, x, order=_order_for(p)) for t in basis.traces()]
    m = len(jets)
    A = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            A[i, j] = A[j, i] = float(np.dot(w, form_density(p, jets[i], jets[j], x)))
    return A


@lru_cache(maxsize=8)
def _boundary_nodes(basis):
    p = basis.p
    r, _, w = radial_rule(QuadratureSpec(Boundary(), 0.0, p.n), basis.level + 1)
    return r, w, basis(r)


@dataclass
class MinimizerState:
    p: object
    coeffs: np.ndarray
    r_grid: np.ndarray
    trace: np.ndarray
    energy: float
    iteration: int = 0
    grad_norm: float = float("nan")
    flags: list = field(default_factory=list)
    history: list = field(default_factory=list)


class TraceEnergy:
    """Energy, mass and gradients as functions of the basis coefficients."""

    def __init__(self, p, K=5, level=0):
        self.p = p
        self.basis = Basis(p, K, level)
        self.A = form_matrix(self.basis)
        self.kappa = constants(p).kappa_gamma
        self.rb, self.wb, self.Phi = _boundary_nodes(self.basis)
        self.beta = (p.n - 2 * p.gamma) / p.n
        self.target_mass = constants(p).Y_sphere ** (p.n / (2 * p.gamma))
        self.r_grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 121)])

    def trace(self, c, r=None):
        return (self.Phi if r is None else self.basis(r)) @ c

    def mass(self, c):
        return float(np.dot(self.wb, np.abs(self.trace(c)) ** self.p.crit_exp))

    def energy(self, c):
        m = self.mass(c)
        if not m > 0:
            raise DomainError("trace vanishes; the quotient is undefined")
        return self.kappa * float(c @ self.A @ c) / m ** self.beta

    def gradient(self, c):
        """Exact gradient of the energy in the coefficients."""
        u = self.trace(c)
        q = self.p.crit_exp
        m = float(np.dot(self.wb, np.abs(u) ** q))
        dm = q * (self.wb * np.abs(u) ** (q - 2) * u) @ self.Phi
        num = self.kappa * float(c @ self.A @ c)
        return 2 * self.kappa * (self.A @ c) / m ** self.beta - self.beta * num * m ** (-self.beta - 1) * dm

    def normalize(self, c):
        return c * (self.target_mass / self.mass(c)) ** (1.0 / self.p.crit_exp)

    def state(self, c, iteration=0, flags=None, history=None):
        g = self.gradient(c)
        return MinimizerState(self.p, c.copy(), self.r_grid, self.trace(c, self.r_grid), self.energy(c),
                              iteration, self.natural_norm(c, g), list(flags or []), list(history or []))

    def natural_norm(self, c, g):
        """Size of the gradient in the energy metric, relative to the energy."""
        return float(math.sqrt(max(g @ np.linalg.solve(self.A, g), 0.0) / max(c @ self.A @ c, 1e-300)))

    def project(self, f, r=None):
        """Nonnegative least-squares coefficients of samples f(r) on a log grid, so the trace stays positive."""
        r = np.geomspace(1e-3, 1e2, 400) if r is None else np.asarray(r, dtype=float)
        B = self.basis(r)
        wts = np.sqrt(r ** (self.p.n - 1) * np.gradient(r))
        c, _ = nnls(B * wts[:, None], np.asarray(f(r), dtype=float) * wts)
        return c


def energy_and_gradient(state, model=None):
    model = model or TraceEnergy(state.p, len(state.coeffs) - 1)
    return model.energy(state.coeffs), model.gradient(state.coeffs)


INITS = {
    "bubble": lambda p: (lambda r: (1.0 + r * r) ** (-p.nu)),
    "gaussian": lambda p: (lambda r: np.exp(-r * r)),
    "plateau": lambda p: (lambda r: (1.0 + r ** 8) ** (-(p.n - 2 * p.gamma) / 8.0)),
}


def initial_coeffs(model, init):
    p = model.p
    if isinstance(init, str):
        if init not in INITS:
            raise DomainError(f"unknown init {init!r}; choose from {sorted(INITS)}")
        if init == "bubble":
            c = np.zeros(model.basis.K + 1)
            c[0] = 1.0
            return c
        init = INITS[init](p)
    c = model.project(init)
    if not np.any(c) or model.mass(c) <= 0:
        raise DomainError("initial trace must be nonzero")
    return c


def minimize(p, init="gaussian", max_iter=200, tol=1e-6, K=5, level=0):
    """BFGS on the scale-invariant quotient in coordinates whitened by the form matrix.

    The quotient is homogeneous of degree zero, so no constraint is needed during the
    search; the result is rescaled to the target mass afterwards.
    """
    model = TraceEnergy(p, K, level)
    if callable(init) and not isinstance(init, str):
        probe = np.asarray(init(np.geomspace(1e-3, 1e2, 50)), dtype=float)
        if not np.any(probe != 0):
            raise DomainError("initial trace must be nonzero")
        if np.any(probe < 0):
            raise DomainError("initial trace must be nonnegative")
    c = model.normalize(initial_coeffs(model, init))
    flags = []
    if np.any(model.trace(c, model.r_grid) < 0):
        flags.append("negative_initial_trace")
    L = np.linalg.cholesky(model.A)
    to_c = lambda y: np.linalg.solve(L.T, y)
    E0 = model.energy(c)
    scale = 1.0 / E0
    history = [E0]
    fun = lambda y: model.energy(to_c(y)) * scale
    jac = lambda y: np.linalg.solve(L, model.gradient(to_c(y))) * scale
    res = scipy_minimize(fun, L.T @ c, jac=jac, method="BFGS",
                         callback=lambda y: history.append(model.energy(to_c(y))),
                         options={"maxiter": max_iter, "gtol": tol})
    if not res.success:
        flags.append("not_converged: " + str(res.message))
    c = model.normalize(to_c(res.x))
    if np.any(model.trace(c, model.r_grid) < -1e-12 * np.max(np.abs(model.trace(c, model.r_grid)))):
        c = -c if np.sum(c) < 0 else c
        if np.any(model.trace(c, model.r_grid) < 0):
            flags.append("negative_final_trace")
    return model.state(c, int(res.nit), flags, history)


def gradient_fd_check(p, c=None, directions=5, t=1e-4, seed=0, K=5, level=0):
    """Directional derivatives of the energy against central differences along random tangent directions."""
    model = TraceEnergy(p, K, level)
    if c is None:
        c = model.normalize(model.project(INITS["gaussian"](p)))
    rng = np.random.default_rng(seed)
    g = model.gradient(c)
    errs = []
    u = model.trace(c)
    q = p.crit_exp
    grad_mass = q * (model.wb * np.abs(u) ** (q - 2) * u) @ model.Phi
    for _ in range(directions):
        v = rng.standard_normal(c.size)
        v -= (v @ grad_mass) / (grad_mass @ grad_mass) * grad_mass  # tangent to the mass constraint
        v *= np.linalg.norm(c) / np.linalg.norm(v)
        fd = (model.energy(c + t * v) - model.energy(c - t * v)) / (2 * t)
        an = float(g @ v)
        errs.append(abs(fd - an) / max(abs(an), abs(fd), 1e-12 * model.energy(c)))
    return errs


def bubble_match(state, model=None):
    """Fit a bubble by the central value and half-height radius; max relative deviation within 4 radii."""
    p = state.p
    model = model or TraceEnergy(p, len(state.coeffs) - 1)
    u0 = float(model.trace(state.coeffs, np.array([0.0]))[0])
    # half-height radius of (1 + (r/eps)^2)^(-nu) is eps sqrt(2^(1/nu) - 1)
    r = np.geomspace(1e-4, 1e3, 4000)
    u = model.trace(state.coeffs, r)
    below = np.nonzero(u <= 0.5 * u0)[0]
    if below.size == 0:
        raise NumericError("profile never falls to half height", estimate=u0)
    r_half = float(r[below[0]])
    eps = r_half / math.sqrt(2 ** (1 / p.nu) - 1)
    rr = np.linspace(0.0, 4 * r_half, 400)
    fit = u0 * (1 + (rr / eps) ** 2) ** (-p.nu)
    dev = float(np.max(np.abs(model.trace(state.coeffs, rr) / fit - 1)))
    return dev, eps


def minimizer_checks(p, K=5, level=0, seed=42):
    """Gaussian start reaches the sphere constant, bubble start stays put, gradient matches differences."""
    Y = constants(p).Y_sphere
    reports = []
    with timed() as t:
        st = minimize(p, "gaussian", K=K, level=level)
    gap = st.energy / Y - 1
    monotone = all(b <= a * (1 + 1e-12) for a, b in zip(st.history, st.history[1:]))
    reports.append(VerificationReport("minimize.gaussian_gap", {**p.as_dict(), "init": "gaussian"},
                                      st.energy, Y, 5e-3, judge(abs(gap) <= 5e-3 and monotone), t[0],
                                      details={"rel_gap": gap, "iterations": st.iteration,
                                               "monotone": monotone, "flags": st.flags}))
    with timed() as t:
        model = TraceEnergy(p, K, level)
        c0 = model.normalize(initial_coeffs(model, "bubble"))
        sb = minimize(p, "bubble", K=K, level=level)
        move = float(np.max(np.abs(sb.trace - model.trace(c0, model.r_grid))) / np.max(model.trace(c0, model.r_grid)))
    reports.append(VerificationReport("minimize.bubble_fixed_point", {**p.as_dict(), "init": "bubble"},
                                      move, 0.0, 1e-4, judge(move <= 1e-4), t[0],
                                      details={"energy_gap": sb.energy / Y - 1, "iterations": sb.iteration}))
    with timed() as t:
        errs = gradient_fd_check(p, seed=seed, K=K, level=level)
    worst = max(errs)
    reports.append(VerificationReport("minimize.gradient_fd", {**p.as_dict(), "directions": len(errs)},
                                      worst, 0.0, 1e-4, judge(worst <= 1e-4), t[0], details={"errors": errs}))
    return reports, st
