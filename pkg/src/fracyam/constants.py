"""Gamma function and the closed-form constants attached to a parameter point (n, gamma)."""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from scipy import integrate

from .errors import DomainError, NumericError

# Lanczos approximation, g = 7, nine coefficients
_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _sin_pi(x):
    # sin(pi x) with exact argument reduction so poles stay sharp away from the origin
    y = math.fmod(x, 2.0)
    if y < 0:
        y += 2.0
    if y > 1.0:
        return -_sin_pi(y - 1.0)
    if y > 0.5:
        y = 1.0 - y
    return math.sin(math.pi * y)


def _lanczos_positive(x):
    # valid for x >= 0.5
    x -= 1.0
    a = _LANCZOS[0]
    t = x + _G + 0.5
    for i in range(1, 9):
        a += _LANCZOS[i] / (x + i)
    return math.exp(_HALF_LOG_2PI + (x + 0.5) * math.log(t) - t) * a


def gamma_fn(x):
    """Gamma function for real x, raising DomainError at the poles 0, -1, -2, ..."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma_fn has a pole at x = {x:g}")
    if x < 0.5:
        return math.pi / (_sin_pi(x) * _lanczos_positive(1.0 - x))
    if x == math.floor(x) and x <= 23:
        return float(math.factorial(int(x) - 1))
    # small shifts keep the series in its most accurate range
    shift = 1.0
    while x < 1.5:
        shift *= x
        x += 1.0
    return _lanczos_positive(x) / shift


class Regime(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"


@dataclass(frozen=True)
class ParamPoint:
    n: int
    gamma: float
    margin: float = field(default=1e-3, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        g = float(self.gamma)
        object.__setattr__(self, "gamma", g)
        if not (0.0 < g < 2.0):
            raise DomainError(f"gamma must lie in (0,1) or (1,2), got {g}")
        if not (g < self.n / 2.0):
            raise DomainError(f"need 0 < gamma < n/2, got n={self.n}, gamma={g}")
        if abs(g - 1.0) < self.margin:
            raise DomainError(f"gamma={g} is within {self.margin} of 1")

    @property
    def m0(self):
        return 1.0 - 2.0 * self.gamma

    @property
    def m1(self):
        return 3.0 - 2.0 * self.gamma

    @property
    def regime(self):
        return Regime.TYPE_I if self.gamma < 1.0 else Regime.TYPE_II

    @property
    def weight_exp(self):
        """Weight exponent of the natural energy for this regime."""
        return self.m0 if self.regime is Regime.TYPE_I else self.m1

    @property
    def nu(self):
        """Half the decay exponent of the bubble, (n - 2 gamma) / 2."""
        return 0.5 * (self.n - 2.0 * self.gamma)

    @property
    def crit_exp(self):
        """Critical trace exponent 2n / (n - 2 gamma)."""
        return 2.0 * self.n / (self.n - 2.0 * self.gamma)

    def as_dict(self):
        return {"n": self.n, "gamma": self.gamma}


def sphere_area(k):
    """Surface area of the unit k-sphere in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / gamma_fn((k + 1) / 2.0)


@dataclass(frozen=True)
class ConstantSet:
    d_gamma: float
    kappa_gamma: float
    p_n_gamma: float
    alpha_n_gamma: float
    S_n_gamma: float
    Y_sphere: float

    def as_dict(self):
        return {
            "d_gamma": self.d_gamma,
            "kappa_gamma": self.kappa_gamma,
            "p_n_gamma": self.p_n_gamma,
            "alpha_n_gamma": self.alpha_n_gamma,
            "S_n_gamma": self.S_n_gamma,
            "Y_sphere": self.Y_sphere,
        }


@lru_cache(maxsize=None)
def _constants(n, g):
    fl = math.floor(g)
    d = 2.0 ** (2 * g) * gamma_fn(g) / gamma_fn(-g)
    kappa = (gamma_fn(g - fl) / gamma_fn(g + 1) * (-1) ** (fl + 1) * d
             / (2.0 ** (2 * fl + 1) * math.factorial(fl)))
    S = (kappa * gamma_fn((n - 2 * g) / 2) / gamma_fn((n + 2 * g) / 2)
         * sphere_area(n) ** (-2 * g / n))
    p = gamma_fn((n + 2 * g) / 2) / (math.pi ** (n / 2) * gamma_fn(g))
    alpha = ((kappa / S) ** ((n - 2 * g) / (4 * g))
             * (2.0 ** (n - 1) * math.pi ** (-(n + 1) / 2) * gamma_fn((n + 1) / 2))
             ** ((n - 2 * g) / (2 * n)))
    return ConstantSet(d, kappa, p, alpha, S, kappa / S)


def constants(p):
    return _constants(p.n, p.gamma)


def poisson_normalization_check(p, xN, rtol=1e-12):
    """Quadrature value of p_{n,gamma} times the total mass of the extension kernel at height xN."""
    if not xN > 0:
        raise DomainError("xN must be positive")
    n, g = p.n, p.gamma
    c = constants(p).p_n_gamma * sphere_area(n - 1)

    def f(s):
        return xN ** (2 * g) * (s * s + xN * xN) ** (-(n + 2 * g) / 2) * s ** (n - 1)

    # split at the kernel width so the adaptive rule sees the peak
    a, err_a = integrate.quad(f, 0.0, xN, epsabs=0.0, epsrel=rtol, limit=200)
    b, err_b = integrate.quad(f, xN, math.inf, epsabs=0.0, epsrel=rtol, limit=200)
    value = c * (a + b)
    err = c * (err_a + err_b)
    if not err <= 1e3 * rtol * abs(value):
        raise NumericError("kernel normalization did not converge", estimate=value)
    return value
