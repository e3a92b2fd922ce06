"""Duck-typed fit/transform wrappers for use in data pipelines.

Nothing in the package learns from data except the bubble fit below; the extension
transformer only validates its parameters in `fit`.
"""

import numpy as np
from scipy.optimize import curve_fit

from .bubble import BubbleTrace, extension_jet
from .constants import ParamPoint
from .errors import DomainError


class _Params:
    _param_names = ()

    def get_params(self, deep=True):
        return {k: getattr(self, k) for k in self._param_names}

    def set_params(self, **params):
        for k, v in params.items():
            if k not in self._param_names:
                raise ValueError(f"unknown parameter {k!r}")
            setattr(self, k, v)
        return self


class ExtensionTransformer(_Params):
    """Maps rows (r, xN) to the extended bubble value at that point."""

    _param_names = ("n", "gamma", "eps")

    def __init__(self, n=3, gamma=0.5, eps=1.0):
        self.n = n
        self.gamma = gamma
        self.eps = eps

    def fit(self, X=None, y=None):
        self.point_ = ParamPoint(self.n, self.gamma)
        self.trace_ = BubbleTrace(self.point_, self.eps)
        return self

    def transform(self, X):
        if not hasattr(self, "trace_"):
            raise DomainError("call fit before transform")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise DomainError("X must have shape (rows, 2) holding (r, xN)")
        return extension_jet(self.point_, self.trace_, X[:, 0], X[:, 1])["W"]

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)


class BubbleFit(_Params):
    """Least-squares fit of amp (1 + (r/eps)^2)^(-nu) to radial trace samples."""

    _param_names = ("n", "gamma")

    def __init__(self, n=3, gamma=0.5):
        self.n = n
        self.gamma = gamma

    def _model(self, r, amp, eps):
        return amp * (1.0 + (r / eps) ** 2) ** (-ParamPoint(self.n, self.gamma).nu)

    def fit(self, X, y):
        r = np.asarray(X, dtype=float).ravel()
        u = np.asarray(y, dtype=float).ravel()
        if r.size != u.size or r.size < 3:
            raise DomainError("need at least three (r, value) samples")
        (amp, eps), _ = curve_fit(self._model, r, u, p0=(float(np.max(u)), 1.0), bounds=([0, 1e-12], [np.inf, np.inf]))
        self.amplitude_, self.eps_ = float(amp), float(eps)
        return self

    def predict(self, X):
        return self._model(np.asarray(X, dtype=float), self.amplitude_, self.eps_)
