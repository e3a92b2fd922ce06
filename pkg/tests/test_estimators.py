import numpy as np
import pytest

from fracyam.bubble import W_closed_form
from fracyam.errors import DomainError
from fracyam.estimators import BubbleFit, ExtensionTransformer


def test_transformer_matches_closed_form():
    X = np.array([[0.5, 0.2], [1.0, 1.0]])
    est = ExtensionTransformer(n=7, gamma=1.5)
    np.testing.assert_allclose(est.fit_transform(X), W_closed_form(1.0, X[:, 0], X[:, 1]), rtol=1e-10)


def test_params_round_trip():
    est = ExtensionTransformer().set_params(eps=2.0)
    assert est.get_params() == {"n": 3, "gamma": 0.5, "eps": 2.0}
    with pytest.raises(ValueError):
        est.set_params(bogus=1)


def test_transform_before_fit():
    with pytest.raises(DomainError):
        ExtensionTransformer().transform([[1.0, 1.0]])


def test_bubble_fit_recovers_scale():
    r = np.linspace(0, 5, 40)
    u = 2.5 * (1 + (r / 0.7) ** 2) ** -1.0
    fit = BubbleFit(3, 0.5).fit(r, u)
    assert fit.eps_ == pytest.approx(0.7, rel=1e-6)
    assert fit.amplitude_ == pytest.approx(2.5, rel=1e-6)
    np.testing.assert_allclose(fit.predict(r), u, rtol=1e-6)
