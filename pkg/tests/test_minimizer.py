import numpy as np
import pytest

from fracyam.constants import ParamPoint, constants
from fracyam.errors import DomainError
from fracyam.minimizer import (TraceEnergy, bubble_match, energy_and_gradient, gradient_fd_check, initial_coeffs,
                               minimize)

P3 = ParamPoint(3, 0.5)


@pytest.fixture(scope="module")
def model():
    return TraceEnergy(P3)


def test_bubble_start_is_stationary(model):
    c = model.normalize(initial_coeffs(model, "bubble"))
    assert model.energy(c) == pytest.approx(constants(P3).Y_sphere, rel=1e-8)
    assert model.natural_norm(c, model.gradient(c)) < 1e-3


def test_gradient_against_differences():
    assert max(gradient_fd_check(P3, seed=3)) < 1e-4


def test_gradient_orthogonal_to_scaling(model):
    c = model.normalize(model.project(lambda r: np.exp(-r * r)))
    g = model.gradient(c)
    assert abs(g @ c) < 1e-10 * np.linalg.norm(g) * np.linalg.norm(c)


def test_normalization(model):
    c = model.normalize(model.project(lambda r: np.exp(-r * r)))
    target = constants(P3).Y_sphere ** (P3.n / (2 * P3.gamma))
    assert model.mass(c) == pytest.approx(target, rel=1e-10)


def test_gaussian_start_descends_to_sphere_constant():
    st = minimize(P3, "gaussian")
    assert st.energy / constants(P3).Y_sphere - 1 < 5e-3
    assert all(b <= a * (1 + 1e-12) for a, b in zip(st.history, st.history[1:]))
    assert np.all(st.trace >= 0)
    dev, _ = bubble_match(st)
    assert dev < 0.01


def test_plateau_start_also_converges():
    st = minimize(P3, "plateau")
    assert st.energy / constants(P3).Y_sphere - 1 < 5e-3


def test_energy_and_gradient_on_state():
    st = minimize(P3, "bubble", max_iter=1)
    E, g = energy_and_gradient(st)
    assert E == pytest.approx(st.energy)
    assert g.shape == st.coeffs.shape


@pytest.mark.parametrize("init", [lambda r: 0 * r, lambda r: -np.exp(-r)])
def test_bad_initial_data(init):
    with pytest.raises(DomainError):
        minimize(P3, init)


def test_unknown_init_name():
    with pytest.raises(DomainError):
        minimize(P3, "nonsense")
