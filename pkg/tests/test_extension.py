import numpy as np
import pytest

from fracyam import extension_verify as ev
from fracyam.bubble import RadialProfile, W_closed_form, build_profile
from fracyam.constants import ParamPoint
from fracyam.errors import DomainError
from fracyam.report import Status

P72 = ParamPoint(7, 1.5)


def test_fd_weights_exact_on_polynomials():
    z = 0.3
    x = np.array([0.0, 0.2, 0.5, 0.7, 1.1])
    w = ev.fd_weights(z, x, 2)
    for k in range(5):
        assert w[1] @ x ** k == pytest.approx(k * z ** (k - 1) if k else 0.0, abs=1e-10)
        assert w[2] @ x ** k == pytest.approx(k * (k - 1) * z ** (k - 2) if k > 1 else 0.0, abs=1e-9)


def test_constant_profile_has_zero_residual():
    r = np.concatenate([[0.0], ev.log_grid(0.1, 10, 12)])
    x = np.concatenate([[0.0], ev.log_grid(0.1, 10, 12)])
    prof = RadialProfile(P72, r, x, np.ones((x.size, r.size)))
    rep = ev.residual_second_order(P72, prof)
    assert rep.computed == 0.0
    assert rep.status is Status.PASS


def test_residual_decreases_under_refinement():
    profs = ev.refinement_profiles(P72, levels=2, base=12, closed_form=lambda r, x: W_closed_form(1.0, r, x))
    rep = ev.residual_second_order(P72, profs)
    a, b = rep.details["residual_per_level"]
    assert b < a / 8


def test_identity_negative_control_fails():
    r = np.concatenate([[0.0], ev.log_grid(0.1, 10, 12)])
    x = np.concatenate([[0.0], ev.log_grid(0.1, 10, 12)])
    X = np.broadcast_to(x[:, None], (x.size, r.size))
    rep = ev.identity_DW(P72, RadialProfile(P72, r, x, X.copy()))
    assert rep.status is Status.FAIL


def test_identity_needs_fourth_order_regime():
    with pytest.raises(DomainError):
        ev.identity_DW(ParamPoint(3, 0.5), build_profile(ParamPoint(3, 0.5), None, closed_form=lambda r, x: r * 0 + 1))


def test_coarse_profile_is_inconclusive():
    r = np.array([0.0, 1.0, 2.0])
    x = np.array([0.0, 1.0, 2.0])
    rep = ev.residual_second_order(P72, RadialProfile(P72, r, x, np.ones((3, 3))))
    assert rep.status is Status.INCONCLUSIVE


def test_jet_trace_at_half_order():
    reps, res = ev.neumann_trace_check(ParamPoint(3, 0.5), r_grid=np.linspace(0, 10, 11))
    assert reps[0].status is Status.PASS
    assert reps[0].computed < 1e-6


def test_fit_trace_route_agrees():
    reps, _ = ev.neumann_trace_check(ParamPoint(3, 0.5), r_grid=np.linspace(0, 4, 9), method="fit")
    assert reps[0].check_id == "extension.neumann_trace.fit"
    assert reps[0].computed < 1e-3


def test_growth_classifier_on_synthetic_sequences():
    R = np.array([2.0, 4, 8, 16, 32, 64])
    assert ev.classify_growth(np.log(R), R)[0] == "log"
    assert ev.classify_growth(R ** 1.5, R)[0] == "power"
    assert ev.classify_growth(1 - R ** -2.0, R)[0] == "bounded"


@pytest.mark.parametrize("n,g,k,label", [(3, 0.5, 0, "log"), (10, 0.5, 0, "bounded"), (3, 0.5, 1, "power")])
def test_predicted_growth_labels(n, g, k, label):
    e = ev.predicted_growth(ParamPoint(n, g), k)
    assert ("log" if e == 0 else "bounded" if e < 0 else "power") == label


def test_norm_growth_rejects_bad_ratios():
    with pytest.raises(DomainError):
        ev.norm_growth(ParamPoint(3, 0.5), 0, (2, 4, 8))
    with pytest.raises(DomainError):
        ev.norm_growth(ParamPoint(3, 0.5), -1)
