import math

import numpy as np
import pytest

from fracyam import appendix_oracle as apx
from fracyam.constants import ParamPoint
from fracyam.errors import DomainError
from fracyam.report import Status


def test_identities_at_one_point():
    res = apx.identity_residuals(ParamPoint(8, 1.2), apx.compute_A_integrals(ParamPoint(8, 1.2)))
    assert max(abs(v) for v in res.values()) < 1e-4


def test_quadrature_positive_and_rational_sign():
    p = ParamPoint(8, 1.2)
    assert apx.C4_quadrature(p) > 0
    i1, i2 = apx.rational_I1_I2(8, 1.2)
    assert i1 + i2 > 0


def test_rational_route_rejects_inadmissible():
    with pytest.raises(DomainError):
        apx.rational_I1_I2(2 * 1.5 + 4, 1.5)
    with pytest.raises(DomainError):
        apx.compute_A_integrals(ParamPoint(3, 0.5))


def test_scan_grid_is_admissible():
    pts = apx.scan_grid(steps=10)
    assert len(pts) == 100
    assert all(apx.admissible(n, g) for n, g in pts)


def test_scan_csv_header():
    _, rows = apx.C4_sign_scan(steps=4, spot_points=((8, 1.2),))
    text = apx.scan_csv(rows)
    assert text.splitlines()[0] == "n,gamma,c4_quad,i1_plus_i2,status"
    assert len(text.splitlines()) == 1 + 16 + 1


def test_log_slopes_within_one_percent():
    reps = apx.log_integrals_72()
    assert len(reps) == 5
    assert all(r.status is Status.PASS for r in reps)


def test_log_slope_fit_recovers_synthetic_coefficients():
    R = np.array([8.0, 16, 32, 64])
    vals = np.array([2.0 * np.log(R) + 1 + 3 / R, -1.5 * np.log(R) + 0.2 / R ** 2]).T
    fitted = apx.fit_log_slopes(R, vals)
    assert np.allclose(fitted, [2.0, -1.5], rtol=1e-8)
