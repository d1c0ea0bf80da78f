import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import cloud_total_bessel
from thomsonwp.errors import DomainError
from thomsonwp.extended import (GaussianCloud, cloud_intensity, cloud_total_efficiency,
                                direction_ratio, efficiency_scan)
from thomsonwp.units import FORWARD, PERPENDICULAR_Y, Z_POLE, Direction


def test_examples():
    for r0 in (0.0, 0.3, 1.0, 5.0):
        c = GaussianCloud.from_wavelength(r0)
        assert cloud_intensity(c, Direction(0.0, 1.0)) == 0.0
        assert cloud_intensity(c, FORWARD) == 1.0
    c = GaussianCloud.from_wavelength(0.5)
    assert cloud_intensity(c, PERPENDICULAR_Y) == pytest.approx(math.exp(-math.pi**2), rel=1e-14)
    assert cloud_intensity(c, PERPENDICULAR_Y) == pytest.approx(5.17e-5, rel=1e-3)


def test_validation():
    with pytest.raises(DomainError):
        GaussianCloud(-1.0)
    with pytest.raises(DomainError):
        GaussianCloud(1.0, 0.0)


@given(st.floats(0, 3), st.floats(0, math.pi), st.floats(0, 2 * math.pi, exclude_max=True))
def test_even_and_decreasing_in_r0(r0, th, ph):
    d = Direction(th, ph)
    a = cloud_intensity(GaussianCloud(r0), d)
    assert a == cloud_intensity(GaussianCloud(abs(-r0)), d)
    b = cloud_intensity(GaussianCloud(r0 + 0.1), d)
    assert b <= a


def test_point_limit_is_dipole():
    for th in np.linspace(0, math.pi, 7):
        assert cloud_intensity(GaussianCloud(0.0), Direction(th, 1.0)) == pytest.approx(
            math.sin(th) ** 2, abs=1e-15)


@pytest.mark.parametrize("r0_over_lambda", [0.05, 0.25, 0.5, 1.0, 2.0, 20 / (2 * math.pi)])
def test_total_efficiency_against_bessel_oracle(r0_over_lambda):
    c = GaussianCloud.from_wavelength(r0_over_lambda)
    ref = cloud_total_bessel(2 * math.pi * r0_over_lambda)
    assert cloud_total_efficiency(c) == pytest.approx(ref, rel=1e-9)


def test_total_efficiency_examples():
    assert cloud_total_efficiency(GaussianCloud(0.0)) == 1.0
    assert cloud_total_efficiency(GaussianCloud(20.0, 1.0)) < 1e-2
    assert (cloud_total_efficiency(GaussianCloud.from_wavelength(1.0))
            < cloud_total_efficiency(GaussianCloud.from_wavelength(0.25)))


def test_scan(tmp_path):
    r0 = np.linspace(0, 2, 21)
    extra = Direction(math.pi / 4, 0.0)
    tab = efficiency_scan(r0, [extra])
    assert tab.header()[:5] == ["r0_over_lambda", "ratio_forward", "ratio_perpendicular_y",
                                "ratio_z_pole", "ratio_theta0.785398_phi0"]
    assert tab.header()[-1] == "ratio_total"
    rows = tab.rows()
    np.testing.assert_array_equal(rows[0, 1:], 1.0)
    np.testing.assert_allclose(tab.columns["ratio_perpendicular_y"],
                               np.exp(-(2 * math.pi * r0) ** 2), rtol=1e-12, atol=0)
    np.testing.assert_array_equal(tab.columns["ratio_forward"], 1.0)
    # z pole: the form factor limit, not the vanishing dipole pattern
    np.testing.assert_allclose(tab.columns["ratio_z_pole"], np.exp(-(2 * math.pi * r0) ** 2),
                               rtol=1e-12)
    i1 = int(np.argmin(np.abs(r0 - 1.0)))
    assert tab.columns["ratio_perpendicular_y"][i1] == pytest.approx(math.exp(-4 * math.pi**2),
                                                                     rel=1e-12)
    assert tab.columns["ratio_perpendicular_y"][i1] == pytest.approx(7e-18, rel=0.1)
    p = tmp_path / "s.csv"
    tab.write_csv(p)
    data = np.loadtxt(p, delimiter=",", comments="#", skiprows=2)
    np.testing.assert_array_equal(data, rows)
    with pytest.raises(DomainError):
        efficiency_scan([])


def test_direction_ratio_at_pole():
    assert direction_ratio(GaussianCloud.from_wavelength(0.2), Z_POLE) == pytest.approx(
        math.exp(-(2 * math.pi * 0.2) ** 2))
