import numpy as np
import pytest

from caplace.errors import ConfigurationError, ValidationError
from caplace.geometry import (
    BoundaryData,
    DirectionField,
    JordanCurve,
    curve_from_samples,
    limacon_curve,
    normal_field,
    stolz_points,
    unit_circle,
)


def test_unit_circle_basic():
    c = unit_circle(16)
    assert c.z[0] == pytest.approx(1.0)
    assert c.n[0] == pytest.approx(-1.0)
    assert np.max(np.abs(c.n - 1j * c.tau)) < 1e-12


def test_unit_circle_rejects_bad_n():
    with pytest.raises(ConfigurationError):
        unit_circle(100)
    with pytest.raises(ConfigurationError):
        unit_circle(8)


def test_perimeter_converges_to_circumference():
    # chord-sum oracle: polygon perimeter of the 64-gon vs 2*pi
    assert unit_circle(64).perimeter() == pytest.approx(2 * np.pi, rel=1e-2)
    # refinement halves the defect by ~4 (second order)
    d1 = 2 * np.pi - unit_circle(64).perimeter()
    d2 = 2 * np.pi - unit_circle(128).perimeter()
    assert d1 / d2 == pytest.approx(4.0, rel=0.05)


def test_normal_field_winding_and_variation():
    nf = normal_field(unit_circle(256))
    assert nf.winding == 1
    # chord-sum total variation of e^{i(t+pi)} converges to 2*pi under doubling
    v1 = nf.variation
    v2 = normal_field(unit_circle(512)).variation
    assert abs(v2 - 2 * np.pi) < abs(v1 - 2 * np.pi)
    assert v2 == pytest.approx(2 * np.pi, rel=0.01)


def test_constant_field_trivial():
    f = DirectionField.constant(1.0, 64)
    assert f.winding == 0
    assert f.variation == 0.0


def test_winding_convex_curves():
    # interior normal of positively oriented convex curves winds once
    t = 2 * np.pi * np.arange(256) / 256
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]:
        z = a * np.cos(t) + 1j * b * np.sin(t)
        curve = curve_from_samples(t, z)
        assert normal_field(curve).winding == 1


def test_direction_field_rejects_non_unimodular():
    with pytest.raises(ValidationError):
        DirectionField(nu=np.full(64, 1.1 + 0j))


def test_stolz_radial_ray():
    pts = stolz_points(1.0, 0.5, 3)
    assert np.allclose(pts, [0.5, 0.75, 0.875])


def test_stolz_cone_inequality_always():
    rng = np.random.default_rng(7)
    for _ in range(25):
        zeta = np.exp(2j * np.pi * rng.random())
        kappa = 0.05 + 0.9 * rng.random()
        pts = stolz_points(zeta, kappa, 8, offsets=(-1.0, -0.3, 0.0, 0.4, 1.0))
        assert len(pts) > 0
        assert np.all(np.abs(pts) < 1.0)
        assert np.all(np.abs(pts - zeta) <= (1 + kappa) * (1 - np.abs(pts)) + 1e-15)


def test_stolz_rotation_clusters_at_zeta():
    pts = stolz_points(1j, 0.5, 6)
    assert np.abs(pts[-1] - 1j) < 0.02


def test_stolz_rejects_tangential_aperture():
    with pytest.raises(ConfigurationError):
        stolz_points(1.0, 1.0, 3)


def test_boundary_data_mask_limits():
    BoundaryData(np.zeros(64), mask=[1, 2])
    with pytest.raises(ValidationError):
        BoundaryData(np.zeros(64), mask=list(range(8)))


def test_boundary_data_effective_samples_ignores_masked():
    phi = np.zeros(64)
    phi[3] = 1e6
    d = BoundaryData(phi, mask=[3])
    assert np.max(np.abs(d.effective_samples())) < 1e-9
    assert d.mean() == 0.0


def test_curve_csv_roundtrip(tmp_path):
    c = limacon_curve(64, 0.3)
    path = tmp_path / "curve.csv"
    c.to_csv(path)
    c2 = JordanCurve.from_csv(path)
    assert np.allclose(c2.z, c.z)
    assert np.allclose(c2.n, c.n)


def test_boundary_csv_roundtrip(tmp_path):
    t = 2 * np.pi * np.arange(32) / 32
    d = BoundaryData(np.cos(t), mask=[5])
    path = tmp_path / "phi.csv"
    d.to_csv(path)
    d2 = BoundaryData.from_csv(path)
    assert np.allclose(d2.phi, d.phi)
    assert d2.mask[5] and d2.mask.sum() == 1


def test_self_intersecting_curve_rejected():
    t = 2 * np.pi * np.arange(64) / 64
    z = np.cos(2 * t) * np.exp(1j * t) + 1.5 * np.exp(2j * t)  # messy loop
    with pytest.raises(ValidationError):
        curve_from_samples(t, z)
