import numpy as np
import pytest

from slef_lab.geometry import (
    BumpCurve,
    CylinderSpec,
    DiskDomain,
    GraphDomain,
    SectorDomain,
    bump_height,
    bump_overlap_free,
    circle_signed_distance,
    cylinder_contains,
)

SQRT3 = np.sqrt(3.0)


def test_bump_height_outside_all_bumps():
    curve = BumpCurve(R=2.0, i_max=1)
    assert bump_height(curve, 0.5) == 0.0


def test_bump_height_at_apex():
    curve = BumpCurve(R=2.0, i_max=1)
    assert bump_height(curve, 1.0) == pytest.approx(-(2.0 - SQRT3), abs=1e-15)


def test_bump_height_interval_endpoint():
    curve = BumpCurve(R=2.0, i_max=1)
    assert bump_height(curve, 1.0 + (2.0 - SQRT3)) == pytest.approx(0.0, abs=1e-14)


def test_bump_overlap_free_r2():
    assert bump_overlap_free(2.0, 1)
    assert bump_overlap_free(2.0, 8)


def test_bump_overlap_r_too_small():
    # brute-force oracle: at R=1.001 the i=1 interval swallows the i=2 one
    w1 = 1.001 - np.sqrt(1.001**2 - 1.0)
    w2 = 1.001 - np.sqrt(1.001**2 - 0.25)
    assert 1.0 - w1 < 0.5 + w2  # intervals intersect
    assert not bump_overlap_free(1.001, 8)


def test_circle_signed_distance_origin_and_ray():
    assert circle_signed_distance((0.0, 0.0), 2.0) == pytest.approx(0.0, abs=1e-15)
    for t in (0.1, 0.5, 2.0):
        assert circle_signed_distance((0.0, t), 2.0) == pytest.approx(t, abs=1e-14)


def test_circle_signed_distance_apex():
    # apex (1, -(2-sqrt(3))) lies on the circle: 1 + (sqrt(3))^2 = 4 = R^2
    assert circle_signed_distance((1.0, -(2.0 - SQRT3)), 2.0) == pytest.approx(
        0.0, abs=1e-14
    )


def test_all_apexes_on_circle():
    curve = BumpCurve(R=2.0, i_max=8)
    for x, y in curve.apexes():
        assert abs(circle_signed_distance((x, y), curve.R)) <= 1e-12


def test_bump_height_continuity_and_lipschitz():
    curve = BumpCurve(R=2.0, i_max=8)
    h = 1e-4
    xs = np.arange(-1.3, 1.3, h)
    g = bump_height(curve, xs)
    jumps = np.abs(np.diff(g))
    assert np.max(jumps) <= (1.0 + 1e-9) * h  # Lipschitz constant 1


def test_cylinder_contains_examples():
    dom = GraphDomain.flat(x_range=(-2.0, 2.0), top=2.0)
    grounded = CylinderSpec(0.0, 1.0, "grounded")
    suspended = CylinderSpec(0.0, 1.0, "suspended", delta=0.1)
    doubled = CylinderSpec(0.0, 1.0, "doubled")
    assert cylinder_contains(grounded, dom, (0.0, 0.5))
    assert not cylinder_contains(suspended, dom, (0.0, 0.05))
    assert cylinder_contains(doubled, dom, (0.0, -0.5))


def test_cylinder_inclusions_random():
    dom = GraphDomain.tilted(0.5, x_range=(-2.0, 2.0), top=3.0)
    grounded = CylinderSpec(0.3, 0.8, "grounded")
    doubled = CylinderSpec(0.3, 0.8, "doubled")
    suspended = CylinderSpec(0.3, 0.8, "suspended", delta=0.07)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-2.0, 2.0, size=(4000, 2))
    for p in pts:
        if cylinder_contains(suspended, dom, p):
            assert cylinder_contains(grounded, dom, p)
        if cylinder_contains(grounded, dom, p):
            assert cylinder_contains(doubled, dom, p)


def test_cylinder_validation():
    with pytest.raises(ValueError):
        CylinderSpec(0.0, -1.0, "grounded")
    with pytest.raises(ValueError):
        CylinderSpec(0.0, 1.0, "suspended", delta=0.2)
    with pytest.raises(ValueError):
        CylinderSpec(0.0, 1.0, "hovering")


def test_graph_domain_lipschitz_verified():
    with pytest.raises(ValueError):
        GraphDomain(g=lambda x: 2.0 * np.asarray(x), L=1.0,
                    x_range=(-1.0, 1.0), top=3.0)


def test_graph_domain_inside_and_distance():
    dom = GraphDomain.flat()
    assert dom.inside(0.0, 0.5)
    assert not dom.inside(0.0, -0.1)
    assert dom.boundary_distance((0.0, 0.25)) == pytest.approx(0.25, rel=1e-6)
    assert dom.boundary_distance((0.9, 0.5)) == pytest.approx(0.1, rel=1e-6)


def test_sector_and_disk_validation():
    with pytest.raises(ValueError):
        SectorDomain(theta=7.0, radius=1.0)
    with pytest.raises(ValueError):
        SectorDomain(theta=1.0, radius=-1.0)
    with pytest.raises(ValueError):
        DiskDomain(radius=0.0)
    d = DiskDomain(1.0)
    assert d.inside(0.3, 0.3) and not d.inside(0.9, 0.9)
    assert d.boundary_distance((0.6, 0.0)) == pytest.approx(0.4)


def test_bump_curve_rejects_overlap():
    with pytest.raises(ValueError):
        BumpCurve(R=1.001, i_max=8)
