import math

import numpy as np
import pytest

from pcfdyn.errors import CriticalValueCollision, PcfDynError, PreconditionError
from pcfdyn.rational_dynamics import (
    CurvePolyline,
    Lifter,
    RationalMap,
    circle,
    from_sphere,
    lattes_map,
    lattes_slit_distance,
    lift_curve_components,
    lift_path,
    lift_path_all,
    real_arc,
    to_sphere,
)

E3 = math.exp(3)
MAPS = {
    "lattes": lattes_map,
    "z3": lambda: RationalMap([1, 0, 0, 0], [1]),
    "e3/z3": lambda: RationalMap([E3], [1, 0, 0, 0]),
}


def root_oracle(f, w):
    """All solutions of P(z) = w Q(z) by numpy.roots, as sphere points."""
    p = np.array(f.pz)
    q = np.array(f.qz)
    return to_sphere(np.roots(p - w * q))


def image_residual(f, curve, target):
    return float(target.nearest_distance(f.sphere(curve.points), factor=16).max())


# -- degree conservation -----------------------------------------------------


@pytest.mark.parametrize("name", sorted(MAPS))
def test_degrees_add_up_on_random_circles(name):
    f = MAPS[name]()
    lf = Lifter(f)
    rng = np.random.default_rng(7)
    done = 0
    for _ in range(80):
        c = complex(*rng.uniform(-3, 3, 2))
        r = float(rng.uniform(0.05, 3))
        curve = circle(c, r, 256)
        try:
            comps = lift_curve_components(f, curve, lifter=lf)
        except CriticalValueCollision:
            continue
        assert sum(x.degree for x in comps) == f.degree
        for x in comps:
            assert image_residual(f, x.curve, curve) < 1e-6
        done += 1
    assert done >= 50


@pytest.mark.parametrize("c, r, degrees", [(0, 2.0, [3]), (3, 1.0, [1, 1, 1]), (0.5j, 1.0, [3])])
def test_power_map_degrees_follow_winding_around_zero(c, r, degrees):
    f = MAPS["z3"]()
    comps = lift_curve_components(f, circle(c, r, 256))
    assert sorted(x.degree for x in comps) == degrees


def test_power_map_lift_of_round_circle_is_round():
    f = MAPS["z3"]()
    (comp,) = lift_curve_components(f, circle(0, 8.0, 256))
    assert np.allclose(np.abs(comp.curve.complex()), 2.0, atol=1e-9)


def test_closed_curve_required():
    with pytest.raises(PreconditionError):
        lift_curve_components(lattes_map(), CurvePolyline(real_arc(2, 3, 17), closed=False))


def test_collision_with_a_critical_value_is_reported():
    # the unit circle under z^3 is fine; one through the critical value 0 is not
    with pytest.raises(CriticalValueCollision):
        lift_curve_components(MAPS["z3"](), circle(1, 1.0, 256))


def test_non_positive_clearance_rejected():
    with pytest.raises(PcfDynError):
        Lifter(lattes_map(), delta=0)


# -- paths -------------------------------------------------------------------


def test_slit_lifts_land_on_the_slits():
    f = lattes_map()
    path = CurvePolyline(real_arc(1.5, 10, 257), closed=False)
    lifts = lift_path_all(f, path)
    assert len(lifts) == 4
    for c in lifts:
        assert float(lattes_slit_distance(c.points).max()) < 1e-6


def test_lift_nodes_are_roots_of_the_fibre_equation():
    f = lattes_map()
    path = CurvePolyline(real_arc(1.5, 10, 65), closed=False)
    lifts = lift_path_all(f, path)
    ws = from_sphere(path.points)
    for k in range(0, 65, 8):
        roots = root_oracle(f, complex(ws[k]))
        got = np.array([c.points[k] for c in lifts])
        # every root is hit by exactly one lift
        d = np.linalg.norm(got[:, None, :] - roots[None, :, :], axis=2)
        assert np.all(d.min(axis=0) < 1e-8)
        assert sorted(d.argmin(axis=1)) == [0, 1, 2, 3]


def test_lift_path_through_infinity():
    f = lattes_map()
    path = CurvePolyline(real_arc(2, -3, 129), closed=False)  # passes inf
    seed = complex(from_sphere(lift_path_all(f, path)[0].points[0]))
    c = lift_path(f, path, seed)
    assert float(path.nearest_distance(f.sphere(c.points)).max()) < 1e-8


def test_lifting_is_functorial():
    # lifting twice through z^3 equals lifting once through z^9
    g = MAPS["z3"]()
    g9 = RationalMap([1] + [0] * 9, [1])
    path = CurvePolyline.from_complex(8 * np.exp(1j * np.linspace(0.1, 1.2, 200)), closed=False)
    once = lift_path(g, path, 2 * np.exp(0.1j / 3))
    twice = lift_path(g, once, 2 ** (1 / 3) * np.exp(0.1j / 9))
    direct = lift_path(g9, path, 2 ** (1 / 3) * np.exp(0.1j / 9))
    assert float(np.linalg.norm(twice.points - direct.points, axis=1).max()) < 1e-8
    z = direct.complex()
    assert np.allclose(z, 2 ** (1 / 3) * np.exp(1j * np.linspace(0.1, 1.2, 200) / 9), atol=1e-9)
