import numpy as np
import pytest

from pcfdyn.errors import PreconditionError, ValidationError
from pcfdyn.rational_dynamics import (
    RationalMap,
    circle,
    curves_csv,
    ellipse,
    lattes_boundaries,
    lattes_core,
    lattes_map,
    lattes_marked,
    render_svg,
    verify_exact_system,
)


@pytest.fixture(scope="module")
def lattes():
    return verify_exact_system(lattes_map(), [lattes_core(1024)], boundaries=lattes_boundaries(257),
                               marked=lattes_marked())


def test_lattes_core_gives_one_exact_component(lattes):
    spec = lattes.spec
    assert spec.n_components == 1
    assert [(s.degree, s.orientation, sorted(s.shares)) for s in spec.subannuli] == [(2, 1, [0]), (2, -1, [1])]
    rep = lattes.report
    assert rep["validation"]["is_exact"] and rep["validation"]["is_annular_system"]
    assert rep["orientation_consistent"] and rep["clearance_ok"]


def test_lattes_curve_graph_doubles(lattes):
    assert lattes.report["matrix"] == [[2]]
    assert lattes.report["extra_preimages"] == [0]
    assert lattes.report["predicates"] == {"pre_stable": True, "stable": True, "irreducible": True}
    assert [k[0] for k in lattes.report["kappa"]] == [2**n for n in range(11)]
    assert lattes.report["cantor"]


def test_sharing_needs_boundary_data():
    vs = verify_exact_system(lattes_map(), [lattes_core(1024)], marked=lattes_marked())
    assert all(not s.shares for s in vs.spec.subannuli)
    assert not vs.report["validation"]["is_exact"]
    assert vs.system is None


def test_peripheral_core_rejected():
    with pytest.raises(ValidationError):
        verify_exact_system(lattes_map(), [circle(0, 0.3, 512)], marked=lattes_marked())


def test_homotopic_cores_rejected():
    with pytest.raises(ValidationError):
        verify_exact_system(lattes_map(), [lattes_core(512), ellipse(-0.5, 0.7, 0.9, 512)], marked=lattes_marked())


def test_core_that_does_not_separate_the_boundaries():
    with pytest.raises(ValidationError):
        verify_exact_system(lattes_map(), [circle(0.5, 0.7, 512)], boundaries=lattes_boundaries(65),
                            marked=lattes_marked())


def test_too_few_marked_points():
    with pytest.raises(PreconditionError):
        verify_exact_system(RationalMap([1, 0, 0], [1]), [circle(0, 2, 256)])


def test_exports(lattes):
    text = curves_csv([lattes_core(16)])
    rows = text.strip().splitlines()
    assert rows[0] == "curve,index,x,y,z,u,v" and len(rows) == 17
    svg = render_svg([lattes_core(256)], lattes_marked(), [b for pair in lattes_boundaries() for b in pair], title="t")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") == 4
    assert np.isfinite(float(rows[1].split(",")[2]))
