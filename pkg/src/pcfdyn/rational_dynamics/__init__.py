"""Numerics for post-critically finite rational maps on the Riemann sphere."""

from .curves import CurvePolyline, circle, ellipse, hausdorff, is_simple, self_intersections
from .exact import VerifiedSystem, verify_exact_system
from .export import curves_csv, render_svg
from .homotopy import HomotopyTag, classify_curve
from .lifting import LiftComponent, Lifter, lift_curve_components, lift_path, lift_path_all
from .maps import (
    CriticalPoint,
    MarkedSphere,
    NotPCF,
    PostCritical,
    RationalMap,
    ReferenceArc,
    critical_points,
    critical_values,
    post_critical,
    real_arc,
)
from .sphere import INF, chordal, from_sphere, to_sphere
from .systems import (
    BUILTIN_SYSTEMS,
    BranchSystem,
    builtin_system,
    cubic_model_system,
    lattes_boundaries,
    lattes_slit_distance,
    lattes_core,
    lattes_map,
    lattes_marked,
    lattes_system,
    real_segment_distance,
)
from .wandering import CurveCache, WanderingResult, boundary_diagnostic, fate_check, wandering_curve

__all__ = [name for name in dir() if not name.startswith("_")]
