"""Pullback combinatorics, annular systems and wandering curves of rational maps."""

from .annulus_engine import AnnularSystemSpec, degree_growth_N, nested_fate, parse_spec, validate
from .codes import Code, classify_code
from .curve_complex import PullbackGraph, build_graph, is_cantor, kappa, lemma_cm_report, predicates
from .errors import PcfDynError, ValidationError
from .interval_model import IntervalSystem, expansion, from_annular_spec, itinerary, preimage_depth
from .renorm_search import complement_pieces, renorm_report, tau_map

__version__ = "0.1.0"
