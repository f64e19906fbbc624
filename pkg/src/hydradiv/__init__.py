"""Exact algebra, Cayley-graph geometry and detour experiments for the groups

    G_d = < a_0, ..., a_d | [a_0, a_1], a_i^-1 a_0 a_i = a_{i-1} (2 <= i <= d) >.
"""

from .group import (
    Element,
    GroupPresentation,
    britton_identity_test,
    canonicalize,
    identity_element,
    in_cyclic,
    invert,
    multiply,
    parse_word,
    format_word,
    subgroup_level,
)
from .cayley import BallIndex, BudgetExceeded, EdgeRecord, PathRec, ball, neighbors, squares_at
from .divergence import (
    DetourResult,
    GrowthTable,
    corner_divergence,
    detour_distance,
    estimate_degree,
    eval_p,
    eval_q,
    eval_q_comb,
    mu_sample,
)
from .builder import CornerSpec, build_detour, plane_detour, strip_detour

__version__ = "0.1.0"
