from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeV, PolytopeH, polytope_to_text, polytope_from_text
from LFIC_sim.geometry.lp import lp_optimize, convex_combination, simplex, LPResult, FarkasCertificate
from LFIC_sim.geometry.dd import vertices_to_facets, facets_to_vertices, affine_hull, extreme_rays
