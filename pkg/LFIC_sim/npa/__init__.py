from LFIC_sim.npa.moments import MonomialBasis, MomentProgram, build_moment_program, moment_matrix_from_realization
from LFIC_sim.npa.sdp import sdp_solve, solve_standard_sdp, MomentSolution
from LFIC_sim.npa.boundary import quantum_boundary_along_ray, relaxation_contains, feasibility_margin, boundary_fan
from LFIC_sim.npa.seesaw import seesaw_lower_bound, SeesawResult
