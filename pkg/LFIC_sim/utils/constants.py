#  Copyright (c) 2024. LFIC_sim developers. All Rights Reserved.
class NumericalTolerances:
    """
    Class for the numerical tolerances and caps that are used in the computations. These constants are stored as the
    class variables.
    """
    EPS_PSD = 1e-12  # positivity and completeness of states and effects
    EPS_NS = 1e-12  # no-signaling and normalization residuals of float behaviors
    RATIONAL_DENOMINATOR_CAP = 10 ** 12  # continued-fraction rounding of float behaviors
    DIRECTION_DENOMINATOR_CAP = 10 ** 6  # rounding of ray directions in exact section LPs
    SDP_GAP_TOL = 1e-8  # relative duality gap and residuals at which the SDP solver stops
    SDP_MAX_ITER = 100
    SDP_FEASIBILITY_TOL = 1e-7  # min. eigenvalue margin declaring a moment relaxation feasible
    BISECTION_WIDTH = 1e-5
    SEESAW_TOL = 1e-10
    SEESAW_MAX_ITER = 200

    def __repr__(self):
        return "NumericalTolerances()"

    def __str__(self):
        return (f"EPS_PSD = {self.EPS_PSD}, EPS_NS = {self.EPS_NS}, "
                f"RATIONAL_DENOMINATOR_CAP = {self.RATIONAL_DENOMINATOR_CAP}, SDP_GAP_TOL = {self.SDP_GAP_TOL}")
