"""Robust Bayesian estimation for controlled branching processes."""

from .branching import (ControlLaw, FamilyTree, Generation, SufficientStats,
                        accumulate_stats, empirical_offspring, simulate_cbp)
from .disparity import (HD, KL, NED, DisparityKind, disparity, disparity_d2theta,
                        disparity_dtheta, get_kind, mde, pearson_residuals)
from .families import (TableFamily, geometric_family, mean_of,
                       offspring_mean_twotype, trinomial_family)

__version__ = "0.1.0"
