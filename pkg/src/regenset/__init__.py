"""Simulation and exact computation for stable regenerative sets, the random
sup-measure built from them, and the null-recurrent-chain process whose
partial maxima converge to it."""

from .errors import NonIntersectingRegimeError, QuadratureError, ValidationError
from .idprocess import LawSpec, simulate_process, sup_measure_Mn, wandering_weight
from .intersectlaw import (
    QuadratureConfig,
    beta_star,
    ell_beta,
    intersection_cdf,
    recursion_residual,
    shift_cdf_V,
    shift_cdf_V_normalized,
)
from .randkit import RngStream, make_stream
from .renewalkit import RenewalLaw, first_simultaneous_renewal_cdf, intersection_renewal, renewal_mass_function
from .stablesets import (
    GridSet,
    IntersectionSpec,
    intersect_sets,
    overshoot_cdf,
    overshoot_density,
    phi,
    sample_first_intersection,
    sample_overshoot,
    sample_regenerative_set,
)
from .supmeasure import EtaRealization, eta_sup, eta_value, simulate_eta

__version__ = "0.1.0"
