"""Exact total correlation, dual total correlation and transport on finite product spaces."""

from .errors import *  # noqa: F401,F403
from .space import (
    Alphabet,
    JointDist,
    Kernel,
    Mixture,
    ProductSpace,
    clump,
    coordinate_marginals,
    disintegrate,
    extend_with_channel,
    is_product,
    make_joint,
    marginal,
    mix,
    point_mass,
    product,
    product_of_marginals,
    quantize,
    uniform,
)
from .info import (
    InfoReport,
    LogBase,
    cond_dtc,
    cond_entropy,
    cond_mutual_info,
    cond_tc,
    dtc,
    dtc_chain,
    dtc_permutation_average,
    dtc_ref,
    entropy,
    info_report,
    kl_divergence,
    mixture_mutual_info,
    mutual_info,
    shearer_gap,
    tc,
    tc_chain,
    tc_ref,
)
from .transport import (
    CouplingPlan,
    fano_tc_bound,
    hamming_avg,
    marton_check,
    total_variation,
    transport_distance,
)
from .decompose import (
    DecompositionReport,
    SubsetCertificate,
    find_low_info_subset,
    sample_mixture,
    theorem_a,
    theorem_a2,
    theorem_a_prime,
)

__version__ = "0.1.0"
