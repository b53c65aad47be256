"""Numerics for modular Banach sequence spaces.

Norms of finite-dimensional factors, Luxemburg norms of convex modulars,
Nakano spaces with variable exponents, Jordan-von Neumann constants,
Clarkson-type inequality verifiers, and an iteration lab for isometric
embeddings into hilbertian extensions.
"""

__version__ = "0.1.0"

from .spaces import (
    INF,
    Lp,
    Euclid,
    Schatten,
    CustomSpace,
    TwoSum,
    norm,
    norm_batch,
    singular_values,
    dual_exponent,
    banach_mazur_lp_vs_hilbert,
)
from .modular import (
    PowerModular,
    square,
    DirectSumModular,
    LuxemburgSpace,
    modular_eval,
    delta2_constant,
    luxemburg_norm,
    modular_sum_norm_with_scalar,
    scalar_sum_expansion_ratio,
)
from .nakano import (
    ConstantExponents,
    ExplicitExponents,
    FormulaExponents,
    NakanoSpec,
    BlockVector,
    NakanoModular,
    nakano_modular,
    nakano_norm,
    disjoint_additivity_check,
    weakly_null_surrogate,
    homogeneity_defect,
    nakano_condition_terms,
    nakano_condition_verdict,
)
from .geomconst import (
    jvn_ratio,
    jvn_lower_bound,
    jvn_upper_bound_clarkson,
    duality_gap,
    alpha_beta,
    tail_parallelogram_defect,
)
from .verify import (
    ViolationReport,
    verify_clarkson_lower,
    verify_clarkson_upper,
    verify_lp_pair,
    verify_beckner,
    verify_2smooth,
    verify_schatten_inf,
    verify_parallelogram,
    verify_endpoint_2,
    far_block_limit_gaps,
)
from .isolab import (
    LinearMap,
    SplitSpace,
    is_isometric_embedding,
    two_projection_violation,
    find_one_dim_two_summand,
    build_counterexample_embedding,
    build_inclusion_embedding,
    pt_iterate,
    limit_isometry_check,
    range_intersection_dim,
    block_sum_complement_check,
)
