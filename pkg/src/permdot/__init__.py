"""Exact tools for the value set of permutation dot products sum_i a_i b_pi(i)."""
from .algebra import (
    Instance,
    Permutation,
    RealSet,
    apply_disjoint_transpositions,
    dot_product,
    permutohedron_cube_vertex,
    rearrangement_bounds,
    swap_increment,
)
from .oracle import (
    CostMatrix,
    anticoncentration_estimate,
    matrix_spectrum_bruteforce,
    spectrum_bruteforce,
    subset_sum_oracle,
)
from .pools import pool_construct, rect_area, rect_area_set, two_area_set, two_area_warmup
from .sumsets import (
    additive_energy,
    falling_factorial_energy_bound,
    halasz_block_decomposition,
    k_fold_distinct_sums,
    positive_majority_subset,
    subset_sum_count,
    subset_sums,
    supportive_halasz_lower_bound,
)
from .witness import (
    PairedSwitch,
    RunConfig,
    WitnessCertificate,
    build_base_permutation,
    energy_accept,
    run_witness,
    select_increments_cubic,
    select_increments_lossy,
    verify_certificate,
)

__version__ = "0.1.0"
