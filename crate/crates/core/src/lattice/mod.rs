//! Simplices in `Z^n`: Gram constraints, copy enumeration and counts,
//! counting forms on cubes, `U^1_{q,L}` norms, grid decompositions and the
//! density increment.

mod cube;
mod enumerate;
mod forms;
mod increment;
mod kvn;
mod simplex;

pub use cube::{CubeTable, GridCube, LatticeSet};
pub use enumerate::{
    count_asymptotic_scan, count_copies, enumerate_copies, enumerate_copies_naive, minimal_bound, normalize_count,
    scaling_exponent, sigma_normalized, sum_of_squares_counts, summarize_scan, ScanRow, ScanSummary, SigmaTable,
    SimplexCopy,
};
pub use forms::{
    closed_window_radius, eval_m1, eval_n1, eval_n1_with, grid_atoms, grid_average, grid_cond_exp, half_open_offsets,
    u1_norm,
};
pub use increment::{
    density_increment, lcm_range, q_epsilon, restrict_and_rescale, uniformity_test, IncrementResult, IncrementStatus,
    IncrementStep, UniformityReport, SURROGATE_MODULUS,
};
pub use kvn::{
    guaranteed_levels, kvn_grid_decompose, KvnDecomposition, KvnLevel, LengthPolicy, ScaleSequence, ADMISSIBLE_RATIO,
    KVN_LEVEL_CONSTANT,
};
pub use simplex::{isometry_check, SimplexSpec};
