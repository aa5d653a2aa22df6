//! Scenario files, seeded generators, output emission and the acceptance suite.

pub mod acceptance;
mod generators;
mod output;
mod scenario;

pub use generators::{ff_set, lattice_set, random_bounded, random_signs, random_subset, rng, SetGenerator, RNG_ALGORITHM};
pub use output::{csv_document, manifest_path, write_atomic, write_manifest, Manifest, CSV_SCHEMA_VERSION};
pub use scenario::{
    execute, run, FamilyKind, FfCountParams, FfDecayParams, FfRegularizeParams, Kind, LatticeCountParams,
    LatticeScanParams, Scenario, SetParams, SimplexSource, Task, FF_COUNT_MAX_Q, LAMBDA2_MAX, REGULARIZE_MAX_Q,
    WINDOW_MAX_VOLUME,
};

/// Sizes the global thread pool from `CONFIG_COUNT_THREADS` when set.
/// Returns the thread count in effect.
pub fn configure_threads() -> usize {
    if let Some(n) = std::env::var("CONFIG_COUNT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    rayon::current_num_threads()
}
