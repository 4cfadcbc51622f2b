//! The exact digital sequence with super-uniform dispersion, its block
//! machinery, and dispersion measurement.
//!
//! Terms are dyadic rationals computed in exact integer arithmetic; the
//! dispersion bounds certified in [`certify`] are exact powers of two, so no
//! floating point is allowed anywhere near the pass/fail line.

mod blocks;
mod certify;
mod dispersion;
mod dyadic;

pub use blocks::{
    block_exponent, block_length, block_term, block_values, term, term_via_blocks,
    BlockDecomposition, IndexDecomposition, SudBlock, MAX_MATERIALIZED_BLOCK,
};
pub use certify::{
    certify_block, certify_block_values, window_constants, window_template, BlockCertificate,
    WindowConstants, WindowTemplate,
};
pub use dispersion::{
    delta_lower_bound, dispersion, dispersion_dyadic, perturbed_dispersion,
    perturbed_dispersion_dyadic, DeltaLowerBound, DispersionQuery,
};
pub use dyadic::DyadicRational;
