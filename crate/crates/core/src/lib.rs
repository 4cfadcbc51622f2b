//! Deterministic point-set constructions around the Danzer problem, together
//! with the brute-force engines that check their quantitative behaviour.
//!
//! The crate builds three families of point sets:
//!
//! * [`forest`] — dense forests assembled from countable unions of translated
//!   lattices, with a step visibility function and a finite density bound.
//! * [`optical`] — optical forests with optimal visibility and `T^d log T`
//!   growth, and the finite epsilon-nets obtained by rescaling patches of them.
//! * [`peres`] — planar Peres-type forests driven by a torus sequence, either
//!   the golden-ratio sequence or the exact digital sequence from [`sud`].
//!
//! The [`sud`] module implements the digital super-uniformly dispersed
//! sequence in exact dyadic arithmetic, and [`verify`] holds the probing and
//! exact-search machinery (segment visibility probes, largest empty rectangle,
//! empty-box search, growth-rate fits).
//!
//! Everything is deterministic: the only randomness is a seeded splitmix
//! generator inside [`verify::SegmentSampler`].

pub mod error;
pub mod forest;
pub mod geometry;
pub mod io;
pub mod optical;
pub mod peres;
pub mod sud;
pub mod verify;

pub use error::Error;
pub use geometry::{AxisBox, Point, Segment, TorusPoint};

/// Default cap on the number of points a single enumeration call may emit.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;

/// Tolerance for floating-point geometric predicates. Lattice coordinates are
/// dyadic rationals (exactly representable), so this only absorbs rounding in
/// distance computations.
pub const GEOM_EPS: f64 = 1e-9;
