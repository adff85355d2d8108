//! In-memory distance-similarity self-join engine for low-dimensional point data.
//!
//! Given a dataset of n-dimensional points (2 ≤ n ≤ 6) and a radius `eps`,
//! the engine reports every ordered pair of points within Euclidean distance
//! `eps` of each other. The search is backed by a sparse grid of `eps`-length
//! cells: only non-empty cells are stored, candidate lookups are bounded to
//! the 3^n adjacent cells of a query point's cell, and per-dimension masks of
//! occupied cell coordinates shrink that neighborhood further before any
//! distance is computed.
//!
//! The main pieces:
//!
//! - [`dataset`]: point storage, CSV ingestion, seeded uniform generation,
//!   unit-range normalization.
//! - [`grid`]: the sparse grid index (cell array `G`, sorted linear-id array
//!   `B`, point-lookup array `A`, per-dimension masks `M`).
//! - [`join`]: the self-join kernel with two modes (`Baseline` scans all
//!   adjacent cells; `Unicomp` scans roughly half of them using an
//!   odd-coordinate rule and emits mirrored pairs), streamed to a sink as
//!   sorted, bounded batches.
//! - [`oracle`]: the exact O(|D|²) nested-loop reference used for validation.
//! - [`sink`]: result consumers (CSV pair writer, counter, in-memory buffer).
//!
//! ```
//! use selfjoin::{generate_uniform, GridIndex, JoinConfig, MemorySink, self_join};
//!
//! let data = generate_uniform::<f64>(500, 2, 0.0, 100.0, 7).unwrap();
//! let index = GridIndex::build(&data, 5.0).unwrap();
//! let mut sink = MemorySink::default();
//! let stats = self_join(&data, &index, &JoinConfig::new(5.0), &mut sink).unwrap();
//! assert_eq!(stats.pairs_emitted as usize, sink.pairs.len());
//! ```
//!
//! Coordinates, cell geometry and distances are generic over the scalar type
//! through the [`Real`] trait; `f64` is the default and what the CLI uses.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub mod dataset;
pub mod error;
pub mod grid;
pub mod join;
pub mod oracle;
pub mod sink;

pub use dataset::{distance_sq, generate_uniform, load_csv, read_csv, Dataset};
pub use error::{Error, Result};
pub use grid::{CellCoord, CoordRange, GridCell, GridGeometry, GridIndex, LinearId};
pub use join::{
    count_only_join, plan_batches, self_join, unicomp_cells, BatchPlan, JoinConfig, JoinMode,
    JoinStats, ResultBatch, ResultPair,
};
pub use oracle::{brute_force, brute_force_count};
pub use sink::{BatchSink, CountingSink, MemorySink, PairWriter};

/// Scalar type for coordinates and distances: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + FromStr + Display + Debug + Send + Sync + 'static
{
}

/// `f64` instantiations, the representation the engine is validated with.
pub type Dataset64 = Dataset<f64>;
pub type GridIndex64 = GridIndex<f64>;

/// Single-precision instantiations.
pub type Dataset32 = Dataset<f32>;
pub type GridIndex32 = GridIndex<f32>;
