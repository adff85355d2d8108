//! Sparse grid index over `eps`-length cells.
//!
//! The grid covers the dataset's bounding box padded by `eps` on every side,
//! with cells of side length `eps`. A point's cell coordinate in dimension
//! `j` is `floor((x_j - grid_min_j) / eps)`, so any two points within `eps`
//! of each other sit at most one cell apart in every dimension and a range
//! query never has to look beyond the 3^n adjacent cells.
//!
//! Only non-empty cells are materialized. The index is four parallel
//! structures, giving O(|D|) space regardless of how much of the padded
//! volume is empty:
//!
//! - `B`: strictly ascending linearized ids of the non-empty cells; existence
//!   checks are binary searches.
//! - `G`: one [`GridCell`] per non-empty cell, holding the inclusive range of
//!   its points in `A`.
//! - `A`: the point ids, permuted so that each cell's points are contiguous.
//! - `M[j]`: the sorted set of cell coordinates occupied in dimension `j`,
//!   used to shrink adjacency ranges before any cell is probed. Stored as a
//!   set rather than an interval so interior empty rows/columns prune too.
//!
//! Cell ids are linearized with dimension 0 varying fastest: in 2-D the cell
//! `(c0, c1)` gets id `c1 * cells_per_dim[0] + c0`, i.e. ids count along rows
//! of the first dimension.

use std::io::{self, Write};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::Real;

/// Row-major linearized cell id.
pub type LinearId = u64;

/// n-dimensional integer cell coordinate.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CellCoord(pub Vec<u64>);

impl CellCoord {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Index<usize> for CellCoord {
    type Output = u64;

    fn index(&self, j: usize) -> &u64 {
        &self.0[j]
    }
}

impl From<Vec<u64>> for CellCoord {
    fn from(c: Vec<u64>) -> Self {
        CellCoord(c)
    }
}

/// Inclusive range of cell coordinates in one dimension.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CoordRange {
    pub lo: u64,
    pub hi: u64,
}

/// Cell extents and the coordinate/id mappings. Independent of which cells
/// are occupied.
#[derive(Clone, PartialEq, Debug)]
pub struct GridGeometry<F = f64> {
    dims: usize,
    eps: F,
    grid_min: Vec<F>,
    grid_max: Vec<F>,
    cells_per_dim: Vec<u64>,
    // strides[0] = 1; strides[j] = strides[j-1] * cells_per_dim[j-1]
    strides: Vec<u64>,
}

impl<F: Real> GridGeometry<F> {
    fn from_dataset(dataset: &Dataset<F>, eps: F) -> Result<Self> {
        if eps <= F::zero() || !eps.is_finite() {
            return Err(Error::InvalidEpsilon {
                eps: eps.to_string(),
            });
        }
        let dims = dataset.dims();
        let (data_min, data_max) = dataset.bounds();
        let grid_min: Vec<F> = data_min.iter().map(|&x| x - eps).collect();
        let grid_max: Vec<F> = data_max.iter().map(|&x| x + eps).collect();

        let mut cells_per_dim = Vec::with_capacity(dims);
        for (j, (&lo, &hi)) in grid_min.iter().zip(&grid_max).enumerate() {
            let count = ((hi - lo) / eps).ceil();
            let count = count.to_u64().ok_or_else(|| Error::GridCapacity {
                dim: j,
                cells: count.to_string(),
            })?;
            // The padded span is at least 2*eps; force >= 3 so a degenerate
            // dimension still has a pad cell on both sides.
            cells_per_dim.push(count.max(3));
        }

        let mut strides = Vec::with_capacity(dims);
        let mut stride = 1u64;
        for (j, &cells) in cells_per_dim.iter().enumerate() {
            strides.push(stride);
            // The running product is the total id capacity; it must fit u64.
            stride = stride.checked_mul(cells).ok_or(Error::GridCapacity {
                dim: j,
                cells: cells.to_string(),
            })?;
        }

        Ok(Self {
            dims,
            eps,
            grid_min,
            grid_max,
            cells_per_dim,
            strides,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn eps(&self) -> F {
        self.eps
    }

    /// Padded lower bound per dimension (`data min - eps`).
    pub fn grid_min(&self) -> &[F] {
        &self.grid_min
    }

    /// Padded upper bound per dimension (`data max + eps`).
    pub fn grid_max(&self) -> &[F] {
        &self.grid_max
    }

    pub fn cells_per_dim(&self) -> &[u64] {
        &self.cells_per_dim
    }

    /// Total id capacity, `prod(cells_per_dim)`.
    pub fn total_cells(&self) -> u64 {
        let last = self.dims - 1;
        self.strides[last] * self.cells_per_dim[last]
    }

    /// Cell coordinate of a point: `floor((x_j - grid_min_j) / eps)` per
    /// dimension, clamped into range. Points of the indexed dataset always
    /// land strictly inside the padded extent.
    pub fn cell_coord(&self, point: &[F]) -> CellCoord {
        debug_assert_eq!(point.len(), self.dims);
        CellCoord(
            (0..self.dims)
                .map(|j| self.coord_axis(j, point[j]))
                .collect(),
        )
    }

    #[inline]
    pub(crate) fn coord_axis(&self, j: usize, x: F) -> u64 {
        let t = ((x - self.grid_min[j]) / self.eps).floor();
        let max = self.cells_per_dim[j] - 1;
        if t <= F::zero() {
            0
        } else {
            t.to_u64().unwrap_or(u64::MAX).min(max)
        }
    }

    /// Linearizes an in-range coordinate; bijective with [`Self::delinearize`].
    pub fn linearize(&self, coord: &CellCoord) -> Result<LinearId> {
        debug_assert_eq!(coord.dims(), self.dims);
        for (j, &c) in coord.as_slice().iter().enumerate() {
            if c >= self.cells_per_dim[j] {
                return Err(Error::CoordOutOfRange {
                    dim: j,
                    coord: c,
                    cells: self.cells_per_dim[j],
                });
            }
        }
        Ok(self.linearize_unchecked(coord.as_slice()))
    }

    #[inline]
    pub(crate) fn linearize_unchecked(&self, coord: &[u64]) -> LinearId {
        coord
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c * s)
            .sum()
    }

    /// Inverse of [`Self::linearize`].
    pub fn delinearize(&self, id: LinearId) -> CellCoord {
        CellCoord(
            (0..self.dims)
                .map(|j| (id / self.strides[j]) % self.cells_per_dim[j])
                .collect(),
        )
    }

    pub(crate) fn strides(&self) -> &[u64] {
        &self.strides
    }

    /// Per-dimension inclusive coordinate range of the cells adjacent to
    /// `coord` (including the cell itself), clamped to the grid.
    pub fn adjacent_ranges(&self, coord: &CellCoord) -> Vec<CoordRange> {
        coord
            .as_slice()
            .iter()
            .zip(&self.cells_per_dim)
            .map(|(&c, &cells)| CoordRange {
                lo: c.saturating_sub(1),
                hi: (c + 1).min(cells - 1),
            })
            .collect()
    }
}

/// One non-empty cell: its id and the inclusive range of its points in `A`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GridCell {
    pub linear_id: LinearId,
    pub a_min: usize,
    pub a_max: usize,
}

/// The sparse grid index. Immutable once built; shareable across query
/// workers without synchronization.
#[derive(Clone, PartialEq, Debug)]
pub struct GridIndex<F = f64> {
    geometry: GridGeometry<F>,
    /// B: sorted linear ids of non-empty cells.
    cell_ids: Vec<LinearId>,
    /// G: cell records, same order as `cell_ids`.
    cells: Vec<GridCell>,
    /// A: point ids grouped by containing cell.
    point_ids: Vec<u32>,
    /// M[j]: sorted occupied coordinates per dimension.
    masks: Vec<Vec<u64>>,
}

impl<F: Real> GridIndex<F> {
    /// Builds the index in O(|D| log |D|): assign each point its linear cell
    /// id, sort point ids by cell id to form `A`, scan once for cell
    /// boundaries to form `G` and `B`.
    pub fn build(dataset: &Dataset<F>, eps: F) -> Result<Self> {
        let geometry = GridGeometry::from_dataset(dataset, eps)?;
        let dims = geometry.dims();

        let ids: Vec<LinearId> = dataset
            .iter_points()
            .map(|p| {
                (0..dims)
                    .map(|j| geometry.coord_axis(j, p[j]) * geometry.strides[j])
                    .sum()
            })
            .collect();

        let mut point_ids: Vec<u32> = (0..dataset.len() as u32).collect();
        point_ids.sort_unstable_by_key(|&p| (ids[p as usize], p));

        let mut cells: Vec<GridCell> = Vec::new();
        let mut cell_ids: Vec<LinearId> = Vec::new();
        for (pos, &p) in point_ids.iter().enumerate() {
            let id = ids[p as usize];
            match cells.last_mut() {
                Some(cell) if cell.linear_id == id => cell.a_max = pos,
                _ => {
                    cells.push(GridCell {
                        linear_id: id,
                        a_min: pos,
                        a_max: pos,
                    });
                    cell_ids.push(id);
                }
            }
        }
        assert!(cells.len() <= dataset.len());

        let mut masks: Vec<Vec<u64>> = vec![Vec::new(); dims];
        for &id in &cell_ids {
            let coord = geometry.delinearize(id);
            for j in 0..dims {
                masks[j].push(coord[j]);
            }
        }
        for mask in &mut masks {
            mask.sort_unstable();
            mask.dedup();
        }

        Ok(Self {
            geometry,
            cell_ids,
            cells,
            point_ids,
            masks,
        })
    }

    pub fn geometry(&self) -> &GridGeometry<F> {
        &self.geometry
    }

    /// Number of non-empty cells, |G| = |B|.
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// B: the sorted non-empty cell ids.
    pub fn cell_ids(&self) -> &[LinearId] {
        &self.cell_ids
    }

    /// G: the cell records, ordered by linear id.
    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    /// A: point ids grouped by containing cell, |A| = |D|.
    pub fn point_lookup(&self) -> &[u32] {
        &self.point_ids
    }

    /// M[j]: sorted occupied coordinates in dimension `j`.
    pub fn mask(&self, dim: usize) -> &[u64] {
        &self.masks[dim]
    }

    /// Binary-searches `B`; absence just means the cell is empty.
    pub fn lookup_cell(&self, id: LinearId) -> Option<&GridCell> {
        self.cell_ids
            .binary_search(&id)
            .ok()
            .map(|pos| &self.cells[pos])
    }

    /// The point ids contained in `cell`.
    pub fn cell_points(&self, cell: &GridCell) -> &[u32] {
        &self.point_ids[cell.a_min..=cell.a_max]
    }

    /// Intersects per-dimension ranges with the occupancy masks, returning
    /// the sorted occupied coordinates inside each range. Any empty result
    /// means no cell in the whole ranged box is occupied.
    pub fn mask_ranges(&self, ranges: &[CoordRange]) -> Vec<Vec<u64>> {
        ranges
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let mask = &self.masks[j];
                let start = mask.partition_point(|&v| v < r.lo);
                mask[start..]
                    .iter()
                    .take_while(|&&v| v <= r.hi)
                    .copied()
                    .collect()
            })
            .collect()
    }

    /// Writes `B`, per-cell point counts and the masks as plain text, for
    /// test fixtures and debugging. Not a persistence format.
    pub fn debug_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "B:")?;
        for id in &self.cell_ids {
            write!(w, " {id}")?;
        }
        writeln!(w)?;
        write!(w, "counts:")?;
        for cell in &self.cells {
            write!(w, " {}", cell.a_max - cell.a_min + 1)?;
        }
        writeln!(w)?;
        for (j, mask) in self.masks.iter().enumerate() {
            write!(w, "M[{j}]:")?;
            for c in mask {
                write!(w, " {c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
