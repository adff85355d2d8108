//! Point storage, CSV ingestion, synthetic generation and normalization.
//!
//! A [`Dataset`] is an ordered, immutable collection of n-dimensional points
//! with 64-bit (or generic [`Real`]) coordinates stored in one flat,
//! point-major buffer. Point ids are 0-based positions in that order and are
//! the ids reported by the join engine.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::Real;

/// Ordered collection of points sharing one dimensionality.
///
/// Immutable after construction: safe to share read-only across any number of
/// concurrent workers.
#[derive(Clone, PartialEq, Debug)]
pub struct Dataset<F = f64> {
    dims: usize,
    coords: Vec<F>,
}

impl<F: Real> Dataset<F> {
    /// Builds a dataset from a flat point-major coordinate buffer
    /// (`coords[p * dims + j]` is coordinate `j` of point `p`).
    ///
    /// Rejects empty input, a buffer whose length is not a multiple of
    /// `dims`, and non-finite coordinates.
    pub fn from_flat(dims: usize, coords: Vec<F>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::ZeroDims);
        }
        if coords.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !coords.len().is_multiple_of(dims) {
            return Err(Error::RaggedCoords {
                len: coords.len(),
                dims,
            });
        }
        let len = coords.len() / dims;
        if len > u32::MAX as usize {
            return Err(Error::TooManyPoints {
                len,
                max: u32::MAX as u64,
            });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoord { id: bad / dims });
        }
        Ok(Self { dims, coords })
    }

    /// Convenience constructor from fixed-size rows.
    pub fn from_rows<const N: usize>(rows: &[[F; N]]) -> Result<Self> {
        Self::from_flat(N, rows.iter().flatten().copied().collect())
    }

    /// Number of points, |D|.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Dimensionality n of every point.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Coordinates of point `id`.
    pub fn point(&self, id: usize) -> &[F] {
        &self.coords[id * self.dims..(id + 1) * self.dims]
    }

    pub fn iter_points(&self) -> impl DoubleEndedIterator<Item = &[F]> + ExactSizeIterator {
        self.coords.chunks_exact(self.dims)
    }

    /// The flat point-major coordinate buffer.
    pub fn coords(&self) -> &[F] {
        &self.coords
    }

    /// Per-dimension (min, max) over all points.
    pub fn bounds(&self) -> (Vec<F>, Vec<F>) {
        let mut min = self.point(0).to_vec();
        let mut max = min.clone();
        for point in self.iter_points().skip(1) {
            for j in 0..self.dims {
                if point[j] < min[j] {
                    min[j] = point[j];
                }
                if point[j] > max[j] {
                    max[j] = point[j];
                }
            }
        }
        (min, max)
    }

    /// Maps every dimension linearly onto [0, 1]:
    /// `x' = (x - min_j) / (max_j - min_j)`, preserving point order.
    ///
    /// A degenerate dimension (all values equal) maps to 0. Provided for
    /// cross-checking against tools that pre-normalize their input; note that
    /// it only preserves the self-join structure under a proportionally
    /// scaled epsilon when all dimensions span the same range.
    pub fn normalize_unit(&self) -> Dataset<F> {
        let (min, max) = self.bounds();
        let span: Vec<F> = min.iter().zip(&max).map(|(&lo, &hi)| hi - lo).collect();
        let coords = self
            .coords
            .chunks_exact(self.dims)
            .flat_map(|point| {
                point.iter().enumerate().map(|(j, &x)| {
                    if span[j] > F::zero() {
                        (x - min[j]) / span[j]
                    } else {
                        F::zero()
                    }
                })
            })
            .collect();
        Dataset {
            dims: self.dims,
            coords,
        }
    }

    /// Writes the dataset as CSV: one point per line, comma-separated
    /// coordinates, LF line endings, no header. Floats are formatted with
    /// shortest round-trip precision, so `read_csv` recovers the dataset
    /// exactly.
    pub fn write_csv<W: Write>(&self, writer: W) -> io::Result<()> {
        let mut w = BufWriter::new(writer);
        for point in self.iter_points() {
            for (j, x) in point.iter().enumerate() {
                if j > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{x}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        Ok(self.write_csv(file)?)
    }
}

/// Loads a headerless CSV of points with `dims` fields per row.
pub fn load_csv<F: Real>(path: impl AsRef<Path>, dims: usize) -> Result<Dataset<F>> {
    read_csv(BufReader::new(File::open(path)?), dims, false)
}

/// Reads CSV points from any buffered reader, optionally skipping a header
/// line. Errors name the offending 1-based line number.
pub fn read_csv<F: Real, R: BufRead>(
    reader: R,
    dims: usize,
    skip_header: bool,
) -> Result<Dataset<F>> {
    if dims == 0 {
        return Err(Error::ZeroDims);
    }
    let mut coords: Vec<F> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 && skip_header {
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut fields = 0usize;
        for field in line.split(',') {
            fields += 1;
            if fields > dims {
                continue; // keep counting for the arity error below
            }
            let trimmed = field.trim();
            let value: F = trimmed.parse().map_err(|_| Error::CsvNumber {
                line: lineno,
                field: trimmed.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvNumber {
                    line: lineno,
                    field: trimmed.to_string(),
                });
            }
            coords.push(value);
        }
        if fields != dims {
            return Err(Error::CsvArity {
                line: lineno,
                expected: dims,
                found: fields,
            });
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyInput);
    }
    Dataset::from_flat(dims, coords)
}

/// Generates `count` points with every coordinate drawn independently and
/// uniformly from `[lo, hi)`.
///
/// The generator is fixed so datasets are reproducible: coordinates are
/// drawn point-major (all coordinates of point 0, then point 1, ...) from a
/// ChaCha8 stream seeded with `seed`; each draw takes the top 53 bits of the
/// next `u64` and maps them as `lo + (hi - lo) * (bits / 2^53)`, computed in
/// `f64` before narrowing to `F`. The same arguments yield a bit-identical
/// dataset on every platform and run.
pub fn generate_uniform<F: Real>(
    count: usize,
    dims: usize,
    lo: F,
    hi: F,
    seed: u64,
) -> Result<Dataset<F>> {
    if lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidRange {
            lo: lo.to_string(),
            hi: hi.to_string(),
        });
    }
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let lo_f = lo.to_f64().expect("finite scalar");
    let hi_f = hi.to_f64().expect("finite scalar");
    let scale = 1.0 / (1u64 << 53) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..count * dims)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * scale;
            F::from_f64(lo_f + (hi_f - lo_f) * u).expect("uniform draw in range")
        })
        .collect();
    Dataset::from_flat(dims, coords)
}

/// Squared Euclidean distance.
///
/// This is the one distance expression in the crate: the grid engine and the
/// brute-force reference both call it and compare against `eps * eps`, so
/// their results agree bitwise.
#[inline]
pub fn distance_sq<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc = acc + d * d;
    }
    acc
}
