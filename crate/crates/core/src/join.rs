//! The self-join: per-point adjacent-cell search, the unicomp variant,
//! batched result streaming and work counters.
//!
//! For every query point the kernel computes the point's cell coordinate,
//! clamps the ±1 adjacency range per dimension, intersects each range with
//! the occupancy mask, and probes the surviving cells (at most 3^n) in `B`.
//! Every point of every non-empty probed cell is a candidate and gets one
//! squared-distance evaluation against `eps²`.
//!
//! [`JoinMode::Unicomp`] halves that work. Distance is symmetric, so each
//! cross-cell pair only needs to be evaluated from one side as long as both
//! ordered pairs are emitted on a hit. For each dimension `j` where the query
//! cell's coordinate is odd, the kernel scans the cells that differ from the
//! home cell in dimension `j`, range over every earlier dimension, and agree
//! with it on every later dimension. Adjacent cells differ by exactly one in
//! their highest differing dimension, so exactly one endpoint of every
//! cross-cell pair has an odd coordinate there: each pair of cells is scanned
//! from exactly one side. The home cell is scanned by every one of its own
//! points, emitting only the outgoing direction; the mirrored pair arises
//! from the partner's own scan.
//!
//! Output is streamed to a [`BatchSink`] as batches of (query id, neighbor
//! id) pairs. Query points are split into contiguous ranges, at least
//! [`JoinConfig::min_batches`] of them, sized from a sampled pair-count
//! estimate so a batch's pairs fit the configured buffer. Each batch is
//! sorted by (key, value) before delivery. In unicomp mode the mirrored pair
//! is delivered in the batch of the query point that discovered it, so the
//! concatenation of batches is only globally sorted after a final sort (or
//! in baseline mode, where keys follow the batch ranges).

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::thread;

use crate::dataset::{distance_sq, Dataset};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, GridIndex, LinearId};
use crate::sink::BatchSink;
use crate::Real;

/// Joins are supported for 2..=6 dimensions; pruning degrades beyond that.
pub const MIN_JOIN_DIMS: usize = 2;
pub const MAX_JOIN_DIMS: usize = 6;

const DEFAULT_BUFFER_CAPACITY: usize = 1 << 20;
const DEFAULT_MIN_BATCHES: usize = 3;

/// Search strategy of the join kernel. Both modes deliver the same pairs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum JoinMode {
    /// Scan all masked adjacent cells of every query point.
    Baseline,
    /// Scan roughly half the cells using the odd-coordinate rule and emit
    /// both ordered pairs per cross-cell hit.
    Unicomp,
}

impl fmt::Display for JoinMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinMode::Baseline => "baseline",
            JoinMode::Unicomp => "unicomp",
        })
    }
}

impl FromStr for JoinMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "baseline" => Ok(JoinMode::Baseline),
            "unicomp" => Ok(JoinMode::Unicomp),
            other => Err(format!("unknown mode {other:?} (baseline|unicomp)")),
        }
    }
}

/// Join parameters. `eps` must match the epsilon the index was built with.
#[derive(Clone, Copy, Debug)]
pub struct JoinConfig<F = f64> {
    pub eps: F,
    pub mode: JoinMode,
    /// Emit (p, p) for every point; on by default, matching a kernel that
    /// scans the query point's own cell.
    pub include_self_pairs: bool,
    /// Target pairs per batch buffer.
    pub buffer_capacity: usize,
    pub min_batches: usize,
    pub workers: usize,
}

impl<F: Real> JoinConfig<F> {
    pub fn new(eps: F) -> Self {
        Self {
            eps,
            mode: JoinMode::Baseline,
            include_self_pairs: true,
            buffer_capacity: DEFAULT_BUFFER_CAPACITY,
            min_batches: DEFAULT_MIN_BATCHES,
            workers: 1,
        }
    }

    pub fn with_mode(mut self, mode: JoinMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// One ordered result pair: `key` is the query point, `value` a point within
/// `eps` of it. Ordering is lexicographic by (key, value).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ResultPair {
    pub key: u32,
    pub value: u32,
}

/// A sorted slice of the result stream.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResultBatch {
    pub batch_index: usize,
    /// Sorted by (key, value); no duplicates.
    pub pairs: Vec<ResultPair>,
}

/// Hardware-independent work counters.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
pub struct JoinStats {
    /// Binary searches of `B`.
    pub cells_probed: u64,
    /// Squared-distance evaluations.
    pub candidates_tested: u64,
    pub pairs_emitted: u64,
    /// Batches delivered; 0 for count-only runs, which skip batching.
    pub batches: u64,
}

impl std::ops::AddAssign for JoinStats {
    fn add_assign(&mut self, rhs: Self) {
        self.cells_probed += rhs.cells_probed;
        self.candidates_tested += rhs.candidates_tested;
        self.pairs_emitted += rhs.pairs_emitted;
        self.batches += rhs.batches;
    }
}

/// Partition of the query ids into contiguous batch ranges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BatchPlan {
    pub ranges: Vec<Range<u32>>,
    /// Estimated pairs per range, from the sampled count.
    pub estimated_pairs: Vec<u64>,
    pub estimated_total: u64,
}

trait PairEmitter {
    fn emit(&mut self, key: u32, value: u32);
}

struct NoopEmitter;

impl PairEmitter for NoopEmitter {
    #[inline]
    fn emit(&mut self, _key: u32, _value: u32) {}
}

struct VecEmitter<'a>(&'a mut Vec<ResultPair>);

impl PairEmitter for VecEmitter<'_> {
    #[inline]
    fn emit(&mut self, key: u32, value: u32) {
        self.0.push(ResultPair { key, value });
    }
}

/// Masked adjacency of one query point. Each dimension keeps the occupied
/// coordinates inside the clamped ±1 range; the home coordinate is always
/// present because the query point's own cell is non-empty.
struct Neighborhood {
    coord: [u64; MAX_JOIN_DIMS],
    masked: [[u64; 3]; MAX_JOIN_DIMS],
    len: [usize; MAX_JOIN_DIMS],
}

fn neighborhood<F: Real>(index: &GridIndex<F>, point: &[F]) -> Neighborhood {
    let geom = index.geometry();
    let mut nb = Neighborhood {
        coord: [0; MAX_JOIN_DIMS],
        masked: [[0; 3]; MAX_JOIN_DIMS],
        len: [0; MAX_JOIN_DIMS],
    };
    for (j, &x) in point.iter().enumerate() {
        let c = geom.coord_axis(j, x);
        nb.coord[j] = c;
        let lo = c.saturating_sub(1);
        let hi = (c + 1).min(geom.cells_per_dim()[j] - 1);
        let mask = index.mask(j);
        let start = mask.partition_point(|&v| v < lo);
        let mut len = 0;
        for &v in &mask[start..] {
            if v > hi {
                break;
            }
            nb.masked[j][len] = v;
            len += 1;
        }
        debug_assert!(len >= 1, "home coordinate is always occupied");
        nb.len[j] = len;
    }
    nb
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn scan_cell<F: Real, E: PairEmitter>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    id: LinearId,
    point: &[F],
    p: u32,
    eps_sq: F,
    skip_self: bool,
    mirror: bool,
    emitter: &mut E,
    stats: &mut JoinStats,
) {
    stats.cells_probed += 1;
    let Some(cell) = index.lookup_cell(id) else {
        return;
    };
    for &q in index.cell_points(cell) {
        if skip_self && q == p {
            continue;
        }
        stats.candidates_tested += 1;
        if distance_sq(point, dataset.point(q as usize)) <= eps_sq {
            emitter.emit(p, q);
            stats.pairs_emitted += 1;
            if mirror && q != p {
                emitter.emit(q, p);
                stats.pairs_emitted += 1;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn join_point<F: Real, E: PairEmitter>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    eps_sq: F,
    mode: JoinMode,
    include_self_pairs: bool,
    p: u32,
    emitter: &mut E,
    stats: &mut JoinStats,
) {
    let point = dataset.point(p as usize);
    let geom = index.geometry();
    let n = geom.dims();
    let strides = geom.strides();
    let nb = neighborhood(index, point);
    let skip_self = !include_self_pairs;

    match mode {
        JoinMode::Baseline => {
            let mut digits = [0usize; MAX_JOIN_DIMS];
            'cells: loop {
                let id: u64 = (0..n).map(|j| nb.masked[j][digits[j]] * strides[j]).sum();
                scan_cell(
                    dataset, index, id, point, p, eps_sq, skip_self, false, emitter, stats,
                );
                for j in (0..n).rev() {
                    digits[j] += 1;
                    if digits[j] < nb.len[j] {
                        continue 'cells;
                    }
                    digits[j] = 0;
                }
                break;
            }
        }
        JoinMode::Unicomp => {
            let home_id: u64 = (0..n).map(|j| nb.coord[j] * strides[j]).sum();
            // own cell: outgoing direction only, the partner's scan mirrors
            scan_cell(
                dataset, index, home_id, point, p, eps_sq, skip_self, false, emitter, stats,
            );

            let mut prefix_home = 0u64;
            for j in 0..n {
                let home_term = nb.coord[j] * strides[j];
                let suffix_home = home_id - prefix_home - home_term;
                prefix_home += home_term;
                if nb.coord[j] & 1 == 0 {
                    continue;
                }
                // cells that differ in dimension j, range over earlier
                // dimensions, and match the home cell afterwards
                let mut digits = [0usize; MAX_JOIN_DIMS];
                'tuples: loop {
                    let prefix: u64 =
                        (0..j).map(|i| nb.masked[i][digits[i]] * strides[i]).sum();
                    for &v in &nb.masked[j][..nb.len[j]] {
                        if v == nb.coord[j] {
                            continue;
                        }
                        let id = prefix + v * strides[j] + suffix_home;
                        scan_cell(
                            dataset, index, id, point, p, eps_sq, false, true, emitter, stats,
                        );
                    }
                    for i in (0..j).rev() {
                        digits[i] += 1;
                        if digits[i] < nb.len[i] {
                            continue 'tuples;
                        }
                        digits[i] = 0;
                    }
                    break;
                }
            }
        }
    }
}

/// The cells a unicomp query in cell `coord` must scan besides its own, given
/// the per-dimension masked adjacency lists. For each dimension `j` with an
/// odd home coordinate: every tuple drawing dimensions before `j` from their
/// masked lists, dimension `j` from its masked list minus the home value, and
/// later dimensions from the home cell. The home cell is never produced and
/// no cell appears twice.
pub fn unicomp_cells(coord: &CellCoord, masked: &[Vec<u64>]) -> Vec<CellCoord> {
    let n = coord.dims();
    debug_assert_eq!(masked.len(), n);
    let mut out = Vec::new();
    for j in 0..n {
        if coord[j] & 1 == 0 {
            continue;
        }
        if (0..j).any(|i| masked[i].is_empty()) {
            continue;
        }
        let mut digits = vec![0usize; j];
        'tuples: loop {
            for &v in &masked[j] {
                if v == coord[j] {
                    continue;
                }
                let mut cell = Vec::with_capacity(n);
                for i in 0..j {
                    cell.push(masked[i][digits[i]]);
                }
                cell.push(v);
                cell.extend_from_slice(&coord.as_slice()[j + 1..]);
                out.push(CellCoord(cell));
            }
            for i in (0..j).rev() {
                digits[i] += 1;
                if digits[i] < masked[i].len() {
                    continue 'tuples;
                }
                digits[i] = 0;
            }
            break;
        }
    }
    out
}

fn validate<F: Real>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    cfg: &JoinConfig<F>,
) -> Result<()> {
    let dims = dataset.dims();
    if !(MIN_JOIN_DIMS..=MAX_JOIN_DIMS).contains(&dims) {
        return Err(Error::UnsupportedDims { dims });
    }
    if cfg.eps <= F::zero() || !cfg.eps.is_finite() {
        return Err(Error::InvalidEpsilon {
            eps: cfg.eps.to_string(),
        });
    }
    if cfg.eps != index.geometry().eps() {
        return Err(Error::EpsilonMismatch {
            cfg: cfg.eps.to_string(),
            index: index.geometry().eps().to_string(),
        });
    }
    if index.point_lookup().len() != dataset.len() {
        return Err(Error::IndexMismatch {
            index_len: index.point_lookup().len(),
            dataset_len: dataset.len(),
        });
    }
    if cfg.buffer_capacity == 0 {
        return Err(Error::ZeroConfig {
            field: "buffer_capacity",
        });
    }
    if cfg.min_batches == 0 {
        return Err(Error::ZeroConfig {
            field: "min_batches",
        });
    }
    if cfg.workers == 0 {
        return Err(Error::ZeroConfig { field: "workers" });
    }
    Ok(())
}

fn batch_count(estimated_total: u64, buffer_capacity: usize, min_batches: usize) -> usize {
    let by_size = estimated_total.div_ceil(buffer_capacity as u64) as usize;
    by_size.max(min_batches)
}

/// Partitions the query ids into contiguous batch ranges.
///
/// A count-only pass over a deterministic sample (every k-th point, at least
/// 1% of the dataset and at least 1000 points) estimates the total pair
/// count; the batch count is `max(min_batches, ceil(estimate / buffer))` and
/// boundaries are placed at equal shares of the estimated output. Estimates
/// count one direction per neighbor, which is exact for baseline batches and
/// an approximation of the per-batch split for unicomp.
pub fn plan_batches<F: Real>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    cfg: &JoinConfig<F>,
) -> Result<BatchPlan> {
    validate(dataset, index, cfg)?;
    let len = dataset.len();
    let eps_sq = cfg.eps * cfg.eps;

    let target = (len / 100).max(1000).min(len);
    let step = (len / target).max(1);

    // (block start, block len, estimated pairs per id in the block)
    let mut blocks: Vec<(usize, usize, f64)> = Vec::with_capacity(len.div_ceil(step));
    let mut estimated_total_f = 0.0f64;
    let mut sample = 0usize;
    while sample < len {
        let mut stats = JoinStats::default();
        join_point(
            dataset,
            index,
            eps_sq,
            JoinMode::Baseline,
            cfg.include_self_pairs,
            sample as u32,
            &mut NoopEmitter,
            &mut stats,
        );
        let block_len = step.min(len - sample);
        blocks.push((sample, block_len, stats.pairs_emitted as f64));
        estimated_total_f += stats.pairs_emitted as f64 * block_len as f64;
        sample += step;
    }

    let estimated_total = estimated_total_f.round() as u64;
    let k = batch_count(estimated_total, cfg.buffer_capacity, cfg.min_batches);

    // Cut at equal shares of the estimated output, treating each block's
    // estimate as uniform over its ids.
    let mut cuts: Vec<usize> = Vec::with_capacity(k + 1);
    cuts.push(0);
    if estimated_total == 0 {
        for m in 1..k {
            cuts.push(len * m / k);
        }
    } else {
        let mut cum = 0.0f64;
        let mut block = blocks.iter().peekable();
        let mut cum_before = 0.0f64;
        for m in 1..k {
            let threshold = estimated_total_f * m as f64 / k as f64;
            // advance to the block where the cumulative estimate crosses
            while let Some(&&(start, blen, per_id)) = block.peek() {
                let block_total = per_id * blen as f64;
                if cum + block_total >= threshold || start + blen >= len {
                    cum_before = cum;
                    break;
                }
                cum += block_total;
                block.next();
            }
            let cut = match block.peek() {
                Some(&&(start, blen, per_id)) => {
                    if per_id > 0.0 {
                        let ids = ((threshold - cum_before) / per_id).ceil() as usize;
                        (start + ids.min(blen)).min(len)
                    } else {
                        start + blen
                    }
                }
                None => len,
            };
            let prev = *cuts.last().unwrap();
            cuts.push(cut.max(prev));
        }
    }
    cuts.push(len);

    let mut ranges = Vec::with_capacity(k);
    let mut estimated_pairs = Vec::with_capacity(k);
    for m in 0..k {
        let (lo, hi) = (cuts[m], cuts[m + 1]);
        ranges.push(lo as u32..hi as u32);
        let mut est = 0.0f64;
        for &(start, blen, per_id) in &blocks {
            let overlap_lo = lo.max(start);
            let overlap_hi = hi.min(start + blen);
            if overlap_lo < overlap_hi {
                est += per_id * (overlap_hi - overlap_lo) as f64;
            }
        }
        estimated_pairs.push(est.round() as u64);
    }
    debug_assert_eq!(ranges.len(), k);

    Ok(BatchPlan {
        ranges,
        estimated_pairs,
        estimated_total,
    })
}

/// Runs the kernel over a contiguous query range, splitting it across
/// `cfg.workers` threads. Worker buffers are concatenated in worker order,
/// so the emitted sequence is independent of the worker count.
fn run_range<F: Real>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    cfg: &JoinConfig<F>,
    range: Range<u32>,
    out: Option<&mut Vec<ResultPair>>,
) -> JoinStats {
    let eps_sq = cfg.eps * cfg.eps;
    let len = (range.end - range.start) as usize;

    let run_chunk = |chunk: Range<u32>, pairs: Option<&mut Vec<ResultPair>>| -> JoinStats {
        let mut stats = JoinStats::default();
        match pairs {
            Some(buf) => {
                let mut emitter = VecEmitter(buf);
                for p in chunk {
                    join_point(
                        dataset,
                        index,
                        eps_sq,
                        cfg.mode,
                        cfg.include_self_pairs,
                        p,
                        &mut emitter,
                        &mut stats,
                    );
                }
            }
            None => {
                for p in chunk {
                    join_point(
                        dataset,
                        index,
                        eps_sq,
                        cfg.mode,
                        cfg.include_self_pairs,
                        p,
                        &mut NoopEmitter,
                        &mut stats,
                    );
                }
            }
        }
        stats
    };

    if cfg.workers <= 1 || len <= 1 {
        return run_chunk(range, out);
    }

    let chunk_len = len.div_ceil(cfg.workers) as u64;
    let collect = out.is_some();
    let results: Vec<(Vec<ResultPair>, JoinStats)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.workers as u64)
            .map(|w| {
                let start = (range.start as u64 + w * chunk_len).min(range.end as u64) as u32;
                let end = (start as u64 + chunk_len).min(range.end as u64) as u32;
                scope.spawn(move || {
                    let mut pairs = Vec::new();
                    let stats = run_chunk(start..end, collect.then_some(&mut pairs));
                    (pairs, stats)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("join worker panicked"))
            .collect()
    });

    let mut stats = JoinStats::default();
    let mut out = out;
    for (pairs, worker_stats) in results {
        stats += worker_stats;
        if let Some(buf) = out.as_deref_mut() {
            buf.extend_from_slice(&pairs);
        }
    }
    stats
}

/// Runs the self-join and streams sorted batches to `sink`.
///
/// The multiset of pairs delivered across all batches is exactly
/// `{(p, q) : dist(p, q) <= eps}` (with `(p, p)` included iff
/// `include_self_pairs`), each pair exactly once, independent of mode,
/// batching parameters and worker count.
pub fn self_join<F: Real, S: BatchSink>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    cfg: &JoinConfig<F>,
    sink: &mut S,
) -> Result<JoinStats> {
    let plan = plan_batches(dataset, index, cfg)?;
    let mut stats = JoinStats::default();
    let mut buffer: Vec<ResultPair> = Vec::new();

    for (batch_index, range) in plan.ranges.iter().enumerate() {
        buffer.clear();
        stats += run_range(dataset, index, cfg, range.clone(), Some(&mut buffer));
        buffer.sort_unstable();
        debug_assert!(buffer.windows(2).all(|w| w[0] < w[1]), "duplicate pair");

        let batch = ResultBatch {
            batch_index,
            pairs: buffer,
        };
        let delivered = sink.consume(&batch);
        buffer = batch.pairs;
        delivered.map_err(|source| Error::Sink {
            batch: batch_index,
            source,
        })?;
        stats.batches += 1;
    }
    Ok(stats)
}

/// Counts result pairs without materializing them. Same traversal and
/// counters as [`self_join`], no batching (`stats.batches` is 0).
pub fn count_only_join<F: Real>(
    dataset: &Dataset<F>,
    index: &GridIndex<F>,
    cfg: &JoinConfig<F>,
) -> Result<(u64, JoinStats)> {
    validate(dataset, index, cfg)?;
    let stats = run_range(dataset, index, cfg, 0..dataset.len() as u32, None);
    Ok((stats.pairs_emitted, stats))
}
