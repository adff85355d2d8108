//! Shared fixtures and checkers for the integration and acceptance suites.
#![allow(dead_code)] // each test target uses a different subset

use selfjoin::{
    self_join, Dataset, GridIndex, JoinConfig, JoinMode, JoinStats, MemorySink, ResultPair,
};

/// Hand-built 2-D layout on a 7x7 padded grid with eps = 1: eleven occupied
/// cells whose linear ids are {8, 9, 12, 15, 19, 22, 30, 32, 33, 36, 39}.
///
/// Cell 22 holds exactly points 6 and 35; the designated query point (id 15)
/// sits in the cell with linear id 30 at coordinate (2, 4), so its masked
/// adjacency probes ids {22, 23, 29, 30, 36, 37} of which {22, 30, 36} are
/// occupied. Column 3 of the grid is empty everywhere.
///
/// Returns the dataset and the query point id.
pub fn figure2_dataset() -> (Dataset<f64>, u32) {
    let rows: [[f64; 2]; 36] = [
        [0.0, 0.0],   //  0: cell (1,1) id 8, data minimum
        [0.3, 0.6],   //  1: cell (1,1) id 8
        [1.5, 0.5],   //  2: cell (2,1) id 9
        [1.2, 0.3],   //  3: cell (2,1) id 9
        [4.5, 0.5],   //  4: cell (5,1) id 12, x maximum
        [4.3, 0.8],   //  5: cell (5,1) id 12
        [0.5, 2.5],   //  6: cell (1,3) id 22
        [0.2, 1.2],   //  7: cell (1,2) id 15
        [0.5, 1.5],   //  8: cell (1,2) id 15
        [0.8, 1.8],   //  9: cell (1,2) id 15
        [0.4, 1.6],   // 10: cell (1,2) id 15
        [4.2, 1.5],   // 11: cell (5,2) id 19
        [4.4, 1.2],   // 12: cell (5,2) id 19
        [4.1, 1.8],   // 13: cell (5,2) id 19
        [4.3, 1.4],   // 14: cell (5,2) id 19
        [1.5, 3.5],   // 15: cell (2,4) id 30, the query point
        [1.2, 3.2],   // 16: cell (2,4) id 30
        [1.8, 3.8],   // 17: cell (2,4) id 30
        [1.4, 3.6],   // 18: cell (2,4) id 30
        [3.5, 3.5],   // 19: cell (4,4) id 32
        [3.2, 3.2],   // 20: cell (4,4) id 32
        [3.8, 3.8],   // 21: cell (4,4) id 32
        [3.4, 3.6],   // 22: cell (4,4) id 32
        [4.4, 3.8],   // 23: cell (5,4) id 33
        [4.2, 3.3],   // 24: cell (5,4) id 33
        [4.45, 3.5],  // 25: cell (5,4) id 33
        [4.1, 3.9],   // 26: cell (5,4) id 33
        [0.5, 4.5],   // 27: cell (1,5) id 36, y maximum
        [0.2, 4.2],   // 28: cell (1,5) id 36
        [0.8, 4.3],   // 29: cell (1,5) id 36
        [0.6, 4.1],   // 30: cell (1,5) id 36
        [3.5, 4.2],   // 31: cell (4,5) id 39
        [3.2, 4.4],   // 32: cell (4,5) id 39
        [3.8, 4.1],   // 33: cell (4,5) id 39
        [3.6, 4.3],   // 34: cell (4,5) id 39
        [0.7, 2.8],   // 35: cell (1,3) id 22
    ];
    (Dataset::from_rows(&rows).unwrap(), 15)
}

/// Runs the join and returns the globally sorted pair list with its stats.
pub fn sorted_engine_pairs(
    dataset: &Dataset<f64>,
    index: &GridIndex<f64>,
    cfg: &JoinConfig<f64>,
) -> (Vec<ResultPair>, JoinStats) {
    let mut sink = MemorySink::default();
    let stats = self_join(dataset, index, cfg, &mut sink).expect("join");
    (sink.into_sorted_pairs(), stats)
}

pub fn join_with(
    dataset: &Dataset<f64>,
    eps: f64,
    mode: JoinMode,
) -> (Vec<ResultPair>, JoinStats) {
    let index = GridIndex::build(dataset, eps).expect("index");
    sorted_engine_pairs(dataset, &index, &JoinConfig::new(eps).with_mode(mode))
}

/// Volume of the n-dimensional unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        6 => PI * PI * PI / 6.0,
        _ => panic!("unsupported dimensionality {n}"),
    }
}

/// Epsilon that gives about `extra` neighbors per point (beyond self) for
/// `count` uniform points in `[0, range]^n`, ignoring edge effects.
pub fn eps_for_extra_neighbors(n: usize, count: usize, range: f64, extra: f64) -> f64 {
    let fraction = extra / ((count - 1) as f64 * unit_ball_volume(n));
    range * fraction.powf(1.0 / n as f64)
}

/// Structural invariants that every built index must satisfy.
pub fn check_index_invariants(dataset: &Dataset<f64>, index: &GridIndex<f64>) {
    let geom = index.geometry();

    // |B| = |G| <= |D| and B strictly ascending
    assert_eq!(index.cell_ids().len(), index.cells().len());
    assert!(index.num_cells() <= dataset.len());
    assert!(index.cell_ids().windows(2).all(|w| w[0] < w[1]));
    for (cell, &id) in index.cells().iter().zip(index.cell_ids()) {
        assert_eq!(cell.linear_id, id);
    }

    // A is a permutation of the point ids and the cell ranges tile it
    assert_eq!(index.point_lookup().len(), dataset.len());
    let mut seen = vec![false; dataset.len()];
    for &p in index.point_lookup() {
        assert!(!seen[p as usize], "duplicate point {p} in A");
        seen[p as usize] = true;
    }
    assert!(seen.iter().all(|&s| s));
    let mut next = 0usize;
    for cell in index.cells() {
        assert_eq!(cell.a_min, next, "cell ranges must tile A");
        assert!(cell.a_min <= cell.a_max);
        next = cell.a_max + 1;
    }
    assert_eq!(next, dataset.len());

    // every point's recomputed coordinate linearizes to its cell's id
    for cell in index.cells() {
        for &p in index.cell_points(cell) {
            let coord = geom.cell_coord(dataset.point(p as usize));
            assert_eq!(geom.linearize(&coord).unwrap(), cell.linear_id);
        }
    }

    // M[j] is exactly the occupied coordinate set per dimension
    let mut expected: Vec<Vec<u64>> = vec![Vec::new(); geom.dims()];
    for &id in index.cell_ids() {
        let coord = geom.delinearize(id);
        for (j, dim_coords) in expected.iter_mut().enumerate() {
            dim_coords.push(coord[j]);
        }
    }
    for (j, dim_coords) in expected.iter_mut().enumerate() {
        dim_coords.sort_unstable();
        dim_coords.dedup();
        assert_eq!(index.mask(j), &dim_coords[..], "mask {j}");
    }
}
