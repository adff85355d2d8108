//! Run reports: one CSV header plus one row per executed configuration.

use selfjoin::{JoinMode, JoinStats};

/// Columns of the `join` report.
pub const REPORT_HEADER: &str = "dataset,label,D,n,eps,mode,workers,build_s,join_s,\
cells_probed,candidates_tested,pairs,mean_neighbors,batches";

/// `bench` appends a baseline/unicomp comparison column and an error column.
pub const BENCH_HEADER: &str = "dataset,label,D,n,eps,mode,workers,build_s,join_s,\
cells_probed,candidates_tested,pairs,mean_neighbors,batches,candidates_ratio,error";

#[derive(Clone, Debug)]
pub struct RunReport {
    pub dataset: String,
    pub label: String,
    pub count: usize,
    pub dims: usize,
    pub eps: f64,
    pub mode: JoinMode,
    pub workers: usize,
    pub build_s: f64,
    pub join_s: f64,
    pub stats: JoinStats,
    pub pairs: u64,
}

impl RunReport {
    pub fn mean_neighbors(&self) -> f64 {
        self.pairs as f64 / self.count as f64
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{:.6},{},{},{},{:.6},{}",
            csv_field(&self.dataset),
            csv_field(&self.label),
            self.count,
            self.dims,
            self.eps,
            self.mode,
            self.workers,
            self.build_s,
            self.join_s,
            self.stats.cells_probed,
            self.stats.candidates_tested,
            self.pairs,
            self.mean_neighbors(),
            self.stats.batches,
        )
    }
}

/// Quotes a field if it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_matches_header_arity() {
        let report = RunReport {
            dataset: "a.csv".into(),
            label: "run".into(),
            count: 10,
            dims: 2,
            eps: 1.5,
            mode: JoinMode::Baseline,
            workers: 1,
            build_s: 0.25,
            join_s: 0.5,
            stats: JoinStats::default(),
            pairs: 20,
        };
        let row = report.csv_row();
        assert_eq!(row.split(',').count(), REPORT_HEADER.split(',').count());
        assert!(row.contains(",2.000000,")); // mean neighbors = 20 / 10
    }

    #[test]
    fn csv_field_escapes() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
