//! Benchmark sweeps from a flat key=value spec file.
//!
//! A spec names one dataset (a CSV path or uniform-generator parameters) and
//! the sweep axes: a dims list (generator only), an eps list and a mode list.
//! Every (dims, eps, mode) cell runs `trials` times; the report carries the
//! mean build and join wall times and the (deterministic) work counters.
//!
//! ```text
//! label = sweep2d
//! count = 100000        # or: input = points.csv
//! dims = 2,3
//! eps = 0.5,1
//! modes = baseline,unicomp
//! trials = 3
//! workers = 1
//! seed = 7
//! ```
//!
//! Unicomp rows carry `candidates_ratio`, their `candidates_tested` divided
//! by the matching baseline row's. A failed cell keeps its row: measurement
//! columns are zero and the error column holds the message.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use selfjoin::{
    self_join, CountingSink, Dataset, GridIndex, JoinConfig, JoinMode, JoinStats,
};

use crate::report::{csv_field, RunReport, BENCH_HEADER};

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub label: String,
    pub input: Option<PathBuf>,
    pub header: bool,
    pub count: Option<usize>,
    pub dims: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub modes: Vec<JoinMode>,
    pub trials: usize,
    pub workers: usize,
    pub buffer: usize,
    pub min_batches: usize,
}

pub fn parse_spec(text: &str) -> Result<BenchSpec> {
    let mut spec = BenchSpec {
        label: "bench".to_string(),
        input: None,
        header: false,
        count: None,
        dims: Vec::new(),
        lo: 0.0,
        hi: 100.0,
        seed: 1,
        eps: Vec::new(),
        modes: vec![JoinMode::Baseline, JoinMode::Unicomp],
        trials: 3,
        workers: 1,
        buffer: 1 << 20,
        min_batches: 3,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("spec line {}: expected `key = value`", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let context = || format!("spec line {}: bad value for {key}", idx + 1);
        match key {
            "label" => spec.label = value.to_string(),
            "input" => spec.input = Some(PathBuf::from(value)),
            "header" => spec.header = value.parse().with_context(context)?,
            "count" => spec.count = Some(value.parse().with_context(context)?),
            "dims" => spec.dims = parse_list(value).with_context(context)?,
            "lo" => spec.lo = value.parse().with_context(context)?,
            "hi" => spec.hi = value.parse().with_context(context)?,
            "seed" => spec.seed = value.parse().with_context(context)?,
            "eps" => spec.eps = parse_list(value).with_context(context)?,
            "modes" => {
                spec.modes = value
                    .split(',')
                    .map(|m| m.trim().parse::<JoinMode>().map_err(|e| anyhow!(e)))
                    .collect::<Result<_>>()
                    .with_context(context)?
            }
            "trials" => spec.trials = value.parse().with_context(context)?,
            "workers" => spec.workers = value.parse().with_context(context)?,
            "buffer" => spec.buffer = value.parse().with_context(context)?,
            "min_batches" => spec.min_batches = value.parse().with_context(context)?,
            other => bail!("spec line {}: unknown key {other:?}", idx + 1),
        }
    }

    if spec.input.is_some() == spec.count.is_some() {
        bail!("spec must set exactly one of `input` and `count`");
    }
    if spec.dims.is_empty() {
        bail!("spec must list `dims`");
    }
    if spec.input.is_some() && spec.dims.len() != 1 {
        bail!("a CSV input has one dimensionality; `dims` must be a single value");
    }
    if spec.eps.is_empty() {
        bail!("spec must list `eps`");
    }
    if spec.trials == 0 {
        bail!("trials must be at least 1");
    }
    Ok(spec)
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    value
        .split(',')
        .map(|v| v.trim().parse::<T>().map_err(Into::into))
        .collect()
}

struct BenchRow {
    report: RunReport,
    error: Option<String>,
}

/// Runs every sweep cell and writes the report CSV. Cell failures are
/// recorded in their row and the sweep continues.
pub fn run_sweep<W: Write>(spec: &BenchSpec, out: &mut W) -> Result<()> {
    let mut rows: Vec<BenchRow> = Vec::new();

    for &dims in &spec.dims {
        let (dataset_desc, data) = match &spec.input {
            Some(path) => (
                path.display().to_string(),
                crate::commands::load_input(path, dims, spec.header).map_err(|e| e.to_string()),
            ),
            None => {
                let count = spec.count.expect("validated");
                let desc = format!(
                    "uniform:count={count};lo={};hi={};seed={}",
                    spec.lo, spec.hi, spec.seed
                );
                let data =
                    selfjoin::generate_uniform::<f64>(count, dims, spec.lo, spec.hi, spec.seed)
                        .map_err(|e| e.to_string());
                (desc, data)
            }
        };

        for &eps in &spec.eps {
            for &mode in &spec.modes {
                let mut report = RunReport {
                    dataset: dataset_desc.clone(),
                    label: spec.label.clone(),
                    count: 0,
                    dims,
                    eps,
                    mode,
                    workers: spec.workers,
                    build_s: 0.0,
                    join_s: 0.0,
                    stats: JoinStats::default(),
                    pairs: 0,
                };
                let error = match &data {
                    Ok(data) => {
                        report.count = data.len();
                        run_cell(spec, data, eps, mode, &mut report).err()
                    }
                    Err(e) => Some(e.clone()),
                };
                rows.push(BenchRow { report, error });
            }
        }
    }

    writeln!(out, "{BENCH_HEADER}")?;
    for row in &rows {
        let ratio = baseline_ratio(row, &rows);
        writeln!(
            out,
            "{},{},{}",
            row.report.csv_row(),
            ratio.map_or(String::new(), |r| format!("{r:.4}")),
            csv_field(row.error.as_deref().unwrap_or("")),
        )?;
    }
    Ok(())
}

fn run_cell(
    spec: &BenchSpec,
    data: &Dataset,
    eps: f64,
    mode: JoinMode,
    report: &mut RunReport,
) -> std::result::Result<(), String> {
    let cfg = JoinConfig {
        eps,
        mode,
        include_self_pairs: true,
        buffer_capacity: spec.buffer,
        min_batches: spec.min_batches,
        workers: spec.workers,
    };
    let mut build_total = 0.0;
    let mut join_total = 0.0;
    for _ in 0..spec.trials {
        let start = Instant::now();
        let index = GridIndex::build(data, eps).map_err(|e| e.to_string())?;
        build_total += start.elapsed().as_secs_f64();

        let start = Instant::now();
        let mut sink = CountingSink::default();
        let stats = self_join(data, &index, &cfg, &mut sink).map_err(|e| e.to_string())?;
        join_total += start.elapsed().as_secs_f64();

        report.stats = stats;
        report.pairs = stats.pairs_emitted;
    }
    report.build_s = build_total / spec.trials as f64;
    report.join_s = join_total / spec.trials as f64;
    Ok(())
}

/// candidates_tested of a unicomp row divided by its matching baseline row.
fn baseline_ratio(row: &BenchRow, rows: &[BenchRow]) -> Option<f64> {
    if row.report.mode != JoinMode::Unicomp || row.error.is_some() {
        return None;
    }
    let baseline = rows.iter().find(|r| {
        r.report.mode == JoinMode::Baseline
            && r.error.is_none()
            && r.report.dims == row.report.dims
            && r.report.eps == row.report.eps
            && r.report.dataset == row.report.dataset
    })?;
    if baseline.report.stats.candidates_tested == 0 {
        return None;
    }
    Some(
        row.report.stats.candidates_tested as f64
            / baseline.report.stats.candidates_tested as f64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_spec() {
        let spec = parse_spec(
            "# sweep\nlabel = demo\ncount = 1000\ndims = 2,3\n\
             eps = 0.5, 1\nmodes = baseline,unicomp\ntrials = 2\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(spec.label, "demo");
        assert_eq!(spec.dims, vec![2, 3]);
        assert_eq!(spec.eps, vec![0.5, 1.0]);
        assert_eq!(spec.modes, vec![JoinMode::Baseline, JoinMode::Unicomp]);
        assert_eq!(spec.trials, 2);
        assert_eq!(spec.seed, 9);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_spec("dims = 2\neps = 1\n").is_err()); // no dataset
        assert!(parse_spec("count = 10\ndims = 2\n").is_err()); // no eps
        assert!(parse_spec("count = 10\ndims = 2\neps = 1\nbogus = 1\n").is_err());
        assert!(parse_spec("count = 10\ninput = a.csv\ndims = 2\neps = 1\n").is_err());
    }

    #[test]
    fn sweep_emits_one_row_per_cell_with_ratio() {
        let spec = parse_spec("count = 300\ndims = 2\neps = 5\ntrials = 2\nseed = 3\n").unwrap();
        let mut out = Vec::new();
        run_sweep(&spec, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], BENCH_HEADER);
        assert_eq!(lines.len(), 3); // header + baseline + unicomp
        let unicomp: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(unicomp[5], "unicomp");
        let ratio: f64 = unicomp[14].parse().unwrap();
        assert!(ratio > 0.0 && ratio < 1.0, "ratio {ratio}");
        assert_eq!(unicomp[15], "");
    }

    #[test]
    fn failed_cells_keep_their_row() {
        // 1-D join is unsupported: the cell fails but the sweep continues
        let spec =
            parse_spec("count = 10\ndims = 1,2\neps = 1\ntrials = 1\nmodes = baseline\n").unwrap();
        let mut out = Vec::new();
        run_sweep(&spec, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains("self-join supports 2 to 6 dimensions"));
        assert!(lines[2].ends_with(','));
    }
}
