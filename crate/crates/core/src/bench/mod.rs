//! Forward-pass timing and peak-memory scaling across sequence lengths.

mod csv;
mod slope;

pub use self::csv::{parse_csv, strip_timing, summary_rows, write_csv, CsvRow, HEADER};
pub use slope::{fit_slope, SlopeFit};

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    attention_block, AttentionKind, AttentionMode, FlaConfig, FlaParams, FlaWeights,
};
use crate::autodiff::Eval;
use crate::error::{Error, Result};
use crate::tensor::{memory, Tensor};

/// One timing/memory measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub mode: AttentionMode,
    pub n: usize,
    pub d: usize,
    pub heads: usize,
    pub reps: usize,
    pub median_seconds: f64,
    /// Live-element high-water mark during one measured forward pass.
    pub peak_elements: usize,
}

/// Result of one (mode, N) cell of the suite.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Ok(BenchRecord),
    Failed {
        mode: AttentionMode,
        n: usize,
        d: usize,
        heads: usize,
        reps: usize,
        reason: String,
    },
}

impl Cell {
    pub fn mode(&self) -> AttentionMode {
        match self {
            Cell::Ok(r) => r.mode,
            Cell::Failed { mode, .. } => *mode,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Cell::Ok(r) => r.n,
            Cell::Failed { n, .. } => *n,
        }
    }

    pub fn record(&self) -> Option<&BenchRecord> {
        match self {
            Cell::Ok(r) => Some(r),
            Cell::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub modes: Vec<AttentionMode>,
    pub lengths: Vec<usize>,
    pub dim: usize,
    pub heads: usize,
    pub reps: usize,
    pub seed: u64,
    /// Live-element cap while a cell runs; cells that would exceed it are
    /// recorded as out-of-memory failures.
    pub memory_limit: Option<usize>,
}

/// Default cap: 300M elements, 2.4 GB of `f64`.
pub const DEFAULT_MEMORY_LIMIT: usize = 300_000_000;

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            modes: AttentionKind::ALL
                .iter()
                .map(|&k| AttentionMode::gated(k))
                .collect(),
            lengths: (0..7).map(|i| 1024 << i).collect(),
            dim: 32,
            heads: 4,
            reps: 10,
            seed: 7,
            memory_limit: Some(DEFAULT_MEMORY_LIMIT),
        }
    }
}

/// Outcome of [`run_suite`]: one cell per (mode, N) plus a fit per mode.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub cells: Vec<Cell>,
    /// `None` when fewer than three cells of that mode succeeded.
    pub slopes: Vec<(AttentionMode, Option<SlopeFit>)>,
}

impl SuiteResult {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| matches!(c, Cell::Ok(_)))
    }

    pub fn record(&self, kind: AttentionKind, n: usize) -> Option<&BenchRecord> {
        self.cells
            .iter()
            .filter_map(Cell::record)
            .find(|r| r.mode.kind == kind && r.n == n)
    }

    pub fn cell(&self, kind: AttentionKind, n: usize) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.mode().kind == kind && c.n() == n)
    }

    pub fn slope(&self, kind: AttentionKind) -> Option<&SlopeFit> {
        self.slopes
            .iter()
            .find(|(m, _)| m.kind == kind)
            .and_then(|(_, s)| s.as_ref())
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Times one forward pass of the attention block in `mode` on a random
/// `N×d` input: one warmup run, then the median of `reps` runs. Peak
/// memory is the live-element high-water mark of a measured run,
/// including the input and the block weights.
pub fn time_forward(
    mode: AttentionMode,
    n: usize,
    d: usize,
    heads: usize,
    reps: usize,
    seed: u64,
) -> Result<BenchRecord> {
    if reps < 3 {
        return Err(Error::Config(format!(
            "at least 3 repetitions are required, got {reps}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("sequence length must be positive".into()));
    }
    let config = FlaConfig {
        gated: mode.gated,
        ..FlaConfig::new(d, heads)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = FlaParams::init(config, &mut rng)?;
    let x = Tensor::randn(&[n, d], 1.0, &mut rng);

    let run = || -> Result<Tensor> {
        let mut g = Eval;
        let w = FlaWeights::bind(&mut g, &params, "bench")?;
        attention_block(&mut g, &x, &w, &params.config, mode.kind)
    };

    drop(run()?);
    let mut times = Vec::with_capacity(reps);
    let mut peak = 0;
    for _ in 0..reps {
        memory::reset_peak();
        let start = Instant::now();
        let out = run()?;
        let elapsed = start.elapsed().as_secs_f64();
        drop(out);
        peak = peak.max(memory::peak_elements());
        times.push(elapsed);
    }
    Ok(BenchRecord {
        mode,
        n,
        d,
        heads,
        reps,
        median_seconds: median(times).max(f64::MIN_POSITIVE),
        peak_elements: peak,
    })
}

fn failure_reason(e: &Error) -> String {
    match e {
        Error::OutOfMemory { .. } => "out-of-memory".to_string(),
        other => other.to_string().replace([',', '\n'], ";"),
    }
}

/// Runs every (mode, N) cell sequentially, then fits a time exponent per
/// mode over its successful cells. Failed cells are recorded and the suite
/// continues. `on_cell` sees each cell as it completes.
pub fn run_suite(config: &BenchConfig, mut on_cell: impl FnMut(&Cell)) -> Result<SuiteResult> {
    if config.reps < 3 {
        return Err(Error::Config(format!(
            "at least 3 repetitions are required, got {}",
            config.reps
        )));
    }
    FlaConfig::new(config.dim, config.heads).validate()?;
    let previous_limit = memory::limit();
    let mut cells = Vec::new();
    for &mode in &config.modes {
        for &n in &config.lengths {
            memory::set_limit(config.memory_limit.map(|l| l + memory::live_elements()));
            let cell =
                match time_forward(mode, n, config.dim, config.heads, config.reps, config.seed) {
                    Ok(r) => Cell::Ok(r),
                    Err(e) => Cell::Failed {
                        mode,
                        n,
                        d: config.dim,
                        heads: config.heads,
                        reps: config.reps,
                        reason: failure_reason(&e),
                    },
                };
            memory::set_limit(previous_limit);
            on_cell(&cell);
            cells.push(cell);
        }
    }
    let slopes = config
        .modes
        .iter()
        .map(|&mode| {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter_map(Cell::record)
                .filter(|r| r.mode == mode)
                .map(|r| (r.n as f64, r.median_seconds))
                .collect();
            (mode, fit_slope(&points).ok())
        })
        .collect();
    Ok(SuiteResult { cells, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_reps_is_a_config_error() {
        let mode = AttentionMode::gated(AttentionKind::Fla);
        assert!(matches!(
            time_forward(mode, 64, 8, 2, 2, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn median_of_odd_and_even_counts() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn default_grid() {
        let c = BenchConfig::default();
        assert_eq!(c.lengths, vec![1024, 2048, 4096, 8192, 16384, 32768, 65536]);
        assert_eq!(c.modes.len(), 3);
        assert_eq!((c.dim, c.heads, c.reps), (32, 4, 10));
    }
}
