//! Experiment harness: reproduce the reference md5-trunc run, validate the
//! column-count model by Monte Carlo, and compare methods at matched budgets.
//! Reports are flat key/value documents (serialize to JSON) plus per-target
//! CSV; both are deterministic given seeds.

use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;

use crate::baselines::{
    batch_search_baseline_expected, build_baseline, reference_coefficients, BaselineConfig,
    BaselineMethod, ReferenceRow,
};
use crate::func::mix64;
use crate::offline::{build_all_tables, generate_start_points, StartPointScheme};
use crate::online::{batch_search_expected, SearchOptions, SearchOutcome};
use crate::params::{CounterSet, Point, SpaceParams};
use crate::theory::TheoryInputs;
use crate::{Error, Result};

/// Report schema version; bump on any breaking field change.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Salt mixed into the target seed so target streams never collide with
/// start-point streams.
const TARGET_SALT: u64 = 0x7461_7267_6574_0000; // "target\0\0"

/// Deterministic `(pre-image, target)` pairs: uniform pre-images
/// `x_j = mix64(mix64(target_seed ^ TARGET_SALT) ^ j) mod N` and their
/// images `y_j = f(x_j)`.
pub fn generate_target_pairs(
    params: &SpaceParams,
    n_targets: u64,
    target_seed: u64,
) -> Vec<(Point, Point)> {
    let base = mix64(target_seed ^ TARGET_SALT);
    let mut scratch = CounterSet::default();
    (0..n_targets)
        .map(|j| {
            let x = Point(mix64(base ^ j) & params.mask());
            (x, params.evaluate(x, &mut scratch))
        })
        .collect()
}

/// The targets of [`generate_target_pairs`] without their pre-images.
pub fn generate_targets(params: &SpaceParams, n_targets: u64, target_seed: u64) -> Vec<Point> {
    generate_target_pairs(params, n_targets, target_seed)
        .into_iter()
        .map(|(_, y)| y)
        .collect()
}

/// The five quantities compared between measurement and prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SideMetrics {
    pub precomp_invocations: f64,
    pub chains_stored: f64,
    pub success_rate: f64,
    pub mean_online_invocations: f64,
    pub mean_false_alarms: f64,
}

impl SideMetrics {
    fn relative_to(&self, predicted: &SideMetrics) -> SideMetrics {
        let rel = |m: f64, p: f64| (m - p) / p;
        SideMetrics {
            precomp_invocations: rel(self.precomp_invocations, predicted.precomp_invocations),
            chains_stored: rel(self.chains_stored, predicted.chains_stored),
            success_rate: rel(self.success_rate, predicted.success_rate),
            mean_online_invocations: rel(
                self.mean_online_invocations,
                predicted.mean_online_invocations,
            ),
            mean_false_alarms: rel(self.mean_false_alarms, predicted.mean_false_alarms),
        }
    }
}

/// One row of the per-target CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TargetRecord {
    pub target: u64,
    pub found: bool,
    pub invocations: u64,
    pub alarms: u64,
    pub false_alarms: u64,
    pub iteration_found: Option<u32>,
}

impl TargetRecord {
    fn from_outcome(target: Point, outcome: &SearchOutcome) -> Self {
        TargetRecord {
            target: target.0,
            found: outcome.is_success(),
            invocations: outcome.counters.f_invocations,
            alarms: outcome.counters.alarms,
            false_alarms: outcome.counters.false_alarms,
            iteration_found: outcome.found_at.map(|f| f.iteration),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: SpaceParams,
    pub n_targets: u64,
    pub target_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub measured: SideMetrics,
    pub predicted: SideMetrics,
    pub relative_deltas: SideMetrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_target: Option<Vec<TargetRecord>>,
}

/// Build the configured tables, search `n_targets` deterministic targets,
/// and fill both the measured and the predicted side.
pub fn run_experiment(
    params: &SpaceParams,
    n_targets: u64,
    target_seed: u64,
) -> Result<ExperimentReport> {
    if n_targets == 0 {
        return Err(Error::invalid("n_targets", "need at least one target"));
    }
    let tables = build_all_tables(params)?;
    // measurement semantics: each search must recover its own pre-image, so
    // the measured rates line up with what the analytic model prices
    let pairs = generate_target_pairs(params, n_targets, target_seed);
    let (outcomes, stats) = batch_search_expected(&pairs, &tables, SearchOptions::default());

    let measured = SideMetrics {
        precomp_invocations: tables.iter().map(|t| t.precomp_invocations()).sum::<u64>() as f64,
        chains_stored: tables.iter().map(|t| t.m0()).sum::<u64>() as f64,
        success_rate: stats.success_rate,
        mean_online_invocations: stats.mean_invocations,
        mean_false_alarms: stats.mean_false_alarms,
    };

    let theory = TheoryInputs::<f64>::from_params(params);
    let l = params.table_count() as f64;
    let m0_pred = theory.m0_expected();
    let predicted = SideMetrics {
        precomp_invocations: m0_pred * params.t() as f64 * l,
        chains_stored: m0_pred * l,
        success_rate: theory.success_prob(),
        mean_online_invocations: theory.expected_online_time(),
        mean_false_alarms: theory.expected_total_false_alarms(),
    };

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: ExperimentConfig {
            params: params.clone(),
            n_targets,
            target_seed,
        },
        measured,
        relative_deltas: measured.relative_to(&predicted),
        predicted,
        per_target: Some(
            pairs
                .iter()
                .zip(&outcomes)
                .map(|(&(_, y), o)| TargetRecord::from_outcome(y, o))
                .collect(),
        ),
    })
}

/// Write the per-target CSV (`target,found,invocations,alarms,false_alarms,
/// iteration_found`), targets as lowercase hex of minimal width.
pub fn write_per_target_csv<W: Write>(
    mut w: W,
    records: &[TargetRecord],
    n_bits: u32,
) -> std::io::Result<()> {
    let width = (n_bits as usize).div_ceil(4);
    writeln!(
        w,
        "target,found,invocations,alarms,false_alarms,iteration_found"
    )?;
    for r in records {
        writeln!(
            w,
            "{:0width$x},{},{},{},{},{}",
            r.target,
            r.found,
            r.invocations,
            r.alarms,
            r.false_alarms,
            r.iteration_found.map_or(String::new(), |i| i.to_string()),
        )?;
    }
    Ok(())
}

/// Measured vs predicted distinct counts at one matrix column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnValidation {
    pub column: u32,
    /// Mean distinct count over the `l` tables before the discard rule.
    pub measured_before: f64,
    pub predicted_before: f64,
    pub rel_err_before: f64,
    /// Mean distinct count over stored chains only.
    pub measured_after: f64,
    /// Absent for columns past the chain-length bound.
    pub predicted_after: Option<f64>,
    pub rel_err_after: Option<f64>,
}

/// Instrumented build that counts distinct values at the sampled columns of
/// every table, before and after the discard rule, and compares them with
/// the analytic column counts. Requires `N <= 2^22` (per-column sets are
/// held in memory).
pub fn validate_column_counts(
    params: &SpaceParams,
    columns: &[u32],
) -> Result<Vec<ColumnValidation>> {
    if params.n_bits() > 22 {
        return Err(Error::invalid(
            "n_bits",
            "column validation needs N <= 2^22",
        ));
    }
    if columns.is_empty() {
        return Err(Error::invalid("columns", "need at least one column"));
    }
    let max_col = *columns.iter().max().unwrap();
    let walk_limit = max_col.max(params.t_hat());
    let l = params.table_count();

    // per-column distinct sets, summed over tables
    let mut before_counts = vec![0u64; columns.len()];
    let mut after_counts = vec![0u64; columns.len()];

    for table_index in 0..l {
        let sps = generate_start_points(params, table_index, StartPointScheme::default())?;
        let mut before: Vec<HashSet<u64>> = columns.iter().map(|_| HashSet::new()).collect();
        let mut after: Vec<HashSet<u64>> = columns.iter().map(|_| HashSet::new()).collect();
        let mut scratch = CounterSet::default();
        let mut path: Vec<u64> = Vec::with_capacity(walk_limit as usize + 1);
        for &sp in &sps {
            path.clear();
            path.push(sp.0);
            let mut x = sp;
            let mut dp_at: Option<u32> = None;
            for col in 1..=walk_limit {
                x = params.step(table_index, col, x, &mut scratch);
                path.push(x.0);
                if params.is_dp(x) {
                    dp_at = Some(col);
                    break;
                }
            }
            // column j holds the value after j applications; a chain occupies
            // columns 0..=len and is stored only when len <= t_hat
            for (slot, &col) in columns.iter().enumerate() {
                let alive = dp_at.map_or(path.len() > col as usize, |len| len >= col);
                if alive && (col as usize) < path.len() {
                    before[slot].insert(path[col as usize]);
                    if dp_at.is_some_and(|len| len <= params.t_hat()) {
                        after[slot].insert(path[col as usize]);
                    }
                }
            }
        }
        for slot in 0..columns.len() {
            before_counts[slot] += before[slot].len() as u64;
            after_counts[slot] += after[slot].len() as u64;
        }
    }

    let theory = TheoryInputs::<f64>::from_params(params);
    let ct = params.c() * params.t() as f64;
    Ok(columns
        .iter()
        .enumerate()
        .map(|(slot, &col)| {
            let measured_before = before_counts[slot] as f64 / l as f64;
            let measured_after = after_counts[slot] as f64 / l as f64;
            let predicted_before = theory.m_tilde(col as f64);
            let predicted_after = ((col as f64) <= ct).then(|| theory.m_col(col as f64));
            ColumnValidation {
                column: col,
                measured_before,
                predicted_before,
                rel_err_before: (measured_before - predicted_before) / predicted_before,
                measured_after,
                predicted_after,
                rel_err_after: predicted_after.map(|p| {
                    if p == 0.0 {
                        0.0
                    } else {
                        (measured_after - p) / p
                    }
                }),
            }
        })
        .collect())
}

/// One method entry for a comparison run.
#[derive(Clone, Debug, PartialEq)]
pub enum ComparisonEntry {
    RainbowDp(SpaceParams),
    Baseline(BaselineConfig),
}

impl ComparisonEntry {
    pub fn label(&self) -> &'static str {
        match self {
            ComparisonEntry::RainbowDp(_) => "rainbow-dp",
            ComparisonEntry::Baseline(c) => c.method.label(),
        }
    }

    fn space(&self) -> (u32, crate::func::OneWayFn) {
        match self {
            ComparisonEntry::RainbowDp(p) => (p.n_bits(), p.function()),
            ComparisonEntry::Baseline(c) => (c.n_bits, c.function),
        }
    }
}

/// Measured row of a method comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: String,
    pub memory_records: u64,
    pub precomp_invocations: u64,
    pub success_rate: f64,
    pub mean_online_invocations: f64,
    pub mean_false_alarms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub n_targets: u64,
    pub target_seed: u64,
    pub rows: Vec<ComparisonRow>,
    /// Published optimal coefficients, for reference alongside measurement.
    pub reference: Vec<ReferenceRow>,
}

/// Run matched-budget experiments over the requested methods. All entries
/// must share the same space and one-way function; the same target stream is
/// searched by every method.
pub fn compare_methods(
    entries: &[ComparisonEntry],
    n_targets: u64,
    target_seed: u64,
) -> Result<ComparisonReport> {
    if entries.is_empty() {
        return Err(Error::invalid("methods", "need at least one method"));
    }
    if n_targets == 0 {
        return Err(Error::invalid("n_targets", "need at least one target"));
    }
    let space = entries[0].space();
    if entries.iter().any(|e| e.space() != space) {
        return Err(Error::invalid(
            "methods",
            "all methods must share n_bits and the one-way function",
        ));
    }

    let mut rows = Vec::with_capacity(entries.len());
    for entry in entries {
        let row = match entry {
            ComparisonEntry::RainbowDp(params) => {
                let tables = build_all_tables(params)?;
                let pairs = generate_target_pairs(params, n_targets, target_seed);
                let (_, stats) = batch_search_expected(&pairs, &tables, SearchOptions::default());
                ComparisonRow {
                    method: entry.label().to_string(),
                    memory_records: tables.iter().map(|t| t.m0()).sum(),
                    precomp_invocations: tables.iter().map(|t| t.precomp_invocations()).sum(),
                    success_rate: stats.success_rate,
                    mean_online_invocations: stats.mean_invocations,
                    mean_false_alarms: stats.mean_false_alarms,
                }
            }
            ComparisonEntry::Baseline(config) => {
                let set = build_baseline(config)?;
                // identical target stream: same mixing, same function
                let pairs = baseline_target_pairs(config, n_targets, target_seed);
                let (_, stats) = batch_search_baseline_expected(&pairs, &set);
                ComparisonRow {
                    method: entry.label().to_string(),
                    memory_records: set.memory_records(),
                    precomp_invocations: set.precomp_invocations(),
                    success_rate: stats.success_rate,
                    mean_online_invocations: stats.mean_invocations,
                    mean_false_alarms: stats.mean_false_alarms,
                }
            }
        };
        rows.push(row);
    }
    Ok(ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n_targets,
        target_seed,
        rows,
        reference: reference_coefficients().to_vec(),
    })
}

fn baseline_target_pairs(
    config: &BaselineConfig,
    n_targets: u64,
    target_seed: u64,
) -> Vec<(Point, Point)> {
    let base = mix64(target_seed ^ TARGET_SALT);
    let mask = config.n() - 1;
    (0..n_targets)
        .map(|j| {
            let x = mix64(base ^ j) & mask;
            (Point(x), Point(config.function.eval_raw(x, mask)))
        })
        .collect()
}

/// Matched-budget comparison preset: rainbow-DP at its tabulated 80%-success
/// optimum `(l = 2, D_pc = 3, c = 2.04)` against a classic rainbow table of
/// equal record count, calibrated to the same predicted success rate.
pub fn matched_budget_preset(
    n_bits: u32,
    k_bits: u32,
    function: crate::func::OneWayFn,
    seed: u64,
) -> Result<Vec<ComparisonEntry>> {
    let n = 1u64 << n_bits;
    let t = 1u64 << k_bits;
    let (l, d_pc, c) = (2u16, 3.0f64, 2.04f64);
    let r = d_pc / (l as f64 * (1.0 - (-c).exp()));
    let m0_tilde = (r * n as f64 / t as f64).round() as u64;
    let params = SpaceParams::new(n_bits, k_bits, c, l, m0_tilde, seed, function)?;

    let theory = TheoryInputs::<f64>::from_params(&params);
    let memory = (theory.m0_expected() * l as f64).round() as u64;
    let target_p = theory.success_prob();
    let rainbow_t = calibrate_rainbow_t(n, memory, target_p);
    let rainbow = BaselineConfig::new(
        BaselineMethod::Rainbow,
        memory,
        rainbow_t,
        1,
        n_bits,
        function,
        seed,
    )?;

    Ok(vec![
        ComparisonEntry::RainbowDp(params),
        ComparisonEntry::Baseline(rainbow),
    ])
}

/// Smallest chain length whose predicted classic-rainbow success reaches
/// `target_p` for `m` chains in a space of size `n`, by the standard
/// column-count recurrence `m_{i+1} = N(1 - exp(-m_i/N))`.
pub fn calibrate_rainbow_t(n: u64, m: u64, target_p: f64) -> u32 {
    let n = n as f64;
    let mut mi = m as f64;
    let mut log_fail = 0.0f64;
    for t in 1..=u16::MAX as u32 {
        log_fail += (-mi / n).ln_1p().min(0.0);
        mi = n * (1.0 - (-mi / n).exp());
        if 1.0 - log_fail.exp() >= target_p {
            return t;
        }
    }
    u16::MAX as u32
}
