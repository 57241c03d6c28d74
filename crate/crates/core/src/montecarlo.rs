//! Seeded, parallel delay sweep against a weaving target.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engagement::{compute_metrics, run_engagement, EngagementConfig, TerminationReason};
use crate::error::{Error, Result};
use crate::guidance::LosSource;
use crate::targets::{derive_seed, sample_phase, TargetKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub delays: Vec<f64>,
    pub samples_per_delay: usize,
    pub master_seed: u64,
    pub sources: Vec<LosSource>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delays: linspace(0.025, 0.35, 8),
            samples_per_delay: 25,
            master_seed: 0,
            sources: vec![LosSource::Delayed, LosSource::Predicted],
        }
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.delays.is_empty() {
            errs.push("sweep.delays must not be empty".to_string());
        }
        if !self.delays.iter().all(|d| *d > 0.0 && d.is_finite()) {
            errs.push("sweep.delays must all be > 0".to_string());
        }
        if !self.delays.windows(2).all(|w| w[1] > w[0]) {
            errs.push("sweep.delays must be strictly ascending".to_string());
        }
        if self.samples_per_delay == 0 {
            errs.push("sweep.samples_per_delay must be >= 1".to_string());
        }
        if self.sources.is_empty() {
            errs.push("sweep.sources must not be empty".to_string());
        }
        if self.sources.contains(&LosSource::True) {
            errs.push("sweep.sources may only contain delayed and predicted".to_string());
        }
        let mut seen = self.sources.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.sources.len() {
            errs.push("sweep.sources must not repeat".to_string());
        }
        errs
    }
}

/// One row of the flat per-run table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub delay: f64,
    pub source: LosSource,
    pub sample: usize,
    pub seed: u64,
    /// `None` when the engagement failed.
    pub miss: Option<f64>,
    pub rmse: Option<f64>,
    pub peak_accel: Option<f64>,
    pub termination: TerminationReason,
}

impl RunRow {
    pub fn failed(&self) -> bool {
        self.termination == TerminationReason::ObserverDivergence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub delay: f64,
    pub source: LosSource,
    pub mean_miss: f64,
    /// Population standard deviation.
    pub std_miss: f64,
    pub n: usize,
    pub failure_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub groups: Vec<GroupStats>,
    pub runs: Vec<RunRow>,
    pub master_seed: u64,
    pub std_kind: String,
    pub warnings: Vec<String>,
}

impl SweepSummary {
    pub fn group(&self, delay: f64, source: LosSource) -> Option<&GroupStats> {
        self.groups
            .iter()
            .find(|g| g.source == source && (g.delay - delay).abs() <= 1e-12)
    }

    pub fn total_failures(&self) -> usize {
        self.runs.iter().filter(|r| r.failed()).count()
    }
}

/// Mean and population standard deviation. `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Groups the per-run table by `(delay, source)`. Failed runs only count
/// towards `failure_count`; groups without a successful run are omitted with
/// a warning. Misses are summed in sample order, so the result does not
/// depend on the order of `runs`.
pub fn aggregate(runs: &[RunRow]) -> (Vec<GroupStats>, Vec<String>) {
    // (delay bits, source) -> (delay, [(sample, miss)], failures)
    type Group = (f64, Vec<(usize, f64)>, usize);
    let mut groups: BTreeMap<(u64, LosSource), Group> = BTreeMap::new();
    for r in runs {
        let entry = groups
            .entry((r.delay.to_bits(), r.source))
            .or_insert((r.delay, Vec::new(), 0));
        match r.miss {
            Some(m) if !r.failed() => entry.1.push((r.sample, m)),
            _ => entry.2 += 1,
        }
    }
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for ((_, source), (delay, mut samples, failures)) in groups {
        samples.sort_by_key(|&(i, _)| i);
        let misses: Vec<f64> = samples.into_iter().map(|(_, m)| m).collect();
        match mean_std(&misses) {
            Some((mean_miss, std_miss)) => out.push(GroupStats {
                delay,
                source,
                mean_miss,
                std_miss,
                n: misses.len(),
                failure_count: failures,
            }),
            None => warnings.push(format!(
                "group delay={delay} source={source} has no successful runs"
            )),
        }
    }
    out.sort_by(|a, b| a.delay.total_cmp(&b.delay).then(a.source.cmp(&b.source)));
    (out, warnings)
}

/// Engagement config of one work item: weaving target with a seeded phase,
/// seeker lag and observer horizon both equal to `delay`.
pub fn item_config(
    base: &EngagementConfig,
    delay: f64,
    source: LosSource,
    seed: u64,
) -> Result<EngagementConfig> {
    let mut c = base.clone().with_lag(delay)?.with_source(source);
    c.target.kind = TargetKind::Weaving;
    c.target.phase = sample_phase(seed);
    Ok(c)
}

fn run_item(base: &EngagementConfig, delay: f64, source: LosSource, sample: usize, seed: u64) -> RunRow {
    let outcome = item_config(base, delay, source, seed).and_then(|c| {
        let rec = run_engagement(&c)?;
        let m = compute_metrics(&rec, &c)?;
        Ok((rec, m))
    });
    match outcome {
        Ok((rec, m)) => {
            let failed = rec.termination_reason == Some(TerminationReason::ObserverDivergence);
            RunRow {
                delay,
                source,
                sample,
                seed,
                miss: (!failed).then_some(m.miss_distance),
                rmse: if source == LosSource::Predicted {
                    m.rmse_predicted
                } else {
                    m.rmse_delayed
                },
                peak_accel: Some(m.peak_accel_cmd),
                termination: m.termination_reason,
            }
        }
        Err(e) => {
            log::warn!("sweep item delay={delay} source={source} sample={sample}: {e}");
            RunRow {
                delay,
                source,
                sample,
                seed,
                miss: None,
                rmse: None,
                peak_accel: None,
                termination: TerminationReason::ObserverDivergence,
            }
        }
    }
}

/// Runs every `(delay, source, sample)` item on a pool of `jobs` threads
/// (`None` for the machine's parallelism). The result does not depend on
/// the pool width or the execution order.
pub fn run_sweep(
    base: &EngagementConfig,
    sweep: &SweepConfig,
    jobs: Option<usize>,
) -> Result<SweepSummary> {
    let mut errs = sweep.validate();
    errs.extend(base.validate());
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }

    let mut items = Vec::new();
    for (di, &delay) in sweep.delays.iter().enumerate() {
        for &source in &sweep.sources {
            for sample in 0..sweep.samples_per_delay {
                items.push((di, delay, source, sample));
            }
        }
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let mut runs: Vec<(usize, RunRow)> = pool.install(|| {
        items
            .par_iter()
            .map(|&(di, delay, source, sample)| {
                let seed = derive_seed(sweep.master_seed, sample as u64);
                (di, run_item(base, delay, source, sample, seed))
            })
            .collect()
    });
    runs.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.source.cmp(&b.1.source))
            .then(a.1.sample.cmp(&b.1.sample))
    });
    let runs: Vec<RunRow> = runs.into_iter().map(|(_, r)| r).collect();
    let (groups, warnings) = aggregate(&runs);
    Ok(SweepSummary {
        groups,
        runs,
        master_seed: sweep.master_seed,
        std_kind: "population".to_string(),
        warnings,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const RUNS_COLUMNS: [&str; 8] = [
    "delay",
    "source",
    "sample",
    "seed",
    "miss",
    "rmse",
    "peak_accel",
    "termination",
];

pub fn write_runs_csv<W: Write>(summary: &SweepSummary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RUNS_COLUMNS)?;
    for r in &summary.runs {
        w.write_record([
            r.delay.to_string(),
            r.source.to_string(),
            r.sample.to_string(),
            r.seed.to_string(),
            opt(r.miss),
            opt(r.rmse),
            opt(r.peak_accel),
            r.termination.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wide table for error-bar plots: one row per delay, and for each source
/// the columns `<source>_mean`, `<source>_lo` (mean - std), `<source>_hi`.
pub fn write_plot_csv<W: Write>(summary: &SweepSummary, writer: W) -> Result<()> {
    let mut sources: Vec<LosSource> = summary.groups.iter().map(|g| g.source).collect();
    sources.sort();
    sources.dedup();
    let mut delays: Vec<f64> = summary.groups.iter().map(|g| g.delay).collect();
    delays.sort_by(f64::total_cmp);
    delays.dedup();

    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["delay".to_string()];
    for s in &sources {
        header.extend(["mean", "lo", "hi"].iter().map(|k| format!("{s}_{k}")));
    }
    w.write_record(&header)?;
    for d in delays {
        let mut row = vec![d.to_string()];
        for &s in &sources {
            match summary.group(d, s) {
                Some(g) => {
                    row.push(g.mean_miss.to_string());
                    row.push((g.mean_miss - g.std_miss).to_string());
                    row.push((g.mean_miss + g.std_miss).to_string());
                }
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
