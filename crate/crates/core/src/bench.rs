//! Benchmark harness: repeated sampler runs per instance, error metrics
//! against the best-known cost, aggregate statistics and persisted artifacts.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decode::decode;
use crate::error::{Error, Result};
use crate::instance::{euclid_distance_matrix, Instance};
use crate::model::build_model;
use crate::qubo::{compile, PenaltyConfig};
use crate::remote::{sample_remote, RemoteConfig};
use crate::sampler::{sample_brute_force, sample_sa, SampleSet, SamplerParams, TimeSource};

/// Relative deviation of one result from the reference cost.
pub fn absolute_error(e_qa: i64, e_best: i64) -> Result<f64> {
    if e_best <= 0 {
        return Err(Error::Domain(format!("reference cost must be positive, got {e_best}")));
    }
    Ok((e_qa - e_best).abs() as f64 / e_best as f64)
}

/// Mean absolute percentage error over a result sequence.
pub fn mape(energies: &[i64], e_best: i64) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::Domain("MAPE of an empty sequence".into()));
    }
    let mut sum = 0.0;
    for &e in energies {
        sum += absolute_error(e, e_best)?;
    }
    Ok(sum / energies.len() as f64)
}

/// Equal-width bins over `[0, max]`; a value lands in `(left, right]` except
/// zero, which lands in the first bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; empty for an empty input.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(errors: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    if errors.is_empty() {
        return Ok(Histogram { edges: Vec::new(), counts: Vec::new() });
    }
    let max = errors.iter().fold(0.0f64, |m, &e| m.max(e));
    let width = max / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &e in errors {
        let idx = if width == 0.0 {
            0
        } else {
            ((e / width).ceil() as isize - 1).clamp(0, bins as isize - 1) as usize
        };
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Which sampler a benchmark drives.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerChoice {
    Sa(SamplerParams),
    BruteForce,
    Remote(RemoteConfig),
}

impl SamplerChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerChoice::Sa(_) => "sa",
            SamplerChoice::BruteForce => "brute",
            SamplerChoice::Remote(_) => "remote",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// `None` uses the instance-derived default multipliers.
    pub penalties: Option<PenaltyConfig>,
    pub sampler: SamplerChoice,
    pub runs: usize,
    pub seed: u64,
    /// Histogram bins for the error density output.
    pub bins: usize,
    /// Overrides the bundled best-known cost.
    pub best_known: Option<i64>,
    /// Persist local wall-clock times. Off by default: wall time is volatile
    /// and would break the byte-for-byte determinism of seeded artifacts.
    /// Service-reported times are data and are always persisted.
    pub record_wall_time: bool,
}

impl BenchConfig {
    pub fn new(sampler: SamplerChoice, runs: usize, seed: u64) -> Self {
        BenchConfig {
            penalties: None,
            sampler,
            runs,
            seed,
            bins: 10,
            best_known: None,
            record_wall_time: false,
        }
    }
}

/// Outcome of one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    /// Best feasible decoded cost; absent when the run found nothing feasible.
    pub energy: Option<i64>,
    pub feasible: bool,
    pub ae: Option<f64>,
    pub cumulative_mape: Option<f64>,
    pub time_us: Option<u64>,
    pub time_source: TimeSource,
    /// Best feasible assignment as a '0'/'1' string in ledger order.
    pub assignment: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub best: i64,
    pub worst: i64,
    pub mean: f64,
    /// Population standard deviation of the feasible costs.
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub instance: String,
    pub e_best: i64,
    pub sampler: String,
    pub seed: u64,
    pub runs: usize,
    pub records: Vec<RunRecord>,
    /// Running MAPE after each feasible run.
    pub mape_curve: Vec<f64>,
    pub aggregates: Option<Aggregates>,
    pub feasibility_rate: f64,
    pub histogram: Histogram,
}

impl BenchReport {
    /// Final MAPE, when any run was feasible.
    pub fn mape(&self) -> Option<f64> {
        self.mape_curve.last().copied()
    }

    pub fn min_time_us(&self) -> Option<u64> {
        self.records.iter().filter_map(|r| r.time_us).min()
    }
}

fn derive_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add((run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Execute the benchmark protocol: `runs` independent sampler invocations,
/// each scored by its best feasible sample (validated by decoding), folded
/// into MAPE, aggregates, feasibility rate and an error histogram.
///
/// Sampler failures are logged and scored as infeasible runs, so partial
/// results never abort the protocol.
pub fn run_benchmark(instance: &Instance, config: &BenchConfig) -> Result<BenchReport> {
    if config.runs == 0 {
        return Err(Error::Domain("benchmark needs at least one run".into()));
    }
    let e_best = config
        .best_known
        .or(instance.best_known)
        .ok_or_else(|| Error::Domain(format!("no reference cost known for {}", instance.name)))?;
    if e_best <= 0 {
        return Err(Error::Domain(format!("reference cost must be positive, got {e_best}")));
    }

    let distances = euclid_distance_matrix(instance);
    let (model, map) = build_model(instance, &distances)?;
    let penalties = config
        .penalties
        .clone()
        .unwrap_or_else(|| PenaltyConfig::default_for(distances.max_cost(), instance.n_customers));
    let qubo = compile(&model, &penalties)?;

    struct RawRun {
        energy: Option<i64>,
        assignment: Option<String>,
        time_us: Option<u64>,
        time_source: TimeSource,
    }

    let sample_one = |run: usize| -> RawRun {
        let set: Result<SampleSet> = match &config.sampler {
            SamplerChoice::Sa(params) => {
                let mut params = params.clone();
                params.seed = derive_seed(config.seed, run);
                sample_sa(&qubo, &params)
            }
            SamplerChoice::BruteForce => sample_brute_force(&qubo),
            SamplerChoice::Remote(remote) => sample_remote(&qubo, remote),
        };
        let set = match set {
            Ok(set) => set,
            Err(e) => {
                log::error!("run {run}: sampler failed: {e}");
                return RawRun {
                    energy: None,
                    assignment: None,
                    time_us: None,
                    time_source: TimeSource::Wall,
                };
            }
        };
        let mut best: Option<(i64, String)> = None;
        for sample in &set.samples {
            if let Ok(routes) = decode(&sample.bits, &map, instance, &distances) {
                if best.as_ref().map_or(true, |(c, _)| routes.total_cost < *c) {
                    best = Some((routes.total_cost, sample.bitstring()));
                }
            }
        }
        let time_us = match set.time_source {
            TimeSource::Service => set.service_us,
            TimeSource::Wall if config.record_wall_time => {
                Some(set.samples.iter().map(|s| s.time_us).sum())
            }
            TimeSource::Wall => None,
        };
        let (energy, assignment) = match best {
            Some((c, a)) => (Some(c), Some(a)),
            None => (None, None),
        };
        RawRun { energy, assignment, time_us, time_source: set.time_source }
    };

    let raw: Vec<RawRun> = (1..=config.runs).into_par_iter().map(sample_one).collect();

    let mut records = Vec::with_capacity(config.runs);
    let mut mape_curve = Vec::new();
    let mut feasible_costs: Vec<i64> = Vec::new();
    let mut ae_sum = 0.0;
    for (idx, run) in raw.into_iter().enumerate() {
        let (ae, cumulative) = match run.energy {
            Some(e) => {
                let ae = absolute_error(e, e_best)?;
                feasible_costs.push(e);
                ae_sum += ae;
                let cum = ae_sum / feasible_costs.len() as f64;
                mape_curve.push(cum);
                (Some(ae), Some(cum))
            }
            None => (None, None),
        };
        records.push(RunRecord {
            run: idx + 1,
            energy: run.energy,
            feasible: run.energy.is_some(),
            ae,
            cumulative_mape: cumulative,
            time_us: run.time_us,
            time_source: run.time_source,
            assignment: run.assignment,
        });
    }

    let aggregates = if feasible_costs.is_empty() {
        None
    } else {
        let m = feasible_costs.len() as f64;
        let mean = feasible_costs.iter().sum::<i64>() as f64 / m;
        let var = feasible_costs
            .iter()
            .map(|&e| (e as f64 - mean).powi(2))
            .sum::<f64>()
            / m;
        Some(Aggregates {
            best: *feasible_costs.iter().min().expect("non-empty"),
            worst: *feasible_costs.iter().max().expect("non-empty"),
            mean,
            stddev: var.sqrt(),
        })
    };

    let aes: Vec<f64> = records.iter().filter_map(|r| r.ae).collect();
    let histogram = histogram(&aes, config.bins)?;

    Ok(BenchReport {
        instance: instance.name.clone(),
        e_best,
        sampler: config.sampler.name().to_string(),
        seed: config.seed,
        runs: config.runs,
        records,
        mape_curve,
        aggregates,
        feasibility_rate: feasible_costs.len() as f64 / config.runs as f64,
        histogram,
    })
}

#[derive(Serialize)]
struct RunLogHeader<'a> {
    instance: &'a str,
    e_best: i64,
    sampler: &'a str,
    seed: u64,
    runs: usize,
}

/// JSON-lines run log: one metadata line, then one line per run.
pub fn write_runlog(report: &BenchReport, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = RunLogHeader {
        instance: &report.instance,
        e_best: report.e_best,
        sampler: &report.sampler,
        seed: report.seed,
        runs: report.runs,
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for record in &report.records {
        writeln!(out, "{}", serde_json::to_string(record)?)?;
    }
    Ok(())
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// CSV summary: run, energy, feasible, ae, cumulative_mape, time_us.
pub fn write_summary_csv(report: &BenchReport, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "run,energy,feasible,ae,cumulative_mape,time_us")?;
    for r in &report.records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.run,
            fmt_opt(&r.energy),
            r.feasible,
            fmt_opt(&r.ae),
            fmt_opt(&r.cumulative_mape),
            fmt_opt(&r.time_us),
        )?;
    }
    Ok(())
}

/// CSV histogram: bin_left, bin_right, count.
pub fn write_histogram_csv(report: &BenchReport, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "bin_left,bin_right,count")?;
    for (k, &count) in report.histogram.counts.iter().enumerate() {
        writeln!(out, "{},{},{}", report.histogram.edges[k], report.histogram.edges[k + 1], count)?;
    }
    Ok(())
}
