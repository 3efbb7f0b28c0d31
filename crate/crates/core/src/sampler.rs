//! Classical samplers over the common QUBO contract: simulated annealing as
//! the workhorse and exhaustive search as the small-problem oracle.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::QuboModel;

/// Largest dimension [`brute_force`] will accept.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Annealing schedule and restart parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Independent restarts; each yields one sample.
    pub num_reads: usize,
    /// Sweeps per read; one sweep is `dim` single-bit flip attempts.
    pub sweeps: usize,
    /// Starting temperature. `None` picks max |coefficient| of the QUBO.
    pub t_initial: Option<f64>,
    /// Floor temperature of the geometric schedule.
    pub t_final: f64,
    /// Geometric cooling ratio, in (0, 1).
    pub ratio: f64,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            num_reads: 10,
            sweeps: 10_000,
            t_initial: None,
            t_final: 0.01,
            ratio: 0.97,
            seed: 42,
        }
    }
}

impl SamplerParams {
    fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::Domain("num_reads must be at least 1".into()));
        }
        if let Some(t0) = self.t_initial {
            if !(t0 > 0.0) || t0 < self.t_final {
                return Err(Error::Domain(format!(
                    "initial temperature {t0} must be positive and >= final {}",
                    self.t_final
                )));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Domain("final temperature must be positive".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Domain(format!("cooling ratio {} outside (0, 1)", self.ratio)));
        }
        Ok(())
    }
}

/// One assignment with its (recomputed) energy and the sampler-reported time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub time_us: u64,
}

impl Sample {
    /// Assignment rendered as a '0'/'1' string in ledger order.
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }
}

/// Whether a reported time is a local wall-clock or a service-reported figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSource {
    Wall,
    Service,
}

/// Samples sorted by ascending energy, with sampler metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub sampler: String,
    pub seed: u64,
    pub time_source: TimeSource,
    /// Timing reported by a remote service, verbatim.
    pub service_us: Option<u64>,
}

impl SampleSet {
    /// Lowest-energy sample (earliest read wins ties).
    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }
}

fn max_abs_coefficient(qubo: &QuboModel) -> f64 {
    let lin = qubo.linear.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    qubo.quadratic().iter().fold(lin, |m, &(_, _, c)| m.max(c.abs()))
}

/// Per-variable adjacency built once per sampling call.
fn neighbor_lists(qubo: &QuboModel) -> Vec<Vec<(u32, f64)>> {
    let mut nbrs = vec![Vec::new(); qubo.dim];
    for &(i, j, c) in qubo.quadratic() {
        nbrs[i as usize].push((j, c));
        nbrs[j as usize].push((i, c));
    }
    nbrs
}

fn anneal_read(
    qubo: &QuboModel,
    nbrs: &[Vec<(u32, f64)>],
    params: &SamplerParams,
    t_initial: f64,
    read: u64,
) -> Sample {
    let start = Instant::now();
    let dim = qubo.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(read + 1);

    let mut bits: Vec<u8> = (0..dim).map(|_| rng.gen_range(0..=1u8)).collect();
    let mut energy = qubo.energy(&bits).expect("dim matches");
    let mut best_bits = bits.clone();
    let mut best_energy = energy;

    // Cached local fields: field[i] = linear[i] + sum_j Q_ij x_j, so a flip
    // costs O(1) to evaluate and O(degree) only when accepted.
    let mut field: Vec<f64> = qubo.linear.clone();
    for (i, row) in nbrs.iter().enumerate() {
        for &(j, c) in row {
            if bits[j as usize] == 1 {
                field[i] += c;
            }
        }
    }

    // Above delta/T = 45, exp underflows any uniform draw.
    const REJECT_RATIO: f64 = 45.0;

    let mut temperature = t_initial;
    for _sweep in 0..params.sweeps {
        for _ in 0..dim {
            let i = rng.gen_range(0..dim);
            let delta = if bits[i] == 0 { field[i] } else { -field[i] };
            let accept = delta <= 0.0
                || (delta < REJECT_RATIO * temperature
                    && rng.gen::<f64>() < (-delta / temperature).exp());
            if accept {
                let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
                bits[i] ^= 1;
                energy += delta;
                for &(j, c) in &nbrs[i] {
                    field[j as usize] += sign * c;
                }
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&bits);
                }
            }
        }
        temperature = (temperature * params.ratio).max(params.t_final);
    }

    // Incremental deltas drift; report the exactly recomputed energy.
    let energy = qubo.energy(&best_bits).expect("dim matches");
    Sample {
        bits: best_bits,
        energy,
        time_us: start.elapsed().as_micros() as u64,
    }
}

/// Simulated annealing: `num_reads` independent Metropolis restarts under a
/// geometric cooling schedule. Each read owns a private random stream derived
/// from (seed, read index), so parallel and serial execution agree and the
/// whole set is a pure function of the seed.
pub fn sample_sa(qubo: &QuboModel, params: &SamplerParams) -> Result<SampleSet> {
    if qubo.dim == 0 {
        return Err(Error::Domain("cannot sample an empty QUBO".into()));
    }
    params.validate()?;
    let t_initial = params
        .t_initial
        .unwrap_or_else(|| max_abs_coefficient(qubo).max(params.t_final))
        .max(params.t_final);
    let nbrs = neighbor_lists(qubo);

    let mut indexed: Vec<(usize, Sample)> = (0..params.num_reads)
        .into_par_iter()
        .map(|read| (read, anneal_read(qubo, &nbrs, params, t_initial, read as u64)))
        .collect();
    indexed.sort_by(|a, b| a.1.energy.total_cmp(&b.1.energy).then(a.0.cmp(&b.0)));

    Ok(SampleSet {
        samples: indexed.into_iter().map(|(_, s)| s).collect(),
        sampler: "sa".into(),
        seed: params.seed,
        time_source: TimeSource::Wall,
        service_us: None,
    })
}

/// Exhaustive global minimum. Ties go to the lowest assignment read as a
/// big-endian binary integer, so the all-zero vector wins a flat landscape.
pub fn brute_force(qubo: &QuboModel) -> Result<(Vec<u8>, f64)> {
    let dim = qubo.dim;
    if dim == 0 {
        return Err(Error::Domain("cannot search an empty QUBO".into()));
    }
    if dim > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard(format!(
            "brute force limited to {BRUTE_FORCE_LIMIT} variables, model has {dim}"
        )));
    }
    let mut best_bits = vec![0u8; dim];
    let mut best = qubo.energy(&best_bits)?;
    let mut bits = vec![0u8; dim];
    for code in 1u64..1 << dim {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = (code >> (dim - 1 - i) & 1) as u8;
        }
        let e = qubo.energy(&bits)?;
        if e < best {
            best = e;
            best_bits.copy_from_slice(&bits);
        }
    }
    Ok((best_bits, best))
}

/// [`brute_force`] wrapped in the common sampler contract.
pub fn sample_brute_force(qubo: &QuboModel) -> Result<SampleSet> {
    let start = Instant::now();
    let (bits, energy) = brute_force(qubo)?;
    Ok(SampleSet {
        samples: vec![Sample { bits, energy, time_us: start.elapsed().as_micros() as u64 }],
        sampler: "brute".into(),
        seed: 0,
        time_source: TimeSource::Wall,
        service_us: None,
    })
}
