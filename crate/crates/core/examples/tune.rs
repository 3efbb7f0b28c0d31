//! Scratch: success-rate scan of SA on the tiny cross instance.

use cvrpq_core::bench::{run_benchmark, BenchConfig, SamplerChoice};
use cvrpq_core::instance::euclid_distance_matrix;
use cvrpq_core::model::build_model;
use cvrpq_core::qubo::{compile, PenaltyConfig};
use cvrpq_core::sampler::SamplerParams;
use cvrpq_core::testutil::{cross_instance, enumerate_best_cost};

fn main() {
    let inst = cross_instance();
    let m = euclid_distance_matrix(&inst);
    let best = enumerate_best_cost(&inst, &m).unwrap();
    let (model, _map) = build_model(&inst, &m).unwrap();

    for penalty in [100.0] {
        let qubo = compile(&model, &PenaltyConfig::uniform(penalty)).unwrap();
        println!("P={penalty}: dim {}, nnz {}", qubo.dim, qubo.quadratic().len());
        for (t0, ratio, sweeps, reads) in [
            (Some(100.0), 0.997, 3000, 100),
        ] {
            let t_start = std::time::Instant::now();
            let mut hits = 0;
            let trials = 60;
            for seed in 0..trials {
                let cfg = BenchConfig {
                    best_known: Some(best),
                    penalties: Some(PenaltyConfig::uniform(penalty)),
                    ..BenchConfig::new(
                        SamplerChoice::Sa(SamplerParams {
                            num_reads: reads,
                            sweeps,
                            t_initial: t0,
                            ratio,
                            seed: 0,
                            ..Default::default()
                        }),
                        1,
                        seed,
                    )
                };
                let report = run_benchmark(&inst, &cfg).unwrap();
                if report.mape() == Some(0.0) {
                    hits += 1;
                }
            }
            println!(
                "  t0 {t0:?} ratio {ratio} sweeps {sweeps} reads {reads}: {hits}/{trials}, {:?}",
                t_start.elapsed()
            );
        }
    }
}
