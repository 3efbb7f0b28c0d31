//! Cross-module invariants: encode/decode against the constrained model, the
//! penalty compiler against brute-force enumeration, and the bench harness
//! end to end on oracle-sized problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cvrpq_core::bench::{run_benchmark, BenchConfig, SamplerChoice};
use cvrpq_core::decode::{decode, encode, route_cost, ViolationKind};
use cvrpq_core::instance::euclid_distance_matrix;
use cvrpq_core::model::{
    build_model, ConstrainedModel, Constraint, ConstraintKind, Sense, VarMap,
};
use cvrpq_core::qubo::{compile, ModelAssignment, PenaltyConfig, QuboModel};
use cvrpq_core::testutil::{cross_instance, grid_instance, random_feasible_routes, synthetic_instance};

fn model_values<'a>(
    assignment: &'a ModelAssignment,
    map: &'a VarMap,
) -> impl Fn(usize) -> i64 + 'a {
    move |ord: usize| {
        if ord < map.total_binary {
            assignment.binary[ord] as i64
        } else {
            assignment.integer[ord - map.total_binary]
        }
    }
}

#[test]
fn feasible_routes_satisfy_every_constraint() {
    let inst = synthetic_instance("sat-check", 7, 3, 25, 11);
    let m = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let routes = random_feasible_routes(&inst, &mut rng).unwrap();
        let assignment = encode(&routes, &map, &inst).unwrap();
        let values = model_values(&assignment, &map);
        for (k, c) in model.constraints.iter().enumerate() {
            assert!(c.satisfied(&values), "constraint {k} ({:?}) violated", c.kind);
        }
        assert_eq!(model.objective_value(&values), route_cost(&routes, &m));
    }
}

#[test]
fn double_visit_breaks_a_visit_once_constraint() {
    let inst = grid_instance(4, 2, 20);
    let m = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &m).unwrap();
    // Both trucks serve customer 1.
    let mut assignment = encode(
        &[vec![0, 1, 2, 0], vec![0, 3, 4, 0]],
        &map,
        &inst,
    )
    .unwrap();
    assignment.binary[map.arc_index(1, 0, 1)] = 1;
    assignment.binary[map.arc_index(1, 1, 3)] = 1;
    assignment.binary[map.arc_index(1, 0, 3)] = 0;
    let values = model_values(&assignment, &map);
    let broken: Vec<_> = model
        .constraints
        .iter()
        .filter(|c| c.kind == ConstraintKind::VisitOnce && !c.satisfied(&values))
        .collect();
    assert!(!broken.is_empty());
}

#[test]
fn decode_encode_identity_across_sizes() {
    // >= 1000 random feasible route sets per instance size 5..=15.
    for n in 5..=15usize {
        let p = 2 + n / 6;
        let inst = synthetic_instance(&format!("ident-{n}"), n, p, 40, n as u64);
        let m = euclid_distance_matrix(&inst);
        let map = VarMap::new(n, p);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
        for _ in 0..1000 {
            let routes = random_feasible_routes(&inst, &mut rng).unwrap();
            let assignment = encode(&routes, &map, &inst).unwrap();
            let decoded = decode(&assignment.binary, &map, &inst, &m).unwrap();
            assert_eq!(decoded.routes, routes);
            assert_eq!(decoded.total_cost, route_cost(&routes, &m));
        }
    }
}

#[test]
fn encoded_routes_have_route_cost_energy_and_zero_penalty() {
    let inst = synthetic_instance("zero-pen", 8, 3, 30, 23);
    let m = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &m).unwrap();
    let qubo = compile(&model, &PenaltyConfig::default_for(m.max_cost(), inst.n_customers)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let routes = random_feasible_routes(&inst, &mut rng).unwrap();
        let assignment = encode(&routes, &map, &inst).unwrap();
        let bits = qubo.lift(&assignment).unwrap();
        let cost = route_cost(&routes, &m) as f64;
        assert_eq!(qubo.energy(&bits).unwrap(), cost);
        let breakdown = qubo.penalty_breakdown(&bits).unwrap();
        assert_eq!(breakdown.objective, cost);
        assert_eq!(breakdown.total_penalty(), 0.0);
    }
}

#[test]
fn arc_flips_always_cost_positive_penalty() {
    let inst = synthetic_instance("flip-pen", 6, 2, 30, 31);
    let m = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &m).unwrap();
    let qubo = compile(&model, &PenaltyConfig::default_for(m.max_cost(), inst.n_customers)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let routes = random_feasible_routes(&inst, &mut rng).unwrap();
        let assignment = encode(&routes, &map, &inst).unwrap();
        let mut bits = qubo.lift(&assignment).unwrap();
        // Any single arc flip leaves some constraint unsatisfiable even with
        // the best slack completion.
        let flip = rng.gen_range(0..map.total_binary);
        bits[flip] ^= 1;
        qubo.complete_slack(&mut bits);
        let breakdown = qubo.penalty_breakdown(&bits).unwrap();
        assert!(breakdown.total_penalty() > 0.0);
        assert!(decode(&bits, &map, &inst, &m).is_err());
    }
}

#[test]
fn decode_feasibility_matches_constraint_evaluation() {
    let inst = synthetic_instance("cross-val", 6, 2, 30, 41);
    let m = euclid_distance_matrix(&inst);
    let (model, map) = build_model(&inst, &m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);

    for case in 0..300 {
        let routes = random_feasible_routes(&inst, &mut rng).unwrap();
        let mut assignment = encode(&routes, &map, &inst).unwrap();
        if case % 3 != 0 {
            // Corrupt a few arc bits.
            for _ in 0..rng.gen_range(1..=3) {
                let ord = rng.gen_range(0..map.total_binary);
                assignment.binary[ord] ^= 1;
            }
        }
        let values = model_values(&assignment, &map);
        let arc_constraints_ok = model
            .constraints
            .iter()
            .filter(|c| c.kind != ConstraintKind::Mtz)
            .all(|c| c.satisfied(&values));
        match decode(&assignment.binary, &map, &inst, &m) {
            Ok(_) => {
                // Decode-feasible: the cumulative-load completion must satisfy
                // the whole model, MTZ included.
                assert!(arc_constraints_ok);
                assert!(model.constraints.iter().all(|c| c.satisfied(&values)));
            }
            Err(violations) => {
                let only_subtours = violations
                    .iter()
                    .all(|v| v.kind == ViolationKind::Subtour);
                if only_subtours {
                    // Certificate: summing the MTZ inequalities around a loop
                    // detached from the depot demands 0 >= sum of demands > 0,
                    // so no integer completion exists.
                    assert!(arc_constraints_ok);
                    let cycle_demand: i64 = violations
                        .iter()
                        .flat_map(|v| v.detail.split(": ").nth(1).unwrap().split(' '))
                        .map(|arc| {
                            let to: usize =
                                arc.split("->").nth(1).unwrap().parse().unwrap();
                            if to == 0 { 0 } else { inst.demands[to] }
                        })
                        .sum();
                    assert!(cycle_demand > 0);
                } else {
                    // Some business violation: the x-only constraint families
                    // must reject it too.
                    assert!(
                        !arc_constraints_ok,
                        "decode violations {violations:?} but constraints all hold"
                    );
                }
            }
        }
    }
}

/// Independent oracle for the compiled energy: enumerate every full bit
/// vector, group by the original variables, and compare the per-group minimum
/// against objective + sum of P * residual^2 computed straight from the model.
#[test]
fn compiled_energy_equals_penalized_objective_by_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for round in 0..25 {
        let num_binary = rng.gen_range(2..=3usize);
        let int_range = rng.gen_range(0..=2i64);
        let model = random_small_model(&mut rng, num_binary, (1, 1 + int_range), round);
        let p = [1.0, 2.5, 10.0][rng.gen_range(0..3)];
        let qubo = compile(&model, &PenaltyConfig::uniform(p)).unwrap();
        assert!(qubo.dim <= 16, "test model too large: {}", qubo.dim);

        // Minimum energy per original assignment, over all completions.
        let total = 1usize << qubo.dim;
        let mut best: std::collections::HashMap<(Vec<u8>, i64), f64> =
            std::collections::HashMap::new();
        let mut bits = vec![0u8; qubo.dim];
        for code in 0..total {
            for (i, b) in bits.iter_mut().enumerate() {
                *b = (code >> i & 1) as u8;
            }
            let binary: Vec<u8> = bits[..num_binary].to_vec();
            let value = decode_integer(&qubo, &bits, num_binary, &model);
            let e = qubo.energy(&bits).unwrap();
            best.entry((binary, value))
                .and_modify(|m| *m = m.min(e))
                .or_insert(e);
        }

        for ((binary, value), min_energy) in best {
            let values = |ord: usize| {
                if ord < num_binary { binary[ord] as i64 } else { value }
            };
            let objective = model.objective_value(&values) as f64;
            let mut expected = objective;
            for c in &model.constraints {
                let lhs = c.lhs(&values);
                let residual = match c.sense {
                    Sense::Eq => lhs - c.rhs,
                    Sense::Le => (lhs - c.rhs).max(0),
                    Sense::Ge => (c.rhs - lhs).max(0),
                };
                expected += p * (residual * residual) as f64;
            }
            assert_eq!(
                min_energy, expected,
                "round {round}: binary {binary:?} value {value} disagrees"
            );
        }
    }
}

fn random_small_model(
    rng: &mut ChaCha8Rng,
    num_binary: usize,
    bounds: (i64, i64),
    round: usize,
) -> ConstrainedModel {
    let num_vars = num_binary + 1;
    let mut constraints = Vec::new();
    let kinds = [ConstraintKind::VisitOnce, ConstraintKind::Capacity, ConstraintKind::Mtz];
    for k in 0..2 {
        let sense = match (round + k) % 3 {
            0 => Sense::Eq,
            1 => Sense::Le,
            _ => Sense::Ge,
        };
        let terms: Vec<(usize, i64)> = (0..num_vars)
            .filter_map(|ord| {
                let c = rng.gen_range(-2..=2i64);
                (c != 0).then_some((ord, c))
            })
            .collect();
        if terms.is_empty() {
            continue;
        }
        constraints.push(Constraint {
            kind: kinds[(round + k) % 3],
            sense,
            terms,
            rhs: rng.gen_range(-2..=4),
        });
    }
    ConstrainedModel {
        num_binary,
        objective: (0..num_binary).map(|v| (v, rng.gen_range(-4..=4))).collect(),
        quadratic_objective: if num_binary >= 2 { vec![(0, 1, rng.gen_range(-2..=2))] } else { vec![] },
        constraints,
        integer_bounds: vec![bounds],
    }
}

fn decode_integer(qubo: &QuboModel, bits: &[u8], num_binary: usize, model: &ConstrainedModel) -> i64 {
    use cvrpq_core::qubo::VarOrigin;
    let mut value = model.integer_bounds[0].0;
    for (idx, origin) in qubo.ledger.iter().enumerate() {
        if let VarOrigin::IntegerBit { ordinal, weight, .. } = origin {
            assert_eq!(*ordinal, num_binary);
            if bits[idx] == 1 {
                value += weight;
            }
        }
    }
    value
}

#[test]
fn bench_with_brute_force_reaches_the_enumerated_optimum() {
    // Small enough that the compiled QUBO fits the exhaustive-search guard
    // (capacity 3 keeps the slack and encoding bit count down: 15 bits).
    let inst = grid_instance(2, 1, 3);
    let m = euclid_distance_matrix(&inst);
    let oracle = cvrpq_core::testutil::enumerate_best_cost(&inst, &m).unwrap();

    let cfg = BenchConfig {
        best_known: Some(oracle),
        ..BenchConfig::new(SamplerChoice::BruteForce, 1, 0)
    };
    let report = run_benchmark(&inst, &cfg).unwrap();
    assert_eq!(report.feasibility_rate, 1.0);
    assert_eq!(report.mape(), Some(0.0));
    assert_eq!(report.records[0].energy, Some(oracle));
}

#[test]
fn bench_reports_are_deterministic_under_a_seed() {
    let inst = cross_instance();
    let sampler = SamplerChoice::Sa(cvrpq_core::sampler::SamplerParams {
        num_reads: 5,
        sweeps: 300,
        ..Default::default()
    });
    let cfg = BenchConfig {
        best_known: Some(34),
        ..BenchConfig::new(sampler, 5, 99)
    };
    let a = run_benchmark(&inst, &cfg).unwrap();
    let b = run_benchmark(&inst, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bench_with_no_feasible_runs_is_reported_not_failed() {
    // One truck, two unit demands, capacity 1: no feasible routing exists.
    let mut inst = grid_instance(2, 1, 1);
    inst.demands = vec![0, 1, 1];
    let cfg = BenchConfig {
        best_known: Some(10),
        ..BenchConfig::new(SamplerChoice::BruteForce, 3, 0)
    };
    let report = run_benchmark(&inst, &cfg).unwrap();
    assert_eq!(report.feasibility_rate, 0.0);
    assert_eq!(report.mape(), None);
    assert!(report.aggregates.is_none());
    assert!(report.histogram.counts.is_empty());
    assert!(report.records.iter().all(|r| !r.feasible && r.energy.is_none()));
}

#[test]
fn bench_report_invariants_recompute() {
    let inst = cross_instance();
    let sampler = SamplerChoice::Sa(cvrpq_core::sampler::SamplerParams {
        num_reads: 10,
        sweeps: 500,
        ..Default::default()
    });
    let cfg = BenchConfig {
        best_known: Some(34),
        bins: 4,
        ..BenchConfig::new(sampler, 12, 3)
    };
    let report = run_benchmark(&inst, &cfg).unwrap();

    // Cumulative MAPE from the records reproduces the curve.
    let feasible: Vec<i64> = report.records.iter().filter_map(|r| r.energy).collect();
    assert!(!feasible.is_empty());
    for (k, &window_mape) in report.mape_curve.iter().enumerate() {
        let recomputed = cvrpq_core::bench::mape(&feasible[..=k], report.e_best).unwrap();
        assert!((recomputed - window_mape).abs() < 1e-12);
    }
    // Aggregates recompute.
    let agg = report.aggregates.unwrap();
    let mean = feasible.iter().sum::<i64>() as f64 / feasible.len() as f64;
    assert!((agg.mean - mean).abs() < 1e-12);
    let var =
        feasible.iter().map(|&e| (e as f64 - mean).powi(2)).sum::<f64>() / feasible.len() as f64;
    assert!((agg.stddev - var.sqrt()).abs() < 1e-12);
    assert_eq!(agg.best, *feasible.iter().min().unwrap());
    assert_eq!(agg.worst, *feasible.iter().max().unwrap());
    // Histogram conserves the feasible count.
    assert_eq!(report.histogram.counts.iter().sum::<usize>(), feasible.len());
    // Every feasible record's assignment decodes clean and costs its energy.
    let m = euclid_distance_matrix(&inst);
    let map = VarMap::new(inst.n_customers, inst.fleet_size);
    for r in report.records.iter().filter(|r| r.feasible) {
        let bits: Vec<u8> = r
            .assignment
            .as_ref()
            .unwrap()
            .chars()
            .map(|c| (c == '1') as u8)
            .collect();
        let routes = decode(&bits, &map, &inst, &m).unwrap();
        assert_eq!(Some(routes.total_cost), r.energy);
    }
}

#[test]
fn bench_artifacts_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = cross_instance();
    let sampler = SamplerChoice::Sa(cvrpq_core::sampler::SamplerParams {
        num_reads: 5,
        sweeps: 300,
        ..Default::default()
    });
    let cfg = BenchConfig {
        best_known: Some(34),
        ..BenchConfig::new(sampler, 4, 1)
    };
    let report = run_benchmark(&inst, &cfg).unwrap();

    let runlog = dir.path().join("runs.jsonl");
    let summary = dir.path().join("summary.csv");
    let hist = dir.path().join("histogram.csv");
    cvrpq_core::bench::write_runlog(&report, &runlog).unwrap();
    cvrpq_core::bench::write_summary_csv(&report, &summary).unwrap();
    cvrpq_core::bench::write_histogram_csv(&report, &hist).unwrap();

    let log = std::fs::read_to_string(&runlog).unwrap();
    let mut lines = log.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["instance"], "cross-n4-k2");
    assert_eq!(header["e_best"], 34);
    let records: Vec<cvrpq_core::bench::RunRecord> =
        lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records, report.records);

    let csv = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(csv.lines().count(), 1 + report.records.len());
    assert!(csv.starts_with("run,energy,feasible,ae,cumulative_mape,time_us\n"));

    let hist_csv = std::fs::read_to_string(&hist).unwrap();
    assert_eq!(hist_csv.lines().count(), 1 + report.histogram.counts.len());
}
