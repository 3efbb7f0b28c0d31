//! Flow-based constrained model for the CVRP.
//!
//! Binary arc variables `x[r][i][j]` say that truck `r` drives from node `i`
//! to node `j`. Bounded integer variables `u[r][i]` order the customers along
//! each route (the Miller-Tucker-Zemlin device that rules out loops detached
//! from the depot). Five constraint families close the model:
//!
//! * every customer is entered exactly once,
//! * every truck leaves the depot exactly once,
//! * per truck and node, in-degree equals out-degree,
//! * per truck, carried demand stays within capacity,
//! * per truck and customer pair, the MTZ ordering inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance};

/// Bijections from structured variable names to flat ordinals.
///
/// Arc variables occupy ordinals `0..total_binary`, integer ordering
/// variables `total_binary..total_binary + total_integer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    /// Customers, depot excluded.
    pub n: usize,
    /// Trucks.
    pub p: usize,
    pub total_binary: usize,
    pub total_integer: usize,
}

impl VarMap {
    pub fn new(n: usize, p: usize) -> Self {
        VarMap {
            n,
            p,
            total_binary: p * (n + 1) * n,
            total_integer: n * p,
        }
    }

    /// Ordinal of `x[r][i][j]`; `i != j`, nodes in `0..=n`, trucks in `0..p`.
    pub fn arc_index(&self, r: usize, i: usize, j: usize) -> usize {
        debug_assert!(i != j && i <= self.n && j <= self.n && r < self.p);
        let j_slot = if j < i { j } else { j - 1 };
        (r * (self.n + 1) + i) * self.n + j_slot
    }

    /// Ordinal of `u[r][i]`; customers in `1..=n`.
    pub fn u_index(&self, r: usize, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i) && r < self.p);
        self.total_binary + r * self.n + (i - 1)
    }

    /// Inverse of [`VarMap::arc_index`].
    pub fn arc_of(&self, ordinal: usize) -> Option<(usize, usize, usize)> {
        if ordinal >= self.total_binary {
            return None;
        }
        let j_slot = ordinal % self.n;
        let rest = ordinal / self.n;
        let i = rest % (self.n + 1);
        let r = rest / (self.n + 1);
        let j = if j_slot < i { j_slot } else { j_slot + 1 };
        Some((r, i, j))
    }

    /// Inverse of [`VarMap::u_index`].
    pub fn u_of(&self, ordinal: usize) -> Option<(usize, usize)> {
        let off = ordinal.checked_sub(self.total_binary)?;
        if off >= self.total_integer {
            return None;
        }
        Some((off / self.n, off % self.n + 1))
    }

    pub fn total_variables(&self) -> usize {
        self.total_binary + self.total_integer
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    VisitOnce,
    DepotLeave,
    FlowConservation,
    Capacity,
    Mtz,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 5] = [
        ConstraintKind::VisitOnce,
        ConstraintKind::DepotLeave,
        ConstraintKind::FlowConservation,
        ConstraintKind::Capacity,
        ConstraintKind::Mtz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::VisitOnce => "visit_once",
            ConstraintKind::DepotLeave => "depot_leave",
            ConstraintKind::FlowConservation => "flow_conservation",
            ConstraintKind::Capacity => "capacity",
            ConstraintKind::Mtz => "mtz",
        }
    }
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown constraint kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// One linear constraint: `terms . vars <sense> rhs`, integer coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub sense: Sense,
    pub terms: Vec<(usize, i64)>,
    pub rhs: i64,
}

impl Constraint {
    pub fn lhs(&self, values: &dyn Fn(usize) -> i64) -> i64 {
        self.terms.iter().map(|&(v, c)| c * values(v)).sum()
    }

    pub fn satisfied(&self, values: &dyn Fn(usize) -> i64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Le => lhs <= self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

/// Objective plus typed constraints over a flat ordinal space: binary
/// variables first (`0..num_binary`), bounded integers after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedModel {
    pub num_binary: usize,
    /// `(ordinal, cost)` pairs; one entry per arc variable, zero costs kept.
    pub objective: Vec<(usize, i64)>,
    /// Quadratic objective terms; empty for the flow model, used by generic
    /// models fed straight to the compiler.
    pub quadratic_objective: Vec<(usize, usize, i64)>,
    pub constraints: Vec<Constraint>,
    /// Inclusive `(lower, upper)` bounds of each integer variable, indexed by
    /// `ordinal - num_binary`.
    pub integer_bounds: Vec<(i64, i64)>,
}

impl ConstrainedModel {
    pub fn num_integer(&self) -> usize {
        self.integer_bounds.len()
    }

    pub fn objective_value(&self, values: &dyn Fn(usize) -> i64) -> i64 {
        let linear: i64 = self.objective.iter().map(|&(v, c)| c * values(v)).sum();
        let quad: i64 = self
            .quadratic_objective
            .iter()
            .map(|&(a, b, c)| c * values(a) * values(b))
            .sum();
        linear + quad
    }
}

/// Size statistics of a built model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    pub num_variables: usize,
    pub num_constraints: usize,
    pub num_biases: usize,
    pub tau: f64,
}

/// Assemble the constrained model for an instance.
pub fn build_model(
    instance: &Instance,
    distances: &DistanceMatrix,
) -> Result<(ConstrainedModel, VarMap)> {
    let n = instance.n_customers;
    let p = instance.fleet_size;
    if n == 0 {
        return Err(Error::EmptyModel("instance has no customers".into()));
    }
    if p == 0 {
        return Err(Error::EmptyModel("fleet size is zero".into()));
    }
    if distances.dim != n + 1 {
        return Err(Error::Validation(format!(
            "distance matrix dim {} does not match {} nodes",
            distances.dim,
            n + 1
        )));
    }
    let map = VarMap::new(n, p);
    let q = instance.capacity;
    let d = &instance.demands;

    let mut objective = Vec::with_capacity(map.total_binary);
    for r in 0..p {
        for i in 0..=n {
            for j in 0..=n {
                if i != j {
                    objective.push((map.arc_index(r, i, j), distances.cost(i, j)));
                }
            }
        }
    }

    let mut constraints =
        Vec::with_capacity(n + p + (n + 1) * p + p + n * (n - 1).max(0) * p);

    // Each customer is entered exactly once, by any truck.
    for j in 1..=n {
        let mut terms = Vec::with_capacity(p * n);
        for r in 0..p {
            for i in (0..=n).filter(|&i| i != j) {
                terms.push((map.arc_index(r, i, j), 1));
            }
        }
        constraints.push(Constraint { kind: ConstraintKind::VisitOnce, sense: Sense::Eq, terms, rhs: 1 });
    }

    // Each truck leaves the depot exactly once.
    for r in 0..p {
        let terms = (1..=n).map(|j| (map.arc_index(r, 0, j), 1)).collect();
        constraints.push(Constraint { kind: ConstraintKind::DepotLeave, sense: Sense::Eq, terms, rhs: 1 });
    }

    // Per truck and node: in-degree minus out-degree is zero.
    for r in 0..p {
        for j in 0..=n {
            let mut terms = Vec::with_capacity(2 * n);
            for i in (0..=n).filter(|&i| i != j) {
                terms.push((map.arc_index(r, i, j), 1));
                terms.push((map.arc_index(r, j, i), -1));
            }
            constraints.push(Constraint {
                kind: ConstraintKind::FlowConservation,
                sense: Sense::Eq,
                terms,
                rhs: 0,
            });
        }
    }

    // Carried demand per truck stays within capacity.
    for r in 0..p {
        let mut terms = Vec::with_capacity(n * n);
        for i in 0..=n {
            for j in (1..=n).filter(|&j| j != i) {
                terms.push((map.arc_index(r, i, j), d[j]));
            }
        }
        constraints.push(Constraint { kind: ConstraintKind::Capacity, sense: Sense::Le, terms, rhs: q });
    }

    // MTZ ordering: u[r][j] - u[r][i] - Q x[r][i][j] >= q_j - Q.
    for r in 0..p {
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let terms = vec![
                    (map.u_index(r, j), 1),
                    (map.u_index(r, i), -1),
                    (map.arc_index(r, i, j), -q),
                ];
                constraints.push(Constraint {
                    kind: ConstraintKind::Mtz,
                    sense: Sense::Ge,
                    terms,
                    rhs: d[j] - q,
                });
            }
        }
    }

    let mut integer_bounds = Vec::with_capacity(map.total_integer);
    for _r in 0..p {
        for i in 1..=n {
            integer_bounds.push((d[i], q));
        }
    }

    Ok((
        ConstrainedModel {
            num_binary: map.total_binary,
            objective,
            quadratic_objective: Vec::new(),
            constraints,
            integer_bounds,
        },
        map,
    ))
}

/// Build the model for an instance and report its size statistics.
pub fn stats_for_instance(instance: &Instance) -> Result<ModelStats> {
    let distances = crate::instance::euclid_distance_matrix(instance);
    let (model, map) = build_model(instance, &distances)?;
    Ok(model_stats(&model, &map, crate::instance::tightness(instance)))
}

/// Size statistics: variables, constraints, and occurrence-counted biases
/// (objective and constraint entries, plus one bound per integer variable).
pub fn model_stats(model: &ConstrainedModel, map: &VarMap, tau: f64) -> ModelStats {
    let occurrences: usize = model.objective.len()
        + model.constraints.iter().map(|c| c.terms.len()).sum::<usize>();
    ModelStats {
        num_variables: map.total_variables(),
        num_constraints: model.constraints.len(),
        num_biases: occurrences + map.total_integer,
        tau,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SecFormulation {
    Dfj,
    Mtz,
}

/// Size of a subtour-elimination formulation for `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecSize {
    pub formulation: SecFormulation,
    /// Exact closed-form constraint count.
    pub constraints_exact: u64,
    /// Dominant term alone (2^n or n^2), the figure usually quoted.
    pub constraints_dominant: u64,
    pub ancillary_binary: u64,
    pub ancillary_continuous: u64,
}

/// Closed-form constraint and ancillary-variable counts for the DFJ and MTZ
/// subtour eliminations. DFJ is counted only, never constructed.
pub fn sec_size(formulation: SecFormulation, n: u32) -> Result<SecSize> {
    if n < 2 {
        return Err(Error::Domain(format!("sec_size needs n >= 2, got {n}")));
    }
    let n64 = n as u64;
    let overflow = || Error::Overflow(format!("DFJ constraint count 2^{n} + 2*{n} - 2 exceeds u64"));
    match formulation {
        SecFormulation::Dfj => {
            let pow = 1u64.checked_shl(n).ok_or_else(overflow)?;
            let exact = pow.checked_add(2 * n64 - 2).ok_or_else(overflow)?;
            Ok(SecSize {
                formulation,
                constraints_exact: exact,
                constraints_dominant: pow,
                ancillary_binary: n64 * (n64 - 1),
                ancillary_continuous: 0,
            })
        }
        SecFormulation::Mtz => Ok(SecSize {
            formulation,
            constraints_exact: n64 * n64 - n64 + 2,
            constraints_dominant: n64 * n64,
            ancillary_binary: n64 * (n64 - 1),
            ancillary_continuous: n64 - 1,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::euclid_distance_matrix;
    use crate::testutil::{grid_instance, synthetic_instance};

    #[test]
    fn varmap_counts_and_bijections() {
        let map = VarMap::new(31, 5);
        assert_eq!(map.total_binary, 4960);
        assert_eq!(map.total_integer, 155);

        // arc_index is a bijection onto 0..total_binary
        let mut seen = vec![false; map.total_binary];
        for r in 0..5 {
            for i in 0..=31 {
                for j in (0..=31).filter(|&j| j != i) {
                    let ord = map.arc_index(r, i, j);
                    assert!(!seen[ord]);
                    seen[ord] = true;
                    assert_eq!(map.arc_of(ord), Some((r, i, j)));
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        for r in 0..5 {
            for i in 1..=31 {
                let ord = map.u_index(r, i);
                assert!(ord >= map.total_binary && ord < map.total_variables());
                assert_eq!(map.u_of(ord), Some((r, i)));
            }
        }
        assert_eq!(map.arc_of(map.total_binary), None);
        assert_eq!(map.u_of(0), None);
    }

    #[test]
    fn a32_model_sizes() {
        let inst = synthetic_instance("A-n32-k5-like", 31, 5, 100, 13);
        let m = euclid_distance_matrix(&inst);
        let (model, map) = build_model(&inst, &m).unwrap();
        assert_eq!(map.total_binary, 4960);
        assert_eq!(map.total_integer, 155);
        assert_eq!(model.constraints.len(), 4851);
    }

    #[test]
    fn two_customer_model_by_hand() {
        let inst = grid_instance(2, 1, 10);
        let m = euclid_distance_matrix(&inst);
        let (model, map) = build_model(&inst, &m).unwrap();
        assert_eq!(map.total_binary, 6);
        assert_eq!(map.total_integer, 2);
        assert_eq!(model.constraints.len(), 9);

        let by_kind = |k: ConstraintKind| model.constraints.iter().filter(|c| c.kind == k).count();
        assert_eq!(by_kind(ConstraintKind::VisitOnce), 2);
        assert_eq!(by_kind(ConstraintKind::DepotLeave), 1);
        assert_eq!(by_kind(ConstraintKind::FlowConservation), 3);
        assert_eq!(by_kind(ConstraintKind::Capacity), 1);
        assert_eq!(by_kind(ConstraintKind::Mtz), 2);
    }

    #[test]
    fn zero_fleet_is_an_error() {
        let mut inst = grid_instance(2, 1, 10);
        inst.fleet_size = 0;
        let m = euclid_distance_matrix(&inst);
        assert!(matches!(build_model(&inst, &m), Err(Error::EmptyModel(_))));
    }

    #[test]
    fn constraint_family_counts_match_formulas() {
        for (n, p) in [(3usize, 2usize), (5, 2), (7, 3)] {
            let inst = grid_instance(n, p, 50);
            let m = euclid_distance_matrix(&inst);
            let (model, map) = build_model(&inst, &m).unwrap();
            assert_eq!(map.total_variables(), p * (n + 1) * n + n * p);
            let expect = n + p + (n + 1) * p + p + n * (n - 1) * p;
            assert_eq!(model.constraints.len(), expect);
        }
    }

    #[test]
    fn stats_bias_counts_follow_occurrences() {
        // n=2, p=1: objective 6, visit 2*2, depot 2, flow 3*4, capacity 4,
        // mtz 2*3, bounds 2 -> 36
        let inst = grid_instance(2, 1, 10);
        let m = euclid_distance_matrix(&inst);
        let (model, map) = build_model(&inst, &m).unwrap();
        let stats = model_stats(&model, &map, 0.5);
        assert_eq!(stats.num_variables, 8);
        assert_eq!(stats.num_constraints, 9);
        assert_eq!(stats.num_biases, 36);
    }

    #[test]
    fn sec_size_table_row() {
        let dfj = sec_size(SecFormulation::Dfj, 20).unwrap();
        assert_eq!(dfj.constraints_dominant, 1_048_576);
        assert_eq!(dfj.constraints_exact, 1_048_576 + 38);
        assert_eq!(dfj.ancillary_binary, 380);

        let mtz = sec_size(SecFormulation::Mtz, 20).unwrap();
        assert_eq!(mtz.constraints_dominant, 400);
        assert_eq!(mtz.constraints_exact, 382);
        assert_eq!(mtz.ancillary_binary, 380);
        assert_eq!(mtz.ancillary_continuous, 19);
    }

    #[test]
    fn sec_size_smallest_and_overflow() {
        let mtz = sec_size(SecFormulation::Mtz, 2).unwrap();
        assert_eq!(mtz.constraints_exact, 4);

        assert!(sec_size(SecFormulation::Dfj, 63).is_ok());
        assert!(matches!(sec_size(SecFormulation::Dfj, 64), Err(Error::Overflow(_))));
        assert!(matches!(sec_size(SecFormulation::Mtz, 1), Err(Error::Domain(_))));
    }
}
