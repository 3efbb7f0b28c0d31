//! Penalty compilation of a constrained model into an unconstrained QUBO.
//!
//! Each equality constraint `a.x = b` becomes `P * (a.x - b)^2`. Inequalities
//! first gain binary slack variables that close the gap to an equality, then
//! square the same way. Bounded integers are replaced by binary encodings over
//! their range. Because `x^2 = x` for binary `x`, squared linear terms fold
//! onto the diagonal; the expansion constant is kept in a scalar offset so the
//! QUBO energy equals the penalized objective exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstrainedModel, ConstraintKind, Sense, VarMap};

/// Positive penalty multiplier per constraint kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    multipliers: HashMap<ConstraintKind, f64>,
}

impl PenaltyConfig {
    /// Same multiplier for every constraint kind.
    pub fn uniform(p: f64) -> Self {
        assert!(p > 0.0, "penalty multiplier must be positive");
        let multipliers = ConstraintKind::ALL.into_iter().map(|k| (k, p)).collect();
        PenaltyConfig { multipliers }
    }

    /// Override the multiplier of one kind.
    pub fn with(mut self, kind: ConstraintKind, p: f64) -> Self {
        assert!(p > 0.0, "penalty multiplier must be positive");
        self.multipliers.insert(kind, p);
        self
    }

    pub fn get(&self, kind: ConstraintKind) -> Option<f64> {
        self.multipliers.get(&kind).copied()
    }

    /// Default: any single violation costs more than the largest possible
    /// saving on tour cost, `2 * max_cost * (n + 1)`.
    pub fn default_for(max_cost: i64, n_customers: usize) -> Self {
        PenaltyConfig::uniform((2 * max_cost.max(1) * (n_customers as i64 + 1)) as f64)
    }
}

/// Where a QUBO bit comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum VarOrigin {
    /// Original binary decision variable (an arc variable in the flow model).
    Binary { ordinal: usize },
    /// Bit of a binary-encoded bounded integer.
    IntegerBit { ordinal: usize, bit: u32, weight: i64, lower: i64 },
    /// Slack bit introduced for one inequality constraint.
    SlackBit { constraint: usize, bit: u32, weight: i64 },
}

/// Compilation record of one constraint, over QUBO bit indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledConstraint {
    pub kind: ConstraintKind,
    pub penalty: f64,
    /// Right-hand side after integer lower bounds moved across.
    pub target: i64,
    /// Expanded original-variable terms (binary vars and integer bits).
    pub terms: Vec<(u32, i64)>,
    /// Slack terms with signed weights; empty for equalities.
    pub slack: Vec<(u32, i64)>,
}

impl CompiledConstraint {
    fn lhs(&self, bits: &[u8]) -> i64 {
        self.terms.iter().map(|&(i, c)| c * bits[i as usize] as i64).sum()
    }

    fn expression(&self, bits: &[u8]) -> i64 {
        let slack: i64 = self.slack.iter().map(|&(i, c)| c * bits[i as usize] as i64).sum();
        self.lhs(bits) + slack - self.target
    }

    /// Penalty value at `bits`, using the slack bits as assigned.
    pub fn penalty_at(&self, bits: &[u8]) -> f64 {
        let e = self.expression(bits) as f64;
        self.penalty * e * e
    }
}

/// Upper-triangular sparse QUBO with a scalar offset and a provenance ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    pub dim: usize,
    pub linear: Vec<f64>,
    /// Sorted, merged `(i, j, coeff)` with `i < j`.
    quadratic: Vec<(u32, u32, f64)>,
    pub offset: f64,
    pub ledger: Vec<VarOrigin>,
    /// Objective terms over QUBO bits; together with `compiled` they
    /// decompose the energy exactly.
    objective_linear: Vec<(u32, i64)>,
    objective_quadratic: Vec<(u32, u32, i64)>,
    objective_constant: i64,
    compiled: Vec<CompiledConstraint>,
    has_record: bool,
}

/// Values for the original variables of a constrained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAssignment {
    pub binary: Vec<u8>,
    pub integer: Vec<i64>,
}

/// Objective value and per-kind penalty totals at one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyBreakdown {
    pub objective: f64,
    /// `(kind, total penalty)` for every kind present in the model.
    pub penalties: Vec<(ConstraintKind, f64)>,
}

impl PenaltyBreakdown {
    pub fn total_penalty(&self) -> f64 {
        self.penalties.iter().map(|&(_, p)| p).sum()
    }

    pub fn penalty_of(&self, kind: ConstraintKind) -> f64 {
        self.penalties
            .iter()
            .find(|&&(k, _)| k == kind)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }
}

/// Fewest bits whose clipped power-of-two weights reach exactly `gap`.
pub fn slack_bits(gap: u64) -> u32 {
    if gap == 0 {
        0
    } else {
        64 - gap.leading_zeros()
    }
}

/// Weights `1, 2, 4, ..., 2^(r-2)` plus a top weight clipped so the encoded
/// range is exactly `[0, gap]`.
pub fn slack_weights(gap: u64) -> Vec<i64> {
    let r = slack_bits(gap);
    if r == 0 {
        return Vec::new();
    }
    let mut weights: Vec<i64> = (0..r - 1).map(|k| 1i64 << k).collect();
    weights.push(gap as i64 - ((1i64 << (r - 1)) - 1));
    weights
}

struct Builder {
    linear: Vec<f64>,
    raw_quadratic: Vec<(u32, u32, f64)>,
    offset: f64,
    ledger: Vec<VarOrigin>,
}

impl Builder {
    fn push_bit(&mut self, origin: VarOrigin) -> u32 {
        let idx = self.ledger.len() as u32;
        self.ledger.push(origin);
        self.linear.push(0.0);
        idx
    }

    /// Accumulate `p * (sum(terms) - target)^2` with `x^2 = x` applied.
    fn square(&mut self, terms: &[(u32, i64)], target: i64, p: f64) {
        self.offset += p * (target * target) as f64;
        for (a, &(i, ci)) in terms.iter().enumerate() {
            self.linear[i as usize] += p * (ci * ci - 2 * target * ci) as f64;
            for &(j, cj) in &terms[a + 1..] {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                self.raw_quadratic.push((lo, hi, 2.0 * p * (ci * cj) as f64));
            }
        }
    }
}

fn merge_terms(terms: &mut Vec<(u32, i64)>) {
    terms.sort_unstable_by_key(|&(i, _)| i);
    terms.dedup_by(|next, prev| {
        if prev.0 == next.0 {
            prev.1 += next.1;
            true
        } else {
            false
        }
    });
    terms.retain(|&(_, c)| c != 0);
}

/// Compile a constrained model into a QUBO under the given penalties.
pub fn compile(model: &ConstrainedModel, config: &PenaltyConfig) -> Result<QuboModel> {
    for c in &model.constraints {
        if config.get(c.kind).is_none() {
            return Err(Error::Config(format!(
                "no penalty multiplier for constraint kind `{}`",
                c.kind.name()
            )));
        }
    }

    let mut b = Builder {
        linear: Vec::new(),
        raw_quadratic: Vec::new(),
        offset: 0.0,
        ledger: Vec::new(),
    };

    for ordinal in 0..model.num_binary {
        b.push_bit(VarOrigin::Binary { ordinal });
    }

    // Binary encodings for the bounded integers: value = lower + sum(w_k b_k).
    let mut encodings: Vec<(i64, Vec<(u32, i64)>)> = Vec::with_capacity(model.integer_bounds.len());
    for (t, &(lower, upper)) in model.integer_bounds.iter().enumerate() {
        if upper < lower {
            return Err(Error::Validation(format!(
                "integer variable {t} has empty range [{lower}, {upper}]"
            )));
        }
        let ordinal = model.num_binary + t;
        let bits = slack_weights((upper - lower) as u64)
            .into_iter()
            .enumerate()
            .map(|(k, weight)| {
                let idx = b.push_bit(VarOrigin::IntegerBit {
                    ordinal,
                    bit: k as u32,
                    weight,
                    lower,
                });
                (idx, weight)
            })
            .collect();
        encodings.push((lower, bits));
    }

    // Expand a model-ordinal term list into QUBO bit terms plus a constant.
    let expand = |terms: &[(usize, i64)]| -> (Vec<(u32, i64)>, i64) {
        let mut out = Vec::with_capacity(terms.len());
        let mut constant = 0i64;
        for &(ord, coeff) in terms {
            if ord < model.num_binary {
                out.push((ord as u32, coeff));
            } else {
                let (lower, bits) = &encodings[ord - model.num_binary];
                constant += coeff * lower;
                out.extend(bits.iter().map(|&(idx, w)| (idx, coeff * w)));
            }
        }
        (out, constant)
    };

    // Objective.
    let (mut objective_linear, objective_constant) = expand(&model.objective);
    merge_terms(&mut objective_linear);
    b.offset += objective_constant as f64;
    for &(i, c) in &objective_linear {
        b.linear[i as usize] += c as f64;
    }
    let mut objective_quadratic = Vec::with_capacity(model.quadratic_objective.len());
    for &(x, y, c) in &model.quadratic_objective {
        if x >= model.num_binary || y >= model.num_binary {
            return Err(Error::Validation(
                "quadratic objective over integer variables is not supported".into(),
            ));
        }
        if x == y {
            b.linear[x] += c as f64;
            objective_linear.push((x as u32, c));
        } else {
            let (lo, hi) = if x < y { (x as u32, y as u32) } else { (y as u32, x as u32) };
            b.raw_quadratic.push((lo, hi, c as f64));
            objective_quadratic.push((lo, hi, c));
        }
    }

    // Constraints.
    let mut compiled = Vec::with_capacity(model.constraints.len());
    for (ci, c) in model.constraints.iter().enumerate() {
        let p = config.get(c.kind).expect("checked above");
        let (mut terms, constant) = expand(&c.terms);
        merge_terms(&mut terms);
        let target = c.rhs - constant;

        let slack: Vec<(u32, i64)> = match c.sense {
            Sense::Eq => Vec::new(),
            Sense::Le => {
                // lhs + s = target, s in [0, target - min(lhs)]
                let min_lhs: i64 = terms.iter().map(|&(_, c)| c.min(0)).sum();
                let gap = (target - min_lhs).max(0);
                slack_weights(gap as u64)
                    .into_iter()
                    .enumerate()
                    .map(|(k, w)| {
                        let idx = b.push_bit(VarOrigin::SlackBit {
                            constraint: ci,
                            bit: k as u32,
                            weight: w,
                        });
                        (idx, w)
                    })
                    .collect()
            }
            Sense::Ge => {
                // lhs - s = target, s in [0, max(lhs) - target]
                let max_lhs: i64 = terms.iter().map(|&(_, c)| c.max(0)).sum();
                let gap = (max_lhs - target).max(0);
                slack_weights(gap as u64)
                    .into_iter()
                    .enumerate()
                    .map(|(k, w)| {
                        let idx = b.push_bit(VarOrigin::SlackBit {
                            constraint: ci,
                            bit: k as u32,
                            weight: w,
                        });
                        (idx, -w)
                    })
                    .collect()
            }
        };

        let mut all = terms.clone();
        all.extend_from_slice(&slack);
        b.square(&all, target, p);
        compiled.push(CompiledConstraint { kind: c.kind, penalty: p, target, terms, slack });
    }

    // Canonical upper-triangular form: sort and merge coefficient triples.
    let mut quadratic = b.raw_quadratic;
    quadratic.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(quadratic.len() / 4);
    for (i, j, c) in quadratic {
        match merged.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += c,
            _ => merged.push((i, j, c)),
        }
    }
    merged.retain(|&(_, _, c)| c != 0.0);

    Ok(QuboModel {
        dim: b.linear.len(),
        linear: b.linear,
        quadratic: merged,
        offset: b.offset,
        ledger: b.ledger,
        objective_linear,
        objective_quadratic,
        objective_constant,
        compiled,
        has_record: true,
    })
}

/// Compile once per penalty configuration, for grid searches.
pub fn compile_sweep(model: &ConstrainedModel, configs: &[PenaltyConfig]) -> Result<Vec<QuboModel>> {
    configs.iter().map(|c| compile(model, c)).collect()
}

impl QuboModel {
    pub fn quadratic(&self) -> &[(u32, u32, f64)] {
        &self.quadratic
    }

    pub fn compiled_constraints(&self) -> &[CompiledConstraint] {
        &self.compiled
    }

    fn check_dim(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: bits.len() });
        }
        Ok(())
    }

    /// `x^T Q x + offset`.
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        self.check_dim(bits)?;
        let mut e = self.offset;
        for (i, &l) in self.linear.iter().enumerate() {
            if bits[i] == 1 {
                e += l;
            }
        }
        for &(i, j, c) in &self.quadratic {
            if bits[i as usize] == 1 && bits[j as usize] == 1 {
                e += c;
            }
        }
        Ok(e)
    }

    /// Value of the original objective at `bits`.
    pub fn objective(&self, bits: &[u8]) -> Result<f64> {
        self.check_dim(bits)?;
        let mut v = self.objective_constant;
        for &(i, c) in &self.objective_linear {
            v += c * bits[i as usize] as i64;
        }
        for &(i, j, c) in &self.objective_quadratic {
            v += c * (bits[i as usize] * bits[j as usize]) as i64;
        }
        Ok(v as f64)
    }

    /// Split the energy into objective value plus per-kind penalty totals.
    /// Only available for QUBOs that carry their compilation record.
    pub fn penalty_breakdown(&self, bits: &[u8]) -> Result<PenaltyBreakdown> {
        self.check_dim(bits)?;
        if !self.has_record {
            return Err(Error::Config(
                "QUBO has no compilation record (imported matrix?)".into(),
            ));
        }
        let mut penalties: Vec<(ConstraintKind, f64)> = Vec::new();
        for c in &self.compiled {
            let p = c.penalty_at(bits);
            match penalties.iter_mut().find(|(k, _)| *k == c.kind) {
                Some(entry) => entry.1 += p,
                None => penalties.push((c.kind, p)),
            }
        }
        Ok(PenaltyBreakdown { objective: self.objective(bits)?, penalties })
    }

    /// Set every slack bit to the value minimizing its constraint's penalty,
    /// leaving all other bits untouched.
    pub fn complete_slack(&self, bits: &mut [u8]) {
        for c in &self.compiled {
            if c.slack.is_empty() {
                continue;
            }
            let residual = c.target - c.lhs(bits);
            // All slack weights of one constraint share a sign.
            let sign = c.slack[0].1.signum();
            let gap: i64 = c.slack.iter().map(|&(_, w)| w.abs()).sum();
            let mut want = (residual * sign).clamp(0, gap);
            let mut order: Vec<(u32, i64)> = c.slack.iter().map(|&(i, w)| (i, w.abs())).collect();
            order.sort_unstable_by(|a, b| b.1.cmp(&a.1));
            for (i, w) in order {
                if w <= want {
                    bits[i as usize] = 1;
                    want -= w;
                } else {
                    bits[i as usize] = 0;
                }
            }
        }
    }

    /// Lift model-level values to a full QUBO bit vector: copy the binaries,
    /// binary-encode the integers, choose the optimal slack completion.
    pub fn lift(&self, assignment: &ModelAssignment) -> Result<Vec<u8>> {
        let mut bits = vec![0u8; self.dim];
        let mut num_binary = 0;
        for (idx, origin) in self.ledger.iter().enumerate() {
            match *origin {
                VarOrigin::Binary { ordinal } => {
                    num_binary += 1;
                    let v = *assignment.binary.get(ordinal).ok_or(Error::Dimension {
                        expected: ordinal + 1,
                        got: assignment.binary.len(),
                    })?;
                    if v > 1 {
                        return Err(Error::Validation(format!(
                            "binary variable {ordinal} has non-bit value {v}"
                        )));
                    }
                    bits[idx] = v;
                }
                VarOrigin::IntegerBit { .. } | VarOrigin::SlackBit { .. } => {}
            }
        }
        // Greedy decomposition of each integer's offset from its lower bound.
        let mut residuals: HashMap<usize, i64> = HashMap::new();
        let mut int_bits: Vec<(usize, u32, i64)> = Vec::new(); // (qubo idx, ordinal-ish key via lower?), collect first
        for (idx, origin) in self.ledger.iter().enumerate() {
            if let VarOrigin::IntegerBit { ordinal, weight, lower, .. } = *origin {
                let t = ordinal - num_binary;
                let value = *assignment.integer.get(t).ok_or(Error::Dimension {
                    expected: t + 1,
                    got: assignment.integer.len(),
                })?;
                residuals.entry(ordinal).or_insert(value - lower);
                int_bits.push((idx, ordinal as u32, weight));
            }
        }
        for (_, r) in residuals.iter() {
            if *r < 0 {
                return Err(Error::Validation("integer value below its lower bound".into()));
            }
        }
        // Assign bits per integer, largest weight first.
        int_bits.sort_unstable_by(|a, b| (a.1, std::cmp::Reverse(a.2)).cmp(&(b.1, std::cmp::Reverse(b.2))));
        for (idx, ordinal, weight) in int_bits {
            let r = residuals.get_mut(&(ordinal as usize)).expect("seeded above");
            if weight <= *r {
                bits[idx] = 1;
                *r -= weight;
            }
        }
        if let Some((ord, r)) = residuals.iter().find(|(_, &r)| r != 0) {
            return Err(Error::Validation(format!(
                "integer variable {ord} value not representable (residual {r})"
            )));
        }
        self.complete_slack(&mut bits);
        Ok(bits)
    }

    /// Line-oriented text export: `dim offset`, then `i i c` diagonal entries
    /// and `i j c` (i < j) off-diagonal entries.
    pub fn export_text(&self) -> String {
        let mut out = format!("{} {}\n", self.dim, self.offset);
        for (i, &l) in self.linear.iter().enumerate() {
            if l != 0.0 {
                out.push_str(&format!("{i} {i} {l}\n"));
            }
        }
        for &(i, j, c) in &self.quadratic {
            out.push_str(&format!("{i} {j} {c}\n"));
        }
        out
    }

    /// Parse the [`QuboModel::export_text`] format. The result carries no
    /// provenance ledger or compilation record.
    pub fn import_text(text: &str) -> Result<QuboModel> {
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty QUBO document"))?;
        let mut it = header.split_whitespace();
        let dim: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(1, "bad dimension in header"))?;
        let offset: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(1, "bad offset in header"))?;
        let mut linear = vec![0.0; dim];
        let mut quadratic = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let i: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(lineno + 1, "bad row index"))?;
            let j: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(lineno + 1, "bad column index"))?;
            let c: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(lineno + 1, "bad coefficient"))?;
            if i >= dim || j >= dim || i > j {
                return Err(err(lineno + 1, "index outside upper triangle"));
            }
            if i == j {
                linear[i] += c;
            } else {
                quadratic.push((i as u32, j as u32, c));
            }
        }
        quadratic.sort_unstable_by_key(|&(i, j, _)| (i, j));
        Ok(QuboModel {
            dim,
            linear,
            quadratic,
            offset,
            ledger: Vec::new(),
            objective_linear: Vec::new(),
            objective_quadratic: Vec::new(),
            objective_constant: 0,
            compiled: Vec::new(),
            has_record: false,
        })
    }

    /// Ledger as JSON; arc naming filled in when a [`VarMap`] is supplied.
    pub fn ledger_json(&self, map: Option<&VarMap>) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .ledger
            .iter()
            .enumerate()
            .map(|(index, origin)| {
                let mut v = serde_json::to_value(origin).expect("ledger serializes");
                v["index"] = index.into();
                if let (VarOrigin::Binary { ordinal }, Some(m)) = (origin, map) {
                    if let Some((r, i, j)) = m.arc_of(*ordinal) {
                        v["origin"] = "arc".into();
                        v["truck"] = r.into();
                        v["from"] = i.into();
                        v["to"] = j.into();
                    }
                } else if let (VarOrigin::IntegerBit { ordinal, .. }, Some(m)) = (origin, map) {
                    if let Some((r, i)) = m.u_of(*ordinal) {
                        v["truck"] = r.into();
                        v["node"] = i.into();
                    }
                }
                v
            })
            .collect();
        serde_json::Value::Array(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Constraint;

    /// The worked two-variable example: minimize -3a - 5b + 2ab  s.t. a + b = 1.
    fn toy_model() -> ConstrainedModel {
        ConstrainedModel {
            num_binary: 2,
            objective: vec![(0, -3), (1, -5)],
            quadratic_objective: vec![(0, 1, 2)],
            constraints: vec![Constraint {
                kind: ConstraintKind::VisitOnce,
                sense: Sense::Eq,
                terms: vec![(0, 1), (1, 1)],
                rhs: 1,
            }],
            integer_bounds: vec![],
        }
    }

    fn toy_qubo(p: f64) -> QuboModel {
        compile(&toy_model(), &PenaltyConfig::uniform(p)).unwrap()
    }

    #[test]
    fn toy_matrix_is_base_plus_p_correction() {
        // Q = [[-3, 2], [0, -5]] + P [[-1, 2], [0, -1]], offset P
        for p in [1.0, 3.0, 10.0] {
            let q = toy_qubo(p);
            assert_eq!(q.dim, 2);
            assert_eq!(q.linear, vec![-3.0 - p, -5.0 - p]);
            assert_eq!(q.quadratic(), &[(0, 1, 2.0 + 2.0 * p)]);
            assert_eq!(q.offset, p);
        }
    }

    #[test]
    fn toy_energies_at_p10() {
        let q = toy_qubo(10.0);
        assert_eq!(q.energy(&[0, 0]).unwrap(), 10.0);
        assert_eq!(q.energy(&[0, 1]).unwrap(), -5.0);
        assert_eq!(q.energy(&[1, 0]).unwrap(), -3.0);
        assert_eq!(q.energy(&[1, 1]).unwrap(), 4.0);
    }

    #[test]
    fn energy_checks_dimension() {
        let q = toy_qubo(10.0);
        assert!(matches!(q.energy(&[0, 1, 1]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn unconstrained_model_compiles_to_objective() {
        let mut m = toy_model();
        m.constraints.clear();
        let q = compile(&m, &PenaltyConfig::uniform(1.0)).unwrap();
        assert_eq!(q.offset, 0.0);
        assert_eq!(q.linear, vec![-3.0, -5.0]);
        assert_eq!(q.energy(&[0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn missing_multiplier_is_a_config_error() {
        let m = toy_model();
        let mut cfg = PenaltyConfig::uniform(1.0);
        cfg.multipliers.remove(&ConstraintKind::VisitOnce);
        assert!(matches!(compile(&m, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn slack_bit_counts() {
        assert_eq!(slack_bits(0), 0);
        assert_eq!(slack_bits(1), 1);
        assert_eq!(slack_bits(5), 3);
        assert_eq!(slack_weights(5), vec![1, 2, 2]);
        assert_eq!(slack_weights(1), vec![1]);
        assert!(slack_weights(0).is_empty());
    }

    #[test]
    fn slack_weights_cover_every_gap_value() {
        for gap in 0u64..=64 {
            let weights = slack_weights(gap);
            assert_eq!(weights.iter().sum::<i64>(), gap as i64);
            let mut reachable = vec![false; gap as usize + 1];
            for mask in 0u32..(1 << weights.len()) {
                let v: i64 = weights
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &w)| w)
                    .sum();
                reachable[v as usize] = true;
            }
            assert!(reachable.iter().all(|&r| r), "gap {gap} not fully covered");
        }
    }

    #[test]
    fn penalty_breakdown_toy() {
        let q = toy_qubo(10.0);
        let b = q.penalty_breakdown(&[1, 1]).unwrap();
        assert_eq!(b.objective, -6.0);
        assert_eq!(b.total_penalty(), 10.0);
        let b = q.penalty_breakdown(&[1, 0]).unwrap();
        assert_eq!(b.objective, -3.0);
        assert_eq!(b.total_penalty(), 0.0);
        // objective + penalties = energy everywhere
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let b = q.penalty_breakdown(&bits).unwrap();
            assert_eq!(b.objective + b.total_penalty(), q.energy(&bits).unwrap());
        }
    }

    #[test]
    fn compiling_twice_is_deterministic() {
        let m = toy_model();
        let cfg = PenaltyConfig::uniform(7.5);
        assert_eq!(compile(&m, &cfg).unwrap(), compile(&m, &cfg).unwrap());
    }

    #[test]
    fn export_import_roundtrip() {
        let q = toy_qubo(10.0);
        let text = q.export_text();
        let back = QuboModel::import_text(&text).unwrap();
        assert_eq!(back.dim, q.dim);
        assert_eq!(back.linear, q.linear);
        assert_eq!(back.quadratic(), q.quadratic());
        assert_eq!(back.offset, q.offset);
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(back.energy(&bits).unwrap(), q.energy(&bits).unwrap());
        }
        assert!(matches!(back.penalty_breakdown(&[0, 0]), Err(Error::Config(_))));
    }

    #[test]
    fn inequality_slack_roundtrip() {
        // 2a + 3b <= 4 with one integer c in [1, 3]: c - a >= 1
        let m = ConstrainedModel {
            num_binary: 2,
            objective: vec![(0, 1), (1, 1)],
            quadratic_objective: vec![],
            constraints: vec![
                Constraint {
                    kind: ConstraintKind::Capacity,
                    sense: Sense::Le,
                    terms: vec![(0, 2), (1, 3)],
                    rhs: 4,
                },
                Constraint {
                    kind: ConstraintKind::Mtz,
                    sense: Sense::Ge,
                    terms: vec![(2, 1), (0, -1)],
                    rhs: 1,
                },
            ],
            integer_bounds: vec![(1, 3)],
        };
        let q = compile(&m, &PenaltyConfig::uniform(50.0)).unwrap();

        // Feasible: a=1, b=0, c=2 -> lifted energy = objective = 1.
        let lifted = q
            .lift(&ModelAssignment { binary: vec![1, 0], integer: vec![2] })
            .unwrap();
        assert_eq!(q.energy(&lifted).unwrap(), 1.0);
        let b = q.penalty_breakdown(&lifted).unwrap();
        assert_eq!(b.total_penalty(), 0.0);

        // Infeasible: a=1, b=1 violates the Le constraint by 1 -> penalty 50.
        let mut bad = q
            .lift(&ModelAssignment { binary: vec![1, 1], integer: vec![3] })
            .unwrap();
        q.complete_slack(&mut bad);
        let b = q.penalty_breakdown(&bad).unwrap();
        assert_eq!(b.penalty_of(ConstraintKind::Capacity), 50.0);
        assert_eq!(b.penalty_of(ConstraintKind::Mtz), 0.0);
    }
}
