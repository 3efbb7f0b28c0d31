//! Translate arc-variable assignments back into vehicle routes, validate them
//! against the business constraints, and cost them.
//!
//! Feasibility here is judged purely on arc variables and demands; slack and
//! integer-encoding bits are ignored, which keeps this check independent of
//! the penalty bookkeeping in the compiler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance};
use crate::model::VarMap;
use crate::qubo::ModelAssignment;

/// One route per truck, each starting and ending at the depot (node 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteSet {
    pub routes: Vec<Vec<usize>>,
    pub loads: Vec<i64>,
    pub total_cost: i64,
}

impl RouteSet {
    /// Trucks are interchangeable; sort routes by first customer for
    /// comparisons.
    pub fn canonical(&self) -> RouteSet {
        let mut paired: Vec<(Vec<usize>, i64)> =
            self.routes.iter().cloned().zip(self.loads.iter().copied()).collect();
        paired.sort_by_key(|(route, _)| route.get(1).copied().unwrap_or(usize::MAX));
        let (routes, loads) = paired.into_iter().unzip();
        RouteSet { routes, loads, total_cost: self.total_cost }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Revisit,
    MissedCustomer,
    CapacityExceeded,
    Subtour,
    DepotRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation { kind, detail: detail.into() }
    }
}

/// Sum of arc costs over consecutive pairs across all routes.
pub fn route_cost(routes: &[Vec<usize>], distances: &DistanceMatrix) -> i64 {
    routes
        .iter()
        .flat_map(|r| r.windows(2))
        .map(|w| distances.cost(w[0], w[1]))
        .sum()
}

/// Follow the arc variables of each truck from the depot and either produce a
/// route set or the list of constraint violations. Violations are data, not
/// errors; any assignment covering the arc ordinals is acceptable input.
pub fn decode(
    bits: &[u8],
    map: &VarMap,
    instance: &Instance,
    distances: &DistanceMatrix,
) -> std::result::Result<RouteSet, Vec<Violation>> {
    assert!(
        bits.len() >= map.total_binary,
        "assignment must cover all {} arc ordinals",
        map.total_binary
    );
    let n = map.n;
    let p = map.p;
    let arc = |r: usize, i: usize, j: usize| bits[map.arc_index(r, i, j)] == 1;
    let mut violations = Vec::new();

    // Global visit counts per customer.
    for j in 1..=n {
        let visits: usize = (0..p)
            .flat_map(|r| (0..=n).filter(move |&i| i != j).map(move |i| (r, i)))
            .filter(|&(r, i)| arc(r, i, j))
            .count();
        match visits {
            0 => violations.push(Violation::new(
                ViolationKind::MissedCustomer,
                format!("customer {j} is never visited"),
            )),
            1 => {}
            v => violations.push(Violation::new(
                ViolationKind::Revisit,
                format!("customer {j} is entered {v} times"),
            )),
        }
    }

    let mut routes = Vec::with_capacity(p);
    let mut loads = Vec::with_capacity(p);
    for r in 0..p {
        let successors = |i: usize| -> Vec<usize> {
            (0..=n).filter(|&j| j != i && arc(r, i, j)).collect()
        };
        let mut used = vec![false; map.total_binary];
        let depot_out = successors(0);
        let mut route = vec![0usize];
        let mut load = 0i64;
        if depot_out.len() != 1 {
            violations.push(Violation::new(
                ViolationKind::DepotRule,
                format!("truck {r} leaves the depot {} times", depot_out.len()),
            ));
        } else {
            // Walk the unique successor chain until back at the depot.
            let mut current = 0usize;
            let mut seen = vec![false; n + 1];
            seen[0] = true;
            loop {
                let next = {
                    let succ = if current == 0 { depot_out.clone() } else { successors(current) };
                    match succ.len() {
                        0 => {
                            violations.push(Violation::new(
                                ViolationKind::DepotRule,
                                format!("route of truck {r} dead-ends at node {current}"),
                            ));
                            break;
                        }
                        1 => succ[0],
                        k => {
                            violations.push(Violation::new(
                                ViolationKind::Revisit,
                                format!("truck {r} leaves node {current} {k} times"),
                            ));
                            break;
                        }
                    }
                };
                used[map.arc_index(r, current, next)] = true;
                if next == 0 {
                    route.push(0);
                    break;
                }
                if seen[next] {
                    violations.push(Violation::new(
                        ViolationKind::Revisit,
                        format!("truck {r} re-enters node {next}"),
                    ));
                    break;
                }
                seen[next] = true;
                route.push(next);
                load += instance.demands[next];
                current = next;
            }
        }

        // Arcs of this truck not consumed by the depot walk either lie on a
        // loop detached from the depot (a subtour) or dangle off it.
        let mut leftover: Vec<(usize, usize)> = Vec::new();
        for i in 0..=n {
            for j in (0..=n).filter(|&j| j != i) {
                let ord = map.arc_index(r, i, j);
                if bits[ord] == 1 && !used[ord] {
                    leftover.push((i, j));
                }
            }
        }
        if !leftover.is_empty() {
            // Peel arcs that cannot sit on a cycle: endpoints with no
            // outgoing (or no incoming) leftover arc, repeatedly.
            let mut on_cycle = leftover.clone();
            loop {
                let mut out_deg = vec![0usize; n + 1];
                let mut in_deg = vec![0usize; n + 1];
                for &(i, j) in &on_cycle {
                    out_deg[i] += 1;
                    in_deg[j] += 1;
                }
                let before = on_cycle.len();
                on_cycle.retain(|&(i, j)| out_deg[j] > 0 && in_deg[i] > 0);
                if on_cycle.len() == before {
                    break;
                }
            }
            if !on_cycle.is_empty() {
                let arcs: Vec<String> =
                    on_cycle.iter().map(|&(i, j)| format!("{i}->{j}")).collect();
                violations.push(Violation::new(
                    ViolationKind::Subtour,
                    format!("truck {r} has arcs disconnected from the depot: {}", arcs.join(" ")),
                ));
            }
            if on_cycle.len() < leftover.len() {
                let stray: Vec<String> = leftover
                    .iter()
                    .filter(|a| !on_cycle.contains(a))
                    .map(|&(i, j)| format!("{i}->{j}"))
                    .collect();
                violations.push(Violation::new(
                    ViolationKind::DepotRule,
                    format!("truck {r} has stray arcs off any route: {}", stray.join(" ")),
                ));
            }
        }

        if load > instance.capacity {
            violations.push(Violation::new(
                ViolationKind::CapacityExceeded,
                format!("truck {r} carries {load} over capacity {}", instance.capacity),
            ));
        }
        routes.push(route);
        loads.push(load);
    }

    if violations.is_empty() {
        let total_cost = route_cost(&routes, distances);
        Ok(RouteSet { routes, loads, total_cost })
    } else {
        Err(violations)
    }
}

/// Inverse of [`decode`]: set the arc variables of each route and complete
/// the integer ordering variables with cumulative delivered loads.
pub fn encode(routes: &[Vec<usize>], map: &VarMap, instance: &Instance) -> Result<ModelAssignment> {
    if routes.len() != map.p {
        return Err(Error::Encoding(format!(
            "expected {} routes, got {}",
            map.p,
            routes.len()
        )));
    }
    let mut binary = vec![0u8; map.total_binary];
    // Off-route ordering variables sit at their lower bound.
    let mut integer: Vec<i64> = (0..map.p)
        .flat_map(|_| (1..=map.n).map(|i| instance.demands[i]))
        .collect();

    for (r, route) in routes.iter().enumerate() {
        if route.first() != Some(&0) || route.last() != Some(&0) || route.len() < 3 {
            return Err(Error::Encoding(format!(
                "route {r} must start and end at the depot and serve a customer: {route:?}"
            )));
        }
        let mut cumulative = 0i64;
        let last_window = route.len() - 2;
        for (pos, w) in route.windows(2).enumerate() {
            let (i, j) = (w[0], w[1]);
            if i == j {
                return Err(Error::Encoding(format!("route {r} has a self-loop at node {i}")));
            }
            if i > map.n || j > map.n {
                return Err(Error::Encoding(format!("route {r} names node outside instance")));
            }
            if j == 0 && pos != last_window {
                return Err(Error::Encoding(format!("route {r} passes through the depot")));
            }
            binary[map.arc_index(r, i, j)] = 1;
            if j != 0 {
                cumulative += instance.demands[j];
                integer[map.u_index(r, j) - map.total_binary] = cumulative;
            }
        }
    }
    Ok(ModelAssignment { binary, integer })
}

/// `Route #r: ...` lines plus a final `Cost` line.
pub fn format_sol(routes: &RouteSet) -> String {
    let mut out = String::new();
    for (r, route) in routes.routes.iter().enumerate() {
        let interior: Vec<String> =
            route[1..route.len() - 1].iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("Route #{}: {}\n", r + 1, interior.join(" ")));
    }
    out.push_str(&format!("Cost {}\n", routes.total_cost));
    out
}
