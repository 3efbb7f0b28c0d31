//! CVRPLIB instance ingestion.
//!
//! Parses the `.vrp` text dialect (NAME / DIMENSION / CAPACITY /
//! EDGE_WEIGHT_TYPE: EUC_2D / NODE_COORD_SECTION / DEMAND_SECTION /
//! DEPOT_SECTION), normalizes node ids so the depot sits at index 0, and
//! derives the distance matrix and the tightness of an instance.

use std::collections::HashMap;
use std::io::BufRead;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A parsed CVRP problem. Index 0 is always the depot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Number of customers, depot excluded.
    pub n_customers: usize,
    /// Vehicle capacity, shared by the whole fleet.
    pub capacity: i64,
    /// Number of trucks.
    pub fleet_size: usize,
    /// One (x, y) pair per node, depot first.
    pub coords: Vec<(f64, f64)>,
    /// One demand per node; `demands[0] == 0`.
    pub demands: Vec<i64>,
    /// Published best-known cost, when the instance is in the bundled table.
    pub best_known: Option<i64>,
}

impl Instance {
    /// Total number of nodes including the depot.
    pub fn num_nodes(&self) -> usize {
        self.n_customers + 1
    }

    pub fn total_demand(&self) -> i64 {
        self.demands.iter().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.demands.len() != self.n_customers + 1 {
            return Err(Error::Validation(format!(
                "expected {} demand entries, found {}",
                self.n_customers + 1,
                self.demands.len()
            )));
        }
        if self.demands[0] != 0 {
            return Err(Error::Validation(format!(
                "depot demand must be 0, found {}",
                self.demands[0]
            )));
        }
        if self.capacity <= 0 {
            return Err(Error::Validation(format!(
                "capacity must be positive, found {}",
                self.capacity
            )));
        }
        if self.fleet_size == 0 {
            return Err(Error::Validation("fleet size must be at least 1".into()));
        }
        if let Some((i, &d)) = self
            .demands
            .iter()
            .enumerate()
            .find(|(_, &d)| d < 0 || d > self.capacity)
        {
            return Err(Error::Validation(format!(
                "demand {d} of node {i} outside [0, capacity={}]",
                self.capacity
            )));
        }
        Ok(())
    }
}

/// Dense symmetric integer distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub dim: usize,
    costs: Vec<i64>,
}

impl DistanceMatrix {
    pub fn cost(&self, i: usize, j: usize) -> i64 {
        self.costs[i * self.dim + j]
    }

    pub fn max_cost(&self) -> i64 {
        self.costs.iter().copied().max().unwrap_or(0)
    }
}

/// EUC_2D edge weights: nearest integer with halves rounded up.
pub fn euclid_distance_matrix(instance: &Instance) -> DistanceMatrix {
    let dim = instance.num_nodes();
    let mut costs = vec![0i64; dim * dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (xi, yi) = instance.coords[i];
            let (xj, yj) = instance.coords[j];
            let d = ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt();
            let c = (d + 0.5).floor() as i64;
            costs[i * dim + j] = c;
            costs[j * dim + i] = c;
        }
    }
    DistanceMatrix { dim, costs }
}

/// Tightness: total demand over total fleet capacity.
pub fn tightness(instance: &Instance) -> f64 {
    instance.total_demand() as f64 / (instance.fleet_size as f64 * instance.capacity as f64)
}

/// Published per-instance metadata bundled with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct KnownEntry {
    pub vehicles: usize,
    pub best_known: i64,
    /// Published tightness.
    pub tau: f64,
    /// Second published tightness where sources disagree.
    #[serde(default)]
    pub tau_alt: Option<f64>,
}

#[derive(Deserialize)]
struct KnownTable {
    version: u32,
    instances: HashMap<String, KnownEntry>,
}

fn known_table() -> &'static KnownTable {
    static TABLE: OnceLock<KnownTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let raw = include_str!("../resources/best_known.json");
        let table: KnownTable = serde_json::from_str(raw).expect("bundled best_known.json is valid");
        assert_eq!(table.version, 1);
        table
    })
}

/// Look up the bundled metadata for an instance name, if present.
pub fn known_entry(name: &str) -> Option<KnownEntry> {
    known_table().instances.get(name).copied()
}

/// Fleet size from the conventional `-k<p>` name suffix.
pub fn fleet_from_name(name: &str) -> Option<usize> {
    let idx = name.rfind("-k")?;
    name[idx + 2..].parse().ok()
}

/// Compare the computed tightness against the published value(s) and log any
/// disagreement. Mismatches are warnings, never failures.
pub fn check_tau_against_published(instance: &Instance) -> f64 {
    let tau = tightness(instance);
    if let Some(entry) = known_entry(&instance.name) {
        if let Some(alt) = entry.tau_alt {
            log::warn!(
                "{}: published tightness values disagree ({:.3} vs {:.3}); computed {:.3}",
                instance.name,
                entry.tau,
                alt,
                tau
            );
        } else if (tau - entry.tau).abs() > 0.001 {
            log::warn!(
                "{}: computed tightness {:.3} differs from published {:.3}",
                instance.name,
                tau,
                entry.tau
            );
        }
    }
    tau
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Coords,
    Demands,
    Depot,
    Done,
}

/// Parse a CVRPLIB `.vrp` stream.
///
/// File node ids are 1-based; the parsed instance is 0-indexed with the depot
/// moved to index 0. The fleet size comes from the `-k<p>` suffix of the
/// instance name unless `fleet_override` is given.
pub fn parse_instance<R: BufRead>(source: R, fleet_override: Option<usize>) -> Result<Instance> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<i64> = None;
    let mut weight_type: Option<String> = None;
    let mut coords: HashMap<usize, (f64, f64)> = HashMap::new();
    let mut demands: HashMap<usize, i64> = HashMap::new();
    let mut depot_ids: Vec<usize> = Vec::new();
    let mut section = Section::Header;

    let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };

    for (lineno, raw) in source.lines().enumerate() {
        let lineno = lineno + 1;
        let raw = raw?;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            section = Section::Done;
            continue;
        }
        match section {
            Section::Done => {
                return Err(err(lineno, "content after EOF"));
            }
            Section::Header => {
                if let Some((key, value)) = line.split_once(':') {
                    let key = key.trim();
                    let value = value.trim();
                    match key {
                        "NAME" => name = value.to_string(),
                        "DIMENSION" => {
                            dimension = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(lineno, "DIMENSION is not an integer"))?,
                            )
                        }
                        "CAPACITY" => {
                            capacity = Some(
                                value
                                    .parse()
                                    .map_err(|_| err(lineno, "CAPACITY is not an integer"))?,
                            )
                        }
                        "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_string()),
                        // COMMENT, TYPE and anything else informational.
                        _ => {}
                    }
                } else if line == "NODE_COORD_SECTION" {
                    section = Section::Coords;
                } else if line == "DEMAND_SECTION" {
                    section = Section::Demands;
                } else if line == "DEPOT_SECTION" {
                    section = Section::Depot;
                } else {
                    return Err(err(lineno, "expected `KEY : VALUE` or a section marker"));
                }
            }
            Section::Coords => match line {
                "DEMAND_SECTION" => section = Section::Demands,
                "DEPOT_SECTION" => section = Section::Depot,
                _ => {
                    let mut it = line.split_whitespace();
                    let id: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad node id in NODE_COORD_SECTION"))?;
                    let x: f64 = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad x coordinate"))?;
                    let y: f64 = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad y coordinate"))?;
                    if coords.insert(id, (x, y)).is_some() {
                        return Err(err(lineno, "duplicate node id in NODE_COORD_SECTION"));
                    }
                }
            },
            Section::Demands => match line {
                "NODE_COORD_SECTION" => section = Section::Coords,
                "DEPOT_SECTION" => section = Section::Depot,
                _ => {
                    let mut it = line.split_whitespace();
                    let id: usize = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad node id in DEMAND_SECTION"))?;
                    let d: i64 = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(lineno, "bad demand value"))?;
                    if demands.insert(id, d).is_some() {
                        return Err(err(lineno, "duplicate node id in DEMAND_SECTION"));
                    }
                }
            },
            Section::Depot => {
                let id: i64 = line
                    .parse()
                    .map_err(|_| err(lineno, "bad entry in DEPOT_SECTION"))?;
                if id == -1 {
                    section = Section::Header;
                } else if id >= 1 {
                    depot_ids.push(id as usize);
                } else {
                    return Err(err(lineno, "bad depot id"));
                }
            }
        }
    }

    let dimension = dimension.ok_or_else(|| err(0, "missing DIMENSION"))?;
    let capacity = capacity.ok_or_else(|| err(0, "missing CAPACITY"))?;
    match weight_type.as_deref() {
        Some("EUC_2D") => {}
        Some(other) => return Err(Error::UnsupportedFormat(format!("EDGE_WEIGHT_TYPE {other}"))),
        None => return Err(err(0, "missing EDGE_WEIGHT_TYPE")),
    }
    if dimension < 2 {
        return Err(Error::Validation(format!(
            "DIMENSION must be at least 2, found {dimension}"
        )));
    }
    if coords.len() != dimension {
        return Err(Error::Validation(format!(
            "expected {dimension} coordinate entries, found {}",
            coords.len()
        )));
    }
    if demands.len() != dimension {
        return Err(Error::Validation(format!(
            "expected {dimension} demand entries, found {}",
            demands.len()
        )));
    }
    if depot_ids.len() != 1 {
        return Err(Error::Validation(format!(
            "expected exactly one depot, found {}",
            depot_ids.len()
        )));
    }
    let depot = depot_ids[0];
    if !coords.contains_key(&depot) {
        return Err(Error::Validation(format!("depot id {depot} has no coordinates")));
    }

    // Normalize: depot first, remaining nodes in ascending file order.
    let mut order: Vec<usize> = (1..=dimension).filter(|&id| id != depot).collect();
    order.sort_unstable();
    order.insert(0, depot);

    let mut norm_coords = Vec::with_capacity(dimension);
    let mut norm_demands = Vec::with_capacity(dimension);
    for id in &order {
        let c = coords
            .get(id)
            .ok_or_else(|| Error::Validation(format!("node {id} missing coordinates")))?;
        let d = demands
            .get(id)
            .ok_or_else(|| Error::Validation(format!("node {id} missing demand")))?;
        norm_coords.push(*c);
        norm_demands.push(*d);
    }

    let fleet_size = match fleet_override.or_else(|| fleet_from_name(&name)) {
        Some(p) => p,
        None => {
            return Err(Error::Validation(format!(
                "fleet size not in instance name `{name}`; pass an explicit truck count"
            )))
        }
    };

    let instance = Instance {
        best_known: known_entry(&name).map(|e| e.best_known),
        name,
        n_customers: dimension - 1,
        capacity,
        fleet_size,
        coords: norm_coords,
        demands: norm_demands,
    };
    instance.validate()?;
    Ok(instance)
}

/// Parse an instance from a file path.
pub fn load_instance(path: &std::path::Path, fleet_override: Option<usize>) -> Result<Instance> {
    let file = std::fs::File::open(path)?;
    parse_instance(std::io::BufReader::new(file), fleet_override)
}

/// Write an instance back out in the `.vrp` dialect read by [`parse_instance`].
pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let fmt = |v: f64| {
        if v.fract() == 0.0 {
            format!("{}", v as i64)
        } else {
            format!("{v}")
        }
    };
    out.push_str(&format!("NAME : {}\n", instance.name));
    out.push_str("TYPE : CVRP\n");
    out.push_str(&format!("DIMENSION : {}\n", instance.num_nodes()));
    out.push_str("EDGE_WEIGHT_TYPE : EUC_2D\n");
    out.push_str(&format!("CAPACITY : {}\n", instance.capacity));
    out.push_str("NODE_COORD_SECTION\n");
    for (i, (x, y)) in instance.coords.iter().enumerate() {
        out.push_str(&format!(" {} {} {}\n", i + 1, fmt(*x), fmt(*y)));
    }
    out.push_str("DEMAND_SECTION\n");
    for (i, d) in instance.demands.iter().enumerate() {
        out.push_str(&format!("{} {}\n", i + 1, d));
    }
    out.push_str("DEPOT_SECTION\n 1\n -1\nEOF\n");
    out
}
