//! Text and CSV rendering of the toolkit's tables: model density rows,
//! subtour-elimination size comparisons, and the per-instance results table.

use serde::{Deserialize, Serialize};

use crate::bench::BenchReport;
use crate::error::Result;
use crate::model::{ModelStats, SecSize};

/// Group digits with commas: 1048576 -> "1,048,576".
pub fn thousands(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (k, ch) in digits.chars().enumerate() {
        if k > 0 && (digits.len() - k) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// One row of the model-density table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub instance: String,
    pub variables: usize,
    pub constraints: usize,
    pub biases: usize,
    pub tau: f64,
}

impl StatsRow {
    pub fn new(instance: impl Into<String>, stats: &ModelStats) -> Self {
        StatsRow {
            instance: instance.into(),
            variables: stats.num_variables,
            constraints: stats.num_constraints,
            biases: stats.num_biases,
            tau: stats.tau,
        }
    }
}

pub fn format_stats_table(rows: &[StatsRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>10} {:>12} {:>10} {:>7}\n",
        "instance", "variables", "constraints", "biases", "tau"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:>10} {:>12} {:>10} {:>7.3}\n",
            r.instance, r.variables, r.constraints, r.biases, r.tau
        ));
    }
    out
}

pub fn stats_csv(rows: &[StatsRow]) -> String {
    let mut out = String::from("instance,variables,constraints,biases,tau\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.3}\n",
            r.instance, r.variables, r.constraints, r.biases, r.tau
        ));
    }
    out
}

/// Side-by-side size comparison of the two subtour eliminations for one `n`.
pub fn format_sec_table(rows: &[(u32, SecSize, SecSize)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<6} {:<13} {:>12} {:>16} {:>16} {:>10} {:>12}\n",
        "n", "formulation", "variables", "dominant", "exact", "binary", "continuous"
    ));
    for (n, dfj, mtz) in rows {
        out.push_str(&format!(
            "{:<6} {:<13} {:>12} {:>16} {:>16} {:>10} {:>12}\n",
            n,
            "DFJ",
            "O(n^2)",
            format!("2^n = {}", thousands(dfj.constraints_dominant)),
            thousands(dfj.constraints_exact),
            thousands(dfj.ancillary_binary),
            thousands(dfj.ancillary_continuous),
        ));
        out.push_str(&format!(
            "{:<6} {:<13} {:>12} {:>16} {:>16} {:>10} {:>12}\n",
            "",
            "MTZ",
            "O(n^2)",
            format!("n^2 = {}", thousands(mtz.constraints_dominant)),
            thousands(mtz.constraints_exact),
            thousands(mtz.ancillary_binary),
            thousands(mtz.ancillary_continuous),
        ));
    }
    out
}

pub fn sec_csv(rows: &[(u32, SecSize, SecSize)]) -> String {
    let mut out =
        String::from("n,formulation,constraints_dominant,constraints_exact,ancillary_binary,ancillary_continuous\n");
    for (n, dfj, mtz) in rows {
        out.push_str(&format!(
            "{n},DFJ,{},{},{},{}\n",
            dfj.constraints_dominant, dfj.constraints_exact, dfj.ancillary_binary, dfj.ancillary_continuous
        ));
        out.push_str(&format!(
            "{n},MTZ,{},{},{},{}\n",
            mtz.constraints_dominant, mtz.constraints_exact, mtz.ancillary_binary, mtz.ancillary_continuous
        ));
    }
    out
}

/// One instance column of the results table. Also the schema of fixture
/// files fed to the `report` command for results produced elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsColumn {
    pub instance: String,
    pub best_known: i64,
    pub runs: usize,
    pub best: Option<i64>,
    pub worst: Option<i64>,
    pub average: Option<f64>,
    pub stddev: Option<f64>,
    pub mape: Option<f64>,
    pub min_time_us: Option<u64>,
}

impl ResultsColumn {
    pub fn from_report(report: &BenchReport) -> Self {
        ResultsColumn {
            instance: report.instance.clone(),
            best_known: report.e_best,
            runs: report.runs,
            best: report.aggregates.map(|a| a.best),
            worst: report.aggregates.map(|a| a.worst),
            average: report.aggregates.map(|a| a.mean),
            stddev: report.aggregates.map(|a| a.stddev),
            mape: report.mape(),
            min_time_us: report.min_time_us(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFixture {
    pub columns: Vec<ResultsColumn>,
}

impl ResultsFixture {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn fmt_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

fn fmt_cell<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

/// Results table: metrics as rows, instances as columns.
pub fn format_results_table(columns: &[ResultsColumn]) -> String {
    let width = 12usize.max(columns.iter().map(|c| c.instance.len()).max().unwrap_or(0)) + 2;
    let label_width = 22usize;
    let runs = columns.first().map(|c| c.runs).unwrap_or(0);
    let mut out = String::new();

    let mut push_row = |label: &str, cells: Vec<String>| {
        out.push_str(&format!("{label:<label_width$}"));
        for cell in cells {
            out.push_str(&format!("{cell:>width$}"));
        }
        out.push('\n');
    };

    push_row("metric", columns.iter().map(|c| c.instance.clone()).collect());
    push_row("best known", columns.iter().map(|c| c.best_known.to_string()).collect());
    push_row("best found", columns.iter().map(|c| fmt_cell(&c.best)).collect());
    push_row("worst found", columns.iter().map(|c| fmt_cell(&c.worst)).collect());
    push_row("average", columns.iter().map(|c| fmt_cell(&c.average.map(fmt_f64))).collect());
    push_row("std dev", columns.iter().map(|c| fmt_cell(&c.stddev.map(fmt_f64))).collect());
    push_row(
        &format!("MAPE ({runs})"),
        columns.iter().map(|c| fmt_cell(&c.mape.map(fmt_f64))).collect(),
    );
    push_row("min service time (us)", columns.iter().map(|c| fmt_cell(&c.min_time_us)).collect());
    out
}

pub fn results_csv(columns: &[ResultsColumn]) -> String {
    let mut out = String::from(
        "instance,best_known,runs,best,worst,average,stddev,mape,min_time_us\n",
    );
    let blank = |s: String| if s == "-" { String::new() } else { s };
    for c in columns {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.instance,
            c.best_known,
            c.runs,
            blank(fmt_cell(&c.best)),
            blank(fmt_cell(&c.worst)),
            blank(fmt_cell(&c.average)),
            blank(fmt_cell(&c.stddev)),
            blank(fmt_cell(&c.mape)),
            blank(fmt_cell(&c.min_time_us)),
        ));
    }
    out
}
