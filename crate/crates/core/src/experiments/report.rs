use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Fixed header of `results.csv`.
pub const CSV_HEADER: &str = "cell_id,label,l,energy,eta,realizations,value,uncertainty,bound,status,note";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
    Skipped,
}

impl CellStatus {
    fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
            CellStatus::Skipped => "skipped",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(CellStatus::Ok),
            "failed" => Ok(CellStatus::Failed),
            "skipped" => Ok(CellStatus::Skipped),
            _ => Err(Error::Invalid(format!("unknown cell status {s:?}"))),
        }
    }
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub cell_id: usize,
    pub label: String,
    pub l: Option<f64>,
    pub energy: Option<f64>,
    pub eta: Option<f64>,
    pub realizations: usize,
    pub value: Option<f64>,
    pub uncertainty: Option<f64>,
    pub bound: Option<f64>,
    pub status: CellStatus,
    pub note: String,
}

/// `bound`: the constant is explicit; `scaling`: shape, ratio or slope statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Bound,
    Scaling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub kind: CriterionKind,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub seed: u64,
    pub cells: Vec<Cell>,
    pub criteria: Vec<Criterion>,
}

/// The JSON summary document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub criteria: Vec<Criterion>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn field(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Invalid(format!("bad number {s:?} in results table")))
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            config_hash: config.hash(),
            seed: config.seed,
            cells: vec![],
            criteria: vec![],
        }
    }

    /// Appends a cell and returns its id.
    pub fn cell(&mut self, label: impl Into<String>) -> CellBuilder<'_> {
        let id = self.cells.len();
        self.cells.push(Cell {
            cell_id: id,
            label: label.into(),
            l: None,
            energy: None,
            eta: None,
            realizations: 1,
            value: None,
            uncertainty: None,
            bound: None,
            status: CellStatus::Ok,
            note: String::new(),
        });
        CellBuilder(self.cells.last_mut().unwrap())
    }

    pub fn criterion(&mut self, name: impl Into<String>, kind: CriterionKind, value: f64, bound: f64, pass: bool) {
        self.criteria.push(Criterion {
            name: name.into(),
            kind,
            value: finite(value),
            bound: finite(bound),
            pass,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.pass)
    }

    pub fn criterion_named(&self, prefix: &str) -> Vec<&Criterion> {
        self.criteria.iter().filter(|c| c.name.starts_with(prefix)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.cell_id,
                csv_text(&c.label),
                opt(c.l),
                opt(c.energy),
                opt(c.eta),
                c.realizations,
                opt(c.value),
                opt(c.uncertainty),
                opt(c.bound),
                c.status.as_str(),
                csv_text(&c.note),
            );
        }
        s
    }

    pub fn summary(&self, config: &ExperimentConfig) -> Summary {
        Summary {
            config: config.clone(),
            seed: self.seed,
            criteria: self.criteria.clone(),
        }
    }

    /// `name | kind | value | bound | pass` lines.
    pub fn criteria_table(criteria: &[Criterion]) -> String {
        let w = criteria.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut s = format!("{:<w$}  {:<7}  {:>14}  {:>14}  pass\n", "name", "kind", "value", "bound");
        for c in criteria {
            let kind = match c.kind {
                CriterionKind::Bound => "bound",
                CriterionKind::Scaling => "scaling",
            };
            let num = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<w$}  {:<7}  {:>14}  {:>14}  {}",
                c.name,
                kind,
                num(c.value),
                num(c.bound),
                if c.pass { "yes" } else { "NO" }
            );
        }
        s
    }
}

/// Parses a table written by [`ExperimentReport::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<Cell>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Invalid("results table has an unexpected header".into()));
    }
    let mut out = Vec::new();
    for line in lines {
        let f = split_csv(line);
        if f.len() != 11 {
            return Err(Error::Invalid(format!("results row has {} fields", f.len())));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad integer {s:?} in results table")))
        };
        out.push(Cell {
            cell_id: int(&f[0])?,
            label: f[1].clone(),
            l: field(&f[2])?,
            energy: field(&f[3])?,
            eta: field(&f[4])?,
            realizations: int(&f[5])?,
            value: field(&f[6])?,
            uncertainty: field(&f[7])?,
            bound: field(&f[8])?,
            status: CellStatus::parse(&f[9])?,
            note: f[10].clone(),
        });
    }
    Ok(out)
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted && chars.peek() == Some(&'"') => {
                chars.next();
                out.last_mut().unwrap().push('"');
            }
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(String::new()),
            _ => out.last_mut().unwrap().push(c),
        }
    }
    out
}

/// Fluent setters for a freshly added cell.
pub struct CellBuilder<'a>(&'a mut Cell);

impl CellBuilder<'_> {
    pub fn id(&self) -> usize {
        self.0.cell_id
    }

    pub fn l(self, v: f64) -> Self {
        self.0.l = finite(v);
        self
    }

    pub fn energy(self, v: f64) -> Self {
        self.0.energy = finite(v);
        self
    }

    pub fn eta(self, v: f64) -> Self {
        self.0.eta = finite(v);
        self
    }

    pub fn realizations(self, r: usize) -> Self {
        self.0.realizations = r;
        self
    }

    pub fn value(self, v: f64) -> Self {
        self.0.value = finite(v);
        self
    }

    pub fn uncertainty(self, v: f64) -> Self {
        self.0.uncertainty = finite(v);
        self
    }

    pub fn bound(self, v: f64) -> Self {
        self.0.bound = finite(v);
        self
    }

    pub fn status(self, s: CellStatus) -> Self {
        self.0.status = s;
        self
    }

    pub fn note(self, s: impl Into<String>) -> Self {
        self.0.note = s.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{sample_config, ExperimentKind};

    #[test]
    fn csv_round_trip() {
        let cfg = sample_config(ExperimentKind::WegnerScan);
        let mut r = ExperimentReport::new(&cfg);
        r.cell("a, \"quoted\"").l(8.0).energy(5.0).eta(0.1).realizations(200).value(1.0 / 3.0).uncertainty(0.01);
        r.cell("b").value(f64::NAN).status(CellStatus::Failed).note("solver: x");
        let csv = r.to_csv();
        let cells = parse_csv(&csv).unwrap();
        assert_eq!(cells, r.cells);
        assert!(csv.starts_with(CSV_HEADER));
    }
}
