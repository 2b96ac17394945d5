//! Text and JSON rendering of law-suite results and cohomology tables.

use serde::Serialize;

use crate::derived;
use crate::field::Field;
use crate::laws::{LawReport, Status};
use crate::models::Model;
use crate::sheaf::StalkSheaf;

pub const SCHEMA: &str = "sixops-report/1";

/// Graded dimensions of `H^k(X; F)` for one sheaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyRow {
    pub space: String,
    pub sheaf: String,
    pub field: String,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub laws: Vec<LawReport>,
    pub cohomology: Vec<CohomologyRow>,
}

impl Report {
    pub fn new(laws: Vec<LawReport>, cohomology: Vec<CohomologyRow>) -> Self {
        Report { schema: SCHEMA, laws, cohomology }
    }

    pub fn failed(&self) -> bool {
        self.laws.iter().any(LawReport::failed)
    }
}

/// Short display names for the shipped spaces.
pub fn display_name(model: &str) -> String {
    match model {
        "circle" => "S1",
        "sphere" => "S2",
        "torus" => "T2",
        "rp2" => "RP2",
        "interval" => "I",
        "circle-x-circle" => "S1xS1",
        other => other,
    }
    .to_string()
}

pub fn cohomology_row<F: Field>(model: &str, sheaf: &str, f: &StalkSheaf<F>) -> CohomologyRow {
    CohomologyRow { space: display_name(model), sheaf: sheaf.to_string(), field: F::label(), dims: derived::cohomology(f) }
}

/// Cohomology of the constant sheaf on each model.
pub fn constant_cohomology<F: Field>(models: &[(String, Model)]) -> Vec<CohomologyRow> {
    models.iter().map(|(n, m)| cohomology_row(n, "constant", &StalkSheaf::<F>::constant(m.space()))).collect()
}

fn dims_text(d: &[usize]) -> String {
    format!("[{}]", d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

pub fn cohomology_text(rows: &[CohomologyRow]) -> String {
    let mut s = String::from("space, sheaf, field, dims\n");
    for r in rows {
        s.push_str(&format!("{}, {}, {}, {}\n", r.space, r.sheaf, r.field, dims_text(&r.dims)));
    }
    s
}

fn status_text(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skipped",
    }
}

pub fn laws_text(reports: &[LawReport]) -> String {
    let mut s = format!(
        "{:<22} {:>6} {:>6} {:>13} {:>13} {:>7}  {}\n",
        "law", "field", "trials", "asserted p/f", "reported p/f", "skipped", "status"
    );
    for r in reports {
        s.push_str(&format!(
            "{:<22} {:>6} {:>6} {:>13} {:>13} {:>7}  {}\n",
            r.law,
            r.field,
            r.trials,
            format!("{}/{}", r.asserted_pass, r.asserted_fail),
            format!("{}/{}", r.reported_pass, r.reported_fail),
            r.skipped,
            status_text(r.status)
        ));
        for w in &r.warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
        if let Some(c) = &r.counterexample {
            s.push_str(&format!("  counterexample: trial {} (seed {}): {}", c.trial, c.trial_seed, c.instance));
            if !c.detail.is_empty() {
                s.push_str(&format!(" [{}]", c.detail));
            }
            s.push('\n');
        }
    }
    s
}

pub fn text(r: &Report) -> String {
    let mut s = laws_text(&r.laws);
    if !r.cohomology.is_empty() {
        s.push('\n');
        s.push_str(&cohomology_text(&r.cohomology));
    }
    s
}

pub fn json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new(vec![], vec![]);
        assert_eq!(text(&r).lines().count(), 1);
        assert_eq!(cohomology_text(&[]), "space, sheaf, field, dims\n");
    }
}
