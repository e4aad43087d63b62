//! CSV and JSON artifacts.
//!
//! CSV uses `,` separators, `.` decimals, LF line endings and a header row.
//! Floats are written in shortest round-trip form, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decision::{DecisionOutcome, LossRatio};
use crate::error::{Error, Result};
use crate::hypotheses::{HypothesisPair, IncorporationReport};
use crate::inference::PosteriorSummary;
use crate::loss::{ActionPair, ParameterSpace};
use crate::partition::RelevancePartition;
use crate::region::{Interval, RegionSet};
use crate::sim::{ProcedureOutput, RateTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRow {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub label: &'static str,
}

/// Negligible and relevant intervals in order of their lower end.
pub fn partition_rows(p: &RelevancePartition) -> Vec<RegionRow> {
    let row = |iv: &Interval, label| RegionRow {
        lo: iv.lo,
        hi: iv.hi,
        lo_open: iv.lo_open,
        hi_open: iv.hi_open,
        label,
    };
    let mut rows: Vec<RegionRow> = p
        .negligible
        .intervals()
        .iter()
        .map(|iv| row(iv, "negligible"))
        .chain(p.relevant.intervals().iter().map(|iv| row(iv, "relevant")))
        .collect();
    rows.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.lo_open.cmp(&b.lo_open)));
    rows
}

/// `lo,hi,lo_open,hi_open,label`
pub fn partition_csv(p: &RelevancePartition) -> Result<String> {
    let rows = partition_rows(p);
    if rows.is_empty() {
        return Ok("lo,hi,lo_open,hi_open,label\n".to_string());
    }
    write_csv(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionDocument {
    pub parameter_space: ParameterSpace,
    pub actions: ActionPair,
    pub grid_size: usize,
    pub root_tol: f64,
    pub negligible: RegionSet,
    pub relevant: RegionSet,
    pub crossings: Vec<f64>,
}

impl PartitionDocument {
    pub fn new(
        partition: &RelevancePartition,
        parameter_space: ParameterSpace,
        actions: ActionPair,
        grid_size: usize,
        root_tol: f64,
    ) -> Self {
        PartitionDocument {
            parameter_space,
            actions,
            grid_size,
            root_tol,
            negligible: partition.negligible.clone(),
            relevant: partition.relevant.clone(),
            crossings: partition.crossings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisDocument {
    pub h0: RegionSet,
    pub h1: RegionSet,
    pub complete: bool,
    pub partial: bool,
    /// Counterexample to the first condition that fails: partial, then complete.
    pub witness: Option<f64>,
    pub complete_witness: Option<f64>,
    pub partial_witness: Option<f64>,
}

impl HypothesisDocument {
    pub fn new(pair: &HypothesisPair, report: &IncorporationReport) -> Self {
        HypothesisDocument {
            h0: pair.h0.clone(),
            h1: pair.h1.clone(),
            complete: report.complete.holds,
            partial: report.partial.holds,
            witness: report.partial.witness.or(report.complete.witness),
            complete_witness: report.complete.witness,
            partial_witness: report.partial.witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionDocument {
    pub rule: &'static str,
    pub actions: ActionPair,
    pub loss_ratio: LossRatio,
    pub h0: RegionSet,
    pub h1: RegionSet,
    pub restricted_space: bool,
    pub posterior: PosteriorSummary,
    #[serde(flatten)]
    pub outcome: DecisionOutcome,
    /// Label of the chosen action, or `indeterminate`.
    pub chosen: String,
}

/// `complete,partial,witness`
pub fn hypothesis_csv(doc: &HypothesisDocument) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        complete: bool,
        partial: bool,
        witness: Option<f64>,
    }
    write_csv([Row {
        complete: doc.complete,
        partial: doc.partial,
        witness: doc.witness,
    }])
}

/// `rule,decision,posterior_h0,posterior_h1,posterior_odds,threshold_lo,threshold_hi`
pub fn decision_csv(doc: &DecisionDocument) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        rule: &'static str,
        decision: &'static str,
        posterior_h0: f64,
        posterior_h1: f64,
        posterior_odds: f64,
        threshold_lo: f64,
        threshold_hi: f64,
    }
    let o = &doc.outcome;
    write_csv([Row {
        rule: doc.rule,
        decision: o.decision.label(),
        posterior_h0: o.posterior_h0,
        posterior_h1: o.posterior_h1,
        posterior_odds: o.posterior_odds,
        threshold_lo: o.threshold_lo,
        threshold_hi: o.threshold_hi,
    }])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub procedure: String,
    pub verdict: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub bayes_factor: Option<f64>,
    pub posterior_h0: Option<f64>,
    pub posterior_h1: Option<f64>,
    pub threshold_lo: Option<f64>,
    pub threshold_hi: Option<f64>,
    pub message: String,
}

impl ComparisonRow {
    pub fn new(procedure: impl Into<String>, result: &Result<ProcedureOutput>) -> Self {
        let mut row = ComparisonRow {
            procedure: procedure.into(),
            verdict: "error".into(),
            statistic: None,
            p_value: None,
            bayes_factor: None,
            posterior_h0: None,
            posterior_h1: None,
            threshold_lo: None,
            threshold_hi: None,
            message: String::new(),
        };
        match result {
            Ok(ProcedureOutput::Comparator(c)) => {
                row.verdict = c.verdict.into();
                row.statistic = Some(c.statistic);
                row.p_value = c.p_value;
                row.bayes_factor = c.bayes_factor;
                row.threshold_lo = Some(c.threshold);
                row.threshold_hi = Some(c.threshold);
            }
            Ok(ProcedureOutput::Decision(d)) => {
                row.verdict = d.decision.label().into();
                row.statistic = Some(d.posterior_odds);
                row.posterior_h0 = Some(d.posterior_h0);
                row.posterior_h1 = Some(d.posterior_h1);
                row.threshold_lo = Some(d.threshold_lo);
                row.threshold_hi = Some(d.threshold_hi);
            }
            Err(e) => row.message = e.to_string(),
        }
        row
    }
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Result<String> {
    write_csv(rows)
}

/// `true_effect,n,procedure,verdict,count,frequency,std_error`
pub fn rate_table_csv(table: &RateTable) -> Result<String> {
    write_csv(&table.rows)
}

/// Fixed-width table for the terminal.
pub fn rate_table_console(table: &RateTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {}  seed {}  replicates {}",
        table.scenario, table.seed, table.replicates
    );
    let _ = writeln!(
        out,
        "{:>12} {:>8} {:<20} {:<15} {:>9} {:>9}",
        "true_effect", "n", "procedure", "verdict", "frequency", "std_error"
    );
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{:>12.6} {:>8} {:<20} {:<15} {:>9.4} {:>9.4}",
            r.true_effect, r.n, r.procedure, r.verdict, r.frequency, r.std_error
        );
    }
    out
}
