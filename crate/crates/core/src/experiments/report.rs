//! CSV and markdown tables of experiment results.
//!
//! CSV columns: table, row, column, then the config fields, then mean and
//! std of test balanced accuracy. Markdown tables pivot rows × columns and
//! bold the best mean of each architecture.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cv::CvReport;
use super::sweep::{size_label, SweepKind, SweepTable};
use super::train::TrainReport;
use crate::arch::config::{ArchConfig, ArchKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::Argument(format!("unknown report format `{s}` (csv, markdown)"))),
        }
    }
}

/// One table cell with the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub table: String,
    pub row: String,
    pub column: String,
    pub kind: ArchKind,
    pub layer_width: usize,
    pub layer_depth: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub lambda: String,
    pub init: String,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub augment_train: bool,
    pub mean: f64,
    pub std: f64,
}

impl ReportRow {
    fn new(table: &str, row: String, column: String, cfg: &ArchConfig, augment_train: bool, mean: f64, std: f64) -> Self {
        ReportRow {
            table: table.to_string(),
            row,
            column,
            kind: cfg.kind,
            layer_width: cfg.layer_width,
            layer_depth: cfg.layer_depth,
            dim_x: cfg.dim_x,
            dim_y: cfg.dim_y,
            lambda: cfg.lambda.to_string(),
            init: cfg.init.to_string(),
            epochs: cfg.epochs,
            lr: cfg.lr,
            batch_size: cfg.batch_size,
            seed: cfg.seed,
            augment_train,
            mean,
            std,
        }
    }
}

pub fn rows_from_sweep(t: &SweepTable) -> Vec<ReportRow> {
    t.cells
        .iter()
        .map(|c| {
            let r = &c.report;
            ReportRow::new(
                t.kind.as_str(),
                c.row.clone(),
                c.column.clone(),
                &r.config,
                r.options.augment_train,
                r.mean,
                r.std,
            )
        })
        .collect()
}

pub fn rows_from_cv(r: &CvReport) -> Vec<ReportRow> {
    let c = &r.config;
    vec![ReportRow::new(
        "cv",
        size_label(c.layer_width, c.layer_depth),
        c.kind.label().to_string(),
        c,
        r.options.augment_train,
        r.mean,
        r.std,
    )]
}

/// A single run has no spread; std is reported as 0.
pub fn rows_from_train(r: &TrainReport) -> Vec<ReportRow> {
    let c = &r.config;
    vec![ReportRow::new(
        "train",
        size_label(c.layer_width, c.layer_depth),
        c.kind.label().to_string(),
        c,
        r.options.augment_train,
        r.test_balanced_accuracy,
        0.0,
    )]
}

pub fn to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Format(format!("report row {}: {e}", i + 1))))
        .collect()
}

fn corner(table: &str) -> &'static str {
    match table {
        "init" => "Initialization",
        "lambda" => "Model",
        "singlemulti" => "Model Inputs",
        _ => "(layer size × layer depth)",
    }
}

fn title(table: &str) -> &'static str {
    match table {
        t if t == SweepKind::Size.as_str() => "Architecture Size Results",
        t if t == SweepKind::Init.as_str() => "Model Weights Initialization Results",
        t if t == SweepKind::Lambda.as_str() => "CorrNet Correlation Parameterization Results",
        t if t == SweepKind::SingleMulti.as_str() => "Single+Multimodal vs. Multimodal Results",
        "cv" => "Cross-Validation Results",
        _ => "Training Results",
    }
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Markdown pivot table; the best mean of each architecture is bold (all
/// cells tied at the best value are bold).
pub fn to_markdown(rows: &[ReportRow]) -> Result<String> {
    let first = rows.first().ok_or_else(|| Error::Argument("no results to report".into()))?;
    let row_labels = first_seen(rows.iter().map(|r| r.row.as_str()));
    let col_labels = first_seen(rows.iter().map(|r| r.column.as_str()));
    let best = |kind: ArchKind| {
        rows.iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.mean)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut out = format!("### {}\n\n", title(&first.table));
    out.push_str(&format!("| {} |", corner(&first.table)));
    for c in &col_labels {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|:---|");
    out.push_str(&"---:|".repeat(col_labels.len()));
    out.push('\n');
    for rl in &row_labels {
        out.push_str(&format!("| {rl} |"));
        for cl in &col_labels {
            match rows.iter().find(|r| r.row == *rl && r.column == *cl) {
                Some(r) => {
                    let text = format!("{:.3} ± {:.3}", r.mean, r.std);
                    if rows.len() > 1 && r.mean == best(r.kind) {
                        out.push_str(&format!(" **{text}** |"));
                    } else {
                        out.push_str(&format!(" {text} |"));
                    }
                }
                None => out.push_str(" – |"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn render(rows: &[ReportRow], format: ReportFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Argument("no results to report".into()));
    }
    match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Markdown => to_markdown(rows),
    }
}

/// Writes `rows` to `path` in `format`.
pub fn emit_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<()> {
    let text = render(rows, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(row: &str, column: &str, kind: ArchKind, mean: f64) -> ReportRow {
        let cfg = ArchConfig::new(kind, 722, 77);
        ReportRow::new("size", row.into(), column.into(), &cfg, false, mean, 0.0125)
    }

    fn table() -> Vec<ReportRow> {
        vec![
            row("50 × 1", "CorrNet", ArchKind::CorrNet, 0.78),
            row("50 × 1", "JAE", ArchKind::Jae, 0.83),
            row("100 × 2", "CorrNet", ArchKind::CorrNet, 0.81),
            row("100 × 2", "JAE", ArchKind::Jae, 0.8),
        ]
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let text = to_csv(&table()).unwrap();
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, table());
        assert_eq!(to_csv(&back).unwrap(), text);
    }

    #[test]
    fn csv_column_order() {
        let text = to_csv(&table()[..1]).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "table,row,column,kind,layer_width,layer_depth,dim_x,dim_y,lambda,init,epochs,lr,batch_size,seed,augment_train,mean,std"
        );
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn best_per_architecture_is_bold() {
        let md = to_markdown(&table()).unwrap();
        assert!(md.contains("**0.810 ± 0.013**"));
        assert!(md.contains("**0.830 ± 0.013**"));
        assert!(md.contains("| 0.780 ± 0.013 |"));
        assert_eq!(md.matches("**").count(), 4);
        assert!(md.contains("| (layer size × layer depth) | CorrNet | JAE |"));
    }
}
