//! Ablation grids. Each cell is a full five-fold run; cells share the fold
//! plan and differ in their training seeds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cv::{run_cv_cell, CvReport};
use super::train::TrainOptions;
use crate::arch::config::{ArchConfig, ArchKind, Lambda};
use crate::data::dataset::BimodalDataset;
use crate::error::{Error, Result};
use crate::exec::{try_map_jobs, Execution};
use crate::nn::init::DEFAULT_CONSTANT;
use crate::nn::InitScheme;

/// `(layer width, layer depth)` grid of the size sweep.
pub const SIZES: [(usize, usize); 5] = [(50, 1), (100, 1), (500, 1), (100, 2), (50, 4)];
pub const LAMBDAS: [Lambda; 6] = [
    Lambda::Value(0.0),
    Lambda::Value(0.01),
    Lambda::Value(0.1),
    Lambda::Value(1.0),
    Lambda::Value(10.0),
    Lambda::Auto,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Size,
    Init,
    Lambda,
    SingleMulti,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Size => "size",
            SweepKind::Init => "init",
            SweepKind::Lambda => "lambda",
            SweepKind::SingleMulti => "singlemulti",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepKind::Size, SweepKind::Init, SweepKind::Lambda, SweepKind::SingleMulti]
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Argument(format!("unknown sweep kind `{s}` (size, init, lambda, singlemulti)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub row: String,
    pub column: String,
    pub arch: ArchKind,
    pub report: CvReport,
}

/// Cells in row-major order of `rows` × `columns`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<SweepCell>,
}

struct Plan {
    row: String,
    column: String,
    cfg: ArchConfig,
    opts: TrainOptions,
}

pub fn size_label(width: usize, depth: usize) -> String {
    format!("{width} × {depth}")
}

pub fn lambda_label(l: Lambda) -> String {
    match l {
        Lambda::Auto => "auto λ".into(),
        Lambda::Value(v) => format!("λ = {v}"),
    }
}

pub fn init_label(s: InitScheme) -> &'static str {
    match s {
        InitScheme::Constant(_) => "Constant",
        InitScheme::Kaiming => "Kaiming",
        InitScheme::Xavier => "Xavier",
        InitScheme::Lsuv => "LSUV",
    }
}

fn with_kind(base: &ArchConfig, kind: ArchKind) -> ArchConfig {
    ArchConfig { kind, ..base.clone() }
}

/// Rejects grids that cannot be built from a base architecture.
pub fn check_sweep(kind: SweepKind, base: ArchKind) -> Result<()> {
    if kind == SweepKind::Lambda && base != ArchKind::CorrNet {
        return Err(Error::Config("lambda sweep requires corrnet".into()));
    }
    Ok(())
}

fn plan(kind: SweepKind, base: &ArchConfig) -> Result<Vec<Plan>> {
    check_sweep(kind, base.kind)?;
    let mut cells = Vec::new();
    let mut push = |row: String, column: &str, cfg: ArchConfig, opts| {
        cells.push(Plan {
            row,
            column: column.to_string(),
            cfg,
            opts,
        })
    };
    let plain = TrainOptions::default();
    match kind {
        SweepKind::Size => {
            for (w, d) in SIZES {
                for arch in ArchKind::MULTIMODAL {
                    let mut cfg = with_kind(base, arch).with_size(w, d);
                    if arch == ArchKind::CorrNet {
                        cfg.lambda = Lambda::Value(0.0);
                    }
                    push(size_label(w, d), arch.label(), cfg, plain);
                }
            }
        }
        SweepKind::Init => {
            for scheme in [
                InitScheme::Constant(DEFAULT_CONSTANT),
                InitScheme::Kaiming,
                InitScheme::Xavier,
                InitScheme::Lsuv,
            ] {
                for arch in ArchKind::MULTIMODAL {
                    let cfg = ArchConfig {
                        init: scheme,
                        ..with_kind(base, arch)
                    };
                    push(init_label(scheme).into(), arch.label(), cfg, plain);
                }
            }
        }
        SweepKind::Lambda => {
            for l in LAMBDAS {
                let cfg = ArchConfig {
                    lambda: l,
                    ..base.clone()
                };
                push(ArchKind::CorrNet.label().into(), &lambda_label(l), cfg, plain);
            }
        }
        SweepKind::SingleMulti => {
            for (row, augment_train) in [("Single+Multimodal", true), ("Multimodal", false)] {
                for arch in ArchKind::MULTIMODAL {
                    push(row.into(), arch.label(), with_kind(base, arch), TrainOptions { augment_train });
                }
            }
        }
    }
    Ok(cells)
}

fn unique(labels: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in labels {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

/// Runs every cell of the grid as an independent five-fold experiment.
pub fn run_sweep(kind: SweepKind, ds: &BimodalDataset, base: &ArchConfig, exec: Execution) -> Result<SweepTable> {
    base.validate()?;
    let cells = plan(kind, base)?;
    for c in &cells {
        c.cfg.validate()?;
    }
    let reports = try_map_jobs(exec, &cells, |i, c| run_cv_cell(&c.cfg, ds, c.opts, i, exec))?;
    Ok(SweepTable {
        kind,
        rows: unique(cells.iter().map(|c| c.row.clone())),
        columns: unique(cells.iter().map(|c| c.column.clone())),
        cells: cells
            .into_iter()
            .zip(reports)
            .map(|(c, report)| SweepCell {
                row: c.row,
                column: c.column,
                arch: c.cfg.kind,
                report,
            })
            .collect(),
    })
}
