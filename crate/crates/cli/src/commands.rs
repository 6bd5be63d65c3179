use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use mmflaw::arch::serialize::save_model;
use mmflaw::arch::{ArchConfig, ArchKind, Lambda};
use mmflaw::data::{gen_synthetic, load_csv, write_csv, BimodalDataset, SynthConfig};
use mmflaw::exec::{configure_threads, Execution};
use mmflaw::experiments::report::{render, rows_from_cv, rows_from_sweep, rows_from_train};
use mmflaw::experiments::{
    check_sweep, run_cv, run_sweep, train_fold, CvReport, ReportFormat, ReportRow, SweepTable, TrainOptions,
    TrainReport,
};
use mmflaw::graph::{featurize_corpus, load_graph_corpus};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{Command, Common, CvArgs, FeaturizeArgs, ModelArgs, ReportArgs, SweepArgs, SynthArgs, TrainArgs};
use crate::config::{merge, to_config_json};
use crate::error::CliError;

/// Contents of `report.json`: the result plus the settings that produced it,
/// in `--config` format.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum SavedReport {
    Train { settings: Value, result: TrainReport },
    Cv { settings: Value, result: CvReport },
    Sweep { settings: Value, result: SweepTable },
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Featurize(a) => featurize(a),
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Cv(a) => cv(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    }
}

fn setup(common: &Common) -> Result<(), CliError> {
    if let Some(n) = common.threads {
        configure_threads(n)?;
    }
    Ok(())
}

fn existing(path: &Path) -> Result<&Path, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::input(path, std::io::ErrorKind::NotFound.into()))
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::output(path, e))
}

fn settings_value<T: Serialize>(v: &T) -> Value {
    serde_json::from_str(&to_config_json(v)).expect("settings are JSON")
}

fn featurize(args: FeaturizeArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let input = args.input.as_deref().ok_or_else(|| CliError::missing("GRAPHS"))?;
    let output = args.output.as_deref().ok_or_else(|| CliError::missing("-o/--output"))?;
    let corpus = load_graph_corpus(existing(input)?)?;
    let (schema, ds, unlabeled) = featurize_corpus(&corpus, Execution::Parallel)?;
    if unlabeled > 0 {
        warn!("{unlabeled} of {} functions have no label; written as 0", ds.len());
    }
    write_csv(&ds, output)?;
    println!("{} functions × {} features → {}", ds.len(), schema.keys.len(), output.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let output = args.output.as_deref().ok_or_else(|| CliError::missing("-o/--output"))?;
    let d = SynthConfig::benchmark();
    let cfg = SynthConfig {
        n: args.n.unwrap_or(d.n),
        latent_dim: args.latent_dim.unwrap_or(d.latent_dim),
        dim_x: args.dim_x.unwrap_or(d.dim_x),
        dim_y: args.dim_y.unwrap_or(d.dim_y),
        noise_x: args.noise_x.unwrap_or(d.noise_x),
        noise_y: args.noise_y.unwrap_or(d.noise_y),
        seed: args.seed.unwrap_or(d.seed),
    };
    let ds = gen_synthetic(&cfg)?;
    write_csv(&ds, output)?;
    let [neg, pos] = ds.label_counts();
    println!("{} rows ({pos} positive, {neg} negative) → {}", ds.len(), output.display());
    Ok(())
}

fn load_run(model: &ModelArgs) -> Result<(ArchConfig, BimodalDataset), CliError> {
    let data = model.data.as_deref().ok_or_else(|| CliError::missing("--data"))?;
    let ds = load_csv(existing(data)?)?;
    let cfg = model.arch_config(ds.dim_x(), ds.dim_y());
    cfg.validate()?;
    Ok((cfg, ds))
}

fn options(model: &ModelArgs) -> TrainOptions {
    TrainOptions {
        augment_train: model.augment.unwrap_or(false),
    }
}

fn output_dir(output: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    let dir = output.cloned().ok_or_else(|| CliError::missing("-o/--output"))?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::output(&dir, e))?;
    Ok(dir)
}

/// Writes report.json, report.csv, report.md and config.json into `dir`.
fn save_reports<T: Serialize>(dir: &Path, settings: &T, saved: &SavedReport) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(saved).map_err(|e| CliError::Invalid(e.to_string()))?;
    json.push('\n');
    write(&dir.join("report.json"), &json)?;
    write(&dir.join("report.csv"), &render_saved(saved, ReportFormat::Csv)?)?;
    write(&dir.join("report.md"), &render_saved(saved, ReportFormat::Markdown)?)?;
    write(&dir.join("config.json"), &to_config_json(settings))
}

fn train(args: TrainArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let dir = output_dir(args.output.as_ref())?;
    let (cfg, ds) = load_run(&args.model)?;
    let fold = args.fold.unwrap_or(0);
    let outcome = train_fold(&cfg, &ds, options(&args.model), fold)?;
    let settings = TrainArgs {
        model: args.model.resolved(&cfg),
        fold: Some(fold),
        ..args.clone()
    };
    let r = &outcome.report;
    println!(
        "{} fold {fold}: test balanced accuracy {:.4}, y zeroed {:.4}",
        cfg.kind.label(),
        r.test_balanced_accuracy,
        r.test_balanced_accuracy_y_zeroed
    );
    save_reports(
        &dir,
        &settings,
        &SavedReport::Train {
            settings: settings_value(&settings),
            result: outcome.report.clone(),
        },
    )?;
    save_model(&outcome.model, &dir.join("model.json"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cv(args: CvArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let dir = output_dir(args.output.as_ref())?;
    let (cfg, ds) = load_run(&args.model)?;
    let report = run_cv(&cfg, &ds, options(&args.model), Execution::Parallel)?;
    for f in &report.folds {
        println!("fold {}: {:.4}", f.fold, f.test_balanced_accuracy);
    }
    if cfg.kind == ArchKind::CorrNet && cfg.lambda == Lambda::Auto {
        info!("auto lambda per fold: {:?}", report.lambdas());
    }
    println!(
        "{}: {:.4} ± {:.4} (y zeroed {:.4} ± {:.4})",
        cfg.kind.label(),
        report.mean,
        report.std,
        report.mean_y_zeroed,
        report.std_y_zeroed
    );
    let settings = CvArgs {
        model: args.model.resolved(&cfg),
        ..args.clone()
    };
    save_reports(
        &dir,
        &settings,
        &SavedReport::Cv {
            settings: settings_value(&settings),
            result: report,
        },
    )?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let kind = args.kind.ok_or_else(|| CliError::missing("--kind"))?;
    check_sweep(kind, args.model.arch.unwrap_or(ArchKind::CorrNet))?;
    if args.model.augment.is_some() {
        return Err(CliError::Invalid(
            "--augment does not apply to sweeps; the singlemulti sweep runs both settings".into(),
        ));
    }
    let dir = output_dir(args.output.as_ref())?;
    let (cfg, ds) = load_run(&args.model)?;
    let table = run_sweep(kind, &ds, &cfg, Execution::Parallel)?;
    let settings = SweepArgs {
        model: ModelArgs {
            augment: None,
            ..args.model.resolved(&cfg)
        },
        ..args.clone()
    };
    let saved = SavedReport::Sweep {
        settings: settings_value(&settings),
        result: table,
    };
    print!("{}", render_saved(&saved, ReportFormat::Markdown)?);
    save_reports(&dir, &settings, &saved)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn rows_of(saved: &SavedReport) -> Vec<ReportRow> {
    match saved {
        SavedReport::Train { result, .. } => rows_from_train(result),
        SavedReport::Cv { result, .. } => rows_from_cv(result),
        SavedReport::Sweep { result, .. } => rows_from_sweep(result),
    }
}

fn format_lambdas(ls: &[f64]) -> String {
    ls.iter().map(|l| format!("{l:.6}")).collect::<Vec<_>>().join(", ")
}

/// Markdown gets a note with the per-fold λ of every auto-λ run.
pub fn render_saved(saved: &SavedReport, format: ReportFormat) -> Result<String, CliError> {
    let mut text = render(&rows_of(saved), format)?;
    if format == ReportFormat::Markdown {
        let mut notes = Vec::new();
        match saved {
            SavedReport::Train { result, .. } => {
                if result.config.lambda == Lambda::Auto {
                    if let Some(l) = result.lambda {
                        notes.push(format!("auto λ (fold {}): {}", result.fold, format_lambdas(&[l])));
                    }
                }
            }
            SavedReport::Cv { result, .. } => {
                if result.config.lambda == Lambda::Auto && !result.lambdas().is_empty() {
                    notes.push(format!("auto λ per fold: {}", format_lambdas(&result.lambdas())));
                }
            }
            SavedReport::Sweep { result, .. } => {
                for c in &result.cells {
                    let r = &c.report;
                    if c.arch == ArchKind::CorrNet && r.config.lambda == Lambda::Auto {
                        notes.push(format!(
                            "auto λ per fold, {} / {}: {}",
                            c.row,
                            c.column,
                            format_lambdas(&r.lambdas())
                        ));
                    }
                }
            }
        }
        if !notes.is_empty() {
            text.push('\n');
            for n in notes {
                let _ = writeln!(text, "{n}  ");
            }
        }
    }
    Ok(text)
}

fn report(args: ReportArgs) -> Result<(), CliError> {
    let args = merge(&args, args.common.config.as_deref())?;
    setup(&args.common)?;
    let mut input = args.input.clone().ok_or_else(|| CliError::missing("REPORT"))?;
    if input.is_dir() {
        input.push("report.json");
    }
    let text = std::fs::read_to_string(existing(&input)?).map_err(|e| CliError::input(&input, e))?;
    let saved: SavedReport =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", input.display())))?;
    let out = render_saved(&saved, args.format.unwrap_or(ReportFormat::Markdown))?;
    match &args.output {
        Some(path) => write(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}
