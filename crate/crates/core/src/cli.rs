//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a runtime error (the error's variant name
//! is printed), 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::basis::BasisMode;
use crate::data::{self, Dataset, Split};
use crate::error::{AopfError, Result};
use crate::gradcheck;
use crate::report::{self, Artifact};
use crate::trainer::{self, Protocol, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "aopf", version, about = "Adaptive Jacobi-family spectral graph filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model on the fixed split (or one fold).
    Train(TrainCmd),
    /// 10-fold cross-validation.
    Cv(CvCmd),
    /// Sweep modes and polynomial degrees.
    Ablate(AblateCmd),
    /// Compare analytic gradients against central differences.
    Gradcheck(GradcheckCmd),
    /// Validate a dataset and print its statistics.
    Inspect(InspectCmd),
    /// Dump per-epoch training curves.
    ExportCurves(CurvesCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Fixed,
    Cv,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    weight_decay: f64,
    #[arg(long = "dropout", default_value_t = 0.5)]
    dropout_p: f64,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    #[arg(long, default_value_t = 50)]
    patience: usize,
    /// Falls back to $AOPF_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    stabilize: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    add_self_loops: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    row_normalize: bool,
    /// Seed of the 10-fold plan; defaults to the run seed.
    #[arg(long)]
    fold_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for `.csv` outputs, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct TrainCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "static")]
    mode: String,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Train on this fold instead of the dataset's fixed split.
    #[arg(long)]
    fold: Option<usize>,
}

#[derive(Debug, Args)]
struct CvCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "static")]
    mode: String,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Debug, Args)]
struct AblateCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "static,gegenbauer,jacobi")]
    modes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,10")]
    k: Vec<usize>,
    /// Defaults to `fixed` when the dataset carries splits, else `cv`.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
}

#[derive(Debug, Args)]
struct GradcheckCmd {
    /// Falls back to $AOPF_SEED, then 7.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InspectCmd {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurvesCmd {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "static,gegenbauer,jacobi")]
    modes: Vec<String>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    fold: Option<usize>,
}

fn env_seed() -> Option<u64> {
    std::env::var("AOPF_SEED").ok().and_then(|s| s.trim().parse().ok())
}

impl Common {
    fn config(&self, mode: BasisMode, k: usize) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            mode,
            k,
            hidden: self.hidden,
            lr: self.lr,
            weight_decay: self.weight_decay,
            dropout_p: self.dropout_p,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed: self.seed.or_else(env_seed).unwrap_or(0),
            stabilize: self.stabilize,
            add_self_loops: self.add_self_loops,
            row_normalize: self.row_normalize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn fold_seed(&self, cfg: &TrainConfig) -> u64 {
        self.fold_seed.unwrap_or(cfg.seed)
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(match &self.out {
            Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

fn parse_modes(raw: &[String]) -> Result<Vec<BasisMode>> {
    raw.iter().map(|s| s.trim().parse()).collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(command: &str, dataset: &str, cfg: &TrainConfig, value: &T) -> String {
    Artifact::new(command, dataset, cfg, value).to_json()
}

fn pick_split(ds: &Dataset, fold: Option<usize>, fold_seed: u64) -> Result<(Split, Option<usize>)> {
    match (fold, &ds.fixed_splits) {
        (None, Some(s)) => Ok((s.clone(), None)),
        (fold, _) => {
            let i = fold.unwrap_or(0);
            let plan = data::make_folds(ds, fold_seed)?;
            let split = plan.folds.get(i).cloned().ok_or_else(|| {
                AopfError::ConfigError(format!("fold {i} out of range (0..{})", plan.folds.len()))
            })?;
            Ok((split, Some(i)))
        }
    }
}

fn run_train(cmd: &TrainCmd) -> Result<()> {
    let c = &cmd.common;
    let cfg = c.config(cmd.mode.parse()?, cmd.k)?;
    let ds = data::load_dataset(&c.dataset)?;
    let (split, fold) = pick_split(&ds, cmd.fold, c.fold_seed(&cfg))?;
    let run = trainer::train_run(&cfg, &ds, &split)?;
    eprintln!(
        "{} {} K={}: test_acc={:.4} (best epoch {}, val_acc={:.4}) alpha={:.4} beta={:.4}",
        ds.name,
        cfg.mode,
        cfg.k,
        run.test_acc_at_best,
        run.best_epoch,
        run.val_acc_best,
        run.param_report.effective_alpha,
        run.param_report.effective_beta
    );
    let text = match c.format() {
        Format::Json => json("train", &ds.name, &cfg, &run),
        Format::Csv => report::run_csv("train", &ds.name, &cfg, fold, &run),
    };
    emit(c.out.as_deref(), &text)
}

fn run_cv(cmd: &CvCmd) -> Result<()> {
    let c = &cmd.common;
    let cfg = c.config(cmd.mode.parse()?, cmd.k)?;
    let ds = data::load_dataset(&c.dataset)?;
    let plan = data::make_folds(&ds, c.fold_seed(&cfg))?;
    let cv = trainer::cross_validate_jobs(&cfg, &ds, &plan, c.jobs)?;
    eprintln!(
        "{} {} K={}: mean test_acc={:.4} ± {:.4}, mean alpha={:.4} beta={:.4}",
        ds.name, cfg.mode, cfg.k, cv.mean_test_acc, cv.std_test_acc, cv.mean_alpha, cv.mean_beta
    );
    let text = match c.format() {
        Format::Json => json("cv", &ds.name, &cfg, &cv),
        Format::Csv => report::cv_csv("cv", &ds.name, &cfg, &cv),
    };
    emit(c.out.as_deref(), &text)
}

fn run_ablate(cmd: &AblateCmd) -> Result<()> {
    let c = &cmd.common;
    let modes = parse_modes(&cmd.modes)?;
    let first_k = *cmd.k.first().ok_or_else(|| AopfError::ConfigError("empty --k list".into()))?;
    let cfg = c.config(modes.first().copied().unwrap_or(BasisMode::Static), first_k)?;
    let ds = data::load_dataset(&c.dataset)?;
    let protocol = match cmd.protocol {
        Some(ProtocolArg::Fixed) => Protocol::FixedSplit,
        Some(ProtocolArg::Cv) => Protocol::CrossValidation { fold_seed: c.fold_seed(&cfg) },
        None if ds.fixed_splits.is_some() => Protocol::FixedSplit,
        None => Protocol::CrossValidation { fold_seed: c.fold_seed(&cfg) },
    };
    let table = trainer::k_ablation(&cfg, &ds, &modes, &cmd.k, &protocol, c.jobs)?;
    eprint!("{}", report::ablation_grid(&table));
    let text = match c.format() {
        Format::Json => json("ablate", &ds.name, &cfg, &table),
        Format::Csv => report::ablation_csv("ablate", &ds.name, &cfg, &table),
    };
    emit(c.out.as_deref(), &text)
}

fn run_gradcheck(cmd: &GradcheckCmd) -> Result<bool> {
    let seed = cmd.seed.or_else(env_seed).unwrap_or(7);
    let rep = gradcheck::run(seed)?;
    for chk in &rep.checks {
        eprintln!(
            "{:<11} stabilize={:<5} {:<18} rel_err={:.3e} skipped={}",
            chk.mode, chk.stabilize, chk.param, chk.rel_error, chk.skipped
        );
    }
    println!(
        "max relative error: {:.3e} ({})",
        rep.max_rel_error,
        if rep.passed() { "ok" } else { "FAILED" }
    );
    if let Some(out) = &cmd.out {
        #[derive(Serialize)]
        struct Doc<'a> {
            tool: &'static str,
            command: &'static str,
            tolerance: f64,
            fd_step: f64,
            result: &'a gradcheck::GradCheckReport,
        }
        let doc = Doc {
            tool: report::TOOL,
            command: "gradcheck",
            tolerance: gradcheck::TOLERANCE,
            fd_step: gradcheck::FD_STEP,
            result: &rep,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        emit(Some(out), &text)?;
    }
    Ok(rep.passed())
}

fn run_inspect(cmd: &InspectCmd) -> Result<()> {
    let text = fs::read_to_string(&cmd.dataset).map_err(|e| {
        AopfError::SchemaError(format!("cannot read {}: {e}", cmd.dataset.display()))
    })?;
    let ds = Dataset::parse_unchecked(&text)?;
    let rep = data::validate_dataset(&ds);
    #[derive(Serialize)]
    struct Doc<'a> {
        tool: &'static str,
        command: &'static str,
        name: &'a str,
        num_nodes: usize,
        num_features: usize,
        num_classes: usize,
        has_fixed_splits: bool,
        report: &'a data::ValidationReport,
    }
    let doc = Doc {
        tool: report::TOOL,
        command: "inspect",
        name: &ds.name,
        num_nodes: ds.num_nodes,
        num_features: ds.num_features,
        num_classes: ds.num_classes,
        has_fixed_splits: ds.fixed_splits.is_some(),
        report: &rep,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    emit(cmd.out.as_deref(), &out)
}

fn run_curves(cmd: &CurvesCmd) -> Result<()> {
    let c = &cmd.common;
    let modes = parse_modes(&cmd.modes)?;
    let cfg = c.config(modes.first().copied().unwrap_or(BasisMode::Static), cmd.k)?;
    let ds = data::load_dataset(&c.dataset)?;
    let (split, _) = pick_split(&ds, cmd.fold, c.fold_seed(&cfg))?;
    let prepared = trainer::Prepared::for_config(&ds, &cfg)?;
    let runs = modes
        .iter()
        .map(|&m| trainer::train_prepared(&cfg.with_mode(m), &prepared, &split))
        .collect::<Result<Vec<_>>>()?;
    let text = match c.format() {
        Format::Json => {
            #[derive(Serialize)]
            struct Curve<'a> {
                mode: BasisMode,
                k: usize,
                curve: &'a [trainer::EpochRecord],
            }
            let curves: Vec<Curve> = runs
                .iter()
                .map(|r| Curve { mode: r.config.mode, k: r.config.k, curve: &r.curve })
                .collect();
            json("export-curves", &ds.name, &cfg, &curves)
        }
        Format::Csv => report::curves_csv("export-curves", &ds.name, &cfg, &runs),
    };
    emit(c.out.as_deref(), &text)
}

/// Parses `argv` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Train(c) => run_train(c).map(|_| true),
        Command::Cv(c) => run_cv(c).map(|_| true),
        Command::Ablate(c) => run_ablate(c).map(|_| true),
        Command::Gradcheck(c) => run_gradcheck(c),
        Command::Inspect(c) => run_inspect(c).map(|_| true),
        Command::ExportCurves(c) => run_curves(c).map(|_| true),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            1
        }
    }
}
