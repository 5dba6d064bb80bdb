//! JSON and CSV renderings of run results.
//!
//! Every artifact carries the tool version and the resolved configuration.
//! Rendering is a pure function of its inputs, so identical invocations
//! produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::trainer::{AblationTable, CvResult, EpochRecord, RunResult, TrainConfig};

pub const TOOL: &str = concat!("aopf ", env!("CARGO_PKG_VERSION"));

pub const CSV_HEADER: &str = "dataset,mode,K,fold,seed,best_epoch,val_acc,test_acc,alpha,beta";

#[derive(Debug, Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub tool: &'static str,
    pub command: &'a str,
    pub dataset: &'a str,
    pub config: &'a TrainConfig,
    pub result: &'a T,
}

impl<'a, T: Serialize> Artifact<'a, T> {
    pub fn new(command: &'a str, dataset: &'a str, config: &'a TrainConfig, result: &'a T) -> Self {
        Self {
            tool: TOOL,
            command,
            dataset,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact is always serializable");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn preamble(out: &mut String, command: &str, config: &TrainConfig) {
    let cfg = serde_json::to_string(config).expect("config serializes");
    let _ = writeln!(out, "# tool: {TOOL}");
    let _ = writeln!(out, "# command: {command}");
    let _ = writeln!(out, "# config: {cfg}");
}

fn push_run(out: &mut String, dataset: &str, fold: Option<usize>, r: &RunResult) {
    let fold = fold.map_or(String::new(), |f| f.to_string());
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        csv_field(dataset),
        r.config.mode,
        r.config.k,
        fold,
        r.seed,
        r.best_epoch,
        r.val_acc_best,
        r.test_acc_at_best,
        r.param_report.effective_alpha,
        r.param_report.effective_beta
    );
}

/// Flat per-run CSV for a single run (empty `fold` for fixed splits).
pub fn run_csv(command: &str, dataset: &str, config: &TrainConfig, fold: Option<usize>, r: &RunResult) -> String {
    let mut out = String::new();
    preamble(&mut out, command, config);
    out.push_str(CSV_HEADER);
    out.push('\n');
    push_run(&mut out, dataset, fold, r);
    out
}

pub fn cv_csv(command: &str, dataset: &str, config: &TrainConfig, cv: &CvResult) -> String {
    let mut out = String::new();
    preamble(&mut out, command, config);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, r) in cv.folds.iter().enumerate() {
        push_run(&mut out, dataset, Some(i), r);
    }
    out
}

/// One line per run of every ablation cell.
pub fn ablation_csv(command: &str, dataset: &str, config: &TrainConfig, table: &AblationTable) -> String {
    let mut out = String::new();
    preamble(&mut out, command, config);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let per_fold = matches!(table.protocol, crate::trainer::Protocol::CrossValidation { .. });
    for row in &table.rows {
        for (i, r) in row.runs.iter().enumerate() {
            push_run(&mut out, dataset, per_fold.then_some(i), r);
        }
    }
    out
}

/// Mode-by-K accuracy grid, one row per K, in the layout of a K-ablation
/// table.
pub fn ablation_grid(table: &AblationTable) -> String {
    let mut modes = Vec::new();
    let mut ks = Vec::new();
    for r in &table.rows {
        if !modes.contains(&r.mode) {
            modes.push(r.mode);
        }
        if !ks.contains(&r.k) {
            ks.push(r.k);
        }
    }
    let mut out = String::from("K");
    for m in &modes {
        let _ = write!(out, ",{m}");
    }
    out.push('\n');
    for k in ks {
        let _ = write!(out, "{k}");
        for &m in &modes {
            match table.get(m, k) {
                Some(r) => {
                    let _ = write!(out, ",{:.4}", r.mean_test_acc);
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub const CURVE_HEADER: &str = "dataset,mode,K,epoch,train_loss,val_loss,val_acc";

pub fn curves_csv(command: &str, dataset: &str, config: &TrainConfig, runs: &[RunResult]) -> String {
    let mut out = String::new();
    preamble(&mut out, command, config);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for r in runs {
        for EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_acc,
        } in &r.curve
        {
            let _ = writeln!(
                out,
                "{},{},{},{epoch},{train_loss},{val_loss},{val_acc}",
                csv_field(dataset),
                r.config.mode,
                r.config.k
            );
        }
    }
    out
}
