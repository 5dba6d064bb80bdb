//! Training runs, cross-validation and K-ablation sweeps.
//!
//! Every run is a pure function of its [`TrainConfig`], dataset and split:
//! one ChaCha stream seeded from `seed` drives weight init and then every
//! dropout mask.

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Adam, AdamConfig, Tape};
use crate::basis::BasisMode;
use crate::data::{Dataset, FoldPlan, Split};
use crate::error::{AopfError, Result};
use crate::graph::{shifted_laplacian, ShiftedLaplacian};
use crate::model::{accuracy, AopfNetwork, NetworkConfig, ParamReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: BasisMode,
    pub k: usize,
    pub hidden: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout_p: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub stabilize: bool,
    pub add_self_loops: bool,
    pub row_normalize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: BasisMode::Static,
            k: 3,
            hidden: 16,
            lr: 0.01,
            weight_decay: 5e-4,
            dropout_p: 0.5,
            max_epochs: 200,
            patience: 50,
            seed: 0,
            stabilize: true,
            add_self_loops: true,
            row_normalize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(AopfError::ConfigError("hidden must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(AopfError::ConfigError(format!(
                "dropout_p {} not in [0, 1)",
                self.dropout_p
            )));
        }
        if self.max_epochs == 0 {
            return Err(AopfError::ConfigError("max_epochs must be at least 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(AopfError::ConfigError(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(AopfError::ConfigError(format!("invalid learning rate {}", self.lr)));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(AopfError::ConfigError(format!(
                "invalid weight decay {}",
                self.weight_decay
            )));
        }
        Ok(())
    }

    pub fn with_mode(self, mode: BasisMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_k(self, k: usize) -> Self {
        Self { k, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Operator and feature matrix derived from a dataset; shared by every run
/// on that dataset with the same preprocessing flags.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub lhat: ShiftedLaplacian,
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub add_self_loops: bool,
    pub row_normalize: bool,
}

impl Prepared {
    pub fn new(ds: &Dataset, add_self_loops: bool, row_normalize: bool) -> Result<Self> {
        let lhat = shifted_laplacian(&ds.graph()?, add_self_loops)?;
        let mut features = ds.features.clone();
        if row_normalize {
            row_normalize_in_place(&mut features);
        }
        Ok(Self {
            lhat,
            features,
            labels: ds.labels.clone(),
            num_classes: ds.num_classes,
            add_self_loops,
            row_normalize,
        })
    }

    pub fn for_config(ds: &Dataset, cfg: &TrainConfig) -> Result<Self> {
        Self::new(ds, cfg.add_self_loops, cfg.row_normalize)
    }
}

/// Scales each row to unit L1 norm; all-zero rows are left alone.
pub fn row_normalize_in_place(x: &mut Array2<f64>) {
    for mut row in x.axis_iter_mut(Axis(0)) {
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_epoch: usize,
    pub val_acc_best: f64,
    pub val_loss_best: f64,
    pub test_acc_at_best: f64,
    pub param_report: ParamReport,
    pub epochs_run: usize,
    pub curve: Vec<EpochRecord>,
    pub config: TrainConfig,
    pub seed: u64,
}

struct Evaluation {
    loss: f64,
    acc: f64,
}

fn evaluate(
    net: &AopfNetwork,
    data: &Prepared,
    mask: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<(Evaluation, Array2<f64>)> {
    let mut tape = Tape::new();
    let x = tape.constant(data.features.clone());
    let logits = net.forward(&mut tape, &data.lhat, x, false, rng)?;
    let loss = tape.masked_cross_entropy(logits, &data.labels, mask)?;
    let out = tape.value(logits).clone();
    let acc = accuracy(&out, &data.labels, mask);
    Ok((
        Evaluation {
            loss: tape.scalar_value(loss),
            acc,
        },
        out,
    ))
}

/// Trains on an already prepared dataset.
///
/// Epoch `e` records validation metrics of the parameters after `e`
/// updates, then applies update `e + 1`. The best epoch maximizes
/// validation accuracy, ties going to lower validation loss and then to the
/// earlier epoch. Test accuracy is measured once, on the stored best
/// snapshot.
pub fn train_prepared(cfg: &TrainConfig, data: &Prepared, split: &Split) -> Result<RunResult> {
    cfg.validate()?;
    split.check(data.labels.len())?;
    if data.add_self_loops != cfg.add_self_loops || data.row_normalize != cfg.row_normalize {
        return Err(AopfError::ConfigError(
            "prepared data was built with different preprocessing flags".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let net_cfg = NetworkConfig {
        in_features: data.features.ncols(),
        hidden: cfg.hidden,
        classes: data.num_classes,
        k: cfg.k,
        mode: cfg.mode,
        dropout_p: cfg.dropout_p,
        stabilize: cfg.stabilize,
    };
    let mut net = AopfNetwork::new(net_cfg, &mut rng)?;
    let mut adam = Adam::new(
        AdamConfig {
            lr: cfg.lr,
            weight_decay: cfg.weight_decay,
            ..AdamConfig::default()
        },
        &net.params,
    );

    let mut curve = Vec::with_capacity(cfg.max_epochs);
    let mut best: Option<(usize, f64, f64, AopfNetwork)> = None;

    for epoch in 0..cfg.max_epochs {
        let (val, _) = evaluate(&net, data, &split.val, &mut rng)?;

        let improved = match &best {
            None => true,
            Some((_, acc, loss, _)) => val.acc > *acc || (val.acc == *acc && val.loss < *loss),
        };
        if improved {
            best = Some((epoch, val.acc, val.loss, net.clone()));
        }

        let mut tape = Tape::new();
        let x = tape.constant(data.features.clone());
        let logits = net.forward(&mut tape, &data.lhat, x, true, &mut rng)?;
        let loss = tape.masked_cross_entropy(logits, &data.labels, &split.train)?;
        let train_loss = tape.scalar_value(loss);
        let grads = tape.backward(loss)?;
        let per_param: Vec<Array2<f64>> = net
            .params
            .ids()
            .map(|id| grads.param(&net.params, id))
            .collect();
        drop(tape);
        adam.step(&mut net.params, &per_param)?;

        curve.push(EpochRecord {
            epoch,
            train_loss,
            val_loss: val.loss,
            val_acc: val.acc,
        });

        let best_epoch = best.as_ref().map_or(0, |b| b.0);
        if epoch - best_epoch >= cfg.patience {
            break;
        }
    }

    let (best_epoch, val_acc_best, val_loss_best, snapshot) = best.expect("at least one epoch runs");
    let (test, _) = evaluate(&snapshot, data, &split.test, &mut rng)?;
    Ok(RunResult {
        best_epoch,
        val_acc_best,
        val_loss_best,
        test_acc_at_best: test.acc,
        param_report: snapshot.report_params(),
        epochs_run: curve.len(),
        curve,
        config: *cfg,
        seed: cfg.seed,
    })
}

pub fn train_run(cfg: &TrainConfig, ds: &Dataset, split: &Split) -> Result<RunResult> {
    let data = Prepared::for_config(ds, cfg)?;
    train_prepared(cfg, &data, split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<RunResult>,
    pub mean_test_acc: f64,
    /// Population standard deviation over folds.
    pub std_test_acc: f64,
    pub mean_alpha: f64,
    pub mean_beta: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl CvResult {
    pub fn from_folds(folds: Vec<RunResult>) -> Self {
        let accs: Vec<f64> = folds.iter().map(|r| r.test_acc_at_best).collect();
        let (mean_test_acc, std_test_acc) = mean_std(&accs);
        let n = folds.len() as f64;
        let mean_alpha = folds.iter().map(|r| r.param_report.effective_alpha).sum::<f64>() / n;
        let mean_beta = folds.iter().map(|r| r.param_report.effective_beta).sum::<f64>() / n;
        Self {
            folds,
            mean_test_acc,
            std_test_acc,
            mean_alpha,
            mean_beta,
        }
    }
}

/// Runs `jobs(items)` either serially or on a private pool of `jobs`
/// threads. Output order always follows input order.
fn run_all<T, R, F>(items: Vec<T>, jobs: usize, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    if jobs <= 1 {
        return items.into_iter().map(f).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AopfError::ConfigError(format!("thread pool: {e}")))?;
    pool.install(|| items.into_par_iter().map(f).collect())
}

/// One run per fold, fold `i` seeded with `cfg.seed + i`.
pub fn cross_validate(cfg: &TrainConfig, ds: &Dataset, plan: &FoldPlan) -> Result<CvResult> {
    cross_validate_jobs(cfg, ds, plan, 1)
}

pub fn cross_validate_jobs(
    cfg: &TrainConfig,
    ds: &Dataset,
    plan: &FoldPlan,
    jobs: usize,
) -> Result<CvResult> {
    let data = Prepared::for_config(ds, cfg)?;
    cross_validate_prepared(cfg, &data, plan, jobs)
}

pub fn cross_validate_prepared(
    cfg: &TrainConfig,
    data: &Prepared,
    plan: &FoldPlan,
    jobs: usize,
) -> Result<CvResult> {
    if plan.folds.is_empty() {
        return Err(AopfError::ConfigError("fold plan is empty".into()));
    }
    let items: Vec<(usize, &Split)> = plan.folds.iter().enumerate().collect();
    let folds = run_all(items, jobs, |(i, split)| {
        train_prepared(&cfg.with_seed(cfg.seed.wrapping_add(i as u64)), data, split)
    })?;
    Ok(CvResult::from_folds(folds))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "protocol")]
pub enum Protocol {
    FixedSplit,
    CrossValidation { fold_seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mode: BasisMode,
    pub k: usize,
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    pub mean_alpha: f64,
    pub mean_beta: f64,
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub protocol: Protocol,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn get(&self, mode: BasisMode, k: usize) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.mode == mode && r.k == k)
    }
}

/// Sweeps every `(mode, K)` cell. Rows come out mode-major, in the order
/// given.
pub fn k_ablation(
    cfg: &TrainConfig,
    ds: &Dataset,
    modes: &[BasisMode],
    k_list: &[usize],
    protocol: &Protocol,
    jobs: usize,
) -> Result<AblationTable> {
    if k_list.is_empty() || modes.is_empty() {
        return Err(AopfError::ConfigError("ablation needs at least one mode and one K".into()));
    }
    let data = Prepared::for_config(ds, cfg)?;
    let cells: Vec<(BasisMode, usize)> = modes
        .iter()
        .flat_map(|&m| k_list.iter().map(move |&k| (m, k)))
        .collect();

    let rows = match protocol {
        Protocol::FixedSplit => {
            let split = ds.fixed_splits.as_ref().ok_or_else(|| {
                AopfError::ConfigError(format!("dataset '{}' has no fixed split", ds.name))
            })?;
            run_all(cells, jobs, |(mode, k)| {
                let run = train_prepared(&cfg.with_mode(mode).with_k(k), &data, split)?;
                Ok(AblationRow {
                    mode,
                    k,
                    mean_test_acc: run.test_acc_at_best,
                    std_test_acc: 0.0,
                    mean_alpha: run.param_report.effective_alpha,
                    mean_beta: run.param_report.effective_beta,
                    runs: vec![run],
                })
            })?
        }
        Protocol::CrossValidation { fold_seed } => {
            let plan = crate::data::make_folds(ds, *fold_seed)?;
            // Folds parallelize inside each cell.
            cells
                .into_iter()
                .map(|(mode, k)| {
                    let cv = cross_validate_prepared(&cfg.with_mode(mode).with_k(k), &data, &plan, jobs)?;
                    Ok(AblationRow {
                        mode,
                        k,
                        mean_test_acc: cv.mean_test_acc,
                        std_test_acc: cv.std_test_acc,
                        mean_alpha: cv.mean_alpha,
                        mean_beta: cv.mean_beta,
                        runs: cv.folds,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(AblationTable {
        protocol: protocol.clone(),
        rows,
    })
}
