//! The two-layer adaptive polynomial filter network.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamId, ParamStore, Tape, Var};
use crate::basis::{
    propagate_basis, resolve_params, BasisMode, BasisParams, BasisVars, RawBasis,
};
use crate::error::{AopfError, Result};
use crate::graph::ShiftedLaplacian;

/// One polynomial filter: `Σ_k Z_k · W_k + bias`.
#[derive(Debug, Clone)]
pub struct FilterLayer {
    k: usize,
    weights: Vec<ParamId>,
    bias: ParamId,
    f_in: usize,
    f_out: usize,
}

impl FilterLayer {
    /// Glorot-uniform weights for every order, zero bias.
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        k: usize,
        f_in: usize,
        f_out: usize,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (f_in + f_out) as f64).sqrt();
        let weights = (0..=k)
            .map(|order| {
                let w = Array2::from_shape_fn((f_in, f_out), |_| rng.gen_range(-limit..limit));
                store.add(format!("{name}.w{order}"), w, true)
            })
            .collect();
        let bias = store.add(format!("{name}.bias"), Array2::zeros((1, f_out)), false);
        Self {
            k,
            weights,
            bias,
            f_in,
            f_out,
        }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[ParamId] {
        &self.weights
    }

    pub fn bias(&self) -> ParamId {
        self.bias
    }

    pub fn in_features(&self) -> usize {
        self.f_in
    }

    pub fn out_features(&self) -> usize {
        self.f_out
    }
}

pub fn filter_layer_forward(
    tape: &mut Tape,
    store: &ParamStore,
    layer: &FilterLayer,
    lhat: &ShiftedLaplacian,
    x: Var,
    basis: BasisVars,
    stabilize: bool,
) -> Result<Var> {
    if tape.value(x).ncols() != layer.f_in {
        return Err(AopfError::shape(
            "filter_layer",
            format!("layer expects {} features, got {}", layer.f_in, tape.value(x).ncols()),
        ));
    }
    let zs = propagate_basis(tape, lhat.shared(), x, layer.k, basis, stabilize)?;
    let mut acc: Option<Var> = None;
    for (z, &wid) in zs.into_iter().zip(&layer.weights) {
        let w = tape.param(store, wid);
        let term = tape.matmul(z, w)?;
        acc = Some(match acc {
            None => term,
            Some(a) => tape.add(a, term)?,
        });
    }
    let b = tape.param(store, layer.bias);
    // weights always holds K+1 >= 1 entries
    tape.add_row(acc.expect("at least one order"), b)
}

/// Storage slots of the learnable basis scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSlots {
    Static,
    Gegenbauer(ParamId),
    FullJacobi(ParamId, ParamId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub in_features: usize,
    pub hidden: usize,
    pub classes: usize,
    pub k: usize,
    pub mode: BasisMode,
    pub dropout_p: f64,
    pub stabilize: bool,
}

/// Learned basis shape as reported after training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub mode: BasisMode,
    pub effective_alpha: f64,
    pub effective_beta: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct AopfNetwork {
    pub params: ParamStore,
    layer1: FilterLayer,
    layer2: FilterLayer,
    basis: BasisSlots,
    config: NetworkConfig,
}

impl AopfNetwork {
    /// Weights are drawn first, in a mode-independent order, so networks of
    /// different modes built from the same seed share every weight.
    pub fn new<R: Rng + ?Sized>(config: NetworkConfig, rng: &mut R) -> Result<Self> {
        if config.hidden == 0 || config.in_features == 0 || config.classes == 0 {
            return Err(AopfError::ConfigError(
                "in_features, hidden and classes must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&config.dropout_p) {
            return Err(AopfError::InvalidProbability(config.dropout_p));
        }
        let mut params = ParamStore::new();
        let layer1 = FilterLayer::new(&mut params, "layer1", config.k, config.in_features, config.hidden, rng);
        let layer2 = FilterLayer::new(&mut params, "layer2", config.k, config.hidden, config.classes, rng);
        let basis = match BasisParams::chebyshev_init(config.mode) {
            BasisParams::Static => BasisSlots::Static,
            BasisParams::Gegenbauer { lambda_raw } => BasisSlots::Gegenbauer(params.add(
                "basis.lambda_raw",
                Array2::from_elem((1, 1), lambda_raw),
                false,
            )),
            BasisParams::FullJacobi { alpha_raw, beta_raw } => BasisSlots::FullJacobi(
                params.add("basis.alpha_raw", Array2::from_elem((1, 1), alpha_raw), false),
                params.add("basis.beta_raw", Array2::from_elem((1, 1), beta_raw), false),
            ),
        };
        Ok(Self {
            params,
            layer1,
            layer2,
            basis,
            config,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> [&FilterLayer; 2] {
        [&self.layer1, &self.layer2]
    }

    pub fn basis_slots(&self) -> BasisSlots {
        self.basis
    }

    pub fn basis_params(&self) -> BasisParams {
        match self.basis {
            BasisSlots::Static => BasisParams::Static,
            BasisSlots::Gegenbauer(l) => BasisParams::Gegenbauer {
                lambda_raw: self.params.scalar(l),
            },
            BasisSlots::FullJacobi(a, b) => BasisParams::FullJacobi {
                alpha_raw: self.params.scalar(a),
                beta_raw: self.params.scalar(b),
            },
        }
    }

    /// Overwrites the raw basis scalars; the mode must match.
    pub fn set_basis_params(&mut self, p: BasisParams) -> Result<()> {
        match (self.basis, p) {
            (BasisSlots::Static, BasisParams::Static) => {}
            (BasisSlots::Gegenbauer(l), BasisParams::Gegenbauer { lambda_raw }) => {
                self.params.value_mut(l)[[0, 0]] = lambda_raw;
            }
            (BasisSlots::FullJacobi(a, b), BasisParams::FullJacobi { alpha_raw, beta_raw }) => {
                self.params.value_mut(a)[[0, 0]] = alpha_raw;
                self.params.value_mut(b)[[0, 0]] = beta_raw;
            }
            _ => {
                return Err(AopfError::ConfigError(format!(
                    "basis params of mode {} do not fit a {} network",
                    p.mode(),
                    self.config.mode
                )))
            }
        }
        Ok(())
    }

    /// Records the basis on `tape` and returns its effective `(α, β)`.
    pub fn basis_vars(&self, tape: &mut Tape) -> BasisVars {
        let raw = match self.basis {
            BasisSlots::Static => RawBasis::Static,
            BasisSlots::Gegenbauer(l) => RawBasis::Gegenbauer(tape.param(&self.params, l)),
            BasisSlots::FullJacobi(a, b) => {
                RawBasis::FullJacobi(tape.param(&self.params, a), tape.param(&self.params, b))
            }
        };
        BasisVars::resolve(tape, raw)
    }

    /// `layer2(relu(dropout(layer1(x))))`; dropout only when `training`.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        tape: &mut Tape,
        lhat: &ShiftedLaplacian,
        features: Var,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        let basis = self.basis_vars(tape);
        let stabilize = self.config.stabilize;
        let h = filter_layer_forward(tape, &self.params, &self.layer1, lhat, features, basis, stabilize)?;
        let h = tape.dropout(h, self.config.dropout_p, training, rng)?;
        let h = tape.relu(h);
        filter_layer_forward(tape, &self.params, &self.layer2, lhat, h, basis, stabilize)
    }

    pub fn report_params(&self) -> ParamReport {
        report_params(&self.basis_params())
    }
}

pub fn report_params(p: &BasisParams) -> ParamReport {
    let r = resolve_params(p);
    ParamReport {
        mode: p.mode(),
        effective_alpha: r.alpha,
        effective_beta: r.beta,
        clamped: r.clamped,
    }
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn predictions(logits: &Array2<f64>) -> Vec<usize> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fraction of `mask` nodes whose argmax matches the label.
pub fn accuracy(logits: &Array2<f64>, labels: &[usize], mask: &[usize]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let pred = predictions(logits);
    let hits = mask.iter().filter(|&&i| pred[i] == labels[i]).count();
    hits as f64 / mask.len() as f64
}
