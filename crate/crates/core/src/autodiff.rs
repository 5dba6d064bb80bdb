//! Dense 2-D reverse-mode differentiation and the Adam optimizer.
//!
//! A [`Tape`] records every operation in evaluation order; node ids are
//! therefore already a topological order and [`Tape::backward`] walks them
//! once in reverse. Scalars are 1x1 tensors and broadcast against any shape
//! in the elementwise operations, which is how the learnable basis
//! parameters flow into the recurrence coefficients.
//!
//! Parameters live outside the tape in a [`ParamStore`] so that a fresh
//! tape can be built for every forward pass.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;

use crate::error::{AopfError, Result};
use crate::graph::CsrMatrix;

/// Variance floor used by [`Tape::layer_norm`].
pub const LAYER_NORM_EPS: f64 = 1e-5;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
struct ParamEntry {
    name: String,
    value: Array2<f64>,
    decay: bool,
}

/// Named learnable tensors, persistent across training steps.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<ParamEntry>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a tensor. `decay` selects whether weight decay applies.
    pub fn add(&mut self, name: impl Into<String>, value: Array2<f64>, decay: bool) -> ParamId {
        self.entries.push(ParamEntry {
            name: name.into(),
            value,
            decay,
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Array2<f64> {
        &self.entries[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.entries[id.0].value
    }

    pub fn decays(&self, id: ParamId) -> bool {
        self.entries[id.0].decay
    }

    pub fn scalar(&self, id: ParamId) -> f64 {
        self.entries[id.0].value[[0, 0]]
    }

    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }
}

#[derive(Debug)]
enum Op {
    Leaf { param: Option<ParamId> },
    MatMul(Var, Var),
    Spmm { m: Arc<CsrMatrix>, x: Var },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    AddRow(Var, Var),
    AddConst(Var),
    MulConst(Var, f64),
    ClampMin { x: Var, lo: f64 },
    Relu(Var),
    Dropout { x: Var, mask: Array2<f64> },
    LayerNorm { x: Var, inv_std: Array1<f64> },
    Recurrence {
        m: Arc<CsrMatrix>,
        prev: Var,
        prev2: Option<Var>,
        a: Var,
        b: Var,
        c: Option<Var>,
    },
    Sum(Var),
    CrossEntropy {
        logits: Var,
        labels: Vec<usize>,
        mask: Vec<usize>,
        probs: Array2<f64>,
    },
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
    requires_grad: bool,
}

/// Recorded computation for one forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn is_scalar(a: &Array2<f64>) -> bool {
    a.dim() == (1, 1)
}

fn shape_str(a: &Array2<f64>) -> String {
    format!("{}x{}", a.nrows(), a.ncols())
}

/// Sums a gradient down to the shape of a broadcast operand.
fn reduce_to(g: Array2<f64>, like: (usize, usize)) -> Array2<f64> {
    if g.dim() == like {
        g
    } else {
        Array2::from_elem((1, 1), g.sum())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Array2<f64>, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.nodes[v.0].value
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    /// Which side of its kink every `relu` and `clamp_min` input fell on.
    /// Two forward passes with equal patterns lie on the same smooth piece.
    pub fn kink_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for node in &self.nodes {
            match node.op {
                Op::Relu(x) => out.extend(self.value(x).iter().map(|&v| v > 0.0)),
                Op::ClampMin { x, lo } => out.extend(self.value(x).iter().map(|&v| v < lo)),
                _ => {}
            }
        }
        out
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.rg(v)
    }

    /// Non-differentiable input.
    pub fn constant(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf { param: None }, false)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.constant(Array2::from_elem((1, 1), value))
    }

    /// Differentiable input not tied to a [`ParamStore`].
    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf { param: None }, true)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(store.value(id).clone(), Op::Leaf { param: Some(id) }, true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.ncols() != bv.nrows() {
            return Err(AopfError::shape(
                "matmul",
                format!("{} · {}", shape_str(av), shape_str(bv)),
            ));
        }
        let out = av.dot(bv);
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, Op::MatMul(a, b), rg))
    }

    /// Sparse-dense product with a constant matrix.
    pub fn spmm(&mut self, m: &Arc<CsrMatrix>, x: Var) -> Result<Var> {
        let out = m.mul_dense(self.value(x).view())?;
        let rg = self.rg(x);
        Ok(self.push(out, Op::Spmm { m: Arc::clone(m), x }, rg))
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        let out = if av.dim() == bv.dim() {
            Zip::from(av).and(bv).map_collect(|&x, &y| f(x, y))
        } else if is_scalar(bv) {
            let s = bv[[0, 0]];
            av.mapv(|x| f(x, s))
        } else if is_scalar(av) {
            let s = av[[0, 0]];
            bv.mapv(|y| f(s, y))
        } else {
            return Err(AopfError::shape(
                name,
                format!("{} vs {}", shape_str(av), shape_str(bv)),
            ));
        };
        let rg = self.rg(a) || self.rg(b);
        Ok(self.push(out, op, rg))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary("div", a, b, |x, y| x / y, Op::Div(a, b))
    }

    /// Adds a `1 x f` row vector to every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(bias));
        if bv.nrows() != 1 || bv.ncols() != av.ncols() {
            return Err(AopfError::shape(
                "add_row",
                format!("{} + row {}", shape_str(av), shape_str(bv)),
            ));
        }
        let out = av + bv;
        let rg = self.rg(a) || self.rg(bias);
        Ok(self.push(out, Op::AddRow(a, bias), rg))
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).mapv(|x| x + c);
        let rg = self.rg(a);
        self.push(out, Op::AddConst(a), rg)
    }

    pub fn mul_const(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).mapv(|x| x * c);
        let rg = self.rg(a);
        self.push(out, Op::MulConst(a, c), rg)
    }

    /// `max(x, lo)`; the gradient is zero wherever the floor is active.
    pub fn clamp_min(&mut self, x: Var, lo: f64) -> Var {
        let out = self.value(x).mapv(|v| if v < lo { lo } else { v });
        let rg = self.rg(x);
        self.push(out, Op::ClampMin { x, lo }, rg)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = self.value(x).mapv(|v| if v > 0.0 { v } else { 0.0 });
        let rg = self.rg(x);
        self.push(out, Op::Relu(x), rg)
    }

    /// Inverted dropout. In eval mode, or with `p == 0`, returns `x` itself.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        x: Var,
        p: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(AopfError::InvalidProbability(p));
        }
        if !training || p == 0.0 {
            return Ok(x);
        }
        let scale = 1.0 / (1.0 - p);
        let xv = self.value(x);
        let mask = Array2::from_shape_fn(xv.dim(), |_| if rng.gen::<f64>() < p { 0.0 } else { scale });
        let out = xv * &mask;
        let rg = self.rg(x);
        Ok(self.push(out, Op::Dropout { x, mask }, rg))
    }

    /// Per-row zero-mean, unit-variance normalization (population variance,
    /// no affine parameters).
    pub fn layer_norm(&mut self, x: Var) -> Var {
        let xv = self.value(x);
        let f = xv.ncols() as f64;
        let mut out = xv.clone();
        let mut inv_std = Array1::zeros(xv.nrows());
        for (mut row, s) in out.axis_iter_mut(Axis(0)).zip(inv_std.iter_mut()) {
            let mean = row.sum() / f;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().map(|v| v * v).sum::<f64>() / f;
            let is = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            row.mapv_inplace(|v| v * is);
            *s = is;
        }
        let rg = self.rg(x);
        self.push(out, Op::LayerNorm { x, inv_std }, rg)
    }

    /// Fused three-term recurrence step
    /// `a · (M · prev) + b · prev + c · prev2` with scalar `a`, `b`, `c`.
    /// Keeps one stored block per step instead of five.
    pub fn recurrence_step(
        &mut self,
        m: &Arc<CsrMatrix>,
        prev: Var,
        prev2: Option<(Var, Var)>,
        a: Var,
        b: Var,
    ) -> Result<Var> {
        for s in [a, b].into_iter().chain(prev2.map(|(_, c)| c)) {
            if !is_scalar(self.value(s)) {
                return Err(AopfError::shape("recurrence_step", "coefficients must be 1x1"));
            }
        }
        let pv = self.value(prev);
        let mut out = m.mul_dense(pv.view())?;
        let (av, bv) = (self.scalar_value(a), self.scalar_value(b));
        Zip::from(&mut out).and(pv).for_each(|o, &p| *o = av * *o + bv * p);
        if let Some((p2, c)) = prev2 {
            let p2v = self.value(p2);
            if p2v.dim() != out.dim() {
                return Err(AopfError::shape(
                    "recurrence_step",
                    format!("{} vs {}", shape_str(p2v), shape_str(&out)),
                ));
            }
            out.scaled_add(self.scalar_value(c), p2v);
        }
        let rg = self.rg(prev)
            || self.rg(a)
            || self.rg(b)
            || prev2.is_some_and(|(p2, c)| self.rg(p2) || self.rg(c));
        Ok(self.push(
            out,
            Op::Recurrence {
                m: Arc::clone(m),
                prev,
                prev2: prev2.map(|(p, _)| p),
                a,
                b,
                c: prev2.map(|(_, c)| c),
            },
            rg,
        ))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let out = Array2::from_elem((1, 1), self.value(x).sum());
        let rg = self.rg(x);
        self.push(out, Op::Sum(x), rg)
    }

    /// Mean over `mask` rows of `-log softmax(logits)[label]`.
    pub fn masked_cross_entropy(
        &mut self,
        logits: Var,
        labels: &[usize],
        mask: &[usize],
    ) -> Result<Var> {
        if mask.is_empty() {
            return Err(AopfError::EmptyMask);
        }
        let lv = self.value(logits);
        let (n, classes) = lv.dim();
        if labels.len() != n {
            return Err(AopfError::shape(
                "cross_entropy",
                format!("{} labels for {} rows", labels.len(), n),
            ));
        }
        let mut probs = Array2::zeros((mask.len(), classes));
        let mut total = 0.0;
        for (r, &node) in mask.iter().enumerate() {
            if node >= n {
                return Err(AopfError::IndexOutOfRange { index: node, len: n });
            }
            let label = labels[node];
            if label >= classes {
                return Err(AopfError::LabelOutOfRange {
                    node,
                    label,
                    classes,
                });
            }
            let row = lv.row(node);
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let mut z = 0.0;
            for (p, &v) in probs.row_mut(r).iter_mut().zip(row.iter()) {
                *p = (v - max).exp();
                z += *p;
            }
            probs.row_mut(r).mapv_inplace(|p| p / z);
            total += z.ln() + max - row[label];
        }
        let loss = Array2::from_elem((1, 1), total / mask.len() as f64);
        let rg = self.rg(logits);
        Ok(self.push(
            loss,
            Op::CrossEntropy {
                logits,
                labels: mask.iter().map(|&i| labels[i]).collect(),
                mask: mask.to_vec(),
                probs,
            },
            rg,
        ))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if !is_scalar(lv) {
            return Err(AopfError::NonScalarLoss {
                rows: lv.nrows(),
                cols: lv.ncols(),
            });
        }
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Array2::ones((1, 1)));

        for id in (0..=loss.0).rev() {
            let node = &self.nodes[id];
            if !node.requires_grad || matches!(node.op, Op::Leaf { .. }) {
                continue;
            }
            // Interior gradients are released once propagated.
            let Some(g) = grads[id].take() else { continue };
            self.propagate(node, &g, &mut grads)?;
        }

        let mut params = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Op::Leaf { param: Some(pid) } = node.op {
                if let Some(g) = &grads[id] {
                    params.push((pid, g.clone()));
                }
            }
        }
        Ok(Gradients { nodes: grads, params })
    }

    fn acc(&self, grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
        if !self.rg(v) {
            return;
        }
        let g = reduce_to(g, self.value(v).dim());
        match &mut grads[v.0] {
            Some(existing) => *existing += &g,
            slot => *slot = Some(g),
        }
    }

    fn propagate(
        &self,
        node: &Node,
        g: &Array2<f64>,
        grads: &mut [Option<Array2<f64>>],
    ) -> Result<()> {
        match &node.op {
            Op::Leaf { .. } => {}
            Op::MatMul(a, b) => {
                if self.rg(*a) {
                    self.acc(grads, *a, g.dot(&self.value(*b).t()));
                }
                if self.rg(*b) {
                    self.acc(grads, *b, self.value(*a).t().dot(g));
                }
            }
            Op::Spmm { m, x } => {
                if self.rg(*x) {
                    self.acc(grads, *x, m.mul_dense_transposed(g.view())?);
                }
            }
            Op::Add(a, b) => {
                self.acc(grads, *a, g.clone());
                self.acc(grads, *b, g.clone());
            }
            Op::Sub(a, b) => {
                self.acc(grads, *a, g.clone());
                self.acc(grads, *b, -g);
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                if self.rg(*a) {
                    self.acc(grads, *a, broadcast_mul(g, bv));
                }
                if self.rg(*b) {
                    self.acc(grads, *b, broadcast_mul(g, av));
                }
            }
            Op::Div(a, b) => {
                let bv = self.value(*b);
                if self.rg(*a) {
                    self.acc(grads, *a, broadcast_mul(g, &bv.mapv(|y| 1.0 / y)));
                }
                if self.rg(*b) {
                    // d(a/b)/db = -out / b
                    let gq = g * &node.value;
                    self.acc(grads, *b, broadcast_mul(&gq, &bv.mapv(|y| -1.0 / y)));
                }
            }
            Op::AddRow(a, bias) => {
                self.acc(grads, *a, g.clone());
                if self.rg(*bias) {
                    self.acc(grads, *bias, g.sum_axis(Axis(0)).insert_axis(Axis(0)));
                }
            }
            Op::AddConst(a) => self.acc(grads, *a, g.clone()),
            Op::MulConst(a, c) => self.acc(grads, *a, g * *c),
            Op::ClampMin { x, lo } => {
                let mut gx = g.clone();
                Zip::from(&mut gx)
                    .and(self.value(*x))
                    .for_each(|gv, &xv| if xv < *lo { *gv = 0.0 });
                self.acc(grads, *x, gx);
            }
            Op::Relu(x) => {
                let mut gx = g.clone();
                Zip::from(&mut gx)
                    .and(self.value(*x))
                    .for_each(|gv, &xv| if xv <= 0.0 { *gv = 0.0 });
                self.acc(grads, *x, gx);
            }
            Op::Dropout { x, mask } => self.acc(grads, *x, g * mask),
            Op::LayerNorm { x, inv_std } => {
                let y = &node.value;
                let f = y.ncols() as f64;
                let mut gx = g.clone();
                for ((mut gr, yr), &is) in gx.axis_iter_mut(Axis(0)).zip(y.axis_iter(Axis(0))).zip(inv_std) {
                    let mean_g = gr.sum() / f;
                    let mean_gy = gr.iter().zip(yr.iter()).map(|(a, b)| a * b).sum::<f64>() / f;
                    Zip::from(&mut gr)
                        .and(&yr)
                        .for_each(|gv, &yv| *gv = is * (*gv - mean_g - yv * mean_gy));
                }
                self.acc(grads, *x, gx);
            }
            Op::Recurrence {
                m,
                prev,
                prev2,
                a,
                b,
                c,
            } => {
                let (av, bv) = (self.scalar_value(*a), self.scalar_value(*b));
                let pv = self.value(*prev);
                if self.rg(*prev) {
                    let mut gp = m.mul_dense_transposed(g.view())?;
                    Zip::from(&mut gp).and(g).for_each(|o, &gv| *o = av * *o + bv * gv);
                    self.acc(grads, *prev, gp);
                }
                if self.rg(*a) {
                    let mp = m.mul_dense(pv.view())?;
                    self.acc(grads, *a, Array2::from_elem((1, 1), dot(g, &mp)));
                }
                if self.rg(*b) {
                    self.acc(grads, *b, Array2::from_elem((1, 1), dot(g, pv)));
                }
                if let (Some(p2), Some(c)) = (prev2, c) {
                    if self.rg(*p2) {
                        self.acc(grads, *p2, g * self.scalar_value(*c));
                    }
                    if self.rg(*c) {
                        self.acc(grads, *c, Array2::from_elem((1, 1), dot(g, self.value(*p2))));
                    }
                }
            }
            Op::Sum(x) => {
                let s = g[[0, 0]];
                self.acc(grads, *x, Array2::from_elem(self.value(*x).dim(), s));
            }
            Op::CrossEntropy {
                logits,
                labels,
                mask,
                probs,
            } => {
                let scale = g[[0, 0]] / mask.len() as f64;
                let mut gl = Array2::zeros(self.value(*logits).dim());
                for (r, (&node_idx, &label)) in mask.iter().zip(labels).enumerate() {
                    let mut row = gl.row_mut(node_idx);
                    row.scaled_add(scale, &probs.row(r));
                    row[label] -= scale;
                }
                self.acc(grads, *logits, gl);
            }
        }
        Ok(())
    }
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + x * y)
}

/// Elementwise product where either side may be 1x1.
fn broadcast_mul(g: &Array2<f64>, other: &Array2<f64>) -> Array2<f64> {
    if g.dim() == other.dim() {
        g * other
    } else if is_scalar(other) {
        g * other[[0, 0]]
    } else {
        other * g[[0, 0]]
    }
}

/// Result of [`Tape::backward`]: leaf gradients by node and by parameter.
#[derive(Debug)]
pub struct Gradients {
    nodes: Vec<Option<Array2<f64>>>,
    params: Vec<(ParamId, Array2<f64>)>,
}

impl Gradients {
    /// Gradient of a leaf variable, if it was reached.
    pub fn wrt(&self, v: Var) -> Option<&Array2<f64>> {
        self.nodes.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient of a stored parameter, summed over every tape leaf that
    /// read it. Zero-filled if the parameter was not reached.
    pub fn param(&self, store: &ParamStore, id: ParamId) -> Array2<f64> {
        let mut out = Array2::zeros(store.value(id).dim());
        for (pid, g) in &self.params {
            if *pid == id {
                out += g;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// Adam with bias correction. Weight decay enters as an L2 term added to
/// the gradient, only for parameters registered with `decay = true`.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, store: &ParamStore) -> Self {
        let zeros = || {
            store
                .ids()
                .map(|id| Array2::zeros(store.value(id).dim()))
                .collect::<Vec<_>>()
        };
        Self {
            config,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one update. `grads[i]` belongs to parameter `i` of `store`.
    pub fn step(&mut self, store: &mut ParamStore, grads: &[Array2<f64>]) -> Result<()> {
        if grads.len() != store.len() || self.m.len() != store.len() {
            return Err(AopfError::shape(
                "adam",
                format!("{} gradients for {} parameters", grads.len(), store.len()),
            ));
        }
        for (id, g) in store.ids().zip(grads) {
            if g.dim() != store.value(id).dim() {
                return Err(AopfError::shape(
                    "adam",
                    format!("gradient {} for parameter {}", shape_str(g), store.name(id)),
                ));
            }
        }
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t as i32);
        let bc2 = 1.0 - beta2.powi(self.t as i32);
        for (i, id) in store.ids().enumerate() {
            let wd = if store.decays(id) { weight_decay } else { 0.0 };
            let p = &mut store.entries[id.0].value;
            Zip::from(p)
                .and(&mut self.m[i])
                .and(&mut self.v[i])
                .and(&grads[i])
                .for_each(|p, m, v, &g| {
                    let g = g + wd * *p;
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
        Ok(())
    }
}
