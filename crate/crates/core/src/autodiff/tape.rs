//! Reverse-mode differentiation over a linear record of tensor operations.
//!
//! Every operation appends a node whose parents already exist, so the node
//! vector is a topological order by construction and backward is one reverse
//! sweep. Leaves are either trainable (`leaf`) or constants (`constant`);
//! gradients only flow through nodes that depend on a trainable leaf.

use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Lower clamp applied to the argument of `log`.
pub const LOG_EPS: f64 = 1e-12;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Unary {
    Relu,
    LeakyRelu(f64),
    Sigmoid,
    Tanh,
    /// Natural log with the argument clamped to at least [`LOG_EPS`].
    Log,
    Abs,
    Pow(f64),
    Scale(f64),
    AddScalar(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binary {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduce {
    Sum,
    Mean,
}

/// Exponent of the ℓ-norm power `Σ|xᵢ|^ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn exponent(self) -> u8 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    /// `‖a − b‖` (the norm itself, not its power).
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let it = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            Norm::L1 => it.map(f64::abs).sum(),
            Norm::L2 => it.map(|d| d * d).sum::<f64>().sqrt(),
        }
    }
}

impl TryFrom<u8> for Norm {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            other => Err(Error::Config(format!("unsupported norm exponent {other}, expected 1 or 2"))),
        }
    }
}

impl From<Norm> for u8 {
    fn from(n: Norm) -> u8 {
        n.exponent()
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Unary(Unary, Var),
    Binary(Binary, Var, Var),
    Reduce(Reduce, Var),
    LpPowerNorm(Norm, Var),
    ConcatCols(Var, Var),
}

#[derive(Clone, Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// The computation record.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients produced by one backward sweep, indexed by [`Var`].
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zeros if `v` does not reach the loss.
    pub fn wrt(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => Tensor::from_parts(self.shapes[v.0].clone(), g.clone()),
            None => Tensor::zeros(&self.shapes[v.0]),
        }
    }

    pub fn raw(&self, v: Var) -> Option<&[f64]> {
        self.grads[v.0].as_deref()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// c[m×n] += a[m×k] · b[k×n]
fn gemm_nn(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (cv, bv) in crow.iter_mut().zip(brow) {
                *cv += av * bv;
            }
        }
    }
}

// c[m×k] += g[m×n] · bᵀ  where b is [k×n]
fn gemm_nt(g: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b[p * n..(p + 1) * n];
            c[i * k + p] += grow.iter().zip(brow).map(|(x, y)| x * y).sum::<f64>();
        }
    }
}

// c[k×n] += aᵀ · g  where a is [m×k], g is [m×n]
fn gemm_tn(a: &[f64], g: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let grow = &g[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let crow = &mut c[p * n..(p + 1) * n];
            for (cv, gv) in crow.iter_mut().zip(grow) {
                *cv += av * gv;
            }
        }
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

    /// Registers a trainable input.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push_raw(t, Op::Leaf, true)
    }

    /// Registers an input that never receives a gradient.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push_raw(t, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn push_raw(&mut self, mut value: Tensor, op: Op, requires_grad: bool) -> Var {
        value.grad = None;
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, name: &str, shape: Vec<usize>, data: Vec<f64>, op: Op) -> Result<Var> {
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("output of {name} at flat index {pos}")));
        }
        let requires_grad = match &op {
            Op::Leaf => false,
            Op::MatMul(a, b) | Op::AddBias(a, b) | Op::Binary(_, a, b) | Op::ConcatCols(a, b) => {
                self.nodes[a.0].requires_grad || self.nodes[b.0].requires_grad
            }
            Op::Unary(_, a) | Op::Reduce(_, a) | Op::LpPowerNorm(_, a) => self.nodes[a.0].requires_grad,
        };
        Ok(self.push_raw(Tensor::from_parts(shape, data), op, requires_grad))
    }

    fn matrix_dims(&self, v: Var, op: &'static str) -> Result<(usize, usize)> {
        match self.shape(v) {
            [r, c] => Ok((*r, *c)),
            s => Err(Error::shape(op, format!("expected a matrix, got shape {s:?}"))),
        }
    }

    /// `[m×k] · [k×n] → [m×n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.matrix_dims(a, "matmul")?;
        let (k2, n) = self.matrix_dims(b, "matmul")?;
        if k != k2 {
            return Err(Error::shape("matmul", format!("[{m}×{k}] · [{k2}×{n}]")));
        }
        let mut out = vec![0.0; m * n];
        gemm_nn(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        self.push("matmul", vec![m, n], out, Op::MatMul(a, b))
    }

    /// Adds a bias vector `[n]` to every row of a `[m×n]` matrix.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (m, n) = self.matrix_dims(x, "add_bias")?;
        if self.shape(bias) != [n] {
            return Err(Error::shape(
                "add_bias",
                format!("bias shape {:?} for {n} columns", self.shape(bias)),
            ));
        }
        let b = self.value(bias).data();
        let mut out = self.value(x).data().to_vec();
        for row in out.chunks_mut(n) {
            for (o, bv) in row.iter_mut().zip(b) {
                *o += bv;
            }
        }
        self.push("add_bias", vec![m, n], out, Op::AddBias(x, bias))
    }

    pub fn unary(&mut self, op: Unary, x: Var) -> Result<Var> {
        let t = self.value(x);
        let shape = t.shape().to_vec();
        let data: Vec<f64> = match op {
            Unary::Relu => t.data().iter().map(|&v| v.max(0.0)).collect(),
            Unary::LeakyRelu(s) => t.data().iter().map(|&v| if v > 0.0 { v } else { s * v }).collect(),
            Unary::Sigmoid => t.data().iter().map(|&v| sigmoid(v)).collect(),
            Unary::Tanh => t.data().iter().map(|&v| v.tanh()).collect(),
            Unary::Log => t.data().iter().map(|&v| v.max(LOG_EPS).ln()).collect(),
            Unary::Abs => t.data().iter().map(|&v| v.abs()).collect(),
            Unary::Pow(p) => t.data().iter().map(|&v| v.powf(p)).collect(),
            Unary::Scale(c) => t.data().iter().map(|&v| c * v).collect(),
            Unary::AddScalar(c) => t.data().iter().map(|&v| v + c).collect(),
        };
        self.push("unary", shape, data, Op::Unary(op, x))
    }

    /// Elementwise binary op. Shapes must match, except that a one-element
    /// operand is applied to every element of the other.
    pub fn binary(&mut self, op: Binary, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let shape = if ta.shape() == tb.shape() || tb.is_scalar() {
            ta.shape().to_vec()
        } else if ta.is_scalar() {
            tb.shape().to_vec()
        } else {
            return Err(Error::shape(
                "binary",
                format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            ));
        };
        let n: usize = shape.iter().product();
        let at = |i: usize| if ta.is_scalar() { ta.data()[0] } else { ta.data()[i] };
        let bt = |i: usize| if tb.is_scalar() { tb.data()[0] } else { tb.data()[i] };
        let data: Vec<f64> = (0..n)
            .map(|i| match op {
                Binary::Add => at(i) + bt(i),
                Binary::Sub => at(i) - bt(i),
                Binary::Mul => at(i) * bt(i),
            })
            .collect();
        self.push("binary", shape, data, Op::Binary(op, a, b))
    }

    pub fn reduce(&mut self, op: Reduce, x: Var) -> Result<Var> {
        let t = self.value(x);
        let s: f64 = t.data().iter().sum();
        let v = match op {
            Reduce::Sum => s,
            Reduce::Mean => s / t.numel() as f64,
        };
        self.push("reduce", Vec::new(), vec![v], Op::Reduce(op, x))
    }

    /// `Σᵢ |xᵢ|^ℓ` over all elements.
    pub fn lp_power_norm(&mut self, x: Var, norm: Norm) -> Result<Var> {
        let t = self.value(x);
        let v = match norm {
            Norm::L1 => t.data().iter().map(|v| v.abs()).sum(),
            Norm::L2 => t.data().iter().map(|v| v * v).sum(),
        };
        self.push("lp_power_norm", Vec::new(), vec![v], Op::LpPowerNorm(norm, x))
    }

    /// `[m×p] ⊕ [m×q] → [m×(p+q)]`, left block first.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, p) = self.matrix_dims(a, "concat_cols")?;
        let (m2, q) = self.matrix_dims(b, "concat_cols")?;
        if m != m2 {
            return Err(Error::shape("concat_cols", format!("{m} rows vs {m2} rows")));
        }
        let (da, db) = (self.value(a).data(), self.value(b).data());
        let mut out = Vec::with_capacity(m * (p + q));
        for r in 0..m {
            out.extend_from_slice(&da[r * p..(r + 1) * p]);
            out.extend_from_slice(&db[r * q..(r + 1) * q]);
        }
        self.push("concat_cols", vec![m, p + q], out, Op::ConcatCols(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Add, a, b)
    }
    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Sub, a, b)
    }
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.binary(Binary::Mul, a, b)
    }
    pub fn relu(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Relu, x)
    }
    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Sigmoid, x)
    }
    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Tanh, x)
    }
    pub fn log(&mut self, x: Var) -> Result<Var> {
        self.unary(Unary::Log, x)
    }
    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        self.unary(Unary::Scale(c), x)
    }
    pub fn add_scalar(&mut self, x: Var, c: f64) -> Result<Var> {
        self.unary(Unary::AddScalar(c), x)
    }
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        self.reduce(Reduce::Sum, x)
    }
    pub fn mean(&mut self, x: Var) -> Result<Var> {
        self.reduce(Reduce::Mean, x)
    }

    /// Reverse sweep from a scalar `loss`. Does not modify the tape, so
    /// repeated calls give identical results.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lt = self.value(loss);
        if !lt.is_scalar() {
            return Err(Error::NonScalarLoss(lt.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        if self.nodes[loss.0].requires_grad {
            grads[loss.0] = Some(vec![1.0]);
        }

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            self.propagate(node, &g, &mut grads);
            grads[idx] = Some(g);
        }

        let shapes: Vec<Vec<usize>> = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        grads.resize(self.nodes.len(), None);
        for g in grads.iter().flatten() {
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("gradient".into()));
            }
        }
        Ok(Gradients { grads, shapes })
    }

    fn wants(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        fn acc(grads: &mut [Option<Vec<f64>>], v: Var, n: usize) -> &mut Vec<f64> {
            grads[v.0].get_or_insert_with(|| vec![0.0; n])
        }
        match node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = (self.shape(a)[0], self.shape(a)[1]);
                let n = self.shape(b)[1];
                if self.wants(a) {
                    let ga = acc(grads, a, m * k);
                    gemm_nt(g, self.value(b).data(), ga, m, k, n);
                }
                if self.wants(b) {
                    let gb = acc(grads, b, k * n);
                    gemm_tn(self.value(a).data(), g, gb, m, k, n);
                }
            }
            Op::AddBias(x, bias) => {
                let n = self.shape(bias)[0];
                if self.wants(x) {
                    let gx = acc(grads, x, g.len());
                    for (o, v) in gx.iter_mut().zip(g) {
                        *o += v;
                    }
                }
                if self.wants(bias) {
                    let gb = acc(grads, bias, n);
                    for row in g.chunks(n) {
                        for (o, v) in gb.iter_mut().zip(row) {
                            *o += v;
                        }
                    }
                }
            }
            Op::Unary(op, x) => {
                if !self.wants(x) {
                    return;
                }
                let xv = self.value(x).data();
                let yv = node.value.data();
                let gx = acc(grads, x, xv.len());
                for i in 0..xv.len() {
                    let d = match op {
                        Unary::Relu => {
                            if xv[i] > 0.0 {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        Unary::LeakyRelu(s) => {
                            if xv[i] > 0.0 {
                                1.0
                            } else {
                                s
                            }
                        }
                        Unary::Sigmoid => yv[i] * (1.0 - yv[i]),
                        Unary::Tanh => 1.0 - yv[i] * yv[i],
                        Unary::Log => {
                            if xv[i] > LOG_EPS {
                                1.0 / xv[i]
                            } else {
                                0.0
                            }
                        }
                        Unary::Abs => {
                            if xv[i] > 0.0 {
                                1.0
                            } else if xv[i] < 0.0 {
                                -1.0
                            } else {
                                0.0
                            }
                        }
                        Unary::Pow(p) => {
                            if p == 0.0 {
                                0.0
                            } else {
                                p * xv[i].powf(p - 1.0)
                            }
                        }
                        Unary::Scale(c) => c,
                        Unary::AddScalar(_) => 1.0,
                    };
                    gx[i] += g[i] * d;
                }
            }
            Op::Binary(op, a, b) => {
                let (ta, tb) = (self.value(a), self.value(b));
                let n = g.len();
                let av = |i: usize| if ta.numel() == n { ta.data()[i] } else { ta.data()[0] };
                let bv = |i: usize| if tb.numel() == n { tb.data()[i] } else { tb.data()[0] };
                if self.wants(a) {
                    let broadcast = ta.numel() != n;
                    let ga = acc(grads, a, ta.numel());
                    for i in 0..n {
                        let d = match op {
                            Binary::Add | Binary::Sub => g[i],
                            Binary::Mul => g[i] * bv(i),
                        };
                        ga[if broadcast { 0 } else { i }] += d;
                    }
                }
                if self.wants(b) {
                    let broadcast = tb.numel() != n;
                    let gb = acc(grads, b, tb.numel());
                    for i in 0..n {
                        let d = match op {
                            Binary::Add => g[i],
                            Binary::Sub => -g[i],
                            Binary::Mul => g[i] * av(i),
                        };
                        gb[if broadcast { 0 } else { i }] += d;
                    }
                }
            }
            Op::Reduce(op, x) => {
                if !self.wants(x) {
                    return;
                }
                let n = self.value(x).numel();
                let d = match op {
                    Reduce::Sum => g[0],
                    Reduce::Mean => g[0] / n as f64,
                };
                for o in acc(grads, x, n).iter_mut() {
                    *o += d;
                }
            }
            Op::LpPowerNorm(norm, x) => {
                if !self.wants(x) {
                    return;
                }
                let xv = self.value(x).data();
                let gx = acc(grads, x, xv.len());
                for (o, &v) in gx.iter_mut().zip(xv) {
                    let d = match norm {
                        Norm::L1 => {
                            if v > 0.0 {
                                1.0
                            } else if v < 0.0 {
                                -1.0
                            } else {
                                0.0
                            }
                        }
                        Norm::L2 => 2.0 * v,
                    };
                    *o += g[0] * d;
                }
            }
            Op::ConcatCols(a, b) => {
                let (m, p) = (self.shape(a)[0], self.shape(a)[1]);
                let q = self.shape(b)[1];
                if self.wants(a) {
                    let ga = acc(grads, a, m * p);
                    for r in 0..m {
                        for c in 0..p {
                            ga[r * p + c] += g[r * (p + q) + c];
                        }
                    }
                }
                if self.wants(b) {
                    let gb = acc(grads, b, m * q);
                    for r in 0..m {
                        for c in 0..q {
                            gb[r * q + c] += g[r * (p + q) + p + c];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn matmul_identity_and_scalar() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[2, 2], &[1., 0., 0., 1.]));
        let b = tape.constant(t(&[2, 1], &[3., 4.]));
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).data(), &[3., 4.]);

        let a = tape.constant(t(&[1, 1], &[2.]));
        let b = tape.constant(t(&[1, 1], &[3.]));
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).data(), &[6.]);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[2, 3], &[0.; 6]));
        let b = tape.constant(t(&[2, 3], &[0.; 6]));
        assert!(matches!(tape.matmul(a, b), Err(Error::Shape { .. })));
    }

    #[test]
    fn elementwise_examples() {
        let mut tape = Tape::new();
        let z = tape.constant(Tensor::scalar(0.0).unwrap());
        let s = tape.sigmoid(z).unwrap();
        assert_eq!(tape.value(s).item(), 0.5);
        let x = tape.constant(t(&[2], &[-3., 3.]));
        let r = tape.relu(x).unwrap();
        assert_eq!(tape.value(r).data(), &[0., 3.]);
    }

    #[test]
    fn binary_rejects_broadcast_beyond_scalar() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[2, 2], &[1.; 4]));
        let b = tape.constant(t(&[2], &[1.; 2]));
        assert!(tape.add(a, b).is_err());
        let s = tape.constant(Tensor::scalar(2.0).unwrap());
        let out = tape.mul(s, a).unwrap();
        assert_eq!(tape.value(out).data(), &[2.; 4]);
    }

    #[test]
    fn log_is_clamped() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[2], &[0.0, 1.0]));
        let y = tape.log(x).unwrap();
        assert_eq!(tape.value(y).data()[0], LOG_EPS.ln());
        let s = tape.sum(y).unwrap();
        let g = tape.backward(s).unwrap();
        assert_eq!(g.wrt(x).data(), &[0.0, 1.0]);
    }

    #[test]
    fn reductions() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[3], &[1., 2., 3.]));
        let s = tape.sum(x).unwrap();
        assert_eq!(tape.value(s).item(), 6.0);
        let y = tape.constant(t(&[2], &[2., 4.]));
        let m = tape.mean(y).unwrap();
        assert_eq!(tape.value(m).item(), 3.0);
    }

    #[test]
    fn lp_power_norm_examples() {
        let mut tape = Tape::new();
        let x = tape.constant(t(&[2], &[3., 4.]));
        let n2 = tape.lp_power_norm(x, Norm::L2).unwrap();
        assert_eq!(tape.value(n2).item(), 25.0);
        let x = tape.constant(t(&[2], &[3., -4.]));
        let n1 = tape.lp_power_norm(x, Norm::L1).unwrap();
        assert_eq!(tape.value(n1).item(), 7.0);
        let z = tape.constant(t(&[3], &[0.; 3]));
        for norm in [Norm::L1, Norm::L2] {
            let n = tape.lp_power_norm(z, norm).unwrap();
            assert_eq!(tape.value(n).item(), 0.0);
        }
        assert!(Norm::try_from(3u8).is_err());
    }

    #[test]
    fn backward_square_and_constant() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[2], &[1., 2.]));
        let loss = tape.lp_power_norm(x, Norm::L2).unwrap();
        let g = tape.backward(loss).unwrap();
        assert_eq!(g.wrt(x).data(), &[2., 4.]);

        let mut tape = Tape::new();
        let x = tape.leaf(t(&[2], &[1., 2.]));
        let c = tape.constant(Tensor::scalar(5.0).unwrap());
        let g = tape.backward(c).unwrap();
        assert_eq!(g.wrt(x).data(), &[0., 0.]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[2], &[1., 2.]));
        assert!(matches!(tape.backward(x), Err(Error::NonScalarLoss(_))));
    }

    #[test]
    fn l1_subgradient_at_zero_is_zero() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[3], &[0., -1., 2.]));
        let n = tape.lp_power_norm(x, Norm::L1).unwrap();
        let g = tape.backward(n).unwrap();
        assert_eq!(g.wrt(x).data(), &[0., -1., 1.]);
    }

    #[test]
    fn concat_cols_orders_left_first() {
        let mut tape = Tape::new();
        let a = tape.constant(t(&[1, 2], &[1., 2.]));
        let b = tape.constant(t(&[1, 1], &[3.]));
        let c = tape.concat_cols(a, b).unwrap();
        assert_eq!(tape.value(c).data(), &[1., 2., 3.]);
        assert_eq!(tape.shape(c), &[1, 3]);
    }
}
