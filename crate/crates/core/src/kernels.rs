//! Covariance functions with analytic gradients in log-hyperparameter space.
//!
//! A [`KernelSpec`] is a sum/product tree whose leaves read a slice of the
//! input vector. Hyperparameters live in one flat vector of logarithms laid
//! out depth-first over the tree; [`KernelSpec::param_names`] labels every
//! entry.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::JointType;
use crate::error::{Error, Result};
use crate::features::AugmentedLayout;

/// Composition tree of covariance functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `lambda * exp(-sum_k (x_k - y_k)^2 / l_k)`.
    /// Parameters: `log_lambda`, `log_lengthscale_diag[d]`.
    Rbf {
        indices: Vec<usize>,
    },
    /// `(sigma_p^2 + sum_k s_k x_k y_k)^p`.
    /// Parameters: `log_sigma_p2`, `log_sigma_diag[d]`.
    Poly {
        indices: Vec<usize>,
        degree: u32,
    },
    /// `prod_s (sigma_s^2 + sum_k s_sk x_k y_k)` with independent factors.
    /// Parameters per factor: `log_sigma2`, `log_sigma_diag[d]`.
    Mpk {
        indices: Vec<usize>,
        degree: u32,
    },
    /// `sum_k w_k x_k y_k`, i.e. a linear model with prior `N(0, diag(w))`.
    /// Parameters: `log_w_prior_diag[d]`.
    LinearPp {
        indices: Vec<usize>,
    },
    Sum {
        children: Vec<KernelSpec>,
    },
    Product {
        children: Vec<KernelSpec>,
    },
}

impl KernelSpec {
    pub fn n_params(&self) -> usize {
        match self {
            KernelSpec::Rbf { indices } | KernelSpec::Poly { indices, .. } => 1 + indices.len(),
            KernelSpec::Mpk { indices, degree } => *degree as usize * (1 + indices.len()),
            KernelSpec::LinearPp { indices } => indices.len(),
            KernelSpec::Sum { children } | KernelSpec::Product { children } => {
                children.iter().map(KernelSpec::n_params).sum()
            }
        }
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.n_params());
        self.collect_names("k", &mut out);
        out
    }

    fn collect_names(&self, path: &str, out: &mut Vec<String>) {
        let diag = |out: &mut Vec<String>, prefix: &str, name: &str, d: usize| {
            for k in 0..d {
                out.push(format!("{prefix}.{name}[{k}]"));
            }
        };
        match self {
            KernelSpec::Rbf { indices } => {
                out.push(format!("{path}.rbf.log_lambda"));
                diag(
                    out,
                    &format!("{path}.rbf"),
                    "log_lengthscale_diag",
                    indices.len(),
                );
            }
            KernelSpec::Poly { indices, .. } => {
                out.push(format!("{path}.poly.log_sigma_p2"));
                diag(
                    out,
                    &format!("{path}.poly"),
                    "log_sigma_diag",
                    indices.len(),
                );
            }
            KernelSpec::Mpk { indices, degree } => {
                for s in 0..*degree {
                    let p = format!("{path}.mpk.f{s}");
                    out.push(format!("{p}.log_sigma2"));
                    diag(out, &p, "log_sigma_diag", indices.len());
                }
            }
            KernelSpec::LinearPp { indices } => diag(
                out,
                &format!("{path}.linear_pp"),
                "log_w_prior_diag",
                indices.len(),
            ),
            KernelSpec::Sum { children } | KernelSpec::Product { children } => {
                for (c, child) in children.iter().enumerate() {
                    child.collect_names(&format!("{path}.{c}"), out);
                }
            }
        }
    }

    /// Smallest input dimension the tree can read from.
    pub fn min_input_dim(&self) -> usize {
        match self {
            KernelSpec::Rbf { indices }
            | KernelSpec::Poly { indices, .. }
            | KernelSpec::Mpk { indices, .. }
            | KernelSpec::LinearPp { indices } => indices.iter().map(|&i| i + 1).max().unwrap_or(0),
            KernelSpec::Sum { children } | KernelSpec::Product { children } => children
                .iter()
                .map(KernelSpec::min_input_dim)
                .max()
                .unwrap_or(0),
        }
    }

    /// Structural checks: nonempty leaves and nodes, positive degrees.
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Rbf { indices } | KernelSpec::LinearPp { indices } => {
                if indices.is_empty() {
                    return Err(Error::invalid("kernel leaf reads no inputs"));
                }
            }
            KernelSpec::Poly { indices, degree } | KernelSpec::Mpk { indices, degree } => {
                if indices.is_empty() {
                    return Err(Error::invalid("kernel leaf reads no inputs"));
                }
                if *degree == 0 {
                    return Err(Error::invalid(
                        "polynomial kernel degree must be at least 1",
                    ));
                }
            }
            KernelSpec::Sum { children } | KernelSpec::Product { children } => {
                if children.is_empty() {
                    return Err(Error::invalid("composite kernel without children"));
                }
                for c in children {
                    c.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Exponentiates the log-parameters into an evaluator.
    pub fn prepare(&self, log_params: &[f64]) -> Result<PreparedKernel> {
        self.validate()?;
        if log_params.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "kernel takes {} hyperparameters, got {}",
                self.n_params(),
                log_params.len()
            )));
        }
        if log_params.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::invalid("hyperparameters must be finite or -inf"));
        }
        let mut offset = 0;
        let root = Node::build(self, log_params, &mut offset);
        Ok(PreparedKernel {
            root,
            n_params: offset,
            min_dim: self.min_input_dim(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: KernelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
struct Linear {
    bias: f64,
    scales: Vec<f64>,
}

impl Linear {
    fn value(&self, idx: &[usize], x: &[f64], y: &[f64]) -> f64 {
        self.bias
            + idx
                .iter()
                .zip(&self.scales)
                .map(|(&i, s)| s * (x[i] * y[i]))
                .sum::<f64>()
    }

    /// Writes `d/dlog` of the factor into `g` (bias first) and returns its value.
    fn value_grad(&self, idx: &[usize], x: &[f64], y: &[f64], g: &mut [f64]) -> f64 {
        g[0] = self.bias;
        let mut v = self.bias;
        for (k, (&i, s)) in idx.iter().zip(&self.scales).enumerate() {
            let t = s * (x[i] * y[i]);
            g[1 + k] = t;
            v += t;
        }
        v
    }
}

#[derive(Debug, Clone)]
enum Node {
    Rbf {
        idx: Vec<usize>,
        lambda: f64,
        inv_len: Vec<f64>,
        off: usize,
    },
    Poly {
        idx: Vec<usize>,
        degree: i32,
        base: Linear,
        off: usize,
    },
    Mpk {
        idx: Vec<usize>,
        factors: Vec<Linear>,
        off: usize,
    },
    LinearPp {
        idx: Vec<usize>,
        w: Vec<f64>,
        off: usize,
    },
    Sum(Vec<(Node, usize, usize)>),
    Product(Vec<(Node, usize, usize)>),
}

impl Node {
    fn build(spec: &KernelSpec, p: &[f64], offset: &mut usize) -> Node {
        let off = *offset;
        let take = |offset: &mut usize, n: usize| {
            let s: Vec<f64> = p[*offset..*offset + n].iter().map(|v| v.exp()).collect();
            *offset += n;
            s
        };
        match spec {
            KernelSpec::Rbf { indices } => {
                let v = take(offset, 1 + indices.len());
                Node::Rbf {
                    idx: indices.clone(),
                    lambda: v[0],
                    inv_len: v[1..].iter().map(|l| 1.0 / l).collect(),
                    off,
                }
            }
            KernelSpec::Poly { indices, degree } => {
                let v = take(offset, 1 + indices.len());
                Node::Poly {
                    idx: indices.clone(),
                    degree: *degree as i32,
                    base: Linear {
                        bias: v[0],
                        scales: v[1..].to_vec(),
                    },
                    off,
                }
            }
            KernelSpec::Mpk { indices, degree } => {
                let factors = (0..*degree)
                    .map(|_| {
                        let v = take(offset, 1 + indices.len());
                        Linear {
                            bias: v[0],
                            scales: v[1..].to_vec(),
                        }
                    })
                    .collect();
                Node::Mpk {
                    idx: indices.clone(),
                    factors,
                    off,
                }
            }
            KernelSpec::LinearPp { indices } => Node::LinearPp {
                idx: indices.clone(),
                w: take(offset, indices.len()),
                off,
            },
            KernelSpec::Sum { children } | KernelSpec::Product { children } => {
                let kids = children
                    .iter()
                    .map(|c| {
                        let start = *offset;
                        let node = Node::build(c, p, offset);
                        (node, start, *offset)
                    })
                    .collect();
                if matches!(spec, KernelSpec::Sum { .. }) {
                    Node::Sum(kids)
                } else {
                    Node::Product(kids)
                }
            }
        }
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Node::Rbf {
                idx,
                lambda,
                inv_len,
                ..
            } => {
                let r: f64 = idx
                    .iter()
                    .zip(inv_len)
                    .map(|(&i, il)| {
                        let d = x[i] - y[i];
                        d * d * il
                    })
                    .sum();
                lambda * (-r).exp()
            }
            Node::Poly {
                idx, degree, base, ..
            } => base.value(idx, x, y).powi(*degree),
            Node::Mpk { idx, factors, .. } => factors.iter().map(|f| f.value(idx, x, y)).product(),
            Node::LinearPp { idx, w, .. } => {
                idx.iter().zip(w).map(|(&i, w)| w * (x[i] * y[i])).sum()
            }
            Node::Sum(kids) => kids.iter().map(|(k, _, _)| k.value(x, y)).sum(),
            Node::Product(kids) => kids.iter().map(|(k, _, _)| k.value(x, y)).product(),
        }
    }

    /// Value plus its gradient, written into this node's region of `g`.
    fn value_grad(&self, x: &[f64], y: &[f64], g: &mut [f64]) -> f64 {
        match self {
            Node::Rbf {
                idx,
                lambda,
                inv_len,
                off,
            } => {
                let mut r = 0.0;
                for (k, (&i, il)) in idx.iter().zip(inv_len).enumerate() {
                    let d = x[i] - y[i];
                    let t = d * d * il;
                    g[off + 1 + k] = t;
                    r += t;
                }
                let v = lambda * (-r).exp();
                g[*off] = v;
                for k in 0..idx.len() {
                    g[off + 1 + k] *= v;
                }
                v
            }
            Node::Poly {
                idx,
                degree,
                base,
                off,
            } => {
                let n = 1 + idx.len();
                let u = base.value_grad(idx, x, y, &mut g[*off..off + n]);
                let scale = *degree as f64 * u.powi(degree - 1);
                for v in &mut g[*off..off + n] {
                    *v *= scale;
                }
                u.powi(*degree)
            }
            Node::Mpk { idx, factors, off } => {
                let n = 1 + idx.len();
                with_scratch(2 * factors.len(), |buf| {
                    let (vals, suffix) = buf.split_at_mut(factors.len());
                    for (s, f) in factors.iter().enumerate() {
                        let start = off + s * n;
                        vals[s] = f.value_grad(idx, x, y, &mut g[start..start + n]);
                    }
                    scale_by_others(vals, suffix, |s, o| {
                        let start = off + s * n;
                        for v in &mut g[start..start + n] {
                            *v *= o;
                        }
                    })
                })
            }
            Node::LinearPp { idx, w, off } => {
                let mut v = 0.0;
                for (k, (&i, w)) in idx.iter().zip(w).enumerate() {
                    let t = w * (x[i] * y[i]);
                    g[off + k] = t;
                    v += t;
                }
                v
            }
            Node::Sum(kids) => kids.iter().map(|(k, _, _)| k.value_grad(x, y, g)).sum(),
            Node::Product(kids) => with_scratch(2 * kids.len(), |buf| {
                let (vals, suffix) = buf.split_at_mut(kids.len());
                for (c, (k, _, _)) in kids.iter().enumerate() {
                    vals[c] = k.value_grad(x, y, g);
                }
                scale_by_others(vals, suffix, |c, o| {
                    let (_, a, b) = &kids[c];
                    for v in &mut g[*a..*b] {
                        *v *= o;
                    }
                })
            }),
        }
    }
}

const SCRATCH: usize = 32;

/// Runs `f` on a zeroed buffer of length `len`, on the stack when small.
fn with_scratch<T>(len: usize, f: impl FnOnce(&mut [f64]) -> T) -> T {
    if len <= SCRATCH {
        let mut buf = [0.0; SCRATCH];
        f(&mut buf[..len])
    } else {
        f(&mut vec![0.0; len])
    }
}

/// Calls `apply(i, prod_{j != i} vals[j])` for every `i` using prefix and
/// suffix products (no division), and returns the full product.
fn scale_by_others(vals: &[f64], suffix: &mut [f64], mut apply: impl FnMut(usize, f64)) -> f64 {
    let mut acc = 1.0;
    for i in (0..vals.len()).rev() {
        suffix[i] = acc;
        acc *= vals[i];
    }
    let mut prefix = 1.0;
    for i in 0..vals.len() {
        apply(i, prefix * suffix[i]);
        prefix *= vals[i];
    }
    acc
}

/// A kernel with its hyperparameters fixed, ready for evaluation.
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    root: Node,
    n_params: usize,
    min_dim: usize,
}

impl PreparedKernel {
    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn min_input_dim(&self) -> usize {
        self.min_dim
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim < self.min_dim {
            return Err(Error::invalid(format!(
                "kernel reads input index {} but inputs have dimension {dim}",
                self.min_dim - 1
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::invalid("kernel arguments differ in dimension"));
        }
        self.check_dim(x.len())?;
        Ok(self.root.value(x, y))
    }

    /// Value and `dk/dtheta` for every log-hyperparameter.
    pub fn value_grad(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != y.len() {
            return Err(Error::invalid("kernel arguments differ in dimension"));
        }
        self.check_dim(x.len())?;
        let mut g = vec![0.0; self.n_params];
        let v = self.root.value_grad(x, y, &mut g);
        Ok((v, g))
    }

    /// Symmetric Gram matrix `K(X, X)`.
    pub fn gram(&self, x: &InputRows) -> Result<DMatrix<f64>> {
        self.check_dim(x.dim())?;
        let n = x.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| self.root.value(x.row(i), x.row(j)))
                    .collect()
            })
            .collect();
        let mut k = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross covariance `K(A, B)` with one row per element of `a`.
    pub fn cross_gram(&self, a: &InputRows, b: &InputRows) -> Result<DMatrix<f64>> {
        if a.dim() != b.dim() {
            return Err(Error::invalid("input sets differ in dimension"));
        }
        self.check_dim(a.dim())?;
        let cols: Vec<Vec<f64>> = (0..b.len())
            .into_par_iter()
            .map(|j| {
                (0..a.len())
                    .map(|i| self.root.value(a.row(i), b.row(j)))
                    .collect()
            })
            .collect();
        let mut k = DMatrix::zeros(a.len(), b.len());
        for (j, col) in cols.iter().enumerate() {
            k.column_mut(j).copy_from_slice(col);
        }
        Ok(k)
    }

    /// `k(x_i, x_i)` for every row.
    pub fn diag(&self, x: &InputRows) -> Result<DVector<f64>> {
        self.check_dim(x.dim())?;
        Ok(DVector::from_iterator(
            x.len(),
            (0..x.len()).map(|i| self.root.value(x.row(i), x.row(i))),
        ))
    }

    /// `dK/dtheta` for every log-hyperparameter, as full matrices.
    pub fn gram_gradients(&self, x: &InputRows) -> Result<Vec<DMatrix<f64>>> {
        self.check_dim(x.dim())?;
        let n = x.len();
        let mut out = vec![DMatrix::zeros(n, n); self.n_params];
        let mut g = vec![0.0; self.n_params];
        for i in 0..n {
            for j in 0..=i {
                self.root.value_grad(x.row(i), x.row(j), &mut g);
                for (m, v) in out.iter_mut().zip(&g) {
                    m[(i, j)] = *v;
                    m[(j, i)] = *v;
                }
            }
        }
        Ok(out)
    }

    /// `sum_ij W_ij dK_ij/dtheta` for symmetric `W`, without forming the
    /// derivative matrices.
    pub fn contract_gram_gradients(&self, x: &InputRows, w: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.check_dim(x.dim())?;
        let n = x.len();
        if w.shape() != (n, n) {
            return Err(Error::invalid("weight matrix does not match the inputs"));
        }
        let np = self.n_params;
        let total = (0..n)
            .into_par_iter()
            .fold(
                || (vec![0.0; np], vec![0.0; np]),
                |(mut acc, mut g), i| {
                    for j in 0..=i {
                        let wij = if i == j {
                            w[(i, i)]
                        } else {
                            w[(i, j)] + w[(j, i)]
                        };
                        if wij == 0.0 {
                            continue;
                        }
                        self.root.value_grad(x.row(i), x.row(j), &mut g);
                        for (a, v) in acc.iter_mut().zip(&g) {
                            *a += wij * v;
                        }
                    }
                    (acc, g)
                },
            )
            .map(|(acc, _)| acc)
            .reduce(
                || vec![0.0; np],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(&b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(total)
    }
}

/// Row-major set of input vectors of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRows {
    dim: usize,
    data: Vec<f64>,
}

impl InputRows {
    pub fn new(dim: usize) -> Self {
        InputRows {
            dim,
            data: Vec::new(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut out = InputRows::new(dim);
        for r in rows {
            out.push(r)?;
        }
        Ok(out)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            data.extend(m.row(r).iter());
        }
        InputRows {
            dim: m.ncols(),
            data,
        }
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::invalid(format!(
                "input row has dimension {}, expected {}",
                row.len(),
                self.dim
            )));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn select(&self, rows: &[usize]) -> InputRows {
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        InputRows {
            dim: self.dim,
            data,
        }
    }

    pub fn prefix(&self, n: usize) -> InputRows {
        InputRows {
            dim: self.dim,
            data: self.data[..n.min(self.len()) * self.dim].to_vec(),
        }
    }
}

/// Log-space hyperparameters of a kernel tree with a trainable mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub names: Vec<String>,
    pub log_values: Vec<f64>,
    pub trainable: Vec<bool>,
}

impl HyperParams {
    pub fn new(spec: &KernelSpec, log_values: Vec<f64>) -> Result<Self> {
        if log_values.len() != spec.n_params() {
            return Err(Error::invalid(format!(
                "kernel takes {} hyperparameters, got {}",
                spec.n_params(),
                log_values.len()
            )));
        }
        Ok(HyperParams {
            names: spec.param_names(),
            trainable: vec![true; log_values.len()],
            log_values,
        })
    }

    pub fn constant(spec: &KernelSpec, log_value: f64) -> Self {
        HyperParams::new(spec, vec![log_value; spec.n_params()]).expect("length matches")
    }

    /// Every log-parameter uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(spec: &KernelSpec, rng: &mut R) -> Self {
        let v = (0..spec.n_params())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        HyperParams::new(spec, v).expect("length matches")
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn trainable_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.trainable[i]).collect()
    }

    /// Freezes every parameter whose name contains `pattern`; returns how
    /// many were frozen.
    pub fn freeze_matching(&mut self, pattern: &str) -> usize {
        let mut count = 0;
        for (name, t) in self.names.iter().zip(self.trainable.iter_mut()) {
            if name.contains(pattern) && *t {
                *t = false;
                count += 1;
            }
        }
        count
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.log_values[i])
    }

    pub fn set(&mut self, name: &str, log_value: f64) -> Result<()> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::invalid(format!("no hyperparameter named {name}")))?;
        self.log_values[i] = log_value;
        Ok(())
    }
}

/// The GIP kernel over augmented inputs: one degree-2 MPK per revolute
/// joint on `(cos q_b, sin q_b)`, one degree-2 MPK per prismatic joint on
/// `q_b`, and a degree-1 MPK on `q_av = [ddq, dq_v]`.
pub fn gip_spec(joint_types: &[JointType]) -> Result<KernelSpec> {
    let layout = AugmentedLayout::new(joint_types)?;
    let mut children = Vec::new();
    for b in 0..layout.n_revolute() {
        children.push(KernelSpec::Mpk {
            indices: vec![layout.cos_index(b), layout.sin_index(b)],
            degree: 2,
        });
    }
    for b in 0..layout.n_prismatic() {
        children.push(KernelSpec::Mpk {
            indices: vec![layout.prismatic_index(b)],
            degree: 2,
        });
    }
    children.push(KernelSpec::Mpk {
        indices: layout.q_av_indices(),
        degree: 1,
    });
    Ok(KernelSpec::Product { children })
}

/// RBF over inputs `offset..offset + dim`.
pub fn rbf_spec(offset: usize, dim: usize) -> KernelSpec {
    KernelSpec::Rbf {
        indices: (offset..offset + dim).collect(),
    }
}

/// Linear parametric-prior kernel over a regressor row stored at
/// `offset..offset + n_params`.
pub fn pp_spec(offset: usize, n_params: usize) -> KernelSpec {
    KernelSpec::LinearPp {
        indices: (offset..offset + n_params).collect(),
    }
}

/// Semiparametric kernel: parametric prior plus RBF.
pub fn sp_spec(pp: KernelSpec, rbf: KernelSpec) -> KernelSpec {
    KernelSpec::Sum {
        children: vec![pp, rbf],
    }
}
