//! Exact single-output Gaussian process regression.
//!
//! One [`GpModel`] is trained per joint. Hyperparameters (kernel and noise)
//! are fitted by maximizing the log marginal likelihood with Adam.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{HyperParams, InputRows, KernelSpec, PreparedKernel};
use crate::linalg::cholesky_with_jitter;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Serialized content of a trained model; the Cholesky factor is rebuilt on
/// load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpModelData {
    pub kernel: KernelSpec,
    pub hyper: HyperParams,
    pub noise_var: f64,
    pub inputs: InputRows,
    pub targets: Vec<f64>,
}

/// A GP conditioned on training data.
#[derive(Debug, Clone)]
pub struct GpModel {
    data: GpModelData,
    kernel: PreparedKernel,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

/// Conditions the GP on `(x, y)`. A diagonal jitter is added only when the
/// factorization of `K + noise_var I` fails.
pub fn fit(
    kernel: &KernelSpec,
    hyper: &HyperParams,
    x: &InputRows,
    y: &DVector<f64>,
    noise_var: f64,
) -> Result<GpModel> {
    GpModel::from_data(GpModelData {
        kernel: kernel.clone(),
        hyper: hyper.clone(),
        noise_var,
        inputs: x.clone(),
        targets: y.iter().copied().collect(),
    })
}

fn check_training_data(x: &InputRows, y: &[f64], noise_var: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("at least one training sample is required"));
    }
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "{} training inputs but {} targets",
            x.len(),
            y.len()
        )));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::invalid(
            "noise variance must be finite and non-negative",
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("targets must be finite"));
    }
    Ok(())
}

fn factor(k: &PreparedKernel, x: &InputRows, noise_var: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut gram = k.gram(x)?;
    for i in 0..x.len() {
        gram[(i, i)] += noise_var;
    }
    cholesky_with_jitter(&gram)
}

impl GpModel {
    pub fn from_data(data: GpModelData) -> Result<Self> {
        check_training_data(&data.inputs, &data.targets, data.noise_var)?;
        let kernel = data.kernel.prepare(&data.hyper.log_values)?;
        kernel.check_dim(data.inputs.dim())?;
        let (chol, jitter) = factor(&kernel, &data.inputs, data.noise_var)?;
        let alpha = chol.solve(&DVector::from_column_slice(&data.targets));
        Ok(GpModel {
            data,
            kernel,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn data(&self) -> &GpModelData {
        &self.data
    }

    pub fn noise_var(&self) -> f64 {
        self.data.noise_var
    }

    /// Diagonal jitter that was needed to factorize the Gram matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn alpha(&self) -> &DVector<f64> {
        &self.alpha
    }

    /// Lower-triangular `L` with `L L^T = K + (noise_var + jitter) I`.
    pub fn chol_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn n_train(&self) -> usize {
        self.data.inputs.len()
    }

    /// Posterior mean and variance at one input.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let mut rows = InputRows::new(self.data.inputs.dim());
        rows.push(x)?;
        let (m, v) = self.predict_batch(&rows)?;
        Ok((m[0], v[0]))
    }

    /// Posterior means and variances; variances below zero from round-off
    /// are clamped to zero.
    pub fn predict_batch(&self, x: &InputRows) -> Result<(DVector<f64>, DVector<f64>)> {
        let (mean, kstar) = self.mean_and_cross(x)?;
        let mut v = kstar;
        self.chol.l_dirty().solve_lower_triangular_mut(&mut v);
        let prior = self.kernel.diag(x)?;
        let var = DVector::from_iterator(
            x.len(),
            (0..x.len()).map(|j| (prior[j] - v.column(j).norm_squared()).max(0.0)),
        );
        Ok((mean, var))
    }

    /// Posterior means only (no triangular solves).
    pub fn predict_mean(&self, x: &InputRows) -> Result<DVector<f64>> {
        Ok(self.mean_and_cross(x)?.0)
    }

    fn mean_and_cross(&self, x: &InputRows) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if x.dim() != self.data.inputs.dim() {
            return Err(Error::invalid(format!(
                "query inputs have dimension {}, model expects {}",
                x.dim(),
                self.data.inputs.dim()
            )));
        }
        let kstar = self.kernel.cross_gram(&self.data.inputs, x)?;
        let mean = kstar.tr_mul(&self.alpha);
        Ok((mean, kstar))
    }

    /// Log marginal likelihood and its gradient with respect to the
    /// trainable log-hyperparameters followed by `log noise_var`.
    pub fn log_marginal_likelihood(&self) -> Result<(f64, Vec<f64>)> {
        let y = DVector::from_column_slice(&self.data.targets);
        let n = y.len() as f64;
        let value = -0.5 * y.dot(&self.alpha)
            - self.chol.l_dirty().diagonal().map(f64::ln).sum()
            - 0.5 * n * LN_2PI;
        let kinv = self.chol.inverse();
        let w = &self.alpha * self.alpha.transpose() - &kinv;
        let full = self.kernel.contract_gram_gradients(&self.data.inputs, &w)?;
        let mut grad: Vec<f64> = self
            .data
            .hyper
            .trainable_indices()
            .into_iter()
            .map(|i| 0.5 * full[i])
            .collect();
        grad.push(0.5 * self.data.noise_var * w.trace());
        Ok((value, grad))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.data)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        GpModel::from_data(serde_json::from_str(text)?)
    }
}

/// Adam settings; `batch_size = 0` means full batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub train_noise: bool,
    /// Caps the number of Adam steps by ending training after the epoch in
    /// which the cap is reached; 0 disables the cap.
    pub max_steps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 5000,
            batch_size: 0,
            seed: 0,
            train_noise: true,
            max_steps: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1)")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Adam state for a parameter vector of fixed length.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(config: &OptimizerConfig, dim: usize) -> Self {
        Adam {
            lr: config.learning_rate,
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.epsilon,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    /// One descent step along `grad` (gradient of the loss to minimize).
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

/// Result of [`optimize_hyperparameters`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingOutcome {
    pub hyper: HyperParams,
    pub noise_var: f64,
    /// Negative log marginal likelihood per epoch (summed over batches).
    pub loss_trace: Vec<f64>,
    pub best_epoch: usize,
}

/// Negative log marginal likelihood and its gradient (trainable kernel
/// parameters, then log noise) for one data set.
pub fn negative_lml(
    kernel: &KernelSpec,
    hyper: &HyperParams,
    x: &InputRows,
    y: &DVector<f64>,
    noise_var: f64,
) -> Result<(f64, Vec<f64>)> {
    let model = fit(kernel, hyper, x, y, noise_var)?;
    let (v, g) = model.log_marginal_likelihood()?;
    Ok((-v, g.into_iter().map(|g| -g).collect()))
}

/// Minimizes the negative log marginal likelihood with Adam and returns the
/// hyperparameters of the epoch with the lowest loss.
pub fn optimize_hyperparameters(
    kernel: &KernelSpec,
    hyper0: &HyperParams,
    x: &InputRows,
    y: &DVector<f64>,
    noise_var0: f64,
    config: &OptimizerConfig,
) -> Result<TrainingOutcome> {
    config.validate()?;
    check_training_data(x, y.as_slice(), noise_var0)?;
    if noise_var0.is_nan() || noise_var0 <= 0.0 {
        return Err(Error::invalid("initial noise variance must be positive"));
    }
    let trainable = hyper0.trainable_indices();
    let mut theta: Vec<f64> = trainable.iter().map(|&i| hyper0.log_values[i]).collect();
    theta.push(noise_var0.ln());
    let mut adam = Adam::new(config, theta.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = x.len();
    let batch = if config.batch_size == 0 || config.batch_size >= n {
        n
    } else {
        config.batch_size
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut hyper = hyper0.clone();
    let unpack = |theta: &[f64], hyper: &mut HyperParams| {
        for (k, &i) in trainable.iter().enumerate() {
            hyper.log_values[i] = theta[k];
        }
        theta[theta.len() - 1].exp()
    };

    let steps_per_epoch = n.div_ceil(batch);
    let epochs = if config.max_steps > 0 {
        config
            .epochs
            .min(config.max_steps.div_ceil(steps_per_epoch))
    } else {
        config.epochs
    };
    let mut trace = Vec::with_capacity(epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for epoch in 0..epochs {
        if batch < n {
            order.shuffle(&mut rng);
        }
        let start = theta.clone();
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let noise = unpack(&theta, &mut hyper);
            let (xb, yb) = if batch < n {
                (
                    x.select(chunk),
                    DVector::from_iterator(chunk.len(), chunk.iter().map(|&i| y[i])),
                )
            } else {
                (x.clone(), y.clone())
            };
            let (loss, mut grad) = negative_lml(kernel, &hyper, &xb, &yb, noise)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::numerical(format!(
                    "non-finite loss or gradient at epoch {epoch} (loss {loss}, log params {theta:?})"
                )));
            }
            if !config.train_noise {
                *grad.last_mut().expect("noise entry") = 0.0;
            }
            epoch_loss += loss;
            adam.step(&mut theta, &grad);
        }
        trace.push(epoch_loss);
        if best.as_ref().is_none_or(|(b, _, _)| epoch_loss < *b) {
            best = Some((epoch_loss, epoch, start));
        }
    }
    let (best_epoch, best_theta) = match best {
        Some((_, e, t)) => (e, t),
        None => (0, theta),
    };
    let noise_var = unpack(&best_theta, &mut hyper);
    Ok(TrainingOutcome {
        hyper,
        noise_var,
        loss_trace: trace,
        best_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gip_spec, rbf_spec};
    use rand::Rng;

    fn toy(n: usize, seed: u64) -> (InputRows, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let y = DVector::from_iterator(
            n,
            rows.iter()
                .map(|r| r[0].sin() + 0.05 * rng.gen_range(-1.0..1.0)),
        );
        (InputRows::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_point_closed_form() {
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::new(&spec, vec![1.5f64.ln(), 0.0]).unwrap();
        let x = InputRows::from_rows(&[vec![0.3]]).unwrap();
        let y = DVector::from_vec(vec![2.0]);
        let s2 = 0.1;
        let m = fit(&spec, &hp, &x, &y, s2).unwrap();
        assert!((m.alpha()[0] - 2.0 / 1.6).abs() < 1e-14);
        let (mean, _) = m.predict(&[0.3]).unwrap();
        assert!((mean - 2.0 * 1.5 / 1.6).abs() < 1e-14);
        let (lml, _) = m.log_marginal_likelihood().unwrap();
        let want = -0.5 * 4.0 / 1.6 - 0.5 * 1.6f64.ln() - 0.5 * LN_2PI;
        assert!((lml - want).abs() < 1e-13);
    }

    #[test]
    fn far_prediction_reverts_to_prior() {
        let (x, y) = toy(10, 1);
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::new(&spec, vec![0.7f64.ln(), 0.0]).unwrap();
        let m = fit(&spec, &hp, &x, &y, 0.01).unwrap();
        let (mean, var) = m.predict(&[100.0]).unwrap();
        assert!(mean.abs() < 1e-12);
        assert!((var - 0.7).abs() < 1e-12);
    }

    #[test]
    fn batch_predict_matches_pointwise() {
        let (x, y) = toy(30, 2);
        let spec = rbf_spec(0, 1);
        let m = fit(&spec, &HyperParams::constant(&spec, 0.0), &x, &y, 0.01).unwrap();
        let (q, _) = toy(100, 3);
        let (means, vars) = m.predict_batch(&q).unwrap();
        for i in 0..q.len() {
            let (mi, vi) = m.predict(q.row(i)).unwrap();
            assert!((mi - means[i]).abs() < 1e-12);
            assert!((vi - vars[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_factor_reproduces_gram() {
        let (x, y) = toy(25, 4);
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::constant(&spec, 0.2);
        let m = fit(&spec, &hp, &x, &y, 0.05).unwrap();
        let l = m.chol_factor();
        let mut k = spec.prepare(&hp.log_values).unwrap().gram(&x).unwrap();
        for i in 0..x.len() {
            k[(i, i)] += 0.05 + m.jitter();
        }
        assert!((&l * l.transpose() - &k).amax() < 1e-8 * k.amax());
        let again = m.chol.solve(&y);
        assert!((again - m.alpha()).amax() < 1e-12);
    }

    #[test]
    fn duplicate_inputs_without_noise_need_jitter() {
        let spec = rbf_spec(0, 1);
        let x = InputRows::from_rows(&[vec![0.5], vec![0.5]]).unwrap();
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let m = fit(&spec, &HyperParams::constant(&spec, 0.0), &x, &y, 0.0).unwrap();
        assert!(m.jitter() > 0.0);
    }

    #[test]
    fn rank_deficient_gram_is_rescued_by_jitter() {
        let spec = KernelSpec::LinearPp {
            indices: vec![0, 1],
        };
        let x = InputRows::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let m = fit(&spec, &HyperParams::constant(&spec, 0.0), &x, &y, 0.0).unwrap();
        assert!(m.jitter() > 0.0);
    }

    #[test]
    fn lml_gradient_matches_finite_differences() {
        let (x, y) = toy(20, 5);
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::new(&spec, vec![0.3, -0.4]).unwrap();
        let noise = 0.02;
        let (_, g) = negative_lml(&spec, &hp, &x, &y, noise).unwrap();
        let h = 1e-5;
        for (p, gp) in g.iter().enumerate() {
            let eval = |d: f64| {
                let mut hp2 = hp.clone();
                let mut ln = noise.ln();
                if p < 2 {
                    hp2.log_values[p] += d;
                } else {
                    ln += d;
                }
                negative_lml(&spec, &hp2, &x, &y, ln.exp()).unwrap().0
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert!(
                (fd - gp).abs() / fd.abs().max(1e-6) < 1e-4,
                "param {p}: {fd} vs {gp}"
            );
        }
    }

    #[test]
    fn frozen_parameters_drop_out_of_gradient() {
        let (x, y) = toy(10, 6);
        let spec = rbf_spec(0, 1);
        let mut hp = HyperParams::constant(&spec, 0.0);
        hp.freeze_matching("log_lambda");
        let (_, g) = negative_lml(&spec, &hp, &x, &y, 0.1).unwrap();
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn duplicated_dataset_changes_likelihood() {
        let (x, y) = toy(10, 7);
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::constant(&spec, 0.0);
        let (a, _) = negative_lml(&spec, &hp, &x, &y, 0.1).unwrap();
        let mut rows: Vec<Vec<f64>> = (0..10).map(|i| x.row(i).to_vec()).collect();
        rows.extend(rows.clone());
        let x2 = InputRows::from_rows(&rows).unwrap();
        let y2 = DVector::from_iterator(20, y.iter().chain(y.iter()).copied());
        let (b, _) = negative_lml(&spec, &hp, &x2, &y2, 0.1).unwrap();
        assert!((a - b).abs() > 1e-6);
    }

    #[test]
    fn adam_finds_quadratic_minimum() {
        let cfg = OptimizerConfig {
            learning_rate: 0.05,
            ..OptimizerConfig::default()
        };
        let target = [1.5, -2.0, 0.25];
        let mut p = vec![0.0; 3];
        let mut adam = Adam::new(&cfg, 3);
        for t in 0..2000 {
            let g: Vec<f64> = p.iter().zip(&target).map(|(a, b)| 2.0 * (a - b)).collect();
            adam.step(&mut p, &g);
            if t > 1900 {
                adam.lr = 1e-4;
            }
        }
        for (a, b) in p.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn training_improves_and_is_deterministic() {
        let (x, y) = toy(20, 8);
        let spec = rbf_spec(0, 1);
        let hp0 = HyperParams::constant(&spec, 1.0);
        let cfg = OptimizerConfig {
            learning_rate: 0.05,
            epochs: 100,
            seed: 3,
            ..OptimizerConfig::default()
        };
        let a = optimize_hyperparameters(&spec, &hp0, &x, &y, 0.1, &cfg).unwrap();
        let b = optimize_hyperparameters(&spec, &hp0, &x, &y, 0.1, &cfg).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        let (l0, _) = negative_lml(&spec, &hp0, &x, &y, 0.1).unwrap();
        let (l1, _) = negative_lml(&spec, &a.hyper, &x, &y, a.noise_var).unwrap();
        assert!(l1 <= l0);
        let mini = OptimizerConfig {
            batch_size: 7,
            ..cfg
        };
        let c = optimize_hyperparameters(&spec, &hp0, &x, &y, 0.1, &mini).unwrap();
        let d = optimize_hyperparameters(&spec, &hp0, &x, &y, 0.1, &mini).unwrap();
        assert_eq!(c.loss_trace, d.loss_trace);
    }

    #[test]
    fn gip_interpolates_polynomial_data() {
        use crate::dynamics::{JointState, JointType};
        use crate::features::augment;
        let types = [JointType::Revolute];
        let spec = gip_spec(&types).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let states: Vec<JointState> = (0..12)
            .map(|_| JointState::random(&types, 1.0, 2.0, &mut rng))
            .collect();
        let rows: Vec<Vec<f64>> = states
            .iter()
            .map(|s| augment(s, &types).unwrap().to_vector().as_slice().to_vec())
            .collect();
        let x = InputRows::from_rows(&rows).unwrap();
        let y = DVector::from_iterator(
            12,
            states
                .iter()
                .map(|s| 2.0 * s.ddq[0] * s.q[0].cos() + s.dq[0].powi(2) * s.q[0].sin()),
        );
        let m = fit(&spec, &HyperParams::constant(&spec, 0.0), &x, &y, 1e-8).unwrap();
        let pred = m.predict_mean(&x).unwrap();
        assert!((pred - &y).norm() / y.norm() < 1e-4);
    }

    #[test]
    fn mean_is_linear_in_targets() {
        let (x, y) = toy(15, 10);
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::constant(&spec, 0.0);
        let m1 = fit(&spec, &hp, &x, &y, 0.01).unwrap();
        let m2 = fit(&spec, &hp, &x, &(2.0 * &y), 0.01).unwrap();
        let (q, _) = toy(5, 11);
        assert_eq!(
            m1.predict_mean(&q).unwrap() * 2.0,
            m2.predict_mean(&q).unwrap()
        );
    }

    #[test]
    fn json_round_trip_restores_predictions() {
        let (x, y) = toy(15, 12);
        let spec = rbf_spec(0, 1);
        let m = fit(&spec, &HyperParams::constant(&spec, 0.1), &x, &y, 0.01).unwrap();
        let back = GpModel::from_json(&m.to_json().unwrap()).unwrap();
        let (q, _) = toy(5, 13);
        assert_eq!(
            m.predict_batch(&q).unwrap(),
            back.predict_batch(&q).unwrap()
        );
    }

    #[test]
    fn invalid_inputs_rejected() {
        let spec = rbf_spec(0, 1);
        let hp = HyperParams::constant(&spec, 0.0);
        let x = InputRows::from_rows(&[vec![0.0]]).unwrap();
        assert!(fit(&spec, &hp, &x, &DVector::from_vec(vec![1.0, 2.0]), 0.1).is_err());
        assert!(fit(&spec, &hp, &x, &DVector::from_vec(vec![1.0]), -1.0).is_err());
        let bad = OptimizerConfig {
            beta1: 1.0,
            ..OptimizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
