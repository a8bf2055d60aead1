//! The compared inverse-dynamics estimators.
//!
//! `FE` identifies the dynamics parameters by least squares on the model's
//! regressor. `PP`, `SP`, `RBF` and `GIP` are per-joint GPs whose inputs are
//! built by [`features`]: the regressor row of the joint (PP), the row
//! followed by the raw state (SP), the raw state `[q, dq, ddq]` (RBF) or the
//! augmented state (GIP).

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::dynamics::{fisherian_identify, regressor, stacked_regressor, JointState, RobotModel};
use crate::error::{Error, Result};
use crate::features::augment;
use crate::gp::{optimize_hyperparameters, GpModel, GpModelData, OptimizerConfig};
use crate::kernels::{gip_spec, pp_spec, rbf_spec, sp_spec, HyperParams, InputRows, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorKind {
    FE,
    PP,
    SP,
    RBF,
    GIP,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::FE,
        EstimatorKind::PP,
        EstimatorKind::SP,
        EstimatorKind::RBF,
        EstimatorKind::GIP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::FE => "FE",
            EstimatorKind::PP => "PP",
            EstimatorKind::SP => "SP",
            EstimatorKind::RBF => "RBF",
            EstimatorKind::GIP => "GIP",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown estimator '{s}'")))
    }

    /// Whether the estimator reads the robot model's regressor.
    pub fn uses_model(self) -> bool {
        matches!(
            self,
            EstimatorKind::FE | EstimatorKind::PP | EstimatorKind::SP
        )
    }

    /// Kernel of a GP estimator for `model`; `None` for FE.
    pub fn kernel(self, model: &RobotModel) -> Result<Option<KernelSpec>> {
        let n = model.dof();
        let p = model.n_params();
        Ok(match self {
            EstimatorKind::FE => None,
            EstimatorKind::PP => Some(pp_spec(0, p)),
            EstimatorKind::SP => Some(sp_spec(pp_spec(0, p), rbf_spec(p, 3 * n))),
            EstimatorKind::RBF => Some(rbf_spec(0, 3 * n)),
            EstimatorKind::GIP => Some(gip_spec(&model.joint_types())?),
        })
    }
}

/// GP input rows of `joint` for the states. FE has no per-joint inputs.
pub fn features(
    kind: EstimatorKind,
    model: &RobotModel,
    joint: usize,
    states: &[JointState],
) -> Result<InputRows> {
    let types = model.joint_types();
    let rows: Vec<Vec<f64>> = states
        .iter()
        .map(|s| -> Result<Vec<f64>> {
            Ok(match kind {
                EstimatorKind::FE => {
                    return Err(Error::invalid("FE is not a kernel estimator"));
                }
                EstimatorKind::PP => regressor(model, s)?.row(joint).iter().copied().collect(),
                EstimatorKind::SP => {
                    let mut r: Vec<f64> = regressor(model, s)?.row(joint).iter().copied().collect();
                    r.extend(s.to_raw().iter());
                    r
                }
                EstimatorKind::RBF => s.to_raw().iter().copied().collect(),
                EstimatorKind::GIP => augment(s, &types)?.to_vector().iter().copied().collect(),
            })
        })
        .collect::<Result<_>>()?;
    let dim = match kind {
        EstimatorKind::PP => model.n_params(),
        EstimatorKind::SP => model.n_params() + 3 * model.dof(),
        EstimatorKind::RBF => 3 * model.dof(),
        _ => crate::features::AugmentedLayout::new(&types)?.gamma(),
    };
    let mut out = InputRows::new(dim);
    for r in &rows {
        out.push(r)?;
    }
    Ok(out)
}

/// Per-joint GP with its target normalization `y = offset + scale * f`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointGp {
    pub gp: GpModelData,
    pub scale: f64,
    pub offset: f64,
    pub loss_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum EstimatorState {
    Fisherian { weights: Vec<f64> },
    Gp { joints: Vec<JointGp> },
}

/// A trained estimator, serializable to JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedEstimator {
    pub kind: EstimatorKind,
    /// Model whose kinematics the estimator assumes.
    pub model: RobotModel,
    pub state: EstimatorState,
    #[serde(skip)]
    fitted: Vec<GpModel>,
}

/// Training settings of a GP estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub optimizer: OptimizerConfig,
    /// Initial noise variance relative to the (normalized) target variance.
    pub initial_noise_ratio: f64,
    /// Seed of the uniform `[-1, 1]` log-hyperparameter initialization.
    pub init_seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            optimizer: OptimizerConfig::default(),
            initial_noise_ratio: 1e-2,
            init_seed: 0,
        }
    }
}

fn mean_and_std(y: &DVector<f64>) -> (f64, f64) {
    let m = y.mean();
    let var = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / y.len().max(1) as f64;
    (m, var.sqrt())
}

/// Trains `kind` on `train` using `model` for the regressor-based parts.
pub fn train_estimator(
    kind: EstimatorKind,
    model: &RobotModel,
    train: &Dataset,
    config: &TrainingConfig,
) -> Result<TrainedEstimator> {
    model.validate()?;
    if train.dof() != model.dof() {
        return Err(Error::invalid(
            "dataset and model differ in degrees of freedom",
        ));
    }
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let n = model.dof();
    let Some(spec) = kind.kernel(model)? else {
        let phi = stacked_regressor(model, &train.states)?;
        let tau = DVector::from_iterator(
            train.len() * n,
            train.torques.iter().flat_map(|t| t.iter().copied()),
        );
        let w = fisherian_identify(&phi, &tau)?;
        return Ok(TrainedEstimator {
            kind,
            model: model.clone(),
            state: EstimatorState::Fisherian {
                weights: w.iter().copied().collect(),
            },
            fitted: Vec::new(),
        });
    };

    let results: Vec<Result<(JointGp, GpModel)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let x = features(kind, model, j, &train.states)?;
            let y = train.joint_torques(j);
            let (m, s) = mean_and_std(&y);
            let scale = if s > 0.0 { s } else { 1.0 };
            let offset = if matches!(kind, EstimatorKind::RBF | EstimatorKind::GIP) {
                m
            } else {
                0.0
            };
            let ys = y.map(|v| (v - offset) / scale);
            let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed.wrapping_add(j as u64));
            let hp0 = HyperParams::random(&spec, &mut rng);
            let noise0 = config.initial_noise_ratio;
            let (hyper, noise, trace) = if config.optimizer.epochs > 0 {
                let mut opt = config.optimizer.clone();
                opt.seed = opt.seed.wrapping_add(j as u64);
                let out = optimize_hyperparameters(&spec, &hp0, &x, &ys, noise0, &opt)?;
                (out.hyper, out.noise_var, out.loss_trace)
            } else {
                (hp0, noise0, Vec::new())
            };
            let data = GpModelData {
                kernel: spec.clone(),
                hyper,
                noise_var: noise,
                inputs: x,
                targets: ys.iter().copied().collect(),
            };
            let fitted = GpModel::from_data(data.clone())?;
            Ok((
                JointGp {
                    gp: data,
                    scale,
                    offset,
                    loss_trace: trace,
                },
                fitted,
            ))
        })
        .collect();
    let mut joints = Vec::with_capacity(n);
    let mut fitted = Vec::with_capacity(n);
    for r in results {
        let (j, f) = r?;
        joints.push(j);
        fitted.push(f);
    }
    Ok(TrainedEstimator {
        kind,
        model: model.clone(),
        state: EstimatorState::Gp { joints },
        fitted,
    })
}

impl TrainedEstimator {
    /// Predicted torques, one vector per joint.
    pub fn predict(&self, states: &[JointState]) -> Result<Vec<DVector<f64>>> {
        let n = self.model.dof();
        match &self.state {
            EstimatorState::Fisherian { weights } => {
                let w = DVector::from_column_slice(weights);
                let mut out = vec![DVector::zeros(states.len()); n];
                for (k, s) in states.iter().enumerate() {
                    let tau = regressor(&self.model, s)? * &w;
                    for j in 0..n {
                        out[j][k] = tau[j];
                    }
                }
                Ok(out)
            }
            EstimatorState::Gp { joints } => (0..n)
                .into_par_iter()
                .map(|j| {
                    let x = features(self.kind, &self.model, j, states)?;
                    let f = self.fitted[j].predict_mean(&x)?;
                    Ok(f.map(|v| joints[j].offset + joints[j].scale * v))
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Restores an estimator, refactorizing its GPs.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut est: TrainedEstimator = serde_json::from_str(text)?;
        est.model.validate()?;
        if let EstimatorState::Gp { joints } = &est.state {
            est.fitted = joints
                .iter()
                .map(|j| GpModel::from_data(j.gp.clone()))
                .collect::<Result<_>>()?;
            if est.fitted.len() != est.model.dof() {
                return Err(Error::invalid(
                    "estimator joint count does not match its model",
                ));
            }
        }
        Ok(est)
    }
}
