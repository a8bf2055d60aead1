//! Monte-Carlo comparison and data-efficiency runners.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::{train_estimator, EstimatorKind, TrainingConfig};
use super::metrics::{gmse, median, mse, nmse, BoxStats};
use crate::data::{
    default_position_clip, generate_trajectory, label_with_dynamics, perturb_kinematics, Dataset,
    TrajectoryConfig,
};
use crate::dynamics::RobotModel;
use crate::error::{Error, Result};
use crate::gp::OptimizerConfig;

/// Everything that defines an experiment; all randomness derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Robot model file; the shipped SCARA when absent.
    pub robot: Option<PathBuf>,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub noise_std: f64,
    /// Generate data with a randomly perturbed copy of the robot while the
    /// model-based estimators keep the nominal kinematics.
    pub perturb_kinematics: bool,
    pub seed: u64,
    /// Excitation settings; `duration` and `seed` are set per simulation and
    /// an empty `position_clip` means [`default_position_clip`].
    pub trajectory: TrajectoryConfig,
    pub training: TrainingConfig,
    /// Score against noise-free torques instead of noisy test labels.
    pub noiseless_test_targets: bool,
    /// Training-set sizes of the data-efficiency curve.
    pub grid: Vec<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            robot: None,
            estimators: EstimatorKind::ALL.to_vec(),
            trials: 20,
            train_size: 2000,
            test_size: 2000,
            noise_std: 0.01,
            perturb_kinematics: true,
            seed: 0,
            trajectory: TrajectoryConfig::default(),
            training: TrainingConfig {
                optimizer: OptimizerConfig {
                    learning_rate: 0.1,
                    batch_size: 250,
                    max_steps: 400,
                    ..OptimizerConfig::default()
                },
                ..TrainingConfig::default()
            },
            noiseless_test_targets: true,
            grid: vec![250, 500, 1000, 2000, 4000],
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_size == 0 || self.test_size < 2 {
            return Err(Error::invalid("train_size must be >= 1 and test_size >= 2"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimator list is empty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid("noise_std must be finite and non-negative"));
        }
        if self.grid.contains(&0) {
            return Err(Error::invalid("grid sizes must be positive"));
        }
        self.training.optimizer.validate()
    }

    pub fn load_robot(&self) -> Result<RobotModel> {
        match &self.robot {
            Some(p) => RobotModel::load(p),
            None => Ok(RobotModel::scara()),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeds of every random draw in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub trial: u64,
    pub perturbation: u64,
    pub train_trajectory: u64,
    pub test_trajectory: u64,
    pub train_noise: u64,
    pub test_noise: u64,
    pub init: u64,
}

impl TrialSeeds {
    pub fn derive(base: u64, trial: usize) -> Self {
        let t = splitmix64(base ^ splitmix64(trial as u64 + 1));
        let s = |k: u64| splitmix64(t ^ splitmix64(k));
        TrialSeeds {
            trial: t,
            perturbation: s(1),
            train_trajectory: s(2),
            test_trajectory: s(3),
            train_noise: s(4),
            test_noise: s(5),
            init: s(6),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorOutcome {
    pub estimator: EstimatorKind,
    pub nmse: Vec<f64>,
    pub mse: Vec<f64>,
    pub gmse: f64,
    pub train_seconds: f64,
    /// Set when training or evaluation failed; metrics are then empty.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seeds: TrialSeeds,
    pub results: Vec<EstimatorOutcome>,
}

/// Simulated train and test sets of one trial.
pub struct TrialData {
    /// Model that generated the data (perturbed when enabled).
    pub truth: RobotModel,
    pub train: Dataset,
    pub test: Dataset,
}

fn simulate(
    truth: &RobotModel,
    config: &ExperimentConfig,
    samples: usize,
    trajectory_seed: u64,
    noise_std: f64,
    noise_seed: u64,
) -> Result<Dataset> {
    let tc = TrajectoryConfig {
        duration: samples as f64 * config.trajectory.dt,
        seed: trajectory_seed,
        ..config.trajectory.clone()
    };
    let tc = if tc.position_clip.is_empty() {
        TrajectoryConfig {
            position_clip: default_position_clip(&truth.joint_types()),
            ..tc
        }
    } else {
        tc
    };
    let traj = generate_trajectory(truth.dof(), &tc)?;
    let n = samples.min(traj.states.len());
    label_with_dynamics(
        truth,
        &traj.times[..n],
        &traj.states[..n],
        noise_std,
        noise_seed,
    )
}

/// Builds the data of one trial.
pub fn simulate_trial(
    model: &RobotModel,
    config: &ExperimentConfig,
    seeds: &TrialSeeds,
    train_size: usize,
) -> Result<TrialData> {
    let truth = if config.perturb_kinematics {
        perturb_kinematics(model, seeds.perturbation)
    } else {
        model.clone()
    };
    let train = simulate(
        &truth,
        config,
        train_size,
        seeds.train_trajectory,
        config.noise_std,
        seeds.train_noise,
    )?;
    let test_noise = if config.noiseless_test_targets {
        0.0
    } else {
        config.noise_std
    };
    let test = simulate(
        &truth,
        config,
        config.test_size,
        seeds.test_trajectory,
        test_noise,
        seeds.test_noise,
    )?;
    Ok(TrialData { truth, train, test })
}

fn evaluate(
    kind: EstimatorKind,
    model: &RobotModel,
    train: &Dataset,
    test: &Dataset,
    training: &TrainingConfig,
) -> EstimatorOutcome {
    let start = Instant::now();
    let run = || -> Result<(Vec<f64>, Vec<f64>)> {
        let est = train_estimator(kind, model, train, training)?;
        let pred = est.predict(&test.states)?;
        let mut nm = Vec::with_capacity(pred.len());
        let mut ms = Vec::with_capacity(pred.len());
        for (j, p) in pred.iter().enumerate() {
            let tau = test.joint_torques(j);
            nm.push(nmse(&tau, p)?);
            ms.push(mse(&tau, p)?);
        }
        Ok((nm, ms))
    };
    match run() {
        Ok((nmse, mse)) => EstimatorOutcome {
            estimator: kind,
            gmse: gmse(&mse),
            nmse,
            mse,
            train_seconds: start.elapsed().as_secs_f64(),
            error: None,
        },
        Err(e) => EstimatorOutcome {
            estimator: kind,
            nmse: Vec::new(),
            mse: Vec::new(),
            gmse: f64::NAN,
            train_seconds: start.elapsed().as_secs_f64(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs one trial: simulation, training of every estimator, evaluation.
/// Estimator failures are recorded in the outcome.
pub fn run_trial(
    model: &RobotModel,
    config: &ExperimentConfig,
    trial: usize,
) -> Result<TrialOutcome> {
    let seeds = TrialSeeds::derive(config.seed, trial);
    let data = simulate_trial(model, config, &seeds, config.train_size)?;
    let training = TrainingConfig {
        init_seed: seeds.init,
        ..config.training.clone()
    };
    let results = config
        .estimators
        .iter()
        .map(|&k| evaluate(k, model, &data.train, &data.test, &training))
        .collect();
    Ok(TrialOutcome {
        trial,
        seeds,
        results,
    })
}

/// Per-estimator boxplot data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub nmse_per_joint: Vec<Option<BoxStats>>,
    pub gmse: Option<BoxStats>,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialOutcome>,
    pub summary: BTreeMap<EstimatorKind, EstimatorSummary>,
}

impl MonteCarloReport {
    /// Median nMSE of every joint for one estimator (NaN if no trial
    /// succeeded).
    pub fn median_nmse(&self, kind: EstimatorKind) -> Vec<f64> {
        self.summary
            .get(&kind)
            .map(|s| {
                s.nmse_per_joint
                    .iter()
                    .map(|b| b.as_ref().map_or(f64::NAN, |b| b.median))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// One CSV row per (trial, estimator, joint).
    pub fn records_csv(&self) -> String {
        let mut out = String::from(
            "trial,estimator,joint,nmse,mse,gmse,train_seconds,trial_seed,perturbation_seed,\
             train_trajectory_seed,test_trajectory_seed,train_noise_seed,test_noise_seed,init_seed,error\n",
        );
        for t in &self.trials {
            let s = &t.seeds;
            let seeds = format!(
                "{},{},{},{},{},{},{}",
                s.trial,
                s.perturbation,
                s.train_trajectory,
                s.test_trajectory,
                s.train_noise,
                s.test_noise,
                s.init
            );
            for r in &t.results {
                match &r.error {
                    None => {
                        for j in 0..r.nmse.len() {
                            writeln!(
                                out,
                                "{},{},{},{:?},{:?},{:?},{:.3},{seeds},",
                                t.trial,
                                r.estimator.name(),
                                j + 1,
                                r.nmse[j],
                                r.mse[j],
                                r.gmse,
                                r.train_seconds
                            )
                            .expect("write to string");
                        }
                    }
                    Some(e) => {
                        writeln!(
                            out,
                            "{},{},,,,,{:.3},{seeds},\"{}\"",
                            t.trial,
                            r.estimator.name(),
                            r.train_seconds,
                            e.replace('"', "'")
                        )
                        .expect("write to string");
                    }
                }
            }
        }
        out
    }

    /// Writes `records.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("records.csv"), self.records_csv())?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

fn summarize(
    trials: &[TrialOutcome],
    kinds: &[EstimatorKind],
    n: usize,
) -> BTreeMap<EstimatorKind, EstimatorSummary> {
    let mut out = BTreeMap::new();
    for &k in kinds {
        let ok: Vec<&EstimatorOutcome> = trials
            .iter()
            .flat_map(|t| t.results.iter())
            .filter(|r| r.estimator == k && r.error.is_none())
            .collect();
        let failures = trials
            .iter()
            .flat_map(|t| t.results.iter())
            .filter(|r| r.estimator == k && r.error.is_some())
            .count();
        out.insert(
            k,
            EstimatorSummary {
                nmse_per_joint: (0..n)
                    .map(|j| {
                        BoxStats::from_values(&ok.iter().map(|r| r.nmse[j]).collect::<Vec<_>>())
                    })
                    .collect(),
                gmse: BoxStats::from_values(&ok.iter().map(|r| r.gmse).collect::<Vec<_>>()),
                failures,
            },
        );
    }
    out
}

/// Monte-Carlo comparison of the configured estimators.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<MonteCarloReport> {
    config.validate()?;
    let model = config.load_robot()?;
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(&model, config, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&trials, &config.estimators, model.dof());
    let report = MonteCarloReport {
        config: config.clone(),
        trials,
        summary,
    };
    if let Some(dir) = &config.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    pub repeat: usize,
    pub estimator: EstimatorKind,
    pub train_size: usize,
    pub gmse: f64,
    pub mse: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataEfficiencyReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<TrialSeeds>,
    pub points: Vec<CurvePoint>,
    /// Median GMSE per estimator, aligned with `config.grid`.
    pub median_gmse: BTreeMap<EstimatorKind, Vec<f64>>,
}

impl DataEfficiencyReport {
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("repeat,estimator,train_size,gmse,error\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{:?},{}",
                p.repeat,
                p.estimator.name(),
                p.train_size,
                p.gmse,
                p.error
                    .as_deref()
                    .map(|e| format!("\"{}\"", e.replace('"', "'")))
                    .unwrap_or_default()
            )
            .expect("write to string");
        }
        out
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("curve.csv"), self.curve_csv())?;
        std::fs::write(
            dir.join("curve_summary.json"),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

/// GMSE against training-set size. Every repeat simulates one training set
/// of the largest grid size, shuffles it once and trains on its prefixes,
/// so the points of a curve are nested.
pub fn run_data_efficiency(config: &ExperimentConfig) -> Result<DataEfficiencyReport> {
    config.validate()?;
    if config.grid.is_empty() {
        return Err(Error::invalid("data-efficiency grid is empty"));
    }
    let model = config.load_robot()?;
    let max = *config.grid.iter().max().expect("nonempty grid");
    let repeats: Vec<(TrialSeeds, Vec<CurvePoint>)> = (0..config.trials)
        .into_par_iter()
        .map(|r| -> Result<(TrialSeeds, Vec<CurvePoint>)> {
            let seeds = TrialSeeds::derive(config.seed, r);
            let data = simulate_trial(&model, config, &seeds, max)?;
            let mut order: Vec<usize> = (0..data.train.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seeds.trial));
            let shuffled = data.train.select(&order);
            let training = TrainingConfig {
                init_seed: seeds.init,
                ..config.training.clone()
            };
            let mut points = Vec::new();
            for &size in &config.grid {
                let train = shuffled.prefix(size);
                for &k in &config.estimators {
                    let o = evaluate(k, &model, &train, &data.test, &training);
                    points.push(CurvePoint {
                        repeat: r,
                        estimator: k,
                        train_size: size,
                        gmse: o.gmse,
                        mse: o.mse,
                        error: o.error,
                    });
                }
            }
            Ok((seeds, points))
        })
        .collect::<Result<_>>()?;
    let mut seeds = Vec::new();
    let mut points = Vec::new();
    for (s, p) in repeats {
        seeds.push(s);
        points.extend(p);
    }
    let median_gmse = config
        .estimators
        .iter()
        .map(|&k| {
            let curve = config
                .grid
                .iter()
                .map(|&size| {
                    let v: Vec<f64> = points
                        .iter()
                        .filter(|p| p.estimator == k && p.train_size == size && p.error.is_none())
                        .map(|p| p.gmse)
                        .collect();
                    median(&v).unwrap_or(f64::NAN)
                })
                .collect();
            (k, curve)
        })
        .collect();
    let report = DataEfficiencyReport {
        config: config.clone(),
        seeds,
        points,
        median_gmse,
    };
    if let Some(dir) = &config.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}

/// Torques of a dataset as per-joint vectors.
pub fn joint_columns(d: &Dataset) -> Vec<DVector<f64>> {
    (0..d.dof()).map(|j| d.joint_torques(j)).collect()
}
