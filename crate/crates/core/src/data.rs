//! Data generation and the dataset file format.
//!
//! A dataset file is CSV: a first line `# ` followed by the JSON-encoded
//! [`DatasetMeta`], a header line `t,q1..qn,dq1..dqn,ddq1..ddqn,tau1..taun`,
//! then one row per sample. Floats are written in shortest round-trip form.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{inverse_dynamics, JointState, JointType, RobotModel};
use crate::error::{Error, Result};

/// Excitation trajectory made of a sum of sinusoids per joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub n_sinusoids: usize,
    pub omega_range: [f64; 2],
    pub amplitude_range: [f64; 2],
    /// Total length in seconds; the series has `round(duration / dt)` samples.
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    /// Peak |q| per joint. Empty leaves the raw amplitudes untouched.
    pub position_clip: Vec<f64>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            n_sinusoids: 200,
            omega_range: [-2.0, 2.0],
            amplitude_range: [-1.0, 1.0],
            duration: 100.0,
            dt: 0.05,
            seed: 0,
            position_clip: Vec::new(),
        }
    }
}

impl TrajectoryConfig {
    pub fn n_samples(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::invalid("duration must cover at least one step"));
        }
        if self.n_sinusoids == 0 {
            return Err(Error::invalid("at least one sinusoid is required"));
        }
        let finite_range = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        if !finite_range(self.omega_range) || !finite_range(self.amplitude_range) {
            return Err(Error::invalid("ranges must be finite with low <= high"));
        }
        if !self.position_clip.is_empty() && self.position_clip.len() != n {
            return Err(Error::invalid(format!(
                "position_clip has {} entries for {n} joints",
                self.position_clip.len()
            )));
        }
        if self.position_clip.iter().any(|c| c.is_nan() || *c <= 0.0) {
            return Err(Error::invalid("position clips must be positive"));
        }
        Ok(())
    }
}

/// `q(t) = sum_k A_k sin(omega_k t + phi_k)` for one joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSum {
    pub amplitudes: Vec<f64>,
    pub omegas: Vec<f64>,
    pub phases: Vec<f64>,
}

impl SinusoidSum {
    /// Position, velocity and acceleration at time `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (mut q, mut dq, mut ddq) = (0.0, 0.0, 0.0);
        for ((a, w), p) in self.amplitudes.iter().zip(&self.omegas).zip(&self.phases) {
            let (s, c) = (w * t + p).sin_cos();
            q += a * s;
            dq += a * w * c;
            ddq -= a * w * w * s;
        }
        (q, dq, ddq)
    }
}

/// Evaluates one sinusoid sum per joint on `times`.
pub fn sample_sinusoids(components: &[SinusoidSum], times: &[f64]) -> Vec<JointState> {
    let n = components.len();
    times
        .iter()
        .map(|&t| {
            let mut s = JointState::zeros(n);
            for (j, c) in components.iter().enumerate() {
                let (q, dq, ddq) = c.eval(t);
                s.q[j] = q;
                s.dq[j] = dq;
                s.ddq[j] = ddq;
            }
            s
        })
        .collect()
}

/// A time-stamped joint trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<JointState>,
    pub components: Vec<SinusoidSum>,
}

/// Default excursion limits used when a configuration gives none:
/// 2.5 rad for revolute and 0.1 m for prismatic joints.
pub fn default_position_clip(joint_types: &[JointType]) -> Vec<f64> {
    joint_types
        .iter()
        .map(|t| match t {
            JointType::Revolute => 2.5,
            JointType::Prismatic => 0.1,
        })
        .collect()
}

/// Random sum-of-sinusoids trajectory for `n` joints with exact derivatives.
///
/// With a clip, each joint's amplitudes are rescaled so that the peak |q|
/// over the sampled grid equals the clip.
pub fn generate_trajectory(n: usize, config: &TrajectoryConfig) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::invalid("a trajectory needs at least one joint"));
    }
    config.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let times: Vec<f64> = (0..config.n_samples())
        .map(|k| k as f64 * config.dt)
        .collect();
    let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
        if r[0] == r[1] {
            r[0]
        } else {
            rng.gen_range(r[0]..r[1])
        }
    };
    let mut components: Vec<SinusoidSum> = (0..n)
        .map(|_| {
            let mut c = SinusoidSum {
                amplitudes: Vec::with_capacity(config.n_sinusoids),
                omegas: Vec::with_capacity(config.n_sinusoids),
                phases: Vec::with_capacity(config.n_sinusoids),
            };
            for _ in 0..config.n_sinusoids {
                c.amplitudes.push(draw(&mut rng, config.amplitude_range));
                c.omegas.push(draw(&mut rng, config.omega_range));
                c.phases.push(rng.gen_range(0.0..std::f64::consts::TAU));
            }
            c
        })
        .collect();
    if !config.position_clip.is_empty() {
        for (c, &clip) in components.iter_mut().zip(&config.position_clip) {
            let peak = times.iter().map(|&t| c.eval(t).0.abs()).fold(0.0, f64::max);
            if peak > 0.0 {
                let scale = clip / peak;
                for a in &mut c.amplitudes {
                    *a *= scale;
                }
            }
        }
    }
    let states = sample_sinusoids(&components, &times);
    Ok(Trajectory {
        times,
        states,
        components,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataSource {
    Simulated,
    RealLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// Degrees of freedom.
    pub n: usize,
    #[serde(default)]
    pub robot: String,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
    pub source: DataSource,
    /// Cumulative downsampling step, 1 if never downsampled.
    #[serde(default = "one")]
    pub downsample_step: usize,
}

fn one() -> usize {
    1
}

/// Joint states with torque labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub timestamps: Vec<f64>,
    pub states: Vec<JointState>,
    pub torques: Vec<DVector<f64>>,
}

impl Dataset {
    pub fn new(
        meta: DatasetMeta,
        timestamps: Vec<f64>,
        states: Vec<JointState>,
        torques: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let d = Dataset {
            meta,
            timestamps,
            states,
            torques,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.meta.n;
        if n == 0 {
            return Err(Error::invalid("dataset needs at least one joint"));
        }
        if self.states.len() != self.torques.len() || self.states.len() != self.timestamps.len() {
            return Err(Error::invalid(
                "states, torques and timestamps differ in length",
            ));
        }
        for s in &self.states {
            s.check(n)?;
        }
        if self.torques.iter().any(|t| t.len() != n) {
            return Err(Error::invalid("torque row dimension does not match n"));
        }
        if self
            .timestamps
            .windows(2)
            .any(|w| w[1].is_nan() || w[1] <= w[0])
        {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dof(&self) -> usize {
        self.meta.n
    }

    /// Torques of one joint across samples.
    pub fn joint_torques(&self, joint: usize) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.torques.iter().map(|t| t[joint]))
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            meta: self.meta.clone(),
            timestamps: rows.iter().map(|&r| self.timestamps[r]).collect(),
            states: rows.iter().map(|&r| self.states[r].clone()).collect(),
            torques: rows.iter().map(|&r| self.torques[r].clone()).collect(),
        }
    }

    pub fn prefix(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&idx)
    }

    pub fn column_names(n: usize) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for prefix in ["q", "dq", "ddq", "tau"] {
            cols.extend((1..=n).map(|j| format!("{prefix}{j}")));
        }
        cols
    }

    pub fn to_csv_string(&self) -> Result<String> {
        self.validate()?;
        let n = self.dof();
        let mut out = String::new();
        out.push_str("# ");
        out.push_str(&serde_json::to_string(&self.meta)?);
        out.push('\n');
        out.push_str(&Dataset::column_names(n).join(","));
        out.push('\n');
        for k in 0..self.len() {
            let s = &self.states[k];
            write!(out, "{:?}", self.timestamps[k]).expect("write to string");
            for v in
                s.q.iter()
                    .chain(s.dq.iter())
                    .chain(s.ddq.iter())
                    .chain(self.torques[k].iter())
            {
                write!(out, ",{v:?}").expect("write to string");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_csv_str(text: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse {
            line: line + 1,
            message,
        };
        let (l0, first) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty file".into()))?;
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| parse_err(l0, "expected a '#' metadata line".into()))?;
        let meta: DatasetMeta = serde_json::from_str(json.trim())
            .map_err(|e| parse_err(l0, format!("metadata: {e}")))?;
        let n = meta.n;
        if n == 0 {
            return Err(parse_err(l0, "metadata declares n = 0".into()));
        }
        let (l1, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing column header".into()))?;
        let want = Dataset::column_names(n);
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != want.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(parse_err(
                l1,
                format!("column header must be {} for n = {n}", want.join(",")),
            ));
        }
        let width = 4 * n + 1;
        let (mut times, mut states, mut torques) = (Vec::new(), Vec::new(), Vec::new());
        for (l, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(parse_err(
                    l,
                    format!("row has {} columns, expected {width}", cells.len()),
                ));
            }
            let mut v = Vec::with_capacity(width);
            for (c, cell) in cells.iter().enumerate() {
                v.push(cell.trim().parse::<f64>().map_err(|_| {
                    parse_err(
                        l,
                        format!("column {} ('{}') is not a number", want[c], cell.trim()),
                    )
                })?);
            }
            times.push(v[0]);
            states.push(JointState::from_slices(
                &v[1..1 + n],
                &v[1 + n..1 + 2 * n],
                &v[1 + 2 * n..1 + 3 * n],
            )?);
            torques.push(DVector::from_column_slice(&v[1 + 3 * n..]));
        }
        Dataset::new(meta, times, states, torques)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Dataset> {
        Dataset::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    dataset.write(path)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::read(path)
}

/// Labels states with rigid-body torques (no actuator terms) plus i.i.d.
/// Gaussian noise.
pub fn label_with_dynamics(
    model: &RobotModel,
    times: &[f64],
    states: &[JointState],
    noise_std: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::invalid("noise_std must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_std).map_err(|e| Error::invalid(e.to_string()))?;
    let mut torques = Vec::with_capacity(states.len());
    for s in states {
        let mut tau = inverse_dynamics(model, s, false)?;
        if noise_std > 0.0 {
            for v in tau.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
        torques.push(tau);
    }
    Dataset::new(
        DatasetMeta {
            n: model.dof(),
            robot: model.name.clone(),
            noise_std,
            seed,
            source: DataSource::Simulated,
            downsample_step: 1,
        },
        times.to_vec(),
        states.to_vec(),
        torques,
    )
}

/// Maximum length perturbation (m).
pub const PERTURB_LENGTH: f64 = 0.05;
/// Maximum angle perturbation (rad).
pub const PERTURB_ANGLE: f64 = 5.0 * std::f64::consts::PI / 180.0;

/// Copy of `model` with uniformly perturbed DH parameters; inertial data
/// are left untouched.
pub fn perturb_kinematics(model: &RobotModel, seed: u64) -> RobotModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = model.clone();
    for link in &mut out.links {
        link.dh_a += rng.gen_range(-PERTURB_LENGTH..=PERTURB_LENGTH);
        link.dh_d_offset += rng.gen_range(-PERTURB_LENGTH..=PERTURB_LENGTH);
        link.dh_alpha += rng.gen_range(-PERTURB_ANGLE..=PERTURB_ANGLE);
        link.dh_theta_offset += rng.gen_range(-PERTURB_ANGLE..=PERTURB_ANGLE);
    }
    out
}

/// Maximum relative deviation of a step from the mean sampling period.
pub const MAX_TIMESTAMP_JITTER: f64 = 0.01;

/// Backward-difference velocities and accelerations.
#[derive(Debug, Clone)]
pub struct CausalDerivatives {
    pub dq: Vec<DVector<f64>>,
    pub ddq: Vec<DVector<f64>>,
    /// Entries before this index are undefined (zero-filled).
    pub first_valid: usize,
}

/// `dq_k = (q_k - q_{k-1}) / h_k`, `ddq_k = (dq_k - dq_{k-1}) / h_k`.
pub fn differentiate_causal(q: &[DVector<f64>], times: &[f64]) -> Result<CausalDerivatives> {
    if q.len() != times.len() {
        return Err(Error::invalid("positions and timestamps differ in length"));
    }
    if q.len() < 3 {
        return Err(Error::invalid(
            "causal differentiation needs at least 3 samples",
        ));
    }
    let n = q[0].len();
    if q.iter().any(|v| v.len() != n) {
        return Err(Error::invalid("position samples differ in dimension"));
    }
    let steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = steps.iter().sum::<f64>() / steps.len() as f64;
    if mean.is_nan() || mean <= 0.0 {
        return Err(Error::invalid("timestamps must increase"));
    }
    if let Some(k) = steps
        .iter()
        .position(|h| (h - mean).abs() > MAX_TIMESTAMP_JITTER * mean)
    {
        return Err(Error::invalid(format!(
            "sampling step {} at sample {} deviates more than 1% from the mean {mean}",
            steps[k],
            k + 1
        )));
    }
    let mut dq = vec![DVector::zeros(n); q.len()];
    let mut ddq = vec![DVector::zeros(n); q.len()];
    for k in 1..q.len() {
        dq[k] = (&q[k] - &q[k - 1]) / steps[k - 1];
    }
    for k in 2..q.len() {
        ddq[k] = (&dq[k] - &dq[k - 1]) / steps[k - 1];
    }
    Ok(CausalDerivatives {
        dq,
        ddq,
        first_valid: 2,
    })
}

/// Keeps rows `0, step, 2 step, ...`.
pub fn downsample(dataset: &Dataset, step: usize) -> Result<Dataset> {
    if step == 0 {
        return Err(Error::invalid("downsampling step must be at least 1"));
    }
    let idx: Vec<usize> = (0..dataset.len()).step_by(step).collect();
    let mut out = dataset.select(&idx);
    out.meta.downsample_step *= step;
    Ok(out)
}

/// Column mapping from an external CSV log (with a header row) onto the
/// dataset layout. Missing velocity/acceleration columns are obtained by
/// causal differentiation of the positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub time: String,
    pub q: Vec<String>,
    #[serde(default)]
    pub dq: Option<Vec<String>>,
    #[serde(default)]
    pub ddq: Option<Vec<String>>,
    pub tau: Vec<String>,
    /// Per-joint factor applied to the torque columns (e.g. current to
    /// torque); defaults to 1.
    #[serde(default)]
    pub torque_scale: Option<Vec<f64>>,
    #[serde(default = "comma")]
    pub delimiter: char,
    #[serde(default)]
    pub robot: String,
}

fn comma() -> char {
    ','
}

impl ColumnMapping {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: ColumnMapping = serde_json::from_str(text)?;
        let n = m.q.len();
        if n == 0 || m.tau.len() != n {
            return Err(Error::invalid(
                "mapping needs matching nonempty q and tau lists",
            ));
        }
        for cols in [&m.dq, &m.ddq].into_iter().flatten() {
            if cols.len() != n {
                return Err(Error::invalid(
                    "dq/ddq mappings must list one column per joint",
                ));
            }
        }
        if m.torque_scale.as_ref().is_some_and(|s| s.len() != n) {
            return Err(Error::invalid("torque_scale must have one entry per joint"));
        }
        if !m.delimiter.is_ascii() {
            return Err(Error::invalid("delimiter must be an ASCII character"));
        }
        Ok(m)
    }
}

/// Reads an external log through `mapping`.
pub fn read_real_log(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::invalid(format!("cannot open log: {e}")))?;
    let headers: HashMap<String, usize> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    let col = |name: &String| {
        headers
            .get(name)
            .copied()
            .ok_or_else(|| Error::invalid(format!("log has no column '{name}'")))
    };
    let cols = |names: &Vec<String>| names.iter().map(col).collect::<Result<Vec<_>>>();
    let t_col = col(&mapping.time)?;
    let q_cols = cols(&mapping.q)?;
    let tau_cols = cols(&mapping.tau)?;
    let dq_cols = mapping.dq.as_ref().map(cols).transpose()?;
    let ddq_cols = mapping.ddq.as_ref().map(cols).transpose()?;
    let n = q_cols.len();
    let scale = mapping.torque_scale.clone().unwrap_or_else(|| vec![1.0; n]);

    let (mut times, mut q, mut dq, mut ddq, mut tau) = (vec![], vec![], vec![], vec![], vec![]);
    for (r, rec) in reader.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let get = |c: usize| -> Result<f64> {
            rec.get(c)
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing column {}", c + 1),
                })?
                .parse::<f64>()
                .map_err(|_| Error::Parse {
                    line,
                    message: format!("column {} is not a number", c + 1),
                })
        };
        let vec_of = |cs: &[usize]| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(
                cs.iter().map(|&c| get(c)).collect::<Result<Vec<_>>>()?,
            ))
        };
        times.push(get(t_col)?);
        q.push(vec_of(&q_cols)?);
        let mut t = vec_of(&tau_cols)?;
        for (v, s) in t.iter_mut().zip(&scale) {
            *v *= s;
        }
        tau.push(t);
        if let Some(c) = &dq_cols {
            dq.push(vec_of(c)?);
        }
        if let Some(c) = &ddq_cols {
            ddq.push(vec_of(c)?);
        }
    }
    let mut first = 0;
    if dq_cols.is_none() || ddq_cols.is_none() {
        let d = differentiate_causal(&q, &times)?;
        first = d.first_valid;
        if dq_cols.is_none() {
            dq = d.dq;
        }
        if ddq_cols.is_none() {
            ddq = d.ddq;
        }
    }
    let states = (first..q.len())
        .map(|k| JointState {
            q: q[k].clone(),
            dq: dq[k].clone(),
            ddq: ddq[k].clone(),
        })
        .collect();
    Dataset::new(
        DatasetMeta {
            n,
            robot: mapping.robot.clone(),
            noise_std: 0.0,
            seed: 0,
            source: DataSource::RealLog,
            downsample_step: 1,
        },
        times[first..].to_vec(),
        states,
        tau[first..].to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scara_traj(seed: u64, samples: usize) -> Trajectory {
        let cfg = TrajectoryConfig {
            duration: samples as f64 * 0.05,
            seed,
            position_clip: vec![2.5, 2.5, 0.1, 3.0],
            ..TrajectoryConfig::default()
        };
        generate_trajectory(4, &cfg).unwrap()
    }

    #[test]
    fn single_sinusoid_derivatives() {
        let c = SinusoidSum {
            amplitudes: vec![1.0],
            omegas: vec![1.0],
            phases: vec![0.0],
        };
        for t in [0.0, 0.3, 1.7, 4.0] {
            let (q, dq, ddq) = c.eval(t);
            assert_eq!(q, t.sin());
            assert_eq!(dq, t.cos());
            assert_eq!(ddq, -t.sin());
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let traj = scara_traj(1, 400);
        let h = 1e-5;
        for k in [10, 100, 250] {
            let t = traj.times[k];
            for (j, c) in traj.components.iter().enumerate() {
                let fd = (c.eval(t + h).0 - c.eval(t - h).0) / (2.0 * h);
                let fdd = (c.eval(t + h).1 - c.eval(t - h).1) / (2.0 * h);
                let s = &traj.states[k];
                assert!((fd - s.dq[j]).abs() <= 1e-4 * s.dq[j].abs().max(1e-3));
                assert!((fdd - s.ddq[j]).abs() <= 1e-4 * s.ddq[j].abs().max(1e-3));
            }
        }
    }

    #[test]
    fn clip_is_respected_and_reached() {
        let traj = scara_traj(2, 1000);
        let clip = [2.5, 2.5, 0.1, 3.0];
        for (j, c) in clip.iter().enumerate() {
            let peak = traj.states.iter().map(|s| s.q[j].abs()).fold(0.0, f64::max);
            assert!(peak <= c * (1.0 + 1e-12));
            assert!(peak >= c * (1.0 - 1e-12));
        }
    }

    #[test]
    fn trajectory_is_deterministic() {
        let a = scara_traj(3, 50);
        let b = scara_traj(3, 50);
        assert_eq!(a.states, b.states);
        assert_ne!(a.states, scara_traj(4, 50).states);
    }

    #[test]
    fn noiseless_labels_equal_dynamics() {
        let model = RobotModel::scara();
        let traj = scara_traj(5, 20);
        let d = label_with_dynamics(&model, &traj.times, &traj.states, 0.0, 1).unwrap();
        for (s, t) in d.states.iter().zip(&d.torques) {
            assert_eq!(*t, inverse_dynamics(&model, s, false).unwrap());
        }
    }

    #[test]
    fn noise_statistics() {
        let model = RobotModel::scara();
        let traj = scara_traj(6, 10_000);
        let clean = label_with_dynamics(&model, &traj.times, &traj.states, 0.0, 0).unwrap();
        let noisy = label_with_dynamics(&model, &traj.times, &traj.states, 0.01, 9).unwrap();
        let n = clean.len() as f64;
        let e: Vec<DVector<f64>> = (0..4)
            .map(|j| noisy.joint_torques(j) - clean.joint_torques(j))
            .collect();
        for ej in &e {
            let std = (ej.norm_squared() / n).sqrt();
            assert!((std - 0.01).abs() < 0.05 * 0.01, "{std}");
        }
        for a in 0..4 {
            for b in a + 1..4 {
                let corr = e[a].dot(&e[b]) / (e[a].norm() * e[b].norm());
                assert!(corr.abs() < 0.05);
            }
        }
    }

    #[test]
    fn perturbation_bounds_and_effect() {
        let model = RobotModel::scara();
        let p = perturb_kinematics(&model, 42);
        assert_eq!(p, perturb_kinematics(&model, 42));
        for (a, b) in model.links.iter().zip(&p.links) {
            assert!((a.dh_a - b.dh_a).abs() <= PERTURB_LENGTH);
            assert!((a.dh_d_offset - b.dh_d_offset).abs() <= PERTURB_LENGTH);
            assert!((a.dh_alpha - b.dh_alpha).abs() <= PERTURB_ANGLE);
            assert!((a.dh_theta_offset - b.dh_theta_offset).abs() <= PERTURB_ANGLE);
            assert_eq!(a.mass, b.mass);
            assert_eq!(a.inertia, b.inertia);
        }
        let s = JointState::from_slices(&[0.3, -0.5, 0.05, 1.0], &[1.0; 4], &[0.5; 4]).unwrap();
        let d =
            inverse_dynamics(&model, &s, false).unwrap() - inverse_dynamics(&p, &s, false).unwrap();
        assert!(d.norm() > 0.0);
    }

    #[test]
    fn causal_differences_on_polynomials() {
        let times: Vec<f64> = (0..10).map(|k| k as f64 * 0.5).collect();
        let ramp: Vec<DVector<f64>> = times.iter().map(|&t| DVector::from_vec(vec![t])).collect();
        let d = differentiate_causal(&ramp, &times).unwrap();
        for k in 1..10 {
            assert_eq!(d.dq[k][0], 1.0);
        }
        for k in 2..10 {
            assert_eq!(d.ddq[k][0], 0.0);
        }
        let sq: Vec<DVector<f64>> = times
            .iter()
            .map(|&t| DVector::from_vec(vec![t * t]))
            .collect();
        let d = differentiate_causal(&sq, &times).unwrap();
        for k in 2..10 {
            assert_eq!(d.ddq[k][0], 2.0);
        }
    }

    #[test]
    fn causal_velocity_of_sinusoid() {
        let dt = 8e-3;
        let times: Vec<f64> = (0..500).map(|k| k as f64 * dt).collect();
        let q: Vec<DVector<f64>> = times
            .iter()
            .map(|&t| DVector::from_vec(vec![t.sin()]))
            .collect();
        let d = differentiate_causal(&q, &times).unwrap();
        let num: f64 = (1..500)
            .map(|k| (d.dq[k][0] - times[k].cos()).powi(2))
            .sum();
        let den: f64 = (1..500).map(|k| times[k].cos().powi(2)).sum();
        assert!((num / den).sqrt() < 1e-2);
    }

    #[test]
    fn irregular_timestamps_rejected() {
        let times = vec![0.0, 0.1, 0.2, 0.35, 0.4];
        let q = vec![DVector::zeros(1); 5];
        assert!(differentiate_causal(&q, &times).is_err());
        assert!(differentiate_causal(&q[..2], &times[..2]).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let model = RobotModel::scara();
        let traj = scara_traj(7, 30);
        let d = label_with_dynamics(&model, &traj.times, &traj.states, 0.01, 3).unwrap();
        let back = Dataset::from_csv_str(&d.to_csv_string().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn header_with_seventeen_columns_accepted() {
        let text = format!(
            "# {{\"n\":4,\"source\":\"Simulated\"}}\n{}\n{}\n",
            Dataset::column_names(4).join(","),
            vec!["0.5"; 17].join(",")
        );
        let d = Dataset::from_csv_str(&text).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.torques[0][3], 0.5);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let header = Dataset::column_names(1).join(",");
        let short =
            format!("# {{\"n\":1,\"source\":\"Simulated\"}}\n{header}\n0,1,2,3,4\n1,1,2,3\n");
        match Dataset::from_csv_str(&short) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let nan = format!("# {{\"n\":1,\"source\":\"Simulated\"}}\n{header}\n0,1,x,3,4\n");
        assert!(matches!(
            Dataset::from_csv_str(&nan),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Dataset::from_csv_str("t,q1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn downsampling() {
        let n = 40_000;
        let meta = DatasetMeta {
            n: 1,
            robot: String::new(),
            noise_std: 0.0,
            seed: 0,
            source: DataSource::Simulated,
            downsample_step: 1,
        };
        let d = Dataset::new(
            meta,
            (0..n).map(|k| k as f64).collect(),
            vec![JointState::zeros(1); n],
            vec![DVector::zeros(1); n],
        )
        .unwrap();
        assert_eq!(downsample(&d, 1).unwrap(), d);
        let ds = downsample(&d, 10).unwrap();
        assert_eq!(ds.len(), 4000);
        assert_eq!(ds.meta.downsample_step, 10);
        assert_eq!(downsample(&d, n + 5).unwrap().len(), 1);
        assert!(downsample(&d, 0).is_err());
    }

    #[test]
    fn real_log_ingestion_with_differentiation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        let mut text = String::from("time;pos_a;cur_a\n");
        for k in 0..6 {
            let t = k as f64 * 0.5;
            writeln!(text, "{t};{};{}", t * t, k).unwrap();
        }
        std::fs::write(&path, text).unwrap();
        let mapping = ColumnMapping::from_json(
            r#"{"time":"time","q":["pos_a"],"tau":["cur_a"],"torque_scale":[2.0],"delimiter":";"}"#,
        )
        .unwrap();
        let d = read_real_log(&path, &mapping).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.meta.source, DataSource::RealLog);
        assert_eq!(d.states[0].ddq[0], 2.0);
        assert_eq!(d.torques[0][0], 4.0);
    }
}
