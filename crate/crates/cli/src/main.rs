//! `gipdyn`: simulation, training, evaluation and benchmark driver.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gip_core::bench::{
    gmse, mse, nmse, run_data_efficiency, run_monte_carlo, train_estimator, EstimatorKind,
    ExperimentConfig, TrainedEstimator,
};
use gip_core::data::{
    default_position_clip, generate_trajectory, label_with_dynamics, perturb_kinematics,
    read_real_log, ColumnMapping, Dataset, TrajectoryConfig,
};
use gip_core::dynamics::RobotModel;
use gip_core::features::{certify_model, count_monomials, MonomialConvention};

#[derive(Parser)]
#[command(
    name = "gipdyn",
    version,
    about = "Inverse-dynamics learning with geometrically inspired polynomial kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a labelled trajectory dataset.
    Simulate(SimulateArgs),
    /// Train one estimator on a dataset and save it as JSON.
    Train(TrainArgs),
    /// Score a saved estimator on a dataset.
    Evaluate(EvaluateArgs),
    /// Monte-Carlo comparison of estimators.
    MonteCarlo(ExperimentArgs),
    /// Test error against training-set size.
    DataEfficiency(ExperimentArgs),
    /// Check that each joint torque is an exact polynomial in the augmented input.
    CertifyProp1(CertifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Robot model JSON; the built-in SCARA when omitted.
    #[arg(long)]
    robot: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of the additive torque noise (N m).
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Label with a randomly perturbed copy of the kinematics.
    #[arg(long)]
    perturb: bool,
    /// Trajectory configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "GIP")]
    estimator: String,
    #[arg(long)]
    robot: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Experiment configuration JSON; only its `training` block is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Dataset file, or a raw log when `--mapping` is given.
    #[arg(long)]
    data: PathBuf,
    /// Column mapping JSON for raw robot logs.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Keep every `step`-th row of the data.
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// Write the metrics as JSON here as well.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    robot: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated estimator names.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    robot: Option<PathBuf>,
    /// Number of random states for the direct fit.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure raised when a numerical check does not hold.
#[derive(Debug)]
struct NumericalFailure(String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn load_robot(path: Option<&Path>) -> anyhow::Result<RobotModel> {
    match path {
        Some(p) => {
            RobotModel::load(p).with_context(|| format!("loading robot model {}", p.display()))
        }
        None => Ok(RobotModel::scara()),
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    if args.samples == 0 {
        bail!("--samples must be positive");
    }
    let nominal = load_robot(args.robot.as_deref())?;
    let model = if args.perturb {
        perturb_kinematics(&nominal, args.seed ^ 0x5eed)
    } else {
        nominal
    };
    let base = match &args.config {
        Some(p) => serde_json::from_str::<TrajectoryConfig>(&read_text(p)?)?,
        None => TrajectoryConfig::default(),
    };
    let mut tc = TrajectoryConfig {
        duration: args.samples as f64 * base.dt,
        seed: args.seed,
        ..base
    };
    if tc.position_clip.is_empty() {
        tc.position_clip = default_position_clip(&model.joint_types());
    }
    let traj = generate_trajectory(model.dof(), &tc)?;
    let n = args.samples.min(traj.states.len());
    let ds = label_with_dynamics(
        &model,
        &traj.times[..n],
        &traj.states[..n],
        args.noise,
        args.seed.wrapping_add(1),
    )?;
    ds.write(&args.out)?;
    println!(
        "wrote {} samples of {} to {}",
        ds.len(),
        model.name,
        args.out.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let kind = EstimatorKind::parse(&args.estimator)?;
    let model = load_robot(args.robot.as_deref())?;
    let data =
        Dataset::read(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let mut training = match &args.config {
        Some(p) => ExperimentConfig::from_json(&read_text(p)?)?.training,
        None => ExperimentConfig::default().training,
    };
    if let Some(s) = args.seed {
        training.init_seed = s;
        training.optimizer.seed = s;
    }
    let est = train_estimator(kind, &model, &data, &training)?;
    std::fs::write(&args.out, est.to_json()?)?;
    println!(
        "trained {} on {} samples, saved to {}",
        kind.name(),
        data.len(),
        args.out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    let est = TrainedEstimator::from_json(&read_text(&args.model)?)?;
    let data = match &args.mapping {
        Some(m) => read_real_log(&args.data, &ColumnMapping::from_json(&read_text(m)?)?)?,
        None => Dataset::read(&args.data)?,
    };
    let data = gip_core::data::downsample(&data, args.step)?;
    let pred = est.predict(&data.states)?;
    let mut nm = Vec::new();
    let mut ms = Vec::new();
    for (j, p) in pred.iter().enumerate() {
        let y = data.joint_torques(j);
        nm.push(nmse(&y, p)?);
        ms.push(mse(&y, p)?);
    }
    let g = gmse(&ms);
    println!("estimator {} on {} samples", est.kind.name(), data.len());
    println!("joint  nmse          mse");
    for j in 0..nm.len() {
        println!("{:<6} {:<13.6e} {:.6e}", j + 1, nm[j], ms[j]);
    }
    println!("gmse {g:.6e}");
    if let Some(out) = &args.out {
        let report = serde_json::json!({
            "estimator": est.kind.name(),
            "samples": data.len(),
            "nmse": nm,
            "mse": ms,
            "gmse": g,
        });
        std::fs::write(out, serde_json::to_string_pretty(&report)?)?;
    }
    if nm.iter().any(|v| !v.is_finite()) {
        return Err(NumericalFailure("non-finite nMSE".into()).into());
    }
    Ok(())
}

fn experiment_config(args: &ExperimentArgs) -> anyhow::Result<ExperimentConfig> {
    let mut c = match &args.config {
        Some(p) => ExperimentConfig::from_json(&read_text(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(r) = &args.robot {
        c.robot = Some(r.clone());
    }
    if let Some(t) = args.trials {
        c.trials = t;
    }
    if let Some(e) = &args.estimators {
        c.estimators = e
            .split(',')
            .map(|s| EstimatorKind::parse(s.trim()))
            .collect::<Result<_, _>>()?;
    }
    if let Some(d) = &args.out_dir {
        c.output_dir = Some(d.clone());
    }
    c.validate()?;
    Ok(c)
}

fn monte_carlo(args: ExperimentArgs) -> anyhow::Result<()> {
    let config = experiment_config(&args)?;
    let report = run_monte_carlo(&config)?;
    println!("median nMSE over {} trials", config.trials);
    for k in &config.estimators {
        let med = report.median_nmse(*k);
        let cells: Vec<String> = med.iter().map(|v| format!("{v:.3e}")).collect();
        println!(
            "{:<4} {}  failures {}",
            k.name(),
            cells.join(" "),
            report.summary[k].failures
        );
    }
    if let Some(d) = &config.output_dir {
        println!("results in {}", d.display());
    }
    Ok(())
}

fn data_efficiency(args: ExperimentArgs) -> anyhow::Result<()> {
    let config = experiment_config(&args)?;
    let report = run_data_efficiency(&config)?;
    println!("median GMSE by training size {:?}", config.grid);
    for (k, curve) in &report.median_gmse {
        let cells: Vec<String> = curve.iter().map(|v| format!("{v:.3e}")).collect();
        println!("{:<4} {}", k.name(), cells.join(" "));
    }
    if let Some(d) = &config.output_dir {
        println!("results in {}", d.display());
    }
    Ok(())
}

fn certify(args: CertifyArgs) -> anyhow::Result<()> {
    let model = load_robot(args.robot.as_deref())?;
    let types = model.joint_types();
    println!(
        "monomial counts: kernel span {}, polynomial form {}",
        count_monomials(&types, MonomialConvention::GipRkhs)?,
        count_monomials(&types, MonomialConvention::PropOne)?
    );
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let rep = certify_model(&model, args.samples, &mut rng)?;
    println!(
        "{} fit on {} samples, {} monomials",
        rep.method, rep.n_samples, rep.n_monomials
    );
    for j in &rep.joints {
        println!(
            "joint {} residual {:.3e} ablated {:.3e} {}",
            j.joint + 1,
            j.relative_residual,
            j.ablated_residual,
            if j.passed { "ok" } else { "FAILED" }
        );
    }
    if !rep.passed() {
        return Err(
            NumericalFailure("torques are not reproduced by the monomial set".into()).into(),
        );
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return 2;
    }
    match err.downcast_ref::<gip_core::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate(a),
        Command::MonteCarlo(a) => monte_carlo(a),
        Command::DataEfficiency(a) => data_efficiency(a),
        Command::CertifyProp1(a) => certify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
