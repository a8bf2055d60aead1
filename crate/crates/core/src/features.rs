//! Augmented polynomial input space and monomial bookkeeping.
//!
//! A joint state `x = [q, dq, ddq]` is lifted to
//! `x_bar = [q_c, q_s, q_p, dq_v, ddq]`, where `q_c`/`q_s` hold the cosines
//! and sines of the revolute coordinates, `q_p` the prismatic coordinates
//! and `dq_v` the pairwise velocity products `dq_i dq_j` (`i <= j`,
//! lexicographic). Rigid-body torques are polynomials in `x_bar` with
//! bounded per-variable degrees; [`certify_proposition1`] checks this
//! numerically by exact least-squares fitting.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{inverse_dynamics_unchecked, JointState, JointType, RobotModel};
use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, lstsq_min_norm_multi};

/// Relative singular-value cutoff used by the certification fits.
pub const CERTIFY_RCOND: f64 = 1e-10;
/// Relative residual below which a certification passes.
pub const CERTIFY_TOLERANCE: f64 = 1e-8;

/// Index bookkeeping for the augmented vector of a given joint-type layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedLayout {
    joint_types: Vec<JointType>,
    revolute: Vec<usize>,
    prismatic: Vec<usize>,
}

impl AugmentedLayout {
    pub fn new(joint_types: &[JointType]) -> Result<Self> {
        if joint_types.is_empty() {
            return Err(Error::invalid("a chain needs at least one joint"));
        }
        let revolute = (0..joint_types.len())
            .filter(|&i| joint_types[i] == JointType::Revolute)
            .collect();
        let prismatic = (0..joint_types.len())
            .filter(|&i| joint_types[i] == JointType::Prismatic)
            .collect();
        Ok(AugmentedLayout {
            joint_types: joint_types.to_vec(),
            revolute,
            prismatic,
        })
    }

    pub fn joint_types(&self) -> &[JointType] {
        &self.joint_types
    }

    pub fn dof(&self) -> usize {
        self.joint_types.len()
    }

    pub fn n_revolute(&self) -> usize {
        self.revolute.len()
    }

    pub fn n_prismatic(&self) -> usize {
        self.prismatic.len()
    }

    pub fn n_velocity_products(&self) -> usize {
        let n = self.dof();
        n * (n + 1) / 2
    }

    /// Total length `2 N_r + N_p + n(n+1)/2 + n`.
    pub fn gamma(&self) -> usize {
        2 * self.n_revolute() + self.n_prismatic() + self.n_velocity_products() + self.dof()
    }

    /// Index of `cos q` of the `b`-th revolute joint.
    pub fn cos_index(&self, b: usize) -> usize {
        b
    }

    pub fn sin_index(&self, b: usize) -> usize {
        self.n_revolute() + b
    }

    pub fn prismatic_index(&self, b: usize) -> usize {
        2 * self.n_revolute() + b
    }

    /// Range of the `dq_v` block.
    pub fn velocity_range(&self) -> std::ops::Range<usize> {
        let start = 2 * self.n_revolute() + self.n_prismatic();
        start..start + self.n_velocity_products()
    }

    pub fn acceleration_range(&self) -> std::ops::Range<usize> {
        let start = self.velocity_range().end;
        start..start + self.dof()
    }

    /// Indices of `q_av = [ddq, dq_v]`.
    pub fn q_av_indices(&self) -> Vec<usize> {
        self.acceleration_range()
            .chain(self.velocity_range())
            .collect()
    }

    /// Number of position variables (`q_c`, `q_s`, `q_p`).
    pub fn n_position_vars(&self) -> usize {
        2 * self.n_revolute() + self.n_prismatic()
    }
}

/// The lifted input `x_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedInput {
    pub q_c: Vec<f64>,
    pub q_s: Vec<f64>,
    pub q_p: Vec<f64>,
    pub dq_v: Vec<f64>,
    pub ddq: Vec<f64>,
}

impl AugmentedInput {
    pub fn gamma(&self) -> usize {
        self.q_c.len() + self.q_s.len() + self.q_p.len() + self.dq_v.len() + self.ddq.len()
    }

    /// Concatenation `[q_c, q_s, q_p, dq_v, ddq]`.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.gamma(),
            self.q_c
                .iter()
                .chain(&self.q_s)
                .chain(&self.q_p)
                .chain(&self.dq_v)
                .chain(&self.ddq)
                .copied(),
        )
    }
}

/// Lifts a joint state into the augmented space.
pub fn augment(state: &JointState, joint_types: &[JointType]) -> Result<AugmentedInput> {
    state.check(joint_types.len())?;
    let n = joint_types.len();
    let mut out = AugmentedInput {
        q_c: Vec::new(),
        q_s: Vec::new(),
        q_p: Vec::new(),
        dq_v: Vec::with_capacity(n * (n + 1) / 2),
        ddq: state.ddq.iter().copied().collect(),
    };
    for (i, jt) in joint_types.iter().enumerate() {
        match jt {
            JointType::Revolute => {
                out.q_c.push(state.q[i].cos());
                out.q_s.push(state.q[i].sin());
            }
            JointType::Prismatic => out.q_p.push(state.q[i]),
        }
    }
    for i in 0..n {
        for j in i..n {
            out.dq_v.push(state.dq[i] * state.dq[j]);
        }
    }
    Ok(out)
}

/// Lifted inputs of many states as rows of a matrix.
pub fn augment_rows(states: &[JointState], joint_types: &[JointType]) -> Result<DMatrix<f64>> {
    let layout = AugmentedLayout::new(joint_types)?;
    let mut out = DMatrix::zeros(states.len(), layout.gamma());
    for (r, s) in states.iter().enumerate() {
        out.set_row(r, &augment(s, joint_types)?.to_vector().transpose());
    }
    Ok(out)
}

/// Degree-constraint regime of a [`MonomialSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialConvention {
    /// Per-variable caps (2 for `q_c`, `q_s`, `q_p`; 1 for `dq_v`, `ddq`),
    /// total degree at most `2n + 1` and `deg(c_b) + deg(s_b) <= 2`.
    PropOne,
    /// `PropOne` plus at most one variable from the `q_av` block, which is
    /// exactly the monomial content of the GIP kernel.
    GipRkhs,
}

/// A set of exponent vectors over the augmented variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialSet {
    pub convention: MonomialConvention,
    pub layout: AugmentedLayout,
    pub exponents: Vec<Vec<u8>>,
}

/// Largest set [`enumerate_monomials`] will materialize.
pub const MAX_ENUMERATED: u128 = 5_000_000;

/// Per-revolute-joint `(deg c, deg s)` options.
const TRIG_EXPONENTS: [(u8, u8); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

impl MonomialSet {
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Checks every constraint of the convention on one exponent vector.
    pub fn admits(layout: &AugmentedLayout, convention: MonomialConvention, e: &[u8]) -> bool {
        if e.len() != layout.gamma() {
            return false;
        }
        let n = layout.dof();
        let pos = layout.n_position_vars();
        if e[..pos].iter().any(|&d| d > 2) || e[pos..].iter().any(|&d| d > 1) {
            return false;
        }
        for b in 0..layout.n_revolute() {
            if e[layout.cos_index(b)] + e[layout.sin_index(b)] > 2 {
                return false;
            }
        }
        let total: usize = e.iter().map(|&d| d as usize).sum();
        if total > 2 * n + 1 {
            return false;
        }
        match convention {
            MonomialConvention::PropOne => true,
            MonomialConvention::GipRkhs => e[pos..].iter().map(|&d| d as usize).sum::<usize>() <= 1,
        }
    }

    /// Drops every monomial containing a velocity product.
    pub fn without_velocity_products(&self) -> MonomialSet {
        let vr = self.layout.velocity_range();
        MonomialSet {
            convention: self.convention,
            layout: self.layout.clone(),
            exponents: self
                .exponents
                .iter()
                .filter(|e| e[vr.clone()].iter().all(|&d| d == 0))
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.exponents).expect("exponents serialize")
    }
}

fn position_exponents(layout: &AugmentedLayout) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![vec![0; layout.n_position_vars()]];
    for b in 0..layout.n_revolute() {
        out = out
            .into_iter()
            .flat_map(|e| {
                TRIG_EXPONENTS.iter().map(move |&(dc, ds)| {
                    let mut e = e.clone();
                    e[layout.cos_index(b)] = dc;
                    e[layout.sin_index(b)] = ds;
                    e
                })
            })
            .collect();
    }
    for b in 0..layout.n_prismatic() {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..=2u8).map(move |d| {
                    let mut e = e.clone();
                    e[layout.prismatic_index(b)] = d;
                    e
                })
            })
            .collect();
    }
    out
}

/// All monomials admitted by `convention` for a chain of `joint_types`.
pub fn enumerate_monomials(
    joint_types: &[JointType],
    convention: MonomialConvention,
) -> Result<MonomialSet> {
    let layout = AugmentedLayout::new(joint_types)?;
    let count = count_monomials(joint_types, convention)?;
    if count > MAX_ENUMERATED {
        return Err(Error::invalid(format!(
            "{count} monomials exceed the enumeration limit; use count_monomials"
        )));
    }
    let n = layout.dof();
    let pos = layout.n_position_vars();
    let n_av = layout.gamma() - pos;
    let max_total = 2 * n + 1;
    let mut exponents = Vec::with_capacity(count as usize);
    for p in position_exponents(&layout) {
        let pdeg: usize = p.iter().map(|&d| d as usize).sum();
        let budget = max_total - pdeg;
        let mut push = |av: &[u8]| {
            let mut e = p.clone();
            e.extend_from_slice(av);
            exponents.push(e);
        };
        match convention {
            MonomialConvention::GipRkhs => {
                let mut av = vec![0u8; n_av];
                push(&av);
                if budget >= 1 {
                    for k in 0..n_av {
                        av[k] = 1;
                        push(&av);
                        av[k] = 0;
                    }
                }
            }
            MonomialConvention::PropOne => {
                // Binary subsets of the av block with at most `budget` ones.
                let mut av = vec![0u8; n_av];
                subsets(&mut av, 0, budget, &mut push);
            }
        }
    }
    Ok(MonomialSet {
        convention,
        layout,
        exponents,
    })
}

fn subsets(av: &mut Vec<u8>, start: usize, budget: usize, push: &mut impl FnMut(&[u8])) {
    push(av);
    if budget == 0 {
        return;
    }
    for k in start..av.len() {
        av[k] = 1;
        subsets(av, k + 1, budget - 1, push);
        av[k] = 0;
    }
}

/// Size of the monomial set without materializing it (degree generating
/// functions), usable for chains where enumeration is infeasible.
pub fn count_monomials(joint_types: &[JointType], convention: MonomialConvention) -> Result<u128> {
    let layout = AugmentedLayout::new(joint_types)?;
    let max_total = 2 * layout.dof() + 1;
    // poly[d] = number of monomials of total degree d.
    let mut poly = vec![1u128];
    let mul = |a: &[u128], b: &[u128]| -> Vec<u128> {
        let mut out = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    for _ in 0..layout.n_revolute() {
        poly = mul(&poly, &[1, 2, 3]);
    }
    for _ in 0..layout.n_prismatic() {
        poly = mul(&poly, &[1, 1, 1]);
    }
    let n_av = layout.gamma() - layout.n_position_vars();
    match convention {
        MonomialConvention::GipRkhs => poly = mul(&poly, &[1, n_av as u128]),
        MonomialConvention::PropOne => {
            for _ in 0..n_av {
                poly = mul(&poly, &[1, 1]);
            }
        }
    }
    Ok(poly.iter().take(max_total + 1).sum())
}

fn check_set_input(x_bar: &DVector<f64>, set: &MonomialSet) -> Result<()> {
    if x_bar.len() != set.layout.gamma() {
        return Err(Error::invalid(format!(
            "augmented input has length {}, monomial set expects {}",
            x_bar.len(),
            set.layout.gamma()
        )));
    }
    Ok(())
}

fn eval_one(x: &[f64], e: &[u8]) -> f64 {
    x.iter()
        .zip(e)
        .filter(|(_, &d)| d > 0)
        .map(|(&v, &d)| v.powi(d as i32))
        .product()
}

/// Feature vector `phi(x_bar)`: entry `k` is the product of `x_bar_j^e_kj`.
pub fn evaluate_monomials(x_bar: &DVector<f64>, set: &MonomialSet) -> Result<DVector<f64>> {
    check_set_input(x_bar, set)?;
    let x = x_bar.as_slice();
    Ok(DVector::from_iterator(
        set.len(),
        set.exponents.iter().map(|e| eval_one(x, e)),
    ))
}

/// Feature matrix with one row per augmented input row.
pub fn evaluate_monomial_rows(
    x_bar_rows: &DMatrix<f64>,
    set: &MonomialSet,
) -> Result<DMatrix<f64>> {
    if x_bar_rows.ncols() != set.layout.gamma() {
        return Err(Error::invalid(
            "augmented rows do not match the monomial layout",
        ));
    }
    let mut out = DMatrix::zeros(x_bar_rows.nrows(), set.len());
    let mut row = vec![0.0; x_bar_rows.ncols()];
    for r in 0..x_bar_rows.nrows() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = x_bar_rows[(r, c)];
        }
        for (k, e) in set.exponents.iter().enumerate() {
            out[(r, k)] = eval_one(&row, e);
        }
    }
    Ok(out)
}

/// Random states for certification: revolute `q` uniform in `[-pi, pi]`,
/// prismatic in `[-1, 1]` m, `dq` and `ddq` uniform in `[-2, 2]`.
pub fn sample_certification_states<R: Rng + ?Sized>(
    joint_types: &[JointType],
    count: usize,
    rng: &mut R,
) -> Vec<JointState> {
    (0..count)
        .map(|_| JointState::random(joint_types, 1.0, 2.0, rng))
        .collect()
}

/// Outcome of a polynomial-fit certification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub joint: usize,
    pub n_samples: usize,
    pub n_monomials: usize,
    pub rank: usize,
    /// `||y - Phi w|| / ||y||` of the least-squares fit.
    pub relative_residual: f64,
    pub passed: bool,
}

fn joint_torques(model: &RobotModel, states: &[JointState], joint: usize) -> DVector<f64> {
    DVector::from_iterator(
        states.len(),
        states
            .iter()
            .map(|s| inverse_dynamics_unchecked(model, s, false)[joint]),
    )
}

/// Fits noiseless torques of `joint` on the GIP monomial set and reports the
/// relative residual; torques that are polynomials of the stated form give
/// a residual at round-off level.
pub fn certify_proposition1(
    model: &RobotModel,
    samples: &[JointState],
    joint_index: usize,
) -> Result<CertificationReport> {
    let set = enumerate_monomials(&model.joint_types(), MonomialConvention::GipRkhs)?;
    certify_with_set(model, samples, joint_index, &set)
}

/// [`certify_proposition1`] against an arbitrary monomial set (used for
/// ablations).
pub fn certify_with_set(
    model: &RobotModel,
    samples: &[JointState],
    joint_index: usize,
    set: &MonomialSet,
) -> Result<CertificationReport> {
    model.validate()?;
    if joint_index >= model.dof() {
        return Err(Error::invalid(format!(
            "joint index {joint_index} out of range"
        )));
    }
    if set.layout.joint_types() != model.joint_types().as_slice() {
        return Err(Error::invalid(
            "monomial set layout does not match the model",
        ));
    }
    if samples.len() < 2 * set.len() {
        return Err(Error::invalid(format!(
            "{} samples for {} monomials; at least {} required",
            samples.len(),
            set.len(),
            2 * set.len()
        )));
    }
    for s in samples {
        s.check(model.dof())?;
    }
    let rows = augment_rows(samples, &model.joint_types())?;
    let phi = evaluate_monomial_rows(&rows, set)?;
    let y = joint_torques(model, samples, joint_index);
    let sol = lstsq_min_norm(&phi, &y, CERTIFY_RCOND)?;
    let relative_residual = (&phi * &sol.solution - &y).norm() / y.norm().max(f64::MIN_POSITIVE);
    Ok(CertificationReport {
        joint: joint_index,
        n_samples: samples.len(),
        n_monomials: set.len(),
        rank: sol.rank,
        relative_residual,
        passed: relative_residual < CERTIFY_TOLERANCE,
    })
}

/// Sample design of the factored certification: every position carries
/// several independent velocity/acceleration draws.
#[derive(Debug, Clone)]
pub struct PositionGroup {
    pub q: DVector<f64>,
    pub rates: Vec<(DVector<f64>, DVector<f64>)>,
}

pub fn sample_position_groups<R: Rng + ?Sized>(
    joint_types: &[JointType],
    n_positions: usize,
    draws_per_position: usize,
    rng: &mut R,
) -> Vec<PositionGroup> {
    (0..n_positions)
        .map(|_| {
            let q = JointState::random(joint_types, 1.0, 2.0, rng).q;
            let rates = (0..draws_per_position)
                .map(|_| {
                    let s = JointState::random(joint_types, 1.0, 2.0, rng);
                    (s.dq, s.ddq)
                })
                .collect();
            PositionGroup { q, rates }
        })
        .collect()
}

/// Report of [`certify_factored`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactoredCertificationReport {
    pub joint: usize,
    pub n_samples: usize,
    pub n_monomials: usize,
    pub position_rank: usize,
    /// Residual of the per-position fits on the `q_av` monomials.
    pub rate_residual: f64,
    /// Residual of the position-polynomial fits of the rate coefficients.
    pub position_residual: f64,
    pub relative_residual: f64,
    pub passed: bool,
}

/// Certification exploiting the tensor structure of the GIP monomial set
/// (position monomials times `{1} U q_av`), for chains whose full set is
/// too large for a direct fit.
///
/// At each sampled position the torques are fitted exactly on the `q_av`
/// monomials; the fitted coefficients are then fitted on the position
/// monomials across positions. Both residuals vanish iff the torque lies in
/// the span of the full product set on the sampled points.
/// With `drop_velocity_products`, the `dq_v` monomials are removed (ablation).
pub fn certify_factored(
    model: &RobotModel,
    groups: &[PositionGroup],
    joint_index: usize,
    drop_velocity_products: bool,
) -> Result<FactoredCertificationReport> {
    model.validate()?;
    let n = model.dof();
    if joint_index >= n {
        return Err(Error::invalid(format!(
            "joint index {joint_index} out of range"
        )));
    }
    let types = model.joint_types();
    let layout = AugmentedLayout::new(&types)?;
    let positions = position_exponents(&layout);
    let n_rate = 1
        + n
        + if drop_velocity_products {
            0
        } else {
            layout.n_velocity_products()
        };
    if groups.len() < 2 * positions.len() {
        return Err(Error::invalid(format!(
            "{} positions for {} position monomials; at least {} required",
            groups.len(),
            positions.len(),
            2 * positions.len()
        )));
    }
    if groups.iter().any(|g| g.rates.len() < 2 * n_rate) {
        return Err(Error::invalid(format!(
            "every position needs at least {} rate draws",
            2 * n_rate
        )));
    }

    let rate_features = |dq: &DVector<f64>, ddq: &DVector<f64>| {
        let mut f = Vec::with_capacity(n_rate);
        f.push(1.0);
        f.extend(ddq.iter().copied());
        if !drop_velocity_products {
            for i in 0..n {
                for j in i..n {
                    f.push(dq[i] * dq[j]);
                }
            }
        }
        f
    };

    let mut coeffs = DMatrix::zeros(groups.len(), n_rate);
    let mut pos_rows = DMatrix::zeros(groups.len(), positions.len());
    let (mut resid_sq, mut total_sq) = (0.0, 0.0);
    let mut n_samples = 0;
    for (g, group) in groups.iter().enumerate() {
        let states: Vec<JointState> = group
            .rates
            .iter()
            .map(|(dq, ddq)| JointState {
                q: group.q.clone(),
                dq: dq.clone(),
                ddq: ddq.clone(),
            })
            .collect();
        for s in &states {
            s.check(n)?;
        }
        n_samples += states.len();
        let y = joint_torques(model, &states, joint_index);
        let a = DMatrix::from_fn(states.len(), n_rate, |r, c| {
            rate_features(&states[r].dq, &states[r].ddq)[c]
        });
        let sol = lstsq_min_norm(&a, &y, CERTIFY_RCOND)?;
        resid_sq += (&a * &sol.solution - &y).norm_squared();
        total_sq += y.norm_squared();
        coeffs.set_row(g, &sol.solution.transpose());

        let x_bar = augment(&states[0], &types)?.to_vector();
        for (k, e) in positions.iter().enumerate() {
            pos_rows[(g, k)] = eval_one(&x_bar.as_slice()[..layout.n_position_vars()], e);
        }
    }
    let fit = lstsq_min_norm_multi(&pos_rows, &coeffs, CERTIFY_RCOND)?;
    let pos_resid =
        (&pos_rows * &fit.solution - &coeffs).norm() / coeffs.norm().max(f64::MIN_POSITIVE);
    let rate_resid = (resid_sq / total_sq.max(f64::MIN_POSITIVE)).sqrt();
    let relative_residual = rate_resid.max(pos_resid);
    Ok(FactoredCertificationReport {
        joint: joint_index,
        n_samples,
        n_monomials: positions.len() * n_rate,
        position_rank: fit.rank,
        rate_residual: rate_resid,
        position_residual: pos_resid,
        relative_residual,
        passed: relative_residual < CERTIFY_TOLERANCE,
    })
}

/// Largest monomial set certified by a direct fit in [`certify_model`].
pub const DIRECT_CERTIFY_LIMIT: usize = 1500;

/// Per-joint line of a [`ModelCertification`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointCertification {
    pub joint: usize,
    pub relative_residual: f64,
    /// Residual with the velocity products removed from the set.
    pub ablated_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelCertification {
    /// `"direct"` or `"factored"`.
    pub method: String,
    pub n_monomials: usize,
    pub n_samples: usize,
    pub joints: Vec<JointCertification>,
    /// Whether the ablation is expected to fail; chains without revolute
    /// joints have no velocity-product terms to lose.
    pub ablation_informative: bool,
}

impl ModelCertification {
    pub fn passed(&self) -> bool {
        self.joints.iter().all(|j| j.passed)
    }
}

/// Certifies every joint of `model`, fitting directly when the monomial set
/// has at most [`DIRECT_CERTIFY_LIMIT`] elements and with the factored fit
/// otherwise. `samples` overrides the direct sample count (at least twice
/// the set size).
pub fn certify_model<R: Rng + ?Sized>(
    model: &RobotModel,
    samples: Option<usize>,
    rng: &mut R,
) -> Result<ModelCertification> {
    model.validate()?;
    let types = model.joint_types();
    let n = types.len();
    let layout = AugmentedLayout::new(&types)?;
    let ablation_informative = layout.n_revolute() > 0;
    let set = enumerate_monomials(&types, MonomialConvention::GipRkhs)?;
    if set.len() <= DIRECT_CERTIFY_LIMIT {
        let m = samples.unwrap_or(2 * set.len() + 100);
        let states = sample_certification_states(&types, m, rng);
        let ablated = set.without_velocity_products();
        let joints = (0..n)
            .map(|j| {
                let full = certify_with_set(model, &states, j, &set)?;
                let abl = certify_with_set(model, &states, j, &ablated)?;
                Ok(JointCertification {
                    joint: j,
                    relative_residual: full.relative_residual,
                    ablated_residual: abl.relative_residual,
                    passed: full.passed,
                })
            })
            .collect::<Result<_>>()?;
        return Ok(ModelCertification {
            method: "direct".into(),
            n_monomials: set.len(),
            n_samples: m,
            joints,
            ablation_informative,
        });
    }
    let n_pos = position_exponents(&layout).len();
    let n_rate = 1 + n + layout.n_velocity_products();
    let groups = sample_position_groups(&types, 2 * n_pos, 2 * n_rate, rng);
    let mut n_samples = 0;
    let joints = (0..n)
        .map(|j| {
            let full = certify_factored(model, &groups, j, false)?;
            let abl = certify_factored(model, &groups, j, true)?;
            n_samples = full.n_samples;
            Ok(JointCertification {
                joint: j,
                relative_residual: full.relative_residual,
                ablated_residual: abl.relative_residual,
                passed: full.passed,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ModelCertification {
        method: "factored".into(),
        n_monomials: set.len(),
        n_samples,
        joints,
        ablation_informative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::random_chain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use JointType::{Prismatic as P, Revolute as R};

    /// Walks the full exponent box and keeps what the constraints admit.
    fn brute_force(types: &[JointType], convention: MonomialConvention) -> Vec<Vec<u8>> {
        let layout = AugmentedLayout::new(types).unwrap();
        let caps: Vec<u8> = (0..layout.gamma())
            .map(|k| if k < layout.n_position_vars() { 2 } else { 1 })
            .collect();
        let mut out = Vec::new();
        let mut e = vec![0u8; caps.len()];
        loop {
            if MonomialSet::admits(&layout, convention, &e) {
                out.push(e.clone());
            }
            let mut k = 0;
            while k < e.len() && e[k] == caps[k] {
                e[k] = 0;
                k += 1;
            }
            if k == e.len() {
                break;
            }
            e[k] += 1;
        }
        out.sort();
        out
    }

    #[test]
    fn single_joint_counts() {
        let r = enumerate_monomials(&[R], MonomialConvention::GipRkhs).unwrap();
        assert_eq!(r.len(), 18);
        let p = enumerate_monomials(&[P], MonomialConvention::GipRkhs).unwrap();
        assert_eq!(p.len(), 9);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for types in [
            vec![R],
            vec![P],
            vec![R, R],
            vec![R, P],
            vec![P, R],
            vec![P, P],
        ] {
            for conv in [MonomialConvention::PropOne, MonomialConvention::GipRkhs] {
                let mut got = enumerate_monomials(&types, conv).unwrap().exponents;
                got.sort();
                let want = brute_force(&types, conv);
                assert_eq!(got, want, "{types:?} {conv:?}");
                assert_eq!(count_monomials(&types, conv).unwrap(), want.len() as u128);
            }
        }
    }

    #[test]
    fn counter_matches_enumeration_on_scara() {
        let types = [R, R, P, R];
        for conv in [MonomialConvention::PropOne, MonomialConvention::GipRkhs] {
            let set = enumerate_monomials(&types, conv).unwrap();
            assert_eq!(set.len() as u128, count_monomials(&types, conv).unwrap());
            let mut sorted = set.exponents.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), set.len());
        }
        assert_eq!(
            count_monomials(&types, MonomialConvention::GipRkhs).unwrap(),
            648 * 15
        );
    }

    #[test]
    fn empty_chain_is_rejected() {
        assert!(enumerate_monomials(&[], MonomialConvention::GipRkhs).is_err());
        assert!(count_monomials(&[], MonomialConvention::PropOne).is_err());
    }

    #[test]
    fn augment_layout_and_values() {
        let types = [R, P, R];
        let s =
            JointState::from_slices(&[0.3, 0.7, -1.1], &[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        let x = augment(&s, &types).unwrap();
        let layout = AugmentedLayout::new(&types).unwrap();
        assert_eq!(x.gamma(), layout.gamma());
        assert_eq!(layout.gamma(), 4 + 1 + 6 + 3);
        let v = x.to_vector();
        assert_eq!(v[layout.cos_index(1)], (-1.1f64).cos());
        assert_eq!(v[layout.sin_index(0)], 0.3f64.sin());
        assert_eq!(v[layout.prismatic_index(0)], 0.7);
        let dqv: Vec<f64> = v.as_slice()[layout.velocity_range()].to_vec();
        assert_eq!(dqv, vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
        assert_eq!(&v.as_slice()[layout.acceleration_range()], &[4.0, 5.0, 6.0]);
        assert!(augment(&s, &[R, R]).is_err());
    }

    #[test]
    fn evaluation_matches_hand_product() {
        let types = [R];
        let set = enumerate_monomials(&types, MonomialConvention::GipRkhs).unwrap();
        let x = DVector::from_vec(vec![0.5, -0.25, 3.0, 7.0]);
        let phi = evaluate_monomials(&x, &set).unwrap();
        for (k, e) in set.exponents.iter().enumerate() {
            let want = 0.5f64.powi(e[0] as i32)
                * (-0.25f64).powi(e[1] as i32)
                * 3.0f64.powi(e[2] as i32)
                * 7.0f64.powi(e[3] as i32);
            assert_eq!(phi[k], want);
        }
        assert!(evaluate_monomials(&DVector::zeros(3), &set).is_err());
    }

    #[test]
    fn set_round_trips_through_json() {
        let set = enumerate_monomials(&[R, P], MonomialConvention::GipRkhs).unwrap();
        let s = serde_json::to_string(&set).unwrap();
        let back: MonomialSet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn direct_certification_on_two_joint_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for types in [[R, R], [R, P], [P, R], [P, P]] {
            let model = random_chain(&types, &mut rng);
            let samples = sample_certification_states(&types, 600, &mut rng);
            for j in 0..2 {
                let rep = certify_proposition1(&model, &samples, j).unwrap();
                assert!(rep.passed, "{types:?} joint {j}: {}", rep.relative_residual);
            }
        }
    }

    #[test]
    fn dropping_velocity_products_breaks_the_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let types = [R, R];
        let model = random_chain(&types, &mut rng);
        let samples = sample_certification_states(&types, 600, &mut rng);
        let set = enumerate_monomials(&types, MonomialConvention::GipRkhs)
            .unwrap()
            .without_velocity_products();
        let rep = certify_with_set(&model, &samples, 0, &set).unwrap();
        assert!(rep.relative_residual > 1e-3, "{}", rep.relative_residual);
    }

    #[test]
    fn too_few_samples_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let model = random_chain(&[R, R], &mut rng);
        let samples = sample_certification_states(&[R, R], 10, &mut rng);
        assert!(certify_proposition1(&model, &samples, 0).is_err());
    }

    #[test]
    fn factored_agrees_with_direct_verdict() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let types = [R, P];
        let model = random_chain(&types, &mut rng);
        let groups = sample_position_groups(&types, 40, 20, &mut rng);
        for j in 0..2 {
            let rep = certify_factored(&model, &groups, j, false).unwrap();
            assert!(rep.passed, "joint {j}: {rep:?}");
            assert_eq!(rep.n_monomials, 18 * 6);
        }
        let ablated = certify_factored(&model, &groups, 0, true).unwrap();
        assert!(ablated.relative_residual > 1e-3, "{ablated:?}");
    }
}
