//! Lagrangian rigid-body dynamics: `tau = B(q) ddq + C(q, dq) dq + g(q)`.
//!
//! The Coriolis matrix is assembled from Christoffel symbols whose partial
//! derivatives `dB/dq_k` are taken by central finite differences.

use nalgebra::{DMatrix, DVector};

use super::kinematics::{check_q, link_jacobians_unchecked};
use super::model::{JointState, RobotModel};
use crate::error::{Error, Result};

/// Central-difference step used for the partial derivatives of `B(q)`.
pub const CHRISTOFFEL_STEP: f64 = 1e-6;

pub(crate) fn inertia_unchecked(model: &RobotModel, q: &DVector<f64>) -> DMatrix<f64> {
    let n = model.dof();
    let mut b = DMatrix::zeros(n, n);
    for (link, lj) in model.links.iter().zip(link_jacobians_unchecked(model, q)) {
        let world_inertia = lj.rotation * link.inertia_matrix() * lj.rotation.transpose();
        b += link.mass * lj.linear.transpose() * &lj.linear;
        b += lj.angular.transpose() * world_inertia * &lj.angular;
    }
    // Symmetrize away round-off.
    (&b + b.transpose()) * 0.5
}

/// `dB/dq_k` for every `k` by central differences.
fn inertia_partials(model: &RobotModel, q: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let h = CHRISTOFFEL_STEP;
    (0..model.dof())
        .map(|k| {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[k] += h;
            qm[k] -= h;
            (inertia_unchecked(model, &qp) - inertia_unchecked(model, &qm)) / (2.0 * h)
        })
        .collect()
}

pub(crate) fn coriolis_unchecked(
    model: &RobotModel,
    q: &DVector<f64>,
    dq: &DVector<f64>,
) -> DMatrix<f64> {
    let n = model.dof();
    if dq.iter().all(|&v| v == 0.0) {
        return DMatrix::zeros(n, n);
    }
    let partials = inertia_partials(model, q);
    DMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| {
                0.5 * (partials[k][(i, j)] + partials[j][(i, k)] - partials[i][(j, k)]) * dq[k]
            })
            .sum()
    })
}

pub(crate) fn gravity_unchecked(model: &RobotModel, q: &DVector<f64>) -> DVector<f64> {
    let g0 = model.gravity_vector();
    let mut g = DVector::zeros(model.dof());
    for (link, lj) in model.links.iter().zip(link_jacobians_unchecked(model, q)) {
        g -= link.mass * lj.linear.transpose() * g0;
    }
    g
}

fn check_model_and_q(model: &RobotModel, q: &DVector<f64>) -> Result<()> {
    model.validate()?;
    check_q(model, q)
}

/// Joint-space inertia matrix `B(q)`.
pub fn inertia_matrix(model: &RobotModel, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    check_model_and_q(model, q)?;
    Ok(inertia_unchecked(model, q))
}

/// Coriolis/centrifugal matrix `C(q, dq)` in Christoffel form, so that
/// `dB/dt - 2C` is skew-symmetric.
pub fn coriolis_matrix(
    model: &RobotModel,
    q: &DVector<f64>,
    dq: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_model_and_q(model, q)?;
    check_q(model, dq)?;
    Ok(coriolis_unchecked(model, q, dq))
}

/// Gravity torques `g(q) = dU/dq` with `U = -sum_j m_j g0^T c_j`.
pub fn gravity_vector(model: &RobotModel, q: &DVector<f64>) -> Result<DVector<f64>> {
    check_model_and_q(model, q)?;
    Ok(gravity_unchecked(model, q))
}

/// Potential energy `U(q) = -sum_j m_j g0^T c_j`.
pub fn potential_energy(model: &RobotModel, q: &DVector<f64>) -> Result<f64> {
    check_model_and_q(model, q)?;
    let g0 = model.gravity_vector();
    Ok(model
        .links
        .iter()
        .zip(link_jacobians_unchecked(model, q))
        .map(|(link, lj)| -link.mass * g0.dot(&lj.com))
        .sum())
}

/// Kinetic energy `0.5 dq^T B(q) dq`.
pub fn kinetic_energy(model: &RobotModel, q: &DVector<f64>, dq: &DVector<f64>) -> Result<f64> {
    let b = inertia_matrix(model, q)?;
    check_q(model, dq)?;
    Ok(0.5 * dq.dot(&(b * dq)))
}

pub(crate) fn inverse_dynamics_unchecked(
    model: &RobotModel,
    state: &JointState,
    with_actuator: bool,
) -> DVector<f64> {
    let b = inertia_unchecked(model, &state.q);
    let c = coriolis_unchecked(model, &state.q, &state.dq);
    let mut tau = b * &state.ddq + c * &state.dq + gravity_unchecked(model, &state.q);
    if with_actuator {
        if let Some(act) = &model.actuator {
            for (i, a) in act.iter().enumerate() {
                tau[i] += a.rotor_inertia_reflected * state.ddq[i]
                    + a.viscous_friction * state.dq[i]
                    + a.coulomb_friction * sign(state.dq[i]);
            }
        }
    }
    tau
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Joint torques for `state`. With `with_actuator`, the motor terms
/// `Kr^2 Bm ddq + Fv dq + Fc sign(dq)` are added (an error if the model
/// carries no actuator table).
pub fn inverse_dynamics(
    model: &RobotModel,
    state: &JointState,
    with_actuator: bool,
) -> Result<DVector<f64>> {
    model.validate()?;
    state.check(model.dof())?;
    if with_actuator && model.actuator.is_none() {
        return Err(Error::ModelValidation(
            "actuator terms requested but the model has no actuator table".into(),
        ));
    }
    Ok(inverse_dynamics_unchecked(model, state, with_actuator))
}

/// Batch version of [`inverse_dynamics`]; validates once.
pub fn inverse_dynamics_batch(
    model: &RobotModel,
    states: &[JointState],
    with_actuator: bool,
) -> Result<Vec<DVector<f64>>> {
    model.validate()?;
    for s in states {
        s.check(model.dof())?;
    }
    if with_actuator && model.actuator.is_none() {
        return Err(Error::ModelValidation(
            "actuator terms requested but the model has no actuator table".into(),
        ));
    }
    Ok(states
        .iter()
        .map(|s| inverse_dynamics_unchecked(model, s, with_actuator))
        .collect())
}
