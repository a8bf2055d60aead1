//! Linear-in-parameters form `tau = Phi(x) w` via recursive Newton-Euler.
//!
//! Each link's body wrench about its frame origin is linear in the
//! barycentric parameters; joint torques are the axis projections of the
//! wrenches of all distal links.

use nalgebra::{DMatrix, Matrix3, SMatrix, Vector3};

use super::kinematics::frames_with_base;
use super::model::{JointState, JointType, RobotModel, PARAMS_PER_LINK};
use crate::error::Result;

type Matrix3x6 = SMatrix<f64, 3, 6>;
type Matrix3x10 = SMatrix<f64, 3, 10>;

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `I v` written as a linear map of `(xx, xy, xz, yy, yz, zz)`.
fn inertia_product(v: &Vector3<f64>) -> Matrix3x6 {
    Matrix3x6::new(
        v.x, v.y, v.z, 0.0, 0.0, 0.0, //
        0.0, v.x, 0.0, v.y, v.z, 0.0, //
        0.0, 0.0, v.x, 0.0, v.y, v.z,
    )
}

pub(crate) fn regressor_unchecked(model: &RobotModel, state: &JointState) -> DMatrix<f64> {
    let n = model.dof();
    let frames = frames_with_base(model, &state.q);

    // Body force / moment regressors of every link, expressed in the base frame.
    let mut force_reg = Vec::with_capacity(n);
    let mut moment_reg = Vec::with_capacity(n);
    let mut omega = Vector3::zeros();
    let mut omega_dot = Vector3::zeros();
    let mut acc = -model.gravity_vector();
    for (i, link) in model.links.iter().enumerate() {
        let z = frames[i].z_axis();
        let r = frames[i + 1].translation - frames[i].translation;
        let (qd, qdd) = (state.dq[i], state.ddq[i]);
        match link.joint_type {
            JointType::Revolute => {
                let omega_prev = omega;
                omega += qd * z;
                omega_dot += qdd * z + qd * omega_prev.cross(&z);
                acc += omega_dot.cross(&r) + omega.cross(&omega.cross(&r));
            }
            JointType::Prismatic => {
                acc += omega_dot.cross(&r)
                    + omega.cross(&omega.cross(&r))
                    + 2.0 * qd * omega.cross(&z)
                    + qdd * z;
            }
        }

        let rot = frames[i + 1].rotation;
        let rt = rot.transpose();
        let (w, wd, a) = (rt * omega, rt * omega_dot, rt * acc);
        let sw = skew(&w);

        let mut yf = Matrix3x10::zeros();
        yf.fixed_view_mut::<3, 1>(0, 0).copy_from(&a);
        yf.fixed_view_mut::<3, 3>(0, 1)
            .copy_from(&(skew(&wd) + sw * sw));
        let mut yn = Matrix3x10::zeros();
        yn.fixed_view_mut::<3, 3>(0, 1).copy_from(&(-skew(&a)));
        yn.fixed_view_mut::<3, 6>(0, 4)
            .copy_from(&(inertia_product(&wd) + sw * inertia_product(&w)));
        force_reg.push(rot * yf);
        moment_reg.push(rot * yn);
    }

    let mut phi = DMatrix::zeros(n, PARAMS_PER_LINK * n);
    for (j, joint_link) in model.links.iter().enumerate() {
        let z = frames[j].z_axis();
        for i in j..n {
            let row = match joint_link.joint_type {
                JointType::Revolute => {
                    let lever = frames[i + 1].translation - frames[j].translation;
                    z.transpose() * (skew(&lever) * force_reg[i] + moment_reg[i])
                }
                JointType::Prismatic => z.transpose() * force_reg[i],
            };
            phi.view_mut((j, PARAMS_PER_LINK * i), (1, PARAMS_PER_LINK))
                .copy_from(&row);
        }
    }
    phi
}

/// Regressor `Phi(x)` (n x 10n) such that `tau = Phi(x) w` for the
/// barycentric parameter vector `w` of [`super::DynParams`]. Depends only on
/// the kinematic part of `model`.
pub fn regressor(model: &RobotModel, state: &JointState) -> Result<DMatrix<f64>> {
    model.validate()?;
    state.check(model.dof())?;
    Ok(regressor_unchecked(model, state))
}

/// Stacks the regressors of `states` into a `(N n) x 10n` matrix.
pub fn stacked_regressor(model: &RobotModel, states: &[JointState]) -> Result<DMatrix<f64>> {
    model.validate()?;
    let n = model.dof();
    let mut out = DMatrix::zeros(states.len() * n, model.n_params());
    for (k, s) in states.iter().enumerate() {
        s.check(n)?;
        out.view_mut((k * n, 0), (n, model.n_params()))
            .copy_from(&regressor_unchecked(model, s));
    }
    Ok(out)
}
