//! DH forward kinematics and link Jacobians.

use nalgebra::{DVector, Matrix3, Matrix3xX, Vector3};

use super::model::{JointType, LinkSpec, RobotModel};
use crate::error::{Error, Result};

/// Pose of a link frame in the base frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Joint axis (`z` of this frame) in the base frame.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }
}

/// Position and Jacobians of one link's center of mass.
#[derive(Debug, Clone)]
pub struct LinkJacobians {
    pub com: Vector3<f64>,
    /// Orientation of the link frame in the base frame.
    pub rotation: Matrix3<f64>,
    /// `c_dot = linear * dq`
    pub linear: Matrix3xX<f64>,
    /// `omega = angular * dq`
    pub angular: Matrix3xX<f64>,
}

/// Relative transform of link `i` w.r.t. link `i-1`:
/// `R = Rz(theta) Rx(alpha)` and `l = [0, 0, d] + Rz(theta) [a, 0, 0]`.
pub fn dh_transform(link: &LinkSpec, q: f64) -> Frame {
    let (theta, d) = link.theta_d(q);
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = link.dh_alpha.sin_cos();
    let rotation = Matrix3::new(ct, -st * ca, st * sa, st, ct * ca, -ct * sa, 0.0, sa, ca);
    let translation = Vector3::new(link.dh_a * ct, link.dh_a * st, d);
    Frame {
        rotation,
        translation,
    }
}

pub(crate) fn check_q(model: &RobotModel, q: &DVector<f64>) -> Result<()> {
    if q.len() != model.dof() {
        return Err(Error::invalid(format!(
            "q has length {}, model has {} joints",
            q.len(),
            model.dof()
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("q has non-finite entries"));
    }
    Ok(())
}

/// Frames `0..=n`, frame 0 being the base.
pub(crate) fn frames_with_base(model: &RobotModel, q: &DVector<f64>) -> Vec<Frame> {
    let mut frames = Vec::with_capacity(model.dof() + 1);
    let mut current = Frame::identity();
    frames.push(current.clone());
    for (link, &qi) in model.links.iter().zip(q.iter()) {
        let rel = dh_transform(link, qi);
        current = Frame {
            translation: current.translation + current.rotation * rel.translation,
            rotation: current.rotation * rel.rotation,
        };
        frames.push(current.clone());
    }
    frames
}

/// Poses of frames `1..=n` in the base frame.
pub fn forward_kinematics(model: &RobotModel, q: &DVector<f64>) -> Result<Vec<Frame>> {
    check_q(model, q)?;
    let mut frames = frames_with_base(model, q);
    frames.remove(0);
    Ok(frames)
}

pub(crate) fn link_jacobians_unchecked(model: &RobotModel, q: &DVector<f64>) -> Vec<LinkJacobians> {
    let n = model.dof();
    let frames = frames_with_base(model, q);
    model
        .links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let frame = &frames[i + 1];
            let com = frame.translation + frame.rotation * link.com_vector();
            let mut linear = Matrix3xX::zeros(n);
            let mut angular = Matrix3xX::zeros(n);
            for (j, joint_link) in model.links.iter().enumerate().take(i + 1) {
                let parent = &frames[j];
                let z = parent.z_axis();
                match joint_link.joint_type {
                    JointType::Revolute => {
                        linear.set_column(j, &z.cross(&(com - parent.translation)));
                        angular.set_column(j, &z);
                    }
                    JointType::Prismatic => {
                        linear.set_column(j, &z);
                    }
                }
            }
            LinkJacobians {
                com,
                rotation: frame.rotation,
                linear,
                angular,
            }
        })
        .collect()
}

/// Center-of-mass position and linear/angular Jacobians of every link.
pub fn com_positions_and_jacobians(
    model: &RobotModel,
    q: &DVector<f64>,
) -> Result<Vec<LinkJacobians>> {
    check_q(model, q)?;
    Ok(link_jacobians_unchecked(model, q))
}
