//! Rigid-body dynamics of serial manipulators under the DH convention.

mod identify;
mod kinematics;
mod lagrangian;
mod model;
mod regressor;

pub use identify::{fisherian_identify, IDENTIFY_RCOND};
pub use kinematics::{
    com_positions_and_jacobians, dh_transform, forward_kinematics, Frame, LinkJacobians,
};
pub use lagrangian::{
    coriolis_matrix, gravity_vector, inertia_matrix, inverse_dynamics, inverse_dynamics_batch,
    kinetic_energy, potential_energy, CHRISTOFFEL_STEP,
};
pub use model::{
    random_chain, ActuatorSpec, DynParams, JointState, JointType, LinkSpec, RobotModel,
    PARAMS_PER_LINK,
};
pub use regressor::{regressor, stacked_regressor};

pub(crate) use lagrangian::inverse_dynamics_unchecked;
