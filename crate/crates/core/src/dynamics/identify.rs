//! Least-squares identification of the dynamics parameters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::lstsq_min_norm;

/// Relative singular-value cutoff of the rank-revealing solve.
pub const IDENTIFY_RCOND: f64 = 1e-10;

/// Minimum-norm least-squares estimate of `w` from stacked regressors and
/// torques. Only the base-parameter subspace is identifiable, so the
/// returned vector generally differs from the true `w` by a null-space term.
pub fn fisherian_identify(
    phi_stack: &DMatrix<f64>,
    tau_stack: &DVector<f64>,
) -> Result<DVector<f64>> {
    if phi_stack.nrows() == 0 || phi_stack.ncols() == 0 {
        return Err(Error::invalid("empty identification data"));
    }
    if phi_stack.nrows() != tau_stack.len() {
        return Err(Error::invalid(format!(
            "regressor has {} rows but {} torques were given",
            phi_stack.nrows(),
            tau_stack.len()
        )));
    }
    Ok(lstsq_min_norm(phi_stack, tau_stack, IDENTIFY_RCOND)?.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{inverse_dynamics, stacked_regressor, JointState, RobotModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torques(model: &RobotModel, states: &[JointState]) -> DVector<f64> {
        let n = model.dof();
        let mut out = DVector::zeros(states.len() * n);
        for (k, s) in states.iter().enumerate() {
            out.rows_mut(k * n, n)
                .copy_from(&inverse_dynamics(model, s, false).unwrap());
        }
        out
    }

    #[test]
    fn noiseless_residual_vanishes() {
        let model = RobotModel::scara();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let states: Vec<_> = (0..200)
            .map(|_| JointState::random(&model.joint_types(), 0.1, 2.0, &mut rng))
            .collect();
        let phi = stacked_regressor(&model, &states).unwrap();
        let tau = torques(&model, &states);
        let w = fisherian_identify(&phi, &tau).unwrap();
        let resid = (&phi * &w - &tau).amax();
        assert!(resid < 1e-8 * (1.0 + tau.amax()), "{resid}");
    }

    #[test]
    fn single_sample_is_underdetermined_but_solvable() {
        let model = RobotModel::scara();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let states = vec![JointState::random(&model.joint_types(), 0.1, 2.0, &mut rng)];
        let phi = stacked_regressor(&model, &states).unwrap();
        let tau = torques(&model, &states);
        let w = fisherian_identify(&phi, &tau).unwrap();
        assert!((&phi * &w - &tau).amax() < 1e-8 * (1.0 + tau.amax()));
    }

    #[test]
    fn empty_data_is_rejected() {
        let err = fisherian_identify(&DMatrix::zeros(0, 40), &DVector::zeros(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
