//! Robot description: DH kinematics, link inertial data and optional actuator terms.

use std::path::Path;

use nalgebra::{DVector, Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of dynamics parameters per link in the barycentric layout.
pub const PARAMS_PER_LINK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JointType {
    Revolute,
    Prismatic,
}

/// One link of a serial chain together with the joint that drives it.
///
/// For a revolute joint `dh_d_offset` is the full (constant) `d`; for a
/// prismatic joint `dh_theta_offset` is the full (constant) `theta`.
/// `com` and `inertia` are expressed in the link frame, the inertia being
/// taken about the center of mass and stored as `(xx, xy, xz, yy, yz, zz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub joint_type: JointType,
    pub dh_a: f64,
    pub dh_alpha: f64,
    pub dh_d_offset: f64,
    pub dh_theta_offset: f64,
    pub mass: f64,
    pub com: [f64; 3],
    pub inertia: [f64; 6],
}

impl LinkSpec {
    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let [xx, xy, xz, yy, yz, zz] = self.inertia;
        Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
    }

    pub fn com_vector(&self) -> Vector3<f64> {
        Vector3::from(self.com)
    }

    /// DH `(theta, d)` for joint coordinate `q`.
    pub fn theta_d(&self, q: f64) -> (f64, f64) {
        match self.joint_type {
            JointType::Revolute => (self.dh_theta_offset + q, self.dh_d_offset),
            JointType::Prismatic => (self.dh_theta_offset, self.dh_d_offset + q),
        }
    }
}

/// Per-joint motor model: reflected rotor inertia, friction and current-to-torque gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec {
    pub rotor_inertia_reflected: f64,
    pub viscous_friction: f64,
    pub coulomb_friction: f64,
    pub torque_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub links: Vec<LinkSpec>,
    pub gravity: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator: Option<Vec<ActuatorSpec>>,
}

const SCARA_JSON: &str = include_str!("../../../../robots/scara.json");

impl RobotModel {
    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn joint_types(&self) -> Vec<JointType> {
        self.links.iter().map(|l| l.joint_type).collect()
    }

    pub fn gravity_vector(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }

    pub fn n_params(&self) -> usize {
        PARAMS_PER_LINK * self.dof()
    }

    /// The nominal 3R+1P SCARA shipped with the crate (joints 1, 2 and 4
    /// revolute, joint 3 prismatic).
    pub fn scara() -> Self {
        serde_json::from_str(SCARA_JSON).expect("bundled SCARA model is valid JSON")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: RobotModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("robot model serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.is_empty() {
            return Err(Error::ModelValidation("model has no links".into()));
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return Err(Error::ModelValidation("gravity must be finite".into()));
        }
        for (i, link) in self.links.iter().enumerate() {
            let scalars = [
                link.dh_a,
                link.dh_alpha,
                link.dh_d_offset,
                link.dh_theta_offset,
                link.mass,
            ];
            if scalars
                .iter()
                .chain(link.com.iter())
                .chain(link.inertia.iter())
                .any(|v| !v.is_finite())
            {
                return Err(Error::ModelValidation(format!(
                    "link {} has non-finite parameters",
                    i + 1
                )));
            }
            if link.mass < 0.0 {
                return Err(Error::ModelValidation(format!(
                    "link {} has negative mass {}",
                    i + 1,
                    link.mass
                )));
            }
            let inertia = link.inertia_matrix();
            let trace = inertia.trace();
            let min_eig = SymmetricEigen::new(inertia).eigenvalues.min();
            if min_eig < -1e-12 * trace.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::ModelValidation(format!(
                    "link {} inertia is not positive semidefinite (min eigenvalue {min_eig:e})",
                    i + 1
                )));
            }
        }
        if let Some(act) = &self.actuator {
            if act.len() != self.links.len() {
                return Err(Error::ModelValidation(format!(
                    "actuator table has {} entries for {} joints",
                    act.len(),
                    self.links.len()
                )));
            }
        }
        Ok(())
    }

    /// Barycentric dynamics parameters of every link, see [`DynParams`].
    pub fn dyn_params(&self) -> DynParams {
        DynParams::pack(self)
    }

    /// Returns a copy whose inertial data is replaced by `params`.
    ///
    /// Links with zero mass get their first moment dropped.
    pub fn with_dyn_params(&self, params: &DynParams) -> Result<RobotModel> {
        if params.0.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "expected {} dynamics parameters, got {}",
                self.n_params(),
                params.0.len()
            )));
        }
        let mut out = self.clone();
        for (i, link) in out.links.iter_mut().enumerate() {
            let p = params.0.rows(PARAMS_PER_LINK * i, PARAMS_PER_LINK);
            let m = p[0];
            let first = Vector3::new(p[1], p[2], p[3]);
            let origin_inertia = Matrix3::new(p[4], p[5], p[6], p[5], p[7], p[8], p[6], p[8], p[9]);
            let (com, inertia) = if m > 0.0 {
                let c = first / m;
                (
                    c,
                    origin_inertia
                        - m * (c.norm_squared() * Matrix3::identity() - c * c.transpose()),
                )
            } else {
                (Vector3::zeros(), origin_inertia)
            };
            link.mass = m;
            link.com = [com.x, com.y, com.z];
            link.inertia = [
                inertia[(0, 0)],
                inertia[(0, 1)],
                inertia[(0, 2)],
                inertia[(1, 1)],
                inertia[(1, 2)],
                inertia[(2, 2)],
            ];
        }
        Ok(out)
    }
}

/// Flat dynamics-parameter vector. Per link, in order:
/// `m, m*cx, m*cy, m*cz, Ixx, Ixy, Ixz, Iyy, Iyz, Izz`, where the inertia
/// is taken about the link-frame origin (barycentric form).
#[derive(Debug, Clone, PartialEq)]
pub struct DynParams(pub DVector<f64>);

impl DynParams {
    pub fn pack(model: &RobotModel) -> Self {
        let mut w = DVector::zeros(model.n_params());
        for (i, link) in model.links.iter().enumerate() {
            let m = link.mass;
            let c = link.com_vector();
            let origin = link.inertia_matrix()
                + m * (c.norm_squared() * Matrix3::identity() - c * c.transpose());
            let base = PARAMS_PER_LINK * i;
            let vals = [
                m,
                m * c.x,
                m * c.y,
                m * c.z,
                origin[(0, 0)],
                origin[(0, 1)],
                origin[(0, 2)],
                origin[(1, 1)],
                origin[(1, 2)],
                origin[(2, 2)],
            ];
            w.rows_mut(base, PARAMS_PER_LINK).copy_from_slice(&vals);
        }
        DynParams(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Human-readable name of parameter `k`, e.g. `link2.m_cx`.
    pub fn name(k: usize) -> String {
        const NAMES: [&str; PARAMS_PER_LINK] = [
            "m", "m_cx", "m_cy", "m_cz", "ixx", "ixy", "ixz", "iyy", "iyz", "izz",
        ];
        format!(
            "link{}.{}",
            k / PARAMS_PER_LINK + 1,
            NAMES[k % PARAMS_PER_LINK]
        )
    }
}

/// Joint positions, velocities and accelerations.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub q: DVector<f64>,
    pub dq: DVector<f64>,
    pub ddq: DVector<f64>,
}

impl JointState {
    pub fn new(q: DVector<f64>, dq: DVector<f64>, ddq: DVector<f64>) -> Result<Self> {
        let s = JointState { q, dq, ddq };
        s.check(s.q.len())?;
        Ok(s)
    }

    pub fn from_slices(q: &[f64], dq: &[f64], ddq: &[f64]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(q),
            DVector::from_column_slice(dq),
            DVector::from_column_slice(ddq),
        )
    }

    pub fn zeros(n: usize) -> Self {
        JointState {
            q: DVector::zeros(n),
            dq: DVector::zeros(n),
            ddq: DVector::zeros(n),
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    /// Checks dimensions against `n` and finiteness of every entry.
    pub fn check(&self, n: usize) -> Result<()> {
        if self.q.len() != n || self.dq.len() != n || self.ddq.len() != n {
            return Err(Error::invalid(format!(
                "joint state has dimensions ({}, {}, {}), expected {n}",
                self.q.len(),
                self.dq.len(),
                self.ddq.len()
            )));
        }
        if self
            .q
            .iter()
            .chain(self.dq.iter())
            .chain(self.ddq.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("joint state has non-finite entries"));
        }
        Ok(())
    }

    /// Raw input `[q, dq, ddq]`.
    pub fn to_raw(&self) -> DVector<f64> {
        let n = self.dof();
        let mut x = DVector::zeros(3 * n);
        x.rows_mut(0, n).copy_from(&self.q);
        x.rows_mut(n, n).copy_from(&self.dq);
        x.rows_mut(2 * n, n).copy_from(&self.ddq);
        x
    }

    /// Uniform random state: revolute positions in `[-pi, pi]`, prismatic in
    /// `[-prismatic_range, prismatic_range]`, velocities and accelerations in
    /// `[-rate_bound, rate_bound]`.
    pub fn random<R: Rng + ?Sized>(
        joint_types: &[JointType],
        prismatic_range: f64,
        rate_bound: f64,
        rng: &mut R,
    ) -> Self {
        let n = joint_types.len();
        let q = DVector::from_iterator(
            n,
            joint_types.iter().map(|jt| match jt {
                JointType::Revolute => rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI),
                JointType::Prismatic => rng.gen_range(-prismatic_range..=prismatic_range),
            }),
        );
        let dq = DVector::from_fn(n, |_, _| rng.gen_range(-rate_bound..=rate_bound));
        let ddq = DVector::from_fn(n, |_, _| rng.gen_range(-rate_bound..=rate_bound));
        JointState { q, dq, ddq }
    }
}

/// A serial chain with random DH geometry and random physically valid
/// inertial data. Used by property tests and the containment experiments.
pub fn random_chain<R: Rng + ?Sized>(joint_types: &[JointType], rng: &mut R) -> RobotModel {
    use std::f64::consts::PI;
    let links = joint_types
        .iter()
        .map(|&joint_type| {
            let a: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let mass: f64 = rng.gen_range(1.0..5.0);
            let inertia: Matrix3<f64> = 0.05 * (a * a.transpose()) + 0.01 * Matrix3::identity();
            LinkSpec {
                joint_type,
                dh_a: rng.gen_range(0.1..0.6),
                dh_alpha: rng.gen_range(-PI..PI),
                dh_d_offset: rng.gen_range(-0.3..0.3),
                dh_theta_offset: rng.gen_range(-PI..PI),
                mass,
                com: [
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                ],
                inertia: [
                    inertia[(0, 0)],
                    inertia[(0, 1)],
                    inertia[(0, 2)],
                    inertia[(1, 1)],
                    inertia[(1, 2)],
                    inertia[(2, 2)],
                ],
            }
        })
        .collect();
    RobotModel {
        name: "random".into(),
        links,
        gravity: [0.0, 0.0, -9.81],
        actuator: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scara_layout() {
        let m = RobotModel::scara();
        m.validate().unwrap();
        assert_eq!(
            m.joint_types(),
            vec![
                JointType::Revolute,
                JointType::Revolute,
                JointType::Prismatic,
                JointType::Revolute
            ]
        );
    }

    #[test]
    fn pack_unpack_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_chain(
            &[
                JointType::Revolute,
                JointType::Prismatic,
                JointType::Revolute,
            ],
            &mut rng,
        );
        let w = m.dyn_params();
        assert_eq!(w.len(), 30);
        let back = m.with_dyn_params(&w).unwrap();
        for (a, b) in m.links.iter().zip(&back.links) {
            assert!((a.mass - b.mass).abs() < 1e-12);
            for k in 0..3 {
                assert!((a.com[k] - b.com[k]).abs() < 1e-12);
            }
            for k in 0..6 {
                assert!((a.inertia[k] - b.inertia[k]).abs() < 1e-12);
            }
        }
        assert!((back.dyn_params().0 - w.0).amax() < 1e-12);
    }

    #[test]
    fn rejects_negative_mass_and_indefinite_inertia() {
        let mut m = RobotModel::scara();
        m.links[0].mass = -1.0;
        assert!(matches!(m.validate(), Err(Error::ModelValidation(_))));
        let mut m = RobotModel::scara();
        m.links[1].inertia = [1.0, 0.0, 0.0, -1.0, 0.0, 1.0];
        assert!(matches!(m.validate(), Err(Error::ModelValidation(_))));
    }

    #[test]
    fn json_round_trip() {
        let m = RobotModel::scara();
        let back = RobotModel::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn state_dimension_mismatch() {
        let err = JointState::from_slices(&[0.0, 1.0], &[0.0], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }
}
