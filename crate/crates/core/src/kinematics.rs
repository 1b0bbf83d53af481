//! Forward kinematics, Jacobian, dexterity index and damped-least-squares IK
//! for a 7-joint serial arm described by modified DH rows.

use nalgebra::{Isometry3, Matrix3, Matrix6, SMatrix, Translation3, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DOF: usize = 7;

pub type JointConfig = SMatrix<f64, DOF, 1>;
pub type Jacobian = SMatrix<f64, 6, DOF>;
pub type Pose = Isometry3<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinError {
    #[error("no IK solution: {0}")]
    NoSolution(String),
    #[error("degenerate input: all singular values are zero")]
    DegenerateInput,
    #[error("arm model: {0}")]
    Config(String),
}

/// One modified-DH row: the frame of joint i is reached from frame i-1 by
/// RotX(alpha) · TransX(a) · RotZ(q_i) · TransZ(d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
}

impl DhRow {
    pub fn transform(&self, q: f64) -> Pose {
        let rx = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), self.alpha);
        let rz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), q);
        let first = Isometry3::from_parts(Translation3::from(rx * Vector3::new(self.a, 0.0, 0.0)), rx);
        first * Isometry3::from_parts(Translation3::new(0.0, 0.0, self.d), rz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

/// Collision body index: 0..7 are the links carried by joint frames 1..7,
/// 7 is the gripper.
pub const GRIPPER_BODY: usize = DOF;
pub const NUM_BODIES: usize = DOF + 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub name: String,
    pub dh: [DhRow; DOF],
    pub lower: [f64; DOF],
    pub upper: [f64; DOF],
    /// Tool point in the last joint frame.
    pub tool: Pose,
    /// Per body (7 links then the gripper), spheres in the owning joint frame.
    pub bodies: Vec<Vec<Sphere>>,
    /// World pose of the arm base.
    pub base: Pose,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmFile {
    name: String,
    tool: [f64; 3],
    joints: Vec<JointFile>,
    gripper: GripperFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFile {
    alpha_deg: f64,
    a: f64,
    d: f64,
    lower_deg: f64,
    upper_deg: f64,
    spheres: Vec<[f64; 4]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GripperFile {
    spheres: Vec<[f64; 4]>,
}

fn spheres(rows: &[[f64; 4]], what: &str) -> Result<Vec<Sphere>, KinError> {
    if rows.is_empty() {
        return Err(KinError::Config(format!("{what} has no collision spheres")));
    }
    rows.iter()
        .map(|r| {
            if r[3] > 0.0 && r.iter().all(|v| v.is_finite()) {
                Ok(Sphere { center: Vector3::new(r[0], r[1], r[2]), radius: r[3] })
            } else {
                Err(KinError::Config(format!("{what}: sphere {r:?} needs a positive radius and finite centre")))
            }
        })
        .collect()
}

const BUILTIN: &str = include_str!("../data/arm/iiwa_like.toml");

impl ArmModel {
    /// The bundled iiwa-like model.
    pub fn iiwa_like() -> Self {
        Self::from_toml(BUILTIN).expect("bundled arm model is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, KinError> {
        let f: ArmFile = toml::from_str(text).map_err(|e| KinError::Config(e.to_string()))?;
        if f.joints.len() != DOF {
            return Err(KinError::Config(format!("expected {DOF} joints, found {}", f.joints.len())));
        }
        let mut dh = [DhRow { alpha: 0.0, a: 0.0, d: 0.0 }; DOF];
        let mut lower = [0.0; DOF];
        let mut upper = [0.0; DOF];
        let mut bodies = Vec::with_capacity(NUM_BODIES);
        for (i, j) in f.joints.iter().enumerate() {
            if !(j.lower_deg.is_finite() && j.upper_deg.is_finite() && j.lower_deg < j.upper_deg) {
                return Err(KinError::Config(format!("joints[{i}]: limits must be finite with lower < upper")));
            }
            dh[i] = DhRow { alpha: j.alpha_deg.to_radians(), a: j.a, d: j.d };
            lower[i] = j.lower_deg.to_radians();
            upper[i] = j.upper_deg.to_radians();
            bodies.push(spheres(&j.spheres, &format!("joints[{i}]"))?);
        }
        bodies.push(spheres(&f.gripper.spheres, "gripper")?);
        Ok(Self {
            name: f.name,
            dh,
            lower,
            upper,
            tool: Isometry3::translation(f.tool[0], f.tool[1], f.tool[2]),
            bodies,
            base: Isometry3::identity(),
        })
    }

    pub fn with_base(mut self, base: Pose) -> Self {
        self.base = base;
        self
    }

    /// Sum of all link offsets and the tool length: nothing farther than this
    /// from the base origin can be reached.
    pub fn total_reach(&self) -> f64 {
        self.dh.iter().map(|r| r.a.abs() + r.d.abs()).sum::<f64>() + self.tool.translation.vector.norm()
    }

    pub fn mid_config(&self) -> JointConfig {
        JointConfig::from_fn(|i, _| 0.5 * (self.lower[i] + self.upper[i]))
    }

    pub fn clamp(&self, q: &JointConfig) -> JointConfig {
        JointConfig::from_fn(|i, _| q[i].clamp(self.lower[i], self.upper[i]))
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        (0..DOF).all(|i| q[i] >= self.lower[i] && q[i] <= self.upper[i])
    }

    /// Uniform random configuration inside the limits.
    pub fn random_config<R: Rng>(&self, rng: &mut R) -> JointConfig {
        JointConfig::from_fn(|i, _| rng.random_range(self.lower[i]..=self.upper[i]))
    }
}

/// World frames of joints 1..7 and the tool pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Fk {
    pub frames: [Pose; DOF],
    pub end_effector: Pose,
}

impl Fk {
    /// World centres and radii of every collision sphere, tagged by body.
    pub fn body_spheres<'a>(&'a self, arm: &'a ArmModel) -> impl Iterator<Item = (usize, Vector3<f64>, f64)> + 'a {
        arm.bodies.iter().enumerate().flat_map(move |(b, list)| {
            let frame = &self.frames[b.min(DOF - 1)];
            list.iter().map(move |s| (b, frame.transform_point(&s.center.into()).coords, s.radius))
        })
    }
}

pub fn forward_kinematics(m: &ArmModel, q: &JointConfig) -> Fk {
    let mut frames = [Isometry3::identity(); DOF];
    let mut t = m.base;
    for i in 0..DOF {
        t *= m.dh[i].transform(q[i]);
        frames[i] = t;
    }
    Fk { frames, end_effector: t * m.tool }
}

/// Geometric Jacobian of the tool point: column i = (z_i × (p_ee − p_i), z_i).
pub fn jacobian(m: &ArmModel, q: &JointConfig) -> Jacobian {
    let fk = forward_kinematics(m, q);
    jacobian_from_fk(&fk)
}

pub fn jacobian_from_fk(fk: &Fk) -> Jacobian {
    let p = fk.end_effector.translation.vector;
    let mut j = Jacobian::zeros();
    for i in 0..DOF {
        let z = fk.frames[i].rotation * Vector3::z();
        let lin = z.cross(&(p - fk.frames[i].translation.vector));
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
    }
    j
}

/// Linear velocity Jacobian of a world point carried by `body`.
pub fn point_jacobian(fk: &Fk, body: usize, point: &Vector3<f64>) -> SMatrix<f64, 3, DOF> {
    let last = if body >= DOF { DOF - 1 } else { body };
    let mut j = SMatrix::<f64, 3, DOF>::zeros();
    for i in 0..=last {
        let z = fk.frames[i].rotation * Vector3::z();
        j.set_column(i, &z.cross(&(point - fk.frames[i].translation.vector)));
    }
    j
}

/// Ratio of smallest to largest singular value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dexterity {
    pub delta: f64,
    pub singular: bool,
}

/// Below this ratio the Jacobian is treated as rank deficient.
pub const SINGULAR_RATIO: f64 = 1e-10;

pub fn dexterity(j: &Jacobian) -> Result<Dexterity, KinError> {
    let sv = j.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) {
        return Err(KinError::DegenerateInput);
    }
    let ratio = min / max;
    if ratio < SINGULAR_RATIO {
        Ok(Dexterity { delta: 0.0, singular: true })
    } else {
        Ok(Dexterity { delta: ratio, singular: false })
    }
}

/// Dexterity of the arm at `q`; a fully degenerate Jacobian counts as δ = 0.
pub fn dexterity_at(m: &ArmModel, q: &JointConfig) -> f64 {
    dexterity(&jacobian(m, q)).map(|d| d.delta).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IkTolerance {
    pub pos: f64,
    pub rot: f64,
}

impl Default for IkTolerance {
    fn default() -> Self {
        Self { pos: 1e-3, rot: 1e-2 }
    }
}

pub const IK_DAMPING: f64 = 0.01;
const IK_NULL_GAIN: f64 = 0.1;
const IK_MAX_STEP: f64 = 0.3;
const IK_RESTARTS: usize = 6;

/// Position and rotation error from `current` to `target`, in world axes.
pub fn pose_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dp = target.translation.vector - current.translation.vector;
    let dr = (target.rotation * current.rotation.inverse()).scaled_axis();
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

fn converged(e: &Vector6<f64>, tol: IkTolerance) -> bool {
    e.fixed_rows::<3>(0).norm() <= tol.pos && e.fixed_rows::<3>(3).norm() <= tol.rot
}

fn dls_step(m: &ArmModel, q: &JointConfig, j: &Jacobian, e: &Vector6<f64>) -> JointConfig {
    let jjt: Matrix6<f64> = j * j.transpose() + Matrix6::identity() * (IK_DAMPING * IK_DAMPING);
    let Some(inv) = jjt.try_inverse() else {
        return JointConfig::zeros();
    };
    let pinv = j.transpose() * inv;
    let primary = pinv * e;
    let bias = (m.mid_config() - q) * IK_NULL_GAIN;
    let null = bias - pinv * (j * bias);
    let mut dq = primary + null;
    let peak = dq.amax();
    if peak > IK_MAX_STEP {
        dq *= IK_MAX_STEP / peak;
    }
    dq
}

/// Outcome of an IK search, including the best iterate when it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct IkResult {
    pub q: JointConfig,
    pub converged: bool,
    pub pos_err: f64,
    pub rot_err: f64,
}

impl IkResult {
    fn cost(&self) -> f64 {
        self.pos_err + 0.1 * self.rot_err
    }
}

fn ik_attempt(m: &ArmModel, target: &Pose, start: JointConfig, tol: IkTolerance, max_iters: usize) -> IkResult {
    let mut q = m.clamp(&start);
    let mut best: Option<IkResult> = None;
    for _ in 0..=max_iters {
        let fk = forward_kinematics(m, &q);
        let e = pose_error(&fk.end_effector, target);
        let here = IkResult {
            q,
            converged: converged(&e, tol),
            pos_err: e.fixed_rows::<3>(0).norm(),
            rot_err: e.fixed_rows::<3>(3).norm(),
        };
        if here.converged {
            return here;
        }
        if best.as_ref().is_none_or(|b| here.cost() < b.cost()) {
            best = Some(here);
        }
        let j = jacobian_from_fk(&fk);
        q = m.clamp(&(q + dls_step(m, &q, &j, &e)));
    }
    best.expect("at least one iteration runs")
}

/// Like [`solve_ik`], but always returns the closest configuration found.
pub fn solve_ik_best_effort(m: &ArmModel, target: &Pose, seed: &JointConfig, tol: IkTolerance, max_iters: usize) -> IkResult {
    let mut best = ik_attempt(m, target, *seed, tol, max_iters);
    if best.converged {
        return best;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c0ffee);
    for k in 0..IK_RESTARTS {
        let start = if k == 0 {
            m.mid_config()
        } else {
            JointConfig::from_fn(|i, _| {
                let half = 0.5 * (m.upper[i] - m.lower[i]);
                (seed[i] + rng.random_range(-0.5..0.5) * half).clamp(m.lower[i], m.upper[i])
            })
        };
        let r = ik_attempt(m, target, start, tol, max_iters);
        if r.converged {
            return r;
        }
        if r.cost() < best.cost() {
            best = r;
        }
    }
    best
}

/// Damped-least-squares IK with a mid-range nullspace bias and a few
/// deterministic restarts.
pub fn solve_ik(
    m: &ArmModel,
    target: &Pose,
    seed: &JointConfig,
    tol: IkTolerance,
    max_iters: usize,
) -> Result<JointConfig, KinError> {
    let reach = (target.translation.vector - m.base.translation.vector).norm();
    if reach > m.total_reach() {
        return Err(KinError::NoSolution(format!(
            "target is {reach:.3} m from the base, beyond the arm's {:.3} m reach",
            m.total_reach()
        )));
    }
    let r = solve_ik_best_effort(m, target, seed, tol, max_iters);
    if r.converged {
        Ok(r.q)
    } else {
        Err(KinError::NoSolution(format!(
            "did not converge within {max_iters} iterations (best position error {:.4} m)",
            r.pos_err
        )))
    }
}

/// Rotation that points the tool z axis along `dir`, keeping its x axis as
/// close as possible to `hint`.
pub fn look_rotation(dir: &Vector3<f64>, hint: &Vector3<f64>) -> UnitQuaternion<f64> {
    let z = dir.normalize();
    let mut x = hint - z * hint.dot(&z);
    if x.norm() < 1e-9 {
        let alt = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        x = alt - z * alt.dot(&z);
    }
    let x = x.normalize();
    let y = z.cross(&x);
    UnitQuaternion::from_matrix(&Matrix3::from_columns(&[x, y, z]))
}

/// Finite column vector helper used by tests and callers that build
/// configurations from slices.
pub fn config_from_slice(v: &[f64]) -> JointConfig {
    JointConfig::from_fn(|i, _| v[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn home_pose_is_stretched_upright() {
        let m = ArmModel::iiwa_like();
        let fk = forward_kinematics(&m, &JointConfig::zeros());
        let p = fk.end_effector.translation.vector;
        assert!((p - Vector3::new(0.0, 0.0, 1.34)).norm() < 1e-12, "{p}");
        assert!(fk.end_effector.rotation.angle() < 1e-12);
        assert!((fk.frames[4].translation.vector - Vector3::new(0.0, 0.0, 1.14)).norm() < 1e-12);
    }

    #[test]
    fn last_joint_spins_about_the_tool_axis() {
        let m = ArmModel::iiwa_like();
        let q = config_from_slice(&[0.3, 0.5, -0.2, -1.1, 0.4, 0.8, 0.0]);
        let mut q2 = q;
        q2[6] = 1.0;
        let a = forward_kinematics(&m, &q).end_effector;
        let b = forward_kinematics(&m, &q2).end_effector;
        assert!((a.translation.vector - b.translation.vector).norm() < 1e-12);
        let rel = a.rotation.inverse() * b.rotation;
        assert!((rel.angle() - 1.0).abs() < 1e-12);
        assert!((rel.axis().unwrap().into_inner() - Vector3::z()).norm() < 1e-9);
    }

    #[test]
    fn joint_one_is_periodic() {
        let m = ArmModel::iiwa_like();
        let q = config_from_slice(&[0.3, 0.5, -0.2, -1.1, 0.4, 0.8, 0.1]);
        let mut q2 = q;
        q2[0] += 2.0 * PI;
        let a = forward_kinematics(&m, &q).end_effector;
        let b = forward_kinematics(&m, &q2).end_effector;
        assert!((a.translation.vector - b.translation.vector).norm() < 1e-12);
        assert!(a.rotation.angle_to(&b.rotation) < 1e-9);
    }

    #[test]
    fn stretched_configuration_is_singular() {
        let m = ArmModel::iiwa_like();
        let j = jacobian(&m, &JointConfig::zeros());
        let d = dexterity(&j).unwrap();
        assert!(d.singular);
        assert_eq!(d.delta, 0.0);
    }

    #[test]
    fn dexterity_of_identity_block() {
        let mut j = Jacobian::zeros();
        for i in 0..6 {
            j[(i, i)] = 3.0;
        }
        assert!((dexterity(&j).unwrap().delta - 1.0).abs() < 1e-15);
        assert_eq!(dexterity(&Jacobian::zeros()), Err(KinError::DegenerateInput));
    }

    #[test]
    fn ik_fixed_point_and_reach_bound() {
        let m = ArmModel::iiwa_like();
        let q0 = config_from_slice(&[0.2, 0.6, 0.1, -1.2, 0.3, 0.7, -0.4]);
        let target = forward_kinematics(&m, &q0).end_effector;
        let q = solve_ik(&m, &target, &q0, IkTolerance::default(), 100).unwrap();
        assert_eq!(q, q0);
        let far = Isometry3::translation(0.0, 2.0, 0.5);
        assert!(matches!(solve_ik(&m, &far, &q0, IkTolerance::default(), 100), Err(KinError::NoSolution(_))));
    }

    #[test]
    fn model_file_errors() {
        assert!(ArmModel::from_toml("name = 'x'\ntool=[0,0,0]\njoints=[]\n[gripper]\nspheres=[[0,0,0,0.1]]").is_err());
        let bad = BUILTIN.replace("lower_deg = -170.0", "lower_deg = 171.0");
        assert!(matches!(ArmModel::from_toml(&bad), Err(KinError::Config(_))));
    }

    #[test]
    fn look_rotation_axes() {
        let r = look_rotation(&Vector3::new(0.0, 0.0, -1.0), &Vector3::x());
        assert!((r * Vector3::z() - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert!((r * Vector3::x() - Vector3::x()).norm() < 1e-12);
    }
}
