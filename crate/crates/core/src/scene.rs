//! Scene description, analytic signed distances and mutable world state.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{forward_kinematics, ArmModel, Fk, JointConfig, Pose, DOF, GRIPPER_BODY};
use crate::plan::Grasp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("scene config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("no objects left to measure clearance against")]
    EmptyScene,
    #[error("unknown label '{0}'")]
    UnknownLabel(String),
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Config { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { radius: f64 },
    /// Full edge lengths.
    Box { size: Vector3<f64> },
    /// Axis along local z.
    Cylinder { radius: f64, height: f64 },
}

impl Shape {
    /// Signed distance from a point given in the shape's local frame.
    pub fn local_distance(&self, p: &Vector3<f64>) -> f64 {
        match *self {
            Shape::Sphere { radius } => p.norm() - radius,
            Shape::Box { size } => {
                let q = p.abs() - size * 0.5;
                let outside = q.map(|v| v.max(0.0)).norm();
                let inside = q.max().min(0.0);
                outside + inside
            }
            Shape::Cylinder { radius, height } => {
                let dr = (p.x * p.x + p.y * p.y).sqrt() - radius;
                let dz = p.z.abs() - height * 0.5;
                let inside = dr.max(dz).min(0.0);
                let outside = (dr.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt();
                inside + outside
            }
        }
    }

    /// Radius of the smallest centred sphere containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => radius,
            Shape::Box { size } => (size * 0.5).norm(),
            Shape::Cylinder { radius, height } => (radius * radius + 0.25 * height * height).sqrt(),
        }
    }

    /// Support distance along a local unit direction.
    pub fn extent_along(&self, dir: &Vector3<f64>) -> f64 {
        match *self {
            Shape::Sphere { radius } => radius,
            Shape::Box { size } => 0.5 * (size.x * dir.x.abs() + size.y * dir.y.abs() + size.z * dir.z.abs()),
            Shape::Cylinder { radius, height } => {
                radius * (dir.x * dir.x + dir.y * dir.y).sqrt() + 0.5 * height * dir.z.abs()
            }
        }
    }

    /// Half-height along local z.
    pub fn half_height(&self) -> f64 {
        self.extent_along(&Vector3::z())
    }

    /// The point where the ray from the centre along `dir` leaves the shape.
    pub fn radial_surface_point(&self, dir: &Vector3<f64>) -> Vector3<f64> {
        let t = match *self {
            Shape::Sphere { radius } => radius,
            Shape::Box { size } => (0..3)
                .filter(|&i| dir[i].abs() > 1e-12)
                .map(|i| 0.5 * size[i] / dir[i].abs())
                .fold(f64::INFINITY, f64::min),
            Shape::Cylinder { radius, height } => {
                let rxy = (dir.x * dir.x + dir.y * dir.y).sqrt();
                let a = if rxy > 1e-12 { radius / rxy } else { f64::INFINITY };
                let b = if dir.z.abs() > 1e-12 { 0.5 * height / dir.z.abs() } else { f64::INFINITY };
                a.min(b)
            }
        };
        dir * t
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Box { size } => size.x * size.y * size.z,
            Shape::Cylinder { radius, height } => PI * radius * radius * height,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Container {
    pub contents: String,
    pub spill_tilt_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub label: String,
    pub shape: Shape,
    pub pose: Pose,
    pub movable: bool,
    pub graspable_from: Vec<Grasp>,
    pub container: Option<Container>,
}

impl SceneObject {
    pub fn graspable(&self, g: Grasp) -> bool {
        self.movable && self.graspable_from.contains(&g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocationKind {
    /// Uses the geometry of the object with the same label.
    Object,
    /// Static geometry owned by the location.
    Body(SceneObject),
    /// Named in the vocabulary but not physically modelled; unreachable.
    Symbolic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub label: String,
    pub kind: LocationKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Workspace {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn corners(&self) -> [Vector3<f64>; 8] {
        let mut out = [Vector3::zeros(); 8];
        for (k, c) in out.iter_mut().enumerate() {
            for i in 0..3 {
                c[i] = if k & (1 << i) == 0 { self.min[i] } else { self.max[i] };
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub name: String,
    /// Free-text description handed to planners.
    pub description: Option<String>,
    pub objects: Vec<SceneObject>,
    pub locations: Vec<Location>,
    pub workspace: Workspace,
    pub robot_base: Pose,
    pub home_q: JointConfig,
    pub arm_file: Option<String>,
}

impl Scene {
    pub fn object(&self, label: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.label == label)
    }

    pub fn location(&self, label: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.label == label)
    }

    /// Every label a plan may mention.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        self.objects.iter().map(|o| o.label.clone()).chain(self.locations.iter().map(|l| l.label.clone())).collect()
    }

    /// Static bodies owned by locations (not objects).
    pub fn location_bodies(&self) -> impl Iterator<Item = &SceneObject> {
        self.locations.iter().filter_map(|l| match &l.kind {
            LocationKind::Body(b) => Some(b),
            _ => None,
        })
    }

    /// Geometry for a label, whether it names an object or a location.
    pub fn body(&self, label: &str) -> Option<&SceneObject> {
        if let Some(o) = self.object(label) {
            return Some(o);
        }
        match &self.location(label)?.kind {
            LocationKind::Body(b) => Some(b),
            _ => None,
        }
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.object(label).is_some() || self.location(label).is_some()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    description: Option<String>,
    workspace: WorkspaceFile,
    robot: RobotFile,
    #[serde(default)]
    objects: Vec<ObjectFile>,
    #[serde(default)]
    locations: Vec<LocationFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkspaceFile {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    pose: PoseFile,
    home_q_deg: Vec<f64>,
    #[serde(default)]
    arm: Option<String>,
}

#[derive(Deserialize, Serialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct PoseFile {
    xyz: [f64; 3],
    #[serde(default)]
    rpy: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeFile {
    kind: String,
    dims: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerFile {
    contents: String,
    spill_tilt_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    label: String,
    shape: ShapeFile,
    pose: PoseFile,
    #[serde(default)]
    movable: bool,
    #[serde(default)]
    graspable_from: Vec<String>,
    #[serde(default)]
    container: Option<ContainerFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocationFile {
    label: String,
    #[serde(default)]
    shape: Option<ShapeFile>,
    #[serde(default)]
    pose: Option<PoseFile>,
    #[serde(default)]
    symbolic: bool,
}

fn pose_from(p: &PoseFile, path: &str) -> Result<Pose, SceneError> {
    if !p.xyz.iter().chain(p.rpy.iter()).all(|v| v.is_finite()) {
        return Err(config_err(path, "pose values must be finite"));
    }
    Ok(Isometry3::from_parts(
        Translation3::new(p.xyz[0], p.xyz[1], p.xyz[2]),
        UnitQuaternion::from_euler_angles(p.rpy[0], p.rpy[1], p.rpy[2]),
    ))
}

fn shape_from(s: &ShapeFile, path: &str) -> Result<Shape, SceneError> {
    if s.dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(config_err(format!("{path}.dims"), "all dimensions must be positive"));
    }
    let want = match s.kind.as_str() {
        "sphere" => 1,
        "box" => 3,
        "cylinder" => 2,
        other => {
            return Err(config_err(format!("{path}.kind"), format!("unknown shape `{other}` (sphere, box or cylinder)")))
        }
    };
    if s.dims.len() != want {
        return Err(config_err(format!("{path}.dims"), format!("a {} needs {want} dimensions, found {}", s.kind, s.dims.len())));
    }
    let d = &s.dims;
    Ok(match want {
        1 => Shape::Sphere { radius: d[0] },
        3 => Shape::Box { size: Vector3::new(d[0], d[1], d[2]) },
        _ => Shape::Cylinder { radius: d[0], height: d[1] },
    })
}

fn object_from(o: &ObjectFile, path: &str) -> Result<SceneObject, SceneError> {
    if o.label.trim().is_empty() {
        return Err(config_err(format!("{path}.label"), "label is empty"));
    }
    let mut graspable_from = Vec::new();
    for (i, g) in o.graspable_from.iter().enumerate() {
        let g = Grasp::from_name(g)
            .ok_or_else(|| config_err(format!("{path}.graspable_from[{i}]"), format!("`{g}` is not top or side")))?;
        if !graspable_from.contains(&g) {
            graspable_from.push(g);
        }
    }
    if !o.movable && !graspable_from.is_empty() {
        return Err(config_err(format!("{path}.graspable_from"), "an immovable object cannot be graspable"));
    }
    let container = match &o.container {
        Some(c) => {
            if !(c.spill_tilt_deg.is_finite() && c.spill_tilt_deg > 0.0) {
                return Err(config_err(format!("{path}.container.spill_tilt_deg"), "must be positive"));
            }
            Some(Container { contents: c.contents.clone(), spill_tilt_limit: c.spill_tilt_deg.to_radians() })
        }
        None => None,
    };
    Ok(SceneObject {
        label: o.label.clone(),
        shape: shape_from(&o.shape, &format!("{path}.shape"))?,
        pose: pose_from(&o.pose, &format!("{path}.pose"))?,
        movable: o.movable,
        graspable_from,
        container,
    })
}

/// Parses a TOML scene document.
pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let f: SceneFile = toml::from_str(text).map_err(|e| {
        let span = e.span().map(|s| format!("byte {}", s.start)).unwrap_or_else(|| "document".into());
        config_err(span, e.message().to_string())
    })?;

    let workspace = Workspace { min: Vector3::from(f.workspace.min), max: Vector3::from(f.workspace.max) };
    if (0..3).any(|i| !(workspace.min[i] < workspace.max[i])) {
        return Err(config_err("workspace", "min must be below max on every axis"));
    }
    let robot_base = pose_from(&f.robot.pose, "robot.pose")?;
    if !workspace.contains(&robot_base.translation.vector) {
        return Err(config_err("robot.pose", "robot base lies outside the workspace"));
    }
    if f.robot.home_q_deg.len() != DOF {
        return Err(config_err("robot.home_q_deg", format!("expected {DOF} angles, found {}", f.robot.home_q_deg.len())));
    }
    let home_q = JointConfig::from_fn(|i, _| f.robot.home_q_deg[i].to_radians());

    let mut seen = BTreeSet::new();
    let mut objects = Vec::with_capacity(f.objects.len());
    for (i, o) in f.objects.iter().enumerate() {
        let path = format!("objects[{i}]");
        let obj = object_from(o, &path)?;
        if !seen.insert(obj.label.clone()) {
            return Err(config_err(format!("{path}.label"), format!("duplicate label '{}'", obj.label)));
        }
        objects.push(obj);
    }

    let mut loc_seen = BTreeSet::new();
    let mut locations = Vec::with_capacity(f.locations.len());
    for (i, l) in f.locations.iter().enumerate() {
        let path = format!("locations[{i}]");
        if !loc_seen.insert(l.label.clone()) {
            return Err(config_err(format!("{path}.label"), format!("duplicate location '{}'", l.label)));
        }
        let is_object = seen.contains(&l.label);
        let kind = match (&l.shape, &l.pose, l.symbolic) {
            (None, None, false) if is_object => LocationKind::Object,
            (None, None, false) => {
                return Err(config_err(
                    format!("{path}.label"),
                    format!("'{}' is not an object; give it shape and pose or mark it symbolic", l.label),
                ))
            }
            (None, None, true) if is_object => {
                return Err(config_err(format!("{path}.symbolic"), "an object location cannot be symbolic"))
            }
            (None, None, true) => LocationKind::Symbolic,
            (Some(shape), Some(pose), false) => {
                if is_object {
                    return Err(config_err(format!("{path}.label"), format!("'{}' is already an object", l.label)));
                }
                LocationKind::Body(SceneObject {
                    label: l.label.clone(),
                    shape: shape_from(shape, &format!("{path}.shape"))?,
                    pose: pose_from(pose, &format!("{path}.pose"))?,
                    movable: false,
                    graspable_from: Vec::new(),
                    container: None,
                })
            }
            _ => return Err(config_err(path, "a location needs both shape and pose, or neither")),
        };
        locations.push(Location { label: l.label.clone(), kind });
    }

    Ok(Scene {
        name: f.name.unwrap_or_else(|| "scene".into()),
        description: f.description,
        objects,
        locations,
        workspace,
        robot_base,
        home_q,
        arm_file: f.robot.arm,
    })
}

pub fn load_scene_file(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
    load_scene(&text)
}

/// Signed distance from a world point to an object at `pose`.
pub fn signed_distance_at(point: &Vector3<f64>, shape: &Shape, pose: &Pose) -> f64 {
    let local = pose.inverse_transform_point(&Point3::from(*point)).coords;
    shape.local_distance(&local)
}

pub fn signed_distance(point: &Vector3<f64>, obj: &SceneObject) -> f64 {
    signed_distance_at(point, &obj.shape, &obj.pose)
}

/// Outward unit normal (distance gradient) by central differences.
pub fn distance_gradient(point: &Vector3<f64>, shape: &Shape, pose: &Pose) -> Vector3<f64> {
    const H: f64 = 1e-6;
    let mut g = Vector3::zeros();
    for i in 0..3 {
        let mut a = *point;
        let mut b = *point;
        a[i] += H;
        b[i] -= H;
        g[i] = (signed_distance_at(&a, shape, pose) - signed_distance_at(&b, shape, pose)) / (2.0 * H);
    }
    let n = g.norm();
    if n > 1e-12 {
        g / n
    } else {
        (point - pose.translation.vector).try_normalize(1e-12).unwrap_or_else(Vector3::z)
    }
}

/// 122 Fibonacci-sphere directions plus the six axis directions.
pub fn sample_directions() -> Vec<Vector3<f64>> {
    const N: usize = 122;
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(N + 6);
    for i in 0..N {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / N as f64;
        let r = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        out.push(Vector3::new(r * th.cos(), r * th.sin(), z));
    }
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        out.push(e);
        out.push(-e);
    }
    out
}

/// Approximate minimum distance between two primitives: the surface of the
/// smaller one is sampled at 128 points and measured against the larger.
pub fn primitive_distance(a: (&Shape, &Pose), b: (&Shape, &Pose)) -> f64 {
    let (small, big) = if a.0.bounding_radius() <= b.0.bounding_radius() { (a, b) } else { (b, a) };
    let centre = small.1.translation.vector;
    let mut best = signed_distance_at(&centre, big.0, big.1);
    for d in sample_directions() {
        let p = small.1 * Point3::from(small.0.radial_surface_point(&d));
        best = best.min(signed_distance_at(&p.coords, big.0, big.1));
    }
    best
}

/// Gripper state.
#[derive(Debug, Clone, PartialEq)]
pub struct Gripper {
    pub closed: bool,
    pub contact_count: u32,
    pub attached: Option<String>,
    /// Pose of the attached object in the tool frame.
    pub grasp_transform: Option<Pose>,
}

impl Default for Gripper {
    fn default() -> Self {
        Self { closed: false, contact_count: 0, attached: None, grasp_transform: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub scene: Arc<Scene>,
    pub object_poses: BTreeMap<String, Pose>,
    pub gripper: Gripper,
    pub arm_q: JointConfig,
    pub sim_time: f64,
    pub spilled: BTreeSet<String>,
}

impl WorldState {
    pub fn new(scene: Arc<Scene>) -> Self {
        let object_poses = scene.objects.iter().map(|o| (o.label.clone(), o.pose)).collect();
        let arm_q = scene.home_q;
        Self { scene, object_poses, gripper: Gripper::default(), arm_q, sim_time: 0.0, spilled: BTreeSet::new() }
    }

    /// Current pose of an object or location body.
    pub fn pose_of(&self, label: &str) -> Option<Pose> {
        if let Some(p) = self.object_poses.get(label) {
            return Some(*p);
        }
        self.scene.body(label).map(|b| b.pose)
    }

    pub fn shape_of(&self, label: &str) -> Option<Shape> {
        self.scene.body(label).map(|b| b.shape)
    }

    /// All physical bodies with their current poses.
    pub fn bodies(&self) -> impl Iterator<Item = (&str, &Shape, Pose)> {
        let objs = self.scene.objects.iter().map(|o| (o.label.as_str(), &o.shape, self.object_poses[&o.label]));
        let locs = self.scene.location_bodies().map(|b| (b.label.as_str(), &b.shape, b.pose));
        objs.chain(locs)
    }
}

/// Labels excluded from clearance queries, either for every arm body or
/// only for the gripper.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Exclusions {
    pub all: BTreeSet<String>,
    pub gripper_only: BTreeSet<String>,
}

impl Exclusions {
    pub fn excludes(&self, body: usize, label: &str) -> bool {
        self.all.contains(label) || (body == GRIPPER_BODY && self.gripper_only.contains(label))
    }
}

/// Closest pair between an arm sphere and a scene body.
#[derive(Debug, Clone, PartialEq)]
pub struct Clearance {
    pub distance: f64,
    pub label: String,
    pub body: usize,
    /// World centre of the arm sphere.
    pub point: Vector3<f64>,
}

fn better(d: f64, label: &str, best: &Option<Clearance>) -> bool {
    match best {
        None => true,
        Some(b) => d < b.distance || (d == b.distance && label < b.label.as_str()),
    }
}

/// Minimum over arm spheres and non-excluded bodies of surface distance.
pub fn clearance_with_fk(state: &WorldState, arm: &ArmModel, fk: &Fk, ex: &Exclusions) -> Result<Clearance, SceneError> {
    let mut best: Option<Clearance> = None;
    let bodies: Vec<_> = state.bodies().collect();
    for (body, centre, radius) in fk.body_spheres(arm) {
        for (label, shape, pose) in &bodies {
            if ex.excludes(body, label) {
                continue;
            }
            let d = signed_distance_at(&centre, shape, pose) - radius;
            if better(d, label, &best) {
                best = Some(Clearance { distance: d, label: label.to_string(), body, point: centre });
            }
        }
    }
    best.ok_or(SceneError::EmptyScene)
}

/// Smallest clearance between the arm at its current configuration and the
/// non-excluded scene bodies. Ties go to the lexicographically first label.
pub fn min_link_clearance(state: &WorldState, arm: &ArmModel, exclude: &BTreeSet<String>) -> Result<(f64, String), SceneError> {
    let fk = forward_kinematics(arm, &state.arm_q);
    let ex = Exclusions { all: exclude.clone(), gripper_only: BTreeSet::new() };
    clearance_with_fk(state, arm, &fk, &ex).map(|c| (c.distance, c.label))
}

/// Largest distance from the robot base to a workspace corner.
pub fn workspace_diameter_bound(scene: &Scene) -> f64 {
    let base = scene.robot_base.translation.vector;
    scene.workspace.corners().iter().map(|c| (c - base).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64, z: f64) -> Pose {
        Isometry3::translation(x, y, z)
    }

    #[test]
    fn analytic_distances() {
        let s = Shape::Sphere { radius: 0.05 };
        assert_eq!(signed_distance_at(&Vector3::zeros(), &s, &at(0.0, 0.0, 0.0)), -0.05);
        let b = Shape::Box { size: Vector3::new(1.0, 1.0, 1.0) };
        assert!((signed_distance_at(&Vector3::new(0.6, 0.0, 0.0), &b, &at(0.0, 0.0, 0.0)) - 0.1).abs() < 1e-15);
        assert!((signed_distance_at(&Vector3::new(0.1, 0.2, 0.0), &b, &at(0.0, 0.0, 0.0)) + 0.3).abs() < 1e-15);
        let c = Shape::Cylinder { radius: 0.1, height: 0.4 };
        assert!((signed_distance_at(&Vector3::new(0.0, 0.0, 0.3), &c, &at(0.0, 0.0, 0.0)) - 0.1).abs() < 1e-15);
        assert!((signed_distance_at(&Vector3::new(0.3, 0.0, 0.0), &c, &at(0.0, 0.0, 0.0)) - 0.2).abs() < 1e-15);
        let corner = signed_distance_at(&Vector3::new(0.13, 0.0, 0.24), &c, &at(0.0, 0.0, 0.0));
        assert!((corner - 0.05).abs() < 1e-12);
    }

    #[test]
    fn rotated_box() {
        let pose = Isometry3::from_parts(Translation3::new(1.0, 0.0, 0.0), UnitQuaternion::from_euler_angles(0.0, 0.0, PI / 2.0));
        let b = Shape::Box { size: Vector3::new(0.2, 1.0, 0.2) };
        assert!((signed_distance_at(&Vector3::new(1.6, 0.0, 0.0), &b, &pose) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn support_and_surface_points() {
        let c = Shape::Cylinder { radius: 0.035, height: 0.14 };
        assert!((c.extent_along(&Vector3::z()) - 0.07).abs() < 1e-15);
        assert!((c.extent_along(&Vector3::x()) - 0.035).abs() < 1e-15);
        for d in sample_directions() {
            let p = c.radial_surface_point(&d);
            assert!(c.local_distance(&p).abs() < 1e-12);
        }
        assert_eq!(sample_directions().len(), 128);
    }

    #[test]
    fn primitive_pair_distance() {
        let a = Shape::Sphere { radius: 0.04 };
        let table = Shape::Box { size: Vector3::new(0.5, 0.5, 0.05) };
        let d = primitive_distance((&a, &at(0.0, 0.0, 0.04 + 0.09)), (&table, &at(0.0, 0.0, -0.025)));
        assert!((d - 0.09).abs() < 1e-12);
    }

    #[test]
    fn workspace_bound() {
        let ws = Workspace { min: Vector3::new(-1.0, -1.0, -1.0), max: Vector3::new(1.0, 1.0, 1.0) };
        let mut scene = minimal_scene();
        scene.workspace = ws;
        assert!((workspace_diameter_bound(&scene) - 3f64.sqrt()).abs() < 1e-15);
        scene.robot_base = at(-1.0, -1.0, -1.0);
        assert!((workspace_diameter_bound(&scene) - 12f64.sqrt()).abs() < 1e-15);
    }

    fn minimal_scene() -> Scene {
        load_scene(
            r#"
[workspace]
min = [-1, -1, -1]
max = [1, 1, 1]
[robot]
pose = { xyz = [0, 0, 0] }
home_q_deg = [0, 30, 0, -60, 0, 60, 0]
[[objects]]
label = "white table"
shape = { kind = "box", dims = [0.5, 0.9, 0.05] }
pose = { xyz = [0.55, 0, -0.025] }
"#,
        )
        .unwrap()
    }

    #[test]
    fn loads_minimal_scene() {
        let s = minimal_scene();
        assert_eq!(s.objects.len(), 1);
        assert!(s.locations.is_empty());
        assert!((s.home_q[1] - 30f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn config_errors_name_the_key() {
        let base = "[workspace]\nmin=[-1,-1,-1]\nmax=[1,1,1]\n[robot]\npose={xyz=[0,0,0]}\nhome_q_deg=[0,0,0,0,0,0,0]\n";
        let dup = format!("{base}[[objects]]\nlabel='a'\nshape={{kind='sphere',dims=[0.1]}}\npose={{xyz=[0.5,0,0]}}\n[[objects]]\nlabel='a'\nshape={{kind='sphere',dims=[0.1]}}\npose={{xyz=[0.5,0,0]}}\n");
        match load_scene(&dup) {
            Err(SceneError::Config { path, .. }) => assert_eq!(path, "objects[1].label"),
            other => panic!("{other:?}"),
        }
        let neg = format!("{base}[[objects]]\nlabel='a'\nshape={{kind='box',dims=[0.1,-1,0.1]}}\npose={{xyz=[0.5,0,0]}}\n");
        match load_scene(&neg) {
            Err(SceneError::Config { path, .. }) => assert_eq!(path, "objects[0].shape.dims"),
            other => panic!("{other:?}"),
        }
        let loc = format!("{base}[[locations]]\nlabel='nowhere'\n");
        assert!(matches!(load_scene(&loc), Err(SceneError::Config { .. })));
        let sym = format!("{base}[[locations]]\nlabel='clinical room'\nsymbolic=true\n");
        assert_eq!(load_scene(&sym).unwrap().locations[0].kind, LocationKind::Symbolic);
    }

    #[test]
    fn clearance_ties_break_by_label() {
        let mut scene = minimal_scene();
        scene.objects.clear();
        for (label, y) in [("b", 0.3), ("a", -0.3)] {
            scene.objects.push(SceneObject {
                label: label.into(),
                shape: Shape::Sphere { radius: 0.05 },
                pose: at(0.0, y, 0.5),
                movable: false,
                graspable_from: vec![],
                container: None,
            });
        }
        let state = WorldState::new(Arc::new(scene));
        let arm = ArmModel::iiwa_like();
        let mut s = state.clone();
        s.arm_q = JointConfig::zeros();
        let (d, label) = min_link_clearance(&s, &arm, &BTreeSet::new()).unwrap();
        assert_eq!(label, "a");
        assert!(d > 0.0);
        let all: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(min_link_clearance(&s, &arm, &all), Err(SceneError::EmptyScene));
    }
}
