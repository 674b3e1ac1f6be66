//! Deterministic fixed-timestep world.
//!
//! The world advances at 40 Hz. Free modules integrate differential-drive
//! commands; docked or carried modules ride rigidly on their leader via
//! offsets frozen at attach time, so relative poses inside a cluster are
//! bit-constant. Docking snaps the mover onto the exact mating pose once the
//! faces are inside the magnetic area of acceptance.

mod runner;

pub use runner::{run_scenario, RunSetupError};

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::layout::{relative_pose, MODULE_WIDTH};
use crate::math::{scalar, wrap_angle, Pose2, Vec2};
use crate::motion::diff_drive_step;
use crate::motion::VelocityCommand;
use crate::scheduler::AssemblyAction;
use crate::topology::{Connection, Face, ModuleId};

/// Fixed integration step (40 Hz control rate).
pub const SIM_DT: f64 = 1.0 / 40.0;

/// One recorded docked pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Attachment {
    pub a: ModuleId,
    pub face_a: Face,
    pub b: ModuleId,
    pub face_b: Face,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    UnknownModule(ModuleId),
    /// Commands may only address free modules.
    CommandToDocked(ModuleId),
    FaceInUse(ModuleId, Face),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::UnknownModule(id) => write!(f, "unknown module {id}"),
            SimError::CommandToDocked(id) => {
                write!(f, "command addressed to docked or carried module {id}")
            }
            SimError::FaceInUse(id, face) => write!(f, "connector {face} of module {id} in use"),
        }
    }
}

impl core::error::Error for SimError {}

/// Poses, attachments, carried-module flags and the simulation clock.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WorldState {
    poses: BTreeMap<ModuleId, Pose2>,
    attachments: Vec<Attachment>,
    /// cargo -> helper currently lifting it.
    carried: BTreeMap<ModuleId, ModuleId>,
    /// follower -> (leader, offset in the leader frame), frozen at attach.
    rigid_offsets: BTreeMap<ModuleId, (ModuleId, Pose2)>,
    /// Pairs currently executing a docking approach; exempt from collision
    /// reports (contact while pushing is intended).
    docking_pairs: BTreeSet<(ModuleId, ModuleId)>,
    /// The stationary root; its attachment component never moves.
    anchor: Option<ModuleId>,
    tick: u64,
}

impl WorldState {
    pub fn new(poses: BTreeMap<ModuleId, Pose2>) -> Self {
        Self {
            poses,
            ..Self::default()
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * SIM_DT
    }

    pub fn pose(&self, id: ModuleId) -> Option<Pose2> {
        self.poses.get(&id).copied()
    }

    pub fn poses(&self) -> &BTreeMap<ModuleId, Pose2> {
        &self.poses
    }

    pub fn attachments(&self) -> &[Attachment] {
        &self.attachments
    }

    pub fn carried(&self) -> &BTreeMap<ModuleId, ModuleId> {
        &self.carried
    }

    pub fn set_anchor(&mut self, root: ModuleId) {
        self.anchor = Some(root);
    }

    pub fn anchor(&self) -> Option<ModuleId> {
        self.anchor
    }

    pub fn face_in_use(&self, id: ModuleId, face: Face) -> bool {
        self.attachments
            .iter()
            .any(|a| (a.a == id && a.face_a == face) || (a.b == id && a.face_b == face))
    }

    /// Modules rigidly connected to `id` through attachments (incl. `id`).
    pub fn component_of(&self, id: ModuleId) -> BTreeSet<ModuleId> {
        let mut seen = BTreeSet::from([id]);
        let mut queue = VecDeque::from([id]);
        while let Some(v) = queue.pop_front() {
            for att in &self.attachments {
                for other in [att.a, att.b] {
                    if (att.a == v || att.b == v) && seen.insert(other) {
                        queue.push_back(other);
                    }
                }
            }
        }
        seen
    }

    pub fn is_anchored(&self, id: ModuleId) -> bool {
        self.anchor
            .is_some_and(|root| self.component_of(id).contains(&root))
    }

    fn is_follower(&self, id: ModuleId) -> bool {
        self.rigid_offsets.contains_key(&id)
    }

    /// Slave `follower` rigidly to `leader` at their current relative pose.
    pub fn set_follower(&mut self, follower: ModuleId, leader: ModuleId) {
        let offset = self.poses[&follower].in_frame(self.poses[&leader]);
        self.rigid_offsets.insert(follower, (leader, offset));
    }

    pub fn release_follower(&mut self, follower: ModuleId) {
        self.rigid_offsets.remove(&follower);
    }

    pub fn set_carried(&mut self, cargo: ModuleId, helper: ModuleId) {
        self.carried.insert(cargo, helper);
    }

    pub fn clear_carried(&mut self, cargo: ModuleId) {
        self.carried.remove(&cargo);
    }

    pub fn mark_docking_pair(&mut self, a: ModuleId, b: ModuleId) {
        self.docking_pairs.insert((a.min(b), a.max(b)));
    }

    pub fn clear_docking_pair(&mut self, a: ModuleId, b: ModuleId) {
        self.docking_pairs.remove(&(a.min(b), a.max(b)));
    }

    /// Record an attachment; both faces must be free.
    pub fn attach(
        &mut self,
        a: ModuleId,
        face_a: Face,
        b: ModuleId,
        face_b: Face,
    ) -> Result<(), SimError> {
        if self.face_in_use(a, face_a) {
            return Err(SimError::FaceInUse(a, face_a));
        }
        if self.face_in_use(b, face_b) {
            return Err(SimError::FaceInUse(b, face_b));
        }
        self.attachments.push(Attachment {
            a,
            face_a,
            b,
            face_b,
        });
        Ok(())
    }

    pub fn detach(&mut self, a: ModuleId, b: ModuleId) {
        self.attachments
            .retain(|att| !((att.a == a && att.b == b) || (att.a == b && att.b == a)));
    }

    pub fn set_pose(&mut self, id: ModuleId, pose: Pose2) {
        self.poses.insert(id, pose);
        self.refresh_followers(id);
    }

    fn refresh_followers(&mut self, leader: ModuleId) {
        let leader_pose = self.poses[&leader];
        let followers: Vec<(ModuleId, Pose2)> = self
            .rigid_offsets
            .iter()
            .filter(|(_, &(l, _))| l == leader)
            .map(|(&f, &(_, off))| (f, off))
            .collect();
        for (f, off) in followers {
            self.poses.insert(f, leader_pose.compose(off));
        }
    }

    pub fn advance_clock(&mut self) {
        self.tick += 1;
    }
}

/// Advance every commanded free module by one integration step; carried and
/// attached followers move rigidly with their leader, and the clock ticks.
pub fn step_world(
    world: &mut WorldState,
    commands: &BTreeMap<ModuleId, VelocityCommand>,
    dt: f64,
) -> Result<(), SimError> {
    for (&id, &cmd) in commands {
        if world.pose(id).is_none() {
            return Err(SimError::UnknownModule(id));
        }
        if world.is_anchored(id) || world.carried.contains_key(&id) || world.is_follower(id) {
            return Err(SimError::CommandToDocked(id));
        }
        let next = diff_drive_step(world.poses[&id], cmd, dt);
        world.set_pose(id, next);
    }
    world.advance_clock();
    Ok(())
}

/// Docking acceptance bounds (closed intervals).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DockTolerances {
    pub normal_m: f64,
    pub lateral_m: f64,
    pub angle_rad: f64,
}

impl Default for DockTolerances {
    fn default() -> Self {
        Self {
            normal_m: 0.004,
            lateral_m: 0.007,
            angle_rad: 0.1,
        }
    }
}

/// Outcome of a docking attempt; on success the world was mutated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DockOutcome {
    Docked,
    /// Outside the area of acceptance.
    Rejected {
        normal_gap: f64,
        lateral_offset: f64,
        angle_error: f64,
    },
}

/// Attempt the docking action: succeed iff the mover's face lies inside the
/// target face's area of acceptance. On success the mover (plus anything
/// riding on it) snaps to the exact mating pose and the edge is recorded.
pub fn try_dock(
    world: &mut WorldState,
    action: &AssemblyAction,
    tol: &DockTolerances,
) -> Result<DockOutcome, SimError> {
    let mover_pose = world
        .pose(action.mover)
        .ok_or(SimError::UnknownModule(action.mover))?;
    let target_pose = world
        .pose(action.target)
        .ok_or(SimError::UnknownModule(action.target))?;
    if world.face_in_use(action.mover, action.mover_face) {
        return Err(SimError::FaceInUse(action.mover, action.mover_face));
    }
    if world.face_in_use(action.target, action.target_face) {
        return Err(SimError::FaceInUse(action.target, action.target_face));
    }

    let half = MODULE_WIDTH / 2.0;
    let n_t = Vec2::from_angle(target_pose.theta + action.target_face.angle());
    let n_m = Vec2::from_angle(mover_pose.theta + action.mover_face.angle());
    let face_t = target_pose.position() + n_t * half;
    let face_m = mover_pose.position() + n_m * half;
    let delta = face_m - face_t;
    let normal_gap = delta.dot(n_t);
    let lateral_offset = scalar::abs(delta.dot(Vec2::new(-n_t.y, n_t.x)));
    let angle_error = scalar::abs(wrap_angle(
        n_m.angle() - n_t.angle() - core::f64::consts::PI,
    ));

    if scalar::abs(normal_gap) > tol.normal_m
        || lateral_offset > tol.lateral_m
        || angle_error > tol.angle_rad
    {
        return Ok(DockOutcome::Rejected {
            normal_gap,
            lateral_offset,
            angle_error,
        });
    }

    let conn = Connection {
        face: action.target_face,
        face2con: action.mover_face,
        orientation: None,
    };
    let mate = target_pose
        .compose(relative_pose(&conn).expect("planar mate pose"))
        .with_wrapped_angle();
    world.set_pose(action.mover, mate);
    world.attach(
        action.mover,
        action.mover_face,
        action.target,
        action.target_face,
    )?;
    Ok(DockOutcome::Docked)
}

/// Oriented-square overlap depth via separating axes; `None` when separated.
pub(crate) fn square_overlap(a: Pose2, b: Pose2, half: f64) -> Option<f64> {
    let d = b.position() - a.position();
    let axes = [
        Vec2::from_angle(a.theta),
        Vec2::from_angle(a.theta + core::f64::consts::FRAC_PI_2),
        Vec2::from_angle(b.theta),
        Vec2::from_angle(b.theta + core::f64::consts::FRAC_PI_2),
    ];
    let mut min_pen = f64::INFINITY;
    for axis in axes {
        let ext_a = half * (scalar::abs(axis.dot(axes[0])) + scalar::abs(axis.dot(axes[1])));
        let ext_b = half * (scalar::abs(axis.dot(axes[2])) + scalar::abs(axis.dot(axes[3])));
        let pen = ext_a + ext_b - scalar::abs(d.dot(axis));
        if pen <= 0.0 {
            return None;
        }
        min_pen = min_pen.min(pen);
    }
    Some(min_pen)
}

/// Pairs of modules whose bodies overlap beyond `contact_tol`, skipping
/// rigidly connected modules and active docking partners.
pub fn detect_collisions(world: &WorldState, contact_tol: f64) -> Vec<(ModuleId, ModuleId)> {
    let ids: Vec<ModuleId> = world.poses.keys().copied().collect();
    let mut out = Vec::new();
    for i in 0..ids.len() {
        let comp = world.component_of(ids[i]);
        for j in (i + 1)..ids.len() {
            let (a, b) = (ids[i], ids[j]);
            if comp.contains(&b) || world.docking_pairs.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            if let Some(pen) = square_overlap(world.poses[&a], world.poses[&b], MODULE_WIDTH / 2.0)
            {
                if pen > contact_tol {
                    out.push((a, b));
                }
            }
        }
    }
    out
}

/// Timestamped log entry.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub t: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "event", content = "detail", rename_all = "snake_case")
)]
pub enum EventKind {
    WaveStart {
        wave: usize,
    },
    NavigationDone {
        module: ModuleId,
    },
    AdjustDone {
        module: ModuleId,
    },
    ApproachStart {
        module: ModuleId,
    },
    Docked {
        mover: ModuleId,
        mover_face: Face,
        target: ModuleId,
        target_face: Face,
    },
    DockAborted {
        module: ModuleId,
        attempt: u32,
    },
    HelperDocked {
        helper: ModuleId,
        cargo: ModuleId,
    },
    Lifted {
        helper: ModuleId,
        cargo: ModuleId,
    },
    Placed {
        helper: ModuleId,
        cargo: ModuleId,
    },
    HelperUndocked {
        helper: ModuleId,
        cargo: ModuleId,
    },
    RetreatDone {
        helper: ModuleId,
    },
    Collision {
        a: ModuleId,
        b: ModuleId,
    },
    WaveDone {
        wave: usize,
    },
    RunFailed {
        reason: String,
    },
    RunDone {
        success: bool,
    },
}

/// One trajectory row: pose of `module` at `tick`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub tick: u64,
    pub module: ModuleId,
    pub pose: Pose2,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub success: bool,
    pub makespan_s: f64,
    pub total_distance_m: f64,
    pub per_module_distance_m: BTreeMap<ModuleId, f64>,
    pub collision_count: usize,
    pub wave_timings_s: Vec<[f64; 2]>,
}

/// Everything a simulated run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub success: bool,
    pub failure: Option<String>,
    /// The executed wave schedule (helpers assigned).
    pub schedule: crate::scheduler::Schedule,
    pub world: WorldState,
    pub events: Vec<Event>,
    pub trajectory: Vec<TrajectorySample>,
    pub metrics: Metrics,
}
