//! Docking motion stack: differential-drive kinematics, connector alignment
//! and approach control laws, grid path planning and path following.
//!
//! All command generators are pure functions of the supplied state. The
//! alignment law drives the goal-frame lateral offset (or, for side-face
//! docks, the longitudinal offset) and the heading to zero:
//!
//! ```text
//! [v, w] = [[sin th', 0], [0, 1]]^-1 · K · [-y', -th']
//! ```
//!
//! which is singular near `th' = 0`; inside the singular band the command
//! saturates and a fixed rotational nudge recovers controllability.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use crate::math::{scalar, wrap_angle, Pose2, Vec2};
use crate::scheduler::{GridCell, GridMap};
use crate::topology::{Face, ModuleId};

/// Body-frame velocity command: linear along `+x`, angular about `z`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCommand {
    pub const STOP: Self = Self { v: 0.0, omega: 0.0 };

    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn clamped(self, limits: Limits) -> Self {
        Self {
            v: self.v.clamp(-limits.v_max, limits.v_max),
            omega: self.omega.clamp(-limits.omega_max, limits.omega_max),
        }
    }
}

/// Saturation limits for a command generator.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Limits {
    pub v_max: f64,
    pub omega_max: f64,
}

/// Mover pose expressed in the frame of its goal (docked) pose.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalFramePose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl GoalFramePose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn from_world(pose: Pose2, goal: Pose2) -> Self {
        let rel = pose.in_frame(goal);
        Self::new(rel.x, rel.y, rel.theta)
    }
}

/// Which goal-frame translation coordinate the adjustment controls.
///
/// TOP/BOTTOM docks approach along the mover's own drive axis, so the
/// off-axis coordinate `y'` is regulated (lateral case). LEFT/RIGHT docks
/// approach sideways, so `x'` is regulated instead (longitudinal case).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceClass {
    Longitudinal,
    Lateral,
}

impl FaceClass {
    pub fn of(face: Face) -> Self {
        if face.is_side() {
            FaceClass::Longitudinal
        } else {
            FaceClass::Lateral
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjustParams {
    /// Positive-definite 2x2 gain, row-major.
    pub k: [[f64; 2]; 2],
    /// Singular band on |sin th'| (lateral) resp. |cos th'| (longitudinal).
    pub eps_singular: f64,
    /// Fixed rotation rate injected inside the singular band.
    pub nudge_omega: f64,
    /// No nudge once the regulated offset is below this.
    pub align_tol: f64,
    pub limits: Limits,
}

/// Alignment command plus whether the singular band was hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjustOutput {
    pub command: VelocityCommand,
    pub singular: bool,
}

/// Connector-alignment control law. Regulates `(y', th')` (lateral) or
/// `(x', th')` (longitudinal) to zero; the remaining coordinate is free.
pub fn pose_adjust_command(gp: GoalFramePose, class: FaceClass, p: &AdjustParams) -> AdjustOutput {
    let (primary, trig) = match class {
        FaceClass::Lateral => (gp.y, scalar::sin(gp.theta)),
        FaceClass::Longitudinal => (gp.x, scalar::cos(gp.theta)),
    };
    let err = [-primary, -gp.theta];
    let ke = [
        p.k[0][0] * err[0] + p.k[0][1] * err[1],
        p.k[1][0] * err[0] + p.k[1][1] * err[1],
    ];

    if scalar::abs(trig) >= p.eps_singular {
        return AdjustOutput {
            command: VelocityCommand::new(ke[0] / trig, ke[1]).clamped(p.limits),
            singular: false,
        };
    }

    let v = if scalar::abs(trig) > 1e-12 {
        ke[0] / trig
    } else {
        0.0
    };
    let omega = if scalar::abs(primary) > p.align_tol {
        // Rotate back into the controllable regime: away from th' = 0 for the
        // lateral case, toward th' = 0 for the longitudinal one.
        let sign = if gp.theta >= 0.0 { 1.0 } else { -1.0 };
        match class {
            FaceClass::Lateral => p.nudge_omega * sign,
            FaceClass::Longitudinal => -p.nudge_omega * sign,
        }
    } else {
        ke[1]
    };
    AdjustOutput {
        command: VelocityCommand::new(v, omega).clamped(p.limits),
        singular: true,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproachParams {
    pub v_dock: f64,
    pub heading_gain: f64,
    /// Abort once the off-axis offset exceeds this band (meters).
    pub lateral_band: f64,
    pub omega_max: f64,
}

/// Straight-line docking approach with heading hold. `direction` is `+1.0`
/// when the mover's TOP leads (drive forward) and `-1.0` when its BOTTOM
/// leads (reverse). Commands keep coming past contact; the caller stops on
/// dock detection. Alignment loss beyond the lateral band aborts so pose
/// adjustment can rerun.
pub fn approach_command(
    gp: GoalFramePose,
    direction: f64,
    p: &ApproachParams,
) -> Result<VelocityCommand, MotionError> {
    if scalar::abs(gp.y) > p.lateral_band {
        return Err(MotionError::AlignmentLost);
    }
    let omega = (-p.heading_gain * gp.theta).clamp(-p.omega_max, p.omega_max);
    Ok(VelocityCommand::new(direction * p.v_dock, omega))
}

/// Explicit-Euler step of the differential-drive kinematics
/// `xdot = v cos th, ydot = v sin th, thdot = w`.
pub fn diff_drive_step(pose: Pose2, cmd: VelocityCommand, dt: f64) -> Pose2 {
    Pose2::new(
        pose.x + cmd.v * scalar::cos(pose.theta) * dt,
        pose.y + cmd.v * scalar::sin(pose.theta) * dt,
        wrap_angle(pose.theta + cmd.omega * dt),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotionError {
    /// No collision-free path for this module.
    NoPath(ModuleId),
    StartBlocked(ModuleId),
    GoalBlocked(ModuleId),
    /// Approach drifted outside the recoverable band.
    AlignmentLost,
}

impl fmt::Display for MotionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionError::NoPath(id) => write!(f, "no collision-free path for module {id}"),
            MotionError::StartBlocked(id) => write!(f, "start cell of module {id} is blocked"),
            MotionError::GoalBlocked(id) => write!(f, "goal cell of module {id} is blocked"),
            MotionError::AlignmentLost => write!(f, "connector alignment lost during approach"),
        }
    }
}

impl core::error::Error for MotionError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathRequest {
    pub id: ModuleId,
    pub start: GridCell,
    pub goal: GridCell,
}

/// Time-indexed grid path: `cells[t]` is the cell occupied at step `t`;
/// consecutive entries are 4-neighbors or equal (a Wait step). The module
/// parks on the final cell afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPath {
    pub id: ModuleId,
    pub cells: Vec<GridCell>,
}

impl GridPath {
    pub fn len_steps(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    /// Cell occupied at step `t` (parked on the last cell forever).
    pub fn cell_at(&self, t: usize) -> GridCell {
        self.cells[t.min(self.cells.len() - 1)]
    }

    /// World waypoints of the path cells.
    pub fn waypoints(&self, grid: &GridMap) -> Vec<Vec2> {
        self.cells.iter().map(|&c| grid.center_of(c)).collect()
    }
}

struct Reservations {
    vertex: BTreeSet<(u32, GridCell)>,
    edge: BTreeSet<(u32, GridCell, GridCell)>,
    parked: BTreeMap<GridCell, u32>,
}

impl Reservations {
    fn vertex_blocked(&self, t: u32, c: GridCell) -> bool {
        self.vertex.contains(&(t, c)) || self.parked.get(&c).is_some_and(|&from| t >= from)
    }

    fn swap_blocked(&self, t: u32, from: GridCell, to: GridCell) -> bool {
        self.edge.contains(&(t, to, from))
    }

    fn latest_transit(&self, c: GridCell) -> Option<u32> {
        self.vertex
            .iter()
            .filter(|&&(_, vc)| vc == c)
            .map(|&(t, _)| t)
            .max()
    }
}

/// Prioritized multi-module planning on the 4-connected grid.
///
/// Requests are planned in slice order (highest priority first) with
/// time-extended A*; lower-priority modules treat earlier space-time cells as
/// obstacles and insert Wait steps on conflict. Returned plans are mutually
/// conflict-free in space-time, including the parking of finished modules.
pub fn plan_paths(grid: &GridMap, requests: &[PathRequest]) -> Result<Vec<GridPath>, MotionError> {
    let mut reservations = Reservations {
        vertex: BTreeSet::new(),
        edge: BTreeSet::new(),
        parked: BTreeMap::new(),
    };
    let t_max = (grid.area() * 2 + 64) as u32;
    let mut paths = Vec::with_capacity(requests.len());

    for req in requests {
        if !grid.is_free(req.start) {
            return Err(MotionError::StartBlocked(req.id));
        }
        if !grid.is_free(req.goal) {
            return Err(MotionError::GoalBlocked(req.id));
        }
        if reservations.parked.contains_key(&req.goal) {
            return Err(MotionError::NoPath(req.id));
        }
        let earliest_arrival = reservations.latest_transit(req.goal).map_or(0, |t| t + 1);

        let cells = astar_space_time(grid, req, &reservations, earliest_arrival, t_max)
            .ok_or(MotionError::NoPath(req.id))?;

        for (t, &c) in cells.iter().enumerate() {
            reservations.vertex.insert((t as u32, c));
            if t + 1 < cells.len() && cells[t + 1] != c {
                reservations.edge.insert((t as u32, c, cells[t + 1]));
            }
        }
        reservations
            .parked
            .insert(req.goal, (cells.len() - 1) as u32);
        paths.push(GridPath { id: req.id, cells });
    }
    Ok(paths)
}

fn astar_space_time(
    grid: &GridMap,
    req: &PathRequest,
    reservations: &Reservations,
    earliest_arrival: u32,
    t_max: u32,
) -> Option<Vec<GridCell>> {
    type State = (GridCell, u32);
    /// Heap key: (f, h, g, cell x, cell y) for a fully ordered, deterministic
    /// expansion order.
    type OpenEntry = Reverse<(u32, u32, u32, i32, i32)>;
    let start: State = (req.start, 0);
    if reservations.vertex_blocked(0, req.start) {
        return None;
    }

    let h = |c: GridCell| c.manhattan(req.goal);
    let mut open: BinaryHeap<OpenEntry> = BinaryHeap::new();
    let mut parent: BTreeMap<State, State> = BTreeMap::new();
    let mut closed: BTreeSet<State> = BTreeSet::new();
    open.push(Reverse((
        h(req.start),
        h(req.start),
        0,
        req.start.x,
        req.start.y,
    )));
    closed.insert(start);

    // `closed` doubles as the visited set; states enter it when pushed.
    while let Some(Reverse((_, _, t, cx, cy))) = open.pop() {
        let cell = GridCell::new(cx, cy);
        if cell == req.goal && t >= earliest_arrival {
            // Parking here must stay conflict-free; transits are bounded by
            // `earliest_arrival`, so arrival time suffices.
            let mut out = Vec::with_capacity(t as usize + 1);
            let mut cur = (cell, t);
            out.push(cur.0);
            while let Some(&prev) = parent.get(&cur) {
                out.push(prev.0);
                cur = prev;
            }
            out.reverse();
            return Some(out);
        }
        if t + 1 > t_max {
            continue;
        }
        let mut candidates = cell.neighbors4().to_vec();
        candidates.push(cell); // Wait.
        for next in candidates {
            if next != cell && !grid.is_free(next) {
                continue;
            }
            if next == cell && !grid.is_free(cell) {
                continue;
            }
            if reservations.vertex_blocked(t + 1, next) {
                continue;
            }
            if next != cell && reservations.swap_blocked(t, cell, next) {
                continue;
            }
            let state = (next, t + 1);
            if closed.insert(state) {
                parent.insert(state, (cell, t));
                let g = t + 1;
                let f = g + h(next);
                open.push(Reverse((f, h(next), g, next.x, next.y)));
            }
        }
    }
    None
}

/// A space-time conflict between two planned paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathConflict {
    /// Both modules occupy `cell` at step `t`.
    Vertex { a: ModuleId, b: ModuleId, t: usize },
    /// The modules swap cells between steps `t` and `t + 1`.
    Swap { a: ModuleId, b: ModuleId, t: usize },
}

/// Exhaustive pairwise space-time check over whole plans, with finished
/// modules parked on their goals. Independent of the planner's bookkeeping.
pub fn space_time_conflicts(paths: &[GridPath]) -> Vec<PathConflict> {
    let mut out = Vec::new();
    let horizon = paths.iter().map(|p| p.cells.len()).max().unwrap_or(0);
    for i in 0..paths.len() {
        for j in (i + 1)..paths.len() {
            let (a, b) = (&paths[i], &paths[j]);
            for t in 0..horizon {
                if a.cell_at(t) == b.cell_at(t) {
                    out.push(PathConflict::Vertex {
                        a: a.id,
                        b: b.id,
                        t,
                    });
                }
                if t + 1 < horizon
                    && a.cell_at(t + 1) == b.cell_at(t)
                    && b.cell_at(t + 1) == a.cell_at(t)
                    && a.cell_at(t) != a.cell_at(t + 1)
                {
                    out.push(PathConflict::Swap {
                        a: a.id,
                        b: b.id,
                        t,
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FollowParams {
    pub capture_radius: f64,
    /// Turn in place while the heading error exceeds this.
    pub turn_threshold: f64,
    pub heading_gain: f64,
    pub limits: Limits,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FollowOutput {
    pub command: VelocityCommand,
    /// Within the capture radius of the addressed waypoint.
    pub captured: bool,
}

/// Waypoint-pursuit path following: steer toward `waypoints[target_idx]`,
/// turning in place at sharp heading errors. The caller advances the index on
/// capture; the path is complete when the final waypoint is captured.
pub fn follow_path_command(
    pose: Pose2,
    waypoints: &[Vec2],
    target_idx: usize,
    p: &FollowParams,
) -> FollowOutput {
    let idx = target_idx.min(waypoints.len().saturating_sub(1));
    let wp = waypoints[idx];
    let dv = wp - pose.position();
    let dist = dv.norm();
    if dist <= p.capture_radius {
        return FollowOutput {
            command: VelocityCommand::STOP,
            captured: true,
        };
    }
    let herr = wrap_angle(dv.angle() - pose.theta);
    let omega = (p.heading_gain * herr).clamp(-p.limits.omega_max, p.limits.omega_max);
    let v = if scalar::abs(herr) > p.turn_threshold {
        0.0
    } else {
        // Creep into the final waypoint so tight capture radii work.
        let slowdown = if idx + 1 == waypoints.len() {
            (dist / 0.05).clamp(0.2, 1.0)
        } else {
            1.0
        };
        p.limits.v_max * scalar::cos(herr) * slowdown
    };
    FollowOutput {
        command: VelocityCommand::new(v, omega),
        captured: false,
    }
}
