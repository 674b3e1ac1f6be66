//! Schedule execution: waves under a completion barrier, each docking action
//! driven through navigation, pose adjustment and approach.
//!
//! Wave stages run sequentially for safety: first all free movers of the wave
//! (planned jointly), then the helper pipelines (each leg planned jointly
//! across the helpers active in the wave, with a barrier between legs). A
//! helper leg docks the helper's TOP onto the cargo's free side face, lifts,
//! delivers, places, pushes the cargo onto its target, undocks and retreats.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::assignment::{assign, select_root_module, to_root_frame, AssignmentError};
use crate::config::Config;
use crate::layout::{relative_pose, unfold, LayoutError, MODULE_WIDTH};
use crate::math::{scalar, wrap_angle, Pose2, Vec2};
use crate::motion::{
    approach_command, follow_path_command, plan_paths, pose_adjust_command, FaceClass, MotionError,
    PathRequest, VelocityCommand,
};
use crate::scenario::{Scenario, ScenarioIssues};
use crate::scheduler::{
    insert_helper_actions, plan_assembly, AssemblyAction, GridMap, ScheduleError, ScheduledAction,
};
use crate::sim::{
    detect_collisions, step_world, try_dock, DockOutcome, DockTolerances, Event, EventKind,
    Metrics, RunResult, TrajectorySample, WorldState, SIM_DT,
};
use crate::topology::{Connection, Face, ModuleId};

/// Errors preparing a run; failures during execution are reported inside
/// [`RunResult`] instead.
#[derive(Clone, Debug, PartialEq)]
pub enum RunSetupError {
    Scenario(ScenarioIssues),
    Layout(LayoutError),
    Assignment(AssignmentError),
    Schedule(ScheduleError),
}

impl fmt::Display for RunSetupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunSetupError::Scenario(e) => write!(f, "invalid scenario: {e}"),
            RunSetupError::Layout(e) => write!(f, "target not assemblable: {e}"),
            RunSetupError::Assignment(e) => write!(f, "assignment failed: {e}"),
            RunSetupError::Schedule(e) => write!(f, "scheduling failed: {e}"),
        }
    }
}

impl core::error::Error for RunSetupError {}

impl From<ScenarioIssues> for RunSetupError {
    fn from(e: ScenarioIssues) -> Self {
        Self::Scenario(e)
    }
}
impl From<LayoutError> for RunSetupError {
    fn from(e: LayoutError) -> Self {
        Self::Layout(e)
    }
}
impl From<AssignmentError> for RunSetupError {
    fn from(e: AssignmentError) -> Self {
        Self::Assignment(e)
    }
}
impl From<ScheduleError> for RunSetupError {
    fn from(e: ScheduleError) -> Self {
        Self::Schedule(e)
    }
}

/// Execute a scenario end to end: select the physical root, assign roles,
/// plan the wave schedule and simulate it at 40 Hz. Runtime problems (path
/// planning failure, exhausted dock retries, wave timeout, collisions) mark
/// the result unsuccessful rather than erroring.
pub fn run_scenario(scenario: &Scenario, config: &Config) -> Result<RunResult, RunSetupError> {
    scenario.validate(config)?;

    let modules = scenario.assembly_module_set();
    let physical_root = select_root_module(&modules)?;
    let root_world = modules.pose(physical_root).expect("root selected from set");

    let layout = unfold(&scenario.target)?;
    let target_root = layout.root();
    let in_root_frame = to_root_frame(&modules, physical_root)?;
    let mapping = assign(&layout, &in_root_frame, (target_root, physical_root))?;
    let schedule = insert_helper_actions(
        &plan_assembly(&scenario.target, &mapping)?,
        &scenario.helpers,
    )?;

    let mut goals: BTreeMap<ModuleId, Pose2> = BTreeMap::new();
    for (&vertex, &pose) in layout.poses() {
        let module = mapping.apply(vertex).expect("bijective mapping");
        goals.insert(module, root_world.compose(pose).with_wrapped_angle());
    }

    let all_points = scenario
        .modules
        .values()
        .map(|p| p.position())
        .chain(goals.values().map(|p| p.position()));
    let grid = GridMap::covering(
        root_world.position(),
        GridMap::DEFAULT_CELL_SIZE,
        all_points,
        config.sim.grid_padding_cells,
    );

    let mut world = WorldState::new(scenario.modules.iter().map(|(&id, &p)| (id, p)).collect());
    world.set_anchor(physical_root);

    let mut runner = Runner {
        cfg: config,
        world,
        grid,
        goals,
        events: Vec::new(),
        trajectory: Vec::new(),
        distance: BTreeMap::new(),
        collision_count: 0,
        wave_timings: Vec::new(),
    };
    runner.record_trajectory();

    let mut failure: Option<String> = None;
    for (index, wave) in schedule.waves.iter().enumerate() {
        runner.push_event(EventKind::WaveStart { wave: index });
        let started = runner.world.time();
        if let Err(reason) = runner.run_wave(wave) {
            failure = Some(format!("wave {index}: {reason}"));
            break;
        }
        runner.push_event(EventKind::WaveDone { wave: index });
        runner.wave_timings.push([started, runner.world.time()]);
    }

    if failure.is_none() {
        failure = runner.verify_final_assembly(scenario, &mapping).err();
    }
    if let Some(reason) = &failure {
        runner.push_event(EventKind::RunFailed {
            reason: reason.clone(),
        });
    }
    let success = failure.is_none();
    runner.push_event(EventKind::RunDone { success });

    let total_distance: f64 = runner.distance.values().sum();
    let makespan = runner.events.last().map(|e| e.t).unwrap_or(0.0);
    let metrics = Metrics {
        success,
        makespan_s: makespan,
        total_distance_m: total_distance,
        per_module_distance_m: runner.distance.clone(),
        collision_count: runner.collision_count,
        wave_timings_s: runner.wave_timings.clone(),
    };
    Ok(RunResult {
        success,
        failure,
        schedule,
        world: runner.world,
        events: runner.events,
        trajectory: runner.trajectory,
        metrics,
    })
}

struct Runner<'a> {
    cfg: &'a Config,
    world: WorldState,
    grid: GridMap,
    goals: BTreeMap<ModuleId, Pose2>,
    events: Vec<Event>,
    trajectory: Vec<TrajectorySample>,
    distance: BTreeMap<ModuleId, f64>,
    collision_count: usize,
    wave_timings: Vec<[f64; 2]>,
}

/// One docking pipeline: an agent drives to a standoff near the goal,
/// aligns, approaches and docks. Carrier legs haul a cargo module and finish
/// with undock plus retreat.
struct Leg {
    /// The module that drives.
    agent: ModuleId,
    /// The agent's docked pose at the end of the leg.
    goal: Pose2,
    /// +1.0 leading with TOP, -1.0 reversing with BOTTOM.
    direction: f64,
    /// Dock attempted at contact (the cargo's own action on carrier legs).
    dock: AssemblyAction,
    /// Cargo rigidly attached to the agent, for carrier legs.
    cargo: Option<ModuleId>,
}

enum Phase {
    Align,
    Navigate { idx: usize },
    PreRotate { target_theta: f64 },
    Adjust,
    Approach { attempts: u32 },
    Retreat { remaining: f64 },
    Done,
}

struct LegRun {
    leg: Leg,
    phase: Phase,
    waypoints: Vec<Vec2>,
}

impl<'a> Runner<'a> {
    fn push_event(&mut self, kind: EventKind) {
        self.events.push(Event {
            t: self.world.time(),
            kind,
        });
    }

    fn record_trajectory(&mut self) {
        let tick = self.world.tick();
        for (&id, &pose) in self.world.poses() {
            self.trajectory.push(TrajectorySample {
                tick,
                module: id,
                pose,
            });
        }
    }

    fn dock_tolerances(&self) -> DockTolerances {
        DockTolerances {
            normal_m: self.cfg.sim.dock_normal_tol_m,
            lateral_m: self.cfg.sim.dock_lateral_tol_m,
            angle_rad: self.cfg.sim.dock_angle_tol_rad,
        }
    }

    fn run_wave(&mut self, wave: &[ScheduledAction]) -> Result<(), String> {
        let plain: Vec<ScheduledAction> = wave
            .iter()
            .filter(|a| a.helper.is_none())
            .copied()
            .collect();
        let assisted: Vec<ScheduledAction> = wave
            .iter()
            .filter(|a| a.helper.is_some())
            .copied()
            .collect();

        if !plain.is_empty() {
            let legs = plain
                .iter()
                .map(|a| {
                    let action = a.action();
                    let direction = if action.mover_face == Face::Bottom {
                        -1.0
                    } else {
                        1.0
                    };
                    Leg {
                        agent: action.mover,
                        goal: self.goals[&action.mover],
                        direction,
                        dock: action,
                        cargo: None,
                    }
                })
                .collect();
            self.run_stage(legs, false)?;
        }

        if !assisted.is_empty() {
            // Leg 1: each helper docks its TOP onto the cargo's opposite side
            // face and lifts it.
            let legs = assisted
                .iter()
                .map(|a| {
                    let helper = a.helper.expect("assisted action");
                    let cargo = a.mover;
                    let grip_face = a.mover_face.opposite();
                    let cargo_pose = self.world.pose(cargo).expect("cargo exists");
                    let grip = Connection::new(grip_face, Face::Top);
                    Leg {
                        agent: helper,
                        goal: cargo_pose
                            .compose(relative_pose(&grip).expect("side grip"))
                            .with_wrapped_angle(),
                        direction: 1.0,
                        dock: AssemblyAction::new(helper, Face::Top, cargo, grip_face),
                        cargo: None,
                    }
                })
                .collect();
            self.run_stage(legs, false)?;
            for a in &assisted {
                let helper = a.helper.expect("assisted action");
                self.world.set_follower(a.mover, helper);
                self.world.set_carried(a.mover, helper);
                self.push_event(EventKind::Lifted {
                    helper,
                    cargo: a.mover,
                });
            }

            // Leg 2: deliver, place, push to dock, undock, retreat.
            let legs = assisted
                .iter()
                .map(|a| {
                    let helper = a.helper.expect("assisted action");
                    let cargo = a.mover;
                    let grip_face = a.mover_face.opposite();
                    let grip = Connection::new(grip_face, Face::Top);
                    Leg {
                        agent: helper,
                        goal: self.goals[&cargo]
                            .compose(relative_pose(&grip).expect("side grip"))
                            .with_wrapped_angle(),
                        direction: 1.0,
                        dock: a.action(),
                        cargo: Some(cargo),
                    }
                })
                .collect();
            self.run_stage(legs, true)?;
        }
        Ok(())
    }

    /// Static occupancy for a stage: every module except the active agents
    /// (and their cargo). Carrier stages inflate obstacles to a clearance
    /// disk so the swept cargo stays clear while turning.
    fn stage_grid(&self, exclude: &BTreeSet<ModuleId>, carrier: bool) -> GridMap {
        let mut grid = self.grid.clone();
        for (&id, &pose) in self.world.poses() {
            if exclude.contains(&id) {
                continue;
            }
            if carrier {
                grid.occupy_disk(pose.position(), self.cfg.sim.carrier_clearance_m);
            } else {
                grid.occupy_box(pose.position(), MODULE_WIDTH / 2.0);
            }
        }
        grid
    }

    /// Standoff pose one grid cell short of the docked pose, shrunk toward
    /// the dock when the nominal pose would overlap a parked module (a grip
    /// face can point straight at a bystander).
    fn standoff_point(&self, leg: &Leg, exclude: &BTreeSet<ModuleId>) -> Vec2 {
        let nominal = self.grid.cell_size();
        let back = leg.goal.heading_vector() * (-leg.direction);
        let clear_of_statics = |p: Vec2| {
            let pose = Pose2::from_parts(p, leg.goal.theta);
            self.world.poses().iter().all(|(id, other)| {
                exclude.contains(id)
                    || crate::sim::square_overlap(pose, *other, MODULE_WIDTH / 2.0 + 0.01).is_none()
            })
        };
        for factor in [1.0, 0.75, 0.5] {
            let p = leg.goal.position() + back * (nominal * factor);
            if clear_of_statics(p) {
                return p;
            }
        }
        leg.goal.position() + back * (nominal * 0.5)
    }

    fn run_stage(&mut self, legs: Vec<Leg>, carrier: bool) -> Result<(), String> {
        let exclude: BTreeSet<ModuleId> = legs
            .iter()
            .flat_map(|l| l.cargo.iter().copied().chain([l.agent]))
            .collect();
        let mut grid = self.stage_grid(&exclude, carrier);

        let mut ordered: Vec<Leg> = legs;
        ordered.sort_by_key(|l| l.agent);
        let standoffs: Vec<Vec2> = ordered
            .iter()
            .map(|leg| self.standoff_point(leg, &exclude))
            .collect();
        let requests: Vec<PathRequest> = ordered
            .iter()
            .zip(&standoffs)
            .map(|(leg, &standoff)| {
                let start =
                    grid.cell_of(self.world.pose(leg.agent).expect("agent exists").position());
                // The agent physically occupies its start cell; inflated
                // obstacles must not forbid departing from it.
                grid.clear(start);
                PathRequest {
                    id: leg.agent,
                    start,
                    goal: grid.cell_of(standoff),
                }
            })
            .collect();
        let paths = plan_paths(&grid, &requests).map_err(|e| e.to_string())?;

        let mut runs: BTreeMap<ModuleId, LegRun> = BTreeMap::new();
        for ((leg, path), standoff) in ordered.into_iter().zip(paths).zip(standoffs) {
            let mut waypoints = path.waypoints(&grid);
            waypoints.push(standoff);
            self.world
                .mark_docking_pair(leg.dock.mover, leg.dock.target);
            runs.insert(
                leg.agent,
                LegRun {
                    leg,
                    phase: Phase::Align,
                    waypoints,
                },
            );
        }

        let align_ticks =
            scalar::ceil(core::f64::consts::PI / self.cfg.motion.omega_max / SIM_DT) as u64;
        let ticks_per_step = scalar::ceil(
            (self.grid.cell_size() / self.cfg.motion.v_max
                + core::f64::consts::PI / self.cfg.motion.omega_max)
                / SIM_DT,
        ) as u64;
        let timeout_ticks = (self.cfg.sim.wave_timeout_s / SIM_DT) as u64;

        let mut elapsed: u64 = 0;
        loop {
            if runs.values().all(|r| matches!(r.phase, Phase::Done)) {
                return Ok(());
            }
            if elapsed > timeout_ticks {
                return Err("stage timeout".to_string());
            }

            // Command generation and phase bookkeeping.
            let mut commands: BTreeMap<ModuleId, VelocityCommand> = BTreeMap::new();
            let ids: Vec<ModuleId> = runs.keys().copied().collect();
            for id in &ids {
                let cmd = self.leg_command(
                    runs.get_mut(id).unwrap(),
                    elapsed,
                    align_ticks,
                    ticks_per_step,
                )?;
                if let Some(cmd) = cmd {
                    commands.insert(*id, cmd);
                }
            }

            let before: BTreeMap<ModuleId, Pose2> =
                self.world.poses().iter().map(|(&k, &v)| (k, v)).collect();
            step_world(&mut self.world, &commands, SIM_DT).map_err(|e| e.to_string())?;
            elapsed += 1;

            // Docking attempts for agents in the approach phase.
            for id in &ids {
                let run = runs.get_mut(id).unwrap();
                if matches!(run.phase, Phase::Approach { .. }) {
                    self.attempt_dock(run)?;
                }
            }

            for (&id, &pose) in self.world.poses() {
                let moved = before
                    .get(&id)
                    .map(|p| p.position().distance(pose.position()))
                    .unwrap_or(0.0);
                *self.distance.entry(id).or_insert(0.0) += moved;
            }

            let collisions = detect_collisions(&self.world, self.cfg.sim.contact_tol_m);
            if !collisions.is_empty() {
                self.collision_count += collisions.len();
                for &(a, b) in &collisions {
                    self.push_event(EventKind::Collision { a, b });
                }
                let (a, b) = collisions[0];
                return Err(format!("collision between modules {a} and {b}"));
            }
            self.record_trajectory();
        }
    }

    /// Per-tick command for one leg, handling phase transitions.
    fn leg_command(
        &mut self,
        run: &mut LegRun,
        elapsed: u64,
        align_ticks: u64,
        ticks_per_step: u64,
    ) -> Result<Option<VelocityCommand>, String> {
        let agent = run.leg.agent;
        let pose = self.world.pose(agent).expect("agent exists");
        let motion = &self.cfg.motion;
        match &mut run.phase {
            Phase::Align => {
                if elapsed >= align_ticks {
                    run.phase = Phase::Navigate { idx: 1 };
                    return self.leg_command(run, elapsed, align_ticks, ticks_per_step);
                }
                let target = run.waypoints[1.min(run.waypoints.len() - 1)];
                let herr = wrap_angle((target - pose.position()).angle() - pose.theta);
                let omega = (motion.heading_gain * herr).clamp(-motion.omega_max, motion.omega_max);
                Ok(Some(VelocityCommand::new(0.0, omega)))
            }
            Phase::Navigate { idx } => {
                // Stay synchronized with the space-time reservation: waypoint
                // k opens only in its time window (the off-grid standoff
                // point rides after the last grid step).
                let nav_elapsed = elapsed.saturating_sub(align_ticks);
                let allowed = ((nav_elapsed / ticks_per_step) + 1)
                    .min(run.waypoints.len() as u64 - 1) as usize;
                if *idx > allowed {
                    return Ok(Some(VelocityCommand::STOP));
                }
                let mut follow = self.cfg.follow_params();
                if *idx + 1 == run.waypoints.len() {
                    follow.capture_radius = motion.standoff_capture_m;
                }
                let out = follow_path_command(pose, &run.waypoints, *idx, &follow);
                if out.captured {
                    if *idx + 1 >= run.waypoints.len() {
                        self.push_event(EventKind::NavigationDone { module: agent });
                        let gp = pose.in_frame(run.leg.goal);
                        let dogleg = if scalar::abs(gp.y) > 0.5 * motion.align_tol_m {
                            // Rotate so the lateral correction drifts away
                            // from the target instead of into it; the wide
                            // angle keeps the drift short (about 2 y0/theta0).
                            0.6 * run.leg.direction * if gp.y >= 0.0 { 1.0 } else { -1.0 }
                        } else {
                            0.0
                        };
                        run.phase = Phase::PreRotate {
                            target_theta: wrap_angle(run.leg.goal.theta + dogleg),
                        };
                        return Ok(Some(VelocityCommand::STOP));
                    }
                    *idx += 1;
                    return Ok(Some(VelocityCommand::STOP));
                }
                Ok(Some(out.command))
            }
            Phase::PreRotate { target_theta } => {
                let err = wrap_angle(*target_theta - pose.theta);
                if scalar::abs(err) <= 0.05 {
                    run.phase = Phase::Adjust;
                    return self.leg_command(run, elapsed, align_ticks, ticks_per_step);
                }
                let omega = (motion.heading_gain * err).clamp(-motion.omega_max, motion.omega_max);
                Ok(Some(VelocityCommand::new(0.0, omega)))
            }
            Phase::Adjust => {
                let gp = crate::motion::GoalFramePose::from_world(pose, run.leg.goal);
                if scalar::abs(gp.y) <= motion.align_tol_m
                    && scalar::abs(gp.theta) <= motion.align_tol_rad
                {
                    self.push_event(EventKind::AdjustDone { module: agent });
                    if let Some(cargo) = run.leg.cargo {
                        self.world.clear_carried(cargo);
                        self.push_event(EventKind::Placed {
                            helper: agent,
                            cargo,
                        });
                    }
                    self.push_event(EventKind::ApproachStart { module: agent });
                    run.phase = Phase::Approach { attempts: 0 };
                    return self.leg_command(run, elapsed, align_ticks, ticks_per_step);
                }
                let out = pose_adjust_command(gp, FaceClass::Lateral, &self.cfg.adjust_params());
                Ok(Some(out.command))
            }
            Phase::Approach { attempts } => {
                let gp = crate::motion::GoalFramePose::from_world(pose, run.leg.goal);
                match approach_command(gp, run.leg.direction, &self.cfg.approach_params()) {
                    Ok(cmd) => Ok(Some(cmd)),
                    Err(MotionError::AlignmentLost) => {
                        *attempts += 1;
                        let attempt = *attempts;
                        self.push_event(EventKind::DockAborted {
                            module: agent,
                            attempt,
                        });
                        if attempt >= self.cfg.sim.dock_retries {
                            return Err(format!(
                                "module {agent} exhausted {attempt} docking attempts"
                            ));
                        }
                        run.phase = Phase::PreRotate {
                            target_theta: run.leg.goal.theta,
                        };
                        Ok(Some(VelocityCommand::STOP))
                    }
                    Err(other) => Err(other.to_string()),
                }
            }
            Phase::Retreat { remaining } => {
                if *remaining <= 0.0 {
                    self.push_event(EventKind::RetreatDone { helper: agent });
                    run.phase = Phase::Done;
                    return Ok(None);
                }
                *remaining -= motion.v_max * SIM_DT;
                Ok(Some(VelocityCommand::new(-motion.v_max, 0.0)))
            }
            Phase::Done => Ok(None),
        }
    }

    /// Post-step docking attempt for a leg in the approach phase.
    fn attempt_dock(&mut self, run: &mut LegRun) -> Result<(), String> {
        let tol = self.dock_tolerances();
        let action = run.leg.dock;
        let cargo_before = self.world.pose(action.mover);
        match try_dock(&mut self.world, &action, &tol).map_err(|e| e.to_string())? {
            DockOutcome::Rejected { .. } => Ok(()),
            DockOutcome::Docked => {
                self.world.clear_docking_pair(action.mover, action.target);
                if let Some(cargo) = run.leg.cargo {
                    // The cargo snapped onto the cluster; shift the helper
                    // rigidly with it, then let go and back away.
                    let helper = run.leg.agent;
                    let cargo_old = cargo_before.expect("cargo pose");
                    let cargo_new = self.world.pose(cargo).expect("cargo pose");
                    self.world.release_follower(cargo);
                    let helper_new = cargo_new
                        .compose(self.world.pose(helper).expect("helper").in_frame(cargo_old));
                    self.world.set_pose(helper, helper_new.with_wrapped_angle());
                    self.push_event(EventKind::Docked {
                        mover: action.mover,
                        mover_face: action.mover_face,
                        target: action.target,
                        target_face: action.target_face,
                    });
                    self.world.detach(helper, cargo);
                    self.push_event(EventKind::HelperUndocked { helper, cargo });
                    run.phase = Phase::Retreat {
                        remaining: 1.5 * self.grid.cell_size(),
                    };
                } else if self.world.is_anchored(action.target) {
                    // Plain mover attached onto the cluster.
                    self.push_event(EventKind::Docked {
                        mover: action.mover,
                        mover_face: action.mover_face,
                        target: action.target,
                        target_face: action.target_face,
                    });
                    run.phase = Phase::Done;
                } else {
                    // Helper gripped its free-standing cargo (first leg).
                    self.push_event(EventKind::HelperDocked {
                        helper: action.mover,
                        cargo: action.target,
                    });
                    run.phase = Phase::Done;
                }
                Ok(())
            }
        }
    }

    /// The final attachment graph must equal the target topology edge for
    /// edge (including faces) under the mapping, with every docked pair at
    /// its exact mating pose.
    fn verify_final_assembly(
        &self,
        scenario: &Scenario,
        mapping: &crate::assignment::Mapping,
    ) -> Result<(), String> {
        let normalize = |a: ModuleId, fa: Face, b: ModuleId, fb: Face| {
            if a <= b {
                (a, fa, b, fb)
            } else {
                (b, fb, a, fa)
            }
        };
        let expected: BTreeSet<_> = scenario
            .target
            .edges()
            .iter()
            .map(|e| {
                normalize(
                    mapping.apply(e.a).expect("bijective"),
                    e.fa,
                    mapping.apply(e.b).expect("bijective"),
                    e.fb,
                )
            })
            .collect();
        let actual: BTreeSet<_> = self
            .world
            .attachments()
            .iter()
            .map(|att| normalize(att.a, att.face_a, att.b, att.face_b))
            .collect();
        if expected != actual {
            return Err(format!(
                "final attachment graph mismatch: expected {} edges, got {}",
                expected.len(),
                actual.len()
            ));
        }
        for att in self.world.attachments() {
            let rel = self
                .world
                .pose(att.b)
                .expect("attached module")
                .in_frame(self.world.pose(att.a).expect("attached module"));
            let want =
                relative_pose(&Connection::new(att.face_a, att.face_b)).expect("planar attachment");
            let pos_err = rel.position().distance(want.position());
            let ang_err = scalar::abs(wrap_angle(rel.theta - want.theta));
            if pos_err > 1e-9 || ang_err > 1e-9 {
                return Err(format!(
                    "attachment {}-{} off the snap pose by {pos_err} m / {ang_err} rad",
                    att.a, att.b
                ));
            }
        }
        Ok(())
    }
}
