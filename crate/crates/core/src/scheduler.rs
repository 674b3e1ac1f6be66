//! Wave-parallel assembly schedules.
//!
//! One wave per target-tree depth, executed under a completion barrier.
//! Actions docking to the free root are split into a side-face (LEFT/RIGHT)
//! subgroup that runs first and a TOP/BOTTOM subgroup that runs second.
//! Side-face movers cannot align their own connector and are serviced by
//! helper modules; with one helper those actions serialize.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::assignment::Mapping;
use crate::math::Vec2;
use crate::topology::{
    find_root, validate_topology, ConfigGraph, Face, ModuleId, ValidationReport,
};

/// One docking task: connect `mover`'s `mover_face` to `target`'s
/// `target_face`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssemblyAction {
    pub mover: ModuleId,
    pub mover_face: Face,
    pub target: ModuleId,
    pub target_face: Face,
}

impl AssemblyAction {
    pub fn new(mover: ModuleId, mover_face: Face, target: ModuleId, target_face: Face) -> Self {
        Self {
            mover,
            mover_face,
            target,
            target_face,
        }
    }

    /// Side-face docks need a helper: a differential-drive module cannot
    /// translate along its own LEFT/RIGHT axis.
    pub fn helper_required(&self) -> bool {
        self.mover_face.is_side()
    }
}

impl fmt::Display for AssemblyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.mover, self.mover_face, self.target, self.target_face
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ActionKind {
    #[default]
    Dock,
    Undock,
}

impl ActionKind {
    pub fn is_dock(&self) -> bool {
        matches!(self, ActionKind::Dock)
    }
}

/// An action inside a schedule, with its assigned helper (if any) and kind
/// (undock entries appear only in reconfiguration schedules).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduledAction {
    pub mover: ModuleId,
    pub mover_face: Face,
    pub target: ModuleId,
    pub target_face: Face,
    pub helper: Option<ModuleId>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "ActionKind::is_dock")
    )]
    pub kind: ActionKind,
}

impl ScheduledAction {
    pub fn dock(action: AssemblyAction) -> Self {
        Self {
            mover: action.mover,
            mover_face: action.mover_face,
            target: action.target,
            target_face: action.target_face,
            helper: None,
            kind: ActionKind::Dock,
        }
    }

    pub fn undock(action: AssemblyAction) -> Self {
        Self {
            kind: ActionKind::Undock,
            ..Self::dock(action)
        }
    }

    pub fn action(&self) -> AssemblyAction {
        AssemblyAction {
            mover: self.mover,
            mover_face: self.mover_face,
            target: self.target,
            target_face: self.target_face,
        }
    }

    pub fn helper_required(&self) -> bool {
        self.kind.is_dock() && self.action().helper_required()
    }
}

/// Ordered waves of actions; all actions of one wave run in parallel and a
/// wave starts only after every action of the previous wave reports done.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub waves: Vec<Vec<ScheduledAction>>,
}

impl Schedule {
    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ScheduledAction> {
        self.waves.iter().flatten()
    }

    pub fn dock_actions(&self) -> impl Iterator<Item = &ScheduledAction> {
        self.actions().filter(|a| a.kind.is_dock())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleError {
    InvalidTopology(ValidationReport),
    InvalidMapping(String),
    /// A side-face action needs a helper but the scenario declares none.
    HelperRequired(AssemblyAction),
    UndockEdgeMissing(AssemblyAction),
    DockEdgeMissing(AssemblyAction),
    /// The dock's target is a mover with no dock action of its own.
    DockTargetNeverAttached(ModuleId),
    /// The dock edge does not point from child to parent in the goal tree.
    DockNotDownward(AssemblyAction),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::InvalidTopology(r) => {
                write!(f, "invalid topology ({} violations)", r.violations.len())
            }
            ScheduleError::InvalidMapping(msg) => write!(f, "invalid mapping: {msg}"),
            ScheduleError::HelperRequired(a) => {
                write!(f, "action {a} needs a helper module but none is declared")
            }
            ScheduleError::UndockEdgeMissing(a) => {
                write!(
                    f,
                    "undock {a} does not match a connection of the initial topology"
                )
            }
            ScheduleError::DockEdgeMissing(a) => {
                write!(
                    f,
                    "dock {a} does not match a connection of the goal topology"
                )
            }
            ScheduleError::DockTargetNeverAttached(id) => {
                write!(f, "dock target {id} is never attached by any listed action")
            }
            ScheduleError::DockNotDownward(a) => {
                write!(
                    f,
                    "dock {a} does not attach a child to its goal-tree parent"
                )
            }
        }
    }
}

impl core::error::Error for ScheduleError {}

fn checked_tree(graph: &ConfigGraph) -> Result<(), ScheduleError> {
    let report = validate_topology(graph);
    if report.ok() {
        Ok(())
    } else {
        Err(ScheduleError::InvalidTopology(report))
    }
}

fn checked_bijection(graph: &ConfigGraph, mapping: &Mapping) -> Result<(), ScheduleError> {
    let domain: BTreeSet<ModuleId> = mapping.target_to_module.keys().copied().collect();
    let vertices: BTreeSet<ModuleId> = graph.vertices().collect();
    if domain != vertices {
        return Err(ScheduleError::InvalidMapping(String::from(
            "mapping domain differs from the target vertex set",
        )));
    }
    if !mapping.is_bijective() {
        return Err(ScheduleError::InvalidMapping(String::from(
            "mapping is not one-to-one",
        )));
    }
    Ok(())
}

/// Depth-first structure of a rooted tree: depth and parent edge per vertex.
struct RootedEdges {
    depth: BTreeMap<ModuleId, usize>,
    /// child -> (parent, parent_face, child_face)
    parent: BTreeMap<ModuleId, (ModuleId, Face, Face)>,
}

fn rooted_edges(graph: &ConfigGraph, root: ModuleId) -> RootedEdges {
    let adjacency = graph.adjacency();
    let mut depth = BTreeMap::new();
    let mut parent = BTreeMap::new();
    depth.insert(root, 0usize);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for &(child, own_face, child_face) in &adjacency[&v] {
            if let alloc::collections::btree_map::Entry::Vacant(slot) = depth.entry(child) {
                slot.insert(d + 1);
                parent.insert(child, (v, own_face, child_face));
                queue.push_back(child);
            }
        }
    }
    RootedEdges { depth, parent }
}

/// Build the wave-parallel assembly schedule for a valid target tree and a
/// bijective role mapping. One wave per depth, movers sorted by id, and the
/// depth-one wave split by [`split_root_wave`].
pub fn plan_assembly(graph: &ConfigGraph, mapping: &Mapping) -> Result<Schedule, ScheduleError> {
    checked_tree(graph)?;
    checked_bijection(graph, mapping)?;
    let root = find_root(graph).expect("validated");
    let rooted = rooted_edges(graph, root);
    let max_depth = rooted.depth.values().copied().max().unwrap_or(0);
    let physical_root = mapping.apply(root).expect("bijection checked");

    let mut waves = Vec::new();
    for d in 1..=max_depth {
        let mut wave: Vec<ScheduledAction> = rooted
            .depth
            .iter()
            .filter(|&(_, &vd)| vd == d)
            .map(|(&v, _)| {
                let (p, pface, cface) = rooted.parent[&v];
                ScheduledAction::dock(AssemblyAction::new(
                    mapping.apply(v).expect("bijection checked"),
                    cface,
                    mapping.apply(p).expect("bijection checked"),
                    pface,
                ))
            })
            .collect();
        wave.sort_by_key(|a| a.mover);
        if d == 1 {
            let (side, axial) = split_root_wave(&wave, physical_root);
            if !side.is_empty() {
                waves.push(side);
            }
            if !axial.is_empty() {
                waves.push(axial);
            }
        } else {
            waves.push(wave);
        }
    }
    Ok(Schedule { waves })
}

/// Split a wave that docks onto the (free, unanchored) root module: actions
/// for the root's LEFT/RIGHT faces go first, TOP/BOTTOM second. Actions not
/// targeting the root ride along in the first subgroup.
pub fn split_root_wave(
    wave: &[ScheduledAction],
    root: ModuleId,
) -> (Vec<ScheduledAction>, Vec<ScheduledAction>) {
    let mut side = Vec::new();
    let mut axial = Vec::new();
    for &a in wave {
        if a.target == root && !a.target_face.is_side() {
            axial.push(a);
        } else {
            side.push(a);
        }
    }
    (side, axial)
}

/// Assign helper modules to every side-face docking action.
///
/// Helper-mediated actions of one wave are serviced in canonical connector
/// order of the mover face (LEFT before RIGHT), then mover id. With `k`
/// helpers, up to `k` run concurrently; the rest serialize into follow-up
/// waves. Non-helper actions of the wave stay in its first subgroup. The
/// docking action set itself is unchanged.
pub fn insert_helper_actions(
    schedule: &Schedule,
    helpers: &[ModuleId],
) -> Result<Schedule, ScheduleError> {
    let mut waves = Vec::new();
    for wave in &schedule.waves {
        let (mut assisted, plain): (Vec<ScheduledAction>, Vec<ScheduledAction>) =
            wave.iter().partition(|a| a.helper_required());
        if assisted.is_empty() {
            waves.push(wave.clone());
            continue;
        }
        if helpers.is_empty() {
            return Err(ScheduleError::HelperRequired(assisted[0].action()));
        }
        assisted.sort_by_key(|a| (a.mover_face, a.mover));
        for (i, action) in assisted.iter_mut().enumerate() {
            action.helper = Some(helpers[i % helpers.len()]);
        }
        for (batch_index, batch) in assisted.chunks(helpers.len()).enumerate() {
            let mut sub: Vec<ScheduledAction> = batch.to_vec();
            if batch_index == 0 {
                sub.extend(plain.iter().copied());
            }
            sub.sort_by_key(|a| a.mover);
            waves.push(sub);
        }
    }
    Ok(Schedule { waves })
}

/// One mobile-reconfiguration step: release an existing connection, then
/// dock the freed module at its place in the goal topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReconfigurationAction {
    pub undock: AssemblyAction,
    pub dock: AssemblyAction,
}

/// Parallelize a sequential reconfiguration action list: all undocks first,
/// then the dock actions wave-grouped by the mover's depth in the goal tree.
/// Connections that persist from the initial configuration contribute
/// attachment (and thereby depth) but never produce actions.
pub fn parallelize_reconfiguration(
    g_init: &ConfigGraph,
    g_goal: &ConfigGraph,
    goal_to_module: &Mapping,
    actions: &[ReconfigurationAction],
) -> Result<Schedule, ScheduleError> {
    if actions.is_empty() {
        return Ok(Schedule::default());
    }
    checked_tree(g_init)?;
    checked_tree(g_goal)?;
    checked_bijection(g_goal, goal_to_module)?;
    let module_to_goal = goal_to_module.inverse();
    let goal_vertex = |m: ModuleId| -> Result<ModuleId, ScheduleError> {
        module_to_goal.get(&m).copied().ok_or_else(|| {
            ScheduleError::InvalidMapping(alloc::format!("module {m} has no goal role"))
        })
    };

    let dock_movers: BTreeSet<ModuleId> = actions.iter().map(|a| a.dock.mover).collect();
    let undone: BTreeSet<(ModuleId, Face)> = actions
        .iter()
        .flat_map(|a| {
            [
                (a.undock.mover, a.undock.mover_face),
                (a.undock.target, a.undock.target_face),
            ]
        })
        .collect();
    let root = find_root(g_goal).expect("validated");
    let rooted = rooted_edges(g_goal, root);

    // A dock target must be attached when its wave runs: it is the goal root,
    // or its goal parent connection persists from the initial configuration
    // (and is not released by any listed undock), or it is itself docked by a
    // listed action at a strictly shallower depth.
    let target_attached = |vt: ModuleId, module: ModuleId| -> bool {
        if vt == root {
            return true;
        }
        if dock_movers.contains(&module) {
            return true;
        }
        let Some(&(pv, pface, cface)) = rooted.parent.get(&vt) else {
            return false;
        };
        let parent_module = goal_to_module.apply(pv).expect("bijection checked");
        let persists = g_init
            .edge_at(module, cface)
            .and_then(|e| e.view_from(module).map(|c| (e.other(module).unwrap(), c)))
            .is_some_and(|(other, conn)| other == parent_module && conn.face2con == pface);
        persists && !undone.contains(&(module, cface)) && !undone.contains(&(parent_module, pface))
    };

    let mut undock_wave = Vec::new();
    let mut by_depth: BTreeMap<usize, Vec<ScheduledAction>> = BTreeMap::new();
    for pair in actions {
        let u = pair.undock;
        let matches_init = g_init
            .edge_at(u.mover, u.mover_face)
            .and_then(|e| e.view_from(u.mover).map(|c| (e.other(u.mover).unwrap(), c)))
            .is_some_and(|(other, conn)| other == u.target && conn.face2con == u.target_face);
        if !matches_init {
            return Err(ScheduleError::UndockEdgeMissing(u));
        }
        undock_wave.push(ScheduledAction::undock(u));

        let d = pair.dock;
        let vm = goal_vertex(d.mover)?;
        let vt = goal_vertex(d.target)?;
        let matches_goal = g_goal
            .edge_at(vm, d.mover_face)
            .and_then(|e| e.view_from(vm).map(|c| (e.other(vm).unwrap(), c)))
            .is_some_and(|(other, conn)| other == vt && conn.face2con == d.target_face);
        if !matches_goal {
            return Err(ScheduleError::DockEdgeMissing(d));
        }
        if !target_attached(vt, d.target) {
            return Err(ScheduleError::DockTargetNeverAttached(d.target));
        }
        let (dm, dt) = (rooted.depth[&vm], rooted.depth[&vt]);
        if dm != dt + 1 {
            return Err(ScheduleError::DockNotDownward(d));
        }
        by_depth
            .entry(dm)
            .or_default()
            .push(ScheduledAction::dock(d));
    }

    undock_wave.sort_by_key(|a| a.mover);
    let mut waves = Vec::with_capacity(by_depth.len() + 1);
    waves.push(undock_wave);
    for (_, mut wave) in by_depth {
        wave.sort_by_key(|a| a.mover);
        waves.push(wave);
    }
    Ok(Schedule { waves })
}

/// Cell coordinates on the navigation grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    pub x: i32,
    pub y: i32,
}

impl GridCell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn neighbors4(self) -> [GridCell; 4] {
        [
            GridCell::new(self.x + 1, self.y),
            GridCell::new(self.x - 1, self.y),
            GridCell::new(self.x, self.y + 1),
            GridCell::new(self.x, self.y - 1),
        ]
    }

    pub fn manhattan(self, other: GridCell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// Axis-aligned square routing grid, cell (0, 0) centered on the root module.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    origin: Vec2,
    cell_size: f64,
    min: GridCell,
    max: GridCell,
    occupied: BTreeSet<GridCell>,
}

impl GridMap {
    /// Default cell edge, meters.
    pub const DEFAULT_CELL_SIZE: f64 = 0.1;

    pub fn new(origin: Vec2, cell_size: f64, min: GridCell, max: GridCell) -> Self {
        Self {
            origin,
            cell_size,
            min,
            max,
            occupied: BTreeSet::new(),
        }
    }

    /// Smallest grid centered at `origin` whose cells cover every point,
    /// padded on all sides.
    pub fn covering(
        origin: Vec2,
        cell_size: f64,
        points: impl IntoIterator<Item = Vec2>,
        padding: i32,
    ) -> Self {
        let mut min = GridCell::new(0, 0);
        let mut max = GridCell::new(0, 0);
        let probe = Self::new(
            origin,
            cell_size,
            GridCell::new(i32::MIN, i32::MIN),
            GridCell::new(i32::MAX, i32::MAX),
        );
        for p in points {
            let c = probe.cell_of(p);
            min.x = min.x.min(c.x);
            min.y = min.y.min(c.y);
            max.x = max.x.max(c.x);
            max.y = max.y.max(c.y);
        }
        Self::new(
            origin,
            cell_size,
            GridCell::new(min.x - padding, min.y - padding),
            GridCell::new(max.x + padding, max.y + padding),
        )
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn bounds(&self) -> (GridCell, GridCell) {
        (self.min, self.max)
    }

    pub fn width(&self) -> i32 {
        self.max.x - self.min.x + 1
    }

    pub fn height(&self) -> i32 {
        self.max.y - self.min.y + 1
    }

    pub fn area(&self) -> usize {
        self.width() as usize * self.height() as usize
    }

    pub fn cell_of(&self, p: Vec2) -> GridCell {
        let rel = p - self.origin;
        GridCell::new(
            crate::math::scalar::round(rel.x / self.cell_size) as i32,
            crate::math::scalar::round(rel.y / self.cell_size) as i32,
        )
    }

    pub fn center_of(&self, c: GridCell) -> Vec2 {
        self.origin + Vec2::new(c.x as f64 * self.cell_size, c.y as f64 * self.cell_size)
    }

    pub fn in_bounds(&self, c: GridCell) -> bool {
        c.x >= self.min.x && c.x <= self.max.x && c.y >= self.min.y && c.y <= self.max.y
    }

    pub fn occupy(&mut self, c: GridCell) {
        self.occupied.insert(c);
    }

    pub fn clear(&mut self, c: GridCell) {
        self.occupied.remove(&c);
    }

    /// Mark every cell whose square intersects the axis-aligned box
    /// `center ± half`.
    pub fn occupy_box(&mut self, center: Vec2, half: f64) {
        let reach = half + self.cell_size / 2.0;
        let lo = self.cell_of(center - Vec2::new(reach, reach));
        let hi = self.cell_of(center + Vec2::new(reach, reach));
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                let c = GridCell::new(x, y);
                let cc = self.center_of(c);
                if (cc.x - center.x).abs() < reach && (cc.y - center.y).abs() < reach {
                    self.occupied.insert(c);
                }
            }
        }
    }

    /// Mark every cell whose center lies within `radius` of `center`.
    pub fn occupy_disk(&mut self, center: Vec2, radius: f64) {
        let lo = self.cell_of(center - Vec2::new(radius, radius));
        let hi = self.cell_of(center + Vec2::new(radius, radius));
        for x in lo.x..=hi.x {
            for y in lo.y..=hi.y {
                let c = GridCell::new(x, y);
                if self.center_of(c).distance(center) <= radius {
                    self.occupied.insert(c);
                }
            }
        }
    }

    pub fn is_occupied(&self, c: GridCell) -> bool {
        self.occupied.contains(&c)
    }

    pub fn is_free(&self, c: GridCell) -> bool {
        self.in_bounds(c) && !self.is_occupied(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Face::*;

    fn mapping(pairs: &[(u32, u32)]) -> Mapping {
        Mapping {
            target_to_module: pairs
                .iter()
                .map(|&(t, m)| (ModuleId(t), ModuleId(m)))
                .collect(),
            cost_m: 0.0,
        }
    }

    pub(crate) fn task1_target() -> ConfigGraph {
        ConfigGraph::from_edges(
            0..7,
            [
                (0, Left, 3, Bottom),
                (0, Right, 1, Bottom),
                (0, Top, 2, Bottom),
                (0, Bottom, 4, Top),
                (4, Bottom, 5, Top),
                (5, Bottom, 6, Top),
            ],
        )
        .unwrap()
    }

    pub(crate) fn task1_reported_mapping() -> Mapping {
        mapping(&[(0, 1), (1, 5), (2, 2), (3, 0), (4, 6), (5, 4), (6, 3)])
    }

    pub(crate) fn task3_target() -> ConfigGraph {
        ConfigGraph::from_edges(
            0..7,
            [
                (0, Left, 1, Right),
                (0, Right, 2, Left),
                (1, Top, 3, Bottom),
                (1, Bottom, 4, Top),
                (2, Top, 5, Bottom),
                (2, Bottom, 6, Top),
            ],
        )
        .unwrap()
    }

    pub(crate) fn task3_reported_mapping() -> Mapping {
        mapping(&[(0, 2), (1, 1), (2, 3), (3, 5), (4, 7), (5, 6), (6, 4)])
    }

    fn acts(wave: &[ScheduledAction]) -> Vec<(u32, Face, u32, Face)> {
        wave.iter()
            .map(|a| (a.mover.0, a.mover_face, a.target.0, a.target_face))
            .collect()
    }

    #[test]
    fn task1_schedule_matches_reported_actions() {
        let schedule = plan_assembly(&task1_target(), &task1_reported_mapping()).unwrap();
        assert_eq!(schedule.waves.len(), 4);
        assert_eq!(
            acts(&schedule.waves[0]),
            [(0, Bottom, 1, Left), (5, Bottom, 1, Right)]
        );
        assert_eq!(
            acts(&schedule.waves[1]),
            [(2, Bottom, 1, Top), (6, Top, 1, Bottom)]
        );
        assert_eq!(acts(&schedule.waves[2]), [(4, Top, 6, Bottom)]);
        assert_eq!(acts(&schedule.waves[3]), [(3, Top, 4, Bottom)]);
    }

    #[test]
    fn single_edge_target_is_one_action() {
        let g = ConfigGraph::from_edges([0, 1], [(0, Top, 1, Bottom)]).unwrap();
        let schedule = plan_assembly(&g, &mapping(&[(0, 10), (1, 11)])).unwrap();
        assert_eq!(schedule.waves.len(), 1);
        assert_eq!(acts(&schedule.waves[0]), [(11, Bottom, 10, Top)]);
    }

    #[test]
    fn task2_depth_two_wave_has_four_actions() {
        let g = ConfigGraph::from_edges(
            0..9,
            [
                (0, Left, 1, Top),
                (0, Right, 3, Top),
                (0, Top, 2, Top),
                (0, Bottom, 4, Top),
                (1, Bottom, 5, Top),
                (2, Bottom, 6, Top),
                (3, Bottom, 7, Top),
                (4, Bottom, 8, Top),
            ],
        )
        .unwrap();
        let f = mapping(&[
            (0, 1),
            (1, 0),
            (2, 8),
            (3, 5),
            (4, 4),
            (5, 6),
            (6, 3),
            (7, 2),
            (8, 7),
        ]);
        let schedule = plan_assembly(&g, &f).unwrap();
        assert_eq!(schedule.waves.len(), 3);
        assert_eq!(
            acts(&schedule.waves[0]),
            [(0, Top, 1, Left), (5, Top, 1, Right)]
        );
        assert_eq!(
            acts(&schedule.waves[1]),
            [(4, Top, 1, Bottom), (8, Top, 1, Top)]
        );
        assert_eq!(
            acts(&schedule.waves[2]),
            [
                (2, Top, 5, Bottom),
                (3, Top, 8, Bottom),
                (6, Top, 0, Bottom),
                (7, Top, 4, Bottom)
            ]
        );
    }

    #[test]
    fn split_groups_only_axial_actions() {
        let wave = [
            ScheduledAction::dock(AssemblyAction::new(ModuleId(2), Bottom, ModuleId(1), Top)),
            ScheduledAction::dock(AssemblyAction::new(
                ModuleId(3),
                Bottom,
                ModuleId(1),
                Bottom,
            )),
        ];
        let (side, axial) = split_root_wave(&wave, ModuleId(1));
        assert!(side.is_empty());
        assert_eq!(axial.len(), 2);
    }

    #[test]
    fn helper_serialization_order_and_preservation() {
        let schedule = plan_assembly(&task3_target(), &task3_reported_mapping()).unwrap();
        assert_eq!(schedule.waves.len(), 2);
        assert_eq!(
            acts(&schedule.waves[0]),
            [(1, Right, 2, Left), (3, Left, 2, Right)]
        );

        let helped = insert_helper_actions(&schedule, &[ModuleId(0)]).unwrap();
        assert_eq!(helped.waves.len(), 3);
        // Mover 3 docks its LEFT face, serviced before mover 1's RIGHT face.
        assert_eq!(acts(&helped.waves[0]), [(3, Left, 2, Right)]);
        assert_eq!(helped.waves[0][0].helper, Some(ModuleId(0)));
        assert_eq!(acts(&helped.waves[1]), [(1, Right, 2, Left)]);
        assert_eq!(helped.waves[1][0].helper, Some(ModuleId(0)));
        assert_eq!(
            acts(&helped.waves[2]),
            [
                (4, Top, 3, Bottom),
                (5, Bottom, 1, Top),
                (6, Bottom, 3, Top),
                (7, Top, 1, Bottom)
            ]
        );
        for a in helped.waves[2].iter() {
            assert_eq!(a.helper, None);
        }

        // The docking action multiset is untouched by helper insertion.
        let mut before: Vec<_> = schedule.actions().map(|a| a.action()).collect();
        let mut after: Vec<_> = helped.actions().map(|a| a.action()).collect();
        before.sort();
        after.sort();
        assert_eq!(before, after);

        // Two helpers service one wave concurrently.
        let two = insert_helper_actions(&schedule, &[ModuleId(0), ModuleId(9)]).unwrap();
        assert_eq!(two.waves.len(), 2);
        assert_eq!(two.waves[0].len(), 2);
        let helpers: Vec<_> = two.waves[0].iter().map(|a| a.helper).collect();
        assert!(helpers.contains(&Some(ModuleId(0))) && helpers.contains(&Some(ModuleId(9))));
    }

    #[test]
    fn missing_helper_is_an_error() {
        let schedule = plan_assembly(&task3_target(), &task3_reported_mapping()).unwrap();
        assert!(matches!(
            insert_helper_actions(&schedule, &[]),
            Err(ScheduleError::HelperRequired(_))
        ));
        // A schedule without side-face actions passes through unchanged.
        let plain = plan_assembly(&task1_target(), &task1_reported_mapping()).unwrap();
        let out = insert_helper_actions(&plain, &[]).unwrap();
        assert_eq!(plain, out);
    }

    #[test]
    fn schedule_covers_every_edge_exactly_once() {
        for (g, f) in [
            (task1_target(), task1_reported_mapping()),
            (task3_target(), task3_reported_mapping()),
        ] {
            let schedule = plan_assembly(&g, &f).unwrap();
            let inverse = f.inverse();
            let mut expected: Vec<(u32, Face, u32, Face)> = g
                .edges()
                .iter()
                .map(|e| (e.a.0, e.fa, e.b.0, e.fb))
                .collect();
            let mut got: Vec<(u32, Face, u32, Face)> = schedule
                .actions()
                .map(|a| {
                    // Express the action as a target-topology edge, parent first.
                    (
                        inverse[&a.target].0,
                        a.target_face,
                        inverse[&a.mover].0,
                        a.mover_face,
                    )
                })
                .collect();
            expected.sort();
            got.sort();
            assert_eq!(expected, got);
        }
    }

    #[test]
    fn parent_docks_before_child() {
        let schedule = plan_assembly(&task1_target(), &task1_reported_mapping()).unwrap();
        let root = ModuleId(1);
        let mut attached = BTreeSet::from([root]);
        for wave in &schedule.waves {
            for a in wave {
                assert!(
                    attached.contains(&a.target),
                    "target {} not attached",
                    a.target
                );
            }
            for a in wave {
                attached.insert(a.mover);
            }
        }
    }

    /// Walker-to-mobile-arm reconfiguration: eleven modules, four
    /// dock/undock pairs, three dock waves after the undock wave.
    pub(crate) fn reconfig_fixture() -> (
        ConfigGraph,
        ConfigGraph,
        Mapping,
        Vec<ReconfigurationAction>,
    ) {
        let walker = ConfigGraph::from_edges(
            1..=11,
            [
                (1, Left, 10, Top),
                (1, Right, 8, Top),
                (1, Bottom, 11, Top),
                (1, Top, 9, Top),
                (9, Bottom, 3, Top),
                (11, Bottom, 2, Top),
                (2, Left, 4, Left),
                (2, Right, 6, Right),
                (4, Top, 5, Top),
                (6, Top, 7, Top),
            ],
        )
        .unwrap();
        let arm = ConfigGraph::from_edges(
            1..=11,
            [
                (1, Left, 2, Top),
                (1, Right, 3, Top),
                (1, Bottom, 4, Top),
                (1, Top, 5, Top),
                (5, Bottom, 8, Top),
                (4, Bottom, 9, Top),
                (2, Bottom, 6, Top),
                (3, Bottom, 7, Top),
                (9, Bottom, 10, Top),
                (10, Bottom, 11, Top),
            ],
        )
        .unwrap();
        let goal_to_module = mapping(&[
            (1, 1),
            (2, 10),
            (3, 8),
            (4, 11),
            (5, 9),
            (6, 4),
            (7, 5),
            (8, 3),
            (9, 2),
            (10, 6),
            (11, 7),
        ]);
        let a = |m: u32, mf, t: u32, tf| AssemblyAction::new(ModuleId(m), mf, ModuleId(t), tf);
        let actions = alloc::vec![
            ReconfigurationAction {
                undock: a(5, Top, 4, Top),
                dock: a(5, Top, 8, Bottom),
            },
            ReconfigurationAction {
                undock: a(7, Top, 6, Top),
                dock: a(7, Top, 6, Bottom),
            },
            ReconfigurationAction {
                undock: a(4, Left, 2, Left),
                dock: a(4, Top, 10, Bottom),
            },
            ReconfigurationAction {
                undock: a(6, Right, 2, Right),
                dock: a(6, Top, 2, Bottom),
            },
        ];
        (walker, arm, goal_to_module, actions)
    }

    #[test]
    fn reconfiguration_parallelizes_as_reported() {
        let (walker, arm, f_inv, actions) = reconfig_fixture();
        assert_eq!(find_root(&arm).unwrap(), ModuleId(1));
        let schedule = parallelize_reconfiguration(&walker, &arm, &f_inv, &actions).unwrap();
        assert_eq!(schedule.waves.len(), 4);
        assert!(schedule.waves[0]
            .iter()
            .all(|a| a.kind == ActionKind::Undock));
        assert_eq!(
            acts(&schedule.waves[0]),
            [
                (4, Left, 2, Left),
                (5, Top, 4, Top),
                (6, Right, 2, Right),
                (7, Top, 6, Top)
            ]
        );
        assert_eq!(
            acts(&schedule.waves[1]),
            [(4, Top, 10, Bottom), (5, Top, 8, Bottom)]
        );
        assert_eq!(acts(&schedule.waves[2]), [(6, Top, 2, Bottom)]);
        assert_eq!(acts(&schedule.waves[3]), [(7, Top, 6, Bottom)]);
    }

    #[test]
    fn reconfiguration_edge_cases() {
        let (walker, arm, f_inv, mut actions) = reconfig_fixture();
        assert_eq!(
            parallelize_reconfiguration(&walker, &arm, &f_inv, &[]).unwrap(),
            Schedule::default()
        );

        let single = parallelize_reconfiguration(&walker, &arm, &f_inv, &actions[3..4]).unwrap();
        assert_eq!(single.waves.len(), 2);
        assert_eq!(single.waves[0][0].kind, ActionKind::Undock);
        assert_eq!(acts(&single.waves[1]), [(6, Top, 2, Bottom)]);

        // Module 7 docks onto module 6, which must itself be docked by some
        // listed action.
        let orphan = parallelize_reconfiguration(&walker, &arm, &f_inv, &actions[1..2]);
        assert!(matches!(
            orphan,
            Err(ScheduleError::DockTargetNeverAttached(ModuleId(6)))
        ));

        actions[0].undock = AssemblyAction::new(ModuleId(5), Top, ModuleId(9), Top);
        assert!(matches!(
            parallelize_reconfiguration(&walker, &arm, &f_inv, &actions),
            Err(ScheduleError::UndockEdgeMissing(_))
        ));

        // A dock pointing up the goal tree (module 9 is the parent side of
        // its persistent joint with module 3) is rejected.
        let (walker, arm, f_inv, _) = reconfig_fixture();
        let upward = ReconfigurationAction {
            undock: AssemblyAction::new(ModuleId(5), Top, ModuleId(4), Top),
            dock: AssemblyAction::new(ModuleId(9), Bottom, ModuleId(3), Top),
        };
        assert!(matches!(
            parallelize_reconfiguration(&walker, &arm, &f_inv, &[upward]),
            Err(ScheduleError::DockNotDownward(_))
        ));
    }

    #[test]
    fn deep_side_face_actions_also_get_helpers() {
        // A side-face dock below the root still needs helper service.
        let g = ConfigGraph::from_edges(
            [0, 1, 2, 3],
            [
                (0, Top, 1, Bottom),
                (1, Top, 2, Bottom),
                (2, Left, 3, Right),
            ],
        )
        .unwrap();
        let f = mapping(&[(0, 10), (1, 11), (2, 12), (3, 13)]);
        let schedule = plan_assembly(&g, &f).unwrap();
        assert_eq!(schedule.waves.len(), 2);
        let helped = insert_helper_actions(&schedule, &[ModuleId(9)]).unwrap();
        assert_eq!(helped.waves.len(), 2);
        assert!(helped.waves[0].iter().all(|a| a.helper.is_none()));
        assert_eq!(acts(&helped.waves[1]), [(13, Right, 12, Left)]);
        assert_eq!(helped.waves[1][0].helper, Some(ModuleId(9)));
    }

    #[test]
    fn grid_covering_and_occupancy() {
        let mut grid = GridMap::covering(
            Vec2::ZERO,
            0.1,
            [Vec2::new(0.31, -0.22), Vec2::new(-0.11, 0.05)],
            2,
        );
        assert_eq!(grid.bounds(), (GridCell::new(-3, -4), GridCell::new(5, 3)));
        assert_eq!(grid.cell_of(Vec2::new(0.31, -0.22)), GridCell::new(3, -2));
        let c = grid.center_of(GridCell::new(3, -2));
        assert!((c.x - 0.3).abs() < 1e-12 && (c.y + 0.2).abs() < 1e-12);

        grid.occupy_box(Vec2::new(0.08, 0.08), 0.04);
        // The square straddles four cells.
        for cell in [
            GridCell::new(0, 0),
            GridCell::new(1, 0),
            GridCell::new(0, 1),
            GridCell::new(1, 1),
        ] {
            assert!(grid.is_occupied(cell), "{cell:?} should be occupied");
        }
        assert!(grid.is_free(GridCell::new(2, 0)));
        assert!(
            !grid.is_free(GridCell::new(9, 9)),
            "out of bounds is not free"
        );
    }
}
