//! Tree-shaped module configuration graphs with typed face connections.
//!
//! A configuration is a graph whose vertices are module ids and whose edges
//! carry the pair of mated connectors. Only acyclic (tree) configurations are
//! accepted; the root of a tree is its center: the module whose per-connector
//! subtree counts `CN^v(c)` all stay within half the module count.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use crate::math::Vec2;

/// Identifier of one physical or target-topology module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ModuleId(pub u32);

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One of the four docking connectors of a module.
///
/// The declaration order is the canonical connector order and doubles as the
/// deterministic tie-break order wherever connectors are sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Face {
    Left,
    Right,
    Top,
    Bottom,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Top, Face::Bottom];

    pub fn index(self) -> usize {
        match self {
            Face::Left => 0,
            Face::Right => 1,
            Face::Top => 2,
            Face::Bottom => 3,
        }
    }

    /// The connector on the opposite side of the body.
    pub fn opposite(self) -> Face {
        match self {
            Face::Left => Face::Right,
            Face::Right => Face::Left,
            Face::Top => Face::Bottom,
            Face::Bottom => Face::Top,
        }
    }

    /// Whether this is a side (LEFT/RIGHT) connector.
    pub fn is_side(self) -> bool {
        matches!(self, Face::Left | Face::Right)
    }

    /// Outward direction of the face in the module body frame
    /// (TOP `+x`, BOTTOM `-x`, LEFT `+y`, RIGHT `-y`).
    pub fn direction(self) -> Vec2 {
        match self {
            Face::Top => Vec2::new(1.0, 0.0),
            Face::Bottom => Vec2::new(-1.0, 0.0),
            Face::Left => Vec2::new(0.0, 1.0),
            Face::Right => Vec2::new(0.0, -1.0),
        }
    }

    /// Body-frame angle of [`Face::direction`].
    pub fn angle(self) -> f64 {
        use core::f64::consts::{FRAC_PI_2, PI};
        match self {
            Face::Top => 0.0,
            Face::Left => FRAC_PI_2,
            Face::Bottom => PI,
            Face::Right => -FRAC_PI_2,
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Face::Left => "LEFT",
            Face::Right => "RIGHT",
            Face::Top => "TOP",
            Face::Bottom => "BOTTOM",
        };
        write!(f, "{s}")
    }
}

/// A connection seen from one endpoint: own connector, mating connector, and
/// the mount orientation (present exactly for BOTTOM-BOTTOM joints).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Connection {
    pub face: Face,
    pub face2con: Face,
    pub orientation: Option<u8>,
}

impl Connection {
    pub fn new(face: Face, face2con: Face) -> Self {
        Self {
            face,
            face2con,
            orientation: None,
        }
    }

    pub fn with_orientation(face: Face, face2con: Face, orientation: u8) -> Self {
        Self {
            face,
            face2con,
            orientation: Some(orientation),
        }
    }

    pub fn is_bottom_bottom(&self) -> bool {
        self.face == Face::Bottom && self.face2con == Face::Bottom
    }

    /// The same connection seen from the other module.
    pub fn reversed(&self) -> Connection {
        Connection {
            face: self.face2con,
            face2con: self.face,
            orientation: self.orientation,
        }
    }
}

/// One undirected edge with both connector endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeRecord {
    pub a: ModuleId,
    pub fa: Face,
    pub b: ModuleId,
    pub fb: Face,
    #[cfg_attr(feature = "serde", serde(default))]
    pub orientation: Option<u8>,
}

impl EdgeRecord {
    /// The connection as seen from `endpoint`, or `None` if the edge does not
    /// touch it. Both views are derived from one record, so they are mutually
    /// consistent by construction.
    pub fn view_from(&self, endpoint: ModuleId) -> Option<Connection> {
        if endpoint == self.a {
            Some(Connection {
                face: self.fa,
                face2con: self.fb,
                orientation: self.orientation,
            })
        } else if endpoint == self.b {
            Some(Connection {
                face: self.fb,
                face2con: self.fa,
                orientation: self.orientation,
            })
        } else {
            None
        }
    }

    pub fn other(&self, endpoint: ModuleId) -> Option<ModuleId> {
        if endpoint == self.a {
            Some(self.b)
        } else if endpoint == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Module configuration graph `G = (V, E)`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfigGraph {
    #[cfg_attr(feature = "serde", serde(rename = "modules"))]
    vertices: BTreeSet<ModuleId>,
    #[cfg_attr(feature = "serde", serde(rename = "connections", default))]
    edges: Vec<EdgeRecord>,
}

/// Hard construction errors. Structural problems (cycles, reused connectors,
/// disconnection) are not errors here; they are reported as data by
/// [`validate_topology`].
#[derive(Clone, Debug, PartialEq)]
pub enum TopologyError {
    UnknownModule(ModuleId),
    SelfLoop(ModuleId),
    /// Orientation attribute present on a non BOTTOM-BOTTOM connection or
    /// missing/out-of-range on a BOTTOM-BOTTOM one.
    OrientationInvariant {
        a: ModuleId,
        b: ModuleId,
    },
    /// Operation requires a valid tree topology.
    Invalid(ValidationReport),
}

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyError::UnknownModule(id) => write!(f, "unknown module {id}"),
            TopologyError::SelfLoop(id) => write!(f, "module {id} connected to itself"),
            TopologyError::OrientationInvariant { a, b } => write!(
                f,
                "connection {a}-{b}: orientation must be present (0 or 1) exactly for BOTTOM-BOTTOM joints"
            ),
            TopologyError::Invalid(report) => {
                write!(f, "invalid topology: ")?;
                let mut first = true;
                for v in &report.violations {
                    if !first {
                        write!(f, "; ")?;
                    }
                    write!(f, "{v}")?;
                    first = false;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for TopologyError {}

impl ConfigGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a graph from module ids and `(a, fa, b, fb)` edges, no
    /// BOTTOM-BOTTOM joints involved.
    pub fn from_edges(
        modules: impl IntoIterator<Item = u32>,
        edges: impl IntoIterator<Item = (u32, Face, u32, Face)>,
    ) -> Result<Self, TopologyError> {
        let mut g = Self::new();
        for m in modules {
            g.add_module(ModuleId(m));
        }
        for (a, fa, b, fb) in edges {
            let orientation = if fa == Face::Bottom && fb == Face::Bottom {
                Some(0)
            } else {
                None
            };
            g.connect(ModuleId(a), fa, ModuleId(b), fb, orientation)?;
        }
        Ok(g)
    }

    pub fn add_module(&mut self, id: ModuleId) -> bool {
        self.vertices.insert(id)
    }

    /// Record a connection between `a`'s connector `fa` and `b`'s connector
    /// `fb`. `orientation` must be `Some(0|1)` exactly when both faces are
    /// BOTTOM. Structural violations (connector reuse, cycles) are allowed
    /// here and surfaced by [`validate_topology`].
    pub fn connect(
        &mut self,
        a: ModuleId,
        fa: Face,
        b: ModuleId,
        fb: Face,
        orientation: Option<u8>,
    ) -> Result<(), TopologyError> {
        if !self.vertices.contains(&a) {
            return Err(TopologyError::UnknownModule(a));
        }
        if !self.vertices.contains(&b) {
            return Err(TopologyError::UnknownModule(b));
        }
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        let bottom_bottom = fa == Face::Bottom && fb == Face::Bottom;
        let orientation_ok = match orientation {
            Some(v) => bottom_bottom && v <= 1,
            None => !bottom_bottom,
        };
        if !orientation_ok {
            return Err(TopologyError::OrientationInvariant { a, b });
        }
        self.edges.push(EdgeRecord {
            a,
            fa,
            b,
            fb,
            orientation,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, id: ModuleId) -> bool {
        self.vertices.contains(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = ModuleId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    /// Neighbors of `v` as `(other, own_face, other_face)`, in edge insertion
    /// order. Scans the edge list; build an [`adjacency`](Self::adjacency)
    /// index for traversals.
    pub fn neighbors(&self, v: ModuleId) -> Vec<(ModuleId, Face, Face)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if let (Some(other), Some(conn)) = (e.other(v), e.view_from(v)) {
                out.push((other, conn.face, conn.face2con));
            }
        }
        out
    }

    /// Full neighbor index `module -> [(other, own_face, other_face)]`,
    /// built in one pass. Edges touching unknown modules are skipped.
    pub fn adjacency(&self) -> BTreeMap<ModuleId, Vec<(ModuleId, Face, Face)>> {
        let mut adj: BTreeMap<ModuleId, Vec<(ModuleId, Face, Face)>> =
            self.vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in &self.edges {
            if e.a == e.b || !self.vertices.contains(&e.a) || !self.vertices.contains(&e.b) {
                continue;
            }
            adj.get_mut(&e.a).expect("known").push((e.b, e.fa, e.fb));
            adj.get_mut(&e.b).expect("known").push((e.a, e.fb, e.fa));
        }
        adj
    }

    /// The edge using `v`'s connector `face`, if any.
    pub fn edge_at(&self, v: ModuleId, face: Face) -> Option<&EdgeRecord> {
        self.edges
            .iter()
            .find(|e| (e.a == v && e.fa == face) || (e.b == v && e.fb == face))
    }
}

/// One structural violation found by [`validate_topology`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyGraph,
    UnknownModule {
        id: ModuleId,
    },
    SelfLoop {
        id: ModuleId,
    },
    ConnectorReused {
        module: ModuleId,
        face: Face,
    },
    NotConnected,
    NotATree {
        vertices: usize,
        edges: usize,
    },
    /// BOTTOM-BOTTOM joint mounted with orientation 1 (excluded from targets).
    ExcludedOrientation {
        a: ModuleId,
        b: ModuleId,
    },
    OrientationMismatch {
        a: ModuleId,
        b: ModuleId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no modules"),
            Violation::UnknownModule { id } => {
                write!(f, "connection references unknown module {id}")
            }
            Violation::SelfLoop { id } => write!(f, "module {id} connected to itself"),
            Violation::ConnectorReused { module, face } => {
                write!(f, "connector {face} of module {module} used more than once")
            }
            Violation::NotConnected => write!(f, "graph is not connected"),
            Violation::NotATree { vertices, edges } => {
                write!(f, "not a tree: {vertices} modules but {edges} connections")
            }
            Violation::ExcludedOrientation { a, b } => write!(
                f,
                "BOTTOM-BOTTOM connection {a}-{b} with orientation 1 is excluded"
            ),
            Violation::OrientationMismatch { a, b } => write!(
                f,
                "connection {a}-{b} has an orientation attribute inconsistent with its faces"
            ),
        }
    }
}

/// Outcome of [`validate_topology`]; violations are data, not failures.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Neighbor index produced by [`ConfigGraph::adjacency`].
pub type Adjacency = BTreeMap<ModuleId, Vec<(ModuleId, Face, Face)>>;

/// Check that a graph is a connected tree, that every connector mates at most
/// once, and that no BOTTOM-BOTTOM joint uses the excluded orientation 1.
pub fn validate_topology(graph: &ConfigGraph) -> ValidationReport {
    validate_with_adjacency(graph, &graph.adjacency())
}

fn validate_with_adjacency(graph: &ConfigGraph, adjacency: &Adjacency) -> ValidationReport {
    let mut violations = Vec::new();
    if graph.is_empty() {
        violations.push(Violation::EmptyGraph);
        return ValidationReport { violations };
    }

    let mut connector_use: BTreeMap<(ModuleId, Face), usize> = BTreeMap::new();
    for e in graph.edges() {
        for id in [e.a, e.b] {
            if !graph.contains(id) {
                violations.push(Violation::UnknownModule { id });
            }
        }
        if e.a == e.b {
            violations.push(Violation::SelfLoop { id: e.a });
            continue;
        }
        *connector_use.entry((e.a, e.fa)).or_insert(0) += 1;
        *connector_use.entry((e.b, e.fb)).or_insert(0) += 1;

        let bottom_bottom = e.fa == Face::Bottom && e.fb == Face::Bottom;
        match e.orientation {
            Some(1) if bottom_bottom => {
                violations.push(Violation::ExcludedOrientation { a: e.a, b: e.b })
            }
            Some(v) if !bottom_bottom || v > 1 => {
                violations.push(Violation::OrientationMismatch { a: e.a, b: e.b })
            }
            None if bottom_bottom => {
                violations.push(Violation::OrientationMismatch { a: e.a, b: e.b })
            }
            _ => {}
        }
    }
    for ((module, face), uses) in connector_use {
        if uses > 1 {
            violations.push(Violation::ConnectorReused { module, face });
        }
    }

    let n = graph.len();
    if graph.edges().len() != n - 1 {
        violations.push(Violation::NotATree {
            vertices: n,
            edges: graph.edges().len(),
        });
    }

    // Connectivity over well-formed edges.
    let start = *graph.vertices.iter().next().expect("non-empty");
    let mut seen = BTreeSet::new();
    seen.insert(start);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &(other, _, _) in &adjacency[&v] {
            if seen.insert(other) {
                queue.push_back(other);
            }
        }
    }
    if seen.len() != n {
        violations.push(Violation::NotConnected);
    }

    ValidationReport { violations }
}

/// Root metadata of a tree rooted at `root`: depth and height per module and
/// the per-connector subtree counts `CN^v(c)` (root-independent).
#[derive(Clone, Debug, PartialEq)]
pub struct RootedInfo {
    pub root: ModuleId,
    pub depth: BTreeMap<ModuleId, usize>,
    pub height: BTreeMap<ModuleId, usize>,
    pub cn: BTreeMap<(ModuleId, Face), usize>,
}

impl RootedInfo {
    /// Height of the rooted tree (`depth` of the deepest module).
    pub fn tree_depth(&self) -> usize {
        self.depth.values().copied().max().unwrap_or(0)
    }

    pub fn cn_of(&self, v: ModuleId, c: Face) -> usize {
        self.cn.get(&(v, c)).copied().unwrap_or(0)
    }
}

struct RootedStructure {
    /// Breadth-first order starting at the seed.
    order: Vec<ModuleId>,
    /// `child -> (parent, parent_face, child_face)`.
    parent: BTreeMap<ModuleId, (ModuleId, Face, Face)>,
}

fn root_at(graph: &ConfigGraph, seed: ModuleId, adjacency: &Adjacency) -> RootedStructure {
    let mut order = Vec::with_capacity(graph.len());
    let mut parent = BTreeMap::new();
    let mut seen = BTreeSet::new();
    seen.insert(seed);
    let mut queue = VecDeque::from([seed]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(other, own_face, other_face) in &adjacency[&v] {
            if seen.insert(other) {
                parent.insert(other, (v, own_face, other_face));
                queue.push_back(other);
            }
        }
    }
    RootedStructure { order, parent }
}

/// The bottom-up connector-count pass, seeded at an arbitrary module. Returns
/// the full `CN` table plus the number of elementary steps taken (used to
/// check the linear-time bound). `CN` values are independent of the seed.
fn cn_table_counted(
    graph: &ConfigGraph,
    seed: ModuleId,
    adjacency: &Adjacency,
) -> (BTreeMap<(ModuleId, Face), usize>, usize) {
    let n = graph.len();
    let mut steps = 0usize;
    let structure = root_at(graph, seed, adjacency);

    // children[v] = (parent_face on v, child, child's mating face)
    let mut children: BTreeMap<ModuleId, Vec<(Face, ModuleId, Face)>> = BTreeMap::new();
    for (&child, &(parent, pface, cface)) in &structure.parent {
        children
            .entry(parent)
            .or_default()
            .push((pface, child, cface));
        steps += 1;
    }

    // Heights bottom-up over the reversed breadth-first order.
    let mut height: BTreeMap<ModuleId, usize> = BTreeMap::new();
    for &v in structure.order.iter().rev() {
        let h = children
            .get(&v)
            .map(|cs| {
                cs.iter()
                    .map(|&(_, c, _)| height[&c] + 1)
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0);
        height.insert(v, h);
        steps += 1;
    }
    let max_height = height.values().copied().max().unwrap_or(0);

    let mut by_height: Vec<Vec<ModuleId>> = alloc::vec![Vec::new(); max_height + 1];
    for (&v, &h) in &height {
        by_height[h].push(v);
        steps += 1;
    }

    let mut cn: BTreeMap<(ModuleId, Face), usize> = BTreeMap::new();
    for bucket in by_height.iter().skip(1) {
        for &v in bucket {
            let Some(kids) = children.get(&v) else {
                continue;
            };
            for &(pface, child, cface) in kids {
                // Modules hanging below `child`, over its non-mating faces.
                let below: usize = Face::ALL
                    .iter()
                    .filter(|&&f| f != cface)
                    .map(|&f| cn.get(&(child, f)).copied().unwrap_or(0))
                    .sum();
                cn.insert((v, pface), 1 + below);
                cn.insert((child, cface), n - 1 - below);
                steps += 4;
            }
        }
    }

    // Fill explicit zeros so every (module, face) pair is present.
    for v in graph.vertices() {
        for f in Face::ALL {
            cn.entry((v, f)).or_insert(0);
            steps += 1;
        }
    }
    (cn, steps)
}

fn centers_from_cn(graph: &ConfigGraph, cn: &BTreeMap<(ModuleId, Face), usize>) -> Vec<ModuleId> {
    let n = graph.len();
    graph
        .vertices()
        .filter(|&v| {
            Face::ALL
                .iter()
                .all(|&f| 2 * cn.get(&(v, f)).copied().unwrap_or(0) <= n)
        })
        .collect()
}

/// All modules satisfying the root condition `CN^v(c) <= |V|/2` for every
/// connector. A tree has one such module, or two adjacent ones.
pub fn centers(graph: &ConfigGraph) -> Result<Vec<ModuleId>, TopologyError> {
    let adjacency = graph.adjacency();
    let report = validate_with_adjacency(graph, &adjacency);
    if !report.ok() {
        return Err(TopologyError::Invalid(report));
    }
    let seed = graph.vertices().next().expect("validated non-empty");
    let (cn, _) = cn_table_counted(graph, seed, &adjacency);
    Ok(centers_from_cn(graph, &cn))
}

pub(crate) fn find_root_counted(graph: &ConfigGraph) -> Result<(ModuleId, usize), TopologyError> {
    let adjacency = graph.adjacency();
    let report = validate_with_adjacency(graph, &adjacency);
    if !report.ok() {
        return Err(TopologyError::Invalid(report));
    }
    let seed = graph.vertices().next().expect("validated non-empty");
    let (cn, steps) = cn_table_counted(graph, seed, &adjacency);
    let root = centers_from_cn(graph, &cn)
        .into_iter()
        .min()
        .expect("a tree always has a center");
    Ok((root, steps))
}

/// Root module of a valid tree via the bottom-up height-ordered connector
/// count pass; when two adjacent centers qualify, the smaller id wins.
pub fn find_root(graph: &ConfigGraph) -> Result<ModuleId, TopologyError> {
    find_root_counted(graph).map(|(root, _)| root)
}

/// Explicit tie-break entry point: the smallest-id module among all centers.
/// Identical to [`find_root`] by construction.
pub fn tie_break_roots(graph: &ConfigGraph) -> Result<ModuleId, TopologyError> {
    Ok(centers(graph)?
        .into_iter()
        .min()
        .expect("a tree always has a center"))
}

/// Depth, height and connector counts of `graph` rooted at `root`.
pub fn rooted_info(graph: &ConfigGraph, root: ModuleId) -> Result<RootedInfo, TopologyError> {
    if !graph.contains(root) {
        return Err(TopologyError::UnknownModule(root));
    }
    let adjacency = graph.adjacency();
    let report = validate_with_adjacency(graph, &adjacency);
    if !report.ok() {
        return Err(TopologyError::Invalid(report));
    }

    let structure = root_at(graph, root, &adjacency);
    let mut depth = BTreeMap::new();
    depth.insert(root, 0usize);
    for &v in &structure.order {
        if let Some(&(p, _, _)) = structure.parent.get(&v) {
            let d = depth[&p] + 1;
            depth.insert(v, d);
        }
    }

    let mut children: BTreeMap<ModuleId, Vec<ModuleId>> = BTreeMap::new();
    for (&child, &(parent, _, _)) in &structure.parent {
        children.entry(parent).or_default().push(child);
    }
    let mut height = BTreeMap::new();
    for &v in structure.order.iter().rev() {
        let h = children
            .get(&v)
            .map(|cs| cs.iter().map(|c| height[c] + 1).max().unwrap_or(0))
            .unwrap_or(0);
        height.insert(v, h);
    }

    let (cn, _) = cn_table_counted(graph, root, &adjacency);
    Ok(RootedInfo {
        root,
        depth,
        height,
        cn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// The three-module chain: 1 T-T 2, 2 R-L 3.
    fn three_chain() -> ConfigGraph {
        ConfigGraph::from_edges(
            [1, 2, 3],
            [
                (1, Face::Top, 2, Face::Top),
                (2, Face::Right, 3, Face::Left),
            ],
        )
        .unwrap()
    }

    /// Random tree with ids 0..n and all degrees <= 4.
    pub(crate) fn random_bounded_tree(n: u32, rng: &mut StdRng) -> ConfigGraph {
        let mut g = ConfigGraph::new();
        g.add_module(ModuleId(0));
        let mut free: Vec<(u32, Face)> = Face::ALL.iter().map(|&f| (0, f)).collect();
        for id in 1..n {
            g.add_module(ModuleId(id));
            let slot = rng.random_range(0..free.len());
            let (parent, pface) = free.swap_remove(slot);
            // The child mates through a uniformly chosen connector; avoid the
            // excluded BOTTOM-BOTTOM orientation question by never mating B-B.
            let cface = loop {
                let f = Face::ALL[rng.random_range(0..4)];
                if !(f == Face::Bottom && pface == Face::Bottom) {
                    break f;
                }
            };
            g.connect(ModuleId(parent), pface, ModuleId(id), cface, None)
                .unwrap();
            for &f in &Face::ALL {
                if f != cface {
                    free.push((id, f));
                }
            }
        }
        g
    }

    /// Brute-force center set: remove v, every remaining component must have
    /// at most |V|/2 modules.
    fn brute_force_centers(g: &ConfigGraph) -> Vec<ModuleId> {
        let n = g.len();
        let mut out = Vec::new();
        for v in g.vertices() {
            let mut ok = true;
            for (start, _, _) in g.neighbors(v) {
                let mut seen = BTreeSet::from([v, start]);
                let mut queue = VecDeque::from([start]);
                let mut size = 1usize;
                while let Some(u) = queue.pop_front() {
                    for (w, _, _) in g.neighbors(u) {
                        if seen.insert(w) {
                            size += 1;
                            queue.push_back(w);
                        }
                    }
                }
                if 2 * size > n {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn three_chain_is_valid_and_rooted_at_two() {
        let g = three_chain();
        assert!(validate_topology(&g).ok());
        assert_eq!(find_root(&g).unwrap(), ModuleId(2));

        let info = rooted_info(&g, ModuleId(2)).unwrap();
        assert_eq!(info.depth[&ModuleId(2)], 0);
        assert_eq!(info.depth[&ModuleId(1)], 1);
        assert_eq!(info.depth[&ModuleId(3)], 1);
        assert_eq!(info.cn_of(ModuleId(2), Face::Top), 1);
        assert_eq!(info.cn_of(ModuleId(2), Face::Right), 1);
        assert_eq!(info.cn_of(ModuleId(1), Face::Top), 2);
        assert_eq!(info.cn_of(ModuleId(3), Face::Left), 2);
    }

    #[test]
    fn single_module_is_its_own_root() {
        let g = ConfigGraph::from_edges([7], []).unwrap();
        assert!(validate_topology(&g).ok());
        assert_eq!(find_root(&g).unwrap(), ModuleId(7));
    }

    #[test]
    fn rooted_info_rejects_unknown_roots() {
        let g = three_chain();
        assert!(matches!(
            rooted_info(&g, ModuleId(9)),
            Err(TopologyError::UnknownModule(ModuleId(9)))
        ));
    }

    #[test]
    fn two_module_heights() {
        let g = ConfigGraph::from_edges([0, 1], [(0, Face::Top, 1, Face::Bottom)]).unwrap();
        let info = rooted_info(&g, ModuleId(0)).unwrap();
        assert_eq!(info.height[&ModuleId(0)], 1);
        assert_eq!(info.height[&ModuleId(1)], 0);
        let info = rooted_info(&g, ModuleId(1)).unwrap();
        assert_eq!(info.height[&ModuleId(1)], 1);
        assert_eq!(info.height[&ModuleId(0)], 0);
    }

    #[test]
    fn excluded_orientation_is_a_violation_not_an_error() {
        let mut g = ConfigGraph::new();
        g.add_module(ModuleId(0));
        g.add_module(ModuleId(1));
        g.connect(
            ModuleId(0),
            Face::Bottom,
            ModuleId(1),
            Face::Bottom,
            Some(1),
        )
        .unwrap();
        let report = validate_topology(&g);
        assert!(!report.ok());
        assert!(matches!(
            report.violations[0],
            Violation::ExcludedOrientation { .. }
        ));
        // Orientation 0 is fine.
        let mut g = ConfigGraph::new();
        g.add_module(ModuleId(0));
        g.add_module(ModuleId(1));
        g.connect(
            ModuleId(0),
            Face::Bottom,
            ModuleId(1),
            Face::Bottom,
            Some(0),
        )
        .unwrap();
        assert!(validate_topology(&g).ok());
    }

    #[test]
    fn connector_reuse_and_cycles_are_reported() {
        let mut g = ConfigGraph::from_edges(
            [0, 1, 2],
            [
                (0, Face::Top, 1, Face::Bottom),
                (0, Face::Top, 2, Face::Bottom),
            ],
        )
        .unwrap();
        let report = validate_topology(&g);
        assert!(report.violations.contains(&Violation::ConnectorReused {
            module: ModuleId(0),
            face: Face::Top
        }));

        g.connect(ModuleId(1), Face::Top, ModuleId(2), Face::Top, None)
            .unwrap();
        let report = validate_topology(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NotATree { .. })));
        assert!(find_root(&g).is_err());
    }

    #[test]
    fn orientation_invariant_enforced_at_connect() {
        let mut g = ConfigGraph::new();
        g.add_module(ModuleId(0));
        g.add_module(ModuleId(1));
        assert!(g
            .connect(ModuleId(0), Face::Top, ModuleId(1), Face::Top, Some(0))
            .is_err());
        assert!(g
            .connect(ModuleId(0), Face::Bottom, ModuleId(1), Face::Bottom, None)
            .is_err());
    }

    #[test]
    fn tie_break_prefers_smaller_id() {
        // Two-module path: both are centers.
        let g = ConfigGraph::from_edges([4, 9], [(9, Face::Top, 4, Face::Bottom)]).unwrap();
        assert_eq!(tie_break_roots(&g).unwrap(), ModuleId(4));

        // Path 3-1-2-4: centers are 1 and 2.
        let g = ConfigGraph::from_edges(
            [1, 2, 3, 4],
            [
                (3, Face::Top, 1, Face::Bottom),
                (1, Face::Top, 2, Face::Bottom),
                (2, Face::Top, 4, Face::Bottom),
            ],
        )
        .unwrap();
        assert_eq!(centers(&g).unwrap(), alloc::vec![ModuleId(1), ModuleId(2)]);
        assert_eq!(tie_break_roots(&g).unwrap(), ModuleId(1));
        assert_eq!(find_root(&g).unwrap(), ModuleId(1));

        // Star: the hub is the unique center regardless of ids.
        let g = ConfigGraph::from_edges(
            [5, 6, 7, 8, 9],
            [
                (9, Face::Left, 5, Face::Top),
                (9, Face::Right, 6, Face::Top),
                (9, Face::Top, 7, Face::Top),
                (9, Face::Bottom, 8, Face::Top),
            ],
        )
        .unwrap();
        assert_eq!(find_root(&g).unwrap(), ModuleId(9));
    }

    #[test]
    fn cn_sums_and_invariance_on_random_trees() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_bounded_tree(10, &mut rng);
            let n = g.len();
            let adjacency = g.adjacency();
            let (cn_a, _) = cn_table_counted(&g, g.vertices().next().unwrap(), &adjacency);
            let (cn_b, _) = cn_table_counted(&g, g.vertices().last().unwrap(), &adjacency);
            assert_eq!(cn_a, cn_b, "CN table must not depend on the seed");
            for v in g.vertices() {
                let total: usize = Face::ALL.iter().map(|&f| cn_a[&(v, f)]).sum();
                assert_eq!(total, n - 1);
            }
            let centers = brute_force_centers(&g);
            let root = find_root(&g).unwrap();
            assert!(centers.contains(&root));
            assert_eq!(root, centers.iter().copied().min().unwrap());
        }
    }

    #[test]
    fn find_root_step_count_is_linear() {
        let mut rng = StdRng::seed_from_u64(11);
        for &n in &[10u32, 100, 1_000, 10_000] {
            let g = random_bounded_tree(n, &mut rng);
            let (_, steps) = find_root_counted(&g).unwrap();
            assert!(
                steps <= 64 * n as usize + 64,
                "steps {steps} too large for n {n}"
            );
        }
    }

    #[cfg(feature = "serde")]
    #[test]
    fn graph_json_round_trip() {
        let g = three_chain();
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains("\"modules\":[1,2,3]"));
        assert!(json.contains("\"fa\":\"TOP\""));
        let back: ConfigGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }
}
