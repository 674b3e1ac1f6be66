//! Unfolding a target topology onto the plane.
//!
//! An assemblable tree can be laid flat with every pair of mated modules
//! exactly one module width apart and every center on a distinct lattice
//! point. The unfolded pose of each module relative to the tree root is the
//! goal pose the physical modules later drive to.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{wrap_angle, Pose2};
use crate::topology::{
    find_root, validate_topology, ConfigGraph, Connection, ModuleId, TopologyError,
    ValidationReport,
};

/// Module body width in meters (80 mm cube).
pub const MODULE_WIDTH: f64 = 0.08;

/// Two unfolded centers closer than `MODULE_WIDTH - OVERLAP_TOL` coincide on
/// the lattice and make the topology non-assemblable.
pub const OVERLAP_TOL: f64 = 1e-6;

/// Planar placement of every module of a target tree, root at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedLayout {
    poses: BTreeMap<ModuleId, Pose2>,
    root: ModuleId,
}

impl UnfoldedLayout {
    /// Assemble a layout from precomputed poses (used by tests and loaders;
    /// [`unfold`] is the normal constructor).
    pub fn from_poses(root: ModuleId, poses: BTreeMap<ModuleId, Pose2>) -> Self {
        Self { poses, root }
    }

    pub fn root(&self) -> ModuleId {
        self.root
    }

    pub fn pose(&self, id: ModuleId) -> Option<Pose2> {
        self.poses.get(&id).copied()
    }

    pub fn poses(&self) -> &BTreeMap<ModuleId, Pose2> {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ModuleId> + '_ {
        self.poses.keys().copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayoutError {
    /// Connection carries the excluded BOTTOM-BOTTOM orientation 1.
    ExcludedOrientation,
    InvalidTopology(ValidationReport),
    /// Unfolding placed two module centers on the same lattice point.
    Overlap {
        pairs: Vec<(ModuleId, ModuleId)>,
    },
}

impl fmt::Display for LayoutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutError::ExcludedOrientation => {
                write!(f, "BOTTOM-BOTTOM orientation 1 has no planar unfolding")
            }
            LayoutError::InvalidTopology(report) => {
                write!(
                    f,
                    "invalid topology ({} violations)",
                    report.violations.len()
                )
            }
            LayoutError::Overlap { pairs } => {
                write!(f, "unfolding overlaps:")?;
                for (a, b) in pairs {
                    write!(f, " {a}/{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for LayoutError {}

impl From<TopologyError> for LayoutError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Invalid(report) => LayoutError::InvalidTopology(report),
            other => LayoutError::InvalidTopology(ValidationReport {
                violations: alloc::vec![crate::topology::Violation::UnknownModule {
                    id: match other {
                        TopologyError::UnknownModule(id) | TopologyError::SelfLoop(id) => id,
                        _ => ModuleId(u32::MAX),
                    },
                }],
            }),
        }
    }
}

/// Pose of the child module in the parent's body frame for a connection seen
/// from the parent.
///
/// Face directions are TOP `+x`, BOTTOM `-x`, LEFT `+y`, RIGHT `-y`; the
/// child sits one module width along the parent's face with its mating face
/// pointing back, so e.g. TOP-TOP gives `(w, 0, pi)`.
pub fn relative_pose(conn: &Connection) -> Result<Pose2, LayoutError> {
    if conn.is_bottom_bottom() && conn.orientation == Some(1) {
        return Err(LayoutError::ExcludedOrientation);
    }
    let offset = conn.face.direction() * MODULE_WIDTH;
    let theta = wrap_angle(conn.face.angle() - conn.face2con.angle() + core::f64::consts::PI);
    Ok(Pose2::new(offset.x, offset.y, theta))
}

/// Unfold a valid tree: breadth-first from the root, composing each child's
/// relative pose into the parent's frame. Fails if two centers coincide.
pub fn unfold(graph: &ConfigGraph) -> Result<UnfoldedLayout, LayoutError> {
    let root = find_root(graph)?;
    unfold_at(graph, root)
}

/// Like [`unfold`] but rooted at a caller-chosen module. Pairwise relative
/// poses do not depend on the root, only the frame changes.
pub fn unfold_at(graph: &ConfigGraph, root: ModuleId) -> Result<UnfoldedLayout, LayoutError> {
    let report = validate_topology(graph);
    if !report.ok() {
        return Err(LayoutError::InvalidTopology(report));
    }
    if !graph.contains(root) {
        return Err(TopologyError::UnknownModule(root).into());
    }

    // Validation already rejected the excluded BOTTOM-BOTTOM orientation, so
    // the face pair alone determines each relative pose.
    let adjacency = graph.adjacency();
    let mut poses = BTreeMap::new();
    poses.insert(root, Pose2::IDENTITY);
    let mut queue = alloc::collections::VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let parent_pose = poses[&v];
        for &(child, own_face, child_face) in &adjacency[&v] {
            if poses.contains_key(&child) {
                continue;
            }
            let rel = relative_pose(&Connection::new(own_face, child_face))?;
            poses.insert(child, parent_pose.compose(rel).with_wrapped_angle());
            queue.push_back(child);
        }
    }

    let overlaps = coincident_pairs(&poses);
    if !overlaps.is_empty() {
        return Err(LayoutError::Overlap { pairs: overlaps });
    }
    Ok(UnfoldedLayout { poses, root })
}

fn coincident_pairs(poses: &BTreeMap<ModuleId, Pose2>) -> Vec<(ModuleId, ModuleId)> {
    let items: Vec<(ModuleId, Pose2)> = poses.iter().map(|(&id, &p)| (id, p)).collect();
    let mut pairs = Vec::new();
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let d = items[i].1.position().distance(items[j].1.position());
            if d < MODULE_WIDTH - OVERLAP_TOL {
                pairs.push((items[i].0, items[j].0));
            }
        }
    }
    pairs
}

/// Result of [`check_unfoldable`]: topology violations plus any overlapping
/// module pairs found by unfolding.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnfoldabilityReport {
    pub topology: ValidationReport,
    pub overlaps: Vec<(ModuleId, ModuleId)>,
}

impl UnfoldabilityReport {
    pub fn ok(&self) -> bool {
        self.topology.ok() && self.overlaps.is_empty()
    }
}

/// Whether a topology can be self-assembled: it must be a valid tree and its
/// unfolding must give every module a unique location.
pub fn check_unfoldable(graph: &ConfigGraph) -> UnfoldabilityReport {
    let topology = validate_topology(graph);
    if !topology.ok() {
        return UnfoldabilityReport {
            topology,
            overlaps: Vec::new(),
        };
    }
    let overlaps = match unfold(graph) {
        Ok(_) => Vec::new(),
        Err(LayoutError::Overlap { pairs }) => pairs,
        Err(_) => Vec::new(),
    };
    UnfoldabilityReport { topology, overlaps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Face;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, PI};

    const W: f64 = MODULE_WIDTH;

    #[test]
    fn frozen_relative_pose_table() {
        use Face::*;
        // All sixteen ordered face pairs, derived from the body-frame
        // convention; the ten unordered combinations are the distinct cases.
        let expected = [
            ((Top, Top), (W, 0.0, PI)),
            ((Top, Left), (W, 0.0, FRAC_PI_2)),
            ((Top, Bottom), (W, 0.0, 0.0)),
            ((Top, Right), (W, 0.0, -FRAC_PI_2)),
            ((Left, Top), (0.0, W, -FRAC_PI_2)),
            ((Left, Left), (0.0, W, PI)),
            ((Left, Bottom), (0.0, W, FRAC_PI_2)),
            ((Left, Right), (0.0, W, 0.0)),
            ((Bottom, Top), (-W, 0.0, 0.0)),
            ((Bottom, Left), (-W, 0.0, -FRAC_PI_2)),
            ((Bottom, Bottom), (-W, 0.0, PI)),
            ((Bottom, Right), (-W, 0.0, FRAC_PI_2)),
            ((Right, Top), (0.0, -W, FRAC_PI_2)),
            ((Right, Left), (0.0, -W, 0.0)),
            ((Right, Bottom), (0.0, -W, -FRAC_PI_2)),
            ((Right, Right), (0.0, -W, PI)),
        ];
        for ((fa, fb), (x, y, t)) in expected {
            let conn = if fa == Bottom && fb == Bottom {
                Connection::with_orientation(fa, fb, 0)
            } else {
                Connection::new(fa, fb)
            };
            let p = relative_pose(&conn).unwrap();
            assert_abs_diff_eq!(p.x, x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, y, epsilon = 1e-12);
            assert_abs_diff_eq!(p.theta, t, epsilon = 1e-12);
        }
    }

    #[test]
    fn relative_pose_geometry_holds_for_all_pairs() {
        // The child's mating face must point back at the parent, the centers
        // must be one width apart, and composing an edge with its reverse
        // must return the identity, for every ordered face pair.
        for fa in Face::ALL {
            for fb in Face::ALL {
                let conn = if fa == Face::Bottom && fb == Face::Bottom {
                    Connection::with_orientation(fa, fb, 0)
                } else {
                    Connection::new(fa, fb)
                };
                let p = relative_pose(&conn).unwrap();
                assert_abs_diff_eq!(p.position().norm(), W, epsilon = 1e-12);
                let child_face_dir = fb.direction().rotated(p.theta);
                let parent_face_dir = fa.direction();
                assert_abs_diff_eq!(child_face_dir.x, -parent_face_dir.x, epsilon = 1e-12);
                assert_abs_diff_eq!(child_face_dir.y, -parent_face_dir.y, epsilon = 1e-12);

                let back = relative_pose(&conn.reversed()).unwrap();
                let round = p.compose(back);
                assert_abs_diff_eq!(round.x, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(round.y, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(crate::math::wrap_angle(round.theta), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orientation_one_rejected() {
        let conn = Connection::with_orientation(Face::Bottom, Face::Bottom, 1);
        assert_eq!(relative_pose(&conn), Err(LayoutError::ExcludedOrientation));
    }

    #[test]
    fn unfolds_three_chain() {
        let g = ConfigGraph::from_edges(
            [1, 2, 3],
            [
                (1, Face::Top, 2, Face::Top),
                (2, Face::Right, 3, Face::Left),
            ],
        )
        .unwrap();
        let layout = unfold(&g).unwrap();
        assert_eq!(layout.root(), ModuleId(2));
        let p2 = layout.pose(ModuleId(2)).unwrap();
        assert_eq!(p2, Pose2::IDENTITY);
        // Module 1 hangs off the root's TOP with a TOP-TOP joint.
        let p1 = layout.pose(ModuleId(1)).unwrap();
        assert_abs_diff_eq!(p1.x, W, epsilon = 1e-12);
        assert_abs_diff_eq!(p1.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p1.theta, PI, epsilon = 1e-12);
        // Module 3 hangs off the root's RIGHT with an R-L joint.
        let p3 = layout.pose(ModuleId(3)).unwrap();
        assert_abs_diff_eq!(p3.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p3.y, -W, epsilon = 1e-12);
        assert_abs_diff_eq!(p3.theta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn straight_chains_stay_collinear_with_exact_spacing() {
        let n = 9u32;
        let edges: Vec<_> = (0..n - 1)
            .map(|i| (i, Face::Top, i + 1, Face::Bottom))
            .collect();
        let g = ConfigGraph::from_edges(0..n, edges).unwrap();
        let layout = unfold_at(&g, ModuleId(0)).unwrap();
        for i in 0..n {
            let p = layout.pose(ModuleId(i)).unwrap();
            assert_abs_diff_eq!(p.x, W * i as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.theta, 0.0, epsilon = 1e-12);
        }
        // Edge-length conservation for every edge in the centered layout too.
        let layout = unfold(&g).unwrap();
        for e in g.edges() {
            let pa = layout.pose(e.a).unwrap().position();
            let pb = layout.pose(e.b).unwrap().position();
            assert_abs_diff_eq!(pa.distance(pb), W, epsilon = 1e-12);
        }
    }

    #[test]
    fn u_shape_folding_back_is_rejected() {
        // Seven modules forming a U whose open ends land on the same cell.
        let g = ConfigGraph::from_edges(
            [0, 1, 2, 3, 4, 5, 6],
            [
                (0, Face::Top, 1, Face::Top),
                (1, Face::Bottom, 2, Face::Top),
                (2, Face::Right, 3, Face::Top),
                (3, Face::Right, 4, Face::Top),
                (4, Face::Bottom, 5, Face::Top),
                (5, Face::Right, 6, Face::Top),
            ],
        )
        .unwrap();
        let report = check_unfoldable(&g);
        assert!(!report.ok());
        assert_eq!(report.overlaps, alloc::vec![(ModuleId(0), ModuleId(6))]);
        assert!(matches!(unfold(&g), Err(LayoutError::Overlap { .. })));
    }

    #[test]
    fn random_tree_layouts_keep_exact_spacing_or_report_real_overlaps() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(31);
        let mut overlapping = 0;
        for _ in 0..200 {
            let n = rng.random_range(2..=12u32);
            let mut g = ConfigGraph::new();
            g.add_module(ModuleId(0));
            let mut free: Vec<(u32, Face)> = Face::ALL.iter().map(|&f| (0, f)).collect();
            for id in 1..n {
                g.add_module(ModuleId(id));
                let slot = rng.random_range(0..free.len());
                let (parent, pface) = free.swap_remove(slot);
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
            match unfold(&g) {
                Ok(layout) => {
                    for e in g.edges() {
                        let d = layout
                            .pose(e.a)
                            .unwrap()
                            .position()
                            .distance(layout.pose(e.b).unwrap().position());
                        assert_abs_diff_eq!(d, W, epsilon = 1e-12);
                    }
                    let poses: Vec<_> = layout.poses().values().copied().collect();
                    for i in 0..poses.len() {
                        for j in (i + 1)..poses.len() {
                            let d = poses[i].position().distance(poses[j].position());
                            assert!(d >= W - OVERLAP_TOL, "centers {d} m apart");
                        }
                    }
                }
                Err(LayoutError::Overlap { pairs }) => {
                    overlapping += 1;
                    assert!(!pairs.is_empty());
                }
                Err(other) => panic!("unexpected unfold error: {other:?}"),
            }
        }
        // The generator folds back often enough to exercise both outcomes.
        assert!(overlapping > 0, "no overlapping layout sampled");
    }

    #[test]
    fn simple_paths_are_unfoldable() {
        let g = ConfigGraph::from_edges(
            [0, 1, 2, 3],
            [
                (0, Face::Top, 1, Face::Bottom),
                (1, Face::Left, 2, Face::Bottom),
                (2, Face::Left, 3, Face::Right),
            ],
        )
        .unwrap();
        assert!(check_unfoldable(&g).ok());
    }
}
