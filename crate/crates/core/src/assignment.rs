//! Physical root selection and optimal role assignment.
//!
//! The physical root is the module nearest the cluster centroid; every other
//! target role is assigned to a physical module by minimizing the total
//! center-to-center travel distance with a Kuhn-Munkres solver. A factorial
//! brute-force oracle backs the solver in tests.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::layout::UnfoldedLayout;
use crate::math::{Pose2, Vec2};
use crate::topology::ModuleId;

/// World poses of a team of physical modules.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModuleSet {
    poses: BTreeMap<ModuleId, Pose2>,
}

impl ModuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_poses(poses: BTreeMap<ModuleId, Pose2>) -> Self {
        Self { poses }
    }

    pub fn insert(&mut self, id: ModuleId, pose: Pose2) {
        self.poses.insert(id, pose);
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn pose(&self, id: ModuleId) -> Option<Pose2> {
        self.poses.get(&id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ModuleId> + '_ {
        self.poses.keys().copied()
    }

    pub fn poses(&self) -> &BTreeMap<ModuleId, Pose2> {
        &self.poses
    }

    /// Arithmetic mean of the module centers.
    pub fn centroid(&self) -> Option<Vec2> {
        if self.poses.is_empty() {
            return None;
        }
        let mut sum = Vec2::ZERO;
        for p in self.poses.values() {
            sum = sum + p.position();
        }
        Some(sum * (1.0 / self.poses.len() as f64))
    }
}

/// Bijection from target-topology vertices to physical modules plus its total
/// travel cost in meters.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mapping {
    pub target_to_module: BTreeMap<ModuleId, ModuleId>,
    pub cost_m: f64,
}

impl Mapping {
    pub fn apply(&self, target: ModuleId) -> Option<ModuleId> {
        self.target_to_module.get(&target).copied()
    }

    pub fn inverse(&self) -> BTreeMap<ModuleId, ModuleId> {
        self.target_to_module
            .iter()
            .map(|(&t, &m)| (m, t))
            .collect()
    }

    pub fn is_bijective(&self) -> bool {
        let values: alloc::collections::BTreeSet<_> = self.target_to_module.values().collect();
        values.len() == self.target_to_module.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssignmentError {
    EmptySet,
    UnknownModule(ModuleId),
    SizeMismatch {
        layout: usize,
        modules: usize,
    },
    /// Brute force guard against factorial blowup.
    TooLarge {
        n: usize,
        limit: usize,
    },
}

impl fmt::Display for AssignmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssignmentError::EmptySet => write!(f, "module set is empty"),
            AssignmentError::UnknownModule(id) => write!(f, "unknown module {id}"),
            AssignmentError::SizeMismatch { layout, modules } => write!(
                f,
                "layout has {layout} vertices but the team has {modules} modules"
            ),
            AssignmentError::TooLarge { n, limit } => {
                write!(f, "brute force limited to {limit} modules, got {n}")
            }
        }
    }
}

impl core::error::Error for AssignmentError {}

/// Physical root: the module whose center is nearest the cluster centroid,
/// smaller id on ties.
pub fn select_root_module(modules: &ModuleSet) -> Result<ModuleId, AssignmentError> {
    let centroid = modules.centroid().ok_or(AssignmentError::EmptySet)?;
    let mut best: Option<(f64, ModuleId)> = None;
    for (&id, pose) in modules.poses() {
        let d = pose.position().distance(centroid);
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, id)),
        }
    }
    Ok(best.expect("non-empty").1)
}

/// Rigidly transform all poses so the root sits at the origin with heading
/// zero. Distances between modules are preserved.
pub fn to_root_frame(modules: &ModuleSet, root: ModuleId) -> Result<ModuleSet, AssignmentError> {
    let root_pose = modules
        .pose(root)
        .ok_or(AssignmentError::UnknownModule(root))?;
    let to_root = root_pose.inverse();
    let poses = modules
        .poses()
        .iter()
        .map(|(&id, &p)| (id, to_root.compose(p).with_wrapped_angle()))
        .collect();
    Ok(ModuleSet::from_poses(poses))
}

struct CostMatrix {
    targets: Vec<ModuleId>,
    workers: Vec<ModuleId>,
    cost: Vec<Vec<f64>>,
}

fn cost_matrix(
    layout: &UnfoldedLayout,
    modules: &ModuleSet,
    root_pair: (ModuleId, ModuleId),
) -> Result<CostMatrix, AssignmentError> {
    let (target_root, module_root) = root_pair;
    if layout.len() != modules.len() {
        return Err(AssignmentError::SizeMismatch {
            layout: layout.len(),
            modules: modules.len(),
        });
    }
    if layout.pose(target_root).is_none() {
        return Err(AssignmentError::UnknownModule(target_root));
    }
    if modules.pose(module_root).is_none() {
        return Err(AssignmentError::UnknownModule(module_root));
    }
    let targets: Vec<ModuleId> = layout.ids().filter(|&v| v != target_root).collect();
    let workers: Vec<ModuleId> = modules.ids().filter(|&m| m != module_root).collect();
    let cost = targets
        .iter()
        .map(|&t| {
            let goal = layout.pose(t).expect("target in layout").position();
            workers
                .iter()
                .map(|&w| {
                    modules
                        .pose(w)
                        .expect("worker in set")
                        .position()
                        .distance(goal)
                })
                .collect()
        })
        .collect();
    Ok(CostMatrix {
        targets,
        workers,
        cost,
    })
}

fn mapping_from(
    root_pair: (ModuleId, ModuleId),
    matrix: &CostMatrix,
    row_to_col: &[usize],
) -> Mapping {
    let mut target_to_module = BTreeMap::new();
    target_to_module.insert(root_pair.0, root_pair.1);
    // Sum in ascending target-id order so the reported cost is bit-identical
    // across solvers choosing the same permutation.
    let mut cost_m = 0.0;
    for (i, &j) in row_to_col.iter().enumerate() {
        target_to_module.insert(matrix.targets[i], matrix.workers[j]);
        cost_m += matrix.cost[i][j];
    }
    Mapping {
        target_to_module,
        cost_m,
    }
}

/// O(n^3) Kuhn-Munkres on a square matrix; returns row -> column.
fn hungarian(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), Vec::new(), Vec::new());
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    (row_to_col, u, v)
}

/// Kuhn's augmenting-path matcher used for the lexicographic tie-break.
fn can_complete(admissible: &[Vec<bool>], fixed_rows: usize, col_used: &[bool], n: usize) -> bool {
    let mut col_match = vec![usize::MAX; n];
    fn try_row(
        r: usize,
        admissible: &[Vec<bool>],
        col_used: &[bool],
        visited: &mut [bool],
        col_match: &mut [usize],
    ) -> bool {
        for c in 0..admissible[r].len() {
            if admissible[r][c] && !col_used[c] && !visited[c] {
                visited[c] = true;
                if col_match[c] == usize::MAX
                    || try_row(col_match[c], admissible, col_used, visited, col_match)
                {
                    col_match[c] = r;
                    return true;
                }
            }
        }
        false
    }
    for r in fixed_rows..admissible.len() {
        let mut visited = vec![false; n];
        if !try_row(r, admissible, col_used, &mut visited, &mut col_match) {
            return false;
        }
    }
    true
}

/// Optimal assignment of target roles to physical modules, the roots pinned
/// to each other. Among cost-optimal assignments the lexicographically
/// smallest (by ascending target id, then module id) is returned.
pub fn assign(
    layout: &UnfoldedLayout,
    modules: &ModuleSet,
    root_pair: (ModuleId, ModuleId),
) -> Result<Mapping, AssignmentError> {
    let matrix = cost_matrix(layout, modules, root_pair)?;
    let n = matrix.targets.len();
    if n == 0 {
        return Ok(mapping_from(root_pair, &matrix, &[]));
    }
    let (initial, u, v) = hungarian(&matrix.cost);

    // Restrict to edges that are tight under the optimal dual potentials;
    // every perfect matching among them is cost-optimal. Pick the smallest
    // lexicographically.
    let scale = matrix
        .cost
        .iter()
        .flatten()
        .fold(1.0f64, |acc, &c| if c > acc { c } else { acc });
    let eps = 1e-9 * scale;
    let admissible: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| matrix.cost[i][j] - u[i + 1] - v[j + 1] <= eps)
                .collect()
        })
        .collect();

    let mut row_to_col = vec![usize::MAX; n];
    let mut col_used = vec![false; n];
    for i in 0..n {
        let mut chosen = usize::MAX;
        for j in 0..n {
            if admissible[i][j] && !col_used[j] {
                col_used[j] = true;
                if can_complete(&admissible, i + 1, &col_used, n) {
                    chosen = j;
                    break;
                }
                col_used[j] = false;
            }
        }
        if chosen == usize::MAX {
            // Numerical corner: fall back to the solver's own matching.
            return Ok(mapping_from(root_pair, &matrix, &initial));
        }
        row_to_col[i] = chosen;
    }
    Ok(mapping_from(root_pair, &matrix, &row_to_col))
}

/// Exhaustive minimum over all bijections fixing the root pair; the oracle
/// for [`assign`]. Enumerates permutations in lexicographic order and keeps
/// the first strict minimum, so ties resolve exactly like [`assign`].
pub fn brute_force_assign(
    layout: &UnfoldedLayout,
    modules: &ModuleSet,
    root_pair: (ModuleId, ModuleId),
) -> Result<Mapping, AssignmentError> {
    const LIMIT: usize = 9;
    if modules.len() > LIMIT {
        return Err(AssignmentError::TooLarge {
            n: modules.len(),
            limit: LIMIT,
        });
    }
    let matrix = cost_matrix(layout, modules, root_pair)?;
    let n = matrix.targets.len();
    if n == 0 {
        return Ok(mapping_from(root_pair, &matrix, &[]));
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn search(
        row: usize,
        partial: f64,
        matrix: &CostMatrix,
        current: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let n = matrix.targets.len();
        if let Some((b, _)) = best {
            if partial >= *b {
                return;
            }
        }
        if row == n {
            *best = Some((partial, current.clone()));
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                current[row] = j;
                search(
                    row + 1,
                    partial + matrix.cost[row][j],
                    matrix,
                    current,
                    used,
                    best,
                );
                used[j] = false;
            }
        }
    }
    search(0, 0.0, &matrix, &mut current, &mut used, &mut best);

    let (_, row_to_col) = best.expect("at least one bijection exists");
    Ok(mapping_from(root_pair, &matrix, &row_to_col))
}
