//! Balanced `2^d`-trees by recursive dyadic subdivision of bounding boxes.
//!
//! The root covers the cubified bounding box of the whole point set. Each
//! non-leaf splits into up to `2^d` geometric children by halving every box
//! edge at its midpoint; empty children are dropped. Points are reordered so
//! that every cluster owns a contiguous half-open range of the tree
//! permutation.
//!
//! Construction is input-order independent: a point's cell is determined by
//! geometry alone (lower half-open convention `[lo, mid)` / `[mid, hi]` on
//! every split), and each leaf's points are sorted lexicographically by
//! coordinates. Since duplicate coordinates are rejected at load, this makes
//! the permutation, and everything downstream of it, a pure function of the
//! point geometry.

use crate::error::{Error, Result};
use crate::points::{bounding_box, cmp_coords, AxisBox, PointSet};

/// Largest supported spatial dimension for tree construction (the child
/// fan-out is `2^d`).
pub const MAX_TREE_DIM: usize = 10;

/// Cluster count at or below which [`cluster_diameter`] computes the exact
/// pairwise maximum.
pub const EXACT_DIAMETER_CUTOFF: usize = 512;

/// One node of a [`ClusterTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Level; the root has level 0.
    pub level: u32,
    /// Start of the node's half-open range into the tree permutation.
    pub begin: usize,
    /// End (exclusive) of the node's range.
    pub end: usize,
    /// Index of the first child; children of one node are contiguous.
    pub first_child: usize,
    /// Number of children (0 for leaves).
    pub n_children: u16,
    /// Parent index; `usize::MAX` for the root.
    pub parent: usize,
}

impl Cluster {
    pub fn is_leaf(&self) -> bool {
        self.n_children == 0
    }

    pub fn count(&self) -> usize {
        self.end - self.begin
    }

    pub fn children(&self) -> std::ops::Range<usize> {
        self.first_child..self.first_child + self.n_children as usize
    }
}

/// Hierarchy of nested index ranges with axis-aligned dyadic bounding boxes.
///
/// Nodes are stored in breadth-first order, so node 0 is the root and the
/// nodes of each level are contiguous.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    dim: usize,
    nodes: Vec<Cluster>,
    /// Node index where each level starts; `level_offsets[j]..level_offsets[j+1]`
    /// are the nodes on level `j`.
    level_offsets: Vec<usize>,
    /// Tree position -> original point index.
    perm: Vec<usize>,
    /// Per-node box bounds, `d` values per node.
    box_lo: Vec<f64>,
    box_hi: Vec<f64>,
    /// Diameter of the root box.
    root_diameter: f64,
}

impl ClusterTree {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn point_count(&self) -> usize {
        self.perm.len()
    }

    /// Maximum level.
    pub fn depth(&self) -> u32 {
        self.level_offsets.len() as u32 - 1
    }

    pub fn cluster(&self, id: usize) -> &Cluster {
        &self.nodes[id]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.nodes
    }

    /// Node ids on level `j`.
    pub fn level(&self, j: u32) -> std::ops::Range<usize> {
        let j = j as usize;
        let end = self
            .level_offsets
            .get(j + 1)
            .copied()
            .unwrap_or(self.nodes.len());
        self.level_offsets[j]..end
    }

    /// Tree position -> original point index.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn box_lower(&self, id: usize) -> &[f64] {
        &self.box_lo[id * self.dim..(id + 1) * self.dim]
    }

    pub fn box_upper(&self, id: usize) -> &[f64] {
        &self.box_hi[id * self.dim..(id + 1) * self.dim]
    }

    pub fn node_box(&self, id: usize) -> AxisBox {
        AxisBox {
            lower: self.box_lower(id).to_vec(),
            upper: self.box_upper(id).to_vec(),
        }
    }

    pub fn root_diameter(&self) -> f64 {
        self.root_diameter
    }

    /// Exact dyadic diameter of a level-`j` box: every subdivision halves the
    /// cubified root box, so `b_j = 2^-j * root_diameter` by construction.
    pub fn level_diameter(&self, level: u32) -> f64 {
        self.root_diameter * (-(level as f64)).exp2()
    }

    /// Leaf ids in depth-first order.
    pub fn leaves_dfs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                out.push(id);
            } else {
                // Push in reverse so children pop in ascending order.
                for c in node.children().rev() {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Leaf whose cell owns the query point, following the construction's
    /// half-open splitting convention (a point on a splitting hyperplane
    /// belongs to the upper child). Falls back to the nearest child box when
    /// the query lands in a dropped empty cell.
    pub fn leaf_containing(&self, x: &[f64]) -> usize {
        assert_eq!(x.len(), self.dim);
        let mut id = 0usize;
        'descend: while !self.cluster(id).is_leaf() {
            let children = self.cluster(id).children();
            // Upper children own shared boundaries; reverse order makes the
            // first closed-box hit the owner.
            for c in children.clone().rev() {
                if self.node_box(c).contains(x) {
                    id = c;
                    continue 'descend;
                }
            }
            let nearest = children
                .map(|c| (self.node_box(c).distance(x), c))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("non-leaf has children");
            id = nearest.1;
        }
        id
    }

    /// Indented text dump (node id, level, range, box) for golden tests.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            let indent = "  ".repeat(n.level as usize);
            let lo = self.box_lower(id);
            let hi = self.box_upper(id);
            let _ = write!(out, "{indent}#{id} level={} range=[{},{})", n.level, n.begin, n.end);
            let _ = write!(out, " box=");
            for m in 0..self.dim {
                let _ = write!(out, "{}[{},{}]", if m > 0 { "x" } else { "" }, lo[m], hi[m]);
            }
            out.push('\n');
            for c in n.children().rev() {
                stack.push(c);
            }
        }
        out
    }
}

/// Builds the `2^d`-tree top-down. Subdivision stops when a node holds at
/// most `leaf_capacity` points or reaches `max_level`.
pub fn build_tree(
    ps: &PointSet,
    leaf_capacity: usize,
    max_level: Option<u32>,
) -> Result<ClusterTree> {
    if leaf_capacity < 1 {
        return Err(Error::Validation("leaf_capacity must be >= 1".into()));
    }
    let d = ps.dim();
    if d > MAX_TREE_DIM {
        return Err(Error::Validation(format!(
            "tree construction supports dim <= {MAX_TREE_DIM}, got {d}"
        )));
    }
    let n = ps.count();
    let root_box = bounding_box(ps);
    let max_level = max_level.unwrap_or(u32::MAX);

    let mut perm: Vec<usize> = (0..n).collect();
    let mut scratch: Vec<usize> = vec![0; n];
    let fanout = 1usize << d;
    let mut counts: Vec<usize> = vec![0; fanout];
    let mut offsets: Vec<usize> = vec![0; fanout + 1];
    let mut cursor: Vec<usize> = vec![0; fanout + 1];
    let mut mid: Vec<f64> = vec![0.0; d];

    let mut nodes: Vec<Cluster> = Vec::new();
    let mut box_lo: Vec<f64> = Vec::new();
    let mut box_hi: Vec<f64> = Vec::new();
    let mut level_offsets: Vec<usize> = vec![0];

    nodes.push(Cluster {
        level: 0,
        begin: 0,
        end: n,
        first_child: 0,
        n_children: 0,
        parent: usize::MAX,
    });
    box_lo.extend_from_slice(&root_box.lower);
    box_hi.extend_from_slice(&root_box.upper);

    // Breadth-first expansion keeps each level's nodes contiguous.
    let mut head = 0usize;
    while head < nodes.len() {
        let id = head;
        head += 1;
        let (level, begin, end) = {
            let c = &nodes[id];
            (c.level, c.begin, c.end)
        };
        if level_offsets.len() == level as usize {
            // BFS order: this is the first node of a new level.
            level_offsets.push(id);
        }
        if end - begin <= leaf_capacity || level >= max_level {
            // Leaf: canonical in-leaf order.
            perm[begin..end].sort_unstable_by(|&a, &b| cmp_coords(ps.point(a), ps.point(b)));
            continue;
        }
        for m in 0..d {
            mid[m] = 0.5 * (box_lo[id * d + m] + box_hi[id * d + m]);
        }

        // Child cell of a point: bit m set iff coordinate m is >= mid.
        counts.fill(0);
        for &p in &perm[begin..end] {
            counts[child_cell(ps.point(p), &mid)] += 1;
        }
        offsets[0] = 0;
        for c in 0..fanout {
            offsets[c + 1] = offsets[c] + counts[c];
        }
        cursor.copy_from_slice(&offsets);
        for &p in &perm[begin..end] {
            let c = child_cell(ps.point(p), &mid);
            scratch[begin + cursor[c]] = p;
            cursor[c] += 1;
        }
        perm[begin..end].copy_from_slice(&scratch[begin..end]);

        let first_child = nodes.len();
        let mut n_children = 0u16;
        for c in 0..fanout {
            if counts[c] == 0 {
                continue;
            }
            nodes.push(Cluster {
                level: level + 1,
                begin: begin + offsets[c],
                end: begin + offsets[c + 1],
                first_child: 0,
                n_children: 0,
                parent: id,
            });
            for m in 0..d {
                if (c >> m) & 1 == 0 {
                    box_lo.push(box_lo[id * d + m]);
                    box_hi.push(mid[m]);
                } else {
                    box_lo.push(mid[m]);
                    box_hi.push(box_hi[id * d + m]);
                }
            }
            n_children += 1;
        }
        nodes[id].first_child = first_child;
        nodes[id].n_children = n_children;
    }

    let root_diameter = root_box.diameter();
    Ok(ClusterTree {
        dim: d,
        nodes,
        level_offsets,
        perm,
        box_lo,
        box_hi,
        root_diameter,
    })
}

#[inline]
fn child_cell(p: &[f64], mid: &[f64]) -> usize {
    let mut c = 0usize;
    for (m, (&x, &s)) in p.iter().zip(mid).enumerate() {
        if x >= s {
            c |= 1 << m;
        }
    }
    c
}

/// Bottom-up builder for points on a full `2^J`-per-axis grid inside the
/// root box. Produces a tree that is node-by-node identical to
/// `build_tree(ps, 1, Some(level))`, in linear time, by bucketing points
/// into the `2^(Jd)` finest cells and merging `2^d` cells per parent.
pub fn build_tree_gridded(ps: &PointSet, level: u32) -> Result<ClusterTree> {
    let d = ps.dim();
    if d > MAX_TREE_DIM {
        return Err(Error::Validation(format!(
            "tree construction supports dim <= {MAX_TREE_DIM}, got {d}"
        )));
    }
    let j = level as usize;
    if j * d >= usize::BITS as usize - 1 {
        return Err(Error::Validation(format!(
            "grid level {level} too deep for dim {d}"
        )));
    }
    let n = ps.count();
    let cells_per_axis = 1usize << j;
    let total_cells = 1usize << (j * d);
    if n != total_cells {
        return Err(Error::GridStructure(format!(
            "expected {total_cells} points for a full 2^{level} grid in dim {d}, got {n}"
        )));
    }
    let root_box = bounding_box(ps);

    // Bucket every point into its finest-level cell, interleaving per-axis
    // cell bits into the depth-first (Morton) rank.
    let mut buckets: Vec<usize> = vec![usize::MAX; total_cells];
    for i in 0..n {
        let p = ps.point(i);
        let mut morton = 0usize;
        for m in 0..d {
            let w = root_box.upper[m] - root_box.lower[m];
            let rel = (p[m] - root_box.lower[m]) / w * cells_per_axis as f64;
            let g = (rel.floor() as isize).clamp(0, cells_per_axis as isize - 1) as usize;
            // Axis m contributes bit m of the child index at every level.
            for k in 0..j {
                morton |= ((g >> k) & 1) << (k * d + m);
            }
        }
        if buckets[morton] != usize::MAX {
            return Err(Error::GridStructure(format!(
                "cell {morton} holds more than one point"
            )));
        }
        buckets[morton] = i;
    }
    let perm = buckets;

    // Full grid: level i holds 2^(i*d) nodes; node k covers a contiguous
    // Morton range and its children are nodes k*2^d .. k*2^d + 2^d.
    let fanout = 1usize << d;
    let mut level_offsets = Vec::with_capacity(j + 2);
    let mut total_nodes = 0usize;
    for i in 0..=j {
        level_offsets.push(total_nodes);
        total_nodes += 1usize << (i * d);
    }
    let mut nodes = Vec::with_capacity(total_nodes);
    let mut box_lo = vec![0.0; total_nodes * d];
    let mut box_hi = vec![0.0; total_nodes * d];
    for i in 0..=j {
        let span = 1usize << ((j - i) * d);
        for k in 0..(1usize << (i * d)) {
            let (first_child, n_children) = if i == j {
                (0, 0u16)
            } else {
                (level_offsets[i + 1] + k * fanout, fanout as u16)
            };
            let parent = if i == 0 {
                usize::MAX
            } else {
                level_offsets[i - 1] + k / fanout
            };
            nodes.push(Cluster {
                level: i as u32,
                begin: k * span,
                end: (k + 1) * span,
                first_child,
                n_children,
                parent,
            });
        }
    }

    // Boxes by midpoint halving from the root, matching the top-down builder
    // operation for operation.
    box_lo[..d].copy_from_slice(&root_box.lower);
    box_hi[..d].copy_from_slice(&root_box.upper);
    for id in 0..total_nodes {
        let (first, count) = (nodes[id].first_child, nodes[id].n_children as usize);
        if count == 0 {
            continue;
        }
        let lo = box_lo[id * d..(id + 1) * d].to_vec();
        let hi = box_hi[id * d..(id + 1) * d].to_vec();
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| 0.5 * (l + u)).collect();
        for c in 0..count {
            let cid = first + c;
            for m in 0..d {
                if (c >> m) & 1 == 0 {
                    box_lo[cid * d + m] = lo[m];
                    box_hi[cid * d + m] = mid[m];
                } else {
                    box_lo[cid * d + m] = mid[m];
                    box_hi[cid * d + m] = hi[m];
                }
            }
        }
    }

    let root_diameter = root_box.diameter();
    Ok(ClusterTree {
        dim: d,
        nodes,
        level_offsets,
        perm,
        box_lo,
        box_hi,
        root_diameter,
    })
}

/// How [`cluster_diameter`] obtained its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiameterKind {
    /// Exact maximum pairwise distance.
    Exact,
    /// Bounding-box diameter used as an upper bound above the cutoff.
    BoxBound,
}

/// Maximum pairwise distance within a cluster: exact for clusters of at most
/// `EXACT_DIAMETER_CUTOFF` points, bounding-box diameter above.
pub fn cluster_diameter(tree: &ClusterTree, id: usize, ps: &PointSet) -> (f64, DiameterKind) {
    cluster_diameter_with_cutoff(tree, id, ps, EXACT_DIAMETER_CUTOFF)
}

pub fn cluster_diameter_with_cutoff(
    tree: &ClusterTree,
    id: usize,
    ps: &PointSet,
    cutoff: usize,
) -> (f64, DiameterKind) {
    let c = tree.cluster(id);
    if c.count() > cutoff {
        return (tree.node_box(id).diameter(), DiameterKind::BoxBound);
    }
    let idx = &tree.permutation()[c.begin..c.end];
    let mut best = 0.0f64;
    for (a, &i) in idx.iter().enumerate() {
        let pi = ps.point(i);
        for &jj in &idx[a + 1..] {
            let pj = ps.point(jj);
            let d2: f64 = pi.iter().zip(pj).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(d2);
        }
    }
    (best.sqrt(), DiameterKind::Exact)
}

/// Distance from `query` to the nearest point in the set, optionally
/// excluding one original point index. Prunes subtrees by box distance.
pub(crate) fn nearest_distance(
    tree: &ClusterTree,
    ps: &PointSet,
    query: &[f64],
    skip: Option<usize>,
) -> f64 {
    fn visit(
        tree: &ClusterTree,
        ps: &PointSet,
        query: &[f64],
        skip: Option<usize>,
        id: usize,
        best: &mut f64,
    ) {
        let node = tree.cluster(id);
        if node.is_leaf() {
            for &orig in &tree.permutation()[node.begin..node.end] {
                if skip == Some(orig) {
                    continue;
                }
                let d2: f64 = ps
                    .point(orig)
                    .iter()
                    .zip(query)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                let d = d2.sqrt();
                if d < *best {
                    *best = d;
                }
            }
            return;
        }
        // Visit nearer children first for tighter pruning.
        let mut order: Vec<(f64, usize)> = node
            .children()
            .map(|c| (tree.node_box(c).distance(query), c))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (dist, c) in order {
            if dist < *best {
                visit(tree, ps, query, skip, c, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    visit(tree, ps, query, skip, 0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(n: usize) -> PointSet {
        let coords: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let values = vec![0.0; n];
        PointSet::new(1, coords, values).unwrap()
    }

    #[test]
    fn quadrant_centers_make_four_children() {
        let coords = vec![0.25, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75, 0.75];
        let ps = PointSet::new(2, coords, vec![1.0; 4]).unwrap();
        let t = build_tree(&ps, 1, None).unwrap();
        let root = t.cluster(0);
        assert_eq!(root.n_children, 4);
        for c in root.children() {
            assert_eq!(t.cluster(c).count(), 1);
            assert!(t.cluster(c).is_leaf());
        }
    }

    #[test]
    fn uniform_grid_is_balanced() {
        let n = 64; // 2^6
        let ps = grid_1d(n);
        let t = build_tree(&ps, 1, None).unwrap();
        assert_eq!(t.depth(), 6);
        for j in 0..=t.depth() {
            for id in t.level(j) {
                assert_eq!(t.cluster(id).count() << j, n);
            }
        }
    }

    #[test]
    fn collinear_points_drop_empty_quadrants() {
        // 8 points on the diagonal of the unit square: at each split only
        // quadrants 0 (lo,lo) and 3 (hi,hi) are populated.
        let mut coords = Vec::new();
        for i in 0..8 {
            let x = (i as f64 + 0.5) / 8.0;
            coords.push(x);
            coords.push(x);
        }
        let ps = PointSet::new(2, coords, vec![0.0; 8]).unwrap();
        let t = build_tree(&ps, 1, None).unwrap();
        for id in 0..t.node_count() {
            let c = t.cluster(id);
            assert!(c.n_children == 0 || c.n_children == 2);
            assert!(c.count() > 0);
        }
    }

    #[test]
    fn partition_and_nesting_invariants() {
        let mut rng = crate::rng::Rng::seed_from(7);
        let n = 500;
        let d = 2;
        let coords: Vec<f64> = (0..n * d).map(|_| rng.unit_f64()).collect();
        let ps = PointSet::new(d, coords, vec![0.0; n]).unwrap();
        let t = build_tree(&ps, 6, None).unwrap();

        // Permutation is a bijection.
        let mut seen = vec![false; n];
        for &p in t.permutation() {
            assert!(!seen[p]);
            seen[p] = true;
        }

        // Leaf ranges concatenate to [0, N) in DFS order.
        let mut cursor = 0;
        for leaf in t.leaves_dfs() {
            let c = t.cluster(leaf);
            assert_eq!(c.begin, cursor);
            cursor = c.end;
        }
        assert_eq!(cursor, n);

        for id in 0..t.node_count() {
            let c = t.cluster(id);
            // Points inside box.
            for &p in &t.permutation()[c.begin..c.end] {
                assert!(t.node_box(id).contains(ps.point(p)));
            }
            if !c.is_leaf() {
                // Children partition the parent range.
                let mut pos = c.begin;
                for ch in c.children() {
                    let cc = t.cluster(ch);
                    assert_eq!(cc.begin, pos);
                    assert_eq!(cc.level, c.level + 1);
                    assert_eq!(cc.parent, id);
                    pos = cc.end;
                    // Child box diameter is half the parent's.
                    let ratio = t.node_box(ch).diameter() / t.node_box(id).diameter();
                    assert!((ratio - 0.5).abs() < 1e-12);
                }
                assert_eq!(pos, c.end);
            }
        }
    }

    #[test]
    fn order_independence() {
        let mut rng = crate::rng::Rng::seed_from(3);
        let n = 200;
        let coords: Vec<f64> = (0..n * 2).map(|_| rng.unit_f64()).collect();
        let values: Vec<f64> = (0..n).map(|_| rng.unit_f64()).collect();
        let ps = PointSet::new(2, coords.clone(), values.clone()).unwrap();
        let t1 = build_tree(&ps, 4, None).unwrap();

        // Reverse the rows.
        let mut coords2 = Vec::new();
        let mut values2 = Vec::new();
        for i in (0..n).rev() {
            coords2.extend_from_slice(ps.point(i));
            values2.push(ps.value(i));
        }
        let ps2 = PointSet::new(2, coords2, values2).unwrap();
        let t2 = build_tree(&ps2, 4, None).unwrap();

        assert_eq!(t1.clusters(), t2.clusters());
        // Permutations agree after composing with the row reversal.
        for (a, b) in t1.permutation().iter().zip(t2.permutation()) {
            assert_eq!(*a, n - 1 - *b);
        }
    }

    #[test]
    fn gridded_matches_top_down() {
        // 8x8 grid at cell centers.
        let s = 8usize;
        let mut coords = Vec::new();
        for j in 0..s {
            for i in 0..s {
                coords.push((i as f64 + 0.5) / s as f64);
                coords.push((j as f64 + 0.5) / s as f64);
            }
        }
        let ps = PointSet::new(2, coords, vec![0.0; s * s]).unwrap();
        let a = build_tree(&ps, 1, Some(3)).unwrap();
        let b = build_tree_gridded(&ps, 3).unwrap();
        assert_eq!(a.clusters(), b.clusters());
        assert_eq!(a.permutation(), b.permutation());
        assert_eq!(a.box_lo, b.box_lo);
        assert_eq!(a.box_hi, b.box_hi);
        assert_eq!(a.depth(), 3);
    }

    #[test]
    fn gridded_small_counts() {
        // 4x4 grid, J=2: 16 leaves, 4 level-1 nodes, 1 root.
        let s = 4usize;
        let mut coords = Vec::new();
        for j in 0..s {
            for i in 0..s {
                coords.push((i as f64 + 0.5) / s as f64);
                coords.push((j as f64 + 0.5) / s as f64);
            }
        }
        let ps = PointSet::new(2, coords, vec![0.0; 16]).unwrap();
        let t = build_tree_gridded(&ps, 2).unwrap();
        assert_eq!(t.level(0).len(), 1);
        assert_eq!(t.level(1).len(), 4);
        assert_eq!(t.level(2).len(), 16);
        assert_eq!(t.node_count(), 21);
    }

    #[test]
    fn gridded_matches_top_down_3d() {
        let s = 4usize; // 2^2 per axis
        let mut coords = Vec::new();
        for k in 0..s {
            for j in 0..s {
                for i in 0..s {
                    coords.push((i as f64 + 0.5) / s as f64);
                    coords.push((j as f64 + 0.5) / s as f64);
                    coords.push((k as f64 + 0.5) / s as f64);
                }
            }
        }
        let ps = PointSet::new(3, coords, vec![0.0; s * s * s]).unwrap();
        let a = build_tree(&ps, 1, Some(2)).unwrap();
        let b = build_tree_gridded(&ps, 2).unwrap();
        assert_eq!(a.clusters(), b.clusters());
        assert_eq!(a.permutation(), b.permutation());
        assert_eq!(a.box_lo, b.box_lo);
    }

    #[test]
    fn gridded_rejects_non_grid() {
        let ps = PointSet::new(1, vec![0.0, 0.1, 0.2, 0.9], vec![0.0; 4]).unwrap();
        assert!(matches!(
            build_tree_gridded(&ps, 2),
            Err(Error::GridStructure(_))
        ));
    }

    #[test]
    fn diameter_exact_and_box_bound() {
        let ps = grid_1d(2);
        let t = build_tree(&ps, 2, None).unwrap();
        let (diam, kind) = cluster_diameter(&t, 0, &ps);
        assert_eq!(kind, DiameterKind::Exact);
        assert!((diam - 0.5).abs() < 1e-15);

        let ps = PointSet::new(1, vec![0.42], vec![0.0]).unwrap();
        let t = build_tree(&ps, 1, None).unwrap();
        let (diam, _) = cluster_diameter(&t, 0, &ps);
        assert_eq!(diam, 0.0);

        // Brute force agreement on random 2D points.
        let mut rng = crate::rng::Rng::seed_from(11);
        let n = 100;
        let coords: Vec<f64> = (0..n * 2).map(|_| rng.unit_f64()).collect();
        let ps = PointSet::new(2, coords, vec![0.0; n]).unwrap();
        let t = build_tree(&ps, n, None).unwrap();
        let (diam, kind) = cluster_diameter(&t, 0, &ps);
        assert_eq!(kind, DiameterKind::Exact);
        let mut brute = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d2: f64 = ps
                    .point(i)
                    .iter()
                    .zip(ps.point(j))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                brute = brute.max(d2.sqrt());
            }
        }
        assert_eq!(diam, brute);
    }

    #[test]
    fn max_level_caps_depth() {
        let ps = grid_1d(64);
        let t = build_tree(&ps, 1, Some(2)).unwrap();
        assert_eq!(t.depth(), 2);
        for leaf in t.leaves_dfs() {
            assert_eq!(t.cluster(leaf).count(), 16);
        }
    }

    #[test]
    fn dump_contains_all_nodes() {
        let ps = grid_1d(4);
        let t = build_tree(&ps, 1, None).unwrap();
        let dump = t.dump();
        assert_eq!(dump.lines().count(), t.node_count());
        assert!(dump.starts_with("#0 level=0 range=[0,4)"));
    }
}
