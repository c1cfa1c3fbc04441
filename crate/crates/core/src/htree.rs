//! Cluster tree over the unknowns and the block partition built on it.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    fn around(points: &[Point], idx: &[usize]) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &i in idx {
            for a in 0..3 {
                min[a] = min[a].min(points[i][a]);
                max[a] = max[a].max(points[i][a]);
            }
        }
        Self { min, max }
    }

    pub fn diameter(&self) -> f64 {
        (0..3)
            .map(|a| (self.max[a] - self.min[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean gap between the boxes; zero when they touch or overlap.
    pub fn distance(&self, other: &BBox) -> f64 {
        (0..3)
            .map(|a| {
                let gap = (self.min[a] - other.max[a]).max(other.min[a] - self.max[a]);
                gap.max(0.0).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn longest_axis(&self) -> usize {
        let ext = [0, 1, 2].map(|a| self.max[a] - self.min[a]);
        let mut best = 0;
        for a in 1..3 {
            if ext[a] > ext[best] {
                best = a;
            }
        }
        best
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub begin: usize,
    pub end: usize,
    pub level: usize,
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    pub bbox: BBox,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.end - self.begin
    }

    pub fn range(&self) -> Range<usize> {
        self.begin..self.end
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Strong admissibility: `max(diam t, diam s) <= eta * dist(t, s)` on
/// bounding boxes. Touching boxes are never admissible.
pub fn is_admissible(t: &Cluster, s: &Cluster, eta: f64) -> bool {
    let dist = t.bbox.distance(&s.bbox);
    dist > 0.0 && t.bbox.diameter().max(s.bbox.diameter()) <= eta * dist
}

/// Balanced binary cluster tree. All leaves sit on the last level; cluster
/// ids are assigned level by level so each level is a contiguous id range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClusterTreeRepr")]
pub struct ClusterTree {
    clusters: Vec<Cluster>,
    /// Tree position → original unknown index.
    perm: Vec<usize>,
    leafsize: usize,
    #[serde(skip)]
    inverse: Vec<usize>,
    #[serde(skip)]
    level_starts: Vec<usize>,
}

/// Recursive longest-axis median bisection. The tree is split down to the
/// first level on which every cluster holds at most `leafsize` unknowns.
pub fn build_cluster_tree(points: &PointSet, leafsize: usize) -> Result<ClusterTree> {
    if leafsize == 0 {
        return Err(Error::Config("leafsize must be at least 1".into()));
    }
    let pts = points.points();
    let n = pts.len();
    let mut depth = 0;
    while n.div_ceil(1 << depth) > leafsize {
        depth += 1;
    }

    let mut perm: Vec<usize> = (0..n).collect();
    let mut clusters = vec![Cluster {
        id: 0,
        begin: 0,
        end: n,
        level: 0,
        parent: None,
        children: None,
        bbox: BBox::around(pts, &perm),
    }];
    let mut current = vec![0usize];
    for level in 0..depth {
        let mut next = Vec::with_capacity(2 * current.len());
        for &c in &current {
            let (begin, end, bbox) = (clusters[c].begin, clusters[c].end, clusters[c].bbox);
            let axis = bbox.longest_axis();
            let slice = &mut perm[begin..end];
            slice.sort_by(|&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
            let mid = begin + (end - begin) / 2;
            let mut kids = [0; 2];
            for (slot, (b, e)) in [(begin, mid), (mid, end)].into_iter().enumerate() {
                let id = clusters.len();
                clusters.push(Cluster {
                    id,
                    begin: b,
                    end: e,
                    level: level + 1,
                    parent: Some(c),
                    children: None,
                    bbox: BBox::around(pts, &perm[b..e]),
                });
                kids[slot] = id;
                next.push(id);
            }
            clusters[c].children = Some(kids);
        }
        current = next;
    }
    Ok(ClusterTree::from_parts(clusters, perm, leafsize))
}

impl ClusterTree {
    fn from_parts(clusters: Vec<Cluster>, perm: Vec<usize>, leafsize: usize) -> Self {
        let mut tree = Self {
            clusters,
            perm,
            leafsize,
            inverse: Vec::new(),
            level_starts: Vec::new(),
        };
        tree.rebuild_index();
        tree
    }

    fn rebuild_index(&mut self) {
        self.inverse = vec![0; self.perm.len()];
        for (pos, &orig) in self.perm.iter().enumerate() {
            self.inverse[orig] = pos;
        }
        self.level_starts.clear();
        for c in &self.clusters {
            if c.level == self.level_starts.len() {
                self.level_starts.push(c.id);
            }
        }
        self.level_starts.push(self.clusters.len());
    }

    /// Checks the invariants of a deserialized tree and rebuilds lookups.
    fn validated(mut self) -> Result<Self> {
        let n = self.perm.len();
        let bad = |m: String| Err(Error::load("structure.tree", m));
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || seen[p] {
                return bad("permutation is not a bijection".into());
            }
            seen[p] = true;
        }
        if self.clusters.is_empty() || self.clusters[0].range() != (0..n) {
            return bad("root cluster must cover all unknowns".into());
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.id != i || c.begin > c.end || c.end > n {
                return bad(format!("cluster {i} is malformed"));
            }
            if i > 0 && c.level < self.clusters[i - 1].level {
                return bad(format!("cluster {i} breaks level ordering"));
            }
            if let Some([a, b]) = c.children {
                let ok = a < self.clusters.len()
                    && b < self.clusters.len()
                    && self.clusters[a].begin == c.begin
                    && self.clusters[a].end == self.clusters[b].begin
                    && self.clusters[b].end == c.end
                    && self.clusters[a].parent == Some(i)
                    && self.clusters[b].parent == Some(i);
                if !ok {
                    return bad(format!("children of cluster {i} do not partition it"));
                }
            }
        }
        self.rebuild_index();
        let depth = self.depth();
        if self
            .clusters
            .iter()
            .any(|c| c.is_leaf() != (c.level == depth))
        {
            return bad("leaves must all sit on the last level".into());
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Number of unknowns.
    pub fn size(&self) -> usize {
        self.perm.len()
    }

    pub fn leafsize(&self) -> usize {
        self.leafsize
    }

    /// Index of the leaf level (root is level 0).
    pub fn depth(&self) -> usize {
        self.level_starts.len() - 2
    }

    pub fn cluster(&self, id: usize) -> &Cluster {
        &self.clusters[id]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn level(&self, level: usize) -> Range<usize> {
        self.level_starts[level]..self.level_starts[level + 1]
    }

    pub fn leaves(&self) -> Range<usize> {
        self.level(self.depth())
    }

    pub fn children(&self, id: usize) -> Option<[usize; 2]> {
        self.clusters[id].children
    }

    /// Original indices of the unknowns in cluster `id`, in tree order.
    pub fn indices(&self, id: usize) -> &[usize] {
        &self.perm[self.clusters[id].range()]
    }

    /// Tree position → original index.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Original index → tree position.
    pub fn inverse_permutation(&self) -> &[usize] {
        &self.inverse
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Admissible,
    InadmissibleLeaf,
    Subdivided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub level: usize,
    pub kind: BlockKind,
    #[serde(skip)]
    pub parent: Option<usize>,
    /// `[(r1,c1), (r1,c2), (r2,c1), (r2,c2)]` for subdivided blocks.
    #[serde(skip)]
    pub children: Option<[usize; 4]>,
}

/// Where a same-level cluster pair lives in the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Node(usize),
    /// Part of an admissible block on a coarser level.
    InsideAdmissible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockTreeRepr")]
pub struct BlockTree {
    tree: ClusterTree,
    eta: f64,
    blocks: Vec<Block>,
    #[serde(skip)]
    lookup: HashMap<(usize, usize), usize>,
    #[serde(skip)]
    level_starts: Vec<usize>,
    #[serde(skip)]
    row_blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    col_blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    csp: usize,
}

// Deserialization goes through the same checks as a loaded file, so a
// `ClusterTree` or `BlockTree` value always has its lookups in place.
#[derive(Deserialize)]
struct ClusterTreeRepr {
    clusters: Vec<Cluster>,
    perm: Vec<usize>,
    leafsize: usize,
}

impl TryFrom<ClusterTreeRepr> for ClusterTree {
    type Error = Error;

    fn try_from(r: ClusterTreeRepr) -> Result<Self> {
        ClusterTree {
            clusters: r.clusters,
            perm: r.perm,
            leafsize: r.leafsize,
            inverse: Vec::new(),
            level_starts: Vec::new(),
        }
        .validated()
    }
}

#[derive(Deserialize)]
struct BlockTreeRepr {
    tree: ClusterTree,
    eta: f64,
    blocks: Vec<Block>,
}

impl TryFrom<BlockTreeRepr> for BlockTree {
    type Error = Error;

    fn try_from(r: BlockTreeRepr) -> Result<Self> {
        BlockTree {
            tree: r.tree,
            eta: r.eta,
            blocks: r.blocks,
            lookup: HashMap::new(),
            level_starts: Vec::new(),
            row_blocks: Vec::new(),
            col_blocks: Vec::new(),
            csp: 0,
        }
        .validated()
    }
}

/// Block partition of `tree × tree`: admissible pairs stop the recursion,
/// leaf pairs become dense blocks, everything else is subdivided.
pub fn build_block_tree(tree: &ClusterTree, eta: f64) -> Result<BlockTree> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Config("eta must be positive".into()));
    }
    let mut blocks = Vec::new();
    let mut current = vec![(0usize, 0usize)];
    let mut level = 0;
    while !current.is_empty() {
        current.sort_unstable();
        let mut next = Vec::new();
        for &(t, s) in &current {
            let (ct, cs) = (tree.cluster(t), tree.cluster(s));
            let kind = if is_admissible(ct, cs, eta) {
                BlockKind::Admissible
            } else if ct.is_leaf() && cs.is_leaf() {
                BlockKind::InadmissibleLeaf
            } else {
                let ([t1, t2], [s1, s2]) = (ct.children.unwrap(), cs.children.unwrap());
                next.extend([(t1, s1), (t1, s2), (t2, s1), (t2, s2)]);
                BlockKind::Subdivided
            };
            blocks.push(Block {
                row: t,
                col: s,
                level,
                kind,
                parent: None,
                children: None,
            });
        }
        current = next;
        level += 1;
    }
    Ok(BlockTree::from_parts(tree.clone(), eta, blocks))
}

impl BlockTree {
    fn from_parts(tree: ClusterTree, eta: f64, blocks: Vec<Block>) -> Self {
        let mut bt = Self {
            tree,
            eta,
            blocks,
            lookup: HashMap::new(),
            level_starts: Vec::new(),
            row_blocks: Vec::new(),
            col_blocks: Vec::new(),
            csp: 0,
        };
        bt.rebuild_index();
        bt
    }

    fn rebuild_index(&mut self) {
        self.lookup = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| ((b.row, b.col), i))
            .collect();
        self.level_starts.clear();
        for (i, b) in self.blocks.iter().enumerate() {
            while self.level_starts.len() <= b.level {
                self.level_starts.push(i);
            }
        }
        self.level_starts.push(self.blocks.len());
        self.row_blocks = vec![Vec::new(); self.tree.len()];
        self.col_blocks = vec![Vec::new(); self.tree.len()];
        for i in 0..self.blocks.len() {
            let (t, s) = (self.blocks[i].row, self.blocks[i].col);
            self.row_blocks[t].push(i);
            self.col_blocks[s].push(i);
            self.blocks[i].parent = None;
            self.blocks[i].children = None;
        }
        for i in 0..self.blocks.len() {
            if self.blocks[i].kind == BlockKind::Subdivided {
                let (t, s) = (self.blocks[i].row, self.blocks[i].col);
                let ([t1, t2], [s1, s2]) = match (self.tree.children(t), self.tree.children(s)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => continue,
                };
                let kids = [(t1, s1), (t1, s2), (t2, s1), (t2, s2)]
                    .map(|p| self.lookup.get(&p).copied().unwrap_or(usize::MAX));
                for &k in &kids {
                    if k != usize::MAX {
                        self.blocks[k].parent = Some(i);
                    }
                }
                self.blocks[i].children = Some(kids);
            }
        }
        // columns sorted by partner for a deterministic traversal order
        for list in &mut self.col_blocks {
            list.sort_by_key(|&b| self.blocks[b].row);
        }
        self.csp = (0..self.tree.len())
            .map(|c| self.row_blocks[c].len().max(self.col_blocks[c].len()))
            .max()
            .unwrap_or(0);
    }

    fn validated(mut self) -> Result<Self> {
        let bad = |m: String| Err(Error::load("structure.blocks", m));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be positive".into());
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.row >= self.tree.len() || b.col >= self.tree.len() {
                return bad(format!("block {i} references an unknown cluster"));
            }
            let (ct, cs) = (self.tree.cluster(b.row), self.tree.cluster(b.col));
            if ct.level != b.level || cs.level != b.level {
                return bad(format!("block {i} pairs clusters from different levels"));
            }
            if i > 0 && self.blocks[i - 1].level > b.level {
                return bad(format!("block {i} breaks level ordering"));
            }
            if b.kind == BlockKind::InadmissibleLeaf && !(ct.is_leaf() && cs.is_leaf()) {
                return bad(format!("inadmissible block {i} is not a leaf pair"));
            }
            if b.kind == BlockKind::Subdivided && (ct.is_leaf() || cs.is_leaf()) {
                return bad(format!("subdivided block {i} has a leaf cluster"));
            }
        }
        self.rebuild_index();
        if self.lookup.len() != self.blocks.len() {
            return bad("duplicate blocks".into());
        }
        if self.blocks.is_empty() || (self.blocks[0].row, self.blocks[0].col) != (0, 0) {
            return bad("first block must be the root pair".into());
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 && b.parent.is_none() {
                return bad(format!("block {i} has no parent"));
            }
            if let Some(kids) = b.children {
                if kids.contains(&usize::MAX) {
                    return bad(format!("subdivided block {i} misses children"));
                }
            }
        }
        Ok(self)
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &Block {
        &self.blocks[id]
    }

    pub fn num_levels(&self) -> usize {
        self.level_starts.len() - 1
    }

    pub fn level(&self, level: usize) -> Range<usize> {
        if level + 1 >= self.level_starts.len() {
            return self.blocks.len()..self.blocks.len();
        }
        self.level_starts[level]..self.level_starts[level + 1]
    }

    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        self.lookup.get(&(row, col)).copied()
    }

    /// Placement of the same-level pair `(row, col)`.
    pub fn placement(&self, row: usize, col: usize) -> Placement {
        match self.find(row, col) {
            Some(b) => Placement::Node(b),
            None => Placement::InsideAdmissible,
        }
    }

    /// Blocks with row cluster `t`, ordered by column cluster.
    pub fn row_blocks(&self, t: usize) -> &[usize] {
        &self.row_blocks[t]
    }

    /// Blocks with column cluster `s`, ordered by row cluster.
    pub fn col_blocks(&self, s: usize) -> &[usize] {
        &self.col_blocks[s]
    }

    /// Largest number of blocks a single cluster forms on one level.
    pub fn csp(&self) -> usize {
        self.csp
    }

    pub fn count(&self, level: usize, kind: BlockKind) -> usize {
        self.blocks[self.level(level)]
            .iter()
            .filter(|b| b.kind == kind)
            .count()
    }

    /// Whether a row cluster needs a far-field basis: some admissible
    /// block hangs off it or one of its ancestors.
    pub fn has_far_field(&self, t: usize, row_side: bool) -> bool {
        let mut c = Some(t);
        while let Some(id) = c {
            let list = if row_side {
                &self.row_blocks[id]
            } else {
                &self.col_blocks[id]
            };
            if list
                .iter()
                .any(|&b| self.blocks[b].kind == BlockKind::Admissible)
            {
                return true;
            }
            c = self.tree.cluster(id).parent;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_geometry, GeometryFamily, GeometrySpec};

    fn cloud(n: usize, seed: u64) -> PointSet {
        generate_geometry(&GeometrySpec {
            family: GeometryFamily::RandomCloud { n },
            seed,
        })
        .unwrap()
    }

    fn cluster_with_box(min: Point, max: Point) -> Cluster {
        Cluster {
            id: 0,
            begin: 0,
            end: 1,
            level: 0,
            parent: None,
            children: None,
            bbox: BBox::new(min, max),
        }
    }

    #[test]
    fn admissibility_examples() {
        let a = cluster_with_box([0.0; 3], [1.0; 3]);
        let b = cluster_with_box([3.0; 3], [4.0; 3]);
        assert!(is_admissible(&a, &b, 1.0));
        assert!(!is_admissible(&a, &a, 1.0));
        assert!(!is_admissible(&a, &a, 1e6));
        let i = cluster_with_box([0.0; 3], [1.0, 0.0, 0.0]);
        let j = cluster_with_box([2.0, 0.0, 0.0], [3.0, 0.0, 0.0]);
        assert!(is_admissible(&i, &j, 1.0));
        assert!(!is_admissible(&i, &j, 0.999));
    }

    #[test]
    fn collinear_split() {
        let pts = PointSet::new((0..8).map(|i| [i as f64, 0.0, 0.0]).collect()).unwrap();
        let tree = build_cluster_tree(&pts, 4).unwrap();
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.indices(1), &[0, 1, 2, 3]);
        assert_eq!(tree.indices(2), &[4, 5, 6, 7]);
    }

    #[test]
    fn small_set_is_single_leaf() {
        let tree = build_cluster_tree(&cloud(10, 1), 10).unwrap();
        assert_eq!(tree.depth(), 0);
        assert!(tree.cluster(0).is_leaf());
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(bt.blocks().len(), 1);
        assert_eq!(bt.block(0).kind, BlockKind::InadmissibleLeaf);
        assert_eq!(bt.csp(), 1);
    }

    #[test]
    fn thousand_points_leafsize_thirty() {
        let pts = cloud(1000, 5);
        let tree = build_cluster_tree(&pts, 30).unwrap();
        assert_eq!(tree.depth(), (1000f64 / 30.0).log2().ceil() as usize);
        for l in tree.leaves() {
            let c = tree.cluster(l);
            assert!(c.size() <= 30 && 2 * c.size() >= 30);
            for &i in tree.indices(l) {
                assert!(c.bbox.contains(&pts.points()[i]));
            }
        }
        for level in 0..=tree.depth() {
            let mut covered = 0;
            for c in tree.level(level) {
                assert_eq!(tree.cluster(c).begin, covered);
                covered = tree.cluster(c).end;
            }
            assert_eq!(covered, 1000);
        }
        let mut seen = tree.permutation().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn separated_clouds_are_admissible_at_level_one() {
        let mut pts: Vec<Point> = (0..8).map(|i| [i as f64 * 0.01, 0.0, 0.0]).collect();
        pts.extend((0..8).map(|i| [100.0 + i as f64 * 0.01, 0.0, 0.0]));
        let tree = build_cluster_tree(&PointSet::new(pts).unwrap(), 8).unwrap();
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(bt.block(bt.find(1, 2).unwrap()).kind, BlockKind::Admissible);
        assert_eq!(bt.block(bt.find(2, 1).unwrap()).kind, BlockKind::Admissible);
        assert_eq!(bt.block(bt.find(1, 1).unwrap()).kind, BlockKind::InadmissibleLeaf);
    }

    fn leaf_area(bt: &BlockTree) -> usize {
        bt.blocks()
            .iter()
            .filter(|b| b.kind != BlockKind::Subdivided)
            .map(|b| bt.tree().cluster(b.row).size() * bt.tree().cluster(b.col).size())
            .sum()
    }

    #[test]
    fn coverage_symmetry_and_monotone_eta() {
        let pts = cloud(600, 11);
        let tree = build_cluster_tree(&pts, 20).unwrap();
        let bt = build_block_tree(&tree, 1.0).unwrap();
        assert_eq!(leaf_area(&bt), 600 * 600);
        for b in bt.blocks() {
            let mirror = bt.block(bt.find(b.col, b.row).unwrap());
            assert_eq!(mirror.kind, b.kind);
            if b.kind == BlockKind::Admissible {
                assert!(is_admissible(tree.cluster(b.row), tree.cluster(b.col), 1.0));
            }
            if let Some(kids) = b.children {
                assert!(kids.iter().all(|&k| bt.block(k).parent.is_some()));
            }
        }
        let wider = build_block_tree(&tree, 2.0).unwrap();
        for b in bt.blocks().iter().filter(|b| b.kind == BlockKind::Admissible) {
            // admissible at eta stays admissible (or is absorbed higher) at 2·eta
            let mut pair = Some((b.row, b.col));
            let mut ok = false;
            while let Some((t, s)) = pair {
                if let Some(id) = wider.find(t, s) {
                    ok = wider.block(id).kind == BlockKind::Admissible;
                    break;
                }
                pair = tree.cluster(t).parent.zip(tree.cluster(s).parent);
            }
            assert!(ok);
        }
        assert!(bt.csp() >= 1 && bt.csp() <= 4 * tree.leaves().len());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_cluster_tree(&cloud(4, 0), 0).is_err());
        let tree = build_cluster_tree(&cloud(4, 0), 2).unwrap();
        assert!(build_block_tree(&tree, 0.0).is_err());
        assert!(build_block_tree(&tree, f64::NAN).is_err());
    }
}
