//! The H² matrix: nested cluster bases, coupling matrices, dense leaf
//! blocks. Admissible block `(t,s)` is represented as `V_t S_{t,s} W_sᵀ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{EntrySource, Kernel, KernelMatrix, PointSet};
use crate::htree::{build_block_tree, build_cluster_tree, BlockKind, BlockTree, ClusterTree};
use crate::linalg::{self, FlopCounter};
use crate::scalar::{Scalar, ScalarKind};

/// Nested basis over a cluster tree. Each cluster stores one "local"
/// matrix: the basis `V_t` (`#t × k_t`) at a leaf, the stacked transfer
/// `[T_{t1}; T_{t2}]` (`(k_{t1}+k_{t2}) × k_t`) above.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterBasis<T: Scalar> {
    local: Vec<DMatrix<T>>,
    degenerate: Vec<bool>,
}

impl<T: Scalar> ClusterBasis<T> {
    /// Checks that the local matrices conform to `tree`.
    pub fn new(tree: &ClusterTree, local: Vec<DMatrix<T>>, degenerate: Vec<bool>) -> Result<Self> {
        if local.len() != tree.len() || degenerate.len() != tree.len() {
            return Err(Error::Shape {
                context: "cluster basis",
                detail: format!("{} matrices for {} clusters", local.len(), tree.len()),
            });
        }
        for (t, m) in local.iter().enumerate() {
            let rows = match tree.children(t) {
                None => tree.cluster(t).size(),
                Some([a, b]) => local[a].ncols() + local[b].ncols(),
            };
            if m.nrows() != rows {
                return Err(Error::Shape {
                    context: "cluster basis",
                    detail: format!("cluster {t} has {} rows, expected {rows}", m.nrows()),
                });
            }
        }
        Ok(Self { local, degenerate })
    }

    pub(crate) fn from_parts_unchecked(local: Vec<DMatrix<T>>, degenerate: Vec<bool>) -> Self {
        Self { local, degenerate }
    }

    pub fn rank(&self, t: usize) -> usize {
        self.local[t].ncols()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.local.iter().map(|m| m.ncols()).collect()
    }

    /// Leaf basis or stacked transfer of cluster `t`.
    pub fn local(&self, t: usize) -> &DMatrix<T> {
        &self.local[t]
    }

    pub fn locals(&self) -> &[DMatrix<T>] {
        &self.local
    }

    pub fn is_degenerate(&self, t: usize) -> bool {
        self.degenerate[t]
    }

    pub fn degenerate_flags(&self) -> &[bool] {
        &self.degenerate
    }

    /// Transfer `T_c` from child `c` of `t` into `t` (`k_c × k_t`).
    pub fn transfer(&self, tree: &ClusterTree, t: usize, c: usize) -> DMatrix<T> {
        let [a, _] = tree.children(t).expect("transfer requested at a leaf");
        let offset = if c == a { 0 } else { self.rank(a) };
        self.local[t]
            .rows(offset, self.rank(c))
            .into_owned()
    }

    /// Full basis `V_t` (`#t × k_t`) through the transfer recursion.
    pub fn materialize(&self, tree: &ClusterTree, t: usize) -> DMatrix<T> {
        match tree.children(t) {
            None => self.local[t].clone(),
            Some([a, b]) => {
                let (va, vb) = (self.materialize(tree, a), self.materialize(tree, b));
                let ka = self.rank(a);
                let top = &va * self.local[t].rows(0, ka);
                let bottom = &vb * self.local[t].rows(ka, self.rank(b));
                let mut v = DMatrix::zeros(top.nrows() + bottom.nrows(), self.rank(t));
                v.rows_mut(0, top.nrows()).copy_from(&top);
                v.rows_mut(top.nrows(), bottom.nrows()).copy_from(&bottom);
                v
            }
        }
    }

    /// Materialized bases for every cluster, built bottom-up.
    pub fn materialize_all(&self, tree: &ClusterTree) -> Vec<DMatrix<T>> {
        let mut out: Vec<DMatrix<T>> = vec![DMatrix::zeros(0, 0); tree.len()];
        for t in (0..tree.len()).rev() {
            out[t] = match tree.children(t) {
                None => self.local[t].clone(),
                Some([a, b]) => {
                    let ka = self.rank(a);
                    let top = &out[a] * self.local[t].rows(0, ka);
                    let bottom = &out[b] * self.local[t].rows(ka, self.rank(b));
                    let mut v = DMatrix::zeros(top.nrows() + bottom.nrows(), self.rank(t));
                    v.rows_mut(0, top.nrows()).copy_from(&top);
                    v.rows_mut(top.nrows(), bottom.nrows()).copy_from(&bottom);
                    v
                }
            };
        }
        out
    }

    /// `max |V_t - diag(V_{t1}, V_{t2}) [T_{t1}; T_{t2}]|` over all
    /// non-leaf clusters, with the block-diagonal factor formed explicitly.
    pub fn nestedness_defect(&self, tree: &ClusterTree) -> f64 {
        let all = self.materialize_all(tree);
        let mut worst = 0.0f64;
        for t in 0..tree.len() {
            if let Some([a, b]) = tree.children(t) {
                let d = linalg::block_diag(&all[a], &all[b]);
                worst = worst.max(linalg::max_abs_diff(&all[t], &(d * &self.local[t])));
            }
        }
        worst
    }

    /// Largest `|QᴴQ - I|` over all local matrices.
    pub fn orthonormality_defect(&self) -> f64 {
        self.local
            .iter()
            .map(linalg::orthonormality_defect)
            .fold(0.0, f64::max)
    }

    pub fn memory(&self) -> usize {
        self.local.iter().map(|m| m.len()).sum()
    }

    pub fn max_rank(&self) -> usize {
        self.local.iter().map(|m| m.ncols()).max().unwrap_or(0)
    }

    /// Largest rank on each level of `tree`.
    pub fn level_ranks(&self, tree: &ClusterTree) -> Vec<usize> {
        (0..=tree.depth())
            .map(|l| tree.level(l).map(|t| self.rank(t)).max().unwrap_or(0))
            .collect()
    }
}

/// H² matrix over a shared block tree. `data[b]` holds the coupling of an
/// admissible block, the dense values of an inadmissible leaf (rows and
/// columns in tree order) and an empty matrix for subdivided blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Matrix<T: Scalar> {
    structure: Arc<BlockTree>,
    row_basis: ClusterBasis<T>,
    col_basis: ClusterBasis<T>,
    data: Vec<DMatrix<T>>,
}

impl<T: Scalar> H2Matrix<T> {
    pub fn from_parts(
        structure: Arc<BlockTree>,
        row_basis: ClusterBasis<T>,
        col_basis: ClusterBasis<T>,
        data: Vec<DMatrix<T>>,
    ) -> Result<Self> {
        let tree = structure.tree();
        let row_basis = ClusterBasis::new(tree, row_basis.local, row_basis.degenerate)?;
        let col_basis = ClusterBasis::new(tree, col_basis.local, col_basis.degenerate)?;
        if data.len() != structure.blocks().len() {
            return Err(Error::Shape {
                context: "block data",
                detail: format!("{} entries for {} blocks", data.len(), structure.blocks().len()),
            });
        }
        for (i, (b, m)) in structure.blocks().iter().zip(&data).enumerate() {
            let want = match b.kind {
                BlockKind::Admissible => (row_basis.rank(b.row), col_basis.rank(b.col)),
                BlockKind::InadmissibleLeaf => {
                    (tree.cluster(b.row).size(), tree.cluster(b.col).size())
                }
                BlockKind::Subdivided => (0, 0),
            };
            if m.shape() != want {
                return Err(Error::Shape {
                    context: "block data",
                    detail: format!("block {i} is {:?}, expected {want:?}", m.shape()),
                });
            }
        }
        Ok(Self {
            structure,
            row_basis,
            col_basis,
            data,
        })
    }

    pub fn structure(&self) -> &BlockTree {
        &self.structure
    }

    pub fn structure_arc(&self) -> &Arc<BlockTree> {
        &self.structure
    }

    pub fn tree(&self) -> &ClusterTree {
        self.structure.tree()
    }

    pub fn size(&self) -> usize {
        self.tree().size()
    }

    pub fn row_basis(&self) -> &ClusterBasis<T> {
        &self.row_basis
    }

    pub fn col_basis(&self) -> &ClusterBasis<T> {
        &self.col_basis
    }

    /// Coupling, dense block or empty matrix of block `b`.
    pub fn block_data(&self, b: usize) -> &DMatrix<T> {
        &self.data[b]
    }

    pub fn data(&self) -> &[DMatrix<T>] {
        &self.data
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        T::KIND
    }

    /// Stored scalars in bases, transfers, couplings and dense blocks.
    pub fn memory_footprint(&self) -> usize {
        self.row_basis.memory()
            + self.col_basis.memory()
            + self.data.iter().map(|m| m.len()).sum::<usize>()
    }

    pub fn max_rank(&self) -> usize {
        self.row_basis.max_rank().max(self.col_basis.max_rank())
    }

    /// Dense value of block `b` in tree order (`#t × #s`). Subdivided
    /// blocks are assembled from their descendants.
    pub fn block_dense(&self, b: usize) -> DMatrix<T> {
        let tree = self.tree();
        let blk = self.structure.block(b);
        match blk.kind {
            BlockKind::InadmissibleLeaf => self.data[b].clone(),
            BlockKind::Admissible => {
                let v = self.row_basis.materialize(tree, blk.row);
                let w = self.col_basis.materialize(tree, blk.col);
                v * &self.data[b] * w.transpose()
            }
            BlockKind::Subdivided => {
                let (ct, cs) = (tree.cluster(blk.row), tree.cluster(blk.col));
                let mut out = DMatrix::zeros(ct.size(), cs.size());
                for k in blk.children.unwrap() {
                    let kb = self.structure.block(k);
                    let (r0, c0) = (
                        tree.cluster(kb.row).begin - ct.begin,
                        tree.cluster(kb.col).begin - cs.begin,
                    );
                    let sub = self.block_dense(k);
                    out.view_mut((r0, c0), sub.shape()).copy_from(&sub);
                }
                out
            }
        }
    }

    /// Dense `N × N` matrix in the original unknown ordering.
    pub fn to_dense(&self) -> DMatrix<T> {
        let tree = self.tree();
        let n = tree.size();
        let v = self.row_basis.materialize_all(tree);
        let w = self.col_basis.materialize_all(tree);
        let mut out = DMatrix::zeros(n, n);
        for (b, blk) in self.structure.blocks().iter().enumerate() {
            let m = match blk.kind {
                BlockKind::Subdivided => continue,
                BlockKind::InadmissibleLeaf => self.data[b].clone(),
                BlockKind::Admissible => &v[blk.row] * &self.data[b] * w[blk.col].transpose(),
            };
            let (rows, cols) = (tree.indices(blk.row), tree.indices(blk.col));
            for (j, &cj) in cols.iter().enumerate() {
                for (i, &ri) in rows.iter().enumerate() {
                    out[(ri, cj)] = m[(i, j)];
                }
            }
        }
        out
    }

    /// Exact matrix-vector product through forward and backward transforms.
    pub fn mvp(&self, x: &DVector<T>) -> Result<DVector<T>> {
        let tree = self.tree();
        let n = tree.size();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x.len(),
            });
        }
        let perm = tree.permutation();
        let xp = DVector::from_fn(n, |i, _| x[perm[i]]);

        // forward: x̂_s = W_sᵀ x_s
        let mut xhat: Vec<DVector<T>> = vec![DVector::zeros(0); tree.len()];
        for s in (0..tree.len()).rev() {
            let local = self.col_basis.local(s);
            let input = match tree.children(s) {
                None => xp.rows_range(tree.cluster(s).range()).into_owned(),
                Some([a, b]) => stack(&xhat[a], &xhat[b]),
            };
            xhat[s] = local.tr_mul(&input);
        }

        let mut yhat: Vec<DVector<T>> = (0..tree.len())
            .map(|t| DVector::zeros(self.row_basis.rank(t)))
            .collect();
        let mut yp = DVector::zeros(n);
        for (b, blk) in self.structure.blocks().iter().enumerate() {
            match blk.kind {
                BlockKind::Admissible => yhat[blk.row] += &self.data[b] * &xhat[blk.col],
                BlockKind::InadmissibleLeaf => {
                    let (rt, rs) = (tree.cluster(blk.row).range(), tree.cluster(blk.col).range());
                    let prod = &self.data[b] * xp.rows_range(rs);
                    let mut seg = yp.rows_range_mut(rt);
                    seg += prod;
                }
                BlockKind::Subdivided => {}
            }
        }

        // backward: push ŷ down to the leaves
        for t in 0..tree.len() {
            let local = self.row_basis.local(t);
            let down = local * &yhat[t];
            match tree.children(t) {
                None => {
                    let mut seg = yp.rows_range_mut(tree.cluster(t).range());
                    seg += down;
                }
                Some([a, b]) => {
                    let ka = self.row_basis.rank(a);
                    yhat[a] += down.rows(0, ka);
                    yhat[b] += down.rows(ka, down.len() - ka);
                }
            }
        }

        let mut y = DVector::zeros(n);
        for (i, &orig) in perm.iter().enumerate() {
            y[orig] = yp[i];
        }
        Ok(y)
    }

    /// Largest nestedness and orthonormality defects of both bases.
    pub fn basis_defects(&self) -> (f64, f64) {
        let tree = self.tree();
        (
            self.row_basis
                .nestedness_defect(tree)
                .max(self.col_basis.nestedness_defect(tree)),
            self.row_basis
                .orthonormality_defect()
                .max(self.col_basis.orthonormality_defect()),
        )
    }

    pub(crate) fn parts_mut(
        &mut self,
    ) -> (&BlockTree, &ClusterBasis<T>, &ClusterBasis<T>, &mut [DMatrix<T>]) {
        (
            &self.structure,
            &self.row_basis,
            &self.col_basis,
            &mut self.data,
        )
    }

    /// Scales every stored coupling and dense block.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for m in &mut out.data {
            *m *= factor;
        }
        out
    }
}

fn stack<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    let mut out = DVector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

/// Either scalar flavour, for code that handles both at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyH2 {
    Real(H2Matrix<f64>),
    Complex(H2Matrix<Complex64>),
}

impl AnyH2 {
    pub fn scalar_kind(&self) -> ScalarKind {
        match self {
            AnyH2::Real(_) => ScalarKind::Real,
            AnyH2::Complex(_) => ScalarKind::Complex,
        }
    }

    pub fn structure(&self) -> &BlockTree {
        match self {
            AnyH2::Real(h) => h.structure(),
            AnyH2::Complex(h) => h.structure(),
        }
    }

    pub fn memory_footprint(&self) -> usize {
        match self {
            AnyH2::Real(h) => h.memory_footprint(),
            AnyH2::Complex(h) => h.memory_footprint(),
        }
    }

    pub fn max_rank(&self) -> usize {
        match self {
            AnyH2::Real(h) => h.max_rank(),
            AnyH2::Complex(h) => h.max_rank(),
        }
    }
}

impl From<H2Matrix<f64>> for AnyH2 {
    fn from(h: H2Matrix<f64>) -> Self {
        AnyH2::Real(h)
    }
}

impl From<H2Matrix<Complex64>> for AnyH2 {
    fn from(h: H2Matrix<Complex64>) -> Self {
        AnyH2::Complex(h)
    }
}

/// Compresses a dense matrix (original ordering) onto `structure`.
pub fn build_h2<T: Scalar>(
    dense: &DMatrix<T>,
    structure: impl Into<Arc<BlockTree>>,
    eps_h2: f64,
) -> Result<H2Matrix<T>> {
    if dense.nrows() != dense.ncols() {
        return Err(Error::DimensionMismatch {
            expected: dense.nrows(),
            actual: dense.ncols(),
        });
    }
    build_h2_from_source(dense, structure, eps_h2)
}

/// Bottom-up nested compression of an operator given by entry blocks.
///
/// For every cluster the far field (all admissible blocks of the cluster
/// and its ancestors) is compressed through its Gram matrix; leaves yield
/// bases, inner clusters yield transfers acting on the children's
/// projected far fields. Couplings are `V_tᴴ M_{t,s} conj(W_s)`.
pub fn build_h2_from_source<T: Scalar, S: EntrySource<T> + ?Sized>(
    source: &S,
    structure: impl Into<Arc<BlockTree>>,
    eps_h2: f64,
) -> Result<H2Matrix<T>> {
    let structure = structure.into();
    let tree = structure.tree();
    if source.size() != tree.size() {
        return Err(Error::DimensionMismatch {
            expected: tree.size(),
            actual: source.size(),
        });
    }
    if T::KIND == ScalarKind::Real && source.scalar_kind() == ScalarKind::Complex {
        return Err(Error::ScalarKind);
    }
    if !(eps_h2 > 0.0 && eps_h2 < 1.0) {
        return Err(Error::Config(format!("eps_h2 must lie in (0,1), got {eps_h2}")));
    }

    let mut flops = FlopCounter::new();
    let mut col = Compressor::new(&structure, false, eps_h2);
    col.visit(0, &[], source, &mut flops, None);
    let col_basis = ClusterBasis::from_parts_unchecked(col.local, col.degenerate);
    let w = col_basis.materialize_all(tree);

    let mut data: Vec<DMatrix<T>> = vec![DMatrix::zeros(0, 0); structure.blocks().len()];
    let mut row = Compressor::new(&structure, true, eps_h2);
    row.visit(0, &[], source, &mut flops, Some((&w, &mut data)));
    let row_basis = ClusterBasis::from_parts_unchecked(row.local, row.degenerate);

    for (b, blk) in structure.blocks().iter().enumerate() {
        if blk.kind == BlockKind::InadmissibleLeaf {
            data[b] = source.block(tree.indices(blk.row), tree.indices(blk.col));
        }
    }
    H2Matrix::from_parts(structure, row_basis, col_basis, data)
}

/// Clusters `points`, partitions with `eta` and compresses the kernel
/// matrix without assembling it densely.
pub fn build_h2_from_kernel<T: Scalar>(
    points: &PointSet,
    kernel: &Kernel,
    leafsize: usize,
    eta: f64,
    eps_h2: f64,
) -> Result<H2Matrix<T>> {
    let source = KernelMatrix::new(points.clone(), *kernel)?;
    let tree = build_cluster_tree(points, leafsize)?;
    let structure = build_block_tree(&tree, eta)?;
    build_h2_from_source(&source, structure, eps_h2)
}

/// Depth-first far-field compression for one side of the operator.
struct Compressor<'a, T: Scalar> {
    structure: &'a BlockTree,
    row_side: bool,
    eps: f64,
    local: Vec<DMatrix<T>>,
    degenerate: Vec<bool>,
}

impl<'a, T: Scalar> Compressor<'a, T> {
    fn new(structure: &'a BlockTree, row_side: bool, eps: f64) -> Self {
        let n = structure.tree().len();
        Self {
            structure,
            row_side,
            eps,
            local: vec![DMatrix::zeros(0, 0); n],
            degenerate: vec![false; n],
        }
    }

    /// Admissible blocks attached to cluster `t` on this side, with the
    /// partner cluster.
    fn own_blocks(&self, t: usize) -> Vec<(usize, usize)> {
        let list = if self.row_side {
            self.structure.row_blocks(t)
        } else {
            self.structure.col_blocks(t)
        };
        list.iter()
            .filter(|&&b| self.structure.block(b).kind == BlockKind::Admissible)
            .map(|&b| {
                let blk = self.structure.block(b);
                (b, if self.row_side { blk.col } else { blk.row })
            })
            .collect()
    }

    /// Far-field block of `t` against `far` (partner indices), oriented so
    /// rows belong to `t`.
    fn far_block<S: EntrySource<T> + ?Sized>(&self, t: usize, far: &[usize], src: &S) -> DMatrix<T> {
        let rows = self.structure.tree().indices(t);
        if self.row_side {
            src.block(rows, far)
        } else {
            src.block(far, rows).transpose()
        }
    }

    /// Returns `Z_t = V_tᴴ M(t, far_t)` restricted to the parent's far
    /// columns (a prefix of `far_t`).
    fn visit<S: EntrySource<T> + ?Sized>(
        &mut self,
        t: usize,
        parent_far: &[usize],
        src: &S,
        flops: &mut FlopCounter,
        mut couplings: Option<(&[DMatrix<T>], &mut Vec<DMatrix<T>>)>,
    ) -> DMatrix<T> {
        let tree = self.structure.tree();
        let own = self.own_blocks(t);
        let mut far = parent_far.to_vec();
        let mut segments = Vec::with_capacity(own.len());
        for &(b, partner) in &own {
            segments.push((b, far.len(), tree.cluster(partner).size()));
            far.extend_from_slice(tree.indices(partner));
        }

        let y = match tree.children(t) {
            None => self.far_block(t, &far, src),
            Some([a, b]) => {
                let za = self.visit(a, &far, src, flops, couplings.as_mut().map(|(w, d)| (*w, &mut **d)));
                let zb = self.visit(b, &far, src, flops, couplings.as_mut().map(|(w, d)| (*w, &mut **d)));
                let mut y = DMatrix::zeros(za.nrows() + zb.nrows(), far.len());
                y.rows_mut(0, za.nrows()).copy_from(&za);
                y.rows_mut(za.nrows(), zb.nrows()).copy_from(&zb);
                y
            }
        };

        let (basis, degenerate) = if far.is_empty() || y.nrows() == 0 {
            (DMatrix::zeros(y.nrows(), 0), false)
        } else {
            let g = flops.prod(linalg::Category::Gram, &y, linalg::Op::N, &y, linalg::Op::H);
            let tr = flops.truncate(&g, self.eps);
            (tr.basis, tr.degenerate)
        };
        let z = basis.ad_mul(&y);
        if let Some((w, data)) = couplings.as_mut() {
            for &(b, offset, width) in &segments {
                let partner = self.structure.block(b).col;
                let zs = z.columns(offset, width);
                let wc = w[partner].map(|x| x.conjugate());
                data[b] = zs * wc;
            }
        }
        self.local[t] = basis;
        self.degenerate[t] = degenerate;
        z.columns(0, parent_far.len()).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_dense, generate_geometry, GeometryFamily, GeometrySpec};

    fn instance(n: usize, leafsize: usize) -> (DMatrix<f64>, Arc<BlockTree>) {
        let pts = generate_geometry(&GeometrySpec {
            family: GeometryFamily::RandomCloud { n },
            seed: 3,
        })
        .unwrap();
        let tree = build_cluster_tree(&pts, leafsize).unwrap();
        let bt = Arc::new(build_block_tree(&tree, 1.0).unwrap());
        (assemble_dense(&pts, &Kernel::laplace()).unwrap(), bt)
    }

    #[test]
    fn zero_matrix_compresses_to_zero() {
        let (d, bt) = instance(200, 16);
        let h = build_h2(&DMatrix::<f64>::zeros(200, 200), bt, 1e-4).unwrap();
        assert!(h.data().iter().all(|m| m.iter().all(|&x| x == 0.0)));
        assert_eq!(h.to_dense(), DMatrix::zeros(200, 200));
        assert!(d.norm() > 0.0);
    }

    #[test]
    fn single_block_round_trip() {
        let (d, bt) = instance(2, 4);
        let h = build_h2(&d, bt, 1e-4).unwrap();
        assert_eq!(h.to_dense(), d);
        assert_eq!(h.memory_footprint(), 4);
    }

    #[test]
    fn mvp_matches_dense() {
        let (d, bt) = instance(300, 20);
        let h = build_h2(&d, bt, 1e-6).unwrap();
        let x = DVector::from_fn(300, |i, _| ((i * 7919) % 13) as f64 - 6.0);
        let y = h.mvp(&x).unwrap();
        let r = h.to_dense() * &x;
        assert!((y - &r).norm() <= 1e-13 * r.norm());
        assert!(h.mvp(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn transfer_rows() {
        let (d, bt) = instance(300, 20);
        let h = build_h2(&d, bt, 1e-4).unwrap();
        let tree = h.tree();
        for t in 0..tree.len() {
            if let Some([a, b]) = tree.children(t) {
                let ta = h.row_basis().transfer(tree, t, a);
                let tb = h.row_basis().transfer(tree, t, b);
                assert_eq!(ta.nrows() + tb.nrows(), h.row_basis().local(t).nrows());
            }
        }
    }
}
