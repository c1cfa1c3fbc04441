//! `C = A·B` for H² operands on a shared block tree.
//!
//! One bottom-up sweep over the levels regenerates the cluster bases of `C`
//! from Gram sums of everything the product writes into each cluster,
//! computes all products through small projected matrices, and finally
//! splits couplings left on subdivided blocks down to the leaves.
//! [`formatted_mmp`] runs the same sweep with `A`'s row bases and `B`'s
//! column bases kept fixed.

mod driver;
mod split;

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::h2::{ClusterBasis, H2Matrix};
use crate::htree::{BlockKind, BlockTree, Placement};
use crate::linalg::{Category, FlopCounter, Op};
use crate::scalar::Scalar;

pub use driver::Triple;
pub use split::{backward_split, PendingCouplings};

/// Kind of a single block product `A(i,j)·B(j,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// Dense × dense.
    FullFull = 1,
    /// Dense or subdivided × low rank.
    FullLowRank = 2,
    /// Low rank × dense or subdivided.
    LowRankFull = 3,
    /// Low rank × low rank.
    LowRankLowRank = 4,
}

impl Case {
    pub fn index(self) -> usize {
        self as usize - 1
    }
}

/// Where a product contribution lands in `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Full(usize),
    Admissible(usize),
    Subdivided(usize),
    /// Inside an admissible block of a coarser level.
    Inside,
}

impl Target {
    pub fn of(structure: &BlockTree, i: usize, k: usize) -> Self {
        match structure.placement(i, k) {
            Placement::InsideAdmissible => Target::Inside,
            Placement::Node(b) => match structure.block(b).kind {
                BlockKind::Admissible => Target::Admissible(b),
                BlockKind::InadmissibleLeaf => Target::Full(b),
                BlockKind::Subdivided => Target::Subdivided(b),
            },
        }
    }
}

/// `B_j = (W^A_j)ᵀ V^B_j` for every cluster, by the transfer recursion
/// above the leaves.
pub fn precompute_basis_products<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
) -> Result<Vec<DMatrix<T>>> {
    check_shared(a, b)?;
    let mut flops = FlopCounter::new();
    Ok(basis_products(a, b, &mut flops))
}

pub(crate) fn basis_products<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
    flops: &mut FlopCounter,
) -> Vec<DMatrix<T>> {
    let tree = a.tree();
    let (wa, vb) = (a.col_basis(), b.row_basis());
    let mut out: Vec<DMatrix<T>> = vec![DMatrix::zeros(0, 0); tree.len()];
    for j in (0..tree.len()).rev() {
        out[j] = match tree.children(j) {
            None => flops.prod(Category::BasisProduct, wa.local(j), Op::T, vb.local(j), Op::N),
            Some(kids) => {
                let mut acc = DMatrix::zeros(wa.rank(j), vb.rank(j));
                for c in kids {
                    let (ta, tb) = (wa.transfer(tree, j, c), vb.transfer(tree, j, c));
                    let left = flops.prod(Category::BasisProduct, &ta, Op::T, &out[c], Op::N);
                    acc += flops.mul(Category::BasisProduct, &left, &tb);
                }
                acc
            }
        };
    }
    out
}

pub(crate) fn check_shared<T: Scalar>(a: &H2Matrix<T>, b: &H2Matrix<T>) -> Result<()> {
    if std::sync::Arc::ptr_eq(a.structure_arc(), b.structure_arc()) || a.structure() == b.structure()
    {
        Ok(())
    } else {
        Err(Error::StructureMismatch)
    }
}

/// Everything the sweep produced besides `C`, kept for inspection.
#[derive(Debug, Clone)]
pub struct MmpWorkspace<T: Scalar> {
    /// `B_j` per cluster.
    pub basis_products: Vec<DMatrix<T>>,
    /// `P^A_i = (V^C_i)ᴴ V^A_i` per cluster.
    pub row_projections: Vec<DMatrix<T>>,
    /// `P^B_k = (W^B_k)ᵀ conj(W^C_k)` per cluster.
    pub col_projections: Vec<DMatrix<T>>,
    /// `(V^C_i)ᴴ A(i,j) V^B_j` for dense and subdivided blocks of `A`.
    pub collected_a: Vec<Option<DMatrix<T>>>,
    /// `(W^A_j)ᵀ B(j,k) conj(W^C_k)` for dense and subdivided blocks of `B`.
    pub collected_b: Vec<Option<DMatrix<T>>>,
    /// Non-empty Gram groups per cluster for the row and column bases.
    pub row_gram_terms: Vec<[usize; 3]>,
    pub col_gram_terms: Vec<[usize; 3]>,
}

/// Counters and diagnostics of one product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmpReport {
    /// `None` for the formatted product.
    pub eps_trunc: Option<f64>,
    /// Largest rank of `C` (rows or columns) per level.
    pub level_ranks: Vec<usize>,
    /// Block products per level and case.
    pub case_counts: Vec<[usize; 4]>,
    /// Largest number of products of each case sharing one row cluster.
    pub case_max_per_cluster: [usize; 4],
    /// Largest number of dense-operand Gram terms of one cluster (rows,
    /// columns).
    pub gram_term_max: [usize; 2],
    pub csp: usize,
    pub flops: u64,
    pub flop_breakdown: Vec<(Category, u64)>,
    pub wall_ms: f64,
    pub pending_empty: bool,
    pub degenerate_clusters: usize,
}

impl MmpReport {
    /// Checks the report's structural bounds.
    pub fn check_bounds(&self) -> Result<()> {
        let c2 = self.csp * self.csp;
        if self.case_max_per_cluster.iter().any(|&c| c > c2) {
            return Err(Error::Invariant(format!(
                "case count {:?} exceeds C_sp² = {c2}",
                self.case_max_per_cluster
            )));
        }
        if self.gram_term_max.iter().any(|&c| c > self.csp) {
            return Err(Error::Invariant(format!(
                "Gram term count {:?} exceeds C_sp = {}",
                self.gram_term_max, self.csp
            )));
        }
        if !self.pending_empty {
            return Err(Error::Invariant("pending couplings left after split".into()));
        }
        Ok(())
    }

    pub fn max_rank(&self) -> usize {
        self.level_ranks.iter().copied().max().unwrap_or(0)
    }
}

/// Accuracy-controlled product. Bases of `C` are regenerated so that the
/// normalized Gram singular values dropped at each cluster stay at or
/// below `eps_trunc`.
pub fn mmp<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
    eps_trunc: f64,
) -> Result<(H2Matrix<T>, MmpReport)> {
    let (c, report, _) = mmp_with_workspace(a, b, eps_trunc)?;
    Ok((c, report))
}

pub fn mmp_with_workspace<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
    eps_trunc: f64,
) -> Result<(H2Matrix<T>, MmpReport, MmpWorkspace<T>)> {
    if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
        return Err(Error::Config(format!("eps_trunc must lie in (0,1), got {eps_trunc}")));
    }
    run(a, b, Some(eps_trunc))
}

/// Fixed-basis product: `C` keeps `A`'s row bases and `B`'s column bases.
pub fn formatted_mmp<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
) -> Result<(H2Matrix<T>, MmpReport)> {
    let (c, report, _) = run(a, b, None)?;
    Ok((c, report))
}

fn run<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
    eps: Option<f64>,
) -> Result<(H2Matrix<T>, MmpReport, MmpWorkspace<T>)> {
    check_shared(a, b)?;
    let start = Instant::now();
    let mut sweep = driver::Sweep::new(a, b, eps);
    sweep.run()?;
    let out = sweep.finish()?;
    let tree = a.tree();
    let c = H2Matrix::from_parts(
        a.structure_arc().clone(),
        ClusterBasis::new(tree, out.row_local, out.row_degenerate)?,
        ClusterBasis::new(tree, out.col_local, out.col_degenerate)?,
        out.data,
    )?;
    let level_ranks = c
        .row_basis()
        .level_ranks(tree)
        .into_iter()
        .zip(c.col_basis().level_ranks(tree))
        .map(|(r, s)| r.max(s))
        .collect();
    let degenerate_clusters = (0..tree.len())
        .filter(|&t| c.row_basis().is_degenerate(t) || c.col_basis().is_degenerate(t))
        .count();
    let report = MmpReport {
        eps_trunc: eps,
        level_ranks,
        case_counts: out.case_counts,
        case_max_per_cluster: out.case_max,
        gram_term_max: out.gram_term_max,
        csp: a.structure().csp(),
        flops: out.flops.total(),
        flop_breakdown: out.flops.breakdown(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        pending_empty: out.pending_empty,
        degenerate_clusters,
    };
    if !report.pending_empty {
        return Err(Error::Invariant("pending couplings left after split".into()));
    }
    Ok((c, report, out.workspace))
}
