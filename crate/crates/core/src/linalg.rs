//! Dense kernels shared by construction and multiplication: Gram-matrix
//! truncation, flop-counted products, normalized Gram accumulation.

use std::borrow::Cow;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Result of a Gram truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation<T: Scalar> {
    /// Orthonormal columns, ordered by decreasing singular value.
    pub basis: DMatrix<T>,
    /// Kept singular values of the Gram matrix.
    pub singular_values: Vec<f64>,
    /// Set when the Gram matrix was exactly zero and `e1` was returned.
    pub degenerate: bool,
}

/// Dominant eigenvectors of a Hermitian positive semidefinite `g`.
///
/// Keeps every vector with `σ_i / σ_max > eps` and at least one. A zero
/// matrix yields the first unit vector with the degenerate flag set.
pub fn svd_truncate_gram<T: Scalar>(g: &DMatrix<T>, eps: f64) -> Truncation<T> {
    let n = g.nrows();
    assert_eq!(n, g.ncols(), "Gram matrix must be square");
    if n == 0 {
        return Truncation {
            basis: DMatrix::zeros(0, 0),
            singular_values: Vec::new(),
            degenerate: false,
        };
    }
    if g.iter().all(|x| x.is_zero()) {
        let mut e1 = DMatrix::zeros(n, 1);
        e1[(0, 0)] = T::one();
        return Truncation {
            basis: e1,
            singular_values: vec![0.0],
            degenerate: true,
        };
    }
    // exact Hermitian symmetrization before the eigensolver
    let half = T::from_real(0.5);
    let sym = DMatrix::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conjugate()) * half);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    let sigma: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let smax = sigma[order[0]];
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .enumerate()
        .take_while(|&(pos, idx)| pos == 0 || sigma[idx] / smax > eps)
        .map(|(_, idx)| idx)
        .collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (c, &idx) in keep.iter().enumerate() {
        let mut col = eig.eigenvectors.column(idx).into_owned();
        // fix the phase: largest-magnitude entry real and positive
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (r, x)| {
                let m = x.modulus();
                if m > best.1 {
                    (r, m)
                } else {
                    best
                }
            })
            .0;
        let p = col[pivot];
        let phase = p.conjugate().unscale(p.modulus());
        col *= phase;
        basis.set_column(c, &col);
    }
    Truncation {
        basis,
        singular_values: keep.iter().map(|&i| sigma[i]).collect(),
        degenerate: false,
    }
}

/// Operand transformation for [`FlopCounter::prod`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// As is.
    N,
    /// Transpose.
    T,
    /// Conjugate transpose.
    H,
    /// Entrywise conjugate.
    C,
}

fn apply<T: Scalar>(m: &DMatrix<T>, op: Op) -> Cow<'_, DMatrix<T>> {
    match op {
        Op::N => Cow::Borrowed(m),
        Op::T => Cow::Owned(m.transpose()),
        Op::H => Cow::Owned(m.adjoint()),
        Op::C => Cow::Owned(m.map(|x| x.conjugate())),
    }
}

fn shape(m: &DMatrix<impl Scalar>, op: Op) -> (usize, usize) {
    match op {
        Op::N | Op::C => (m.nrows(), m.ncols()),
        Op::T | Op::H => (m.ncols(), m.nrows()),
    }
}

/// Work categories tracked by [`FlopCounter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    BasisProduct,
    Gram,
    Eigen,
    Projection,
    Collect,
    Coupling,
    Merge,
    Split,
    Dense,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::BasisProduct,
        Category::Gram,
        Category::Eigen,
        Category::Projection,
        Category::Collect,
        Category::Coupling,
        Category::Merge,
        Category::Split,
        Category::Dense,
    ];
}

/// Nominal floating-point operation counts: `2mkn` for an `m×k` by `k×n`
/// product, `10n³` for an `n×n` Hermitian eigendecomposition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlopCounter {
    counts: [u64; 9],
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, cat: Category, flops: u64) {
        self.counts[cat as usize] += flops;
    }

    pub fn get(&self, cat: Category) -> u64 {
        self.counts[cat as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn breakdown(&self) -> Vec<(Category, u64)> {
        Category::ALL.iter().map(|&c| (c, self.get(c))).collect()
    }

    /// `op_a(a) · op_b(b)`, counted under `cat`.
    pub fn prod<T: Scalar>(
        &mut self,
        cat: Category,
        a: &DMatrix<T>,
        op_a: Op,
        b: &DMatrix<T>,
        op_b: Op,
    ) -> DMatrix<T> {
        let (m, k) = shape(a, op_a);
        let (k2, n) = shape(b, op_b);
        assert_eq!(k, k2, "inner dimensions differ: {m}x{k} · {k2}x{n}");
        self.add(cat, 2 * (m * k * n) as u64);
        if m == 0 || n == 0 || k == 0 {
            return DMatrix::zeros(m, n);
        }
        match (op_a, op_b) {
            (Op::H, Op::N) => a.ad_mul(b),
            (Op::T, Op::N) => a.tr_mul(b),
            _ => apply(a, op_a).as_ref() * apply(b, op_b).as_ref(),
        }
    }

    pub fn mul<T: Scalar>(&mut self, cat: Category, a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
        self.prod(cat, a, Op::N, b, Op::N)
    }

    /// `a · b · c`.
    pub fn mul3<T: Scalar>(
        &mut self,
        cat: Category,
        a: &DMatrix<T>,
        b: &DMatrix<T>,
        c: &DMatrix<T>,
    ) -> DMatrix<T> {
        let ab = self.mul(cat, a, b);
        self.mul(cat, &ab, c)
    }

    pub fn truncate<T: Scalar>(&mut self, g: &DMatrix<T>, eps: f64) -> Truncation<T> {
        let n = g.nrows() as u64;
        self.add(Category::Eigen, 10 * n * n * n);
        svd_truncate_gram(g, eps)
    }
}

/// One group of Gram terms `Σ X Xᴴ`.
#[derive(Debug, Clone)]
pub struct GramGroup<T: Scalar> {
    sum: DMatrix<T>,
    terms: usize,
}

impl<T: Scalar> GramGroup<T> {
    pub fn new(n: usize) -> Self {
        Self {
            sum: DMatrix::zeros(n, n),
            terms: 0,
        }
    }

    /// Adds `x xᴴ`; factors with no rows or columns carry no term.
    pub fn add_factor(&mut self, x: &DMatrix<T>, flops: &mut FlopCounter) {
        assert_eq!(x.nrows(), self.sum.nrows(), "Gram factor has wrong height");
        if x.nrows() == 0 || x.ncols() == 0 {
            return;
        }
        self.sum += flops.prod(Category::Gram, x, Op::N, x, Op::H);
        self.terms += 1;
    }

    /// Number of non-empty factors added.
    pub fn terms(&self) -> usize {
        self.terms
    }
}

/// Sum of Frobenius-normalized Gram groups; zero groups are skipped.
/// Returns `None` when no group received any term.
pub fn normalized_sum<T: Scalar>(groups: &[GramGroup<T>]) -> Option<DMatrix<T>> {
    let n = groups.first()?.sum.nrows();
    if groups.iter().all(|g| g.terms == 0) {
        return None;
    }
    let mut total = DMatrix::zeros(n, n);
    for g in groups {
        let norm = g.sum.norm();
        if norm > 0.0 {
            total += g.sum.unscale(norm);
        }
    }
    Some(total)
}

/// Block-diagonal `diag(a, b)`.
pub fn block_diag<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(0.0, f64::max)
}

/// `max |Qᴴ Q - I|` entrywise.
pub fn orthonormality_defect<T: Scalar>(q: &DMatrix<T>) -> f64 {
    let g = q.ad_mul(q);
    max_abs_diff(&g, &DMatrix::identity(q.ncols(), q.ncols()))
}
