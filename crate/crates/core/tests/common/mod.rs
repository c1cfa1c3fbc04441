#![allow(dead_code)]

use std::sync::Arc;

use h2mmp::geometry::{generate_geometry, GeometryFamily, GeometrySpec, Kernel, PointSet};
use h2mmp::h2::build_h2_from_source;
use h2mmp::htree::{build_block_tree, build_cluster_tree, BlockTree};
use h2mmp::{Complex64, H2Matrix, KernelMatrix, Scalar};
use nalgebra::DMatrix;

pub fn cloud(n: usize, seed: u64) -> PointSet {
    generate_geometry(&GeometrySpec {
        family: GeometryFamily::RandomCloud { n },
        seed,
    })
    .unwrap()
}

pub fn structure(points: &PointSet, leafsize: usize, eta: f64) -> Arc<BlockTree> {
    let tree = build_cluster_tree(points, leafsize).unwrap();
    Arc::new(build_block_tree(&tree, eta).unwrap())
}

/// Compressed kernel matrix on a shared structure.
pub fn kernel_h2<T: Scalar>(
    points: &PointSet,
    kernel: Kernel,
    st: &Arc<BlockTree>,
    eps_h2: f64,
) -> H2Matrix<T> {
    let source = KernelMatrix::new(points.clone(), kernel).unwrap();
    build_h2_from_source(&source, st.clone(), eps_h2).unwrap()
}

pub fn laplace(n: usize, seed: u64, leafsize: usize, eta: f64, eps_h2: f64) -> H2Matrix<f64> {
    let pts = cloud(n, seed);
    let st = structure(&pts, leafsize, eta);
    kernel_h2(&pts, Kernel::laplace(), &st, eps_h2)
}

pub fn helmholtz(n: usize, seed: u64, leafsize: usize, eta: f64, eps_h2: f64) -> H2Matrix<Complex64> {
    let pts = cloud(n, seed);
    let st = structure(&pts, leafsize, eta);
    kernel_h2(&pts, Kernel::helmholtz(2.0 * std::f64::consts::PI), &st, eps_h2)
}

pub fn rel_fro<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Rows and columns of `d` (original order) listed by `rows` and `cols`.
pub fn sub<T: Scalar>(d: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| d[(rows[i], cols[j])])
}

/// Copy of `h` with every dense leaf block replaced by zeros.
pub fn without_full_blocks<T: Scalar>(h: &H2Matrix<T>) -> H2Matrix<T> {
    let data = h
        .data()
        .iter()
        .zip(h.structure().blocks())
        .map(|(m, b)| match b.kind {
            h2mmp::BlockKind::InadmissibleLeaf => DMatrix::zeros(m.nrows(), m.ncols()),
            _ => m.clone(),
        })
        .collect();
    H2Matrix::from_parts(
        h.structure_arc().clone(),
        h.row_basis().clone(),
        h.col_basis().clone(),
        data,
    )
    .unwrap()
}
