//! H²-matrix algebra with nested cluster bases.
//!
//! The crate covers the whole pipeline needed to study matrix-matrix
//! products of H²-matrices at desk scale:
//!
//! * [`geometry`] generates deterministic point sets and assembles kernel
//!   matrices (Laplace `1/r`, Helmholtz `e^{iκr}/r`).
//! * [`htree`] builds the binary cluster tree and the block tree under the
//!   strong admissibility condition.
//! * [`h2`] holds the [`H2Matrix`] type, its construction from a dense or
//!   lazily evaluated operator, the exact matrix-vector product and dense
//!   conversion.
//! * [`mmp`] computes `C = A·B` with cluster bases regenerated on the fly
//!   at a prescribed truncation accuracy, plus the fixed-basis formatted
//!   product used as a baseline.
//! * [`metrics`] measures product errors and records scaling counters.
//! * [`io`] reads and writes the `h2json/1` container.

pub mod error;
pub mod geometry;
pub mod h2;
pub mod htree;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod mmp;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{GeometryFamily, GeometrySpec, Kernel, KernelKind, KernelMatrix, PointSet};
pub use h2::{build_h2, build_h2_from_source, ClusterBasis, H2Matrix};
pub use htree::{BlockKind, BlockTree, ClusterTree};
pub use mmp::{formatted_mmp, mmp, MmpReport};
pub use scalar::{Scalar, ScalarKind};

/// Dense matrices are plain nalgebra matrices in the original unknown order.
pub type DenseMatrix<T> = nalgebra::DMatrix<T>;

pub use num_complex::Complex64;
