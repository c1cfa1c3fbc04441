//! Product error measurement and scaling counters.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{generate_geometry, GeometrySpec, Kernel, KernelKind};
use crate::h2::{build_h2_from_kernel, H2Matrix};
use crate::mmp::mmp;
use crate::scalar::Scalar;

/// Uniform vector in `[-1, 1]` (real and imaginary parts independently).
pub fn random_vector<T: Scalar>(n: usize, seed: u64) -> DVector<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| T::sample_unit(&mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub value: f64,
    /// `A(Bx)` was exactly zero; `value` is then the absolute norm `‖Cx‖`.
    pub reference_zero: bool,
}

/// `‖Cx − A(Bx)‖ / ‖A(Bx)‖` for a random `x` drawn from `seed`, all
/// products through the exact matrix-vector product.
pub fn relative_error<T: Scalar>(
    a: &H2Matrix<T>,
    b: &H2Matrix<T>,
    c: &H2Matrix<T>,
    seed: u64,
) -> Result<RelativeError> {
    let n = a.size();
    for m in [b, c] {
        if m.size() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.size(),
            });
        }
    }
    let x = random_vector::<T>(n, seed);
    let reference = a.mvp(&b.mvp(&x)?)?;
    let cx = c.mvp(&x)?;
    let rnorm = reference.norm();
    if rnorm == 0.0 {
        return Ok(RelativeError {
            value: cx.norm(),
            reference_zero: true,
        });
    }
    Ok(RelativeError {
        value: (cx - reference).norm() / rnorm,
        reference_zero: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub n: usize,
    pub eps_h2: f64,
    /// `None` for the formatted product.
    pub eps_trunc: Option<f64>,
    pub eps_rel: f64,
    pub vector_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub wall_time_mmp_ms: f64,
    pub flops: u64,
    /// Stored scalars of the product.
    pub memory_scalars: usize,
    pub csp: usize,
    pub depth: usize,
    /// Largest rank of the product per level.
    pub level_ranks: Vec<usize>,
}

impl ScalingRecord {
    pub fn flops_per_csp2(&self) -> f64 {
        self.flops as f64 / (self.csp * self.csp) as f64
    }

    pub fn memory_per_csp(&self) -> f64 {
        self.memory_scalars as f64 / self.csp as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub kernel: Kernel,
    pub leafsize: usize,
    pub eta: f64,
    pub eps_h2: f64,
    pub eps_trunc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingProbe {
    pub records: Vec<ScalingRecord>,
    /// Successive ratios of `flops / C_sp²`.
    pub flops_ratios: Vec<f64>,
    /// Successive ratios of `memory / C_sp`.
    pub memory_ratios: Vec<f64>,
}

/// Builds `A` for every geometry and records the counters of `A·A`.
pub fn scaling_probe(specs: &[GeometrySpec], params: &ScalingParams) -> Result<ScalingProbe> {
    let mut records = Vec::with_capacity(specs.len());
    for spec in specs {
        let record = match params.kernel.kind {
            KernelKind::Laplace => probe_one::<f64>(spec, params)?,
            KernelKind::Helmholtz => probe_one::<Complex64>(spec, params)?,
        };
        records.push(record);
    }
    let ratios = |f: fn(&ScalingRecord) -> f64| -> Vec<f64> {
        records.windows(2).map(|w| f(&w[1]) / f(&w[0])).collect()
    };
    Ok(ScalingProbe {
        flops_ratios: ratios(ScalingRecord::flops_per_csp2),
        memory_ratios: ratios(ScalingRecord::memory_per_csp),
        records,
    })
}

fn probe_one<T: Scalar>(spec: &GeometrySpec, p: &ScalingParams) -> Result<ScalingRecord> {
    let points = generate_geometry(spec)?;
    let a = build_h2_from_kernel::<T>(&points, &p.kernel, p.leafsize, p.eta, p.eps_h2)?;
    let start = Instant::now();
    let (c, report) = mmp(&a, &a, p.eps_trunc)?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    Ok(ScalingRecord {
        n: points.len(),
        wall_time_mmp_ms: wall,
        flops: report.flops,
        memory_scalars: c.memory_footprint(),
        csp: report.csp,
        depth: a.tree().depth(),
        level_ranks: report.level_ranks,
    })
}
