use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Field scalars the library works over: `f64` and `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const KIND: ScalarKind;

    /// Builds a scalar from real and imaginary parts; the imaginary part is
    /// dropped for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;

    fn to_parts(self) -> (f64, f64);

    /// Uniform sample with real (and imaginary) part in `[-1, 1]`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn to_parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random_range(-1.0..=1.0)
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }

    fn to_parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re = rng.random_range(-1.0..=1.0);
        let im = rng.random_range(-1.0..=1.0);
        Complex64::new(re, im)
    }
}
