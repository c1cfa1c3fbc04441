//! Point sets for the experiment families and kernel matrices over them.
//!
//! Coordinates are in units of the reference length (one wavelength for the
//! oscillatory families). All generators are pure functions of their
//! [`GeometrySpec`].

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarKind};

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    labels: Option<Vec<u32>>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        Self::with_labels(points, None)
    }

    pub fn with_labels(points: Vec<Point>, labels: Option<Vec<u32>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("point set must not be empty".into()));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::Config(format!("point {i} has a non-finite coordinate")));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::DimensionMismatch {
                    expected: points.len(),
                    actual: l.len(),
                });
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// First pair of coincident points, if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        let key = |i: &usize| self.points[*i];
        order.sort_by(|a, b| {
            let (pa, pb) = (key(a), key(b));
            pa[0]
                .total_cmp(&pb[0])
                .then(pa[1].total_cmp(&pb[1]))
                .then(pa[2].total_cmp(&pb[2]))
                .then(a.cmp(b))
        });
        order.windows(2).find_map(|w| {
            (self.points[w[0]] == self.points[w[1]]).then(|| (w[0].min(w[1]), w[0].max(w[1])))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeometryFamily {
    /// Two crossing layers of `conductors` bars, each `1 × 1 × (2m+1)`,
    /// sampled on their surfaces at `density` points per unit length.
    Bus { conductors: usize, density: usize },
    /// A `width × width` lattice with `layers` layers at `spacing`.
    Slab {
        width: usize,
        layers: usize,
        spacing: f64,
    },
    /// `edge³` cubes of side 0.3 separated by gaps of 0.3, each holding a
    /// `per_edge³` cell-centred lattice.
    CubeArray { edge: usize, per_edge: usize },
    /// `n` points uniform in the unit cube.
    RandomCloud { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    #[serde(flatten)]
    pub family: GeometryFamily,
    pub seed: u64,
}

pub const CUBE_SIDE: f64 = 0.3;
pub const CUBE_GAP: f64 = 0.3;

impl GeometryFamily {
    /// Closed-form point count of the family.
    pub fn point_count(&self) -> usize {
        match *self {
            // per bar: 2 d² (ab + bc + ca) with a = b = 1, c = 2m + 1
            GeometryFamily::Bus {
                conductors: m,
                density: d,
            } => 4 * m * d * d * (4 * m + 3),
            GeometryFamily::Slab { width, layers, .. } => width * width * layers,
            GeometryFamily::CubeArray { edge, per_edge } => edge.pow(3) * per_edge.pow(3),
            GeometryFamily::RandomCloud { n } => n,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        match *self {
            GeometryFamily::Bus {
                conductors,
                density,
            } => {
                if conductors < 1 {
                    return bad("bus count must be at least 1");
                }
                if density < 1 {
                    return bad("bus sampling density must be at least 1");
                }
            }
            GeometryFamily::Slab {
                width,
                layers,
                spacing,
            } => {
                if width < 1 || layers < 1 {
                    return bad("slab width and layer count must be positive");
                }
                if !(spacing.is_finite() && spacing > 0.0) {
                    return bad("slab spacing must be positive");
                }
            }
            GeometryFamily::CubeArray { edge, per_edge } => {
                if edge < 1 || per_edge < 1 {
                    return bad("cube array sizes must be positive");
                }
            }
            GeometryFamily::RandomCloud { n } => {
                if n < 1 {
                    return bad("random cloud needs at least one point");
                }
            }
        }
        Ok(())
    }
}

/// Generates the point set for `spec`. Lattice families ignore the seed.
pub fn generate_geometry(spec: &GeometrySpec) -> Result<PointSet> {
    spec.family.validate()?;
    let mut points = Vec::with_capacity(spec.family.point_count());
    let mut labels = Vec::with_capacity(spec.family.point_count());
    match spec.family {
        GeometryFamily::Bus {
            conductors: m,
            density: d,
        } => {
            let len = (2 * m + 1) as f64;
            for layer in 0..2 {
                for c in 0..m {
                    let across = 2.0 * c as f64;
                    let (lo, dims) = if layer == 0 {
                        ([-1.0, across, 0.0], [len, 1.0, 1.0])
                    } else {
                        ([across, -1.0, 2.0], [1.0, len, 1.0])
                    };
                    let id = (layer * m + c) as u32;
                    sample_box_surface(lo, dims, d, |p| {
                        points.push(p);
                        labels.push(id);
                    });
                }
            }
        }
        GeometryFamily::Slab {
            width,
            layers,
            spacing,
        } => {
            for z in 0..layers {
                for y in 0..width {
                    for x in 0..width {
                        points.push([x as f64 * spacing, y as f64 * spacing, z as f64 * spacing]);
                        labels.push(0);
                    }
                }
            }
        }
        GeometryFamily::CubeArray { edge, per_edge } => {
            let pitch = CUBE_SIDE + CUBE_GAP;
            let h = CUBE_SIDE / per_edge as f64;
            let mut id = 0u32;
            for cz in 0..edge {
                for cy in 0..edge {
                    for cx in 0..edge {
                        let origin = [cx as f64 * pitch, cy as f64 * pitch, cz as f64 * pitch];
                        for k in 0..per_edge {
                            for j in 0..per_edge {
                                for i in 0..per_edge {
                                    points.push([
                                        origin[0] + (i as f64 + 0.5) * h,
                                        origin[1] + (j as f64 + 0.5) * h,
                                        origin[2] + (k as f64 + 0.5) * h,
                                    ]);
                                    labels.push(id);
                                }
                            }
                        }
                        id += 1;
                    }
                }
            }
        }
        GeometryFamily::RandomCloud { n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..n {
                points.push([rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]);
                labels.push(0);
            }
        }
    }
    debug_assert_eq!(points.len(), spec.family.point_count());
    PointSet::with_labels(points, Some(labels))
}

/// Cell-centred samples on the six faces of an axis-aligned box whose
/// integer dimensions are multiples of `1/density`.
fn sample_box_surface(lo: Point, dims: [f64; 3], density: usize, mut emit: impl FnMut(Point)) {
    let h = 1.0 / density as f64;
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let nu = (dims[u] * density as f64).round() as usize;
        let nv = (dims[v] * density as f64).round() as usize;
        for side in [0.0, dims[axis]] {
            for a in 0..nu {
                for b in 0..nv {
                    let mut p = lo;
                    p[axis] += side;
                    p[u] += (a as f64 + 0.5) * h;
                    p[v] += (b as f64 + 0.5) * h;
                    emit(p);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Laplace,
    Helmholtz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    /// Wavenumber in rad per unit length; only read for Helmholtz.
    pub wavenumber: f64,
    /// Self-interaction value. `None` selects twice the largest
    /// off-diagonal magnitude in the first row.
    pub diagonal_value: Option<f64>,
}

impl Kernel {
    pub fn laplace() -> Self {
        Self {
            kind: KernelKind::Laplace,
            wavenumber: 0.0,
            diagonal_value: None,
        }
    }

    pub fn helmholtz(wavenumber: f64) -> Self {
        Self {
            kind: KernelKind::Helmholtz,
            wavenumber,
            diagonal_value: None,
        }
    }

    pub fn with_diagonal(mut self, value: f64) -> Self {
        self.diagonal_value = Some(value);
        self
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        match self.kind {
            KernelKind::Laplace => ScalarKind::Real,
            KernelKind::Helmholtz => ScalarKind::Complex,
        }
    }

    /// Off-diagonal entry at distance `r > 0`, as (re, im).
    #[inline]
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match self.kind {
            KernelKind::Laplace => (1.0 / r, 0.0),
            KernelKind::Helmholtz => {
                let (s, c) = (self.wavenumber * r).sin_cos();
                (c / r, s / r)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Helmholtz
            && !(self.wavenumber.is_finite() && self.wavenumber >= 0.0)
        {
            return Err(Error::Config("wavenumber must be finite and nonnegative".into()));
        }
        if let Some(d) = self.diagonal_value {
            if !d.is_finite() {
                return Err(Error::Config("diagonal value must be finite".into()));
            }
        }
        Ok(())
    }
}

#[inline]
fn distance(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Something that can hand out sub-blocks of an `N × N` operator, indexed in
/// the original unknown ordering.
pub trait EntrySource<T: Scalar> {
    fn size(&self) -> usize;

    fn scalar_kind(&self) -> ScalarKind {
        T::KIND
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<T>;
}

impl<T: Scalar> EntrySource<T> for DMatrix<T> {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

/// Lazily evaluated kernel matrix over a validated point set.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    points: PointSet,
    kernel: Kernel,
    diagonal: f64,
}

impl KernelMatrix {
    pub fn new(points: PointSet, kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        if let Some((first, second)) = points.find_duplicate() {
            return Err(Error::DuplicatePoints { first, second });
        }
        let diagonal = match kernel.diagonal_value {
            Some(d) => d,
            None => {
                let p = points.points();
                let max = p[1..]
                    .iter()
                    .map(|q| {
                        let (re, im) = kernel.eval(distance(&p[0], q));
                        re.hypot(im)
                    })
                    .fold(0.0f64, f64::max);
                if max > 0.0 {
                    2.0 * max
                } else {
                    1.0
                }
            }
        };
        Ok(Self {
            points,
            kernel,
            diagonal,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    #[inline]
    pub fn entry<T: Scalar>(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::from_parts(self.diagonal, 0.0);
        }
        let p = self.points.points();
        let (re, im) = self.kernel.eval(distance(&p[i], &p[j]));
        T::from_parts(re, im)
    }

    pub fn to_dense<T: Scalar>(&self) -> Result<DMatrix<T>> {
        if T::KIND == ScalarKind::Real && self.kernel.scalar_kind() == ScalarKind::Complex {
            return Err(Error::ScalarKind);
        }
        let n = self.points.len();
        Ok(DMatrix::from_fn(n, n, |i, j| self.entry(i, j)))
    }
}

impl<T: Scalar> EntrySource<T> for KernelMatrix {
    fn size(&self) -> usize {
        self.points.len()
    }

    fn scalar_kind(&self) -> ScalarKind {
        self.kernel.scalar_kind()
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.entry(rows[i], cols[j]))
    }
}

/// Dense `N × N` kernel matrix in the point set's ordering.
pub fn assemble_dense<T: Scalar>(points: &PointSet, kernel: &Kernel) -> Result<DMatrix<T>> {
    KernelMatrix::new(points.clone(), *kernel)?.to_dense()
}
