//! `h2json/1`: a JSON container for H² matrices.
//!
//! ```text
//! {
//!   "format": "h2json/1",
//!   "scalar": "real" | "complex",
//!   "structure": { "tree": {...}, "eta": ..., "blocks": [...] },
//!   "row_basis": { "local": [array...], "degenerate": [bool...] },
//!   "col_basis": { ... },
//!   "blocks": [array...]
//! }
//! ```
//!
//! An array is `{ "rows": r, "cols": c, "data": [...] }` in row-major order;
//! complex entries are stored as interleaved `re, im` pairs. Floats are
//! written with round-trip precision, so `load(save(H)) == H` bit for bit.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::h2::{AnyH2, ClusterBasis, H2Matrix};
use crate::htree::BlockTree;
use crate::scalar::{Scalar, ScalarKind};

pub const FORMAT: &str = "h2json/1";

#[derive(Debug, Serialize, Deserialize)]
struct Array {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Basis {
    local: Vec<Array>,
    degenerate: Vec<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    format: String,
    scalar: ScalarKind,
    structure: BlockTree,
    row_basis: Basis,
    col_basis: Basis,
    blocks: Vec<Array>,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
}

fn encode<T: Scalar>(m: &DMatrix<T>) -> Array {
    let width = if T::KIND == ScalarKind::Complex { 2 } else { 1 };
    let mut data = Vec::with_capacity(m.len() * width);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let (re, im) = m[(i, j)].to_parts();
            data.push(re);
            if width == 2 {
                data.push(im);
            }
        }
    }
    Array {
        rows: m.nrows(),
        cols: m.ncols(),
        data,
    }
}

fn decode<T: Scalar>(a: &Array, location: &str) -> Result<DMatrix<T>> {
    let width = if T::KIND == ScalarKind::Complex { 2 } else { 1 };
    let want = a
        .rows
        .checked_mul(a.cols)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| Error::load(location, "array dimensions overflow"))?;
    if a.data.len() != want {
        return Err(Error::load(
            location,
            format!(
                "{}x{} array needs {want} values, found {}",
                a.rows,
                a.cols,
                a.data.len()
            ),
        ));
    }
    if a.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::load(location, "non-finite value"));
    }
    Ok(DMatrix::from_fn(a.rows, a.cols, |i, j| {
        let p = (i * a.cols + j) * width;
        T::from_parts(a.data[p], if width == 2 { a.data[p + 1] } else { 0.0 })
    }))
}

fn encode_basis<T: Scalar>(b: &ClusterBasis<T>) -> Basis {
    Basis {
        local: b.locals().iter().map(encode).collect(),
        degenerate: b.degenerate_flags().to_vec(),
    }
}

fn decode_basis<T: Scalar>(b: &Basis, name: &str) -> Result<(Vec<DMatrix<T>>, Vec<bool>)> {
    let local = b
        .local
        .iter()
        .enumerate()
        .map(|(i, a)| decode(a, &format!("{name}.local[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok((local, b.degenerate.clone()))
}

/// Serializes `h` to an `h2json/1` string.
pub fn to_json<T: Scalar>(h: &H2Matrix<T>) -> Result<String> {
    let c = Container {
        format: FORMAT.to_string(),
        scalar: T::KIND,
        structure: h.structure().clone(),
        row_basis: encode_basis(h.row_basis()),
        col_basis: encode_basis(h.col_basis()),
        blocks: h.data().iter().map(encode).collect(),
    };
    serde_json::to_string(&c).map_err(|e| Error::load("<serialize>", e.to_string()))
}

pub fn save_h2<T: Scalar>(h: &H2Matrix<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(h)?)?;
    Ok(())
}

/// Parses an `h2json/1` document. Any malformed field fails the whole load.
pub fn from_json(text: &str) -> Result<AnyH2> {
    let header: Header = serde_json::from_str(text)
        .map_err(|e| Error::load(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    match header.format.as_deref() {
        Some(FORMAT) => {}
        Some(other) => {
            return Err(Error::load(
                "format",
                format!("unsupported version {other:?}, expected {FORMAT:?}"),
            ))
        }
        None => return Err(Error::load("format", "missing version field")),
    }
    let c: Container = serde_json::from_str(text)
        .map_err(|e| Error::load(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let Container {
        scalar,
        structure,
        row_basis,
        col_basis,
        blocks,
        ..
    } = c;
    let structure = Arc::new(structure);
    let parts = (&row_basis, &col_basis, blocks.as_slice());
    match scalar {
        ScalarKind::Real => Ok(AnyH2::Real(assemble::<f64>(structure, parts)?)),
        ScalarKind::Complex => Ok(AnyH2::Complex(assemble::<Complex64>(structure, parts)?)),
    }
}

fn assemble<T: Scalar>(
    structure: Arc<BlockTree>,
    (row_basis, col_basis, blocks): (&Basis, &Basis, &[Array]),
) -> Result<H2Matrix<T>> {
    let tree = structure.tree();
    let (rl, rd) = decode_basis::<T>(row_basis, "row_basis")?;
    let (cl, cd) = decode_basis::<T>(col_basis, "col_basis")?;
    let wrap = |name: &str, e: Error| match e {
        Error::Shape { detail, .. } => Error::load(name, detail),
        other => other,
    };
    let row = ClusterBasis::new(tree, rl, rd).map_err(|e| wrap("row_basis", e))?;
    let col = ClusterBasis::new(tree, cl, cd).map_err(|e| wrap("col_basis", e))?;
    let blocks = blocks
        .iter()
        .enumerate()
        .map(|(i, a)| decode(a, &format!("blocks[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    H2Matrix::from_parts(structure, row, col, blocks).map_err(|e| wrap("blocks", e))
}

pub fn load_h2(path: impl AsRef<Path>) -> Result<AnyH2> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::load(path.display().to_string(), e.to_string()))?;
    from_json(&text)
}
