//! JSON encoding of complex vectors and matrices as `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, CMatrix, CVector};

pub type ComplexPair = [f64; 2];

/// A matrix in JSON: either nested rows or a flat row-major list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonMatrix {
    Rows(Vec<Vec<ComplexPair>>),
    Flat(Vec<ComplexPair>),
}

impl JsonMatrix {
    pub fn from_matrix(m: &CMatrix) -> Self {
        JsonMatrix::Rows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
                .collect(),
        )
    }

    /// Decodes a square matrix, inferring the dimension when `dim` is `None`.
    pub fn to_square(&self, dim: Option<usize>, field: &str) -> Result<CMatrix> {
        match self {
            JsonMatrix::Rows(rows) => {
                let n = dim.unwrap_or(rows.len());
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::parse(field, format!("expected a {n}x{n} matrix")));
                }
                Ok(CMatrix::from_fn(n, n, |i, j| unpair(rows[i][j])))
            }
            JsonMatrix::Flat(entries) => {
                let n = match dim {
                    Some(n) => n,
                    None => (entries.len() as f64).sqrt().round() as usize,
                };
                if entries.len() != n * n {
                    return Err(Error::parse(
                        field,
                        format!("expected {} entries, got {}", n * n, entries.len()),
                    ));
                }
                Ok(CMatrix::from_fn(n, n, |i, j| unpair(entries[i * n + j])))
            }
        }
    }

    /// Decodes a general rows×cols matrix stored as nested rows.
    pub fn to_matrix(&self, field: &str) -> Result<CMatrix> {
        match self {
            JsonMatrix::Rows(rows) => {
                let r = rows.len();
                let cols = rows.first().map_or(0, |x| x.len());
                if rows.iter().any(|x| x.len() != cols) {
                    return Err(Error::parse(field, "ragged matrix rows"));
                }
                Ok(CMatrix::from_fn(r, cols, |i, j| unpair(rows[i][j])))
            }
            JsonMatrix::Flat(_) => self.to_square(None, field),
        }
    }
}

#[inline]
pub fn pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

#[inline]
pub fn unpair(p: ComplexPair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn vector_to_json(v: &CVector) -> Vec<ComplexPair> {
    v.iter().map(|&z| pair(z)).collect()
}

pub fn vector_from_json(v: &[ComplexPair]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&p| unpair(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_nested_agree() {
        let nested: JsonMatrix =
            serde_json::from_str("[[[1,0],[0,1]],[[2,0],[0,-1]]]").unwrap();
        let flat: JsonMatrix = serde_json::from_str("[[1,0],[0,1],[2,0],[0,-1]]").unwrap();
        let a = nested.to_square(Some(2), "m").unwrap();
        let b = flat.to_square(Some(2), "m").unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(0, 1)], C64::new(0.0, 1.0));
    }

    #[test]
    fn wrong_size_names_field() {
        let flat: JsonMatrix = serde_json::from_str("[[1,0],[0,1],[2,0]]").unwrap();
        let err = flat.to_square(Some(2), "matrices[0]").unwrap_err();
        assert!(err.to_string().contains("matrices[0]"));
    }
}
