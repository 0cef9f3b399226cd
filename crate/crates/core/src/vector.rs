//! Embedding vectors and the (q, k, v) stream unit.
//!
//! Streams carry a fixed embedding dimension; every constructor rejects
//! non-finite components and every consumer treats a dimension mismatch as an
//! error rather than broadcasting.

use crate::error::{Error, Result};

/// A finite real vector of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite components.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput("vector components"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vector components"));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("vector dimension must be positive".into()));
        }
        Ok(Vector(vec![0.0; dim]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Result<Vector> {
        Vector::new(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: other.dim() });
        }
        Vector::new(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: other.dim() });
        }
        Vector::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Dot product over raw slices; lengths must already agree.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One stream update: query, key, and value embeddings of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenTriple {
    pub q: Vector,
    pub k: Vector,
    pub v: Vector,
}

impl TokenTriple {
    pub fn new(q: Vector, k: Vector, v: Vector) -> Result<Self> {
        if q.dim() != k.dim() {
            return Err(Error::DimMismatch { expected: q.dim(), got: k.dim() });
        }
        if q.dim() != v.dim() {
            return Err(Error::DimMismatch { expected: q.dim(), got: v.dim() });
        }
        Ok(TokenTriple { q, k, v })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }
}
