//! Seeded Gaussian random projections with pairwise inner-product
//! verification.
//!
//! The projection is f(u) = (1/sqrt(d)) * A * u with A a d-by-n matrix of
//! i.i.d. standard normals generated counter-style from a 64-bit seed: column
//! c is produced on ChaCha8 stream c via Box-Muller, so any column can be
//! regenerated independently and in parallel. The target dimension for
//! preserving all pairwise inner products of n unit-norm points to within eps
//! is ceil(12 ln n / (eps^2 - eps^3)).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::randkit::box_muller;
use crate::vector::{dot, Vector};

/// Above this many matrix entries the projector regenerates columns on
/// demand instead of materializing A.
pub const MATERIALIZE_LIMIT: usize = 1 << 26;

/// Seeded random projection from `source_dim` to `target_dim` dimensions.
#[derive(Clone, Debug)]
pub struct JlProjector {
    seed: u64,
    source_dim: usize,
    target_dim: usize,
    /// Column-major d*n entries when small enough to keep.
    columns: Option<Vec<f64>>,
}

impl JlProjector {
    pub fn new(seed: u64, source_dim: usize, target_dim: usize) -> Result<Self> {
        if source_dim == 0 || target_dim == 0 {
            return Err(Error::InvalidParameter("projector dimensions must be positive".into()));
        }
        let columns = if source_dim.saturating_mul(target_dim) <= MATERIALIZE_LIMIT {
            let mut cols = Vec::with_capacity(source_dim * target_dim);
            for c in 0..source_dim {
                gaussian_column_into(seed, target_dim, c, &mut cols);
            }
            Some(cols)
        } else {
            None
        };
        Ok(JlProjector { seed, source_dim, target_dim, columns })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    /// f(x) = (1/sqrt(d)) A x. Zero coefficients skip their column entirely,
    /// which keeps basis-vector workloads cheap in on-demand mode.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.source_dim {
            return Err(Error::DimMismatch { expected: self.source_dim, got: x.dim() });
        }
        let d = self.target_dim;
        let mut acc = vec![0.0; d];
        let mut scratch = Vec::new();
        for (c, &xc) in x.as_slice().iter().enumerate() {
            if xc == 0.0 {
                continue;
            }
            let col = self.column(c, &mut scratch);
            for (a, e) in acc.iter_mut().zip(col) {
                *a += xc * e;
            }
        }
        let inv = 1.0 / (d as f64).sqrt();
        for a in &mut acc {
            *a *= inv;
        }
        Vector::new(acc)
    }

    /// Image of the i-th standard basis vector (0-based), i.e. column i of A
    /// scaled by 1/sqrt(d).
    pub fn project_basis(&self, i: usize) -> Result<Vector> {
        if i >= self.source_dim {
            return Err(Error::IndexOutOfRange { index: i, len: self.source_dim });
        }
        let mut scratch = Vec::new();
        let col = self.column(i, &mut scratch);
        let inv = 1.0 / (self.target_dim as f64).sqrt();
        Vector::new(col.iter().map(|e| e * inv).collect())
    }

    fn column<'a>(&'a self, c: usize, scratch: &'a mut Vec<f64>) -> &'a [f64] {
        match &self.columns {
            Some(cols) => &cols[c * self.target_dim..(c + 1) * self.target_dim],
            None => {
                scratch.clear();
                gaussian_column_into(self.seed, self.target_dim, c, scratch);
                scratch
            }
        }
    }
}

/// Column c of the Gaussian matrix: ChaCha8 keyed by the seed on stream c,
/// Box-Muller over (0,1] x [0,1) pairs. Frozen; replay depends on it.
fn gaussian_column_into(seed: u64, target_dim: usize, c: usize, out: &mut Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(c as u64);
    let mut produced = 0;
    while produced < target_dim {
        let u1 = ((rand::RngCore::next_u64(&mut rng) >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = (rand::RngCore::next_u64(&mut rng) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let (z0, z1) = box_muller(u1, u2);
        out.push(z0);
        produced += 1;
        if produced < target_dim {
            out.push(z1);
            produced += 1;
        }
    }
}

/// Target dimension from the inner-product preservation bound:
/// ceil(12 ln n / (eps^2 - eps^3)).
pub fn dim_for(n: usize, eps: f64) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 points, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {eps}")));
    }
    let value = 12.0 * (n as f64).ln() / (eps * eps - eps * eps * eps);
    Ok(ceil_snapped(value) as usize)
}

/// Ceiling with a tolerance snap so values that are integers in exact
/// arithmetic do not get bumped by floating-point wobble.
pub(crate) fn ceil_snapped(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// Result of an exhaustive pairwise preservation check.
#[derive(Clone, Debug)]
pub struct PreservationReport {
    /// max over i != j of |p_i^T p_j - f(p_i)^T f(p_j)|
    pub max_cross_error: f64,
    /// max over i of |f(p_i)^T f(p_i) - p_i^T p_i|
    pub max_norm_error: f64,
    pub pairs_checked: usize,
    pub passed: bool,
}

/// Exhaustively compares all inner products of `points` against those of
/// `projected`. Points must have norm at most 1 (up to 1e-9 slack).
pub fn verify_pairwise(points: &[Vector], projected: &[Vector], eps: f64) -> Result<PreservationReport> {
    if points.is_empty() {
        return Err(Error::EmptyInput("points"));
    }
    if points.len() != projected.len() {
        return Err(Error::DimMismatch { expected: points.len(), got: projected.len() });
    }
    for (i, p) in points.iter().enumerate() {
        let ns = p.norm_sq();
        if ns > 1.0 + 1e-9 {
            return Err(Error::NormBound { index: i, norm_sq: ns });
        }
    }
    let n = points.len();
    let mut max_cross: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for i in 0..n {
        let ni = dot(projected[i].as_slice(), projected[i].as_slice());
        max_norm = max_norm.max((ni - points[i].norm_sq()).abs());
        for j in (i + 1)..n {
            let orig = dot(points[i].as_slice(), points[j].as_slice());
            let proj = dot(projected[i].as_slice(), projected[j].as_slice());
            max_cross = max_cross.max((orig - proj).abs());
        }
    }
    Ok(PreservationReport {
        max_cross_error: max_cross,
        max_norm_error: max_norm,
        pairs_checked: n * (n - 1) / 2 + n,
        passed: max_cross <= eps && max_norm <= eps,
    })
}
