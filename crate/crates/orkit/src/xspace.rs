//! The mixed-dimensional Euclidean space: semi-tensor addition, the
//! normalized inner product, and cross-dimensional projection.

use nalgebra::{DMatrix, DVector};
use num::integer::Integer;

use crate::error::{OrkitError, Result};
use crate::rat::{rat, Rat, RatMat};

/// Absolute tolerance for floating comparisons throughout the toolkit.
pub const EPS_NUM: f64 = 1e-9;

/// A real vector carrying its dimension, an element of the union of all R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct DimVector {
    entries: DVector<f64>,
}

impl DimVector {
    pub fn new(entries: Vec<f64>) -> Self {
        assert!(!entries.is_empty(), "DimVector must have dim >= 1");
        DimVector {
            entries: DVector::from_vec(entries),
        }
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        assert!(v.len() >= 1);
        DimVector { entries: v }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_dvector(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.entries
    }

    pub fn entries(&self) -> &[f64] {
        self.entries.as_slice()
    }

    /// Kronecker blow-up x ⊗ 1_k.
    pub fn blow_up(&self, k: usize) -> DimVector {
        let mut out = Vec::with_capacity(self.dim() * k);
        for &v in self.entries.iter() {
            out.extend(std::iter::repeat(v).take(k));
        }
        DimVector::new(out)
    }

    pub fn scale(&self, s: f64) -> DimVector {
        DimVector::from_dvector(&self.entries * s)
    }
}

pub fn checked_lcm(a: usize, b: usize) -> Result<usize> {
    let g = a.gcd(&b);
    (a / g)
        .checked_mul(b)
        .ok_or(OrkitError::DimensionOverflow(a, b))
}

/// Semi-tensor addition: blow both vectors up to the lcm dimension and add.
pub fn stp_add(x: &DimVector, y: &DimVector) -> Result<DimVector> {
    let t = checked_lcm(x.dim(), y.dim())?;
    let xb = x.blow_up(t / x.dim());
    let yb = y.blow_up(t / y.dim());
    Ok(DimVector::from_dvector(xb.entries + yb.entries))
}

pub fn stp_sub(x: &DimVector, y: &DimVector) -> Result<DimVector> {
    stp_add(x, &y.scale(-1.0))
}

/// Normalized inner product: (1/t) <x⊗1, y⊗1> with t the lcm dimension.
pub fn inner(x: &DimVector, y: &DimVector) -> Result<f64> {
    let t = checked_lcm(x.dim(), y.dim())?;
    let xb = x.blow_up(t / x.dim());
    let yb = y.blow_up(t / y.dim());
    Ok(xb.entries.dot(&yb.entries) / t as f64)
}

pub fn norm(x: &DimVector) -> f64 {
    inner(x, x).map(|v| v.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

pub fn distance(x: &DimVector, y: &DimVector) -> Result<f64> {
    Ok(norm(&stp_sub(x, y)?))
}

/// Metric equivalence: distance zero up to the absolute tolerance.
pub fn equivalent(x: &DimVector, y: &DimVector) -> Result<bool> {
    Ok(distance(x, y)? <= EPS_NUM)
}

/// The cross-dimensional projection matrix from R^m to R^n, exact.
/// Pi^m_n = (n/t) (I_n ⊗ 1^T_{t/n}) (I_m ⊗ 1_{t/m}), t = lcm(m, n).
pub fn projection_matrix_rat(m: usize, n: usize) -> Result<RatMat> {
    assert!(m >= 1 && n >= 1);
    let t = checked_lcm(m, n)?;
    let kn = t / n; // block length per target coordinate
    let km = t / m; // repetition per source coordinate
    let scale = Rat::new(num::BigInt::from(n), num::BigInt::from(t));
    // Entry (i, j) counts overlaps of target block i with source block j on
    // the common refinement of length t.
    let mut out = RatMat::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let lo = (i * kn).max(j * km);
            let hi = ((i + 1) * kn).min((j + 1) * km);
            if hi > lo {
                out[(i, j)] = &scale * rat((hi - lo) as i64);
            }
        }
    }
    Ok(out)
}

/// Floating-point projection matrix Pi^m_n.
pub fn projection_matrix(m: usize, n: usize) -> Result<DMatrix<f64>> {
    Ok(projection_matrix_rat(m, n)?.to_f64())
}

/// Project a vector into R^n.
pub fn project(xi: &DimVector, n: usize) -> Result<DimVector> {
    if xi.dim() == n {
        return Ok(xi.clone());
    }
    let p = projection_matrix(xi.dim(), n)?;
    Ok(DimVector::from_dvector(&p * xi.as_dvector()))
}

/// The zero-based identity check used by bridge validation.
pub fn is_identity_rat(m: &RatMat) -> bool {
    m.is_square() && *m == RatMat::identity(m.nrows())
}
