//! Bridge matrices, the dimension-keeping semi-tensor product, the extended
//! matrix ring with its artificial identity, analytic functions of non-square
//! matrices, the DK-norm, and the generalized Cayley-Hamilton residual.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{OrkitError, Result};
use crate::rat::RatMat;
use crate::xspace::{self, DimVector};

/// Relative truncation threshold for Taylor series of matrix functions.
pub const EPS_SERIES: f64 = 1e-14;
/// Term cap for the same series.
pub const N_MAX: usize = 200;

/// Weight rule: dimension k -> weight vector in R^k (Def. of a weight set).
#[derive(Clone)]
pub enum WeightRule {
    /// All-ones weights.
    Ones,
    /// Averaging weights (1/k) * 1_k.
    Mean,
    Custom(Arc<dyn Fn(usize) -> Vec<f64> + Send + Sync>),
}

impl WeightRule {
    pub fn vector(&self, k: usize) -> Result<Vec<f64>> {
        let v = match self {
            WeightRule::Ones => vec![1.0; k],
            WeightRule::Mean => vec![1.0 / k as f64; k],
            WeightRule::Custom(f) => f(k),
        };
        if v.len() != k {
            return Err(OrkitError::InvalidWeight(format!(
                "generator returned length {} for dimension {k}",
                v.len()
            )));
        }
        if k == 1 && (v[0] - 1.0).abs() > 1e-12 {
            return Err(OrkitError::InvalidWeight("weight for k=1 must be 1".into()));
        }
        if v.iter().any(|&x| x < 0.0) || v.iter().all(|&x| x == 0.0) {
            return Err(OrkitError::InvalidWeight(
                "weights must be nonnegative and nonzero".into(),
            ));
        }
        Ok(v)
    }
}

impl std::fmt::Debug for WeightRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightRule::Ones => write!(f, "Ones"),
            WeightRule::Mean => write!(f, "Mean"),
            WeightRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A rule producing the bridge matrix Psi_{n x p} for any requested (n, p).
#[derive(Clone, Debug)]
pub enum Bridge {
    /// Psi = (I_n ⊗ 1^T)(I_p ⊗ 1), the unweighted bridge.
    Default,
    /// Psi_{n x p} = Pi^p_n, the cross-dimensional projection.
    Projecting,
    Weighted { xi: WeightRule, eta: WeightRule },
    /// Psi_{n x p} = H^+ for the single shape matching H (p x n).
    PseudoInverse { h_pinv: DMatrix<f64> },
    Custom { table: HashMap<(usize, usize), DMatrix<f64>> },
}

impl Default for Bridge {
    /// Assumption 1: the projecting bridge is the library default.
    fn default() -> Self {
        Bridge::Projecting
    }
}

fn rank_f64(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-9 * smax.max(1.0);
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

impl Bridge {
    /// Build a custom bridge, validating rank and square-identity conditions.
    pub fn custom(table: HashMap<(usize, usize), DMatrix<f64>>) -> Result<Bridge> {
        for (&(n, p), m) in &table {
            if m.nrows() != n || m.ncols() != p {
                return Err(OrkitError::InvalidBridge {
                    n,
                    p,
                    reason: format!("stored matrix is {}x{}", m.nrows(), m.ncols()),
                });
            }
            if rank_f64(m) != n.min(p) {
                return Err(OrkitError::InvalidBridge {
                    n,
                    p,
                    reason: "rank below min(n, p)".into(),
                });
            }
            if n == p {
                let id = DMatrix::<f64>::identity(n, n);
                if (m - id).abs().max() > 1e-12 {
                    return Err(OrkitError::InvalidBridge {
                        n,
                        p,
                        reason: "square bridge must be the identity".into(),
                    });
                }
            }
        }
        Ok(Bridge::Custom { table })
    }

    pub fn pseudo_inverse_of(h: &DMatrix<f64>) -> Bridge {
        Bridge::PseudoInverse {
            h_pinv: h
                .clone()
                .svd(true, true)
                .pseudo_inverse(1e-12)
                .expect("svd pseudo-inverse"),
        }
    }

    /// The bridge matrix Psi_{n x p}.
    pub fn matrix(&self, n: usize, p: usize) -> Result<DMatrix<f64>> {
        if n == p {
            return Ok(DMatrix::identity(n, n));
        }
        match self {
            Bridge::Default => {
                let t = xspace::checked_lcm(n, p)?;
                Ok(block_overlap_matrix(n, p, t, 1.0))
            }
            Bridge::Projecting => xspace::projection_matrix(p, n),
            Bridge::Weighted { xi, eta } => {
                let t = xspace::checked_lcm(n, p)?;
                let xv = xi.vector(t / n)?;
                let ev = eta.vector(t / p)?;
                // (I_n ⊗ xi^T)(I_p ⊗ eta): entry (i,j) sums xi_a * eta_b over
                // the overlap of block i (length t/n) and block j (length t/p)
                let kn = t / n;
                let kp = t / p;
                let mut out = DMatrix::zeros(n, p);
                for i in 0..n {
                    for j in 0..p {
                        let lo = (i * kn).max(j * kp);
                        let hi = ((i + 1) * kn).min((j + 1) * kp);
                        let mut s = 0.0;
                        for r in lo..hi {
                            s += xv[r - i * kn] * ev[r - j * kp];
                        }
                        out[(i, j)] = s;
                    }
                }
                Ok(out)
            }
            Bridge::PseudoInverse { h_pinv } => {
                if h_pinv.nrows() == n && h_pinv.ncols() == p {
                    Ok(h_pinv.clone())
                } else {
                    Err(OrkitError::ShapeMismatch {
                        expected: format!("{}x{}", h_pinv.nrows(), h_pinv.ncols()),
                        got: format!("{n}x{p}"),
                    })
                }
            }
            Bridge::Custom { table } => table
                .get(&(n, p))
                .cloned()
                .ok_or(OrkitError::MissingBridge(n, p)),
        }
    }

    /// Exact rational bridge matrix, available for the default and projecting
    /// kinds whose entries are rational by construction.
    pub fn matrix_rat(&self, n: usize, p: usize) -> Result<RatMat> {
        if n == p {
            return Ok(RatMat::identity(n));
        }
        match self {
            Bridge::Default => {
                let t = xspace::checked_lcm(n, p)?;
                let pi = xspace::projection_matrix_rat(p, n)?;
                // unweighted bridge = (t/n) * Pi^p_n
                Ok(pi.scale(&crate::rat::rat((t / n) as i64)))
            }
            Bridge::Projecting => xspace::projection_matrix_rat(p, n),
            _ => Err(OrkitError::Input(
                "exact bridge matrix only available for default/projecting kinds".into(),
            )),
        }
    }
}

/// Overlap form of (I_n ⊗ 1^T_{t/n})(I_p ⊗ 1_{t/p}) scaled by `scale`.
fn block_overlap_matrix(n: usize, p: usize, t: usize, scale: f64) -> DMatrix<f64> {
    let kn = t / n;
    let kp = t / p;
    DMatrix::from_fn(n, p, |i, j| {
        let lo = (i * kn).max(j * kp);
        let hi = ((i + 1) * kn).min((j + 1) * kp);
        if hi > lo {
            scale * (hi - lo) as f64
        } else {
            0.0
        }
    })
}

/// The DK-STP: A ⋉ B = A Psi_{n x p} B, outer dimensions m x q kept.
pub fn dk_mul(a: &DMatrix<f64>, b: &DMatrix<f64>, bridge: &Bridge) -> Result<DMatrix<f64>> {
    let psi = bridge.matrix(a.ncols(), b.nrows())?;
    Ok(a * psi * b)
}

/// Action of an m x n matrix on a dim-vector: A Psi_{n x dim} x.
pub fn dk_action(a: &DMatrix<f64>, x: &DimVector, bridge: &Bridge) -> Result<DimVector> {
    let psi = bridge.matrix(a.ncols(), x.dim())?;
    Ok(DimVector::from_dvector(a * psi * x.as_dvector()))
}

/// Pi_A = A Psi_{n x m}, the unique matrix with A ⋉ x = Pi_A x on R^m.
pub fn pi_a(a: &DMatrix<f64>, bridge: &Bridge) -> Result<DMatrix<f64>> {
    let psi = bridge.matrix(a.ncols(), a.nrows())?;
    Ok(a * psi)
}

/// DK Lie bracket [A, B] = A ⋉ B - B ⋉ A for same-shape A, B.
pub fn lie_bracket_dk(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    bridge: &Bridge,
) -> Result<DMatrix<f64>> {
    if a.shape() != b.shape() {
        return Err(OrkitError::ShapeMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            got: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(dk_mul(a, b, bridge)? - dk_mul(b, a, bridge)?)
}

/// Element r * I_{m x n} + A of the extended ring.  The identity I_{m x n}
/// has no matrix expression, so powers and analytic functions return this
/// sum type even when the result happens to be a pure matrix (r = 0).
#[derive(Clone, Debug)]
pub struct ExtElem {
    pub r: f64,
    pub a: DMatrix<f64>,
}

impl ExtElem {
    pub fn from_matrix(a: DMatrix<f64>) -> Self {
        ExtElem { r: 0.0, a }
    }

    pub fn identity(m: usize, n: usize) -> Self {
        ExtElem {
            r: 1.0,
            a: DMatrix::zeros(m, n),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    pub fn is_pure_matrix(&self) -> bool {
        self.r == 0.0
    }
}

fn check_shape(a: &ExtElem, b: &ExtElem) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(OrkitError::ShapeMismatch {
            expected: format!("{}x{}", a.shape().0, a.shape().1),
            got: format!("{}x{}", b.shape().0, b.shape().1),
        });
    }
    Ok(())
}

pub fn ext_add(a: &ExtElem, b: &ExtElem) -> Result<ExtElem> {
    check_shape(a, b)?;
    Ok(ExtElem {
        r: a.r + b.r,
        a: &a.a + &b.a,
    })
}

/// (r1 I + A) ⋉ (r2 I + B) = (r1 r2) I + (r1 B + r2 A + A ⋉ B).
pub fn ext_mul(a: &ExtElem, b: &ExtElem, bridge: &Bridge) -> Result<ExtElem> {
    check_shape(a, b)?;
    let ab = dk_mul(&a.a, &b.a, bridge)?;
    Ok(ExtElem {
        r: a.r * b.r,
        a: a.r * &b.a + b.r * &a.a + ab,
    })
}

pub fn ext_scale(a: &ExtElem, s: f64) -> ExtElem {
    ExtElem {
        r: a.r * s,
        a: s * &a.a,
    }
}

/// Action of an extended element on a dim-vector:
/// (r I_{m x n} + A) ⋉ x = r Psi_{m x dim} x + A Psi_{n x dim} x.
pub fn ext_action(e: &ExtElem, x: &DimVector, bridge: &Bridge) -> Result<DimVector> {
    let (m, _n) = e.shape();
    let mut out = dk_action(&e.a, x, bridge)?.as_dvector().clone();
    if e.r != 0.0 {
        let psi = bridge.matrix(m, x.dim())?;
        out += e.r * psi * x.as_dvector();
    }
    Ok(DimVector::from_dvector(out))
}

/// A^<k>: identity for k = 0, A (Psi_{n x m} A)^{k-1} for k >= 1.
pub fn dk_power(a: &DMatrix<f64>, k: usize, bridge: &Bridge) -> Result<ExtElem> {
    let (m, n) = a.shape();
    if k == 0 {
        return Ok(ExtElem::identity(m, n));
    }
    let psi = bridge.matrix(n, m)?;
    let psi_a = &psi * a;
    let mut acc = a.clone();
    for _ in 1..k {
        acc *= &psi_a;
    }
    Ok(ExtElem::from_matrix(acc))
}

/// Analytic function kinds supported by `dk_analytic`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnalyticFn {
    Exp,
    Sin,
    Cos,
    /// ln<I + A>
    Ln1p,
    /// (I + A)^<alpha>
    Pow(f64),
    Cosh,
    Sinh,
}

impl AnalyticFn {
    /// Coefficient of A^<k> in the Taylor series.
    fn coeff(&self, k: usize) -> f64 {
        match self {
            AnalyticFn::Exp => 1.0 / factorial(k),
            AnalyticFn::Cos => {
                if k % 2 == 0 {
                    let s = if k % 4 == 0 { 1.0 } else { -1.0 };
                    s / factorial(k)
                } else {
                    0.0
                }
            }
            AnalyticFn::Sin => {
                if k % 2 == 1 {
                    let s = if k % 4 == 1 { 1.0 } else { -1.0 };
                    s / factorial(k)
                } else {
                    0.0
                }
            }
            AnalyticFn::Cosh => {
                if k % 2 == 0 {
                    1.0 / factorial(k)
                } else {
                    0.0
                }
            }
            AnalyticFn::Sinh => {
                if k % 2 == 1 {
                    1.0 / factorial(k)
                } else {
                    0.0
                }
            }
            AnalyticFn::Ln1p => {
                if k == 0 {
                    0.0
                } else {
                    let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                    s / k as f64
                }
            }
            AnalyticFn::Pow(alpha) => {
                // binomial(alpha, k)
                let mut c = 1.0;
                for i in 0..k {
                    c *= (alpha - i as f64) / (i as f64 + 1.0);
                }
                c
            }
        }
    }

    fn needs_contraction(&self) -> bool {
        matches!(self, AnalyticFn::Ln1p | AnalyticFn::Pow(_))
    }

    fn name(&self) -> &'static str {
        match self {
            AnalyticFn::Exp => "exp",
            AnalyticFn::Sin => "sin",
            AnalyticFn::Cos => "cos",
            AnalyticFn::Ln1p => "ln1p",
            AnalyticFn::Pow(_) => "pow",
            AnalyticFn::Cosh => "cosh",
            AnalyticFn::Sinh => "sinh",
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Truncated Taylor series of an analytic function of a non-square matrix.
/// Terms A^<k> (k >= 1) are accumulated as A (Psi A)^{k-1}; the k = 0 term
/// contributes to the identity coefficient.
pub fn dk_analytic(f: AnalyticFn, a: &DMatrix<f64>, bridge: &Bridge) -> Result<ExtElem> {
    let (m, n) = a.shape();
    if f.needs_contraction() {
        let norm = dk_norm(a, bridge)?;
        if norm >= 1.0 {
            return Err(OrkitError::SeriesDivergent {
                func: f.name().into(),
                norm,
            });
        }
    }
    let psi = bridge.matrix(n, m)?;
    let psi_a = &psi * a;
    let mut acc = DMatrix::<f64>::zeros(m, n);
    let r = f.coeff(0);
    // term_k = A (Psi A)^{k-1} tracked incrementally via (Psi A)^{k-1}
    let mut pw = DMatrix::<f64>::identity(n, n);
    let mut acc_norm = r.abs();
    let mut converged = false;
    for k in 1..=N_MAX {
        let term = a * &pw;
        let c = f.coeff(k);
        if c != 0.0 {
            acc += c * &term;
        }
        // coefficient magnitudes are nonincreasing for every supported
        // series, so nearby coefficients bound the skipped (zero) slots
        let cmax = (k..k + 3).map(|j| f.coeff(j).abs()).fold(0.0, f64::max);
        let term_norm = cmax * term.norm();
        acc_norm = acc_norm.max(acc.norm()).max(1e-300);
        // bound the next term cheaply by the current one times the factor norm
        if term_norm < EPS_SERIES * acc_norm.max(1.0) && k > 2 {
            converged = true;
            break;
        }
        pw = &pw * &psi_a;
    }
    if !converged {
        // entire functions at the tested scales always converge well before
        // N_MAX; anything else is reported
        let last = (a * &pw).norm();
        if last > EPS_SERIES * acc_norm.max(1.0) {
            return Err(OrkitError::SeriesNotConverged(N_MAX));
        }
    }
    Ok(ExtElem { r, a: acc })
}

/// DK-norm: sqrt of the largest eigenvalue of Psi^T A^T A Psi, Psi = Psi_{n x m}.
pub fn dk_norm(a: &DMatrix<f64>, bridge: &Bridge) -> Result<f64> {
    let (m, n) = a.shape();
    if a.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let psi = bridge.matrix(n, m)?;
    let g = psi.transpose() * a.transpose() * a * &psi;
    // symmetrize against roundoff before the eigen decomposition
    let g = 0.5 * (&g + g.transpose());
    let eig = g.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt())
}

/// Characteristic polynomial coefficients of a square matrix via the
/// Faddeev-LeVerrier recurrence: returns [c_0, ..., c_{m-1}] with
/// p(x) = x^m + c_{m-1} x^{m-1} + ... + c_0.
pub fn char_poly_coeffs(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut coeffs = vec![0.0; n];
    let mut mk = DMatrix::<f64>::identity(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        // previous step stored c_{n-k+1}; the k = 1 step starts from c_n = 1
        if k >= 2 {
            mk += coeffs[n - k + 1] * &id;
        }
        mk = m * mk;
        coeffs[n - k] = -mk.trace() / k as f64;
    }
    coeffs
}

/// Exact rational characteristic polynomial via Faddeev-LeVerrier.
pub fn char_poly_coeffs_rat(m: &RatMat) -> Vec<crate::rat::Rat> {
    use crate::rat::{rat, Rat};
    let n = m.nrows();
    assert!(m.is_square());
    let mut coeffs = vec![Rat::from_integer(0.into()); n];
    let mut mk = RatMat::identity(n);
    for k in 1..=n {
        if k >= 2 {
            let add = RatMat::identity(n).scale(&coeffs[n - k + 1]);
            mk = mk.add(&add);
        }
        mk = m.mul(&mk);
        let mut tr = Rat::from_integer(0.into());
        for i in 0..n {
            tr += mk[(i, i)].clone();
        }
        coeffs[n - k] = -tr / rat(k as i64);
    }
    coeffs
}

/// Frobenius norm of A^<m+1> + c_{m-1} A^<m> + ... + c_0 A, with c the
/// characteristic coefficients of Pi_A.  Zero for every matrix by the
/// generalized Cayley-Hamilton theorem.
pub fn cayley_hamilton_residual(a: &DMatrix<f64>, bridge: &Bridge) -> Result<f64> {
    let m = a.nrows();
    let pia = pi_a(a, bridge)?;
    let coeffs = char_poly_coeffs(&pia);
    // residual = sum_{k=0}^{m} c_k A^<k+1> with c_m = 1
    let mut acc = dk_power(a, m + 1, bridge)?.a;
    for (k, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            acc += c * dk_power(a, k + 1, bridge)?.a;
        }
    }
    Ok(acc.norm())
}

/// Transposed variant: when n < m the characteristic function of Pi_{A^T}
/// (n x n) gives a lower-degree annihilating identity for A^T.
pub fn cayley_hamilton_residual_transposed(a: &DMatrix<f64>, bridge: &Bridge) -> Result<f64> {
    cayley_hamilton_residual(&a.transpose(), bridge)
}
