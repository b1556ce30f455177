//! Exact rational matrices. Rank decisions everywhere in the toolkit are made
//! here, so all elimination is done over `BigRational` with no rounding.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{OrkitError, Result};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse either an integer or a `p/q` rational string.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| OrkitError::Input(format!("bad rational numerator: {s}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| OrkitError::Input(format!("bad rational denominator: {s}")))?;
        if d.is_zero() {
            return Err(OrkitError::Input(format!("zero denominator: {s}")));
        }
        Ok(Rat::new(n, d))
    } else {
        let n = BigInt::from_str(s)
            .map_err(|_| OrkitError::Input(format!("bad rational literal: {s}")))?;
        Ok(Rat::from_integer(n))
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via the continued fraction expansion.
pub fn rationalize(x: f64, max_den: u64) -> Rat {
    if x == 0.0 {
        return Rat::zero();
    }
    let neg = x < 0.0;
    let mut x = x.abs();
    // convergents p/q
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let bound = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > bound {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let r = Rat::new(p1, q1);
    if neg {
        -r
    } else {
        r
    }
}

/// Dense matrix over the rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        RatMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rat(v)).collect())
                .collect(),
        )
    }

    pub fn row_vector(entries: Vec<Rat>) -> Self {
        let c = entries.len();
        RatMat {
            rows: 1,
            cols: c,
            data: entries,
        }
    }

    pub fn col_vector(entries: Vec<Rat>) -> Self {
        let r = entries.len();
        RatMat {
            rows: r,
            cols: 1,
            data: entries,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Rat> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> RatMat {
        RatMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &Rat) -> RatMat {
        RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> RatMat {
        self.scale(&-Rat::one())
    }

    pub fn add(&self, other: &RatMat) -> RatMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &RatMat) -> RatMat {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let t = a * b;
                        out[(i, j)] += t;
                    }
                }
            }
        }
        out
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &RatMat) -> RatMat {
        if self.rows == 0 {
            return other.clone();
        }
        if other.rows == 0 {
            return self.clone();
        }
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &RatMat) -> RatMat {
        if self.cols == 0 {
            return other.clone();
        }
        if other.cols == 0 {
            return self.clone();
        }
        assert_eq!(self.rows, other.rows);
        let mut out = RatMat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> RatMat {
        RatMat::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn select_cols(&self, cols: &[usize]) -> RatMat {
        RatMat::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> RatMat {
        RatMat::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)].clone())
    }

    /// Reduced row-echelon form with normalized pivots; returns pivot columns.
    pub fn rref(&self) -> (RatMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            // find a pivot in column c at or below row r
            let mut piv = None;
            for i in r..m.rows {
                if !m[(i, c)].is_zero() {
                    piv = Some(i);
                    break;
                }
            }
            let Some(p) = piv else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(i, j)] - &factor * &m[(r, j)];
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of the null space {x | Ax = 0}, columns of the result.
    pub fn kernel(&self) -> RatMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = RatMat::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out[(fc, k)] = Rat::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = -r[(pr, fc)].clone();
            }
        }
        out
    }

    /// Solve A X = B exactly. Returns None when inconsistent. Free variables
    /// are set to zero.
    pub fn solve(&self, b: &RatMat) -> Option<RatMat> {
        assert_eq!(self.rows, b.rows);
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        // inconsistent if any pivot lands in the B block
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = RatMat::zeros(self.cols, b.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(pc, j)] = r[(pr, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<RatMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let x = self.solve(&RatMat::identity(n))?;
        if self.mul(&x) == RatMat::identity(n) {
            Some(x)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn from_f64(m: &DMatrix<f64>, max_den: u64) -> RatMat {
        RatMat::from_fn(m.nrows(), m.ncols(), |i, j| rationalize(m[(i, j)], max_den))
    }

    /// Max absolute entry as f64, for residual reporting.
    pub fn max_abs_f64(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_rank() {
        let m = RatMat::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let (r, pivots) = m.rref();
        assert_eq!(pivots, vec![0, 1]);
        assert_eq!(r.row(2), vec![rat(0), rat(0), rat(0)]);
    }

    #[test]
    fn kernel_is_annihilated() {
        let m = RatMat::from_i64(&[&[1, 2, 3], &[0, 1, 1]]);
        let k = m.kernel();
        assert_eq!(k.ncols(), 1);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = RatMat::from_i64(&[&[1, 1], &[0, 1]]);
        let b = RatMat::from_i64(&[&[3], &[2]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);

        let a2 = RatMat::from_i64(&[&[1, 1], &[2, 2]]);
        let b2 = RatMat::from_i64(&[&[1], &[3]]);
        assert!(a2.solve(&b2).is_none());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = RatMat::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), RatMat::identity(2));
        let s = RatMat::from_i64(&[&[1, 2], &[2, 4]]);
        assert!(s.inverse().is_none());
    }

    #[test]
    fn rationalize_small_fractions() {
        assert_eq!(rationalize(0.4, 1_000_000), rat_frac(2, 5));
        assert_eq!(rationalize(-1.5, 1_000_000), rat_frac(-3, 2));
        assert_eq!(rationalize(0.0, 1_000_000), rat(0));
        assert_eq!(rationalize(7.0, 1_000_000), rat(7));
    }

    #[test]
    fn parse_rat_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat_frac(3, 4));
        assert_eq!(parse_rat("-5").unwrap(), rat(-5));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }
}
