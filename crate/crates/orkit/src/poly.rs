//! Multivariate polynomials with rational coefficients, the scalar ground
//! type of the nonlinear observer machinery.  Variables are named x1..xn;
//! the textual form is a sum of `coef*x1^a1*...*xn^an` terms.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{OrkitError, Result};
use crate::rat::{parse_rat, Rat};

/// Exponent vectors are keyed in the map; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Poly {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rat) -> Poly {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        assert!(i < nvars);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(e, Rat::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rat)>) -> Poly {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// The polynomial minus its constant term.
    pub fn strip_constant(&self) -> Poly {
        let mut p = self.clone();
        p.terms.remove(&vec![0; self.nvars]);
        p
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    /// Partial derivative with respect to x_{i+1}.
    pub fn diff(&self, i: usize) -> Poly {
        assert!(i < self.nvars);
        let mut p = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            p.add_term(e2, c * Rat::from_integer(e[i].into()));
        }
        p
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        assert_eq!(x.len(), self.nvars);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t *= &x[i];
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (i, &k) in e.iter().enumerate() {
                t *= x[i].powi(k as i32);
            }
            acc += t;
        }
        acc
    }

    /// Parse the textual term-sum form; accepts `x2`, `3*x1^2*x3`, `-1/2`,
    /// and any signed combination of such terms.
    pub fn parse(s: &str, nvars: usize) -> Result<Poly> {
        let s = s.trim();
        if s.is_empty() {
            return Err(OrkitError::PolyParse("empty polynomial".into()));
        }
        let mut p = Poly::zero(nvars);
        // split into signed terms
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut first = true;
        for ch in s.chars() {
            match ch {
                '+' | '-' if !cur.trim().is_empty() || first => {
                    if !cur.trim().is_empty() {
                        terms.push((neg, cur.trim().to_string()));
                    }
                    cur = String::new();
                    neg = ch == '-';
                    first = false;
                }
                _ => {
                    cur.push(ch);
                    first = false;
                }
            }
        }
        if cur.trim().is_empty() {
            return Err(OrkitError::PolyParse(format!("dangling sign in {s:?}")));
        }
        terms.push((neg, cur.trim().to_string()));
        for (neg, term) in terms {
            let (e, c) = Self::parse_term(&term, nvars)?;
            p.add_term(e, if neg { -c } else { c });
        }
        Ok(p)
    }

    fn parse_term(term: &str, nvars: usize) -> Result<(Vec<u32>, Rat)> {
        let mut coef = Rat::one();
        let mut expo = vec![0u32; nvars];
        for factor in term.split('*') {
            let f = factor.trim();
            if f.is_empty() {
                return Err(OrkitError::PolyParse(format!("empty factor in {term:?}")));
            }
            if let Some(rest) = f.strip_prefix('x') {
                let (idx, pow) = match rest.split_once('^') {
                    Some((i, p)) => (i, p),
                    None => (rest, "1"),
                };
                let i: usize = idx
                    .parse()
                    .map_err(|_| OrkitError::PolyParse(format!("bad variable in {f:?}")))?;
                if i == 0 || i > nvars {
                    return Err(OrkitError::PolyParse(format!(
                        "variable x{i} out of range 1..{nvars}"
                    )));
                }
                let k: u32 = pow
                    .parse()
                    .map_err(|_| OrkitError::PolyParse(format!("bad exponent in {f:?}")))?;
                expo[i - 1] += k;
            } else {
                coef *= parse_rat(f)
                    .map_err(|_| OrkitError::PolyParse(format!("bad coefficient {f:?}")))?;
            }
        }
        Ok((expo, coef))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&k| k == 0);
            if !mag.is_one() || is_const {
                factors.push(mag.to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    factors.push(format!("x{}", i + 1));
                } else if k > 1 {
                    factors.push(format!("x{}^{}", i + 1, k));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.nvars, self)
    }
}
