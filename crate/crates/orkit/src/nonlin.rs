//! Polynomial vector fields and observers: Lie calculus, closure of a set of
//! observer functions under the dynamics, the invariant codistribution
//! iteration, and certificate search for exact nonlinear realizations.

use crate::error::{OrkitError, Result};
use crate::poly::Poly;
use crate::rat::{Rat, RatMat};
use num::Zero;

/// Degree cap for closure generators and certificate entries.
pub const D_MAX: u32 = 8;
/// Iteration cap for the fixed-point loops.
pub const K_MAX: usize = 20;

/// A vector field with one polynomial component per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVecField {
    pub components: Vec<Poly>,
}

impl PolyVecField {
    pub fn new(components: Vec<Poly>) -> PolyVecField {
        let n = components.len();
        assert!(components.iter().all(|c| c.nvars() == n));
        PolyVecField { components }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(|c| c.is_constant())
    }
}

/// A covector field (row of polynomials).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCovField {
    pub components: Vec<Poly>,
}

impl PolyCovField {
    pub fn new(components: Vec<Poly>) -> PolyCovField {
        let n = components.len();
        assert!(components.iter().all(|c| c.nvars() == n));
        PolyCovField { components }
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    /// Pairing with a vector field: sum of componentwise products.
    pub fn pair(&self, v: &PolyVecField) -> Poly {
        let n = self.nvars();
        let mut acc = Poly::zero(n);
        for (w, f) in self.components.iter().zip(&v.components) {
            acc = acc.add(&w.mul(f));
        }
        acc
    }

    pub fn scale(&self, s: &Rat) -> PolyCovField {
        PolyCovField::new(self.components.iter().map(|c| c.scale(s)).collect())
    }

    pub fn add(&self, other: &PolyCovField) -> PolyCovField {
        PolyCovField::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }
}

/// Input-affine system x' = f(x) + sum g_i(x) u_i, y_j = h_j(x), with
/// every h_j vanishing at the origin.
#[derive(Clone, Debug)]
pub struct PolyAffineSystem {
    pub f: PolyVecField,
    pub g: Vec<PolyVecField>,
    pub h: Vec<Poly>,
}

impl PolyAffineSystem {
    pub fn new(f: PolyVecField, g: Vec<PolyVecField>, h: Vec<Poly>) -> Result<PolyAffineSystem> {
        let n = f.nvars();
        if g.iter().any(|gi| gi.nvars() != n) || h.iter().any(|hj| hj.nvars() != n) || h.is_empty()
        {
            return Err(OrkitError::ShapeMismatch {
                expected: format!("fields and observers over {n} variables"),
                got: "inconsistent variable counts".into(),
            });
        }
        let origin = vec![Rat::zero(); n];
        for (j, hj) in h.iter().enumerate() {
            if !hj.eval(&origin).is_zero() {
                return Err(OrkitError::Input(format!(
                    "observer {} does not vanish at the origin",
                    j + 1
                )));
            }
        }
        Ok(PolyAffineSystem { f, g, h })
    }

    pub fn nvars(&self) -> usize {
        self.f.nvars()
    }

    /// Drift after the state feedback u_i = alpha_i(x) + v_i.
    pub fn closed_drift(&self, alpha: &[Poly]) -> PolyVecField {
        assert_eq!(alpha.len(), self.g.len());
        let mut comps = self.f.components.clone();
        for (gi, ai) in self.g.iter().zip(alpha) {
            for (c, gc) in comps.iter_mut().zip(&gi.components) {
                *c = c.add(&gc.mul(ai));
            }
        }
        PolyVecField::new(comps)
    }
}

/// L_f h = sum_i (dh/dx_i) f_i.
pub fn lie_derivative(f: &PolyVecField, h: &Poly) -> Poly {
    let n = f.nvars();
    assert_eq!(h.nvars(), n);
    let mut acc = Poly::zero(n);
    for i in 0..n {
        acc = acc.add(&h.diff(i).mul(&f.components[i]));
    }
    acc
}

/// dh = (dh/dx_1, ..., dh/dx_n).
pub fn differential(h: &Poly) -> PolyCovField {
    PolyCovField::new((0..h.nvars()).map(|i| h.diff(i)).collect())
}

/// Lie derivative of a covector field:
/// (L_f w)_j = sum_i f_i dw_j/dx_i + sum_i w_i df_i/dx_j.
pub fn lie_derivative_cov(f: &PolyVecField, w: &PolyCovField) -> PolyCovField {
    let n = f.nvars();
    assert_eq!(w.nvars(), n);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Poly::zero(n);
        for i in 0..n {
            acc = acc.add(&f.components[i].mul(&w.components[j].diff(i)));
            acc = acc.add(&w.components[i].mul(&f.components[i].diff(j)));
        }
        out.push(acc);
    }
    PolyCovField::new(out)
}

/// [f, g]_j = sum_i (f_i dg_j/dx_i - g_i df_j/dx_i).
pub fn lie_bracket(f: &PolyVecField, g: &PolyVecField) -> PolyVecField {
    let n = f.nvars();
    assert_eq!(g.nvars(), n);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Poly::zero(n);
        for i in 0..n {
            acc = acc.add(&f.components[i].mul(&g.components[j].diff(i)));
            acc = acc.sub(&g.components[i].mul(&f.components[j].diff(i)));
        }
        out.push(acc);
    }
    PolyVecField::new(out)
}

/// The observer derivative over the full state:
/// y_j' = drift_j(x) + sum_i input[j][i](x) u_i.
#[derive(Clone, Debug)]
pub struct SoNl {
    pub drift: Vec<Poly>,
    pub input: Vec<Vec<Poly>>,
}

pub fn so_system_nl(sys: &PolyAffineSystem) -> SoNl {
    let drift = sys.h.iter().map(|hj| lie_derivative(&sys.f, hj)).collect();
    let input = sys
        .h
        .iter()
        .map(|hj| sys.g.iter().map(|gi| lie_derivative(gi, hj)).collect())
        .collect();
    SoNl { drift, input }
}

/// Approximate closure of the observer derivative over R^p: the state is
/// guessed from the observers through the cross-dimensional projection.
#[derive(Clone, Debug)]
pub struct OrApproxNl {
    pub so: SoNl,
    /// n x p projection used as the state guess x = proj * y.
    pub proj: nalgebra::DMatrix<f64>,
}

pub fn or_approx_nl(sys: &PolyAffineSystem) -> Result<OrApproxNl> {
    let p = sys.h.len();
    let n = sys.nvars();
    Ok(OrApproxNl {
        so: so_system_nl(sys),
        proj: crate::xspace::projection_matrix(p, n)?,
    })
}

impl OrApproxNl {
    pub fn rhs(&self, y: &nalgebra::DVector<f64>, u: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        let x = &self.proj * y;
        let xs: Vec<f64> = x.iter().cloned().collect();
        nalgebra::DVector::from_fn(self.so.drift.len(), |j, _| {
            let mut v = self.so.drift[j].eval_f64(&xs);
            for (i, gij) in self.so.input[j].iter().enumerate() {
                v += gij.eval_f64(&xs) * u[i];
            }
            v
        })
    }
}

/// Union monomial basis of a set of polynomials and their coefficient rows.
fn coeff_rows(polys: &[Poly]) -> (Vec<Vec<u32>>, RatMat) {
    let mut basis: Vec<Vec<u32>> = Vec::new();
    for p in polys {
        for (e, _) in p.terms() {
            if !basis.contains(e) {
                basis.push(e.clone());
            }
        }
    }
    basis.sort();
    let mut m = RatMat::zeros(polys.len(), basis.len().max(1));
    for (r, p) in polys.iter().enumerate() {
        for (e, c) in p.terms() {
            let j = basis.iter().position(|b| b == e).unwrap();
            m[(r, j)] = c.clone();
        }
    }
    (basis, m)
}

/// Real-linear span membership for polynomials.
fn in_poly_span(gens: &[Poly], cand: &Poly) -> bool {
    if cand.is_zero() {
        return true;
    }
    let mut all: Vec<Poly> = gens.to_vec();
    all.push(cand.clone());
    let (_, m) = coeff_rows(&all);
    let gens_rank = m.submatrix(0, 0, gens.len(), m.ncols()).rank();
    m.rank() == gens_rank
}

/// Flatten covector fields into coefficient rows over (component, monomial).
fn cov_coeff_rows(covs: &[PolyCovField]) -> RatMat {
    if covs.is_empty() {
        return RatMat::zeros(0, 1);
    }
    let mut basis: Vec<(usize, Vec<u32>)> = Vec::new();
    for w in covs {
        for (j, c) in w.components.iter().enumerate() {
            for (e, _) in c.terms() {
                let key = (j, e.clone());
                if !basis.contains(&key) {
                    basis.push(key);
                }
            }
        }
    }
    basis.sort();
    let mut m = RatMat::zeros(covs.len(), basis.len().max(1));
    for (r, w) in covs.iter().enumerate() {
        for (j, c) in w.components.iter().enumerate() {
            for (e, v) in c.terms() {
                let col = basis
                    .iter()
                    .position(|(bj, be)| *bj == j && be == e)
                    .unwrap();
                m[(r, col)] = v.clone();
            }
        }
    }
    m
}

fn cov_span_dim(covs: &[PolyCovField]) -> usize {
    cov_coeff_rows(covs).rank()
}

/// Real-linear span equality for covector fields.
pub fn cov_spans_equal(a: &[PolyCovField], b: &[PolyCovField]) -> bool {
    let mut both = a.to_vec();
    both.extend(b.iter().cloned());
    let d = cov_span_dim(&both);
    d == cov_span_dim(a) && d == cov_span_dim(b)
}

fn in_cov_span(gens: &[PolyCovField], cand: &PolyCovField) -> bool {
    if cand.is_zero() {
        return true;
    }
    let mut all = gens.to_vec();
    all.push(cand.clone());
    cov_span_dim(&all) == cov_span_dim(gens)
}

/// Closure of the observer functions under the (optionally feedback-closed)
/// dynamics: iteratively append every Lie derivative along the drift and the
/// input fields that leaves the real-linear span, working modulo constants.
/// Generation order keeps the original observers in the leading slots.
pub fn closure_fg(sys: &PolyAffineSystem, alpha: Option<&[Poly]>) -> Result<Vec<Poly>> {
    let drift = match alpha {
        Some(a) => sys.closed_drift(a),
        None => sys.f.clone(),
    };
    let mut gens: Vec<Poly> = Vec::new();
    let mut queue: Vec<Poly> = sys.h.iter().map(|h| h.strip_constant()).collect();
    let mut rounds = 0usize;
    let mut qi = 0;
    while qi < queue.len() {
        if rounds > K_MAX * queue.len().max(1) {
            return Err(OrkitError::BoundExceeded(K_MAX));
        }
        rounds += 1;
        let cand = queue[qi].clone();
        qi += 1;
        if in_poly_span(&gens, &cand) {
            continue;
        }
        if cand.degree() > D_MAX {
            return Err(OrkitError::DegreeOverflow(D_MAX as usize));
        }
        gens.push(cand.clone());
        queue.push(lie_derivative(&drift, &cand).strip_constant());
        for gi in &sys.g {
            queue.push(lie_derivative(gi, &cand).strip_constant());
        }
    }
    Ok(gens)
}

/// Constant covectors annihilating every (constant) input field.
pub fn g_perp(g: &[PolyVecField]) -> Result<Vec<PolyCovField>> {
    if g.is_empty() {
        return Err(OrkitError::Input("no input fields".into()));
    }
    let n = g[0].nvars();
    if !g.iter().all(|gi| gi.is_constant()) {
        return Err(OrkitError::Input(
            "constant-covector perp requires constant input fields".into(),
        ));
    }
    let rows = RatMat::from_rows(
        g.iter()
            .map(|gi| {
                gi.components
                    .iter()
                    .map(|c| c.constant_term())
                    .collect::<Vec<_>>()
            })
            .collect(),
    );
    let ker = rows.kernel();
    Ok((0..ker.ncols())
        .map(|c| {
            PolyCovField::new(
                (0..n)
                    .map(|i| Poly::constant(n, ker[(i, c)].clone()))
                    .collect(),
            )
        })
        .collect())
}

/// Chain of codistributions produced by the invariance iteration.
#[derive(Clone, Debug)]
pub struct OmegaChain {
    pub chain: Vec<Vec<PolyCovField>>,
    pub limit: Vec<PolyCovField>,
}

/// Real-linear combinations of `gens` annihilating every input field.
fn cov_intersect_g_perp(gens: &[PolyCovField], g: &[PolyVecField]) -> Vec<PolyCovField> {
    if gens.is_empty() {
        return Vec::new();
    }
    // stack the pairings w_j . g_i as polynomials; combos in their common
    // kernel stay covectors of the intersection
    let mut rows: Vec<Vec<Poly>> = vec![Vec::new(); gens.len()];
    for gi in g {
        for (j, w) in gens.iter().enumerate() {
            rows[j].push(w.pair(gi));
        }
    }
    // coefficient matrix: row per generator, columns over all pairings
    let flat: Vec<Poly> = rows.iter().flatten().cloned().collect();
    let (basis, _) = coeff_rows(&flat);
    let per = g.len();
    let mut coef = RatMat::zeros(gens.len(), basis.len().max(1) * per);
    for (j, r) in rows.iter().enumerate() {
        for (i, p) in r.iter().enumerate() {
            for (e, c) in p.terms() {
                let col = basis.iter().position(|b| b == e).unwrap();
                coef[(j, i * basis.len().max(1) + col)] = c.clone();
            }
        }
    }
    // combos c with c^T coef = 0, i.e. the kernel of coef^T
    let ker = coef.transpose().kernel();
    (0..ker.ncols())
        .map(|k| {
            let mut acc = PolyCovField::new(vec![Poly::zero(gens[0].nvars()); gens[0].nvars()]);
            for (j, w) in gens.iter().enumerate() {
                acc = acc.add(&w.scale(&ker[(j, k)]));
            }
            acc
        })
        .filter(|w| !w.is_zero())
        .collect()
}

/// Smallest invariant codistribution containing the observer differentials:
/// Omega_0 = span{dh_j},
/// Omega_{k+1} = Omega_k + L_f(Omega_k n G-perp) + sum_i L_{g_i}(Omega_k n G-perp).
pub fn invariant_codistribution_iteration(sys: &PolyAffineSystem) -> Result<OmegaChain> {
    let mut cur: Vec<PolyCovField> = sys.h.iter().map(differential).collect();
    let mut chain = vec![cur.clone()];
    for _ in 0..K_MAX {
        let inter = cov_intersect_g_perp(&cur, &sys.g);
        let mut next = cur.clone();
        for w in &inter {
            for cand in std::iter::once(lie_derivative_cov(&sys.f, w))
                .chain(sys.g.iter().map(|gi| lie_derivative_cov(gi, w)))
            {
                if !in_cov_span(&next, &cand) {
                    if cand
                        .components
                        .iter()
                        .map(|c| c.degree())
                        .max()
                        .unwrap_or(0)
                        > D_MAX
                    {
                        return Err(OrkitError::DegreeOverflow(D_MAX as usize));
                    }
                    next.push(cand);
                }
            }
        }
        let done = cov_span_dim(&next) == cov_span_dim(&cur);
        chain.push(next.clone());
        if done {
            return Ok(OmegaChain { limit: next, chain });
        }
        cur = next;
    }
    Err(OrkitError::BoundExceeded(K_MAX))
}

/// Monomials of total degree at most d.
fn monomials_up_to(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; nvars]];
    for _ in 0..d {
        let mut next: Vec<Vec<u32>> = Vec::new();
        for e in &out {
            for i in 0..nvars {
                let mut e2 = e.clone();
                e2[i] += 1;
                if !next.contains(&e2) && !out.contains(&e2) {
                    next.push(e2);
                }
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    out
}

fn monomial_poly(e: &[u32]) -> Poly {
    Poly::from_terms(e.len(), [(e.to_vec(), Rat::from_integer(1.into()))])
}

/// Express `target` as sum_k xi_k * basis_k (+ constant when allowed) with
/// polynomial xi_k of minimal degree up to D_MAX.  Returns (xi, constant).
fn module_solve(
    target: &Poly,
    basis: &[Poly],
    allow_constant: bool,
) -> Option<(Vec<Poly>, Rat)> {
    let n = target.nvars();
    for d in 0..=D_MAX {
        let monos = monomials_up_to(n, d);
        // columns: products m * basis_k, plus the constant 1 if allowed,
        // rows: union monomial basis including the target
        let mut cols: Vec<Poly> = Vec::new();
        for b in basis {
            for m in &monos {
                cols.push(monomial_poly(m).mul(b));
            }
        }
        if allow_constant {
            cols.push(Poly::constant(n, Rat::from_integer(1.into())));
        }
        let mut all = cols.clone();
        all.push(target.clone());
        let (mono_basis, rows) = coeff_rows(&all);
        let ncols = cols.len();
        let nmono = mono_basis.len().max(1);
        // transpose layout: unknown coefficient per column polynomial
        let mut a = RatMat::zeros(nmono, ncols);
        for (c, _) in cols.iter().enumerate() {
            for j in 0..nmono {
                a[(j, c)] = rows[(c, j)].clone();
            }
        }
        let mut t = RatMat::zeros(nmono, 1);
        for j in 0..nmono {
            t[(j, 0)] = rows[(ncols, j)].clone();
        }
        if let Some(x) = a.solve(&t) {
            let mut xi = Vec::with_capacity(basis.len());
            for (k, _) in basis.iter().enumerate() {
                let mut p = Poly::zero(n);
                for (mi, m) in monos.iter().enumerate() {
                    let c = x[(k * monos.len() + mi, 0)].clone();
                    if !c.is_zero() {
                        p = p.add(&monomial_poly(m).scale(&c));
                    }
                }
                xi.push(p);
            }
            let konst = if allow_constant {
                x[(ncols - 1, 0)].clone()
            } else {
                Rat::zero()
            };
            return Some((xi, konst));
        }
    }
    None
}

/// Certificate that the span of the candidate functions is invariant: the
/// drift derivative factors through the candidates, and each input
/// derivative factors up to a constant offset.
#[derive(Clone, Debug)]
pub struct NlCertificate {
    /// Row j: L_drift H_j = sum_k xi0[j][k] H_k.
    pub xi0: Vec<Vec<Poly>>,
    /// Per input i, row j: L_{g_i} H_j = sum_k xi[j][k] H_k + offset[j].
    pub xi_inputs: Vec<Vec<Vec<Poly>>>,
    pub input_offsets: Vec<Vec<Rat>>,
}

impl NlCertificate {
    /// The drift matrix as constants when every entry is constant.
    pub fn constant_xi0(&self) -> Option<RatMat> {
        let k = self.xi0.len();
        let mut m = RatMat::zeros(k, k);
        for (j, row) in self.xi0.iter().enumerate() {
            for (l, p) in row.iter().enumerate() {
                if !p.is_constant() {
                    return None;
                }
                m[(j, l)] = p.constant_term();
            }
        }
        Some(m)
    }
}

/// Search for an invariance certificate of the candidate functions under the
/// (optionally feedback-closed) system.  Absence is a normal outcome.
pub fn is_invariant_exact_codistribution(
    sys: &PolyAffineSystem,
    candidate: &[Poly],
    alpha: Option<&[Poly]>,
) -> Result<Option<NlCertificate>> {
    let n = sys.nvars();
    let origin = vec![Rat::zero(); n];
    for c in candidate {
        if !c.eval(&origin).is_zero() {
            return Err(OrkitError::Input(
                "candidate functions must vanish at the origin".into(),
            ));
        }
    }
    let drift = match alpha {
        Some(a) => sys.closed_drift(a),
        None => sys.f.clone(),
    };
    let mut xi0 = Vec::with_capacity(candidate.len());
    for hj in candidate {
        match module_solve(&lie_derivative(&drift, hj), candidate, false) {
            Some((xi, _)) => xi0.push(xi),
            None => return Ok(None),
        }
    }
    let mut xi_inputs = Vec::with_capacity(sys.g.len());
    let mut input_offsets = Vec::with_capacity(sys.g.len());
    for gi in &sys.g {
        let mut rows = Vec::with_capacity(candidate.len());
        let mut offs = Vec::with_capacity(candidate.len());
        for hj in candidate {
            match module_solve(&lie_derivative(gi, hj), candidate, true) {
                Some((xi, c)) => {
                    rows.push(xi);
                    offs.push(c);
                }
                None => return Ok(None),
            }
        }
        xi_inputs.push(rows);
        input_offsets.push(offs);
    }
    let cert = NlCertificate {
        xi0,
        xi_inputs,
        input_offsets,
    };
    debug_assert!(verify_certificate(sys, candidate, alpha, &cert));
    Ok(Some(cert))
}

/// Re-expand the certificate and check zero polynomial residual.
pub fn verify_certificate(
    sys: &PolyAffineSystem,
    candidate: &[Poly],
    alpha: Option<&[Poly]>,
    cert: &NlCertificate,
) -> bool {
    let n = sys.nvars();
    let drift = match alpha {
        Some(a) => sys.closed_drift(a),
        None => sys.f.clone(),
    };
    for (j, hj) in candidate.iter().enumerate() {
        let mut rhs = Poly::zero(n);
        for (k, hk) in candidate.iter().enumerate() {
            rhs = rhs.add(&cert.xi0[j][k].mul(hk));
        }
        if lie_derivative(&drift, hj) != rhs {
            return false;
        }
    }
    for (i, gi) in sys.g.iter().enumerate() {
        for (j, hj) in candidate.iter().enumerate() {
            let mut rhs = Poly::constant(n, cert.input_offsets[i][j].clone());
            for (k, hk) in candidate.iter().enumerate() {
                rhs = rhs.add(&cert.xi_inputs[i][j][k].mul(hk));
            }
            if lie_derivative(gi, hj) != rhs {
                return false;
            }
        }
    }
    true
}

/// An exact realization in observer coordinates: state functions z = H(x)
/// with z' = Xi0(z) z + sum_i (Xi_i(z) z + c_i) u_i when the certificate is
/// constant, symbolic otherwise.
#[derive(Clone, Debug)]
pub struct NlRealization {
    /// State functions; the original observers occupy the leading slots.
    pub states: Vec<Poly>,
    pub certificate: NlCertificate,
    pub alpha: Option<Vec<Poly>>,
}

pub fn or_extended_nl(sys: &PolyAffineSystem, alpha: Option<&[Poly]>) -> Result<NlRealization> {
    let states = closure_fg(sys, alpha)?;
    let cert = is_invariant_exact_codistribution(sys, &states, alpha)?
        .ok_or_else(|| OrkitError::Input("closure admits no invariance certificate".into()))?;
    Ok(NlRealization {
        states,
        certificate: cert,
        alpha: alpha.map(|a| a.to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orsys::{self, or_extended};
    use crate::rat::rat;
    use crate::subspace::row_closure_generation_order;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(s: &str, n: usize) -> Poly {
        Poly::parse(s, n).unwrap()
    }

    /// Three-state single-input system with a quadratic drift whose observer
    /// x1 - x3 is not invariant until the x3^2 input term is cancelled.
    fn quad_sys() -> PolyAffineSystem {
        let f = PolyVecField::new(vec![
            p("x2 + x3 + x2^2", 3),
            p("x1 - x3 + x3^2", 3),
            p("x3 + x2^2", 3),
        ]);
        let g = vec![PolyVecField::new(vec![
            Poly::zero(3),
            p("1", 3),
            Poly::zero(3),
        ])];
        PolyAffineSystem::new(f, g, vec![p("x1 - x3", 3)]).unwrap()
    }

    fn rand_poly(rng: &mut StdRng, n: usize, d: u32) -> Poly {
        let monos = monomials_up_to(n, d);
        let mut acc = Poly::zero(n);
        for e in monos {
            if rng.gen_bool(0.4) {
                acc = acc.add(&monomial_poly(&e).scale(&rat(rng.gen_range(-2..=2))));
            }
        }
        acc
    }

    fn rand_field(rng: &mut StdRng, n: usize, d: u32) -> PolyVecField {
        PolyVecField::new((0..n).map(|_| rand_poly(rng, n, d)).collect())
    }

    #[test]
    fn lie_derivative_values() {
        let sys = quad_sys();
        assert_eq!(lie_derivative(&sys.f, &sys.h[0]), p("x2", 3));
        assert_eq!(lie_derivative(&sys.g[0], &sys.h[0]), Poly::zero(3));
        assert_eq!(lie_derivative(&sys.f, &p("5", 3)), Poly::zero(3));
    }

    #[test]
    fn differential_values() {
        let d = differential(&p("x1 - x3", 3));
        assert_eq!(d.components[0], p("1", 3));
        assert_eq!(d.components[1], Poly::zero(3));
        assert_eq!(d.components[2], p("-1", 3));
    }

    #[test]
    fn cartan_identity_and_leibniz() {
        let mut rng = StdRng::seed_from_u64(50);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4usize);
            let f = rand_field(&mut rng, n, 3);
            let h = rand_poly(&mut rng, n, 3);
            let lhs = lie_derivative_cov(&f, &differential(&h));
            let rhs = differential(&lie_derivative(&f, &h));
            assert_eq!(lhs, rhs);
            let h2 = rand_poly(&mut rng, n, 3);
            let prod = lie_derivative(&f, &h.mul(&h2));
            let leib = h.mul(&lie_derivative(&f, &h2)).add(&h2.mul(&lie_derivative(&f, &h)));
            assert_eq!(prod, leib);
        }
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi() {
        let mut rng = StdRng::seed_from_u64(51);
        let n = 3;
        let f = rand_field(&mut rng, n, 2);
        let g = rand_field(&mut rng, n, 2);
        let h = rand_field(&mut rng, n, 2);
        let zero = PolyVecField::new(vec![Poly::zero(n); n]);
        assert_eq!(lie_bracket(&f, &f), zero);
        let fg = lie_bracket(&f, &g);
        let gf = lie_bracket(&g, &f);
        for (a, b) in fg.components.iter().zip(&gf.components) {
            assert_eq!(a.clone(), b.neg());
        }
        let j1 = lie_bracket(&f, &lie_bracket(&g, &h));
        let j2 = lie_bracket(&g, &lie_bracket(&h, &f));
        let j3 = lie_bracket(&h, &lie_bracket(&f, &g));
        for i in 0..n {
            assert_eq!(
                j1.components[i].add(&j2.components[i]).add(&j3.components[i]),
                Poly::zero(n)
            );
        }
    }

    #[test]
    fn so_system_values() {
        let sys = quad_sys();
        let so = so_system_nl(&sys);
        assert_eq!(so.drift, vec![p("x2", 3)]);
        assert_eq!(so.input, vec![vec![Poly::zero(3)]]);
        // an identity observer returns the drift components themselves
        let full = PolyAffineSystem::new(
            sys.f.clone(),
            sys.g.clone(),
            vec![p("x1", 3), p("x2", 3), p("x3", 3)],
        )
        .unwrap();
        let so2 = so_system_nl(&full);
        assert_eq!(so2.drift, sys.f.components);
    }

    #[test]
    fn closure_with_feedback_stabilizes() {
        let sys = quad_sys();
        let alpha = vec![p("-x3^2", 3)];
        let states = closure_fg(&sys, Some(&alpha)).unwrap();
        assert_eq!(states, vec![p("x1 - x3", 3), p("x2", 3)]);
        // without the feedback the quadratic terms keep raising the degree
        assert!(matches!(
            closure_fg(&sys, None),
            Err(OrkitError::DegreeOverflow(_))
        ));
    }

    #[test]
    fn closure_of_invariant_observers_is_identity() {
        // linear rotation: h = x1 with f = (x2, -x1) closes after one step
        let f = PolyVecField::new(vec![p("x2", 2), p("-x1", 2)]);
        let g = vec![PolyVecField::new(vec![Poly::zero(2), p("1", 2)])];
        let sys = PolyAffineSystem::new(f, g, vec![p("x1", 2), p("x2", 2)]).unwrap();
        let states = closure_fg(&sys, None).unwrap();
        assert_eq!(states, vec![p("x1", 2), p("x2", 2)]);
    }

    #[test]
    fn g_perp_constant_inputs() {
        let sys = quad_sys();
        let gp = g_perp(&sys.g).unwrap();
        assert_eq!(gp.len(), 2);
        let expect1 = PolyCovField::new(vec![p("1", 3), Poly::zero(3), Poly::zero(3)]);
        let expect2 = PolyCovField::new(vec![Poly::zero(3), Poly::zero(3), p("1", 3)]);
        assert!(in_cov_span(&gp, &expect1));
        assert!(in_cov_span(&gp, &expect2));
        // polynomial input fields are rejected
        let gpoly = vec![PolyVecField::new(vec![p("x1", 3), Poly::zero(3), Poly::zero(3)])];
        assert!(g_perp(&gpoly).is_err());
    }

    #[test]
    fn omega_iteration_reaches_the_invariant_codistribution() {
        let sys = quad_sys();
        let out = invariant_codistribution_iteration(&sys).unwrap();
        let e13 = PolyCovField::new(vec![p("1", 3), Poly::zero(3), p("-1", 3)]);
        let e2 = PolyCovField::new(vec![Poly::zero(3), p("1", 3), Poly::zero(3)]);
        assert_eq!(cov_span_dim(&out.chain[0]), 1);
        assert!(in_cov_span(&out.chain[0], &e13));
        assert_eq!(cov_span_dim(&out.limit), 2);
        assert!(in_cov_span(&out.limit, &e13));
        assert!(in_cov_span(&out.limit, &e2));
        // fully actuated systems stop at the observer differentials
        let full = PolyAffineSystem::new(
            sys.f.clone(),
            vec![
                PolyVecField::new(vec![p("1", 3), Poly::zero(3), Poly::zero(3)]),
                PolyVecField::new(vec![Poly::zero(3), p("1", 3), Poly::zero(3)]),
                PolyVecField::new(vec![Poly::zero(3), Poly::zero(3), p("1", 3)]),
            ],
            sys.h.clone(),
        )
        .unwrap();
        let out2 = invariant_codistribution_iteration(&full).unwrap();
        assert_eq!(cov_span_dim(&out2.limit), 1);
    }

    #[test]
    fn certificate_search_and_absence() {
        let sys = quad_sys();
        let alpha = vec![p("-x3^2", 3)];
        // the single observer is not invariant on its own
        let none = is_invariant_exact_codistribution(&sys, &[p("x1 - x3", 3)], Some(&alpha))
            .unwrap();
        assert!(none.is_none());
        // the closed pair carries a constant certificate
        let cand = vec![p("x1 - x3", 3), p("x2", 3)];
        let cert = is_invariant_exact_codistribution(&sys, &cand, Some(&alpha))
            .unwrap()
            .expect("certificate");
        let xi0 = cert.constant_xi0().unwrap();
        assert_eq!(xi0, RatMat::from_i64(&[&[0, 1], &[1, 0]]));
        assert!(cert.xi_inputs[0].iter().flatten().all(|p| p.is_zero()));
        assert_eq!(cert.input_offsets[0], vec![rat(0), rat(1)]);
        assert!(verify_certificate(&sys, &cand, Some(&alpha), &cert));
        // candidates violating the vanishing condition are rejected
        assert!(is_invariant_exact_codistribution(&sys, &[p("x1 + 1", 3)], None).is_err());
    }

    #[test]
    fn extended_realization_two_state() {
        let sys = quad_sys();
        let alpha = vec![p("-x3^2", 3)];
        let rel = or_extended_nl(&sys, Some(&alpha)).unwrap();
        assert_eq!(rel.states, vec![p("x1 - x3", 3), p("x2", 3)]);
        let xi0 = rel.certificate.constant_xi0().unwrap();
        assert_eq!(xi0, RatMat::from_i64(&[&[0, 1], &[1, 0]]));
        assert_eq!(rel.certificate.input_offsets[0], vec![rat(0), rat(1)]);
    }

    #[test]
    fn linear_systems_reduce_to_matrix_constructions() {
        // encode a linear system polynomially and compare against the
        // matrix-level closure and realization
        let a = RatMat::from_i64(&[
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
            &[1, 0, -1, 1],
            &[0, 0, 0, 0],
        ]);
        let b = RatMat::from_i64(&[&[0], &[0], &[1], &[0]]);
        let h = RatMat::from_i64(&[&[1, 0, 0, 1]]);
        let n = 4;
        let lin = |row: Vec<crate::rat::Rat>| {
            let mut acc = Poly::zero(n);
            for (i, c) in row.into_iter().enumerate() {
                acc = acc.add(&Poly::var(n, i).scale(&c));
            }
            acc
        };
        let f = PolyVecField::new((0..n).map(|i| lin(a.row(i))).collect());
        let g = vec![PolyVecField::new(
            (0..n).map(|i| Poly::constant(n, b[(i, 0)].clone())).collect(),
        )];
        let hp = vec![lin(h.row(0))];
        let sys = PolyAffineSystem::new(f, g, hp).unwrap();
        let states = closure_fg(&sys, None).unwrap();
        let rows = row_closure_generation_order(&h, &a);
        assert_eq!(states.len(), rows.nrows());
        for (k, s) in states.iter().enumerate() {
            assert_eq!(s, &lin(rows.row(k)));
        }
        let rel = or_extended_nl(&sys, None).unwrap();
        let xi0 = rel.certificate.constant_xi0().unwrap();
        let msys = orsys::LinearSystem::new(a, b, h, orsys::TimeKind::Continuous).unwrap();
        let ext = or_extended(&msys).unwrap();
        assert_eq!(xi0, ext.l);
        // the input offsets replay the matrix-level N
        let offs = RatMat::col_vector(rel.certificate.input_offsets[0].clone());
        assert_eq!(offs, ext.n_mat);
    }

    #[test]
    fn approx_evaluator_matches_projection_closure() {
        // single observer h = x1: the projection guess replicates x1 into
        // every coordinate, so the drift evaluates at (y, y, y)
        let sys = quad_sys();
        let full = PolyAffineSystem::new(
            sys.f.clone(),
            sys.g.clone(),
            vec![p("x1", 3)],
        )
        .unwrap();
        let ev = or_approx_nl(&full).unwrap();
        let y = nalgebra::DVector::from_vec(vec![0.5]);
        let u = nalgebra::DVector::from_vec(vec![0.0]);
        let out = ev.rhs(&y, &u);
        // L_f x1 = x2 + x3 + x2^2 at x = (0.5, 0.5, 0.5)
        assert!((out[0] - (0.5 + 0.5 + 0.25)).abs() < 1e-12);
        // with p = n and identity observers the original drift returns
        let idsys = PolyAffineSystem::new(
            sys.f.clone(),
            sys.g.clone(),
            vec![p("x1", 3), p("x2", 3), p("x3", 3)],
        )
        .unwrap();
        let ev2 = or_approx_nl(&idsys).unwrap();
        let x = nalgebra::DVector::from_vec(vec![0.3, -0.7, 1.1]);
        let out2 = ev2.rhs(&x, &u);
        let xs = [0.3, -0.7, 1.1];
        for j in 0..3 {
            assert!((out2[j] - sys.f.components[j].eval_f64(&xs)).abs() < 1e-12);
        }
    }
}
