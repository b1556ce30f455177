//! Observer-based realizations of linear and singular systems: approximate
//! reductions through projection or pseudo-inverse bridges, exact realizations
//! when the observer row space is invariant, extended and feedback-extended
//! realizations otherwise, plus the Kalman minimal realization for contrast
//! and a disturbance decoupling test.

use crate::error::{OrkitError, Result};
use crate::rat::RatMat;
use crate::subspace::{
    friend, largest_ab_invariant_in, pseudo_inverse, row_closure_generation_order,
    row_invariance_certificate, Subspace,
};
use crate::xspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeKind {
    Continuous,
    Discrete,
}

/// x' = A x + B u, y = H x (continuous or discrete time).
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub a: RatMat,
    pub b: RatMat,
    pub h: RatMat,
    pub time: TimeKind,
}

impl LinearSystem {
    pub fn new(a: RatMat, b: RatMat, h: RatMat, time: TimeKind) -> Result<LinearSystem> {
        let n = a.nrows();
        if !a.is_square() || b.nrows() != n || h.ncols() != n || n == 0 || b.ncols() == 0
            || h.nrows() == 0
        {
            return Err(OrkitError::ShapeMismatch {
                expected: "A n x n, B n x m, H p x n with n, m, p >= 1".into(),
                got: format!(
                    "A {}x{}, B {}x{}, H {}x{}",
                    a.nrows(),
                    a.ncols(),
                    b.nrows(),
                    b.ncols(),
                    h.nrows(),
                    h.ncols()
                ),
            });
        }
        Ok(LinearSystem { a, b, h, time })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.h.nrows()
    }
}

/// E x' = A x + B u together with the algebraic constraint F x + D u = 0.
#[derive(Clone, Debug)]
pub struct SingularSystem {
    pub e: RatMat,
    pub f_alg: RatMat,
    pub a: RatMat,
    pub b: RatMat,
    pub d: Option<RatMat>,
}

impl SingularSystem {
    pub fn new(
        e: RatMat,
        f_alg: RatMat,
        a: RatMat,
        b: RatMat,
        d: Option<RatMat>,
    ) -> Result<SingularSystem> {
        let r = e.nrows();
        let n = e.ncols();
        let ok = f_alg.ncols() == n
            && f_alg.nrows() + r == n
            && a.nrows() == r
            && a.ncols() == n
            && b.nrows() == r
            && d.as_ref().map_or(true, |d| {
                d.nrows() == f_alg.nrows() && d.ncols() == b.ncols()
            });
        if !ok {
            return Err(OrkitError::ShapeMismatch {
                expected: "E r x n, F (n-r) x n, A r x n, B r x m, D (n-r) x m".into(),
                got: format!(
                    "E {}x{}, F {}x{}, A {}x{}, B {}x{}",
                    e.nrows(),
                    e.ncols(),
                    f_alg.nrows(),
                    f_alg.ncols(),
                    a.nrows(),
                    a.ncols(),
                    b.nrows(),
                    b.ncols()
                ),
            });
        }
        Ok(SingularSystem { e, f_alg, a, b, d })
    }

    /// The stacked square map [E; F].
    pub fn theta(&self) -> RatMat {
        self.e.vstack(&self.f_alg)
    }
}

/// The observer derivative written over the full state: y' = M x + N u.
#[derive(Clone, Debug)]
pub struct SOSystem {
    pub m: RatMat,
    pub n: RatMat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrKind {
    ApproxProjection,
    ApproxPseudoInverse,
    Exact,
    Extended,
    Feedback,
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Approximate,
}

/// A self-contained realization z' = L z + N u whose state consists of
/// observer functions of the original state: z = observer_map * x.  The
/// selector row-selects the original outputs from z.
#[derive(Clone, Debug)]
pub struct ORSystem {
    pub kind: OrKind,
    pub l: RatMat,
    pub n_mat: RatMat,
    pub observer_map: RatMat,
    pub selector: RatMat,
    pub feedback_f: Option<RatMat>,
    pub exactness: Exactness,
    pub time: TimeKind,
}

impl ORSystem {
    pub fn order(&self) -> usize {
        self.l.nrows()
    }

    /// Initial OR state from a full initial state x0.
    pub fn initial_from_state(&self, x0: &RatMat) -> RatMat {
        self.observer_map.mul(x0)
    }

    /// Exactness witness: residuals of observer_map (A + B F) = L observer_map
    /// and observer_map B = N over the original system.
    pub fn certificate_residual(&self, sys: &LinearSystem) -> RatMat {
        let a_closed = match &self.feedback_f {
            Some(f) => sys.a.add(&sys.b.mul(f)),
            None => sys.a.clone(),
        };
        let dyn_res = self
            .observer_map
            .mul(&a_closed)
            .sub(&self.l.mul(&self.observer_map));
        let in_res = self.observer_map.mul(&sys.b).sub(&self.n_mat);
        dyn_res.hstack(&in_res)
    }
}

pub fn so_system(sys: &LinearSystem) -> SOSystem {
    SOSystem {
        m: sys.h.mul(&sys.a),
        n: sys.h.mul(&sys.b),
    }
}

/// Close an SO-system over R^p with the projection bridge: L = M Pi^p_n.
pub fn projection_reduce(m: &RatMat, p: usize) -> Result<RatMat> {
    let n = m.ncols();
    Ok(m.mul(&xspace::projection_matrix_rat(p, n)?))
}

pub fn or_projection(sys: &LinearSystem) -> Result<ORSystem> {
    let so = so_system(sys);
    let p = sys.output_dim();
    let l = projection_reduce(&so.m, p)?;
    Ok(ORSystem {
        kind: OrKind::ApproxProjection,
        l,
        n_mat: so.n,
        observer_map: sys.h.clone(),
        selector: RatMat::identity(p),
        feedback_f: None,
        exactness: Exactness::Approximate,
        time: sys.time,
    })
}

pub fn or_pseudoinverse(sys: &LinearSystem) -> Result<ORSystem> {
    let hp = pseudo_inverse(&sys.h)?;
    let l = sys.h.mul(&sys.a).mul(&hp);
    let exact = l.mul(&sys.h) == sys.h.mul(&sys.a);
    Ok(ORSystem {
        kind: OrKind::ApproxPseudoInverse,
        l,
        n_mat: sys.h.mul(&sys.b),
        observer_map: sys.h.clone(),
        selector: RatMat::identity(sys.output_dim()),
        feedback_f: None,
        exactness: if exact {
            Exactness::Exact
        } else {
            Exactness::Approximate
        },
        time: sys.time,
    })
}

/// Reduce a singular system through its stacked map: with y = E x the
/// constraint gives x ~ Theta^+ [y; -D u], hence y' = A Psi y + N u where
/// Psi holds the first r columns of Theta^+.  Exact when Theta is invertible.
pub fn or_singular(sys: &SingularSystem) -> Result<ORSystem> {
    let theta = sys.theta();
    let r = sys.e.nrows();
    let n = theta.ncols();
    let exact = theta.rank() == n;
    let theta_pinv = if exact {
        theta.inverse().expect("full-rank square matrix")
    } else {
        pseudo_inverse(&theta)?
    };
    let psi_plus = theta_pinv.submatrix(0, 0, n, r);
    let l = sys.a.mul(&psi_plus);
    let mut n_mat = sys.b.clone();
    if let Some(d) = &sys.d {
        // x ~ Psi y - Theta^+_rest D u folds an extra term into the input map
        let rest = theta_pinv.submatrix(0, r, n, n - r);
        n_mat = n_mat.sub(&sys.a.mul(&rest).mul(d));
    }
    Ok(ORSystem {
        kind: OrKind::Singular,
        l,
        n_mat,
        observer_map: sys.e.clone(),
        selector: RatMat::identity(r),
        feedback_f: None,
        exactness: if exact {
            Exactness::Exact
        } else {
            Exactness::Approximate
        },
        time: TimeKind::Continuous,
    })
}

/// Exact realization over the observers themselves.  Present exactly when
/// the observer row space is invariant under right multiplication by A.
pub fn or_exact(sys: &LinearSystem) -> Option<ORSystem> {
    let cert = row_invariance_certificate(&sys.h, &sys.a);
    if !cert.is_exact() {
        return None;
    }
    Some(ORSystem {
        kind: OrKind::Exact,
        l: cert.xi,
        n_mat: sys.h.mul(&sys.b),
        observer_map: sys.h.clone(),
        selector: RatMat::identity(sys.output_dim()),
        feedback_f: None,
        exactness: Exactness::Exact,
        time: sys.time,
    })
}

/// Solve L W = W A_closed for the unique L on a full-row-rank W whose row
/// space is invariant.
fn solve_dynamics(w: &RatMat, a_closed: &RatMat) -> Result<RatMat> {
    let wa = w.mul(a_closed);
    let lt = w
        .transpose()
        .solve(&wa.transpose())
        .ok_or_else(|| OrkitError::Singular("row space is not invariant".into()))?;
    Ok(lt.transpose())
}

/// Exact realization on the invariant closure of the observers.  The
/// independent observers occupy the leading rows; the selector recovers the
/// original outputs (it is [I 0] when the observer rows are independent).
pub fn or_extended(sys: &LinearSystem) -> Result<ORSystem> {
    let w = row_closure_generation_order(&sys.h, &sys.a);
    let l = solve_dynamics(&w, &sys.a)?;
    let selector = w
        .transpose()
        .solve(&sys.h.transpose())
        .ok_or_else(|| OrkitError::Singular("outputs escaped their closure".into()))?
        .transpose();
    Ok(ORSystem {
        kind: OrKind::Extended,
        l,
        n_mat: w.mul(&sys.b),
        observer_map: w,
        selector,
        feedback_f: None,
        exactness: Exactness::Exact,
        time: sys.time,
    })
}

/// Rows of `h` extended by independent rows of `extra` in order.
fn extend_rows(h: &RatMat, extra: &RatMat) -> RatMat {
    let mut rows = RatMat::zeros(0, h.ncols());
    for i in 0..h.nrows() {
        let cand = rows.vstack(&RatMat::row_vector(h.row(i)));
        if cand.rank() > rows.nrows() {
            rows = cand;
        }
    }
    for i in 0..extra.nrows() {
        let cand = rows.vstack(&RatMat::row_vector(extra.row(i)));
        if cand.rank() > rows.nrows() {
            rows = cand;
        }
    }
    rows
}

/// Exact realization after feedback: compute the largest controlled
/// invariant subspace V inside ker H, a friend F, and realize on the rows
/// spanning the perp of V (leading rows = H).
pub fn or_feedback(sys: &LinearSystem) -> Result<ORSystem> {
    let ker_h = Subspace::from_rows(&sys.h).perp();
    let chain = largest_ab_invariant_in(&sys.a, &sys.b, &ker_h);
    let f = friend(&sys.a, &sys.b, &chain.limit)?;
    let w = extend_rows(&sys.h, &chain.limit.perp().basis_rows());
    or_from_observer_map(sys, &w, Some(f)).map(|mut or| {
        or.kind = OrKind::Feedback;
        or
    })
}

/// Realize on a caller-supplied observer map (rows) and optional feedback.
/// Fails when the row space is not invariant for A + B F.
pub fn or_from_observer_map(
    sys: &LinearSystem,
    w: &RatMat,
    feedback_f: Option<RatMat>,
) -> Result<ORSystem> {
    let a_closed = match &feedback_f {
        Some(f) => sys.a.add(&sys.b.mul(f)),
        None => sys.a.clone(),
    };
    let l = solve_dynamics(w, &a_closed)?;
    let p = sys.output_dim();
    let k = w.nrows();
    // recover the original outputs from the realization state
    let selector = w
        .transpose()
        .solve(&sys.h.transpose())
        .map(|s| s.transpose())
        .unwrap_or_else(|| RatMat::identity(k).submatrix(0, 0, p.min(k), k));
    Ok(ORSystem {
        kind: OrKind::Feedback,
        l,
        n_mat: w.mul(&sys.b),
        observer_map: w.clone(),
        selector,
        feedback_f,
        exactness: Exactness::Exact,
        time: sys.time,
    })
}

/// The controllable-and-observable restriction: same transfer behavior,
/// generally different observer functions.
pub fn kalman_minimal(sys: &LinearSystem) -> Result<LinearSystem> {
    let reach = crate::subspace::controllable_subspace(&sys.a, &sys.b);
    let unobs = crate::subspace::largest_a_invariant_in_kernel(&sys.a, &sys.h);
    let core = reach.intersect(&unobs);
    // basis of the reachable subspace whose leading columns span the
    // unobservable part; the minimal block lives on the complement
    let d0 = core.dim();
    let s = extend_rows(&core.basis_rows(), &reach.basis_rows()).transpose();
    let r = s.ncols();
    if r == d0 {
        // no controllable-and-observable part: a one-state zero system
        return LinearSystem::new(
            RatMat::zeros(1, 1),
            RatMat::zeros(1, sys.input_dim()),
            RatMat::zeros(sys.output_dim(), 1),
            sys.time,
        );
    }
    let coeff = s
        .solve(&sys.a.mul(&s))
        .ok_or_else(|| OrkitError::Singular("reachable subspace not invariant".into()))?;
    let a11 = coeff.submatrix(d0, d0, r - d0, r - d0);
    let bc = s
        .solve(&sys.b)
        .ok_or_else(|| OrkitError::Singular("input image escapes the reachable subspace".into()))?;
    let b1 = bc.submatrix(d0, 0, r - d0, bc.ncols());
    let wcols: Vec<usize> = (d0..r).collect();
    let c1 = sys.h.mul(&s.select_cols(&wcols));
    LinearSystem::new(a11, b1, c1, sys.time)
}

/// Markov parameters H A^k B for k = 0..count-1.
pub fn markov_parameters(sys: &LinearSystem, count: usize) -> Vec<RatMat> {
    let mut out = Vec::with_capacity(count);
    let mut hak = sys.h.clone();
    for _ in 0..count {
        out.push(hak.mul(&sys.b));
        hak = hak.mul(&sys.a);
    }
    out
}

/// Report of a disturbance decoupling test.
#[derive(Clone, Debug)]
pub struct DdpReport {
    pub decoupled: bool,
    /// Per-disturbance membership in the largest controlled invariant
    /// subspace inside ker H.
    pub member: Vec<bool>,
    pub invariant_dim: usize,
}

/// The disturbances can be eliminated from the outputs exactly when each
/// disturbance direction lies inside the largest controlled invariant
/// subspace of ker H; the feedback realization then never sees them.
pub fn ddp_check(sys: &LinearSystem, disturbances: &[RatMat]) -> DdpReport {
    let ker_h = Subspace::from_rows(&sys.h).perp();
    let v = largest_ab_invariant_in(&sys.a, &sys.b, &ker_h).limit;
    let member: Vec<bool> = disturbances.iter().map(|x| v.contains_vec(x)).collect();
    DdpReport {
        decoupled: member.iter().all(|&m| m),
        member,
        invariant_dim: v.dim(),
    }
}
