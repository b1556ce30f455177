//! Exact subspace arithmetic over the rationals: canonical bases, perps,
//! invariance tests, invariant closures, and the controlled-invariance
//! fixed-point iteration with its feedback construction.

use crate::error::{OrkitError, Result};
use crate::rat::RatMat;

/// A linear subspace of R^n with a canonical basis stored as columns.
/// The canonical form is the reduced row-echelon basis of the row space of
/// the transposed generators, so equal subspaces compare equal.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    /// n x k, columns form the canonical basis; k = 0 for the zero subspace.
    basis: RatMat,
}

impl Subspace {
    /// Span of the columns of `gens`.
    pub fn from_cols(gens: &RatMat) -> Subspace {
        let ambient = gens.nrows();
        let (r, pivots) = gens.transpose().rref();
        let rows: Vec<usize> = (0..pivots.len()).collect();
        let basis = r.select_rows(&rows).transpose();
        Subspace { ambient, basis }
    }

    /// Span of the rows of `gens`, as a subspace of R^(ncols).
    pub fn from_rows(gens: &RatMat) -> Subspace {
        Subspace::from_cols(&gens.transpose())
    }

    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: RatMat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: RatMat::identity(ambient),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Canonical basis, columns.
    pub fn basis(&self) -> &RatMat {
        &self.basis
    }

    /// Canonical basis, rows (for row-space oriented callers).
    pub fn basis_rows(&self) -> RatMat {
        self.basis.transpose()
    }

    pub fn contains_vec(&self, v: &RatMat) -> bool {
        assert_eq!(v.nrows(), self.ambient);
        assert_eq!(v.ncols(), 1);
        if self.dim() == 0 {
            return v.is_zero();
        }
        self.basis.solve(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 {
            return true;
        }
        self.basis.hstack(other.basis()).rank() == other.dim()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        Subspace::from_cols(&self.basis.hstack(other.basis()))
    }

    /// Orthogonal complement (perp of a row space yields its kernel and
    /// conversely).
    pub fn perp(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient);
        }
        Subspace::from_cols(&self.basis.transpose().kernel())
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.perp().sum(&other.perp()).perp()
    }

    /// Image A(V) for a map given by its matrix.
    pub fn image(&self, a: &RatMat) -> Subspace {
        assert_eq!(a.ncols(), self.ambient);
        if self.dim() == 0 {
            return Subspace::zero(a.nrows());
        }
        Subspace::from_cols(&a.mul(&self.basis))
    }

    /// Preimage A^{-1}(V) = the perp of A^T applied to the perp of V.
    pub fn preimage(&self, a: &RatMat) -> Subspace {
        assert_eq!(a.nrows(), self.ambient);
        let wp = self.perp();
        if wp.dim() == 0 {
            return Subspace::full(a.ncols());
        }
        // x in A^{-1}(V) iff w^T A x = 0 for every w in V-perp
        Subspace::from_cols(&wp.basis_rows().mul(a).kernel())
    }

    /// Standard basis columns completing this subspace to R^n.
    pub fn complement_cols(&self) -> Vec<usize> {
        let (_, pivots) = self.basis.transpose().rref();
        (0..self.ambient).filter(|c| !pivots.contains(c)).collect()
    }
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} in R^{}) {:?}", self.dim(), self.ambient, self.basis)
    }
}

/// A(V) contained in V.
pub fn is_a_invariant(a: &RatMat, v: &Subspace) -> bool {
    v.image(a).is_subspace_of(v)
}

/// Smallest A-invariant subspace containing V: iterate V + A(V).
pub fn a_invariant_closure(a: &RatMat, v: &Subspace) -> Subspace {
    let mut cur = v.clone();
    loop {
        let next = cur.sum(&cur.image(a));
        if next.dim() == cur.dim() {
            return cur;
        }
        cur = next;
    }
}

/// Row-space closure in generation order: starting from the rows of `h`,
/// append each independent product row * a breadth-first.  The row span of
/// the result is the smallest subspace containing the rows of `h` that is
/// invariant under right multiplication by `a`.
pub fn row_closure_generation_order(h: &RatMat, a: &RatMat) -> RatMat {
    assert_eq!(h.ncols(), a.nrows());
    assert!(a.is_square());
    let mut rows = RatMat::zeros(0, h.ncols());
    let mut queue: Vec<RatMat> = (0..h.nrows())
        .map(|i| RatMat::row_vector(h.row(i)))
        .collect();
    let mut qi = 0;
    while qi < queue.len() {
        let r = queue[qi].clone();
        qi += 1;
        let cand = rows.vstack(&r);
        if cand.rank() > rows.nrows() {
            rows = cand;
            queue.push(r.mul(a));
        }
    }
    rows
}

/// Certificate that the row space of `h` is invariant: the unique matrix Xi
/// with Xi * h = h * a on the row space, plus the exact residual.
#[derive(Clone, Debug)]
pub struct InvarianceCertificate {
    pub xi: RatMat,
    pub residual: RatMat,
}

impl InvarianceCertificate {
    pub fn is_exact(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Solve Xi h = h a in the least-residual sense available to exact
/// elimination: Xi = (h a) h^+ via the transposed linear solve, residual
/// Xi h - h a.  The residual is zero exactly when the row space of `h` is
/// invariant under right multiplication by `a`.
pub fn row_invariance_certificate(h: &RatMat, a: &RatMat) -> InvarianceCertificate {
    let ha = h.mul(a);
    let xi = match h.transpose().solve(&ha.transpose()) {
        Some(x) => x.transpose(),
        None => {
            // row space not invariant; fall back to the projector form
            let hp = pseudo_inverse(h).expect("rank factorization");
            ha.mul(&hp)
        }
    };
    let residual = xi.mul(h).sub(&ha);
    InvarianceCertificate { xi, residual }
}

/// Exact Moore-Penrose pseudo-inverse through the rank factorization
/// h = B C with B the pivot columns and C the nonzero rows of the reduced
/// echelon form: h^+ = C^T (B^T h C^T)^{-1} B^T.
pub fn pseudo_inverse(h: &RatMat) -> Result<RatMat> {
    if h.is_zero() {
        return Ok(RatMat::zeros(h.ncols(), h.nrows()));
    }
    let (r, pivots) = h.rref();
    let b = h.select_cols(&pivots);
    let c = r.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
    let ct = c.transpose();
    let mid = b.transpose().mul(h).mul(&ct);
    let mid_inv = mid
        .inverse()
        .ok_or_else(|| OrkitError::Singular("rank factorization core not invertible".into()))?;
    Ok(ct.mul(&mid_inv).mul(&b.transpose()))
}

/// A(V) contained in V + im(B).
pub fn is_ab_invariant(a: &RatMat, b: &RatMat, v: &Subspace) -> bool {
    v.image(a).is_subspace_of(&v.sum(&Subspace::from_cols(b)))
}

/// The decreasing fixed-point chain V_0 = X, V_k = X ∩ A^{-1}(im B + V_{k-1})
/// whose limit is the largest subspace of X holding A(V) ⊆ V + im B.
#[derive(Clone, Debug)]
pub struct AbInvariantChain {
    /// V_0, V_1, ..., including the repeated terminal element.
    pub chain: Vec<Subspace>,
    pub limit: Subspace,
}

pub fn largest_ab_invariant_in(a: &RatMat, b: &RatMat, x: &Subspace) -> AbInvariantChain {
    let im_b = Subspace::from_cols(b);
    let mut chain = vec![x.clone()];
    loop {
        let prev = chain.last().unwrap();
        let next = x.intersect(&im_b.sum(prev).preimage(a));
        let done = next.dim() == prev.dim();
        chain.push(next.clone());
        if done {
            return AbInvariantChain { limit: next, chain };
        }
    }
}

/// A feedback F making V invariant for A + B F.  Exists exactly when V is
/// (A, B)-invariant; F vanishes on the standard complement of V.
pub fn friend(a: &RatMat, b: &RatMat, v: &Subspace) -> Result<RatMat> {
    let n = v.ambient();
    let m = b.ncols();
    if v.dim() == 0 {
        return Ok(RatMat::zeros(m, n));
    }
    let vb = v.basis();
    let stacked = vb.hstack(b);
    let av = a.mul(vb);
    let sol = stacked.solve(&av).ok_or_else(|| {
        OrkitError::Input("subspace is not controlled invariant: no feedback exists".into())
    })?;
    // A v_i = V c_i + B u_i, so F v_i = -u_i cancels the B component
    let u = sol.submatrix(v.dim(), 0, m, v.dim());
    let w = u.neg();
    let comp = v.complement_cols();
    let e = RatMat::identity(n).select_cols(&comp);
    let t = vb.hstack(&e);
    let t_inv = t
        .inverse()
        .ok_or_else(|| OrkitError::Singular("basis completion failed".into()))?;
    let wz = w.hstack(&RatMat::zeros(m, comp.len()));
    Ok(wz.mul(&t_inv))
}

/// Largest A-invariant subspace contained in the kernel of `h`
/// (the unobservable subspace of the pair (A, h)).
pub fn largest_a_invariant_in_kernel(a: &RatMat, h: &RatMat) -> Subspace {
    let closure_rows = row_closure_generation_order(h, a);
    Subspace::from_rows(&closure_rows).perp()
}

/// Smallest A-invariant subspace containing im(B) (the controllable
/// subspace of the pair (A, B)).
pub fn controllable_subspace(a: &RatMat, b: &RatMat) -> Subspace {
    a_invariant_closure(a, &Subspace::from_cols(b))
}
