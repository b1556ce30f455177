//! Trajectory computation: discrete semi-tensor recursions, the series
//! solution of the continuous quasi-dynamic equation with its initial jump,
//! RK4 integration of classical closures, and original-vs-realization
//! comparison reports.

use nalgebra::{DMatrix, DVector};

use crate::dkstp::{dk_action, pi_a, Bridge, EPS_SERIES, N_MAX};
use crate::error::{OrkitError, Result};
use crate::orsys::{LinearSystem, ORSystem, TimeKind};
use crate::xspace::DimVector;

/// Sampled trajectory.  All states after the initial jump share a dimension.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DimVector>,
    /// (y0, y(0+)) when the initial condition lived in a foreign dimension.
    pub initial_jump: Option<(DimVector, DimVector)>,
}

impl Trajectory {
    /// CSV with header `t,y1,...,yp` and a `jump` column; the pre-jump row
    /// is emitted at t = 0 flagged `pre`, the post-jump row flagged `post`.
    /// Entries carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let p = self.states.first().map_or(0, |s| s.dim());
        let mut out = String::new();
        out.push('t');
        for j in 1..=p {
            out.push_str(&format!(",y{j}"));
        }
        out.push_str(",jump\n");
        let fmt = |v: f64| format!("{v:.16e}");
        if let Some((pre, _)) = &self.initial_jump {
            out.push_str(&fmt(0.0));
            for j in 0..p {
                out.push(',');
                if j < pre.dim() {
                    out.push_str(&fmt(pre.entries()[j]));
                }
            }
            out.push_str(",pre\n");
        }
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            out.push_str(&fmt(*t));
            for j in 0..p {
                out.push(',');
                out.push_str(&fmt(s.entries()[j]));
            }
            if i == 0 && self.initial_jump.is_some() {
                out.push_str(",post\n");
            } else {
                out.push_str(",\n");
            }
        }
        out
    }

    pub fn last(&self) -> &DimVector {
        self.states.last().expect("nonempty trajectory")
    }
}

/// y(t+1) = A |x y(t): the first step projects y0 into the home dimension,
/// afterwards the recursion is the classical one with Pi_A.
pub fn sim_discrete(
    a: &DMatrix<f64>,
    y0: &DimVector,
    steps: usize,
    bridge: &Bridge,
) -> Result<Trajectory> {
    let mut states = vec![y0.clone()];
    let mut times = vec![0.0];
    if steps > 0 {
        let mut y = dk_action(a, y0, bridge)?;
        let pia = pi_a(a, bridge)?;
        for t in 1..=steps {
            times.push(t as f64);
            states.push(y.clone());
            if t < steps {
                y = DimVector::from_dvector(&pia * y.as_dvector());
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        initial_jump: None,
    })
}

/// y(t+1) = Pi_A y(t) + B u(t) with the first step bridged from y0.
pub fn sim_discrete_controlled(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    y0: &DimVector,
    u: &dyn Fn(usize) -> DVector<f64>,
    steps: usize,
    bridge: &Bridge,
) -> Result<Trajectory> {
    if b.nrows() != a.nrows() {
        return Err(OrkitError::ShapeMismatch {
            expected: format!("{} input rows", a.nrows()),
            got: format!("{}", b.nrows()),
        });
    }
    let check_u = |v: &DVector<f64>| -> Result<()> {
        if v.len() != b.ncols() {
            return Err(OrkitError::ShapeMismatch {
                expected: format!("input of dimension {}", b.ncols()),
                got: format!("{}", v.len()),
            });
        }
        Ok(())
    };
    let mut states = vec![y0.clone()];
    let mut times = vec![0.0];
    if steps > 0 {
        let u0 = u(0);
        check_u(&u0)?;
        let mut y = dk_action(a, y0, bridge)?.as_dvector() + b * u0;
        let pia = pi_a(a, bridge)?;
        for t in 1..=steps {
            times.push(t as f64);
            states.push(DimVector::from_dvector(y.clone()));
            if t < steps {
                let ut = u(t);
                check_u(&ut)?;
                y = &pia * y + b * ut;
            }
        }
    }
    Ok(Trajectory {
        times,
        states,
        initial_jump: None,
    })
}

/// phi_1(Z) = sum Z^k / (k+1)!.
fn phi1(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = z.nrows();
    let mut acc = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut fact = 1.0f64;
    for k in 1..=N_MAX {
        term = &term * z;
        fact *= (k + 1) as f64;
        let add = &term / fact;
        acc += &add;
        if add.norm() < EPS_SERIES * acc.norm().max(1.0) {
            return Ok(acc);
        }
    }
    Err(OrkitError::SeriesNotConverged(N_MAX))
}

/// Series solution of y' = A |x y from an arbitrary-dimension y0: after the
/// jump y(0+) = Psi_{m x q} y0 the flow is
/// y(t) = Psi_{m x q} y0 + t A phi_1(t Psi_{n x m} A) Psi_{n x q} y0.
pub fn sim_continuous(
    a: &DMatrix<f64>,
    y0: &DimVector,
    t_end: f64,
    dt: f64,
    bridge: &Bridge,
) -> Result<Trajectory> {
    if t_end <= 0.0 || dt <= 0.0 {
        return Err(OrkitError::Input("need T > 0 and dt > 0".into()));
    }
    let (m, n) = a.shape();
    let q = y0.dim();
    let psi_mq = bridge.matrix(m, q)?;
    let psi_nq = bridge.matrix(n, q)?;
    let psi_nm = bridge.matrix(n, m)?;
    let y_post = DimVector::from_dvector(&psi_mq * y0.as_dvector());
    let seed = &psi_nq * y0.as_dvector();
    let z0 = &psi_nm * a;
    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let y = if k == 0 {
            y_post.clone()
        } else {
            let p = phi1(&(&z0 * t))?;
            DimVector::from_dvector(y_post.as_dvector() + t * a * p * &seed)
        };
        times.push(t);
        states.push(y);
    }
    let jump = if q != m {
        Some((y0.clone(), y_post))
    } else {
        None
    };
    Ok(Trajectory {
        times,
        states,
        initial_jump: jump,
    })
}

/// Fixed-step RK4 for the classical closure y' = L y + N u(t).
pub fn sim_continuous_controlled(
    l: &DMatrix<f64>,
    n: &DMatrix<f64>,
    y0: &DVector<f64>,
    u: &dyn Fn(f64) -> DVector<f64>,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if t_end <= 0.0 || dt <= 0.0 {
        return Err(OrkitError::Input("need T > 0 and dt > 0".into()));
    }
    if l.nrows() != l.ncols() || l.nrows() != y0.len() || n.nrows() != l.nrows() {
        return Err(OrkitError::ShapeMismatch {
            expected: format!("L {0}x{0}, N {0}xm, y0 in R^{0}", y0.len()),
            got: format!("L {}x{}, N {}x{}", l.nrows(), l.ncols(), n.nrows(), n.ncols()),
        });
    }
    let rhs = |t: f64, y: &DVector<f64>| -> DVector<f64> { l * y + n * u(t) };
    let steps = (t_end / dt).round() as usize;
    let mut y = y0.clone();
    let mut times = vec![0.0];
    let mut states = vec![DimVector::from_dvector(y.clone())];
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + dt / 2.0, &(&y + (dt / 2.0) * &k1));
        let k3 = rhs(t + dt / 2.0, &(&y + (dt / 2.0) * &k2));
        let k4 = rhs(t + dt, &(&y + dt * &k3));
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        times.push(t + dt);
        states.push(DimVector::from_dvector(y.clone()));
    }
    Ok(Trajectory {
        times,
        states,
        initial_jump: None,
    })
}

/// Deviation of the realization outputs from the original outputs.
#[derive(Clone, Debug)]
pub struct CompareReport {
    /// Per original output row.
    pub max_err: Vec<f64>,
    pub rms_err: Vec<f64>,
}

impl CompareReport {
    pub fn worst(&self) -> f64 {
        self.max_err.iter().cloned().fold(0.0, f64::max)
    }
}

/// Simulate the original system from x0 and the realization from
/// observer_map x0 under the same input, then compare the original outputs
/// H x(t) with selector z(t).
pub fn compare(
    sys: &LinearSystem,
    or: &ORSystem,
    x0: &DVector<f64>,
    u: &dyn Fn(f64) -> DVector<f64>,
    t_end: f64,
    dt: f64,
) -> Result<CompareReport> {
    let a = match &or.feedback_f {
        // the feedback realization tracks the closed-loop plant
        Some(f) => sys.a.add(&sys.b.mul(f)).to_f64(),
        None => sys.a.to_f64(),
    };
    let b = sys.b.to_f64();
    let h = sys.h.to_f64();
    let l = or.l.to_f64();
    let n = or.n_mat.to_f64();
    let w = or.observer_map.to_f64();
    let sel = or.selector.to_f64();
    let z0 = &w * x0;
    let (full, red) = match sys.time {
        TimeKind::Continuous => {
            let full = sim_continuous_controlled(&a, &b, x0, u, t_end, dt)?;
            let red = sim_continuous_controlled(&l, &n, &z0, u, t_end, dt)?;
            (full, red)
        }
        TimeKind::Discrete => {
            let steps = t_end.round().max(0.0) as usize;
            let ud = |k: usize| u(k as f64);
            let full = sim_discrete_controlled(
                &a,
                &b,
                &DimVector::from_dvector(x0.clone()),
                &ud,
                steps,
                &Bridge::Projecting,
            )?;
            let red = sim_discrete_controlled(
                &l,
                &n,
                &DimVector::from_dvector(z0.clone()),
                &ud,
                steps,
                &Bridge::Projecting,
            )?;
            (full, red)
        }
    };
    let p = sys.h.nrows();
    let mut max_err = vec![0.0f64; p];
    let mut sq = vec![0.0f64; p];
    let count = full.states.len();
    for (xs, zs) in full.states.iter().zip(&red.states) {
        let y_full = &h * xs.as_dvector();
        let y_red = &sel * zs.as_dvector();
        for j in 0..p {
            let e = (y_full[j] - y_red[j]).abs();
            max_err[j] = max_err[j].max(e);
            sq[j] += e * e;
        }
    }
    let rms_err = sq.iter().map(|s| (s / count as f64).sqrt()).collect();
    Ok(CompareReport { max_err, rms_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dkstp::{dk_analytic, ext_action, AnalyticFn};
    use crate::orsys::{self, or_exact, or_extended, or_feedback};
    use crate::rat::RatMat;
    use crate::xspace;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_mat(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn discrete_zero_steps_and_square() {
        let b = Bridge::Projecting;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let y0 = DimVector::new(vec![1.0, 2.0]);
        let tr = sim_discrete(&a, &y0, 0, &b).unwrap();
        assert_eq!(tr.states.len(), 1);
        let tr = sim_discrete(&a, &y0, 3, &b).unwrap();
        // classical powers for square A
        let expect = &a * &a * &a * y0.as_dvector();
        assert!((tr.last().as_dvector() - expect).abs().max() < 1e-12);
        assert_eq!(tr.times, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn discrete_matches_stepwise_action() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(30);
        let a = rand_mat(&mut rng, 2, 3);
        let y0 = DimVector::new(vec![1.0, -1.0, 0.5, 2.0]);
        let tr = sim_discrete(&a, &y0, 5, &b).unwrap();
        let mut y = y0.clone();
        for t in 1..=5 {
            y = dk_action(&a, &y, &b).unwrap();
            assert!(
                (tr.states[t].as_dvector() - y.as_dvector()).abs().max() < 1e-12,
                "step {t}"
            );
        }
    }

    #[test]
    fn discrete_semigroup_property() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(31);
        let a = rand_mat(&mut rng, 3, 5);
        let y0 = DimVector::new(vec![1.0, 0.0, -2.0]);
        let tr = sim_discrete(&a, &y0, 7, &b).unwrap();
        let mid = tr.states[3].clone();
        let tr2 = sim_discrete(&a, &mid, 4, &b).unwrap();
        assert!((tr.last().as_dvector() - tr2.last().as_dvector()).abs().max() < 1e-12);
    }

    #[test]
    fn discrete_controlled_reductions() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(32);
        let a = rand_mat(&mut rng, 2, 3);
        let bm = rand_mat(&mut rng, 2, 1);
        let y0 = DimVector::new(vec![1.0, 2.0]);
        let zero = |_k: usize| DVector::zeros(1);
        let t1 = sim_discrete_controlled(&a, &bm, &y0, &zero, 5, &b).unwrap();
        let t2 = sim_discrete(&a, &y0, 5, &b).unwrap();
        for (x, y) in t1.states.iter().zip(&t2.states) {
            assert!((x.as_dvector() - y.as_dvector()).abs().max() < 1e-12);
        }
        // superposition
        let u1 = |k: usize| DVector::from_element(1, (k as f64).sin());
        let u2 = |k: usize| DVector::from_element(1, 0.3 * k as f64);
        let u12 = |k: usize| u1(k) + u2(k);
        let zst = DimVector::zeros(2);
        let r12 = sim_discrete_controlled(&a, &bm, &y0, &u12, 6, &b).unwrap();
        let r2 = sim_discrete_controlled(&a, &bm, &y0, &u2, 6, &b).unwrap();
        let r1z = sim_discrete_controlled(&a, &bm, &zst, &u1, 6, &b).unwrap();
        for i in 0..r12.states.len() {
            let lhs = r12.states[i].as_dvector() - r2.states[i].as_dvector();
            assert!((lhs - r1z.states[i].as_dvector()).abs().max() < 1e-10);
        }
        // dimension mismatch reported
        let bad = |_k: usize| DVector::zeros(2);
        assert!(sim_discrete_controlled(&a, &bm, &y0, &bad, 2, &b).is_err());
    }

    #[test]
    fn continuous_zero_dynamics_constant() {
        let b = Bridge::Projecting;
        let a = DMatrix::<f64>::zeros(2, 3);
        let y0 = DimVector::new(vec![1.0, 2.0, 0.0, -2.0, -1.0, -1.0]);
        let tr = sim_continuous(&a, &y0, 1.0, 0.25, &b).unwrap();
        let (pre, post) = tr.initial_jump.clone().unwrap();
        assert_eq!(pre.dim(), 6);
        assert!((post.entries()[0] - 1.0).abs() < 1e-12);
        assert!((post.entries()[1] + 4.0 / 3.0).abs() < 1e-12);
        for s in &tr.states {
            assert!((s.as_dvector() - post.as_dvector()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn continuous_square_matches_matrix_exponential() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(33);
        let a = rand_mat(&mut rng, 3, 3);
        let y0 = DimVector::new(vec![1.0, -0.5, 2.0]);
        let tr = sim_continuous(&a, &y0, 1.0, 0.1, &b).unwrap();
        assert!(tr.initial_jump.is_none());
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let e = dk_analytic(AnalyticFn::Exp, &(&a * *t), &b).unwrap();
            let expect = ext_action(&e, &y0, &b).unwrap();
            assert!(
                (s.as_dvector() - expect.as_dvector()).abs().max() < 1e-9,
                "t = {t}"
            );
        }
    }

    #[test]
    fn continuous_satisfies_defining_equation() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(34);
        let a = rand_mat(&mut rng, 2, 3);
        let y0 = DimVector::new(vec![0.7, -1.2]);
        let dt = 1e-3;
        let tr = sim_continuous(&a, &y0, 0.5, dt, &b).unwrap();
        let mut worst = 0.0f64;
        for k in 1..tr.states.len() - 1 {
            let deriv =
                (tr.states[k + 1].as_dvector() - tr.states[k - 1].as_dvector()) / (2.0 * dt);
            let rhs = dk_action(&a, &tr.states[k], &b).unwrap();
            worst = worst.max((deriv - rhs.as_dvector()).abs().max());
        }
        assert!(worst < 10.0 * dt * dt, "central difference error {worst}");
    }

    #[test]
    fn rk4_diagonal_exponentials_and_order() {
        let l = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.5]);
        let n = DMatrix::<f64>::zeros(2, 1);
        let y0 = DVector::from_vec(vec![1.0, 2.0]);
        let zero = |_t: f64| DVector::zeros(1);
        let tr = sim_continuous_controlled(&l, &n, &y0, &zero, 1.0, 1e-3).unwrap();
        let last = tr.last();
        assert!((last.entries()[0] - (-1.0f64).exp()).abs() < 1e-8);
        assert!((last.entries()[1] - 2.0 * 0.5f64.exp()).abs() < 1e-8);
        // fourth order: halving dt cuts the error by about 16
        let err = |dt: f64| {
            let tr = sim_continuous_controlled(&l, &n, &y0, &zero, 1.0, dt).unwrap();
            (tr.last().entries()[0] - (-1.0f64).exp()).abs()
        };
        let e1 = err(0.1);
        let e2 = err(0.05);
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "order ratio {ratio}");
    }

    #[test]
    fn exact_realization_tracks_original_outputs() {
        let sys = orsys::LinearSystem::new(
            RatMat::from_i64(&[
                &[0, -2, 1, -6, -9],
                &[-1, -3, 4, -11, -13],
                &[4, 1, -1, 10, 12],
                &[2, 1, -2, 7, 7],
                &[-1, 0, 1, -2, 0],
            ]),
            RatMat::from_i64(&[&[2], &[0], &[1], &[1], &[-1]]),
            RatMat::from_i64(&[&[1, -1, 1, -2, 0], &[-1, 0, 0, -1, -2]]),
            orsys::TimeKind::Continuous,
        )
        .unwrap();
        let or = or_exact(&sys).unwrap();
        let mut rng = StdRng::seed_from_u64(35);
        let x0 = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
        let u = |t: f64| DVector::from_element(1, (3.0 * t).sin() + 0.5);
        let rep = compare(&sys, &or, &x0, &u, 1.0, 1e-3).unwrap();
        assert!(rep.worst() < 1e-6, "max err {}", rep.worst());
        assert_eq!(rep.max_err.len(), 2);
        for (m, r) in rep.max_err.iter().zip(&rep.rms_err) {
            assert!(r <= m);
        }
    }

    #[test]
    fn extended_and_feedback_realizations_track_outputs() {
        let sys = orsys::LinearSystem::new(
            RatMat::from_i64(&[
                &[0, 1, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[1, 0, -1, 1, -2, 1],
                &[0, 0, 0, 0, 0, 0],
                &[0, 0, 0, 0, 1, 0],
                &[0, 0, 0, 0, 0, 0],
            ]),
            RatMat::from_i64(&[&[0], &[0], &[1], &[0], &[0], &[0]]),
            RatMat::from_i64(&[&[1, 0, 0, 0, 1, 0]]),
            orsys::TimeKind::Continuous,
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(36);
        let x0 = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let u = |t: f64| DVector::from_element(1, (2.0 * t).cos());
        let ext = or_extended(&sys).unwrap();
        let rep = compare(&sys, &ext, &x0, &u, 1.0, 1e-3).unwrap();
        assert!(rep.worst() < 1e-6, "extended err {}", rep.worst());
        let fb = or_feedback(&sys).unwrap();
        let rep = compare(&sys, &fb, &x0, &u, 1.0, 1e-3).unwrap();
        assert!(rep.worst() < 1e-6, "feedback err {}", rep.worst());
    }

    #[test]
    fn projection_realization_reports_nonzero_error() {
        // non-invariant observers make the projection closure approximate
        let sys = orsys::LinearSystem::new(
            RatMat::from_i64(&[
                &[0, 1, 0, 0, 0, 0],
                &[0, 0, 1, 0, 0, 0],
                &[1, 0, -1, 1, -2, 1],
                &[0, 0, 0, 0, 0, 0],
                &[0, 0, 0, 0, 1, 0],
                &[0, 0, 0, 0, 0, 0],
            ]),
            RatMat::from_i64(&[&[0], &[0], &[1], &[0], &[0], &[0]]),
            RatMat::from_i64(&[&[1, 0, 0, 0, 1, 0]]),
            orsys::TimeKind::Continuous,
        )
        .unwrap();
        let or = orsys::or_projection(&sys).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.5, -1.0, 0.2, 0.8, -0.3]);
        let u = |_t: f64| DVector::from_element(1, 1.0);
        let rep = compare(&sys, &or, &x0, &u, 1.0, 1e-3).unwrap();
        assert!(rep.worst() > 1e-3);
    }

    #[test]
    fn discrete_compare_exact() {
        let sys = orsys::LinearSystem::new(
            RatMat::from_i64(&[
                &[0, -2, 1, -6, -9],
                &[-1, -3, 4, -11, -13],
                &[4, 1, -1, 10, 12],
                &[2, 1, -2, 7, 7],
                &[-1, 0, 1, -2, 0],
            ]),
            RatMat::from_i64(&[&[2], &[0], &[1], &[1], &[-1]]),
            RatMat::from_i64(&[&[1, -1, 1, -2, 0], &[-1, 0, 0, -1, -2]]),
            orsys::TimeKind::Discrete,
        )
        .unwrap();
        let or = or_exact(&sys).unwrap();
        let x0 = DVector::from_vec(vec![1.0, 0.0, -1.0, 2.0, 0.5]);
        let u = |t: f64| DVector::from_element(1, if t < 3.0 { 1.0 } else { -1.0 });
        let rep = compare(&sys, &or, &x0, &u, 6.0, 1.0).unwrap();
        assert!(rep.worst() < 1e-8);
    }

    #[test]
    fn linearity_of_continuous_simulation() {
        let b = Bridge::Projecting;
        let mut rng = StdRng::seed_from_u64(37);
        let a = rand_mat(&mut rng, 2, 4);
        let y1 = DimVector::new(vec![1.0, 0.3]);
        let y2 = DimVector::new(vec![-0.5, 2.0]);
        let ysum = xspace::stp_add(&y1, &y2).unwrap();
        let t1 = sim_continuous(&a, &y1, 1.0, 0.25, &b).unwrap();
        let t2 = sim_continuous(&a, &y2, 1.0, 0.25, &b).unwrap();
        let ts = sim_continuous(&a, &ysum, 1.0, 0.25, &b).unwrap();
        for i in 0..ts.states.len() {
            let lin = t1.states[i].as_dvector() + t2.states[i].as_dvector();
            assert!((ts.states[i].as_dvector() - lin).abs().max() < 1e-8);
        }
    }

    #[test]
    fn csv_format_rows_and_jump() {
        let b = Bridge::Projecting;
        let a = DMatrix::<f64>::zeros(2, 3);
        let y0 = DimVector::new(vec![1.0, 2.0, 0.0, -2.0, -1.0, -1.0]);
        let tr = sim_continuous(&a, &y0, 1.0, 0.5, &b).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "t,y1,y2,jump");
        // pre row, post row, then two more samples
        assert_eq!(lines.len(), 1 + 1 + 3);
        assert!(lines[1].ends_with(",pre"));
        assert!(lines[2].ends_with(",post"));
        assert!(lines[1].split(',').count() == 4);
        // discrete trajectory of 5 steps serializes to 6 sample rows
        let sq = DMatrix::<f64>::identity(2, 2);
        let d = sim_discrete(&sq, &DimVector::new(vec![1.0, 0.0]), 5, &b).unwrap();
        assert_eq!(d.to_csv().trim_end().lines().count(), 7);
    }
}
