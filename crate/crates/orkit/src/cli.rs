//! Command-line front end: build realizations from system files, simulate
//! trajectories to CSV, run verification checks, compare a realization
//! against its original system, and replay the bundled reference examples.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 normal mathematical
//! absence (for example `build exact` when no exact realization exists).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde_json::json;

use crate::dkstp::{cayley_hamilton_residual, Bridge};
use crate::error::{OrkitError, Result};
use crate::io::{self, read_system, write_system, SystemFile};
use crate::nonlin::{
    closure_fg, invariant_codistribution_iteration, is_invariant_exact_codistribution,
    or_extended_nl, NlCertificate, PolyAffineSystem,
};
use crate::orsys::{
    ddp_check, or_exact, or_extended, or_feedback, or_projection, or_pseudoinverse, or_singular,
    Exactness, LinearSystem, ORSystem, OrKind, TimeKind,
};
use crate::poly::Poly;
use crate::rat::{Rat, RatMat};
use num::Zero;
use crate::sim::{
    compare, sim_continuous_controlled, sim_discrete_controlled, Trajectory,
};
use crate::subspace::{
    friend, largest_ab_invariant_in, row_closure_generation_order, row_invariance_certificate,
    Subspace,
};
use crate::xspace::{DimVector, EPS_NUM};

#[derive(Parser)]
#[command(
    name = "orkit",
    version,
    about = "construct, verify, and simulate observer-based realizations of control systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuildKind {
    Projection,
    Pseudoinverse,
    Exact,
    Extended,
    Feedback,
    Singular,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BridgeArg {
    Projecting,
    Default,
    Pseudoinverse,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckWhat {
    AInvariant,
    AbInvariant,
    Closure,
    Cayley,
    Ddp,
    NlInvariant,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct a realization from a system file.
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Bridge used by the approximate constructions.
        #[arg(long, value_enum)]
        bridge: Option<BridgeArg>,
        /// Feedback polynomials for polynomial systems, one per input,
        /// separated by semicolons.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// Simulate a system or realization file and emit a CSV trajectory.
    Sim {
        #[arg(short, long)]
        input: PathBuf,
        /// Input signal: zero, step, sine, or csv:<path>.
        #[arg(long, default_value = "zero")]
        u: String,
        /// Final time (continuous) or step count (discrete).
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Step count for discrete systems; defaults to the rounded final time.
        #[arg(long)]
        steps: Option<usize>,
        /// Comma-separated initial state; defaults to zero.
        #[arg(long)]
        x0: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a verification and print a JSON report (stdout) plus a summary
    /// (stderr).
    Check {
        #[arg(value_enum)]
        what: CheckWhat,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// Simulate a system and a realization under the same input and report
    /// the per-output deviation.
    Compare {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        realization: PathBuf,
        #[arg(long, default_value = "zero")]
        u: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        x0: Option<String>,
    },
    /// Replay the bundled reference examples and report PASS/ERRATUM/FAIL.
    Repro {
        /// Only run examples whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Count documented errata as failures.
        #[arg(long = "strict-paper")]
        strict: bool,
    },
}

/// Numeric tolerance; ORKIT_TOL overrides the default.
fn tol() -> f64 {
    std::env::var("ORKIT_TOL")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|t: &f64| *t > 0.0)
        .unwrap_or(EPS_NUM)
}

fn fmt_mat(m: &RatMat) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cells: Vec<String> = m.row(i).iter().map(Rat::to_string).collect();
            cells.join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

fn parse_x0(spec: &Option<String>, dim: usize) -> Result<DVector<f64>> {
    match spec {
        None => Ok(DVector::zeros(dim)),
        Some(s) => {
            let vals: std::result::Result<Vec<f64>, _> =
                s.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|_| {
                OrkitError::Input(format!("x0 must be comma-separated numbers, got {s:?}"))
            })?;
            Ok(DVector::from_vec(vals))
        }
    }
}

/// Piecewise-constant signal from a CSV file with rows `t,u1,...,um`.
struct CsvSignal {
    rows: Vec<(f64, DVector<f64>)>,
}

impl CsvSignal {
    fn load(path: &str, m: usize) -> Result<CsvSignal> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OrkitError::Input(format!("cannot read {path}: {e}")))?;
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with('t')) {
                continue;
            }
            let cells: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let cells = cells.map_err(|_| {
                OrkitError::Input(format!("input CSV line {}: non-numeric cell", ln + 1))
            })?;
            if cells.len() != m + 1 {
                return Err(OrkitError::Input(format!(
                    "input CSV line {}: expected {} columns (t plus {m} channels), got {}",
                    ln + 1,
                    m + 1,
                    cells.len()
                )));
            }
            rows.push((cells[0], DVector::from_vec(cells[1..].to_vec())));
        }
        if rows.is_empty() {
            return Err(OrkitError::Input(format!("input CSV {path} has no data rows")));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(CsvSignal { rows })
    }

    fn at(&self, t: f64) -> DVector<f64> {
        let mut cur = self.rows[0].1.clone();
        for (rt, v) in &self.rows {
            if *rt <= t {
                cur = v.clone();
            } else {
                break;
            }
        }
        cur
    }
}

fn make_u(spec: &str, m: usize) -> Result<Box<dyn Fn(f64) -> DVector<f64>>> {
    if let Some(path) = spec.strip_prefix("csv:") {
        let sig = CsvSignal::load(path, m)?;
        return Ok(Box::new(move |t| sig.at(t)));
    }
    match spec {
        "zero" => Ok(Box::new(move |_| DVector::zeros(m))),
        "step" => Ok(Box::new(move |_| DVector::from_element(m, 1.0))),
        "sine" => Ok(Box::new(move |t: f64| DVector::from_element(m, t.sin()))),
        other => Err(OrkitError::Input(format!(
            "unknown input signal {other:?}; expected zero, step, sine, or csv:<path>"
        ))),
    }
}

/// Coefficient rows when every polynomial is homogeneous linear.
fn linear_rows(polys: &[Poly], nvars: usize) -> Option<RatMat> {
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        if p.degree() > 1 || !p.constant_term().is_zero() {
            return None;
        }
        let mut row = vec![Rat::from_integer(0.into()); nvars];
        for (e, c) in p.terms() {
            let i = e.iter().position(|&k| k == 1)?;
            row[i] = c.clone();
        }
        rows.push(row);
    }
    Some(RatMat::from_rows(rows))
}

fn parse_alpha(spec: &Option<String>, sys: &PolyAffineSystem) -> Result<Option<Vec<Poly>>> {
    let Some(s) = spec else { return Ok(None) };
    let polys: Result<Vec<Poly>> = s
        .split(';')
        .map(|t| Poly::parse(t.trim(), sys.nvars()))
        .collect();
    let polys = polys?;
    if polys.len() != sys.g.len() {
        return Err(OrkitError::Input(format!(
            "alpha needs {} polynomial(s), got {}",
            sys.g.len(),
            polys.len()
        )));
    }
    Ok(Some(polys))
}

/// Outcome of a command: exit code 0 or 2 with all output already printed.
enum Done {
    Ok,
    Absent,
}

fn report_or(or: &ORSystem, sys: Option<&LinearSystem>) {
    println!("kind: {}", io::kind_to_str(or.kind));
    println!("order: {}", or.order());
    println!(
        "exactness: {}",
        match or.exactness {
            Exactness::Exact => "exact",
            Exactness::Approximate => "approximate",
        }
    );
    println!("dynamics L: {}", fmt_mat(&or.l));
    println!("input map N: {}", fmt_mat(&or.n_mat));
    if let Some(f) = &or.feedback_f {
        println!("feedback F: {}", fmt_mat(f));
    }
    if let Some(sys) = sys {
        let residual_zero = or.certificate_residual(sys).is_zero();
        println!("certificate residual zero: {residual_zero}");
    }
}

fn nl_realization_to_or(
    states: &[Poly],
    cert: &NlCertificate,
    nvars: usize,
    p: usize,
) -> Option<ORSystem> {
    let l = cert.constant_xi0()?;
    // input terms must be constant offsets for a linear realization
    if cert
        .xi_inputs
        .iter()
        .any(|rows| rows.iter().flatten().any(|q| !q.is_zero()))
    {
        return None;
    }
    let observer_map = linear_rows(states, nvars)?;
    let k = states.len();
    let n_mat = RatMat::from_fn(k, cert.input_offsets.len(), |j, i| {
        cert.input_offsets[i][j].clone()
    });
    let selector = RatMat::from_fn(p, k, |i, j| {
        if i == j {
            Rat::from_integer(1.into())
        } else {
            Rat::from_integer(0.into())
        }
    });
    Some(ORSystem {
        kind: OrKind::Extended,
        l,
        n_mat,
        observer_map,
        selector,
        feedback_f: None,
        exactness: Exactness::Exact,
        time: TimeKind::Continuous,
    })
}

fn cmd_build(
    kind: BuildKind,
    input: &PathBuf,
    output: &Option<PathBuf>,
    bridge: Option<BridgeArg>,
    alpha: &Option<String>,
) -> Result<Done> {
    let file = read_system(input)?;
    let (or, origin): (ORSystem, Option<LinearSystem>) = match (&file, kind) {
        (SystemFile::Linear { sys, .. }, BuildKind::Projection) => {
            let or = match bridge {
                Some(BridgeArg::Pseudoinverse) => or_pseudoinverse(sys)?,
                _ => or_projection(sys)?,
            };
            (or, Some(sys.clone()))
        }
        (SystemFile::Linear { sys, .. }, BuildKind::Pseudoinverse) => {
            (or_pseudoinverse(sys)?, Some(sys.clone()))
        }
        (SystemFile::Linear { sys, .. }, BuildKind::Exact) => match or_exact(sys) {
            Some(or) => (or, Some(sys.clone())),
            None => {
                println!(
                    "the observer rows do not span an invariant subspace; \
                     no exact realization of this order exists. Try `build extended`."
                );
                return Ok(Done::Absent);
            }
        },
        (SystemFile::Linear { sys, .. }, BuildKind::Extended) => {
            (or_extended(sys)?, Some(sys.clone()))
        }
        (SystemFile::Linear { sys, .. }, BuildKind::Feedback) => {
            (or_feedback(sys)?, Some(sys.clone()))
        }
        (SystemFile::Singular(sys), BuildKind::Singular) => (or_singular(sys)?, None),
        (SystemFile::PolyAffine(sys), BuildKind::Exact) => {
            let alpha = parse_alpha(alpha, sys)?;
            let h = sys.h.clone();
            match is_invariant_exact_codistribution(sys, &h, alpha.as_deref())? {
                Some(cert) => match nl_realization_to_or(&h, &cert, sys.nvars(), sys.h.len()) {
                    Some(or) => (or, None),
                    None => {
                        print_nl_realization(&h, &cert);
                        return Ok(Done::Ok);
                    }
                },
                None => {
                    println!(
                        "the observers admit no invariance certificate; try `build extended`."
                    );
                    return Ok(Done::Absent);
                }
            }
        }
        (SystemFile::PolyAffine(sys), BuildKind::Extended) => {
            let alpha = parse_alpha(alpha, sys)?;
            let rel = match or_extended_nl(sys, alpha.as_deref()) {
                Ok(rel) => rel,
                Err(OrkitError::DegreeOverflow(_)) | Err(OrkitError::BoundExceeded(_)) => {
                    eprintln!(
                        "the observer closure does not stabilize within the degree and \
                         size bounds; no finite extended realization was found. A \
                         stabilizing --alpha feedback may close the loop."
                    );
                    return Ok(Done::Absent);
                }
                Err(e) => return Err(e),
            };
            match nl_realization_to_or(&rel.states, &rel.certificate, sys.nvars(), sys.h.len()) {
                Some(or) => (or, None),
                None => {
                    print_nl_realization(&rel.states, &rel.certificate);
                    return Ok(Done::Ok);
                }
            }
        }
        _ => {
            return Err(OrkitError::Input(
                "this system type does not support the requested construction".into(),
            ))
        }
    };
    report_or(&or, origin.as_ref());
    if let Some(out) = output {
        write_system(out, &SystemFile::Or(or))?;
        println!("wrote {}", out.display());
    }
    Ok(Done::Ok)
}

fn print_nl_realization(states: &[Poly], cert: &NlCertificate) {
    println!("state functions:");
    for (k, s) in states.iter().enumerate() {
        println!("  z{} = {}", k + 1, s);
    }
    println!("drift rows (coefficients over the state functions):");
    for row in &cert.xi0 {
        let cells: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        println!("  [{}]", cells.join(", "));
    }
    for (i, (rows, offs)) in cert.xi_inputs.iter().zip(&cert.input_offsets).enumerate() {
        println!("input {} rows and offsets:", i + 1);
        for (row, off) in rows.iter().zip(offs) {
            let cells: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            println!("  [{}] + {}", cells.join(", "), off);
        }
    }
}

fn output_trajectory(tr: &Trajectory, output: &Option<PathBuf>) -> Result<()> {
    let csv = tr.to_csv();
    match output {
        Some(path) => {
            std::fs::write(path, &csv)
                .map_err(|e| OrkitError::Input(format!("cannot write {}: {e}", path.display())))?;
            let max_norm = tr
                .states
                .iter()
                .map(|s| crate::xspace::norm(s))
                .fold(0.0, f64::max);
            let last = tr.last();
            println!("wrote {} rows to {}", tr.times.len(), path.display());
            println!("final state: {:?}", last.entries());
            println!("max norm: {max_norm:.6e}");
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn map_states(tr: &Trajectory, h: &nalgebra::DMatrix<f64>) -> Trajectory {
    Trajectory {
        times: tr.times.clone(),
        states: tr
            .states
            .iter()
            .map(|s| DimVector::from_dvector(h * s.as_dvector()))
            .collect(),
        initial_jump: None,
    }
}

fn cmd_sim(
    input: &PathBuf,
    u_spec: &str,
    t_end: f64,
    dt: f64,
    steps: Option<usize>,
    x0: &Option<String>,
    output: &Option<PathBuf>,
) -> Result<Done> {
    let file = read_system(input)?;
    let (a, b, out_map, time) = match &file {
        SystemFile::Linear { sys, .. } => (
            sys.a.to_f64(),
            sys.b.to_f64(),
            Some(sys.h.to_f64()),
            sys.time,
        ),
        SystemFile::Or(or) => (or.l.to_f64(), or.n_mat.to_f64(), None, or.time),
        _ => {
            return Err(OrkitError::Input(
                "simulation expects a linear system or a realization file".into(),
            ))
        }
    };
    let x0 = parse_x0(x0, a.nrows())?;
    // A realization accepts a plant-dimension initial state by projecting it
    // into the realization's home; the jump is recorded in the CSV.
    let (x0, jump) = if x0.len() != a.nrows() {
        if !matches!(file, SystemFile::Or(_)) {
            return Err(OrkitError::ShapeMismatch {
                expected: format!("initial state of dimension {}", a.nrows()),
                got: format!("{}", x0.len()),
            });
        }
        let pre = DimVector::from_dvector(x0);
        let post = crate::xspace::project(&pre, a.nrows())?;
        (post.as_dvector().clone(), Some((pre, post)))
    } else {
        (x0, None)
    };
    let u = make_u(u_spec, b.ncols())?;
    let tr = match time {
        TimeKind::Continuous => sim_continuous_controlled(&a, &b, &x0, &*u, t_end, dt)?,
        TimeKind::Discrete => {
            let n_steps = steps.unwrap_or_else(|| t_end.round().max(0.0) as usize);
            let ud = |k: usize| u(k as f64);
            sim_discrete_controlled(
                &a,
                &b,
                &DimVector::from_dvector(x0.clone()),
                &ud,
                n_steps,
                &Bridge::Projecting,
            )?
        }
    };
    let mut tr = match &out_map {
        Some(h) => map_states(&tr, h),
        None => tr,
    };
    if jump.is_some() {
        tr.initial_jump = jump;
    }
    output_trajectory(&tr, output)?;
    Ok(Done::Ok)
}

fn cmd_check(what: CheckWhat, input: &PathBuf, alpha: &Option<String>) -> Result<Done> {
    let file = read_system(input)?;
    let report = match (what, &file) {
        (CheckWhat::AInvariant, SystemFile::Linear { sys, .. }) => {
            let cert = row_invariance_certificate(&sys.h, &sys.a);
            let invariant = cert.is_exact();
            eprintln!(
                "observer rows {} an invariant subspace under the dynamics",
                if invariant { "span" } else { "do not span" }
            );
            json!({
                "check": "a-invariant",
                "invariant": invariant,
                "xi": io::mat_to_json(&cert.xi),
                "residual_zero": invariant,
            })
        }
        (CheckWhat::AbInvariant, SystemFile::Linear { sys, .. }) => {
            let ker = Subspace::from_rows(&sys.h).perp();
            let chain = largest_ab_invariant_in(&sys.a, &sys.b, &ker);
            let dims: Vec<usize> = chain.chain.iter().map(Subspace::dim).collect();
            let fr = friend(&sys.a, &sys.b, &chain.limit).ok();
            eprintln!(
                "largest controlled-invariant subspace in the output kernel has dimension {}",
                chain.limit.dim()
            );
            if let Some(f) = &fr {
                eprintln!("friend feedback: {}", fmt_mat(f));
            }
            json!({
                "check": "ab-invariant",
                "chain_dims": dims,
                "basis": io::mat_to_json(chain.limit.basis()),
                "friend": fr.as_ref().map(io::mat_to_json),
            })
        }
        (CheckWhat::Closure, SystemFile::Linear { sys, .. }) => {
            let rows = row_closure_generation_order(&sys.h, &sys.a);
            eprintln!(
                "invariant closure of the observer rows has dimension {}",
                rows.nrows()
            );
            json!({
                "check": "closure",
                "dimension": rows.nrows(),
                "rows": io::mat_to_json(&rows),
            })
        }
        (CheckWhat::Closure, SystemFile::PolyAffine(sys)) => {
            let alpha = parse_alpha(alpha, sys)?;
            let states = match closure_fg(sys, alpha.as_deref()) {
                Ok(states) => states,
                Err(OrkitError::DegreeOverflow(_)) | Err(OrkitError::BoundExceeded(_)) => {
                    eprintln!(
                        "the observer closure does not stabilize within the degree and \
                         size bounds"
                    );
                    return Ok(Done::Absent);
                }
                Err(e) => return Err(e),
            };
            eprintln!("closure of the observer functions has {} generators", states.len());
            json!({
                "check": "closure",
                "dimension": states.len(),
                "states": states.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            })
        }
        (CheckWhat::Cayley, SystemFile::Linear { sys, .. }) => {
            if !sys.a.is_square() {
                return Err(OrkitError::Input("cayley check needs a square matrix".into()));
            }
            let res = cayley_hamilton_residual(&sys.a.to_f64(), &Bridge::Projecting)?;
            let ok = res < tol();
            eprintln!(
                "characteristic-polynomial identity residual {res:.3e} ({} tolerance {:.1e})",
                if ok { "within" } else { "exceeds" },
                tol()
            );
            json!({ "check": "cayley", "residual": res, "tol": tol(), "ok": ok })
        }
        (CheckWhat::Ddp, SystemFile::Linear { sys, disturbances }) => {
            let e = disturbances.as_ref().ok_or_else(|| {
                OrkitError::Input("ddp check needs a \"disturbances\" matrix in the file".into())
            })?;
            let cols: Vec<RatMat> = (0..e.ncols())
                .map(|j| e.select_cols(&[j]))
                .collect();
            let rep = ddp_check(sys, &cols);
            eprintln!(
                "disturbance decoupling {}: {} of {} disturbance directions inside the \
                 largest controlled-invariant subspace (dimension {})",
                if rep.decoupled { "solvable" } else { "not solvable" },
                rep.member.iter().filter(|&&m| m).count(),
                rep.member.len(),
                rep.invariant_dim
            );
            json!({
                "check": "ddp",
                "decoupled": rep.decoupled,
                "member": rep.member,
                "invariant_dim": rep.invariant_dim,
            })
        }
        (CheckWhat::NlInvariant, SystemFile::PolyAffine(sys)) => {
            let alpha = parse_alpha(alpha, sys)?;
            let h = sys.h.clone();
            let cert = is_invariant_exact_codistribution(sys, &h, alpha.as_deref())?;
            let omega = invariant_codistribution_iteration(sys)?;
            eprintln!(
                "observers {} an invariance certificate; codistribution iteration \
                 stabilizes at dimension {}",
                if cert.is_some() { "admit" } else { "do not admit" },
                omega.limit.len()
            );
            json!({
                "check": "nl-invariant",
                "certificate": cert.is_some(),
                "xi0": cert.map(|c| c
                    .xi0
                    .iter()
                    .map(|row| row.iter().map(|p| p.to_string()).collect::<Vec<_>>())
                    .collect::<Vec<_>>()),
                "omega_chain_dims": omega.chain.iter().map(Vec::len).collect::<Vec<_>>(),
            })
        }
        _ => {
            return Err(OrkitError::Input(
                "this check does not apply to the given system type".into(),
            ))
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("valid json"));
    Ok(Done::Ok)
}

fn cmd_compare(
    input: &PathBuf,
    realization: &PathBuf,
    u_spec: &str,
    t_end: f64,
    dt: f64,
    x0: &Option<String>,
) -> Result<Done> {
    let SystemFile::Linear { sys, .. } = read_system(input)? else {
        return Err(OrkitError::Input("compare expects a linear system file".into()));
    };
    let SystemFile::Or(or) = read_system(realization)? else {
        return Err(OrkitError::Input("compare expects a realization file".into()));
    };
    let x0 = parse_x0(x0, sys.state_dim())?;
    if x0.len() != sys.state_dim() {
        return Err(OrkitError::ShapeMismatch {
            expected: format!("initial state of dimension {}", sys.state_dim()),
            got: format!("{}", x0.len()),
        });
    }
    let u = make_u(u_spec, sys.input_dim())?;
    let rep = compare(&sys, &or, &x0, &*u, t_end, dt)?;
    for (j, (mx, rms)) in rep.max_err.iter().zip(&rep.rms_err).enumerate() {
        println!("output y{}: max_err {mx:.6e}, rms_err {rms:.6e}", j + 1);
    }
    println!("worst max_err: {:.6e}", rep.worst());
    if rep.worst() < tol().max(1e-6) {
        println!("realization tracks the original outputs within tolerance");
    }
    Ok(Done::Ok)
}

fn cmd_repro(filter: Option<&str>, strict: bool) -> Result<Done> {
    let report = crate::repro::run(filter);
    print!("{}", report.render());
    if report.failed(strict) {
        Err(OrkitError::Input("reference reproduction failed".into()))
    } else {
        Ok(Done::Ok)
    }
}

/// Run the CLI with the given arguments; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.cmd {
        Cmd::Build {
            kind,
            input,
            output,
            bridge,
            alpha,
        } => cmd_build(*kind, input, output, *bridge, alpha),
        Cmd::Sim {
            input,
            u,
            t,
            dt,
            steps,
            x0,
            output,
        } => cmd_sim(input, u, *t, *dt, *steps, x0, output),
        Cmd::Check { what, input, alpha } => cmd_check(*what, input, alpha),
        Cmd::Compare {
            input,
            realization,
            u,
            t,
            dt,
            x0,
        } => cmd_compare(input, realization, u, *t, *dt, x0),
        Cmd::Repro { filter, strict } => cmd_repro(filter.as_deref(), *strict),
    };
    match outcome {
        Ok(Done::Ok) => 0,
        Ok(Done::Absent) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
