//! Verification harness for the main inequalities, the twisted-soliton
//! saturation residual, and the monotonicity corollary.
//!
//! At smooth pairs (unique minimizer, non-conjugate endpoints) the checks
//! are direct evaluations:
//!
//! ineq1 = ∂ₛL + ∂ₜL − 2□L                      (must be ≥ −tol)
//! ineq2 = 2□L − ¼|∇ₚL|² + ¼|∇_qL|² + R_{g_s}(p) − R_{g_t}(q)   (must be ≤ +tol)
//!
//! ineq2 is the elliptic inequality routed through the gradient-norm
//! identities |∇ₚL|² = 4|T|²(s), |∇_qL|² = 4|T|²(t); at smooth points it is
//! numerically tied to ineq1 through those identities. The combination
//! 2□L + |∇ₚL|² − |∇_qL|² + R_{g_t}(q) − R_{g_s}(p) is also evaluated and
//! reported (`ineq2_displayed`) but never asserted: it fails on the
//! shrinking sphere near coincident endpoints and is not supported by the
//! Hessian-estimate derivation.
//!
//! Pairs where several minimizers are detected, the endpoints are conjugate,
//! or the solver fails are reported as skipped with a reason, never dropped.

use crate::flows::sample_window;
use crate::geom::{eval_geometry, MetricFamily, Point, TangentVector};
use crate::lfunc::{
    distance_with, h_term, hessian_analysis, hessian_from_geodesic, ldata_from_geodesic,
    orthonormal_basis, EndpointPair, HessianAnalysis, LData,
};
use crate::lgeo::{solve_bvp_warm, solve_bvp_with, transport, BvpOptions, LGeodesic};
use crate::linalg::{norm2, SquareMatrix};
use crate::opt::minimize_box;
use crate::rng::Rng;
use crate::{Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Why a pair was excluded from assertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    Multiplicity,
    Conjugacy,
    SolverFailure,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::Multiplicity => "multiplicity",
            SkipReason::Conjugacy => "conjugacy",
            SkipReason::SolverFailure => "solver_failure",
        }
    }
}

/// Residuals of the main inequalities at one endpoint pair. All numeric
/// fields are NaN when `skipped` is set.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub pair: EndpointPair,
    pub skipped: Option<SkipReason>,
    pub l_value: f64,
    pub dl_ds: f64,
    pub dl_dt: f64,
    pub grad_p_sq: f64,
    pub grad_q_sq: f64,
    pub r_p: f64,
    pub r_q: f64,
    pub box_l: f64,
    /// ∂ₛL + ∂ₜL − 2□L; the parabolic inequality asks ineq1 ≥ −tol.
    pub ineq1: f64,
    /// Gradient-norm route; the elliptic inequality asks ineq2 ≤ +tol.
    pub ineq2: f64,
    /// The combination displayed in the source theorem, reported only.
    pub ineq2_displayed: f64,
    /// Twisted-soliton residual: max |Q(Jᵢ,Jⱼ) + Ric_p(eᵢ,eⱼ) − Ric_q(∥eᵢ,∥eⱼ)|.
    pub saturation: f64,
    pub el_residual: f64,
}

impl InequalityReport {
    fn skipped(pair: EndpointPair, why: SkipReason) -> Self {
        InequalityReport {
            pair,
            skipped: Some(why),
            l_value: f64::NAN,
            dl_ds: f64::NAN,
            dl_dt: f64::NAN,
            grad_p_sq: f64::NAN,
            grad_q_sq: f64::NAN,
            r_p: f64::NAN,
            r_q: f64::NAN,
            box_l: f64::NAN,
            ineq1: f64::NAN,
            ineq2: f64::NAN,
            ineq2_displayed: f64::NAN,
            saturation: f64::NAN,
            el_residual: f64::NAN,
        }
    }

    /// Both asserted inequalities hold within `tol` (false when skipped).
    pub fn passes(&self, tol: f64) -> bool {
        self.skipped.is_none() && self.ineq1 >= -tol && self.ineq2 <= tol
    }
}

fn skip_reason(e: &Error) -> SkipReason {
    match e {
        Error::Multiplicity => SkipReason::Multiplicity,
        Error::ConjugatePoints => SkipReason::Conjugacy,
        _ => SkipReason::SolverFailure,
    }
}

/// Twisted-soliton residual matrix from a shared Hessian analysis:
/// B_ij = Q(Jᵢ,Jⱼ) + Ric_p(eᵢ,eⱼ) − Ric_q(∥eᵢ,∥eⱼ) over a g_s-orthonormal
/// basis {eᵢ}; the soliton equation is B = 0.
fn saturation_from_analysis(
    m: &MetricFamily,
    geo: &LGeodesic,
    analysis: &HessianAnalysis,
) -> Result<SquareMatrix<f64>> {
    let c = &geo.curve;
    let n = m.dim;
    let p = Point::new(c.position(c.s()));
    let q = Point::new(c.position(c.t()));
    let geom_p = eval_geometry(m, &p, c.s())?;
    let geom_q = eval_geometry(m, &q, c.t())?;
    let mut b = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let val = analysis.q_matrix.at(i, j)
                + geom_p.ricci.bilinear(&analysis.basis[i], &analysis.basis[j])
                - geom_q
                    .ricci
                    .bilinear(&analysis.transported[i], &analysis.transported[j]);
            *b.at_mut(i, j) = val;
            *b.at_mut(j, i) = val;
        }
    }
    Ok(b)
}

/// Twisted-soliton residual matrix along a solved minimizer.
pub fn saturation_matrix(m: &MetricFamily, geo: &LGeodesic) -> Result<SquareMatrix<f64>> {
    let analysis = hessian_analysis(m, geo, None)?;
    saturation_from_analysis(m, geo, &analysis)
}

/// Max absolute entry of the twisted-soliton residual at an endpoint pair.
pub fn saturation_residual(m: &MetricFamily, e: &EndpointPair) -> Result<f64> {
    saturation_residual_with(m, e, &BvpOptions::default())
}

pub fn saturation_residual_with(
    m: &MetricFamily,
    e: &EndpointPair,
    opts: &BvpOptions,
) -> Result<f64> {
    let geo = solve_bvp_with(m, &e.p, e.s, &e.q, e.t, opts)?;
    Ok(saturation_matrix(m, &geo)?.max_abs())
}

/// Evaluate both inequalities and the saturation residual at one pair.
/// Failures become skip reasons, not errors.
pub fn check_inequalities(m: &MetricFamily, e: &EndpointPair, _tol: f64) -> InequalityReport {
    check_inequalities_with(m, e, &BvpOptions::default())
}

pub fn check_inequalities_with(
    m: &MetricFamily,
    e: &EndpointPair,
    opts: &BvpOptions,
) -> InequalityReport {
    let data = match distance_with(m, e, opts) {
        Ok(d) => d,
        Err(err) => return InequalityReport::skipped(e.clone(), skip_reason(&err)),
    };
    if data.geodesic.multiplicity_flag {
        return InequalityReport::skipped(e.clone(), SkipReason::Multiplicity);
    }
    // One shared analysis serves both the □ trace and the soliton residual.
    let analysis = match hessian_analysis(m, &data.geodesic, None) {
        Ok(a) => a,
        Err(err) => return InequalityReport::skipped(e.clone(), skip_reason(&err)),
    };
    let box_l = analysis.box_l;
    let saturation = match saturation_from_analysis(m, &data.geodesic, &analysis) {
        Ok(mat) => mat.max_abs(),
        Err(err) => return InequalityReport::skipped(e.clone(), skip_reason(&err)),
    };

    let geom_p = eval_geometry(m, &e.p, e.s).expect("pair in domain");
    let geom_q = eval_geometry(m, &e.q, e.t).expect("pair in domain");
    let gp2 = data.grad_p_norm_sq(m);
    let gq2 = data.grad_q_norm_sq(m);
    let (r_p, r_q) = (geom_p.scalar, geom_q.scalar);

    let ineq1 = data.dl_ds + data.dl_dt - 2.0 * box_l;
    let ineq2 = 2.0 * box_l - 0.25 * gp2 + 0.25 * gq2 + r_p - r_q;
    let ineq2_displayed = 2.0 * box_l + gp2 - gq2 + r_q - r_p;

    InequalityReport {
        pair: e.clone(),
        skipped: None,
        l_value: data.value,
        dl_ds: data.dl_ds,
        dl_dt: data.dl_dt,
        grad_p_sq: gp2,
        grad_q_sq: gq2,
        r_p,
        r_q,
        box_l,
        ineq1,
        ineq2,
        ineq2_displayed,
        saturation,
        el_residual: data.geodesic.el_residual,
    }
}

/// Sampling description for the monotonicity grid.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Random endpoint pairs sampled per time step.
    pub pairs_per_step: usize,
    /// Projected-gradient descent iterations refining the grid minimum.
    pub descent_iters: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            pairs_per_step: 24,
            descent_iters: 120,
            seed: 1,
        }
    }
}

/// inf L((·,tᵢ),(·,tᵢ+A)) estimates over a seeded grid plus local descent.
#[derive(Debug, Clone)]
pub struct MonotonicityTrace {
    pub offset: f64,
    pub times: Vec<f64>,
    pub inf_values: Vec<f64>,
    /// Fraction of grid evaluations that failed to solve, per time step.
    pub skipped_fraction: Vec<f64>,
    pub grid_spec: String,
}

impl MonotonicityTrace {
    /// Largest decrease between consecutive steps (0 for a monotone trace).
    pub fn max_decrease(&self) -> f64 {
        let mut worst = 0.0f64;
        for w in self.inf_values.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
        worst
    }
}

/// Estimate inf over (M×{tᵢ}) × (M×{tᵢ+A}) of L for each listed time.
pub fn monotonicity_scan(
    m: &MetricFamily,
    offset: f64,
    times: &[f64],
    grid: &GridSpec,
    seed: u64,
) -> Result<MonotonicityTrace> {
    if !(offset > 0.0) {
        return Err(Error::InvalidTimes {
            s: 0.0,
            t: offset,
        });
    }
    for &t0 in times {
        if !m.contains_time(t0) || !m.contains_time(t0 + offset) {
            return Err(Error::InvalidTimes {
                s: t0,
                t: t0 + offset,
            });
        }
    }
    let (boxes, _) = sample_window(m);
    let n = m.dim;
    let scan_opts = BvpOptions {
        starts: 4,
        ..BvpOptions::default()
    };

    let mut inf_values = Vec::with_capacity(times.len());
    let mut skipped_fraction = Vec::with_capacity(times.len());
    let master = Rng::new(seed ^ grid.seed.rotate_left(17));

    for (step, &t0) in times.iter().enumerate() {
        let t1 = t0 + offset;
        let mut rng = master.fork(step as u64);
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut failures = 0usize;
        for _ in 0..grid.pairs_per_step {
            let p: Vec<f64> = boxes.iter().map(|&(lo, hi)| rng.range(lo, hi)).collect();
            let q: Vec<f64> = boxes.iter().map(|&(lo, hi)| rng.range(lo, hi)).collect();
            match solve_bvp_with(m, &Point::new(p.clone()), t0, &Point::new(q.clone()), t1, &scan_opts)
            {
                Ok(geo) => {
                    if best.as_ref().map_or(true, |(l, _, _)| geo.lagrangian < *l) {
                        best = Some((geo.lagrangian, p, q));
                    }
                }
                Err(_) => failures += 1,
            }
        }
        skipped_fraction.push(failures as f64 / grid.pairs_per_step as f64);
        let (grid_best, p0, q0) = best.ok_or(Error::BvpFailure {
            starts: grid.pairs_per_step,
            converged: 0,
            best_miss: f64::NAN,
        })?;

        // Local descent in (p, q) inside the sampling box, warm-starting each
        // re-solve from the previous minimizer's initial velocity.
        let mut x0: Vec<f64> = p0.clone();
        x0.extend_from_slice(&q0);
        let lo: Vec<f64> = boxes.iter().chain(boxes.iter()).map(|b| b.0).collect();
        let hi: Vec<f64> = boxes.iter().chain(boxes.iter()).map(|b| b.1).collect();
        let mut warm: Option<Vec<f64>> = None;
        let fg = |x: &[f64], g: &mut [f64]| -> f64 {
            let p = Point::new(x[..n].to_vec());
            let q = Point::new(x[n..].to_vec());
            let solved = match &warm {
                Some(v0) => solve_bvp_warm(m, &p, t0, &q, t1, v0, &scan_opts)
                    .or_else(|_| solve_bvp_with(m, &p, t0, &q, t1, &scan_opts)),
                None => solve_bvp_with(m, &p, t0, &q, t1, &scan_opts),
            };
            match solved {
                Ok(geo) => {
                    warm = Some(geo.initial_velocity.components.clone());
                    let data = ldata_from_geodesic(
                        m,
                        &EndpointPair::new(p, t0, q, t1),
                        geo,
                    );
                    // Coordinate partials are the lowered gradients.
                    let gs = eval_geometry(m, &data.grad_p.base, t0).expect("in domain");
                    let gt = eval_geometry(m, &data.grad_q.base, t1).expect("in domain");
                    let dp = gs.g.mul_vec(&data.grad_p.components);
                    let dq = gt.g.mul_vec(&data.grad_q.components);
                    g[..n].copy_from_slice(&dp);
                    g[n..].copy_from_slice(&dq);
                    data.value
                }
                Err(_) => {
                    for gi in g.iter_mut() {
                        *gi = 0.0;
                    }
                    f64::INFINITY
                }
            }
        };
        let res = minimize_box(fg, &x0, &lo, &hi, 1e-7, grid.descent_iters);
        inf_values.push(res.value.min(grid_best));
    }

    Ok(MonotonicityTrace {
        offset,
        times: times.to_vec(),
        inf_values,
        skipped_fraction,
        grid_spec: format!(
            "uniform random pairs in the flow sampling box, {} per step, descent {} iters, seed {}",
            grid.pairs_per_step, grid.descent_iters, grid.seed
        ),
    })
}

/// One named formula-vs-reference comparison.
#[derive(Debug, Clone)]
pub struct FdCheck {
    pub name: String,
    pub formula: f64,
    pub reference: f64,
    /// Relative error for derivative checks, absolute for the trace identity.
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Bundle of every finite-difference-vs-formula comparison at one pair.
#[derive(Debug, Clone)]
pub struct FdReport {
    pub pair: EndpointPair,
    pub checks: Vec<FdCheck>,
}

impl FdReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-9)
}

/// Re-solve L at a displaced argument, warm-started from the base minimizer.
fn resolve_l(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    q: &[f64],
    t: f64,
    warm: &[f64],
    opts: &BvpOptions,
) -> Result<f64> {
    let pt = Point::new(p.to_vec());
    let qt = Point::new(q.to_vec());
    let geo = solve_bvp_warm(m, &pt, s, &qt, t, warm, opts)
        .or_else(|_| solve_bvp_with(m, &pt, s, &qt, t, opts))?;
    if geo.multiplicity_flag {
        return Err(Error::Multiplicity);
    }
    Ok(geo.lagrangian)
}

/// Every FD-vs-formula comparison for one pair: gradients, time derivatives,
/// the M×M Hessian, and the trace identity along the minimizer.
pub fn fd_crosscheck(m: &MetricFamily, e: &EndpointPair) -> Result<FdReport> {
    fd_crosscheck_with(m, e, &BvpOptions::default())
}

pub fn fd_crosscheck_with(
    m: &MetricFamily,
    e: &EndpointPair,
    opts: &BvpOptions,
) -> Result<FdReport> {
    let data = distance_with(m, e, opts)?;
    if data.geodesic.multiplicity_flag {
        return Err(Error::Multiplicity);
    }
    let n = m.dim;
    let warm = data.geodesic.initial_velocity.components.clone();
    let mut checks = Vec::new();

    let fd_tol = crate::tol::FORMULA_VS_FD;
    let h = 1e-4;

    // Spatial gradients: compare lowered formula gradients against central
    // differences of L in each chart coordinate.
    let geom_p = eval_geometry(m, &e.p, e.s)?;
    let geom_q = eval_geometry(m, &e.q, e.t)?;
    for (which, base, grad, geom) in [
        ("grad_p", &e.p, &data.grad_p, &geom_p),
        ("grad_q", &e.q, &data.grad_q, &geom_q),
    ] {
        let formula_cov = geom.g.mul_vec(&grad.components);
        let mut fd_cov = vec![0.0; n];
        for i in 0..n {
            let mut plus = base.coords.clone();
            let mut minus = base.coords.clone();
            plus[i] += h;
            minus[i] -= h;
            let (lp, lm) = if which == "grad_p" {
                (
                    resolve_l(m, &plus, e.s, &e.q.coords, e.t, &warm, opts)?,
                    resolve_l(m, &minus, e.s, &e.q.coords, e.t, &warm, opts)?,
                )
            } else {
                (
                    resolve_l(m, &e.p.coords, e.s, &plus, e.t, &warm, opts)?,
                    resolve_l(m, &e.p.coords, e.s, &minus, e.t, &warm, opts)?,
                )
            };
            fd_cov[i] = (lp - lm) / (2.0 * h);
        }
        let diff: Vec<f64> = formula_cov
            .iter()
            .zip(fd_cov.iter())
            .map(|(a, b)| a - b)
            .collect();
        let denom = norm2(&formula_cov).max(norm2(&fd_cov)).max(1e-9);
        let err = norm2(&diff) / denom;
        checks.push(FdCheck {
            name: String::from(which),
            formula: norm2(&formula_cov),
            reference: norm2(&fd_cov),
            error: err,
            tol: fd_tol,
            pass: err <= fd_tol,
        });
    }

    // Time derivatives.
    let fd_s = (resolve_l(m, &e.p.coords, e.s + h, &e.q.coords, e.t, &warm, opts)?
        - resolve_l(m, &e.p.coords, e.s - h, &e.q.coords, e.t, &warm, opts)?)
        / (2.0 * h);
    let err = rel_err(data.dl_ds, fd_s);
    checks.push(FdCheck {
        name: String::from("dl_ds"),
        formula: data.dl_ds,
        reference: fd_s,
        error: err,
        tol: fd_tol,
        pass: err <= fd_tol,
    });
    let fd_t = (resolve_l(m, &e.p.coords, e.s, &e.q.coords, e.t + h, &warm, opts)?
        - resolve_l(m, &e.p.coords, e.s, &e.q.coords, e.t - h, &warm, opts)?)
        / (2.0 * h);
    let err = rel_err(data.dl_dt, fd_t);
    checks.push(FdCheck {
        name: String::from("dl_dt"),
        formula: data.dl_dt,
        reference: fd_t,
        error: err,
        tol: fd_tol,
        pass: err <= fd_tol,
    });

    // Hessian in the first transported diagonal direction, against a
    // Richardson-extrapolated second difference along chart rays with the
    // ray-curvature correction measured from the FD first derivatives.
    let basis = orthonormal_basis(&geom_p.g);
    let par = transport(m, &data.geodesic)?;
    let v = basis[0].clone();
    let w = par.apply(&v);
    let formula_hess = hessian_from_geodesic(
        m,
        &data.geodesic,
        &TangentVector::new(e.p.clone(), v.clone()),
        &TangentVector::new(e.q.clone(), w.clone()),
    )?;
    let fd_hess = {
        let l0 = data.value;
        let ray = |eps: f64| -> Result<f64> {
            let p: Vec<f64> = e.p.coords.iter().zip(v.iter()).map(|(x, d)| x + eps * d).collect();
            let q: Vec<f64> = e.q.coords.iter().zip(w.iter()).map(|(x, d)| x + eps * d).collect();
            resolve_l(m, &p, e.s, &q, e.t, &warm, opts)
        };
        let hh = 1e-3;
        let d1 = (ray(hh)? - 2.0 * l0 + ray(-hh)?) / (hh * hh);
        let d2 = (ray(0.5 * hh)? - 2.0 * l0 + ray(-0.5 * hh)?) / (0.25 * hh * hh);
        let raw = (4.0 * d2 - d1) / 3.0;
        // d²/dε² along the chart ray picks up dL(Γ(v,v) ⊕ Γ(w,w)); measure
        // the first derivatives by FD so the oracle stays formula-free.
        let gamma_p = geom_p.gamma_bilinear(&v, &v);
        let gamma_q = geom_q.gamma_bilinear(&w, &w);
        let mut correction = 0.0;
        for i in 0..n {
            let mut plus = e.p.coords.clone();
            let mut minus = e.p.coords.clone();
            plus[i] += h;
            minus[i] -= h;
            let dl = (resolve_l(m, &plus, e.s, &e.q.coords, e.t, &warm, opts)?
                - resolve_l(m, &minus, e.s, &e.q.coords, e.t, &warm, opts)?)
                / (2.0 * h);
            correction += dl * gamma_p[i];
            let mut plus = e.q.coords.clone();
            let mut minus = e.q.coords.clone();
            plus[i] += h;
            minus[i] -= h;
            let dl = (resolve_l(m, &e.p.coords, e.s, &plus, e.t, &warm, opts)?
                - resolve_l(m, &e.p.coords, e.s, &minus, e.t, &warm, opts)?)
                / (2.0 * h);
            correction += dl * gamma_q[i];
        }
        raw - correction
    };
    let err = (formula_hess - fd_hess).abs() / formula_hess.abs().max(fd_hess.abs()).max(1e-3);
    checks.push(FdCheck {
        name: String::from("hessian_mm"),
        formula: formula_hess,
        reference: fd_hess,
        error: err,
        tol: 1e-3,
        pass: err <= 1e-3,
    });

    // Trace identity along the minimizer at 16 interior parameters:
    // Σᵢ H(T,eᵢ) = d/dτ (R + |T|²).
    let c = &data.geodesic.curve;
    let trace_check = trace_identity_error(m, &data.geodesic, 16);
    let _ = c;
    checks.push(FdCheck {
        name: String::from("trace_identity"),
        formula: 0.0,
        reference: trace_check,
        error: trace_check,
        tol: crate::tol::TRACE_IDENTITY,
        pass: trace_check <= crate::tol::TRACE_IDENTITY,
    });

    Ok(FdReport {
        pair: e.clone(),
        checks,
    })
}

/// Max over `samples` interior parameters of
/// |Σᵢ H(T,eᵢ) − d/dτ(R + |T|²)| along a certified geodesic.
pub fn trace_identity_error(m: &MetricFamily, geo: &LGeodesic, samples: usize) -> f64 {
    let c = &geo.curve;
    let s = c.s();
    let t = c.t();
    let span = t - s;
    let h = 1e-5 * span;
    let value = |tau: f64| -> f64 {
        // R + |T|² along the curve.
        let (x, v) = c.state(tau);
        let g = eval_geometry(m, &Point::new(x), tau).expect("in domain");
        g.scalar + g.norm_sq(&v)
    };
    let mut worst = 0.0f64;
    for k in 0..samples {
        // Interior parameters, away from the endpoints by one FD step.
        let tau = s + span * (k as f64 + 0.5) / samples as f64;
        let (x, v) = c.state(tau);
        let g = eval_geometry(m, &Point::new(x), tau).expect("in domain");
        let basis = orthonormal_basis(&g.g);
        let lhs: f64 = basis.iter().map(|e_i| h_term(&g, &v, e_i)).sum();
        let rhs = (value(tau + h) - value(tau - h)) / (2.0 * h);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}

/// Sample a valid endpoint pair inside the flow's sampling window.
pub fn sample_pair(m: &MetricFamily, rng: &mut Rng) -> EndpointPair {
    let (boxes, (tlo, thi)) = sample_window(m);
    let span = thi - tlo;
    let p: Vec<f64> = boxes.iter().map(|&(lo, hi)| rng.range(lo, hi)).collect();
    let q: Vec<f64> = boxes.iter().map(|&(lo, hi)| rng.range(lo, hi)).collect();
    let s = tlo + 0.2 * span * rng.uniform();
    let dt = (0.35 + 0.25 * rng.uniform()) * span;
    EndpointPair::new(Point::new(p), s, Point::new(q), s + dt)
}

/// Convenience: the LData of a pair with per-pair seeding.
pub fn distance_seeded(m: &MetricFamily, e: &EndpointPair, seed: u64) -> Result<LData> {
    let opts = BvpOptions {
        seed,
        ..BvpOptions::default()
    };
    distance_with(m, e, &opts)
}
