//! The length functional 𝓛, its geodesics, and linear field transport.
//!
//! 𝓛(γ) = ∫ₛᵗ (R + |T|²) dτ with the metric evolving along the curve. The
//! Euler–Lagrange equation is
//!
//! ∇_T T − 2 Ric(T)^♯ = ½ ∇R,
//!
//! the transport operator solves ∇_T V = Ric(V)^♯ (a g-isometry along the
//! flow), and 𝓛-Jacobi fields solve
//!
//! ∇_T∇_T V + Rm(V,T)T − 2(∇_V Ric)(T)^♯ − 2 Ric(∇_T V)^♯ − ½ ∇²R(V)^♯ = 0.
//!
//! Boundary value problems are solved by damped multi-start shooting with a
//! discretized-𝓛 quasi-Newton fallback; every returned geodesic carries its
//! measured Euler–Lagrange residual and a multiplicity flag recording whether
//! distinct converged solutions were seen.

use crate::curve::{Curve, HermiteTrack};
use crate::geom::{
    christoffel, eval_geodesic_geometry, eval_geometry, ricci, scalar_curvature, GeometryData,
    MetricFamily, Point, TangentVector,
};
use crate::linalg::{norm2, SquareMatrix};
use crate::ode::{integrate, OdeError, OdeOptions};
use crate::opt::lbfgs;
use crate::quad::foreach_gl8_node;
use crate::rng::Rng;
use crate::scalar::{Dual, Scalar};
use crate::{tol, Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Default number of uniform curve segments.
pub const DEFAULT_SEGMENTS: usize = 64;

/// An 𝓛-geodesic: a curve certified by its Euler–Lagrange residual.
#[derive(Debug, Clone)]
pub struct LGeodesic {
    pub curve: Curve,
    /// Max pointwise g-norm of ∇_T T − 2Ric(T)^♯ − ½∇R over the quadrature
    /// abscissae.
    pub el_residual: f64,
    pub initial_velocity: TangentVector,
    /// Distinct converged boundary-value solutions were detected: the pair
    /// lies at (or numerically near) the mutual cut locus.
    pub multiplicity_flag: bool,
    /// 𝓛 value of the curve.
    pub lagrangian: f64,
}

/// How a variation field was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Solves ∇_T V = Ric(V)^♯.
    Transported,
    /// Solves the 𝓛-Jacobi equation.
    Jacobi,
    /// Anything else (test variations).
    Arbitrary,
}

/// A vector field V(τ) along a curve, stored as raw chart components with
/// their first two τ-derivatives; covariant derivatives are reconstructed
/// pointwise from the curve and the metric.
#[derive(Debug, Clone)]
pub struct VariationField {
    pub kind: FieldKind,
    pub track: HermiteTrack,
}

impl VariationField {
    /// Sample an analytic field: `f(τ)` returns components and their first
    /// and second τ-derivatives.
    pub fn from_fn(
        curve: &Curve,
        kind: FieldKind,
        f: impl FnMut(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
    ) -> Self {
        VariationField {
            kind,
            track: HermiteTrack::from_fn(curve.s(), curve.t(), curve.segments(), f),
        }
    }

    pub fn value(&self, tau: f64) -> Vec<f64> {
        self.track.eval(tau).0
    }
}

/// A linear map T_pM → T_qM in chart bases, from solving ∇_T V = Ric(V)^♯.
#[derive(Debug, Clone)]
pub struct TransportMap {
    pub source: (Point, f64),
    pub target: (Point, f64),
    pub matrix: SquareMatrix<f64>,
}

impl TransportMap {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(v)
    }
}

fn check_times(m: &MetricFamily, s: f64, t: f64) -> Result<()> {
    if !(s < t) || !m.contains_time(s) || !m.contains_time(t) {
        return Err(Error::InvalidTimes { s, t });
    }
    Ok(())
}

/// 𝓛(γ) by composite 8-node Gauss–Legendre over the curve's segments.
pub fn lagrangian(m: &MetricFamily, c: &Curve) -> Result<f64> {
    check_times(m, c.s(), c.t())?;
    let mut acc = 0.0;
    let mut bad: Option<f64> = None;
    foreach_gl8_node(c.s(), c.t(), c.segments(), |tau, w| {
        if bad.is_some() {
            return;
        }
        let (x, v) = c.state(tau);
        if !m.contains_point(&x) {
            bad = Some(tau);
            return;
        }
        let r = scalar_curvature(m, &x, tau);
        let g = m.eval(&x, tau);
        acc += w * (r + g.bilinear(&v, &v));
    });
    match bad {
        Some(at) => Err(Error::OutOfDomain { at, what: "chart" }),
        None => Ok(acc),
    }
}

/// Geodesic defect D = ∇_T T − 2Ric(T)^♯ − ½∇R at one curve parameter.
fn el_defect(m: &MetricFamily, c: &Curve, tau: f64) -> Result<(Vec<f64>, SquareMatrix<f64>)> {
    let (x, v, a) = c.state2(tau);
    if !m.contains_point(&x) {
        return Err(Error::OutOfDomain { at: tau, what: "chart" });
    }
    let geo = eval_geodesic_geometry(m, &x, tau);
    let n = m.dim;
    let mut d = vec![0.0; n];
    let ric_t = geo.ricci_up.mul_vec(&v);
    for k in 0..n {
        let mut acc = a[k];
        for i in 0..n {
            for j in 0..n {
                acc += geo.gamma(k, i, j) * v[i] * v[j];
            }
        }
        acc -= 2.0 * ric_t[k];
        acc -= 0.5 * geo.grad_r[k];
        d[k] = acc;
    }
    Ok((d, m.eval(&x, tau)))
}

/// Max pointwise g-norm of the Euler–Lagrange defect over the quadrature
/// abscissae of the curve.
pub fn el_residual(m: &MetricFamily, c: &Curve) -> Result<f64> {
    check_times(m, c.s(), c.t())?;
    let mut worst = 0.0f64;
    let mut taus = Vec::new();
    foreach_gl8_node(c.s(), c.t(), c.segments(), |tau, _| taus.push(tau));
    for tau in taus {
        let (d, g) = el_defect(m, c, tau)?;
        worst = worst.max(libm::sqrt(g.bilinear(&d, &d).max(0.0)));
    }
    Ok(worst)
}

/// Geodesic acceleration γ̈ = −Γ(T,T) + 2Ric(T)^♯ + ½∇R in chart components.
fn geodesic_acceleration(m: &MetricFamily, x: &[f64], v: &[f64], tau: f64) -> Vec<f64> {
    let geo = eval_geodesic_geometry(m, x, tau);
    let n = m.dim;
    let ric_t = geo.ricci_up.mul_vec(v);
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc -= geo.gamma(k, i, j) * v[i] * v[j];
                }
            }
            acc + 2.0 * ric_t[k] + 0.5 * geo.grad_r[k]
        })
        .collect()
}

fn map_ode_err(e: OdeError) -> Error {
    match e {
        OdeError::ExitedDomain { t } => Error::OutOfDomain { at: t, what: "chart" },
        OdeError::StepSizeUnderflow { t } | OdeError::TooManySteps { t } => Error::OutOfDomain {
            at: t,
            what: "integration stalled",
        },
    }
}

/// End state (x, v) of the geodesic initial value problem at time `t`,
/// without building a curve. Backbone of the shooting iteration.
fn shoot_endpoint(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    v0: &[f64],
    t: f64,
    opts: &OdeOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim;
    let mut y0 = p.to_vec();
    y0.extend_from_slice(v0);
    let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| {
        let (x, v) = y.split_at(n);
        let acc = geodesic_acceleration(m, x, v, tau);
        dy[..n].copy_from_slice(v);
        dy[n..].copy_from_slice(&acc);
    };
    let sol = integrate(
        rhs,
        s,
        &y0,
        &[t],
        |_, y| m.contains_point(&y[..n]),
        opts,
    )
    .map_err(map_ode_err)?;
    let last = &sol[0];
    Ok((last[..n].to_vec(), last[n..].to_vec()))
}

/// Integrate the geodesic initial value problem, sampling the solution at
/// `segments`+1 uniform nodes (with velocity and acceleration) to build a
/// certified-quality curve representation.
pub fn integrate_geodesic(
    m: &MetricFamily,
    p: &Point,
    s: f64,
    v0: &TangentVector,
    t: f64,
) -> Result<Curve> {
    integrate_geodesic_with(m, p, s, &v0.components, t, DEFAULT_SEGMENTS, &OdeOptions::default())
}

pub fn integrate_geodesic_with(
    m: &MetricFamily,
    p: &Point,
    s: f64,
    v0: &[f64],
    t: f64,
    segments: usize,
    opts: &OdeOptions,
) -> Result<Curve> {
    check_times(m, s, t)?;
    if !m.contains_point(&p.coords) {
        return Err(Error::OutOfDomain { at: s, what: "chart" });
    }
    let n = m.dim;
    let mut y0 = p.coords.clone();
    y0.extend_from_slice(v0);
    let outputs: Vec<f64> = (1..=segments)
        .map(|i| s + (t - s) * i as f64 / segments as f64)
        .collect();
    let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| {
        let (x, v) = y.split_at(n);
        let acc = geodesic_acceleration(m, x, v, tau);
        dy[..n].copy_from_slice(v);
        dy[n..].copy_from_slice(&acc);
    };
    let states = integrate(
        rhs,
        s,
        &y0,
        &outputs,
        |_, y| m.contains_point(&y[..n]),
        opts,
    )
    .map_err(map_ode_err)?;

    let mut nodes = Vec::with_capacity(segments + 1);
    let a0 = geodesic_acceleration(m, &p.coords, v0, s);
    nodes.push((p.coords.clone(), v0.to_vec(), a0));
    for (i, y) in states.iter().enumerate() {
        let tau = outputs[i];
        let x = y[..n].to_vec();
        let v = y[n..].to_vec();
        let a = geodesic_acceleration(m, &x, &v, tau);
        nodes.push((x, v, a));
    }
    Ok(Curve {
        track: HermiteTrack::from_states(s, t, nodes),
    })
}

/// Solver strategy for [`solve_bvp_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Multi-start shooting, falling back to direct minimization + polish.
    Auto,
    /// Multi-start shooting only.
    ShootingOnly,
    /// Skip straight to direct minimization, then polish by shooting.
    DirectThenPolish,
}

#[derive(Debug, Clone)]
pub struct BvpOptions {
    pub segments: usize,
    /// Shooting starts: the straight chart line plus `starts−1` Gaussian
    /// perturbations cycling through three amplitudes.
    pub starts: usize,
    pub seed: u64,
    pub newton_iters: usize,
    pub mode: SolverMode,
    pub ode: OdeOptions,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            segments: DEFAULT_SEGMENTS,
            starts: 8,
            seed: 0,
            newton_iters: 60,
            mode: SolverMode::Auto,
            ode: OdeOptions::default(),
        }
    }
}

/// Perturbation amplitudes for shooting restarts, as fractions of
/// (1 + |straight-line velocity|).
const START_AMPLITUDES: [f64; 3] = [0.05, 0.15, 0.45];

#[derive(Debug, Clone)]
struct ConvergedStart {
    v0: Vec<f64>,
    lagrangian: f64,
}

/// Damped (Levenberg-regularized) Newton on the endpoint map
/// F(v₀) = x(t; p, s, v₀) − q. Returns the converged initial velocity.
fn newton_shoot(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    q: &[f64],
    t: f64,
    v_init: &[f64],
    opts: &BvpOptions,
) -> Option<Vec<f64>> {
    let n = m.dim;
    let scale = 1.0 + norm2(q);
    let target_tol = 1e-11 * scale;
    let mut v0 = v_init.to_vec();

    let end = |v: &[f64]| -> Option<Vec<f64>> {
        shoot_endpoint(m, p, s, v, t, &opts.ode)
            .ok()
            .map(|(x, _)| x.iter().zip(q.iter()).map(|(a, b)| a - b).collect())
    };

    let mut f = end(&v0)?;
    let mut fnorm = norm2(&f);
    for _ in 0..opts.newton_iters {
        if fnorm <= target_tol {
            return Some(v0);
        }
        // Forward-difference Jacobian of the endpoint map.
        let mut jac = SquareMatrix::zeros(n);
        let h = 1e-6 * (1.0 + norm2(&v0));
        for j in 0..n {
            let mut vj = v0.clone();
            vj[j] += h;
            let fj = end(&vj)?;
            for i in 0..n {
                *jac.at_mut(i, j) = (fj[i] - f[i]) / h;
            }
        }
        // Plain Newton step, Levenberg fallback when the system is singular
        // (conjugate endpoints make the endpoint map rank-deficient).
        let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
        let step = jac.solve(&neg_f).or_else(|| {
            let jt = jac.transpose();
            let mut jtj = jt.matmul(&jac);
            let lambda = 1e-10 + 1e-6 * jtj.max_abs();
            for i in 0..n {
                *jtj.at_mut(i, i) += lambda;
            }
            jtj.solve(&jt.mul_vec(&neg_f))
        })?;

        // Backtracking on |F|.
        let mut alpha = 1.0f64;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = v0
                .iter()
                .zip(step.iter())
                .map(|(v, d)| v + alpha * d)
                .collect();
            if let Some(ft) = end(&trial) {
                let fn_t = norm2(&ft);
                if fn_t < fnorm * (1.0 - 1e-4 * alpha) || fn_t <= target_tol {
                    v0 = trial;
                    f = ft;
                    fnorm = fn_t;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    if fnorm <= target_tol {
        Some(v0)
    } else {
        None
    }
}

/// Discretized 𝓛 over a piecewise-linear polyline: per segment the velocity
/// is constant and R is integrated by a short Gauss rule. Differentiated
/// per-segment with dual numbers for the quasi-Newton fallback.
fn discrete_lagrangian_fg(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    q: &[f64],
    t: f64,
    interior: &[f64],
    grad: &mut [f64],
) -> f64 {
    let n = m.dim;
    let segs = interior.len() / n + 1;
    let h = (t - s) / segs as f64;
    let node = |i: usize| -> &[f64] {
        if i == 0 {
            p
        } else if i == segs {
            q
        } else {
            &interior[(i - 1) * n..i * n]
        }
    };
    for g in grad.iter_mut() {
        *g = 0.0;
    }
    let mut total = 0.0;

    // Two-point Gauss rule on each linear segment.
    const GQ: [(f64, f64); 2] = [(0.211324865405187_1, 0.5), (0.788675134594812_9, 0.5)];

    for seg in 0..segs {
        let a = node(seg);
        let b = node(seg + 1);
        if !m.contains_point(a) || !m.contains_point(b) {
            return f64::INFINITY;
        }
        // Each endpoint coordinate gets a dual pass for the gradient.
        for d in 0..2 * n {
            let active_node = if d < n { seg } else { seg + 1 };
            let needed = active_node > 0 && active_node < segs;
            if !needed && d != 0 {
                continue;
            }
            let lift = |i: usize, vals: &[f64], which: usize| -> Vec<Dual<f64>> {
                vals.iter()
                    .enumerate()
                    .map(|(c, &v)| {
                        if i == which && c == d % n {
                            Dual::variable(v)
                        } else {
                            Dual::constant(v)
                        }
                    })
                    .collect()
            };
            let (which, other) = if d < n { (0usize, 1usize) } else { (1, 0) };
            let _ = other;
            let av = lift(0, a, if which == 0 { 0 } else { 1 });
            let bv = lift(1, b, if which == 0 { 0 } else { 1 });

            let mut seg_val = Dual::<f64>::from_f64(0.0);
            // |T|² term with T = (b − a)/h under the segment-midpoint metric
            // at each Gauss node.
            for (u, w) in GQ {
                let tau = s + h * (seg as f64 + u);
                let x: Vec<Dual<f64>> = (0..n)
                    .map(|c| av[c] + (bv[c] - av[c]) * Dual::from_f64(u))
                    .collect();
                let vel: Vec<Dual<f64>> =
                    (0..n).map(|c| (bv[c] - av[c]) / Dual::from_f64(h)).collect();
                let r = scalar_curvature(m, &x, Dual::from_f64(tau));
                let g = m.eval(&x, Dual::from_f64(tau));
                seg_val += (r + g.bilinear(&vel, &vel)) * Dual::from_f64(w * h);
            }
            if d == 0 {
                total += seg_val.re;
            }
            if needed {
                grad[(active_node - 1) * n + d % n] += seg_val.du;
            }
        }
    }
    total
}

/// Direct minimization of the discretized 𝓛 over interior node positions.
/// Returns the polyline including endpoints.
pub fn direct_minimize(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    q: &[f64],
    t: f64,
    segments: usize,
) -> Vec<Vec<f64>> {
    let n = m.dim;
    let mut x0 = Vec::with_capacity((segments - 1) * n);
    for i in 1..segments {
        let w = i as f64 / segments as f64;
        for c in 0..n {
            x0.push(p[c] + w * (q[c] - p[c]));
        }
    }
    let res = lbfgs(
        |x, g| discrete_lagrangian_fg(m, p, s, q, t, x, g),
        &x0,
        1e-9,
        400,
    );
    let mut polyline = Vec::with_capacity(segments + 1);
    polyline.push(p.to_vec());
    for i in 1..segments {
        polyline.push(res.x[(i - 1) * n..i * n].to_vec());
    }
    polyline.push(q.to_vec());
    polyline
}

/// Solve the two-point boundary value problem for the 𝓛-geodesic from
/// (p, s) to (q, t), returning the least-𝓛 converged solution.
pub fn solve_bvp(m: &MetricFamily, p: &Point, s: f64, q: &Point, t: f64) -> Result<LGeodesic> {
    solve_bvp_with(m, p, s, q, t, &BvpOptions::default())
}

pub fn solve_bvp_with(
    m: &MetricFamily,
    p: &Point,
    s: f64,
    q: &Point,
    t: f64,
    opts: &BvpOptions,
) -> Result<LGeodesic> {
    check_times(m, s, t)?;
    if !m.contains_point(&p.coords) || !m.contains_point(&q.coords) {
        return Err(Error::OutOfDomain { at: s, what: "chart" });
    }
    let n = m.dim;
    let straight: Vec<f64> = (0..n)
        .map(|c| (q.coords[c] - p.coords[c]) / (t - s))
        .collect();

    let mut converged: Vec<ConvergedStart> = Vec::new();
    let mut attempts = 0usize;
    let mut best_miss = f64::INFINITY;

    if opts.mode != SolverMode::DirectThenPolish {
        let mut rng = Rng::new(opts.seed ^ 0x5143_9bba_77fe_210d);
        let sigma = 1.0 + norm2(&straight);
        for start in 0..opts.starts {
            attempts += 1;
            let v_init: Vec<f64> = if start == 0 {
                straight.clone()
            } else {
                let amp = START_AMPLITUDES[(start - 1) % START_AMPLITUDES.len()];
                straight
                    .iter()
                    .map(|v| v + amp * sigma * rng.normal())
                    .collect()
            };
            if let Some(v0) = newton_shoot(m, &p.coords, s, &q.coords, t, &v_init, opts) {
                if let Ok(curve) =
                    integrate_geodesic_with(m, p, s, &v0, t, opts.segments, &opts.ode)
                {
                    if let Ok(lag) = lagrangian(m, &curve) {
                        converged.push(ConvergedStart { v0, lagrangian: lag });
                    }
                }
            } else if let Ok((x, _)) = shoot_endpoint(m, &p.coords, s, &v_init, t, &opts.ode) {
                let miss: f64 = norm2(
                    &x.iter()
                        .zip(q.coords.iter())
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                );
                best_miss = best_miss.min(miss);
            }
        }
    }

    if converged.is_empty() && opts.mode != SolverMode::ShootingOnly {
        // Fallback: direct minimization of the discretized functional, then
        // polish the minimizer's initial velocity by shooting.
        attempts += 1;
        let polyline = direct_minimize(m, &p.coords, s, &q.coords, t, opts.segments);
        let track = HermiteTrack::from_positions(s, t, &polyline);
        let (_, v_est, _) = track.eval(s);
        if let Some(v0) = newton_shoot(m, &p.coords, s, &q.coords, t, &v_est, opts) {
            if let Ok(curve) = integrate_geodesic_with(m, p, s, &v0, t, opts.segments, &opts.ode)
            {
                if let Ok(lag) = lagrangian(m, &curve) {
                    converged.push(ConvergedStart { v0, lagrangian: lag });
                }
            }
        }
    }

    if converged.is_empty() {
        return Err(Error::BvpFailure {
            starts: attempts,
            converged: 0,
            best_miss,
        });
    }

    // Multiplicity: any two converged solutions that disagree in value or in
    // initial velocity count as distinct minimizer candidates.
    let mut multiplicity = false;
    for i in 0..converged.len() {
        for j in (i + 1)..converged.len() {
            let dv: Vec<f64> = converged[i]
                .v0
                .iter()
                .zip(converged[j].v0.iter())
                .map(|(a, b)| a - b)
                .collect();
            if (converged[i].lagrangian - converged[j].lagrangian).abs() > tol::MULTIPLICITY_VALUE
                || norm2(&dv) > tol::MULTIPLICITY_VELOCITY
            {
                multiplicity = true;
            }
        }
    }

    let best = converged
        .iter()
        .min_by(|a, b| a.lagrangian.partial_cmp(&b.lagrangian).unwrap())
        .unwrap();
    let (curve, el) = build_certified_curve(m, p, s, &best.v0, t, opts)?;
    Ok(LGeodesic {
        initial_velocity: TangentVector::new(p.clone(), best.v0.clone()),
        el_residual: el,
        multiplicity_flag: multiplicity,
        lagrangian: lagrangian(m, &curve)?,
        curve,
    })
}

/// The quintic-Hermite representation error of γ̈ scales as h⁴, so a fast
/// pair can need more than the default node count to meet the certificate;
/// double the segments until the measured residual clears the tolerance.
fn build_certified_curve(
    m: &MetricFamily,
    p: &Point,
    s: f64,
    v0: &[f64],
    t: f64,
    opts: &BvpOptions,
) -> Result<(Curve, f64)> {
    let mut segments = opts.segments;
    loop {
        let curve = integrate_geodesic_with(m, p, s, v0, t, segments, &opts.ode)?;
        let el = el_residual(m, &curve)?;
        if el <= tol::GEODESIC || segments >= opts.segments * 8 {
            return Ok((curve, el));
        }
        segments *= 2;
    }
}

/// Single-start shooting from a known initial velocity (used by warm-started
/// re-solves in finite-difference oracles and descent loops).
pub fn solve_bvp_warm(
    m: &MetricFamily,
    p: &Point,
    s: f64,
    q: &Point,
    t: f64,
    v_init: &[f64],
    opts: &BvpOptions,
) -> Result<LGeodesic> {
    check_times(m, s, t)?;
    let v0 = newton_shoot(m, &p.coords, s, &q.coords, t, v_init, opts).ok_or(
        Error::BvpFailure {
            starts: 1,
            converged: 0,
            best_miss: f64::NAN,
        },
    )?;
    let (curve, el) = build_certified_curve(m, p, s, &v0, t, opts)?;
    let lag = lagrangian(m, &curve)?;
    Ok(LGeodesic {
        initial_velocity: TangentVector::new(p.clone(), v0),
        el_residual: el,
        multiplicity_flag: false,
        lagrangian: lag,
        curve,
    })
}

/// Along-curve geometry lifted in τ: Γ and Ric^♯ with their total τ-derivative
/// d/dτ = ∂τ + T^m ∂_m following the curve.
struct CurveLiftedGeometry {
    gamma: Vec<f64>,
    dgamma: Vec<f64>,
    ric_up: SquareMatrix<f64>,
    dric_up: SquareMatrix<f64>,
    n: usize,
}

fn curve_lifted_geometry(m: &MetricFamily, x: &[f64], v: &[f64], tau: f64) -> CurveLiftedGeometry {
    let n = m.dim;
    let xd: Vec<Dual<f64>> = x
        .iter()
        .zip(v.iter())
        .map(|(&xi, &vi)| Dual::new(xi, vi))
        .collect();
    let td = Dual::variable(tau);
    let gam = christoffel(m, &xd, td);
    let ric = ricci(m, &xd, td);
    let ginv = m.eval(&xd, td).inverse().expect("metric invertible");
    let ric_up_d = ginv.matmul(&ric);
    CurveLiftedGeometry {
        gamma: gam.iter().map(|d| d.re).collect(),
        dgamma: gam.iter().map(|d| d.du).collect(),
        ric_up: SquareMatrix {
            n,
            data: ric_up_d.data.iter().map(|d| d.re).collect(),
        },
        dric_up: SquareMatrix {
            n,
            data: ric_up_d.data.iter().map(|d| d.du).collect(),
        },
        n,
    }
}

impl CurveLiftedGeometry {
    fn gam(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[k * self.n * self.n + i * self.n + j]
    }
    fn dgam(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dgamma[k * self.n * self.n + i * self.n + j]
    }
    fn gam_bilinear(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        acc += self.gam(k, i, j) * u[i] * w[j];
                    }
                }
                acc
            })
            .collect()
    }
    fn dgam_bilinear(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        acc += self.dgam(k, i, j) * u[i] * w[j];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Covariant derivatives of a field with raw component derivatives (v, v̇, v̈)
/// along a curve with velocity `t_vel` and acceleration `t_acc`, from the
/// pointwise geometry: returns (∇_T V, ∇_T ∇_T V), both with the τ-inclusive
/// connection (dΓ/dτ along the curve = ∂τΓ + T·∂Γ enters the second
/// derivative).
pub fn covariant_field_derivatives(
    geo: &GeometryData,
    t_vel: &[f64],
    t_acc: &[f64],
    val: &[f64],
    d1: &[f64],
    d2: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = geo.dim;

    // W = ∇_T V = V̇ + Γ(T, V).
    let mut w = d1.to_vec();
    let gtv = geo.gamma_bilinear(t_vel, val);
    for k in 0..n {
        w[k] += gtv[k];
    }
    // dW/dτ = V̈ + (dΓ/dτ)(T,V) + Γ(Ṫ,V) + Γ(T,V̇).
    let mut dgamma_tv = geo.dtau_gamma_bilinear(t_vel, val);
    for k in 0..n {
        for mm in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += geo.dgamma_dx(mm, k, i, j) * t_vel[i] * val[j];
                }
            }
            dgamma_tv[k] += t_vel[mm] * acc;
        }
    }
    let b = geo.gamma_bilinear(t_acc, val);
    let cc = geo.gamma_bilinear(t_vel, d1);
    let mut dw = d2.to_vec();
    for k in 0..n {
        dw[k] += dgamma_tv[k] + b[k] + cc[k];
    }
    // ∇_T W = dW/dτ + Γ(T, W).
    let gtw = geo.gamma_bilinear(t_vel, &w);
    let w2: Vec<f64> = (0..n).map(|k| dw[k] + gtw[k]).collect();
    (w, w2)
}

/// ∇_T V at τ for a stored variation field.
pub fn field_cov_derivative(m: &MetricFamily, c: &Curve, f: &VariationField, tau: f64) -> Vec<f64> {
    let (x, t_vel, t_acc) = c.state2(tau);
    let geo = eval_geometry(m, &Point::new(x), tau).expect("curve in domain");
    let (val, d1, d2) = f.track.eval(tau);
    covariant_field_derivatives(&geo, &t_vel, &t_acc, &val, &d1, &d2).0
}

/// Transport right-hand side V̇ = −Γ(T,V) + Ric(V)^♯ for one vector.
fn transport_rhs(lifted: &CurveLiftedGeometry, t_vel: &[f64], v: &[f64]) -> Vec<f64> {
    let n = lifted.n;
    let gtv = lifted.gam_bilinear(t_vel, v);
    let rv = lifted.ric_up.mul_vec(v);
    (0..n).map(|k| -gtv[k] + rv[k]).collect()
}

/// Solve ∇_T V = Ric(V)^♯ along a certified geodesic for the whole chart
/// basis, producing the transport operator ∥_γ : T_pM → T_qM.
pub fn transport(m: &MetricFamily, geo: &LGeodesic) -> Result<TransportMap> {
    let c = &geo.curve;
    let n = m.dim;
    let s = c.s();
    let t = c.t();
    // Stack the n basis solutions into one state.
    let mut y0 = vec![0.0; n * n];
    for k in 0..n {
        y0[k * n + k] = 1.0;
    }
    let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| {
        let (x, t_vel) = c.state(tau);
        let lifted = curve_lifted_geometry(m, &x, &t_vel, tau);
        for col in 0..n {
            let v = &y[col * n..(col + 1) * n];
            let dv = transport_rhs(&lifted, &t_vel, v);
            dy[col * n..(col + 1) * n].copy_from_slice(&dv);
        }
    };
    let states = integrate(rhs, s, &y0, &[t], |_, _| true, &OdeOptions::default())
        .map_err(map_ode_err)?;
    let last = &states[0];
    // Columns are transported basis vectors.
    let matrix = SquareMatrix::from_fn(n, |i, j| last[j * n + i]);
    let p_pt = Point::new(c.position(s));
    let q_pt = Point::new(c.position(t));
    Ok(TransportMap {
        source: (p_pt, s),
        target: (q_pt, t),
        matrix,
    })
}

/// Transported variation field with V(s) = v: solves ∇_T V = Ric(V)^♯ and
/// records component value/velocity/acceleration at the curve nodes.
pub fn transport_field(m: &MetricFamily, geo: &LGeodesic, v: &[f64]) -> Result<VariationField> {
    let c = &geo.curve;
    let n = m.dim;
    let s = c.s();
    let t = c.t();
    let segments = c.segments();
    let outputs: Vec<f64> = (1..=segments)
        .map(|i| s + (t - s) * i as f64 / segments as f64)
        .collect();
    let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| {
        let (x, t_vel) = c.state(tau);
        let lifted = curve_lifted_geometry(m, &x, &t_vel, tau);
        let dv = transport_rhs(&lifted, &t_vel, y);
        dy.copy_from_slice(&dv);
    };
    let states = integrate(rhs, s, v, &outputs, |_, _| true, &OdeOptions::default())
        .map_err(map_ode_err)?;

    // Node derivative data: V̇ from the ODE, V̈ from its τ-derivative.
    let node_data = |tau: f64, val: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let (x, t_vel, t_acc) = c.state2(tau);
        let lifted = curve_lifted_geometry(m, &x, &t_vel, tau);
        let d1 = transport_rhs(&lifted, &t_vel, val);
        // V̈ = −(dΓ/dτ)(T,V) − Γ(Ṫ,V) − Γ(T,V̇) + (dRic♯/dτ)V + Ric♯V̇.
        let a = lifted.dgam_bilinear(&t_vel, val);
        let b = lifted.gam_bilinear(&t_acc, val);
        let cc = lifted.gam_bilinear(&t_vel, &d1);
        let e = lifted.dric_up.mul_vec(val);
        let f = lifted.ric_up.mul_vec(&d1);
        let d2: Vec<f64> = (0..n).map(|k| -a[k] - b[k] - cc[k] + e[k] + f[k]).collect();
        (d1, d2)
    };

    let mut nodes = Vec::with_capacity(segments + 1);
    let (d1, d2) = node_data(s, v);
    nodes.push((v.to_vec(), d1, d2));
    for (i, y) in states.iter().enumerate() {
        let (d1, d2) = node_data(outputs[i], y);
        nodes.push((y.clone(), d1, d2));
    }
    Ok(VariationField {
        kind: FieldKind::Transported,
        track: HermiteTrack::from_states(s, t, nodes),
    })
}

/// Jacobi right-hand side for the stacked state (V, W = ∇_T V). The Jacobi
/// equation's second covariant derivative is written with the connection
/// frozen in τ, so the τ-inclusive derivative the integrator advances picks
/// up the extra (∂τΓ)(T,V) term:
/// ∇_T W = −Rm(V,T)T + 2(∇_V Ric)(T)^♯ + 2Ric(W)^♯ + ½∇²R(V)^♯ + (∂τΓ)(T,V).
fn jacobi_rates(
    m: &MetricFamily,
    geo_full: &GeometryData,
    t_vel: &[f64],
    v: &[f64],
    w: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = m.dim;
    let gtv = geo_full.gamma_bilinear(t_vel, v);
    let v_dot: Vec<f64> = (0..n).map(|k| w[k] - gtv[k]).collect();

    let rm = geo_full.rm_vector(v, t_vel, t_vel);
    let cov = geo_full.cov_ric_sharp(v, t_vel);
    let ric_w = geo_full.ric_sharp(w);
    let hess = geo_full.hess_r_sharp(v);
    let dtg = geo_full.dtau_gamma_bilinear(t_vel, v);
    let nabla_t_w: Vec<f64> = (0..n)
        .map(|k| -rm[k] + 2.0 * cov[k] + 2.0 * ric_w[k] + 0.5 * hess[k] + dtg[k])
        .collect();
    let gtw = geo_full.gamma_bilinear(t_vel, w);
    let w_dot: Vec<f64> = (0..n).map(|k| nabla_t_w[k] - gtw[k]).collect();
    (v_dot, w_dot)
}

/// The fundamental solution of the (linear) 𝓛-Jacobi equation along one
/// certified geodesic, recorded at the curve's uniform nodes. Any boundary
/// value problem V(s) = v, V(t) = w then reduces to one n×n solve plus
/// linear combination — no further integration. A singular endpoint block
/// means the endpoints are conjugate.
pub struct JacobiSystem {
    /// 2n×2n state-transition matrix Φ(τᵢ) ← (V, ∇_T V)(s) at each node.
    nodes: Vec<SquareMatrix<f64>>,
    /// Pointwise geometry at each node, reused to rebuild component
    /// derivatives of combined fields.
    node_geo: Vec<GeometryData>,
    dim: usize,
}

impl JacobiSystem {
    /// One stacked integration of all 2n fundamental solutions.
    pub fn build(m: &MetricFamily, geo: &LGeodesic) -> Result<JacobiSystem> {
        let c = &geo.curve;
        let n = m.dim;
        let s = c.s();
        let t = c.t();
        let segments = c.segments();
        let outputs: Vec<f64> = (1..=segments)
            .map(|i| s + (t - s) * i as f64 / segments as f64)
            .collect();

        // Column a of Φ starts as the a-th basis vector of (V, W) space.
        let blocks = 2 * n;
        let mut y0 = vec![0.0; blocks * 2 * n];
        for a in 0..blocks {
            y0[a * 2 * n + a] = 1.0;
        }
        let rhs = |tau: f64, y: &[f64], dy: &mut [f64]| {
            let (x, t_vel) = c.state(tau);
            let geo_full =
                eval_geometry(m, &Point::new(x), tau).expect("geodesic stays in domain");
            for blk in 0..blocks {
                let off = blk * 2 * n;
                let (vv, ww) = (&y[off..off + n], &y[off + n..off + 2 * n]);
                let (vd, wd) = jacobi_rates(m, &geo_full, &t_vel, vv, ww);
                dy[off..off + n].copy_from_slice(&vd);
                dy[off + n..off + 2 * n].copy_from_slice(&wd);
            }
        };
        let states = integrate(rhs, s, &y0, &outputs, |_, _| true, &OdeOptions::default())
            .map_err(map_ode_err)?;

        let unpack = |flat: &[f64]| -> SquareMatrix<f64> {
            // Column a holds the evolved (V, W) of the a-th initial basis vector.
            SquareMatrix::from_fn(2 * n, |i, a| flat[a * 2 * n + i])
        };
        let mut nodes = Vec::with_capacity(segments + 1);
        nodes.push(SquareMatrix::identity(2 * n));
        for flat in &states {
            nodes.push(unpack(flat));
        }

        let mut node_geo = Vec::with_capacity(segments + 1);
        for i in 0..=segments {
            let tau = c.track.node_time(i);
            let (x, _) = c.state(tau);
            node_geo.push(eval_geometry(m, &Point::new(x), tau)?);
        }

        Ok(JacobiSystem {
            nodes,
            node_geo,
            dim: n,
        })
    }

    /// The 𝓛-Jacobi field with V(s) = v, V(t) = w.
    pub fn solve(
        &self,
        m: &MetricFamily,
        geo: &LGeodesic,
        v: &[f64],
        w: &[f64],
    ) -> Result<VariationField> {
        let n = self.dim;
        if v.len() != n || w.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: v.len().max(w.len()),
            });
        }
        let c = &geo.curve;
        let end = self.nodes.last().expect("at least one node");
        // V(t) = A v + B w₀ with A, B the upper blocks of Φ(t).
        let a_block = SquareMatrix::from_fn(n, |i, j| end.at(i, j));
        let b_block = SquareMatrix::from_fn(n, |i, j| end.at(i, n + j));
        let av = a_block.mul_vec(v);
        let target: Vec<f64> = (0..n).map(|i| w[i] - av[i]).collect();
        let w0 = b_block.solve(&target).ok_or(Error::ConjugatePoints)?;

        let mut init = vec![0.0; 2 * n];
        init[..n].copy_from_slice(v);
        init[n..].copy_from_slice(&w0);

        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, phi) in self.nodes.iter().enumerate() {
            let state = phi.mul_vec(&init);
            let tau = c.track.node_time(i);
            let (_, t_vel, t_acc) = c.state2(tau);
            let geo_full = &self.node_geo[i];
            let (vv, ww) = (&state[..n], &state[n..]);
            let (v_dot, w_dot) = jacobi_rates(m, geo_full, &t_vel, vv, ww);
            // V̈ = Ẇ − (dΓ/dτ)(T,V) − Γ(Ṫ,V) − Γ(T,V̇).
            let mut dgamma_tv = geo_full.dtau_gamma_bilinear(&t_vel, vv);
            for k in 0..n {
                for mm in 0..n {
                    let mut acc = 0.0;
                    for ii in 0..n {
                        for jj in 0..n {
                            acc += geo_full.dgamma_dx(mm, k, ii, jj) * t_vel[ii] * vv[jj];
                        }
                    }
                    dgamma_tv[k] += t_vel[mm] * acc;
                }
            }
            let b = geo_full.gamma_bilinear(&t_acc, vv);
            let cc = geo_full.gamma_bilinear(&t_vel, &v_dot);
            let d2: Vec<f64> = (0..n)
                .map(|k| w_dot[k] - dgamma_tv[k] - b[k] - cc[k])
                .collect();
            nodes.push((vv.to_vec(), v_dot, d2));
        }
        Ok(VariationField {
            kind: FieldKind::Jacobi,
            track: HermiteTrack::from_states(c.s(), c.t(), nodes),
        })
    }
}

/// Solve the 𝓛-Jacobi boundary value problem V(s) = v, V(t) = w along a
/// certified geodesic by linear shooting.
pub fn jacobi_solve(
    m: &MetricFamily,
    geo: &LGeodesic,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<VariationField> {
    JacobiSystem::build(m, geo)?.solve(m, geo, &v.components, &w.components)
}

/// Max pointwise g-norm of ∇_T V − Ric(V)^♯ at the curve nodes.
pub fn transport_residual(m: &MetricFamily, c: &Curve, f: &VariationField) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..=c.segments() {
        let tau = c.track.node_time(i);
        let (val, d1, d2) = f.track.eval(tau);
        let (x, t_vel, t_acc) = c.state2(tau);
        let geo = eval_geometry(m, &Point::new(x), tau).expect("in domain");
        let (w, _) = covariant_field_derivatives(&geo, &t_vel, &t_acc, &val, &d1, &d2);
        let rv = geo.ric_sharp(&val);
        let diff: Vec<f64> = (0..m.dim).map(|k| w[k] - rv[k]).collect();
        worst = worst.max(libm::sqrt(geo.inner(&diff, &diff).max(0.0)));
    }
    worst
}

/// Max pointwise g-norm of the Jacobi defect
/// ∇_T∇_T V + Rm(V,T)T − 2(∇_V Ric)(T)^♯ − 2Ric(∇_T V)^♯ − ½∇²R(V)^♯
/// at the curve nodes, with ∇_T∇_T the frozen-connection operator the
/// equation is stated in.
pub fn jacobi_residual(m: &MetricFamily, c: &Curve, f: &VariationField) -> f64 {
    let n = m.dim;
    let mut worst = 0.0f64;
    for i in 0..=c.segments() {
        let tau = c.track.node_time(i);
        let (val, d1, d2) = f.track.eval(tau);
        let (x, t_vel, t_acc) = c.state2(tau);
        let geo = eval_geometry(m, &Point::new(x), tau).expect("in domain");
        let (w, w2) = covariant_field_derivatives(&geo, &t_vel, &t_acc, &val, &d1, &d2);
        let rm = geo.rm_vector(&val, &t_vel, &t_vel);
        let cov = geo.cov_ric_sharp(&val, &t_vel);
        let ric_w = geo.ric_sharp(&w);
        let hess = geo.hess_r_sharp(&val);
        let dtg = geo.dtau_gamma_bilinear(&t_vel, &val);
        let defect: Vec<f64> = (0..n)
            .map(|k| {
                (w2[k] - dtg[k]) + rm[k] - 2.0 * cov[k] - 2.0 * ric_w[k] - 0.5 * hess[k]
            })
            .collect();
        worst = worst.max(libm::sqrt(geo.inner(&defect, &defect).max(0.0)));
    }
    worst
}
