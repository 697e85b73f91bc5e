//! The two-point distance L((p,s),(q,t)) = inf 𝓛 and its derivatives.
//!
//! First derivatives come from the first variation evaluated on the
//! minimizer:
//!
//! ∇_p L = −2T(s), ∇_q L = 2T(t),
//! ∂L/∂s = −R_{g_s}(p) + |T|²(s), ∂L/∂t = R_{g_t}(q) − |T|²(t).
//!
//! Second-order data comes from the tensorial second variation Q, evaluated
//! in two routes that must agree up to integration-by-parts error:
//!
//! bulk form:     Q(V,V) = ∫ 2|∇_T V|² − 2(∇_T Ric)(V,V) + ∇²R(V,V)
//!                         − 2Rm(V,T,T,V) + 4(∇_V Ric)(T,V) dτ
//! boundary form: Q(V,V) = 2⟨∇_T V,V⟩|ₛᵗ + ∫ ⟨V, ∇²R(V)^♯ − 2Rm(V,T)T
//!                         + 4(∇_V Ric)(T)^♯ − 2∇_T∇_T V + 4Ric(∇_T V)^♯⟩ dτ
//!
//! The M×M Hessian of L in directions (v ⊕ w) is Q(J,J) for the 𝓛-Jacobi
//! field J with J(s) = v, J(t) = w; the □ operator traces it over
//! (1/√2)(eᵢ ⊕ ∥_γ eᵢ) for a g_s-orthonormal basis {eᵢ}.

use crate::geom::{eval_geometry, GeometryData, MetricFamily, Point, TangentVector};
use crate::lgeo::{
    covariant_field_derivatives, jacobi_solve, solve_bvp_with, transport, BvpOptions,
    JacobiSystem, LGeodesic, VariationField,
};
use crate::linalg::SquareMatrix;
use crate::quad::foreach_gl8_node;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// The argument ((p,s),(q,t)) of L.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointPair {
    pub p: Point,
    pub s: f64,
    pub q: Point,
    pub t: f64,
}

impl EndpointPair {
    pub fn new(p: Point, s: f64, q: Point, t: f64) -> Self {
        EndpointPair { p, s, q, t }
    }
}

/// L together with its minimizer and closed-form first derivatives.
#[derive(Debug, Clone)]
pub struct LData {
    pub value: f64,
    pub geodesic: LGeodesic,
    /// ∇_p L = −2T(s) (vector at (p, s)).
    pub grad_p: TangentVector,
    /// ∇_q L = 2T(t) (vector at (q, t)).
    pub grad_q: TangentVector,
    pub dl_ds: f64,
    pub dl_dt: f64,
}

impl LData {
    /// |∇_p L|² under g_s.
    pub fn grad_p_norm_sq(&self, m: &MetricFamily) -> f64 {
        let g = m.eval(&self.grad_p.base.coords, self.geodesic.curve.s());
        g.bilinear(&self.grad_p.components, &self.grad_p.components)
    }

    /// |∇_q L|² under g_t.
    pub fn grad_q_norm_sq(&self, m: &MetricFamily) -> f64 {
        let g = m.eval(&self.grad_q.base.coords, self.geodesic.curve.t());
        g.bilinear(&self.grad_q.components, &self.grad_q.components)
    }
}

/// Solve the boundary value problem and fill in the derivative formulas.
pub fn distance(m: &MetricFamily, e: &EndpointPair) -> Result<LData> {
    distance_with(m, e, &BvpOptions::default())
}

pub fn distance_with(m: &MetricFamily, e: &EndpointPair, opts: &BvpOptions) -> Result<LData> {
    let geo = solve_bvp_with(m, &e.p, e.s, &e.q, e.t, opts)?;
    Ok(ldata_from_geodesic(m, e, geo))
}

/// Derivative formulas evaluated on an already-solved minimizer.
pub fn ldata_from_geodesic(m: &MetricFamily, e: &EndpointPair, geo: LGeodesic) -> LData {
    let c = &geo.curve;
    let (_, t_s) = c.state(e.s);
    let (_, t_t) = c.state(e.t);
    let geom_s = eval_geometry(m, &e.p, e.s).expect("endpoint in domain");
    let geom_t = eval_geometry(m, &e.q, e.t).expect("endpoint in domain");

    let grad_p = TangentVector::new(e.p.clone(), t_s.iter().map(|v| -2.0 * v).collect());
    let grad_q = TangentVector::new(e.q.clone(), t_t.iter().map(|v| 2.0 * v).collect());
    let dl_ds = -geom_s.scalar + geom_s.norm_sq(&t_s);
    let dl_dt = geom_t.scalar - geom_t.norm_sq(&t_t);

    LData {
        value: geo.lagrangian,
        geodesic: geo,
        grad_p,
        grad_q,
        dl_ds,
        dl_dt,
    }
}

/// Geometry sampled at every quadrature abscissa of one curve, so repeated
/// quadratures along the same minimizer share a single evaluation pass.
pub struct CurveGeometry {
    pub taus: Vec<f64>,
    pub weights: Vec<f64>,
    pub vels: Vec<Vec<f64>>,
    pub accs: Vec<Vec<f64>>,
    pub geos: Vec<GeometryData>,
}

pub fn curve_geometry(m: &MetricFamily, c: &Curve) -> CurveGeometry {
    let mut taus = Vec::new();
    let mut weights = Vec::new();
    foreach_gl8_node(c.s(), c.t(), c.segments(), |tau, w| {
        taus.push(tau);
        weights.push(w);
    });
    let mut vels = Vec::with_capacity(taus.len());
    let mut accs = Vec::with_capacity(taus.len());
    let mut geos = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let (x, v, a) = c.state2(tau);
        geos.push(eval_geometry(m, &Point::new(x), tau).expect("curve in domain"));
        vels.push(v);
        accs.push(a);
    }
    CurveGeometry {
        taus,
        weights,
        vels,
        accs,
        geos,
    }
}

/// Integrand of the bilinear bulk (QC1) form at one parameter.
fn q_bulk_integrand(
    geo: &GeometryData,
    t_vel: &[f64],
    v: &[f64],
    w: &[f64],
    dv: &[f64],
    dw: &[f64],
) -> f64 {
    2.0 * geo.inner(dv, dw) - 2.0 * geo.cov_ric(t_vel, v, w) + geo.hess_r_bilinear(v, w)
        - 2.0 * geo.rm_scalar(v, t_vel, t_vel, w)
        + 2.0 * geo.cov_ric(v, t_vel, w)
        + 2.0 * geo.cov_ric(w, t_vel, v)
}

/// Q(V, W) against a precomputed geometry table.
pub fn q_bilinear_cached(cg: &CurveGeometry, a: &VariationField, b: &VariationField) -> f64 {
    let mut acc = 0.0;
    for (idx, &tau) in cg.taus.iter().enumerate() {
        let g = &cg.geos[idx];
        let t_vel = &cg.vels[idx];
        let t_acc = &cg.accs[idx];
        let (va, d1a, d2a) = a.track.eval(tau);
        let (vb, d1b, d2b) = b.track.eval(tau);
        let (dva, _) = covariant_field_derivatives(g, t_vel, t_acc, &va, &d1a, &d2a);
        let (dvb, _) = covariant_field_derivatives(g, t_vel, t_acc, &vb, &d1b, &d2b);
        acc += cg.weights[idx] * q_bulk_integrand(g, t_vel, &va, &vb, &dva, &dvb);
    }
    acc
}

/// Symmetric bilinear second variation Q(V, W) by quadrature of the bulk
/// form along a certified geodesic.
pub fn q_bilinear(
    m: &MetricFamily,
    geo: &LGeodesic,
    a: &VariationField,
    b: &VariationField,
) -> f64 {
    q_bilinear_cached(&curve_geometry(m, &geo.curve), a, b)
}

/// Both published forms of the total second variation Q(V,V):
/// `(q_boundary_form, q_bulk_form)`. They agree up to integration-by-parts
/// (quadrature) error on any field along a certified geodesic.
pub fn second_variation(m: &MetricFamily, geo: &LGeodesic, field: &VariationField) -> (f64, f64) {
    second_variation_cached(m, &curve_geometry(m, &geo.curve), geo, field)
}

pub fn second_variation_cached(
    m: &MetricFamily,
    cg: &CurveGeometry,
    geo: &LGeodesic,
    field: &VariationField,
) -> (f64, f64) {
    let c = &geo.curve;
    let n = m.dim;

    let bulk = q_bilinear_cached(cg, field, field);

    // Boundary form: 2⟨∇_T V, V⟩ at t minus at s, plus its own integral.
    let boundary_term = |tau: f64| -> f64 {
        let (x, t_vel, t_acc) = c.state2(tau);
        let g = eval_geometry(m, &Point::new(x), tau).expect("in domain");
        let (v, d1, d2) = field.track.eval(tau);
        let (w, _) = covariant_field_derivatives(&g, &t_vel, &t_acc, &v, &d1, &d2);
        2.0 * g.inner(&w, &v)
    };
    let mut acc = boundary_term(c.t()) - boundary_term(c.s());
    for (idx, &tau) in cg.taus.iter().enumerate() {
        let g = &cg.geos[idx];
        let t_vel = &cg.vels[idx];
        let t_acc = &cg.accs[idx];
        let (v, d1, d2) = field.track.eval(tau);
        let (w, w2) = covariant_field_derivatives(g, t_vel, t_acc, &v, &d1, &d2);
        let hess = g.hess_r_sharp(&v);
        let rm = g.rm_vector(&v, t_vel, t_vel);
        let cov = g.cov_ric_sharp(&v, t_vel);
        let ric_w = g.ric_sharp(&w);
        // The published −2∇_T∇_T V uses the frozen-connection operator:
        // strip the (∂τΓ)(T,V) part of the τ-inclusive second derivative.
        let dtg = g.dtau_gamma_bilinear(t_vel, &v);
        let integrand: Vec<f64> = (0..n)
            .map(|k| {
                hess[k] - 2.0 * rm[k] + 4.0 * cov[k] - 2.0 * (w2[k] - dtg[k]) + 4.0 * ric_w[k]
            })
            .collect();
        acc += cg.weights[idx] * g.inner(&v, &integrand);
    }

    (acc, bulk)
}

/// H(T,V) = 2Ric_τ(V,V) + 4[(∇_T Ric)(V,V) − (∇_V Ric)(V,T)] + 2|Ric(V)|²
///          + 2Rm(V,T,T,V) − ∇²R(V,V), pointwise.
pub fn h_term(geo: &GeometryData, t_vel: &[f64], v: &[f64]) -> f64 {
    let ric_v = geo.ric_sharp(v);
    2.0 * geo.dricci_dtau.bilinear(v, v)
        + 4.0 * (geo.cov_ric(t_vel, v, v) - geo.cov_ric(v, v, t_vel))
        + 2.0 * geo.inner(&ric_v, &ric_v)
        + 2.0 * geo.rm_scalar(v, t_vel, t_vel, v)
        - geo.hess_r_bilinear(v, v)
}

/// Gram–Schmidt the chart basis into a g-orthonormal basis.
pub fn orthonormal_basis(g: &SquareMatrix<f64>) -> Vec<Vec<f64>> {
    orthonormal_basis_from(g, None)
}

/// Gram–Schmidt arbitrary seed columns (default: the chart basis) under g.
pub fn orthonormal_basis_from(
    g: &SquareMatrix<f64>,
    seeds: Option<&[Vec<f64>]>,
) -> Vec<Vec<f64>> {
    let n = g.n;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v: Vec<f64> = match seeds {
            Some(cols) => cols[i].clone(),
            None => {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            }
        };
        for b in &basis {
            let proj = g.bilinear(&v, b);
            for k in 0..n {
                v[k] -= proj * b[k];
            }
        }
        let norm = libm::sqrt(g.bilinear(&v, &v));
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
    basis
}

/// Per-pair second-order analysis sharing one Jacobi fundamental system,
/// one transport solve and one geometry table: the Q-matrix over the
/// transported diagonal directions, the □ trace, and the ingredients the
/// soliton residual needs.
pub struct HessianAnalysis {
    /// g_s-orthonormal basis {eᵢ} at p.
    pub basis: Vec<Vec<f64>>,
    /// ∥_γ eᵢ at q.
    pub transported: Vec<Vec<f64>>,
    /// Q(Jᵢ, Jⱼ) for the Jacobi fields with boundary (eᵢ, ∥eᵢ).
    pub q_matrix: SquareMatrix<f64>,
    /// □L = ½ Σᵢ Q(Jᵢ, Jᵢ).
    pub box_l: f64,
}

/// Build the shared second-order analysis along a solved minimizer.
/// `seeds` picks the basis to orthonormalize (chart basis by default).
pub fn hessian_analysis(
    m: &MetricFamily,
    geo: &LGeodesic,
    seeds: Option<&[Vec<f64>]>,
) -> Result<HessianAnalysis> {
    if geo.multiplicity_flag {
        return Err(Error::Multiplicity);
    }
    let c = &geo.curve;
    let n = m.dim;
    let s = c.s();
    let p = Point::new(c.position(s));
    let g_s = m.eval(&p.coords, s);
    let basis = orthonormal_basis_from(&g_s, seeds);
    let par = transport(m, geo)?;
    let system = JacobiSystem::build(m, geo)?;
    let cg = curve_geometry(m, c);

    let transported: Vec<Vec<f64>> = basis.iter().map(|e| par.apply(e)).collect();
    let fields: Vec<VariationField> = basis
        .iter()
        .zip(transported.iter())
        .map(|(v, w)| system.solve(m, geo, v, w))
        .collect::<Result<Vec<_>>>()?;

    let mut q_matrix = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let q = q_bilinear_cached(&cg, &fields[i], &fields[j]);
            *q_matrix.at_mut(i, j) = q;
            *q_matrix.at_mut(j, i) = q;
        }
    }
    let box_l = 0.5 * (0..n).map(|i| q_matrix.at(i, i)).sum::<f64>();
    Ok(HessianAnalysis {
        basis,
        transported,
        q_matrix,
        box_l,
    })
}

/// ∇²_{M×M} L (v⊕w, v⊕w) along a solved minimizer, computed as Q(J,J) for
/// the 𝓛-Jacobi field J with J(s) = v, J(t) = w.
pub fn hessian_from_geodesic(
    m: &MetricFamily,
    geo: &LGeodesic,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<f64> {
    if geo.multiplicity_flag {
        return Err(Error::Multiplicity);
    }
    let j = jacobi_solve(m, geo, v, w)?;
    Ok(q_bilinear(m, geo, &j, &j))
}

/// ∇²_{M×M} L (v⊕w, v⊕w) at an endpoint pair (solves the BVP first).
pub fn hessian_mm(
    m: &MetricFamily,
    e: &EndpointPair,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<f64> {
    hessian_mm_with(m, e, v, w, &BvpOptions::default())
}

pub fn hessian_mm_with(
    m: &MetricFamily,
    e: &EndpointPair,
    v: &TangentVector,
    w: &TangentVector,
    opts: &BvpOptions,
) -> Result<f64> {
    let geo = solve_bvp_with(m, &e.p, e.s, &e.q, e.t, opts)?;
    hessian_from_geodesic(m, &geo, v, w)
}

/// □_{M×M} L: trace of the M×M Hessian over (1/√2)(eᵢ ⊕ ∥_γ eᵢ) for a
/// g_s-orthonormal basis at p.
pub fn box_operator(m: &MetricFamily, e: &EndpointPair) -> Result<f64> {
    box_operator_with(m, e, &BvpOptions::default())
}

pub fn box_operator_with(m: &MetricFamily, e: &EndpointPair, opts: &BvpOptions) -> Result<f64> {
    let geo = solve_bvp_with(m, &e.p, e.s, &e.q, e.t, opts)?;
    box_from_geodesic(m, &geo, None)
}

/// □ along an already-solved minimizer; `seeds` selects the orthonormal
/// basis used for the trace (the value is basis-independent; the ½ comes
/// from the (1/√2)(eᵢ ⊕ ∥eᵢ) normalization).
pub fn box_from_geodesic(
    m: &MetricFamily,
    geo: &LGeodesic,
    seeds: Option<&[Vec<f64>]>,
) -> Result<f64> {
    Ok(hessian_analysis(m, geo, seeds)?.box_l)
}
