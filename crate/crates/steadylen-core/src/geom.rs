//! Pointwise geometry of a time-dependent metric.
//!
//! Everything downstream — geodesic equations, variation formulas, the
//! Hessian machinery — consumes the quantities assembled here: Γ, Rm, Ric,
//! R, ∇R, ∇²R, ∇Ric, ∂τRic, ∂τg, ∂τΓ. All derivatives come from nested
//! forward-mode AD of the closed-form metric; a central finite-difference
//! oracle reproduces each field in the test suite, never in this path.
//!
//! Index conventions (row-major flat tensors):
//! * `christoffel[k][i][j]` = Γ^k_{ij}
//! * mixed curvature `[l][i][j][k]` = component l of Rm(∂_i,∂_j)∂_k with
//!   Rm(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z
//! * lowered `riemann[i][j][k][l]` = ⟨Rm(∂_i,∂_j)∂_k, ∂_l⟩
//! * `ricci[j][k]` = Σ_i (Rm(∂_i,∂_j)∂_k)^i, so the round sphere is positive
//! * `cov_ricci[k][i][j]` = (∇_k Ric)_{ij}
//!
//! The flow convention is forward in the parameter: ∂g/∂τ = −2 Ric(g).

use crate::linalg::SquareMatrix;
use crate::scalar::{Dual, Scalar};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// A chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A tangent vector in chart components at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Self {
        TangentVector { base, components }
    }
}

/// Open time interval; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub lo: f64,
    pub hi: f64,
}

impl TimeInterval {
    pub const ALL: TimeInterval = TimeInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, tau: f64) -> bool {
        tau > self.lo && tau < self.hi
    }
}

/// Region of the chart on which the metric is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartDomain {
    /// All of ℝⁿ.
    All,
    /// Open ball |x| < radius.
    Ball { radius: f64 },
    /// Polar band on the sphere: every angle coordinate except the last is
    /// restricted to (margin, π − margin); the final azimuth is free.
    PolarBand { margin: f64 },
}

impl ChartDomain {
    pub fn contains(&self, coords: &[f64]) -> bool {
        match self {
            ChartDomain::All => true,
            ChartDomain::Ball { radius } => {
                let r2: f64 = coords.iter().map(|c| c * c).sum();
                r2 < radius * radius
            }
            ChartDomain::PolarBand { margin } => coords[..coords.len() - 1]
                .iter()
                .all(|&th| th > *margin && th < core::f64::consts::PI - *margin),
        }
    }
}

/// Closed-form metric families. Each case is an exact Ricci flow solution,
/// certified by `flows::verify_flow`.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    /// Static flat metric δ on ℝⁿ.
    Euclidean,
    /// g(τ) = (1 − 2(n−1)τ)·g_round on Sⁿ in hyperspherical coordinates
    /// (θ₁, …, θ_{n−1}, φ).
    ShrinkingSphere,
    /// g_ij = δ_ij / (e^{4τ} + |x|²) on ℝ², the cigar in its flow gauge.
    Cigar,
}

/// A smooth one-parameter family of metrics g(x, τ) on a single chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFamily {
    pub dim: usize,
    pub time_domain: TimeInterval,
    pub chart_domain: ChartDomain,
    pub kind: MetricKind,
}

impl MetricFamily {
    /// Metric components at a (possibly dual-lifted) chart point and time.
    pub fn eval<S: Scalar>(&self, x: &[S], tau: S) -> SquareMatrix<S> {
        let n = self.dim;
        match self.kind {
            MetricKind::Euclidean => SquareMatrix::identity(n),
            MetricKind::ShrinkingSphere => {
                // g_round = dθ₁² + sin²θ₁ dθ₂² + sin²θ₁ sin²θ₂ dθ₃² + …
                let two = S::from_f64(2.0 * (n as f64 - 1.0));
                let factor = S::one() - two * tau;
                let mut m = SquareMatrix::zeros(n);
                let mut prefix = S::one();
                for i in 0..n {
                    *m.at_mut(i, i) = factor * prefix;
                    if i + 1 < n {
                        let s = x[i].sin();
                        prefix *= s * s;
                    }
                }
                m
            }
            MetricKind::Cigar => {
                let four = S::from_f64(4.0);
                let mut denom = (four * tau).exp();
                for xi in x {
                    denom += *xi * *xi;
                }
                let inv = S::one() / denom;
                let mut m = SquareMatrix::zeros(n);
                for i in 0..n {
                    *m.at_mut(i, i) = inv;
                }
                m
            }
        }
    }

    pub fn contains_point(&self, coords: &[f64]) -> bool {
        coords.len() == self.dim && self.chart_domain.contains(coords)
    }

    pub fn contains_time(&self, tau: f64) -> bool {
        self.time_domain.contains(tau)
    }

    fn check_domain(&self, coords: &[f64], tau: f64) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: coords.len(),
            });
        }
        if !self.contains_time(tau) {
            return Err(Error::OutOfDomain {
                at: tau,
                what: "time",
            });
        }
        if !self.chart_domain.contains(coords) {
            return Err(Error::OutOfDomain {
                at: tau,
                what: "chart",
            });
        }
        Ok(())
    }
}

/// Γ^k_{ij} as a flat tensor `[k][i][j]`, generic so dual lifts of `x`/`tau`
/// differentiate it.
pub fn christoffel<S: Scalar>(m: &MetricFamily, x: &[S], tau: S) -> Vec<S> {
    let n = m.dim;
    let g = m.eval(x, tau);
    let g_inv = g.inverse().expect("metric invertible inside the chart");

    // ∂_k g as n matrices via one dual lift per direction.
    let mut dg: Vec<SquareMatrix<S>> = Vec::with_capacity(n);
    for k in 0..n {
        let xd: Vec<Dual<S>> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                if i == k {
                    Dual::variable(xi)
                } else {
                    Dual::constant(xi)
                }
            })
            .collect();
        let gd = m.eval(&xd, Dual::constant(tau));
        dg.push(SquareMatrix {
            n,
            data: gd.data.iter().map(|d| d.du).collect(),
        });
    }

    let half = S::from_f64(0.5);
    let mut gamma = vec![S::zero(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..=i {
                let mut acc = S::zero();
                for l in 0..n {
                    let term = dg[i].at(l, j) + dg[j].at(l, i) - dg[l].at(i, j);
                    acc += g_inv.at(k, l) * term;
                }
                let v = half * acc;
                gamma[k * n * n + i * n + j] = v;
                gamma[k * n * n + j * n + i] = v;
            }
        }
    }
    gamma
}

/// Mixed curvature `[l][i][j][k]` = (Rm(∂_i,∂_j)∂_k)^l.
pub fn curvature_mixed<S: Scalar>(m: &MetricFamily, x: &[S], tau: S) -> Vec<S> {
    let n = m.dim;
    let gamma = christoffel(m, x, tau);
    // ∂_m Γ via dual lifts.
    let mut dgamma: Vec<Vec<S>> = Vec::with_capacity(n);
    for d in 0..n {
        let xd: Vec<Dual<S>> = x
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                if i == d {
                    Dual::variable(xi)
                } else {
                    Dual::constant(xi)
                }
            })
            .collect();
        let gd = christoffel(m, &xd, Dual::constant(tau));
        dgamma.push(gd.iter().map(|v| v.du).collect());
    }

    let g = |k: usize, i: usize, j: usize| gamma[k * n * n + i * n + j];
    let dg = |d: usize, k: usize, i: usize, j: usize| dgamma[d][k * n * n + i * n + j];

    let mut rm = vec![S::zero(); n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = dg(i, l, j, k) - dg(j, l, i, k);
                    for p in 0..n {
                        acc += g(l, i, p) * g(p, j, k) - g(l, j, p) * g(p, i, k);
                    }
                    rm[l * n * n * n + i * n * n + j * n + k] = acc;
                }
            }
        }
    }
    rm
}

/// Ric_{jk} = Σ_i (Rm(∂_i,∂_j)∂_k)^i.
pub fn ricci<S: Scalar>(m: &MetricFamily, x: &[S], tau: S) -> SquareMatrix<S> {
    let n = m.dim;
    let rm = curvature_mixed(m, x, tau);
    SquareMatrix::from_fn(n, |j, k| {
        let mut acc = S::zero();
        for i in 0..n {
            acc += rm[i * n * n * n + i * n * n + j * n + k];
        }
        acc
    })
}

/// Scalar curvature R = g^{jk} Ric_{jk}.
pub fn scalar_curvature<S: Scalar>(m: &MetricFamily, x: &[S], tau: S) -> S {
    let n = m.dim;
    let g_inv = m.eval(x, tau).inverse().expect("metric invertible");
    let ric = ricci(m, x, tau);
    let mut acc = S::zero();
    for j in 0..n {
        for k in 0..n {
            acc += g_inv.at(j, k) * ric.at(j, k);
        }
    }
    acc
}

/// Every pointwise quantity the variational formulas consume, at one (x, τ).
#[derive(Debug, Clone)]
pub struct GeometryData {
    pub dim: usize,
    pub g: SquareMatrix<f64>,
    pub g_inv: SquareMatrix<f64>,
    /// ∂τ g_ij (equals −2 Ric on the catalog, certified by `flows`).
    pub dg_dtau: SquareMatrix<f64>,
    /// Γ^k_{ij}, layout `[k][i][j]`.
    pub christoffel: Vec<f64>,
    /// ∂_m Γ^k_{ij}, layout `[m][k][i][j]`.
    pub dchristoffel_dx: Vec<f64>,
    /// ∂τ Γ^k_{ij}, layout `[k][i][j]`.
    pub dchristoffel_dtau: Vec<f64>,
    /// Lowered Rm_{ijkl} = ⟨Rm(∂_i,∂_j)∂_k, ∂_l⟩.
    pub riemann: Vec<f64>,
    pub ricci: SquareMatrix<f64>,
    /// Ric^k_j = g^{ki} Ric_{ij} (the ♯ endomorphism).
    pub ricci_up: SquareMatrix<f64>,
    pub scalar: f64,
    /// Raised gradient (∇R)^k = g^{kl} ∂_l R.
    pub grad_r: Vec<f64>,
    /// Covariant Hessian (∇²R)_{ij}.
    pub hess_r: SquareMatrix<f64>,
    /// (∇_k Ric)_{ij}, layout `[k][i][j]`.
    pub cov_ricci: Vec<f64>,
    /// ∂τ Ric_{ij} (coordinate time derivative of the components).
    pub dricci_dtau: SquareMatrix<f64>,
}

impl GeometryData {
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[k * self.dim * self.dim + i * self.dim + j]
    }

    #[inline]
    pub fn dgamma_dx(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.dchristoffel_dx[m * n * n * n + k * n * n + i * n + j]
    }

    #[inline]
    pub fn dgamma_dtau(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dchristoffel_dtau[k * self.dim * self.dim + i * self.dim + j]
    }

    #[inline]
    pub fn rm(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.riemann[i * n * n * n + j * n * n + k * n + l]
    }

    /// ⟨v, w⟩ under g.
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        self.g.bilinear(v, w)
    }

    pub fn norm_sq(&self, v: &[f64]) -> f64 {
        self.inner(v, v)
    }

    /// Γ(u, v)^k contraction.
    pub fn gamma_bilinear(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma(k, i, j) * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// (∂τΓ)(u, v)^k contraction: the gap between the τ-inclusive covariant
    /// derivative along a curve and the spatially-frozen one that the
    /// variational formulas are written in.
    pub fn dtau_gamma_bilinear(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.dgamma_dtau(k, i, j) * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Ric(v)^♯ as a vector.
    pub fn ric_sharp(&self, v: &[f64]) -> Vec<f64> {
        self.ricci_up.mul_vec(v)
    }

    /// Rm(v, w, z, u), fully lowered.
    pub fn rm_scalar(&self, v: &[f64], w: &[f64], z: &[f64], u: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += self.rm(i, j, k, l) * v[i] * w[j] * z[k] * u[l];
                    }
                }
            }
        }
        acc
    }

    /// (Rm(v, w) z)^♯ as a vector (mixed curvature contraction).
    pub fn rm_vector(&self, v: &[f64], w: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        // Lowered components contracted on three slots leave a covector in l.
        let mut cov = vec![0.0; n];
        for l in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        acc += self.rm(i, j, k, l) * v[i] * w[j] * z[k];
                    }
                }
            }
            cov[l] = acc;
        }
        self.g_inv.mul_vec(&cov)
    }

    /// (∇_x Ric)(y, z).
    pub fn cov_ric(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    acc += self.cov_ricci[k * n * n + i * n + j] * x[k] * y[i] * z[j];
                }
            }
        }
        acc
    }

    /// (∇_x Ric)(y, ·)^♯ as a vector.
    pub fn cov_ric_sharp(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut cov = vec![0.0; n];
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for i in 0..n {
                    acc += self.cov_ricci[k * n * n + i * n + j] * x[k] * y[i];
                }
            }
            cov[j] = acc;
        }
        self.g_inv.mul_vec(&cov)
    }

    /// ∇²R(v, w).
    pub fn hess_r_bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.hess_r.bilinear(v, w)
    }

    /// ∇²R(v, ·)^♯ as a vector.
    pub fn hess_r_sharp(&self, v: &[f64]) -> Vec<f64> {
        let cov = self.hess_r.mul_vec(v);
        self.g_inv.mul_vec(&cov)
    }
}

/// Evaluate the full geometry at (x, τ).
pub fn eval_geometry(m: &MetricFamily, x: &Point, tau: f64) -> Result<GeometryData> {
    m.check_domain(&x.coords, tau)?;
    let n = m.dim;
    let coords = &x.coords;

    let g = m.eval(coords, tau);
    if !g.is_positive_definite() {
        return Err(Error::DegenerateMetric { at: tau });
    }
    let g_inv = g.inverse().expect("positive definite");

    // ∂τ g.
    let xd: Vec<Dual<f64>> = coords.iter().map(|&c| Dual::constant(c)).collect();
    let g_tau = m.eval(&xd, Dual::variable(tau));
    let dg_dtau = SquareMatrix {
        n,
        data: g_tau.data.iter().map(|d| d.du).collect(),
    };

    let gamma = christoffel(m, coords, tau);

    // ∂_m Γ and ∂τ Γ.
    let mut dchristoffel_dx = vec![0.0; n * n * n * n];
    for d in 0..n {
        let xdual: Vec<Dual<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == d {
                    Dual::variable(c)
                } else {
                    Dual::constant(c)
                }
            })
            .collect();
        let gd = christoffel(m, &xdual, Dual::constant(tau));
        for (idx, v) in gd.iter().enumerate() {
            dchristoffel_dx[d * n * n * n + idx] = v.du;
        }
    }
    let gtau_gamma = christoffel(m, &xd, Dual::variable(tau));
    let dchristoffel_dtau: Vec<f64> = gtau_gamma.iter().map(|v| v.du).collect();

    // Mixed curvature from Γ and ∂Γ already computed.
    let gam = |k: usize, i: usize, j: usize| gamma[k * n * n + i * n + j];
    let dgam =
        |d: usize, k: usize, i: usize, j: usize| dchristoffel_dx[d * n * n * n + k * n * n + i * n + j];
    let mut mixed = vec![0.0; n * n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = dgam(i, l, j, k) - dgam(j, l, i, k);
                    for p in 0..n {
                        acc += gam(l, i, p) * gam(p, j, k) - gam(l, j, p) * gam(p, i, k);
                    }
                    mixed[l * n * n * n + i * n * n + j * n + k] = acc;
                }
            }
        }
    }

    // Lowered Riemann and Ricci trace.
    let mut riemann = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for p in 0..n {
                        acc += g.at(l, p) * mixed[p * n * n * n + i * n * n + j * n + k];
                    }
                    riemann[i * n * n * n + j * n * n + k * n + l] = acc;
                }
            }
        }
    }
    let ric = SquareMatrix::from_fn(n, |j, k| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += mixed[i * n * n * n + i * n * n + j * n + k];
        }
        acc
    });
    let ricci_up = g_inv.matmul(&ric);
    let scalar = {
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += g_inv.at(j, k) * ric.at(j, k);
            }
        }
        acc
    };

    // ∂_k R and ∂_i∂_j R by one and two dual levels over the full pipeline.
    let mut dr = vec![0.0; n];
    for k in 0..n {
        let xdual: Vec<Dual<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == k {
                    Dual::variable(c)
                } else {
                    Dual::constant(c)
                }
            })
            .collect();
        dr[k] = scalar_curvature(m, &xdual, Dual::constant(tau)).du;
    }
    let grad_r = g_inv.mul_vec(&dr);

    let mut ddr = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let xdual: Vec<Dual<Dual<f64>>> = coords
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let inner = if k == j {
                        Dual::variable(c)
                    } else {
                        Dual::constant(c)
                    };
                    if k == i {
                        Dual::variable(inner)
                    } else {
                        Dual::constant(inner)
                    }
                })
                .collect();
            let v = scalar_curvature(m, &xdual, Dual::constant(Dual::constant(tau)));
            *ddr.at_mut(i, j) = v.du.du;
            *ddr.at_mut(j, i) = v.du.du;
        }
    }
    let hess_r = SquareMatrix::from_fn(n, |i, j| {
        let mut acc = ddr.at(i, j);
        for k in 0..n {
            acc -= gam(k, i, j) * dr[k];
        }
        acc
    });

    // ∂_k Ric then covariantize: (∇_k Ric)_{ij} = ∂_k Ric_ij − Γ^m_{ki}Ric_mj − Γ^m_{kj}Ric_im.
    let mut cov_ricci = vec![0.0; n * n * n];
    for k in 0..n {
        let xdual: Vec<Dual<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == k {
                    Dual::variable(c)
                } else {
                    Dual::constant(c)
                }
            })
            .collect();
        let ric_d = ricci(m, &xdual, Dual::constant(tau));
        for i in 0..n {
            for j in 0..n {
                let mut acc = ric_d.at(i, j).du;
                for p in 0..n {
                    acc -= gam(p, k, i) * ric.at(p, j);
                    acc -= gam(p, k, j) * ric.at(i, p);
                }
                cov_ricci[k * n * n + i * n + j] = acc;
            }
        }
    }

    // ∂τ Ric.
    let ric_tau = ricci(m, &xd, Dual::variable(tau));
    let dricci_dtau = SquareMatrix {
        n,
        data: ric_tau.data.iter().map(|d| d.du).collect(),
    };

    Ok(GeometryData {
        dim: n,
        g,
        g_inv,
        dg_dtau,
        christoffel: gamma,
        dchristoffel_dx,
        dchristoffel_dtau,
        riemann,
        ricci: ric,
        ricci_up,
        scalar,
        grad_r,
        hess_r,
        cov_ricci,
        dricci_dtau,
    })
}

/// Reduced geometry for the geodesic right-hand side: Γ, Ric^♯ and ∇R only.
#[derive(Debug, Clone)]
pub struct GeodesicGeometry {
    pub dim: usize,
    pub christoffel: Vec<f64>,
    pub ricci_up: SquareMatrix<f64>,
    pub grad_r: Vec<f64>,
}

impl GeodesicGeometry {
    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[k * self.dim * self.dim + i * self.dim + j]
    }
}

pub fn eval_geodesic_geometry(m: &MetricFamily, coords: &[f64], tau: f64) -> GeodesicGeometry {
    let n = m.dim;
    let gamma = christoffel(m, coords, tau);
    let g_inv = m.eval(coords, tau).inverse().expect("metric invertible");
    let ric = ricci(m, coords, tau);
    let ricci_up = g_inv.matmul(&ric);
    let mut dr = vec![0.0; n];
    for k in 0..n {
        let xdual: Vec<Dual<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == k {
                    Dual::variable(c)
                } else {
                    Dual::constant(c)
                }
            })
            .collect();
        dr[k] = scalar_curvature(m, &xdual, Dual::constant(tau)).du;
    }
    let grad_r = g_inv.mul_vec(&dr);
    GeodesicGeometry {
        dim: n,
        christoffel: gamma,
        ricci_up,
        grad_r,
    }
}

/// ∇_X Y in chart components from a field value and its Jacobian:
/// (∇_X Y)^k = X^i (∂_i Y^k + Γ^k_{ij} Y^j). `field_jacobian.at(i, k)` must
/// hold ∂_i Y^k.
pub fn covariant_derivative(
    geo: &GeometryData,
    along: &TangentVector,
    field_value: &TangentVector,
    field_jacobian: &SquareMatrix<f64>,
) -> Result<TangentVector> {
    let n = geo.dim;
    if along.components.len() != n || field_value.components.len() != n || field_jacobian.n != n {
        return Err(Error::Shape {
            expected: n,
            got: along.components.len().max(field_value.components.len()),
        });
    }
    let x = &along.components;
    let y = &field_value.components;
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[i] * field_jacobian.at(i, k);
            for j in 0..n {
                acc += x[i] * geo.gamma(k, i, j) * y[j];
            }
        }
        out[k] = acc;
    }
    Ok(TangentVector::new(along.base.clone(), out))
}
