//! Finite-difference oracle for the curvature kernel.
//!
//! Every geometric quantity the AD pipeline produces is reproduced here from
//! 4th-order central differences of the raw metric components (plus, for the
//! third-derivative quantities, central differences of AD curvature fields),
//! with the tensor algebra written out independently. The oracle never calls
//! into the production derivative path.

use steadylen_core::flows::{make_flow, sample_point, sample_time, FlowSpec};
use steadylen_core::geom::{eval_geometry, MetricFamily, Point};
use steadylen_core::linalg::SquareMatrix;
use steadylen_core::rng::Rng;

const FD_REL_TOL: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-8;

fn flows() -> Vec<(FlowSpec, &'static str)> {
    vec![
        (FlowSpec::euclidean(2), "euclidean"),
        (FlowSpec::shrinking_sphere(2), "shrinking_sphere"),
        (FlowSpec::cigar(), "cigar"),
    ]
}

/// 4th-order central difference of a scalar function of one variable.
fn d4(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Metric component g_ij at shifted coordinates (pure evaluation).
fn metric_at(m: &MetricFamily, x: &[f64], tau: f64) -> SquareMatrix<f64> {
    m.eval(x, tau)
}

/// Γ^k_{ij} assembled from FD metric derivatives.
fn christoffel_oracle(m: &MetricFamily, x: &[f64], tau: f64, h: f64) -> Vec<f64> {
    let n = m.dim;
    let g = metric_at(m, x, tau);
    let g_inv = g.inverse().unwrap();
    // dg[k](i,j) = ∂_k g_ij by 4th-order FD.
    let dg: Vec<SquareMatrix<f64>> = (0..n)
        .map(|k| {
            SquareMatrix::from_fn(n, |i, j| {
                d4(
                    |xk| {
                        let mut xs = x.to_vec();
                        xs[k] = xk;
                        metric_at(m, &xs, tau).at(i, j)
                    },
                    x[k],
                    h,
                )
            })
        })
        .collect();
    let mut gamma = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += g_inv.at(k, l) * (dg[i].at(l, j) + dg[j].at(l, i) - dg[l].at(i, j));
                }
                gamma[k * n * n + i * n + j] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// Lowered Riemann tensor from FD Christoffel derivatives:
/// (Rm(∂i,∂j)∂k)^l = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} − Γ^l_{jp}Γ^p_{ik}.
fn riemann_oracle(m: &MetricFamily, x: &[f64], tau: f64, h: f64) -> Vec<f64> {
    let n = m.dim;
    let g = metric_at(m, x, tau);
    let gamma = christoffel_oracle(m, x, tau, h);
    let dgamma: Vec<Vec<f64>> = (0..n)
        .map(|d| {
            let mut out = vec![0.0; n * n * n];
            for idx in 0..n * n * n {
                out[idx] = d4(
                    |xd| {
                        let mut xs = x.to_vec();
                        xs[d] = xd;
                        christoffel_oracle(m, &xs, tau, h)[idx]
                    },
                    x[d],
                    h,
                );
            }
            out
        })
        .collect();
    let gam = |k: usize, i: usize, j: usize| gamma[k * n * n + i * n + j];
    let dgam = |d: usize, k: usize, i: usize, j: usize| dgamma[d][k * n * n + i * n + j];
    let mut lowered = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut mixed_sum = 0.0;
                    for p in 0..n {
                        let mut mixed = dgam(i, p, j, k) - dgam(j, p, i, k);
                        for q in 0..n {
                            mixed += gam(p, i, q) * gam(q, j, k) - gam(p, j, q) * gam(q, i, k);
                        }
                        mixed_sum += g.at(l, p) * mixed;
                    }
                    lowered[i * n * n * n + j * n * n + k * n + l] = mixed_sum;
                }
            }
        }
    }
    lowered
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1.0)
}

#[test]
fn christoffel_riemann_ricci_scalar_match_fd_oracle() {
    // 100 seeded samples per catalog flow.
    for (spec, name) in flows() {
        let m = make_flow(&spec).unwrap();
        let mut rng = Rng::new(0xC0FFEE);
        for _ in 0..100 {
            let x = sample_point(&m, &mut rng);
            let tau = sample_time(&m, &mut rng);
            let geo = eval_geometry(&m, &x, tau).unwrap();
            let n = m.dim;
            let h = 1e-2;

            let gamma_o = christoffel_oracle(&m, &x.coords, tau, h);
            let scale: f64 = gamma_o.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let err = rel_err(geo.gamma(k, i, j), gamma_o[k * n * n + i * n + j], scale);
                        assert!(err <= FD_REL_TOL, "{name}: Γ^{k}_{i}{j} err {err:.2e}");
                    }
                }
            }

            let rm_o = riemann_oracle(&m, &x.coords, tau, h);
            let scale: f64 = rm_o.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut ric_o = SquareMatrix::zeros(n);
            let g_inv = geo.g_inv.clone();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let err = rel_err(
                                geo.rm(i, j, k, l),
                                rm_o[i * n * n * n + j * n * n + k * n + l],
                                scale,
                            );
                            assert!(err <= FD_REL_TOL, "{name}: Rm_{i}{j}{k}{l} err {err:.2e}");
                        }
                    }
                    // Ric_jk = g^{il} Rm_{i j k l} (trace over the 1st/4th
                    // lowered slots, i.e. the vector slot of the mixed tensor).
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc += g_inv.at(a, b) * rm_o[a * n * n * n + i * n * n + j * n + b];
                        }
                    }
                    *ric_o.at_mut(i, j) = acc;
                }
            }
            let scale = ric_o.max_abs();
            for i in 0..n {
                for j in 0..n {
                    let err = rel_err(geo.ricci.at(i, j), ric_o.at(i, j), scale);
                    assert!(err <= FD_REL_TOL, "{name}: Ric_{i}{j} err {err:.2e}");
                }
            }
            let mut r_o = 0.0;
            for i in 0..n {
                for j in 0..n {
                    r_o += g_inv.at(i, j) * ric_o.at(i, j);
                }
            }
            let err = rel_err(geo.scalar, r_o, r_o.abs());
            assert!(err <= FD_REL_TOL, "{name}: R err {err:.2e}");
        }
    }
}

#[test]
fn riemann_symmetries_and_bianchi_identities() {
    for (spec, name) in flows() {
        let m = make_flow(&spec).unwrap();
        let mut rng = Rng::new(0xBEEF);
        for _ in 0..100 {
            let x = sample_point(&m, &mut rng);
            let tau = sample_time(&m, &mut rng);
            let geo = eval_geometry(&m, &x, tau).unwrap();
            let n = m.dim;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = geo.rm(i, j, k, l);
                            assert!((v + geo.rm(j, i, k, l)).abs() <= IDENTITY_TOL, "{name}: antisym 12");
                            assert!((v + geo.rm(i, j, l, k)).abs() <= IDENTITY_TOL, "{name}: antisym 34");
                            assert!((v - geo.rm(k, l, i, j)).abs() <= IDENTITY_TOL, "{name}: pair sym");
                            // First Bianchi: Rm(i,j,k,·) + Rm(j,k,i,·) + Rm(k,i,j,·) = 0.
                            let cyc = v + geo.rm(j, k, i, l) + geo.rm(k, i, j, l);
                            assert!(cyc.abs() <= IDENTITY_TOL, "{name}: first Bianchi {cyc:.2e}");
                        }
                    }
                }
            }
            // Ricci is the trace of Riemann over the vector slot.
            for j in 0..n {
                for k in 0..n {
                    let mut tr = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            tr += geo.g_inv.at(a, b) * geo.rm(a, j, k, b);
                        }
                    }
                    assert!((tr - geo.ricci.at(j, k)).abs() <= IDENTITY_TOL, "{name}: Ric trace");
                }
            }
            // Scalar is the g-trace of Ricci.
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    tr += geo.g_inv.at(i, j) * geo.ricci.at(i, j);
                }
            }
            assert!((tr - geo.scalar).abs() <= IDENTITY_TOL, "{name}: scalar trace");

            // Contracted second Bianchi: g^{ij} (∇Ric)_{i k j}... with the
            // derivative slot first: g^{ij} (∇_i Ric)_{kj} = ½ ∂_k R.
            let dr = geo.g.mul_vec(&geo.grad_r); // lower back to ∂_k R
            for k in 0..n {
                let mut div = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        div += geo.g_inv.at(i, j) * geo.cov_ricci[i * n * n + k * n + j];
                    }
                }
                let resid = div - 0.5 * dr[k];
                assert!(resid.abs() <= IDENTITY_TOL, "{name}: contracted Bianchi {resid:.2e}");
            }
        }
    }
}

#[test]
fn ricci_flow_equation_on_samples() {
    for (spec, name) in flows() {
        let m = make_flow(&spec).unwrap();
        let mut rng = Rng::new(0xABCD);
        for _ in 0..100 {
            let x = sample_point(&m, &mut rng);
            let tau = sample_time(&m, &mut rng);
            let geo = eval_geometry(&m, &x, tau).unwrap();
            for i in 0..m.dim {
                for j in 0..m.dim {
                    let resid = geo.dg_dtau.at(i, j) + 2.0 * geo.ricci.at(i, j);
                    assert!(resid.abs() <= IDENTITY_TOL, "{name}: flow residual {resid:.2e}");
                }
            }
        }
    }
}

#[test]
fn derivative_fields_match_fd_of_ad_curvature() {
    // ∇R, ∇²R, ∇Ric, ∂τRic against central differences of the AD-computed
    // R and Ric fields (the outer derivative is what is being checked).
    for (spec, name) in flows() {
        let m = make_flow(&spec).unwrap();
        let mut rng = Rng::new(0x5EED);
        for _ in 0..25 {
            let x = sample_point(&m, &mut rng);
            let tau = sample_time(&m, &mut rng);
            let geo = eval_geometry(&m, &x, tau).unwrap();
            let n = m.dim;
            let h = 1e-3;

            let scalar_at = |xs: &[f64], t: f64| {
                steadylen_core::geom::scalar_curvature(&m, xs, t)
            };
            let ricci_at = |xs: &[f64], t: f64| steadylen_core::geom::ricci(&m, xs, t);

            // ∂_k R.
            let mut dr = vec![0.0; n];
            for k in 0..n {
                dr[k] = d4(
                    |xk| {
                        let mut xs = x.coords.clone();
                        xs[k] = xk;
                        scalar_at(&xs, tau)
                    },
                    x.coords[k],
                    h,
                );
            }
            let grad_fd = geo.g_inv.mul_vec(&dr);
            for k in 0..n {
                let scale = grad_fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(
                    rel_err(geo.grad_r[k], grad_fd[k], scale) <= FD_REL_TOL,
                    "{name}: grad_R"
                );
            }

            // Covariant Hessian by FD of ∂R plus the Γ correction.
            for i in 0..n {
                for j in 0..n {
                    let ddr = d4(
                        |xi| {
                            let mut xs = x.coords.clone();
                            xs[i] = xi;
                            d4(
                                |xj| {
                                    let mut xss = xs.clone();
                                    xss[j] = xj;
                                    scalar_at(&xss, tau)
                                },
                                xs[j],
                                h,
                            )
                        },
                        x.coords[i],
                        h,
                    );
                    let mut hess = ddr;
                    for k in 0..n {
                        hess -= geo.gamma(k, i, j) * dr[k];
                    }
                    let scale = geo.hess_r.max_abs().max(1.0);
                    assert!(
                        (geo.hess_r.at(i, j) - hess).abs() / scale <= 1e-4,
                        "{name}: hess_R ({}, {}) {} vs {}",
                        i,
                        j,
                        geo.hess_r.at(i, j),
                        hess
                    );
                }
            }

            // (∇_k Ric)_{ij}.
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let dric = d4(
                            |xk| {
                                let mut xs = x.coords.clone();
                                xs[k] = xk;
                                ricci_at(&xs, tau).at(i, j)
                            },
                            x.coords[k],
                            h,
                        );
                        let mut cov = dric;
                        for p in 0..n {
                            cov -= geo.gamma(p, k, i) * geo.ricci.at(p, j);
                            cov -= geo.gamma(p, k, j) * geo.ricci.at(i, p);
                        }
                        let got = geo.cov_ricci[k * n * n + i * n + j];
                        assert!(
                            (got - cov).abs() <= 1e-6,
                            "{name}: cov_ricci[{k}][{i}][{j}] {got} vs {cov}"
                        );
                    }
                }
            }

            // ∂τ Ric.
            for i in 0..n {
                for j in 0..n {
                    let dtau = d4(|t| ricci_at(&x.coords, t).at(i, j), tau, h);
                    assert!(
                        (geo.dricci_dtau.at(i, j) - dtau).abs() <= 1e-6,
                        "{name}: dricci_dtau"
                    );
                }
            }
        }
    }
}

#[test]
fn christoffel_time_variation_identity() {
    // Under ∂τg = −2Ric the connection varies by
    // ∂τΓ^k_{ij} = −g^{km}[(∇_i Ric)_{jm} + (∇_j Ric)_{im} − (∇_m Ric)_{ij}];
    // ties the AD time derivative of Γ to the covariant Ricci derivative.
    for (spec, name) in flows() {
        let m = make_flow(&spec).unwrap();
        let mut rng = Rng::new(0xD17A);
        for _ in 0..50 {
            let x = sample_point(&m, &mut rng);
            let tau = sample_time(&m, &mut rng);
            let geo = eval_geometry(&m, &x, tau).unwrap();
            let n = m.dim;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut want = 0.0;
                        for mm in 0..n {
                            want -= geo.g_inv.at(k, mm)
                                * (geo.cov_ricci[i * n * n + j * n + mm]
                                    + geo.cov_ricci[j * n * n + i * n + mm]
                                    - geo.cov_ricci[mm * n * n + i * n + j]);
                        }
                        let got = geo.dgamma_dtau(k, i, j);
                        assert!(
                            (got - want).abs() <= IDENTITY_TOL,
                            "{name}: ∂τΓ^{k}_{i}{j} {got} vs {want}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn eval_geometry_examples_from_contract() {
    // Flat plane: everything vanishes.
    let m = make_flow(&FlowSpec::euclidean(2)).unwrap();
    let geo = eval_geometry(&m, &Point::new(vec![2.0, -3.0]), 0.5).unwrap();
    assert_eq!(geo.scalar, 0.0);

    // Round S² under (1−2τ)·g_round at τ=0: R = 2.
    let m = make_flow(&FlowSpec::shrinking_sphere(2)).unwrap();
    let geo = eval_geometry(&m, &Point::new(vec![0.9, 1.7]), 0.0).unwrap();
    assert!((geo.scalar - 2.0).abs() < 1e-10);

    // Cigar at the origin at τ=0: R = 4.
    let m = make_flow(&FlowSpec::cigar()).unwrap();
    let geo = eval_geometry(&m, &Point::new(vec![0.0, 0.0]), 0.0).unwrap();
    assert!((geo.scalar - 4.0).abs() < 1e-10);
}
