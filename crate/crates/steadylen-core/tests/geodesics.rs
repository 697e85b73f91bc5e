//! Geodesic solver verification: integrator cross-checks, minimality of
//! boundary-value solutions, the first-variation identity, the evolving
//! inner-product lemma, and transport isometry.

use steadylen_core::curve::{Curve, HermiteTrack};
use steadylen_core::flows::{make_flow, FlowSpec};
use steadylen_core::geom::{eval_geometry, MetricFamily, Point, TangentVector};
use steadylen_core::lgeo::{
    covariant_field_derivatives, el_residual, field_cov_derivative, integrate_geodesic,
    jacobi_residual, jacobi_solve, lagrangian, solve_bvp, transport, transport_field,
    transport_residual, FieldKind, VariationField,
};
use steadylen_core::rng::Rng;
use steadylen_core::verify::sample_pair;
use steadylen_core::{tol, Error};

fn catalog() -> Vec<(MetricFamily, &'static str)> {
    vec![
        (make_flow(&FlowSpec::euclidean(2)).unwrap(), "euclidean"),
        (
            make_flow(&FlowSpec::shrinking_sphere(2)).unwrap(),
            "shrinking_sphere",
        ),
        (make_flow(&FlowSpec::cigar()).unwrap(), "cigar"),
    ]
}

/// Independent fixed-step RK4 integration of the geodesic system, with the
/// right-hand side assembled from the public geometry interface.
fn rk4_geodesic_oracle(
    m: &MetricFamily,
    p: &[f64],
    s: f64,
    v0: &[f64],
    t: f64,
    steps: usize,
) -> Vec<f64> {
    let n = m.dim;
    let accel = |x: &[f64], v: &[f64], tau: f64| -> Vec<f64> {
        let geo = eval_geometry(m, &Point::new(x.to_vec()), tau).unwrap();
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc -= geo.gamma(k, i, j) * v[i] * v[j];
                    }
                }
                let rv = geo.ric_sharp(v);
                acc + 2.0 * rv[k] + 0.5 * geo.grad_r[k]
            })
            .collect()
    };
    let rhs = |y: &[f64], tau: f64| -> Vec<f64> {
        let (x, v) = y.split_at(n);
        let mut dy = v.to_vec();
        dy.extend(accel(x, v, tau));
        dy
    };
    let mut y: Vec<f64> = p.to_vec();
    y.extend_from_slice(v0);
    let h = (t - s) / steps as f64;
    let mut tau = s;
    for _ in 0..steps {
        let k1 = rhs(&y, tau);
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = rhs(&y2, tau + 0.5 * h);
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = rhs(&y3, tau + 0.5 * h);
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = rhs(&y4, tau + h);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        tau += h;
    }
    y[..n].to_vec()
}

#[test]
fn integrator_matches_rk4_oracle() {
    // Sphere: tangent at the equator; cigar: radial shot from the origin.
    let cases = [
        (FlowSpec::shrinking_sphere(2), vec![1.570796, 0.0], vec![0.4, 0.8], 0.0, 0.25),
        (FlowSpec::cigar(), vec![0.0, 0.0], vec![1.0, 0.0], 0.0, 0.5),
        (FlowSpec::euclidean(2), vec![0.0, 0.0], vec![1.0, 0.0], 0.0, 1.0),
    ];
    for (spec, p, v0, s, t) in cases {
        let m = make_flow(&spec).unwrap();
        let point = Point::new(p.clone());
        let vel = TangentVector::new(point.clone(), v0.clone());
        let curve = integrate_geodesic(&m, &point, s, &vel, t).unwrap();
        let endpoint = curve.position(t);
        let oracle = rk4_geodesic_oracle(&m, &p, s, &v0, t, 4000);
        for k in 0..m.dim {
            assert!(
                (endpoint[k] - oracle[k]).abs() < 1e-8,
                "{:?}: endpoint[{k}] {} vs oracle {}",
                spec.name,
                endpoint[k],
                oracle[k]
            );
        }
    }
}

#[test]
fn integrate_geodesic_reports_chart_exit() {
    let m = make_flow(&FlowSpec::cigar()).unwrap();
    let p = Point::new(vec![0.0, 0.0]);
    // Fast radial shot leaves the |x| < 6 chart before τ = 1. The cigar
    // metric shrinks outward, so chart speed grows.
    let v0 = TangentVector::new(p.clone(), vec![40.0, 0.0]);
    match integrate_geodesic(&m, &p, 0.0, &v0, 1.0) {
        Err(Error::OutOfDomain { at, what }) => {
            assert_eq!(what, "chart");
            assert!(at > 0.0 && at < 1.0, "exit time {at}");
        }
        other => panic!("expected chart exit, got {other:?}"),
    }
}

#[test]
fn bvp_solutions_are_certified_and_minimal() {
    // Minimality cross-check: the solved geodesic beats random endpoint-fixed
    // spline perturbations of itself.
    for (m, name) in catalog() {
        let mut rng = Rng::new(0x9A7E * (name.len() as u64));
        let pairs = 20;
        let mut solved = 0;
        for pair_idx in 0..pairs {
            let e = sample_pair(&m, &mut rng);
            let geo = match solve_bvp(&m, &e.p, e.s, &e.q, e.t) {
                Ok(g) => g,
                Err(Error::BvpFailure { .. }) => continue,
                Err(other) => panic!("{name}: {other}"),
            };
            if geo.multiplicity_flag {
                continue;
            }
            solved += 1;
            assert!(
                geo.el_residual <= tol::GEODESIC,
                "{name} pair {pair_idx}: EL residual {:.2e}",
                geo.el_residual
            );

            let span = e.t - e.s;
            let mut pert_rng = rng.fork(pair_idx as u64);
            for _ in 0..50 {
                // Two-mode sine perturbation vanishing at the endpoints.
                let amps: Vec<(f64, f64)> = (0..m.dim)
                    .map(|_| (0.02 * pert_rng.normal(), 0.02 * pert_rng.normal()))
                    .collect();
                let track = HermiteTrack::from_fn(e.s, e.t, geo.curve.segments(), |tau| {
                    let u = (tau - e.s) / span * core::f64::consts::PI;
                    let (x0, v0, a0) = geo.curve.track.eval(tau);
                    let mut x = x0;
                    let mut v = v0;
                    let mut a = a0;
                    for (d, (a1, a2)) in amps.iter().enumerate() {
                        let w = a1 * libm::sin(u) + a2 * libm::sin(2.0 * u);
                        let dw = (a1 * libm::cos(u) + 2.0 * a2 * libm::cos(2.0 * u))
                            * core::f64::consts::PI
                            / span;
                        let ddw = (-a1 * libm::sin(u) - 4.0 * a2 * libm::sin(2.0 * u))
                            * (core::f64::consts::PI / span)
                            * (core::f64::consts::PI / span);
                        x[d] += w;
                        v[d] += dw;
                        a[d] += ddw;
                    }
                    (x, v, a)
                });
                let perturbed = Curve { track };
                if let Ok(l_pert) = lagrangian(&m, &perturbed) {
                    assert!(
                        geo.lagrangian <= l_pert + 1e-9,
                        "{name} pair {pair_idx}: minimizer {} beaten by perturbation {}",
                        geo.lagrangian,
                        l_pert
                    );
                }
            }
        }
        assert!(solved >= pairs * 3 / 4, "{name}: only {solved}/{pairs} pairs solved");
    }
}

#[test]
fn first_variation_vanishes_at_geodesics() {
    // δ𝓛 under endpoint-fixed variations is a boundary term, so the central
    // difference of 𝓛 in the variation amplitude must vanish at a minimizer.
    for (m, name) in catalog() {
        let mut rng = Rng::new(0xFACE ^ name.len() as u64);
        for _ in 0..5 {
            let e = sample_pair(&m, &mut rng);
            let geo = match solve_bvp(&m, &e.p, e.s, &e.q, e.t) {
                Ok(g) if !g.multiplicity_flag => g,
                _ => continue,
            };
            let span = e.t - e.s;
            let dirs: Vec<(f64, f64)> = (0..m.dim)
                .map(|_| (rng.normal(), rng.normal()))
                .collect();
            let curve_at = |eps: f64| -> Curve {
                let track = HermiteTrack::from_fn(e.s, e.t, geo.curve.segments(), |tau| {
                    let u = (tau - e.s) / span * core::f64::consts::PI;
                    let (mut x, mut v, mut a) = geo.curve.track.eval(tau);
                    for (d, (c1, c2)) in dirs.iter().enumerate() {
                        let w = c1 * libm::sin(u) + c2 * libm::sin(2.0 * u);
                        let dw = (c1 * libm::cos(u) + 2.0 * c2 * libm::cos(2.0 * u))
                            * core::f64::consts::PI
                            / span;
                        let ddw = (-c1 * libm::sin(u) - 4.0 * c2 * libm::sin(2.0 * u))
                            * (core::f64::consts::PI / span).powi(2);
                        x[d] += eps * w;
                        v[d] += eps * dw;
                        a[d] += eps * ddw;
                    }
                    (x, v, a)
                });
                Curve { track }
            };
            let h = 1e-5;
            let deriv =
                (lagrangian(&m, &curve_at(h)).unwrap() - lagrangian(&m, &curve_at(-h)).unwrap())
                    / (2.0 * h);
            assert!(
                deriv.abs() <= 1e-6,
                "{name}: first variation {deriv:.2e} at a certified geodesic"
            );
        }
    }
}

#[test]
fn evolving_inner_product_lemma() {
    // d/dτ⟨∇_T V, V⟩ = |∇_T V|² + ⟨∇_T∇_T V, V⟩ − 2Ric(∇_T V, V)
    //                  − (∇_T Ric)(V, V)
    // along any curve and smooth field under ∂g/∂τ = −2Ric.
    for (m, name) in catalog() {
        // A deliberately non-geodesic curve.
        let (p, q) = match name {
            "shrinking_sphere" => (vec![1.2, -0.4], vec![1.7, 0.9]),
            _ => (vec![-0.8, 0.3], vec![0.9, -0.5]),
        };
        let (s, t) = (0.05, 0.3);
        let span = t - s;
        let track = HermiteTrack::from_fn(s, t, 64, |tau| {
            let u = (tau - s) / span;
            let bump = libm::sin(core::f64::consts::PI * u);
            let dbump = core::f64::consts::PI / span * libm::cos(core::f64::consts::PI * u);
            let ddbump = -(core::f64::consts::PI / span).powi(2) * bump;
            let x: Vec<f64> = (0..2)
                .map(|d| p[d] + u * (q[d] - p[d]) + 0.1 * bump * if d == 0 { 1.0 } else { -0.5 })
                .collect();
            let v: Vec<f64> = (0..2)
                .map(|d| (q[d] - p[d]) / span + 0.1 * dbump * if d == 0 { 1.0 } else { -0.5 })
                .collect();
            let a: Vec<f64> = (0..2)
                .map(|d| 0.1 * ddbump * if d == 0 { 1.0 } else { -0.5 })
                .collect();
            (x, v, a)
        });
        let c = Curve { track };

        // Smooth polynomial test field.
        let field = VariationField::from_fn(&c, FieldKind::Arbitrary, |tau| {
            let u = tau - s;
            (
                vec![0.3 + 0.7 * u - 0.4 * u * u, -0.2 + u * u],
                vec![0.7 - 0.8 * u, 2.0 * u],
                vec![-0.8, 2.0],
            )
        });

        let inner_wv = |tau: f64| -> f64 {
            let (x, _) = c.state(tau);
            let geo = eval_geometry(&m, &Point::new(x), tau).unwrap();
            let (val, d1, d2) = field.track.eval(tau);
            let (w, _) = covariant_field_derivatives(&m, &c, tau, &val, &d1, &d2);
            geo.inner(&w, &val)
        };

        for k in 1..8 {
            let tau = s + span * k as f64 / 8.0;
            let h = 1e-4 * span;
            let lhs = (inner_wv(tau + h) - inner_wv(tau - h)) / (2.0 * h);

            let (x, t_vel) = c.state(tau);
            let geo = eval_geometry(&m, &Point::new(x), tau).unwrap();
            let (val, d1, d2) = field.track.eval(tau);
            let (w, w2) = covariant_field_derivatives(&m, &c, tau, &val, &d1, &d2);
            // The published identity's ∇_T∇_T V freezes the connection in τ.
            let dtg = geo.dtau_gamma_bilinear(&t_vel, &val);
            let w2_frozen: Vec<f64> = w2.iter().zip(dtg.iter()).map(|(a, b)| a - b).collect();
            let rhs = geo.inner(&w, &w) + geo.inner(&w2_frozen, &val)
                - 2.0 * geo.ricci.bilinear(&w, &val)
                - geo.cov_ric(&t_vel, &val, &val);
            assert!(
                (lhs - rhs).abs() <= 1e-5,
                "{name}: lemma residual {:.2e} at tau={tau}",
                (lhs - rhs).abs()
            );
        }
    }
}

#[test]
fn transport_is_a_g_isometry() {
    for (m, name) in catalog() {
        let mut rng = Rng::new(0x7A3 ^ name.len() as u64);
        for _ in 0..6 {
            let e = sample_pair(&m, &mut rng);
            let geo = match solve_bvp(&m, &e.p, e.s, &e.q, e.t) {
                Ok(g) if !g.multiplicity_flag => g,
                _ => continue,
            };
            let map = transport(&m, &geo).unwrap();
            let g_s = m.eval(&e.p.coords, e.s);
            let g_t = m.eval(&e.q.coords, e.t);
            // MᵀG_tM = G_s.
            let pulled = map.matrix.transpose().matmul(&g_t).matmul(&map.matrix);
            for i in 0..m.dim {
                for j in 0..m.dim {
                    assert!(
                        (pulled.at(i, j) - g_s.at(i, j)).abs() <= tol::TRANSPORT,
                        "{name}: isometry defect {:.2e}",
                        (pulled.at(i, j) - g_s.at(i, j)).abs()
                    );
                }
            }
            // Orthonormal frames map to orthonormal frames.
            let basis = steadylen_core::lfunc::orthonormal_basis(&g_s);
            for a in &basis {
                for b in &basis {
                    let want = g_s.bilinear(a, b);
                    let got = g_t.bilinear(&map.apply(a), &map.apply(b));
                    assert!((want - got).abs() <= tol::TRANSPORT, "{name}: frame defect");
                }
            }

            // The pointwise transport equation residual of the full field.
            let field = transport_field(&m, &geo, &basis[0]).unwrap();
            let res = transport_residual(&m, &geo.curve, &field);
            assert!(res <= tol::TRANSPORT, "{name}: transport residual {res:.2e}");
            // Its covariant derivative actually matches Ric(V)^♯ midway.
            let mid = 0.5 * (e.s + e.t);
            let w = field_cov_derivative(&m, &geo.curve, &field, mid);
            let (x, _) = geo.curve.state(mid);
            let gmid = eval_geometry(&m, &Point::new(x), mid).unwrap();
            let rv = gmid.ric_sharp(&field.value(mid));
            for k in 0..m.dim {
                assert!((w[k] - rv[k]).abs() <= tol::TRANSPORT);
            }
        }
    }
}

#[test]
fn jacobi_fields_satisfy_their_equation_on_the_cigar() {
    let m = make_flow(&FlowSpec::cigar()).unwrap();
    let mut rng = Rng::new(0x1CEB);
    for _ in 0..4 {
        let e = sample_pair(&m, &mut rng);
        let geo = match solve_bvp(&m, &e.p, e.s, &e.q, e.t) {
            Ok(g) if !g.multiplicity_flag => g,
            _ => continue,
        };
        let v = TangentVector::new(e.p.clone(), vec![rng.normal(), rng.normal()]);
        let w = TangentVector::new(e.q.clone(), vec![rng.normal(), rng.normal()]);
        let field = jacobi_solve(&m, &geo, &v, &w).unwrap();
        // Boundary data is interpolated exactly.
        let vs = field.value(e.s);
        let vt = field.value(e.t);
        for k in 0..2 {
            assert!((vs[k] - v.components[k]).abs() < 1e-9);
            assert!((vt[k] - w.components[k]).abs() < 1e-9);
        }
        let res = jacobi_residual(&m, &geo.curve, &field);
        assert!(res <= tol::JACOBI, "Jacobi residual {res:.2e}");
    }
}

#[test]
fn sphere_antipodal_pair_sets_multiplicity_flag() {
    // Equatorial antipodes are joined by a one-parameter family of
    // minimizers; distinct shooting starts converge to different members.
    let m = make_flow(&FlowSpec::shrinking_sphere(2)).unwrap();
    let p = Point::new(vec![core::f64::consts::FRAC_PI_2, 0.0]);
    let q = Point::new(vec![core::f64::consts::FRAC_PI_2, core::f64::consts::PI]);
    let geo = solve_bvp(&m, &p, 0.0, &q, 0.25).unwrap();
    assert!(geo.multiplicity_flag, "antipodal pair not flagged");
}

#[test]
fn el_residual_cigar_bvp_solution() {
    let m = make_flow(&FlowSpec::cigar()).unwrap();
    let p = Point::new(vec![-0.7, 0.2]);
    let q = Point::new(vec![0.8, -0.5]);
    let geo = solve_bvp(&m, &p, 0.0, &q, 0.5).unwrap();
    let res = el_residual(&m, &geo.curve).unwrap();
    assert!(res <= tol::GEODESIC, "residual {res:.2e}");
}
