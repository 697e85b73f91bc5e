use steadylen_core::curve::{Curve, HermiteTrack};
use steadylen_core::flows::{make_flow, FlowSpec};
use steadylen_core::geom::{eval_geometry, Point};
use steadylen_core::lgeo::{covariant_field_derivatives, FieldKind, VariationField};
fn main() {
    for (spec, name) in [
        (FlowSpec::euclidean(2), "euclid"),
        (FlowSpec::shrinking_sphere(2), "sphere"),
        (FlowSpec::cigar(), "cigar"),
    ] {
        let m = make_flow(&spec).unwrap();
        let (p, q) = match name {
            "sphere" => (vec![1.2, -0.4], vec![1.7, 0.9]),
            _ => (vec![-0.8, 0.3], vec![0.9, -0.5]),
        };
        let (s, t) = (0.05, 0.3);
        let span = t - s;
        let pi = core::f64::consts::PI;
        let track = HermiteTrack::from_fn(s, t, 64, |tau| {
            let u = (tau - s) / span;
            let bump = (pi * u).sin();
            let dbump = pi / span * (pi * u).cos();
            let ddbump = -(pi / span) * (pi / span) * bump;
            let x: Vec<f64> = (0..2).map(|d| p[d] + u * (q[d] - p[d]) + 0.1 * bump * if d == 0 { 1.0 } else { -0.5 }).collect();
            let v: Vec<f64> = (0..2).map(|d| (q[d] - p[d]) / span + 0.1 * dbump * if d == 0 { 1.0 } else { -0.5 }).collect();
            let a: Vec<f64> = (0..2).map(|d| 0.1 * ddbump * if d == 0 { 1.0 } else { -0.5 }).collect();
            (x, v, a)
        });
        let c = Curve { track };
        let field = VariationField::from_fn(&c, FieldKind::Arbitrary, |tau| {
            let u = tau - s;
            (vec![0.3 + 0.7 * u - 0.4 * u * u, -0.2 + u * u], vec![0.7 - 0.8 * u, 2.0 * u], vec![-0.8, 2.0])
        });
        let inner_wv = |tau: f64| -> f64 {
            let (x, _) = c.state(tau);
            let geo = eval_geometry(&m, &Point::new(x), tau).unwrap();
            let (val, d1, d2) = field.track.eval(tau);
            let (w, _) = covariant_field_derivatives(&m, &c, tau, &val, &d1, &d2);
            geo.inner(&w, &val)
        };
        for k in [1usize, 4, 7] {
            let tau = s + span * k as f64 / 8.0;
            let h = 1e-4 * span;
            let lhs = (inner_wv(tau + h) - inner_wv(tau - h)) / (2.0 * h);
            let (x, t_vel) = c.state(tau);
            let geo = eval_geometry(&m, &Point::new(x), tau).unwrap();
            let (val, d1, d2) = field.track.eval(tau);
            let (w, w2) = covariant_field_derivatives(&m, &c, tau, &val, &d1, &d2);
            let rhs = geo.inner(&w, &w) + geo.inner(&w2, &val) - 2.0 * geo.ricci.bilinear(&w, &val) - geo.cov_ric(&t_vel, &val, &val);
            println!("{name} k={k}: lhs={lhs:.10} rhs={rhs:.10} diff={:.3e}", lhs - rhs);
        }
    }
}
