//! Gauss–Legendre quadrature.
//!
//! Curve functionals use a composite 8-node rule per curve segment: order 16
//! on each panel, far below every verification tolerance for the smooth
//! integrands of the catalog flows.

/// 8-point Gauss–Legendre abscissae on (-1, 1).
pub const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

/// Weights matching [`GL8_NODES`].
pub const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// ∫ₐᵇ f dτ by a single 8-node panel.
pub fn gl8(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// ∫ₐᵇ f dτ by `panels` composite 8-node panels.
pub fn composite_gl8(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        acc += gl8(a + k as f64 * h, a + (k + 1) as f64 * h, &mut f);
    }
    acc
}

/// Visit every abscissa of the composite rule as `(tau, weight)`.
pub fn foreach_gl8_node(a: f64, b: f64, panels: usize, mut visit: impl FnMut(f64, f64)) {
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            visit(mid + half * x, w * half);
        }
    }
}
