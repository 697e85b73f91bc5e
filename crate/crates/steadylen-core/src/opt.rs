//! Unconstrained L-BFGS and box-projected gradient descent.
//!
//! Used by the discretized-𝓛 fallback of the boundary value solver and by
//! the endpoint descent of the monotonicity scan. Objectives are smooth;
//! both methods use Armijo backtracking.

use crate::linalg::{dot, norm2};
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// L-BFGS with two-loop recursion (history 8) and Armijo line search.
/// `fg` returns the objective value and writes the gradient.
pub fn lbfgs(
    mut fg: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: &[f64],
    grad_tol: f64,
    max_iters: usize,
) -> MinimizeResult {
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; dim];
    let mut value = fg(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new(); // (s, y, rho)
    let m = 8usize;

    let mut iterations = 0;
    for _ in 0..max_iters {
        let gnorm = norm2(&g);
        if gnorm <= grad_tol || !value.is_finite() {
            break;
        }
        iterations += 1;

        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &q);
            for i in 0..dim {
                q[i] -= alpha * yv[i];
            }
            alphas.push(alpha);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv).max(1e-300);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        }
        for ((s, yv, rho), alpha) in history.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * dot(yv, &q);
            for i in 0..dim {
                q[i] += (alpha - beta) * s[i];
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Curvature information went stale; fall back to steepest descent.
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            history.clear();
        }

        // Weak-Wolfe line search: backtrack past the sufficient-decrease
        // boundary, expand while the slope stays steeply negative (the
        // curvature condition is what keeps the inverse-Hessian model from
        // collapsing to tiny steps).
        let (c1, c2) = (1e-4, 0.9);
        let mut alpha = 1.0f64;
        let mut alpha_lo = 0.0f64;
        let mut alpha_hi = f64::INFINITY;
        let mut accepted = false;
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut x_new = x.clone();
        let mut g_new = vec![0.0; dim];
        let mut v_new = value;
        for _ in 0..30 {
            for i in 0..dim {
                x_new[i] = x[i] + alpha * dir[i];
            }
            v_new = fg(&x_new, &mut g_new);
            if !v_new.is_finite() || v_new > value + c1 * alpha * slope {
                alpha_hi = alpha;
            } else {
                if best.as_ref().map_or(true, |(bv, _, _)| v_new < *bv) {
                    best = Some((v_new, x_new.clone(), g_new.clone()));
                }
                if dot(&g_new, &dir) < c2 * slope {
                    alpha_lo = alpha;
                } else {
                    accepted = true;
                    break;
                }
            }
            alpha = if alpha_hi.is_finite() {
                0.5 * (alpha_lo + alpha_hi)
            } else {
                2.0 * alpha
            };
        }
        if !accepted {
            match best {
                Some((bv, bx, bg)) => {
                    v_new = bv;
                    x_new = bx;
                    g_new = bg;
                }
                None => break,
            }
        }

        let s: Vec<f64> = (0..dim).map(|i| x_new[i] - x[i]).collect();
        let yv: Vec<f64> = (0..dim).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm2(&s) * norm2(&yv) {
            if history.len() == m {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        x = x_new;
        g = g_new;
        value = v_new;
    }

    MinimizeResult {
        grad_norm: norm2(&g),
        x,
        value,
        iterations,
    }
}

/// Gradient descent projected onto the box [lo, hi] per coordinate, with
/// Armijo backtracking on the projected step.
pub fn minimize_box(
    mut fg: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    grad_tol: f64,
    max_iters: usize,
) -> MinimizeResult {
    let dim = x0.len();
    let clamp = |x: &mut [f64]| {
        for i in 0..dim {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut g = vec![0.0; dim];
    let mut value = fg(&x, &mut g);
    let mut step = 1.0f64;
    let mut iterations = 0;

    for _ in 0..max_iters {
        // Projected-gradient stationarity measure.
        let mut pg = 0.0f64;
        for i in 0..dim {
            let mut xi = x[i] - g[i];
            xi = xi.clamp(lo[i], hi[i]);
            pg += (xi - x[i]) * (xi - x[i]);
        }
        if libm::sqrt(pg) <= grad_tol || !value.is_finite() {
            break;
        }
        iterations += 1;

        let mut accepted = false;
        let mut x_new = x.clone();
        let mut g_new = vec![0.0; dim];
        let mut v_new = value;
        let mut local = step;
        for _ in 0..50 {
            for i in 0..dim {
                x_new[i] = x[i] - local * g[i];
            }
            clamp(&mut x_new);
            let decrease: f64 = (0..dim).map(|i| (x_new[i] - x[i]) * g[i]).sum();
            v_new = fg(&x_new, &mut g_new);
            if v_new.is_finite() && v_new <= value + 1e-4 * decrease {
                accepted = true;
                break;
            }
            local *= 0.5;
        }
        if !accepted {
            break;
        }
        // Mild step growth keeps the search adaptive without oscillation.
        step = (local * 2.0).min(1e6);
        x = x_new;
        g = g_new;
        value = v_new;
    }

    MinimizeResult {
        grad_norm: norm2(&g),
        x,
        value,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (1.0, 100.0);
        let f = (a - x[0]) * (a - x[0]) + b * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
        g[0] = -2.0 * (a - x[0]) - 4.0 * b * x[0] * (x[1] - x[0] * x[0]);
        g[1] = 2.0 * b * (x[1] - x[0] * x[0]);
        f
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let res = lbfgs(rosenbrock, &[-1.2, 1.0], 1e-10, 500);
        assert!((res.x[0] - 1.0).abs() < 1e-6, "{:?}", res.x);
        assert!((res.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn box_descent_respects_bounds() {
        // Minimum of (x-2)^2 over [-1, 1] sits on the boundary x = 1.
        let fg = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 2.0);
            (x[0] - 2.0) * (x[0] - 2.0)
        };
        let res = minimize_box(fg, &[-0.5], &[-1.0], &[1.0], 1e-12, 200);
        assert!((res.x[0] - 1.0).abs() < 1e-10, "{:?}", res.x);
    }

    #[test]
    fn box_descent_finds_interior_minimum() {
        let fg = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            g[1] = 4.0 * x[1];
            x[0] * x[0] + 2.0 * x[1] * x[1]
        };
        let res = minimize_box(fg, &[0.9, -0.7], &[-1.0, -1.0], &[1.0, 1.0], 1e-12, 500);
        assert!(res.value < 1e-16, "value {}", res.value);
    }
}
