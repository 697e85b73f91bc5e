//! Sampled vector functions of τ with quintic-Hermite interpolation.
//!
//! Curves and variation fields both store value, first and second τ-derivative
//! at N+1 uniform nodes. With nodal derivatives supplied by the ODE right-hand
//! side, quintic Hermite reproduces the second derivative to O(h⁴) — the
//! accuracy the Euler–Lagrange residual certification needs. Position-only
//! data (direct-minimization intermediates, perturbed test curves) enters
//! through a natural cubic spline, whose nodal derivatives then feed the same
//! representation (a quintic Hermite through cubic data reproduces the cubic
//! exactly).

use alloc::vec;
use alloc::vec::Vec;

/// Value/velocity/acceleration samples of an ℝⁿ-valued function on [s, t]
/// at N+1 uniform nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTrack {
    pub s: f64,
    pub t: f64,
    pub dim: usize,
    /// Per node: value, d/dτ, d²/dτ², each of length `dim`.
    nodes: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl HermiteTrack {
    pub fn from_states(s: f64, t: f64, nodes: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>) -> Self {
        assert!(nodes.len() >= 2, "need at least two nodes");
        let dim = nodes[0].0.len();
        HermiteTrack { s, t, dim, nodes }
    }

    /// Sample an analytic function (value, d1, d2) at `segments`+1 nodes.
    pub fn from_fn(
        s: f64,
        t: f64,
        segments: usize,
        mut f: impl FnMut(f64) -> (Vec<f64>, Vec<f64>, Vec<f64>),
    ) -> Self {
        let nodes = (0..=segments)
            .map(|i| f(s + (t - s) * i as f64 / segments as f64))
            .collect();
        Self::from_states(s, t, nodes)
    }

    /// Natural cubic spline through position samples; nodal first/second
    /// derivatives are taken from the spline.
    pub fn from_positions(s: f64, t: f64, positions: &[Vec<f64>]) -> Self {
        let n = positions.len() - 1; // segments
        assert!(n >= 1);
        let dim = positions[0].len();
        let h = (t - s) / n as f64;

        // Second derivatives per dimension, natural boundary (M_0 = M_n = 0).
        let mut m2 = vec![vec![0.0f64; dim]; n + 1];
        if n >= 2 {
            let rows = n - 1;
            for d in 0..dim {
                let mut diag = vec![4.0f64; rows];
                let mut rhs = vec![0.0f64; rows];
                for i in 1..n {
                    rhs[i - 1] = 6.0
                        * (positions[i - 1][d] - 2.0 * positions[i][d] + positions[i + 1][d])
                        / (h * h);
                }
                // Thomas algorithm with unit off-diagonals.
                for i in 1..rows {
                    let w = 1.0 / diag[i - 1];
                    diag[i] -= w;
                    rhs[i] -= w * rhs[i - 1];
                }
                let mut sol = vec![0.0f64; rows];
                sol[rows - 1] = rhs[rows - 1] / diag[rows - 1];
                for i in (0..rows - 1).rev() {
                    sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
                }
                for i in 1..n {
                    m2[i][d] = sol[i - 1];
                }
            }
        }

        let nodes = (0..=n)
            .map(|i| {
                let x = positions[i].clone();
                let v: Vec<f64> = (0..dim)
                    .map(|d| {
                        if i < n {
                            (positions[i + 1][d] - positions[i][d]) / h
                                - h * (2.0 * m2[i][d] + m2[i + 1][d]) / 6.0
                        } else {
                            (positions[i][d] - positions[i - 1][d]) / h
                                + h * (m2[i - 1][d] + 2.0 * m2[i][d]) / 6.0
                        }
                    })
                    .collect();
                let a = m2[i].clone();
                (x, v, a)
            })
            .collect();
        Self::from_states(s, t, nodes)
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn node_time(&self, i: usize) -> f64 {
        self.s + (self.t - self.s) * i as f64 / self.segments() as f64
    }

    pub fn node(&self, i: usize) -> (&[f64], &[f64], &[f64]) {
        let (x, v, a) = &self.nodes[i];
        (x, v, a)
    }

    /// Quintic Hermite value, first and second derivative at τ ∈ [s, t].
    pub fn eval(&self, tau: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.segments();
        let h = (self.t - self.s) / n as f64;
        let raw = (tau - self.s) / h;
        let seg = (libm::floor(raw) as isize).clamp(0, n as isize - 1) as usize;
        let u = raw - seg as f64;

        let (x0, v0, a0) = &self.nodes[seg];
        let (x1, v1, a1) = &self.nodes[seg + 1];

        // Quintic Hermite basis and derivatives on [0, 1].
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u3 * u;
        let u5 = u4 * u;
        let b = [
            1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
            u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
            0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5),
            10.0 * u3 - 15.0 * u4 + 6.0 * u5,
            -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
            0.5 * (u3 - 2.0 * u4 + u5),
        ];
        let db = [
            -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
            1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
            0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4),
            30.0 * u2 - 60.0 * u3 + 30.0 * u4,
            -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
            0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4),
        ];
        let ddb = [
            -60.0 * u + 180.0 * u2 - 120.0 * u3,
            -36.0 * u + 96.0 * u2 - 60.0 * u3,
            0.5 * (2.0 - 18.0 * u + 36.0 * u2 - 20.0 * u3),
            60.0 * u - 180.0 * u2 + 120.0 * u3,
            -24.0 * u + 84.0 * u2 - 60.0 * u3,
            0.5 * (6.0 * u - 24.0 * u2 + 20.0 * u3),
        ];

        let mut x = vec![0.0; self.dim];
        let mut v = vec![0.0; self.dim];
        let mut a = vec![0.0; self.dim];
        for d in 0..self.dim {
            // Scale derivatives into the unit segment: m = h·v, c = h²·a.
            let coeff = [
                x0[d],
                h * v0[d],
                h * h * a0[d],
                x1[d],
                h * v1[d],
                h * h * a1[d],
            ];
            let mut val = 0.0;
            let mut d1 = 0.0;
            let mut d2 = 0.0;
            for k in 0..6 {
                val += coeff[k] * b[k];
                d1 += coeff[k] * db[k];
                d2 += coeff[k] * ddb[k];
            }
            x[d] = val;
            v[d] = d1 / h;
            a[d] = d2 / (h * h);
        }
        (x, v, a)
    }
}

/// A parametrized path γ through spacetime: γ(τ) ∈ chart for τ ∈ [s, t],
/// with velocity T = dγ/dτ carried by the track.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub track: HermiteTrack,
}

impl Curve {
    pub fn s(&self) -> f64 {
        self.track.s
    }
    pub fn t(&self) -> f64 {
        self.track.t
    }
    pub fn dim(&self) -> usize {
        self.track.dim
    }
    pub fn segments(&self) -> usize {
        self.track.segments()
    }

    pub fn position(&self, tau: f64) -> Vec<f64> {
        self.track.eval(tau).0
    }

    /// (γ(τ), T(τ)).
    pub fn state(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let (x, v, _) = self.track.eval(tau);
        (x, v)
    }

    /// (γ(τ), T(τ), dT/dτ(τ)).
    pub fn state2(&self, tau: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        self.track.eval(tau)
    }

    /// Straight chart-coordinate segment from p to q, constant velocity.
    pub fn chart_line(p: &[f64], s: f64, q: &[f64], t: f64, segments: usize) -> Curve {
        let dim = p.len();
        let vel: Vec<f64> = (0..dim).map(|d| (q[d] - p[d]) / (t - s)).collect();
        let track = HermiteTrack::from_fn(s, t, segments, |tau| {
            let w = (tau - s) / (t - s);
            let x = (0..dim).map(|d| p[d] + w * (q[d] - p[d])).collect();
            (x, vel.clone(), vec![0.0; dim])
        });
        Curve { track }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_quintic_exactly() {
        // f(τ) = τ^5 − 2τ³ + τ on [0, 2] is degree 5, so one segment nails it.
        let f = |t: f64| {
            (
                vec![t * t * t * t * t - 2.0 * t * t * t + t],
                vec![5.0 * t * t * t * t - 6.0 * t * t + 1.0],
                vec![20.0 * t * t * t - 12.0 * t],
            )
        };
        let tr = HermiteTrack::from_fn(0.0, 2.0, 1, f);
        for &tau in &[0.0, 0.37, 1.0, 1.71, 2.0] {
            let (x, v, a) = tr.eval(tau);
            let (ex, ev, ea) = f(tau);
            assert!((x[0] - ex[0]).abs() < 1e-12, "tau={tau}");
            assert!((v[0] - ev[0]).abs() < 1e-11);
            assert!((a[0] - ea[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn hermite_second_derivative_accuracy_on_transcendental() {
        let f = |t: f64| {
            (
                vec![libm::sin(3.0 * t)],
                vec![3.0 * libm::cos(3.0 * t)],
                vec![-9.0 * libm::sin(3.0 * t)],
            )
        };
        let measure = |segs: usize| {
            let tr = HermiteTrack::from_fn(0.0, 1.0, segs, f);
            let mut worst = 0.0f64;
            for k in 0..=500 {
                let tau = k as f64 / 500.0;
                let (_, _, a) = tr.eval(tau);
                worst = worst.max((a[0] + 9.0 * libm::sin(3.0 * tau)).abs());
            }
            worst
        };
        let coarse = measure(64);
        let fine = measure(128);
        assert!(coarse < 1e-7, "second-derivative error {coarse:.3e}");
        // Fourth-order convergence of the acceleration.
        let ratio = coarse / fine;
        assert!(ratio > 10.0 && ratio < 30.0, "ratio {ratio:.1}");
    }

    #[test]
    fn cubic_spline_interpolates_and_matches_cubic() {
        // Spline through samples of a cubic reproduces it (natural BCs hold
        // for this choice: second derivative vanishes at both ends).
        let g = |t: f64| t * t * t - 3.0 * t * t + 2.0 * t; // g''(0)= -6 ... not natural
        let lin = |t: f64| 2.0 * t - 1.0; // linear is natural
        let positions: Vec<Vec<f64>> = (0..=16)
            .map(|i| {
                let t = i as f64 / 16.0;
                vec![lin(t), g(t) * 0.0 + t]
            })
            .collect();
        let tr = HermiteTrack::from_positions(0.0, 1.0, &positions);
        for k in 0..=50 {
            let tau = k as f64 / 50.0;
            let (x, v, _) = tr.eval(tau);
            assert!((x[0] - lin(tau)).abs() < 1e-12);
            assert!((v[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_line_hits_endpoints() {
        let c = Curve::chart_line(&[0.0, 0.0], 0.0, &[1.0, -2.0], 1.0, 64);
        let (x, v) = c.state(1.0);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] + 2.0).abs() < 1e-14);
        assert!((v[0] - 1.0).abs() < 1e-13);
        assert!((v[1] + 2.0).abs() < 1e-13);
    }
}
