//! Adaptive Dormand–Prince 5(4) integration with chart-exit detection.
//!
//! Steps are clipped to land exactly on every requested output time, so the
//! recorded states carry full integrator accuracy (no dense-output
//! interpolation error enters the curve representation).

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    /// The solution left the declared domain; payload is the bracketed exit time.
    ExitedDomain { t: f64 },
    /// Step size collapsed below the resolvable scale.
    StepSizeUnderflow { t: f64 },
    /// The step budget ran out before reaching the end time.
    TooManySteps { t: f64 },
}

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 100_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0`, recording the state at each time in
/// `outputs` (strictly increasing, all > `t0`). `in_domain` is checked at
/// every accepted step; a violation is bracketed by bisection on the last
/// good step and reported with the exit time.
pub fn integrate(
    mut f: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    mut in_domain: impl FnMut(f64, &[f64]) -> bool,
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, OdeError> {
    let dim = y0.len();
    let t_end = *outputs.last().expect("at least one output time");
    let mut t = t0;
    let mut y = y0.to_vec();
    if !in_domain(t, &y) {
        return Err(OdeError::ExitedDomain { t });
    }

    let mut recorded: Vec<Vec<f64>> = Vec::with_capacity(outputs.len());
    let mut next_out = 0usize;

    let mut k = vec![vec![0.0f64; dim]; 7];
    let mut stage_y = vec![0.0f64; dim];
    f(t, &y, &mut k[0]);

    let span = t_end - t0;
    let mut h = (span / 100.0).min(0.1_f64.min(span));
    let mut steps = 0usize;

    while next_out < outputs.len() {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        steps += 1;

        // Clip the step onto the next requested output time.
        let target = outputs[next_out];
        let mut clipped = false;
        if t + h >= target {
            h = target - t;
            clipped = true;
        }
        let h_min = 1e-14 * (1.0 + t.abs());
        if h < h_min {
            // Degenerate clip: we are already at the output time.
            if clipped {
                recorded.push(y.clone());
                next_out += 1;
                h = h_min.max(span / 100.0);
                continue;
            }
            return Err(OdeError::StepSizeUnderflow { t });
        }

        // Stages (FSAL: k[0] already holds f(t, y)).
        for s in 0..6 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h * a * kj[i];
                    }
                }
                stage_y[i] = acc;
            }
            let ts = t + C[s] * h;
            let (head, tail) = k.split_at_mut(s + 1);
            let _ = head;
            f(ts, &stage_y, &mut tail[0]);
        }

        // 5th-order solution and embedded error estimate.
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (d5 - d4) / scale;
            err += e * e;
        }
        let err = libm::sqrt(err / dim as f64);

        if err <= 1.0 {
            let t_new = t + h;
            if !in_domain(t_new, &y5) {
                // Bisect [t, t+h] with plain half-step re-integration to
                // bracket the exit time for the error payload.
                let t_exit = bracket_exit(&mut f, t, &y, h, &mut in_domain);
                return Err(OdeError::ExitedDomain { t: t_exit });
            }
            t = t_new;
            y = y5;
            if clipped {
                recorded.push(y.clone());
                next_out += 1;
            }
            // FSAL reuse.
            let last = k[6].clone();
            k[0] = last;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).max(h_min);
        } else {
            let factor = (0.9 * libm::pow(err, -0.2)).clamp(0.1, 1.0);
            h *= factor;
            if h < h_min {
                return Err(OdeError::StepSizeUnderflow { t });
            }
        }
    }

    Ok(recorded)
}

/// Locate the domain-exit time inside one accepted step by bisection with
/// short fixed RK4 sub-steps (accuracy only matters for the diagnostic).
fn bracket_exit(
    f: &mut impl FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    y: &[f64],
    h: f64,
    in_domain: &mut impl FnMut(f64, &[f64]) -> bool,
) -> f64 {
    let dim = y.len();
    let mut lo = 0.0f64;
    let mut hi = h;
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut probe = |dt: f64| {
        // Single RK4 step of size dt from (t, y).
        let mut tmp = vec![0.0; dim];
        f(t, y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        f(t + 0.5 * dt, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        f(t + 0.5 * dt, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        f(t + dt, &tmp, &mut k4);
        for i in 0..dim {
            tmp[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        in_domain(t + dt, &tmp)
    };
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if probe(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t + 0.5 * (lo + hi)
}
