//! Adaptive embedded Runge-Kutta integration with dense output.
//!
//! Dormand-Prince 5(4) pair with the first-same-as-last property and the
//! standard quartic interpolant for dense sampling. The right-hand side is
//! re-evaluated per stage; nothing is interpolated or cached across steps.
//! Step control is the usual scaled-RMS error estimate with growth clamped
//! to [0.2, 5.0] per step.
//!
//! The driver integrates forward only and emits interpolated samples at
//! caller-supplied times, which must be non-decreasing and lie inside the
//! integration span.

/// Nodes c2..c6 (c7 = 1 and the stage ties to the step end).
const C: [f64; 5] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0];

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

/// Fifth-order weights (also the a7j row; k7 is evaluated at the new point).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

/// Difference between the 5th- and 4th-order weights: error estimator.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Coefficients of the dense-output polynomial's fifth slope combination.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const SHRINK_FLOOR: f64 = 0.2;
const GROW_CEIL: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on the step size; the controller may choose smaller.
    pub max_step: f64,
    /// Abort threshold on total attempted steps.
    pub max_steps: u64,
}

/// Counters reported after a successful integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// Error control forced the step below the resolvable size at time t.
    StepUnderflow { t: f64 },
    /// The step budget ran out at time t.
    MaxStepsExceeded { t: f64 },
}

impl std::fmt::Display for OdeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeError::StepUnderflow { t } => {
                write!(f, "step size underflow at t = {t}")
            }
            OdeError::MaxStepsExceeded { t } => {
                write!(f, "step budget exhausted at t = {t}")
            }
        }
    }
}

impl std::error::Error for OdeError {}

fn scaled_rms<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let mut sum = 0.0;
    for i in 0..N {
        let q = v[i] / scale[i];
        sum += q * q;
    }
    (sum / N as f64).sqrt()
}

/// Standard starting-step heuristic: balance the size of the state against
/// its first and estimated second derivative under the error scale.
fn initial_step<const N: usize>(
    rhs: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    span: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    opts: &StepperOptions,
) -> f64 {
    let mut scale = [0.0; N];
    for i in 0..N {
        scale[i] = opts.abs_tol + opts.rel_tol * y0[i].abs();
    }
    let d0 = scaled_rms(y0, &scale);
    let d1 = scaled_rms(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span)
    .min(opts.max_step);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let f1 = rhs(t0 + h0, &y1);
    let mut df = [0.0; N];
    for i in 0..N {
        df[i] = f1[i] - f0[i];
    }
    let d2 = scaled_rms(&df, &scale) / h0;

    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(opts.max_step)
}

/// Integrate y' = rhs(t, y) from `t_start` to `t_end` (forward).
///
/// `sample_times` must be non-decreasing and contained in the span; each is
/// delivered once to `on_sample` with its index, using dense interpolation
/// inside accepted steps. `on_accept` fires after every accepted step with
/// the new (t, y), for inexpensive monitoring.
///
/// Returns the final state and step counters.
pub fn integrate_dense<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    t_start: f64,
    t_end: f64,
    y0: [f64; N],
    opts: &StepperOptions,
    sample_times: &[f64],
    mut on_sample: impl FnMut(usize, f64, &[f64; N]),
    mut on_accept: impl FnMut(f64, &[f64; N]),
) -> Result<([f64; N], StepStats), OdeError> {
    debug_assert!(t_end > t_start);
    debug_assert!(opts.rel_tol > 0.0 && opts.abs_tol > 0.0 && opts.max_step > 0.0);
    debug_assert!(sample_times.windows(2).all(|w| w[0] <= w[1]));

    let mut stats = StepStats::default();
    let mut t = t_start;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evaluations += 1;

    let mut next_sample = 0;
    while next_sample < sample_times.len() && sample_times[next_sample] <= t {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }

    let mut h = initial_step(&rhs, t, t_end - t_start, &y, &k1, opts);
    stats.rhs_evaluations += 1;

    let mut k2;
    let mut k3;
    let mut k4;
    let mut k5;
    let mut k6;
    let mut k7;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeError::MaxStepsExceeded { t });
        }
        // Floor: below ~16 ulp of the current time the step cannot advance t.
        let h_min = 16.0 * f64::EPSILON * t.abs().max(t_end - t_start);
        if h < h_min {
            return Err(OdeError::StepUnderflow { t });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        let mut ys = [0.0; N];
        for i in 0..N {
            ys[i] = y[i] + h * (A21 * k1[i]);
        }
        k2 = rhs(t + C[0] * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        k3 = rhs(t + C[1] * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        k4 = rhs(t + C[2] * h, &ys);
        for i in 0..N {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        k5 = rhs(t + C[3] * h, &ys);
        for i in 0..N {
            ys[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        k6 = rhs(t + C[4] * h, &ys);

        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] = y[i]
                + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        k7 = rhs(t + h, &y_new);
        stats.rhs_evaluations += 6;

        let mut err_vec = [0.0; N];
        let mut scale = [0.0; N];
        for i in 0..N {
            err_vec[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            scale[i] = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        }
        let err = scaled_rms(&err_vec, &scale);

        if err <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            if next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                // Dense-output polynomial over [t, t+h], built on demand.
                let mut rc2 = [0.0; N];
                let mut rc3 = [0.0; N];
                let mut rc4 = [0.0; N];
                let mut rc5 = [0.0; N];
                for i in 0..N {
                    rc2[i] = y_new[i] - y[i];
                    rc3[i] = h * k1[i] - rc2[i];
                    rc4[i] = rc2[i] - h * k7[i] - rc3[i];
                    rc5[i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                while next_sample < sample_times.len() && sample_times[next_sample] <= t_new {
                    let ts = sample_times[next_sample];
                    let theta = ((ts - t) / h).clamp(0.0, 1.0);
                    if theta == 1.0 {
                        on_sample(next_sample, ts, &y_new);
                        next_sample += 1;
                        continue;
                    }
                    let omt = 1.0 - theta;
                    let mut yi = [0.0; N];
                    for i in 0..N {
                        yi[i] = y[i]
                            + theta
                                * (rc2[i] + omt * (rc3[i] + theta * (rc4[i] + omt * rc5[i])));
                    }
                    on_sample(next_sample, ts, &yi);
                    next_sample += 1;
                }
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            on_accept(t, &y);
            let factor = if err == 0.0 {
                GROW_CEIL
            } else {
                (SAFETY * err.powf(-0.2)).clamp(SHRINK_FLOOR, GROW_CEIL)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(SHRINK_FLOOR, 1.0)
            } else {
                SHRINK_FLOOR
            };
            h *= factor;
        }
    }

    // Anything left over sits at the end point up to rounding.
    while next_sample < sample_times.len() {
        on_sample(next_sample, sample_times[next_sample], &y);
        next_sample += 1;
    }

    Ok((y, stats))
}
