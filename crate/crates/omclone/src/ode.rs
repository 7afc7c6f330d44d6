//! Adaptive Dormand-Prince 5(4) integration of complex first-order ODEs.
//!
//! Shared by the master-equation engine (on the flattened density matrix) and
//! the mean-field equations. Steps are clamped to land exactly on requested
//! record times, so output is reproducible bit-for-bit for identical inputs.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Mixed absolute/relative tolerance for the adaptive step controller.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-8,
            abs: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Sum of accepted local error estimates; a conservative bound on the
    /// accumulated integration error.
    pub error_estimate: f64,
}

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}) after {steps} steps")]
    StepUnderflow { t: f64, h: f64, steps: usize },
    #[error(
        "step budget of {max_steps} exhausted at t = {t:.6e} (reached {done:.1}% of the interval)"
    )]
    MaxSteps { t: f64, max_steps: usize, done: f64 },
}

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `y' = f(t, y)` from `t0` to `t1`, invoking `record` at every time
/// in `record_times` (which must be sorted and lie within `[t0, t1]`).
/// Returns the final state.
#[allow(clippy::too_many_arguments)]
pub fn integrate<F, R>(
    mut rhs: F,
    y0: DVector<C64>,
    t0: f64,
    t1: f64,
    tol: Tolerance,
    max_steps: usize,
    record_times: &[f64],
    mut record: R,
) -> Result<(DVector<C64>, OdeStats), OdeError>
where
    F: FnMut(f64, &DVector<C64>, &mut DVector<C64>),
    R: FnMut(f64, &DVector<C64>),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut y = y0;
    let mut t = t0;
    let span = t1 - t0;
    debug_assert!(span >= 0.0);

    let mut next_record = 0usize;
    while next_record < record_times.len()
        && record_times[next_record] <= t0 + 1e-15 * span.max(1.0)
    {
        record(record_times[next_record], &y);
        next_record += 1;
    }
    if span == 0.0 {
        return Ok((y, stats));
    }

    let mut k1 = DVector::zeros(n);
    let mut k2 = DVector::zeros(n);
    let mut k3 = DVector::zeros(n);
    let mut k4 = DVector::zeros(n);
    let mut k5 = DVector::zeros(n);
    let mut k6 = DVector::zeros(n);
    let mut k7 = DVector::zeros(n);
    let mut ytmp = DVector::zeros(n);
    let mut ynew = DVector::zeros(n);

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;

    // initial step from the magnitude of the derivative
    let f_norm = k1.norm();
    let y_norm = y.norm().max(1.0);
    let mut h = if f_norm > 0.0 {
        (0.01 * y_norm / f_norm).min(span / 10.0)
    } else {
        span / 100.0
    };
    h = h.max(span * 1e-12);

    loop {
        if t >= t1 - 1e-14 * span {
            break;
        }
        if stats.steps + stats.rejected >= max_steps {
            return Err(OdeError::MaxSteps {
                t,
                max_steps,
                done: 100.0 * (t - t0) / span,
            });
        }
        // clamp to the next stop (record time or t1)
        let stop = if next_record < record_times.len() {
            record_times[next_record].min(t1)
        } else {
            t1
        };
        if t + h > stop {
            h = stop - t;
        }
        if h <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
            return Err(OdeError::StepUnderflow {
                t,
                h,
                steps: stats.steps,
            });
        }

        // stage evaluations
        ytmp.copy_from(&y);
        ytmp.axpy(C64::new(h * A21, 0.0), &k1, C64::new(1.0, 0.0));
        rhs(t + h / 5.0, &ytmp, &mut k2);

        ytmp.copy_from(&y);
        ytmp.axpy(C64::new(h * A31, 0.0), &k1, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A32, 0.0), &k2, C64::new(1.0, 0.0));
        rhs(t + 3.0 * h / 10.0, &ytmp, &mut k3);

        ytmp.copy_from(&y);
        ytmp.axpy(C64::new(h * A41, 0.0), &k1, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A42, 0.0), &k2, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A43, 0.0), &k3, C64::new(1.0, 0.0));
        rhs(t + 4.0 * h / 5.0, &ytmp, &mut k4);

        ytmp.copy_from(&y);
        ytmp.axpy(C64::new(h * A51, 0.0), &k1, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A52, 0.0), &k2, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A53, 0.0), &k3, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A54, 0.0), &k4, C64::new(1.0, 0.0));
        rhs(t + 8.0 * h / 9.0, &ytmp, &mut k5);

        ytmp.copy_from(&y);
        ytmp.axpy(C64::new(h * A61, 0.0), &k1, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A62, 0.0), &k2, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A63, 0.0), &k3, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A64, 0.0), &k4, C64::new(1.0, 0.0));
        ytmp.axpy(C64::new(h * A65, 0.0), &k5, C64::new(1.0, 0.0));
        rhs(t + h, &ytmp, &mut k6);

        ynew.copy_from(&y);
        ynew.axpy(C64::new(h * B1, 0.0), &k1, C64::new(1.0, 0.0));
        ynew.axpy(C64::new(h * B3, 0.0), &k3, C64::new(1.0, 0.0));
        ynew.axpy(C64::new(h * B4, 0.0), &k4, C64::new(1.0, 0.0));
        ynew.axpy(C64::new(h * B5, 0.0), &k5, C64::new(1.0, 0.0));
        ynew.axpy(C64::new(h * B6, 0.0), &k6, C64::new(1.0, 0.0));
        rhs(t + h, &ynew, &mut k7);
        stats.rhs_evals += 6;

        // embedded error estimate, RMS-normalized
        let mut err_sq = 0.0;
        for i in 0..n {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.abs + tol.rel * y[i].norm().max(ynew[i].norm());
            let r = e.norm() / scale;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt().max(1e-300);

        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7); // FSAL
            stats.steps += 1;
            stats.error_estimate += err * tol.abs.max(tol.rel);
            while next_record < record_times.len() && record_times[next_record] <= t + 1e-14 * span
            {
                record(record_times[next_record], &y);
                next_record += 1;
            }
        } else {
            stats.rejected += 1;
        }
        let scale = (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE);
        h *= scale;
    }
    while next_record < record_times.len() {
        record(record_times[next_record], &y);
        next_record += 1;
    }
    Ok((y, stats))
}
