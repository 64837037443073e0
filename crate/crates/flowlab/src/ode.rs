//! Adaptive Dormand–Prince 5(4) integrator for small vector ODEs.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-300, max_steps: 100_000 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates y' = f(t, y) from t0 to t1 (either direction) starting at y.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut [f64], tol: Tolerances) -> Result<OdeStats>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y.len();
    let mut stats = OdeStats::default();
    if t0 == t1 {
        return Ok(stats);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = span;
    let mut k = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    f(t, y, &mut k[0])?;
    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::NonConvergence(format!(
                "step limit reached at t = {t} on [{t0}, {t1}]"
            )));
        }
        let h_signed = dir * h.min((t1 - t).abs());
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h_signed * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            let ts = if s == 6 { t + h_signed } else { t + C[s] * h_signed };
            f(ts, &stage, &mut k[s])?;
        }
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += h_signed * B5[s] * k[s][i];
                lo += h_signed * B4[s] * k[s][i];
            }
            if !hi.is_finite() || !lo.is_finite() {
                return Err(Error::NonConvergence(format!("non-finite step at t = {t}")));
            }
            y5[i] = hi;
            let sc = tol.atol + tol.rtol * y[i].abs().max(hi.abs());
            err = err.max((hi - lo).abs() / sc);
        }
        if err <= 1.0 {
            t = if (t1 - (t + h_signed)) * dir <= 1e-12 * span { t1 } else { t + h_signed };
            y.copy_from_slice(&y5);
            // FSAL: last stage is the derivative at the new point.
            let last = k[6].clone();
            k[0] = last;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h.min((t1 - t).abs().max(f64::MIN_POSITIVE)) * factor;
        if (t1 - t) * dir > 0.0 && h < 1e-14 * span {
            return Err(Error::NonConvergence(format!("step size underflow at t = {t} on [{t0}, {t1}]")));
        }
    }
    Ok(stats)
}
