//! Adaptive Gauss–Kronrod integration and supremum search, used by the oracle
//! and the lemma certifier. The flow solver has its own fixed-rule quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G7K15 on [a, b]; stops when error ≤ max(abs_tol, rel_tol·|I|).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }
    const MAX_PIECES: usize = 4000;
    let (v, e) = kronrod(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    let mut evals = 15;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_PIECES {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:e} (value {total:e})"
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod(&mut f, worst.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        if !total.is_finite() {
            return Err(Error::NonConvergence(format!("non-finite integrand on [{a}, {b}]")));
        }
    }
    // Re-sum to shed accumulated update round-off.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Integral { value, error, evaluations: evals })
}

/// ∫_a^∞ f via x = a + t/(1 − t).
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    integrate(
        |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub value: f64,
    pub argmax: f64,
}

/// Grid scan with `grid` points then golden-section refinement around the best node.
pub fn maximize_1d<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, grid: usize) -> Maximum {
    let grid = grid.max(3);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = (f64::NEG_INFINITY, lo, 0usize);
    for i in 0..grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best.0 {
            best = (v, x, i);
        }
    }
    let mut a = lo + step * best.2.saturating_sub(1) as f64;
    let mut b = (lo + step * (best.2 + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 * (a.abs() + b.abs()).max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (x, v) = if fc > fd { (c, fc) } else { (d, fd) };
    if v > best.0 {
        Maximum { value: v, argmax: x }
    } else {
        Maximum { value: best.0, argmax: best.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum2 {
    pub value: f64,
    pub argmax: (f64, f64),
}

/// Grid scan on a box followed by repeated local zooming.
pub fn maximize_2d<F: FnMut(f64, f64) -> f64>(mut f: F, x: (f64, f64), y: (f64, f64), grid: usize) -> Maximum2 {
    let scan = |f: &mut F, x: (f64, f64), y: (f64, f64), n: usize, best: &mut Maximum2| {
        for i in 0..n {
            let xi = x.0 + (x.1 - x.0) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let yj = y.0 + (y.1 - y.0) * j as f64 / (n - 1) as f64;
                let v = f(xi, yj);
                if v > best.value {
                    *best = Maximum2 { value: v, argmax: (xi, yj) };
                }
            }
        }
    };
    let mut best = Maximum2 { value: f64::NEG_INFINITY, argmax: (x.0, y.0) };
    scan(&mut f, x, y, grid.max(3), &mut best);
    let (mut hx, mut hy) = ((x.1 - x.0) / grid as f64, (y.1 - y.0) / grid as f64);
    for _ in 0..80 {
        let (cx, cy) = best.argmax;
        let bx = ((cx - hx).max(x.0), (cx + hx).min(x.1));
        let by = ((cy - hy).max(y.0), (cy + hy).min(y.1));
        scan(&mut f, bx, by, 9, &mut best);
        hx *= 0.5;
        hy *= 0.5;
        if hx <= 1e-13 * (x.1 - x.0) && hy <= 1e-13 * (y.1 - y.0) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_and_singular_functions() {
        let r = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-12, 0.0).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn finds_known_maxima() {
        let m = maximize_1d(|x| x * (-x * x / 2.0).exp(), 0.0, 10.0, 10_000);
        assert!((m.value - (-0.5f64).exp()).abs() < 1e-15);
        assert!((m.argmax - 1.0).abs() < 1e-7);
        let m = maximize_2d(|x, y| -(x - 0.3).powi(2) - (y + 0.7).powi(2), (-1.0, 1.0), (-1.0, 1.0), 50);
        assert!(m.value.abs() < 1e-20 && (m.argmax.0 - 0.3).abs() < 1e-10);
    }
}
