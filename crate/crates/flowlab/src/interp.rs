//! Interpolation helpers for tabulated amplitudes.

use crate::error::{Error, Result};

/// Index i with nodes[i] ≤ x ≤ nodes[i+1] and the fractional position.
pub fn locate(nodes: &[f64], x: f64) -> Result<(usize, f64)> {
    let n = nodes.len();
    let tol = 1e-12 * nodes[n - 1].abs().max(1.0);
    if n == 1 {
        if (x - nodes[0]).abs() <= tol {
            return Ok((0, 0.0));
        }
        return Err(Error::Range(format!("{x} is not the single node {}", nodes[0])));
    }
    if !(x >= nodes[0] - tol && x <= nodes[n - 1] + tol) {
        return Err(Error::Range(format!("{x} outside [{}, {}]", nodes[0], nodes[n - 1])));
    }
    let x = x.clamp(nodes[0], nodes[n - 1]);
    let i = match nodes.partition_point(|&v| v <= x) {
        0 => 0,
        k => (k - 1).min(n - 2),
    };
    Ok((i, (x - nodes[i]) / (nodes[i + 1] - nodes[i])))
}

/// Cubic Hermite interpolation of (values, slopes) on ascending nodes.
pub fn hermite(nodes: &[f64], values: &[f64], slopes: &[f64], x: f64) -> Result<f64> {
    let (i, t) = locate(nodes, x)?;
    if nodes.len() == 1 {
        return Ok(values[0]);
    }
    let h = nodes[i + 1] - nodes[i];
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    Ok(h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1])
}

/// Four-point Lagrange stencil (indices and weights) around x on ascending nodes.
pub fn cubic_stencil(nodes: &[f64], x: f64) -> Result<([usize; 4], [f64; 4], usize)> {
    let n = nodes.len();
    if n < 4 {
        let (i, t) = locate(nodes, x)?;
        if n == 1 {
            return Ok(([0; 4], [1.0, 0.0, 0.0, 0.0], 1));
        }
        return Ok(([i, i + 1, 0, 0], [1.0 - t, t, 0.0, 0.0], 2));
    }
    let (i, _) = locate(nodes, x)?;
    let start = i.saturating_sub(1).min(n - 4);
    let idx = [start, start + 1, start + 2, start + 3];
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (x - nodes[idx[b]]) / (nodes[idx[a]] - nodes[idx[b]]);
            }
        }
    }
    Ok((idx, w, 4))
}

/// Multilinear weights over a tensor grid: (flat index, weight) pairs.
pub fn multilinear(axes: &[Vec<f64>], point: &[f64]) -> Result<Vec<(usize, f64)>> {
    let mut out = vec![(0usize, 1.0f64)];
    for (axis, &x) in axes.iter().zip(point) {
        let (i, t) = locate(axis, x)?;
        let len = axis.len();
        let mut next = Vec::with_capacity(out.len() * 2);
        for &(idx, w) in &out {
            if len == 1 {
                next.push((idx * len, w));
                continue;
            }
            if t < 1.0 {
                next.push((idx * len + i, w * (1.0 - t)));
            }
            if t > 0.0 {
                next.push((idx * len + i + 1, w * t));
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let nodes = [0.0, 0.3, 1.0, 2.5];
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let df = |x: f64| -2.0 + 1.5 * x * x;
        let v: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        let s: Vec<f64> = nodes.iter().map(|&x| df(x)).collect();
        for x in [0.0, 0.1, 0.77, 2.2, 2.5] {
            assert!((hermite(&nodes, &v, &s, x).unwrap() - f(x)).abs() < 1e-13);
        }
        assert!(hermite(&nodes, &v, &s, 2.6).is_err());
    }

    #[test]
    fn cubic_stencil_reproduces_cubics() {
        let nodes = [0.0, 0.5, 1.1, 2.0, 3.0, 4.5];
        let f = |x: f64| x * x * x - x;
        for x in [0.0, 0.2, 1.5, 4.4, 4.5] {
            let (idx, w, k) = cubic_stencil(&nodes, x).unwrap();
            let v: f64 = (0..k).map(|a| w[a] * f(nodes[idx[a]])).sum();
            assert!((v - f(x)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn multilinear_midpoint() {
        let axes = vec![vec![0.0, 1.0], vec![0.0, 2.0, 4.0]];
        let vals = [0.0, 2.0, 4.0, 1.0, 3.0, 5.0];
        let w = multilinear(&axes, &[0.5, 3.0]).unwrap();
        let v: f64 = w.iter().map(|&(i, w)| w * vals[i]).sum();
        assert!((v - 3.5).abs() < 1e-15);
        assert!(multilinear(&axes, &[1.5, 0.0]).is_err());
    }
}
