//! Per-node integration of the flow equation over the Λ grid.

use serde::Serialize;

use crate::error::Result;
use crate::ode::{integrate, OdeStats, Tolerances};

/// Flow of one momentum node, split into linearly independent components.
///
/// Component c satisfies L_c(Λ_i) = v0[c] + partial[c][i] with
/// partial[c][i] = Σ_{j<i} Δ_c,j, the increments accumulated from Λ = 0 upward.
#[derive(Debug, Clone, Serialize)]
pub struct NodeSeries {
    pub v0: Vec<f64>,
    pub partial: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
    pub steps: usize,
}

impl NodeSeries {
    pub fn components(&self) -> usize {
        self.v0.len()
    }

    /// Value at Λ = 0 of Σ_c coef_c L_c.
    pub fn value_at_zero(&self, coefs: &[f64]) -> f64 {
        coefs.iter().zip(&self.v0).map(|(a, v)| a * v).sum()
    }

    /// Values and slopes of Σ_c coef_c L_c; `pinned` replaces the Λ = 0 value.
    pub fn combine(&self, coefs: &[f64], pinned: Option<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = self.partial[0].len();
        let base = pinned.unwrap_or_else(|| self.value_at_zero(coefs));
        let mut values = vec![base; n];
        let mut slopes = vec![0.0; n];
        for (c, &a) in coefs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for i in 0..n {
                values[i] += a * self.partial[c][i];
                slopes[i] += a * self.slopes[c][i];
            }
        }
        (values, slopes)
    }
}

/// Integrates dL/dΛ = rhs(Λ) from the boundary values at Λ0 (the last grid node)
/// down to Λ = 0 (the first grid node). The rhs does not depend on L itself.
///
/// With `floor` set, each interval also accepts an absolute error of
/// floor·rtol times the magnitude accumulated above it; otherwise every
/// increment is resolved to relative accuracy rtol.
pub fn integrate_node<R>(grid: &[f64], boundary: &[f64], rhs: R, tol: Tolerances, floor: Option<f64>) -> Result<NodeSeries>
where
    R: Fn(f64, &mut [f64]) -> Result<()>,
{
    let nc = boundary.len();
    let n = grid.len();
    let mut increments = vec![vec![0.0; n - 1]; nc];
    let mut slopes = vec![vec![0.0; n]; nc];
    let mut buf = vec![0.0; nc];
    for (i, &lambda) in grid.iter().enumerate() {
        if lambda > 0.0 {
            rhs(lambda, &mut buf)?;
            for c in 0..nc {
                slopes[c][i] = buf[c];
            }
        }
    }
    let mut steps = 0;
    let mut magnitude = boundary.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for j in (0..n - 1).rev() {
        let (lo, hi) = (grid[j], grid[j + 1]);
        let mut y = vec![0.0; nc];
        let tol = match floor {
            Some(f) => Tolerances { atol: tol.atol.max(f * tol.rtol * magnitude), ..tol },
            None => tol,
        };
        let stats: OdeStats = if lo > 0.0 {
            integrate(
                |t, _, d| {
                    let l = t.exp();
                    rhs(l, d)?;
                    d.iter_mut().for_each(|x| *x *= l);
                    Ok(())
                },
                hi.ln(),
                lo.ln(),
                &mut y,
                tol,
            )?
        } else {
            integrate(
                |l, _, d| {
                    if l <= 0.0 {
                        d.iter_mut().for_each(|x| *x = 0.0);
                        Ok(())
                    } else {
                        rhs(l, d)
                    }
                },
                hi,
                lo,
                &mut y,
                tol,
            )?
        };
        steps += stats.accepted + stats.rejected;
        for c in 0..nc {
            increments[c][j] = -y[c];
            magnitude = magnitude.max(y[c].abs());
        }
    }
    let mut v0 = vec![0.0; nc];
    let mut partial = vec![vec![0.0; n]; nc];
    for c in 0..nc {
        let mut acc = 0.0;
        for j in 0..n - 1 {
            acc += increments[c][j];
            partial[c][j + 1] = acc;
        }
        v0[c] = boundary[c] - acc;
    }
    Ok(NodeSeries { v0, partial, slopes, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_antiderivative() {
        // L(Λ) = Λ³ with boundary value 8 at Λ = 2.
        let grid = [0.0, 0.1, 0.5, 1.0, 2.0];
        let s = integrate_node(
            &grid,
            &[8.0, 1.0],
            |l, d| {
                d[0] = 3.0 * l * l;
                d[1] = 0.0;
                Ok(())
            },
            Tolerances::default(),
            None,
        )
        .unwrap();
        assert!(s.v0[0].abs() < 1e-7);
        assert_eq!(s.v0[1], 1.0);
        let (v, sl) = s.combine(&[1.0, 2.0], None);
        for (i, &l) in grid.iter().enumerate() {
            assert!((v[i] - (l * l * l + 2.0)).abs() < 1e-7);
            assert!((sl[i] - 3.0 * l * l).abs() < 1e-12);
        }
        let (v, _) = s.combine(&[1.0, 0.0], Some(0.0));
        assert_eq!(v[0], 0.0);
        assert!((v[4] - 8.0).abs() < 1e-7);
    }
}
