//! Low-order amplitudes computed directly from Feynman graphs, independent of
//! the flow solver's quadrature and recursion.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{propagator, FlowScales, MomentumConfig};
use crate::numerics::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature1d,
    Quadrature2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
}

const LOOP_NORM: f64 = 1.0 / (16.0 * PI * PI);

/// Renormalized one-loop tadpole,
/// 6 (g/4!) ∫_0^Λ dΛ' (−2/Λ'³) e^{−m²/Λ'²} Λ'⁴/(16π²).
pub fn tadpole_l1(scales: &FlowScales, g: f64) -> Result<OracleResult> {
    let m2 = scales.m * scales.m;
    if scales.lambda == 0.0 {
        return Ok(OracleResult { value: 0.0, method: Method::ClosedForm, error_estimate: 0.0 });
    }
    let pref = 6.0 * g / 24.0 * (-2.0) * LOOP_NORM;
    let r = integrate(
        |x: f64| if x == 0.0 { 0.0 } else { x * (-m2 / (x * x)).exp() },
        0.0,
        scales.lambda,
        1e-13,
        0.0,
    )?;
    Ok(OracleResult {
        value: pref * r.value,
        method: Method::Quadrature1d,
        error_estimate: (pref * r.error).abs(),
    })
}

/// Proper-time bounds (a, b) = (1/Λ0², 1/Λ²) of C^{Λ,Λ0}(k) = ∫_a^b dα e^{−α(k²+m²)}.
fn schwinger_window(s: &FlowScales) -> (f64, f64) {
    let a = if s.lambda0.is_infinite() { 0.0 } else { 1.0 / (s.lambda0 * s.lambda0) };
    let b = if s.lambda == 0.0 { f64::INFINITY } else { 1.0 / (s.lambda * s.lambda) };
    (a, b)
}

const ORACLE_TOL: f64 = 1e-10;

/// ∫∫ dα1 dα2 h(α1, α2) over [lo1, hi1] × [lo2, hi2] in logarithmic variables,
/// with h already containing the e^{−(α1+α2)m²} damping.
fn log_box<H: Fn(f64, f64) -> f64>(h: &H, lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Result<(f64, f64)> {
    if !(hi1 > lo1) || !(hi2 > lo2) {
        return Ok((0.0, 0.0));
    }
    let mut inner_err: f64 = 0.0;
    let (u1a, u1b) = (lo1.ln(), hi1.ln());
    let (u2a, u2b) = (lo2.ln(), hi2.ln());
    let mut failure = None;
    let outer = integrate(
        |u1: f64| {
            let a1 = u1.exp();
            match integrate(|u2: f64| {
                let a2 = u2.exp();
                a1 * a2 * h(a1, a2)
            }, u2a, u2b, ORACLE_TOL, 1e-300)
            {
                Ok(r) => {
                    inner_err = inner_err.max(r.error / r.value.abs().max(1e-300));
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        u1a,
        u1b,
        ORACLE_TOL,
        1e-300,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((outer.value, outer.error + inner_err.min(1.0) * outer.value.abs()))
}

/// Renormalized bubble R^Λ(P) = B^Λ(P) − B^0(0) with B^Λ(P) = ∫_k C(k) C(k+P).
pub fn renormalized_bubble(p_sq: f64, s: &FlowScales) -> Result<(f64, f64)> {
    let m2 = s.m * s.m;
    let (a, b) = schwinger_window(s);
    if a == 0.0 {
        return Err(Error::Argument("the bubble oracle needs a finite Λ0".into()));
    }
    // Beyond α ~ 60/m² the damping e^{−αm²} is below 1e-26.
    let cut = 60.0 / m2;
    let top = b.min(cut);
    let momentum_part = |a1: f64, a2: f64| {
        let sum = a1 + a2;
        (-sum * m2).exp() * (-a1 * a2 * p_sq / sum).exp_m1() / (sum * sum)
    };
    let zero_part = |a1: f64, a2: f64| {
        let sum = a1 + a2;
        (-sum * m2).exp() / (sum * sum)
    };
    let (dp, ep) = if p_sq == 0.0 { (0.0, 0.0) } else { log_box(&momentum_part, a, top, a, top)? };
    // B^Λ(0) − B^0(0) = −∫ over [a,∞)² ∖ [a,b]².
    let (mut dz, mut ez) = (0.0, 0.0);
    if b < cut {
        let (strip, e1) = log_box(&zero_part, b, cut, a, cut)?;
        let (corner, e2) = log_box(&zero_part, b, cut, b, cut)?;
        dz = -(2.0 * strip - corner);
        ez = 2.0 * e1 + e2;
    }
    Ok(((dp + dz) * LOOP_NORM, (ep + ez) * LOOP_NORM))
}

/// Channel momenta squared (s, t, u) of the family (p, −p, q, −q).
pub fn family_channels(cfg: &MomentumConfig) -> Result<[f64; 3]> {
    let p = cfg.momenta();
    let tol = 1e-12 * p.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if p.len() != 4 || (p[0] + p[1]).norm() > tol || (p[2] + p[3]).norm() > tol {
        return Err(Error::Argument("bubble oracle needs a configuration (p, -p, q, -q)".into()));
    }
    Ok([0.0, (p[0] + p[2]).norm_sq(), (p[0] + p[3]).norm_sq()])
}

/// Renormalized one-loop four-point amplitude on the family (p, −p, q, −q):
/// −(g²/48) Σ_channels R(P) − (g/12) T^Λ Σ_i C(p_i), with T the tadpole.
pub fn bubble_l1(cfg: &MomentumConfig, s: &FlowScales, g: f64) -> Result<OracleResult> {
    let channels = family_channels(cfg)?;
    let mut value = 0.0;
    let mut err = 0.0;
    for p2 in channels {
        let (r, e) = renormalized_bubble(p2, s)?;
        value += -(g * g / 48.0) * r;
        err += (g * g / 48.0) * e;
    }
    let tad = tadpole_l1(s, g)?;
    let legs: f64 = cfg.momenta().iter().map(|p| propagator(p.norm_sq(), s)).sum();
    value += -(g / 12.0) * tad.value * legs;
    err += (g / 12.0) * tad.error_estimate * legs;
    Ok(OracleResult { value, method: Method::Quadrature2d, error_estimate: err })
}

/// Sum over labelled φ⁴ trees. A tree with V vertices contributes
/// (−1)^{V−1} g^V Π C(internal) / (2n)!.
pub fn tree_graph_enumeration(cfg: &MomentumConfig, s: &FlowScales, g: f64) -> Result<f64> {
    let p = cfg.momenta();
    let legs = p.len();
    let c = |idx: &[usize]| {
        let q = idx.iter().fold(crate::model::FourMomentum::ZERO, |acc, &i| acc + p[i]);
        propagator(q.norm_sq(), s)
    };
    match legs {
        2 => Ok(0.0),
        4 => Ok(g / 24.0),
        6 => {
            // Two vertices: triples containing leg 0 label the 10 channels.
            let mut total = 0.0;
            for i in 1..6 {
                for j in i + 1..6 {
                    total += c(&[0, i, j]);
                }
            }
            Ok(-g * g * total / 720.0)
        }
        8 => {
            // Three vertices in a chain: unordered pairs of disjoint end triples.
            let mut total = 0.0;
            let triples: Vec<[usize; 3]> = (0..8)
                .flat_map(|i| (i + 1..8).flat_map(move |j| (j + 1..8).map(move |k| [i, j, k])))
                .collect();
            for (x, t1) in triples.iter().enumerate() {
                for t2 in &triples[x + 1..] {
                    if t1.iter().any(|i| t2.contains(i)) {
                        continue;
                    }
                    total += c(t1) * c(t2);
                }
            }
            Ok(g * g * g * total / 40320.0)
        }
        _ => Err(Error::Unsupported(format!("tree enumeration for {legs} legs"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_family;

    fn sc(l: f64, l0: f64) -> FlowScales {
        FlowScales::new(l, l0, 1.0).unwrap()
    }

    #[test]
    fn tadpole_closed_form() {
        // −(g/4)(Λ² e^{−m²/Λ²} − m² E1(m²/Λ²))/(16π²); E1(1) = 0.21938393439552...
        let t = tadpole_l1(&sc(1.0, 100.0), 1.0).unwrap();
        let exact = -0.25 * ((-1.0f64).exp() - 0.219_383_934_395_520_27) * LOOP_NORM;
        assert!(((t.value - exact) / exact).abs() < 1e-12, "{} {}", t.value, exact);
        assert_eq!(tadpole_l1(&sc(0.0, 100.0), 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn tadpole_bounds_and_monotonicity() {
        let mut prev = 0.0;
        for i in 1..=40 {
            let l = 0.25 * i as f64;
            let s = sc(l, 100.0);
            let v = tadpole_l1(&s, 24.0).unwrap().value;
            assert!(v < prev || (prev == 0.0 && v <= 0.0));
            assert!(v.abs() <= s.kappa().powi(2));
            prev = v;
        }
    }

    #[test]
    fn bubble_vanishes_at_renormalization_point() {
        let cfg = make_family("four-point", &[0.0, 0.0, 0.0]).unwrap();
        let r = bubble_l1(&cfg, &sc(0.0, 100.0), 1.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn bubble_symmetric_under_q_flip() {
        let s = sc(0.7, 100.0);
        let a = bubble_l1(&make_family("four-point", &[1.0, 0.6, 0.3]).unwrap(), &s, 1.0).unwrap();
        let b = bubble_l1(&make_family("four-point", &[1.0, 0.6, -0.3]).unwrap(), &s, 1.0).unwrap();
        assert!(((a.value - b.value) / a.value).abs() < 1e-9);
    }

    #[test]
    fn zero_momentum_bubble_difference_is_closed_form() {
        // B^Λ(0) − B^0(0) = ∫_k (C^Λ(k)² − C^0(k)²) as a radial integral.
        let s = sc(1.3, 200.0);
        let (r, e) = renormalized_bubble(0.0, &s).unwrap();
        let direct = crate::numerics::integrate(
            |k: f64| {
                let k2 = k * k;
                let c = propagator(k2, &s);
                let c0 = propagator(k2, &s.with_lambda(0.0));
                k2 * k * (c * c - c0 * c0) / (8.0 * PI * PI)
            },
            0.0,
            20.0,
            1e-12,
            0.0,
        )
        .unwrap();
        assert!(((r - direct.value) / direct.value).abs() < 1e-8, "{r} {}", direct.value);
        assert!(e >= 0.0);
    }

    #[test]
    fn bubble_matches_momentum_space_integral() {
        let s = sc(0.4, 100.0);
        let (r, e) = renormalized_bubble(2.0, &s).unwrap();
        let radial = |k: f64| {
                // ∫_k C(k)C(k+P) with P along an axis, angular part by GK.
                let inner = crate::numerics::integrate(
                    |th: f64| {
                        let q2 = k * k + 2.0 + 2.0 * k * 2f64.sqrt() * th.cos();
                        th.sin().powi(2) * propagator(q2.max(0.0), &s)
                    },
                    0.0,
                    PI,
                    1e-12,
                    0.0,
                )
                .unwrap()
                .value;
                let c0 = propagator(k * k, &s.with_lambda(0.0));
                k * k * k * 4.0 * PI / (16.0 * PI.powi(4)) * (propagator(k * k, &s) * inner - c0 * c0 * PI / 2.0)
        };
        let near = crate::numerics::integrate(radial, 0.0, 20.0, 1e-11, 0.0).unwrap();
        let far = crate::numerics::integrate(radial, 20.0, 1000.0, 1e-11, 0.0).unwrap();
        let direct = near.value + far.value;
        assert!((r - direct).abs() < 1e-8 * r.abs(), "{r} {direct} {e}");
    }

    #[test]
    fn tree_enumeration_low_orders() {
        let s = sc(0.9, 50.0);
        assert_eq!(tree_graph_enumeration(&MomentumConfig::zero(2).unwrap(), &s, 2.0).unwrap(), 0.0);
        assert_eq!(tree_graph_enumeration(&MomentumConfig::zero(4).unwrap(), &s, 2.0).unwrap(), 2.0 / 24.0);
        // Zero momenta: all ten channels equal C(0), so L6 = −(g²/72) C(0).
        let six = tree_graph_enumeration(&MomentumConfig::zero(6).unwrap(), &s, 1.0).unwrap();
        assert!((six + propagator(0.0, &s) / 72.0).abs() < 1e-16);
        assert!(tree_graph_enumeration(&MomentumConfig::zero(10).unwrap(), &s, 1.0).is_err());
    }
}
