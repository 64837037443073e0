//! Numerical certification of the elementary bounds (Lemmas 1–8) and of every
//! sup/integral constant the inductive proof uses.
//!
//! Combinatorial statements are checked in exact integer or rational
//! arithmetic; sup constants by grid scan plus local refinement; integral
//! statements by adaptive Gauss–Kronrod quadrature.

use std::f64::consts::{E, PI};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cert::CertReport;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_to_infinity, maximize_1d, maximize_2d};

/// Lower edge of the drift window: a recomputed constant must reach this
/// fraction of the claimed one.
pub const DRIFT_FLOOR: f64 = 0.9;

/// Sweep sizes for the lemma checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaSettings {
    /// Lemma 1 floating-point range for l and n.
    pub float_max: usize,
    /// Range of l and n for the exact Lemma 1 and Lemma 2 sums.
    pub exact_max: usize,
    /// Bound on n + l (and on l) for the exact inner inequalities of Lemma 2.
    pub inner_max: usize,
    /// Random 4D configurations per v in Lemma 3.
    pub lemma3_samples: usize,
    pub lemma4_r_max: u32,
    /// Points of the positive a-grid in Lemma 4 (a = 0 is added).
    pub lemma4_a_points: usize,
    pub lemma5_l_max: usize,
    pub lemma7_l_max: usize,
    pub lemma8_samples: usize,
    pub seed: u64,
}

impl Default for LemmaSettings {
    fn default() -> Self {
        LemmaSettings {
            float_max: 200,
            exact_max: 30,
            inner_max: 120,
            lemma3_samples: 1_000_000,
            lemma4_r_max: 40,
            lemma4_a_points: 57,
            lemma5_l_max: 20,
            lemma7_l_max: 20,
            lemma8_samples: 100_000,
            seed: 1,
        }
    }
}

impl LemmaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.float_max < 1 || self.exact_max < 1 {
            return Err(Error::Argument("lemma sweeps need l_max, n_max >= 1".into()));
        }
        if self.exact_max > 60 || self.inner_max > 200 {
            return Err(Error::Argument("exact sweeps are capped at n, l <= 60 and n + l <= 200".into()));
        }
        if self.lemma4_r_max > 60 {
            return Err(Error::Argument("Lemma 4 needs r <= 60".into()));
        }
        if self.lemma3_samples == 0 || self.lemma8_samples == 0 {
            return Err(Error::Argument("sample counts must be positive".into()));
        }
        Ok(())
    }
}

/// Runs the checks of one lemma (1..=8).
pub fn verify_lemma(lemma: u8, s: &LemmaSettings, c: &Constants) -> Result<Vec<CertReport>> {
    s.validate()?;
    match lemma {
        1 => Ok(verify_lemma1(s.float_max, s.exact_max)),
        2 => Ok(verify_lemma2(s.exact_max, s.inner_max, c)),
        3 => Ok(verify_lemma3(s.lemma3_samples, s.seed, c)),
        4 => verify_lemma4(s.lemma4_r_max, s.lemma4_a_points, c),
        5 => verify_lemma5(s.lemma5_l_max),
        6 => Ok(verify_lemma6_constants(s.seed, c)),
        7 => verify_lemma7(s.lemma7_l_max, c),
        8 => Ok(verify_lemma8(s.lemma8_samples, s.seed)),
        _ => Err(Error::Argument(format!("there is no lemma {lemma}; expected 1..=8"))),
    }
}

/// Runs every lemma check in parallel; reports are ordered by lemma, then by
/// the order each check emits them.
pub fn verify_all(s: &LemmaSettings, c: &Constants) -> Result<Vec<CertReport>> {
    let parts: Vec<Result<Vec<CertReport>>> = (1..=8u8).into_par_iter().map(|k| verify_lemma(k, s, c)).collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn within_drift(computed: f64, claimed: f64) -> bool {
    computed <= claimed && computed >= DRIFT_FLOOR * claimed
}

fn drift_report(id: &str, claimed: f64, computed: f64, domain: &str) -> CertReport {
    CertReport::new(id, claimed, computed, domain, within_drift(computed, claimed))
        .note(format!("computed/claimed = {:.4}", computed / claimed))
}

fn ratio(a: &BigRational) -> f64 {
    a.to_f64().unwrap_or(f64::INFINITY)
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite constant")
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------- Lemma 1

fn lemma1_l_sum(l: usize, lo: usize) -> f64 {
    (lo..=l).filter(|&l1| l - l1 >= lo).map(|l1| 1.0 / (((l1 + 1) * (l1 + 1) * (l - l1 + 1) * (l - l1 + 1)) as f64)).sum()
}

fn lemma1_n_sum(n: usize, lo: usize) -> f64 {
    (lo..=n).filter(|&n1| n + 1 - n1 >= lo).map(|n1| 1.0 / ((n1 * n1 * n1) as f64 * ((n + 1 - n1).pow(3)) as f64)).sum()
}

fn lemma1_l_exact(l: usize, lo: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for l1 in lo..=l {
        if l - l1 >= lo {
            acc += rat(1, ((l1 + 1) * (l1 + 1) * (l - l1 + 1) * (l - l1 + 1)) as u64);
        }
    }
    acc
}

fn lemma1_n_exact(n: usize, lo: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for n1 in lo..=n {
        if n + 1 - n1 >= lo {
            acc += rat(1, (n1.pow(3) * (n + 1 - n1).pow(3)) as u64);
        }
    }
    acc
}

/// Lemma 1: both convolution sums, exactly for l, n ≤ `exact_max`, in
/// floating point for l, n ≤ `float_max`. `computed` is the sup of the sum
/// times (l+1)² (or n³), against the claimed numerator.
pub fn verify_lemma1(float_max: usize, exact_max: usize) -> Vec<CertReport> {
    let exact_max = exact_max.min(float_max);
    let cases: [(&str, f64, usize, bool); 4] =
        [("lemma1.a", 5.0, 0, true), ("lemma1.a2", 3.0, 1, true), ("lemma1.b", 4.0, 1, false), ("lemma1.b2", 2.0, 2, false)];
    cases
        .iter()
        .map(|&(id, claimed, lo, is_l)| {
            let first = if is_l { 0 } else { 1 };
            let weight = |k: usize| if is_l { ((k + 1) * (k + 1)) as f64 } else { (k * k * k) as f64 };
            let mut worst = (0.0f64, first);
            let mut float_ok = true;
            for k in first..=float_max {
                let v = if is_l { lemma1_l_sum(k, lo) } else { lemma1_n_sum(k, lo) } * weight(k);
                float_ok &= v <= claimed;
                if v > worst.0 {
                    worst = (v, k);
                }
            }
            let mut exact_ok = true;
            for k in first..=exact_max {
                let (sum, w) = if is_l {
                    (lemma1_l_exact(k, lo), BigRational::from_integer(BigInt::from((k + 1) * (k + 1))))
                } else {
                    (lemma1_n_exact(k, lo), BigRational::from_integer(BigInt::from(k * k * k)))
                };
                exact_ok &= sum * w <= exact(claimed);
            }
            let var = if is_l { "l" } else { "n" };
            CertReport::new(
                id,
                claimed,
                worst.0,
                format!("{var} <= {float_max} (f64), {var} <= {exact_max} (exact rationals)"),
                float_ok && exact_ok,
            )
            .note(format!("sup attained at {var} = {}", worst.1))
        })
        .collect()
}

// ---------------------------------------------------------------- Lemma 2

fn pascal(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigUint::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Σ_{λ1+λ2=λ, λ1≤l1, λ2≤l2} λ!/(λ1!λ2!), exact.
fn multinomial_sum(binom: &[Vec<BigUint>], l1: usize, l2: usize, lambda: usize) -> BigUint {
    let mut acc = BigUint::zero();
    for a in 0..=lambda.min(l1) {
        if lambda - a <= l2 {
            acc += &binom[lambda][a];
        }
    }
    acc
}

#[derive(Clone, Copy, PartialEq)]
enum Split {
    Any,
    BothAtLeastTwo,
    FirstIsTwo,
    FirstIsOne,
}

impl Split {
    fn admits(self, n1: usize, n2: usize) -> bool {
        match self {
            Split::Any => true,
            Split::BothAtLeastTwo => n1 >= 2 && n2 >= 2,
            Split::FirstIsTwo => n1 == 2,
            Split::FirstIsOne => n1 == 1,
        }
    }
}

/// (l+1)² n² times the quadruple sum of Lemma 2, for each λ ≤ l, exactly.
///
/// The factorial ratio reduces to C(n+1, n1)/((n+1) C(n+l−1, n1+l1−1)); only
/// the λ-sum depends on λ, so the n1-sum is done once per l1.
fn lemma2_sums(binom: &[Vec<BigUint>], n: usize, l: usize, split: Split) -> Vec<BigRational> {
    let big = |u: &BigUint| BigInt::from(u.clone());
    let weights: Vec<BigRational> = (0..=l)
        .map(|l1| {
            let l2 = l - l1;
            let mut w = BigRational::zero();
            for n1 in 1..=n {
                let n2 = n + 1 - n1;
                if !split.admits(n1, n2) {
                    continue;
                }
                let den = BigInt::from(((n + 1) * (l1 + 1).pow(2) * (l2 + 1).pow(2) * n1 * n1 * n2 * n2) as u64)
                    * big(&binom[n + l - 1][n1 + l1 - 1]);
                w += BigRational::new(big(&binom[n + 1][n1]), den);
            }
            w
        })
        .collect();
    let scale = BigRational::from_integer(BigInt::from(((l + 1) * (l + 1) * n * n) as u64));
    (0..=l)
        .map(|lambda| {
            let mut acc = BigRational::zero();
            for (l1, w) in weights.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let s = multinomial_sum(binom, l1, l - l1, lambda);
                if !s.is_zero() {
                    acc += w * BigRational::from_integer(BigInt::from(s));
                }
            }
            acc * &scale
        })
        .collect()
}

/// Lemma 2: the four weighted sums in exact rationals for n, l ≤ `exact_max`
/// and all λ ≤ l, plus the two inner integer inequalities for n + l ≤
/// `inner_max`.
pub fn verify_lemma2(exact_max: usize, inner_max: usize, c: &Constants) -> Vec<CertReport> {
    let binom = pascal(exact_max.max(2) * 2 + 2).into_iter().collect::<Vec<_>>();
    let variants = [
        ("lemma2.a", Split::Any, 3, c.k0),
        ("lemma2.a2", Split::BothAtLeastTwo, 3, c.k0 / 2.0),
        ("lemma2.b", Split::FirstIsTwo, 3, c.k0_prime),
        ("lemma2.c", Split::FirstIsOne, 2, c.k0_second),
    ];
    let mut out: Vec<CertReport> = variants
        .par_iter()
        .map(|&(id, split, n_min, claimed)| {
            let bound = exact(claimed);
            let rows: Vec<(bool, f64, usize, usize, usize)> = (n_min..=exact_max.max(n_min))
                .into_par_iter()
                .flat_map_iter(|n| {
                    let binom = &binom;
                    let bound = &bound;
                    (0..=exact_max).map(move |l| {
                        let sums = lemma2_sums(binom, n, l, split);
                        let mut ok = true;
                        let mut worst = (0.0, 0);
                        for (lambda, v) in sums.iter().enumerate() {
                            ok &= v <= bound;
                            let f = ratio(v);
                            if f > worst.0 {
                                worst = (f, lambda);
                            }
                        }
                        (ok, worst.0, n, l, worst.1)
                    })
                })
                .collect();
            let pass = rows.iter().all(|r| r.0);
            let worst = rows.iter().fold((0.0, 0, 0, 0), |w, r| if r.1 > w.0 { (r.1, r.2, r.3, r.4) } else { w });
            CertReport::new(
                id,
                claimed,
                worst.0,
                format!("{n_min} <= n <= {exact_max}, 0 <= lambda <= l <= {exact_max}, exact rationals"),
                pass,
            )
            .note(format!("sup of (l+1)^2 n^2 * sum at n = {}, l = {}, lambda = {}", worst.1, worst.2, worst.3))
        })
        .collect();
    out.push(verify_binomial_domination(inner_max));
    out.push(verify_multinomial_domination(inner_max));
    out
}

/// C(n−1, n1−1)·C(l, l1) ≤ C(n+l−1, n1+l1−1) for all n ≥ 1, l ≥ 0, n + l ≤ `max`.
pub fn verify_binomial_domination(max: usize) -> CertReport {
    let binom = pascal(max);
    let results: Vec<(bool, f64)> = (1..=max)
        .into_par_iter()
        .map(|n| {
            let mut ok = true;
            let mut worst = 0.0f64;
            for l in 0..=(max - n) {
                for n1 in 1..=n {
                    for l1 in 0..=l {
                        let lhs = &binom[n - 1][n1 - 1] * &binom[l][l1];
                        let rhs = &binom[n + l - 1][n1 + l1 - 1];
                        ok &= &lhs <= rhs;
                        let r = lhs.to_f64().unwrap_or(f64::INFINITY) / rhs.to_f64().unwrap_or(f64::INFINITY);
                        worst = worst.max(r);
                    }
                }
            }
            (ok, worst)
        })
        .collect();
    let pass = results.iter().all(|r| r.0);
    let worst = results.iter().fold(0.0f64, |a, r| a.max(r.1));
    CertReport::new("lemma2.binomial", 1.0, worst, format!("n + l <= {max}, exact big integers; computed = max lhs/rhs"), pass)
}

/// Σ_{λ1+λ2=λ} λ!/(λ1!λ2!) ≤ C(l, l1) for l ≤ `max`, in u128.
pub fn verify_multinomial_domination(max: usize) -> CertReport {
    let max = max.min(125);
    let mut binom = vec![vec![0u128; max + 1]; max + 1];
    for i in 0..=max {
        binom[i][0] = 1;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + if j < i { binom[i - 1][j] } else { 0 };
        }
    }
    let results: Vec<(bool, f64)> = (0..=max)
        .into_par_iter()
        .map(|l| {
            let mut ok = true;
            let mut worst = 0.0f64;
            for l1 in 0..=l {
                let l2 = l - l1;
                for lambda in 0..=l {
                    let s: u128 = (0..=lambda.min(l1)).filter(|&a| lambda - a <= l2).map(|a| binom[lambda][a]).sum();
                    ok &= s <= binom[l][l1];
                    worst = worst.max(s as f64 / binom[l][l1] as f64);
                }
            }
            (ok, worst)
        })
        .collect();
    let pass = results.iter().all(|r| r.0);
    let worst = results.iter().fold(0.0f64, |a, r| a.max(r.1));
    CertReport::new("lemma2.multinomial", 1.0, worst, format!("l <= {max}, all l1, lambda, exact u128; computed = max lhs/rhs"), pass)
}

// ---------------------------------------------------------------- Lemma 3

/// sup over collinear a of sup(1,|a|)/sup(1,|x+a|), on a dense grid in a.
fn collinear_factor(x: f64, half_width: f64, points: usize) -> f64 {
    let mut best = 1.0f64;
    for j in 0..points {
        let a = -x - half_width + 2.0 * half_width * j as f64 / (points - 1) as f64;
        best = best.max(a.abs().max(1.0) / (x + a).abs().max(1.0));
    }
    best
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gaussian4(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 4] {
    let mut v = [0.0; 4];
    for x in v.iter_mut() {
        *x = scale * rng.sample::<f64, _>(StandardNormal);
    }
    v
}

/// Lemma 3: sup over x, a_i of e^{−x²/2} Π sup(1,|a_i|)/sup(1,|x+a_i|) for
/// v ≤ 3. Stage one scans collinear configurations on dense grids in |x|
/// and a; stage two samples random 4D configurations as a falsification
/// sweep.
pub fn verify_lemma3(samples: usize, seed: u64, c: &Constants) -> Vec<CertReport> {
    const X_POINTS: usize = 2001;
    const A_POINTS: usize = 2001;
    let xs: Vec<f64> = (0..X_POINTS).map(|i| 6.0 * i as f64 / (X_POINTS - 1) as f64).collect();
    let factors: Vec<f64> = xs.par_iter().map(|&x| collinear_factor(x, 12.0, A_POINTS)).collect();
    (0..=3usize)
        .into_par_iter()
        .map(|v| {
            let mut grid = (0.0f64, 0.0f64);
            for (&x, &f) in xs.iter().zip(&factors) {
                let r = (-0.5 * x * x).exp() * f.powi(v as i32);
                if r > grid.0 {
                    grid = (r, x);
                }
            }
            let closed = maximize_1d(|x| (-0.5 * x * x).exp() * (1.0 + x).powi(v as i32), 0.0, 10.0, 10_000);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x3_0000 + v as u64));
            let mut random = 0.0f64;
            for _ in 0..samples {
                let sx = rng.gen_range(0.2..3.0);
                let x = gaussian4(&mut rng, sx);
                let nx = norm4(&x).max(1e-300);
                let mut r = (-0.5 * nx * nx).exp();
                for _ in 0..v {
                    // Mostly a_i = −x + u, the region where the ratio is largest;
                    // u is aligned with x half of the time.
                    let su = 10f64.powf(rng.gen_range(-1.0..1.0));
                    let mut u = gaussian4(&mut rng, su);
                    if rng.gen_bool(0.5) {
                        let t = su * if rng.gen_bool(0.5) { 1.0 } else { -1.0 } / nx;
                        u.iter_mut().zip(&x).for_each(|(uk, xk)| *uk = 0.05 * *uk + t * xk);
                    }
                    let a: [f64; 4] = if rng.gen_bool(0.9) { std::array::from_fn(|k| -x[k] + u[k]) } else { u };
                    let xa: [f64; 4] = std::array::from_fn(|k| x[k] + a[k]);
                    r *= norm4(&a).max(1.0) / norm4(&xa).max(1.0);
                }
                random = random.max(r);
            }
            let computed = grid.0.max(closed.value);
            let claimed = c.c[v];
            let pass = computed <= claimed && random <= claimed;
            CertReport::new(
                format!("lemma3.v{v}"),
                claimed,
                computed,
                format!("collinear |x| <= 6 x a grid {X_POINTS}x{A_POINTS}; {samples} random 4D configurations"),
                pass,
            )
            .note(format!(
                "collinear sup at |x| = {:.4}; closed form sup e^(-x^2/2)(1+x)^{v} = {:.6}; random sweep max = {:.6}",
                grid.1, closed.value, random
            ))
        })
        .collect()
}

// ---------------------------------------------------------------- Lemma 4

/// ∫_x e^{−|x|²/2} log^r(|x| + a) with ∫_x = (2π)^{−4} ∫d⁴x, reduced to
/// (8π²)^{−1} ∫ρ³ e^{−ρ²/2} log^r(ρ + a) dρ.
pub fn lemma4_lhs(r: u32, a: f64) -> Result<f64> {
    let f = |rho: f64| {
        if rho + a <= 0.0 || rho == 0.0 {
            return 0.0;
        }
        rho.powi(3) * (-0.5 * rho * rho).exp() * (rho + a).ln().powi(r as i32)
    };
    let mut total = 0.0;
    let mut scale = 0.0f64;
    // Where ρ + a < 1 the log is negative; ρ = e^{−u} resolves the peak near 0.
    let split = (1.0 - a).max(0.0);
    if split > 0.0 {
        let inner = integrate_to_infinity(
            |u| {
                let rho = split * (-u).exp();
                f(rho) * rho
            },
            0.0,
            1e-11,
            0.0,
        )?;
        total += inner.value;
        scale = scale.max(inner.value.abs());
    }
    let outer = integrate_to_infinity(|t| f(split + t), 0.0, 1e-11, 0.0)?;
    total += outer.value;
    scale = scale.max(outer.value.abs());
    if !(total.is_finite() && scale.is_finite()) {
        return Err(Error::NonConvergence(format!("Lemma 4 integral at r = {r}, a = {a}")));
    }
    Ok(total / (8.0 * PI * PI))
}

fn ln_factorial(r: u32) -> f64 {
    (1..=r).map(|k| (k as f64).ln()).sum()
}

/// ¼ log₊^r a + ⅓ (r!)^{1/2}.
pub fn lemma4_rhs(r: u32, a: f64) -> f64 {
    0.25 * a.max(1.0).ln().powi(r as i32) + (0.5 * ln_factorial(r)).exp() / 3.0
}

/// Lemma 4 over r = 1..=r_max and a ∈ {0} ∪ log grid [1e-3, 1e4]; also the
/// auxiliary sup of log^r r/(r!)^{1/2} and the momentum-integral constant K₃.
pub fn verify_lemma4(r_max: u32, a_points: usize, c: &Constants) -> Result<Vec<CertReport>> {
    let mut grid = vec![0.0];
    let a_points = a_points.max(2);
    grid.extend((0..a_points).map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / (a_points - 1) as f64)));
    let cells: Vec<(u32, f64)> = (1..=r_max).flat_map(|r| grid.iter().map(move |&a| (r, a))).collect();
    let ratios: Vec<Result<(f64, u32, f64)>> =
        cells.par_iter().map(|&(r, a)| Ok((lemma4_lhs(r, a)? / lemma4_rhs(r, a), r, a))).collect();
    let mut worst = (f64::NEG_INFINITY, 0, 0.0);
    for x in ratios {
        let x = x?;
        if x.0 > worst.0 {
            worst = x;
        }
    }
    let main = CertReport::new(
        "lemma4.integral",
        1.0,
        worst.0,
        format!("1 <= r <= {r_max}, a in {{0}} U logspace(1e-3, 1e4, {a_points}); computed = max lhs/rhs"),
        worst.0 <= 1.0,
    )
    .note(format!("max at r = {}, a = {:.4e}", worst.1, worst.2))
    .note(if worst.0 >= 0.1 { "bound is tight within a factor 10 on the sweep" } else { "bound is loose by more than a factor 10 everywhere" });

    let mut lf = (0.0f64, 0u32);
    for r in 1..=r_max.max(20) {
        let v = (r as f64 * (r as f64).ln().ln() - 0.5 * ln_factorial(r)).exp();
        if (r as f64).ln() > 0.0 && v > lf.0 {
            lf = (v, r);
        }
    }
    let logfac = CertReport::new(
        "lemma4.log-factorial",
        2.75,
        lf.0,
        format!("2 <= r <= {}", r_max.max(20)),
        lf.0 <= 2.75,
    )
    .note(format!("max of log^r r / (r!)^(1/2) at r = {}", lf.1));

    let gauss = lemma4_lhs(0, 1.0)?;
    let k3 = gauss + 0.25;
    let k3_report = CertReport::new("lemma4.K3", c.k3, k3, "1/(4 pi^2) + 1/4 from the Gaussian normalization", k3 <= c.k3)
        .note(format!("Gaussian integral = {gauss:.12}, 1/(4 pi^2) = {:.12}", 0.25 / (PI * PI)));
    Ok(vec![main, logfac, k3_report])
}

// ---------------------------------------------------------------- Lemma 5

/// ∫_κ^M dκ' κ'^{−s−1} log^λ(sup(a/κ', κ'/m)) for λ = 0..=l_max, integrated in
/// ln κ' with the split at √(a m) where the two logs cross.
fn lemma5_integrals(s: i32, a: f64, kappa: f64, big_m: f64, m: f64, l_max: usize) -> Result<Vec<f64>> {
    let (t0, t1) = (kappa.ln(), big_m.ln());
    let tc = 0.5 * (a * m).ln();
    let mut cuts = vec![t0];
    if tc > t0 && tc < t1 {
        cuts.push(tc);
    }
    cuts.push(t1);
    (0..=l_max)
        .map(|lambda| {
            let mut acc = 0.0;
            for w in cuts.windows(2) {
                acc += integrate(
                    |t| {
                        let lg = (a.ln() - t).max(t - m.ln());
                        (-(s as f64) * t).exp() * lg.powi(lambda as i32)
                    },
                    w[0],
                    w[1],
                    1e-11,
                    0.0,
                )?
                .value;
            }
            Ok(acc)
        })
        .collect()
}

fn inv_double_factorial_weights(l_max: usize) -> Vec<f64> {
    let mut w = vec![1.0; l_max + 1];
    for k in 1..=l_max {
        w[k] = w[k - 1] / (2.0 * k as f64);
    }
    w
}

/// Lemma 5 on s = 1..=6, a/m ∈ [1e-2, 1e4], κ/m ∈ [1, 1e3], M/κ ∈
/// {1.5, 10, 1e3, 1e6}, every l ≤ `l_max`. `computed` is the sup of LHS
/// divided by κ^{−s}/s Σ(…), against the claimed factor 3.
pub fn verify_lemma5(l_max: usize) -> Result<Vec<CertReport>> {
    let m = 1.0;
    let weights = inv_double_factorial_weights(l_max);
    let mut cells = Vec::new();
    for s in 1..=6 {
        for i in 0..13 {
            let a = 10f64.powf(-2.0 + 0.5 * i as f64);
            for j in 0..10 {
                let kappa = 10f64.powf(j as f64 / 3.0);
                for &mk in &[1.5, 10.0, 1e3, 1e6] {
                    cells.push((s, a, kappa, kappa * mk));
                }
            }
        }
    }
    let results: Vec<Result<(f64, i32, f64, f64, f64, usize)>> = cells
        .par_iter()
        .map(|&(s, a, kappa, big_m)| {
            let ints = lemma5_integrals(s, a, kappa, big_m, m, l_max)?;
            let lg = (a / kappa).max(kappa / m).ln();
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            let mut worst = (0.0f64, 0usize);
            for lambda in 0..=l_max {
                lhs += weights[lambda] * ints[lambda];
                rhs += weights[lambda] * lg.powi(lambda as i32);
                let r = lhs / (kappa.powi(-s) / s as f64 * rhs);
                if r > worst.0 {
                    worst = (r, lambda);
                }
            }
            Ok((worst.0, s, a, kappa, big_m, worst.1))
        })
        .collect();
    let mut worst = (0.0, 0, 0.0, 0.0, 0.0, 0);
    for r in results {
        let r = r?;
        if r.0 > worst.0 {
            worst = r;
        }
    }
    Ok(vec![CertReport::new(
        "lemma5",
        3.0,
        worst.0,
        format!("s <= 6, a/m in [1e-2, 1e4], kappa/m in [1, 1e3], M/kappa in {{1.5, 10, 1e3, 1e6}}, l <= {l_max}"),
        worst.0 <= 3.0,
    )
    .note(format!(
        "sup at s = {}, a = {:.3e}, kappa = {:.3e}, M = {:.3e}, l = {}",
        worst.1, worst.2, worst.3, worst.4, worst.5
    ))])
}

// ---------------------------------------------------------------- Lemma 6

/// sup_{y ≥ 0} (1+y)^s e^{−y²}.
pub fn y_sup(s: i32) -> f64 {
    maximize_1d(|y| (1.0 + y).powi(s) * (-y * y).exp(), 0.0, 10.0, 10_000).value
}

fn x_sup<F: Fn(f64) -> f64>(f: F) -> f64 {
    maximize_1d(|x| f(x).abs(), 0.0, 20.0, 10_000).value
}

/// The two branch constants of the derivative bound in the proof: the
/// |p|^{−|w|} branch and the κ^{−|w|} branch. `width` is 2 for the
/// half-width regulator e^{−p²/2Λ²} and 1 for e^{−p²/Λ²}.
pub fn lemma6_proof_branches(order: usize, width: f64) -> (f64, f64) {
    let e = move |x: f64| (-x * x / width).exp();
    let y3 = y_sup(3);
    match order {
        1 => (4.0 * x_sup(|x| x * x * e(x)) * y3, 4.0 * x_sup(|x| x * e(x)) * y_sup(4)),
        2 => (
            16.0 * x_sup(|x| (x.powi(4) - 0.5 * x * x) * e(x)) * y3,
            16.0 * x_sup(|x| (x * x - 0.5) * e(x)) * y_sup(5),
        ),
        3 => (
            16.0 * x_sup(|x| (-x.powi(6) + 1.5 * x.powi(4)) * e(x)) * y3,
            16.0 * x_sup(|x| (-x.powi(3) + 1.5 * x) * e(x)) * y_sup(6),
        ),
        _ => (2.0 * y3, 2.0 * y3),
    }
}

fn hermite(k: u8, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0 * t,
        2 => 4.0 * t * t - 2.0,
        _ => 8.0 * t * t * t - 12.0 * t,
    }
}

/// κ³ sup(κ,|p|)^{|w|} |∂^w (2/Λ³) e^{−p²/(width·Λ²)} e^{−m²/Λ²}| in the
/// variables y = m/Λ and t_i = p_i/(Λ√width).
fn regulator_derivative_scaled(w: &[u8], width: f64, y: f64, t: &[f64]) -> f64 {
    let order: u8 = w.iter().sum();
    let tn = t.iter().map(|x| x * x).sum::<f64>();
    let herm: f64 = w.iter().zip(t).map(|(&k, &ti)| hermite(k, ti)).product();
    let sw = width.sqrt();
    2.0 * (1.0 + y).powi(3) * (-y * y).exp() * herm.abs() * (-tn).exp() * ((1.0 + y).max(sw * tn.sqrt()) / sw).powi(order as i32)
}

/// Sup of the regulator-derivative bound taken directly from the function:
/// a refined 2D scan for single-axis derivatives and a seeded random search
/// over the mixed multi-index shapes with the same |w|.
pub fn lemma6_direct_sup(order: u8, width: f64, seed: u64) -> (f64, Option<f64>) {
    let axis = maximize_2d(|y, t| regulator_derivative_scaled(&[order], width, y, &[t]), (0.0, 8.0), (0.0, 12.0), 400).value;
    let shapes: &[&[u8]] = match order {
        2 => &[&[1, 1]],
        3 => &[&[2, 1], &[1, 1, 1]],
        _ => &[],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x6_0000 + order as u64 * 16 + width as u64));
    let mut mixed = 0.0f64;
    for shape in shapes {
        for _ in 0..100_000 {
            let y = rng.gen_range(0.0..4.0);
            let t: [f64; 4] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
            let mut w = [0u8; 4];
            w[..shape.len()].copy_from_slice(shape);
            mixed = mixed.max(regulator_derivative_scaled(&w, width, y, &t));
        }
    }
    (axis, (!shapes.is_empty()).then_some(mixed))
}

/// Lemma 6: K₂, the momentum factors of a) and c), and the derivative
/// constants of b). Each constant is recomputed from the sup expressions of
/// the proof and must lie in [0.9, 1]·claimed. For b), the constant implied
/// by inf{A/|p|^{|w|}, B/κ^{|w|}} is max(A, B); the direct sup of the
/// inequality itself must also stay below the claim.
pub fn verify_lemma6_constants(seed: u64, c: &Constants) -> Vec<CertReport> {
    let k2 = 2.0 * y_sup(3);
    let x7 = (7f64.sqrt() - 1.0) / 2.0;
    let mut out = vec![
        drift_report("lemma6.K2", c.k2, k2, "2 sup_{x>=0} (1+x)^3 e^{-x^2}")
            .note(format!("closed form at x = (sqrt7-1)/2: {:.10}", 2.0 * (1.0 + x7).powi(3) * (-x7 * x7).exp())),
    ];
    let tol = 1.0 + 1e-12;
    let trivial = |id: &str, claimed: f64, computed: f64, domain: &str| {
        CertReport::new(id, claimed, computed, domain, computed <= claimed * tol)
    };
    out.push(trivial("lemma6.p2", 2.0 / E, x_sup(|x| x * x * (-0.5 * x * x).exp()), "sup x^2 e^{-x^2/2}"));
    out.push(trivial("lemma6.p1", E.powf(-0.5), x_sup(|x| x * (-0.5 * x * x).exp()), "sup x e^{-x^2/2}"));
    out.push(trivial("lemma6.p3", (3.0 / E).powf(1.5), x_sup(|x| x.powi(3) * (-0.5 * x * x).exp()), "sup x^3 e^{-x^2/2}"));
    for (primed, width, claims) in [(false, 1.0, c.kw), (true, 2.0, c.kw_prime)] {
        let tag = if primed { "'" } else { "" };
        let (direct, _) = lemma6_direct_sup(0, width, seed);
        out.push(
            CertReport::new(
                format!("lemma6.Kw0{tag}"),
                claims[0],
                k2,
                "|w| = 0 reduces to K2",
                within_drift(k2, claims[0]) && direct <= claims[0] * tol,
            )
            .note(format!("direct sup = {direct:.6}")),
        );
        for order in 1..=3usize {
            let (a, b) = lemma6_proof_branches(order, width);
            let computed = a.max(b);
            let (axis, mixed) = lemma6_direct_sup(order as u8, width, seed);
            let direct = axis.max(mixed.unwrap_or(0.0));
            let claimed = claims[order];
            let pass = within_drift(computed, claimed) && direct <= claimed;
            out.push(
                CertReport::new(
                    format!("lemma6.Kw{order}{tag}"),
                    claimed,
                    computed,
                    "max of the |p| and kappa branch sups; direct sup over Lambda, p and derivative shape",
                    pass,
                )
                .note(format!("|p| branch = {a:.6}, kappa branch = {b:.6}, computed/claimed = {:.4}", computed / claimed))
                .note(match mixed {
                    Some(mx) => format!("direct sup: single axis = {axis:.6}, mixed shapes (random) = {mx:.6}"),
                    None => format!("direct sup: single axis = {axis:.6}"),
                }),
            );
        }
    }
    out
}

// ---------------------------------------------------------------- Lemma 7

/// ∫_0^Λ dΛ' Λ'^{−s} e^{−m²/Λ'²} κ'^{s−1} log^λ(κ'/m) with κ = Λ + m, in the
/// variable u = ln(κ'/m).
pub fn lemma7_lhs(s: i32, lambda: usize, kappa_over_m: f64) -> Result<f64> {
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let em1 = u.exp_m1();
        let y = 1.0 / em1;
        let log = s as f64 * (1.0 + y).ln() - y * y;
        if log < -745.0 {
            0.0
        } else {
            log.exp() * u.powi(lambda as i32)
        }
    };
    Ok(integrate(f, 0.0, kappa_over_m.ln(), 1e-11, 1e-300)?.value)
}

/// Lemma 7: K₁ and K₁' as sups of (1+y)^s e^{−y²}, and the integral bounds
/// on λ ≤ `l_max`, κ/m ∈ logspace(1.001, 1e6).
pub fn verify_lemma7(l_max: usize, c: &Constants) -> Result<Vec<CertReport>> {
    let mut out = Vec::new();
    for (id, s, claimed) in [("lemma7.K1", 3, c.k1), ("lemma7.K1'", 5, c.k1_prime)] {
        out.push(drift_report(id, claimed, y_sup(s), &format!("sup_(y>=0) (1+y)^{s} e^(-y^2)")));
    }
    let kappas: Vec<f64> = (0..40).map(|i| 1.001f64 * (1e6f64 / 1.001).powf(i as f64 / 39.0)).collect();
    for (id, s, claimed) in [("lemma7.a-integral", 3, c.k1), ("lemma7.b-integral", 5, c.k1_prime)] {
        let cells: Vec<(usize, f64)> = (0..=l_max).flat_map(|l| kappas.iter().map(move |&k| (l, k))).collect();
        let ratios: Vec<Result<(f64, usize, f64)>> = cells
            .par_iter()
            .map(|&(lambda, k)| {
                let lhs = lemma7_lhs(s, lambda, k)?;
                let lg = k.ln();
                Ok((lhs * (lambda + 1) as f64 / lg.powi(lambda as i32 + 1), lambda, k))
            })
            .collect();
        let mut worst = (0.0, 0, 0.0);
        for r in ratios {
            let r = r?;
            if r.0 > worst.0 {
                worst = r;
            }
        }
        out.push(
            CertReport::new(
                id,
                claimed,
                worst.0,
                format!("lambda <= {l_max}, kappa/m in logspace(1.001, 1e6, 40); computed = max lhs (lambda+1)/log^(lambda+1)"),
                worst.0 <= claimed,
            )
            .note(format!("max at lambda = {}, kappa/m = {:.4e}", worst.1, worst.2)),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------- Lemma 8

/// Lemma 8 on seeded random draws in d = 4: whenever |x+y| ≥ |x|, checks
/// |λx+y| ≥ λ|x| and each link of the triangle-inequality chain.
pub fn verify_lemma8(samples: usize, seed: u64) -> Vec<CertReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x8_0000);
    let mut hypothesis = 0usize;
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for i in 0..samples {
        let x = gaussian4(&mut rng, 1.0);
        let sy = 10f64.powf(rng.gen_range(-1.0..1.0));
        let mut y = gaussian4(&mut rng, sy);
        // Every other draw is steered towards the boundary |x+y| = |x|.
        if i % 2 == 1 {
            let t = norm4(&x) / norm4(&y).max(1e-300);
            y.iter_mut().for_each(|v| *v *= t * rng.gen_range(1.0..1.1));
            let flip = rng.gen_range(0.0..1.0);
            for (yk, xk) in y.iter_mut().zip(&x) {
                *yk -= flip * xk;
            }
        }
        let lambda: f64 = match i % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..=1.0),
        };
        let xy: [f64; 4] = std::array::from_fn(|k| x[k] + y[k]);
        if norm4(&xy) < norm4(&x) {
            continue;
        }
        hypothesis += 1;
        let lxy: [f64; 4] = std::array::from_fn(|k| lambda * x[k] + y[k]);
        let (nx, nxy, nlxy) = (norm4(&x), norm4(&xy), norm4(&lxy));
        let slack = 1e-12 * (nx + nxy + 1.0);
        let chain1 = nlxy >= nxy - (1.0 - lambda) * nx - slack;
        let chain2 = nxy - (1.0 - lambda) * nx >= lambda * nx - slack;
        ok &= chain1 && chain2 && nlxy >= lambda * nx - slack;
        worst = worst.min((nlxy - lambda * nx) / (nx + 1e-300));
    }
    vec![CertReport::new(
        "lemma8",
        0.0,
        worst,
        format!("{samples} seeded samples in R^4, {hypothesis} satisfy the hypothesis; computed = min (|lx+y| - l|x|)/|x|"),
        ok && hypothesis > 0,
    )
    .with_margin(worst)]
}
