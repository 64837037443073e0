//! Right-hand side of the flow equation: the loop term and the bilinear term.

use crate::error::{Error, Result};
use crate::interp::cubic_stencil;
use crate::model::{propagator, propagator_lambda_derivative, FlowScales, FourMomentum, MomentumConfig};
use crate::quadrature::LoopQuadrature;
use crate::tree::{binomial, unit_tree};

/// Loop integrals of ∂_Λ C against a second propagator.
pub trait ShiftKernel: Sync {
    /// G(Λ) = ∫_k ∂_Λ C(k).
    fn g(&self, lambda: f64) -> f64;
    /// F(P, Λ) = ∫_k ∂_Λ C(k) C(k + P).
    fn f(&self, p: f64, lambda: f64) -> Result<f64>;
}

/// Direct quadrature of the kernels.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    pub quad: LoopQuadrature,
    pub m: f64,
    pub lambda0: f64,
    /// The rule applied to e^{−k²} at Λ = 1; it scales as Λ⁴ since the cutoff scales with Λ.
    gauss_moment: f64,
}

impl ExactKernel {
    pub fn new(quad: LoopQuadrature, m: f64, lambda0: f64) -> Self {
        let gauss_moment = quad.integrate_radial(1.0, |k| (-k * k).exp());
        ExactKernel { quad, m, lambda0, gauss_moment }
    }

    fn scales(&self, lambda: f64) -> FlowScales {
        FlowScales { lambda, lambda0: self.lambda0, m: self.m }
    }

    /// F(P, Λ) e^{m²/Λ²}, finite where F itself underflows.
    pub fn f_scaled(&self, p: f64, lambda: f64) -> f64 {
        let s = self.scales(lambda);
        let inv = 1.0 / (lambda * lambda);
        let pref = -2.0 * inv / lambda;
        self.quad.integrate(lambda, |k, c| {
            let q2 = (k * k + p * p + 2.0 * k * p * c).max(0.0);
            pref * (-k * k * inv).exp() * propagator(q2, &s)
        })
    }
}

impl ShiftKernel for ExactKernel {
    fn g(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        -2.0 * lambda * (-(self.m * self.m) / (lambda * lambda)).exp() * self.gauss_moment
    }

    fn f(&self, p: f64, lambda: f64) -> Result<f64> {
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        Ok((-(self.m * self.m) / (lambda * lambda)).exp() * self.f_scaled(p, lambda))
    }
}

/// F tabulated on a (log(1 + P/m), log Λ) grid with bicubic Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    exact: ExactKernel,
    u_axis: Vec<f64>,
    t_axis: Vec<f64>,
    /// F e^{m²/Λ²} at [t][u].
    scaled: Vec<f64>,
}

impl TabulatedKernel {
    pub fn build(exact: ExactKernel, p_max: f64, p_points: usize, lambda_min: f64, per_decade: usize) -> Self {
        let m = exact.m;
        let u_max = (1.0 + p_max / m).ln();
        let u_axis: Vec<f64> = (0..p_points).map(|i| u_max * i as f64 / (p_points - 1) as f64).collect();
        let (t0, t1) = (lambda_min.ln(), exact.lambda0.ln());
        let nt = ((t1 - t0) / std::f64::consts::LN_10 * per_decade as f64).ceil() as usize + 1;
        let t_axis: Vec<f64> = (0..nt).map(|j| t0 + (t1 - t0) * j as f64 / (nt - 1) as f64).collect();
        let mut scaled = Vec::with_capacity(nt * p_points);
        for &t in &t_axis {
            let lambda = t.exp().min(exact.lambda0);
            for &u in &u_axis {
                scaled.push(exact.f_scaled(m * u.exp_m1(), lambda));
            }
        }
        TabulatedKernel { exact, u_axis, t_axis, scaled }
    }

    pub fn nodes(&self) -> usize {
        self.scaled.len()
    }
}

impl ShiftKernel for TabulatedKernel {
    fn g(&self, lambda: f64) -> f64 {
        self.exact.g(lambda)
    }

    fn f(&self, p: f64, lambda: f64) -> Result<f64> {
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        let t = lambda.ln();
        let m = self.exact.m;
        if t < self.t_axis[0] {
            // Below the table the factor e^{−m²/Λ²} is zero in double precision.
            let damp = (-(m * m) / (lambda * lambda)).exp();
            if damp == 0.0 {
                return Ok(0.0);
            }
            return Err(Error::Range(format!("Λ = {lambda} below the kernel table")));
        }
        let u = (1.0 + p / m).ln();
        let (iu, wu, ku) = cubic_stencil(&self.u_axis, u)?;
        let (it, wt, kt) = cubic_stencil(&self.t_axis, t)?;
        let nu = self.u_axis.len();
        let mut acc = 0.0;
        for a in 0..kt {
            let row = it[a] * nu;
            let mut inner = 0.0;
            for b in 0..ku {
                inner += wu[b] * self.scaled[row + iu[b]];
            }
            acc += wt[a] * inner;
        }
        Ok((-(m * m) / (lambda * lambda)).exp() * acc)
    }
}

#[derive(Debug, Clone)]
struct PlanTerm {
    coef: f64,
    /// |Q| of the single loop-momentum dependent line, if any.
    shift: Option<f64>,
    /// p² of the loop-independent lines.
    fixed: Vec<f64>,
}

/// Loop term with a tree-level lower amplitude, reduced to kernel evaluations.
#[derive(Debug, Clone)]
pub struct LoopPlan {
    terms: Vec<PlanTerm>,
}

impl LoopPlan {
    /// Plan for (2n+2 choose 2) ∫_k ∂_Λ C(k) L_{2n+2,0}(k, −k, p_1, …, p_2n).
    pub fn for_tree(cfg: &MomentumConfig, g: f64) -> Result<Self> {
        let n = cfg.n();
        let poly = unit_tree(n + 1)?;
        let legs = 2 * n + 2;
        let mult = binomial(legs, 2) * g.powi(n as i32);
        let ext = cfg.momenta();
        let mut terms = Vec::with_capacity(poly.terms().len());
        for (masks, c) in poly.terms() {
            let mut shift = None;
            let mut fixed = Vec::new();
            for &mask in masks {
                let q = (2..legs)
                    .filter(|&leg| mask & (1 << leg) != 0)
                    .fold(FourMomentum::ZERO, |acc, leg| acc + ext[leg - 2]);
                let with_k = (mask & 1 != 0) != (mask & 2 != 0);
                if with_k {
                    if shift.is_some() {
                        return Err(Error::Unsupported(
                            "loop term with two loop-momentum dependent tree lines".into(),
                        ));
                    }
                    shift = Some(q.norm());
                } else {
                    fixed.push(q.norm_sq());
                }
            }
            terms.push(PlanTerm { coef: c * mult, shift, fixed });
        }
        Ok(LoopPlan { terms })
    }

    pub fn eval<K: ShiftKernel + ?Sized>(&self, lambda: f64, scales: &FlowScales, kernel: &K) -> Result<f64> {
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        let s = scales.with_lambda(lambda);
        let mut g_cache: Option<f64> = None;
        let mut f_cache: Vec<(f64, f64)> = Vec::new();
        let mut total = 0.0;
        for term in &self.terms {
            let mut v = term.coef;
            for &p2 in &term.fixed {
                v *= propagator(p2, &s);
            }
            if v == 0.0 {
                continue;
            }
            v *= match term.shift {
                None => *g_cache.get_or_insert_with(|| kernel.g(lambda)),
                Some(q) => match f_cache.iter().find(|(x, _)| *x == q) {
                    Some(&(_, f)) => f,
                    None => {
                        let f = kernel.f(q, lambda)?;
                        f_cache.push((q, f));
                        f
                    }
                },
            };
            total += v;
        }
        Ok(total)
    }
}

/// Loop term with an interpolated lower amplitude of the two-point kinematics:
/// (2n+2 choose 2) ∫_k ∂_Λ C(k) L(|k|, cos θ) for n = 1.
pub fn loop_term_axial<L>(quad: &LoopQuadrature, scales: &FlowScales, lambda: f64, mut lower: L) -> Result<f64>
where
    L: FnMut(f64, f64) -> Result<f64>,
{
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    let s = scales.with_lambda(lambda);
    let inv = 1.0 / (lambda * lambda);
    let pref = -2.0 * inv / lambda * (-(s.m * s.m) * inv).exp();
    if pref == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let v = quad.integrate(lambda, |k, c| {
        let d = pref * (-k * k * inv).exp();
        if d == 0.0 {
            return 0.0;
        }
        match lower(k, c) {
            Ok(x) => d * x,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(binomial(4, 2) * v),
    }
}

/// Bilinear term −Σ 2 n1 n2 mean_S L_{2n1,l1}(p_S, q) ∂_Λ C(q) L_{2n2,l2}(p_{S^c}, −q),
/// q = −Σ_{i∈S} p_i. `lower(l1, sub)` supplies lower-order amplitudes at this Λ.
/// With `top_only`, only products containing an order-l factor are kept.
pub fn bilinear_term<P>(
    l: usize,
    cfg: &MomentumConfig,
    lambda: f64,
    scales: &FlowScales,
    top_only: bool,
    mut lower: P,
) -> Result<f64>
where
    P: FnMut(usize, &MomentumConfig) -> Result<f64>,
{
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    let s = scales.with_lambda(lambda);
    let n = cfg.n();
    let legs = 2 * n;
    let p = cfg.momenta();
    let mut total = 0.0;
    for n1 in 1..=n {
        let n2 = n + 1 - n1;
        for l1 in 0..=l {
            let l2 = l - l1;
            if (n1 == 1 && l1 == 0) || (n2 == 1 && l2 == 0) {
                continue;
            }
            if top_only && l1 != l && l2 != l {
                continue;
            }
            let size = 2 * n1 - 1;
            let mut sum = 0.0;
            let mut count = 0usize;
            for mask in 0u32..(1u32 << legs) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                count += 1;
                let q = -cfg.subset_sum(mask);
                let dc = propagator_lambda_derivative(q.norm_sq(), &s)?;
                if dc == 0.0 {
                    continue;
                }
                let mut first = Vec::with_capacity(2 * n1);
                let mut second = Vec::with_capacity(2 * n2);
                for (i, &pi) in p.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        first.push(pi);
                    } else {
                        second.push(pi);
                    }
                }
                first.push(q);
                second.push(-q);
                let a = lower(l1, &MomentumConfig::new(first)?)?;
                if a == 0.0 {
                    continue;
                }
                let b = lower(l2, &MomentumConfig::new(second)?)?;
                sum += a * dc * b;
            }
            total -= 2.0 * (n1 * n2) as f64 * sum / count as f64;
        }
    }
    Ok(total)
}
