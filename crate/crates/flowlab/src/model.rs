//! Kinematics, flow scales, the regularized propagator and the subsum function η.

use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourMomentum(pub [f64; 4]);

impl FourMomentum {
    pub const ZERO: FourMomentum = FourMomentum([0.0; 4]);

    pub fn axis(mu: usize, len: f64) -> Self {
        let mut c = [0.0; 4];
        c[mu] = len;
        FourMomentum(c)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        FourMomentum(self.0.map(|c| c * s))
    }
}

impl Add for FourMomentum {
    type Output = FourMomentum;
    fn add(self, rhs: Self) -> Self {
        FourMomentum(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourMomentum {
    type Output = FourMomentum;
    fn sub(self, rhs: Self) -> Self {
        FourMomentum(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for FourMomentum {
    type Output = FourMomentum;
    fn neg(self) -> Self {
        FourMomentum(self.0.map(|c| -c))
    }
}

/// Ordered list of 2n momenta summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumConfig {
    momenta: Vec<FourMomentum>,
}

impl MomentumConfig {
    pub fn new(momenta: Vec<FourMomentum>) -> Result<Self> {
        if momenta.len() < 2 || momenta.len() % 2 != 0 {
            return Err(Error::Argument(format!(
                "a configuration needs an even number >= 2 of momenta, got {}",
                momenta.len()
            )));
        }
        if momenta.iter().any(|p| p.0.iter().any(|c| !c.is_finite())) {
            return Err(Error::Argument("non-finite momentum component".into()));
        }
        let total = momenta.iter().fold(FourMomentum::ZERO, |acc, p| acc + *p);
        let scale = momenta.iter().map(|p| p.norm()).fold(1.0f64, f64::max);
        if total.norm() > 1e-12 * scale {
            return Err(Error::Argument(format!(
                "momenta do not sum to zero (|sum| = {:e})",
                total.norm()
            )));
        }
        Ok(MomentumConfig { momenta })
    }

    pub fn zero(legs: usize) -> Result<Self> {
        Self::new(vec![FourMomentum::ZERO; legs])
    }

    pub fn momenta(&self) -> &[FourMomentum] {
        &self.momenta
    }

    pub fn legs(&self) -> usize {
        self.momenta.len()
    }

    pub fn n(&self) -> usize {
        self.momenta.len() / 2
    }

    /// Sum of the momenta whose leg index is set in `mask`.
    pub fn subset_sum(&self, mask: u32) -> FourMomentum {
        let mut total = FourMomentum::ZERO;
        for (i, p) in self.momenta.iter().enumerate() {
            if mask & (1 << i) != 0 {
                total = total + *p;
            }
        }
        total
    }
}

/// Derivative multi-index on a single momentum, |w| ≤ 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MultiIndex(pub [u8; 4]);

impl MultiIndex {
    pub fn new(w: [u8; 4]) -> Result<Self> {
        let m = MultiIndex(w);
        if m.order() > 3 {
            return Err(Error::Unsupported(format!("|w| = {} exceeds 3", m.order())));
        }
        Ok(m)
    }

    pub fn along_axis(order: u8) -> Result<Self> {
        Self::new([order, 0, 0, 0])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&x| x as u32).sum()
    }

    /// All multi-indices with |w| ≤ 3.
    pub fn all() -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for a in 0..=3u8 {
            for b in 0..=3 - a {
                for c in 0..=3 - a - b {
                    for d in 0..=3 - a - b - c {
                        out.push(MultiIndex([a, b, c, d]));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowScales {
    pub lambda: f64,
    pub lambda0: f64,
    pub m: f64,
}

impl FlowScales {
    pub fn new(lambda: f64, lambda0: f64, m: f64) -> Result<Self> {
        let ok = m > 0.0 && m.is_finite() && lambda >= 0.0 && lambda.is_finite() && lambda <= lambda0;
        if !ok {
            return Err(Error::Argument(format!(
                "invalid scales Λ = {lambda}, Λ0 = {lambda0}, m = {m}"
            )));
        }
        Ok(FlowScales { lambda, lambda0, m })
    }

    pub fn with_lambda(&self, lambda: f64) -> FlowScales {
        FlowScales { lambda, ..*self }
    }

    pub fn kappa(&self) -> f64 {
        self.lambda + self.m
    }
}

/// exp(−z/Λ²) with the Λ = 0 endpoint mapped to 0 for z > 0.
fn gauss_cut(z: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        if z > 0.0 {
            0.0
        } else {
            1.0
        }
    } else if lambda.is_infinite() {
        1.0
    } else {
        (-z / (lambda * lambda)).exp()
    }
}

/// C^{Λ,Λ0}(p) = (e^{−(p²+m²)/Λ0²} − e^{−(p²+m²)/Λ²}) / (p²+m²).
pub fn propagator(p_sq: f64, s: &FlowScales) -> f64 {
    let z = p_sq + s.m * s.m;
    let upper = gauss_cut(z, s.lambda0);
    if s.lambda == 0.0 {
        return upper / z;
    }
    // e^{-z/Λ0²}(1 − e^{−z(1/Λ² − 1/Λ0²)}) keeps relative accuracy when Λ ≈ Λ0.
    let inv0 = if s.lambda0.is_infinite() { 0.0 } else { 1.0 / (s.lambda0 * s.lambda0) };
    let d = 1.0 / (s.lambda * s.lambda) - inv0;
    upper * (-(-z * d).exp_m1()) / z
}

/// ∂_Λ C = −(2/Λ³) e^{−(p²+m²)/Λ²}.
pub fn propagator_lambda_derivative(p_sq: f64, s: &FlowScales) -> Result<f64> {
    if !(s.lambda > 0.0) {
        return Err(Error::Domain("∂_Λ C requested at Λ = 0".into()));
    }
    let l = s.lambda;
    Ok(-2.0 / (l * l * l) * gauss_cut(p_sq + s.m * s.m, l))
}

/// ∂^w e^{−(p²+m²)/(cΛ²)} with c = 2 for the half-width regulator.
pub fn regulator_momentum_derivative(
    p: &FourMomentum,
    s: &FlowScales,
    w: MultiIndex,
    half_width: bool,
) -> Result<f64> {
    if w.order() > 3 {
        return Err(Error::Unsupported(format!("|w| = {} exceeds 3", w.order())));
    }
    if !(s.lambda > 0.0) {
        return Err(Error::Domain("momentum derivative requested at Λ = 0".into()));
    }
    let c = if half_width { 2.0 } else { 1.0 };
    let a = 1.0 / (c * s.lambda * s.lambda);
    let mut poly = 1.0;
    for mu in 0..4 {
        let x = p.0[mu];
        poly *= match w.0[mu] {
            0 => 1.0,
            1 => -2.0 * a * x,
            2 => 4.0 * a * a * x * x - 2.0 * a,
            3 => -8.0 * a * a * a * x * x * x + 12.0 * a * a * x,
            _ => unreachable!(),
        };
    }
    Ok(poly * (-(p.norm_sq() + s.m * s.m) * a).exp())
}

/// η_{ij}: smallest |p_i + Σ_{k∈J} p_k| over J ⊆ legs∖{i, j}. Indices are 0-based.
pub fn eta(cfg: &MomentumConfig, i: usize, j: usize) -> Result<f64> {
    let legs = cfg.legs();
    if i == j || i >= legs || j >= legs {
        return Err(Error::Argument(format!("eta needs distinct legs < {legs}, got ({i}, {j})")));
    }
    let others: Vec<usize> = (0..legs).filter(|&k| k != i && k != j).collect();
    let p = cfg.momenta();
    let mut best = f64::INFINITY;
    for subset in 0u32..(1u32 << others.len()) {
        let mut q = p[i];
        for (bit, &k) in others.iter().enumerate() {
            if subset & (1 << bit) != 0 {
                q = q + p[k];
            }
        }
        best = best.min(q.norm());
    }
    Ok(best)
}

pub fn sup_momentum(cfg: &MomentumConfig) -> f64 {
    cfg.momenta().iter().map(|p| p.norm()).fold(0.0, f64::max)
}

/// Kinematic families used for tabulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// All momenta zero.
    Zero,
    /// (p, −p) along the first axis; parameter |p|.
    AntipodalPair,
    /// (p, −p, q, −q); parameters |p|, |q|, cos θ.
    FourPoint,
    /// (p1, −p1, p2, −p2, …) with p_i along axis i; parameters |p_i|.
    Pairs,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Zero => "zero",
            FamilyKind::AntipodalPair => "antipodal-pair",
            FamilyKind::FourPoint => "four-point",
            FamilyKind::Pairs => "pairs",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "zero" => FamilyKind::Zero,
            "antipodal-pair" => FamilyKind::AntipodalPair,
            "four-point" => FamilyKind::FourPoint,
            "pairs" => FamilyKind::Pairs,
            _ => return Err(Error::Argument(format!("unknown family `{name}`"))),
        })
    }
}

/// Builds a member of a kinematic family. For `zero` the single parameter is 2n.
pub fn make_family(name: &str, params: &[f64]) -> Result<MomentumConfig> {
    let kind = FamilyKind::parse(name)?;
    family_config(kind, params)
}

pub fn family_config(kind: FamilyKind, params: &[f64]) -> Result<MomentumConfig> {
    let need = |k: usize| -> Result<()> {
        if params.len() != k {
            return Err(Error::Argument(format!(
                "family `{}` takes {k} parameter(s), got {}",
                kind.name(),
                params.len()
            )));
        }
        Ok(())
    };
    match kind {
        FamilyKind::Zero => {
            need(1)?;
            let legs = params[0];
            if legs.fract() != 0.0 || legs < 2.0 {
                return Err(Error::Argument(format!("zero family needs integer 2n >= 2, got {legs}")));
            }
            MomentumConfig::zero(legs as usize)
        }
        FamilyKind::AntipodalPair => {
            need(1)?;
            let p = FourMomentum::axis(0, params[0]);
            MomentumConfig::new(vec![p, -p])
        }
        FamilyKind::FourPoint => {
            need(3)?;
            let (pn, qn, c) = (params[0], params[1], params[2]);
            if !(-1.0..=1.0).contains(&c) {
                return Err(Error::Argument(format!("cos θ = {c} outside [-1, 1]")));
            }
            let s = (1.0 - c * c).max(0.0).sqrt();
            let p = FourMomentum::axis(0, pn);
            let q = FourMomentum([qn * c, qn * s, 0.0, 0.0]);
            MomentumConfig::new(vec![p, -p, q, -q])
        }
        FamilyKind::Pairs => {
            if params.is_empty() || params.len() > 4 {
                return Err(Error::Argument("pairs family takes 1 to 4 norms".into()));
            }
            let mut momenta = Vec::with_capacity(2 * params.len());
            for (mu, &len) in params.iter().enumerate() {
                let p = FourMomentum::axis(mu, len);
                momenta.push(p);
                momenta.push(-p);
            }
            MomentumConfig::new(momenta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sc(l: f64, l0: f64) -> FlowScales {
        FlowScales::new(l, l0, 1.0).unwrap()
    }

    #[test]
    fn propagator_endpoints() {
        assert_eq!(propagator(0.7, &sc(3.0, 3.0)), 0.0);
        assert_eq!(propagator(0.0, &sc(0.0, f64::INFINITY)), 1.0);
        // (e^{-1/2} − e^{-2}) / 2
        let v = propagator(1.0, &sc(1.0, 2.0));
        assert!((v - 0.23559768823801037).abs() < 1e-15, "{v}");
    }

    #[test]
    fn propagator_is_monotone_and_nonnegative() {
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let l = 50.0 * i as f64 / 200.0;
            let v = propagator(2.5, &sc(l, 50.0));
            assert!(v >= 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_derivative_matches_formula_and_fd() {
        let d = propagator_lambda_derivative(0.0, &sc(1.0, 10.0)).unwrap();
        assert!((d + 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        for &(p2, l) in &[(0.3, 0.7), (2.0, 1.5), (9.0, 4.0), (0.0, 0.4)] {
            let h = 1e-5 * l;
            let fd = (propagator(p2, &sc(l + h, 10.0)) - propagator(p2, &sc(l - h, 10.0))) / (2.0 * h);
            let d = propagator_lambda_derivative(p2, &sc(l, 10.0)).unwrap();
            assert!(((fd - d) / d).abs() < 1e-6, "{p2} {l}: {fd} vs {d}");
            assert!(d <= 0.0 && d.abs() * l.powi(3) / 2.0 <= 1.0);
        }
        assert!(propagator_lambda_derivative(1.0, &sc(0.0, 10.0)).is_err());
        let big = propagator_lambda_derivative(0.0, &sc(1e4, 1e5)).unwrap();
        assert!((big * 1e12 / -2.0 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn regulator_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = sc(1.3, 10.0);
        for _ in 0..20 {
            let p = FourMomentum(std::array::from_fn(|_| rng.gen_range(-1.5..1.5)));
            for w in MultiIndex::all() {
                for half in [false, true] {
                    let exact = regulator_momentum_derivative(&p, &s, w, half).unwrap();
                    let fd = finite_difference(&p, &s, w, half);
                    let scale = regulator_momentum_derivative(&FourMomentum::ZERO, &s, MultiIndex::default(), half).unwrap();
                    assert!((exact - fd).abs() < 1e-5 * scale.max(exact.abs()), "{w:?} {exact} {fd}");
                }
            }
        }
        let w1 = MultiIndex::along_axis(1).unwrap();
        assert_eq!(regulator_momentum_derivative(&FourMomentum::ZERO, &s, w1, false).unwrap(), 0.0);
        assert!(MultiIndex::new([2, 2, 0, 0]).is_err());
    }

    fn finite_difference(p: &FourMomentum, s: &FlowScales, w: MultiIndex, half: bool) -> f64 {
        // Nested central differences, one axis at a time.
        fn rec(p: FourMomentum, s: &FlowScales, w: [u8; 4], half: bool) -> f64 {
            if let Some(mu) = (0..4).find(|&mu| w[mu] > 0) {
                let h = 1e-3;
                let mut w2 = w;
                w2[mu] -= 1;
                let mut plus = p;
                plus.0[mu] += h;
                let mut minus = p;
                minus.0[mu] -= h;
                (rec(plus, s, w2, half) - rec(minus, s, w2, half)) / (2.0 * h)
            } else {
                regulator_momentum_derivative(&p, s, MultiIndex::default(), half).unwrap()
            }
        }
        rec(*p, s, w.0, half)
    }

    #[test]
    fn eta_examples() {
        let p = FourMomentum::axis(0, 1.0);
        let q = FourMomentum::axis(1, 2.0);
        let cfg = MomentumConfig::new(vec![p, -p, q, -q]).unwrap();
        assert!((eta(&cfg, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(eta(&MomentumConfig::zero(6).unwrap(), 0, 3).unwrap(), 0.0);
        let pair = make_family("antipodal-pair", &[2.5]).unwrap();
        assert_eq!(eta(&pair, 0, 1).unwrap(), 2.5);
        assert!(eta(&cfg, 2, 2).is_err());
    }

    #[test]
    fn eta_is_invariant_under_permuting_other_legs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut moms: Vec<FourMomentum> =
                (0..5).map(|_| FourMomentum(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))).collect();
            let total = moms.iter().fold(FourMomentum::ZERO, |a, p| a + *p);
            moms.push(-total);
            let cfg = MomentumConfig::new(moms.clone()).unwrap();
            let e = eta(&cfg, 0, 1).unwrap();
            moms[2..].reverse();
            let perm = MomentumConfig::new(moms).unwrap();
            assert!((eta(&perm, 0, 1).unwrap() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn sup_momentum_and_families() {
        assert_eq!(sup_momentum(&MomentumConfig::zero(2).unwrap()), 0.0);
        let pair = make_family("antipodal-pair", &[1.0]).unwrap();
        assert_eq!(pair.momenta()[0], FourMomentum([1.0, 0.0, 0.0, 0.0]));
        assert_eq!(pair.momenta()[1], FourMomentum([-1.0, 0.0, 0.0, 0.0]));
        assert_eq!(sup_momentum(&pair), 1.0);
        let four = make_family("four-point", &[1.0, 1.0, 0.0]).unwrap();
        assert!(four.momenta()[0].dot(&four.momenta()[2]).abs() < 1e-15);
        assert_eq!(make_family("zero", &[4.0]).unwrap().legs(), 4);
        assert!(make_family("triangle", &[1.0]).is_err());
        assert!(MomentumConfig::new(vec![FourMomentum::axis(0, 1.0); 2]).is_err());
        let pairs = make_family("pairs", &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(pairs.legs(), 6);
        assert_eq!(sup_momentum(&pairs), 3.0);
    }
}
