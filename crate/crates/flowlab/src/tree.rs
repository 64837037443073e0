//! Tree-level amplitudes as polynomials in the internal-line propagators.
//!
//! A tree amplitude with 2n legs is a homogeneous polynomial of degree n − 2 in
//! the variables x_S = C(p_S), where S runs over leg subsets identified with
//! their complements. The flow equation fixes ∂P/∂x_S = Q_S, the bilinear term
//! with the line S cut, and Euler's relation gives P = Σ_S x_S Q_S / (n − 2).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::{propagator, FlowScales, MomentumConfig};

pub const MAX_TREE_LEGS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TreePoly {
    legs: usize,
    /// (sorted canonical masks, coefficient) at unit coupling.
    terms: Vec<(Vec<u32>, f64)>,
}

type Monomials = BTreeMap<Vec<u32>, f64>;

/// Representative of {S, S^c} that does not contain the last leg.
pub fn canonical_mask(mask: u32, legs: usize) -> u32 {
    let full = (1u32 << legs) - 1;
    let m = mask & full;
    if m & (1 << (legs - 1)) != 0 {
        full ^ m
    } else {
        m
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Maps a sub-amplitude mask to the parent leg set. The sub-amplitude's last
/// leg is the internal line; masks containing it are replaced by their
/// complement within the sub-amplitude first.
fn lift(mask: u32, sub_legs: &[usize]) -> u32 {
    let k = sub_legs.len() + 1;
    let full = (1u32 << k) - 1;
    let m = if mask & (1 << (k - 1)) != 0 { full ^ mask } else { mask };
    let mut out = 0u32;
    for (b, &leg) in sub_legs.iter().enumerate() {
        if m & (1 << b) != 0 {
            out |= 1 << leg;
        }
    }
    out
}

fn bits(mask: u32, legs: usize) -> Vec<usize> {
    (0..legs).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Cut-line polynomials Q_S keyed by canonical S.
fn cut_polynomials(n: usize) -> Result<BTreeMap<u32, Monomials>> {
    let legs = 2 * n;
    let full = (1u32 << legs) - 1;
    let mut q: BTreeMap<u32, Monomials> = BTreeMap::new();
    for n1 in 2..n {
        let n2 = n + 1 - n1;
        let p1 = unit_tree(n1)?;
        let p2 = unit_tree(n2)?;
        let size = 2 * n1 - 1;
        let weight = -2.0 * (n1 * n2) as f64 / binomial(legs, size);
        for s in 0..=full {
            if s.count_ones() as usize != size {
                continue;
            }
            let legs1 = bits(s, legs);
            let legs2 = bits(full ^ s, legs);
            let slot = q.entry(canonical_mask(s, legs)).or_default();
            for (m1, c1) in &p1.terms {
                for (m2, c2) in &p2.terms {
                    let mut key: Vec<u32> = m1
                        .iter()
                        .map(|&t| canonical_mask(lift(t, &legs1), legs))
                        .chain(m2.iter().map(|&t| canonical_mask(lift(t, &legs2), legs)))
                        .collect();
                    key.sort_unstable();
                    *slot.entry(key).or_insert(0.0) += weight * c1 * c2;
                }
            }
        }
    }
    Ok(q)
}

fn build(n: usize) -> Result<TreePoly> {
    let legs = 2 * n;
    match n {
        1 => return Ok(TreePoly { legs, terms: Vec::new() }),
        2 => return Ok(TreePoly { legs, terms: vec![(Vec::new(), 1.0 / 24.0)] }),
        _ => {}
    }
    let degree = (n - 2) as f64;
    let mut p = Monomials::new();
    for (s, qs) in cut_polynomials(n)? {
        for (key, c) in qs {
            let mut k2 = key.clone();
            k2.push(s);
            k2.sort_unstable();
            *p.entry(k2).or_insert(0.0) += c / degree;
        }
    }
    Ok(TreePoly { legs, terms: p.into_iter().filter(|(_, c)| *c != 0.0).collect() })
}

/// Tree polynomial for 2n legs at unit coupling (the coupling enters as g^{n−1}).
pub fn unit_tree(n: usize) -> Result<&'static TreePoly> {
    static CACHE: [OnceLock<TreePoly>; MAX_TREE_LEGS / 2 + 1] =
        [const { OnceLock::new() }; MAX_TREE_LEGS / 2 + 1];
    if n == 0 || 2 * n > MAX_TREE_LEGS {
        return Err(Error::Unsupported(format!("tree amplitudes with {} legs", 2 * n)));
    }
    if let Some(p) = CACHE[n].get() {
        return Ok(p);
    }
    let p = build(n)?;
    Ok(CACHE[n].get_or_init(|| p))
}

impl TreePoly {
    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    /// Evaluates the polynomial with x_S = f(S).
    pub fn eval_with<F: FnMut(u32) -> f64>(&self, mut f: F) -> f64 {
        let mut cache: BTreeMap<u32, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (masks, c) in &self.terms {
            let mut term = *c;
            for &m in masks {
                term *= *cache.entry(m).or_insert_with(|| f(m));
            }
            total += term;
        }
        total
    }

    pub fn eval(&self, cfg: &MomentumConfig, scales: &FlowScales) -> f64 {
        self.eval_with(|mask| propagator(cfg.subset_sum(mask).norm_sq(), scales))
    }
}

/// Connected amputated tree amplitude L_{2n,0}.
pub fn tree_cag(cfg: &MomentumConfig, scales: &FlowScales, g: f64) -> Result<f64> {
    let n = cfg.n();
    if n == 1 {
        return Ok(0.0);
    }
    let poly = unit_tree(n)?;
    Ok(g.powi(n as i32 - 1) * poly.eval(cfg, scales))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FourMomentum, MomentumConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    impl TreePoly {
        /// ∂P/∂x_S as a monomial map.
        fn derivative(&self, s: u32) -> Monomials {
            let mut out = Monomials::new();
            for (masks, c) in &self.terms {
                let mult = masks.iter().filter(|&&m| m == s).count();
                if mult == 0 {
                    continue;
                }
                let mut rest = masks.clone();
                let pos = rest.iter().position(|&m| m == s).unwrap();
                rest.remove(pos);
                *out.entry(rest).or_insert(0.0) += c * mult as f64;
            }
            out
        }
    }

    fn random_config(rng: &mut ChaCha8Rng, legs: usize) -> MomentumConfig {
        let mut moms: Vec<FourMomentum> = (0..legs - 1)
            .map(|_| FourMomentum(std::array::from_fn(|_| rng.gen_range(-2.0..2.0))))
            .collect();
        let total = moms.iter().fold(FourMomentum::ZERO, |a, p| a + *p);
        moms.push(-total);
        MomentumConfig::new(moms).unwrap()
    }

    #[test]
    fn low_orders() {
        let s = FlowScales::new(0.5, 10.0, 1.0).unwrap();
        let two = MomentumConfig::zero(2).unwrap();
        assert_eq!(tree_cag(&two, &s, 3.0).unwrap(), 0.0);
        let four = MomentumConfig::zero(4).unwrap();
        assert_eq!(tree_cag(&four, &s, 3.0).unwrap(), 3.0 / 24.0);
    }

    #[test]
    fn six_point_term_structure() {
        let p = unit_tree(3).unwrap();
        assert_eq!(p.terms().len(), 10);
        for (masks, c) in p.terms() {
            assert_eq!(masks.len(), 1);
            assert_eq!(masks[0].count_ones(), 3);
            assert!((c * 720.0 + 1.0).abs() < 1e-14, "{c} {masks:?}");
        }
    }

    #[test]
    fn eight_point_term_structure() {
        let p = unit_tree(4).unwrap();
        // 280 pairs of disjoint triples, each with coefficient 1/8!.
        assert_eq!(p.terms().len(), 280);
        for (masks, c) in p.terms() {
            assert_eq!(masks.len(), 2);
            assert!((c - 1.0 / 40320.0).abs() < 1e-18, "{c}");
        }
    }

    #[test]
    fn cut_polynomials_are_gradients() {
        for n in 3..=5 {
            let p = unit_tree(n).unwrap();
            for (s, qs) in cut_polynomials(n).unwrap() {
                let d = p.derivative(s);
                let keys: std::collections::BTreeSet<_> = d.keys().chain(qs.keys()).cloned().collect();
                for k in keys {
                    let a = d.get(&k).copied().unwrap_or(0.0);
                    let b = qs.get(&k).copied().unwrap_or(0.0);
                    assert!((a - b).abs() < 1e-15 * b.abs().max(1e-12), "n={n} S={s:b}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn symmetric_under_leg_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = FlowScales::new(0.8, 20.0, 1.0).unwrap();
        for legs in [6, 8] {
            let cfg = random_config(&mut rng, legs);
            let v = tree_cag(&cfg, &s, 1.0).unwrap();
            let mut moms = cfg.momenta().to_vec();
            moms.swap(0, legs - 1);
            moms.swap(2, 3);
            let w = tree_cag(&MomentumConfig::new(moms).unwrap(), &s, 1.0).unwrap();
            assert!((v - w).abs() < 1e-14 * v.abs());
        }
    }

    #[test]
    fn flow_equation_in_lambda() {
        // ∂_Λ L6 = −8 (g/4!)² mean_S ∂_Λ C(p_S) over the 10 channels.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = random_config(&mut rng, 6);
        let l = 1.1;
        let h = 1e-5;
        let at = |x: f64| tree_cag(&cfg, &FlowScales::new(x, 30.0, 1.0).unwrap(), 1.0).unwrap();
        let fd = (at(l + h) - at(l - h)) / (2.0 * h);
        let s = FlowScales::new(l, 30.0, 1.0).unwrap();
        let mut mean = 0.0;
        for mask in 0u32..64 {
            if mask.count_ones() == 3 && mask & 32 == 0 {
                mean += crate::model::propagator_lambda_derivative(cfg.subset_sum(mask).norm_sq(), &s).unwrap() / 10.0;
            }
        }
        let rhs = -8.0 / 576.0 * mean;
        assert!(((fd - rhs) / rhs).abs() < 1e-7, "{fd} {rhs}");
    }

    #[test]
    fn ten_legs_supported_twelve_not() {
        assert!(unit_tree(5).is_ok());
        assert!(unit_tree(6).is_err());
    }
}
