//! Bound formulas of the main estimates and checks of computed amplitudes against them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cert::CertReport;
use crate::error::{Error, Result};
use crate::flow_solver::AmplitudeTable;
use crate::model::{eta, sup_momentum, MomentumConfig, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub l: usize,
    pub w: MultiIndex,
    /// K̃ for the theorem bound, K for the proposition bounds.
    pub k: f64,
    pub kappa: f64,
    pub m: f64,
    /// |p⃗| = sup_i |p_i|.
    pub p: f64,
    /// η_{i,j}; only read by the bounds that carry the 1/sup(κ, η)^{|w|} factor.
    pub eta: f64,
}

impl BoundParams {
    pub fn new(n: usize, l: usize, w: MultiIndex, k: f64, kappa: f64, m: f64, p: f64) -> Result<Self> {
        let params = BoundParams { n, l, w, k, kappa, m, p, eta: 0.0 };
        params.validate()?;
        Ok(params)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Argument("n must be at least 1".into()));
        }
        if !(self.m > 0.0 && self.kappa >= self.m && self.kappa.is_finite()) {
            return Err(Error::Argument(format!("need κ ≥ m > 0, got κ = {}, m = {}", self.kappa, self.m)));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Argument(format!("K must be positive, got {}", self.k)));
        }
        if !(self.p >= 0.0 && self.p.is_finite() && self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Argument("|p| and η must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// log sup(|p⃗|/κ, κ/m).
    fn log(&self) -> f64 {
        (self.p / self.kappa).max(self.kappa / self.m).ln()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Σ_{λ=0}^{upper} x^λ / (2^λ λ!); empty (zero) for upper < 0.
fn log_sum(x: f64, upper: i64) -> f64 {
    let mut term = 1.0;
    let mut total = 0.0;
    for lambda in 0..=upper {
        if lambda > 0 {
            term *= x / (2.0 * lambda as f64);
        }
        total += term;
    }
    total
}

/// Right-hand side of the theorem bound on |L_{2n,l}|.
pub fn theorem_bound(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    if p.w.order() != 0 {
        return Err(Error::Argument("the theorem bounds underived amplitudes only".into()));
    }
    let (n, l) = (p.n, p.l);
    let x = p.log();
    if n >= 2 {
        Ok(p.kappa.powi(4 - 2 * n as i32) * p.k.powi((2 * l + n - 2) as i32) / factorial(n)
            * factorial(n + l)
            * log_sum(x, l as i64))
    } else if l >= 1 {
        Ok(p.p.max(p.kappa).powi(2) * p.k.powi(2 * l as i32) / ((l + 1) * (l + 1)) as f64
            * factorial(l)
            * log_sum(x, l as i64 - 1))
    } else {
        Err(Error::Argument("the two-point bound needs l ≥ 1".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropositionCase {
    /// 2n > 4, any |w| ≤ 3.
    Irrelevant,
    /// 2n = 4, |w| ≥ 1.
    FourPointDerivative,
    /// 2n = 4, |w| = 0.
    FourPoint,
    /// 2n = 4, |w| = 0, first momentum zero.
    FourPointAtZero,
    /// 2n = 2, |w| = 3.
    TwoPointThirdDerivative,
    /// 2n = 2, |w| ≤ 2, l ≥ 2.
    TwoPoint,
    /// 2n = 2, |w| ∈ {0, 2}, l ≥ 2, at p = 0.
    TwoPointAtZero,
}

impl PropositionCase {
    pub const ALL: [PropositionCase; 7] = [
        PropositionCase::Irrelevant,
        PropositionCase::FourPointDerivative,
        PropositionCase::FourPoint,
        PropositionCase::FourPointAtZero,
        PropositionCase::TwoPointThirdDerivative,
        PropositionCase::TwoPoint,
        PropositionCase::TwoPointAtZero,
    ];

    /// The sharper zero-momentum form wins when the first momentum vanishes.
    pub fn select(n: usize, w: &MultiIndex, first_momentum_zero: bool) -> Result<Self> {
        let order = w.order();
        Ok(match (n, order) {
            (1, 3) => PropositionCase::TwoPointThirdDerivative,
            (1, 0) | (1, 2) if first_momentum_zero => PropositionCase::TwoPointAtZero,
            (1, _) => PropositionCase::TwoPoint,
            (2, 0) if first_momentum_zero => PropositionCase::FourPointAtZero,
            (2, 0) => PropositionCase::FourPoint,
            (2, _) => PropositionCase::FourPointDerivative,
            (n, _) if n >= 3 => PropositionCase::Irrelevant,
            _ => return Err(Error::Argument(format!("no bound for n = {n}"))),
        })
    }
}

/// Right-hand side of the proposition bound for the given case.
pub fn proposition_bound(p: &BoundParams, case: PropositionCase) -> Result<f64> {
    p.validate()?;
    let (n, l) = (p.n, p.l);
    let order = p.w.order();
    let li = l as i64;
    let x = p.log();
    let k = p.k;
    let lp1_sq = ((l + 1) * (l + 1)) as f64;
    let eta_factor = p.kappa.max(p.eta).powi(-(order as i32));
    let bad = |why: &str| Err(Error::Argument(format!("{case:?} with n = {n}, l = {l}, |w| = {order}: {why}")));
    match case {
        PropositionCase::Irrelevant => {
            if n < 3 {
                return bad("needs 2n > 4");
            }
            let nf = n as f64;
            Ok(p.kappa.powi(4 - 2 * n as i32) * k.powi((2 * l + n - 2) as i32) / (lp1_sq * factorial(n) * nf * nf * nf)
                * factorial(n + l - 1)
                * eta_factor
                * log_sum(x, li))
        }
        PropositionCase::FourPointDerivative => {
            if n != 2 || order == 0 {
                return bad("needs 2n = 4 and |w| ≥ 1");
            }
            Ok(k.powf(2.0 * l as f64 - 0.25) / (lp1_sq * 16.0) * factorial(l + 1) * eta_factor * log_sum(x, li - 1))
        }
        PropositionCase::FourPoint => {
            if n != 2 || order != 0 {
                return bad("needs 2n = 4 and |w| = 0");
            }
            Ok(k.powi(2 * l as i32) / (lp1_sq * 16.0) * factorial(l + 1) * log_sum(x, li - 1) * (1.0 + x))
        }
        PropositionCase::FourPointAtZero => {
            if n != 2 || order != 0 {
                return bad("needs 2n = 4 and |w| = 0");
            }
            Ok(k.powi(2 * l as i32) / (lp1_sq * 16.0) * factorial(l + 1) * log_sum(x, li))
        }
        PropositionCase::TwoPointThirdDerivative => {
            if n != 1 || order != 3 {
                return bad("needs 2n = 2 and |w| = 3");
            }
            Ok(p.p.max(p.kappa).powi(-1) * k.powf(2.0 * l as f64 - 1.25) / lp1_sq * factorial(l) * log_sum(x, li - 2))
        }
        PropositionCase::TwoPoint => {
            if n != 1 || order > 2 || l < 2 {
                return bad("needs 2n = 2, |w| ≤ 2 and l ≥ 2");
            }
            Ok(p.p.max(p.kappa).powi(2 - order as i32) * k.powi(2 * l as i32 - 1) / lp1_sq
                * factorial(l)
                * log_sum(x, li - 2)
                * (1.0 + x))
        }
        PropositionCase::TwoPointAtZero => {
            if n != 1 || !(order == 0 || order == 2) || l < 2 {
                return bad("needs 2n = 2, |w| ∈ {0, 2} and l ≥ 2");
            }
            let x0 = (p.kappa / p.m).ln();
            Ok(p.kappa.powi(2 - order as i32) * k.powi(2 * l as i32 - 1) / lp1_sq * factorial(l) * log_sum(x0, li - 1))
        }
    }
}

/// The η-dependent bounds with the free index j chosen optimally:
/// inf_j sup(κ, η_{i,j})^{−|w|}. Indices are 0-based.
pub fn proposition_bound_best_j(p: &BoundParams, case: PropositionCase, cfg: &MomentumConfig, i: usize) -> Result<f64> {
    let mut best_eta = 0.0f64;
    for j in 0..cfg.legs() {
        if j != i {
            best_eta = best_eta.max(eta(cfg, i, j)?);
        }
    }
    proposition_bound(&p.with_eta(best_eta), case)
}

/// Coupling convention for comparing amplitudes with the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convention {
    /// Divide L_{2n,l} by (g/4!)^{l+n−1} before comparing.
    pub unit_coupling: bool,
    pub coupling: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCheck {
    pub node: usize,
    pub params: Vec<f64>,
    pub lambda: f64,
    pub value: f64,
    pub bound: f64,
    /// |value| / bound; above 1 is a violation.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCheck {
    pub n: usize,
    pub l: usize,
    pub nodes: usize,
    pub violations: usize,
    pub worst: Option<NodeCheck>,
    pub report: CertReport,
}

/// Theorem bound at every (node, Λ) of a table.
pub fn check_rows(table: &AmplitudeTable, k: f64, conv: &Convention) -> Result<Vec<NodeCheck>> {
    let scale = if conv.unit_coupling {
        (conv.coupling / 24.0).powi((table.l + table.n) as i32 - 1)
    } else {
        1.0
    };
    if scale == 0.0 {
        return Err(Error::Argument("unit-coupling convention needs g ≠ 0".into()));
    }
    let rows: Vec<Vec<NodeCheck>> = (0..table.node_count())
        .into_par_iter()
        .map(|idx| {
            let cfg = table.node_config(idx)?;
            let p = sup_momentum(&cfg);
            let params = table.node_params(idx);
            table
                .lambdas
                .iter()
                .zip(&table.values[idx])
                .map(|(&lambda, &v)| {
                    let bp = BoundParams::new(table.n, table.l, MultiIndex([0; 4]), k, lambda + conv.m, conv.m, p)?;
                    let bound = theorem_bound(&bp)?;
                    let value = v / scale;
                    let ratio = if value == 0.0 { 0.0 } else { value.abs() / bound };
                    Ok(NodeCheck { node: idx, params: params.clone(), lambda, value, bound, ratio })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn check_amplitude(table: &AmplitudeTable, k: f64, conv: &Convention) -> Result<AmplitudeCheck> {
    let rows = check_rows(table, k, conv)?;
    let violations = rows.iter().filter(|r| !(r.ratio <= 1.0)).count();
    let worst = rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).cloned();
    let worst_ratio = worst.as_ref().map_or(0.0, |w| w.ratio);
    let id = format!("bound L(2n={},l={})", 2 * table.n, table.l);
    let domain = format!(
        "{} nodes of family {} × {} Λ values, K = {k:e}, {}",
        table.node_count(),
        table.family.name(),
        table.lambdas.len(),
        if conv.unit_coupling { "unit coupling" } else { "explicit coupling" }
    );
    let report = CertReport::new(id, 1.0, worst_ratio, domain, violations == 0)
        .with_margin(if worst_ratio > 0.0 { 1.0 / worst_ratio } else { f64::INFINITY });
    Ok(AmplitudeCheck { n: table.n, l: table.l, nodes: rows.len(), violations, worst, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub c0: f64,
    pub c1: f64,
    /// Largest |fit − value| / |value| over the samples.
    pub residual: f64,
}

/// Least-squares fit value ≈ c0 + c1 log(|p|/κ).
pub fn log_growth_fit(samples: &[(f64, f64)], kappa: f64) -> Result<LogFit> {
    if samples.len() < 8 {
        return Err(Error::Argument(format!("need at least 8 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(p, v)| !(p > 4.0 * kappa) || !v.is_finite()) {
        return Err(Error::Argument("all samples need |p| > 4κ and finite values".into()));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(Error::Argument(format!("samples span {lo}..{hi}, less than a decade")));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| (s.0 / kappa).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(samples).map(|(x, s)| (x - mx) * (s.1 - my)).sum();
    let c1 = sxy / sxx;
    let c0 = my - c1 * mx;
    let residual = xs
        .iter()
        .zip(samples)
        .map(|(x, s)| {
            let d = (c0 + c1 * x - s.1).abs();
            if s.1 == 0.0 {
                d
            } else {
                d / s.1.abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(LogFit { c0, c1, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FamilyKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w0() -> MultiIndex {
        MultiIndex([0; 4])
    }

    #[test]
    fn theorem_examples() {
        let p = BoundParams::new(2, 0, w0(), 6.2e5, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(theorem_bound(&p).unwrap(), 1.0);
        let k = 3.0;
        let p = BoundParams::new(3, 1, w0(), k, 2.0, 2.0, 2.0).unwrap();
        assert!((theorem_bound(&p).unwrap() - 4.0 * k.powi(3) / 4.0).abs() < 1e-12);
        let p = BoundParams::new(1, 1, w0(), k, 1.0, 1.0, 3.0).unwrap();
        assert!((theorem_bound(&p).unwrap() - 9.0 * k * k / 4.0).abs() < 1e-12);
        let p = BoundParams::new(1, 0, w0(), k, 1.0, 1.0, 0.0).unwrap();
        assert!(theorem_bound(&p).is_err());
        let p = BoundParams::new(2, 0, MultiIndex([1, 0, 0, 0]), k, 1.0, 1.0, 0.0).unwrap();
        assert!(theorem_bound(&p).is_err());
    }

    #[test]
    fn proposition_examples() {
        let k = 5.0;
        let p = BoundParams::new(3, 0, w0(), k, 1.5, 1.5, 1.0).unwrap();
        let v = proposition_bound(&p, PropositionCase::Irrelevant).unwrap();
        assert!((v - k / 81.0 / 2.25).abs() < 1e-14);
        // Two-point, |w| ≤ 2: sum stops at l − 2; l = 2 keeps one term.
        let w2 = MultiIndex([2, 0, 0, 0]);
        let kappa = 1.0;
        let p = BoundParams::new(1, 2, w2, k, kappa, 1.0, 1.0).unwrap();
        let v = proposition_bound(&p, PropositionCase::TwoPoint).unwrap();
        assert!((v - k.powi(3) / 9.0 * 2.0).abs() < 1e-12);
        let p = BoundParams::new(1, 3, w2, k, kappa, 1.0, std::f64::consts::E).unwrap();
        let v = proposition_bound(&p, PropositionCase::TwoPoint).unwrap();
        let sum = 1.0 + 0.5;
        assert!((v - k.powi(5) / 16.0 * 6.0 * sum * 2.0).abs() < 1e-9 * v);
        assert!(proposition_bound(&p, PropositionCase::Irrelevant).is_err());
        let p1 = BoundParams::new(1, 1, w0(), k, kappa, 1.0, 1.0).unwrap();
        assert!(proposition_bound(&p1, PropositionCase::TwoPoint).is_err());
    }

    #[test]
    fn case_selection_prefers_zero_momentum_form() {
        assert_eq!(PropositionCase::select(2, &w0(), true).unwrap(), PropositionCase::FourPointAtZero);
        assert_eq!(PropositionCase::select(2, &w0(), false).unwrap(), PropositionCase::FourPoint);
        assert_eq!(PropositionCase::select(1, &MultiIndex([1, 0, 0, 0]), true).unwrap(), PropositionCase::TwoPoint);
        assert_eq!(PropositionCase::select(4, &w0(), true).unwrap(), PropositionCase::Irrelevant);
    }

    fn valid_draw(rng: &mut ChaCha8Rng, case: PropositionCase) -> (usize, usize, MultiIndex) {
        let order = |rng: &mut ChaCha8Rng, lo: u8, hi: u8| MultiIndex([rng.gen_range(lo..=hi), 0, 0, 0]);
        match case {
            PropositionCase::Irrelevant => (rng.gen_range(3..6), rng.gen_range(0..4), order(rng, 0, 3)),
            PropositionCase::FourPointDerivative => (2, rng.gen_range(1..4), order(rng, 1, 3)),
            PropositionCase::FourPoint | PropositionCase::FourPointAtZero => (2, rng.gen_range(0..4), w0()),
            PropositionCase::TwoPointThirdDerivative => (1, rng.gen_range(2..5), MultiIndex([3, 0, 0, 0])),
            PropositionCase::TwoPoint => (1, rng.gen_range(2..5), order(rng, 0, 2)),
            PropositionCase::TwoPointAtZero => (1, rng.gen_range(2..5), MultiIndex([2 * rng.gen_range(0..2), 0, 0, 0])),
        }
    }

    #[test]
    fn bounds_are_monotone_in_momentum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let kappa = rng.gen_range(1.0..20.0);
            let k = rng.gen_range(0.5..50.0);
            let p1 = rng.gen_range(0.0..100.0);
            let p2 = p1 * rng.gen_range(1.0..3.0);
            for case in PropositionCase::ALL {
                let (n, l, w) = valid_draw(&mut rng, case);
                let a = BoundParams::new(n, l, w, k, kappa, 1.0, p1).unwrap();
                let b = BoundParams { p: p2, ..a };
                let (x, y) = (proposition_bound(&a, case).unwrap(), proposition_bound(&b, case).unwrap());
                if case == PropositionCase::TwoPointThirdDerivative {
                    // The sup(|p|, κ)^{−1} prefactor makes this one non-increasing.
                    if p1 > kappa && l == 2 {
                        assert!(y <= x * (1.0 + 1e-14), "{a:?}");
                    }
                    continue;
                }
                assert!(y >= x * (1.0 - 1e-14), "{case:?} {a:?}");
            }
            let n = rng.gen_range(1..6);
            let l = rng.gen_range(if n == 1 { 1 } else { 0 }..4);
            let a = BoundParams::new(n, l, w0(), k, kappa, 1.0, p1).unwrap();
            let b = BoundParams { p: p2, ..a };
            assert!(theorem_bound(&b).unwrap() >= theorem_bound(&a).unwrap() * (1.0 - 1e-14));
        }
    }

    #[test]
    fn log_factor_grows_beyond_kappa() {
        for l in 1..5 {
            for n in 1..5 {
                let a = BoundParams::new(n, l, w0(), 2.0, 1.0, 1.0, 1.0).unwrap();
                let b = BoundParams { p: std::f64::consts::E, ..a };
                assert!(theorem_bound(&b).unwrap() > theorem_bound(&a).unwrap());
            }
        }
    }

    #[test]
    fn optimal_j_is_no_weaker_than_any_single_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let params: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..3.0)).collect();
            let cfg = crate::model::family_config(FamilyKind::Pairs, &params).unwrap();
            let w = MultiIndex([rng.gen_range(1..4), 0, 0, 0]);
            let base = BoundParams::new(3, 1, w, 4.0, 1.3, 1.0, sup_momentum(&cfg)).unwrap();
            let best = proposition_bound_best_j(&base, PropositionCase::Irrelevant, &cfg, 0).unwrap();
            for j in 1..cfg.legs() {
                let single = proposition_bound(&base.with_eta(eta(&cfg, 0, j).unwrap()), PropositionCase::Irrelevant).unwrap();
                assert!(single >= best * (1.0 - 1e-14));
            }
        }
    }

    #[test]
    fn theorem_dominates_four_point_proposition() {
        for l in 0..4 {
            for &(kappa, p) in &[(1.0, 0.5), (2.0, 1.0), (10.0, 10.0)] {
                let a = BoundParams::new(2, l, w0(), 7.0, kappa, 1.0, p).unwrap();
                assert!(theorem_bound(&a).unwrap() >= proposition_bound(&a, PropositionCase::FourPoint).unwrap());
            }
        }
    }

    #[test]
    fn log_fit_examples() {
        let exact: Vec<(f64, f64)> = (0..10).map(|i| {
            let p = 8.0 * 10f64.powf(i as f64 / 9.0);
            (p, 0.3 + 1.7 * p.ln())
        }).collect();
        let fit = log_growth_fit(&exact, 1.0).unwrap();
        assert!(fit.residual < 1e-12 && (fit.c1 - 1.7).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = exact.iter().map(|&(p, _)| (p, 2.5)).collect();
        assert!(log_growth_fit(&flat, 1.0).unwrap().c1.abs() < 1e-14);
        assert!(log_growth_fit(&exact[..5], 1.0).is_err());
        let narrow: Vec<(f64, f64)> = (0..10).map(|i| (8.0 + i as f64 * 0.1, 1.0)).collect();
        assert!(log_growth_fit(&narrow, 1.0).is_err());
    }

    #[test]
    fn amplitude_check_detects_corruption() {
        let family = FamilyKind::FourPoint;
        let axes = vec![vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let lambdas = vec![0.0, 1.0, 2.0];
        let values = vec![vec![1.0 / 24.0; 3]; 8];
        let mut table = AmplitudeTable {
            n: 2,
            l: 0,
            family,
            axis_names: vec!["|p|".into(), "|q|".into(), "cos".into()],
            axes,
            lambdas,
            values: values.clone(),
            slopes: values,
        };
        let conv = Convention { unit_coupling: true, coupling: 1.0, m: 1.0 };
        let ok = check_amplitude(&table, 6.2e5, &conv).unwrap();
        assert!(ok.report.pass && ok.violations == 0 && ok.nodes == 24);
        table.values[5][1] = 2.0 / 24.0;
        let bad = check_amplitude(&table, 6.2e5, &conv).unwrap();
        assert!(!bad.report.pass);
        assert_eq!(bad.violations, 1);
        let worst = bad.worst.unwrap();
        assert_eq!((worst.node, worst.lambda), (5, 1.0));
    }
}
