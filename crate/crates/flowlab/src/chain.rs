//! The chain of lower bounds on K from the inductive proof, and the minimal K
//! that satisfies all of them.
//!
//! Every record is written as Σ_i a_i K^{−p_i} ≤ 1 with a_i ≥ 0 and p_i > 0,
//! so each residual decreases strictly in K and has a unique root.
//! The bounds are in the unit-coupling convention: the vertex weight g/4! is
//! set to one, and a bound on L_{2n,l} is restored by (g/4!)^{l+n−1}.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::model::MultiIndex;

/// Ids of all registered records, in registration order.
pub const RECORD_IDS: [&str; 21] = [
    "bdk0", "bdk1", "bdk2", "bdk3", "bdk34", "bdk32", "bdk4", "bdk5", "bdk6", "bdke", "bdk8", "bdk9", "bdk10", "bdk11",
    "bdk12", "bdk13", "bdk15", "bdk16", "bdk17", "bdk18", "kal",
];

/// Multiplicities of K^{(k)}, k = 0..=3, in Σ_{w1+w2+w3=w} w!/(w1!w2!w3!) K^{(|w3|)},
/// by exhaustive enumeration of the multi-index decompositions.
pub fn ktilde_multiplicities(w: MultiIndex) -> [u64; 4] {
    fn fact(k: u8) -> u64 {
        (1..=k as u64).product()
    }
    let mut mult = [0u64; 4];
    let ranges: Vec<Vec<(u8, u8)>> = w
        .0
        .iter()
        .map(|&wi| (0..=wi).flat_map(|a| (0..=wi - a).map(move |b| (a, b))).collect())
        .collect();
    for d0 in &ranges[0] {
        for d1 in &ranges[1] {
            for d2 in &ranges[2] {
                for d3 in &ranges[3] {
                    let mut coef = 1u64;
                    let mut w3 = 0usize;
                    for (i, &&(a, b)) in [d0, d1, d2, d3].iter().enumerate() {
                        let c = w.0[i] - a - b;
                        coef *= fact(w.0[i]) / (fact(a) * fact(b) * fact(c));
                        w3 += c as usize;
                    }
                    mult[w3] += coef;
                }
            }
        }
    }
    mult
}

/// K̃(w) = Σ c_{w_i} K^{(|w3|)}; with `primed`, K'^{(|w3|)} instead.
pub fn ktilde(w: MultiIndex, primed: bool, c: &Constants) -> Result<f64> {
    if w.order() > 3 {
        return Err(Error::Domain(format!("K tilde needs |w| <= 3, got {}", w.order())));
    }
    let k = if primed { c.kw_prime } else { c.kw };
    let mult = ktilde_multiplicities(w);
    Ok(mult.iter().zip(k).map(|(&m, k)| m as f64 * k).sum())
}

/// K̃ for a derivative of order |w| along one axis.
pub fn ktilde_order(order: u32, primed: bool, c: &Constants) -> Result<f64> {
    if order > 3 {
        return Err(Error::Domain(format!("K tilde needs |w| <= 3, got {order}")));
    }
    ktilde(MultiIndex([order as u8, 0, 0, 0]), primed, c)
}

/// Stands for the limit n → ∞ in records whose range in n is unbounded.
pub const N_INF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NRange {
    Exactly(u32),
    AtLeast(u32),
}

/// One lower bound on K, valid on its parameter range.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityRecord {
    pub id: &'static str,
    pub n: NRange,
    pub l_min: u32,
    pub w: &'static [u32],
    /// The inequality in words, for reports.
    pub display: &'static str,
}

impl InequalityRecord {
    pub fn all() -> Vec<InequalityRecord> {
        use NRange::*;
        let r = |id, n, l_min, w, display| InequalityRecord { id, n, l_min, w, display };
        vec![
            r("bdk0", AtLeast(3), 1, &[0, 1, 2, 3], "K^-1 (n/(n+1))^3 (2n+1) (l+1)^2/l^2 K2 K3 c(|w|) 5/(2n+|w|-4) <= 1"),
            r("bdk1", Exactly(2), 1, &[1, 2, 3], "K^-3/4 (2/3)^3 5 (l+1)^2/l^2 K2 K3 c(|w|) 5/|w| <= 1"),
            r("bdk2", Exactly(1), 2, &[3], "K^-1 3/8 (l+1)^2/l^2 K2 K3 c(3) 5 <= 1"),
            r("bdk3", AtLeast(3), 1, &[0, 1, 2, 3], "K^-1 3 2 K2 n/(2n+|w|-4) [K0 Kt] <= 1"),
            r("bdk34", Exactly(2), 1, &[1, 2, 3], "K^-3/4 6 K2 2 [K0'' Kt] <= 1"),
            r("bdk32", Exactly(1), 2, &[3], "K^-3/4 6 K2 [K0'' Kt] <= 1"),
            r("bdk4", AtLeast(3), 1, &[0, 1, 2, 3], "K2 (5 K3 (n/(n+1))^3 c(|w|)(2n+1)(l+1)^2/((2n+|w|-4) l^2) + 6n/(2n+|w|-4) [K0 Kt]) <= K"),
            r("bdk5", Exactly(2), 1, &[1, 2, 3], "K2 (25 (2/3)^3 K3 c(|w|)(l+1)^2/(|w| l^2) + 12 (2/|w|) [K0'' Kt]) <= K^3/4"),
            r("bdk6", Exactly(1), 2, &[3], "K2 (5 3/8 K3 c(3)(l+1)^2/l^2 K^-1/4 + 6 [K0'' Kt]) <= K^3/4"),
            r("bdke", Exactly(3), 1, &[0, 1, 2, 3], "{5 K3 (3/4)^3 7 c(|w|)(l+1)^2/l^2 + 18 [case ii]} K2/(2+|w|) <= K"),
            r("bdk8", Exactly(2), 1, &[0], "K^-1 6 K2 K3 C(6,2) 2^4/(2 3^4) (l+1)^2/l^2 <= 1"),
            r("bdk9", Exactly(2), 1, &[0], "16 K0'' K1 <= K"),
            r("bdk10", Exactly(2), 1, &[0], "K^-1 (6 K2 K3 C(6,2) 2^4/(2 3^4) (l+1)^2/l^2 + 16 K0'' K1) + 6 K^-1/4 <= 1"),
            r("bdk11", Exactly(2), 1, &[0], "K^-1 (2 K2 K3 C(6,2) 2^4/(2 3^4) (l+1)^2/l^2 + 16 K0'' K1) + 4 K^-1/4 <= 1"),
            r("bdk12", Exactly(2), 1, &[0], "K^-1 (2 K2 K3 C(6,2) 2^4/(2 3^4) (l+1)^2/l^2 + 16 K0'' K1) + 5 K^-1/4 <= 1"),
            r("bdk13", Exactly(1), 2, &[2], "K^-5/4 K2 K3 36 (l+1)^2/l^2 <= 1"),
            r("bdk15", Exactly(1), 2, &[2], "K^-5/4 K2 K3 36 (l+1)^2/l^2 + 8 K^-1 (2 K0'' K1' + K0'' K1) <= 1"),
            r("bdk16", Exactly(1), 2, &[1, 2], "2 K^-1/4 + K^-5/4 K2 K3 12 (l+1)^2/l^2 + 8 K^-1 (2 K0'' K1' + K0'' K1) <= 1"),
            r("bdk17", Exactly(1), 2, &[0], "4 K0'' K1 <= K"),
            r("bdk18", Exactly(1), 2, &[0], "K^-1/4 + K^-5/4 K2 K3 6 (l+1)^2/l^2 + K^-1 (1/2 9/2^4 (l+1)^2/l^2 K2 K3 + 6 K0'' K1 + 8 K0'' K1') <= 1"),
            r("kal", Exactly(1), 2, &[0], "9/2^4 (l+1)^2/l^2 K2 K3 <= K"),
        ]
    }

    pub fn find(id: &str) -> Result<InequalityRecord> {
        Self::all()
            .into_iter()
            .find(|r| r.id == id)
            .ok_or_else(|| Error::Argument(format!("unknown inequality record `{id}`")))
    }

    pub fn admits(&self, n: u32, l: u32, w: u32) -> bool {
        let n_ok = match self.n {
            NRange::Exactly(k) => n == k,
            NRange::AtLeast(k) => n >= k,
        };
        n_ok && l >= self.l_min && self.w.contains(&w)
    }

    /// Σ a_i K^{−p_i} as (a_i, p_i); the record holds iff the sum is ≤ 1.
    pub fn terms(&self, n: u32, l: u32, w: u32, k: f64, c: &Constants) -> Result<Vec<(f64, f64)>> {
        if !self.admits(n, l, w) {
            return Err(Error::Domain(format!("{} does not apply at n = {n}, l = {l}, |w| = {w}", self.id)));
        }
        if !(k > 0.0) {
            return Err(Error::Domain(format!("K must be positive, got {k}")));
        }
        let (nf, wf) = (n as f64, w as f64);
        // n-dependent ratios, with their limits at n = N_INF.
        let (cube, odd, half) = if n == N_INF {
            (1.0, 1.0, 0.5)
        } else {
            ((nf / (nf + 1.0)).powi(3), (2.0 * nf + 1.0) / (2.0 * nf + wf - 4.0), nf / (2.0 * nf + wf - 4.0))
        };
        let r = ((l + 1) as f64 / l as f64).powi(2);
        let cw = c.c[w as usize];
        let kt = ktilde_order(w, false, c)?;
        let ktp = ktilde_order(w, true, c)?;
        let se = E.sqrt().recip();
        // Decomposed replacements for K0 Kt (n ≥ 3) and K0'' Kt (n ≤ 2).
        let case = |n: u32| -> Vec<(f64, f64)> {
            match n {
                1 => vec![(c.k0_second * kt, 0.0), (c.k0_second * (se + 1.0 / E) * ktp, 0.0), (c.k0_second * ktp, 0.25)],
                2 => vec![(2.0 * c.k0_second * kt, 0.0), (2.0 * c.k0_second * se * 2.0 * ktp, 0.25)],
                3 => vec![
                    (c.k0 / 2.0 * kt + c.k0_prime * kt + 2.0 * c.k0_second * kt, 0.0),
                    (c.k0_prime * 2.0 * se * ktp, 0.25),
                    (c.k0_prime * 2.0 / E * ktp, 0.5),
                    (2.0 * c.k0_second * (se + 1.0 / E) * ktp, 0.0),
                    (2.0 * c.k0_second * ktp, 0.25),
                ],
                _ => vec![
                    (c.k0 / 2.0 * kt + 2.0 * c.k0_prime * kt + 2.0 * c.k0_second * kt, 0.0),
                    (2.0 * c.k0_prime * 2.0 * se * ktp, 0.25),
                    (c.k0_second * (se + 1.0 / E) * ktp, 0.0),
                    (c.k0_second * ktp, 0.25),
                ],
            }
        };
        // Multiplies a bracket of (coef, extra power) pieces by `scale` K^{−p}.
        let scaled = |scale: f64, p: f64, pieces: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
            pieces.into_iter().map(|(a, extra)| (scale * a, p + extra)).collect()
        };
        let b = 6.0 * 15.0 * 16.0 / (2.0 * 81.0) * c.k2 * c.k3 * r;
        let b2 = b / 3.0;
        let (k2, k3) = (c.k2, c.k3);
        let mut t = Vec::new();
        match self.id {
            "bdk0" => t.push((cube * odd * r * k2 * k3 * cw * 5.0, 1.0)),
            "bdk1" => t.push(((2.0f64 / 3.0).powi(3) * 5.0 * r * k2 * k3 * cw * 5.0 / wf, 0.75)),
            "bdk2" => t.push((3.0 / 8.0 * r * k2 * k3 * c.c[3] * 5.0, 1.0)),
            "bdk3" => t.extend(scaled(6.0 * k2 * half, 1.0, case(n))),
            "bdk34" => t.extend(scaled(6.0 * k2 * 2.0, 0.75, case(2))),
            "bdk32" => t.extend(scaled(6.0 * k2, 0.75, case(1))),
            "bdk4" => {
                t.push((k2 * 5.0 * k3 * cube * cw * odd * r, 1.0));
                t.extend(scaled(k2 * 6.0 * half, 1.0, case(n)));
            }
            "bdk5" => {
                t.push((k2 * 25.0 * (2.0f64 / 3.0).powi(3) * k3 * cw * r / wf, 0.75));
                t.extend(scaled(k2 * 12.0 * 2.0 / wf, 0.75, case(2)));
            }
            "bdk6" => {
                t.push((k2 * 5.0 * 3.0 / 8.0 * k3 * c.c[3] * r, 1.0));
                t.extend(scaled(k2 * 6.0, 0.75, case(1)));
            }
            "bdke" => {
                let s = k2 / (2.0 + wf);
                t.push((s * 5.0 * k3 * 0.75f64.powi(3) * cw * 7.0 * r, 1.0));
                t.extend(scaled(s * 18.0, 1.0, case(3)));
            }
            "bdk8" => t.push((b, 1.0)),
            "bdk9" => t.push((16.0 * c.k0_second * c.k1, 1.0)),
            "bdk10" => t.extend([(b + 16.0 * c.k0_second * c.k1, 1.0), (6.0, 0.25)]),
            "bdk11" => t.extend([(b2 + 16.0 * c.k0_second * c.k1, 1.0), (4.0, 0.25)]),
            "bdk12" => t.extend([(b2 + 16.0 * c.k0_second * c.k1, 1.0), (5.0, 0.25)]),
            "bdk13" => t.push((k2 * k3 * 36.0 * r, 1.25)),
            "bdk15" => t.extend([
                (k2 * k3 * 36.0 * r, 1.25),
                (8.0 * (2.0 * c.k0_second * c.k1_prime + c.k0_second * c.k1), 1.0),
            ]),
            "bdk16" => t.extend([
                (2.0, 0.25),
                (k2 * k3 * 12.0 * r, 1.25),
                (8.0 * (2.0 * c.k0_second * c.k1_prime + c.k0_second * c.k1), 1.0),
            ]),
            "bdk17" => t.push((4.0 * c.k0_second * c.k1, 1.0)),
            "bdk18" => t.extend([
                (1.0, 0.25),
                (k2 * k3 * 6.0 * r, 1.25),
                (0.5 * 9.0 / 16.0 * r * k2 * k3 + 6.0 * c.k0_second * c.k1 + 8.0 * c.k0_second * c.k1_prime, 1.0),
            ]),
            "kal" => t.push((9.0 / 16.0 * r * k2 * k3, 1.0)),
            other => return Err(Error::Argument(format!("unknown inequality record `{other}`"))),
        }
        Ok(t)
    }
}

fn residual(terms: &[(f64, f64)], k: f64) -> f64 {
    terms.iter().map(|&(a, p)| a * k.powf(-p)).sum()
}

/// Left-hand side of the record in its "≤ 1" form; ≤ 1 means satisfied.
pub fn evaluate_constraint(record: &InequalityRecord, n: u32, l: u32, w: u32, k: f64, c: &Constants) -> Result<f64> {
    let terms = record.terms(n, l, w, k, c)?;
    Ok(residual(&terms, k))
}

/// Smallest K with residual ≤ 1, by bisection in log K. The coefficients of
/// the decomposition factors depend on K only through the exponents, so the
/// terms are built once.
pub fn implied_bound(record: &InequalityRecord, n: u32, l: u32, w: u32, c: &Constants) -> Result<f64> {
    let terms = record.terms(n, l, w, 1.0, c)?;
    let (mut lo, mut hi) = (-40.0f64, 120.0f64);
    if residual(&terms, lo.exp()) <= 1.0 {
        return Ok(lo.exp());
    }
    if residual(&terms, hi.exp()) > 1.0 {
        return Err(Error::NonConvergence(format!("{} needs K > e^120", record.id)));
    }
    while hi - lo > 1e-14 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if residual(&terms, mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

/// Which records enter the fixpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scope {
    All,
    Only(Vec<String>),
}

impl Scope {
    pub fn parse(s: &str) -> Result<Scope> {
        if s.trim() == "all" {
            return Ok(Scope::All);
        }
        let ids: Vec<String> = s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
        for id in &ids {
            InequalityRecord::find(id)?;
        }
        if ids.is_empty() {
            return Err(Error::Argument("empty record scope".into()));
        }
        Ok(Scope::Only(ids))
    }

    pub fn includes(&self, id: &str) -> bool {
        match self {
            Scope::All => true,
            Scope::Only(ids) => ids.iter().any(|x| x == id),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub constants: Constants,
    pub n_cap: u32,
    pub l_cap: u32,
    pub scope: Scope,
    /// Registration order; a permutation must not change K*.
    pub records: Vec<InequalityRecord>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { constants: Constants::published(), n_cap: 50, l_cap: 50, scope: Scope::All, records: InequalityRecord::all() }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cap < 10 || self.l_cap < 10 {
            return Err(Error::Argument(format!(
                "parameter caps must be at least 10 (got N_cap = {}, L_cap = {})",
                self.n_cap, self.l_cap
            )));
        }
        if !self.records.iter().any(|r| self.scope.includes(r.id)) {
            return Err(Error::Argument("no inequality record in scope".into()));
        }
        Ok(())
    }

    fn active(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.records.iter().filter(|r| self.scope.includes(r.id))
    }

    fn cases(&self, r: &InequalityRecord) -> Vec<(u32, u32, u32)> {
        let ns: Vec<u32> = match r.n {
            NRange::Exactly(k) => vec![k],
            NRange::AtLeast(k) => (k..=self.n_cap).chain([N_INF]).collect(),
        };
        let mut out = Vec::new();
        for &n in &ns {
            for l in r.l_min..=self.l_cap {
                for &w in r.w {
                    out.push((n, l, w));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case {
    pub n: u32,
    pub l: u32,
    pub w: u32,
}

/// Arg-sup of the implied bound of one record over its parameter range.
/// Unbounded n ranges include the n → ∞ limit. Fails when the sup sits on a
/// finite cap, since the cap may then truncate it.
pub fn supremum_over_parameters(record: &InequalityRecord, cfg: &ChainConfig) -> Result<(Case, f64)> {
    cfg.validate()?;
    let mut best: Option<(Case, f64)> = None;
    for (n, l, w) in cfg.cases(record) {
        let k = implied_bound(record, n, l, w, &cfg.constants)?;
        if best.map_or(true, |b| k > b.1 * (1.0 + 1e-12)) {
            best = Some((Case { n, l, w }, k));
        }
    }
    let (case, k) = best.ok_or_else(|| Error::Domain(format!("{} has an empty parameter range", record.id)))?;
    let n_at_cap = matches!(record.n, NRange::AtLeast(_)) && case.n == cfg.n_cap;
    if n_at_cap || case.l == cfg.l_cap {
        return Err(Error::Range(format!(
            "sup of {} attained at the cap (n = {}, l = {}); widen the caps and retry",
            record.id, case.n, case.l
        )));
    }
    Ok((case, k))
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordRow {
    pub id: String,
    pub display: String,
    pub argmax: Case,
    /// Smallest K satisfying this record on its whole range.
    pub implied_bound: f64,
    /// Residual at K* for the arg-max parameters (≤ 1 when satisfied).
    pub residual_at_k_star: f64,
    pub binding: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainResult {
    pub k_star: f64,
    pub binding: String,
    pub binding_case: Case,
    pub iterations: usize,
    pub ktilde: f64,
    pub ktilde_prime: f64,
    pub table: Vec<RecordRow>,
}

/// Fixpoint K ← sup over records and parameters of K·residual(K)^{1/p_max},
/// started from K = 1. Each map is non-decreasing with its root as the only
/// fixed point, so the iteration rises monotonically to the largest root.
pub fn minimal_k(cfg: &ChainConfig) -> Result<ChainResult> {
    cfg.validate()?;
    let c = &cfg.constants;
    let mut terms = Vec::new();
    for r in cfg.active() {
        for (n, l, w) in cfg.cases(r) {
            let t = r.terms(n, l, w, 1.0, c)?;
            let p_max = t.iter().fold(0.0f64, |a, x| a.max(x.1));
            terms.push((r.id, Case { n, l, w }, t, p_max));
        }
    }
    let mut k = 1.0f64;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next = terms
            .par_iter()
            .map(|(_, _, t, p)| k * residual(t, k).powf(1.0 / p))
            .reduce(|| 0.0, f64::max)
            .max(k);
        let change = (next - k).abs() / next;
        k = next;
        if change < 1e-10 {
            break;
        }
        if iterations >= 10_000 {
            return Err(Error::NonConvergence(format!("constant chain did not converge (K = {k:e}, last change {change:e})")));
        }
    }
    let mut table = Vec::new();
    for r in cfg.active() {
        let (case, bound) = supremum_over_parameters(r, cfg)?;
        table.push(RecordRow {
            id: r.id.to_string(),
            display: r.display.to_string(),
            argmax: case,
            implied_bound: bound,
            residual_at_k_star: evaluate_constraint(r, case.n, case.l, case.w, k, c)?,
            binding: false,
        });
    }
    let top = table
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |b, (i, row)| if row.implied_bound > b.1 { (i, row.implied_bound) } else { b })
        .0;
    table[top].binding = true;
    let binding = table[top].id.clone();
    let binding_case = table[top].argmax;
    Ok(ChainResult {
        k_star: k,
        binding,
        binding_case,
        iterations,
        ktilde: ktilde_order(3, false, c)?,
        ktilde_prime: ktilde_order(3, true, c)?,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ktilde_by_enumeration() {
        let c = Constants::published();
        assert_eq!(ktilde_multiplicities(MultiIndex([3, 0, 0, 0])), [8, 12, 6, 1]);
        assert_eq!(ktilde_multiplicities(MultiIndex([1, 1, 1, 0])), [8, 12, 6, 1]);
        assert_eq!(ktilde_multiplicities(MultiIndex([2, 1, 0, 0])), [8, 12, 6, 1]);
        assert_eq!(ktilde_multiplicities(MultiIndex([1, 0, 0, 0])), [2, 1, 0, 0]);
        assert_eq!(ktilde_multiplicities(MultiIndex([0, 0, 0, 0])), [1, 0, 0, 0]);
        assert!((ktilde_order(3, false, &c).unwrap() - 606.8).abs() < 1e-12);
        assert!((ktilde_order(3, true, &c).unwrap() - 1377.0).abs() < 1e-12);
        assert_eq!(ktilde_order(0, false, &c).unwrap(), 6.2);
        assert!(ktilde_order(4, false, &c).is_err());
    }

    #[test]
    fn bdk0_spot_value() {
        let c = Constants::published();
        let r = InequalityRecord::find("bdk0").unwrap();
        let v = evaluate_constraint(&r, 3, 1, 0, 100.0, &c).unwrap();
        let hand = 27.0 / 64.0 * 7.0 * 4.0 * 6.2 / 3.0 * 2.5 / 100.0;
        assert!((v - hand).abs() < 1e-14 && (v - 0.610).abs() < 1e-3);
        assert!(evaluate_constraint(&r, 3, 1, 0, 1e300, &c).unwrap() < 1e-290);
        assert!(evaluate_constraint(&r, 2, 1, 0, 100.0, &c).is_err());
    }

    #[test]
    fn bdke_reproduces_the_published_scale() {
        let c = Constants::published();
        let r = InequalityRecord::find("bdke").unwrap();
        let k = implied_bound(&r, 3, 1, 3, &c).unwrap();
        assert!(k > 5.9e5 && k < 6.5e5, "{k}");
        assert!(evaluate_constraint(&r, 3, 1, 3, 6.2e5, &c).unwrap() <= 1.0);
        // bdk4 at n = 3 is the same inequality.
        let r4 = InequalityRecord::find("bdk4").unwrap();
        for w in 0..=3 {
            let a = evaluate_constraint(&r, 3, 2, w, 1e6, &c).unwrap();
            let b = evaluate_constraint(&r4, 3, 2, w, 1e6, &c).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn fixpoint_matches_largest_root() {
        let cfg = ChainConfig { scope: Scope::parse("bdke").unwrap(), ..Default::default() };
        let res = minimal_k(&cfg).unwrap();
        assert_eq!(res.binding, "bdke");
        assert_eq!(res.binding_case, Case { n: 3, l: 1, w: 3 });
        assert!((res.k_star - res.table[0].implied_bound).abs() < 1e-8 * res.k_star);
        let full = minimal_k(&ChainConfig::default()).unwrap();
        for row in &full.table {
            assert!(row.residual_at_k_star <= 1.0 + 1e-9, "{row:?}");
            assert!(row.implied_bound <= full.k_star * (1.0 + 1e-9));
        }
    }

    #[test]
    fn perturbation_permutation_and_ablation() {
        let base = minimal_k(&ChainConfig::default()).unwrap();
        let mut c = Constants::published();
        c.perturb("K2=+10%").unwrap();
        let raised = minimal_k(&ChainConfig { constants: c, ..Default::default() }).unwrap();
        assert!(raised.k_star > base.k_star);

        let mut shuffled = ChainConfig::default();
        shuffled.records.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
        let again = minimal_k(&shuffled).unwrap();
        assert_eq!(again.k_star, base.k_star);
        assert_eq!(again.binding, base.binding);

        let mut ablated = ChainConfig::default();
        ablated.records.retain(|r| r.id != base.binding);
        assert!(minimal_k(&ablated).unwrap().k_star < base.k_star);
    }

    #[test]
    fn sup_sits_at_small_parameters() {
        let cfg = ChainConfig::default();
        for r in InequalityRecord::all() {
            let (case, _) = supremum_over_parameters(&r, &cfg).unwrap();
            assert_eq!(case.l, r.l_min, "{}", r.id);
            if let NRange::AtLeast(k) = r.n {
                assert!(case.n == k || case.n == N_INF, "{}", r.id);
            }
        }
        let small = ChainConfig { n_cap: 5, ..Default::default() };
        assert!(minimal_k(&small).is_err());
        assert!(Scope::parse("bdk99").is_err());
    }
}
