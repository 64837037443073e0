//! Acceptance criteria 1–6, run without the libtest harness so that the
//! PASS/FAIL line of each criterion is always printed. The run fails if the
//! set of failing criteria, or the failing checks inside them, differs from
//! the documented list below.

use std::collections::BTreeSet;
use std::time::Instant;

use flowlab::chain::{ktilde_multiplicities, ktilde_order, minimal_k, ChainConfig, Scope};
use flowlab::cli::{certify_lemmas, oracle_compare, renormalization_checks, solve, verify_bounds};
use flowlab::config::RunConfig;
use flowlab::constants::Constants;
use flowlab::model::MultiIndex;

/// Criteria that fail with the published constants, and why.
const EXPECTED_FAILURES: [(u32, &str); 2] = [
    (1, "the printed two- and four-point records (bdk34, bdk5, bdk6, bdk32) need K of order 1e7"),
    (2, "Lemma 6 b constants Kw1, Kw2, Kw3, Kw1', Kw2' and the drift of K1' fall outside the window"),
];

/// Lemma checks expected to fail inside criterion 2.
const EXPECTED_LEMMA_FAILURES: [&str; 6] =
    ["lemma6.Kw1", "lemma6.Kw2", "lemma6.Kw3", "lemma6.Kw1'", "lemma6.Kw2'", "lemma7.K1'"];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let c = Constants::published();
    let single = MultiIndex([3, 0, 0, 0]);
    let kt = ktilde_order(3, false, &c).unwrap();
    let ktp = ktilde_order(3, true, &c).unwrap();
    let factors = ktilde_multiplicities(single) == [8, 12, 6, 1]
        && (kt - 606.8).abs() <= 1e-12 * 606.8
        && (ktp - 1377.0).abs() <= 1e-12 * 1377.0;
    let t = Instant::now();
    let full = minimal_k(&ChainConfig::default());
    let secs = t.elapsed().as_secs_f64();
    let bdke = minimal_k(&ChainConfig { scope: Scope::parse("bdke").unwrap(), ..Default::default() }).unwrap();
    match full {
        Ok(r) => {
            let b = r.binding_case;
            let in_window = (5.9e5..=6.5e5).contains(&r.k_star);
            let binding = r.binding == "bdke" && (b.n, b.l, b.w) == (3, 1, 3);
            Outcome {
                id: 1,
                name: "constant reproduction",
                pass: factors && in_window && binding && secs < 5.0,
                detail: format!(
                    "K* = {:.4e} binding {} at (n, l, |w|) = ({}, {}, {}), {secs:.2} s; \
                     K tilde = {kt}, K tilde' = {ktp}; bdke alone gives {:.4e}",
                    r.k_star, r.binding, b.n, b.l, b.w, bdke.k_star
                ),
            }
        }
        Err(e) => Outcome { id: 1, name: "constant reproduction", pass: false, detail: format!("error: {e}") },
    }
}

fn criterion_2(cfg: &RunConfig) -> (Outcome, Vec<String>) {
    let t = Instant::now();
    let run = certify_lemmas(cfg, None).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let detail = format!("{} checks, {} failed {:?}, {secs:.1} s", run.reports.len(), run.failures.len(), run.failures);
    (Outcome { id: 2, name: "lemma suite", pass: run.pass && secs < 60.0, detail }, run.failures)
}

fn main() {
    let cfg = RunConfig::default();
    let mut outcomes = vec![criterion_1()];
    let (c2, lemma_failures) = criterion_2(&cfg);
    outcomes.push(c2);

    let t = Instant::now();
    let (solver, sol) = solve(&cfg).unwrap();
    let solve_secs = t.elapsed().as_secs_f64();
    let oracle = oracle_compare(&cfg, &solver, &sol).unwrap();
    outcomes.push(Outcome {
        id: 3,
        name: "oracle equivalence",
        pass: oracle.tadpole.pass && oracle.tree.pass && oracle.bubble.pass,
        detail: format!(
            "tadpole {:.2e} over {} Λ, tree {:.2e} over {} configurations, bubble {:.2e} over {} points",
            oracle.tadpole.max_rel_error,
            oracle.tadpole.points,
            oracle.tree.max_rel_error,
            oracle.tree.points,
            oracle.bubble.max_rel_error,
            oracle.bubble.points
        ),
    });

    let renorm = renormalization_checks(&sol);
    let worst = renorm.iter().map(|r| r.value.abs() / r.tolerance).fold(0.0, f64::max);
    outcomes.push(Outcome {
        id: 4,
        name: "renormalization conditions",
        pass: renorm.len() >= 5 && renorm.iter().all(|r| r.pass),
        detail: format!("{} conditions up to l = 2, worst |residual|/tolerance {worst:.2e}, solve {solve_secs:.1} s", renorm.len()),
    });

    let bounds = verify_bounds(&cfg, &sol, 6.2e5).unwrap();
    let vacuous = verify_bounds(&cfg, &sol, 1e-3).unwrap();
    let worst = bounds.checks.iter().map(|c| c.report.computed).fold(0.0, f64::max);
    outcomes.push(Outcome {
        id: 5,
        name: "bound satisfaction",
        pass: bounds.pass && !vacuous.pass,
        detail: format!(
            "{} tables, worst |L|/bound {worst:.3e} at K = 6.2e5; K = 1e-3 gives {} violations",
            bounds.checks.len(),
            vacuous.checks.iter().map(|c| c.violations).sum::<usize>()
        ),
    });

    let lg = &oracle.log_growth;
    outcomes.push(Outcome {
        id: 6,
        name: "log-growth property",
        pass: lg.pass,
        detail: format!(
            "c0 = {:.4e}, c1 = {:.4e}, max relative residual {:.3}% over {} points, Λ0 = {:e}",
            lg.fit.c0,
            lg.fit.c1,
            100.0 * lg.fit.residual,
            lg.samples.len(),
            lg.lambda0
        ),
    });

    for o in &outcomes {
        println!("criterion {} ({}): {}: {}", o.id, o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: BTreeSet<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let expected: BTreeSet<u32> = EXPECTED_FAILURES.iter().map(|e| e.0).collect();
    for (id, why) in EXPECTED_FAILURES {
        if failed.contains(&id) {
            println!("criterion {id} fails as documented: {why}");
        }
    }
    assert_eq!(failed, expected, "failing criteria differ from the documented list");
    let lemma_failures: BTreeSet<&str> = lemma_failures.iter().map(|s| s.as_str()).collect();
    assert_eq!(lemma_failures, EXPECTED_LEMMA_FAILURES.into_iter().collect(), "lemma failures changed");
}
