use super::*;
use crate::model::make_family;
use crate::oracle::{bubble_l1, tadpole_l1};

fn small(max_loop: usize) -> SolverConfig {
    SolverConfig {
        lambda0: 20.0,
        max_loop,
        points_per_decade: 8,
        radial_points: 40,
        angular_points: 16,
        four_point_p: vec![0.0, 1.0],
        four_point_q: vec![0.0, 1.0],
        four_point_cos: vec![0.0, 1.0],
        tree_pair_norms: vec![0.0, 1.0],
        kernel_p_points: 64,
        kernel_per_decade: 16,
        inner_k_points: 24,
        inner_cos_points: 5,
        ..Default::default()
    }
}

#[test]
fn rejects_bad_configs() {
    let mut c = SolverConfig::default();
    c.max_loop = 3;
    assert!(matches!(FlowSolver::new(c), Err(Error::Unsupported(_))));
    let mut c = SolverConfig::default();
    c.two_point_grid = vec![0.0, 1.0];
    assert!(matches!(FlowSolver::new(c), Err(Error::Config(_))));
    let mut c = SolverConfig::default();
    c.lambda0 = -1.0;
    assert!(FlowSolver::new(c).is_err());
}

#[test]
fn lambda_grid_shape() {
    let g = SolverConfig::default().lambda_grid();
    assert_eq!(g[0], 0.0);
    assert!((g[1] - 0.02).abs() < 1e-15);
    assert_eq!(*g.last().unwrap(), 100.0);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn one_loop_two_point_matches_tadpole() {
    let solver = FlowSolver::new(small(1)).unwrap();
    let sol = solver.solve().unwrap();
    let table = sol.table(1, 1).unwrap();
    for (i, &l) in sol.grid.iter().enumerate() {
        let s = FlowScales::new(l, 20.0, 1.0).unwrap();
        let exact = tadpole_l1(&s, 1.0).unwrap().value;
        let got = table.values[0][i];
        let floor = 1e-15 / 24.0;
        assert!((got - exact).abs() <= 1e-6 * exact.abs() + floor, "Λ = {l}: {got} vs {exact}");
        if l > 0.3 {
            assert!(got < 0.0);
        }
    }
    assert_eq!(sol.counterterms.b[1], 0.0);
    for r in &sol.residuals {
        assert!(r.value.abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn one_loop_four_point_matches_bubble() {
    let solver = FlowSolver::new(small(1)).unwrap();
    let sol = solver.solve().unwrap();
    let cfg = make_family("four-point", &[0.8, 1.3, 0.4]).unwrap();
    let out = solver.four_point_l1_at(&sol, &[cfg.clone()]).unwrap();
    for (i, &l) in sol.grid.iter().enumerate() {
        if i % 5 != 0 {
            continue;
        }
        let s = FlowScales::new(l, 20.0, 1.0).unwrap();
        let exact = bubble_l1(&cfg, &s, 1.0).unwrap().value;
        let got = out[0].0[i];
        assert!((got - exact).abs() <= 1e-5 * exact.abs() + 1e-9, "Λ = {l}: {got} vs {exact}");
    }
}

#[test]
fn tables_are_consistent() {
    let solver = FlowSolver::new(small(1)).unwrap();
    let sol = solver.solve().unwrap();
    // Trees agree with direct evaluation.
    let t = sol.table(3, 0).unwrap();
    for idx in 0..t.node_count() {
        let cfg = t.node_config(idx).unwrap();
        for (i, &l) in t.lambdas.iter().enumerate() {
            let s = FlowScales::new(l, 20.0, 1.0).unwrap();
            assert_eq!(t.values[idx][i], tree_cag(&cfg, &s, 1.0).unwrap());
        }
    }
    // Stored slopes integrate to the stored values: Simpson's rule in log Λ where
    // the e^{−m²/Λ²} onset is resolved.
    let f = sol.table(2, 1).unwrap();
    let ht = (f.lambdas[2] / f.lambdas[1]).ln();
    for idx in 0..f.node_count() {
        let (v, d) = (&f.values[idx], &f.slopes[idx]);
        let g = |i: usize| f.lambdas[i] * d[i];
        let floor = 1e-9 * v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 2..f.lambdas.len() - 1 {
            if f.lambdas[i - 1] < 0.5 {
                continue;
            }
            let simpson = ht / 3.0 * (g(i - 1) + 4.0 * g(i) + g(i + 1));
            let diff = v[i + 1] - v[i - 1];
            let scale = g(i - 1).abs().max(g(i).abs()).max(g(i + 1).abs()) * ht;
            assert!((diff - simpson).abs() <= 1e-2 * scale + floor, "node {idx}, Λ index {i}: {diff} {simpson}");
        }
    }
    // L(p, q, c) = L(q, p, c).
    let n = f.axes[0].len();
    let nc = f.axes[2].len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..nc {
                let x = &f.values[(a * n + b) * nc + c];
                let y = &f.values[(b * n + a) * nc + c];
                for i in 0..x.len() {
                    assert!((x[i] - y[i]).abs() <= 1e-7 * x[i].abs().max(1e-12));
                }
            }
        }
    }
}

#[test]
fn evaluate_interpolates_and_guards_range() {
    let solver = FlowSolver::new(small(1)).unwrap();
    let sol = solver.solve().unwrap();
    let node = make_family("four-point", &[1.0, 0.0, 1.0]).unwrap();
    let t = sol.table(2, 1).unwrap();
    let idx = (0..t.node_count()).find(|&i| t.node_params(i) == vec![1.0, 0.0, 1.0]).unwrap();
    let i = 7;
    let v = sol.evaluate(2, 1, &node, sol.grid[i]).unwrap();
    assert!((v - t.values[idx][i]).abs() <= 1e-14 * v.abs());
    let flipped = make_family("four-point", &[1.0, 1.0, -0.5]).unwrap();
    assert!(sol.evaluate(2, 1, &flipped, 1.0).is_ok());
    let far = make_family("four-point", &[3.0, 1.0, 0.5]).unwrap();
    assert!(matches!(sol.evaluate(2, 1, &far, 1.0), Err(Error::Range(_))));
    assert!(matches!(sol.evaluate(2, 1, &node, 30.0), Err(Error::Range(_))));
    assert!(matches!(sol.evaluate(1, 2, &make_family("antipodal-pair", &[1.0]).unwrap(), 1.0), Err(Error::Unsupported(_))));
}

#[test]
fn two_loop_scheme() {
    let solver = FlowSolver::new(small(2)).unwrap();
    let sol = solver.solve().unwrap();
    // Reads are computed earlier and precede in (ascending n + l, descending n).
    for (i, d) in sol.dependencies.iter().enumerate() {
        for &(n, l) in &d.reads {
            assert!(sol.dependencies[..i].iter().any(|e| e.n == n && e.l == l), "{d:?}");
            assert!(n + l < d.n + d.l || (n + l == d.n + d.l && n > d.n), "{d:?}");
        }
    }
    for r in &sol.residuals {
        assert!(r.value.abs() < 1e-12, "{r:?}");
    }
    assert_eq!(sol.counterterms.c[2], None);
    let t = sol.table(1, 2).unwrap();
    assert_eq!(t.values[0][0], 0.0);
    let p = make_family("antipodal-pair", &[1.0]).unwrap();
    let v = sol.evaluate(1, 2, &p, 0.0).unwrap();
    assert!(v.is_finite());
}
