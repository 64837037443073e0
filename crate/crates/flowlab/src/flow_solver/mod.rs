//! Numerical integration of the perturbative flow hierarchy for loop order ≤ 2.
//!
//! Amplitudes are tabulated per momentum node as functions of Λ. Irrelevant
//! amplitudes start from zero at Λ0; relevant ones start from counterterm
//! values that are fixed afterwards by the renormalization conditions at Λ = 0.
//! Since each right-hand side depends on lower orders only, every component is
//! linear in the unknown counterterms, which are found by a linear solve.

pub mod rhs;
pub mod series;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{cubic_stencil, hermite, locate, multilinear};
use crate::model::{family_config, FamilyKind, FlowScales, MomentumConfig};
use crate::ode::Tolerances;
use crate::quadrature::{gauss_legendre, LoopQuadrature};
use crate::tree::tree_cag;

use rhs::{bilinear_term, loop_term_axial, ExactKernel, LoopPlan, ShiftKernel, TabulatedKernel};
use series::{integrate_node, NodeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub m: f64,
    pub lambda0: f64,
    pub coupling: f64,
    pub max_loop: usize,
    /// Smallest positive grid scale in units of m.
    pub lambda_min: f64,
    pub points_per_decade: usize,
    pub radial_points: usize,
    pub angular_points: usize,
    pub cutoff_factor: f64,
    pub rtol: f64,
    /// |p| nodes of the two-point tables; must contain 0, h and 2h.
    pub two_point_grid: Vec<f64>,
    pub four_point_p: Vec<f64>,
    pub four_point_q: Vec<f64>,
    pub four_point_cos: Vec<f64>,
    /// |p_i| nodes of the six- and eight-point tree tables.
    pub tree_pair_norms: Vec<f64>,
    /// Step in p² of the Richardson derivative at p = 0.
    pub richardson_h: f64,
    pub kernel_p_points: usize,
    pub kernel_per_decade: usize,
    pub inner_k_points: usize,
    pub inner_cos_points: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            m: 1.0,
            lambda0: 100.0,
            coupling: 1.0,
            max_loop: 2,
            lambda_min: 0.02,
            points_per_decade: 16,
            radial_points: 64,
            angular_points: 24,
            cutoff_factor: 8.0,
            rtol: 1e-8,
            two_point_grid: vec![0.0, 0.05f64.sqrt(), 0.1f64.sqrt(), 0.5, 1.0, 2.0, 4.0],
            four_point_p: vec![0.0, 0.5, 1.0, 2.0, 4.0],
            four_point_q: vec![0.0, 0.5, 1.0, 2.0, 4.0],
            four_point_cos: vec![0.0, 0.5, 1.0],
            tree_pair_norms: vec![0.0, 1.0, 2.0],
            richardson_h: 0.05,
            kernel_p_points: 96,
            kernel_per_decade: 32,
            inner_k_points: 44,
            inner_cos_points: 9,
        }
    }
}

fn ascending(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite() || *x < 0.0) || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("`{name}` must be a non-empty ascending list of non-negative numbers")));
    }
    Ok(())
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("lambda0", self.lambda0),
            ("lambda_min", self.lambda_min),
            ("cutoff_factor", self.cutoff_factor),
            ("rtol", self.rtol),
            ("richardson_h", self.richardson_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")));
            }
        }
        if !self.coupling.is_finite() {
            return Err(Error::Config("`coupling` must be finite".into()));
        }
        if self.max_loop > 2 {
            return Err(Error::Unsupported(format!("loop order {} (the solver stops at 2)", self.max_loop)));
        }
        if self.lambda_min * self.m >= self.lambda0 {
            return Err(Error::Config("`lambda_min`·m must lie below `lambda0`".into()));
        }
        if self.points_per_decade == 0 || self.kernel_per_decade == 0 {
            return Err(Error::Config("grid densities must be positive".into()));
        }
        if self.radial_points < 4 || self.angular_points < 2 || self.kernel_p_points < 4 {
            return Err(Error::Config("quadrature and kernel grids are too coarse".into()));
        }
        if self.inner_k_points < 4 || self.inner_cos_points < 4 {
            return Err(Error::Config("inner four-point table needs at least 4 points per axis".into()));
        }
        ascending("two_point_grid", &self.two_point_grid)?;
        ascending("four_point_p", &self.four_point_p)?;
        ascending("four_point_q", &self.four_point_q)?;
        ascending("four_point_cos", &self.four_point_cos)?;
        ascending("tree_pair_norms", &self.tree_pair_norms)?;
        if self.four_point_cos.iter().any(|&c| c > 1.0) {
            return Err(Error::Config("`four_point_cos` must lie in [0, 1]".into()));
        }
        if self.four_point_p[0] != 0.0 || self.four_point_q[0] != 0.0 {
            return Err(Error::Config("four-point grids must start at 0".into()));
        }
        self.richardson_nodes()?;
        Ok(())
    }

    /// Indices of |p| = 0, √h and √(2h) in the two-point grid.
    fn richardson_nodes(&self) -> Result<[usize; 3]> {
        let h = self.richardson_h;
        let find = |p2: f64| {
            self.two_point_grid
                .iter()
                .position(|&p| (p * p - p2).abs() <= 1e-12 * h)
                .ok_or_else(|| Error::Config(format!("`two_point_grid` must contain |p| = √{p2}")))
        };
        Ok([find(0.0)?, find(h)?, find(2.0 * h)?])
    }

    /// {0} ∪ geometric grid from lambda_min·m to Λ0.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let lo = self.lambda_min * self.m;
        let decades = (self.lambda0 / lo).log10();
        let n = (decades * self.points_per_decade as f64).ceil() as usize + 1;
        let mut g = vec![0.0];
        for i in 0..n {
            let x = if i + 1 == n { self.lambda0 } else { lo * (self.lambda0 / lo).powf(i as f64 / (n - 1) as f64) };
            g.push(x);
        }
        g
    }
}

/// An amplitude L_{2n,l} on a tensor grid of family parameters times the Λ grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeTable {
    pub n: usize,
    pub l: usize,
    pub family: FamilyKind,
    pub axis_names: Vec<String>,
    pub axes: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    /// values[node][i] at Λ = lambdas[i]; nodes are row-major over the axes.
    pub values: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
}

impl AmplitudeTable {
    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn node_params(&self, mut idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            out[d] = axis[idx % axis.len()];
            idx /= axis.len();
        }
        out
    }

    pub fn node_config(&self, idx: usize) -> Result<MomentumConfig> {
        family_config(self.family, &self.node_params(idx))
    }

    fn interpolate(&self, params: &[f64], lambda: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (idx, w) in multilinear(&self.axes, params)? {
            acc += w * hermite(&self.lambdas, &self.values[idx], &self.slopes[idx], lambda)?;
        }
        Ok(acc)
    }
}

/// Counterterms at Λ0: L_{2,l} = (a_l + b_l p²)/2 and L_{4,l} = c_l/4!.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counterterms {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// c_2 is not fixed by the conditions solved here.
    pub c: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub order: usize,
    pub condition: String,
    pub value: f64,
    /// Largest magnitude among the terms that cancel in `value`.
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// Amplitude (n, l) and the amplitudes its right-hand side read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dependency {
    pub n: usize,
    pub l: usize,
    pub reads: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ode_steps: usize,
    pub nodes: usize,
    pub kernel_nodes: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub config: SolverConfig,
    pub grid: Vec<f64>,
    pub counterterms: Counterterms,
    pub residuals: Vec<Residual>,
    pub tables: Vec<AmplitudeTable>,
    pub dependencies: Vec<Dependency>,
    pub diagnostics: Diagnostics,
    /// L_{2,1} at p = 0 on the grid, the momentum-independent part.
    l21_values: Vec<f64>,
    l21_slopes: Vec<f64>,
}

impl Solution {
    pub fn table(&self, n: usize, l: usize) -> Option<&AmplitudeTable> {
        self.tables.iter().find(|t| t.n == n && t.l == l)
    }

    fn l21(&self, p_sq: f64, lambda: f64) -> Result<f64> {
        Ok(hermite(&self.grid, &self.l21_values, &self.l21_slopes, lambda)? + self.counterterms.b[1] * p_sq / 2.0)
    }

    /// L_{2n,l}(cfg; Λ). Trees are exact; loop amplitudes are interpolated.
    pub fn evaluate(&self, n: usize, l: usize, cfg: &MomentumConfig, lambda: f64) -> Result<f64> {
        if cfg.n() != n {
            return Err(Error::Argument(format!("{} legs given for a {}-point amplitude", cfg.legs(), 2 * n)));
        }
        if !(0.0..=self.config.lambda0).contains(&lambda) {
            return Err(Error::Range(format!("Λ = {lambda} outside [0, {}]", self.config.lambda0)));
        }
        if l > self.config.max_loop {
            return Err(Error::Unsupported(format!("loop order {l} was not solved")));
        }
        let s = FlowScales { lambda, lambda0: self.config.lambda0, m: self.config.m };
        let p = cfg.momenta();
        match (n, l) {
            (_, 0) => tree_cag(cfg, &s, self.config.coupling),
            (1, 1) => self.l21(p[0].norm_sq(), lambda),
            (1, 2) => self.table(1, 2).unwrap().interpolate(&[p[0].norm()], lambda),
            (2, 1) => {
                let pair = |a: usize, b: usize| (p[a] + p[b]).norm() <= 1e-12 * (1.0 + p[a].norm());
                if !(pair(0, 1) && pair(2, 3)) {
                    return Err(Error::Range("four-point table covers (p, −p, q, −q) only".into()));
                }
                let (pn, qn) = (p[0].norm(), p[2].norm());
                let c = if pn == 0.0 || qn == 0.0 { 0.0 } else { (p[0].dot(&p[2]) / (pn * qn)).abs().min(1.0) };
                self.table(2, 1).unwrap().interpolate(&[pn, qn, c], lambda)
            }
            _ => Err(Error::Unsupported(format!("L_{{{},{}}} is not tabulated", 2 * n, l))),
        }
    }
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::Argument(m) => Error::Argument(format!("{what}: {m}")),
        Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
        Error::Unsupported(m) => Error::Unsupported(format!("{what}: {m}")),
        Error::Range(m) => Error::Range(format!("{what}: {m}")),
        Error::NonConvergence(m) => Error::NonConvergence(format!("{what}: {m}")),
        Error::Config(m) => Error::Config(format!("{what}: {m}")),
        other => other,
    }
}

/// Solves M x = y by Gaussian elimination with partial pivoting.
fn solve_linear(mut m: Vec<Vec<f64>>, mut y: Vec<f64>) -> Result<Vec<f64>> {
    let n = y.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[piv][col] == 0.0 {
            return Err(Error::NonConvergence("singular renormalization system".into()));
        }
        m.swap(col, piv);
        y.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            y[r] -= f * y[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (y[r] - s) / m[r][r];
    }
    Ok(x)
}

/// Unknown-coefficient rows: row[0] is the constant part, row[1..] multiply x.
fn residual_of(row: &[f64], x: &[f64]) -> (f64, f64) {
    let mut value = row[0];
    let mut scale = row[0].abs();
    for (r, xi) in row[1..].iter().zip(x) {
        value += r * xi;
        scale = scale.max((r * xi).abs());
    }
    (value, scale)
}

/// Richardson estimate of ∂_{p²} at p = 0 from values at p² = 0, h, 2h.
fn richardson(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    let d1 = (f1 - f0) / h;
    let d2 = (f2 - f0) / (2.0 * h);
    2.0 * d1 - d2
}

/// Hermite basis at one Λ, reused across many node series.
struct HermitePoint {
    i: usize,
    w: [f64; 4],
}

impl HermitePoint {
    fn new(grid: &[f64], lambda: f64) -> Result<Self> {
        let (i, t) = locate(grid, lambda)?;
        let h = grid[i + 1] - grid[i];
        let (t2, t3) = (t * t, t * t * t);
        Ok(HermitePoint {
            i,
            w: [2.0 * t3 - 3.0 * t2 + 1.0, (t3 - 2.0 * t2 + t) * h, -2.0 * t3 + 3.0 * t2, (t3 - t2) * h],
        })
    }

    fn eval(&self, v: &[f64], s: &[f64]) -> f64 {
        let i = self.i;
        self.w[0] * v[i] + self.w[1] * s[i] + self.w[2] * v[i + 1] + self.w[3] * s[i + 1]
    }
}

/// L_{4,1}(k, −k, p, −p) on (log(1 + k/m), |p| node, |cos|) for the two-loop two-point flow.
struct InnerFourPoint {
    u: Vec<f64>,
    cos: Vec<f64>,
    /// [p][k][c] → (values, slopes) over the Λ grid.
    series: Vec<(Vec<f64>, Vec<f64>)>,
    m: f64,
}

impl InnerFourPoint {
    fn slice(&self, p_index: usize, at: &HermitePoint) -> Vec<f64> {
        let per_p = self.u.len() * self.cos.len();
        self.series[p_index * per_p..(p_index + 1) * per_p].iter().map(|(v, s)| at.eval(v, s)).collect()
    }

    fn eval(&self, slice: &[f64], k: f64, c: f64) -> Result<f64> {
        let (iu, wu, ku) = cubic_stencil(&self.u, (1.0 + k / self.m).ln())?;
        let (ic, wc, kc) = cubic_stencil(&self.cos, c.abs().min(1.0))?;
        let nc = self.cos.len();
        let mut acc = 0.0;
        for a in 0..ku {
            for b in 0..kc {
                acc += wu[a] * wc[b] * slice[iu[a] * nc + ic[b]];
            }
        }
        Ok(acc)
    }
}

/// Absolute error allowance per interval, in units of rtol times the node's magnitude.
const ABS_FLOOR: f64 = 1e-3;

pub struct FlowSolver {
    pub config: SolverConfig,
    pub grid: Vec<f64>,
    quad: LoopQuadrature,
    exact: ExactKernel,
    tol: Tolerances,
    l21_plan: LoopPlan,
    gl: (Vec<f64>, Vec<f64>),
}

impl FlowSolver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.lambda_grid();
        let quad = LoopQuadrature::new(config.radial_points, config.angular_points, config.cutoff_factor);
        let exact = ExactKernel::new(quad.clone(), config.m, config.lambda0);
        let tol = Tolerances { rtol: config.rtol, ..Default::default() };
        let l21_plan = LoopPlan::for_tree(&MomentumConfig::zero(2)?, config.coupling)?;
        Ok(FlowSolver { config, grid, quad, exact, tol, l21_plan, gl: gauss_legendre(10) })
    }

    fn scales(&self) -> FlowScales {
        FlowScales { lambda: self.config.lambda0, lambda0: self.config.lambda0, m: self.config.m }
    }

    fn tree_provider(&self, lambda: f64) -> impl Fn(&MomentumConfig) -> Result<f64> + '_ {
        let s = self.scales().with_lambda(lambda);
        move |cfg| tree_cag(cfg, &s, self.config.coupling)
    }

    /// L_{2,1} without counterterms: boundary 0, momentum independent.
    fn l21_base(&self) -> Result<NodeSeries> {
        let s = self.scales();
        integrate_node(
            &self.grid,
            &[0.0],
            |l, d| {
                d[0] = self.l21_plan.eval(l, &s, &self.exact)?;
                Ok(())
            },
            self.tol,
            None,
        )
        .map_err(|e| with_context(e, "L(2,1)"))
    }

    /// L_{2,1} between grid nodes: the nearest lower node value plus a
    /// Gauss–Legendre integral of its flow, which is cheap and exact to rounding.
    fn l21_at(&self, values: &[f64], lambda: f64) -> Result<f64> {
        let (i, t) = locate(&self.grid, lambda)?;
        if t == 0.0 {
            return Ok(values[i]);
        }
        let s = self.scales();
        let lo = self.grid[i];
        let mut acc = 0.0;
        if lo > 0.0 {
            let (a, b) = (lo.ln(), lambda.ln());
            for (x, w) in self.gl.0.iter().zip(&self.gl.1) {
                let l = (0.5 * (a + b) + 0.5 * (b - a) * x).exp();
                acc += w * l * self.l21_plan.eval(l, &s, &self.exact)?;
            }
            acc *= 0.5 * (b - a);
        } else {
            for (x, w) in self.gl.0.iter().zip(&self.gl.1) {
                let l = 0.5 * lambda * (1.0 + x);
                acc += w * self.l21_plan.eval(l, &s, &self.exact)?;
            }
            acc *= 0.5 * lambda;
        }
        Ok(values[i] + acc)
    }

    /// L_{4,1} at one configuration with components [loop part, a_1, b_1, c_1].
    fn l41_components(&self, cfg: &MomentumConfig, l21: &[f64]) -> Result<NodeSeries> {
        let plan = LoopPlan::for_tree(cfg, self.config.coupling)?;
        let s = self.scales();
        integrate_node(
            &self.grid,
            &[0.0, 0.0, 0.0, 1.0 / 24.0],
            |l, d| {
                let tree = self.tree_provider(l);
                let base = self.l21_at(l21, l)?;
                d[0] = plan.eval(l, &s, &self.exact)?
                    + bilinear_term(1, cfg, l, &s, false, |lo, sub| if lo == 0 { tree(sub) } else { Ok(base) })?;
                d[1] = bilinear_term(1, cfg, l, &s, true, |lo, sub| if lo == 0 { tree(sub) } else { Ok(0.5) })?;
                d[2] = bilinear_term(1, cfg, l, &s, true, |lo, sub| {
                    if lo == 0 {
                        tree(sub)
                    } else {
                        Ok(0.5 * sub.momenta()[0].norm_sq())
                    }
                })?;
                d[3] = 0.0;
                Ok(())
            },
            self.tol,
            Some(ABS_FLOOR),
        )
    }

    /// Final L_{4,1} at one configuration given the renormalized two-point function.
    fn l41_final<K: ShiftKernel>(
        &self,
        cfg: &MomentumConfig,
        l21: &[f64],
        ct: &Counterterms,
        kernel: &K,
    ) -> Result<NodeSeries> {
        let plan = LoopPlan::for_tree(cfg, self.config.coupling)?;
        let s = self.scales();
        let (b1, c1) = (ct.b[1], ct.c[1].unwrap_or(0.0));
        integrate_node(
            &self.grid,
            &[c1 / 24.0],
            |l, d| {
                let tree = self.tree_provider(l);
                let base = self.l21_at(l21, l)?;
                d[0] = plan.eval(l, &s, kernel)?
                    + bilinear_term(1, cfg, l, &s, false, |lo, sub| {
                        if lo == 0 {
                            tree(sub)
                        } else {
                            Ok(base + 0.5 * b1 * sub.momenta()[0].norm_sq())
                        }
                    })?;
                Ok(())
            },
            self.tol,
            Some(ABS_FLOOR),
        )
    }

    fn tree_table(&self, n: usize, family: FamilyKind, axis_names: &[&str], axes: Vec<Vec<f64>>) -> Result<AmplitudeTable> {
        let mut table = AmplitudeTable {
            n,
            l: 0,
            family,
            axis_names: axis_names.iter().map(|s| s.to_string()).collect(),
            axes,
            lambdas: self.grid.clone(),
            values: vec![],
            slopes: vec![],
        };
        let count: usize = table.axes.iter().map(|a| a.len()).product();
        let s = self.scales();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
            .into_par_iter()
            .map(|idx| {
                let cfg = table.node_config(idx)?;
                let mut v = Vec::with_capacity(self.grid.len());
                let mut d = Vec::with_capacity(self.grid.len());
                for &l in &self.grid {
                    let tree = self.tree_provider(l);
                    v.push(tree(&cfg)?);
                    d.push(bilinear_term(0, &cfg, l, &s, false, |_, sub| tree(sub))?);
                }
                Ok((v, d))
            })
            .collect::<Result<_>>()?;
        for (v, d) in rows {
            table.values.push(v);
            table.slopes.push(d);
        }
        Ok(table)
    }

    fn four_point_axes(&self) -> Vec<Vec<f64>> {
        vec![self.config.four_point_p.clone(), self.config.four_point_q.clone(), self.config.four_point_cos.clone()]
    }

    pub fn solve(&self) -> Result<Solution> {
        let start = Instant::now();
        let cfg = &self.config;
        let mut diag = Diagnostics::default();
        let mut deps = Vec::new();
        let mut tables = Vec::new();

        // Trees.
        tables.push(self.tree_table(2, FamilyKind::FourPoint, &["|p|", "|q|", "cos"], self.four_point_axes())?);
        let pairs3 = vec![cfg.tree_pair_norms.clone(); 3];
        tables.push(self.tree_table(3, FamilyKind::Pairs, &["|p1|", "|p2|", "|p3|"], pairs3)?);
        let pairs4 = vec![cfg.tree_pair_norms.clone(); 4];
        tables.push(self.tree_table(4, FamilyKind::Pairs, &["|p1|", "|p2|", "|p3|", "|p4|"], pairs4)?);
        for n in 2..=4 {
            deps.push(Dependency { n, l: 0, reads: vec![] });
        }
        let mut ct = Counterterms { a: vec![0.0], b: vec![0.0], c: vec![Some(cfg.coupling)] };
        let mut residuals = Vec::new();
        let mut l21_values = vec![0.0; self.grid.len()];
        let mut l21_slopes = vec![0.0; self.grid.len()];

        let kernel = (cfg.max_loop >= 1).then(|| self.tabulated_kernel());
        diag.kernel_nodes = kernel.as_ref().map_or(0, |k| k.nodes());
        if cfg.max_loop >= 1 {
            // Order 1: components, then the 3×3 renormalization system.
            let base = self.l21_base()?;
            deps.push(Dependency { n: 1, l: 1, reads: vec![(2, 0)] });
            let base_series = base.combine(&[1.0], None);
            let zero4 = MomentumConfig::zero(4)?;
            let four = self.l41_components(&zero4, &base_series.0).map_err(|e| with_context(e, "L(4,1) at zero momenta"))?;
            diag.ode_steps += base.steps + four.steps;
            let rows = vec![
                vec![base.v0[0], 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 0.5, 0.0],
                four.v0.clone(),
            ];
            let m: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
            let y: Vec<f64> = rows.iter().map(|r| -r[0]).collect();
            let x = solve_linear(m, y)?;
            for (row, name) in rows.iter().zip(["L(2,1)(0; 0) = 0", "∂p² L(2,1)(0; 0) = 0", "L(4,1)(0; 0) = 0"]) {
                let (value, scale) = residual_of(row, &x);
                residuals.push(Residual { order: 1, condition: name.into(), value, scale });
            }
            ct.a.push(x[0]);
            ct.b.push(x[1]);
            ct.c.push(Some(x[2]));
            // Renormalized two-point function at p = 0, pinned to the condition.
            let (v, s) = base.combine(&[1.0], Some(0.0));
            l21_values = v;
            l21_slopes = s;
            let l21 = l21_values.clone();

            let mut two = AmplitudeTable {
                n: 1,
                l: 1,
                family: FamilyKind::AntipodalPair,
                axis_names: vec!["|p|".into()],
                axes: vec![cfg.two_point_grid.clone()],
                lambdas: self.grid.clone(),
                values: vec![],
                slopes: vec![],
            };
            for &p in &cfg.two_point_grid {
                two.values.push(l21.iter().map(|v| v + 0.5 * ct.b[1] * p * p).collect());
                two.slopes.push(l21_slopes.clone());
            }
            tables.push(two);

            let mut table = AmplitudeTable {
                n: 2,
                l: 1,
                family: FamilyKind::FourPoint,
                axis_names: vec!["|p|".into(), "|q|".into(), "cos".into()],
                axes: self.four_point_axes(),
                lambdas: self.grid.clone(),
                values: vec![],
                slopes: vec![],
            };
            let count: usize = table.axes.iter().map(|a| a.len()).product();
            let nodes: Vec<NodeSeries> = (0..count)
                .into_par_iter()
                .map(|idx| {
                    let c = table.node_config(idx)?;
                    self.l41_final(&c, &l21, &ct, kernel.as_ref().unwrap())
                        .map_err(|e| with_context(e, &format!("L(4,1) node {:?}", table.node_params(idx))))
                })
                .collect::<Result<_>>()?;
            for node in nodes {
                diag.ode_steps += node.steps;
                let (v, s) = node.combine(&[1.0], None);
                table.values.push(v);
                table.slopes.push(s);
            }
            diag.nodes += count + 2;
            let check = self.l41_final(&zero4, &l21, &ct, &self.exact)?;
            diag.ode_steps += check.steps;
            residuals.push(Residual {
                order: 1,
                condition: "L(4,1)(0; 0) = 0 from the final flow".into(),
                value: check.v0[0],
                scale: ct.c[1].unwrap().abs() / 24.0,
            });
            tables.push(table);
            deps.push(Dependency { n: 2, l: 1, reads: vec![(3, 0), (2, 0), (1, 1)] });
        }

        if cfg.max_loop >= 2 {
            let l21 = l21_values.clone();
            let (inner, steps) = self.inner_four_point(&l21, &ct, kernel.as_ref().unwrap())?;
            diag.ode_steps += steps;
            diag.nodes += inner.series.len();
            let s = self.scales();
            let b1 = ct.b[1];
            let nodes: Vec<NodeSeries> = cfg
                .two_point_grid
                .par_iter()
                .enumerate()
                .map(|(j, &p)| {
                    let cfg2 = family_config(FamilyKind::AntipodalPair, &[p])?;
                    integrate_node(
                        &self.grid,
                        &[0.0, 0.5, 0.5 * p * p],
                        |l, d| {
                            let at = HermitePoint::new(&self.grid, l)?;
                            let slice = inner.slice(j, &at);
                            let base = self.l21_at(&l21, l)?;
                            d[0] = loop_term_axial(&self.quad, &s, l, |k, c| inner.eval(&slice, k, c))?
                                + bilinear_term(2, &cfg2, l, &s, false, |_, sub| {
                                    Ok(base + 0.5 * b1 * sub.momenta()[0].norm_sq())
                                })?;
                            d[1] = 0.0;
                            d[2] = 0.0;
                            Ok(())
                        },
                        self.tol,
                        Some(ABS_FLOOR),
                    )
                    .map_err(|e| with_context(e, &format!("L(2,2) at |p| = {p}")))
                })
                .collect::<Result<_>>()?;
            diag.nodes += nodes.len();
            let [i0, i1, i2] = cfg.richardson_nodes()?;
            let h = cfg.richardson_h;
            let rows = vec![
                nodes[i0].v0.clone(),
                (0..3).map(|c| richardson(nodes[i0].v0[c], nodes[i1].v0[c], nodes[i2].v0[c], h)).collect::<Vec<_>>(),
            ];
            let m: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
            let y: Vec<f64> = rows.iter().map(|r| -r[0]).collect();
            let x = solve_linear(m, y)?;
            for (row, name) in rows.iter().zip(["L(2,2)(0; 0) = 0", "∂p² L(2,2)(0; 0) = 0"]) {
                let (value, scale) = residual_of(row, &x);
                residuals.push(Residual { order: 2, condition: name.into(), value, scale });
            }
            ct.a.push(x[0]);
            ct.b.push(x[1]);
            ct.c.push(None);
            let mut table = AmplitudeTable {
                n: 1,
                l: 2,
                family: FamilyKind::AntipodalPair,
                axis_names: vec!["|p|".into()],
                axes: vec![cfg.two_point_grid.clone()],
                lambdas: self.grid.clone(),
                values: vec![],
                slopes: vec![],
            };
            for (j, node) in nodes.iter().enumerate() {
                diag.ode_steps += node.steps;
                let pinned = if j == i0 { Some(0.0) } else { None };
                let (v, s) = node.combine(&[1.0, x[0], x[1]], pinned);
                table.values.push(v);
                table.slopes.push(s);
            }
            tables.push(table);
            deps.push(Dependency { n: 1, l: 2, reads: vec![(2, 1), (1, 1)] });
        }

        diag.seconds = start.elapsed().as_secs_f64();
        Ok(Solution {
            config: cfg.clone(),
            grid: self.grid.clone(),
            counterterms: ct,
            residuals,
            tables,
            dependencies: deps,
            diagnostics: diag,
            l21_values,
            l21_slopes,
        })
    }

    /// Shift kernel covering every |Q| met by the tables.
    fn tabulated_kernel(&self) -> TabulatedKernel {
        let cfg = &self.config;
        let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
        let mut p_max = last(&cfg.four_point_p) + last(&cfg.four_point_q);
        if cfg.max_loop >= 2 {
            p_max = p_max.max(cfg.cutoff_factor * cfg.lambda0 + last(&cfg.two_point_grid));
        }
        TabulatedKernel::build(
            self.exact.clone(),
            p_max + 2.0 * cfg.m,
            cfg.kernel_p_points,
            cfg.lambda_min * cfg.m,
            cfg.kernel_per_decade,
        )
    }

    fn inner_four_point(
        &self,
        l21: &[f64],
        ct: &Counterterms,
        kernel: &TabulatedKernel,
    ) -> Result<(InnerFourPoint, usize)> {
        let cfg = &self.config;
        let m = cfg.m;
        let k_max = cfg.cutoff_factor * cfg.lambda0;
        let u_max = (1.0 + k_max / m).ln();
        let nk = cfg.inner_k_points;
        let u: Vec<f64> = (0..nk).map(|i| u_max * i as f64 / (nk - 1) as f64).collect();
        let ncos = cfg.inner_cos_points;
        let cos: Vec<f64> = (0..ncos).map(|i| i as f64 / (ncos - 1) as f64).collect();
        let mut jobs = Vec::new();
        for &p in &cfg.two_point_grid {
            for &ui in &u {
                for &c in &cos {
                    jobs.push([m * ui.exp_m1(), p, c]);
                }
            }
        }
        let series: Vec<NodeSeries> = jobs
            .par_iter()
            .map(|params| {
                let c = family_config(FamilyKind::FourPoint, params)?;
                self.l41_final(&c, l21, ct, kernel)
                    .map_err(|e| with_context(e, &format!("inner L(4,1) node {params:?}")))
            })
            .collect::<Result<_>>()?;
        let steps = series.iter().map(|s| s.steps).sum();
        let series = series.iter().map(|s| s.combine(&[1.0], None)).collect();
        Ok((InnerFourPoint { u, cos, series, m }, steps))
    }

    /// Renormalized L_{4,1} at arbitrary configurations on the solver grid,
    /// integrated directly rather than interpolated.
    pub fn four_point_l1_at(&self, solution: &Solution, configs: &[MomentumConfig]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        if solution.config.max_loop < 1 {
            return Err(Error::Argument("solution does not include loop order 1".into()));
        }
        if solution.grid != self.grid {
            return Err(Error::Argument("solution was computed on a different grid".into()));
        }
        configs
            .par_iter()
            .map(|c| {
                if c.legs() != 4 {
                    return Err(Error::Argument(format!("{} legs given for a four-point amplitude", c.legs())));
                }
                let node = self.l41_final(c, &solution.l21_values, &solution.counterterms, &self.exact)?;
                Ok(node.combine(&[1.0], None))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
