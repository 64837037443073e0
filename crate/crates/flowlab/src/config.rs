//! Run configuration: defaults, then the TOML file, then `FLOWLAB_OUT`, then
//! command-line flags. The resolved value is embedded in every output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, InequalityRecord, Scope};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::flow_solver::SolverConfig;
use crate::lemmas::LemmaSettings;

pub const OUT_ENV: &str = "FLOWLAB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 1, threads: 0, out: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub n_cap: u32,
    pub l_cap: u32,
    /// `all` or a comma-separated list of record ids.
    pub scope: String,
    /// Constant perturbations such as `K2=+10%`, applied in order.
    pub perturb: Vec<String>,
    /// Reference value of K that `certify-k` compares K* with.
    pub claimed_k: f64,
    pub tolerance: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection {
            n_cap: 50,
            l_cap: 50,
            scope: "all".into(),
            perturb: Vec::new(),
            claimed_k: 6.2e5,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub k: f64,
    /// Divide each L_{2n,l} by (g/4!)^{l+n−1} before comparing.
    pub unit_coupling: bool,
    /// Solution file written by `solve`; defaults to `<out>/solution.json`.
    pub solution: Option<PathBuf>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { k: 6.2e5, unit_coupling: true, solution: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub tree_samples: usize,
    pub bubble_points: usize,
    /// Tadpole comparison on Λ/m ∈ [0, tadpole_lambda_max].
    pub tadpole_lambda_max: f64,
    pub tadpole_rtol: f64,
    pub tree_rtol: f64,
    pub bubble_rtol: f64,
    /// UV scale of the separate one-loop run used for the log-growth fit.
    pub log_lambda0: f64,
    pub log_points: usize,
    pub log_p_min: f64,
    pub log_p_max: f64,
    pub log_max_residual: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            tree_samples: 100,
            bubble_points: 20,
            tadpole_lambda_max: 10.0,
            tadpole_rtol: 1e-6,
            tree_rtol: 1e-10,
            bubble_rtol: 1e-4,
            log_lambda0: 1e4,
            log_points: 12,
            log_p_min: 8.0,
            log_p_max: 80.0,
            log_max_residual: 0.02,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub solver: SolverConfig,
    pub lemmas: LemmaSettings,
    pub chain: ChainSection,
    pub bounds: BoundsSection,
    pub oracle: OracleSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Defaults, overlaid by `path` if given, then by `FLOWLAB_OUT`.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => RunConfig::default(),
        };
        if let Ok(dir) = std::env::var(OUT_ENV) {
            if !dir.is_empty() {
                cfg.run.out = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> Result<Constants> {
        let mut c = Constants::published();
        for p in &self.chain.perturb {
            c.perturb(p)?;
        }
        Ok(c)
    }

    pub fn chain_config(&self) -> Result<ChainConfig> {
        Ok(ChainConfig {
            constants: self.constants()?,
            n_cap: self.chain.n_cap,
            l_cap: self.chain.l_cap,
            scope: Scope::parse(&self.chain.scope)?,
            records: InequalityRecord::all(),
        })
    }

    pub fn solution_path(&self) -> PathBuf {
        self.bounds.solution.clone().unwrap_or_else(|| self.run.out.join("solution.json"))
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.lemmas.validate()?;
        self.chain_config()?.validate()?;
        if !(self.chain.claimed_k > 0.0) || !(self.chain.tolerance >= 0.0) {
            return Err(Error::Config("`chain.claimed_k` must be positive and `chain.tolerance` non-negative".into()));
        }
        if !(self.bounds.k > 0.0 && self.bounds.k.is_finite()) {
            return Err(Error::Config("`bounds.k` must be positive and finite".into()));
        }
        let o = &self.oracle;
        if o.tree_samples == 0 || o.bubble_points == 0 || !(o.tadpole_lambda_max > 0.0) {
            return Err(Error::Config("oracle sample counts and range must be positive".into()));
        }
        if o.log_points < 8 || !(o.log_p_min > 0.0 && o.log_p_max >= 10.0 * o.log_p_min) || !(o.log_lambda0 > o.log_p_max) {
            return Err(Error::Config(
                "log-growth fit needs ≥ 8 points over at least a decade of |p|, below `log_lambda0`".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_files_and_unknown_keys() {
        let cfg = RunConfig::from_toml("[run]\nseed = 7\n[chain]\nscope = \"bdke\"\n").unwrap();
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(cfg.chain.scope, "bdke");
        assert_eq!(cfg.solver, SolverConfig::default());
        assert!(matches!(RunConfig::from_toml("[run]\nsed = 7\n"), Err(Error::Config(_))));
        let mut bad = RunConfig::default();
        bad.chain.n_cap = 5;
        assert!(bad.validate().is_err());
        bad = RunConfig::default();
        bad.chain.perturb = vec!["K9=1".into()];
        assert!(bad.validate().is_err());
    }
}
