//! Single registry of the numerical constants used by the lemma certifier
//! and the constant chain.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    /// Lemma 2 a.
    pub k0: f64,
    /// Lemma 2 b, (3/4)^3 * 5.
    pub k0_prime: f64,
    /// Lemma 2 c.
    pub k0_second: f64,
    /// Lemma 3, c(v) for v = 0..=3.
    pub c: [f64; 4],
    /// Lemma 6 a.
    pub k2: f64,
    /// Lemma 6 b, full-width regulator, indexed by |w|.
    pub kw: [f64; 4],
    /// Lemma 6 b, half-width regulator, indexed by |w|.
    pub kw_prime: [f64; 4],
    /// Lemma 7.
    pub k1: f64,
    pub k1_prime: f64,
    /// Tail constant of the four-point interpolation.
    pub k3: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self::published()
    }
}

impl Constants {
    pub fn published() -> Self {
        Constants {
            k0: 20.0,
            k0_prime: 0.75f64.powi(3) * 5.0,
            k0_second: 5.0,
            c: [1.0, 1.4, 2.5, 5.25],
            k2: 6.2,
            kw: [6.2, 4.6, 77.5, 37.0],
            kw_prime: [6.2, 9.2, 135.0, 407.0],
            k1: 3.1,
            k1_prime: 14.5,
            k3: 1.0 / 3.0,
        }
    }

    pub fn names() -> &'static [&'static str] {
        &[
            "K0", "K0'", "K0''", "c0", "c1", "c2", "c3", "K2", "Kw0", "Kw1", "Kw2", "Kw3", "Kw0'",
            "Kw1'", "Kw2'", "Kw3'", "K1", "K1'", "K3",
        ]
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut f64> {
        Ok(match name {
            "K0" => &mut self.k0,
            "K0'" => &mut self.k0_prime,
            "K0''" => &mut self.k0_second,
            "c0" => &mut self.c[0],
            "c1" => &mut self.c[1],
            "c2" => &mut self.c[2],
            "c3" => &mut self.c[3],
            "K2" => &mut self.k2,
            "Kw0" => &mut self.kw[0],
            "Kw1" => &mut self.kw[1],
            "Kw2" => &mut self.kw[2],
            "Kw3" => &mut self.kw[3],
            "Kw0'" => &mut self.kw_prime[0],
            "Kw1'" => &mut self.kw_prime[1],
            "Kw2'" => &mut self.kw_prime[2],
            "Kw3'" => &mut self.kw_prime[3],
            "K1" => &mut self.k1,
            "K1'" => &mut self.k1_prime,
            "K3" => &mut self.k3,
            _ => return Err(Error::Argument(format!("unknown constant {name}"))),
        })
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        let mut copy = self.clone();
        copy.get_mut(name).map(|v| *v)
    }

    /// Applies a perturbation spec such as `K2=+10%`, `K2=-5%` or `K2=7.1`.
    pub fn perturb(&mut self, spec: &str) -> Result<()> {
        let (name, rhs) = spec
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("perturbation `{spec}` lacks `=`")))?;
        let slot = self.get_mut(name.trim())?;
        let rhs = rhs.trim();
        let bad = || Error::Argument(format!("cannot parse perturbation `{spec}`"));
        if let Some(pct) = rhs.strip_suffix('%') {
            let pct: f64 = pct.trim_start_matches('+').parse().map_err(|_| bad())?;
            *slot *= 1.0 + pct / 100.0;
        } else {
            *slot = rhs.parse().map_err(|_| bad())?;
        }
        Ok(())
    }
}
