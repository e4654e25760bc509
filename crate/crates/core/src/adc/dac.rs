use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Capacitive DAC built from the column lines of a memory array.
///
/// Each column line is a unit capacitor `1 + mismatch_i`. Precharging a
/// subset to `vdd` and charge-sharing with the rest yields
/// `vdd * sum(precharged) / sum(all)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapDac {
    mismatch: Vec<f64>,
    /// prefix[k] = sum of the first k capacitors
    prefix: Vec<f64>,
    vdd: f64,
}

impl CapDac {
    pub fn ideal(n_units: usize, vdd: f64) -> Result<Self> {
        Self::with_mismatch(vec![0.0; n_units], vdd)
    }

    pub fn with_mismatch(mismatch: Vec<f64>, vdd: f64) -> Result<Self> {
        if mismatch.len() < 2 {
            return Err(Error::config(format!(
                "capacitive DAC needs at least 2 units, got {}",
                mismatch.len()
            )));
        }
        if let Some((i, m)) = mismatch
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > -1.0))
        {
            return Err(Error::config(format!("unit {i} mismatch {m} must be finite and > -1")));
        }
        if !(vdd.is_finite() && vdd > 0.0) {
            return Err(Error::config(format!("vdd must be positive, got {vdd}")));
        }
        let mut prefix = Vec::with_capacity(mismatch.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for m in &mismatch {
            acc += 1.0 + m;
            prefix.push(acc);
        }
        Ok(CapDac { mismatch, prefix, vdd })
    }

    /// Gaussian fractional mismatch, redrawn until every unit stays above -1.
    pub fn random_mismatch(n_units: usize, sigma: f64, seed: u64, vdd: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::config(format!(
                "mismatch sigma must be non-negative, got {sigma}"
            )));
        }
        if sigma == 0.0 {
            return Self::ideal(n_units, vdd);
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mismatch = (0..n_units)
            .map(|_| loop {
                let m = normal.sample(&mut rng);
                if m > -0.9 {
                    break m;
                }
            })
            .collect();
        Self::with_mismatch(mismatch, vdd)
    }

    pub fn n_units(&self) -> usize {
        self.mismatch.len()
    }

    pub fn vdd(&self) -> f64 {
        self.vdd
    }

    pub fn mismatch(&self) -> &[f64] {
        &self.mismatch
    }

    fn total(&self) -> f64 {
        self.prefix[self.mismatch.len()]
    }

    /// Reference voltage with an arbitrary subset of units precharged.
    pub fn reference(&self, precharged: &[usize]) -> Result<f64> {
        let n = self.n_units();
        let mut seen = vec![false; n];
        let mut charge = 0.0;
        for &i in precharged {
            if i >= n {
                return Err(Error::config(format!("unit {i} out of range for {n}-unit DAC")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::config(format!("unit {i} precharged twice")));
            }
            charge += 1.0 + self.mismatch[i];
        }
        Ok(self.vdd * charge / self.total())
    }

    /// Reference with the first `count` units precharged (thermometer fill).
    pub fn reference_units(&self, count: usize) -> f64 {
        let count = count.min(self.n_units());
        self.vdd * self.prefix[count] / self.total()
    }

    /// Units to precharge for a target fraction of full scale.
    pub fn units_for_fraction(&self, fraction: f64) -> usize {
        ((fraction * self.n_units() as f64).round().max(0.0) as usize).min(self.n_units())
    }

    /// Voltage developed when an ideal fraction `u` of the array's charge is
    /// placed in thermometer order on these same capacitors. Used to model a
    /// MAV computed on an array that shares the reference array's mismatch.
    pub fn charge_share(&self, u: f64) -> f64 {
        let n = self.n_units();
        let pos = u.clamp(0.0, 1.0) * n as f64;
        let full = (pos.floor() as usize).min(n);
        let frac = pos - full as f64;
        let partial = if full < n {
            frac * (1.0 + self.mismatch[full])
        } else {
            0.0
        };
        self.vdd * (self.prefix[full] + partial) / self.total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midscale_and_rails() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let half: Vec<usize> = (0..16).collect();
        assert_eq!(dac.reference(&half).unwrap(), 0.5);
        assert_eq!(dac.reference(&[]).unwrap(), 0.0);
        let all: Vec<usize> = (0..32).collect();
        assert_eq!(dac.reference(&all).unwrap(), 1.0);
        assert_eq!(dac.reference_units(16), 0.5);
    }

    #[test]
    fn mismatch_charge_sum() {
        let mut m = vec![0.0; 32];
        m[0] = 0.01;
        let dac = CapDac::with_mismatch(m, 0.9).unwrap();
        let expected = 0.9 * 1.01 / (31.0 + 1.01);
        assert!((dac.reference(&[0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_dacs() {
        assert!(matches!(CapDac::ideal(0, 1.0), Err(Error::Config(_))));
        assert!(matches!(CapDac::ideal(1, 1.0), Err(Error::Config(_))));
        assert!(CapDac::with_mismatch(vec![0.0, -1.0], 1.0).is_err());
        assert!(CapDac::ideal(4, 0.0).is_err());
        let dac = CapDac::ideal(4, 1.0).unwrap();
        assert!(dac.reference(&[4]).is_err());
        assert!(dac.reference(&[1, 1]).is_err());
    }

    #[test]
    fn charge_share_hits_unit_boundaries() {
        let dac = CapDac::random_mismatch(16, 0.05, 3, 1.0).unwrap();
        for k in 0..=16 {
            let u = k as f64 / 16.0;
            assert!((dac.charge_share(u) - dac.reference_units(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn random_mismatch_is_seeded() {
        let a = CapDac::random_mismatch(32, 0.02, 7, 1.0).unwrap();
        let b = CapDac::random_mismatch(32, 0.02, 7, 1.0).unwrap();
        let c = CapDac::random_mismatch(32, 0.02, 8, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
