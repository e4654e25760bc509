use crate::error::{Error, Result};

use super::convert::{sar_convert, AdcConfig, AdcMode};
use super::dac::CapDac;

/// Code errors for one mismatch draw under two coupling models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommonModeOutcome {
    pub samples: usize,
    /// MAV developed on an array with the same mismatch as the reference.
    pub shared_abs_code_error: u64,
    /// Ideal MAV digitized against the mismatched reference alone.
    pub reference_only_abs_code_error: u64,
}

/// Digitizes ideal MAV fractions `u` in `[0, 1)` both ways.
///
/// In the shared-array model the MAV voltage is `dac.charge_share(u)`, so
/// capacitor errors shift signal and reference together. In the
/// reference-only model the MAV is the ideal `u * vdd`.
pub fn common_mode_trial(dac: &CapDac, config: &AdcConfig, fractions: &[f64]) -> Result<CommonModeOutcome> {
    if config.mode() != &AdcMode::Sar {
        return Err(Error::config("common-mode study runs in SAR mode"));
    }
    let n = config.n_codes();
    let mut shared = 0u64;
    let mut reference_only = 0u64;
    for &u in fractions {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::param(format!("MAV fraction {u} outside [0, 1)")));
        }
        let ideal = ((u * n as f64).floor() as u32).min(n - 1);
        let a = sar_convert(dac.charge_share(u), dac, config)?.code;
        let b = sar_convert(u * dac.vdd(), dac, config)?.code;
        shared += a.abs_diff(ideal) as u64;
        reference_only += b.abs_diff(ideal) as u64;
    }
    Ok(CommonModeOutcome {
        samples: fractions.len(),
        shared_abs_code_error: shared,
        reference_only_abs_code_error: reference_only,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_dac_has_no_error_either_way() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let fr: Vec<f64> = (0..500).map(|i| (i as f64 + 0.37) / 500.0).collect();
        let out = common_mode_trial(&dac, &AdcConfig::sar(5).unwrap(), &fr).unwrap();
        assert_eq!(out.shared_abs_code_error, 0);
        assert_eq!(out.reference_only_abs_code_error, 0);
    }

    #[test]
    fn rejects_out_of_range_fraction() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        assert!(common_mode_trial(&dac, &AdcConfig::sar(5).unwrap(), &[1.0]).is_err());
    }
}
