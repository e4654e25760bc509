use std::cmp::Ordering;

use crate::error::{Error, Result};

use super::convert::MemoryAdc;

/// `(vin, code)` pairs in sweep order.
pub type TransferCurve = Vec<(f64, u32)>;

/// Converts every point of a non-decreasing input sweep.
pub fn transfer_curve(adc: &MemoryAdc, sweep: &[f64]) -> Result<TransferCurve> {
    if sweep
        .windows(2)
        .any(|w| !matches!(w[0].partial_cmp(&w[1]), Some(Ordering::Less | Ordering::Equal)))
    {
        return Err(Error::param("transfer-curve sweep must be non-decreasing"));
    }
    sweep.iter().map(|&v| adc.convert(v).map(|t| (v, t.code))).collect()
}

/// `n` points at bin centres of a uniform grid over `[lo, hi]`.
pub fn uniform_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Linearity {
    pub dnl: Vec<f64>,
    pub inl: Vec<f64>,
    /// Input level at which the output first reaches each code; entry 0 is
    /// the bottom of the full-scale range and the last entry its top.
    pub transitions: Vec<f64>,
    pub missing_codes: Vec<u32>,
}

impl Linearity {
    pub fn max_abs_dnl(&self) -> f64 {
        self.dnl.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_inl(&self) -> f64 {
        self.inl.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Step-width non-linearity from a transfer curve.
///
/// Code `k` begins halfway between the last sample below `k` and the first
/// sample at or above it. Widths are measured against `full_scale / 2^bits`.
/// INL is the running sum of DNL. Codes that never appear get DNL = -1.
pub fn dnl_inl(curve: &[(f64, u32)], bits: u32, full_scale: (f64, f64)) -> Result<Linearity> {
    let (lo, hi) = full_scale;
    if lo.partial_cmp(&hi) != Some(Ordering::Less) {
        return Err(Error::param("full-scale range must satisfy lo < hi"));
    }
    if curve.is_empty() {
        return Err(Error::shape("empty transfer curve"));
    }
    let n = 1usize << bits;
    let mut transitions = Vec::with_capacity(n + 1);
    transitions.push(lo);
    for k in 1..n as u32 {
        let t = match curve.iter().position(|&(_, c)| c >= k) {
            None => hi,
            Some(0) => lo,
            Some(i) => 0.5 * (curve[i - 1].0 + curve[i].0),
        };
        transitions.push(t);
    }
    transitions.push(hi);

    let mut seen = vec![false; n];
    for &(_, c) in curve {
        if let Some(s) = seen.get_mut(c as usize) {
            *s = true;
        }
    }
    let missing_codes: Vec<u32> = (0..n as u32).filter(|&c| !seen[c as usize]).collect();

    let ideal = (hi - lo) / n as f64;
    let dnl: Vec<f64> = (0..n)
        .map(|k| {
            if seen[k] {
                (transitions[k + 1] - transitions[k]) / ideal - 1.0
            } else {
                -1.0
            }
        })
        .collect();
    let inl = dnl
        .iter()
        .scan(0.0, |acc, d| {
            *acc += d;
            Some(*acc)
        })
        .collect();
    Ok(Linearity {
        dnl,
        inl,
        transitions,
        missing_codes,
    })
}
