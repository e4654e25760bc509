use crate::error::{Error, Result};

use super::dac::CapDac;
use super::search::SearchTree;

/// Widest converter supported.
pub const MAX_ADC_BITS: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum AdcMode {
    Sar,
    /// All bits in one cycle; needs `2^bits - 1` reference arrays.
    Flash,
    /// `flash_bits` MSBs in one Flash cycle, the rest by SAR.
    Hybrid {
        flash_bits: u32,
    },
    /// SAR along an order-preserving tree instead of the complete one.
    Asymmetric {
        tree: SearchTree,
    },
}

impl AdcMode {
    pub fn name(&self) -> &'static str {
        match self {
            AdcMode::Sar => "sar",
            AdcMode::Flash => "flash",
            AdcMode::Hybrid { .. } => "hybrid",
            AdcMode::Asymmetric { .. } => "asymmetric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdcConfig {
    bits: u32,
    comparator_offset: f64,
    mode: AdcMode,
}

impl AdcConfig {
    pub fn new(bits: u32, comparator_offset: f64, mode: AdcMode) -> Result<Self> {
        if bits == 0 || bits > MAX_ADC_BITS {
            return Err(Error::config(format!("ADC width {bits} outside 1..={MAX_ADC_BITS}")));
        }
        if !comparator_offset.is_finite() {
            return Err(Error::config("comparator offset must be finite"));
        }
        match &mode {
            AdcMode::Hybrid { flash_bits } if *flash_bits == 0 || *flash_bits >= bits => {
                return Err(Error::config(format!(
                    "hybrid Flash stage resolves {flash_bits} bits; need 1..{bits}"
                )));
            }
            AdcMode::Asymmetric { tree } if tree.n_codes() != 1 << bits => {
                return Err(Error::config(format!(
                    "search tree covers {} codes, converter has {}",
                    tree.n_codes(),
                    1u32 << bits
                )));
            }
            _ => {}
        }
        Ok(AdcConfig {
            bits,
            comparator_offset,
            mode,
        })
    }

    pub fn sar(bits: u32) -> Result<Self> {
        Self::new(bits, 0.0, AdcMode::Sar)
    }

    pub fn hybrid(bits: u32, flash_bits: u32) -> Result<Self> {
        Self::new(bits, 0.0, AdcMode::Hybrid { flash_bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn comparator_offset(&self) -> f64 {
        self.comparator_offset
    }

    pub fn mode(&self) -> &AdcMode {
        &self.mode
    }

    pub fn n_codes(&self) -> u32 {
        1 << self.bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleKind {
    Sar,
    Flash,
    Asymmetric,
}

impl CycleKind {
    pub fn name(self) -> &'static str {
        match self {
            CycleKind::Sar => "sar",
            CycleKind::Flash => "flash",
            CycleKind::Asymmetric => "asymmetric",
        }
    }
}

/// One comparison cycle. Flash cycles carry one reference per comparator.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub kind: CycleKind,
    pub references: Vec<f64>,
    pub decisions: Vec<bool>,
    /// Code prefix resolved after this cycle.
    pub code_after: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdcConversionTrace {
    pub input_v: f64,
    pub code: u32,
    pub cycles: Vec<CycleRecord>,
    pub comparisons: usize,
    /// Input was outside `[0, vdd]`.
    pub saturated: bool,
}

fn check_input(vin: f64, vdd: f64) -> Result<bool> {
    if vin.is_nan() {
        return Err(Error::param("ADC input is NaN"));
    }
    Ok(!(0.0..=vdd).contains(&vin))
}

fn reference_for_code(dac: &CapDac, code: u32, bits: u32) -> f64 {
    let fraction = code as f64 / (1u64 << bits) as f64;
    dac.reference_units(dac.units_for_fraction(fraction))
}

fn compare(vin: f64, offset: f64, reference: f64) -> bool {
    vin + offset > reference
}

/// Resolves bits `from_bit - 1` down to 0 by successive approximation,
/// starting from the already-known `prefix`.
fn sar_steps(
    vin: f64,
    dac: &CapDac,
    bits: u32,
    offset: f64,
    prefix: u32,
    from_bit: u32,
    cycles: &mut Vec<CycleRecord>,
) -> u32 {
    let mut code = prefix;
    for bit in (0..from_bit).rev() {
        let trial = code | (1 << bit);
        let reference = reference_for_code(dac, trial, bits);
        let decision = compare(vin, offset, reference);
        if decision {
            code = trial;
        }
        cycles.push(CycleRecord {
            kind: CycleKind::Sar,
            references: vec![reference],
            decisions: vec![decision],
            code_after: code,
        });
    }
    code
}

fn finish(vin: f64, code: u32, cycles: Vec<CycleRecord>, saturated: bool) -> AdcConversionTrace {
    AdcConversionTrace {
        input_v: vin,
        code,
        comparisons: cycles.len(),
        cycles,
        saturated,
    }
}

/// `bits`-cycle successive approximation against one reference array. The
/// first test is midscale (half the column lines precharged).
pub fn sar_convert(vin: f64, dac: &CapDac, config: &AdcConfig) -> Result<AdcConversionTrace> {
    if config.mode != AdcMode::Sar {
        return Err(Error::config(format!(
            "sar_convert called with {} mode",
            config.mode.name()
        )));
    }
    let saturated = check_input(vin, dac.vdd())?;
    let mut cycles = Vec::with_capacity(config.bits as usize);
    let code = sar_steps(
        vin,
        dac,
        config.bits,
        config.comparator_offset,
        0,
        config.bits,
        &mut cycles,
    );
    Ok(finish(vin, code, cycles, saturated))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlashOutcome {
    pub msbs: u32,
    pub record: CycleRecord,
}

/// Resolves `m` MSBs in a single cycle using `2^m - 1` reference arrays at
/// fractions `k / 2^m`. The thermometer code is decoded by counting ones.
pub fn flash_convert_msbs(vin: f64, dacs: &[&CapDac], m: u32, offset: f64) -> Result<FlashOutcome> {
    if m == 0 || m > MAX_ADC_BITS {
        return Err(Error::config(format!(
            "Flash stage width {m} outside 1..={MAX_ADC_BITS}"
        )));
    }
    let needed = (1usize << m) - 1;
    if dacs.len() != needed {
        return Err(Error::config(format!(
            "{m}-bit Flash stage needs {needed} reference arrays, got {}",
            dacs.len()
        )));
    }
    if vin.is_nan() {
        return Err(Error::param("ADC input is NaN"));
    }
    let references: Vec<f64> = dacs
        .iter()
        .enumerate()
        .map(|(i, dac)| reference_for_code(dac, i as u32 + 1, m))
        .collect();
    let decisions: Vec<bool> = references.iter().map(|&r| compare(vin, offset, r)).collect();
    let msbs = decisions.iter().filter(|&&d| d).count() as u32;
    Ok(FlashOutcome {
        msbs,
        record: CycleRecord {
            kind: CycleKind::Flash,
            references,
            decisions,
            code_after: msbs,
        },
    })
}

/// Collaborating arrays. Array 0 holds the MAV being digitized; arrays
/// 1.. act as reference generators, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct AdcNetwork {
    arrays: Vec<CapDac>,
}

impl AdcNetwork {
    pub fn new(arrays: Vec<CapDac>) -> Result<Self> {
        if arrays.len() < 2 {
            return Err(Error::config("an ADC network needs at least two arrays"));
        }
        let vdd = arrays[0].vdd();
        if arrays.iter().any(|a| a.vdd() != vdd) {
            return Err(Error::config("all arrays in a network must share vdd"));
        }
        Ok(AdcNetwork { arrays })
    }

    pub fn ideal(n_arrays: usize, n_units: usize, vdd: f64) -> Result<Self> {
        let dac = CapDac::ideal(n_units, vdd)?;
        Self::new(vec![dac; n_arrays])
    }

    pub fn arrays(&self) -> &[CapDac] {
        &self.arrays
    }

    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn vdd(&self) -> f64 {
        self.arrays[0].vdd()
    }

    /// The `i`-th reference array (0 = nearest neighbour).
    pub fn reference_array(&self, i: usize) -> Option<&CapDac> {
        self.arrays.get(i + 1)
    }

    fn reference_arrays(&self, count: usize) -> Result<Vec<&CapDac>> {
        if self.arrays.len() < count + 1 {
            return Err(Error::config(format!(
                "network of {} arrays cannot supply {count} reference arrays",
                self.arrays.len()
            )));
        }
        Ok(self.arrays[1..=count].iter().collect())
    }
}

/// One Flash cycle for `flash_bits` MSBs, then SAR on the nearest reference
/// array for the rest.
pub fn hybrid_convert(vin: f64, network: &AdcNetwork, config: &AdcConfig) -> Result<AdcConversionTrace> {
    let AdcMode::Hybrid { flash_bits } = config.mode else {
        return Err(Error::config(format!(
            "hybrid_convert called with {} mode",
            config.mode.name()
        )));
    };
    let refs = network.reference_arrays((1usize << flash_bits) - 1)?;
    let saturated = check_input(vin, network.vdd())?;
    let flash = flash_convert_msbs(vin, &refs, flash_bits, config.comparator_offset)?;
    let sar_bits = config.bits - flash_bits;
    let mut cycles = Vec::with_capacity(1 + sar_bits as usize);
    let prefix = flash.msbs << sar_bits;
    cycles.push(CycleRecord {
        code_after: prefix,
        ..flash.record
    });
    let code = sar_steps(
        vin,
        refs[0],
        config.bits,
        config.comparator_offset,
        prefix,
        sar_bits,
        &mut cycles,
    );
    Ok(finish(vin, code, cycles, saturated))
}

/// Full Flash conversion: `2^bits - 1` reference arrays, one cycle.
pub fn flash_convert(vin: f64, network: &AdcNetwork, config: &AdcConfig) -> Result<AdcConversionTrace> {
    if config.mode != AdcMode::Flash {
        return Err(Error::config(format!(
            "flash_convert called with {} mode",
            config.mode.name()
        )));
    }
    let refs = network.reference_arrays((1usize << config.bits) - 1)?;
    let saturated = check_input(vin, network.vdd())?;
    let flash = flash_convert_msbs(vin, &refs, config.bits, config.comparator_offset)?;
    Ok(finish(vin, flash.msbs, vec![flash.record], saturated))
}

/// Walks the configured search tree; each split compares against the DAC
/// reference for its threshold code.
pub fn asymmetric_convert(vin: f64, dac: &CapDac, config: &AdcConfig) -> Result<AdcConversionTrace> {
    let AdcMode::Asymmetric { tree } = &config.mode else {
        return Err(Error::config(format!(
            "asymmetric_convert called with {} mode",
            config.mode.name()
        )));
    };
    let saturated = check_input(vin, dac.vdd())?;
    let mut cycles = Vec::with_capacity(tree.max_depth());
    let mut lo = 0u32;
    let (code, _) = tree.descend(|threshold| {
        let reference = reference_for_code(dac, threshold, config.bits);
        let decision = compare(vin, config.comparator_offset, reference);
        if decision {
            lo = threshold;
        }
        cycles.push(CycleRecord {
            kind: CycleKind::Asymmetric,
            references: vec![reference],
            decisions: vec![decision],
            code_after: lo,
        });
        decision
    });
    if let Some(last) = cycles.last_mut() {
        last.code_after = code;
    }
    Ok(finish(vin, code, cycles, saturated))
}

/// A converter: a network plus a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryAdc {
    network: AdcNetwork,
    config: AdcConfig,
}

impl MemoryAdc {
    pub fn new(network: AdcNetwork, config: AdcConfig) -> Result<Self> {
        let needed = match config.mode {
            AdcMode::Sar | AdcMode::Asymmetric { .. } => 1,
            AdcMode::Flash => (1usize << config.bits) - 1,
            AdcMode::Hybrid { flash_bits } => (1usize << flash_bits) - 1,
        };
        if network.len() < needed + 1 {
            return Err(Error::config(format!(
                "{} mode needs {} arrays, network has {}",
                config.mode.name(),
                needed + 1,
                network.len()
            )));
        }
        Ok(MemoryAdc { network, config })
    }

    pub fn network(&self) -> &AdcNetwork {
        &self.network
    }

    pub fn config(&self) -> &AdcConfig {
        &self.config
    }

    pub fn vdd(&self) -> f64 {
        self.network.vdd()
    }

    pub fn convert(&self, vin: f64) -> Result<AdcConversionTrace> {
        let nearest = &self.network.arrays[1];
        match self.config.mode {
            AdcMode::Sar => sar_convert(vin, nearest, &self.config),
            AdcMode::Flash => flash_convert(vin, &self.network, &self.config),
            AdcMode::Hybrid { .. } => hybrid_convert(vin, &self.network, &self.config),
            AdcMode::Asymmetric { .. } => asymmetric_convert(vin, nearest, &self.config),
        }
    }
}

/// What an array is doing during one conversion cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrayRole {
    /// Holds the MAV and drives the comparator.
    Digitizing,
    FlashReference,
    SarReference,
    /// Available to pair with a neighbour for its own conversion.
    Free,
}

impl ArrayRole {
    pub fn name(self) -> &'static str {
        match self {
            ArrayRole::Digitizing => "digitizing",
            ArrayRole::FlashReference => "flash_ref",
            ArrayRole::SarReference => "sar_ref",
            ArrayRole::Free => "free",
        }
    }
}

/// Per-cycle, per-array roles for one conversion on an `n_arrays` network.
///
/// Hybrid: the Flash cycle occupies `2^m - 1` reference arrays, after which
/// only the nearest neighbour stays engaged and the others are released.
pub fn conversion_timeline(n_arrays: usize, config: &AdcConfig) -> Result<Vec<Vec<ArrayRole>>> {
    let bits = config.bits;
    let mut timeline = Vec::new();
    let sar_cycle = |n: usize| {
        let mut roles = vec![ArrayRole::Free; n];
        roles[0] = ArrayRole::Digitizing;
        roles[1] = ArrayRole::SarReference;
        roles
    };
    let flash_cycle = |n: usize, refs: usize| {
        let mut roles = vec![ArrayRole::Free; n];
        roles[0] = ArrayRole::Digitizing;
        for r in roles.iter_mut().skip(1).take(refs) {
            *r = ArrayRole::FlashReference;
        }
        roles
    };
    let needed = match config.mode {
        AdcMode::Sar | AdcMode::Asymmetric { .. } => 2,
        AdcMode::Flash => 1 << bits,
        AdcMode::Hybrid { flash_bits } => 1 << flash_bits,
    };
    if n_arrays < needed {
        return Err(Error::config(format!(
            "{} mode needs {needed} arrays, network has {n_arrays}",
            config.mode.name()
        )));
    }
    match &config.mode {
        AdcMode::Sar => timeline.extend((0..bits).map(|_| sar_cycle(n_arrays))),
        AdcMode::Asymmetric { tree } => timeline.extend((0..tree.max_depth()).map(|_| sar_cycle(n_arrays))),
        AdcMode::Flash => timeline.push(flash_cycle(n_arrays, (1 << bits) - 1)),
        AdcMode::Hybrid { flash_bits } => {
            timeline.push(flash_cycle(n_arrays, (1 << flash_bits) - 1));
            timeline.extend((0..bits - flash_bits).map(|_| sar_cycle(n_arrays)));
        }
    }
    Ok(timeline)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adc::search::{build_asymmetric_tree, mav_pmf};

    fn ideal_oracle(vin: f64, vdd: f64, bits: u32) -> u32 {
        let n = 1u32 << bits;
        ((vin / vdd * n as f64).floor().max(0.0) as u32).min(n - 1)
    }

    #[test]
    fn sar_rail_codes() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let cfg = AdcConfig::sar(5).unwrap();
        assert_eq!(sar_convert(0.0, &dac, &cfg).unwrap().code, 0);
        let t = sar_convert(1.0 - 1e-9, &dac, &cfg).unwrap();
        assert_eq!(t.code, 31);
        assert_eq!(t.comparisons, 5);
        assert_eq!(t.cycles[0].references, vec![0.5]);
    }

    #[test]
    fn sar_saturates_out_of_range() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let cfg = AdcConfig::sar(5).unwrap();
        let hi = sar_convert(1.7, &dac, &cfg).unwrap();
        assert_eq!((hi.code, hi.saturated), (31, true));
        let lo = sar_convert(-0.2, &dac, &cfg).unwrap();
        assert_eq!((lo.code, lo.saturated), (0, true));
        assert!(sar_convert(f64::NAN, &dac, &cfg).is_err());
    }

    #[test]
    fn sar_matches_quantizer_midbins() {
        let dac = CapDac::ideal(32, 0.8).unwrap();
        let cfg = AdcConfig::sar(5).unwrap();
        for k in 0..32 {
            let vin = (k as f64 + 0.5) / 32.0 * 0.8;
            assert_eq!(sar_convert(vin, &dac, &cfg).unwrap().code, ideal_oracle(vin, 0.8, 5));
        }
    }

    #[test]
    fn flash_msbs() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let refs = [&dac, &dac, &dac];
        assert_eq!(flash_convert_msbs(0.6, &refs, 2, 0.0).unwrap().msbs, 0b10);
        assert_eq!(flash_convert_msbs(0.2499, &refs, 2, 0.0).unwrap().msbs, 0b00);
        assert!(matches!(
            flash_convert_msbs(0.6, &refs[..2], 2, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn hybrid_cycle_count_and_code() {
        let net = AdcNetwork::ideal(4, 32, 1.0).unwrap();
        let cfg = AdcConfig::hybrid(5, 2).unwrap();
        let t = hybrid_convert(0.61, &net, &cfg).unwrap();
        assert_eq!(t.comparisons, 4);
        assert_eq!(t.cycles[0].kind, CycleKind::Flash);
        assert_eq!(t.cycles[0].references.len(), 3);
        assert_eq!(t.code, ideal_oracle(0.61, 1.0, 5));
    }

    #[test]
    fn hybrid_needs_enough_arrays() {
        let net = AdcNetwork::ideal(3, 32, 1.0).unwrap();
        let cfg = AdcConfig::hybrid(5, 2).unwrap();
        assert!(hybrid_convert(0.3, &net, &cfg).is_err());
        assert!(MemoryAdc::new(net, cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AdcConfig::sar(0).is_err());
        assert!(AdcConfig::sar(9).is_err());
        assert!(AdcConfig::hybrid(5, 5).is_err());
        assert!(AdcConfig::hybrid(5, 0).is_err());
        let tree = SearchTree::balanced(4).unwrap();
        assert!(AdcConfig::new(5, 0.0, AdcMode::Asymmetric { tree }).is_err());
    }

    #[test]
    fn flash_full_conversion() {
        let net = AdcNetwork::ideal(8, 32, 1.0).unwrap();
        let cfg = AdcConfig::new(3, 0.0, AdcMode::Flash).unwrap();
        let adc = MemoryAdc::new(net, cfg).unwrap();
        for k in 0..8 {
            let vin = (k as f64 + 0.5) / 8.0;
            let t = adc.convert(vin).unwrap();
            assert_eq!((t.code, t.comparisons), (k, 1));
        }
    }

    #[test]
    fn asymmetric_matches_sar_codes() {
        let pmf = mav_pmf(32, 5).unwrap();
        let tree = build_asymmetric_tree(&pmf);
        let depths = tree.depths();
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let cfg = AdcConfig::new(5, 0.0, AdcMode::Asymmetric { tree }).unwrap();
        for k in 0..32u32 {
            let vin = (k as f64 + 0.5) / 32.0;
            let t = asymmetric_convert(vin, &dac, &cfg).unwrap();
            assert_eq!(t.code, k);
            assert_eq!(t.comparisons, depths[k as usize]);
        }
    }

    #[test]
    fn hybrid_timeline_four_arrays() {
        let cfg = AdcConfig::hybrid(5, 2).unwrap();
        let tl = conversion_timeline(4, &cfg).unwrap();
        assert_eq!(tl.len(), 4);
        assert_eq!(
            tl[0],
            vec![
                ArrayRole::Digitizing,
                ArrayRole::FlashReference,
                ArrayRole::FlashReference,
                ArrayRole::FlashReference
            ]
        );
        for cycle in &tl[1..] {
            assert_eq!(cycle[1], ArrayRole::SarReference);
            assert_eq!(&cycle[2..], &[ArrayRole::Free, ArrayRole::Free]);
        }
        assert!(conversion_timeline(3, &cfg).is_err());
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let dac = CapDac::ideal(32, 1.0).unwrap();
        let cfg = AdcConfig::hybrid(5, 2).unwrap();
        assert!(sar_convert(0.5, &dac, &cfg).is_err());
        let net = AdcNetwork::ideal(4, 32, 1.0).unwrap();
        assert!(hybrid_convert(0.5, &net, &AdcConfig::sar(5).unwrap()).is_err());
    }
}
