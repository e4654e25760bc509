//! Area, energy and latency accounting for the converter styles, plus
//! parameter and operation counts for replacing 1x1 convolutions with
//! blockwise transform layers.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::wht::bwht_plan;

/// Width at which the default cost table was measured.
pub const REFERENCE_BITS: u32 = 5;

/// Network-level parameter reduction reported for MobileNetV2. Displayed
/// as-is; the per-layer architecture needed to recompute it is not modeled.
pub const MOBILENET_V2_REPORTED_PARAM_REDUCTION: f64 = 0.87;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEntry {
    pub tech_nm: f64,
    pub area_um2: f64,
    /// Energy per conversion.
    pub energy_pj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTable {
    pub sar: CostEntry,
    pub flash: CostEntry,
    pub in_memory: CostEntry,
}

impl Default for CostTable {
    /// 5-bit converters at a 10 MHz clock.
    fn default() -> Self {
        CostTable {
            sar: CostEntry {
                tech_nm: 40.0,
                area_um2: 5235.20,
                energy_pj: 105.0,
            },
            flash: CostEntry {
                tech_nm: 40.0,
                area_um2: 10703.36,
                energy_pj: 952.0,
            },
            in_memory: CostEntry {
                tech_nm: 65.0,
                area_um2: 207.8,
                energy_pj: 74.23,
            },
        }
    }
}

impl CostTable {
    pub fn validate(&self) -> Result<()> {
        for (name, e) in [
            ("sar", &self.sar),
            ("flash", &self.flash),
            ("in_memory", &self.in_memory),
        ] {
            for (field, v) in [
                ("tech_nm", e.tech_nm),
                ("area_um2", e.area_um2),
                ("energy_pj", e.energy_pj),
            ] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::config(format!(
                        "cost table {name}.{field} = {v} must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Conventional-over-in-memory ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub area_sar: f64,
    pub area_flash: f64,
    pub energy_sar: f64,
    pub energy_flash: f64,
}

impl RatioReport {
    pub fn rounded(&self) -> RatioReport {
        RatioReport {
            area_sar: round1(self.area_sar),
            area_flash: round1(self.area_flash),
            energy_sar: round1(self.energy_sar),
            energy_flash: round1(self.energy_flash),
        }
    }

    /// `(label, value)` in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 4] {
        [
            ("area_sar_over_in_memory", self.area_sar),
            ("area_flash_over_in_memory", self.area_flash),
            ("energy_sar_over_in_memory", self.energy_sar),
            ("energy_flash_over_in_memory", self.energy_flash),
        ]
    }
}

pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn ratio_report(table: &CostTable) -> Result<RatioReport> {
    table.validate()?;
    let m = &table.in_memory;
    Ok(RatioReport {
        area_sar: table.sar.area_um2 / m.area_um2,
        area_flash: table.flash.area_um2 / m.area_um2,
        energy_sar: table.sar.energy_pj / m.energy_pj,
        energy_flash: table.flash.energy_pj / m.energy_pj,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdcStyle {
    Sar,
    Flash,
    Hybrid { flash_bits: u32 },
    Asymmetric { expected_depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Latency {
    /// Comparison cycles per conversion (expected value for asymmetric).
    pub cycles: f64,
    /// Comparators active in the widest cycle.
    pub comparators: u64,
}

pub fn latency_model(style: AdcStyle, bits: u32) -> Result<Latency> {
    if bits == 0 || bits > 62 {
        return Err(Error::param(format!("bit precision {bits} out of range")));
    }
    Ok(match style {
        AdcStyle::Sar => Latency {
            cycles: bits as f64,
            comparators: 1,
        },
        AdcStyle::Flash => Latency {
            cycles: 1.0,
            comparators: (1u64 << bits) - 1,
        },
        AdcStyle::Hybrid { flash_bits } => {
            if flash_bits == 0 || flash_bits >= bits {
                return Err(Error::param(format!(
                    "hybrid Flash stage of {flash_bits} bits in a {bits}-bit converter"
                )));
            }
            Latency {
                cycles: (1 + bits - flash_bits) as f64,
                comparators: (1u64 << flash_bits) - 1,
            }
        }
        AdcStyle::Asymmetric { expected_depth } => {
            if !(expected_depth.is_finite() && expected_depth >= 0.0) {
                return Err(Error::param(format!(
                    "expected search depth {expected_depth} is invalid"
                )));
            }
            Latency {
                cycles: expected_depth,
                comparators: 1,
            }
        }
    })
}

/// In-memory conversion energy when the search takes `expected_comparisons`
/// instead of `bits`.
pub fn asymmetric_energy(table: &CostTable, bits: u32, expected_comparisons: f64) -> f64 {
    table.in_memory.energy_pj * expected_comparisons / bits as f64
}

/// Conversions per second for a left/right pair that alternates compute
/// and digitize roles: half of one array's compute rate.
pub fn interleaved_pair_throughput(array_compute_rate: f64) -> f64 {
    array_compute_rate / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AreaStyle {
    Sar,
    Flash,
    InMemory,
}

impl AreaStyle {
    pub fn name(self) -> &'static str {
        match self {
            AreaStyle::Sar => "sar",
            AreaStyle::Flash => "flash",
            AreaStyle::InMemory => "in_memory",
        }
    }
}

/// Area extrapolated from the table's 5-bit entries.
///
/// Flash scales with its `2^B - 1` comparators, SAR with its binary-weighted
/// capacitor array (`2^B` units), and the in-memory converter, whose
/// capacitors are existing column lines, with its `B`-bit control logic.
pub fn area_model(table: &CostTable, style: AreaStyle, bits: u32) -> f64 {
    let b = bits as f64;
    let r = REFERENCE_BITS as f64;
    match style {
        AreaStyle::Flash => table.flash.area_um2 * (2f64.powf(b) - 1.0) / (2f64.powf(r) - 1.0),
        AreaStyle::Sar => table.sar.area_um2 * 2f64.powf(b - r),
        AreaStyle::InMemory => table.in_memory.area_um2 * b / r,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub bits: u32,
    pub style: &'static str,
    pub area_um2: f64,
    pub latency_cycles: f64,
}

/// Area and latency per style across a range of bit precisions. In-memory
/// hybrid rows appear only where `bits > flash_bits`.
pub fn design_space(table: &CostTable, bits: RangeInclusive<u32>, flash_bits: u32) -> Result<Vec<DesignPoint>> {
    table.validate()?;
    let mut out = Vec::new();
    for b in bits {
        let sar = latency_model(AdcStyle::Sar, b)?;
        let flash = latency_model(AdcStyle::Flash, b)?;
        out.push(DesignPoint {
            bits: b,
            style: "sar",
            area_um2: area_model(table, AreaStyle::Sar, b),
            latency_cycles: sar.cycles,
        });
        out.push(DesignPoint {
            bits: b,
            style: "flash",
            area_um2: area_model(table, AreaStyle::Flash, b),
            latency_cycles: flash.cycles,
        });
        out.push(DesignPoint {
            bits: b,
            style: "in_memory_sar",
            area_um2: area_model(table, AreaStyle::InMemory, b),
            latency_cycles: sar.cycles,
        });
        if b > flash_bits && flash_bits > 0 {
            let hybrid = latency_model(AdcStyle::Hybrid { flash_bits }, b)?;
            out.push(DesignPoint {
                bits: b,
                style: "in_memory_hybrid",
                area_um2: area_model(table, AreaStyle::InMemory, b),
                latency_cycles: hybrid.cycles,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Conv1x1,
    BwhtLayer,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Conv1x1 => "conv1x1",
            LayerKind::BwhtLayer => "bwht",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerShape {
    c_in: usize,
    c_out: usize,
    kind: LayerKind,
}

impl LayerShape {
    pub fn new(c_in: usize, c_out: usize, kind: LayerKind) -> Result<Self> {
        if c_in == 0 || c_out == 0 {
            return Err(Error::param(format!(
                "layer dimensions {c_in}x{c_out} must be positive"
            )));
        }
        Ok(LayerShape { c_in, c_out, kind })
    }

    pub fn c_in(&self) -> usize {
        self.c_in
    }

    pub fn c_out(&self) -> usize {
        self.c_out
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    /// Channel width a transform layer operates on.
    pub fn channels(&self) -> usize {
        self.c_in.max(self.c_out)
    }

    /// The transform layer that would stand in for this one.
    pub fn as_bwht(&self) -> LayerShape {
        LayerShape {
            kind: LayerKind::BwhtLayer,
            ..*self
        }
    }
}

/// Trainable parameters: the full weight matrix for a 1x1 convolution, one
/// threshold per channel for a transform layer.
pub fn layer_params(shape: &LayerShape) -> u64 {
    match shape.kind {
        LayerKind::Conv1x1 => (shape.c_in * shape.c_out) as u64,
        LayerKind::BwhtLayer => shape.channels() as u64,
    }
}

/// Per-position arithmetic. A multiply-accumulate counts as one multiply and
/// one addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub multiply_adds: u64,
    pub multiplies: u64,
    pub additions: u64,
}

/// Operation count per spatial position. For a transform layer the
/// `input_len`-long channel vector is planned blockwise and each block of
/// size `N` costs `N log2 N` additions forward and again inverse.
pub fn layer_macs(shape: &LayerShape, input_len: usize) -> Result<OpCount> {
    Ok(match shape.kind {
        LayerKind::Conv1x1 => {
            let macs = (shape.c_in * shape.c_out) as u64;
            OpCount {
                multiply_adds: macs,
                multiplies: macs,
                additions: macs,
            }
        }
        LayerKind::BwhtLayer => {
            let plan = bwht_plan(input_len)?;
            let butterflies: u64 = plan
                .block_sizes()
                .iter()
                .map(|&n| (n as u64) * n.trailing_zeros() as u64)
                .sum();
            OpCount {
                multiply_adds: 0,
                multiplies: 0,
                additions: 2 * butterflies,
            }
        }
    })
}

/// Fraction of parameters removed by swapping `conv` for its transform layer.
pub fn param_reduction(conv: &LayerShape) -> f64 {
    let before = layer_params(&LayerShape {
        kind: LayerKind::Conv1x1,
        ..*conv
    }) as f64;
    let after = layer_params(&conv.as_bwht()) as f64;
    1.0 - after / before
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReplacement {
    pub shape: LayerShape,
    pub conv_params: u64,
    pub bwht_params: u64,
    pub conv_ops: OpCount,
    pub bwht_ops: OpCount,
}

/// Before/after accounting for each layer of a list.
pub fn replacement_report(layers: &[LayerShape]) -> Result<Vec<LayerReplacement>> {
    layers
        .iter()
        .map(|l| {
            let conv = LayerShape {
                kind: LayerKind::Conv1x1,
                ..*l
            };
            let bwht = l.as_bwht();
            Ok(LayerReplacement {
                shape: *l,
                conv_params: layer_params(&conv),
                bwht_params: layer_params(&bwht),
                conv_ops: layer_macs(&conv, conv.channels())?,
                bwht_ops: layer_macs(&bwht, bwht.channels())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ratios() {
        let r = ratio_report(&CostTable::default()).unwrap().rounded();
        assert_eq!(r.area_sar, 25.2);
        assert_eq!(r.area_flash, 51.5);
        assert_eq!(r.energy_sar, 1.4);
        assert_eq!(r.energy_flash, 12.8);
    }

    #[test]
    fn identical_rows_give_unit_ratios() {
        let e = CostEntry {
            tech_nm: 28.0,
            area_um2: 100.0,
            energy_pj: 3.0,
        };
        let r = ratio_report(&CostTable {
            sar: e,
            flash: e,
            in_memory: e,
        })
        .unwrap();
        assert_eq!(r.entries().map(|(_, v)| v), [1.0; 4]);
    }

    #[test]
    fn rejects_non_positive_entries() {
        let mut t = CostTable::default();
        t.flash.energy_pj = 0.0;
        assert!(ratio_report(&t).is_err());
    }

    #[test]
    fn latency_examples() {
        assert_eq!(latency_model(AdcStyle::Sar, 5).unwrap().cycles, 5.0);
        let f = latency_model(AdcStyle::Flash, 5).unwrap();
        assert_eq!((f.cycles, f.comparators), (1.0, 31));
        assert_eq!(
            latency_model(AdcStyle::Hybrid { flash_bits: 2 }, 5).unwrap().cycles,
            4.0
        );
        assert_eq!(
            latency_model(AdcStyle::Asymmetric { expected_depth: 3.4 }, 5)
                .unwrap()
                .cycles,
            3.4
        );
        assert!(latency_model(AdcStyle::Hybrid { flash_bits: 5 }, 5).is_err());
    }

    #[test]
    fn flash_area_grows_exponentially() {
        let t = CostTable::default();
        assert_eq!(area_model(&t, AreaStyle::Flash, 5), t.flash.area_um2);
        let a6 = area_model(&t, AreaStyle::Flash, 6);
        let a7 = area_model(&t, AreaStyle::Flash, 7);
        assert!(a7 / a6 > 1.9);
        assert!(area_model(&t, AreaStyle::InMemory, 8) < area_model(&t, AreaStyle::Sar, 8));
    }

    #[test]
    fn params_and_macs() {
        let conv = LayerShape::new(64, 128, LayerKind::Conv1x1).unwrap();
        assert_eq!(layer_params(&conv), 8192);
        assert_eq!(layer_params(&conv.as_bwht()), 128);
        assert!((param_reduction(&conv) - (1.0 - 128.0 / 8192.0)).abs() < 1e-15);

        let sq = LayerShape::new(64, 64, LayerKind::Conv1x1).unwrap();
        assert_eq!(layer_macs(&sq, 64).unwrap().multiply_adds, 4096);
        let ops = layer_macs(&sq.as_bwht(), 64).unwrap();
        assert_eq!((ops.additions, ops.multiplies), (768, 0));
    }

    #[test]
    fn bad_layer_shape() {
        assert!(LayerShape::new(0, 4, LayerKind::Conv1x1).is_err());
    }

    #[test]
    fn design_space_rows() {
        let pts = design_space(&CostTable::default(), 1..=6, 2).unwrap();
        // 3 rows for b <= 2, 4 rows above
        assert_eq!(pts.len(), 3 * 2 + 4 * 4);
        let hybrid5 = pts
            .iter()
            .find(|p| p.bits == 5 && p.style == "in_memory_hybrid")
            .unwrap();
        assert_eq!(hybrid5.latency_cycles, 4.0);
    }

    #[test]
    fn energy_scales_with_comparisons() {
        let t = CostTable::default();
        assert_eq!(asymmetric_energy(&t, 5, 5.0), t.in_memory.energy_pj);
        assert!((asymmetric_energy(&t, 5, 3.7) - 74.23 * 3.7 / 5.0).abs() < 1e-12);
        assert_eq!(interleaved_pair_throughput(10e6), 5e6);
    }
}
