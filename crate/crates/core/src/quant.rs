//! Fixed-point quantization, bitplane decomposition, and the soft-threshold
//! activation with its (sub)gradients.

use crate::error::{Error, Result};

/// Widest quantizer the front end accepts.
pub const MAX_QUANT_BITS: u32 = 16;

/// Widest fixed-point word carried between stages. Crossbar outputs grow one
/// bit per transform, so this is larger than [`MAX_QUANT_BITS`].
pub const MAX_WORD_BITS: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signedness {
    Unsigned,
    TwosComplement,
}

/// Inclusive integer range representable in `bits` under `signedness`.
pub fn code_range(bits: u32, signedness: Signedness) -> (i64, i64) {
    match signedness {
        Signedness::Unsigned => (0, (1i64 << bits) - 1),
        Signedness::TwosComplement => (-(1i64 << (bits - 1)), (1i64 << (bits - 1)) - 1),
    }
}

fn check_word_bits(bits: u32) -> Result<()> {
    if bits == 0 || bits > MAX_WORD_BITS {
        return Err(Error::param(format!("word width {bits} outside 1..={MAX_WORD_BITS}")));
    }
    Ok(())
}

/// Integer vector with a common real scale: `real = value * scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointVector {
    values: Vec<i64>,
    total_bits: u32,
    signedness: Signedness,
    scale: f64,
}

impl FixedPointVector {
    pub fn new(values: Vec<i64>, total_bits: u32, signedness: Signedness, scale: f64) -> Result<Self> {
        check_word_bits(total_bits)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(format!("scale must be finite and positive, got {scale}")));
        }
        let (lo, hi) = code_range(total_bits, signedness);
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v < lo || v > hi) {
            return Err(Error::param(format!(
                "element {i} = {v} does not fit {total_bits} bits ({signedness:?})"
            )));
        }
        Ok(FixedPointVector {
            values,
            total_bits,
            signedness,
            scale,
        })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dequantize(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64 * self.scale).collect()
    }
}

/// Uniform quantizer over `[lo, hi]`.
///
/// Levels are integer multiples of the step, so zero is always exactly
/// representable. Unsigned codes span `0..=2^B-1` with `hi` on the top code;
/// two's-complement codes span `-2^(B-1)..=2^(B-1)-1` with the step set by
/// `max(|lo|, |hi|) / 2^(B-1)`. Inputs are clamped to `[lo, hi]`, rounded
/// half away from zero, and saturated to the code range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    bits: u32,
    lo: f64,
    hi: f64,
    signedness: Signedness,
    step: f64,
}

impl Quantizer {
    pub fn new(bits: u32, range: (f64, f64), signedness: Signedness) -> Result<Self> {
        let (lo, hi) = range;
        if bits == 0 || bits > MAX_QUANT_BITS {
            return Err(Error::param(format!(
                "quantizer width {bits} outside 1..={MAX_QUANT_BITS}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(format!(
                "quantizer range [{lo}, {hi}] is not a finite lo < hi"
            )));
        }
        let step = match signedness {
            Signedness::Unsigned => {
                if hi <= 0.0 {
                    return Err(Error::param("unsigned quantizer needs hi > 0"));
                }
                hi / ((1u64 << bits) - 1) as f64
            }
            Signedness::TwosComplement => lo.abs().max(hi.abs()) / (1u64 << (bits - 1)) as f64,
        };
        Ok(Quantizer {
            bits,
            lo,
            hi,
            signedness,
            step,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }

    pub fn code(&self, x: f64) -> i64 {
        let (cmin, cmax) = code_range(self.bits, self.signedness);
        let raw = (x.clamp(self.lo, self.hi) / self.step).round();
        (raw as i64).clamp(cmin, cmax)
    }

    /// True when `code` sits on either end of the code range.
    pub fn is_saturated(&self, code: i64) -> bool {
        let (cmin, cmax) = code_range(self.bits, self.signedness);
        code == cmin || code == cmax
    }

    pub fn quantize(&self, x: &[f64]) -> Result<FixedPointVector> {
        if x.is_empty() {
            return Err(Error::shape("cannot quantize an empty vector"));
        }
        if let Some(i) = x.iter().position(|v| v.is_nan()) {
            return Err(Error::param(format!("element {i} is NaN")));
        }
        Ok(FixedPointVector {
            values: x.iter().map(|&v| self.code(v)).collect(),
            total_bits: self.bits,
            signedness: self.signedness,
            scale: self.step,
        })
    }
}

pub fn quantize(x: &[f64], bits: u32, range: (f64, f64), signedness: Signedness) -> Result<FixedPointVector> {
    Quantizer::new(bits, range, signedness)?.quantize(x)
}

/// Bits of equal significance grouped across all elements.
///
/// Plane `j` holds bit `j` (LSB = 0) of every element. Integer plane weights
/// are `2^j`, except the two's-complement sign plane which weighs `-2^(B-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BitplaneTensor {
    planes: Vec<Vec<u8>>,
    weights: Vec<i64>,
    scale: f64,
    len: usize,
    signedness: Signedness,
}

impl BitplaneTensor {
    /// Wraps explicit planes (index = significance) as a tensor.
    pub fn from_planes(planes: Vec<Vec<u8>>, signedness: Signedness, scale: f64) -> Result<Self> {
        let bits = planes.len() as u32;
        check_word_bits(bits)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(format!("scale must be finite and positive, got {scale}")));
        }
        let len = planes[0].len();
        for (j, p) in planes.iter().enumerate() {
            if p.len() != len {
                return Err(Error::shape(format!(
                    "plane {j} has length {}, expected {len}",
                    p.len()
                )));
            }
            if p.iter().any(|&b| b > 1) {
                return Err(Error::param(format!("plane {j} contains a non-binary entry")));
            }
        }
        Ok(BitplaneTensor {
            weights: plane_weights(bits, signedness),
            planes,
            scale,
            len,
            signedness,
        })
    }

    pub fn planes(&self) -> &[Vec<u8>] {
        &self.planes
    }

    pub fn plane(&self, j: usize) -> &[u8] {
        &self.planes[j]
    }

    pub fn num_planes(&self) -> usize {
        self.planes.len()
    }

    /// Integer significance of each plane, sign plane negative when signed.
    pub fn int_weights(&self) -> &[i64] {
        &self.weights
    }

    /// Real-valued weight of plane `j`.
    pub fn plane_weight(&self, j: usize) -> f64 {
        self.weights[j] as f64 * self.scale
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }
}

fn plane_weights(bits: u32, signedness: Signedness) -> Vec<i64> {
    (0..bits)
        .map(|j| {
            let w = 1i64 << j;
            if signedness == Signedness::TwosComplement && j == bits - 1 {
                -w
            } else {
                w
            }
        })
        .collect()
}

pub fn to_bitplanes(v: &FixedPointVector) -> BitplaneTensor {
    let bits = v.total_bits;
    let planes = (0..bits)
        .map(|j| v.values.iter().map(|&x| ((x >> j) & 1) as u8).collect())
        .collect();
    BitplaneTensor {
        planes,
        weights: plane_weights(bits, v.signedness),
        scale: v.scale,
        len: v.values.len(),
        signedness: v.signedness,
    }
}

pub fn from_bitplanes(t: &BitplaneTensor) -> FixedPointVector {
    let values = (0..t.len)
        .map(|i| t.planes.iter().zip(&t.weights).map(|(p, &w)| p[i] as i64 * w).sum())
        .collect();
    FixedPointVector {
        values,
        total_bits: t.planes.len() as u32,
        signedness: t.signedness,
        scale: t.scale,
    }
}

/// Per-channel (or broadcast scalar) dead-zone half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdParams {
    values: Vec<f64>,
}

impl ThresholdParams {
    /// One threshold shared by every channel.
    pub fn scalar(t: f64) -> Result<Self> {
        Self::per_channel(vec![t])
    }

    pub fn per_channel(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("threshold vector is empty"));
        }
        if let Some((i, t)) = values.iter().enumerate().find(|(_, t)| t.is_nan() || **t < 0.0) {
            return Err(Error::param(format!("threshold {i} = {t} is negative or NaN")));
        }
        Ok(ThresholdParams { values })
    }

    pub fn zero() -> Self {
        ThresholdParams { values: vec![0.0] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_scalar(&self) -> bool {
        self.values.len() == 1
    }

    pub fn get(&self, channel: usize) -> f64 {
        if self.is_scalar() {
            self.values[0]
        } else {
            self.values[channel]
        }
    }

    /// Checks that the thresholds can address `n` channels.
    pub fn check_channels(&self, n: usize) -> Result<()> {
        if self.is_scalar() || self.values.len() == n {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "{} thresholds for {n} channels",
                self.values.len()
            )))
        }
    }
}

#[inline]
pub fn soft_threshold_scalar(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `S_T(x) = sign(x) * max(|x| - T, 0)`, elementwise.
pub fn soft_threshold(x: &[f64], t: &ThresholdParams) -> Result<Vec<f64>> {
    t.check_channels(x.len())?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| soft_threshold_scalar(v, t.get(i)))
        .collect())
}

/// Returns `(dy/dx, dy/dT)`; both are 0 inside the dead zone and on its edge.
pub fn soft_threshold_grads(x: &[f64], t: &ThresholdParams) -> Result<(Vec<f64>, Vec<f64>)> {
    t.check_channels(x.len())?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let ti = t.get(i);
            if v > ti {
                (1.0, -1.0)
            } else if v < -ti {
                (1.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        })
        .unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_zero() {
        for bits in 1..=16 {
            let q = quantize(&[0.0], bits, (-1.0, 1.0), Signedness::TwosComplement).unwrap();
            assert_eq!(q.values(), &[0]);
        }
    }

    #[test]
    fn top_of_range_saturates() {
        let q = quantize(&[1.0], 3, (0.0, 1.0), Signedness::Unsigned).unwrap();
        assert_eq!(q.values(), &[7]);
        let q = quantize(&[5.0, -3.0], 3, (0.0, 1.0), Signedness::Unsigned).unwrap();
        assert_eq!(q.values(), &[7, 0]);
    }

    #[test]
    fn quantize_errors() {
        assert!(matches!(
            quantize(&[], 4, (0.0, 1.0), Signedness::Unsigned),
            Err(Error::Shape(_))
        ));
        assert!(quantize(&[0.1], 0, (0.0, 1.0), Signedness::Unsigned).is_err());
        assert!(quantize(&[0.1], 17, (0.0, 1.0), Signedness::Unsigned).is_err());
        assert!(quantize(&[0.1], 4, (1.0, 1.0), Signedness::Unsigned).is_err());
        assert!(quantize(&[f64::NAN], 4, (0.0, 1.0), Signedness::Unsigned).is_err());
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        // step = 1 for a 3-bit signed quantizer over [-4, 4].
        let q = Quantizer::new(3, (-4.0, 4.0), Signedness::TwosComplement).unwrap();
        assert_eq!(q.step(), 1.0);
        assert_eq!(q.code(0.5), 1);
        assert_eq!(q.code(-0.5), -1);
        assert_eq!(q.code(1.49), 1);
        assert_eq!(q.code(-2.5), -3);
    }

    #[test]
    fn bitplane_examples() {
        let v = FixedPointVector::new(vec![3, 1], 2, Signedness::Unsigned, 1.0).unwrap();
        let t = to_bitplanes(&v);
        assert_eq!(t.plane(1), &[1, 0]);
        assert_eq!(t.plane(0), &[1, 1]);
        assert_eq!(t.int_weights(), &[1, 2]);

        let v = FixedPointVector::new(vec![-1], 2, Signedness::TwosComplement, 0.5).unwrap();
        let t = to_bitplanes(&v);
        assert_eq!(t.plane(1), &[1]);
        assert_eq!(t.plane(0), &[1]);
        assert_eq!(t.plane_weight(1), -2.0 * 0.5);
        assert_eq!(t.plane_weight(0), 0.5);
        assert_eq!(from_bitplanes(&t), v);
    }

    #[test]
    fn fixed_point_rejects_overflow() {
        assert!(FixedPointVector::new(vec![4], 2, Signedness::Unsigned, 1.0).is_err());
        assert!(FixedPointVector::new(vec![-3], 2, Signedness::TwosComplement, 1.0).is_err());
        assert!(FixedPointVector::new(vec![-1], 2, Signedness::Unsigned, 1.0).is_err());
        assert!(FixedPointVector::new(vec![1], 2, Signedness::Unsigned, 0.0).is_err());
    }

    #[test]
    fn from_planes_validates() {
        assert!(BitplaneTensor::from_planes(vec![vec![1, 0], vec![1]], Signedness::Unsigned, 1.0).is_err());
        assert!(BitplaneTensor::from_planes(vec![vec![2]], Signedness::Unsigned, 1.0).is_err());
        let t = BitplaneTensor::from_planes(vec![vec![1, 0, 1]], Signedness::Unsigned, 1.0).unwrap();
        assert_eq!(from_bitplanes(&t).values(), &[1, 0, 1]);
    }

    #[test]
    fn soft_threshold_branches() {
        let t = ThresholdParams::scalar(2.0).unwrap();
        assert_eq!(
            soft_threshold(&[5.0, -5.0, 1.0, 2.0, -2.0], &t).unwrap(),
            vec![3.0, -3.0, 0.0, 0.0, 0.0]
        );
        let id = ThresholdParams::zero();
        let x = [1.5, -0.25, 0.0, 7.0];
        assert_eq!(soft_threshold(&x, &id).unwrap(), x.to_vec());
    }

    #[test]
    fn soft_threshold_rejects_negative() {
        assert!(ThresholdParams::scalar(-0.1).is_err());
        assert!(ThresholdParams::scalar(f64::NAN).is_err());
        let t = ThresholdParams::per_channel(vec![1.0, 2.0]).unwrap();
        assert!(matches!(soft_threshold(&[1.0, 2.0, 3.0], &t), Err(Error::Shape(_))));
    }

    #[test]
    fn per_channel_thresholds() {
        let t = ThresholdParams::per_channel(vec![1.0, 3.0]).unwrap();
        assert_eq!(soft_threshold(&[2.0, 2.0], &t).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn grads_examples() {
        let t = ThresholdParams::scalar(2.0).unwrap();
        let (dx, dt) = soft_threshold_grads(&[5.0, 0.5, -5.0, 2.0], &t).unwrap();
        assert_eq!(dx, vec![1.0, 0.0, 1.0, 0.0]);
        assert_eq!(dt, vec![-1.0, 0.0, 1.0, 0.0]);
    }
}
