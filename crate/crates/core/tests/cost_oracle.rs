use fdcim::cost::{
    latency_model, layer_macs, layer_params, param_reduction, ratio_report, round1, AdcStyle, CostTable, LayerKind,
    LayerShape,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// Exact value of a decimal literal.
fn dec(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let num: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(num, BigInt::from(10u32).pow(frac.len() as u32))
}

#[test]
fn ratios_match_rational_oracle() {
    let r = ratio_report(&CostTable::default()).unwrap();
    let cases = [
        (r.area_sar, dec("5235.20") / dec("207.8"), 25.2),
        (r.area_flash, dec("10703.36") / dec("207.8"), 51.5),
        (r.energy_sar, dec("105") / dec("74.23"), 1.4),
        (r.energy_flash, dec("952") / dec("74.23"), 12.8),
    ];
    for (got, exact, rounded) in cases {
        let exact = exact.to_f64().unwrap();
        assert!((got - exact).abs() <= 1e-12 * exact);
        assert_eq!(round1(got), rounded);
    }
}

#[test]
fn identical_rows_give_unit_ratios() {
    let mut t = CostTable::default();
    t.sar = t.in_memory;
    t.flash = t.in_memory;
    let r = ratio_report(&t).unwrap();
    assert_eq!(
        (r.area_sar, r.area_flash, r.energy_sar, r.energy_flash),
        (1.0, 1.0, 1.0, 1.0)
    );
}

#[test]
fn single_layer_reduction() {
    let conv = LayerShape::new(64, 128, LayerKind::Conv1x1).unwrap();
    assert_eq!(layer_params(&conv), 8192);
    assert_eq!(layer_params(&conv.as_bwht()), 128);
    assert!((param_reduction(&conv) - (1.0 - 128.0 / 8192.0)).abs() < 1e-15);
    let ops = layer_macs(&LayerShape::new(64, 64, LayerKind::BwhtLayer).unwrap(), 64).unwrap();
    assert_eq!((ops.additions, ops.multiplies), (768, 0));
}

proptest! {
    #[test]
    fn hybrid_and_asymmetric_not_slower_than_sar(bits in 2u32..=16, m in 1u32..16, depth in 0.0f64..1.0) {
        prop_assume!(m < bits);
        let sar = latency_model(AdcStyle::Sar, bits).unwrap().cycles;
        let hyb = latency_model(AdcStyle::Hybrid { flash_bits: m }, bits).unwrap().cycles;
        let asym = latency_model(AdcStyle::Asymmetric { expected_depth: depth * bits as f64 }, bits).unwrap().cycles;
        prop_assert!(hyb <= sar);
        prop_assert!(asym <= sar);
    }

    #[test]
    fn bwht_params_depend_only_on_widest_dimension(a in 1usize..2048, b in 1usize..2048) {
        let p = layer_params(&LayerShape::new(a, b, LayerKind::BwhtLayer).unwrap());
        prop_assert_eq!(p, a.max(b) as u64);
        let q = layer_params(&LayerShape::new(a.max(b), 1, LayerKind::BwhtLayer).unwrap());
        prop_assert_eq!(p, q);
    }
}
