use fdcim::adc::{
    asymmetric_convert, build_asymmetric_tree, common_mode_trial, dnl_inl, expected_comparisons, mav_pmf,
    optimal_expected_comparisons, sar_convert, transfer_curve, uniform_sweep, AdcConfig, AdcMode, AdcNetwork, CapDac,
    MavPmf, MemoryAdc, SearchTree,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ideal_code(vin: f64, vdd: f64, bits: u32) -> u32 {
    let n = 1u32 << bits;
    ((vin / vdd * n as f64).floor().max(0.0) as u32).min(n - 1)
}

/// Every alphabetic binary tree over `lo..=hi`, as leaf-depth vectors.
fn all_depth_vectors(lo: usize, hi: usize) -> Vec<Vec<usize>> {
    if lo == hi {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for t in lo + 1..=hi {
        for l in all_depth_vectors(lo, t - 1) {
            for r in all_depth_vectors(t, hi) {
                out.push(l.iter().chain(&r).map(|d| d + 1).collect());
            }
        }
    }
    out
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> MavPmf {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
    let s: f64 = raw.iter().sum();
    MavPmf::new(raw.into_iter().map(|v| v / s).collect()).unwrap()
}

#[test]
fn tree_dp_equals_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for bits in 1..=3u32 {
        let n = 1usize << bits;
        let trees = all_depth_vectors(0, n - 1);
        for _ in 0..200 {
            let pmf = random_pmf(&mut rng, n);
            let brute = trees
                .iter()
                .map(|d| d.iter().zip(pmf.probs()).map(|(&d, &p)| d as f64 * p).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let dp = optimal_expected_comparisons(&pmf);
            let tree = build_asymmetric_tree(&pmf);
            assert!((dp - brute).abs() < 1e-12, "bits={bits}");
            assert!((expected_comparisons(&tree, &pmf).unwrap() - brute).abs() < 1e-12);
        }
    }
}

#[test]
fn mav_pmf_matches_binomial_closed_form() {
    for (n_cols, bits) in [(32usize, 5u32), (16, 3), (7, 2), (100, 6)] {
        let pmf = mav_pmf(n_cols, bits).unwrap();
        let n_codes = 1usize << bits;
        let mut expect = vec![0.0; n_codes];
        let mut binom = 1.0f64;
        for i in 0..=n_cols {
            if i > 0 {
                binom = binom * (n_cols - i + 1) as f64 / i as f64;
            }
            let p = binom * 0.25f64.powi(i as i32) * 0.75f64.powi((n_cols - i) as i32);
            expect[((i * n_codes) / n_cols).min(n_codes - 1)] += p;
        }
        for (a, b) in pmf.probs().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn dac_reference_matches_charge_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mismatch: Vec<f64> = (0..32).map(|_| rng.random_range(-0.1..0.1)).collect();
    let dac = CapDac::with_mismatch(mismatch.clone(), 0.8).unwrap();
    let total: f64 = mismatch.iter().map(|m| 1.0 + m).sum();
    for _ in 0..100 {
        let subset: Vec<usize> = (0..32).filter(|_| rng.random_bool(0.5)).collect();
        let charge: f64 = subset.iter().map(|&i| 1.0 + mismatch[i]).sum();
        assert!((dac.reference(&subset).unwrap() - 0.8 * charge / total).abs() < 1e-12);
    }
    for k in 1..=32 {
        assert!(dac.reference_units(k) > dac.reference_units(k - 1));
    }
}

#[test]
fn dnl_inl_prefix_sum_over_mismatch_seeds() {
    for seed in 0..10 {
        let arrays: Vec<CapDac> = (0..2)
            .map(|i| CapDac::random_mismatch(32, 0.05, seed * 2 + i, 1.0).unwrap())
            .collect();
        let adc = MemoryAdc::new(AdcNetwork::new(arrays).unwrap(), AdcConfig::sar(5).unwrap()).unwrap();
        let curve = transfer_curve(&adc, &uniform_sweep(0.0, 1.0, 10_240)).unwrap();
        let lin = dnl_inl(&curve, 5, (0.0, 1.0)).unwrap();
        let mut acc = 0.0;
        for (d, i) in lin.dnl.iter().zip(&lin.inl) {
            acc += d;
            assert!((acc - i).abs() < 1e-9);
        }
        assert!(lin.missing_codes.is_empty());
        // widths tile the full scale
        assert!(lin.dnl.iter().sum::<f64>().abs() < 1e-9);
    }
}

#[test]
fn shared_array_mismatch_cancels() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let config = AdcConfig::sar(5).unwrap();
    for seed in 0..20 {
        let dac = CapDac::random_mismatch(32, 0.03, seed, 1.0).unwrap();
        let fractions: Vec<f64> = (0..2000).map(|_| rng.random_range(0.0..1.0)).collect();
        let out = common_mode_trial(&dac, &config, &fractions).unwrap();
        assert!(
            out.shared_abs_code_error < out.reference_only_abs_code_error,
            "seed {seed}: {out:?}"
        );
    }
}

proptest! {
    #[test]
    fn ideal_sar_equals_floor_quantizer(bits in 3u32..=5, u in 0.0f64..1.0) {
        let n = (1u32 << bits) as f64;
        let edge = (u * n).fract();
        prop_assume!(edge > 1e-9 && edge < 1.0 - 1e-9);
        let dac = CapDac::ideal(32, 1.2).unwrap();
        let trace = sar_convert(u * 1.2, &dac, &AdcConfig::sar(bits).unwrap()).unwrap();
        prop_assert_eq!(trace.code, ideal_code(u * 1.2, 1.2, bits));
        prop_assert_eq!(trace.comparisons, bits as usize);
    }

    #[test]
    fn hybrid_equals_sar_on_matched_arrays(seed in any::<u64>(), u in 0.0f64..1.0, m in 1u32..=3) {
        let dac = CapDac::random_mismatch(32, 0.05, seed, 1.0).unwrap();
        let network = AdcNetwork::new(vec![dac.clone(); 8]).unwrap();
        let sar = MemoryAdc::new(network.clone(), AdcConfig::sar(5).unwrap()).unwrap();
        let hybrid = MemoryAdc::new(network, AdcConfig::hybrid(5, m).unwrap()).unwrap();
        let a = sar.convert(u).unwrap();
        let b = hybrid.convert(u).unwrap();
        prop_assert_eq!(a.code, b.code);
        prop_assert_eq!(b.comparisons as u32, 1 + 5 - m);
    }

    #[test]
    fn any_tree_resolves_the_sar_code(seed in any::<u64>(), u in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pmf = random_pmf(&mut rng, 32);
        let dac = CapDac::random_mismatch(32, 0.05, seed, 1.0).unwrap();
        let asym = AdcConfig::new(5, 0.0, AdcMode::Asymmetric { tree: build_asymmetric_tree(&pmf) }).unwrap();
        let a = asymmetric_convert(u, &dac, &asym).unwrap();
        let s = sar_convert(u, &dac, &AdcConfig::sar(5).unwrap()).unwrap();
        prop_assert_eq!(a.code, s.code);
    }

    #[test]
    fn optimal_tree_never_worse_than_balanced(seed in any::<u64>(), bits in 1u32..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pmf = random_pmf(&mut rng, 1 << bits);
        let opt = optimal_expected_comparisons(&pmf);
        let bal = expected_comparisons(&SearchTree::balanced(bits).unwrap(), &pmf).unwrap();
        prop_assert!(opt <= bal + 1e-12);
        prop_assert!((bal - bits as f64).abs() < 1e-9);
    }
}
