use fdcim::wht::{bwht_forward, bwht_inverse, bwht_plan, fwht, transform_matrix, RowOrder};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

/// Hadamard entry from the bitwise-parity identity.
fn parity_entry(i: usize, j: usize) -> i64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Rows of the parity Hadamard matrix, stably sorted by sign changes.
fn oracle_matrix(k: u32, ordering: RowOrder) -> Vec<Vec<i64>> {
    let n = 1usize << k;
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| parity_entry(i, j)).collect()).collect();
    if ordering == RowOrder::Sequency {
        rows.sort_by_key(|r| r.windows(2).filter(|w| w[0] != w[1]).count());
    }
    rows
}

fn matvec(m: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn matrices_match_parity_oracle() {
    for k in 0..=8 {
        for ordering in [RowOrder::Natural, RowOrder::Sequency] {
            let m = transform_matrix(k, ordering).unwrap();
            let oracle = oracle_matrix(k, ordering);
            for (i, row) in oracle.iter().enumerate() {
                let got: Vec<i64> = m.row(i).iter().map(|&v| v as i64).collect();
                assert_eq!(&got, row, "k={k} {ordering:?} row {i}");
            }
        }
    }
}

#[test]
fn sequency_rows_have_distinct_sign_changes() {
    for k in 0..=10 {
        let m = transform_matrix(k, RowOrder::Sequency).unwrap();
        for (s, row) in m.rows().enumerate() {
            assert_eq!(row.windows(2).filter(|w| w[0] != w[1]).count(), s);
        }
    }
}

#[test]
fn block_diagonal_oracle_m100() {
    let plan = bwht_plan(100).unwrap();
    assert_eq!(plan.block_sizes(), &[64, 32, 4]);
    let x: Vec<i64> = (0..100).map(|i| (i * 37 % 23) as i64 - 11).collect();
    let got = bwht_forward(&plan, &x).unwrap();

    let mut expected = Vec::new();
    let mut offset = 0;
    for &n in plan.block_sizes() {
        let w = oracle_matrix(n.trailing_zeros(), RowOrder::Sequency);
        let mut seg = vec![0i64; n];
        for (i, v) in seg.iter_mut().enumerate() {
            if offset + i < x.len() {
                *v = x[offset + i];
            }
        }
        expected.extend(matvec(&w, &seg));
        offset += n;
    }
    assert_eq!(got, expected);
}

#[test]
fn padded_block_oracle_m101() {
    let plan = bwht_plan(101).unwrap();
    assert_eq!(plan.pads(), &[0, 0, 0, 3]);
    let x: Vec<i64> = (0..101).map(|i| i as i64 - 50).collect();
    let got = bwht_forward(&plan, &x).unwrap();
    assert_eq!(got.len(), 104);
    let w = oracle_matrix(2, RowOrder::Sequency);
    assert_eq!(&got[100..], matvec(&w, &[50, 0, 0, 0]).as_slice());
}

#[test]
fn rational_round_trip_all_lengths() {
    for m in 1..=256usize {
        let plan = bwht_plan(m).unwrap();
        let x: Vec<BigRational> = (0..m)
            .map(|i| {
                BigRational::new(
                    BigInt::from((i as i64 * 7919) % 101 - 50),
                    BigInt::from(1 + i as i64 % 7),
                )
            })
            .collect();
        let coeffs = bwht_forward(&plan, &x).unwrap();
        let back = bwht_inverse(&plan, &coeffs).unwrap();
        assert_eq!(back, x, "m={m}");
    }
}

proptest! {
    #[test]
    fn fwht_equals_matrix_product(
        x in (0u32..=8).prop_flat_map(|k| prop::collection::vec(-1000i64..1000, 1usize << k)),
        seq in any::<bool>(),
    ) {
        let ordering = if seq { RowOrder::Sequency } else { RowOrder::Natural };
        let k = x.len().trailing_zeros();
        let got = fwht(&x, ordering).unwrap();
        prop_assert_eq!(got, matvec(&oracle_matrix(k, ordering), &x));
    }

    #[test]
    fn natural_fwht_is_involution_up_to_n(x in prop::collection::vec(-1000i64..1000, 64)) {
        let twice = fwht(&fwht(&x, RowOrder::Natural).unwrap(), RowOrder::Natural).unwrap();
        prop_assert_eq!(twice, x.iter().map(|v| v * 64).collect::<Vec<_>>());
    }

    #[test]
    fn bwht_is_linear(m in 1usize..200, a in -5i64..5, b in -5i64..5, s in any::<u64>()) {
        let plan = bwht_plan(m).unwrap();
        let x: Vec<i64> = (0..m).map(|i| ((s >> (i % 50)) & 7) as i64 - 3).collect();
        let y: Vec<i64> = (0..m).map(|i| ((s >> ((i + 13) % 50)) & 15) as i64 - 8).collect();
        let z: Vec<i64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = bwht_forward(&plan, &x).unwrap();
        let fy = bwht_forward(&plan, &y).unwrap();
        let fz = bwht_forward(&plan, &z).unwrap();
        let comb: Vec<i64> = fx.iter().zip(&fy).map(|(p, q)| a * p + b * q).collect();
        prop_assert_eq!(fz, comb);
    }

    #[test]
    fn plan_covers_input(m in 1usize..5000) {
        let plan = bwht_plan(m).unwrap();
        prop_assert_eq!(plan.padded_len() - plan.total_padding(), m);
        for &n in plan.block_sizes() {
            prop_assert!(n.is_power_of_two());
        }
        if m.is_power_of_two() {
            prop_assert_eq!(plan.block_sizes(), &[m][..]);
        }
    }
}
