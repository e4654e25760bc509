//! The named experiments. Each returns its artifacts in memory; nothing here
//! touches the filesystem.

use anyhow::{Context, Result};
use fdcim::adc::{
    build_asymmetric_tree, common_mode_trial, conversion_timeline, dnl_inl, expected_comparisons, mav_pmf,
    mav_pmf_with, optimal_expected_comparisons, transfer_curve, uniform_sweep, AdcConfig, AdcMode, AdcNetwork, CapDac,
    MavAlgebra, MemoryAdc, SearchTree,
};
use fdcim::cost::{
    asymmetric_energy, design_space, latency_model, param_reduction, ratio_report, replacement_report, round1,
    AdcStyle, LayerKind, LayerShape, MOBILENET_V2_REPORTED_PARAM_REDUCTION,
};
use fdcim::crossbar::dead_zone_gate;
use fdcim::quant::code_range;
use fdcim::wht::{bwht_forward, bwht_inverse, bwht_plan_with_min_block, sign_changes, transform_matrix};
use fdcim::{
    fwht, to_bitplanes, walsh, CrossbarArray, CrossbarConfig, EtMode, FixedPointVector, PlaneOrder, RowOrder,
    Signedness, ThresholdParams, WalshMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::output::{aligned_text, dat, flag, num, Artifact, Table};
use crate::Failure;

/// Independent, reproducible stream per case.
fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn invariant(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariant(what()).into())
    }
}

fn config_err(msg: String) -> anyhow::Error {
    Failure::Config(msg).into()
}

fn matvec(m: &WalshMatrix, x: &[i64]) -> Vec<i64> {
    m.rows()
        .map(|r| r.iter().zip(x).map(|(&w, &v)| w as i64 * v).sum())
        .collect()
}

fn is_orthogonal(m: &WalshMatrix) -> bool {
    let n = m.size() as i64;
    let rows: Vec<&[i8]> = m.rows().collect();
    rows.par_iter().enumerate().all(|(i, a)| {
        rows.iter().enumerate().all(|(j, b)| {
            let dot: i64 = a.iter().zip(*b).map(|(&x, &y)| (x * y) as i64).sum();
            dot == if i == j { n } else { 0 }
        })
    })
}

const TRANSFORM_ORDER_LIMIT: u32 = 12;

pub fn transform(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.transform;
    if s.max_order_log2 > TRANSFORM_ORDER_LIMIT {
        return Err(config_err(format!(
            "transform.max_order_log2 = {} exceeds the explicit-matrix limit {TRANSFORM_ORDER_LIMIT}",
            s.max_order_log2
        )));
    }
    let orders: Vec<u32> = (0..=s.max_order_log2).collect();
    let order_rows = orders
        .par_iter()
        .map(|&k| -> Result<(u32, bool, bool, bool, bool)> {
            let natural = transform_matrix(k, RowOrder::Natural)?;
            let sequency = transform_matrix(k, RowOrder::Sequency)?;
            let sorted = sequency.rows().enumerate().all(|(i, r)| sign_changes(r) == i);
            let mut rng = case_rng(cfg.seed, k as u64);
            let mut fast_ok = true;
            for _ in 0..s.vectors_per_order {
                let x: Vec<i64> = (0..natural.size()).map(|_| rng.random_range(-1000..=1000)).collect();
                fast_ok &= fwht(&x, RowOrder::Natural)? == matvec(&natural, &x);
                fast_ok &= fwht(&x, RowOrder::Sequency)? == matvec(&sequency, &x);
            }
            Ok((k, is_orthogonal(&natural), is_orthogonal(&sequency), sorted, fast_ok))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut orders_t = Table::new(
        "transform",
        &[
            "order_log2",
            "size",
            "orthogonal_natural",
            "orthogonal_sequency",
            "sequency_sorted",
            "vectors",
            "fwht_matches_matrix",
        ],
    );
    for &(k, on, os, sorted, fast) in &order_rows {
        orders_t.push(
            k as u64,
            vec![
                k.to_string(),
                (1u64 << k).to_string(),
                flag(on),
                flag(os),
                flag(sorted),
                s.vectors_per_order.to_string(),
                flag(fast),
            ],
        );
        invariant(on && os && sorted && fast, || {
            format!("transform checks failed at order 2^{k}")
        })?;
    }

    let lengths: Vec<usize> = (1..=s.bwht_max_len).collect();
    let plan_rows = lengths
        .par_iter()
        .map(|&m| -> Result<(usize, String, usize, usize, f64)> {
            let plan = bwht_plan_with_min_block(m, s.min_block)?;
            let mut rng = case_rng(cfg.seed, 1 << 32 | m as u64);
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1000..=1000) as f64).collect();
            let back = bwht_inverse(&plan, &bwht_forward(&plan, &x)?)?;
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let blocks = plan
                .block_sizes()
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("+");
            Ok((m, blocks, plan.total_padding(), plan.padded_len(), err))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut plans_t = Table::new(
        "transform",
        &[
            "length",
            "blocks",
            "padding",
            "padded_length",
            "round_trip_max_abs_error",
        ],
    );
    let mut padding_series = Vec::new();
    for (m, blocks, pad, padded, err) in plan_rows {
        invariant(err == 0.0, || {
            format!("blockwise round trip not exact at length {m}: {err}")
        })?;
        padding_series.push((m as f64, pad as f64));
        plans_t.push(
            m as u64,
            vec![m.to_string(), blocks, pad.to_string(), padded.to_string(), num(err)],
        );
    }

    Ok(vec![
        orders_t.to_csv("transform_orders.csv")?,
        plans_t.to_csv("transform_bwht.csv")?,
        dat("transform_bwht_padding.dat", "length", "padding", &padding_series),
    ])
}

fn plane_order(name: &str) -> Result<PlaneOrder> {
    match name {
        "msb_first" => Ok(PlaneOrder::MsbFirst),
        "lsb_first" => Ok(PlaneOrder::LsbFirst),
        other => Err(config_err(format!(
            "crossbar.plane_order = \"{other}\"; expected \"msb_first\" or \"lsb_first\""
        ))),
    }
}

#[derive(Debug, Default)]
struct EtStats {
    full_ops: f64,
    heuristic_ops: f64,
    sound_ops: f64,
    sound_cycles: f64,
    full_cycles: f64,
    sound_exact: usize,
    heuristic_elems_agree: usize,
    heuristic_vectors_agree: usize,
    elems: usize,
}

pub fn crossbar(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.crossbar;
    let order = plane_order(&s.plane_order)?;
    if s.trials == 0 {
        return Err(config_err("crossbar.trials must be positive".into()));
    }
    let signedness = if s.signed {
        Signedness::TwosComplement
    } else {
        Signedness::Unsigned
    };
    let cases: Vec<(u32, f64)> = s
        .order_log2
        .iter()
        .flat_map(|&k| s.thresholds.iter().map(move |&t| (k, t)))
        .collect();
    let xcfg = CrossbarConfig {
        comparator_offsets: vec![s.comparator_offset],
        mav_noise_sigma: s.noise_sigma,
        rng_seed: cfg.seed,
        plane_order: order,
        skip_zero_planes: true,
    };

    let results = cases
        .par_iter()
        .map(|&(k, t)| -> Result<EtStats> {
            let array = CrossbarArray::from_walsh(&walsh(k)?, &xcfg)?;
            let tp = ThresholdParams::scalar(t)?;
            let (lo, hi) = code_range(s.input_bits, signedness);
            // Same inputs for every threshold at a given size.
            let mut rng = case_rng(cfg.seed, k as u64);
            let mut st = EtStats::default();
            for trial in 0..s.trials {
                let values: Vec<i64> = (0..array.cols()).map(|_| rng.random_range(lo..=hi)).collect();
                let x = FixedPointVector::new(values, s.input_bits, signedness, s.input_scale)?;
                let planes = to_bitplanes(&x);
                let inv = trial as u64;
                let full = array.f0_transform_at(inv, &planes, EtMode::Full, &tp)?;
                let heur = array.f0_transform_at(inv, &planes, EtMode::HeuristicEt, &tp)?;
                let sound = array.f0_transform_at(inv, &planes, EtMode::SoundEt, &tp)?;
                let gated = dead_zone_gate(&full.output, &tp);
                st.full_ops += full.comparator_ops as f64;
                st.heuristic_ops += heur.comparator_ops as f64;
                st.sound_ops += sound.comparator_ops as f64;
                st.full_cycles += full.cycle_count as f64;
                st.sound_cycles += sound.cycle_count as f64;
                st.sound_exact += usize::from(sound.output.values() == gated.as_slice());
                let agree = heur.output.values().iter().zip(&gated).filter(|(a, b)| a == b).count();
                st.heuristic_elems_agree += agree;
                st.heuristic_vectors_agree += usize::from(agree == gated.len());
                st.elems += gated.len();
            }
            Ok(st)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = s.trials as f64;
    let mut table = Table::new(
        "crossbar",
        &[
            "order_log2",
            "size",
            "threshold",
            "trials",
            "full_ops_mean",
            "heuristic_ops_mean",
            "sound_ops_mean",
            "full_cycles_mean",
            "sound_cycles_mean",
            "sound_exact_rate",
            "heuristic_element_agreement",
            "heuristic_vector_agreement",
        ],
    );
    let mut series: Vec<(u32, f64, f64)> = Vec::new();
    for (id, (&(k, t), st)) in cases.iter().zip(&results).enumerate() {
        invariant(st.sound_exact == s.trials, || {
            format!("sound early termination diverged from the gated full transform (size 2^{k}, T={t})")
        })?;
        series.push((k, t, st.sound_ops / st.full_ops));
        table.push(
            id as u64,
            vec![
                k.to_string(),
                (1u64 << k).to_string(),
                num(t),
                s.trials.to_string(),
                num(st.full_ops / n),
                num(st.heuristic_ops / n),
                num(st.sound_ops / n),
                num(st.full_cycles / n),
                num(st.sound_cycles / n),
                num(st.sound_exact as f64 / n),
                num(st.heuristic_elems_agree as f64 / st.elems as f64),
                num(st.heuristic_vectors_agree as f64 / n),
            ],
        );
    }
    // Sound workload is non-increasing in T on a fixed input set.
    for &k in &s.order_log2 {
        let mut pts: Vec<(f64, f64)> = cases
            .iter()
            .zip(&results)
            .filter(|((kk, _), _)| *kk == k)
            .map(|(&(_, t), st)| (t, st.sound_ops))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        invariant(pts.windows(2).all(|w| w[1].1 <= w[0].1), || {
            format!("sound early-termination workload increased with T at size 2^{k}")
        })?;
    }

    let mut out = vec![table.to_csv("crossbar_et.csv")?];
    let mut orders = s.order_log2.clone();
    orders.sort_unstable();
    orders.dedup();
    for k in orders {
        let mut pts: Vec<(f64, f64)> = series.iter().filter(|p| p.0 == k).map(|p| (p.1, p.2)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.push(dat(
            &format!("crossbar_workload_n{}.dat", 1u64 << k),
            "threshold",
            "sound_ops_fraction",
            &pts,
        ));
    }
    Ok(out)
}

fn build_network(n_arrays: usize, columns: usize, vdd: f64, sigma: f64, seed: u64) -> Result<AdcNetwork> {
    let mut rng = case_rng(seed, u64::MAX);
    let arrays = (0..n_arrays)
        .map(|_| CapDac::random_mismatch(columns, sigma, rng.random(), vdd))
        .collect::<fdcim::Result<Vec<_>>>()?;
    Ok(AdcNetwork::new(arrays)?)
}

fn adc_mode(cfg: &Config) -> Result<AdcMode> {
    let s = &cfg.adc;
    Ok(match s.mode.as_str() {
        "sar" => AdcMode::Sar,
        "flash" => AdcMode::Flash,
        "hybrid" => AdcMode::Hybrid {
            flash_bits: s.flash_bits,
        },
        "asymmetric" => AdcMode::Asymmetric {
            tree: build_asymmetric_tree(&mav_pmf(s.columns, s.bits)?),
        },
        other => {
            return Err(config_err(format!(
                "adc.mode = \"{other}\"; expected sar, flash, hybrid or asymmetric"
            )))
        }
    })
}

fn arrays_needed(mode: &AdcMode, bits: u32) -> usize {
    match mode {
        AdcMode::Sar | AdcMode::Asymmetric { .. } => 2,
        AdcMode::Flash => 1 << bits,
        AdcMode::Hybrid { flash_bits } => 1 << flash_bits,
    }
}

fn ideal_code(vin: f64, vdd: f64, bits: u32) -> u32 {
    let n = 1u32 << bits;
    ((vin / vdd * n as f64).floor().max(0.0) as u32).min(n - 1)
}

fn on_code_boundary(vin: f64, vdd: f64, bits: u32) -> bool {
    let pos = vin / vdd * (1u64 << bits) as f64;
    (pos - pos.round()).abs() < 1e-9
}

pub fn adc(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.adc;
    if s.sweep_points == 0 {
        return Err(config_err("adc.sweep_points must be positive".into()));
    }
    let config = AdcConfig::new(s.bits, s.comparator_offset, adc_mode(cfg)?)?;
    let n_arrays = arrays_needed(config.mode(), s.bits);
    let adc = MemoryAdc::new(
        build_network(n_arrays, s.columns, s.vdd, s.mismatch_sigma, cfg.seed)?,
        config.clone(),
    )?;
    let sweep = uniform_sweep(0.0, s.vdd, s.sweep_points);
    let traces = sweep
        .par_iter()
        .map(|&v| adc.convert(v))
        .collect::<fdcim::Result<Vec<_>>>()?;

    let ideal = s.mismatch_sigma == 0.0 && s.comparator_offset == 0.0;
    let mut table = Table::new("adc", &["vin", "code", "ideal_code", "comparisons"]);
    let mut staircase = Vec::with_capacity(traces.len());
    let mut comparisons = 0usize;
    for (i, t) in traces.iter().enumerate() {
        let expect = ideal_code(t.input_v, s.vdd, s.bits);
        if ideal && !on_code_boundary(t.input_v, s.vdd, s.bits) {
            invariant(t.code == expect, || {
                format!(
                    "ideal converter returned code {} for {} V, expected {expect}",
                    t.code, t.input_v
                )
            })?;
        }
        comparisons += t.comparisons;
        staircase.push((t.input_v, t.code as f64));
        table.push(
            i as u64,
            vec![
                num(t.input_v),
                t.code.to_string(),
                expect.to_string(),
                t.comparisons.to_string(),
            ],
        );
    }

    let curve: Vec<(f64, u32)> = traces.iter().map(|t| (t.input_v, t.code)).collect();
    let lin = dnl_inl(&curve, s.bits, (0.0, s.vdd))?;
    let mut summary = Table::new(
        "adc",
        &[
            "mode",
            "bits",
            "arrays",
            "mean_comparisons",
            "max_abs_dnl",
            "max_abs_inl",
            "missing_codes",
        ],
    );
    summary.push(
        0,
        vec![
            config.mode().name().to_string(),
            s.bits.to_string(),
            n_arrays.to_string(),
            num(comparisons as f64 / traces.len() as f64),
            num(lin.max_abs_dnl()),
            num(lin.max_abs_inl()),
            lin.missing_codes.len().to_string(),
        ],
    );

    let timeline = conversion_timeline(n_arrays, &config)?;
    let mut roles = Table::new("adc", &["cycle", "array", "role"]);
    for (c, cycle) in timeline.iter().enumerate() {
        for (a, role) in cycle.iter().enumerate() {
            roles.push(
                (c * n_arrays + a) as u64,
                vec![c.to_string(), a.to_string(), role.name().to_string()],
            );
        }
    }

    Ok(vec![
        table.to_csv("adc_transfer.csv")?,
        summary.to_csv("adc_summary.csv")?,
        roles.to_csv("adc_timeline.csv")?,
        dat("adc_transfer.dat", "vin", "code", &staircase),
    ])
}

fn algebra(name: &str) -> Result<MavAlgebra> {
    match name {
        "unipolar_and" => Ok(MavAlgebra::UnipolarAnd),
        "bipolar_product" => Ok(MavAlgebra::BipolarProduct),
        other => Err(config_err(format!(
            "asymsearch.algebra = \"{other}\"; expected \"unipolar_and\" or \"bipolar_product\""
        ))),
    }
}

pub fn asymsearch(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.asymsearch;
    let alg = algebra(&s.algebra)?;
    let cases: Vec<(usize, u32)> = s
        .columns
        .iter()
        .flat_map(|&c| s.bits.iter().map(move |&b| (c, b)))
        .collect();
    let results = cases
        .par_iter()
        .map(|&(c, b)| -> Result<_> {
            let pmf = mav_pmf_with(c, b, alg)?;
            let tree = build_asymmetric_tree(&pmf);
            let optimal = optimal_expected_comparisons(&pmf);
            let achieved = expected_comparisons(&tree, &pmf)?;
            let balanced = expected_comparisons(&SearchTree::balanced(b)?, &pmf)?;
            Ok((pmf, tree, optimal, achieved, balanced))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Table::new(
        "asymsearch",
        &[
            "columns",
            "bits",
            "algebra",
            "expected_comparisons",
            "balanced_comparisons",
            "saving_fraction",
            "mode_code",
            "max_depth",
            "tree",
        ],
    );
    let mut codes = Table::new("asymsearch", &["columns", "bits", "code", "probability", "depth"]);
    let mut out = Vec::new();
    let mut row_id = 0u64;
    for (id, (&(c, b), (pmf, tree, optimal, achieved, balanced))) in cases.iter().zip(&results).enumerate() {
        invariant(
            (optimal - achieved).abs() < 1e-9 && *optimal <= balanced + 1e-12,
            || format!("search tree for {c} columns at {b} bits is not optimal"),
        )?;
        summary.push(
            id as u64,
            vec![
                c.to_string(),
                b.to_string(),
                s.algebra.clone(),
                num(*achieved),
                num(*balanced),
                num(1.0 - achieved / balanced),
                pmf.mode().to_string(),
                tree.max_depth().to_string(),
                tree.to_parenthesized(),
            ],
        );
        for (code, (&p, d)) in pmf.probs().iter().zip(tree.depths()).enumerate() {
            codes.push(
                row_id,
                vec![c.to_string(), b.to_string(), code.to_string(), num(p), d.to_string()],
            );
            row_id += 1;
        }
        let pts: Vec<(f64, f64)> = pmf.probs().iter().enumerate().map(|(i, &p)| (i as f64, p)).collect();
        out.push(dat(
            &format!("asymsearch_pmf_c{c}_b{b}.dat"),
            "code",
            "probability",
            &pts,
        ));
    }
    out.insert(0, codes.to_csv("asymsearch_codes.csv")?);
    out.insert(0, summary.to_csv("asymsearch.csv")?);
    Ok(out)
}

pub fn cost(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.cost;
    let table = s.table();
    table.validate()?;
    if s.bits_min == 0 || s.bits_min > s.bits_max {
        return Err(config_err(format!(
            "cost bit range {}..={} is empty",
            s.bits_min, s.bits_max
        )));
    }
    let report = ratio_report(&table)?;
    let asym_pmf = mav_pmf(s.asym_columns, s.asym_bits)?;
    let asym_depth = optimal_expected_comparisons(&asym_pmf);

    let mut ratios = Table::new("cost", &["metric", "value", "rounded"]);
    for (i, (name, v)) in report.entries().iter().enumerate() {
        ratios.push(i as u64, vec![name.to_string(), num(*v), num(round1(*v))]);
    }
    let asym_energy = asymmetric_energy(&table, s.asym_bits, asym_depth);
    let layers: Vec<LayerShape> = s
        .layers
        .iter()
        .map(|&[a, b]| LayerShape::new(a, b, LayerKind::Conv1x1))
        .collect::<fdcim::Result<_>>()?;
    let replacements = replacement_report(&layers)?;
    let conv_total: u64 = replacements.iter().map(|r| r.conv_params).sum();
    let bwht_total: u64 = replacements.iter().map(|r| r.bwht_params).sum();
    let list_reduction = if conv_total == 0 {
        0.0
    } else {
        1.0 - bwht_total as f64 / conv_total as f64
    };
    for (i, (name, v)) in [
        ("in_memory_asymmetric_energy_pj", asym_energy),
        ("asymmetric_expected_comparisons", asym_depth),
        ("layer_list_param_reduction", list_reduction),
        (
            "reported_network_param_reduction",
            MOBILENET_V2_REPORTED_PARAM_REDUCTION,
        ),
    ]
    .into_iter()
    .enumerate()
    {
        ratios.push(4 + i as u64, vec![name.to_string(), num(v), num(round1(v))]);
    }

    let mut text_rows = Vec::new();
    for (name, e, area_ratio, energy_ratio) in [
        ("SAR", table.sar, Some(report.area_sar), Some(report.energy_sar)),
        ("Flash", table.flash, Some(report.area_flash), Some(report.energy_flash)),
        ("In-memory", table.in_memory, None, None),
    ] {
        text_rows.push(vec![
            name.to_string(),
            num(e.tech_nm),
            num(e.area_um2),
            num(e.energy_pj),
            area_ratio.map_or("1".into(), |r| format!("{:.1}x", round1(r))),
            energy_ratio.map_or("1".into(), |r| format!("{:.1}x", round1(r))),
        ]);
    }
    let cost_text = aligned_text(
        "cost_table.txt",
        &[
            "architecture",
            "node_nm",
            "area_um2",
            "energy_pj",
            "area_vs_in_memory",
            "energy_vs_in_memory",
        ],
        &text_rows,
    );

    let mut points = design_space(&table, s.bits_min..=s.bits_max, s.flash_bits)?;
    for b in s.bits_min..=s.bits_max.min(fdcim::adc::MAX_TREE_BITS) {
        let depth = optimal_expected_comparisons(&mav_pmf(s.asym_columns, b)?);
        let lat = latency_model(AdcStyle::Asymmetric { expected_depth: depth }, b)?;
        let area = points
            .iter()
            .find(|p| p.bits == b && p.style == "in_memory_sar")
            .map(|p| p.area_um2)
            .context("in-memory design point missing")?;
        points.push(fdcim::cost::DesignPoint {
            bits: b,
            style: "in_memory_asymmetric",
            area_um2: area,
            latency_cycles: lat.cycles,
        });
    }
    let style_rank = |s: &str| {
        [
            "sar",
            "flash",
            "in_memory_sar",
            "in_memory_hybrid",
            "in_memory_asymmetric",
        ]
        .iter()
        .position(|x| *x == s)
        .unwrap_or(usize::MAX)
    };
    points.sort_by_key(|p| (style_rank(p.style), p.bits));
    let mut design = Table::new("cost", &["bits", "style", "area_um2", "latency_cycles"]);
    for (i, p) in points.iter().enumerate() {
        design.push(
            i as u64,
            vec![
                p.bits.to_string(),
                p.style.to_string(),
                num(p.area_um2),
                num(p.latency_cycles),
            ],
        );
    }

    let mut layer_t = Table::new(
        "cost",
        &[
            "c_in",
            "c_out",
            "conv_params",
            "bwht_params",
            "param_reduction",
            "conv_multiply_adds",
            "bwht_additions",
            "bwht_multiplies",
        ],
    );
    for (i, r) in replacements.iter().enumerate() {
        layer_t.push(
            i as u64,
            vec![
                r.shape.c_in().to_string(),
                r.shape.c_out().to_string(),
                r.conv_params.to_string(),
                r.bwht_params.to_string(),
                num(param_reduction(&r.shape)),
                r.conv_ops.multiply_adds.to_string(),
                r.bwht_ops.additions.to_string(),
                r.bwht_ops.multiplies.to_string(),
            ],
        );
    }

    let mut out = vec![
        ratios.to_csv("cost_ratios.csv")?,
        cost_text,
        design.to_csv("cost_design_space.csv")?,
        layer_t.to_csv("cost_layers.csv")?,
    ];
    for style in [
        "sar",
        "flash",
        "in_memory_sar",
        "in_memory_hybrid",
        "in_memory_asymmetric",
    ] {
        let area: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.style == style)
            .map(|p| (p.bits as f64, p.area_um2))
            .collect();
        let lat: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.style == style)
            .map(|p| (p.bits as f64, p.latency_cycles))
            .collect();
        if !area.is_empty() {
            out.push(dat(&format!("cost_area_{style}.dat"), "bits", "area_um2", &area));
            out.push(dat(&format!("cost_latency_{style}.dat"), "bits", "cycles", &lat));
        }
    }
    Ok(out)
}

pub fn dnl_inl_study(cfg: &Config) -> Result<Vec<Artifact>> {
    let s = &cfg.dnl_inl;
    if s.trials == 0 || s.sweep_points == 0 {
        return Err(config_err(
            "dnl_inl.trials and dnl_inl.sweep_points must be positive".into(),
        ));
    }
    let mut seeder = case_rng(cfg.seed, 0);
    let seeds: Vec<u64> = (0..s.trials).map(|_| seeder.random()).collect();
    let sar = AdcConfig::sar(s.bits)?;
    let results = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| -> Result<_> {
            let network = build_network(2, s.columns, s.vdd, s.mismatch_sigma, seed)?;
            let reference = network.arrays()[1].clone();
            let adc = MemoryAdc::new(network, sar.clone())?;
            let curve = transfer_curve(&adc, &uniform_sweep(0.0, s.vdd, s.sweep_points))?;
            let lin = dnl_inl(&curve, s.bits, (0.0, s.vdd))?;
            let mut rng = case_rng(seed, i as u64);
            let fractions: Vec<f64> = (0..s.common_mode_samples).map(|_| rng.random_range(0.0..1.0)).collect();
            let cm = common_mode_trial(&reference, &sar, &fractions)?;
            Ok((seed, lin, cm))
        })
        .collect::<Result<Vec<_>>>()?;

    let n_codes = 1usize << s.bits;
    let mut summary = Table::new(
        "dnl-inl",
        &[
            "mismatch_seed",
            "max_abs_dnl",
            "max_abs_inl",
            "missing_codes",
            "shared_abs_code_error",
            "reference_only_abs_code_error",
            "shared_better",
        ],
    );
    let mut per_code = Table::new("dnl-inl", &["trial", "code", "dnl", "inl"]);
    for (i, (seed, lin, cm)) in results.iter().enumerate() {
        let mut acc = 0.0;
        for (d, v) in lin.dnl.iter().zip(&lin.inl) {
            acc += d;
            invariant((acc - v).abs() < 1e-9, || {
                format!("INL is not the running sum of DNL in trial {i}")
            })?;
        }
        summary.push(
            i as u64,
            vec![
                seed.to_string(),
                num(lin.max_abs_dnl()),
                num(lin.max_abs_inl()),
                lin.missing_codes.len().to_string(),
                cm.shared_abs_code_error.to_string(),
                cm.reference_only_abs_code_error.to_string(),
                flag(cm.shared_abs_code_error < cm.reference_only_abs_code_error),
            ],
        );
        for (code, (d, v)) in lin.dnl.iter().zip(&lin.inl).enumerate() {
            per_code.push(
                (i * n_codes + code) as u64,
                vec![i.to_string(), code.to_string(), num(*d), num(*v)],
            );
        }
    }
    let first = &results[0].1;
    let dnl_pts: Vec<(f64, f64)> = first.dnl.iter().enumerate().map(|(c, &d)| (c as f64, d)).collect();
    let inl_pts: Vec<(f64, f64)> = first.inl.iter().enumerate().map(|(c, &d)| (c as f64, d)).collect();
    Ok(vec![
        summary.to_csv("dnl_inl_summary.csv")?,
        per_code.to_csv("dnl_inl_codes.csv")?,
        dat("dnl_trial0.dat", "code", "dnl_lsb", &dnl_pts),
        dat("inl_trial0.dat", "code", "inl_lsb", &inl_pts),
    ])
}
