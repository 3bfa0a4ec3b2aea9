//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the measured values (visible with `cargo test --test acceptance --
//! --nocapture`). Tolerances are pinned in code next to each assertion.
//!
//! Criterion 1 rebuilds the md5-trunc reference configuration (about 1.3e9
//! hash calls in total) and takes a few minutes; everything else finishes in
//! seconds.

use std::collections::HashSet;

use rainbowdp::baselines::BaselineMethod;
use rainbowdp::experiment::{
    compare_methods, matched_budget_preset, run_experiment, validate_column_counts, ComparisonEntry,
};
use rainbowdp::offline::build_all_tables;
use rainbowdp::online::{batch_search, SearchOptions};
use rainbowdp::optimizer;
use rainbowdp::theory::{inner_integral, inner_integral_closed_form, FaModel};
use rainbowdp::{CounterSet, OneWayFn, Point, PrecompTable, SpaceParams, TheoryInputs};

fn assert_within(name: &str, value: f64, expect: f64, rel_tol: f64) {
    let rel = (value - expect).abs() / expect.abs();
    assert!(
        rel <= rel_tol,
        "{name}: {value} vs {expect} (rel {rel:.4} > {rel_tol})"
    );
}

/// Criterion 1: md5-trunc reproduction at N=2^24, m0_tilde=2^18, t=512, l=1,
/// c=1.8 with 3000 targets. Precomputation invocations = 6.68N +/- 1%;
/// stored chains = 218812 +/- 0.5%; success = 87.4% +/- 2 points; mean
/// online invocations = 394023 +/- 5%; mean false alarms = 505 +/- 5%.
#[test]
fn criterion_1_reference_experiment_reproduction() {
    let params = SpaceParams::new(24, 9, 1.8, 1, 1 << 18, 1, OneWayFn::Md5Trunc).unwrap();
    let report = run_experiment(&params, 3000, 2).unwrap();
    let m = &report.measured;
    let n = params.n() as f64;

    let precomp_over_n = m.precomp_invocations / n;
    assert_within("precomputation invocations / N", precomp_over_n, 6.68, 0.01);
    assert_within("stored chains", m.chains_stored, 218_812.0, 0.005);
    assert!(
        (m.success_rate - 0.874).abs() <= 0.02,
        "success rate {} vs 0.874 +/- 2 points",
        m.success_rate
    );
    assert_within(
        "mean online invocations",
        m.mean_online_invocations,
        394_023.0,
        0.05,
    );
    assert_within("mean false alarms", m.mean_false_alarms, 505.0, 0.05);

    println!(
        "acceptance 1 PASS: precomp={:.3}N chains={} success={:.4} mean_inv={:.0} mean_fa={:.1}",
        precomp_over_n,
        m.chains_stored,
        m.success_rate,
        m.mean_online_invocations,
        m.mean_false_alarms
    );
}

/// Criterion 2: theory point values at the reference parameters.
#[test]
fn criterion_2_theory_point_values() {
    let inputs = TheoryInputs::from_absolute(1 << 18, 512, 1 << 24, 1.8, 1).unwrap();
    let p = inputs.success_prob();
    assert!((p - 0.874).abs() <= 0.001, "success_p = {p}");
    let t = inputs.expected_online_time();
    assert_within("expected online time", t, 394_023.0, 0.01);
    let fa = inputs.expected_total_false_alarms();
    assert_within("expected total false alarms", fa, 505.0, 0.01);
    let m0 = inputs.m0_expected();
    assert!((m0 - 218_812.0).abs() <= 1.0, "m0 = {m0}");
    println!("acceptance 2 PASS: p={p:.4} T={t:.0} fa={fa:.1} m0={m0:.1}");
}

/// Criterion 3: optimizer reproduces five tabulated rows, c within 0.03 and
/// D_tcr within 2%.
#[test]
fn criterion_3_optimizer_table_rows() {
    let rows: [(f64, f64, u32, f64, f64); 5] = [
        (2.5, 0.60, 1, 1.35, 4.6907),
        (3.0, 0.75, 2, 1.59, 15.4773),
        (3.0, 0.80, 2, 2.04, 24.9292),
        (4.0, 0.90, 3, 2.23, 66.9477),
        (5.0, 0.95, 4, 2.34, 133.1831),
    ];
    for (d_pc, target_p, l_expect, c_expect, d_tcr_expect) in rows {
        let report = optimizer::optimize(d_pc, target_p, 8);
        let r = report.result;
        assert!(r.feasible, "(D_pc={d_pc}, p={target_p}) infeasible");
        assert_eq!(r.l, l_expect, "(D_pc={d_pc}, p={target_p}): l = {}", r.l);
        assert!(
            (r.c - c_expect).abs() <= 0.03,
            "(D_pc={d_pc}, p={target_p}): c = {} vs {c_expect}",
            r.c
        );
        assert_within("D_tcr", r.d_tcr, d_tcr_expect, 0.02);
        assert!((r.achieved_p - target_p).abs() <= 1e-4);
        println!(
            "acceptance 3 PASS: (D_pc={d_pc}, p={target_p}) -> l={} c={:.4} D_tcr={:.4}",
            r.l, r.c, r.d_tcr
        );
    }
}

/// Criterion 4: exhaustive small-space oracle at N=2^12, t=2^5, one table.
/// (a) every stored element's image is found; (b) every uncovered image
/// fails; (c) the per-search cost identity is asserted inside the engine;
/// (d) storage round-trip identity.
#[test]
fn criterion_4_small_space_oracle() {
    let params = SpaceParams::new(12, 5, 1.8, 1, 1024, 42, OneWayFn::PrfTest).unwrap();
    let tables = build_all_tables(&params).unwrap();

    // brute-force enumeration of every stored chain element and its image
    let mut covered = HashSet::new();
    let mut scratch = CounterSet::default();
    for rec in tables[0].records() {
        let mut x = rec.sp;
        for u in 1..=rec.len {
            let y = params.evaluate(x, &mut scratch);
            covered.insert(y.0);
            x = params.reduce(0, u, y);
        }
    }

    let targets: Vec<Point> = (0..params.n()).map(Point).collect();
    let (outcomes, _) = batch_search(&targets, &tables, SearchOptions::default());
    let mut found = 0u64;
    for (y, outcome) in targets.iter().zip(&outcomes) {
        if covered.contains(&y.0) {
            let x = outcome.found.expect("covered image must be found");
            assert_eq!(params.evaluate(x, &mut scratch), *y);
            found += 1;
        } else {
            assert!(outcome.found.is_none(), "uncovered image {y:?} found");
        }
    }

    // storage round-trip identity
    let bytes = tables[0].to_bytes();
    assert_eq!(PrecompTable::from_bytes(&bytes).unwrap(), tables[0]);

    println!(
        "acceptance 4 PASS: {} covered images all found, {} uncovered all fail, round-trip ok",
        found,
        params.n() - covered.len() as u64
    );
}

/// Criterion 5: numerical cross-checks. Closed form vs quadrature below
/// 1e-10 on an (H, c) grid including H=1; discrete vs integral T within
/// 0.5% and p_k within 0.5 percentage points at t in {256, 512, 1024};
/// definitional identity D_tcr = T M^2 / N^2 within 1e-6 (per false-alarm
/// model).
#[test]
fn criterion_5_numerical_cross_checks() {
    let mut worst_inner = 0.0f64;
    for h in [0.05f64, 0.2, 0.5, 0.8, 1.0] {
        for c in [0.3f64, 1.0, 1.8, 2.9, 4.0] {
            for (a, b) in [(0.0, c), (0.0, 0.5 * c), (0.25 * c, 0.75 * c)] {
                let delta =
                    (inner_integral(a, b, h, c) - inner_integral_closed_form(a, b, h, c)).abs();
                worst_inner = worst_inner.max(delta);
                assert!(delta < 1e-10, "H={h} c={c} [{a},{b}]: |delta| = {delta:e}");
            }
        }
    }

    let mut worst_t = 0.0f64;
    let mut worst_pk = 0.0f64;
    for t in [256u64, 512, 1024] {
        let n = t * t * 64;
        let inputs = TheoryInputs::from_absolute(8 * n / t, t, n, 1.8, 1).unwrap();
        let ti = inputs.expected_online_time();
        let td = inputs.expected_online_time_discrete();
        let rel = (td - ti).abs() / ti;
        worst_t = worst_t.max(rel);
        assert!(rel <= 0.005, "T at t={t}: {td} vs {ti} (rel {rel})");
        let t_hat = inputs.t_hat();
        for k in [1, t_hat / 4, t_hat / 2, 3 * t_hat / 4, t_hat] {
            let diff = (inputs.failure_prob_discrete(k) - inputs.failure_prob(k)).abs();
            worst_pk = worst_pk.max(diff);
            assert!(diff <= 0.005, "p_k at t={t} k={k}: |delta| = {diff}");
        }
    }

    let inputs = TheoryInputs::from_absolute(1 << 18, 512, 1 << 24, 1.8, 1).unwrap();
    let n = (1u64 << 24) as f64;
    let m = inputs.m0_expected();
    for model in [FaModel::GeneratedChains, FaModel::StoredChains] {
        let direct = inputs.tradeoff_coefficient_with(model);
        let via_t = inputs.expected_online_time_with(model) * m * m / (n * n);
        let rel = (direct - via_t).abs() / direct;
        assert!(rel < 1e-6, "{model:?} identity: {direct} vs {via_t}");
    }

    println!(
        "acceptance 5 PASS: inner |delta|<={worst_inner:.2e}, T rel<={worst_t:.5}, p_k |delta|<={worst_pk:.5}, identity<1e-6"
    );
}

/// Criterion 6: column-count Monte Carlo at N=2^20, t=128, m0_tilde*t/N = 8.
/// Measured distinct counts at columns {64, 128, 256} within 3% of the
/// pre-discard prediction and 5% of the post-discard prediction.
#[test]
fn criterion_6_column_count_monte_carlo() {
    // c = 3.0 keeps column 256 well inside the chain-length bound; counts
    // are averaged over l = 4 tables
    let params = SpaceParams::new(20, 7, 3.0, 4, 65_536, 1, OneWayFn::PrfTest).unwrap();
    let rows = validate_column_counts(&params, &[64, 128, 256]).unwrap();
    for row in &rows {
        assert!(
            row.rel_err_before.abs() <= 0.03,
            "column {} before-discard: {} vs {} (rel {:.4})",
            row.column,
            row.measured_before,
            row.predicted_before,
            row.rel_err_before
        );
        let rel_after = row.rel_err_after.unwrap();
        assert!(
            rel_after.abs() <= 0.05,
            "column {} post-discard: {} vs {:?} (rel {:.4})",
            row.column,
            row.measured_after,
            row.predicted_after,
            rel_after
        );
        println!(
            "acceptance 6 PASS: col {} before {:.0}/{:.0} ({:+.3}) after {:.0}/{:.0} ({:+.3})",
            row.column,
            row.measured_before,
            row.predicted_before,
            row.rel_err_before,
            row.measured_after,
            row.predicted_after.unwrap(),
            rel_after
        );
    }
}

/// Criterion 7: at N=2^20, matched memory and ~80% measured success, the
/// classic rainbow search is strictly cheaper than rainbow-DP.
#[test]
fn criterion_7_comparison_direction() {
    let entries = matched_budget_preset(20, 7, OneWayFn::PrfTest, 1).unwrap();
    assert!(matches!(entries[0], ComparisonEntry::RainbowDp(_)));
    assert!(matches!(
        &entries[1],
        ComparisonEntry::Baseline(c) if c.method == BaselineMethod::Rainbow
    ));
    let report = compare_methods(&entries, 1500, 2).unwrap();
    let rdp = &report.rows[0];
    let rainbow = &report.rows[1];

    // matched memory within 2%
    let mem_rel = (rdp.memory_records as f64 - rainbow.memory_records as f64).abs()
        / rainbow.memory_records as f64;
    assert!(mem_rel <= 0.02, "memory mismatch: {rdp:?} vs {rainbow:?}");
    // both land near 80% measured success
    for row in [rdp, rainbow] {
        assert!(
            (row.success_rate - 0.80).abs() <= 0.05,
            "{} success {}",
            row.method,
            row.success_rate
        );
    }
    assert!(
        (rdp.success_rate - rainbow.success_rate).abs() <= 0.05,
        "success rates not matched: {} vs {}",
        rdp.success_rate,
        rainbow.success_rate
    );
    // the direction under test
    assert!(
        rainbow.mean_online_invocations < rdp.mean_online_invocations,
        "expected rainbow ({}) < rainbow-dp ({})",
        rainbow.mean_online_invocations,
        rdp.mean_online_invocations
    );
    println!(
        "acceptance 7 PASS: rainbow {:.0} < rainbow-dp {:.0} mean invocations \
         (success {:.3} vs {:.3}, memory {} vs {})",
        rainbow.mean_online_invocations,
        rdp.mean_online_invocations,
        rainbow.success_rate,
        rdp.success_rate,
        rainbow.memory_records,
        rdp.memory_records
    );
}
