//! Precomputation: build one table per table index by iterating chains from
//! starting points until a distinguished point, discarding chains that exceed
//! `t_hat`.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::func::mix64;
use crate::params::{CounterSet, Point, SpaceParams};
use crate::storage::PrecompTable;
use crate::{Error, Result};

/// One precomputed chain: starting point, number of f applications, and the
/// distinguished ending point.
///
/// Regenerating from `sp` with `step(i, s, .)` for `s = 1..=len` yields `ep`,
/// and no intermediate value before `ep` (other than possibly `sp` itself) is
/// a distinguished point: chains end at the first DP reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainRecord {
    pub sp: Point,
    pub len: u32,
    pub ep: Point,
}

impl ChainRecord {
    /// Sort key used by tables: ascending (len, ep, sp).
    #[inline]
    pub fn sort_key(&self) -> (u32, u64, u64) {
        (self.len, self.ep.0, self.sp.0)
    }
}

/// How starting points are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum StartPointScheme {
    /// `sp_j = mix64(mix64(seed ^ mix64(TABLE_SALT | i)) ^ j) mod N`, with
    /// collisions resolved by probing upward `(+1 mod N)` to the next unused
    /// point. Deterministic in `(seed, table_index)`.
    #[default]
    SeededMix,
    /// `sp_j = j`.
    Sequential,
}

/// Salt combined with the table index before mixing, so tables draw
/// different start-point sequences from the same seed.
const TABLE_SALT: u64 = 0x7461_626C_6500_0000; // "table\0\0\0"

/// `count` pairwise-distinct points in `[0, mask]`:
/// `mix64(mix64(seed ^ mix64(TABLE_SALT | table_index)) ^ j)` truncated,
/// probing upward past collisions.
pub(crate) fn seeded_distinct_points(
    mask: u64,
    count: u64,
    seed: u64,
    table_index: u16,
) -> Vec<Point> {
    let base = mix64(seed ^ mix64(TABLE_SALT | table_index as u64));
    let mut used = HashSet::with_capacity(count as usize);
    let mut points = Vec::with_capacity(count as usize);
    for j in 0..count {
        let mut cand = mix64(base ^ j) & mask;
        while !used.insert(cand) {
            cand = (cand + 1) & mask;
        }
        points.push(Point(cand));
    }
    points
}

/// Generate `m0_tilde` pairwise-distinct starting points for one table.
pub fn generate_start_points(
    params: &SpaceParams,
    table_index: u16,
    scheme: StartPointScheme,
) -> Result<Vec<Point>> {
    let m = params.m0_tilde();
    let n = params.n();
    if m > n {
        return Err(Error::invalid(
            "m0_tilde",
            format!("{m} starting points cannot be distinct in a space of {n}"),
        ));
    }
    match scheme {
        StartPointScheme::Sequential => Ok((0..m).map(Point).collect()),
        StartPointScheme::SeededMix => Ok(seeded_distinct_points(
            params.mask(),
            m,
            params.seed(),
            table_index,
        )),
    }
}

/// Iterate one chain from `sp` until the first distinguished point. Returns
/// `None` when no DP is reached within `t_hat` applications (the chain is
/// discarded; its `t_hat` invocations are still counted).
pub fn build_chain(
    params: &SpaceParams,
    table_index: u16,
    sp: Point,
    counters: &mut CounterSet,
) -> Option<ChainRecord> {
    let mut x = sp;
    for s in 1..=params.t_hat() {
        x = params.step(table_index, s, x, counters);
        if params.is_dp(x) {
            return Some(ChainRecord { sp, len: s, ep: x });
        }
    }
    None
}

/// Build table `table_index` with the default seeded-mix starting points.
pub fn build_table(params: &SpaceParams, table_index: u16) -> Result<PrecompTable> {
    build_table_with(params, table_index, StartPointScheme::default())
}

/// Build table `table_index`. Chain construction is parallel over starting
/// points; the result is independent of worker count (records are collected
/// in starting-point order, then sorted; counters are summed exactly).
pub fn build_table_with(
    params: &SpaceParams,
    table_index: u16,
    scheme: StartPointScheme,
) -> Result<PrecompTable> {
    assert!(
        table_index < params.table_count(),
        "table index {table_index} out of range (l = {})",
        params.table_count()
    );
    let start_points = generate_start_points(params, table_index, scheme)?;
    let per_chain: Vec<(Option<ChainRecord>, u64)> = start_points
        .par_iter()
        .map(|&sp| {
            let mut counters = CounterSet::default();
            let record = build_chain(params, table_index, sp, &mut counters);
            (record, counters.f_invocations)
        })
        .collect();

    let precomp_invocations: u64 = per_chain.iter().map(|(_, inv)| inv).sum();
    let records: Vec<ChainRecord> = per_chain.into_iter().filter_map(|(rec, _)| rec).collect();
    if records.is_empty() {
        return Err(Error::EmptyTable {
            table_index,
            m0_tilde: params.m0_tilde(),
        });
    }
    let table = PrecompTable::new(params.clone(), table_index, records, precomp_invocations)?;
    verify_regeneration(&table);
    Ok(table)
}

/// Regeneration audit run on every build: each checked record must walk from
/// its starting point to its ending point in exactly `len` steps with no
/// earlier distinguished point. Full audit for spaces up to 2^16, a 1%
/// stride sample above that.
fn verify_regeneration(table: &PrecompTable) {
    let params = table.params();
    let stride = if params.n_bits() <= 16 {
        1
    } else {
        (table.records().len() / 100).max(1)
    };
    let mut scratch = CounterSet::default();
    for rec in table.records().iter().step_by(stride) {
        let mut x = rec.sp;
        for s in 1..=rec.len {
            x = params.step(table.table_index(), s, x, &mut scratch);
            assert!(
                s == rec.len || !params.is_dp(x),
                "chain from {:#x} hits a DP before its recorded end",
                rec.sp.0
            );
        }
        assert_eq!(
            x, rec.ep,
            "chain from {:#x} does not regenerate its ending point",
            rec.sp.0
        );
    }
}

/// Build all `l` tables of the configuration.
pub fn build_all_tables(params: &SpaceParams) -> Result<Vec<PrecompTable>> {
    build_all_tables_with(params, StartPointScheme::default())
}

pub fn build_all_tables_with(
    params: &SpaceParams,
    scheme: StartPointScheme,
) -> Result<Vec<PrecompTable>> {
    (0..params.table_count())
        .map(|i| build_table_with(params, i, scheme))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::OneWayFn;

    fn params_small() -> SpaceParams {
        SpaceParams::new(12, 5, 1.8, 2, 1024, 42, OneWayFn::PrfTest).unwrap()
    }

    #[test]
    fn start_points_distinct_and_deterministic() {
        let p = params_small();
        for scheme in [StartPointScheme::SeededMix, StartPointScheme::Sequential] {
            let a = generate_start_points(&p, 0, scheme).unwrap();
            let b = generate_start_points(&p, 0, scheme).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len() as u64, p.m0_tilde());
            let set: HashSet<u64> = a.iter().map(|pt| pt.0).collect();
            assert_eq!(set.len(), a.len());
            assert!(a.iter().all(|pt| pt.0 < p.n()));
        }
    }

    #[test]
    fn start_points_differ_across_tables() {
        let p = params_small();
        let a = generate_start_points(&p, 0, StartPointScheme::SeededMix).unwrap();
        let b = generate_start_points(&p, 1, StartPointScheme::SeededMix).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn start_points_saturate_full_space() {
        // m0_tilde = N forces the probing path to fill every point exactly once.
        let p = SpaceParams::new(8, 3, 1.0, 1, 256, 3, OneWayFn::PrfTest).unwrap();
        let pts = generate_start_points(&p, 0, StartPointScheme::SeededMix).unwrap();
        let set: HashSet<u64> = pts.iter().map(|pt| pt.0).collect();
        assert_eq!(set.len(), 256);
    }

    #[test]
    fn chain_records_satisfy_invariants() {
        let p = params_small();
        let mut counters = CounterSet::default();
        let sps = generate_start_points(&p, 0, StartPointScheme::default()).unwrap();
        let mut kept = 0u64;
        for &sp in &sps {
            let before = counters.f_invocations;
            match build_chain(&p, 0, sp, &mut counters) {
                Some(rec) => {
                    kept += 1;
                    assert!(rec.len >= 1 && rec.len <= p.t_hat());
                    assert!(p.is_dp(rec.ep));
                    assert_eq!(counters.f_invocations - before, rec.len as u64);
                    // regeneration: sp walks to ep with no earlier DP
                    let mut x = rec.sp;
                    let mut scratch = CounterSet::default();
                    for s in 1..=rec.len {
                        x = p.step(0, s, x, &mut scratch);
                        if s < rec.len {
                            assert!(!p.is_dp(x), "chain must end at its first DP");
                        }
                    }
                    assert_eq!(x, rec.ep);
                }
                None => assert_eq!(counters.f_invocations - before, p.t_hat() as u64),
            }
        }
        assert!(kept > 0);
    }

    #[test]
    fn immediate_dp_gives_len_one() {
        let p = params_small();
        // find a starting point whose first step lands on a DP
        let mut scratch = CounterSet::default();
        let sp = (0..p.n())
            .map(Point)
            .find(|&x| p.is_dp(p.step(0, 1, x, &mut scratch)))
            .expect("some point steps onto a DP");
        let mut counters = CounterSet::default();
        let rec = build_chain(&p, 0, sp, &mut counters).unwrap();
        assert_eq!(rec.len, 1);
        assert_eq!(counters.f_invocations, 1);
    }

    #[test]
    fn table_sorted_and_deterministic() {
        let p = params_small();
        let table = build_table(&p, 0).unwrap();
        let again = build_table(&p, 0).unwrap();
        assert_eq!(table, again);
        let recs = table.records();
        assert!(recs.windows(2).all(|w| w[0].sort_key() <= w[1].sort_key()));
        assert!(table.m0() > 0 && table.m0() <= p.m0_tilde());
    }

    #[test]
    fn survivor_count_within_three_sigma() {
        // discard probability per chain is (1 - 1/t)^t_hat
        let p = SpaceParams::new(20, 7, 1.8, 1, 1 << 15, 9, OneWayFn::PrfTest).unwrap();
        let table = build_table(&p, 0).unwrap();
        let t = p.t() as f64;
        let keep = 1.0 - (1.0 - 1.0 / t).powi(p.t_hat() as i32);
        let mean = p.m0_tilde() as f64 * keep;
        let sigma = (p.m0_tilde() as f64 * keep * (1.0 - keep)).sqrt();
        let m0 = table.m0() as f64;
        assert!(
            (m0 - mean).abs() <= 3.0 * sigma,
            "m0 = {m0}, expected {mean} +/- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn discard_fraction_matches_exponential_limit() {
        // fraction of discarded chains ~ e^{-c} at moderate scale
        let p = SpaceParams::new(20, 7, 1.8, 1, 1 << 15, 11, OneWayFn::PrfTest).unwrap();
        let table = build_table(&p, 0).unwrap();
        let discarded = (p.m0_tilde() - table.m0()) as f64 / p.m0_tilde() as f64;
        let expected = (-1.8f64).exp();
        assert!(
            (discarded - expected).abs() < 0.012,
            "discard fraction {discarded} vs {expected}"
        );
    }
}
