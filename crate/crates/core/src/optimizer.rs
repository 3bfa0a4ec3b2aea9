//! Parameter optimization: given a precomputation budget `D_pc` and a target
//! success probability, find the table count and chain-length bound `(l, c)`
//! minimizing the tradeoff coefficient `D_tcr`.

use serde::Serialize;

use crate::theory::TheoryInputs;
use crate::Result;

/// Scan range and step for the chain-length-bound ratio. No monotonicity in
/// `c` is assumed; every sign change on the grid is refined.
pub const C_SCAN_MIN: f64 = 0.05;
pub const C_SCAN_MAX: f64 = 4.0;
pub const C_SCAN_STEP: f64 = 0.01;

/// Success-probability tolerance for root refinement.
pub const P_TOLERANCE: f64 = 1e-4;

/// Success probability achievable with `l` tables, bound ratio `c`, and a
/// precomputation budget of `d_pc * N` invocations (coefficient form; no
/// absolute sizes involved).
pub fn achieved_success(l: u32, c: f64, d_pc: f64) -> f64 {
    TheoryInputs::<f64>::from_coefficients(d_pc, c, l)
        .expect("valid optimizer probe")
        .success_prob()
}

fn d_tcr(l: u32, c: f64, d_pc: f64) -> f64 {
    TheoryInputs::<f64>::from_coefficients(d_pc, c, l)
        .expect("valid optimizer probe")
        .tradeoff_coefficient()
}

/// A refined root of `achieved_success(l, c, d_pc) = target_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolvedC {
    pub c: f64,
    pub achieved_p: f64,
    pub d_tcr: f64,
}

/// Scan `c` over the fixed grid, refine every sign change of
/// `achieved_success - target_p` by bisection to `|dp| <= 1e-4`, and return
/// the root with minimal `D_tcr`. `None` when the budget cannot reach the
/// target for this `l`.
pub fn solve_c(l: u32, d_pc: f64, target_p: f64) -> Option<SolvedC> {
    assert!(
        target_p > 0.0 && target_p < 1.0,
        "target probability must lie in (0, 1)"
    );
    let steps = ((C_SCAN_MAX - C_SCAN_MIN) / C_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| C_SCAN_MIN + C_SCAN_STEP * i as f64)
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&c| achieved_success(l, c, d_pc) - target_p)
        .collect();

    let mut best: Option<SolvedC> = None;
    for i in 0..steps {
        let (va, vb) = (values[i], values[i + 1]);
        let root = if va == 0.0 {
            Some(grid[i])
        } else if va * vb < 0.0 {
            Some(bisect(l, d_pc, target_p, grid[i], grid[i + 1], va))
        } else if i == steps - 1 && vb == 0.0 {
            Some(grid[i + 1])
        } else {
            None
        };
        if let Some(c) = root {
            let achieved_p = achieved_success(l, c, d_pc);
            let candidate = SolvedC {
                c,
                achieved_p,
                d_tcr: d_tcr(l, c, d_pc),
            };
            if best.is_none_or(|b| candidate.d_tcr < b.d_tcr) {
                best = Some(candidate);
            }
        }
    }
    best
}

fn bisect(l: u32, d_pc: f64, target_p: f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = achieved_success(l, mid, d_pc) - target_p;
        if f_mid.abs() <= P_TOLERANCE || (hi - lo) < 1e-12 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// The selected optimum for one budget/target pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub l: u32,
    pub c: f64,
    pub achieved_p: f64,
    pub d_pc: f64,
    pub d_tcr: f64,
    pub feasible: bool,
}

/// Per-`l` candidate, reported alongside the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CandidateRow {
    pub l: u32,
    pub c: f64,
    pub achieved_p: f64,
    pub d_tcr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub target_p: f64,
    pub result: OptimizationResult,
    /// One row per feasible table count in `1..=l_max`.
    pub candidates: Vec<CandidateRow>,
}

/// Evaluate every table count in `1..=l_max` and pick the feasible `(l, c)`
/// with minimal `D_tcr`.
pub fn optimize(d_pc: f64, target_p: f64, l_max: u32) -> OptimizationReport {
    assert!(l_max >= 1, "need at least one table count to search");
    let mut candidates = Vec::new();
    for l in 1..=l_max {
        if let Some(solved) = solve_c(l, d_pc, target_p) {
            candidates.push(CandidateRow {
                l,
                c: solved.c,
                achieved_p: solved.achieved_p,
                d_tcr: solved.d_tcr,
            });
        }
    }
    let result = candidates
        .iter()
        .min_by(|a, b| a.d_tcr.total_cmp(&b.d_tcr))
        .map(|best| OptimizationResult {
            l: best.l,
            c: best.c,
            achieved_p: best.achieved_p,
            d_pc,
            d_tcr: best.d_tcr,
            feasible: true,
        })
        .unwrap_or(OptimizationResult {
            l: 0,
            c: f64::NAN,
            achieved_p: f64::NAN,
            d_pc,
            d_tcr: f64::NAN,
            feasible: false,
        });
    OptimizationReport {
        target_p,
        result,
        candidates,
    }
}

/// Check whether some smaller budget already achieves a tradeoff coefficient
/// at least as good for the same target; returns that `(d_pc, d_tcr)` if so.
/// Extra precomputation does not always buy tradeoff efficiency, because the
/// added memory enters `D_tcr` quadratically.
pub fn dominated_by_smaller_budget(
    d_pc: f64,
    target_p: f64,
    l_max: u32,
    step: f64,
) -> Result<Option<(f64, f64)>> {
    if step.is_nan() || step <= 0.0 {
        return Err(crate::Error::invalid("step", "budget step must be > 0"));
    }
    let own = optimize(d_pc, target_p, l_max);
    if !own.result.feasible {
        return Ok(None);
    }
    let mut budget = d_pc - step;
    while budget > 0.0 {
        let candidate = optimize(budget, target_p, l_max);
        if candidate.result.feasible && candidate.result.d_tcr <= own.result.d_tcr {
            return Ok(Some((budget, candidate.result.d_tcr)));
        }
        budget -= step;
    }
    Ok(None)
}
