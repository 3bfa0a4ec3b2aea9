//! Structural parameters of one tradeoff configuration and the chain-step
//! primitives defined on them.

use serde::Serialize;

use crate::func::OneWayFn;
use crate::{Error, Result};

/// A point of the search space, an integer in `[0, N)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Point(pub u64);

/// Exact work counters owned by the caller and aggregated by summation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CounterSet {
    /// Number of one-way function applications.
    pub f_invocations: u64,
    /// End-point matches that triggered a chain regeneration.
    pub alarms: u64,
    /// Alarms whose regeneration did not yield a pre-image.
    pub false_alarms: u64,
    /// Online iterations begun.
    pub iterations_executed: u64,
}

impl CounterSet {
    pub fn merge(&mut self, other: &CounterSet) {
        self.f_invocations += other.f_invocations;
        self.alarms += other.alarms;
        self.false_alarms += other.false_alarms;
        self.iterations_executed += other.iterations_executed;
    }
}

impl std::ops::AddAssign for CounterSet {
    fn add_assign(&mut self, rhs: CounterSet) {
        self.merge(&rhs);
    }
}

/// All structural parameters of one rainbow-DP configuration.
///
/// Invariants enforced at construction and on load:
/// `0 < k_bits < n_bits <= 62`, `t_hat = round(c * t)` with ties rounding up,
/// `t_hat >= 1`, `l >= 1`, `1 <= m0_tilde <= N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceParams {
    n_bits: u32,
    k_bits: u32,
    c: f64,
    t_hat: u32,
    l: u16,
    m0_tilde: u64,
    seed: u64,
    function: OneWayFn,
}

impl SpaceParams {
    pub fn new(
        n_bits: u32,
        k_bits: u32,
        c: f64,
        l: u16,
        m0_tilde: u64,
        seed: u64,
        function: OneWayFn,
    ) -> Result<Self> {
        if n_bits == 0 || n_bits > 62 {
            return Err(Error::invalid("n_bits", format!("{n_bits} not in 1..=62")));
        }
        if k_bits == 0 || k_bits >= n_bits {
            return Err(Error::invalid(
                "k_bits",
                format!("{k_bits} not in 1..{n_bits} (must satisfy 0 < k_bits < n_bits)"),
            ));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::invalid("c", format!("{c} must be finite and > 0")));
        }
        let t = 1u64 << k_bits;
        let t_hat_f = (c * t as f64).round(); // positive, so ties round up
        if !(1.0..=u32::MAX as f64).contains(&t_hat_f) {
            return Err(Error::invalid(
                "c",
                format!("round(c*t) = {t_hat_f} does not fit a chain-length bound"),
            ));
        }
        let n = 1u64 << n_bits;
        if l == 0 {
            return Err(Error::invalid("l", "table count must be >= 1"));
        }
        if m0_tilde == 0 || m0_tilde > n {
            return Err(Error::invalid(
                "m0_tilde",
                format!("{m0_tilde} not in 1..={n}"),
            ));
        }
        Ok(SpaceParams {
            n_bits,
            k_bits,
            c,
            t_hat: t_hat_f as u32,
            l,
            m0_tilde,
            seed,
            function,
        })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn k_bits(&self) -> u32 {
        self.k_bits
    }

    /// Search-space size `N = 2^n_bits`.
    pub fn n(&self) -> u64 {
        1u64 << self.n_bits
    }

    /// `N - 1`; valid because the space size is a power of two.
    #[inline]
    pub fn mask(&self) -> u64 {
        (1u64 << self.n_bits) - 1
    }

    /// Expected chain length `t = 2^k_bits`.
    pub fn t(&self) -> u64 {
        1u64 << self.k_bits
    }

    /// Chain-length-bound ratio `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Maximum chain length `t_hat = round(c * t)`.
    pub fn t_hat(&self) -> u32 {
        self.t_hat
    }

    /// Number of tables `l`.
    pub fn table_count(&self) -> u16 {
        self.l
    }

    /// Starting points generated per table.
    pub fn m0_tilde(&self) -> u64 {
        self.m0_tilde
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn function(&self) -> OneWayFn {
        self.function
    }

    /// Points below this bound have their top `k_bits` zero.
    #[inline]
    pub fn dp_bound(&self) -> u64 {
        1u64 << (self.n_bits - self.k_bits)
    }

    /// One application of the one-way function. Counts one invocation.
    #[inline]
    pub fn evaluate(&self, x: Point, counters: &mut CounterSet) -> Point {
        debug_assert!(x.0 <= self.mask());
        counters.f_invocations += 1;
        Point(self.function.eval_raw(x.0, self.mask()))
    }

    /// Reduction function of table `i`, column `s`: `(y + i*t_hat + s) mod N`.
    /// Not an invocation. Columns run over `1..=t_hat`.
    #[inline]
    pub fn reduce(&self, i: u16, s: u32, y: Point) -> Point {
        debug_assert!(y.0 <= self.mask());
        assert!(i < self.l, "table index {i} out of range (l = {})", self.l);
        assert!(
            (1..=self.t_hat).contains(&s),
            "column {s} out of range 1..={}",
            self.t_hat
        );
        let offset = i as u64 * self.t_hat as u64 + s as u64;
        Point((y.0 + offset) & self.mask())
    }

    /// Distinguished-point predicate: top `k_bits` of `x` are all zero.
    #[inline]
    pub fn is_dp(&self, x: Point) -> bool {
        debug_assert!(x.0 <= self.mask());
        x.0 < self.dp_bound()
    }

    /// One chain step `reduce(i, s, evaluate(x))`. Counts one invocation.
    #[inline]
    pub fn step(&self, i: u16, s: u32, x: Point, counters: &mut CounterSet) -> Point {
        self.reduce(i, s, self.evaluate(x, counters))
    }
}
