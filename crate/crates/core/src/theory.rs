//! The analytic model: column counts, failure/success probabilities,
//! false-alarm expectations, online time, memory, and the tradeoff
//! coefficients. Generic over the floating-point scalar.
//!
//! Dimensionless core: with `r = m0_tilde * t / N`, `H = 2 / (2 + r)` and
//! `D_pc = r * l * (1 - e^-c)`, every probability and coefficient is a
//! function of `(r, c, l)` alone; absolute online time and false-alarm
//! totals additionally need `t`.
//!
//! # False-alarm coefficient models
//!
//! The per-iteration false-alarm expectation sums over the chains stored per
//! table, whose length distribution is that of all `m0_tilde` generated
//! chains restricted to lengths `<= t_hat`; the aggregate coefficient is
//! then `m0_tilde*t*l/N = r*l` ([`FaModel::GeneratedChains`]). A common
//! variant scales the false-alarm term by the survivor fraction instead,
//! using `m0*t*l/N = D_pc` ([`FaModel::StoredChains`]). The two differ by
//! the factor `1 - e^-c` on the false-alarm term only. Predictions of
//! measured online cost use `GeneratedChains`, which is the self-consistent
//! expectation; the optimizer's tradeoff coefficients use `StoredChains`
//! for comparability with the standard tabulated optima. Both are exposed,
//! and the definitional identity `D_tcr = T * M^2 / N^2` holds exactly
//! within either model.

use serde::Serialize;

use crate::numeric::{adaptive_simpson, Real, DEFAULT_MAX_DEPTH};
use crate::params::SpaceParams;
use crate::{Error, Result};

/// Absolute tolerance for the inner integral quadrature.
pub const INNER_ABS_TOL: f64 = 1e-12;
/// Relative tolerance for the outer (online-time) quadrature.
pub const OUTER_REL_TOL: f64 = 1e-9;

/// Which chain population the false-alarm coefficient counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum FaModel {
    /// Coefficient `m0_tilde * t * l / N = r * l`; consistent with the
    /// per-iteration false-alarm expectation. Default for time predictions.
    #[default]
    GeneratedChains,
    /// Coefficient `m0 * t * l / N = D_pc`. Default for tradeoff
    /// coefficients, matching the tabulated optimal parameters.
    StoredChains,
}

/// Inputs of the analytic model. Construct via [`TheoryInputs::from_ratio`],
/// [`TheoryInputs::from_coefficients`], [`TheoryInputs::from_absolute`] or
/// [`TheoryInputs::from_params`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryInputs<R: Real = f64> {
    /// `m0_tilde * t / N`, the matrix-density ratio.
    m0t_ratio: R,
    /// Chain-length-bound ratio `c = t_hat / t`.
    c: R,
    /// Number of tables.
    l: u32,
    /// Expected chain length `t`; needed only for absolute quantities.
    t: Option<u64>,
    /// Space size `N`; needed only for absolute quantities.
    n: Option<u64>,
}

impl<R: Real> TheoryInputs<R> {
    /// Coefficient-form inputs: density ratio, bound ratio, table count.
    pub fn from_ratio(m0t_ratio: R, c: R, l: u32) -> Result<Self> {
        if !m0t_ratio.is_finite() || m0t_ratio < R::zero() {
            return Err(Error::invalid("m0t_ratio", "must be finite and >= 0"));
        }
        if !c.is_finite() || c <= R::zero() {
            return Err(Error::invalid("c", "must be finite and > 0"));
        }
        if l == 0 {
            return Err(Error::invalid("l", "table count must be >= 1"));
        }
        Ok(TheoryInputs {
            m0t_ratio,
            c,
            l,
            t: None,
            n: None,
        })
    }

    /// Parameterization by the precomputation coefficient:
    /// `r = D_pc / (l * (1 - e^-c))`.
    pub fn from_coefficients(d_pc: R, c: R, l: u32) -> Result<Self> {
        if !d_pc.is_finite() || d_pc <= R::zero() {
            return Err(Error::invalid("d_pc", "must be finite and > 0"));
        }
        let ratio = d_pc / (R::from_u32(l).unwrap() * (R::one() - (-c).exp()));
        Self::from_ratio(ratio, c, l)
    }

    /// Absolute-form inputs.
    pub fn from_absolute(m0_tilde: u64, t: u64, n: u64, c: R, l: u32) -> Result<Self> {
        if t == 0 || n == 0 || t >= n {
            return Err(Error::invalid("t", "need 0 < t < N"));
        }
        let ratio = R::of(m0_tilde as f64) * R::of(t as f64) / R::of(n as f64);
        let mut inputs = Self::from_ratio(ratio, c, l)?;
        inputs.t = Some(t);
        inputs.n = Some(n);
        Ok(inputs)
    }

    pub fn from_params(params: &SpaceParams) -> Self {
        Self::from_absolute(
            params.m0_tilde(),
            params.t(),
            params.n(),
            R::of(params.c()),
            params.table_count() as u32,
        )
        .expect("validated params are valid theory inputs")
    }

    pub fn m0t_ratio(&self) -> R {
        self.m0t_ratio
    }

    pub fn c(&self) -> R {
        self.c
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    fn t_scale(&self) -> u64 {
        self.t
            .expect("absolute quantity requested but `t` was not provided")
    }

    fn n_scale(&self) -> u64 {
        self.n
            .expect("absolute quantity requested but `N` was not provided")
    }

    /// `t_hat = round(c * t)`, ties up.
    pub fn t_hat(&self) -> u32 {
        let t = self.t_scale();
        (self.c.to_f64().unwrap() * t as f64).round() as u32
    }

    fn lr(&self) -> R {
        R::from_u32(self.l).unwrap()
    }

    /// `H = 2 / (2 + m0_tilde*t/N)`.
    pub fn h_value(&self) -> R {
        let two = R::of(2.0);
        two / (two + self.m0t_ratio)
    }

    /// Pre-computation coefficient `D_pc = m0*t*l/N = r*l*(1 - e^-c)`.
    pub fn d_pc(&self) -> R {
        self.m0t_ratio * self.lr() * (R::one() - (-self.c).exp())
    }

    /// Distinct elements in column `i` of one table before discarding:
    /// `m0_tilde * H / (e^{i/t} - (1-H))`. Requires absolute scale.
    pub fn m_tilde(&self, i: R) -> R {
        assert!(i >= R::zero(), "column index must be >= 0");
        let t = R::of(self.t_scale() as f64);
        let n = R::of(self.n_scale() as f64);
        let m0_tilde = self.m0t_ratio * n / t;
        let h = self.h_value();
        m0_tilde * h / ((i / t).exp() - (R::one() - h))
    }

    /// Distinct elements in column `i` after discarding over-long chains:
    /// `m_tilde(i) * (1 - e^{i/t - c})`.
    pub fn m_col(&self, i: R) -> R {
        let t = R::of(self.t_scale() as f64);
        assert!(
            i >= R::zero() && i / t <= self.c,
            "column index must lie in [0, c*t]"
        );
        self.m_tilde(i) * (R::one() - (i / t - self.c).exp())
    }

    /// Expected stored chains per table, `m0_tilde * (1 - e^-c)`.
    pub fn m0_expected(&self) -> R {
        let t = R::of(self.t_scale() as f64);
        let n = R::of(self.n_scale() as f64);
        self.m0t_ratio * n / t * (R::one() - (-self.c).exp())
    }

    /// Failure probability after a fraction `kappa = k/t in [0, c]` of the
    /// iterating searches: `exp(-r*l*H * I(c - kappa, c))`.
    pub fn failure_prob_fraction(&self, kappa: R) -> R {
        assert!(
            kappa >= R::zero() && kappa <= self.c,
            "kappa must lie in [0, c]"
        );
        let h = self.h_value();
        let exponent =
            self.m0t_ratio * self.lr() * h * inner_integral(self.c - kappa, self.c, h, self.c);
        (-exponent).exp()
    }

    /// Probability that the `k+1`-th iterating search executes. Requires `t`.
    /// `k` runs over `0..=t_hat`; since `t_hat` rounds `c*t` upward, the
    /// fraction `k/t` is capped at `c` (the integral lower bound stops at 0).
    pub fn failure_prob(&self, k: u32) -> R {
        assert!(k <= self.t_hat(), "k must lie in 0..=t_hat");
        let t = R::of(self.t_scale() as f64);
        self.failure_prob_fraction((R::of(k as f64) / t).min(self.c))
    }

    /// Discrete-sum counterpart of [`failure_prob`]:
    /// `exp(-l * sum_{i=1..k} m_{t_hat - i} / N)`.
    pub fn failure_prob_discrete(&self, k: u32) -> R {
        let t_hat = self.t_hat();
        assert!(k <= t_hat, "k must lie in 0..=t_hat");
        let n = R::of(self.n_scale() as f64);
        let mut sum = R::zero();
        for i in 1..=k {
            sum = sum + self.m_col(R::of((t_hat - i) as f64)) / n;
        }
        (-(self.lr() * sum)).exp()
    }

    /// Success probability `1 - p_{t_hat}` (coefficient-form; no `t` needed).
    pub fn success_prob(&self) -> R {
        R::one() - self.failure_prob_fraction(self.c)
    }

    /// Expected false alarms per table during iteration `i` (simplified
    /// form): `r * e^-c * (e^{i/t} - i/t - 1)`.
    pub fn expected_false_alarms(&self, i: u32) -> R {
        let t = R::of(self.t_scale() as f64);
        self.expected_false_alarms_fraction(R::of(i as f64) / t)
    }

    /// Simplified per-table false-alarm expectation at iteration fraction
    /// `v = i/t`.
    pub fn expected_false_alarms_fraction(&self, v: R) -> R {
        assert!(v >= R::zero(), "iteration fraction must be >= 0");
        self.m0t_ratio * (-self.c).exp() * (v.exp() - v - R::one())
    }

    /// Exact pre-simplification sum for the expected false alarms during
    /// iteration `i`: over stored chain lengths `j = t_hat-i+1 ..= t_hat`,
    /// `m0_tilde (1-1/t)^{j-1} (1/t)` chains of length `j` per table, each
    /// merging with the online chain with probability `(j - (t_hat-i))/N`.
    pub fn expected_false_alarms_exact(&self, i: u32) -> R {
        let t_hat = self.t_hat();
        assert!((1..=t_hat).contains(&i), "iteration must lie in 1..=t_hat");
        let t = R::of(self.t_scale() as f64);
        let survive = R::one() - R::one() / t;
        let base = t_hat - i;
        let mut sum = R::zero();
        // (1-1/t)^{j-1} built incrementally from j = base+1
        let mut pow = survive.powi(base as i32);
        for j in base + 1..=t_hat {
            sum = sum + pow * R::of((j - base) as f64);
            pow = pow * survive;
        }
        self.m0t_ratio / (t * t) * sum
    }

    /// The dimensionless online-time integral
    /// `J = integral_0^c [l*v + fa_coeff * e^-c (c-v)(e^v - 1 - v)] * p(v) dv`
    /// with `T = t^2 * J` and `D_tcr = D_pc^2 * J`.
    fn time_integral(&self, model: FaModel) -> R {
        let fa_coeff = match model {
            FaModel::GeneratedChains => self.m0t_ratio * self.lr(),
            FaModel::StoredChains => self.d_pc(),
        };
        let c = self.c;
        let l = self.lr();
        let ec = (-c).exp();
        let integrand = |v: R| {
            let fa = fa_coeff * ec * (c - v) * (v.exp() - R::one() - v);
            (l * v + fa) * self.failure_prob_fraction(v)
        };
        // coarse estimate scales the relative tolerance into an absolute one
        let coarse = (l * c / R::of(2.0) + R::one()) * c; // loose upper bound on J
        let tol = R::of(OUTER_REL_TOL) * coarse.abs().max(R::one());
        adaptive_simpson(integrand, R::zero(), c, tol, DEFAULT_MAX_DEPTH)
    }

    /// Expected online time in function invocations, integral form, with the
    /// default [`FaModel::GeneratedChains`]. Requires `t`.
    pub fn expected_online_time(&self) -> R {
        self.expected_online_time_with(FaModel::default())
    }

    pub fn expected_online_time_with(&self, model: FaModel) -> R {
        let t = R::of(self.t_scale() as f64);
        t * t * self.time_integral(model)
    }

    /// Discrete-sum online time
    /// `sum_{i=1..t_hat} l [(i-1) + (t_hat-i+1) E_fa(i)] p_{i-1}`,
    /// with `p` accumulated as the discrete column sum.
    pub fn expected_online_time_discrete(&self) -> R {
        self.discrete_time_and_false_alarms().0
    }

    /// Expected total false alarms over one search, integral form:
    /// `t * integral_0^c l * r e^-c (e^v - v - 1) p(v) dv`.
    pub fn expected_total_false_alarms(&self) -> R {
        let t = R::of(self.t_scale() as f64);
        let c = self.c;
        let integrand = |v: R| {
            self.lr() * self.expected_false_alarms_fraction(v) * self.failure_prob_fraction(v)
        };
        let tol = R::of(OUTER_REL_TOL) * c.max(R::one());
        t * adaptive_simpson(integrand, R::zero(), c, tol, DEFAULT_MAX_DEPTH)
    }

    /// Discrete-sum total false alarms `sum_i l * E_fa(i) * p_{i-1}`.
    pub fn expected_total_false_alarms_discrete(&self) -> R {
        self.discrete_time_and_false_alarms().1
    }

    fn discrete_time_and_false_alarms(&self) -> (R, R) {
        let t_hat = self.t_hat();
        let n = R::of(self.n_scale() as f64);
        let l = self.lr();
        let mut time = R::zero();
        let mut fa_total = R::zero();
        let mut col_sum = R::zero();
        for i in 1..=t_hat {
            let p_prev = (-(l * col_sum)).exp();
            let e_fa = self.expected_false_alarms(i);
            let i_r = R::of(i as f64);
            let remaining = R::of((t_hat - i + 1) as f64);
            time = time + l * ((i_r - R::one()) + remaining * e_fa) * p_prev;
            fa_total = fa_total + l * e_fa * p_prev;
            col_sum = col_sum + self.m_col(R::of((t_hat - i) as f64)) / n;
        }
        (time, fa_total)
    }

    /// Dimensionless tradeoff coefficient `D_tcr = D_pc^2 * J`, by default
    /// with [`FaModel::StoredChains`].
    pub fn tradeoff_coefficient(&self) -> R {
        self.tradeoff_coefficient_with(FaModel::StoredChains)
    }

    pub fn tradeoff_coefficient_with(&self, model: FaModel) -> R {
        let d = self.d_pc();
        d * d * self.time_integral(model)
    }

    /// Full report; absolute fields are present when `t` and `N` are known.
    pub fn report(&self) -> TheoryReport<R> {
        let absolute = self.t.is_some() && self.n.is_some();
        let m0 = absolute.then(|| self.m0_expected());
        let m = m0.map(|m| m * self.lr());
        TheoryReport {
            h: self.h_value(),
            d_pc: self.d_pc(),
            success_p: self.success_prob(),
            m0,
            expected_online_time: absolute.then(|| self.expected_online_time()),
            expected_total_false_alarms: absolute.then(|| self.expected_total_false_alarms()),
            memory_records: m,
            d_tcr: self.tradeoff_coefficient_with(FaModel::GeneratedChains),
            d_tcr_stored_model: self.tradeoff_coefficient_with(FaModel::StoredChains),
        }
    }
}

/// Analytic predictions for one configuration.
///
/// `d_tcr` uses [`FaModel::GeneratedChains`] so that
/// `d_tcr = expected_online_time * memory_records^2 / N^2` holds within the
/// report; `d_tcr_stored_model` is the variant comparable with tabulated
/// optimal parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryReport<R: Real = f64> {
    pub h: R,
    pub d_pc: R,
    pub success_p: R,
    pub m0: Option<R>,
    pub expected_online_time: Option<R>,
    pub expected_total_false_alarms: Option<R>,
    pub memory_records: Option<R>,
    pub d_tcr: R,
    pub d_tcr_stored_model: R,
}

/// `integral_a^b (1 - e^{u-c}) / (e^u - (1-H)) du` by adaptive Simpson
/// quadrature to absolute tolerance [`INNER_ABS_TOL`].
pub fn inner_integral<R: Real>(a: R, b: R, h: R, c: R) -> R {
    assert!(a <= b, "inner integral needs a <= b");
    assert!(
        h > R::zero() && h <= R::one(),
        "inner integral needs H in (0, 1]"
    );
    assert!(
        a >= R::zero() && b <= c,
        "inner integral needs 0 <= a <= b <= c"
    );
    let one_minus_h = R::one() - h;
    let integrand = |u: R| (R::one() - (u - c).exp()) / (u.exp() - one_minus_h);
    adaptive_simpson(integrand, a, b, R::of(INNER_ABS_TOL), DEFAULT_MAX_DEPTH)
}

/// Closed-form antiderivative route for the inner integral, used to
/// cross-check the quadrature:
/// `F(u) = ln(1 - (1-H) e^-u) / (1-H) - e^-c ln(e^u - (1-H))` for `H < 1`,
/// and the `H = 1` limit `F(u) = -e^-u - e^-c u`.
pub fn inner_integral_closed_form<R: Real>(a: R, b: R, h: R, c: R) -> R {
    assert!(a <= b, "inner integral needs a <= b");
    assert!(
        h > R::zero() && h <= R::one(),
        "inner integral needs H in (0, 1]"
    );
    let f = |u: R| {
        if h == R::one() {
            -(-u).exp() - (-c).exp() * u
        } else {
            let omh = R::one() - h;
            (R::one() - omh * (-u).exp()).ln() / omh - (-c).exp() * (u.exp() - omh).ln()
        }
    };
    f(b) - f(a)
}
