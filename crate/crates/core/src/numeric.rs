//! Scalar-generic numerics: the `Real` abstraction over floating-point types
//! and adaptive Simpson quadrature.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the analytic model is generic over: f32 or f64.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + Send + Sync + 'static {
    /// Lossy conversion from an f64 literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in Real type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`, with Richardson extrapolation of the final estimate. Recursion is
/// capped at `max_depth` splits, which bounds work on non-converging
/// integrands (e.g. tolerances below the scalar's precision).
pub fn adaptive_simpson<R: Real>(f: impl Fn(R) -> R, a: R, b: R, tol: R, max_depth: u32) -> R {
    if a == b {
        return R::zero();
    }
    let two = R::of(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_estimate(a, b, fa, fm, fb);
    recurse(&f, a, m, b, fa, fm, fb, whole, tol, max_depth)
}

#[inline]
fn simpson_estimate<R: Real>(a: R, b: R, fa: R, fm: R, fb: R) -> R {
    (b - a) / R::of(6.0) * (fa + R::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<R: Real>(
    f: &impl Fn(R) -> R,
    a: R,
    m: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    tol: R,
    depth: u32,
) -> R {
    let two = R::of(2.0);
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson_estimate(a, m, fa, flm, fm);
    let right = simpson_estimate(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= R::of(15.0) * tol {
        left + right + delta / R::of(15.0)
    } else {
        let half_tol = tol / two;
        recurse(f, a, lm, m, fa, flm, fm, left, half_tol, depth - 1)
            + recurse(f, m, rm, b, fm, frm, fb, right, half_tol, depth - 1)
    }
}

/// Depth that lets the interval shrink far below any useful tolerance while
/// keeping the recursion stack shallow.
pub const DEFAULT_MAX_DEPTH: u32 = 48;
