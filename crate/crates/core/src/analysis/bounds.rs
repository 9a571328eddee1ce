//! Closed-form security bounds, in floating point (generic over
//! [`Float`]) and, for even `t`, exactly over [`Rational`].

use num_bigint::BigInt;
use num_traits::{Float, FromPrimitive, One, Zero};
use serde::Serialize;

use crate::scalar::Rational;
use crate::tamper::Case;

pub const SQUARED_FORM_NOTE: &str =
    "tail term uses the squared denominator (d/n - 3/8)^2; the unsquared form is not used";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Premises {
    pub d_gt_3n_over_8: bool,
    pub t_even: bool,
    pub t_gt_6: bool,
    /// Only known once a tampering function fixes `r`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_le_t: Option<bool>,
}

impl Premises {
    pub fn new(n: usize, d: usize, t: usize) -> Self {
        Self {
            d_gt_3n_over_8: 8 * d > 3 * n,
            t_even: t.is_multiple_of(2),
            t_gt_6: t > 6,
            r_le_t: None,
        }
    }

    pub fn all_met(&self) -> bool {
        self.d_gt_3n_over_8 && self.t_even && self.t_gt_6 && self.r_le_t.unwrap_or(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Components<F> {
    pub rho: F,
    pub two_pow_neg_t: F,
    pub tail_term: F,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport<F> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<Case>,
    /// `max(rho, 2^-t + tail_term)` clamped to `[0, 1]`.
    pub epsilon: F,
    /// The same expression with the unclamped tail.
    pub epsilon_raw: F,
    pub tail_raw: F,
    pub premises: Premises,
    pub components: Components<F>,
    pub note: &'static str,
}

impl<F> BoundReport<F> {
    pub fn with_case(mut self, case: Case, t: usize, r: usize) -> Self {
        self.case = Some(case);
        self.premises.r_le_t = Some(r <= t);
        self
    }
}

fn lit<F: FromPrimitive>(v: u128) -> F {
    F::from_u128(v).expect("finite")
}

fn half_power<F: Float + FromPrimitive>(base: F, t: usize) -> F {
    if t.is_multiple_of(2) {
        base.powi((t / 2) as i32)
    } else {
        base.powf(lit::<F>(t as u128) / (F::one() + F::one()))
    }
}

fn clamp01<F: Float>(x: F) -> F {
    x.max(F::zero()).min(F::one())
}

/// `(t / (n (d/n - 3/8)^2))^(t/2)`, evaluated as `(64 n t / (8d - 3n)^2)^(t/2)`;
/// infinite when `8d = 3n`.
pub fn epsilon_tail_raw<F: Float + FromPrimitive>(n: usize, d: usize, t: usize) -> F {
    let gap = (8 * d as i128 - 3 * n as i128).unsigned_abs();
    if gap == 0 {
        return F::infinity();
    }
    let base = lit::<F>(64 * n as u128 * t as u128) / lit::<F>(gap * gap);
    half_power(base, t)
}

pub fn epsilon_bound<F: Float + FromPrimitive>(
    rho: F,
    n: usize,
    d: usize,
    t: usize,
) -> BoundReport<F> {
    let premises = Premises::new(n, d, t);
    let tail_raw = epsilon_tail_raw::<F>(n, d, t);
    let tail_term = if premises.d_gt_3n_over_8 {
        tail_raw.min(F::one())
    } else {
        F::one()
    };
    let two_pow_neg_t = F::one() / lit::<F>(2).powi(t as i32);
    BoundReport {
        case: None,
        epsilon: clamp01(rho.max(two_pow_neg_t + tail_term)),
        epsilon_raw: rho.max(two_pow_neg_t + tail_raw),
        tail_raw,
        premises,
        components: Components {
            rho,
            two_pow_neg_t,
            tail_term,
        },
        note: SQUARED_FORM_NOTE,
    }
}

/// `(n t / (d - (p+r)/2)^2)^(t/2)`, infinite when `2d <= p + r`.
pub fn tail_bound_raw<F: Float + FromPrimitive>(
    n: usize,
    d: usize,
    p: usize,
    r: usize,
    t: usize,
) -> F {
    if 2 * d <= p + r {
        return F::infinity();
    }
    let gap = (2 * d - p - r) as u128;
    half_power(lit::<F>(4 * n as u128 * t as u128) / lit::<F>(gap * gap), t)
}

pub fn tail_bound<F: Float + FromPrimitive>(n: usize, d: usize, p: usize, r: usize, t: usize) -> F {
    clamp01(tail_bound_raw(n, d, p, r, t))
}

fn rat(n: u128, d: u128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn min_one(x: Rational) -> Rational {
    if x > Rational::one() {
        Rational::one()
    } else {
        x
    }
}

/// Exact clamped epsilon; `None` for odd `t`, where the tail is irrational.
pub fn epsilon_bound_exact(rho: &Rational, n: usize, d: usize, t: usize) -> Option<Rational> {
    if t % 2 == 1 {
        return None;
    }
    let tail = if 8 * d > 3 * n {
        let gap = (8 * d - 3 * n) as u128;
        min_one(num_traits::pow(
            rat(64 * n as u128 * t as u128, gap * gap),
            t / 2,
        ))
    } else {
        Rational::one()
    };
    let sum = rat(1, 1u128 << t) + tail;
    let eps = if *rho > sum { rho.clone() } else { sum };
    Some(min_one(eps).max(Rational::zero()))
}

/// Exact clamped tail bound; `None` for odd `t`.
pub fn tail_bound_exact(n: usize, d: usize, p: usize, r: usize, t: usize) -> Option<Rational> {
    if t % 2 == 1 {
        return None;
    }
    if 2 * d <= p + r {
        return Some(Rational::one());
    }
    let gap = (2 * d - p - r) as u128;
    Some(min_one(num_traits::pow(
        rat(4 * n as u128 * t as u128, gap * gap),
        t / 2,
    )))
}
