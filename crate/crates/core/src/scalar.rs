//! Probability scalars. Exact enumeration runs over [`Rational`], Monte
//! Carlo estimates and closed-form bounds over `f64`/`f32`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

pub type Rational = BigRational;

/// Numeric type usable as a probability mass.
pub trait Probability:
    Num + Signed + Clone + PartialOrd + ToPrimitive + Send + Sync + Debug
{
    /// `num / den`; `den` must be nonzero.
    fn from_counts(num: u64, den: u64) -> Self;

    /// Lossy conversion from an exact rational.
    fn from_rational(r: &Rational) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_diff(&self, other: &Self) -> Self {
        (self.clone() - other.clone()).abs()
    }

    /// Exact values serialize as `"num/den"` strings, floats as numbers.
    fn to_json(&self) -> serde_json::Value;

    /// Whether the scalar represents values exactly (no rounding).
    const EXACT: bool;
}

impl Probability for Rational {
    const EXACT: bool = true;

    fn from_counts(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(rational_string(self))
    }
}

macro_rules! float_probability {
    ($($t:ty)*) => ($(
        impl Probability for $t {
            const EXACT: bool = false;

            fn from_counts(num: u64, den: u64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn from_rational(r: &Rational) -> Self {
                r.to_f64().unwrap_or(f64::NAN) as $t
            }

            fn to_json(&self) -> serde_json::Value {
                serde_json::json!(f64::from(*self))
            }
        }
    )*)
}

float_probability!(f32 f64);

/// `"num/den"` in lowest terms.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `a/b`, an integer, or a plain decimal such as `0.01` (exactly).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => {
            if let Ok(n) = s.parse::<BigInt>() {
                return Some(BigRational::from_integer(n));
            }
            let (whole, frac) = s.split_once('.')?;
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let negative = whole.starts_with('-');
            let whole = whole.trim_start_matches(['-', '+']);
            if !whole.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
            let value = BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()));
            Some(if negative { -value } else { value })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_agree_across_scalars() {
        let r = Rational::from_counts(3, 12);
        assert_eq!(rational_string(&r), "1/4");
        assert_eq!(f64::from_counts(3, 12), 0.25);
        assert_eq!(f32::from_rational(&r), 0.25);
        assert_eq!(
            r.abs_diff(&Rational::from_counts(1, 2)),
            Rational::from_counts(1, 4)
        );
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("2/8").unwrap(), Rational::from_counts(1, 4));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::from_counts(1, 4));
        assert_eq!(parse_rational("1").unwrap(), Rational::from_counts(1, 1));
        assert_eq!(
            parse_rational("0.01").unwrap(),
            Rational::from_counts(1, 100)
        );
        assert_eq!(
            parse_rational("-1.5").unwrap(),
            -Rational::from_counts(3, 2)
        );
        assert!(parse_rational("1.").is_none());
        assert!(parse_rational("1e-3").is_none());
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
