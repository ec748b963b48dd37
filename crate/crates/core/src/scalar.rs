//! Dual-mode arithmetic: exact rationals and floats behind one trait.
//!
//! Geometry predicates ("does this average land exactly on the line?") are
//! meaningless under float rounding, so every geometric computation in this
//! crate is generic over [`Scalar`]. The [`Rat`] instantiation gives exact
//! answers; the `f64` instantiation classifies a value as "on the line" when
//! it falls inside a tolerance band of width [`FLOAT_TOL`] in normalized
//! units.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rat = BigRational;

/// On-line tolerance for float mode, in units where the relevant affine map
/// has been normalized to have maximum absolute value 1 on the hull.
pub const FLOAT_TOL: f64 = 1e-9;

/// Arithmetic shared by the exact and the float mode.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no tolerance bands anywhere).
    const EXACT: bool;

    fn from_int(v: i64) -> Self;

    fn from_i128(v: i128) -> Self;

    /// Exact ratio `num/den`. Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact conversion of a (dyadic) float. Used to compare uniform draws
    /// against rational probabilities without rounding.
    fn from_f64_exact(v: f64) -> Self;

    fn abs(&self) -> Self;

    /// Sign classification with a tolerance band: `Equal` when the value is
    /// within `tol` of zero (float mode) or exactly zero (exact mode).
    fn sign_band(&self, tol: f64) -> Ordering;

    /// Total order; scalar values in this crate are always finite.
    fn cmp_total(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("non-finite scalar")
    }

    fn min_val(self, other: Self) -> Self {
        if self.cmp_total(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    fn max_val(self, other: Self) -> Self {
        if self.cmp_total(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }

    /// Exact CSV form: `num/den` for rationals, shortest-roundtrip decimal
    /// for floats.
    fn fmt_exact(&self) -> String;

    /// A positive factor that turns every given value into an integer
    /// (1 in float mode). Multiplying sign tests through by it keeps exact
    /// arithmetic on integer-valued rationals, where reduction is cheap.
    fn integer_scale_of(vals: &[&Self]) -> Self {
        let _ = vals;
        Self::one()
    }

    /// Exact numerator/denominator pair when both fit in `i128`. Float mode
    /// reports `None`; it never uses the machine-integer fast paths.
    fn to_ratio_i128(&self) -> Option<(i128, i128)> {
        None
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_i128(v: i128) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_exact(v: f64) -> Self {
        v
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sign_band(&self, tol: f64) -> Ordering {
        if f64::abs(*self) <= tol {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    fn fmt_exact(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn from_i128(v: i128) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational out of f64 range")
    }

    fn from_f64_exact(v: f64) -> Self {
        FromPrimitive::from_f64(v).expect("non-finite float")
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn sign_band(&self, _tol: f64) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    fn fmt_exact(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn integer_scale_of(vals: &[&Self]) -> Self {
        use num_integer::Integer;
        let mut acc = BigInt::from(1);
        for v in vals {
            let d = v.denom();
            let g = acc.gcd(d);
            acc = acc / g * d;
        }
        Rat::from_integer(acc)
    }

    fn to_ratio_i128(&self) -> Option<(i128, i128)> {
        Some((self.numer().to_i128()?, self.denom().to_i128()?))
    }
}

/// Parse `"a/b"`, `"a"`, or a decimal literal into a scalar. Decimal strings
/// are read exactly (e.g. `"0.3"` becomes 3/10 in rational mode).
pub fn parse_scalar<S: Scalar>(text: &str) -> Result<S, String> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let d: i64 = d.trim().parse().map_err(|e| format!("bad denominator: {e}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(S::ratio(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let whole: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().map_err(|e| format!("bad number: {e}"))?
        };
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal fraction in {t:?}"));
        }
        let digits: i64 = frac.parse().map_err(|e| format!("bad number: {e}"))?;
        let den = 10i64.pow(frac.len() as u32);
        let frac_part = S::ratio(if neg { -digits } else { digits }, den);
        return Ok(S::from_int(whole) + frac_part);
    }
    let n: i64 = t.parse().map_err(|e| format!("bad number: {e}"))?;
    Ok(S::from_int(n))
}
