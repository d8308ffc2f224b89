use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Arithmetic abstraction over the two length modes: `f64` for long runs and
/// arbitrary-precision rationals for bit-exact orbit oracles.
///
/// In double mode a point within `cut_tolerance` of a subinterval cut is
/// treated as singular and the caller resamples; in rational mode only exact
/// coincidence is singular.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_f64_lossy(x: f64) -> Self;

    /// Distance below which two values count as coinciding (cut detection).
    /// `None` means exact comparison.
    fn cut_tolerance() -> Option<Self>;

    fn abs_val(&self) -> Self;

    /// True when `a` and `b` coincide under the mode's cut semantics.
    fn coincides(a: &Self, b: &Self) -> bool {
        match Self::cut_tolerance() {
            None => a == b,
            Some(tol) => (a.clone() - b.clone()).abs_val() < tol,
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn cut_tolerance() -> Option<Self> {
        Some(1e-12)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn cut_tolerance() -> Option<Self> {
        None
    }

    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
}

/// Exact rational from an integer pair.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
