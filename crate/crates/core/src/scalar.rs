//! Scalar backends.
//!
//! Everything that colors clouds or decodes colors is generic over [`Scalar`].
//! Two families implement it: the exact [`Rational`] backend, where equality of
//! squared distances is decided exactly, and the IEEE floats, where values are
//! snapped onto a grid of step `quantum` before they take part in a color.
//! Geometric solves that need square roots are generic over [`Real`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number used by the exact backend.
pub type Rational = BigRational;

/// Field element usable as a coordinate or squared distance.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Canonical, totally ordered form of a value as it appears inside a color.
    type Key: Clone + Debug + Eq + Ord + Hash + Send + Sync;

    /// `true` when arithmetic is exact.
    const EXACT: bool;

    /// Snap a value to its color key. Exact backends ignore `quantum`.
    fn key(&self, quantum: f64) -> Self::Key;

    /// Value represented by a key.
    fn from_key(key: &Self::Key, quantum: f64) -> Self;

    /// Platform independent byte encoding of a key.
    fn write_key(key: &Self::Key, out: &mut Vec<u8>);

    /// Zero test: exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Nearest `f64`.
    fn approx(&self) -> f64;

    /// `num / den` in this backend.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Embed an `f64` (exactly for rationals, since every finite double is a dyadic rational).
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(Self::zero)
    }

    fn is_positive_beyond(&self, tol: f64) -> bool {
        self.is_positive() && !self.is_negligible(tol)
    }

    fn is_negative_beyond(&self, tol: f64) -> bool {
        self.is_negative() && !self.is_negligible(tol)
    }
}

/// Floating point scalar with the usual transcendental functions.
pub trait Real: Scalar + Float + FloatConst + Copy {}

impl Real for f32 {}
impl Real for f64 {}

fn write_bigint(value: &BigInt, out: &mut Vec<u8>) {
    let (sign, bytes) = value.to_bytes_be();
    out.push(match sign {
        Sign::Minus => 0,
        Sign::NoSign => 1,
        Sign::Plus => 2,
    });
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
}

impl Scalar for Rational {
    type Key = Rational;
    const EXACT: bool = true;

    fn key(&self, _quantum: f64) -> Self::Key {
        self.clone()
    }

    fn from_key(key: &Self::Key, _quantum: f64) -> Self {
        key.clone()
    }

    fn write_key(key: &Self::Key, out: &mut Vec<u8>) {
        // BigRational keeps itself reduced with a positive denominator.
        out.push(b'Q');
        write_bigint(key.numer(), out);
        write_bigint(key.denom(), out);
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Key = i64;
            const EXACT: bool = false;

            fn key(&self, quantum: f64) -> Self::Key {
                ((*self as f64) / quantum).round() as i64
            }

            fn from_key(key: &Self::Key, quantum: f64) -> Self {
                (*key as f64 * quantum) as $t
            }

            fn write_key(key: &Self::Key, out: &mut Vec<u8>) {
                out.push(b'G');
                out.extend_from_slice(&key.to_be_bytes());
            }

            fn is_negligible(&self, tol: f64) -> bool {
                (*self as f64).abs() <= tol
            }

            fn approx(&self) -> f64 {
                *self as f64
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

/// Integer as a scalar.
pub(crate) fn int<T: Scalar>(k: usize) -> T {
    T::from_usize(k).expect("small integers are representable")
}

/// `1/2` in `T`.
pub(crate) fn half<T: Scalar>() -> T {
    T::one() / (T::one() + T::one())
}

/// Largest absolute value of a slice, as `f64`, floored at 1.
pub(crate) fn magnitude<T: Scalar>(values: impl IntoIterator<Item = T>) -> f64 {
    values
        .into_iter()
        .map(|v| v.approx().abs())
        .fold(1.0, f64::max)
}

/// Convert between backends through `f64` (exact when the target is rational).
pub fn convert<T: Scalar, U: Scalar>(value: &T) -> U {
    U::from_f64_lossy(value.approx())
}
