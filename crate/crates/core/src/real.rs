//! Scalar abstraction shared by every algorithm in the crate.
//!
//! Everything that touches q-numbers is generic over [`Real`], so the same
//! code runs in ordinary double precision and in a ~57 significant digit
//! binary floating point mode backed by `dashu-float`. The high-precision
//! mode exists for oracle runs: slowly converging Jackson partial sums and
//! identity residuals that must be pushed far below double round-off.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_base::{Abs, Sign};
use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use serde::{Deserialize, Serialize};

/// Working precision of the high-precision scalar, in bits.
pub const HIGH_PRECISION_BITS: usize = 192;

/// Which scalar type a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    High,
}

impl Precision {
    /// Absolute tolerance used for identity checks when the caller does not
    /// supply one.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Precision::Double => 1e-10,
            Precision::High => 1e-30,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::High => f.write_str("high"),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "double" => Ok(Precision::Double),
            "high" => Ok(Precision::High),
            other => Err(format!("unknown precision `{other}` (expected double or high)")),
        }
    }
}

/// Real scalar used throughout the crate.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i64) -> Self;
    /// `self^x` for `self > 0`.
    fn powf(&self, x: &Self) -> Self;
    fn abs(&self) -> Self;
    fn pi() -> Self;
    /// Parse a decimal literal exactly, then round once to working precision.
    fn parse_decimal(s: &str) -> Option<Self>;
    /// Unit round-off of the representation.
    fn epsilon() -> Self;

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::Double;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i64) -> Self {
        f64::powi(*self, n as i32)
    }
    fn powf(&self, x: &Self) -> Self {
        f64::powf(*self, *x)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

type Float = FBig<HalfEven, 2>;

/// Binary floating point number carrying [`HIGH_PRECISION_BITS`] bits of
/// significand.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct HighPrecision(Float);

impl HighPrecision {
    fn wrap(x: Float) -> Self {
        HighPrecision(x.with_precision(HIGH_PRECISION_BITS).value())
    }

    pub fn as_fbig(&self) -> &FBig<HalfEven, 2> {
        &self.0
    }
}

impl fmt::Debug for HighPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HighPrecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_decimal().value())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for HighPrecision {
            type Output = HighPrecision;
            fn $method(self, rhs: HighPrecision) -> HighPrecision {
                HighPrecision($tr::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for HighPrecision {
    type Output = HighPrecision;
    fn neg(self) -> HighPrecision {
        HighPrecision(-self.0)
    }
}

impl Real for HighPrecision {
    const PRECISION: Precision = Precision::High;

    fn from_f64(x: f64) -> Self {
        // every finite double is exactly representable
        Self::wrap(Float::try_from(x).expect("finite f64"))
    }
    fn from_i64(n: i64) -> Self {
        Self::wrap(Float::from(n))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn sqrt(&self) -> Self {
        if self.0.sign() == Sign::Negative && !self.is_zero() {
            panic!("square root of a negative number");
        }
        if self.is_zero() {
            return self.clone();
        }
        HighPrecision(self.0.sqrt())
    }
    fn powi(&self, n: i64) -> Self {
        HighPrecision(self.0.powi(n.into()))
    }
    fn powf(&self, x: &Self) -> Self {
        HighPrecision((x.0.clone() * self.0.ln()).exp())
    }
    fn abs(&self) -> Self {
        HighPrecision(self.0.clone().abs())
    }
    fn pi() -> Self {
        HighPrecision(Float::pi(HIGH_PRECISION_BITS))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let dec = DBig::from_str(s.trim()).ok()?;
        let bin = dec
            .with_base_and_precision::<2>(HIGH_PRECISION_BITS)
            .value()
            .with_rounding::<HalfEven>();
        Some(Self::wrap(bin))
    }
    fn epsilon() -> Self {
        Self::from_i64(2).powi(1 - HIGH_PRECISION_BITS as i64)
    }
}

/// Largest absolute value in a sequence, zero when empty.
pub fn max_abs<'a, T: Real>(values: impl IntoIterator<Item = &'a T>) -> T {
    values
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
}
