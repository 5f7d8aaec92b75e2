use rug::ops::PowAssign;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision shared by every high-precision computation.
///
/// `digits` is the precision the caller asks for; `guard_digits` are carried
/// on top of it internally so that accumulated rounding stays below the
/// requested accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    digits: u32,
    guard_digits: u32,
}

impl PrecisionContext {
    pub const DEFAULT_DIGITS: u32 = 60;
    pub const DEFAULT_GUARD_DIGITS: u32 = 10;
    pub const MIN_DIGITS: u32 = 16;
    const MAX_DIGITS: u32 = 100_000;

    pub fn new(digits: u32) -> Result<Self> {
        Self::with_guard(digits, Self::DEFAULT_GUARD_DIGITS)
    }

    pub fn with_guard(digits: u32, guard_digits: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::Precision(format!(
                "digits must be at least {}, got {digits}",
                Self::MIN_DIGITS
            )));
        }
        if digits > Self::MAX_DIGITS {
            return Err(Error::Precision(format!("digits = {digits} is too large")));
        }
        Ok(PrecisionContext {
            digits,
            guard_digits,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision of every `Float` created under this context.
    pub fn bits(&self) -> u32 {
        let decimal = f64::from(self.digits + self.guard_digits);
        (decimal * std::f64::consts::LOG2_10).ceil() as u32 + 4
    }

    /// `10^-(digits - slack)`, the customary acceptance threshold.
    pub fn tolerance(&self, slack: u32) -> Float {
        pow10(self.bits(), -(i64::from(self.digits) - i64::from(slack)))
    }

    /// A float at the working precision.
    pub fn real<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits())
    }

    pub fn one(&self) -> Float {
        Float::with_val(self.bits(), 1)
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            digits: Self::DEFAULT_DIGITS,
            guard_digits: Self::DEFAULT_GUARD_DIGITS,
        }
    }
}

/// `10^exp` at the given binary precision.
pub fn pow10(bits: u32, exp: i64) -> Float {
    let mut t = Float::with_val(bits, 10);
    t.pow_assign(exp as i32);
    t
}
