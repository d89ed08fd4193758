//! Floating-point values carried as `mantissa · e^{exponent}`.
//!
//! Modified spherical Bessel functions reach magnitudes like `e^{±700}` and
//! beyond inside the matrix assembly while every final matrix *entry* is of
//! moderate size, because growth in one factor cancels decay in another. A
//! [`ScaledValue`] keeps the huge dynamic range exact by storing the exponent
//! separately, so products and ratios never saturate to `inf`/`0` on the way
//! to a well-scaled result.

/// A real number represented as `mantissa * exp(exponent)`.
///
/// The representation is kept canonical: either the value is exactly zero
/// (`mantissa == 0.0`, `exponent == 0.0`) or `|mantissa|` lies in
/// `[e^-0.55, e^0.55]` (so `ln |mantissa|` rounds to 0). The exponent is a
/// plain `f64` and need not be integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledValue {
    mantissa: f64,
    exponent: f64,
}

impl ScaledValue {
    /// The canonical zero.
    pub const ZERO: ScaledValue = ScaledValue {
        mantissa: 0.0,
        exponent: 0.0,
    };

    /// Wrap an ordinary `f64`.
    pub fn new(value: f64) -> Self {
        Self::from_parts(value, 0.0)
    }

    /// Build from explicit parts and normalize. `value = mantissa * exp(exponent)`.
    pub fn from_parts(mantissa: f64, exponent: f64) -> Self {
        debug_assert!(mantissa.is_finite(), "scaled mantissa must be finite");
        debug_assert!(exponent.is_finite(), "scaled exponent must be finite");
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        // Shift so that ln|mantissa| rounds to zero; applying the shift a
        // second time is a no-op, which makes the form canonical.
        let shift = mantissa.abs().ln().round();
        if shift == 0.0 {
            Self { mantissa, exponent }
        } else {
            Self {
                mantissa: mantissa * (-shift).exp(),
                exponent: exponent + shift,
            }
        }
    }

    /// The mantissa of the canonical form.
    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    /// The exponent of the canonical form (base *e*).
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// True if the value is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Collapse to an ordinary `f64`. Overflows to `±inf` and underflows to
    /// `±0` exactly as the equivalent `f64` computation would.
    pub fn to_f64(&self) -> f64 {
        self.mantissa * self.exponent.exp()
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.exponent
        }
    }

    /// Sign of the value: `-1.0`, `0.0`, or `1.0`.
    pub fn signum(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    /// Multiply by a plain scalar.
    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(self.mantissa * factor, self.exponent)
    }

    /// Multiply by `e^{delta}` without touching the mantissa.
    pub fn mul_exp(&self, delta: f64) -> Self {
        if self.is_zero() {
            Self::ZERO
        } else {
            Self {
                mantissa: self.mantissa,
                exponent: self.exponent + delta,
            }
        }
    }

    /// Sum that aligns both operands to the larger exponent first, so the
    /// smaller term degrades gracefully (underflowing to zero only when it is
    /// genuinely negligible at `f64` precision).
    pub fn add(&self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.exponent >= other.exponent {
            (*self, other)
        } else {
            (other, *self)
        };
        let m = hi.mantissa + lo.mantissa * (lo.exponent - hi.exponent).exp();
        Self::from_parts(m, hi.exponent)
    }
}

impl std::ops::Mul for ScaledValue {
    type Output = ScaledValue;
    fn mul(self, rhs: ScaledValue) -> ScaledValue {
        if self.is_zero() || rhs.is_zero() {
            return ScaledValue::ZERO;
        }
        ScaledValue::from_parts(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl std::ops::Div for ScaledValue {
    type Output = ScaledValue;
    fn div(self, rhs: ScaledValue) -> ScaledValue {
        debug_assert!(!rhs.is_zero(), "division of a scaled value by zero");
        if self.is_zero() {
            return ScaledValue::ZERO;
        }
        ScaledValue::from_parts(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl std::ops::Neg for ScaledValue {
    type Output = ScaledValue;
    fn neg(self) -> ScaledValue {
        ScaledValue {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}
