//! Reals stored as a sign and the natural log of the magnitude.
//!
//! Weight sequences and the terms `a_n 2^{jn}` of a lacunary series range over
//! thousands of orders of magnitude, far outside `f64`. Keeping them as
//! `(sign, ln|x|)` makes products exact up to the rounding of one addition.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Zero => 0.0,
            Sign::Positive => 1.0,
        }
    }

    fn mul(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Positive,
            _ => Sign::Negative,
        }
    }

    fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// A real number `sign * exp(log_mag)`.
///
/// `log_mag` is ignored (and normalized to `-inf`) when the sign is zero.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SignedLogValue {
    sign: Sign,
    log_mag: f64,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue {
        sign: Sign::Zero,
        log_mag: f64::NEG_INFINITY,
    };

    pub const ONE: SignedLogValue = SignedLogValue {
        sign: Sign::Positive,
        log_mag: 0.0,
    };

    /// Builds a value from its parts. A `-inf` magnitude collapses to zero.
    pub fn new(sign: Sign, log_mag: f64) -> Self {
        if sign == Sign::Zero || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLogValue { sign, log_mag }
        }
    }

    /// A positive value with the given natural log.
    pub fn from_log(log_mag: f64) -> Self {
        Self::new(Sign::Positive, log_mag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else if x > 0.0 {
            Self::new(Sign::Positive, x.ln())
        } else {
            Self::new(Sign::Negative, (-x).ln())
        }
    }

    /// Converts back to `f64`; overflows to `±inf` and underflows to `0`.
    pub fn to_f64(self) -> f64 {
        self.sign.as_f64() * self.log_mag.exp()
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn log_mag(self) -> f64 {
        self.log_mag
    }

    pub fn is_zero(self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn abs(self) -> Self {
        match self.sign {
            Sign::Zero => Self::ZERO,
            _ => SignedLogValue {
                sign: Sign::Positive,
                log_mag: self.log_mag,
            },
        }
    }

    /// Multiplies by `exp(log_factor)`.
    pub fn scale_exp(self, log_factor: f64) -> Self {
        Self::new(self.sign, self.log_mag + log_factor)
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let sign = match self.sign {
            Sign::Negative if k % 2 != 0 => Sign::Negative,
            Sign::Zero => Sign::Zero,
            _ => Sign::Positive,
        };
        Self::new(sign, self.log_mag * k as f64)
    }

    /// Sums many terms in a frame normalized by the largest magnitude.
    pub fn sum<I: IntoIterator<Item = SignedLogValue>>(terms: I) -> Self {
        let terms: Vec<SignedLogValue> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(top) = terms.iter().map(|t| t.log_mag).reduce(f64::max) else {
            return Self::ZERO;
        };
        let mut acc = NeumaierSum::default();
        for t in &terms {
            acc.add(t.sign.as_f64() * (t.log_mag - top).exp());
        }
        Self::from_f64(acc.total()).scale_exp(top)
    }
}

impl PartialEq for SignedLogValue {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == Sign::Zero || self.log_mag == other.log_mag)
    }
}

impl PartialOrd for SignedLogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let rank = |s: Sign| match s {
            Sign::Negative => 0,
            Sign::Zero => 1,
            Sign::Positive => 2,
        };
        match rank(self.sign).cmp(&rank(other.sign)) {
            Ordering::Equal => match self.sign {
                Sign::Zero => Some(Ordering::Equal),
                Sign::Positive => self.log_mag.partial_cmp(&other.log_mag),
                Sign::Negative => other.log_mag.partial_cmp(&self.log_mag),
            },
            o => Some(o),
        }
    }
}

impl Add for SignedLogValue {
    type Output = SignedLogValue;

    /// Signed log-sum-exp.
    fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log_mag >= other.log_mag {
            (self, other)
        } else {
            (other, self)
        };
        let d = small.log_mag - big.log_mag;
        if big.sign == small.sign {
            Self::new(big.sign, big.log_mag + d.exp().ln_1p())
        } else if d == 0.0 {
            Self::ZERO
        } else {
            // ln(1 - e^d) for d < 0
            Self::new(big.sign, big.log_mag + (-d.exp_m1()).ln())
        }
    }
}

impl Sub for SignedLogValue {
    type Output = SignedLogValue;

    fn sub(self, other: Self) -> Self {
        self + -other
    }
}

impl Mul for SignedLogValue {
    type Output = SignedLogValue;

    // magnitudes multiply by adding logs
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign.mul(rhs.sign), self.log_mag + rhs.log_mag)
    }
}

impl Div for SignedLogValue {
    type Output = SignedLogValue;

    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by a zero SignedLogValue");
        Self::new(self.sign.mul(rhs.sign), self.log_mag - rhs.log_mag)
    }
}

impl Neg for SignedLogValue {
    type Output = SignedLogValue;

    fn neg(self) -> Self {
        SignedLogValue {
            sign: self.sign.flip(),
            log_mag: self.log_mag,
        }
    }
}

impl fmt::Display for SignedLogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => write!(f, "0"),
            Sign::Positive => write!(f, "exp({})", self.log_mag),
            Sign::Negative => write!(f, "-exp({})", self.log_mag),
        }
    }
}

/// Neumaier's compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    count: usize,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.count += 1;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }

    /// Sum of the magnitudes of the addends.
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }

    /// A bound on the rounding error of [`total`](Self::total).
    pub fn error_bound(&self) -> f64 {
        let u = f64::EPSILON;
        2.0 * u * self.total().abs() + 2.0 * (self.count as f64) * u * u * self.abs_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_handles_cancellation_and_zero() {
        let a = SignedLogValue::from_f64(3.0);
        let b = SignedLogValue::from_f64(-3.0);
        assert!((a + b).is_zero());
        let c = SignedLogValue::from_f64(-1.0);
        assert!(((a + c).to_f64() - 2.0).abs() < 1e-15);
        assert_eq!(SignedLogValue::ZERO + c, c);
    }

    #[test]
    fn magnitudes_beyond_f64_range() {
        let big = SignedLogValue::from_log(5000.0);
        let small = SignedLogValue::from_log(-4990.0);
        let p = big * small;
        assert!((p.to_f64() - 10f64.exp()).abs() < 1e-9);
        assert_eq!(big.to_f64(), f64::INFINITY);
    }

    #[test]
    fn ordering_respects_sign() {
        let neg = SignedLogValue::from_f64(-2.0);
        let pos = SignedLogValue::from_f64(1e-300);
        assert!(neg < SignedLogValue::ZERO);
        assert!(SignedLogValue::ZERO < pos);
        assert!(SignedLogValue::from_f64(-5.0) < neg);
    }

    #[test]
    fn normalized_sum_matches_direct() {
        let xs = [1.0, -0.5, 0.25, 1e-20, -0.125];
        let s = SignedLogValue::sum(xs.iter().map(|&x| SignedLogValue::from_f64(x)));
        assert!((s.to_f64() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn powi_sign() {
        let m = SignedLogValue::from_f64(-2.0);
        assert!((m.powi(3).to_f64() + 8.0).abs() < 1e-12);
        assert!((m.powi(2).to_f64() - 4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip(x in prop_oneof![1e-300f64..1e300, -1e300f64..-1e-300]) {
            let back = SignedLogValue::from_f64(x).to_f64();
            // relative error of exp(ln x) is about |ln x| ulps
            let tol = 4.0 * f64::EPSILON * (1.0 + x.abs().ln().abs());
            prop_assert!(((back - x) / x).abs() <= tol, "{x} -> {back}");
        }

        #[test]
        fn multiplication_is_associative(a in -700.0f64..700.0, b in -700.0f64..700.0, c in -700.0f64..700.0) {
            let (x, y, z) = (SignedLogValue::from_log(a), SignedLogValue::from_log(b), -SignedLogValue::from_log(c));
            let l = (x * y) * z;
            let r = x * (y * z);
            prop_assert_eq!(l.sign(), r.sign());
            let scale = 1.0f64.max(l.log_mag().abs());
            prop_assert!((l.log_mag() - r.log_mag()).abs() <= 1e-12 * scale);
        }
    }
}
