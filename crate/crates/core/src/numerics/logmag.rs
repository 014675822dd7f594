use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::Serialize;

/// Linear-scale outputs of exponentially small values are clamped here.
pub const LINEAR_FLOOR: f64 = 1e-300;

/// A signed real stored as `sign · exp(log_abs)`.
///
/// Products add `log_abs` exactly, so `α^c` and friends stay meaningful long
/// after the linear value has underflowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogMagnitude {
    pub log_abs: f64,
    pub sign: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude {
        log_abs: f64::NEG_INFINITY,
        sign: 1.0,
    };
    pub const ONE: LogMagnitude = LogMagnitude {
        log_abs: 0.0,
        sign: 1.0,
    };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        Self {
            log_abs: x.abs().ln(),
            sign: x.signum(),
        }
    }

    /// Positive value `exp(log_abs)`.
    pub fn from_log(log_abs: f64) -> Self {
        Self { log_abs, sign: 1.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.sign * self.log_abs.exp()
    }

    /// Linear value with magnitudes below [`LINEAR_FLOOR`] reported as the floor.
    pub fn to_linear_clamped(self) -> f64 {
        if self.log_abs < LINEAR_FLOOR.ln() {
            self.sign * LINEAR_FLOOR
        } else {
            self.to_f64()
        }
    }

    pub fn log10_abs(self) -> f64 {
        self.log_abs / std::f64::consts::LN_10
    }

    pub fn is_below_floor(self) -> bool {
        self.log_abs < LINEAR_FLOOR.ln()
    }

    /// `|x|^p` keeping the sign only for `p = 1`-like uses; intended for positive values.
    pub fn powf(self, p: f64) -> Self {
        Self {
            log_abs: self.log_abs * p,
            sign: self.sign,
        }
    }

    /// Orders by magnitude only.
    pub fn cmp_magnitude(&self, other: &Self) -> Ordering {
        self.log_abs.total_cmp(&other.log_abs)
    }
}

impl Mul for LogMagnitude {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self {
            log_abs: self.log_abs + other.log_abs,
            sign: self.sign * other.sign,
        }
    }
}

impl Div for LogMagnitude {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        Self {
            log_abs: self.log_abs - other.log_abs,
            sign: self.sign * other.sign,
        }
    }
}

impl Add for LogMagnitude {
    type Output = Self;

    /// Sum of two values, computed without leaving the log domain.
    fn add(self, other: Self) -> Self {
        if self.log_abs == f64::NEG_INFINITY {
            return other;
        }
        if other.log_abs == f64::NEG_INFINITY {
            return self;
        }
        let (big, small) = if self.log_abs >= other.log_abs {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_abs - big.log_abs).exp();
        if big.sign == small.sign {
            Self {
                log_abs: big.log_abs + ratio.ln_1p(),
                sign: big.sign,
            }
        } else if ratio == 1.0 {
            Self::ZERO
        } else {
            Self {
                log_abs: big.log_abs + (-ratio).ln_1p(),
                sign: big.sign,
            }
        }
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l10 = self.log10_abs();
        let e = l10.floor();
        let m = 10f64.powf(l10 - e);
        let s = if self.sign < 0.0 { "-" } else { "" };
        write!(f, "{s}{m:.6}e{e:+}")
    }
}
