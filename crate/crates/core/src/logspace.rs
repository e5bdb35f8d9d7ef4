//! Signed/phased log-domain arithmetic.
//!
//! Overlap amplitudes mix binomial factors near 2^n with trigonometric
//! powers near 2^-n; both ends leave f64 range long before the product
//! does, so products are assembled as (log magnitude, phase) pairs and
//! sums go through a complex log-sum-exp.

use num_complex::Complex64;

/// A complex number z stored as (ln |z|, arg z).
///
/// `ln_mag == f64::NEG_INFINITY` encodes exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub ln_mag: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln_mag: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn new(ln_mag: f64, arg: f64) -> Self {
        LogComplex { ln_mag, arg }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_mag == f64::NEG_INFINITY
    }

    /// Exponentiate into linear space. Underflows to 0 gracefully.
    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.ln_mag.exp(), self.arg)
        }
    }

    pub fn mul(self, other: LogComplex) -> LogComplex {
        if self.is_zero() || other.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.ln_mag + other.ln_mag, self.arg + other.arg)
    }

    /// |z|^2 in linear space.
    pub fn abs_sq(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            (2.0 * self.ln_mag).exp()
        }
    }
}

/// Sum of log-domain complex numbers via log-sum-exp: the largest magnitude
/// is factored out, the O(1) remainder is accumulated in linear space.
pub fn log_sum(terms: &[LogComplex]) -> LogComplex {
    let lead = terms
        .iter()
        .map(|t| t.ln_mag)
        .fold(f64::NEG_INFINITY, f64::max);
    if lead == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        if !t.is_zero() {
            acc += Complex64::from_polar((t.ln_mag - lead).exp(), t.arg);
        }
    }
    let norm = acc.norm();
    if norm == 0.0 {
        LogComplex::ZERO
    } else {
        LogComplex::new(lead + norm.ln(), acc.arg())
    }
}

/// exp * ln_base with the convention 0 * (-inf) = 0, so zero bases with
/// zero exponents contribute nothing rather than NaN.
pub fn pow_ln(ln_base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        0.0
    } else {
        exp * ln_base
    }
}

/// Compensated (Kahan) accumulator for long sums with cancellation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
