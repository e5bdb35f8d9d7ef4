//! Closed-form overlaps of the GHZ state with the Dicke basis along the
//! tilted axis, their angle derivatives, and the derived weights B_m.
//!
//! In half-angle variables c = cos(θ/2), s = sin(θ/2) the overlap is
//!
//! ```text
//! v_m = sqrt(C(n, μ) / 2) [ (-1)^ν c^μ s^ν + e^{-i n φ} s^μ c^ν ],
//! μ = m + n/2,  ν = n/2 - m,
//! ```
//!
//! a two-term sum of monomials whose factors individually leave f64 range
//! near n ≈ 200; each monomial is therefore kept as (log magnitude, phase)
//! and the sum runs through a signed log-sum-exp. The θ-derivative applies
//! the product rule monomial-by-monomial, which keeps the θ → 0, π limits
//! exact instead of producing 0·∞.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::logspace::{log_sum, pow_ln, KahanSum, LogComplex};

/// Estimation target θ and azimuth φ of the tilted axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    theta: f64,
    phi: f64,
}

impl Angles {
    /// θ must lie in [0, π] (the closed forms use √(1−cos²θ) = sin θ);
    /// φ is wrapped into [0, 2π).
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!(
                "theta = {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::domain("phi must be finite"));
        }
        Ok(Angles {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// The three weight moments Σ B, Σ m B, Σ m² B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub total: f64,
    pub first: f64,
    pub second: f64,
}

/// Overlap amplitudes v_m of the GHZ state with the tilted Dicke basis of
/// the top spin sector, their θ-derivatives, and the weights B_m = |v_m|².
///
/// Entries are indexed by μ = m + n/2 ∈ 0..=n. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct GhzOverlaps {
    n: u32,
    angles: Angles,
    v: Vec<LogComplex>,
    dv: Vec<LogComplex>,
    b: Vec<f64>,
    db: Vec<f64>,
}

impl GhzOverlaps {
    pub fn new(n: u32, angles: Angles) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("qubit count n must be >= 1"));
        }
        let half = angles.theta / 2.0;
        let (s, c) = (half.sin(), half.cos());
        let (ln_s, ln_c) = (s.ln(), c.ln());
        let phase2 = -(n as f64) * angles.phi;

        // ln C(n, μ) by multiplicative recurrence, symmetrized.
        let mut binom = vec![1.0_f64; n as usize + 1];
        for k in 1..=(n as usize) / 2 {
            binom[k] = binom[k - 1] * (n as usize - k + 1) as f64 / k as f64;
        }
        for k in 0..=(n as usize) / 2 {
            binom[n as usize - k] = binom[k];
        }

        let mut v = Vec::with_capacity(n as usize + 1);
        let mut dv = Vec::with_capacity(n as usize + 1);
        let mut b = Vec::with_capacity(n as usize + 1);
        let mut db = Vec::with_capacity(n as usize + 1);
        for mu in 0..=n as usize {
            let nu = n as usize - mu;
            let (muf, nuf) = (mu as f64, nu as f64);
            let scale = 0.5 * (binom[mu].ln() - 2.0_f64.ln());
            let sign1 = PI * nuf; // (-1)^ν as a phase

            let term1 = LogComplex::new(scale + pow_ln(ln_c, muf) + pow_ln(ln_s, nuf), sign1);
            let term2 = LogComplex::new(scale + pow_ln(ln_s, muf) + pow_ln(ln_c, nuf), phase2);
            let vm = log_sum(&[term1, term2]);

            // d(c^μ s^ν)/dθ = (ν/2) c^{μ+1} s^{ν-1} - (μ/2) c^{μ-1} s^{ν+1};
            // absent factors (zero exponent) drop their monomial entirely.
            let mut terms = [LogComplex::ZERO; 4];
            let mut k = 0;
            if nu >= 1 {
                terms[k] = LogComplex::new(
                    scale + (nuf / 2.0).ln() + pow_ln(ln_c, muf + 1.0) + pow_ln(ln_s, nuf - 1.0),
                    sign1,
                );
                k += 1;
                terms[k] = LogComplex::new(
                    scale + (nuf / 2.0).ln() + pow_ln(ln_s, muf + 1.0) + pow_ln(ln_c, nuf - 1.0),
                    phase2 + PI,
                );
                k += 1;
            }
            if mu >= 1 {
                terms[k] = LogComplex::new(
                    scale + (muf / 2.0).ln() + pow_ln(ln_c, muf - 1.0) + pow_ln(ln_s, nuf + 1.0),
                    sign1 + PI,
                );
                k += 1;
                terms[k] = LogComplex::new(
                    scale + (muf / 2.0).ln() + pow_ln(ln_s, muf - 1.0) + pow_ln(ln_c, nuf + 1.0),
                    phase2,
                );
                k += 1;
            }
            let dvm = log_sum(&terms[..k]);

            b.push(vm.abs_sq());
            db.push(if vm.is_zero() || dvm.is_zero() {
                0.0
            } else {
                2.0 * (vm.ln_mag + dvm.ln_mag).exp() * (dvm.arg - vm.arg).cos()
            });
            v.push(vm);
            dv.push(dvm);
        }
        Ok(GhzOverlaps {
            n,
            angles,
            v,
            dv,
            b,
            db,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn angles(&self) -> Angles {
        self.angles
    }

    /// B_m = |v_m|², indexed by μ = m + n/2.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// dB_m/dθ = 2 Re(v̄_m dv_m), indexed by μ.
    pub fn db(&self) -> &[f64] {
        &self.db
    }

    pub fn v_log(&self, mu: usize) -> LogComplex {
        self.v[mu]
    }

    pub fn dv_log(&self, mu: usize) -> LogComplex {
        self.dv[mu]
    }

    pub fn v(&self, mu: usize) -> Complex64 {
        self.v[mu].to_complex()
    }

    pub fn dv(&self, mu: usize) -> Complex64 {
        self.dv[mu].to_complex()
    }

    /// ρ_{m,m'} = v_m v̄_{m'}; Hermitian, positive semidefinite, rank 1.
    pub fn rho(&self, mu: usize, mup: usize) -> Complex64 {
        self.v[mu].mul(conj(self.v[mup])).to_complex()
    }

    /// ∂θ ρ_{m,m'} = dv_m v̄_{m'} + v_m dv̄_{m'}.
    pub fn drho(&self, mu: usize, mup: usize) -> Complex64 {
        self.dv[mu].mul(conj(self.v[mup])).to_complex()
            + self.v[mu].mul(conj(self.dv[mup])).to_complex()
    }

    /// Compensated sums Σ B, Σ m B, Σ m² B.
    pub fn moments(&self) -> Moments {
        let mut zeroth = KahanSum::default();
        let mut first = KahanSum::default();
        let mut second = KahanSum::default();
        for (mu, &bm) in self.b.iter().enumerate() {
            let m = mu as f64 - self.n as f64 / 2.0;
            zeroth.add(bm);
            first.add(m * bm);
            second.add(m * m * bm);
        }
        Moments {
            total: zeroth.value(),
            first: first.value(),
            second: second.value(),
        }
    }
}

fn conj(z: LogComplex) -> LogComplex {
    LogComplex::new(z.ln_mag, -z.arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn overlaps(n: u32, theta: f64, phi: f64) -> GhzOverlaps {
        GhzOverlaps::new(n, Angles::new(theta, phi).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(Angles::new(-0.1, 0.0).is_err());
        assert!(Angles::new(PI + 0.1, 0.0).is_err());
        assert!(Angles::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn aligned_axis_populates_extremes_only() {
        for n in [3u32, 4, 7] {
            let o = overlaps(n, 0.0, 0.0);
            for mu in 0..=n as usize {
                let want = if mu == 0 || mu == n as usize { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(o.b()[mu], want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn single_qubit_closed_form() {
        for theta in [0.0, 0.3, 1.0, 2.2, PI] {
            let o = overlaps(1, theta, 0.0);
            assert_relative_eq!(o.b()[1], (1.0 + theta.sin()) / 2.0, epsilon = 1e-14);
            assert_relative_eq!(o.b()[0], (1.0 - theta.sin()) / 2.0, epsilon = 1e-14);
            // dB_{+1/2}/dθ = cos θ / 2
            assert_abs_diff_eq!(o.db()[1], theta.cos() / 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn weights_normalize() {
        let o = overlaps(7, 1.0, 0.3);
        let m = o.moments();
        assert_abs_diff_eq!(m.total, 1.0, epsilon = 1e-12);
        for n in [1u32, 2, 19, 64, 200] {
            for theta in [0.0, 0.5, 1.0, PI / 2.0, PI] {
                for phi in [0.0, 0.3] {
                    let m = overlaps(n, theta, phi).moments();
                    assert_abs_diff_eq!(m.total, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn moment_identities() {
        let m5 = overlaps(5, 1.0, 0.0).moments();
        assert_abs_diff_eq!(m5.total, 1.0, epsilon = 1e-12);

        let m4 = overlaps(4, 0.7, 0.0).moments();
        assert_abs_diff_eq!(m4.first, 0.0, epsilon = 1e-12);

        let (n, theta) = (6u32, 0.9_f64);
        let m6 = overlaps(n, theta, 0.0).moments();
        let nf = n as f64;
        let want = nf * nf / 4.0 * theta.cos().powi(2) + nf / 4.0 * theta.sin().powi(2);
        assert_relative_eq!(m6.second, want, max_relative = 1e-10);
    }

    #[test]
    fn first_moment_breaks_below_n2() {
        // For a single qubit the cross term survives: Σ m B = sin(θ)/2.
        let m = overlaps(1, 0.8, 0.0).moments();
        assert_relative_eq!(m.first, 0.8_f64.sin() / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let n = 10u32;
        let theta = 1.0;
        let h = 1e-5;
        let o = overlaps(n, theta, 0.0);
        let op = overlaps(n, theta + h, 0.0);
        let om = overlaps(n, theta - h, 0.0);
        let op2 = overlaps(n, theta + h / 2.0, 0.0);
        let om2 = overlaps(n, theta - h / 2.0, 0.0);
        for mu in 0..=n as usize {
            let fd = (op.v(mu) - om.v(mu)) / (2.0 * h);
            let fd2 = (op2.v(mu) - om2.v(mu)) / h;
            // Richardson: the halved step must agree, confirming O(h²).
            let richardson = (4.0 * fd2 - fd) / 3.0;
            let tol = 1e-7 * o.v(mu).norm().max(1.0);
            assert!((o.dv(mu) - fd).norm() <= tol, "mu = {mu}");
            assert!((o.dv(mu) - richardson).norm() <= tol);
        }
    }

    #[test]
    fn derivative_finite_at_endpoints() {
        for n in [2u32, 5] {
            for theta in [0.0, PI] {
                let o = overlaps(n, theta, 0.0);
                for mu in 0..=n as usize {
                    assert!(o.dv(mu).is_finite(), "n={n} theta={theta} mu={mu}");
                }
                // one-sided finite difference toward the interior
                let h = 1e-6;
                let inner = if theta == 0.0 {
                    overlaps(n, h, 0.0)
                } else {
                    overlaps(n, theta - h, 0.0)
                };
                let sign = if theta == 0.0 { 1.0 } else { -1.0 };
                for mu in 0..=n as usize {
                    let fd = sign * (inner.v(mu) - o.v(mu)) / h;
                    assert!(
                        (o.dv(mu) - fd).norm() <= 1e-4,
                        "endpoint derivative limit n={n} theta={theta} mu={mu}"
                    );
                }
            }
        }
    }

    #[test]
    fn weight_derivative_sums_to_zero() {
        for n in [4u32, 11, 30] {
            let o = overlaps(n, 0.9, 0.5);
            let total: f64 = o.db().iter().sum();
            assert_abs_diff_eq!(total, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rho_is_rank_one() {
        let o = overlaps(6, 1.1, 0.4);
        for mu in 0..=6usize {
            for mup in 0..=6usize {
                let r = o.rho(mu, mup);
                let rt = o.rho(mup, mu);
                assert_abs_diff_eq!(r.re, rt.re, epsilon = 1e-15);
                assert_abs_diff_eq!(r.im, -rt.im, epsilon = 1e-15);
                assert_relative_eq!(
                    r.norm_sqr(),
                    o.b()[mu] * o.b()[mup],
                    epsilon = 1e-15,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn phi_dependence_is_exponentially_small_in_n() {
        let (n, theta) = (20u32, 1.0_f64);
        let base = overlaps(n, theta, 0.0);
        for phi in [0.3, 1.0, 2.5, 5.0] {
            let o = overlaps(n, theta, phi);
            for mu in 0..=n as usize {
                let mut bound = theta.sin().powi(n as i32) / 2.0_f64.powi(n as i32);
                for k in 1..=mu.min(n as usize - mu) {
                    bound *= (n as usize - k + 1) as f64 / k as f64;
                }
                assert!(
                    (o.b()[mu] - base.b()[mu]).abs() <= bound * (1.0 + 1e-12) + 1e-15,
                    "n={n} mu={mu} phi={phi}"
                );
            }
        }
    }
}
