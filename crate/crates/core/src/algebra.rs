//! Combinatorics and operator matrix elements of the collective
//! angular-momentum decomposition of n qubits.
//!
//! n spins 1/2 decompose into total-spin sectors j = j_min .. n/2, each
//! appearing with multiplicity d_j^n. Half-integer labels are carried as
//! twice their value (`two_j`, `two_m`), so every quantum number is an
//! integer and sector keys never touch floating point.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A sector multiplicity (or tail sum of multiplicities).
///
/// Exact as an integer up to n = 60; beyond that only the log magnitude is
/// kept, since the factorials involved leave u128 (and eventually f64)
/// range while every downstream ratio stays O(poly n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Degeneracy {
    Exact(u128),
    Log(f64),
}

impl Degeneracy {
    /// Natural log of the count; `-inf` for an exact zero.
    pub fn ln(&self) -> f64 {
        match *self {
            Degeneracy::Exact(0) => f64::NEG_INFINITY,
            Degeneracy::Exact(v) => (v as f64).ln(),
            Degeneracy::Log(l) => l,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Degeneracy::Exact(v) => v as f64,
            Degeneracy::Log(l) => l.exp(),
        }
    }
}

/// The three sector-mixing coefficients of the single-flip conjugation sum:
/// `a` keeps the sector, `b` lowers j by one, `c` raises j by one.
/// Callers multiply by 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Precomputed per-n tables: binomials, sector multiplicities d_j^n and
/// their tail sums α_j^n, all with log-domain companions.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct IrrepTable {
    n: u32,
    /// C(n, k) as f64, k = 0..=n, symmetrized so binom[k] == binom[n-k] bitwise.
    binom: Vec<f64>,
    /// ln C(n, k).
    ln_binom: Vec<f64>,
    /// Exact binomials, present for n ≤ 60.
    binom_exact: Option<Vec<u128>>,
}

/// Largest n for which multiplicities are reported as exact integers.
pub const EXACT_LIMIT: u32 = 60;

impl IrrepTable {
    pub fn new(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("qubit count n must be >= 1"));
        }
        // Multiplicative recurrence keeps the relative error at O(n eps);
        // a log-factorial route would lose too much for the 1e-12 identity
        // checks at n = 200.
        let mut binom = vec![0.0_f64; n as usize + 1];
        binom[0] = 1.0;
        for k in 1..=(n as usize) / 2 {
            binom[k] = binom[k - 1] * (n as usize - k + 1) as f64 / k as f64;
        }
        for k in 0..=(n as usize) / 2 {
            binom[n as usize - k] = binom[k];
        }
        let ln_binom = binom.iter().map(|&b| b.ln()).collect();
        let binom_exact = (n <= EXACT_LIMIT).then(|| {
            let mut row = vec![0u128; n as usize + 1];
            row[0] = 1;
            for k in 1..=n as usize {
                row[k] = row[k - 1] * (n as usize - k + 1) as u128 / k as u128;
            }
            row
        });
        Ok(IrrepTable {
            n,
            binom,
            ln_binom,
            binom_exact,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// 0 for even n, 1 for odd n (twice the minimal total spin).
    pub fn two_j_min(&self) -> u32 {
        self.n % 2
    }

    pub fn sector_count(&self) -> usize {
        ((self.n - self.two_j_min()) / 2 + 1) as usize
    }

    /// Sector labels `two_j`, ascending.
    pub fn sectors(&self) -> impl Iterator<Item = u32> + '_ {
        (self.two_j_min()..=self.n).step_by(2)
    }

    /// Index of `two_j` in the ascending sector list.
    pub fn sector_index(&self, two_j: u32) -> usize {
        ((two_j - self.two_j_min()) / 2) as usize
    }

    pub fn ln_binom(&self, k: u32) -> f64 {
        self.ln_binom[k as usize]
    }

    pub fn binom(&self, k: u32) -> f64 {
        self.binom[k as usize]
    }

    fn check_sector(&self, two_j: u32, allow_overflow_by_one: bool) -> Result<()> {
        let max = if allow_overflow_by_one {
            self.n + 2
        } else {
            self.n
        };
        if two_j % 2 != self.n % 2 {
            return Err(Error::Domain(format!(
                "sector 2j = {two_j} has the wrong parity for n = {}",
                self.n
            )));
        }
        if two_j < self.two_j_min() || two_j > max {
            return Err(Error::Domain(format!(
                "sector 2j = {two_j} is outside [{}, {max}] for n = {}",
                self.two_j_min(),
                self.n
            )));
        }
        Ok(())
    }

    /// Multiplicity d_j^n of total-spin sector j.
    ///
    /// Evaluated as C(n, q)·(2j+1)/(n-q+1) with q = n/2 - j, which equals
    /// the factorial form without the catastrophic C(n,q) - C(n,q-1)
    /// cancellation.
    pub fn degeneracy(&self, two_j: u32) -> Result<Degeneracy> {
        self.check_sector(two_j, false)?;
        let q = (self.n - two_j) / 2;
        if let Some(exact) = &self.binom_exact {
            let d = exact[q as usize] * (two_j as u128 + 1) / (self.n - q + 1) as u128;
            Ok(Degeneracy::Exact(d))
        } else {
            Ok(Degeneracy::Log(self.ln_degeneracy(two_j)))
        }
    }

    /// Tail sum α_j^n = Σ_{j' ≥ j} d_{j'}^n; telescopes to C(n, n/2 - j).
    /// `two_j = n + 2` is allowed and yields 0.
    pub fn multiplicity_tail(&self, two_j: u32) -> Result<Degeneracy> {
        self.check_sector(two_j, true)?;
        if two_j > self.n {
            return Ok(Degeneracy::Exact(0));
        }
        let q = (self.n - two_j) / 2;
        if let Some(exact) = &self.binom_exact {
            Ok(Degeneracy::Exact(exact[q as usize]))
        } else {
            Ok(Degeneracy::Log(self.ln_binom[q as usize]))
        }
    }

    /// ln d_j^n without sector validation (hot path; caller guarantees range).
    pub(crate) fn ln_degeneracy(&self, two_j: u32) -> f64 {
        let q = (self.n - two_j) / 2;
        self.ln_binom[q as usize] + ((two_j + 1) as f64).ln() - ((self.n - q + 1) as f64).ln()
    }

    /// ln α_j^n; `-inf` above the top sector.
    pub(crate) fn ln_tail(&self, two_j: u32) -> f64 {
        if two_j > self.n {
            f64::NEG_INFINITY
        } else {
            self.ln_binom[((self.n - two_j) / 2) as usize]
        }
    }

    /// Sector-mixing coefficients (a, b, c) for the conjugation sum
    /// Σ_i σ^(i) · σ^(i) acting on an averaged matrix unit of sector j
    /// with row/column projections m, m'.
    ///
    /// By the alignment conventions, b vanishes at j = j_min and c at
    /// j = n/2.
    pub fn mixing_coefficients(
        &self,
        two_j: u32,
        two_m: i32,
        two_mp: i32,
    ) -> Result<MixingCoefficients> {
        self.check_sector(two_j, false)?;
        for tm in [two_m, two_mp] {
            if tm.unsigned_abs() > two_j || (tm - two_j as i32) % 2 != 0 {
                return Err(Error::Domain(format!(
                    "projection 2m = {tm} invalid for sector 2j = {two_j}"
                )));
            }
        }
        let jf = two_j as f64 / 2.0;
        let m = two_m as f64 / 2.0;
        let mp = two_mp as f64 / 2.0;
        let ln_d = self.ln_degeneracy(two_j);

        // α_{j+1} / ((j+1) d_j), formed in log space: α and d separately
        // overflow near n ≈ 170 while the ratio is O(n).
        let tail_up_ratio = if two_j == self.n {
            0.0
        } else {
            (self.ln_tail(two_j + 2) - ln_d).exp() / (jf + 1.0)
        };

        let a = if two_j == 0 {
            // m = m' = 0 forces a = 0; the 1/(2j) form is indeterminate here.
            0.0
        } else {
            m * mp / (2.0 * jf) * (1.0 + (two_j as f64 + 1.0) * tail_up_ratio)
        };

        let b = if two_j == self.two_j_min() {
            0.0
        } else {
            let amp = ((jf + m) * (jf - m)).sqrt() * ((jf + mp) * (jf - mp)).sqrt();
            amp * (self.ln_tail(two_j) - ln_d).exp() / (2.0 * jf)
        };

        let c = if two_j == self.n {
            0.0
        } else {
            let amp = ((jf + m + 1.0) * (jf - m + 1.0)).sqrt()
                * ((jf + mp + 1.0) * (jf - mp + 1.0)).sqrt();
            amp * tail_up_ratio / 2.0
        };

        Ok(MixingCoefficients { a, b, c })
    }
}

/// Dense spin-j operator matrices, basis ordered by ascending m.
#[derive(Debug, Clone)]
pub struct SpinJOperators {
    pub two_j: u32,
    pub jz: DMatrix<f64>,
    pub jplus: DMatrix<f64>,
    pub jminus: DMatrix<f64>,
    pub jy: DMatrix<Complex64>,
}

/// Build the spin-j matrices: Jz = diag(m), ladder entries
/// √(j(j+1) - m(m±1)), Jy = (J+ - J-) / 2i.
pub fn spin_operators(two_j: u32) -> SpinJOperators {
    let dim = two_j as usize + 1;
    let mut jz = DMatrix::zeros(dim, dim);
    let mut jplus = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        let two_m = -(two_j as i64) + 2 * p as i64;
        jz[(p, p)] = two_m as f64 / 2.0;
        if p + 1 < dim {
            // j(j+1) - m(m+1) = (2j(2j+2) - 2m(2m+2)) / 4
            let num = two_j as i64 * (two_j as i64 + 2) - two_m * (two_m + 2);
            jplus[(p + 1, p)] = 0.5 * (num as f64).sqrt();
        }
    }
    let jminus = jplus.transpose();
    let mut jy = DMatrix::zeros(dim, dim);
    let half_over_i = Complex64::new(0.0, -0.5);
    for p in 0..dim {
        for q in 0..dim {
            jy[(p, q)] = half_over_i * (jplus[(p, q)] - jminus[(p, q)]);
        }
    }
    SpinJOperators {
        two_j,
        jz,
        jplus,
        jminus,
        jy,
    }
}
