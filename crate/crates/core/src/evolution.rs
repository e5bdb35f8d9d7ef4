//! Exact propagation of the GHZ state under a global drive, collective
//! dephasing along the tilted axis, and independent per-qubit dephasing.
//!
//! The drive + collective part is diagonal on averaged matrix units of the
//! irrep basis: the unit |j,m⟩⟨j,m'| picks up the factor
//! exp(-2iΩ(m-m')t - 2Γ(t)(m-m')²), with accumulated dephasing Γ(t) = γt
//! (Markovian) or the Lorentzian closed form. Independent dephasing
//! commutes with that part and expands into k-fold flip conjugations whose
//! sector-mixing coefficients A^(k)_{j,m,m'} obey a three-term recurrence
//! in k; [`AkStream`] walks it with two O(n) working vectors.
//!
//! Summation order note: every (m, m') double sum here runs row-major with
//! μ = m + n/2 ascending in the outer loop, so results are bitwise
//! reproducible regardless of thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::algebra::IrrepTable;
use crate::error::{Error, Result};
use crate::logspace::KahanSum;
use crate::overlaps::{Angles, GhzOverlaps};

/// Collective-dephasing noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollectiveModel {
    /// Constant rate γ: accumulated exponent Γ(t) = γ t.
    Markovian { gamma: f64 },
    /// Lorentzian-spectrum (finite correlation time) dephasing:
    /// Γ(t) = γ₀ τ_c (-1 + e^{-t/τ_c} + t/τ_c), interpolating quadratic
    /// (t ≪ τ_c) and linear (t ≫ τ_c) growth.
    Lorentzian { gamma0: f64, tau_c: f64 },
}

/// Drive strength and dephasing rates of the evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    omega: f64,
    collective: CollectiveModel,
    gamma_prime: f64,
}

impl NoiseParams {
    pub fn markovian(omega: f64, gamma: f64, gamma_prime: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::domain("omega must be finite"));
        }
        if !(gamma >= 0.0) || !(gamma_prime >= 0.0) {
            return Err(Error::domain("dephasing rates must be >= 0"));
        }
        Ok(NoiseParams {
            omega,
            collective: CollectiveModel::Markovian { gamma },
            gamma_prime,
        })
    }

    pub fn lorentzian(omega: f64, gamma0: f64, tau_c: f64, gamma_prime: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::domain("omega must be finite"));
        }
        if !(gamma0 >= 0.0) || !(gamma_prime >= 0.0) {
            return Err(Error::domain("dephasing rates must be >= 0"));
        }
        if !(tau_c > 0.0) {
            return Err(Error::domain("correlation time tau_c must be > 0"));
        }
        Ok(NoiseParams {
            omega,
            collective: CollectiveModel::Lorentzian { gamma0, tau_c },
            gamma_prime,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn collective(&self) -> CollectiveModel {
        self.collective
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime
    }

    /// Accumulated collective dephasing exponent Γ(t); nonnegative and
    /// nondecreasing for both models.
    pub fn accumulated_collective(&self, t: f64) -> f64 {
        match self.collective {
            CollectiveModel::Markovian { gamma } => gamma * t,
            CollectiveModel::Lorentzian { gamma0, tau_c } => {
                gamma0 * tau_c * em1px(t / tau_c)
            }
        }
    }

    /// Instantaneous collective rate dΓ/dt; this is what a time-local
    /// master-equation integrator must use.
    pub fn instantaneous_collective(&self, t: f64) -> f64 {
        match self.collective {
            CollectiveModel::Markovian { gamma } => gamma,
            CollectiveModel::Lorentzian { gamma0, tau_c } => -(-t / tau_c).exp_m1() * gamma0,
        }
    }
}

/// -1 + e^{-x} + x, stable for small x where the leading terms cancel.
fn em1px(x: f64) -> f64 {
    if x < 1e-3 {
        // x²/2 - x³/6 + x⁴/24 - x⁵/120; truncation below 1e-15 relative.
        x * x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 - x / 120.0)))
    } else {
        (-x).exp_m1() + x
    }
}

/// Collective weight of the matrix unit with projection difference
/// Δm = m - m' (always an integer): exp(-2iΩΔm t - 2Γ(t)Δm²).
pub fn collective_weight(delta_m: i32, t: f64, params: &NoiseParams) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be >= 0")));
    }
    let d = delta_m as f64;
    let decay = (-2.0 * params.accumulated_collective(t) * d * d).exp();
    Ok(Complex64::from_polar(decay, -2.0 * params.omega() * d * t))
}

/// Streaming evaluation of the sector-mixing coefficients A^(k)_{j,m,m'}
/// for fixed (m, m'), k = 0..n.
///
/// Recurrence (per sector j, with zero padding outside the valid range):
///
/// ```text
/// (k+1) A^(k+1)_j = 4a(j) A^(k)_j + 4b(j+1) A^(k)_{j+1} + 4c(j-1) A^(k)_{j-1}
///                   - (n-k+1) A^(k-1)_j,
/// A^(0)_j = [j = n/2],  A^(-1)_j = 0.
/// ```
pub struct AkStream {
    n: u32,
    two_j_lo: u32,
    ca: Vec<f64>,
    cb: Vec<f64>,
    cc: Vec<f64>,
    prev: Vec<f64>,
    curr: Vec<f64>,
    next: Vec<f64>,
    k_next: u32,
}

impl AkStream {
    pub fn new(table: &IrrepTable, two_m: i32, two_mp: i32) -> Result<Self> {
        let n = table.n();
        for tm in [two_m, two_mp] {
            if tm.unsigned_abs() > n || (tm.rem_euclid(2)) as u32 != n % 2 {
                return Err(Error::Domain(format!(
                    "projection 2m = {tm} invalid for n = {n}"
                )));
            }
        }
        let two_j_lo = two_m.unsigned_abs().max(two_mp.unsigned_abs()).max(n % 2);
        let count = ((n - two_j_lo) / 2 + 1) as usize;
        let mut ca = vec![0.0; count];
        let mut cb = vec![0.0; count];
        let mut cc = vec![0.0; count];
        for s in 0..count {
            let two_j = two_j_lo + 2 * s as u32;
            ca[s] = 4.0 * table.mixing_coefficients(two_j, two_m, two_mp)?.a;
            if s + 1 < count {
                // inflow from the sector above
                cb[s] = 4.0 * table.mixing_coefficients(two_j + 2, two_m, two_mp)?.b;
            }
            if s > 0 {
                // inflow from the sector below
                cc[s] = 4.0 * table.mixing_coefficients(two_j - 2, two_m, two_mp)?.c;
            }
        }
        Ok(AkStream {
            n,
            two_j_lo,
            ca,
            cb,
            cc,
            prev: vec![0.0; count],
            curr: vec![0.0; count],
            next: vec![0.0; count],
            k_next: 0,
        })
    }

    /// Lowest sector label carried by the stream; slice index s maps to
    /// `two_j = two_j_lo + 2 s`, the top sector is the last entry.
    pub fn two_j_lo(&self) -> u32 {
        self.two_j_lo
    }

    pub fn sector_count(&self) -> usize {
        self.curr.len()
    }

    /// Yield (k, A^(k) over sectors), advancing the recurrence by one level.
    pub fn advance(&mut self) -> Option<(u32, &[f64])> {
        if self.k_next > self.n {
            return None;
        }
        if self.k_next == 0 {
            *self.curr.last_mut().expect("at least one sector") = 1.0;
        } else {
            let k = (self.k_next - 1) as f64;
            let count = self.curr.len();
            for s in 0..count {
                let above = if s + 1 < count { self.curr[s + 1] } else { 0.0 };
                let below = if s > 0 { self.curr[s - 1] } else { 0.0 };
                self.next[s] = (self.ca[s] * self.curr[s]
                    + self.cb[s] * above
                    + self.cc[s] * below
                    - (self.n as f64 - k + 1.0) * self.prev[s])
                    / (k + 1.0);
            }
            std::mem::swap(&mut self.prev, &mut self.curr);
            std::mem::swap(&mut self.curr, &mut self.next);
        }
        self.k_next += 1;
        Some((self.k_next - 1, &self.curr))
    }
}

/// Independent-dephasing mixture weights α(t), β(t) of the identity /
/// flipped branches per qubit.
fn alpha_beta(gamma_prime: f64, t: f64) -> (f64, f64) {
    let e = (-2.0 * gamma_prime * t).exp();
    ((1.0 + e) / 2.0, (1.0 - e) / 2.0)
}

/// Branch weights α^{n-k} β^k for k = 0..=n.
fn branch_weights(n: u32, gamma_prime: f64, t: f64) -> Vec<f64> {
    let (alpha, beta) = alpha_beta(gamma_prime, t);
    let mut u = Vec::with_capacity(n as usize + 1);
    let mut w = alpha.powi(n as i32);
    let ratio = beta / alpha; // alpha >= 1/2, always safe
    for _ in 0..=n {
        u.push(w);
        w *= ratio;
    }
    u
}

/// The evolved density operator as one (2j+1)×(2j+1) coefficient matrix
/// per total-spin sector, in the tilted-axis basis.
///
/// Coefficients multiply *averaged* matrix units (each multiplicity copy
/// carries weight 1/d_j), so every unit has unit trace and the d_j factors
/// stay implicit: trace(ρ) = Σ_j tr c_j and trace(ρ²) = Σ_j tr(c_j²)/d_j.
#[derive(Debug, Clone)]
pub struct BlockState {
    n: u32,
    t: f64,
    two_j_min: u32,
    blocks: Vec<DMatrix<Complex64>>,
}

impl BlockState {
    fn zeros(table: &IrrepTable, t: f64) -> Self {
        let blocks = table
            .sectors()
            .map(|two_j| DMatrix::zeros(two_j as usize + 1, two_j as usize + 1))
            .collect();
        BlockState {
            n: table.n(),
            t,
            two_j_min: table.two_j_min(),
            blocks,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Sector labels `two_j`, ascending, mirroring [`IrrepTable::sectors`].
    pub fn sectors(&self) -> impl Iterator<Item = u32> + '_ {
        (self.two_j_min..=self.n).step_by(2)
    }

    pub fn block(&self, two_j: u32) -> &DMatrix<Complex64> {
        &self.blocks[((two_j - self.two_j_min) / 2) as usize]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn trace(&self) -> Complex64 {
        self.blocks
            .iter()
            .map(|b| b.diagonal().sum())
            .sum()
    }

    /// Probability weight carried by one sector: Re tr c_j.
    pub fn sector_weight(&self, two_j: u32) -> f64 {
        self.block(two_j).diagonal().sum().re
    }

    /// trace(ρ²) = Σ_j tr(c_j²) / d_j.
    pub fn purity(&self, table: &IrrepTable) -> f64 {
        let mut total = 0.0;
        for (s, two_j) in self.sectors().enumerate() {
            let fro: f64 = self.blocks[s].iter().map(|z| z.norm_sqr()).sum();
            total += fro * (-table.ln_degeneracy(two_j)).exp();
        }
        total
    }

    /// max |c - c†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for b in &self.blocks {
            for p in 0..b.nrows() {
                for q in p..b.ncols() {
                    worst = worst.max((b[(p, q)] - b[(q, p)].conj()).norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue over all sector blocks (Hermitian part).
    pub fn min_block_eigenvalue(&self) -> f64 {
        let mut min = f64::INFINITY;
        for b in &self.blocks {
            let herm = (b + b.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = herm.symmetric_eigenvalues();
            min = min.min(eig.iter().fold(f64::INFINITY, |m, &l| m.min(l)));
        }
        min
    }

    /// Collective moments along the tilted axis in Pauli-sum units
    /// (eigenvalues 2m): (⟨L⟩, ⟨L²⟩).
    pub fn collective_moments(&self) -> (f64, f64) {
        let mut first = 0.0;
        let mut second = 0.0;
        for (s, two_j) in self.sectors().enumerate() {
            let b = &self.blocks[s];
            for p in 0..b.nrows() {
                let two_m = -(two_j as f64) + 2.0 * p as f64;
                let w = b[(p, p)].re;
                first += two_m * w;
                second += two_m * two_m * w;
            }
        }
        (first, second)
    }

    /// ⟨GHZ|ρ|GHZ⟩ evaluated from the blocks; only the top sector
    /// contributes.
    pub fn overlap_with_ghz(&self, overlaps: &GhzOverlaps) -> Complex64 {
        let top = self.blocks.last().expect("top sector");
        let n = self.n as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in 0..=n {
            for mup in 0..=n {
                acc += overlaps.v(mu).conj() * top[(mu, mup)] * overlaps.v(mup);
            }
        }
        acc
    }
}

/// Evolve the GHZ state for time t; exact for all three noise channels.
pub fn evolve(n: u32, angles: Angles, params: &NoiseParams, t: f64) -> Result<BlockState> {
    let overlaps = GhzOverlaps::new(n, angles)?;
    let table = IrrepTable::new(n)?;
    propagate(&table, &overlaps, params, t, false).map(|(state, _)| state)
}

/// Evolve and simultaneously push the θ-derivative of the initial
/// coefficients through the (θ-independent) linear evolution map.
pub fn evolve_with_derivative(
    table: &IrrepTable,
    overlaps: &GhzOverlaps,
    params: &NoiseParams,
    t: f64,
) -> Result<(BlockState, BlockState)> {
    propagate(table, overlaps, params, t, true).map(|(s, d)| (s, d.expect("derivative requested")))
}

fn propagate(
    table: &IrrepTable,
    overlaps: &GhzOverlaps,
    params: &NoiseParams,
    t: f64,
    with_derivative: bool,
) -> Result<(BlockState, Option<BlockState>)> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be >= 0")));
    }
    let n = table.n();
    let mut state = BlockState::zeros(table, t);
    let mut deriv = with_derivative.then(|| BlockState::zeros(table, t));

    if params.gamma_prime() == 0.0 {
        // Identity branch only: the top sector carries everything.
        let top = state.blocks.last_mut().expect("top sector");
        let dtop = deriv.as_mut().map(|d| d.blocks.last_mut().expect("top sector"));
        let mut dtop = dtop;
        for mu in 0..=n as usize {
            for mup in 0..=n as usize {
                let w = collective_weight(mu as i32 - mup as i32, t, params)?;
                top[(mu, mup)] = overlaps.rho(mu, mup) * w;
                if let Some(d) = dtop.as_deref_mut() {
                    d[(mu, mup)] = overlaps.drho(mu, mup) * w;
                }
            }
        }
        return Ok((state, deriv));
    }

    let u = branch_weights(n, params.gamma_prime(), t);
    let mut mix = vec![0.0_f64; 0];
    for mu in 0..=n as usize {
        let two_m = 2 * mu as i32 - n as i32;
        for mup in 0..=n as usize {
            let two_mp = 2 * mup as i32 - n as i32;
            let mut stream = AkStream::new(table, two_m, two_mp)?;
            mix.clear();
            mix.resize(stream.sector_count(), 0.0);
            while let Some((k, row)) = stream.advance() {
                let uk = u[k as usize];
                for (acc, &a) in mix.iter_mut().zip(row) {
                    *acc += uk * a;
                }
            }
            let w = collective_weight((two_m - two_mp) / 2, t, params)?;
            let rho_w = overlaps.rho(mu, mup) * w;
            let drho_w = with_derivative.then(|| overlaps.drho(mu, mup) * w);
            let two_j_lo = stream.two_j_lo();
            for (s, &sum) in mix.iter().enumerate() {
                let two_j = two_j_lo + 2 * s as u32;
                let block_idx = table.sector_index(two_j);
                let row = ((two_m + two_j as i32) / 2) as usize;
                let col = ((two_mp + two_j as i32) / 2) as usize;
                state.blocks[block_idx][(row, col)] = rho_w * sum;
                if let (Some(d), Some(dr)) = (deriv.as_mut(), drho_w) {
                    d.blocks[block_idx][(row, col)] = dr * sum;
                }
            }
        }
    }
    Ok((state, deriv))
}

/// A^(k)_{n/2,m,m'} for all (m, m', k), the only coefficients the survival
/// probability needs. θ- and t-independent, so one kernel per n serves
/// every angle, noise model, and evolution time.
#[derive(Debug, Clone)]
pub struct TopSectorKernel {
    n: u32,
    /// Flattened (μ, μ', k), k fastest.
    data: Vec<f64>,
}

impl TopSectorKernel {
    /// Process-wide kernel cache; experiment sweeps revisit the same n
    /// across curves and angles, and a kernel is ~(n+1)³ floats.
    pub fn shared(n: u32) -> Result<Arc<Self>> {
        use std::collections::HashMap;
        use std::sync::{Mutex, OnceLock};
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<TopSectorKernel>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(k) = cache.lock().unwrap().get(&n) {
            return Ok(k.clone());
        }
        let kernel = Arc::new(TopSectorKernel::new(n)?);
        cache.lock().unwrap().insert(n, kernel.clone());
        Ok(kernel)
    }

    pub fn new(n: u32) -> Result<Self> {
        let table = IrrepTable::new(n)?;
        let len = n as usize + 1;
        let mut data = vec![0.0_f64; len * len * len];
        let chunks: Vec<(usize, &mut [f64])> =
            data.chunks_mut(len * len).enumerate().collect();
        chunks
            .into_par_iter()
            .try_for_each(|(mu, row)| -> Result<()> {
                let two_m = 2 * mu as i32 - n as i32;
                for mup in 0..len {
                    let two_mp = 2 * mup as i32 - n as i32;
                    let mut stream = AkStream::new(&table, two_m, two_mp)?;
                    while let Some((k, values)) = stream.advance() {
                        row[mup * len + k as usize] =
                            *values.last().expect("top sector present");
                    }
                }
                Ok(())
            })?;
        Ok(TopSectorKernel { n, data })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn row(&self, mu: usize, mup: usize) -> &[f64] {
        let len = self.n as usize + 1;
        let base = (mu * len + mup) * len;
        &self.data[base..base + len]
    }
}

/// Survival-probability evaluator for one (n, angles, noise)
/// configuration, reusable across evolution times: the expensive
/// t-independent recurrence pass is done once (and only when γ' > 0).
pub struct SurvivalSolver {
    overlaps: GhzOverlaps,
    params: NoiseParams,
    kernel: Option<Arc<TopSectorKernel>>,
}

impl SurvivalSolver {
    pub fn new(n: u32, angles: Angles, params: NoiseParams) -> Result<Self> {
        let kernel = if params.gamma_prime() > 0.0 {
            Some(TopSectorKernel::shared(n)?)
        } else {
            None
        };
        Self::assemble(n, angles, params, kernel)
    }

    /// Reuse a prebuilt kernel (it only depends on n).
    pub fn with_kernel(
        kernel: Arc<TopSectorKernel>,
        angles: Angles,
        params: NoiseParams,
    ) -> Result<Self> {
        let n = kernel.n();
        Self::assemble(n, angles, params, Some(kernel))
    }

    fn assemble(
        n: u32,
        angles: Angles,
        params: NoiseParams,
        kernel: Option<Arc<TopSectorKernel>>,
    ) -> Result<Self> {
        if let Some(k) = &kernel {
            if k.n() != n {
                return Err(Error::Domain(format!(
                    "kernel built for n = {} used with n = {n}",
                    k.n()
                )));
            }
        }
        Ok(SurvivalSolver {
            overlaps: GhzOverlaps::new(n, angles)?,
            params,
            kernel,
        })
    }

    pub fn n(&self) -> u32 {
        self.overlaps.n()
    }

    pub fn overlaps(&self) -> &GhzOverlaps {
        &self.overlaps
    }

    pub fn probability(&self, t: f64) -> Result<f64> {
        self.eval(t, false).map(|(p, _)| p)
    }

    /// (P, dP/dθ) from one pass; the derivative reuses the same kernel
    /// contraction with the θ-differentiated weights.
    pub fn probability_and_derivative(&self, t: f64) -> Result<(f64, f64)> {
        self.eval(t, true).map(|(p, d)| (p, d.expect("derivative requested")))
    }

    fn eval(&self, t: f64, with_derivative: bool) -> Result<(f64, Option<f64>)> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time t = {t} must be >= 0")));
        }
        let n = self.n() as usize;
        let b = self.overlaps.b();
        let db = self.overlaps.db();

        // Collective weights by Δm = μ - μ' ∈ -n..=n.
        let mut weights = Vec::with_capacity(2 * n + 1);
        for delta in -(n as i32)..=n as i32 {
            weights.push(collective_weight(delta, t, &self.params)?);
        }

        let u = self
            .kernel
            .is_some()
            .then(|| branch_weights(self.n(), self.params.gamma_prime(), t));

        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for mu in 0..=n {
            for mup in 0..=n {
                let s = match (&self.kernel, &u) {
                    (Some(kernel), Some(u)) => {
                        let row = kernel.row(mu, mup);
                        let mut acc = KahanSum::default();
                        for (uk, ak) in u.iter().zip(row) {
                            acc.add(uk * ak);
                        }
                        acc.value()
                    }
                    _ => 1.0,
                };
                let w = weights[mu + n - mup] * s;
                p += w * (b[mu] * b[mup]);
                if with_derivative {
                    dp += w * (db[mu] * b[mup] + b[mu] * db[mup]);
                }
            }
        }

        if p.im.abs() > 1e-8 {
            return Err(Error::InternalConsistency(format!(
                "survival probability has imaginary part {:e}",
                p.im
            )));
        }
        if p.re < -1e-8 || p.re > 1.0 + 1e-8 {
            return Err(Error::InternalConsistency(format!(
                "survival probability {} outside [0, 1] beyond tolerance",
                p.re
            )));
        }
        let p_clamped = p.re.clamp(0.0, 1.0);
        Ok((p_clamped, with_derivative.then_some(dp.re)))
    }
}

/// One-shot convenience wrapper around [`SurvivalSolver`].
pub fn survival_probability(n: u32, angles: Angles, params: &NoiseParams, t: f64) -> Result<f64> {
    SurvivalSolver::new(n, angles, *params)?.probability(t)
}

/// First-order short-time expansion of the survival probability:
/// P ≈ 1 - γ_eff t (n² cos²θ + n (1 - cos²θ)) - γ' t n.
///
/// Valid for n ≥ 3 (below that the dropped GHZ cross terms contribute)
/// and for n Ω t, n² γ t, n γ' t ≪ 1; the error is O(t²).
pub fn short_time_probability(n: u32, theta: f64, gamma_eff: f64, gamma_prime: f64, t: f64) -> f64 {
    let nf = n as f64;
    let c2 = theta.cos().powi(2);
    1.0 - gamma_eff * t * (nf * nf * c2 + nf * (1.0 - c2)) - gamma_prime * t * nf
}
