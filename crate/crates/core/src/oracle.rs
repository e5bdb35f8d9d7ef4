//! Dense brute-force reference solver on the full 2^n Hilbert space.
//!
//! Ground truth for every closed form in this crate: the master equation
//! is integrated either by exponentiating the vectorized generator
//! (constant-rate case) or by an adaptive Dormand–Prince step integrator
//! (time-dependent collective rate, and as an independent cross-check of
//! the exponential). Comparisons against the block solver go through
//! basis-free observables: survival probability, purity, collective
//! moments, and the quantum Fisher information.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{CollectiveModel, NoiseParams};
use crate::overlaps::Angles;

/// Capacity cap: the vectorized generator is 4^n × 4^n.
pub const DENSE_MAX_N: u32 = 5;
/// The finite-difference QFI needs a better-conditioned eigenproblem.
pub const DENSE_QFI_MAX_N: u32 = 4;

/// Full 2^n × 2^n density matrix at time t.
#[derive(Debug, Clone)]
pub struct DenseState {
    pub n: u32,
    pub rho: DMatrix<Complex64>,
    pub t: f64,
}

impl DenseState {
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.diagonal().sum()
    }
}

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij != c(0.0, 0.0) {
                for p in 0..br {
                    for q in 0..bc {
                        out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                    }
                }
            }
        }
    }
    out
}

fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Pauli matrix along the tilted axis in Alice's computational basis.
pub(crate) fn sigma_z_prime(angles: Angles) -> CMat {
    let (theta, phi) = (angles.theta(), angles.phi());
    let (st, ct) = (theta.sin(), theta.cos());
    CMat::from_row_slice(
        2,
        2,
        &[
            c(ct, 0.0),
            Complex64::from_polar(st, -phi),
            Complex64::from_polar(st, phi),
            c(-ct, 0.0),
        ],
    )
}

/// Single-qubit eigenvectors of σ_z' (columns: up', down').
fn tilted_basis(angles: Angles) -> (CVec, CVec) {
    let half = angles.theta() / 2.0;
    let phase = Complex64::from_polar(1.0, angles.phi());
    let up = CVec::from_vec(vec![c(half.cos(), 0.0), phase * half.sin()]);
    let dn = CVec::from_vec(vec![c(-half.sin(), 0.0), phase * half.cos()]);
    (up, dn)
}

/// op acting on qubit `i` of `n`, identity elsewhere.
pub(crate) fn op_on_qubit(op: &CMat, i: u32, n: u32) -> CMat {
    let mut out = identity(1);
    for q in 0..n {
        let factor = if q == i { op.clone() } else { identity(2) };
        out = kron(&out, &factor);
    }
    out
}

/// Collective operator L = Σ_i σ_z'^(i).
pub(crate) fn collective_op(angles: Angles, n: u32) -> CMat {
    let s = sigma_z_prime(angles);
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for i in 0..n {
        out += op_on_qubit(&s, i, n);
    }
    out
}

/// |GHZ⟩ = (|0...0⟩ + |1...1⟩)/√2.
pub fn ghz_vector(n: u32) -> CVec {
    let dim = 1usize << n;
    let mut v = CVec::zeros(dim);
    let amp = c(1.0 / 2.0_f64.sqrt(), 0.0);
    v[0] = amp;
    v[dim - 1] = amp;
    v
}

/// Symmetric (top-sector) Dicke state along the tilted axis with μ
/// up-spins, built by explicit symmetrization over all bit masks.
pub fn dicke_state_tilted(n: u32, mu: u32, angles: Angles) -> CVec {
    let (up, dn) = tilted_basis(angles);
    let dim = 1usize << n;
    let mut out = CVec::zeros(dim);
    let mut count = 0u64;
    for mask in 0..(1u64 << n) {
        if mask.count_ones() != mu {
            continue;
        }
        count += 1;
        // product vector for this assignment
        let mut prod = CVec::from_vec(vec![c(1.0, 0.0)]);
        for q in 0..n {
            let factor = if (mask >> q) & 1 == 1 { &up } else { &dn };
            let mut next = CVec::zeros(prod.len() * 2);
            for (idx, amp) in prod.iter().enumerate() {
                next[2 * idx] += amp * factor[0];
                next[2 * idx + 1] += amp * factor[1];
            }
            prod = next;
        }
        out += prod;
    }
    out / c((count as f64).sqrt(), 0.0)
}

struct DenseOps {
    hamiltonian_part: CMat, // -i Ω [L, ·] pieces kept as L itself
    l_op: CMat,
    l_sq: CMat,
    singles: Vec<CMat>,
}

fn build_ops(n: u32, angles: Angles) -> DenseOps {
    let l_op = collective_op(angles, n);
    let l_sq = &l_op * &l_op;
    let s = sigma_z_prime(angles);
    let singles = (0..n).map(|i| op_on_qubit(&s, i, n)).collect();
    DenseOps {
        hamiltonian_part: l_op.clone(),
        l_op,
        l_sq,
        singles,
    }
}

/// dρ/dt with the instantaneous collective rate γ_c(t).
fn master_rhs(ops: &DenseOps, params: &NoiseParams, t: f64, rho: &CMat) -> CMat {
    let omega = params.omega();
    let gamma_c = params.instantaneous_collective(t);
    let gp = params.gamma_prime();
    let mut out = CMat::zeros(rho.nrows(), rho.ncols());
    if omega != 0.0 {
        let comm = &ops.hamiltonian_part * rho - rho * &ops.hamiltonian_part;
        out += comm * c(0.0, -omega);
    }
    if gamma_c != 0.0 {
        let sandwich = &ops.l_op * rho * &ops.l_op;
        let anti = &ops.l_sq * rho + rho * &ops.l_sq;
        out += (sandwich - anti * c(0.5, 0.0)) * c(gamma_c, 0.0);
    }
    if gp != 0.0 {
        let mut dephase = CMat::zeros(rho.nrows(), rho.ncols());
        for s in &ops.singles {
            dephase += s * rho * s;
        }
        dephase -= rho.scale(ops.singles.len() as f64);
        out += dephase * c(gp, 0.0);
    }
    out
}

/// Vectorized generator (column-major vec): vec(AXB) = (Bᵀ ⊗ A) vec X.
fn superoperator(ops: &DenseOps, params: &NoiseParams) -> CMat {
    let dim = ops.l_op.nrows();
    let id = identity(dim);
    let omega = params.omega();
    let gamma = match params.collective() {
        CollectiveModel::Markovian { gamma } => gamma,
        CollectiveModel::Lorentzian { .. } => {
            unreachable!("exponential path is Markovian-only")
        }
    };
    let gp = params.gamma_prime();
    let mut sup = CMat::zeros(dim * dim, dim * dim);
    let lt = ops.l_op.transpose();
    if omega != 0.0 {
        let h = kron(&id, &ops.l_op) - kron(&lt, &id);
        sup += h * c(0.0, -omega);
    }
    if gamma != 0.0 {
        let l2t = ops.l_sq.transpose();
        let d = kron(&lt, &ops.l_op)
            - (kron(&id, &ops.l_sq) + kron(&l2t, &id)) * c(0.5, 0.0);
        sup += d * c(gamma, 0.0);
    }
    if gp != 0.0 {
        let mut d = CMat::zeros(dim * dim, dim * dim);
        for s in &ops.singles {
            d += kron(&s.transpose(), s);
        }
        d -= identity(dim * dim).scale(ops.singles.len() as f64);
        sup += d * c(gp, 0.0);
    }
    sup
}

/// Matrix exponential by Padé-13 scaling and squaring.
pub(crate) fn expm(a: &CMat) -> CMat {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let dim = a.nrows();
    // 1-norm (max column sum)
    let norm = (0..dim)
        .map(|j| (0..dim).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(0.5_f64.powi(s));
    let id = identity(dim);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (&a6.scale(B[13]) + &a4.scale(B[11]) + &a2.scale(B[9]))
        + &a6.scale(B[7])
        + &a4.scale(B[5])
        + &a2.scale(B[3])
        + &id.scale(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6.scale(B[12]) + &a4.scale(B[10]) + &a2.scale(B[8]))
        + &a6.scale(B[6])
        + &a4.scale(B[4])
        + &a2.scale(B[2])
        + &id.scale(B[0]);
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lhs
        .lu()
        .solve(&rhs)
        .expect("Padé denominator is well conditioned");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Adaptive Dormand–Prince RK45 on the matrix master equation.
fn integrate_rk(ops: &DenseOps, params: &NoiseParams, rho0: CMat, t_end: f64) -> CMat {
    const RTOL: f64 = 1e-12;
    const ATOL: f64 = 1e-12;
    if t_end == 0.0 {
        return rho0;
    }
    let mut t = 0.0;
    let mut y = rho0;
    let mut dt = (t_end / 64.0).min(1e-2 / (1.0 + params_scale(params)));
    let mut k1 = master_rhs(ops, params, t, &y);
    loop {
        dt = dt.min(t_end - t);
        let k2 = master_rhs(ops, params, t + dt / 5.0, &(&y + k1.scale(dt / 5.0)));
        let k3 = master_rhs(
            ops,
            params,
            t + 3.0 * dt / 10.0,
            &(&y + k1.scale(3.0 * dt / 40.0) + k2.scale(9.0 * dt / 40.0)),
        );
        let k4 = master_rhs(
            ops,
            params,
            t + 4.0 * dt / 5.0,
            &(&y + k1.scale(44.0 * dt / 45.0) - k2.scale(56.0 * dt / 15.0)
                + k3.scale(32.0 * dt / 9.0)),
        );
        let k5 = master_rhs(
            ops,
            params,
            t + 8.0 * dt / 9.0,
            &(&y + k1.scale(19372.0 * dt / 6561.0) - k2.scale(25360.0 * dt / 2187.0)
                + k3.scale(64448.0 * dt / 6561.0)
                - k4.scale(212.0 * dt / 729.0)),
        );
        let k6 = master_rhs(
            ops,
            params,
            t + dt,
            &(&y + k1.scale(9017.0 * dt / 3168.0) - k2.scale(355.0 * dt / 33.0)
                + k3.scale(46732.0 * dt / 5247.0)
                + k4.scale(49.0 * dt / 176.0)
                - k5.scale(5103.0 * dt / 18656.0)),
        );
        let y5 = &y
            + k1.scale(35.0 * dt / 384.0)
            + k3.scale(500.0 * dt / 1113.0)
            + k4.scale(125.0 * dt / 192.0)
            - k5.scale(2187.0 * dt / 6784.0)
            + k6.scale(11.0 * dt / 84.0);
        let k7 = master_rhs(ops, params, t + dt, &y5);
        let y4 = &y
            + k1.scale(5179.0 * dt / 57600.0)
            + k3.scale(7571.0 * dt / 16695.0)
            + k4.scale(393.0 * dt / 640.0)
            - k5.scale(92097.0 * dt / 339200.0)
            + k6.scale(187.0 * dt / 2100.0)
            + k7.scale(dt / 40.0);
        let mut err = 0.0_f64;
        for (a, b) in y5.iter().zip(y4.iter()) {
            let scale = ATOL + RTOL * a.norm().max(1.0);
            err = err.max((a - b).norm() / scale);
        }
        if err <= 1.0 {
            t += dt;
            y = y5;
            k1 = k7; // FSAL
            if t >= t_end {
                return y;
            }
        } else {
            k1 = master_rhs(ops, params, t, &y);
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        dt = (dt * factor).max(1e-15 * t_end);
    }
}

fn params_scale(params: &NoiseParams) -> f64 {
    let coll = match params.collective() {
        CollectiveModel::Markovian { gamma } => gamma,
        CollectiveModel::Lorentzian { gamma0, .. } => gamma0,
    };
    params.omega().abs() + coll + params.gamma_prime()
}

fn check_capacity(n: u32, max: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::domain("qubit count n must be >= 1"));
    }
    if n > max {
        return Err(Error::Capacity { n, max });
    }
    Ok(())
}

/// Exact dense evolution of the GHZ state: exponentiated vectorized
/// generator for constant rates, adaptive step integration for the
/// Lorentzian model.
pub fn dense_evolve(n: u32, angles: Angles, params: &NoiseParams, t: f64) -> Result<DenseState> {
    check_capacity(n, DENSE_MAX_N)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be >= 0")));
    }
    let ops = build_ops(n, angles);
    let ghz = ghz_vector(n);
    let rho0 = &ghz * ghz.adjoint();
    let rho = match params.collective() {
        CollectiveModel::Markovian { .. } => {
            let sup = superoperator(&ops, params);
            let prop = expm(&sup.scale(t));
            let dim = rho0.nrows();
            let vec0 = CVec::from_iterator(dim * dim, rho0.iter().cloned());
            let vec_t = &prop * vec0;
            CMat::from_iterator(dim, dim, vec_t.iter().cloned())
        }
        CollectiveModel::Lorentzian { .. } => integrate_rk(&ops, params, rho0, t),
    };
    Ok(DenseState { n, rho, t })
}

/// Step-integrated dense evolution (both noise models); the independent
/// second method behind the exponential path.
pub fn dense_evolve_rk(n: u32, angles: Angles, params: &NoiseParams, t: f64) -> Result<DenseState> {
    check_capacity(n, DENSE_MAX_N)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be >= 0")));
    }
    let ops = build_ops(n, angles);
    let ghz = ghz_vector(n);
    let rho0 = &ghz * ghz.adjoint();
    let rho = integrate_rk(&ops, params, rho0, t);
    Ok(DenseState { n, rho, t })
}

/// Survival probability ⟨GHZ|ρ|GHZ⟩.
pub fn dense_survival(state: &DenseState) -> Result<f64> {
    let ghz = ghz_vector(state.n);
    let p = (ghz.adjoint() * &state.rho * &ghz)[(0, 0)];
    if p.im.abs() > 1e-10 || !(-1e-10..=1.0 + 1e-10).contains(&p.re) {
        return Err(Error::InternalConsistency(format!(
            "dense survival probability {p} is not a probability"
        )));
    }
    Ok(p.re.clamp(0.0, 1.0))
}

/// (purity, ⟨L⟩, ⟨L²⟩) with L = Σ_i σ_z'^(i) (Pauli-sum units).
pub fn dense_observables(state: &DenseState, angles: Angles) -> (f64, f64, f64) {
    let l = collective_op(angles, state.n);
    let l_rho = &l * &state.rho;
    let first = l_rho.diagonal().sum().re;
    let second = (&l * &l_rho).diagonal().sum().re;
    (state.purity(), first, second)
}

/// Quantum Fisher information from finite differences of the dense state:
/// ∂θρ by central differences with a Richardson step check, then the
/// eigenbasis formula Σ 2|⟨k|∂θρ|l⟩|²/(λ_k + λ_l).
pub fn dense_qfi(n: u32, theta: f64, params: &NoiseParams, t: f64) -> Result<f64> {
    check_capacity(n, DENSE_QFI_MAX_N)?;
    let h = 1e-5;
    let drho_h = fd_drho(n, theta, params, t, h)?;
    let drho_h2 = fd_drho(n, theta, params, t, h / 2.0)?;
    let diff: f64 = drho_h
        .iter()
        .zip(drho_h2.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale: f64 = drho_h2.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 1e-12 && diff / scale > 1e-5 {
        return Err(Error::StepSize(format!(
            "Richardson check failed: finite-difference estimates differ by {:.2e} relative",
            diff / scale
        )));
    }
    // Richardson-extrapolated derivative, O(h⁴).
    let drho = (drho_h2.scale(4.0) - drho_h).scale(1.0 / 3.0);

    let center = dense_evolve(n, Angles::new(theta, 0.0)?, params, t)?;
    let eig = nalgebra::linalg::SymmetricEigen::new(center.rho);
    let mut total = 0.0;
    let d_eig = eig.eigenvectors.adjoint() * &drho * &eig.eigenvectors;
    for k in 0..eig.eigenvalues.len() {
        for l in 0..eig.eigenvalues.len() {
            let denom = eig.eigenvalues[k].max(0.0) + eig.eigenvalues[l].max(0.0);
            if denom > 1e-12 {
                total += 2.0 * d_eig[(k, l)].norm_sqr() / denom;
            }
        }
    }
    Ok(total)
}

fn fd_drho(n: u32, theta: f64, params: &NoiseParams, t: f64, h: f64) -> Result<CMat> {
    let plus = dense_evolve(n, Angles::new(theta + h, 0.0)?, params, t)?;
    let minus = dense_evolve(n, Angles::new(theta - h, 0.0)?, params, t)?;
    Ok((plus.rho - minus.rho).scale(1.0 / (2.0 * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn angles(theta: f64, phi: f64) -> Angles {
        Angles::new(theta, phi).unwrap()
    }

    #[test]
    fn expm_identities() {
        let z = CMat::zeros(4, 4);
        let e = expm(&z);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(e[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(e[(i, j)].im, 0.0, epsilon = 1e-14);
            }
        }
        let d = CMat::from_diagonal(&CVec::from_vec(vec![
            c(0.3, 1.0),
            c(-2.0, 0.5),
            c(8.0, -3.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            let want = d[(i, i)].exp();
            assert_relative_eq!(e[(i, i)].re, want.re, max_relative = 1e-12);
            assert_relative_eq!(e[(i, i)].im, want.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn initial_state_is_ghz_projector() {
        let p = NoiseParams::markovian(0.5, 1.0, 0.7).unwrap();
        let s = dense_evolve(3, angles(0.8, 0.1), &p, 0.0).unwrap();
        assert_relative_eq!(s.purity(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(dense_survival(&s).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_bloch_solution() {
        let (gamma, gp) = (0.6, 0.3);
        let p = NoiseParams::markovian(0.0, gamma, gp).unwrap();
        for theta in [0.2, 1.0, 2.4] {
            for t in [0.1, 0.9] {
                let s = dense_evolve(1, angles(theta, 0.0), &p, t).unwrap();
                let got = dense_survival(&s).unwrap();
                let want = (1.0
                    + theta.sin().powi(2)
                    + (-2.0 * (gamma + gp) * t).exp() * theta.cos().powi(2))
                    / 2.0;
                assert_relative_eq!(got, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn aligned_axis_coherence_decay() {
        // θ = 0, n = 3, Ω = 0: the GHZ corner coherence decays as
        // e^{-2γt·9 - 2γ't·3}.
        let (gamma, gp, t) = (0.4, 0.25, 0.3);
        let p = NoiseParams::markovian(0.0, gamma, gp).unwrap();
        let s = dense_evolve(3, angles(0.0, 0.0), &p, t).unwrap();
        let corner = s.rho[(0, 7)].norm();
        let want = 0.5 * (-2.0 * gamma * t * 9.0 - 2.0 * gp * t * 3.0).exp();
        assert_relative_eq!(corner, want, max_relative = 1e-9);
    }

    #[test]
    fn exponential_and_stepper_agree() {
        let p = NoiseParams::markovian(0.8, 0.5, 0.6).unwrap();
        let a = angles(1.1, 0.4);
        let via_exp = dense_evolve(3, a, &p, 0.7).unwrap();
        let via_rk = dense_evolve_rk(3, a, &p, 0.7).unwrap();
        let max_dev = via_exp
            .rho
            .iter()
            .zip(via_rk.rho.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0_f64, f64::max);
        assert!(max_dev < 1e-9, "methods disagree by {max_dev:e}");
    }

    #[test]
    fn dicke_states_are_orthonormal_eigenvectors() {
        let n = 3u32;
        let a = angles(0.9, 0.5);
        let l = collective_op(a, n);
        for mu in 0..=n {
            let d = dicke_state_tilted(n, mu, a);
            assert_relative_eq!(d.norm(), 1.0, epsilon = 1e-12);
            let two_m = 2.0 * mu as f64 - n as f64;
            let ld = &l * &d;
            for (x, y) in ld.iter().zip(d.iter()) {
                assert_abs_diff_eq!(x.re, two_m * y.re, epsilon = 1e-12);
                assert_abs_diff_eq!(x.im, two_m * y.im, epsilon = 1e-12);
            }
            for mu2 in 0..mu {
                let d2 = dicke_state_tilted(n, mu2, a);
                assert_abs_diff_eq!((d2.adjoint() * &d)[(0, 0)].norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ghz_moments_at_zero_time() {
        // ⟨L²⟩ = n² cos²θ + n (1 - cos²θ) in Pauli-sum units for n ≥ 3.
        let (n, theta) = (4u32, 0.8);
        let p = NoiseParams::markovian(0.0, 0.0, 0.0).unwrap();
        let s = dense_evolve(n, angles(theta, 0.0), &p, 0.0).unwrap();
        let (purity, first, second) = dense_observables(&s, angles(theta, 0.0));
        assert_relative_eq!(purity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first, 0.0, epsilon = 1e-12);
        let nf = n as f64;
        let want = nf * nf * theta.cos().powi(2) + nf * (1.0 - theta.cos().powi(2));
        assert_relative_eq!(second, want, max_relative = 1e-11);
    }

    #[test]
    fn qfi_zero_at_zero_time() {
        let p = NoiseParams::markovian(1.0, 0.3, 0.2).unwrap();
        let f = dense_qfi(2, 0.9, &p, 0.0).unwrap();
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn qfi_pure_state_formula_agrees() {
        // γ = γ' = 0: F_Q = 4(⟨∂ψ|∂ψ⟩ - |⟨ψ|∂ψ⟩|²) from the driven pure
        // state, differentiated by central differences.
        let n = 3u32;
        let (omega, t, theta) = (1.0, 0.4, 0.9);
        let p = NoiseParams::markovian(omega, 0.0, 0.0).unwrap();
        let psi = |th: f64| -> CVec {
            let l = collective_op(angles(th, 0.0), n);
            let u = expm(&l.scale(1.0).map(|z| z * c(0.0, -omega * t)));
            &u * ghz_vector(n)
        };
        let h = 1e-6;
        let dpsi = (psi(theta + h) - psi(theta - h)).scale(1.0 / (2.0 * h));
        let psi0 = psi(theta);
        let dd = (dpsi.adjoint() * &dpsi)[(0, 0)].re;
        let pd = (psi0.adjoint() * &dpsi)[(0, 0)];
        let pure = 4.0 * (dd - pd.norm_sqr());
        let mixed = dense_qfi(n, theta, &p, t).unwrap();
        assert_relative_eq!(mixed, pure, max_relative = 1e-6);
    }

    #[test]
    fn capacity_limits() {
        let p = NoiseParams::markovian(0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            dense_evolve(6, angles(0.5, 0.0), &p, 0.1),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            dense_qfi(5, 0.5, &p, 0.1),
            Err(Error::Capacity { .. })
        ));
    }
}
