//! Pointer-state trajectories of the cavity field for the effective
//! longitudinal + dispersive Hamiltonian, in the frame rotating at `ω_d`.
//!
//! With `s = ⟨σ_z⟩` and `b = ⟨a σ_z⟩` the moments obey
//!
//! ```text
//! ȧ = -(iΔ + κ/2) a - iχ b - i g∥ s - iF
//! ḃ = -(iχ + γ) a - (iΔ + κ/2 + γ) b - iF s - i g∥
//! ṡ = -γ (s + 1)
//! ```
//!
//! where `Δ = χ̄ + ω_r - ω_d` and `F = ḡ∥ + (A_r/2) e^{-iφ}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::couplings::{DrivePlan, ReadoutCouplings};
use crate::error::{Error, Result};
use crate::scalar::{c, cabs, cexp, cr, lit, phase, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryParams<T: Real> {
    pub rc: ReadoutCouplings<T>,
    pub plan: DrivePlan<T>,
    /// Initial polarization of the qubit, normally the dressed value.
    pub sigma_z0: T,
    pub kappa: T,
    pub t_grid: Vec<T>,
}

impl<T: Real> TrajectoryParams<T> {
    pub fn new(rc: ReadoutCouplings<T>, plan: DrivePlan<T>, sigma_z0: T, t_grid: Vec<T>) -> Self {
        Self { kappa: rc.kappa, rc, plan, sigma_z0, t_grid }
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > T::zero()) {
            return Err(Error::InvalidParameter("kappa must be positive".into()));
        }
        if self.sigma_z0.abs() > T::one() + lit(1e-12) {
            return Err(Error::InvalidParameter("initial polarization outside [-1, 1]".into()));
        }
        check_grid(&self.t_grid)
    }

    fn drive_term(&self) -> C<T> {
        cr(self.rc.g_bar) + phase(self.plan.phi) * cr(self.plan.a_r * lit(0.5))
    }

    fn detuning(&self) -> T {
        self.rc.chi_bar + self.rc.omega_r - self.plan.omega_d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub a: Vec<C<T>>,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrCurve<T> {
    pub times: Vec<T>,
    pub snr: Vec<T>,
}

/// `⟨a⟩`, `⟨aσ_z⟩` and `⟨σ_z⟩` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T: Real> {
    pub a: C<T>,
    pub a_sz: C<T>,
    pub sz: T,
}

fn check_grid<T: Real>(t: &[T]) -> Result<()> {
    match t.first() {
        None => return Err(Error::InvalidParameter("empty time grid".into())),
        Some(&t0) if t0 != T::zero() => {
            return Err(Error::InvalidParameter("time grid must start at t = 0".into()));
        }
        _ => {}
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be strictly ascending".into()));
    }
    Ok(())
}

/// `n` equally spaced times on `[0, t_end]`.
pub fn time_grid<T: Real>(t_end: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let dt = t_end / lit((n - 1) as f64);
    (0..n).map(|k| dt * lit(k as f64)).collect()
}

/// 2000 points over `[0, 5/κ]`.
pub fn default_time_grid<T: Real>(kappa: T) -> Vec<T> {
    time_grid(lit::<T>(5.0) / kappa, 2000)
}

/// `(1 - e^{-zt}) / z`, continuous through `z = 0`.
fn relax<T: Real>(z: C<T>, t: T) -> C<T> {
    let zt = z * cr(t);
    if cabs(zt) < lit(1e-5) {
        cr(t) * (cr(T::one()) - zt * cr(lit(0.5)) + zt * zt * cr(lit(1.0 / 6.0)))
    } else {
        (cr(T::one()) - cexp(-zt)) / z
    }
}

/// Right-hand side of the moment equations.
pub fn moment_rhs<T: Real>(p: &TrajectoryParams<T>, m: &Moments<T>) -> (C<T>, C<T>, T) {
    let i = c(T::zero(), T::one());
    let (g, chi, gamma) = (cr(p.rc.g_par), cr(p.rc.chi), cr(p.rc.gamma));
    let lam = i * cr(p.detuning()) + cr(p.kappa * lit(0.5));
    let f = p.drive_term();
    let s = cr(m.sz);
    let da = -lam * m.a - i * chi * m.a_sz - i * g * s - i * f;
    let db = -(i * chi + gamma) * m.a - (lam + gamma) * m.a_sz - i * f * s - i * g;
    (da, db, -p.rc.gamma * (m.sz + T::one()))
}

/// `lam_a` and `lam_b` are the decay rates of `α` and of `β e^{γt}`.
struct Modes<T: Real> {
    lam_a: C<T>,
    lam_b: C<T>,
    k0: C<T>,
    k1: C<T>,
    kb: C<T>,
    chi: C<T>,
    gamma: T,
    s1: T,
    den: C<T>,
}

fn modes<T: Real>(p: &TrajectoryParams<T>) -> Result<Option<Modes<T>>> {
    let i = c(T::zero(), T::one());
    let rc = &p.rc;
    let (g, chi, gamma) = (cr(rc.g_par), cr(rc.chi), cr(rc.gamma));
    let base = i * cr(p.detuning()) + cr(p.kappa * lit(0.5));
    let lam_a = base - i * chi;
    let lam_b = base + i * chi;
    if lam_a == cr(T::zero()) || lam_b == cr(T::zero()) {
        return Err(Error::NearResonance("cavity mode with vanishing complex frequency".into()));
    }
    let den = gamma + i * chi * cr(lit(2.0));
    if cabs(den) <= lit(1e-14) {
        return Ok(None);
    }
    let r = i * chi / (gamma + i * chi);
    let f = p.drive_term();
    Ok(Some(Modes {
        lam_a,
        lam_b,
        k0: i * (cr(T::one()) + r) * (g - f),
        k1: -i * (g - r * f),
        kb: -i * (g + f),
        chi,
        gamma: rc.gamma,
        s1: p.sigma_z0 + T::one(),
        den,
    }))
}

fn closed_form<T: Real>(m: &Modes<T>, t: T) -> Moments<T> {
    let i = c(T::zero(), T::one());
    let decay = cr((-m.gamma * t).exp() * m.s1);
    let gamma = cr(m.gamma);
    let beta = m.kb * decay * relax(m.lam_b, t);
    let alpha = m.k0 * relax(m.lam_a, t) + m.k1 * decay * relax(m.lam_a - gamma, t);
    // β = a + aσ_z and α = a - r aσ_z with r = iχ/(γ + iχ)
    let chi = m.chi;
    let a = ((gamma + i * chi) * alpha + i * chi * beta) / m.den;
    let s = m.s1 * (-m.gamma * t).exp() - T::one();
    Moments { a, a_sz: beta - a, sz: s }
}

/// Exact propagation of the linear moment system through the matrix
/// exponential, used where the normal-mode recombination degenerates.
fn propagate<T: Real>(p: &TrajectoryParams<T>) -> Vec<Moments<T>> {
    let i = c(T::zero(), T::one());
    let z = cr(T::zero());
    let (g, chi, gamma) = (cr(p.rc.g_par), cr(p.rc.chi), cr(p.rc.gamma));
    let lam = i * cr(p.detuning()) + cr(p.kappa * lit(0.5));
    let f = p.drive_term();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        -lam, -i * chi, -i * g, -i * f,
        -(i * chi + gamma), -(lam + gamma), -i * f, -i * g,
        z, z, -gamma, -gamma,
        z, z, z, z,
    ]);
    let x0 = nalgebra::DVector::from_vec(vec![z, z, cr(p.sigma_z0), cr(T::one())]);
    p.t_grid
        .iter()
        .map(|&t| {
            let x = (&m * cr(t)).exp() * &x0;
            Moments { a: x[0], a_sz: x[1], sz: x[2].re }
        })
        .collect()
}

/// `⟨a⟩`, `⟨aσ_z⟩` and `⟨σ_z⟩` on the time grid of `p`.
pub fn analytic_moments<T: Real>(p: &TrajectoryParams<T>) -> Result<Vec<Moments<T>>> {
    p.validate()?;
    Ok(match modes(p)? {
        Some(m) => p.t_grid.iter().map(|&t| closed_form(&m, t)).collect(),
        None => propagate(p),
    })
}

/// Closed-form `⟨a(t)⟩` starting from an empty cavity.
pub fn analytic_trajectory<T: Real>(p: &TrajectoryParams<T>) -> Result<Trajectory<T>> {
    let m = analytic_moments(p)?;
    Ok(Trajectory {
        times: p.t_grid.clone(),
        a: m.into_iter().map(|x| x.a).collect(),
        label: format!("sigma_z0={:.6}", crate::scalar::to_f64(p.sigma_z0)),
    })
}

/// Trajectories for the two logical states, computed concurrently.
pub fn trajectory_pair<T: Real>(
    rc: &ReadoutCouplings<T>,
    plan: &DrivePlan<T>,
    sigma_up: T,
    sigma_down: T,
    t_grid: &[T],
) -> Result<(Trajectory<T>, Trajectory<T>)> {
    let run = |s: T, label: &str| -> Result<Trajectory<T>> {
        let mut tr = analytic_trajectory(&TrajectoryParams::new(*rc, *plan, s, t_grid.to_vec()))?;
        tr.label = label.into();
        Ok(tr)
    };
    let (up, down) = rayon::join(|| run(sigma_up, "up"), || run(sigma_down, "down"));
    Ok((up?, down?))
}

/// Standard dispersive readout: only the cavity is driven, at `ω_d = ω_r`
/// with `φ = 3π/2`, and `ḡ∥ = χ̄ = γ = 0`.
pub fn dispersive_trajectory<T: Real>(a_r: T, chi: T, kappa: T, sigma_z0: T, t_grid: &[T]) -> Result<Trajectory<T>> {
    if !(kappa > T::zero()) {
        return Err(Error::InvalidParameter("kappa must be positive".into()));
    }
    check_grid(t_grid)?;
    let i = c(T::zero(), T::one());
    let half_k = cr(kappa * lit(0.5));
    let a = t_grid
        .iter()
        .map(|&t| {
            let mut sum = cr(T::zero());
            for sigma in [T::one(), -T::one()] {
                let z = i * cr(sigma * chi) + half_k;
                sum += cr(sigma * (sigma_z0 + sigma)) * relax(z, t);
            }
            sum * cr(a_r * lit(0.25))
        })
        .collect();
    Ok(Trajectory { times: t_grid.to_vec(), a, label: "dispersive".into() })
}

/// Long-time pointer for a definite `σ_z`, neglecting qubit-cavity
/// entanglement and Purcell decay:
/// `-i(g∥σ + ḡ∥ + (A_r/2)e^{-iφ}) / (i(χσ + χ̄ + ω_r - ω_d) + κ/2)`.
/// For `ḡ∥ = χ̄ = 0`, `ω_d = ω_r` and `φ = 3π/2` this is
/// `(-ig∥σ + A_r/2)/(iχσ + κ/2)`.
pub fn steady_state_pointer<T: Real>(rc: &ReadoutCouplings<T>, plan: &DrivePlan<T>, sigma_z: T) -> Result<C<T>> {
    if !(rc.kappa > T::zero()) {
        return Err(Error::InvalidParameter("kappa must be positive".into()));
    }
    let i = c(T::zero(), T::one());
    let f = cr(rc.g_bar) + phase(plan.phi) * cr(plan.a_r * lit(0.5));
    let num = -i * (cr(rc.g_par * sigma_z) + f);
    let den = i * cr(rc.chi * sigma_z + rc.chi_bar + rc.omega_r - plan.omega_d) + cr(rc.kappa * lit(0.5));
    Ok(num / den)
}

/// `SNR(t) = sqrt(2κ ∫₀ᵗ |a_up - a_down|² dτ)` by the trapezoid rule.
pub fn snr<T: Real>(up: &Trajectory<T>, down: &Trajectory<T>, kappa: T) -> Result<SnrCurve<T>> {
    if up.times != down.times {
        return Err(Error::InvalidParameter("trajectories are on different time grids".into()));
    }
    let mut out = Vec::with_capacity(up.times.len());
    let mut acc = T::zero();
    let mut prev: Option<(T, T)> = None;
    for (k, &t) in up.times.iter().enumerate() {
        let d = (up.a[k] - down.a[k]).norm_sqr();
        if let Some((t0, d0)) = prev {
            acc += (t - t0) * (d + d0) * lit(0.5);
        }
        prev = Some((t, d));
        out.push((kappa * lit(2.0) * acc).sqrt());
    }
    Ok(SnrCurve { times: up.times.clone(), snr: out })
}

/// SNR at time `t` by linear interpolation of the curve.
pub fn snr_at<T: Real>(curve: &SnrCurve<T>, t: T) -> Option<T> {
    let k = curve.times.iter().position(|&x| x >= t)?;
    if k == 0 || curve.times[k] == t {
        return Some(curve.snr[k]);
    }
    let (t0, t1) = (curve.times[k - 1], curve.times[k]);
    let w = (t - t0) / (t1 - t0);
    Some(curve.snr[k - 1] * (T::one() - w) + curve.snr[k] * w)
}

/// Cavity amplitude of a dispersive readout with shift `chi_disp` whose
/// steady-state splitting equals that of the longitudinal protocol
/// `(rc, plan)` for `σ_z = ±1`. The dispersive splitting is
/// `A_r |χ| / (χ² + κ²/4)`.
pub fn match_dispersive_amplitude<T: Real>(
    rc: &ReadoutCouplings<T>,
    plan: &DrivePlan<T>,
    chi_disp: T,
    kappa: T,
) -> Result<T> {
    let long = cabs(steady_state_pointer(rc, plan, T::one())? - steady_state_pointer(rc, plan, -T::one())?);
    if long == T::zero() {
        return Ok(T::zero());
    }
    if chi_disp == T::zero() || !(kappa > T::zero()) {
        return Err(Error::InvalidParameter("dispersive splitting vanishes for chi = 0".into()));
    }
    Ok(long * (chi_disp * chi_disp + kappa * kappa * lit(0.25)) / chi_disp.abs())
}
