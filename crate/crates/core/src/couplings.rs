//! Longitudinal and dispersive couplings from derivatives of the tracked
//! quasi-energies, the two-level reduction, closed-form small-drive limits
//! and compensation tones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{track_branches, FloquetConfig, FloquetSpectrum};
use crate::models::SystemModel;
use crate::scalar::{cabs, lit, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DerivativeOptions {
    /// Finite-difference step in the drive amplitude.
    pub fd_step: f64,
    /// Below `a_switch_factor * fd_step` the `ε'/A` term is replaced by `ε''`.
    pub a_switch_factor: f64,
    /// Largest relative disagreement between the `h` and `h/2` stencils.
    pub richardson_tol: f64,
    /// Absolute scales below which first and second derivatives are
    /// compared absolutely rather than relatively.
    pub d1_floor: f64,
    pub d2_floor: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self { fd_step: 1e-4, a_switch_factor: 10.0, richardson_tol: 1e-4, d1_floor: 1e-6, d2_floor: 1e-2 }
    }
}

/// Per-level couplings at one drive point.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCouplings<T: Real> {
    pub levels: Vec<usize>,
    pub g_par: Vec<T>,
    pub chi: Vec<T>,
    pub epsilon: Vec<T>,
    pub a_q: T,
    pub omega_d: T,
    pub g_perp: T,
}

impl<T: Real> LevelCouplings<T> {
    fn index(&self, level: usize) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| l == level)
            .ok_or_else(|| Error::InvalidParameter(format!("level {level} was not tracked")))
    }
}

/// Logical two-level couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCouplings<T> {
    pub g_par: T,
    pub g_bar: T,
    pub chi: T,
    pub chi_bar: T,
    /// Half the logical quasi-energy splitting.
    pub epsilon: T,
    /// Purcell decay rate.
    pub gamma: T,
    pub g_perp: T,
    pub kappa: T,
    pub a_q: T,
    pub omega_d: T,
    pub omega_r: T,
}

/// Qubit and cavity tones sharing one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePlan<T> {
    pub a_q: T,
    pub a_r: T,
    pub phi: T,
    pub omega_d: T,
}

impl<T: Real> DrivePlan<T> {
    pub fn qubit_only(a_q: T, omega_d: T) -> Self {
        Self { a_q, a_r: T::zero(), phi: T::zero(), omega_d }
    }
}

/// Amplitudes `|a + k h / 2|`, `k = -4..=4`, needed by the `h` and `h/2`
/// stencils around `a`. Negative points fold onto the positive axis since
/// quasi-energies are even in the drive.
pub fn stencil_points<T: Real>(a: T, h: T) -> Vec<T> {
    (-4..=4).map(|k| (a + h * lit(k as f64 * 0.5)).abs()).collect()
}

/// Sorted, deduplicated continuation grid from 0 through every stencil
/// point of every amplitude in `a_values`.
pub fn stencil_grid<T: Real>(a_values: &[T], h: T) -> Vec<T> {
    let mut pts = vec![T::zero()];
    for &a in a_values {
        pts.extend(stencil_points(a, h));
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<T> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&q) if (p - q).abs() <= lit::<T>(1e-12) * p.abs().max(T::one()) => {}
            _ => out.push(p),
        }
    }
    out
}

fn lookup<T: Real>(spec: &FloquetSpectrum<T>, a: T, branch: usize) -> Result<T> {
    let k = spec.point(a.abs()).ok_or_else(|| {
        Error::InvalidParameter(format!("spectrum does not contain stencil point A = {:e}", to_f64(a.abs())))
    })?;
    Ok(spec.quasi_energies[k][branch])
}

struct Stencil<T> {
    d1: T,
    d2: T,
}

fn stencil<T: Real>(spec: &FloquetSpectrum<T>, branch: usize, a: T, h: T) -> Result<Stencil<T>> {
    let e = |k: f64| lookup(spec, a + h * lit(k), branch);
    let (m2, m1, z, p1, p2) = (e(-2.0)?, e(-1.0)?, e(0.0)?, e(1.0)?, e(2.0)?);
    let d1 = ((p1 - m1) * lit(8.0) - (p2 - m2)) / (h * lit(12.0));
    let d2 = ((p1 + m1) * lit(16.0) - (p2 + m2) - z * lit(30.0)) / (h * h * lit(12.0));
    Ok(Stencil { d1, d2 })
}

fn check_richardson<T: Real>(what: &str, level: usize, coarse: T, fine: T, floor: f64, tol: f64) -> Result<()> {
    let scale = to_f64(coarse.abs().max(fine.abs())).max(floor);
    let diff = to_f64((coarse - fine).abs());
    if diff > tol * scale {
        return Err(Error::DerivativeUnstable(format!(
            "{what} of level {level}: stencils with h and h/2 disagree by {:e} (relative to {:e})",
            diff, scale
        )));
    }
    Ok(())
}

/// Distance of the logical pair from a one-photon resonance: the direct
/// splitting, the splitting shifted by one drive quantum either way, and the
/// bare detuning.
fn resonance_distance<T: Real>(e0: T, e1: T, omega_q: T, omega_d: T) -> T {
    let d = e1 - e0;
    d.abs().min((d - omega_d).abs()).min((d + omega_d).abs()).min((omega_q - omega_d).abs())
}

/// `g∥_j = g⊥ ∂ε_j/∂A` and `χ_j = g⊥² (∂²ε_j/∂A² + (1/A) ∂ε_j/∂A)` at
/// `A = a_q` on the real axis, from five-point stencils checked against a
/// halved step.
pub fn level_couplings<T: Real>(
    spec: &FloquetSpectrum<T>,
    model: &SystemModel<T>,
    g_perp: T,
    a_q: T,
    opts: &DerivativeOptions,
) -> Result<LevelCouplings<T>> {
    if a_q < T::zero() {
        return Err(Error::InvalidParameter("A_q must be non-negative".into()));
    }
    if !(opts.fd_step > 0.0) {
        return Err(Error::InvalidParameter("fd_step must be positive".into()));
    }
    let h: T = lit(opts.fd_step);
    let a_switch = h * lit(opts.a_switch_factor);
    let mut out = LevelCouplings {
        levels: spec.levels.clone(),
        g_par: Vec::with_capacity(spec.levels.len()),
        chi: Vec::with_capacity(spec.levels.len()),
        epsilon: Vec::with_capacity(spec.levels.len()),
        a_q,
        omega_d: spec.omega_d,
        g_perp,
    };
    let mut max_slope = T::zero();
    for (b, &level) in spec.levels.iter().enumerate() {
        let coarse = stencil(spec, b, a_q, h)?;
        let fine = stencil(spec, b, a_q, h * lit(0.5))?;
        check_richardson("first derivative", level, coarse.d1, fine.d1, opts.d1_floor, opts.richardson_tol)?;
        check_richardson("second derivative", level, coarse.d2, fine.d2, opts.d2_floor, opts.richardson_tol)?;
        let (d1, d2) = (coarse.d1, coarse.d2);
        max_slope = max_slope.max(d1.abs());
        let curvature = if a_q < a_switch { d2 * lit(2.0) } else { d2 + d1 / a_q };
        out.g_par.push(g_perp * d1);
        out.chi.push(g_perp * g_perp * curvature);
        out.epsilon.push(lookup(spec, a_q, b)?);
    }
    if let (Some(i0), Some(i1)) = (spec.branch(0), spec.branch(1)) {
        let q01 = cabs(model.charge_op[(0, 1)]);
        let slope = max_slope.max(q01 * lit(0.5));
        let gap = resonance_distance(out.epsilon[i0], out.epsilon[i1], model.omega_q(), spec.omega_d);
        if gap < h * lit(10.0) * slope {
            return Err(Error::NearResonance(format!(
                "logical pair at A = {:e} is {:e} from a one-photon resonance",
                to_f64(a_q),
                to_f64(gap)
            )));
        }
    }
    Ok(out)
}

/// Tracks the spectrum over the stencils of `a_q` and returns its couplings.
pub fn couplings_at<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    a_q: T,
    g_perp: T,
    opts: &DerivativeOptions,
    cfg: &FloquetConfig,
) -> Result<LevelCouplings<T>> {
    let spec = track_branches(model, omega_d, &stencil_grid(&[a_q], lit(opts.fd_step)), cfg)?;
    level_couplings(&spec, model, g_perp, a_q, opts)
}

/// Tracked spectrum with the couplings at each requested amplitude.
pub type CouplingSweep<T> = (FloquetSpectrum<T>, Vec<Result<LevelCouplings<T>>>);

/// Couplings at every amplitude of `a_values` from a single continuation.
/// Points whose derivatives fail carry their own error.
pub fn couplings_sweep<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    a_values: &[T],
    g_perp: T,
    opts: &DerivativeOptions,
    cfg: &FloquetConfig,
) -> Result<CouplingSweep<T>> {
    let spec = track_branches(model, omega_d, &stencil_grid(a_values, lit(opts.fd_step)), cfg)?;
    let out = a_values.iter().map(|&a| level_couplings(&spec, model, g_perp, a, opts)).collect();
    Ok((spec, out))
}

/// Reduction onto the logical levels `(lo, hi)` (normally `(0, 1)`), with
/// the Purcell rate `κ g⊥² |Q_lo,hi|² / (ω_q - ω_r)²` from the bare splitting.
pub fn reduce_two_level<T: Real>(
    lc: &LevelCouplings<T>,
    model: &SystemModel<T>,
    levels: (usize, usize),
    kappa: T,
    omega_r: T,
) -> Result<ReadoutCouplings<T>> {
    let (i0, i1) = (lc.index(levels.0)?, lc.index(levels.1)?);
    let half = lit::<T>(0.5);
    let omega_q = model.energies[levels.1] - model.energies[levels.0];
    let q = cabs(model.charge_op[(levels.0, levels.1)]);
    let detuning = omega_q - omega_r;
    if detuning == T::zero() {
        return Err(Error::NearResonance("Purcell rate diverges at ω_r = ω_q".into()));
    }
    Ok(ReadoutCouplings {
        g_par: (lc.g_par[i1] - lc.g_par[i0]) * half,
        g_bar: (lc.g_par[i1] + lc.g_par[i0]) * half,
        chi: (lc.chi[i1] - lc.chi[i0]) * half,
        chi_bar: (lc.chi[i1] + lc.chi[i0]) * half,
        epsilon: (lc.epsilon[i1] - lc.epsilon[i0]) * half,
        gamma: kappa * (lc.g_perp * q / detuning).powi(2),
        g_perp: lc.g_perp,
        kappa,
        a_q: lc.a_q,
        omega_d: lc.omega_d,
        omega_r,
    })
}

/// Charge-qubit closed forms `χ⁽⁰⁾ = 2g⊥²ω_q/(ω_q² - ω_d²)` and
/// `g∥⁽⁰⁾ = χ⁽⁰⁾ A_q / (2 g⊥)`. Returns `(g∥⁽⁰⁾, χ⁽⁰⁾)`.
pub fn small_drive_couplings<T: Real>(omega_q: T, omega_d: T, g_perp: T, a_q: T) -> Result<(T, T)> {
    let den = omega_q * omega_q - omega_d * omega_d;
    if den == T::zero() {
        return Err(Error::NearResonance("ω_d = ω_q".into()));
    }
    let chi = g_perp * g_perp * omega_q * lit(2.0) / den;
    Ok((chi * a_q / (g_perp * lit(2.0)), chi))
}

/// Transmon dispersive shift with counter-rotating terms,
/// `g⊥²|n01|² [1/(ω_q-ω_d) + 1/(ω_q+ω_d) - 1/(ω_q-E_C-ω_d) - 1/(ω_q-E_C+ω_d)]`,
/// and the matching `g∥⁽⁰⁾`. Returns `(g∥⁽⁰⁾, χ⁽⁰⁾)`.
pub fn transmon_small_drive_reference<T: Real>(
    e_c: T,
    n01: T,
    g_perp: T,
    a_q: T,
    omega_q: T,
    omega_d: T,
) -> Result<(T, T)> {
    let w12 = omega_q - e_c;
    let dens = [omega_q - omega_d, omega_q + omega_d, w12 - omega_d, w12 + omega_d];
    if dens.iter().any(|&d| d == T::zero()) {
        return Err(Error::NearResonance("drive resonant with the 0-1 or 1-2 transition".into()));
    }
    let s = T::one() / dens[0] + T::one() / dens[1] - T::one() / dens[2] - T::one() / dens[3];
    let chi = g_perp * g_perp * n01 * n01 * s;
    Ok((chi * a_q / (g_perp * lit(2.0)), chi))
}

/// Rotating-wave form `-g⊥²|n01|² E_C / ((ω_q-ω_d)(ω_q-ω_d-E_C))`.
pub fn transmon_dispersive_rwa<T: Real>(e_c: T, n01: T, g_perp: T, omega_q: T, omega_d: T) -> Result<T> {
    let d = omega_q - omega_d;
    if d == T::zero() || d == e_c {
        return Err(Error::NearResonance("drive resonant with the 0-1 or 1-2 transition".into()));
    }
    Ok(-g_perp * g_perp * n01 * n01 * e_c / (d * (d - e_c)))
}

/// Cavity tone cancelling the level-independent pointer motion:
/// `A_r = -2ḡ∥`, `φ = 0`, `ω_d = ω_r + χ̄`.
pub fn compensation_tone<T: Real>(rc: &ReadoutCouplings<T>, omega_r: T) -> DrivePlan<T> {
    DrivePlan { a_q: rc.a_q, a_r: -rc.g_bar * lit(2.0), phi: T::zero(), omega_d: omega_r + rc.chi_bar }
}

/// Compensated operating point: the couplings are evaluated at the shared
/// drive frequency `ω_d = ω_r + χ̄(ω_d)`, found by fixed-point iteration
/// from `ω_d = ω_r`, together with the matching compensation tone.
pub fn self_consistent_compensation<T: Real>(
    model: &SystemModel<T>,
    omega_r: T,
    a_q: T,
    g_perp: T,
    kappa: T,
    opts: &DerivativeOptions,
    cfg: &FloquetConfig,
) -> Result<(ReadoutCouplings<T>, DrivePlan<T>)> {
    let cfg = FloquetConfig { levels: Some(cfg.levels.clone().unwrap_or_else(|| vec![0, 1])), ..cfg.clone() };
    let mut omega_d = omega_r;
    for _ in 0..12 {
        let lc = couplings_at(model, omega_d, a_q, g_perp, opts, &cfg)?;
        let rc = reduce_two_level(&lc, model, (0, 1), kappa, omega_r)?;
        let plan = compensation_tone(&rc, omega_r);
        let tol = (rc.chi_bar.abs() * lit(1e-6)).max(omega_r * lit(1e-11));
        if (plan.omega_d - omega_d).abs() <= tol {
            return Ok((rc, plan));
        }
        omega_d = plan.omega_d;
    }
    Err(Error::DerivativeUnstable("compensation frequency did not settle within 12 iterations".into()))
}
