//! Master-equation simulation of a driven system coupled to a damped
//! resonator in a truncated Fock space.
//!
//! The density matrix is stored row-major with composite index
//! `r = j * fock_dim + n` (system level `j`, photon number `n`), and the
//! generator `-i[H, ρ] + κ(aρa† - ½{a†a, ρ})` is evaluated with the
//! Kronecker structure of `H` instead of forming `dim² × dim²`
//! superoperators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{snr, snr_at, Trajectory};
use crate::couplings::DrivePlan;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::models::SystemModel;
use crate::scalar::{c, cabs, cr, lit, to_f64, CMat, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub fock_dim: usize,
    /// Upper bound on the integrator step. `None` uses the stability bound
    /// `(2π/ω_max)/50`.
    pub dt: Option<f64>,
    pub frame: Frame,
    pub drop_counter_rotating_cavity_drive: bool,
    /// Number of system levels kept. `None` keeps up to four.
    pub system_levels: Option<usize>,
    pub trace_tol: f64,
    /// Mean photon number allowed, as a fraction of `fock_dim`.
    pub photon_guard: f64,
    /// Number of recorded times at which positivity is checked.
    pub positivity_checks: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            fock_dim: 30,
            dt: None,
            frame: Frame::Rotating,
            drop_counter_rotating_cavity_drive: true,
            system_levels: None,
            trace_tol: 1e-8,
            photon_guard: 0.8,
            positivity_checks: 5,
        }
    }
}

/// Resonator and its transverse coupling to the system charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonator<T> {
    pub omega_r: T,
    pub kappa: T,
    pub g_perp: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult<T: Real> {
    pub times: Vec<T>,
    /// `⟨a⟩` in the frame rotating at `ω_d`.
    pub expect_a: Vec<C<T>>,
    /// Populations of the kept system levels at each recorded time.
    pub populations: Vec<Vec<T>>,
    pub photon_number: Vec<T>,
    pub trace_error: T,
    pub hermiticity_error: T,
    pub min_eigenvalue: T,
    pub steps: usize,
    pub dt: T,
}

impl<T: Real> SimResult<T> {
    /// `P_1 - P_0` at each recorded time.
    pub fn sigma_z(&self) -> Vec<T> {
        self.populations.iter().map(|p| p[1] - p[0]).collect()
    }

    pub fn nphoton_max(&self) -> T {
        self.photon_number.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    pub fn trajectory(&self, label: &str) -> Trajectory<T> {
        Trajectory { times: self.times.clone(), a: self.expect_a.clone(), label: label.into() }
    }
}

/// Time-dependent coefficients of `H(t)`.
struct Coeffs<T: Real> {
    /// Multiplies `Q ⊗ 1`.
    q: T,
    /// Multiplies `Q ⊗ a`; its conjugate multiplies `Q ⊗ a†`.
    qa: C<T>,
    /// Multiplies `1 ⊗ a`; its conjugate multiplies `1 ⊗ a†`.
    a: C<T>,
}

struct Lindblad<'m, T: Real> {
    m: usize,
    nf: usize,
    dim: usize,
    energies: &'m [T],
    q: CMat<T>,
    /// Cavity frequency in the simulation frame.
    w: T,
    kappa: T,
    g: T,
    plan: DrivePlan<T>,
    frame: Frame,
    counter_rotating: bool,
    sqrt_n: Vec<T>,
    scratch: Vec<C<T>>,
    left: Vec<C<T>>,
}

impl<T: Real> Lindblad<'_, T> {
    fn coeffs(&self, t: T) -> Coeffs<T> {
        let wd = self.plan.omega_d;
        let half = self.plan.a_r * lit(0.5);
        let e = |theta: T| c(theta.cos(), theta.sin());
        let phi = self.plan.phi;
        let (qa, a) = match self.frame {
            Frame::Rotating => {
                let mut a = e(phi) * cr(half);
                if self.counter_rotating {
                    a += e(-(wd * t * lit(2.0) + phi)) * cr(half);
                }
                (e(-wd * t) * cr(self.g), a)
            }
            Frame::Lab => {
                let mut a = e(wd * t + phi) * cr(half);
                if self.counter_rotating {
                    a += e(-(wd * t + phi)) * cr(half);
                }
                (cr(self.g), a)
            }
        };
        Coeffs { q: self.plan.a_q * (wd * t).cos(), qa, a }
    }

    /// Writes `L(ρ)` into `out`.
    fn generator(&mut self, t: T, rho: &[C<T>], out: &mut [C<T>]) {
        let (m, nf, d) = (self.m, self.nf, self.dim);
        let k = self.coeffs(t);
        let half_k = self.kappa * lit(0.5);
        let sq = &self.sqrt_n;
        let row = |r: usize| &rho[r * d..(r + 1) * d];

        // R = (c_q + u a + u* a†) ρ on the cavity index, per system level
        for j in 0..m {
            for n in 0..nf {
                let r = j * nf + n;
                let dst = &mut self.scratch[r * d..(r + 1) * d];
                let src = row(r);
                for (x, &y) in dst.iter_mut().zip(src) {
                    *x = y * cr(k.q);
                }
                if n + 1 < nf {
                    let f = k.qa * cr(sq[n + 1]);
                    for (x, &y) in dst.iter_mut().zip(row(r + 1)) {
                        *x += f * y;
                    }
                }
                if n > 0 {
                    let f = k.qa.conj() * cr(sq[n]);
                    for (x, &y) in dst.iter_mut().zip(row(r - 1)) {
                        *x += f * y;
                    }
                }
            }
        }
        // M = (H_sys + w n - iκ/2 n) ρ + (drive on a) ρ + (Q ⊗ 1) R
        for j in 0..m {
            for n in 0..nf {
                let r = j * nf + n;
                let diag = c(self.energies[j] + self.w * lit(n as f64), -half_k * lit(n as f64));
                let dst = &mut self.left[r * d..(r + 1) * d];
                for (x, &y) in dst.iter_mut().zip(row(r)) {
                    *x = diag * y;
                }
                if n + 1 < nf {
                    let f = k.a * cr(sq[n + 1]);
                    for (x, &y) in dst.iter_mut().zip(row(r + 1)) {
                        *x += f * y;
                    }
                }
                if n > 0 {
                    let f = k.a.conj() * cr(sq[n]);
                    for (x, &y) in dst.iter_mut().zip(row(r - 1)) {
                        *x += f * y;
                    }
                }
                for kk in 0..m {
                    let qjk = self.q[(j, kk)];
                    if qjk.re == T::zero() && qjk.im == T::zero() {
                        continue;
                    }
                    let src = &self.scratch[(kk * nf + n) * d..(kk * nf + n + 1) * d];
                    for (x, &y) in dst.iter_mut().zip(src) {
                        *x += qjk * y;
                    }
                }
            }
        }
        // L = -iM + (-iM)† + κ aρa†
        let i = c(T::zero(), T::one());
        for r in 0..d {
            let nr = r % nf;
            for col in 0..d {
                let mut v = -i * self.left[r * d + col] + (-i * self.left[col * d + r]).conj();
                let nc = col % nf;
                if nr + 1 < nf && nc + 1 < nf {
                    v += cr(self.kappa * sq[nr + 1] * sq[nc + 1]) * rho[(r + 1) * d + col + 1];
                }
                out[r * d + col] = v;
            }
        }
    }

    fn omega_max(&self, qnorm: T) -> T {
        let (lo, hi) = self.energies[..self.m]
            .iter()
            .fold((self.energies[0], self.energies[0]), |(a, b), &e| (a.min(e), b.max(e)));
        let wd = self.plan.omega_d;
        let n = lit::<T>(self.nf as f64);
        let mut w = hi - lo + wd + self.w.abs() * (n - T::one());
        if self.counter_rotating {
            w += wd * lit(2.0);
        }
        w + self.plan.a_q.abs() * qnorm + self.g.abs() * qnorm * n.sqrt() * lit(2.0) + self.plan.a_r.abs() * n.sqrt()
    }
}

struct Observed<T: Real> {
    a: C<T>,
    pops: Vec<T>,
    photons: T,
    trace_err: T,
    herm_err: T,
}

fn observe<T: Real>(rho: &[C<T>], m: usize, nf: usize, sq: &[T]) -> Observed<T> {
    let d = m * nf;
    let mut a = cr(T::zero());
    let mut pops = vec![T::zero(); m];
    let mut photons = T::zero();
    let mut trace = cr(T::zero());
    for r in 0..d {
        let (j, n) = (r / nf, r % nf);
        let p = rho[r * d + r];
        trace += p;
        pops[j] += p.re;
        photons += p.re * lit(n as f64);
        if n + 1 < nf {
            a += cr(sq[n + 1]) * rho[(r + 1) * d + r];
        }
    }
    let mut herm = T::zero();
    for r in 0..d {
        for col in r + 1..d {
            herm = herm.max(cabs(rho[r * d + col] - rho[col * d + r].conj()));
        }
    }
    Observed { a, pops, photons, trace_err: cabs(trace - cr(T::one())), herm_err: herm }
}

/// Largest step allowed for a run, `(2π/ω_max)/50`.
pub fn stability_step<T: Real>(model: &SystemModel<T>, res: &Resonator<T>, plan: &DrivePlan<T>, cfg: &SimConfig) -> Result<T> {
    let (sys, _) = kept_model(model, cfg)?;
    let l = build(&sys, res, plan, cfg)?;
    Ok(stability_bound(&l, &sys))
}

fn stability_bound<T: Real>(l: &Lindblad<'_, T>, sys: &SystemModel<T>) -> T {
    let qnorm = sys.charge_op.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    lit::<T>(std::f64::consts::TAU) / l.omega_max(qnorm) / lit(50.0)
}

fn kept_model<T: Real>(model: &SystemModel<T>, cfg: &SimConfig) -> Result<(SystemModel<T>, usize)> {
    let m = cfg.system_levels.unwrap_or_else(|| model.dim().min(4));
    Ok((model.truncated(m)?, m))
}

fn build<'m, T: Real>(sys: &'m SystemModel<T>, res: &Resonator<T>, plan: &DrivePlan<T>, cfg: &SimConfig) -> Result<Lindblad<'m, T>> {
    if cfg.fock_dim < 6 {
        return Err(Error::InvalidParameter("fock_dim must be at least 6".into()));
    }
    if !(res.kappa >= T::zero()) || !(res.omega_r > T::zero()) || !(plan.omega_d > T::zero()) {
        return Err(Error::InvalidParameter("frequencies must be positive and kappa non-negative".into()));
    }
    let (m, nf) = (sys.dim(), cfg.fock_dim);
    let dim = m * nf;
    Ok(Lindblad {
        m,
        nf,
        dim,
        energies: &sys.energies,
        q: sys.charge_op.clone(),
        w: match cfg.frame {
            Frame::Rotating => res.omega_r - plan.omega_d,
            Frame::Lab => res.omega_r,
        },
        kappa: res.kappa,
        g: res.g_perp,
        plan: *plan,
        frame: cfg.frame,
        counter_rotating: !cfg.drop_counter_rotating_cavity_drive,
        sqrt_n: (0..nf).map(|n| lit::<T>(n as f64).sqrt()).collect(),
        scratch: vec![cr(T::zero()); dim * dim],
        left: vec![cr(T::zero()); dim * dim],
    })
}

fn min_eigenvalue<T: Real>(rho: &[C<T>], d: usize) -> T {
    let mat = CMat::from_row_slice(d, d, rho);
    let herm = (&mat + mat.adjoint()) * cr(lit::<T>(0.5));
    let (vals, _) = hermitian_eigen(&herm);
    vals.first().copied().unwrap_or(T::zero())
}

/// Evolves `|initial⟩ ⊗ |0⟩` under the driven system-resonator master
/// equation with fixed-step RK4 and records observables on `t_grid`.
pub fn simulate<T: Real>(
    model: &SystemModel<T>,
    res: &Resonator<T>,
    plan: &DrivePlan<T>,
    initial: usize,
    t_grid: &[T],
    cfg: &SimConfig,
) -> Result<SimResult<T>> {
    let (sys, m) = kept_model(model, cfg)?;
    if initial >= m {
        return Err(Error::InvalidParameter(format!("initial level {initial} is not among the {m} kept levels")));
    }
    if t_grid.first() != Some(&T::zero()) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must start at 0 and ascend".into()));
    }
    let mut l = build(&sys, res, plan, cfg)?;
    let bound = stability_bound(&l, &sys);
    let dt_max = match cfg.dt {
        Some(dt) if lit::<T>(dt) > bound => {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt:e} exceeds the stability bound {:e}",
                to_f64(bound)
            )))
        }
        Some(dt) if dt > 0.0 => lit(dt),
        Some(_) => return Err(Error::InvalidParameter("dt must be positive".into())),
        None => bound,
    };

    let (nf, d) = (l.nf, l.dim);
    let sq = l.sqrt_n.clone();
    let zero = cr(T::zero());
    let mut rho = vec![zero; d * d];
    let r0 = initial * nf;
    rho[r0 * d + r0] = cr(T::one());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; d * d], vec![zero; d * d], vec![zero; d * d], vec![zero; d * d], vec![zero; d * d]);

    let n_checks = cfg.positivity_checks.min(t_grid.len());
    let check_at: Vec<usize> = (1..=n_checks).map(|i| (i * (t_grid.len() - 1)) / n_checks.max(1)).collect();
    let mut out = SimResult {
        times: t_grid.to_vec(),
        expect_a: Vec::with_capacity(t_grid.len()),
        populations: Vec::with_capacity(t_grid.len()),
        photon_number: Vec::with_capacity(t_grid.len()),
        trace_error: T::zero(),
        hermiticity_error: T::zero(),
        min_eigenvalue: T::one(),
        steps: 0,
        dt: dt_max,
    };
    let guard = lit::<T>(cfg.photon_guard * nf as f64);
    let tol = lit::<T>(cfg.trace_tol);
    let mut smallest_step = dt_max;

    for (idx, &t_rec) in t_grid.iter().enumerate() {
        if idx > 0 {
            let t0 = t_grid[idx - 1];
            let span = t_rec - t0;
            let n_sub = to_f64(span / dt_max).ceil().max(1.0) as usize;
            let h = span / lit(n_sub as f64);
            smallest_step = smallest_step.min(h);
            let half = h * lit(0.5);
            for s in 0..n_sub {
                let t = t0 + h * lit(s as f64);
                l.generator(t, &rho, &mut k1);
                axpy_into(&mut tmp, &rho, &k1, half);
                l.generator(t + half, &tmp, &mut k2);
                axpy_into(&mut tmp, &rho, &k2, half);
                l.generator(t + half, &tmp, &mut k3);
                axpy_into(&mut tmp, &rho, &k3, h);
                l.generator(t + h, &tmp, &mut k4);
                let w = h / lit(6.0);
                for i in 0..d * d {
                    rho[i] += (k1[i] + (k2[i] + k3[i]) * cr(lit(2.0)) + k4[i]) * cr(w);
                }
            }
            out.steps += n_sub;
        }
        let obs = observe(&rho, m, nf, &sq);
        let a = match cfg.frame {
            Frame::Rotating => obs.a,
            Frame::Lab => obs.a * c((plan.omega_d * t_rec).cos(), (plan.omega_d * t_rec).sin()),
        };
        out.trace_error = out.trace_error.max(obs.trace_err);
        out.hermiticity_error = out.hermiticity_error.max(obs.herm_err);
        if obs.trace_err > tol || obs.herm_err > tol {
            return Err(Error::OracleDiagnostics(format!(
                "trace error {:e}, hermiticity error {:e} at t = {:e}",
                to_f64(obs.trace_err),
                to_f64(obs.herm_err),
                to_f64(t_rec)
            )));
        }
        if obs.photons > guard {
            return Err(Error::OracleDiagnostics(format!(
                "mean photon number {:.3} exceeds {:.0}% of fock_dim = {nf} at t = {:e}",
                to_f64(obs.photons),
                cfg.photon_guard * 100.0,
                to_f64(t_rec)
            )));
        }
        if check_at.contains(&idx) {
            let e = min_eigenvalue(&rho, d);
            out.min_eigenvalue = out.min_eigenvalue.min(e);
            if e < -tol {
                return Err(Error::OracleDiagnostics(format!(
                    "density matrix eigenvalue {:e} at t = {:e}",
                    to_f64(e),
                    to_f64(t_rec)
                )));
            }
        }
        out.expect_a.push(a);
        out.populations.push(obs.pops);
        out.photon_number.push(obs.photons);
    }
    out.dt = smallest_step;
    Ok(out)
}

fn axpy_into<T: Real>(dst: &mut [C<T>], x: &[C<T>], y: &[C<T>], h: T) {
    let h = cr(h);
    for ((d, &a), &b) in dst.iter_mut().zip(x).zip(y) {
        *d = a + b * h;
    }
}

/// SNR at `t_star` from oracle runs started in levels 1 and 0, one entry
/// per plan, computed in parallel and returned in plan order.
pub fn sweep_snr_numeric<T: Real>(
    model: &SystemModel<T>,
    res: &Resonator<T>,
    plans: &[DrivePlan<T>],
    t_grid: &[T],
    t_star: T,
    cfg: &SimConfig,
) -> Vec<Result<T>> {
    plans
        .par_iter()
        .map(|plan| {
            let (up, down) =
                rayon::join(|| simulate(model, res, plan, 1, t_grid, cfg), || simulate(model, res, plan, 0, t_grid, cfg));
            let curve = snr(&up?.trajectory("up"), &down?.trajectory("down"), res.kappa)?;
            snr_at(&curve, t_star)
                .ok_or_else(|| Error::InvalidParameter("t_star lies outside the time grid".into()))
        })
        .collect()
}

/// Rate of `y(t) ≈ y₀ e^{-Γt}` from a least-squares fit of `ln y`.
pub fn fit_decay_rate<T: Real>(times: &[T], values: &[T]) -> Result<T> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > T::zero())
        .map(|(&t, &v)| (to_f64(t), to_f64(v).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("need at least two positive samples to fit a decay".into()));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + (t - mt) * (y - my), b + (t - mt).powi(2)));
    if den == 0.0 {
        return Err(Error::InvalidParameter("decay fit needs distinct times".into()));
    }
    Ok(lit(-num / den))
}
