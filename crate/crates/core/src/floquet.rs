//! Floquet quasi-energies and modes of a periodically driven system in the
//! extended (replica) space, with continuation of the zero-replica branches
//! along the drive amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, BlockTridiagonal, EigenPair, SolverOptions};
use crate::models::SystemModel;
use crate::scalar::{cabs, cr, lit, to_f64, CMat, CVec, Real, C};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloquetConfig {
    /// Replicas `p = -n_rep ..= n_rep` are kept.
    pub n_rep: usize,
    /// Largest continuation step in the drive amplitude, in units of `ω_d`.
    pub max_step: f64,
    pub overlap_threshold: f64,
    pub max_bisections: usize,
    /// Largest weight tolerated on the two outermost replicas at each end.
    pub edge_tol: f64,
    /// Relative change of tracked quasi-energies tolerated when `n_rep` doubles.
    pub convergence_tol: f64,
    /// Levels whose zero-replica branches are followed. `None` picks a
    /// default from the model size.
    pub levels: Option<Vec<usize>>,
    pub max_dim: usize,
    pub dense_max: usize,
}

impl Default for FloquetConfig {
    fn default() -> Self {
        Self {
            n_rep: 41,
            max_step: 2.5e-3,
            overlap_threshold: 0.5,
            max_bisections: 6,
            edge_tol: 1e-6,
            convergence_tol: 1e-6,
            levels: None,
            max_dim: 20_000,
            dense_max: SolverOptions::default().dense_max,
        }
    }
}

impl FloquetConfig {
    /// Defaults with the replica count used for the given device label.
    pub fn for_device(label: &str) -> Self {
        Self { n_rep: default_n_rep(label), ..Self::default() }
    }

    pub fn tracked_levels(&self, dim: usize) -> Vec<usize> {
        match &self.levels {
            Some(l) => l.clone(),
            None if dim <= 4 => (0..dim).collect(),
            None => (0..3).collect(),
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { dense_max: self.dense_max, ..SolverOptions::default() }
    }
}

pub fn default_n_rep(label: &str) -> usize {
    match label {
        "transmon" => 51,
        "flopping_mode" | "fluxonium" => 31,
        _ => 41,
    }
}

/// Floquet matrix in the replica basis `|p) ⊗ |j⟩`, `p = -n_rep ..= n_rep`
/// ascending. Diagonal blocks are `H_sys + p ω_d`; the block coupling `p` to
/// `p + 1` is `(𝒜/2) Q` above the diagonal and `(𝒜*/2) Q` below it.
pub fn build_floquet_matrix<T: Real>(
    model: &SystemModel<T>,
    amplitude: C<T>,
    omega_d: T,
    n_rep: usize,
) -> Result<BlockTridiagonal<T>> {
    if !(omega_d > T::zero()) {
        return Err(Error::InvalidParameter("drive frequency must be positive".into()));
    }
    let np = 2 * n_rep + 1;
    let h = model.hamiltonian();
    let mut diag = Vec::with_capacity(np);
    for k in 0..np {
        let p = lit::<T>(k as f64 - n_rep as f64);
        let mut d = h.clone();
        for i in 0..model.dim() {
            d[(i, i)] += cr(p * omega_d);
        }
        diag.push(d);
    }
    let half = cr(lit::<T>(0.5));
    let coupling: CMat<T> = &model.charge_op * (amplitude.conj() * half);
    let lower = vec![coupling; np - 1];
    Ok(BlockTridiagonal::new(diag, lower))
}

/// Continued zero-replica branches on a grid of real drive amplitudes.
#[derive(Debug, Clone)]
pub struct FloquetSpectrum<T: Real> {
    pub omega_d: T,
    pub n_rep: usize,
    pub levels: Vec<usize>,
    pub amplitudes: Vec<T>,
    /// `[point][branch]`
    pub quasi_energies: Vec<Vec<T>>,
    pub modes: Vec<Vec<CVec<T>>>,
    pub replica_index: Vec<Vec<i64>>,
    pub weight_p0: Vec<Vec<T>>,
    pub edge_weight: Vec<Vec<T>>,
}

impl<T: Real> FloquetSpectrum<T> {
    pub fn branch(&self, level: usize) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    /// Index of the grid point equal to `a` (within a relative 1e-12).
    pub fn point(&self, a: T) -> Option<usize> {
        let tol = lit::<T>(1e-12) * a.abs().max(T::one());
        self.amplitudes.iter().position(|&x| (x - a).abs() <= tol)
    }

    pub fn quasi_energy(&self, level: usize, a: T) -> Option<T> {
        Some(self.quasi_energies[self.point(a)?][self.branch(level)?])
    }

    /// Mode `|u_j(t = 0)⟩ = Σ_p |u_{j,p}⟩` of a tracked level at grid point `k`.
    pub fn mode_at_t0(&self, level: usize, k: usize) -> Option<CVec<T>> {
        let b = self.branch(level)?;
        Some(mode_at_t0(&self.modes[k][b], self.n_rep))
    }
}

pub fn mode_at_t0<T: Real>(v: &CVec<T>, n_rep: usize) -> CVec<T> {
    let np = 2 * n_rep + 1;
    let dim = v.len() / np;
    let mut out = CVec::<T>::zeros(dim);
    for p in 0..np {
        out += v.rows(p * dim, dim);
    }
    out
}

fn block_weights<T: Real>(v: &CVec<T>, np: usize) -> Vec<T> {
    let dim = v.len() / np;
    (0..np).map(|p| v.rows(p * dim, dim).iter().fold(T::zero(), |a, z| a + z.norm_sqr())).collect()
}

#[derive(Clone)]
struct Branch<T: Real> {
    energy: T,
    vector: CVec<T>,
}

/// Follows the zero-replica branch of each tracked level from `𝒜 = 0`
/// across `grid` (ascending, starting at 0).
pub fn track_branches<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    grid: &[T],
    cfg: &FloquetConfig,
) -> Result<FloquetSpectrum<T>> {
    if !(omega_d > T::zero()) {
        return Err(Error::InvalidParameter("drive frequency must be positive".into()));
    }
    if grid.is_empty() || grid[0] != T::zero() {
        return Err(Error::InvalidParameter("amplitude grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("amplitude grid must be strictly ascending".into()));
    }
    let levels = cfg.tracked_levels(model.dim());
    if levels.is_empty() || levels.iter().any(|&l| l >= model.dim()) {
        return Err(Error::InvalidParameter("tracked levels out of range".into()));
    }
    let np = 2 * cfg.n_rep + 1;
    let dim = np * model.dim();
    if dim > cfg.max_dim {
        return Err(Error::DimensionTooLarge { dim, cap: cfg.max_dim });
    }

    let mut current: Vec<Branch<T>> = levels
        .iter()
        .map(|&j| {
            let mut v = CVec::<T>::zeros(dim);
            v[cfg.n_rep * model.dim() + j] = cr(T::one());
            Branch { energy: model.energies[j], vector: v }
        })
        .collect();

    let mut spec = FloquetSpectrum {
        omega_d,
        n_rep: cfg.n_rep,
        levels: levels.clone(),
        amplitudes: Vec::with_capacity(grid.len()),
        quasi_energies: Vec::with_capacity(grid.len()),
        modes: Vec::with_capacity(grid.len()),
        replica_index: Vec::with_capacity(grid.len()),
        weight_p0: Vec::with_capacity(grid.len()),
        edge_weight: Vec::with_capacity(grid.len()),
    };
    record(&mut spec, T::zero(), &current, np, cfg)?;

    let step = lit::<T>(cfg.max_step) * omega_d;
    let mut a_prev = T::zero();
    for &a in &grid[1..] {
        let n_sub = to_f64((a - a_prev) / step).ceil().max(1.0) as usize;
        for s in 1..=n_sub {
            let b = if s == n_sub { a } else { a_prev + (a - a_prev) * lit(s as f64 / n_sub as f64) };
            let a0 = if s == 1 { a_prev } else { a_prev + (a - a_prev) * lit((s - 1) as f64 / n_sub as f64) };
            current = advance(model, omega_d, &current, a0, b, cfg, 0)?;
        }
        record(&mut spec, a, &current, np, cfg)?;
        a_prev = a;
    }
    Ok(spec)
}

fn record<T: Real>(spec: &mut FloquetSpectrum<T>, a: T, branches: &[Branch<T>], np: usize, cfg: &FloquetConfig) -> Result<()> {
    let mut eps = Vec::with_capacity(branches.len());
    let mut modes = Vec::with_capacity(branches.len());
    let mut idx = Vec::with_capacity(branches.len());
    let mut w0 = Vec::with_capacity(branches.len());
    let mut edge = Vec::with_capacity(branches.len());
    for (b, level) in branches.iter().zip(&spec.levels) {
        let w = block_weights(&b.vector, np);
        let e = w[0] + w[1] + w[np - 1] + w[np - 2];
        if to_f64(e) > cfg.edge_tol {
            return Err(Error::ReplicaNotConverged(format!(
                "level {level} at A = {:e} has weight {:e} on the outermost replicas; increase n_rep",
                to_f64(a),
                to_f64(e)
            )));
        }
        let mut best = 0;
        for (p, &x) in w.iter().enumerate() {
            if x > w[best] {
                best = p;
            }
        }
        eps.push(b.energy);
        modes.push(b.vector.clone());
        idx.push(best as i64 - cfg.n_rep as i64);
        w0.push(w[cfg.n_rep]);
        edge.push(e);
    }
    spec.amplitudes.push(a);
    spec.quasi_energies.push(eps);
    spec.modes.push(modes);
    spec.replica_index.push(idx);
    spec.weight_p0.push(w0);
    spec.edge_weight.push(edge);
    Ok(())
}

fn advance<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    prev: &[Branch<T>],
    a0: T,
    a1: T,
    cfg: &FloquetConfig,
    depth: usize,
) -> Result<Vec<Branch<T>>> {
    let candidates = candidates(model, omega_d, prev, a1, cfg)?;
    match assign(prev, &candidates, cfg.overlap_threshold) {
        Some(next) => Ok(next),
        None if depth < cfg.max_bisections => {
            let mid = (a0 + a1) * lit(0.5);
            let half = advance(model, omega_d, prev, a0, mid, cfg, depth + 1)?;
            advance(model, omega_d, &half, mid, a1, cfg, depth + 1)
        }
        None => Err(Error::AmbiguousBranch {
            amplitude: to_f64(a1),
            detail: format!("overlap below {} after {} bisections", cfg.overlap_threshold, cfg.max_bisections),
        }),
    }
}

/// Eigenpairs near each previous quasi-energy, at most half a drive period
/// away so that every level contributes at most one replica per branch.
///
/// With `r = |(H - ε_prev) v_prev|`, eigenvectors further than `δ` from
/// `ε_prev` carry at most `(r/δ)²` of the weight of `v_prev`. Taking
/// `δ ≥ 8 r` keeps every eigenvector that could pass the overlap threshold.
fn candidates<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    prev: &[Branch<T>],
    a: T,
    cfg: &FloquetConfig,
) -> Result<Vec<EigenPair<T>>> {
    let h = build_floquet_matrix(model, cr(a), omega_d, cfg.n_rep)?;
    let half = omega_d * lit(0.5);
    let floor = omega_d * lit(1e-6);
    let mut spans: Vec<(T, T, usize)> = prev
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let r = (h.apply_vec(&b.vector) - &b.vector * cr(b.energy)).norm();
            let d = (r * lit(8.0)).max(floor).min(half);
            (b.energy - d, b.energy + d, i)
        })
        .collect();
    spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut windows: Vec<(T, T, Vec<usize>)> = Vec::new();
    for (lo, hi, i) in spans {
        match windows.last_mut() {
            Some(w) if lo <= w.1 => {
                w.1 = w.1.max(hi);
                w.2.push(i);
            }
            _ => windows.push((lo, hi, vec![i])),
        }
    }
    let opts = cfg.solver();
    let mut out = Vec::new();
    if h.dim() <= opts.dense_max {
        let (vals, vecs) = hermitian_eigen(&h.to_dense());
        for (i, &v) in vals.iter().enumerate() {
            if windows.iter().any(|w| v >= w.0 && v < w.1) {
                // the Rayleigh quotient is weighted by the mode itself, so it is not
                // limited by the far replica diagonal
                let x = vecs.column(i).into_owned();
                let value = x.dotc(&h.apply_vec(&x)).re;
                out.push(EigenPair { value, vector: x, residual: T::zero() });
            }
        }
        return Ok(out);
    }
    let found: Vec<Result<Vec<EigenPair<T>>>> = windows
        .par_iter()
        .map(|(lo, hi, members)| {
            let guess: Vec<CVec<T>> = members.iter().map(|&i| prev[i].vector.clone()).collect();
            h.eigenpairs_near(*lo, *hi, &guess, &opts)
        })
        .collect();
    for f in found {
        out.extend(f?);
    }
    Ok(out)
}

/// Greedy maximum-overlap assignment of candidates to branches.
fn assign<T: Real>(prev: &[Branch<T>], cand: &[EigenPair<T>], threshold: f64) -> Option<Vec<Branch<T>>> {
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(prev.len() * cand.len());
    for (i, b) in prev.iter().enumerate() {
        for (k, c) in cand.iter().enumerate() {
            pairs.push((cabs(b.vector.dotc(&c.vector)), i, k));
        }
    }
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    let mut taken_b = vec![None; prev.len()];
    let mut taken_c = vec![false; cand.len()];
    for (ov, i, k) in pairs {
        if taken_b[i].is_some() || taken_c[k] {
            continue;
        }
        if to_f64(ov) < threshold {
            return None;
        }
        taken_b[i] = Some(k);
        taken_c[k] = true;
    }
    let mut out = Vec::with_capacity(prev.len());
    for (i, t) in taken_b.iter().enumerate() {
        let k = (*t)?;
        let mut v = cand[k].vector.clone();
        // keep the phase continuous along the branch
        let ov = prev[i].vector.dotc(&v);
        let r = cabs(ov);
        if r > T::zero() {
            v *= ov.conj() / cr(r);
        }
        out.push(Branch { energy: cand[k].value, vector: v });
    }
    Some(out)
}

/// Tracked spectrum at a single amplitude, continued from `𝒜 = 0`, with a
/// replica-doubling convergence check.
pub fn spectrum_at<T: Real>(model: &SystemModel<T>, amplitude: T, omega_d: T, cfg: &FloquetConfig) -> Result<FloquetSpectrum<T>> {
    let grid = if amplitude == T::zero() { vec![T::zero()] } else { vec![T::zero(), amplitude.abs()] };
    let spec = track_branches(model, omega_d, &grid, cfg)?;
    let change = replica_convergence(model, omega_d, amplitude.abs(), cfg, &spec)?;
    if to_f64(change) > cfg.convergence_tol {
        return Err(Error::ReplicaNotConverged(format!(
            "doubling n_rep moves tracked quasi-energies by {:e} (relative)",
            to_f64(change)
        )));
    }
    Ok(spec)
}

/// Largest relative change of the tracked quasi-energies at `amplitude`
/// when the replica count doubles. `reference` must contain that amplitude.
pub fn replica_convergence<T: Real>(
    model: &SystemModel<T>,
    omega_d: T,
    amplitude: T,
    cfg: &FloquetConfig,
    reference: &FloquetSpectrum<T>,
) -> Result<T> {
    let k = reference
        .point(amplitude)
        .ok_or_else(|| Error::InvalidParameter("amplitude not on the reference grid".into()))?;
    let doubled = FloquetConfig { n_rep: 2 * cfg.n_rep, levels: Some(reference.levels.clone()), ..cfg.clone() };
    let grid = if amplitude == T::zero() { vec![T::zero()] } else { vec![T::zero(), amplitude] };
    let other = track_branches(model, omega_d, &grid, &doubled)?;
    let last = other.amplitudes.len() - 1;
    let mut worst = T::zero();
    for (&x, &y) in reference.quasi_energies[k].iter().zip(&other.quasi_energies[last]) {
        let scale = x.abs().max(omega_d);
        worst = worst.max((x - y).abs() / scale);
    }
    Ok(worst)
}

/// Polarization of bare level `j` in the dressed logical basis,
/// `|⟨u_1(0)|j⟩|² - |⟨u_0(0)|j⟩|²`.
pub fn dressed_initial_polarization<T: Real>(
    model: &SystemModel<T>,
    amplitude: T,
    omega_d: T,
    cfg: &FloquetConfig,
    level: usize,
) -> Result<T> {
    if level >= model.dim() {
        return Err(Error::InvalidParameter(format!("level {level} out of range")));
    }
    let mut levels = cfg.tracked_levels(model.dim());
    for l in [0, 1] {
        if !levels.contains(&l) {
            levels.push(l);
        }
    }
    let cfg = FloquetConfig { levels: Some(levels), ..cfg.clone() };
    let grid = if amplitude == T::zero() { vec![T::zero()] } else { vec![T::zero(), amplitude.abs()] };
    let spec = track_branches(model, omega_d, &grid, &cfg)?;
    let k = spec.amplitudes.len() - 1;
    polarization_from_spectrum(&spec, k, level)
}

pub fn polarization_from_spectrum<T: Real>(spec: &FloquetSpectrum<T>, k: usize, level: usize) -> Result<T> {
    let u0 = spec.mode_at_t0(0, k).ok_or_else(|| Error::InvalidParameter("level 0 not tracked".into()))?;
    let u1 = spec.mode_at_t0(1, k).ok_or_else(|| Error::InvalidParameter("level 1 not tracked".into()))?;
    if level >= u0.len() {
        return Err(Error::InvalidParameter(format!("level {level} out of range")));
    }
    Ok(u1[level].norm_sqr() - u0[level].norm_sqr())
}

/// Uniform continuation grid `0, h, 2h, …, a_max` with `h ≤ max_step`.
pub fn uniform_grid<T: Real>(a_max: T, max_step: T) -> Vec<T> {
    if a_max <= T::zero() {
        return vec![T::zero()];
    }
    let n = to_f64(a_max / max_step).ceil().max(1.0) as usize;
    (0..=n).map(|k| a_max * lit(k as f64 / n as f64)).collect()
}
