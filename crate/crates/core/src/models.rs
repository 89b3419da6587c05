//! Static device Hamiltonians: charge qubit, flopping-mode double dot,
//! transmon and fluxonium.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_error, symmetric_eigen};
use crate::scalar::{c, cabs, cr, lit, to_f64, CMat, Real};

/// Energies and charge-operator matrix elements of a device in its own
/// eigenbasis. Level 0 is the logical ground state, level 1 the excited one.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel<T: Real> {
    pub label: String,
    pub energies: Vec<T>,
    pub charge_op: CMat<T>,
}

impl<T: Real> SystemModel<T> {
    pub fn new(label: impl Into<String>, energies: Vec<T>, charge_op: CMat<T>) -> Result<Self> {
        let m = Self { label: label.into(), energies, charge_op };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Bare qubit splitting `E_1 - E_0`.
    pub fn omega_q(&self) -> T {
        self.energies[1] - self.energies[0]
    }

    pub fn hamiltonian(&self) -> CMat<T> {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|&e| cr(e)),
        ))
    }

    /// Keeps the lowest `m` levels.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m < 2 || m > self.dim() {
            return Err(Error::InvalidParameter(format!("cannot keep {m} of {} levels", self.dim())));
        }
        Ok(Self {
            label: self.label.clone(),
            energies: self.energies[..m].to_vec(),
            charge_op: self.charge_op.view((0, 0), (m, m)).into_owned(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.energies.len();
        if n < 2 {
            return Err(Error::InvalidParameter("a model needs at least two levels".into()));
        }
        if self.charge_op.nrows() != n || self.charge_op.ncols() != n {
            return Err(Error::InvalidParameter("charge operator shape does not match level count".into()));
        }
        let scale = self.energies.iter().fold(T::one(), |a, &e| a.max(e.abs()));
        // degenerate levels may be reordered by charge matrix element
        let slack = scale * lit(1e-10);
        if self.energies.windows(2).any(|w| w[1] < w[0] - slack) {
            return Err(Error::InvalidParameter("energies must be sorted ascending".into()));
        }
        if !(self.omega_q() > T::zero()) {
            return Err(Error::InvalidParameter("qubit splitting E_1 - E_0 must be positive".into()));
        }
        let qmax = self.charge_op.iter().fold(T::zero(), |a, z| a.max(cabs(*z)));
        let tol = qmax * lit::<T>(1e-12).max(crate::scalar::eps::<T>() * lit(64.0));
        if hermiticity_error(&self.charge_op) > tol {
            return Err(Error::InvalidParameter("charge operator is not Hermitian".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeQubitParams {
    pub omega_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloppingParams {
    /// Zeeman splitting.
    pub delta: f64,
    /// Interdot detuning.
    pub eps0: f64,
    /// Spin-conserving tunnelling.
    pub t_sc: f64,
    /// Spin-flip tunnelling.
    pub t_sf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub e_c: f64,
    pub e_j: f64,
    /// External flux in units of the flux quantum.
    pub flux: f64,
    pub n_max: usize,
    pub levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxoniumParams {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    pub flux: f64,
    /// Number of harmonic-oscillator states in the basis.
    pub basis: usize,
    pub levels: usize,
}

impl FloppingParams {
    /// Spin-like regime used for the flopping-mode readout figure.
    pub fn spin_like() -> Self {
        Self { delta: 1.0, eps0: 0.0, t_sc: 1.0, t_sf: 1.3 }
    }

    /// Charge-like regime.
    pub fn charge_like() -> Self {
        Self { delta: 1.0, eps0: 0.0, t_sc: -0.35, t_sf: 0.43 }
    }
}

impl TransmonParams {
    pub fn table() -> Self {
        Self { e_c: 0.0077, e_j: 1.0, flux: 0.128, n_max: 20, levels: 25 }
    }

    pub fn e_j_eff(&self) -> f64 {
        self.e_j * (std::f64::consts::PI * self.flux).cos().abs()
    }
}

impl FluxoniumParams {
    pub fn table() -> Self {
        Self { e_c: 0.25, e_j: 1.0, e_l: 0.25, flux: 0.5, basis: 100, levels: 10 }
    }
}

fn check_convergence<T: Real>(coarse: &SystemModel<T>, fine: &SystemModel<T>, what: &str) -> Result<()> {
    let tol = lit::<T>(1e-9).max(crate::scalar::eps::<T>() * lit(1e3));
    let wc = coarse.omega_q();
    let wf = fine.omega_q();
    let dw = ((wc - wf) / wf).abs();
    let nc = cabs(coarse.charge_op[(0, 1)]);
    let nf = cabs(fine.charge_op[(0, 1)]);
    let dn = if nf > T::zero() { ((nc - nf) / nf).abs() } else { (nc - nf).abs() };
    if dw > tol || dn > tol {
        return Err(Error::BasisNotConverged(format!(
            "{what}: doubling the basis changes E_1 - E_0 by {:e} and |Q_01| by {:e} (relative)",
            to_f64(dw),
            to_f64(dn)
        )));
    }
    Ok(())
}

pub fn build_charge_qubit<T: Real>(omega_q: T) -> Result<SystemModel<T>> {
    if !(omega_q > T::zero()) {
        return Err(Error::InvalidParameter("charge qubit needs omega_q > 0".into()));
    }
    let half = omega_q * lit(0.5);
    let mut q = CMat::<T>::zeros(2, 2);
    q[(0, 1)] = cr(T::one());
    q[(1, 0)] = cr(T::one());
    SystemModel::new("charge_qubit", vec![-half, half], q)
}

/// Flopping-mode Hamiltonian in the product basis {L↑, L↓, R↑, R↓}.
pub fn flopping_hamiltonian<T: Real>(p: &FloppingParams) -> (CMat<T>, CMat<T>) {
    let z = c(T::zero(), T::zero());
    let one = cr(T::one());
    let i = c(T::zero(), T::one());
    let sx = CMat::<T>::from_row_slice(2, 2, &[z, one, one, z]);
    let sy = CMat::<T>::from_row_slice(2, 2, &[z, -i, i, z]);
    let sz = CMat::<T>::from_row_slice(2, 2, &[one, z, z, -one]);
    let id = CMat::<T>::identity(2, 2);
    let h = id.kronecker(&sz) * cr(lit::<T>(p.delta / 2.0))
        + sz.kronecker(&id) * cr(lit::<T>(p.eps0 / 2.0))
        + sx.kronecker(&id) * cr(lit::<T>(p.t_sc))
        - sy.kronecker(&sy) * cr(lit::<T>(p.t_sf));
    let q = sz.kronecker(&id);
    (h, q)
}

pub fn build_flopping_mode<T: Real>(p: &FloppingParams) -> Result<SystemModel<T>> {
    if !(p.delta > 0.0) {
        return Err(Error::InvalidParameter("flopping mode needs a positive Zeeman splitting".into()));
    }
    let (h, q) = flopping_hamiltonian::<T>(p);
    let (energies, v) = hermitian_eigen(&h);
    let charge = v.adjoint() * q * &v;
    let model = SystemModel { label: "flopping_mode".into(), energies, charge_op: charge };
    let model = sort_degenerate(model);
    model.validate()?;
    Ok(model)
}

/// Charge-basis transmon Hamiltonian `4 E_C n² - E_J,eff cos φ` and the
/// charge operator.
pub fn transmon_hamiltonian<T: Real>(p: &TransmonParams, n_max: usize) -> (DMatrix<T>, DMatrix<T>) {
    let dim = 2 * n_max + 1;
    let e_c = lit::<T>(p.e_c);
    let hop = lit::<T>(p.e_j_eff() * 0.5);
    let mut h = DMatrix::<T>::zeros(dim, dim);
    let mut n = DMatrix::<T>::zeros(dim, dim);
    for k in 0..dim {
        let q = lit::<T>(k as f64 - n_max as f64);
        h[(k, k)] = lit::<T>(4.0) * e_c * q * q;
        n[(k, k)] = q;
        if k + 1 < dim {
            h[(k, k + 1)] = -hop;
            h[(k + 1, k)] = -hop;
        }
    }
    (h, n)
}

fn transmon_raw<T: Real>(p: &TransmonParams, n_max: usize) -> Result<SystemModel<T>> {
    let (h, n) = transmon_hamiltonian::<T>(p, n_max);
    let (vals, v) = symmetric_eigen(&h);
    let m = p.levels;
    let vm = v.columns(0, m).into_owned();
    let nm = vm.transpose() * n * &vm;
    let model = SystemModel {
        label: "transmon".into(),
        energies: vals[..m].to_vec(),
        charge_op: nm.map(cr),
    };
    Ok(sort_degenerate(model))
}

pub fn build_transmon<T: Real>(p: &TransmonParams) -> Result<SystemModel<T>> {
    if !(p.e_c > 0.0) || !(p.e_j >= 0.0) {
        return Err(Error::InvalidParameter("transmon needs E_C > 0 and E_J >= 0".into()));
    }
    if p.levels < 2 || p.levels > 2 * p.n_max + 1 {
        return Err(Error::InvalidParameter(format!(
            "transmon keeps {} levels but the charge basis has {}",
            p.levels,
            2 * p.n_max + 1
        )));
    }
    let model = transmon_raw::<T>(p, p.n_max)?;
    let fine = transmon_raw::<T>(p, 2 * p.n_max)?;
    check_convergence(&model, &fine, "transmon charge cutoff")?;
    model.validate()?;
    Ok(model)
}

/// Harmonic-oscillator basis matrices for the fluxonium: `(H, n)` with `H`
/// real symmetric and `n = i n_zpf (b† - b)` returned through its real
/// factor `n_zpf (b† - b)`.
pub fn fluxonium_hamiltonian<T: Real>(p: &FluxoniumParams, basis: usize) -> (DMatrix<T>, DMatrix<T>) {
    let phi_zpf = (2.0 * p.e_c / p.e_l).powf(0.25);
    let n_zpf = 0.5 / phi_zpf;
    let omega_p = (8.0 * p.e_c * p.e_l).sqrt();
    let mut phi = DMatrix::<T>::zeros(basis, basis);
    let mut n_re = DMatrix::<T>::zeros(basis, basis);
    for k in 0..basis.saturating_sub(1) {
        let s = ((k + 1) as f64).sqrt();
        phi[(k, k + 1)] = lit(phi_zpf * s);
        phi[(k + 1, k)] = lit(phi_zpf * s);
        // (b† - b): +√(k+1) below the diagonal, -√(k+1) above
        n_re[(k + 1, k)] = lit(n_zpf * s);
        n_re[(k, k + 1)] = lit(-n_zpf * s);
    }
    let (phi_vals, phi_vecs) = symmetric_eigen(&phi);
    let shift = 2.0 * std::f64::consts::PI * p.flux;
    let cos_diag = DMatrix::<T>::from_diagonal(&nalgebra::DVector::from_iterator(
        basis,
        phi_vals.iter().map(|&x| (x - lit::<T>(shift)).cos()),
    ));
    let cos_op = &phi_vecs * cos_diag * phi_vecs.transpose();
    let mut h = cos_op * lit::<T>(-p.e_j);
    for k in 0..basis {
        h[(k, k)] += lit::<T>(omega_p * (k as f64 + 0.5));
    }
    (h, n_re)
}

fn fluxonium_raw<T: Real>(p: &FluxoniumParams, basis: usize) -> Result<SystemModel<T>> {
    let (h, n_re) = fluxonium_hamiltonian::<T>(p, basis);
    let (vals, v) = symmetric_eigen(&h);
    let m = p.levels;
    let vm = v.columns(0, m).into_owned();
    let nm = vm.transpose() * n_re * &vm;
    let model = SystemModel {
        label: "fluxonium".into(),
        energies: vals[..m].to_vec(),
        charge_op: nm.map(|x| c(T::zero(), x)),
    };
    Ok(sort_degenerate(model))
}

pub fn build_fluxonium<T: Real>(p: &FluxoniumParams) -> Result<SystemModel<T>> {
    if !(p.e_c > 0.0) || !(p.e_l > 0.0) || !(p.e_j >= 0.0) {
        return Err(Error::InvalidParameter("fluxonium needs E_C > 0, E_L > 0 and E_J >= 0".into()));
    }
    if p.levels < 2 || p.levels > p.basis {
        return Err(Error::InvalidParameter(format!(
            "fluxonium keeps {} levels but the oscillator basis has {}",
            p.levels, p.basis
        )));
    }
    let model = fluxonium_raw::<T>(p, p.basis)?;
    let fine = fluxonium_raw::<T>(p, 2 * p.basis)?;
    check_convergence(&model, &fine, "fluxonium oscillator basis")?;
    model.validate()?;
    Ok(model)
}

/// Within groups of (numerically) degenerate levels, orders states by
/// descending `|⟨0|Q|j⟩|`.
fn sort_degenerate<T: Real>(model: SystemModel<T>) -> SystemModel<T> {
    let n = model.dim();
    let scale = model.energies.iter().fold(T::one(), |a, &e| a.max(e.abs()));
    let tol = scale * lit(1e-10);
    let mut order: Vec<usize> = (0..n).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && model.energies[end] - model.energies[start] <= tol {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&a, &b| {
                let qa = if a == 0 { T::zero() } else { cabs(model.charge_op[(0, a)]) };
                let qb = if b == 0 { T::zero() } else { cabs(model.charge_op[(0, b)]) };
                qb.partial_cmp(&qa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
            });
        }
        start = end;
    }
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return model;
    }
    let energies = order.iter().map(|&i| model.energies[i]).collect();
    let charge_op = CMat::from_fn(n, n, |i, j| model.charge_op[(order[i], order[j])]);
    SystemModel { label: model.label, energies, charge_op }
}

/// Large-`E_J/E_C` reference values for the transmon.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmonAsymptotics {
    pub energies: Vec<f64>,
    /// `|⟨j+1|n|j⟩|` for `j = 0..levels-1`.
    pub charge_elements: Vec<f64>,
}

pub fn transmon_asymptotics(e_c: f64, e_j_eff: f64, levels: usize) -> TransmonAsymptotics {
    let plasma = (8.0 * e_j_eff * e_c).sqrt();
    let energies = (0..levels)
        .map(|j| {
            let j = j as f64;
            -e_j_eff + plasma * (j + 0.5) - e_c / 12.0 * (6.0 * j * j + 6.0 * j + 3.0)
        })
        .collect();
    let zpf = (e_j_eff / (8.0 * e_c)).powf(0.25);
    let charge_elements = (0..levels.saturating_sub(1))
        .map(|j| ((j as f64 + 1.0) / 2.0).sqrt() * zpf)
        .collect();
    TransmonAsymptotics { energies, charge_elements }
}
