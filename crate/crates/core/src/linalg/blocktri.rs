use nalgebra::SymmetricEigen;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fix_gauge, hermitian_eigen, BandLu};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cr, lit, to_f64, CMat, CVec, Real};

/// Hermitian matrix made of `nblocks` square blocks of size `block` on the
/// diagonal, coupled only to nearest neighbours.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal<T: Real> {
    pub block: usize,
    pub diag: Vec<CMat<T>>,
    /// `lower[p]` is the block at row `p + 1`, column `p`.
    pub lower: Vec<CMat<T>>,
}

#[derive(Debug, Clone)]
pub struct EigenPair<T: Real> {
    pub value: T,
    pub vector: CVec<T>,
    pub residual: T,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Matrices up to this dimension are diagonalized densely.
    pub dense_max: usize,
    /// Block size of the shift-invert Krylov iteration.
    pub block_size: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dense_max: 96, block_size: 4, seed: 0x5eed_f10c }
    }
}

/// Block LDL^H factorization of `H - shift`.
#[derive(Debug, Clone)]
pub struct BlockLdl<T: Real> {
    block: usize,
    inv: Vec<CMat<T>>,
    /// `mult[p]` multiplies block `p - 1` into block `p` (`mult[0]` unused).
    mult: Vec<CMat<T>>,
    mult_adj: Vec<CMat<T>>,
    /// Number of negative eigenvalues of `H - shift` (Sylvester inertia).
    pub negatives: usize,
    /// Smallest |eigenvalue| over all Schur complement blocks.
    pub min_pivot: T,
}

impl<T: Real> BlockTridiagonal<T> {
    pub fn new(diag: Vec<CMat<T>>, lower: Vec<CMat<T>>) -> Self {
        let block = diag.first().map(|d| d.nrows()).unwrap_or(0);
        assert!(lower.len() + 1 == diag.len() || diag.is_empty());
        Self { block, diag, lower }
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        self.block * self.diag.len()
    }

    pub fn to_dense(&self) -> CMat<T> {
        let b = self.block;
        let mut m = CMat::<T>::zeros(self.dim(), self.dim());
        for (p, d) in self.diag.iter().enumerate() {
            m.view_mut((p * b, p * b), (b, b)).copy_from(d);
        }
        for (p, l) in self.lower.iter().enumerate() {
            m.view_mut(((p + 1) * b, p * b), (b, b)).copy_from(l);
            m.view_mut((p * b, (p + 1) * b), (b, b)).copy_from(&l.adjoint());
        }
        m
    }

    /// `H x` for a block of column vectors.
    pub fn apply(&self, x: &CMat<T>) -> CMat<T> {
        let b = self.block;
        let np = self.nblocks();
        let k = x.ncols();
        let mut y = CMat::<T>::zeros(self.dim(), k);
        for p in 0..np {
            let xp = x.rows(p * b, b);
            let mut acc = &self.diag[p] * xp;
            if p > 0 {
                acc += &self.lower[p - 1] * x.rows((p - 1) * b, b);
            }
            if p + 1 < np {
                acc += self.lower[p].ad_mul(&x.rows((p + 1) * b, b));
            }
            y.rows_mut(p * b, b).copy_from(&acc);
        }
        y
    }

    pub fn apply_vec(&self, x: &CVec<T>) -> CVec<T> {
        let m = CMat::<T>::from_column_slice(x.len(), 1, x.as_slice());
        let y = self.apply(&m);
        y.column(0).into_owned()
    }

    /// Upper bound on the spectral radius (maximum absolute row sum).
    pub fn norm_bound(&self) -> T {
        let b = self.block;
        let np = self.nblocks();
        let mut best = T::zero();
        for p in 0..np {
            for i in 0..b {
                let mut s = T::zero();
                for j in 0..b {
                    s += cabs(self.diag[p][(i, j)]);
                    if p > 0 {
                        s += cabs(self.lower[p - 1][(i, j)]);
                    }
                    if p + 1 < np {
                        s += cabs(self.lower[p][(j, i)]);
                    }
                }
                if s > best {
                    best = s;
                }
            }
        }
        best
    }

    pub fn factor(&self, shift: T) -> BlockLdl<T> {
        let b = self.block;
        let np = self.nblocks();
        let mut inv = Vec::with_capacity(np);
        let mut mult = Vec::with_capacity(np);
        let mut mult_adj = Vec::with_capacity(np);
        let mut negatives = 0;
        let mut min_pivot: Option<T> = None;
        let half = cr(lit::<T>(0.5));
        for p in 0..np {
            let mut s = self.diag[p].clone();
            for i in 0..b {
                s[(i, i)] -= cr(shift);
            }
            if p == 0 {
                mult.push(CMat::<T>::zeros(0, 0));
                mult_adj.push(CMat::<T>::zeros(0, 0));
            } else {
                let l = &self.lower[p - 1];
                let m: CMat<T> = l * &inv[p - 1];
                s -= &m * l.adjoint();
                mult_adj.push(m.adjoint());
                mult.push(m);
            }
            let s = (&s + s.adjoint()) * half;
            let eig = SymmetricEigen::new(s);
            let mut scaled = eig.eigenvectors.clone();
            for (j, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam < T::zero() {
                    negatives += 1;
                }
                if min_pivot.is_none_or(|m| lam.abs() < m) {
                    min_pivot = Some(lam.abs());
                }
                let r = cr(T::one() / lam);
                for i in 0..b {
                    scaled[(i, j)] *= r;
                }
            }
            inv.push(scaled * eig.eigenvectors.adjoint());
        }
        BlockLdl { block: b, inv, mult, mult_adj, negatives, min_pivot: min_pivot.unwrap_or_else(T::zero) }
    }

    /// Pivoted band LU of `H - shift`, used for the shift-invert solves.
    pub fn band_lu(&self, shift: T) -> BandLu<T> {
        let b = self.block;
        let kb = 2 * b - 1;
        BandLu::factor(self.dim(), kb, kb, |i, j| {
            let (p, q) = (i / b, j / b);
            let (r, c) = (i % b, j % b);
            if p == q {
                let d = self.diag[p][(r, c)];
                if r == c {
                    d - cr(shift)
                } else {
                    d
                }
            } else if p == q + 1 {
                self.lower[q][(r, c)]
            } else if q == p + 1 {
                self.lower[p][(c, r)].conj()
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: T) -> usize {
        self.factor(x).negatives
    }

    /// All eigenpairs with eigenvalue in `[lo, hi)`, ascending.
    ///
    /// Small matrices go through a dense decomposition. Larger ones use a
    /// shift-invert block Krylov iteration whose result is checked against
    /// the inertia count of the window, so that no eigenvalue is missed.
    pub fn eigenpairs_in(&self, lo: T, hi: T, opts: &SolverOptions) -> Result<Vec<EigenPair<T>>> {
        self.eigenpairs_near(lo, hi, &[], opts)
    }

    /// Same as [`eigenpairs_in`](Self::eigenpairs_in), with approximate
    /// eigenvectors used to seed the Krylov space.
    pub fn eigenpairs_near(&self, lo: T, hi: T, guess: &[CVec<T>], opts: &SolverOptions) -> Result<Vec<EigenPair<T>>> {
        if !(hi > lo) {
            return Err(Error::Eigensolver("empty eigenvalue window".into()));
        }
        if self.dim() <= opts.dense_max {
            return Ok(self.dense_window(lo, hi));
        }
        self.krylov_window(lo, hi, guess, opts)
    }

    fn dense_window(&self, lo: T, hi: T) -> Vec<EigenPair<T>> {
        let (vals, vecs) = hermitian_eigen(&self.to_dense());
        vals.iter()
            .enumerate()
            .filter(|(_, &v)| v >= lo && v < hi)
            .map(|(i, &v)| EigenPair { value: v, vector: vecs.column(i).into_owned(), residual: T::zero() })
            .collect()
    }

    fn krylov_window(&self, lo: T, hi: T, guess: &[CVec<T>], opts: &SolverOptions) -> Result<Vec<EigenPair<T>>> {
        let n = self.dim();
        let scale = self.norm_bound().max(T::one());
        // residuals usually reach `strict`; near dense clusters they can
        // stagnate above it, and `loose` is accepted once they stop improving
        let strict = crate::scalar::eps::<T>() * lit(1e4) * scale;
        let loose = crate::scalar::eps::<T>().sqrt() * lit(1e-2) * scale;
        let width = hi - lo;
        let mut sigma = (lo + hi) * lit(0.5);
        let ((above, below), mut fac) =
            rayon::join(|| rayon::join(|| self.count_below(hi), || self.count_below(lo)), || self.band_lu(sigma));
        let expected = above.saturating_sub(below);
        if expected == 0 {
            return Ok(Vec::new());
        }

        let mut nudge = 0;
        while fac.min_diag() < scale * crate::scalar::eps::<T>() * lit(16.0) && nudge < 4 {
            nudge += 1;
            sigma += width * lit(0.0137);
            fac = self.band_lu(sigma);
        }

        let bs = opts.block_size.max(1).min(n);
        let kmax = n.min(8 * expected + 20 * bs + 40);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut basis = CMat::<T>::zeros(n, 0);
        let mut gram = CMat::<T>::zeros(0, 0);
        let mut start = random_block(&mut rng, n, bs);
        for g in guess.iter().filter(|g| g.len() == n) {
            start = append_columns(&CMat::from_columns(std::slice::from_ref(g)), &start);
        }
        let mut next = orthonormalize_against(&basis, start);
        let mut last_rr = 0;
        let mut best_found = 0;
        let mut prev_worst: Option<T> = None;

        loop {
            if next.ncols() == 0 {
                next = orthonormalize_against(&basis, random_block(&mut rng, n, bs));
                if next.ncols() == 0 {
                    break;
                }
            }
            let hq = self.apply(&next);
            let w = fac.solve(&next);
            let k0 = basis.ncols();
            let kb = next.ncols();
            basis = append_columns(&basis, &next);
            let k = basis.ncols();
            // extend the projection Q^H H Q by the new column block
            let col = basis.ad_mul(&hq);
            let mut g = CMat::<T>::zeros(k, k);
            g.view_mut((0, 0), (k0, k0)).copy_from(&gram);
            g.view_mut((0, k0), (k, kb)).copy_from(&col);
            g.view_mut((k0, 0), (kb, k0)).copy_from(&col.rows(0, k0).adjoint());
            gram = g;

            let due = k >= expected + 2 * bs && (k - last_rr >= (k / 6).max(bs) || k + bs > kmax);
            if due || k >= kmax {
                last_rr = k;
                let found = self.ritz_window(&basis, &gram, lo, hi, loose);
                best_found = best_found.max(found.len());
                if found.len() == expected {
                    let worst = found.iter().fold(T::zero(), |a, p| a.max(p.residual));
                    let stalled = prev_worst.is_some_and(|p| worst > p * lit(0.5));
                    if worst <= strict || stalled || k + bs > kmax {
                        return Ok(found);
                    }
                    prev_worst = Some(worst);
                }
            }
            if k >= kmax {
                break;
            }
            let mut v = w;
            v = orthonormalize_against(&basis, v);
            next = v;
        }
        Err(Error::Eigensolver(format!(
            "found {best_found} of {expected} eigenvalues in [{:e}, {:e}) for dimension {n}",
            to_f64(lo),
            to_f64(hi)
        )))
    }

    /// Rayleigh-Ritz extraction with `H` itself on the shift-invert Krylov
    /// space; spurious interior Ritz values are rejected by their residual.
    fn ritz_window(&self, basis: &CMat<T>, gram: &CMat<T>, lo: T, hi: T, tol: T) -> Vec<EigenPair<T>> {
        let (theta, y) = hermitian_eigen(gram);
        let mut out = Vec::new();
        for (i, &approx) in theta.iter().enumerate() {
            let margin = (hi - lo) * lit(1e-3);
            if approx < lo - margin || approx >= hi + margin {
                continue;
            }
            let mut x: CVec<T> = basis * y.column(i);
            let nrm = x.norm();
            x /= cr(nrm);
            let hx = self.apply_vec(&x);
            let value = x.dotc(&hx).re;
            let r = (&hx - &x * cr(value)).norm();
            if value < lo || value >= hi || r > tol {
                continue;
            }
            fix_gauge(&mut x);
            out.push(EigenPair { value, vector: x, residual: r });
        }
        out.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal));
        out
    }
}

impl<T: Real> BlockLdl<T> {
    /// Solves `(H - shift) X = B` for a block of right-hand sides.
    pub fn solve(&self, rhs: &CMat<T>) -> CMat<T> {
        let b = self.block;
        let np = self.inv.len();
        let k = rhs.ncols();
        let mut z: Vec<CMat<T>> = Vec::with_capacity(np);
        for p in 0..np {
            let mut zp: CMat<T> = rhs.rows(p * b, b).into_owned();
            if p > 0 {
                zp -= &self.mult[p] * &z[p - 1];
            }
            z.push(zp);
        }
        let mut x = CMat::<T>::zeros(np * b, k);
        let mut prev: Option<CMat<T>> = None;
        for p in (0..np).rev() {
            let mut xp = &self.inv[p] * &z[p];
            if let Some(nx) = prev.as_ref() {
                xp -= &self.mult_adj[p + 1] * nx;
            }
            x.rows_mut(p * b, b).copy_from(&xp);
            prev = Some(xp);
        }
        x
    }
}

fn random_block<T: Real>(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMat<T> {
    CMat::<T>::from_fn(n, k, |_, _| {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        Complex::new(lit(re), lit(im))
    })
}

fn append_columns<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let n = a.nrows().max(b.nrows());
    let mut out = CMat::<T>::zeros(n, a.ncols() + b.ncols());
    if a.ncols() > 0 {
        out.columns_mut(0, a.ncols()).copy_from(a);
    }
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Orthogonalizes the columns of `v` against `basis` (twice) and among
/// themselves, dropping columns that become numerically dependent.
fn orthonormalize_against<T: Real>(basis: &CMat<T>, v: CMat<T>) -> CMat<T> {
    let mut v = v;
    for _ in 0..2 {
        if basis.ncols() > 0 {
            let proj = basis.ad_mul(&v);
            v -= basis * proj;
        }
    }
    let drop_tol = crate::scalar::eps::<T>().sqrt() * lit(1e-3);
    let mut kept: Vec<CVec<T>> = Vec::new();
    for j in 0..v.ncols() {
        let mut col: CVec<T> = v.column(j).into_owned();
        let before = col.norm();
        if before == T::zero() {
            continue;
        }
        for _ in 0..2 {
            for q in &kept {
                let c = q.dotc(&col);
                col -= q * c;
            }
            if basis.ncols() > 0 {
                let proj = basis.ad_mul(&col);
                col -= basis * proj;
            }
        }
        let after = col.norm();
        if after <= drop_tol * before {
            continue;
        }
        col /= cr(after);
        kept.push(col);
    }
    let mut out = CMat::<T>::zeros(v.nrows(), kept.len());
    for (j, q) in kept.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}
