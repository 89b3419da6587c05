use crate::scalar::{cabs, CMat, Real, C};

/// LU factorization with partial pivoting of a square band matrix with
/// `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl` columns
/// hold the fill-in produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu<T: Real> {
    n: usize,
    kl: usize,
    width: usize,
    rows: Vec<C<T>>,
    piv: Vec<usize>,
    /// `mult[k * kl + r]` eliminates row `k + 1 + r` with pivot row `k`.
    mult: Vec<C<T>>,
}

impl<T: Real> BandLu<T> {
    /// `entry(i, j)` is called for every `(i, j)` with `|i - j|` inside the band.
    pub fn factor(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> C<T>) -> Self {
        let width = 2 * kl + ku + 1;
        let zero = C::new(T::zero(), T::zero());
        let mut rows = vec![zero; n * width];
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(n - 1);
            for j in j0..=j1 {
                rows[i * width + j + kl - i] = entry(i, j);
            }
        }
        let mut lu = Self { n, kl, width, rows, piv: vec![0; n], mult: vec![zero; n * kl] };
        lu.eliminate(ku);
        lu
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, ku: usize) {
        let (n, kl) = (self.n, self.kl);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = cabs(self.rows[self.at(k, k)]);
            for i in k + 1..=last {
                let v = cabs(self.rows[self.at(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.at(k, j), self.at(p, j));
                    self.rows.swap(a, b);
                }
            }
            let pivot = self.rows[self.at(k, k)];
            if best == T::zero() {
                continue;
            }
            for i in k + 1..=last {
                let l = self.rows[self.at(i, k)] / pivot;
                self.mult[k * kl + (i - k - 1)] = l;
                if l.re == T::zero() && l.im == T::zero() {
                    continue;
                }
                for j in k + 1..=jmax {
                    let u = self.rows[self.at(k, j)];
                    let idx = self.at(i, j);
                    self.rows[idx] -= l * u;
                }
            }
        }
    }

    /// Smallest modulus on the diagonal of `U`.
    pub fn min_diag(&self) -> T {
        (0..self.n).map(|k| cabs(self.rows[self.at(k, k)])).fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }

    /// Solves `A X = B` in place of a copy of `B`.
    pub fn solve(&self, rhs: &CMat<T>) -> CMat<T> {
        let (n, kl) = (self.n, self.kl);
        let ku_eff = self.width - kl - 1;
        let mut x = rhs.clone();
        for col in 0..x.ncols() {
            let mut v = x.column_mut(col);
            for k in 0..n {
                let p = self.piv[k];
                if p != k {
                    v.swap_rows(k, p);
                }
                let vk = v[k];
                for i in k + 1..=(k + kl).min(n - 1) {
                    let l = self.mult[k * kl + (i - k - 1)];
                    v[i] -= l * vk;
                }
            }
            for k in (0..n).rev() {
                let mut s = v[k];
                for j in k + 1..=(k + ku_eff).min(n - 1) {
                    s -= self.rows[self.at(k, j)] * v[j];
                }
                v[k] = s / self.rows[self.at(k, k)];
            }
        }
        x
    }
}
