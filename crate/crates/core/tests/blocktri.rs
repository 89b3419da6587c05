use floquet_readout::linalg::{hermitian_eigen, BlockTridiagonal, SolverOptions};
use floquet_readout::scalar::CMat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(b: usize, np: usize, seed: u64) -> BlockTridiagonal<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diag = Vec::new();
    let mut lower = Vec::new();
    for p in 0..np {
        let a = CMat::<f64>::from_fn(b, b, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let mut d = (&a + a.adjoint()) * Complex64::new(0.3, 0.0);
        for i in 0..b {
            d[(i, i)] += Complex64::new(0.5 * p as f64, 0.0);
        }
        diag.push(d);
        if p + 1 < np {
            lower.push(CMat::<f64>::from_fn(b, b, |_, _| {
                Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))
            }));
        }
    }
    BlockTridiagonal::new(diag, lower)
}

#[test]
fn inertia_matches_dense_count() {
    let h = random_matrix(3, 30, 1);
    let (vals, _) = hermitian_eigen(&h.to_dense());
    for x in [-1.0, 0.3, 2.7, 5.0, 9.1, 20.0] {
        let dense = vals.iter().filter(|&&v| v < x).count();
        assert_eq!(h.count_below(x), dense, "x = {x}");
    }
}

#[test]
fn factor_solves_shifted_system() {
    let h = random_matrix(4, 25, 2);
    let n = h.dim();
    let rhs = CMat::<f64>::from_fn(n, 2, |i, j| Complex64::new((i + j) as f64 * 0.01, 1.0 - i as f64 * 0.003));
    let shift = 3.21;
    let x = h.factor(shift).solve(&rhs);
    let back = h.apply(&x) - &x * Complex64::new(shift, 0.0);
    assert!((back - &rhs).norm() < 1e-9 * rhs.norm());
}

#[test]
fn apply_matches_dense_product() {
    let h = random_matrix(3, 10, 3);
    let x = CMat::<f64>::from_fn(h.dim(), 3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
    let d = h.to_dense() * &x;
    assert!((h.apply(&x) - d).norm() < 1e-12 * x.norm());
}

#[test]
fn krylov_window_matches_dense_spectrum() {
    let h = random_matrix(3, 60, 4);
    let (vals, vecs) = hermitian_eigen(&h.to_dense());
    let (lo, hi) = (6.0, 9.5);
    let opts = SolverOptions { dense_max: 0, ..Default::default() };
    let got = h.eigenpairs_in(lo, hi, &opts).unwrap();
    let want: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= lo && vals[i] < hi).collect();
    assert_eq!(got.len(), want.len());
    for (pair, &i) in got.iter().zip(&want) {
        assert!((pair.value - vals[i]).abs() < 1e-11, "{} vs {}", pair.value, vals[i]);
        let overlap = vecs.column(i).dotc(&pair.vector).norm();
        assert!(overlap > 1.0 - 1e-8);
    }
}

#[test]
fn krylov_window_finds_degenerate_pairs() {
    // two identical uncoupled copies give every eigenvalue multiplicity two
    let base = random_matrix(2, 40, 5);
    let diag = base
        .diag
        .iter()
        .map(|d| {
            let mut m = CMat::<f64>::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(d);
            m.view_mut((2, 2), (2, 2)).copy_from(d);
            m
        })
        .collect();
    let lower = base
        .lower
        .iter()
        .map(|l| {
            let mut m = CMat::<f64>::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(l);
            m.view_mut((2, 2), (2, 2)).copy_from(l);
            m
        })
        .collect();
    let h = BlockTridiagonal::new(diag, lower);
    let opts = SolverOptions { dense_max: 0, ..Default::default() };
    let got = h.eigenpairs_in(4.0, 6.0, &opts).unwrap();
    assert_eq!(got.len(), h.count_below(6.0) - h.count_below(4.0));
    assert_eq!(got.len() % 2, 0);
    let gram = DMatrix::from_fn(got.len(), got.len(), |i, j| got[i].vector.dotc(&got[j].vector));
    let id = DMatrix::<Complex64>::identity(got.len(), got.len());
    assert!((gram - id).norm() < 1e-10);
}

#[test]
fn band_lu_solves_near_singular_shift() {
    let h = random_matrix(3, 30, 6);
    let (vals, _) = hermitian_eigen(&h.to_dense());
    // a shift 1e-9 away from an eigenvalue
    let shift = vals[40] + 1e-9;
    let rhs = CMat::<f64>::from_fn(h.dim(), 2, |i, j| Complex64::new(1.0 / (1.0 + i as f64), j as f64));
    let x = h.band_lu(shift).solve(&rhs);
    let back = h.apply(&x) - &x * Complex64::new(shift, 0.0);
    assert!((back - &rhs).norm() < 1e-10 * rhs.norm() * h.norm_bound().max(1.0) * 1e3);
}
