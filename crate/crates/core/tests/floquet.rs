use floquet_readout::floquet::*;
use floquet_readout::linalg::hermitian_eigen;
use floquet_readout::models::*;
use floquet_readout::scalar::CMat;
use num_complex::Complex64;
use proptest::prelude::*;

fn charge() -> SystemModel<f64> {
    build_charge_qubit(1.0).unwrap()
}

#[test]
fn two_level_matrix_matches_explicit_form() {
    let a = Complex64::new(0.13, -0.07);
    let (wq, wr) = (1.0, 1.3);
    let h = build_floquet_matrix(&charge(), a, wr, 1).unwrap().to_dense();
    // explicit 6x6 matrix, rows ordered (p=+1: +,-), (p=0: +,-), (p=-1: +,-)
    let z = Complex64::new(0.0, 0.0);
    let d = |x: f64| Complex64::new(x, 0.0);
    let (ah, ahc) = (a / 2.0, a.conj() / 2.0);
    let explicit = [
        [d(wr + wq / 2.0), z, z, ahc, z, z],
        [z, d(wr - wq / 2.0), ahc, z, z, z],
        [z, ah, d(wq / 2.0), z, z, ahc],
        [ah, z, z, d(-wq / 2.0), ahc, z],
        [z, z, z, ah, d(-wr + wq / 2.0), z],
        [z, z, ah, z, z, d(-wr - wq / 2.0)],
    ];
    // our basis is |p) ⊗ {-, +} with p ascending
    let index = |row: usize| {
        let p = 1 - (row / 2) as i64;
        let plus = row.is_multiple_of(2);
        ((p + 1) * 2) as usize + usize::from(plus)
    };
    for r in 0..6 {
        for c in 0..6 {
            assert_eq!(h[(index(r), index(c))], explicit[r][c], "entry ({r}, {c})");
        }
    }
}

#[test]
fn zero_drive_gives_bare_levels() {
    let m = build_flopping_mode::<f64>(&FloppingParams::spin_like()).unwrap();
    let cfg = FloquetConfig::for_device(&m.label);
    let s = spectrum_at(&m, 0.0, 0.84, &cfg).unwrap();
    for (b, &l) in s.levels.iter().enumerate() {
        assert_eq!(s.quasi_energies[0][b], m.energies[l]);
    }
}

#[test]
fn weak_drive_stark_shift() {
    // second order: ε_+ = ω_q/2 + |A|² ω_q / (2 (ω_q² - ω_d²)) + O(A⁴)
    let pt = |a: f64| 0.5 + a * a / (2.0 * 0.75);
    let s = spectrum_at(&charge(), 0.1, 0.5, &FloquetConfig::default()).unwrap();
    let e = s.quasi_energy(1, 0.1).unwrap();
    assert!((e - pt(0.1)).abs() < 2e-4, "{e} vs {}", pt(0.1));
    let e0 = s.quasi_energy(0, 0.1).unwrap();
    assert!((e0 + e).abs() < 1e-12);
    let s = spectrum_at(&charge(), 0.02, 0.5, &FloquetConfig::default()).unwrap();
    let e = s.quasi_energy(1, 0.02).unwrap();
    assert!((e - pt(0.02)).abs() < 1e-6);
}

#[test]
fn krylov_and_dense_paths_agree() {
    let m = build_flopping_mode::<f64>(&FloppingParams::spin_like()).unwrap();
    let wd = 1.4 * m.omega_q();
    let grid = uniform_grid(0.03, 0.01);
    let it = FloquetConfig { dense_max: 0, ..FloquetConfig::for_device(&m.label) };
    let de = FloquetConfig { dense_max: 100_000, ..it.clone() };
    let a = track_branches(&m, wd, &grid, &it).unwrap();
    let b = track_branches(&m, wd, &grid, &de).unwrap();
    for k in 0..grid.len() {
        for j in 0..4 {
            assert!((a.quasi_energies[k][j] - b.quasi_energies[k][j]).abs() < 1e-12);
            let ov = a.modes[k][j].dotc(&b.modes[k][j]).norm();
            assert!((ov - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn replica_shift_periodicity() {
    let h = build_floquet_matrix(&charge(), Complex64::new(0.3, 0.0), 0.7, 20).unwrap();
    let (vals, _) = hermitian_eigen(&h.to_dense());
    let n = vals.len();
    let central: Vec<f64> = vals[n / 3..2 * n / 3].to_vec();
    for &v in &central {
        let shifted = v + 0.7;
        let nearest = vals.iter().map(|x| (x - shifted).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-9);
    }
}

#[test]
fn spectrum_is_even_and_phase_independent() {
    let m = build_fluxonium::<f64>(&FluxoniumParams::table()).unwrap();
    let spectrum = |a: Complex64| {
        let h = build_floquet_matrix(&m, a, 1.92 * m.omega_q(), 6).unwrap();
        hermitian_eigen(&h.to_dense()).0
    };
    let base = spectrum(Complex64::new(0.05, 0.0));
    for a in [Complex64::new(-0.05, 0.0), Complex64::from_polar(0.05, 0.9)] {
        for (x, y) in base.iter().zip(spectrum(a)) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn replica_doubling_converged_at_figure_points() {
    let m = charge();
    let s = spectrum_at(&m, 0.05, 1.1, &FloquetConfig::default()).unwrap();
    let d = replica_convergence(&m, 1.1, 0.05, &FloquetConfig::default(), &s).unwrap();
    assert!(d < 1e-6);
}

#[test]
fn truncation_edge_is_reported() {
    let cfg = FloquetConfig { n_rep: 2, ..FloquetConfig::default() };
    let err = spectrum_at(&charge(), 0.9, 0.3, &cfg).unwrap_err();
    assert!(matches!(err, floquet_readout::Error::ReplicaNotConverged(_)), "{err:?}");
}

#[test]
fn resonant_drive_resolves_degeneracy() {
    let s = track_branches(&charge(), 1.0, &[0.0, 0.01], &FloquetConfig::default()).unwrap();
    let e = &s.quasi_energies[1];
    assert!((e[1] - e[0] - 1.0).abs() > 1e-3);
}

#[test]
fn rejects_bad_input() {
    let cfg = FloquetConfig::default();
    assert!(track_branches(&charge(), 0.0, &[0.0], &cfg).is_err());
    assert!(track_branches(&charge(), 1.0, &[0.1, 0.2], &cfg).is_err());
    let tiny = FloquetConfig { max_dim: 10, ..cfg };
    assert!(matches!(
        track_branches(&charge(), 1.0, &[0.0], &tiny),
        Err(floquet_readout::Error::DimensionTooLarge { .. })
    ));
}

#[test]
fn modes_are_orthonormal_at_t0() {
    let m = build_flopping_mode::<f64>(&FloppingParams::spin_like()).unwrap();
    let s = spectrum_at(&m, 0.12, 0.84, &FloquetConfig::for_device(&m.label)).unwrap();
    let k = s.amplitudes.len() - 1;
    let u: Vec<_> = (0..4).map(|j| s.mode_at_t0(j, k).unwrap()).collect();
    let g = CMat::<f64>::from_fn(4, 4, |i, j| u[i].dotc(&u[j]));
    assert!((g - CMat::<f64>::identity(4, 4)).norm() < 1e-8);
}

#[test]
fn dressed_polarization_near_bare_value() {
    let m = charge();
    let cfg = FloquetConfig::default();
    // first order: |u_+(0)⟩ ∝ |+⟩ + s|-⟩ with s = Σ_p c_p, c_±1 = (A/2)/(ω_q ∓ ω_d)
    let (a, wd): (f64, f64) = (0.05, 1.1);
    let c1 = a / 2.0 / (1.0 - wd);
    let c2 = a / 2.0 / (1.0 + wd);
    let norm = 1.0 + c1 * c1 + c2 * c2;
    let estimate = (1.0 - (c1 + c2).powi(2)) / norm;
    let up = dressed_initial_polarization(&m, a, wd, &cfg, 1).unwrap();
    let down = dressed_initial_polarization(&m, a, wd, &cfg, 0).unwrap();
    assert!((up - estimate).abs() < 0.03, "{up} vs {estimate}");
    assert!((up + down).abs() < 1e-10, "{up} {down}");
    let weak = dressed_initial_polarization(&m, 1e-3, wd, &cfg, 1).unwrap();
    assert!((weak - 1.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn charge_qubit_spectrum_even_in_drive(a in 0.01f64..0.4, wd in 0.3f64..1.6) {
        let cfg = FloquetConfig { n_rep: 25, ..FloquetConfig::default() };
        let plus = build_floquet_matrix(&charge(), Complex64::new(a, 0.0), wd, cfg.n_rep).unwrap();
        let minus = build_floquet_matrix(&charge(), Complex64::new(-a, 0.0), wd, cfg.n_rep).unwrap();
        let (x, _) = hermitian_eigen(&plus.to_dense());
        let (y, _) = hermitian_eigen(&minus.to_dense());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-10);
        }
    }
}
