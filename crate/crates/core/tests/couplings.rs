use floquet_readout::couplings::*;
use floquet_readout::floquet::*;
use floquet_readout::linalg::hermitian_eigen;
use floquet_readout::models::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn charge() -> SystemModel<f64> {
    build_charge_qubit(1.0).unwrap()
}

/// Second-order shift coefficient `ε_j ≈ E_j + c_j A²` summed over all levels.
fn pt_coefficient(m: &SystemModel<f64>, j: usize, wd: f64) -> f64 {
    (0..m.dim())
        .filter(|&k| k != j)
        .map(|k| {
            let e = m.energies[j] - m.energies[k];
            m.charge_op[(j, k)].norm_sqr() * e / (2.0 * (e * e - wd * wd))
        })
        .sum()
}

#[test]
fn closed_form_dispersive_shift_at_small_drive() {
    let opts = DerivativeOptions::default();
    for ratio in [0.5, 0.9, 1.1, 1.5] {
        let lc = couplings_at(&charge(), ratio, 1e-4, 1e-2, &opts, &FloquetConfig::default()).unwrap();
        let (_, chi0) = small_drive_couplings(1.0_f64, ratio, 1e-2, 1e-4).unwrap();
        assert!(((lc.chi[1] - chi0) / chi0).abs() < 1e-3, "ratio {ratio}: {} vs {chi0}", lc.chi[1]);
    }
}

#[test]
fn undriven_longitudinal_coupling_vanishes() {
    let lc = couplings_at(&charge(), 1.1, 0.0, 0.01, &DerivativeOptions::default(), &FloquetConfig::default()).unwrap();
    assert!(lc.g_par[1].abs() < 1e-12);
    assert!((lc.chi[1] + 9.5238e-4).abs() / 9.5238e-4 < 1e-4);
}

#[test]
fn small_drive_closed_forms() {
    let (g, chi) = small_drive_couplings(1.0_f64, 1.1, 0.01, 0.05).unwrap();
    assert!((chi + 9.5238e-4).abs() < 1e-8);
    assert!((g + 2.381e-3).abs() < 1e-6);
    let (_, slow) = small_drive_couplings(1.0_f64, 1e-6, 0.01, 0.05).unwrap();
    assert!((slow - 2e-4).abs() < 1e-12);
    let (g, chi) = small_drive_couplings(1.0_f64, 1.3, 0.01, 0.05).unwrap();
    assert!(g < 0.0 && chi < 0.0);
    assert!(small_drive_couplings(1.0_f64, 1.0, 0.01, 0.05).is_err());
}

#[test]
fn longitudinal_ratio_approaches_one() {
    let cfg = FloquetConfig::default();
    let opts = DerivativeOptions::default();
    let (_, res) = couplings_sweep(&charge(), 1.1, &[1e-3, 0.01, 0.05], 0.01, &opts, &cfg).unwrap();
    let ratio: Vec<f64> = [1e-3, 0.01, 0.05]
        .iter()
        .zip(&res)
        .map(|(&a, r)| r.as_ref().unwrap().g_par[1] / small_drive_couplings(1.0_f64, 1.1, 0.01, a).unwrap().0)
        .collect();
    assert!((ratio[0] - 1.0).abs() < 1e-4);
    assert!(ratio[0] > ratio[1] && ratio[1] > ratio[2]);
    assert!(ratio[2] < 1.0);
}

#[test]
fn couplings_flip_sign_across_resonance() {
    let cfg = FloquetConfig::default();
    let opts = DerivativeOptions::default();
    let below = couplings_at(&charge(), 0.9, 0.05, 0.01, &opts, &cfg).unwrap();
    let above = couplings_at(&charge(), 1.1, 0.05, 0.01, &opts, &cfg).unwrap();
    assert!(below.g_par[1] > 0.0 && above.g_par[1] < 0.0);
    assert!(below.chi[1] > 0.0 && above.chi[1] < 0.0);
}

#[test]
fn charge_qubit_levels_are_antisymmetric() {
    let lc = couplings_at(&charge(), 1.3, 0.2, 0.01, &DerivativeOptions::default(), &FloquetConfig::default()).unwrap();
    let rc = reduce_two_level(&lc, &charge(), (0, 1), 2e-3, 1.3).unwrap();
    assert!(rc.g_bar.abs() < 1e-12 * rc.g_par.abs().max(1.0));
    assert!(rc.chi_bar.abs() < 1e-8 * rc.chi.abs());
    assert!((rc.g_par - lc.g_par[1]).abs() < 1e-12);
}

#[test]
fn purcell_rate_arithmetic() {
    let lc = couplings_at(&charge(), 1.1, 0.0, 0.01, &DerivativeOptions::default(), &FloquetConfig::default()).unwrap();
    let rc = reduce_two_level(&lc, &charge(), (0, 1), 2e-3, 1.1).unwrap();
    assert!((rc.gamma - 2e-5).abs() < 1e-15);
}

#[test]
fn step_halving_is_stable() {
    let cfg = FloquetConfig::default();
    let opts = DerivativeOptions::default();
    let half = DerivativeOptions { fd_step: opts.fd_step / 2.0, ..opts };
    for a in [1e-4, 0.05, 0.2] {
        let x = couplings_at(&charge(), 1.1, a, 0.01, &opts, &cfg).unwrap();
        let y = couplings_at(&charge(), 1.1, a, 0.01, &half, &cfg).unwrap();
        if a > 1e-3 {
            assert!(((x.g_par[1] - y.g_par[1]) / x.g_par[1]).abs() < 1e-5);
        }
        assert!(((x.chi[1] - y.chi[1]) / x.chi[1]).abs() < 1e-5, "A = {a}");
    }
}

#[test]
fn radial_form_equals_complex_laplacian() {
    // for a function of |A| only, ε'' + ε'/|A| = (∂²_x + ∂²_y) ε = 4 ∂_A ∂_A* ε
    let m = charge();
    let (a, wd, h) = (0.3, 0.8, 1e-3);
    let cfg = FloquetConfig { n_rep: 15, ..FloquetConfig::default() };
    let spec = track_branches(&m, wd, &stencil_grid(&[a], 1e-4), &cfg).unwrap();
    let lc = level_couplings(&spec, &m, 1.0, a, &DerivativeOptions::default()).unwrap();
    let e0 = spec.quasi_energy(1, a).unwrap();
    let eps = |z: Complex64| {
        let (vals, _) = hermitian_eigen(&build_floquet_matrix(&m, z, wd, cfg.n_rep).unwrap().to_dense());
        vals.into_iter().min_by(|x, y| (x - e0).abs().partial_cmp(&(y - e0).abs()).unwrap()).unwrap()
    };
    let c = eps(Complex64::new(a, 0.0));
    let lap = (eps(Complex64::new(a + h, 0.0)) + eps(Complex64::new(a - h, 0.0)) + eps(Complex64::new(a, h))
        + eps(Complex64::new(a, -h))
        - 4.0 * c)
        / (h * h);
    assert!(((lc.chi[1] - lap) / lap).abs() < 1e-5, "{} vs {lap}", lc.chi[1]);
}

#[test]
fn transmon_matches_sum_over_states() {
    let m = build_transmon::<f64>(&TransmonParams::table()).unwrap();
    let (wq, g) = (m.omega_q(), 2.7e-3);
    let wd = 0.77 * wq;
    let cfg = FloquetConfig { levels: Some(vec![0, 1]), ..FloquetConfig::for_device(&m.label) };
    let lc = couplings_at(&m, wd, 1e-4, g, &DerivativeOptions::default(), &cfg).unwrap();
    let rc = reduce_two_level(&lc, &m, (0, 1), 5e-5, wd).unwrap();
    let pt = 2.0 * g * g * (pt_coefficient(&m, 1, wd) - pt_coefficient(&m, 0, wd));
    assert!(((rc.chi - pt) / pt).abs() < 1e-3, "{} vs {pt}", rc.chi);

    let n01 = m.charge_op[(0, 1)].norm();
    let (_, full) = transmon_small_drive_reference(0.0077, n01, g, 1e-4, wq, wd).unwrap();
    let rwa = transmon_dispersive_rwa(0.0077, n01, g, wq, wd).unwrap();
    assert!(full < 0.0 && rwa < 0.0 && rc.chi < 0.0);
    // the closed form assumes |n12|² = 2|n01|² and ω12 = ω01 - E_C
    assert!(((rc.chi - full) / full).abs() < 0.25);
    assert!((full - rwa).abs() > 0.0 && ((full - rwa) / full).abs() < 0.05);
}

#[test]
fn transmon_reference_vanishes_without_anharmonicity() {
    let (_, chi) = transmon_small_drive_reference(0.0_f64, 1.3, 2.7e-3, 0.01, 0.23, 0.15).unwrap();
    assert!(chi.abs() < 1e-18);
}

#[test]
fn flopping_mode_has_common_mode_coupling() {
    let m = build_flopping_mode::<f64>(&FloppingParams::spin_like()).unwrap();
    let wq = m.omega_q();
    let cfg = FloquetConfig::for_device(&m.label);
    let lc = couplings_at(&m, 1.4 * wq, 0.2 * wq, 2e-2, &DerivativeOptions::default(), &cfg).unwrap();
    let rc = reduce_two_level(&lc, &m, (0, 1), 2e-3, 1.4 * wq).unwrap();
    assert!(rc.g_bar.abs() > 1e-6);
    assert_eq!(rc.g_bar.signum(), lc.g_par[0].signum());
    assert_eq!(rc.g_bar.signum(), lc.g_par[1].signum());
}

#[test]
fn compensation_tone_substitution() {
    let rc = ReadoutCouplings {
        g_par: 1e-3_f64,
        g_bar: 0.5e-3,
        chi: 2e-4,
        chi_bar: 1e-4,
        epsilon: 0.5,
        gamma: 0.0,
        g_perp: 0.01,
        kappa: 2e-3,
        a_q: 0.05,
        omega_d: 1.1,
        omega_r: 1.1,
    };
    let plan = compensation_tone(&rc, 1.1);
    assert!((plan.a_r + 1e-3).abs() < 1e-18);
    assert_eq!(plan.phi, 0.0);
    assert!((plan.omega_d - 1.1001).abs() < 1e-15);
    assert_eq!(plan.a_q, 0.05);
    let ideal = ReadoutCouplings { g_bar: 0.0, chi_bar: 0.0, ..rc };
    let plan = compensation_tone(&ideal, 1.1);
    assert_eq!((plan.a_r, plan.omega_d), (0.0, 1.1));
}

#[test]
fn resonant_drive_is_refused() {
    let err = couplings_at(&charge(), 1.0, 0.01, 0.01, &DerivativeOptions::default(), &FloquetConfig::default());
    assert!(matches!(err, Err(floquet_readout::Error::NearResonance(_))), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn charge_levels_mirror(a in 0.0f64..0.15, ratio in prop_oneof![0.3f64..0.8, 1.2f64..1.8]) {
        let cfg = FloquetConfig { n_rep: 25, ..FloquetConfig::default() };
        let lc = couplings_at(&charge(), ratio, a, 0.01, &DerivativeOptions::default(), &cfg).unwrap();
        prop_assert!((lc.g_par[0] + lc.g_par[1]).abs() < 1e-10);
        prop_assert!((lc.chi[0] + lc.chi[1]).abs() < 1e-6 * lc.chi[1].abs());
    }
}
