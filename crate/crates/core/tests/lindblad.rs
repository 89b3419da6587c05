use floquet_readout::cavity::time_grid;
use floquet_readout::couplings::DrivePlan;
use floquet_readout::lindblad::*;
use floquet_readout::models::*;
use num_complex::Complex64;

fn charge() -> SystemModel<f64> {
    build_charge_qubit(1.0).unwrap()
}

fn small(fock_dim: usize) -> SimConfig {
    SimConfig { fock_dim, ..SimConfig::default() }
}

#[test]
fn empty_resonator_relaxes_to_driven_coherent_state() {
    let res = Resonator { omega_r: 1.1, kappa: 2e-3, g_perp: 0.0 };
    let plan = DrivePlan { a_q: 0.0, a_r: 1e-3, phi: 0.7, omega_d: 1.1 };
    let t = time_grid(1000.0, 11);
    let r = simulate(&charge(), &res, &plan, 0, &t, &small(10)).unwrap();
    for (k, &tk) in t.iter().enumerate() {
        let expect = Complex64::new(0.0, -1.0) * Complex64::from_polar(5e-4, -0.7) * (1.0 - (-1e-3 * tk).exp()) / 1e-3;
        assert!((r.expect_a[k] - expect).norm() < 1e-10);
    }
    assert!(r.trace_error < 1e-8 && r.hermiticity_error < 1e-8 && r.min_eigenvalue > -1e-8);
    assert!(r.populations.iter().all(|p| (p[0] - 1.0).abs() < 1e-12));
}

#[test]
fn step_halving_converges_at_fourth_order() {
    let res = Resonator { omega_r: 1.1, kappa: 2e-3, g_perp: 1e-2 };
    let plan = DrivePlan { a_q: 0.05, a_r: 2e-4, phi: 0.3, omega_d: 1.1 };
    let t = vec![0.0, 150.0];
    let bound = stability_step(&charge(), &res, &plan, &small(8)).unwrap();
    let run = |dt: f64| {
        let r = simulate(&charge(), &res, &plan, 1, &t, &SimConfig { dt: Some(dt), ..small(8) }).unwrap();
        r.expect_a[1]
    };
    let (a1, a2, a4) = (run(bound), run(bound / 2.0), run(bound / 4.0));
    assert!((a1 - a2).norm() < 1e-6);
    let ratio = (a1 - a2).norm() / (a2 - a4).norm();
    assert!((ratio - 16.0).abs() < 2.0, "{ratio}");
}

#[test]
fn fock_truncation_is_converged_for_weak_pointers() {
    let res = Resonator { omega_r: 1.5, kappa: 2e-3, g_perp: 1e-2 };
    let plan = DrivePlan::qubit_only(0.05, 1.5);
    let t = vec![0.0, 100.0, 250.0];
    let a = simulate(&charge(), &res, &plan, 1, &t, &small(30)).unwrap();
    let b = simulate(&charge(), &res, &plan, 1, &t, &small(40)).unwrap();
    assert!((a.expect_a[2] - b.expect_a[2]).norm() < 1e-6);
}

#[test]
fn lab_and_rotating_frames_agree() {
    let res = Resonator { omega_r: 1.1, kappa: 2e-3, g_perp: 1e-2 };
    let plan = DrivePlan { a_q: 0.05, a_r: 1e-3, phi: 0.4, omega_d: 1.1 };
    let t = time_grid(60.0, 7);
    let rot = simulate(&charge(), &res, &plan, 1, &t, &small(8)).unwrap();
    let lab = SimConfig { frame: Frame::Lab, ..small(8) };
    let same = simulate(&charge(), &res, &plan, 1, &t, &lab).unwrap();
    for (x, y) in rot.expect_a.iter().zip(&same.expect_a) {
        assert!((x - y).norm() < 1e-6);
    }
    let full = SimConfig { drop_counter_rotating_cavity_drive: false, ..lab };
    let full = simulate(&charge(), &res, &plan, 1, &t, &full).unwrap();
    let micromotion = plan.a_r / (2.0 * plan.omega_d);
    for (x, y) in rot.expect_a.iter().zip(&full.expect_a) {
        assert!((x - y).norm() < 2.0 * micromotion);
    }
}

#[test]
fn purcell_decay_of_excited_state() {
    let (g, kappa, wr) = (1.5e-2, 2e-3, 1.1);
    let gamma = kappa * g * g / (1.0f64 - wr).powi(2);
    let res = Resonator { omega_r: wr, kappa, g_perp: g };
    let t: Vec<f64> = time_grid(2.0 / gamma, 41);
    let r = simulate(&charge(), &res, &DrivePlan::qubit_only(0.0, wr), 1, &t, &small(6)).unwrap();
    let p1: Vec<f64> = r.populations.iter().map(|p| p[1]).collect();
    let rate = fit_decay_rate(&t, &p1).unwrap();
    assert!((rate / gamma - 1.0).abs() < 0.15, "{rate} vs {gamma}");
    assert!(r.expect_a.iter().all(|a| a.norm() < 1e-12));
}

#[test]
fn decay_fit_recovers_rate() {
    let t: Vec<f64> = time_grid(10.0, 50);
    let y: Vec<f64> = t.iter().map(|&x| 0.8 * (-0.37 * x).exp()).collect();
    assert!((fit_decay_rate(&t, &y).unwrap() - 0.37).abs() < 1e-12);
    assert!(fit_decay_rate(&[0.0], &[1.0]).is_err());
}

#[test]
fn undriven_system_gives_no_signal() {
    let res = Resonator { omega_r: 1.1, kappa: 2e-3, g_perp: 1e-2 };
    let t = time_grid(250.0, 26);
    let plans = [DrivePlan::qubit_only(0.0, 1.1), DrivePlan::qubit_only(0.05, 1.1)];
    let snr = sweep_snr_numeric(&charge(), &res, &plans, &t, 250.0, &small(8));
    let zero = *snr[0].as_ref().unwrap();
    let driven = *snr[1].as_ref().unwrap();
    assert!(zero < 1e-12, "{zero}");
    assert!(driven > 1e-3);
}

#[test]
fn multilevel_truncation_and_errors() {
    let m = build_flopping_mode::<f64>(&FloppingParams::spin_like()).unwrap();
    let res = Resonator { omega_r: 0.83, kappa: 2e-3, g_perp: 2e-2 };
    let plan = DrivePlan::qubit_only(0.12, 0.83);
    let t = vec![0.0, 20.0];
    let two = SimConfig { system_levels: Some(2), ..small(6) };
    let r = simulate(&m, &res, &plan, 1, &t, &two).unwrap();
    assert_eq!(r.populations[0].len(), 2);
    assert!(simulate(&m, &res, &plan, 2, &t, &two).is_err());
    assert!(simulate(&m, &res, &plan, 0, &t, &small(5)).is_err());
    assert!(simulate(&m, &res, &plan, 0, &t, &SimConfig { dt: Some(10.0), ..small(6) }).is_err());
    assert!(simulate(&m, &res, &plan, 0, &[1.0, 2.0], &small(6)).is_err());
}

#[test]
fn photon_guard_trips_on_overfilled_cavity() {
    let res = Resonator { omega_r: 1.1, kappa: 2e-3, g_perp: 0.0 };
    // steady state holds 25 photons
    let plan = DrivePlan { a_q: 0.0, a_r: 1e-2, phi: 0.0, omega_d: 1.1 };
    let cfg = SimConfig { photon_guard: 0.5, ..small(12) };
    let err = simulate(&charge(), &res, &plan, 0, &time_grid(2000.0, 21), &cfg);
    assert!(matches!(err, Err(floquet_readout::Error::OracleDiagnostics(_))), "{err:?}");
}
