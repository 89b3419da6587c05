use floquet_readout::config::*;
use floquet_readout::lindblad::Frame;
use floquet_readout::sweep::{cmd_couplings, cmd_snr, cmd_spectrum, cmd_trajectory, OracleMode, Run};
use floquet_readout::table::{format_float, Cell, Table};

const BASE: &str = r#"
figure = "test"

[model]
device = "charge_qubit"
omega_q = 1.0

[resonator]
omega_r_over_omega_q = 1.1
kappa = 2e-3
g_perp = 1e-2
"#;

fn with(extra: &str) -> RunConfig {
    RunConfig::from_toml(&format!("{BASE}\n{extra}")).unwrap()
}

#[test]
fn defaults_fill_optional_sections() {
    let c = with("");
    assert_eq!(c.resonator.fock_dim, 30);
    assert_eq!(c.output.format, OutputFormat::Csv);
    assert_eq!(c.output.kappa_t_star, 0.5);
    assert_eq!(c.oracle.frame, Frame::Rotating);
    assert_eq!(c.omega_r_ratios(), vec![1.1]);
    assert_eq!(c.a_q_ratios(), vec![0.0]);
    assert_eq!(c.floquet_config("charge_qubit").n_rep, 41);
    assert_eq!(c.floquet_config("transmon").n_rep, 51);
}

#[test]
fn grids_accept_lists_and_ranges() {
    let c = with("[sweep]\nomega_r_over_omega_q = [0.9, 1.1]\na_q_over_omega_q = { start = 0.0, stop = 0.5, num = 6 }");
    assert_eq!(c.omega_r_ratios(), vec![0.9, 1.1]);
    let a = c.a_q_ratios();
    assert_eq!(a.len(), 6);
    assert!((a[5] - 0.5).abs() < 1e-15 && (a[1] - 0.1).abs() < 1e-15);
    assert_eq!(Grid::Linspace { start: 0.2, stop: 0.7, num: 1 }.values(), vec![0.2]);
}

#[test]
fn devices_are_tagged() {
    let t = RunConfig::from_toml(
        r#"
figure = "t"
[model]
device = "transmon"
e_c = 0.0077
e_j = 1.0
flux = 0.128
n_max = 20
levels = 25
[resonator]
omega_r_over_omega_q = 0.77
kappa = 5e-5
g_perp = 2.7e-3
"#,
    )
    .unwrap();
    assert!(matches!(t.model, ModelSection::Transmon(_)));
    assert_eq!(t.model.build().unwrap().dim(), 25);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        BASE.replace("kappa = 2e-3", "kappa = 0.0"),
        BASE.replace("omega_r_over_omega_q = 1.1", "omega_r_over_omega_q = -1.0"),
        BASE.replace("charge_qubit", "quantum_dot"),
        format!("{BASE}\n[sweep]\na_q_over_omega_q = []"),
        format!("{BASE}\n[output]\nkappa_t_star = 9.0"),
        format!("{BASE}\n[drive]\nunknown_key = 1"),
        BASE.replace("figure = \"test\"", ""),
    ];
    for text in bad {
        assert!(matches!(RunConfig::from_toml(&text), Err(floquet_readout::Error::Config(_))), "{text}");
    }
}

#[test]
fn float_format_is_fixed() {
    assert_eq!(format_float(0.1), "1.00000000000e-1");
    assert_eq!(format_float(-2.5e-7), "-2.50000000000e-7");
    assert_eq!(format_float(f64::NAN), "nan");
    assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
    let x = 0.123456789012345;
    assert!((format_float(x).parse::<f64>().unwrap() - x).abs() <= 5e-12 * x);
}

#[test]
fn csv_quotes_text_and_keeps_order() {
    let mut t = Table::new("t", &["a", "b", "c"]);
    t.push(vec![Cell::from(1.0), Cell::from(3usize), Cell::from("x, \"y\"")]);
    t.push(vec![Cell::from(f64::NAN), Cell::from(-1i64), Cell::from("")]);
    assert_eq!(t.to_csv(), "a,b,c\n1.00000000000e0,3,\"x, \"\"y\"\"\"\nnan,-1,\n");
    assert!(t.numbers("a").unwrap()[1].is_nan());
}

#[test]
fn zero_drive_spectrum_is_bare() {
    let run = Run::new(with("[sweep]\na_q_over_omega_q = [0.0]")).unwrap();
    let t = &cmd_spectrum(&run).unwrap()[0];
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.numbers("quasi_energy").unwrap(), vec![-0.5, 0.5]);
}

#[test]
fn couplings_rows_follow_the_grid() {
    let run = Run::new(with("[sweep]\nomega_r_over_omega_q = [1.0, 1.5]\na_q_over_omega_q = [0.0, 0.05]")).unwrap();
    let t = &cmd_couplings(&run).unwrap()[0];
    let status: Vec<_> = t.rows.iter().map(|r| r[t.column("status").unwrap()].clone()).collect();
    assert_eq!(status, vec![Cell::from("refused"), Cell::from("refused"), Cell::from("ok"), Cell::from("ok")]);
    let g = t.numbers("g_par").unwrap();
    assert!(g[0].is_nan() && g[2] == 0.0);
    let (g0, g1) = (t.numbers("g_par_closed_form").unwrap()[3], g[3]);
    assert!(((g1 - g0) / g0).abs() < 2e-2);
}

#[test]
fn undriven_trajectory_and_snr_vanish() {
    let run = Run::new(with("[output]\nt_points = 50")).unwrap();
    let t = &cmd_trajectory(&run, OracleMode::Off).unwrap()[0];
    assert_eq!(t.rows.len(), 100);
    assert!(t.numbers("re_a").unwrap().iter().chain(&t.numbers("im_a").unwrap()).all(|&x| x == 0.0));
    let s = &cmd_snr(&run, OracleMode::Off).unwrap()[0];
    assert_eq!(s.numbers("snr_analytic").unwrap(), vec![0.0]);
}

#[test]
fn dispersive_baseline_row_is_appended() {
    let run = Run::new(with(
        "[drive]\na_q_over_omega_q = 0.05\ndispersive = true\n[sweep]\na_q_over_omega_q = [0.05]\n[output]\nt_points = 200",
    ))
    .unwrap();
    let s = &cmd_snr(&run, OracleMode::Off).unwrap()[0];
    assert_eq!(s.rows.len(), 2);
    assert_eq!(s.rows[1][0], Cell::from("dispersive"));
    let v = s.numbers("snr_analytic").unwrap();
    // at the same resonator frequency the matched dispersive drive is slower
    assert!(v[0] > v[1] && v[1] > 0.0);
}
