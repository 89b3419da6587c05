//! Grid runs behind the command-line front end. Every command returns
//! tables whose rows follow the grid order of the configuration, so output
//! does not depend on scheduling.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{
    dispersive_trajectory, match_dispersive_amplitude, snr, snr_at, steady_state_pointer, time_grid, trajectory_pair,
    Trajectory,
};
use crate::config::{ModelSection, RunConfig};
use crate::couplings::{
    couplings_at, couplings_sweep, reduce_two_level, self_consistent_compensation, small_drive_couplings,
    transmon_small_drive_reference, DrivePlan, ReadoutCouplings,
};
use crate::error::{Error, Result};
use crate::floquet::{polarization_from_spectrum, track_branches, FloquetConfig};
use crate::lindblad::{simulate, Resonator, SimConfig};
use crate::linalg::hermitian_eigen;
use crate::models::{
    build_charge_qubit, build_flopping_mode, build_fluxonium, build_transmon, FloppingParams, FluxoniumParams,
    SystemModel, TransmonParams,
};
use crate::scalar::C;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    #[default]
    Off,
    On,
    /// Every `oracle.stride`-th grid point.
    Subset,
}

impl OracleMode {
    fn selects(self, index: usize, stride: usize) -> bool {
        match self {
            Self::Off => false,
            Self::On => true,
            Self::Subset => index.is_multiple_of(stride),
        }
    }
}

/// A configuration with its model built.
pub struct Run {
    pub cfg: RunConfig,
    pub model: SystemModel<f64>,
    pub omega_q: f64,
    pub floquet: FloquetConfig,
}

impl Run {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let model = cfg.model.build()?;
        let omega_q = model.omega_q();
        let floquet = cfg.floquet_config(&model.label);
        Ok(Self { cfg, model, omega_q, floquet })
    }

    fn kappa(&self) -> f64 {
        self.cfg.resonator.kappa
    }

    fn g_perp(&self) -> f64 {
        self.cfg.resonator.g_perp
    }

    fn resonator(&self, omega_r: f64) -> Resonator<f64> {
        Resonator { omega_r, kappa: self.kappa(), g_perp: self.g_perp() }
    }

    fn logical_floquet(&self) -> FloquetConfig {
        let mut levels = self.floquet.tracked_levels(self.model.dim());
        for l in [0, 1] {
            if !levels.contains(&l) {
                levels.push(l);
            }
        }
        FloquetConfig { levels: Some(levels), ..self.floquet.clone() }
    }

    /// Analytic time grid over `[0, kappa_t_end/κ]`.
    pub fn time_grid(&self) -> Vec<f64> {
        time_grid(self.cfg.output.kappa_t_end / self.kappa(), self.cfg.output.t_points)
    }

    pub fn oracle_time_grid(&self) -> Vec<f64> {
        time_grid(self.cfg.output.kappa_t_end / self.kappa(), self.cfg.oracle.t_points)
    }

    pub fn sim_config(&self) -> SimConfig {
        self.cfg.sim_config()
    }

    /// Couplings, drive plan and initial polarizations of the logical states
    /// at one grid point.
    pub fn operating_point(&self, omega_r: f64, a_q: f64) -> Result<OperatingPoint> {
        let fl = self.logical_floquet();
        let opts = self.cfg.derivative_options();
        let (rc, plan, spec) = if self.cfg.drive.compensation {
            let (rc, plan) =
                self_consistent_compensation(&self.model, omega_r, a_q, self.g_perp(), self.kappa(), &opts, &fl)?;
            let grid = if a_q > 0.0 { vec![0.0, a_q] } else { vec![0.0] };
            let spec = track_branches(&self.model, plan.omega_d, &grid, &fl)?;
            (rc, plan, spec)
        } else {
            let (spec, mut lcs) = couplings_sweep(&self.model, omega_r, &[a_q], self.g_perp(), &opts, &fl)?;
            let lc = lcs.pop().expect("one amplitude")?;
            let rc = reduce_two_level(&lc, &self.model, (0, 1), self.kappa(), omega_r)?;
            (rc, DrivePlan::qubit_only(a_q, omega_r), spec)
        };
        let (up, down) = if self.cfg.drive.bare_polarization {
            (1.0, -1.0)
        } else {
            let k = spec.point(a_q).ok_or_else(|| Error::InvalidParameter("drive point missing".into()))?;
            (polarization_from_spectrum(&spec, k, 1)?, polarization_from_spectrum(&spec, k, 0)?)
        };
        Ok(OperatingPoint { rc, plan, sigma_up: up, sigma_down: down })
    }

    /// Dispersive shift at `omega_r` without a qubit drive.
    pub fn dispersive_chi(&self, omega_r: f64) -> Result<f64> {
        let fl = self.logical_floquet();
        let lc = couplings_at(&self.model, omega_r, 0.0, self.g_perp(), &self.cfg.derivative_options(), &fl)?;
        Ok(reduce_two_level(&lc, &self.model, (0, 1), self.kappa(), omega_r)?.chi)
    }

    /// Dispersive baseline matched to the longitudinal operating point at
    /// the configured resonator and drive values.
    pub fn dispersive_baseline(&self) -> Result<Option<DispersiveBaseline>> {
        if !self.cfg.drive.dispersive {
            return Ok(None);
        }
        let ratio = self.cfg.drive.dispersive_omega_r_over_omega_q.unwrap_or(self.cfg.resonator.omega_r_over_omega_q);
        let omega_r = ratio * self.omega_q;
        let reference = self.operating_point(
            self.cfg.resonator.omega_r_over_omega_q * self.omega_q,
            self.cfg.drive.a_q_over_omega_q * self.omega_q,
        )?;
        let chi = self.dispersive_chi(omega_r)?;
        let a_r = match_dispersive_amplitude(&reference.rc, &reference.plan, chi, self.kappa())?;
        Ok(Some(DispersiveBaseline { omega_r_over_omega_q: ratio, omega_r, chi, a_r }))
    }

    fn closed_form(&self, omega_d: f64, a_q: f64) -> (f64, f64) {
        let g = self.g_perp();
        let r = match &self.cfg.model {
            ModelSection::ChargeQubit(_) => small_drive_couplings(self.omega_q, omega_d, g, a_q),
            ModelSection::Transmon(p) => {
                let n01 = self.model.charge_op[(0, 1)].norm();
                transmon_small_drive_reference(p.e_c, n01, g, a_q, self.omega_q, omega_d)
            }
            _ => return (f64::NAN, f64::NAN),
        };
        r.unwrap_or((f64::NAN, f64::NAN))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub rc: ReadoutCouplings<f64>,
    pub plan: DrivePlan<f64>,
    pub sigma_up: f64,
    pub sigma_down: f64,
}

impl OperatingPoint {
    pub fn trajectories(&self, t: &[f64]) -> Result<(Trajectory<f64>, Trajectory<f64>)> {
        trajectory_pair(&self.rc, &self.plan, self.sigma_up, self.sigma_down, t)
    }

    /// `|a_ss(σ_z = 1) - a_ss(σ_z = -1)|`.
    pub fn steady_splitting(&self) -> Result<f64> {
        Ok((steady_state_pointer(&self.rc, &self.plan, 1.0)? - steady_state_pointer(&self.rc, &self.plan, -1.0)?).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveBaseline {
    pub omega_r_over_omega_q: f64,
    pub omega_r: f64,
    pub chi: f64,
    pub a_r: f64,
}

impl DispersiveBaseline {
    pub fn trajectories(&self, kappa: f64, t: &[f64]) -> Result<(Trajectory<f64>, Trajectory<f64>)> {
        let mut up = dispersive_trajectory(self.a_r, self.chi, kappa, 1.0, t)?;
        let mut down = dispersive_trajectory(self.a_r, self.chi, kappa, -1.0, t)?;
        up.label = "up".into();
        down.label = "down".into();
        Ok((up, down))
    }

    /// Cavity-only drive reproducing the baseline in the oracle.
    pub fn plan(&self) -> DrivePlan<f64> {
        DrivePlan { a_q: 0.0, a_r: self.a_r, phi: 1.5 * PI, omega_d: self.omega_r }
    }
}

fn reason(e: &Error) -> String {
    e.to_string().replace(['\n', ','], ";")
}

/// Sorted amplitude grid starting at zero, plus the indices of the
/// requested amplitudes in it.
fn continuation_grid(requested: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut grid: Vec<f64> = std::iter::once(0.0).chain(requested.iter().copied()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let idx = requested.iter().map(|a| grid.iter().position(|x| x == a).expect("present")).collect();
    (grid, idx)
}

/// Quasi-energies of the tracked zero-replica branches, one row per drive
/// frequency, amplitude and level.
pub fn cmd_spectrum(run: &Run) -> Result<Vec<Table>> {
    let wq = run.omega_q;
    let ratios = run.cfg.a_q_ratios();
    let amplitudes: Vec<f64> = ratios.iter().map(|r| r * wq).collect();
    let (grid, idx) = continuation_grid(&amplitudes);
    let with_static = run.cfg.sweep.static_reference;
    let mut cols = vec!["omega_d_over_omega_q", "a_q_over_omega_q", "level", "quasi_energy", "replica"];
    if with_static {
        cols.push("static_energy");
    }
    let mut table = Table::new("spectrum", &cols);
    let static_levels: Vec<Vec<f64>> = if with_static {
        amplitudes
            .iter()
            .map(|&a| {
                let h = run.model.hamiltonian() + run.model.charge_op.map(|z| z * a);
                hermitian_eigen(&h).0
            })
            .collect()
    } else {
        Vec::new()
    };
    let spectra: Vec<_> = run
        .cfg
        .omega_r_ratios()
        .par_iter()
        .map(|&r| (r, track_branches(&run.model, r * wq, &grid, &run.floquet)))
        .collect();
    for (r, spec) in spectra {
        let spec = spec?;
        for (i, (&ratio, &k)) in ratios.iter().zip(&idx).enumerate() {
            for (b, &level) in spec.levels.iter().enumerate() {
                let mut row: Vec<Cell> = vec![
                    r.into(),
                    ratio.into(),
                    level.into(),
                    spec.quasi_energies[k][b].into(),
                    spec.replica_index[k][b].into(),
                ];
                if with_static {
                    row.push(static_levels[i].get(level).copied().unwrap_or(f64::NAN).into());
                }
                table.push(row);
            }
        }
    }
    Ok(vec![table])
}

const COUPLING_COLUMNS: [&str; 13] = [
    "omega_r_over_omega_q",
    "a_q_over_omega_q",
    "omega_d",
    "g_par",
    "g_bar",
    "chi",
    "chi_bar",
    "gamma",
    "epsilon",
    "g_par_closed_form",
    "chi_closed_form",
    "status",
    "reason",
];

fn coupling_row(run: &Run, ratio: f64, a_ratio: f64, rc: Result<ReadoutCouplings<f64>>) -> Vec<Cell> {
    let omega_r = ratio * run.omega_q;
    let (g0, chi0) = run.closed_form(omega_r, a_ratio * run.omega_q);
    let head: Vec<Cell> = vec![ratio.into(), a_ratio.into(), omega_r.into()];
    let tail: Vec<Cell> = vec![g0.into(), chi0.into()];
    match rc {
        Ok(rc) => {
            let vals = [rc.g_par, rc.g_bar, rc.chi, rc.chi_bar, rc.gamma, rc.epsilon];
            head.into_iter()
                .chain(vals.into_iter().map(Cell::from))
                .chain(tail)
                .chain([Cell::from("ok"), Cell::from("")])
                .collect()
        }
        Err(e) => head
            .into_iter()
            .chain(std::iter::repeat_n(Cell::Num(f64::NAN), 6))
            .chain(tail)
            .chain([Cell::from("refused"), Cell::from(reason(&e))])
            .collect(),
    }
}

/// Logical couplings over the (resonator, drive) grid with `ω_d = ω_r`.
/// Points that fail carry `NaN` values and the reason.
pub fn cmd_couplings(run: &Run) -> Result<Vec<Table>> {
    let wq = run.omega_q;
    let a_ratios = run.cfg.a_q_ratios();
    let amplitudes: Vec<f64> = a_ratios.iter().map(|r| r * wq).collect();
    let fl = run.logical_floquet();
    let opts = run.cfg.derivative_options();
    let per_ratio: Vec<Vec<Vec<Cell>>> = run
        .cfg
        .omega_r_ratios()
        .par_iter()
        .map(|&ratio| {
            let omega_r = ratio * wq;
            match couplings_sweep(&run.model, omega_r, &amplitudes, run.g_perp(), &opts, &fl) {
                Ok((_, lcs)) => lcs
                    .into_iter()
                    .zip(&a_ratios)
                    .map(|(lc, &ar)| {
                        let rc = lc.and_then(|lc| reduce_two_level(&lc, &run.model, (0, 1), run.kappa(), omega_r));
                        coupling_row(run, ratio, ar, rc)
                    })
                    .collect(),
                Err(e) => a_ratios.iter().map(|&ar| coupling_row(run, ratio, ar, Err(e.clone()))).collect(),
            }
        })
        .collect();
    let mut table = Table::new("couplings", &COUPLING_COLUMNS);
    for row in per_ratio.into_iter().flatten() {
        table.push(row);
    }
    Ok(vec![table])
}

fn push_trajectory(table: &mut Table, ratio: f64, source: &str, tr: &Trajectory<f64>, kappa: f64) {
    for (&t, a) in tr.times.iter().zip(&tr.a) {
        table.push(vec![
            ratio.into(),
            source.into(),
            tr.label.as_str().into(),
            t.into(),
            (kappa * t).into(),
            a.re.into(),
            a.im.into(),
        ]);
    }
}

fn max_deviation(x: &[C<f64>], y: &[C<f64>]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

struct TrajectoryRun {
    ratio: f64,
    analytic: (Trajectory<f64>, Trajectory<f64>),
    oracle: Option<OracleComparison>,
}

struct OracleComparison {
    up: Trajectory<f64>,
    down: Trajectory<f64>,
    dev_up: f64,
    dev_down: f64,
    splitting: f64,
    photons: f64,
    trace_error: f64,
}

fn compare_with_oracle(
    run: &Run,
    omega_r: f64,
    plan: &DrivePlan<f64>,
    analytic: (Trajectory<f64>, Trajectory<f64>),
    splitting: f64,
) -> Result<OracleComparison> {
    let t = run.oracle_time_grid();
    let res = run.resonator(omega_r);
    let sim = run.sim_config();
    let (up, down) = rayon::join(
        || simulate(&run.model, &res, plan, 1, &t, &sim),
        || simulate(&run.model, &res, plan, 0, &t, &sim),
    );
    let (up, down) = (up?, down?);
    let (au, ad) = analytic;
    Ok(OracleComparison {
        dev_up: max_deviation(&au.a, &up.expect_a),
        dev_down: max_deviation(&ad.a, &down.expect_a),
        splitting,
        photons: up.nphoton_max().max(down.nphoton_max()),
        trace_error: up.trace_error.max(down.trace_error),
        up: up.trajectory("up"),
        down: down.trajectory("down"),
    })
}

/// Analytic pointer trajectories for both logical states at every
/// resonator ratio, with oracle runs and a deviation summary when enabled.
pub fn cmd_trajectory(run: &Run, oracle: OracleMode) -> Result<Vec<Table>> {
    let wq = run.omega_q;
    let kappa = run.kappa();
    let a_q = run.cfg.drive.a_q_over_omega_q * wq;
    let t = run.time_grid();
    let stride = run.cfg.oracle.stride;
    let runs: Vec<Result<TrajectoryRun>> = run
        .cfg
        .omega_r_ratios()
        .into_par_iter()
        .enumerate()
        .map(|(i, ratio)| {
            let omega_r = ratio * wq;
            let point = run.operating_point(omega_r, a_q)?;
            let analytic = point.trajectories(&t)?;
            let oracle = if oracle.selects(i, stride) {
                let on_grid = point.trajectories(&run.oracle_time_grid())?;
                Some(compare_with_oracle(run, omega_r, &point.plan, on_grid, point.steady_splitting()?)?)
            } else {
                None
            };
            Ok(TrajectoryRun { ratio, analytic, oracle })
        })
        .collect();

    let mut traj = Table::new("trajectory", &["omega_r_over_omega_q", "source", "state", "t", "kappa_t", "re_a", "im_a"]);
    let mut dev = Table::new(
        "trajectory_deviation",
        &["omega_r_over_omega_q", "protocol", "state", "max_abs_difference", "steady_splitting", "relative", "max_photons", "trace_error"],
    );
    let push_dev = |dev: &mut Table, ratio: f64, protocol: &str, o: &OracleComparison| {
        for (state, d) in [("up", o.dev_up), ("down", o.dev_down)] {
            dev.push(vec![
                ratio.into(),
                protocol.into(),
                state.into(),
                d.into(),
                o.splitting.into(),
                (d / o.splitting).into(),
                o.photons.into(),
                o.trace_error.into(),
            ]);
        }
    };
    for r in runs {
        let r = r?;
        push_trajectory(&mut traj, r.ratio, "analytic", &r.analytic.0, kappa);
        push_trajectory(&mut traj, r.ratio, "analytic", &r.analytic.1, kappa);
        if let Some(o) = &r.oracle {
            push_trajectory(&mut traj, r.ratio, "oracle", &o.up, kappa);
            push_trajectory(&mut traj, r.ratio, "oracle", &o.down, kappa);
            push_dev(&mut dev, r.ratio, "longitudinal", o);
        }
    }
    if let Some(base) = run.dispersive_baseline()? {
        let (up, down) = base.trajectories(kappa, &t)?;
        push_trajectory(&mut traj, base.omega_r_over_omega_q, "dispersive", &up, kappa);
        push_trajectory(&mut traj, base.omega_r_over_omega_q, "dispersive", &down, kappa);
        if oracle != OracleMode::Off {
            let on_grid = base.trajectories(kappa, &run.oracle_time_grid())?;
            let splitting = 2.0 * base.a_r * base.chi.abs() / (base.chi * base.chi + kappa * kappa / 4.0);
            let o = compare_with_oracle(run, base.omega_r, &base.plan(), on_grid, splitting)?;
            push_trajectory(&mut traj, base.omega_r_over_omega_q, "dispersive_oracle", &o.up, kappa);
            push_trajectory(&mut traj, base.omega_r_over_omega_q, "dispersive_oracle", &o.down, kappa);
            push_dev(&mut dev, base.omega_r_over_omega_q, "dispersive", &o);
        }
    }
    Ok(vec![traj, dev])
}

/// Analytic SNR at `t* = kappa_t_star/κ` for one operating point.
pub fn analytic_snr(point: &OperatingPoint, kappa: f64, t_star: f64, t_points: usize) -> Result<f64> {
    let t = time_grid(t_star, t_points);
    let (up, down) = point.trajectories(&t)?;
    let curve = snr(&up, &down, kappa)?;
    Ok(*curve.snr.last().expect("nonempty grid"))
}

fn oracle_snr(run: &Run, omega_r: f64, plan: &DrivePlan<f64>, t_star: f64) -> Result<f64> {
    let t = time_grid(t_star, run.cfg.oracle.t_points);
    let res = run.resonator(omega_r);
    let sim = run.sim_config();
    let (up, down) = rayon::join(
        || simulate(&run.model, &res, plan, 1, &t, &sim),
        || simulate(&run.model, &res, plan, 0, &t, &sim),
    );
    let curve = snr(&up?.trajectory("up"), &down?.trajectory("down"), res.kappa)?;
    snr_at(&curve, t_star).ok_or_else(|| Error::InvalidParameter("t_star outside the oracle grid".into()))
}

/// SNR at `t*` over the (resonator, drive) grid. Without compensation each
/// resonator ratio uses a single continuation over all drive values.
pub fn cmd_snr(run: &Run, oracle: OracleMode) -> Result<Vec<Table>> {
    let wq = run.omega_q;
    let kappa = run.kappa();
    let t_star = run.cfg.output.kappa_t_star / kappa;
    let t_points = run.cfg.output.t_points;
    let a_ratios = run.cfg.a_q_ratios();
    let amplitudes: Vec<f64> = a_ratios.iter().map(|r| r * wq).collect();
    let r_ratios = run.cfg.omega_r_ratios();
    let fl = run.logical_floquet();
    let opts = run.cfg.derivative_options();

    let points: Vec<Vec<Result<OperatingPoint>>> = r_ratios
        .par_iter()
        .map(|&ratio| {
            let omega_r = ratio * wq;
            if run.cfg.drive.compensation || run.cfg.drive.bare_polarization {
                return amplitudes.par_iter().map(|&a| run.operating_point(omega_r, a)).collect();
            }
            match couplings_sweep(&run.model, omega_r, &amplitudes, run.g_perp(), &opts, &fl) {
                Ok((spec, lcs)) => lcs
                    .into_iter()
                    .zip(&amplitudes)
                    .map(|(lc, &a)| {
                        let rc = reduce_two_level(&lc?, &run.model, (0, 1), kappa, omega_r)?;
                        let k = spec.point(a).ok_or_else(|| Error::InvalidParameter("drive point missing".into()))?;
                        Ok(OperatingPoint {
                            rc,
                            plan: DrivePlan::qubit_only(a, omega_r),
                            sigma_up: polarization_from_spectrum(&spec, k, 1)?,
                            sigma_down: polarization_from_spectrum(&spec, k, 0)?,
                        })
                    })
                    .collect(),
                Err(e) => amplitudes.iter().map(|_| Err(e.clone())).collect(),
            }
        })
        .collect();

    let flat: Vec<(f64, f64, Result<OperatingPoint>)> = r_ratios
        .iter()
        .zip(points)
        .flat_map(|(&r, pts)| a_ratios.iter().zip(pts).map(move |(&a, p)| (r, a, p)))
        .collect();
    let stride = run.cfg.oracle.stride;
    let rows: Vec<Vec<Cell>> = flat
        .into_par_iter()
        .enumerate()
        .map(|(i, (ratio, a_ratio, point))| {
            let value = point.and_then(|p| {
                let s = analytic_snr(&p, kappa, t_star, t_points)?;
                let o = if oracle.selects(i, stride) { oracle_snr(run, ratio * wq, &p.plan, t_star)? } else { f64::NAN };
                Ok((s, o))
            });
            let head: Vec<Cell> = vec!["longitudinal".into(), ratio.into(), a_ratio.into()];
            match value {
                Ok((s, o)) => head.into_iter().chain([s.into(), o.into(), "".into()]).collect(),
                Err(e) => head.into_iter().chain([f64::NAN.into(), f64::NAN.into(), reason(&e).into()]).collect(),
            }
        })
        .collect();

    let mut table =
        Table::new("snr", &["protocol", "omega_r_over_omega_q", "a_q_over_omega_q", "snr_analytic", "snr_oracle", "reason"]);
    for row in rows {
        table.push(row);
    }
    if let Some(base) = run.dispersive_baseline()? {
        let t = time_grid(t_star, t_points);
        let (up, down) = base.trajectories(kappa, &t)?;
        let s = *snr(&up, &down, kappa)?.snr.last().expect("nonempty grid");
        let o = if oracle != OracleMode::Off { oracle_snr(run, base.omega_r, &base.plan(), t_star)? } else { f64::NAN };
        table.push(vec!["dispersive".into(), base.omega_r_over_omega_q.into(), 0.0.into(), s.into(), o.into(), "".into()]);
    }
    Ok(vec![table])
}

/// Built-in devices with their default parameters.
pub fn cmd_models() -> Result<Vec<Table>> {
    let mut table = Table::new(
        "models",
        &["device", "energy_unit", "levels", "omega_q", "abs_q01", "n_rep", "floquet_dimension"],
    );
    let models: Vec<(&str, SystemModel<f64>)> = vec![
        ("omega_q", build_charge_qubit(1.0)?),
        ("Delta", build_flopping_mode(&FloppingParams::spin_like())?),
        ("E_J", build_transmon(&TransmonParams::table())?),
        ("E_J", build_fluxonium(&FluxoniumParams::table())?),
    ];
    for (unit, m) in models {
        let n_rep = FloquetConfig::for_device(&m.label).n_rep;
        table.push(vec![
            m.label.as_str().into(),
            unit.into(),
            m.dim().into(),
            m.omega_q().into(),
            m.charge_op[(0, 1)].norm().into(),
            n_rep.into(),
            (m.dim() * (2 * n_rep + 1)).into(),
        ]);
    }
    Ok(vec![table])
}
