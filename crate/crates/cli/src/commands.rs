//! The `simulate`, `hysteresis` and `sweep` experiments.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use viscodiff_core::diagnostics::l2_distance;
use viscodiff_core::energy::regularized_dpsi;
use viscodiff_core::hysteresis::run_hysteresis;
use viscodiff_core::{
    run, EnergyKind, FreeEnergyModel, HysteresisConfig, HysteresisRun, SimulationConfig, Trajectory,
};

use crate::config_file::{default_nodes, parse_config, ExperimentConfig};
use crate::error::{CliError, ConfigError};
use crate::output::{
    ensure_dir, fmt_g17, write_csv, write_loop, write_text, write_timeseries, write_trajectory,
};
use crate::svg::{LinePlot, Series};

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const TIMESERIES_CSV: &str = "timeseries.csv";
pub const LOOP_CSV: &str = "loop.csv";
pub const TIMESERIES_SVG: &str = "timeseries.svg";
pub const LOOP_SVG: &str = "loop.svg";
pub const SWEEP_SUMMARY_CSV: &str = "sweep_summary.csv";

/// Caps the number of sweep members run at once.
pub const THREADS_ENV: &str = "VISCODIFF_THREADS";

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// Runs a simulation and writes `trajectory.csv` into `out`.
///
/// A run that fails part-way still writes the samples it produced; the
/// returned trajectory then has `failure` set.
pub fn simulate_into(config: &SimulationConfig, out: &Path) -> Result<Trajectory, CliError> {
    ensure_dir(out)?;
    let path = out.join(TRAJECTORY_CSV);
    let trajectory = match run(config) {
        Ok(t) => t,
        Err(err) => Trajectory {
            samples: Vec::new(),
            failure: Some(err),
            advisories: Vec::new(),
        },
    };
    write_trajectory(&path, config.modes, &trajectory)?;
    Ok(trajectory)
}

/// `simulate`: errors with the solver failure after writing partial output.
pub fn cmd_simulate(config: &SimulationConfig, out: &Path) -> Result<Trajectory, CliError> {
    let mut trajectory = simulate_into(config, out)?;
    match trajectory.failure.take() {
        Some(err) => Err(err.into()),
        None => Ok(trajectory),
    }
}

/// `hysteresis`: time series and loop as CSV and SVG.
pub fn cmd_hysteresis(config: &HysteresisConfig, out: &Path) -> Result<HysteresisRun, CliError> {
    ensure_dir(out)?;
    let result = run_hysteresis(config)?;
    write_timeseries(&out.join(TIMESERIES_CSV), &result.samples)?;
    write_loop(&out.join(LOOP_CSV), &result.steady_loop)?;

    let mode = match config.tau {
        Some(tau) => format!("viscous, tau = {tau}, beta = {}", config.beta),
        None => "quasi-static".to_owned(),
    };
    let series = timeseries_plot(&result, config, &mode);
    write_text(&out.join(TIMESERIES_SVG), &series.render())?;
    let loop_plot = LinePlot {
        title: format!(
            "Hysteresis loop, last period (A = {}, gamma = {}, {mode})",
            config.amplitude, config.threshold
        ),
        x_label: "w = A z(s)".into(),
        y_label: "y = K v(s)".into(),
        series: vec![Series {
            label: "(w, y)".into(),
            points: result.steady_loop.clone(),
        }],
    };
    write_text(&out.join(LOOP_SVG), &loop_plot.render())?;
    Ok(result)
}

fn timeseries_plot(result: &HysteresisRun, config: &HysteresisConfig, mode: &str) -> LinePlot {
    LinePlot {
        title: format!(
            "Driver and response (A = {}, gamma = {}, K = {}, {mode})",
            config.amplitude, config.threshold, config.stiffness
        ),
        x_label: "s".into(),
        y_label: "value".into(),
        series: vec![
            Series {
                label: "w = A z(s)".into(),
                points: result.samples.iter().map(|p| (p.s, p.w)).collect(),
            },
            Series {
                label: "y = K v(s)".into(),
                points: result.samples.iter().map(|p| (p.s, p.y)).collect(),
            },
        ],
    }
}

/// Parameters `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    Modes,
    Dt,
    Tau,
    Amplitude,
    Threshold,
    Epsilon,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::Modes => "n",
            Self::Dt => "dt",
            Self::Tau => "tau",
            Self::Amplitude => "A",
            Self::Threshold => "gamma",
            Self::Epsilon => "epsilon",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "beta" => Self::Beta,
            "n" => Self::Modes,
            "dt" => Self::Dt,
            "tau" => Self::Tau,
            "A" => Self::Amplitude,
            "gamma" => Self::Threshold,
            "epsilon" => Self::Epsilon,
            _ => {
                return Err(ConfigError::new(
                    None,
                    Some("param"),
                    format!("unknown sweep parameter `{s}`, expected one of beta, n, dt, tau, A, gamma, epsilon"),
                ))
            }
        })
    }
}

/// Checks that `param` applies to `base` at all.
pub fn check_sweep(base: &ExperimentConfig, param: SweepParam) -> Result<(), ConfigError> {
    let ok = match (base, param) {
        (_, SweepParam::Beta) => true,
        (ExperimentConfig::Simulate(_), SweepParam::Modes | SweepParam::Dt) => true,
        (ExperimentConfig::Simulate(c), SweepParam::Epsilon) => {
            matches!(c.model, EnergyKind::RegularizedLog { .. })
        }
        (
            ExperimentConfig::Hysteresis(_),
            SweepParam::Tau | SweepParam::Amplitude | SweepParam::Threshold,
        ) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(
            None,
            Some("param"),
            format!(
                "`{param}` cannot be swept for a [{}] configuration",
                base.section()
            ),
        ))
    }
}

/// `base` with `param` set to `value`, validated.
pub fn apply_sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    value: f64,
) -> Result<ExperimentConfig, ConfigError> {
    check_sweep(base, param)?;
    let mut c = base.clone();
    match (&mut c, param) {
        (ExperimentConfig::Simulate(s), SweepParam::Beta) => s.beta = value,
        (ExperimentConfig::Hysteresis(h), SweepParam::Beta) => h.beta = value,
        (ExperimentConfig::Simulate(s), SweepParam::Modes) => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                return Err(ConfigError::new(
                    None,
                    Some("n"),
                    format!("expected a positive integer, got {value}"),
                ));
            }
            let n = value as usize;
            s.quadrature_nodes = if s.quadrature_nodes == default_nodes(s.modes) {
                default_nodes(n)
            } else {
                s.quadrature_nodes.max(4 * n)
            };
            s.modes = n;
        }
        (ExperimentConfig::Simulate(s), SweepParam::Dt) => s.dt = value,
        (ExperimentConfig::Simulate(s), SweepParam::Epsilon) => {
            if let EnergyKind::RegularizedLog { epsilon, .. } = &mut s.model {
                *epsilon = value;
            }
        }
        (ExperimentConfig::Hysteresis(h), SweepParam::Tau) => h.tau = Some(value),
        (ExperimentConfig::Hysteresis(h), SweepParam::Amplitude) => h.amplitude = value,
        (ExperimentConfig::Hysteresis(h), SweepParam::Threshold) => h.threshold = value,
        _ => unreachable!("rejected by check_sweep"),
    }
    c.validate()?;
    Ok(c)
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    /// `None` on success, otherwise the failure message.
    pub failure: Option<String>,
    pub wall_seconds: f64,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Simulate {
        final_free_energy: Option<f64>,
        max_abs_residual: Option<f64>,
        final_coeffs: Option<Vec<f64>>,
        /// L² distance of the final state to the previous row's.
        l2_delta_prev: Option<f64>,
        /// `max |psi_eps' - psi'|` on `[0.2, 0.8]` (epsilon sweeps).
        max_dpsi_gap: Option<f64>,
    },
    Hysteresis {
        loop_area: Option<f64>,
        sup_distance: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    pub summary: PathBuf,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }
}

/// Number of worker threads from `VISCODIFF_THREADS` (0 = rayon default).
pub fn sweep_threads() -> Result<usize, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                ConfigError::new(
                    None,
                    Some(THREADS_ENV),
                    format!("expected a positive integer, got `{v}`"),
                )
            }),
    }
}

/// `sweep`: one run per value, in parallel, each in its own directory under
/// `out`, then a summary CSV.
pub fn cmd_sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    out: &Path,
    threads: usize,
) -> Result<SweepReport, CliError> {
    check_sweep(base, param)?;
    if values.is_empty() {
        return Err(ConfigError::new(None, Some("values"), "no sweep values given").into());
    }
    ensure_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::new(None, Some(THREADS_ENV), e.to_string()))?;
    let width = values.len().to_string().len();
    let rows: Vec<Result<SweepRow, CliError>> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                let dir = out.join(format!("{i:0width$}_{param}={}", fmt_g17(value)));
                sweep_member(base, param, value, dir)
            })
            .collect()
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut prev: Option<Vec<f64>> = None;
    for row in &mut rows {
        if let SweepOutcome::Simulate {
            final_coeffs,
            l2_delta_prev,
            ..
        } = &mut row.outcome
        {
            *l2_delta_prev = match (&prev, &*final_coeffs) {
                (Some(p), Some(c)) => Some(l2_distance(p, c)),
                _ => None,
            };
            prev = final_coeffs.clone();
        }
    }

    let summary = out.join(SWEEP_SUMMARY_CSV);
    write_summary(&summary, param, &rows)?;
    Ok(SweepReport {
        param,
        rows,
        summary,
    })
}

fn sweep_member(
    base: &ExperimentConfig,
    param: SweepParam,
    value: f64,
    dir: PathBuf,
) -> Result<SweepRow, CliError> {
    let start = Instant::now();
    let empty = match base {
        ExperimentConfig::Simulate(_) => SweepOutcome::Simulate {
            final_free_energy: None,
            max_abs_residual: None,
            final_coeffs: None,
            l2_delta_prev: None,
            max_dpsi_gap: None,
        },
        ExperimentConfig::Hysteresis(_) => SweepOutcome::Hysteresis {
            loop_area: None,
            sup_distance: None,
        },
    };
    let config = match apply_sweep(base, param, value) {
        Ok(c) => c,
        Err(e) => {
            return Ok(SweepRow {
                value,
                dir,
                failure: Some(format!("invalid: {e}")),
                wall_seconds: 0.0,
                outcome: empty,
            })
        }
    };
    let (failure, outcome) = match &config {
        ExperimentConfig::Simulate(c) => {
            let t = simulate_into(c, &dir)?;
            let last = t.samples.last();
            let complete = t.failure.is_none();
            let outcome = SweepOutcome::Simulate {
                final_free_energy: last.filter(|_| complete).map(|s| s.diagnostics.free_energy),
                max_abs_residual: (!t.samples.is_empty()).then(|| {
                    t.samples
                        .iter()
                        .map(|s| s.diagnostics.energy_residual.abs())
                        .fold(0.0, f64::max)
                }),
                final_coeffs: last.filter(|_| complete).map(|s| s.a.to_vec()),
                l2_delta_prev: None,
                max_dpsi_gap: (param == SweepParam::Epsilon)
                    .then(|| max_dpsi_gap(&c.model))
                    .flatten(),
            };
            (t.failure.map(|e| e.to_string()), outcome)
        }
        ExperimentConfig::Hysteresis(h) => match cmd_hysteresis(h, &dir) {
            Ok(r) => (
                None,
                SweepOutcome::Hysteresis {
                    loop_area: Some(r.loop_area),
                    sup_distance: Some(r.sup_distance),
                },
            ),
            Err(CliError::Solver(e)) => (Some(e.to_string()), empty),
            Err(e) => return Err(e),
        },
    };
    Ok(SweepRow {
        value,
        dir,
        failure,
        wall_seconds: start.elapsed().as_secs_f64(),
        outcome,
    })
}

/// Grid on which the regularized and exact slopes are compared.
pub const DPSI_GAP_GRID: (f64, f64, usize) = (0.2, 0.8, 601);

/// `max |psi_eps'(r) - psi'(r)|` over `r` in `[0.2, 0.8]`.
pub fn max_dpsi_gap(model: &EnergyKind) -> Option<f64> {
    let EnergyKind::RegularizedLog { k, chi, epsilon } = *model else {
        return None;
    };
    let exact = FreeEnergyModel::regular_solution(k, chi).ok()?;
    let (lo, hi, n) = DPSI_GAP_GRID;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .map(|r| {
            exact
                .dpsi(r)
                .map(|d| (regularized_dpsi(k, chi, epsilon, r) - d).abs())
        })
        .try_fold(0.0, |m, g| g.map(|g| f64::max(m, g)))
        .ok()
}

fn write_summary(path: &Path, param: SweepParam, rows: &[SweepRow]) -> Result<(), CliError> {
    let opt = |x: &Option<f64>| x.map(fmt_g17).unwrap_or_default();
    let simulate = matches!(
        rows.first().map(|r| &r.outcome),
        Some(SweepOutcome::Simulate { .. })
    );
    let header: Vec<String> = if simulate {
        vec![
            "param",
            "value",
            "status",
            "final_free_energy",
            "max_abs_energy_residual",
            "l2_delta_prev",
            "max_dpsi_gap",
            "wall_seconds",
            "output_dir",
        ]
    } else {
        vec![
            "param",
            "value",
            "status",
            "loop_area",
            "sup_distance_to_play",
            "wall_seconds",
            "output_dir",
        ]
    }
    .into_iter()
    .map(String::from)
    .collect();
    let records = rows.iter().map(|r| {
        let mut rec = vec![
            param.name().to_owned(),
            fmt_g17(r.value),
            r.failure
                .as_ref()
                .map_or_else(|| "ok".to_owned(), |f| format!("failed: {f}")),
        ];
        match &r.outcome {
            SweepOutcome::Simulate {
                final_free_energy,
                max_abs_residual,
                l2_delta_prev,
                max_dpsi_gap,
                ..
            } => rec.extend([
                opt(final_free_energy),
                opt(max_abs_residual),
                opt(l2_delta_prev),
                opt(max_dpsi_gap),
            ]),
            SweepOutcome::Hysteresis {
                loop_area,
                sup_distance,
            } => rec.extend([opt(loop_area), opt(sup_distance)]),
        }
        rec.push(fmt_g17(r.wall_seconds));
        rec.push(
            r.dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        rec
    });
    write_csv(path, &header, records)
}
