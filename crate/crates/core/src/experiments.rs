//! Orchestration of the four experiment families behind the CLI.
//!
//! Each runner turns a validated [`ExperimentConfig`] into a [`Table`] plus
//! human-readable summary lines. Grid points are independent trajectories
//! and run on a worker pool; results are collected by grid index, never by
//! completion order, so repeated runs of the same config produce identical
//! tables (and therefore byte-identical CSV files).

use rayon::prelude::*;

use crate::analysis::{
    final_ground_population, find_alpha_z_minimum, find_optimal_velocity, ground_population,
    relative_gain,
};
use crate::bath::Environment;
use crate::config::{ExperimentConfig, ExperimentKind, OptimizeTarget, OutputFormat, SweepMode};
use crate::dynamics::{integrate, IntegratorConfig, Trajectory, NORM_WARNING_TOL};
use crate::error::{Error, Result};
use crate::output::{emit_csv, emit_svg, format_significant, PlotHint, Table};

/// A finished experiment: the table to emit plus summary lines for stdout.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub summary: Vec<String>,
    /// Largest Bloch-norm excess over every trajectory of the run.
    pub max_norm_excess: f64,
}

/// Dispatch an experiment on the configured worker pool.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let work = || match cfg.experiment {
        ExperimentKind::Trace => run_time_trace(cfg),
        ExperimentKind::VelocitySweep => run_velocity_sweep(cfg),
        ExperimentKind::CouplingGrid => run_coupling_grid(cfg),
        ExperimentKind::AlphaZCurve => run_alpha_z_curve(cfg),
        ExperimentKind::Optimize => run_optimize(cfg),
    };
    let mut out = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::validation("workers", e.to_string()))?;
        pool.install(work)?
    } else {
        work()?
    };
    if out.max_norm_excess > NORM_WARNING_TOL {
        out.summary.push(format!(
            "warning: Bloch norm exceeded 1 by {:.3e}; tighten tolerances",
            out.max_norm_excess
        ));
    }
    Ok(out)
}

/// Run and write the table in the configured format(s). With `format = both`
/// the SVG lands next to the CSV with its extension swapped.
pub fn run_and_emit(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let out = run(cfg)?;
    match cfg.format {
        OutputFormat::Csv => emit_csv(&out.table, &cfg.out)?,
        OutputFormat::Svg => emit_svg(&out.table, &cfg.out)?,
        OutputFormat::Both => {
            emit_csv(&out.table, &cfg.out)?;
            emit_svg(&out.table, &cfg.out.with_extension("svg"))?;
        }
    }
    Ok(out)
}

fn sweep_population(
    cfg: &ExperimentConfig,
    env: &Environment,
    velocity: f64,
    icfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let traj: Trajectory = integrate(&cfg.protocol(velocity)?, env, icfg)?;
    Ok((final_ground_population(&traj), traj.meta.max_norm_excess))
}

/// Final ground population across the velocity grid, per temperature, with
/// the longitudinal-only and two-bath runs side by side.
pub fn run_velocity_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let icfg = cfg.integrator_config();
    let tasks: Vec<(f64, f64)> = cfg
        .temperature_list
        .iter()
        .flat_map(|&t| cfg.velocity_grid.iter().map(move |&v| (t, v)))
        .collect();
    let computed: Vec<(Vec<f64>, f64)> = tasks
        .par_iter()
        .map(|&(t, v)| -> Result<(Vec<f64>, f64)> {
            let mut with_t = cfg.clone();
            with_t.temperature = t;
            let mut row = vec![t, v];
            let mut excess = 0.0f64;
            if cfg.mode != SweepMode::XZ {
                let env = with_t.environment(0.0, cfg.alpha_z)?;
                let (p, e) = sweep_population(cfg, &env, v, &icfg)?;
                row.push(p);
                excess = excess.max(e);
            }
            if cfg.mode != SweepMode::ZOnly {
                let env = with_t.environment(cfg.alpha_x, cfg.alpha_z)?;
                let (p, e) = sweep_population(cfg, &env, v, &icfg)?;
                row.push(p);
                excess = excess.max(e);
            }
            if cfg.mode == SweepMode::Both {
                let gain = relative_gain(row[3], row[2])?;
                row.push(gain);
            }
            Ok((row, excess))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut headers = vec!["temperature".to_string(), "velocity".to_string()];
    let mut ys = Vec::new();
    if cfg.mode != SweepMode::XZ {
        ys.push(headers.len());
        headers.push("p_g_z".to_string());
    }
    if cfg.mode != SweepMode::ZOnly {
        ys.push(headers.len());
        headers.push("p_g_xz".to_string());
    }
    if cfg.mode == SweepMode::Both {
        headers.push("gain".to_string());
    }
    let mut table = Table::new(
        headers,
        PlotHint::Lines {
            x: 1,
            ys,
            series: Some(0),
            log_x: true,
            log_y: false,
        },
    );
    let mut max_excess = 0.0f64;
    for (row, excess) in computed {
        table.push_row(row);
        max_excess = max_excess.max(excess);
    }

    let mut summary = vec![format!(
        "velocity sweep: {} velocities x {} temperatures ({})",
        cfg.velocity_grid.len(),
        cfg.temperature_list.len(),
        cfg.mode.as_str()
    )];
    if cfg.mode == SweepMode::Both {
        if let Some(best) = table
            .rows
            .iter()
            .max_by(|a, b| a[4].total_cmp(&b[4]).then(b[1].total_cmp(&a[1])))
        {
            summary.push(format!(
                "largest gain {} at v = {} (T = {})",
                format_significant(best[4], 6),
                format_significant(best[1], 6),
                format_significant(best[0], 6)
            ));
        }
    }
    Ok(RunOutput {
        table,
        summary,
        max_norm_excess: max_excess,
    })
}

/// p_G over the (α_x, α_z) plane at fixed temperature and velocity.
/// Rows are α_x values, columns are the α_z grid.
pub fn run_coupling_grid(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let icfg = cfg.integrator_config();
    let tasks: Vec<(f64, f64)> = cfg
        .alpha_x_grid
        .iter()
        .flat_map(|&ax| cfg.alpha_z_grid.iter().map(move |&az| (ax, az)))
        .collect();
    let computed: Vec<(f64, f64)> = tasks
        .par_iter()
        .map(|&(ax, az)| -> Result<(f64, f64)> {
            let env = cfg.environment(ax, az)?;
            sweep_population(cfg, &env, cfg.velocity, &icfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut headers = vec!["alpha_x".to_string()];
    headers.extend(cfg.alpha_z_grid.iter().map(|&az| format_significant(az, 12)));
    let mut table = Table::new(
        headers,
        PlotHint::Heatmap {
            log_x: true,
            log_y: true,
        },
    );
    let n_az = cfg.alpha_z_grid.len();
    let mut max_excess = 0.0f64;
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for (ri, &ax) in cfg.alpha_x_grid.iter().enumerate() {
        let mut row = Vec::with_capacity(n_az + 1);
        row.push(ax);
        for (p, excess) in &computed[ri * n_az..(ri + 1) * n_az] {
            row.push(*p);
            max_excess = max_excess.max(*excess);
            vmin = vmin.min(*p);
            vmax = vmax.max(*p);
        }
        table.push_row(row);
    }
    let summary = vec![format!(
        "coupling grid {}x{} at T = {}, v = {}; p_g in [{}, {}]",
        cfg.alpha_x_grid.len(),
        n_az,
        format_significant(cfg.temperature, 6),
        format_significant(cfg.velocity, 6),
        format_significant(vmin, 6),
        format_significant(vmax, 6)
    )];
    Ok(RunOutput {
        table,
        summary,
        max_norm_excess: max_excess,
    })
}

/// p_G versus α_z with the transverse bath off, plus the located minimum.
pub fn run_alpha_z_curve(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let icfg = cfg.integrator_config();
    let computed: Vec<(f64, f64)> = cfg
        .alpha_z_grid
        .par_iter()
        .map(|&az| -> Result<(f64, f64)> {
            let env = cfg.environment(0.0, az)?;
            sweep_population(cfg, &env, cfg.velocity, &icfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        vec!["alpha_z".to_string(), "p_g".to_string()],
        PlotHint::Lines {
            x: 0,
            ys: vec![1],
            series: None,
            log_x: true,
            log_y: false,
        },
    );
    let mut max_excess = 0.0f64;
    for (&az, &(p, excess)) in cfg.alpha_z_grid.iter().zip(&computed) {
        table.push_row(vec![az, p]);
        max_excess = max_excess.max(excess);
    }

    let summary = if cfg.alpha_z_grid.len() == 1 {
        vec![format!(
            "single-point grid: minimum p_g = {} at alpha_z = {}",
            format_significant(computed[0].0, 6),
            format_significant(cfg.alpha_z_grid[0], 6)
        )]
    } else {
        let template = cfg.environment(0.0, cfg.alpha_z)?;
        let proto = cfg.protocol(cfg.velocity)?;
        let range = (
            cfg.alpha_z_grid[0],
            cfg.alpha_z_grid[cfg.alpha_z_grid.len() - 1],
        );
        let minimum = find_alpha_z_minimum(&template, &proto, range, cfg.alpha_z_grid.len(), &icfg)?;
        vec![format!(
            "minimum p_g = {} at alpha_z = {} ({} evaluations)",
            format_significant(minimum.value, 6),
            format_significant(minimum.x, 6),
            minimum.evaluations
        )]
    };
    Ok(RunOutput {
        table,
        summary,
        max_norm_excess: max_excess,
    })
}

/// Bloch components and ground population along single sweeps, one block
/// per overlaid transverse coupling.
pub fn run_time_trace(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let icfg = cfg.integrator_config();
    let alphas = cfg.trace_alphas();
    let trajectories: Vec<Trajectory> = alphas
        .par_iter()
        .map(|&ax| -> Result<Trajectory> {
            let env = cfg.environment(ax, cfg.alpha_z)?;
            integrate(&cfg.protocol(cfg.velocity)?, &env, &icfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        vec![
            "alpha_x".to_string(),
            "t".to_string(),
            "p_g".to_string(),
            "r_x".to_string(),
            "r_y".to_string(),
            "r_z".to_string(),
        ],
        PlotHint::Lines {
            x: 1,
            ys: vec![2],
            series: Some(0),
            log_x: false,
            log_y: false,
        },
    );
    let mut summary = Vec::new();
    let mut max_excess = 0.0f64;
    for (&ax, traj) in alphas.iter().zip(&trajectories) {
        for (&t, s) in traj.times.iter().zip(&traj.states) {
            table.push_row(vec![ax, t, ground_population(s), s.x, s.y, s.z]);
        }
        summary.push(format!(
            "alpha_x = {}: final p_g = {}",
            format_significant(ax, 6),
            format_significant(final_ground_population(traj), 6)
        ));
        max_excess = max_excess.max(traj.meta.max_norm_excess);
    }
    Ok(RunOutput {
        table,
        summary,
        max_norm_excess: max_excess,
    })
}

/// Scan-and-refine search for the optimal velocity or longitudinal coupling.
pub fn run_optimize(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let icfg = cfg.integrator_config();
    let (label, ext) = match cfg.target {
        OptimizeTarget::Velocity => {
            let env = cfg.environment(cfg.alpha_x, cfg.alpha_z)?;
            let ext = find_optimal_velocity(
                &env,
                cfg.offset,
                cfg.span_product,
                cfg.scan_range,
                cfg.scan_points,
                &icfg,
            )?;
            ("velocity_opt", ext)
        }
        OptimizeTarget::AlphaZ => {
            let template = cfg.environment(0.0, cfg.alpha_z)?;
            let proto = cfg.protocol(cfg.velocity)?;
            let ext = find_alpha_z_minimum(&template, &proto, cfg.scan_range, cfg.scan_points, &icfg)?;
            ("alpha_z_opt", ext)
        }
    };
    let mut table = Table::new(
        vec![label.to_string(), "p_g".to_string(), "evaluations".to_string()],
        PlotHint::None,
    );
    table.push_row(vec![ext.x, ext.value, ext.evaluations as f64]);
    let summary = vec![format!(
        "{label} = {} with p_g = {} ({} evaluations)",
        format_significant(ext.x, 6),
        format_significant(ext.value, 6),
        ext.evaluations
    )];
    Ok(RunOutput {
        table,
        summary,
        max_norm_excess: 0.0,
    })
}
