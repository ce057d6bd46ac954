//! Observables and derived quantities: ground-state population, the
//! closed-form sweep asymptote, relative cooling gain, and derivative-free
//! optimum finders for velocity and coupling.
//!
//! The figure of merit is the population of the adiabatic ground state of
//! −(E/2)σ_x, i.e. p_G = (1 + r_x)/2. The inertial correction to the true
//! instantaneous eigenstate is O(φ̇/E) ≈ 1e−6 at the window edges and is
//! deliberately not applied.
//!
//! The finders make no unimodality assumption: a coarse log-spaced scan
//! locates the best grid point, then a golden-section pass refines inside
//! the neighboring bracket. Grid points are evaluated concurrently; the
//! argmax/argmin reduce is sequential with ties broken toward the smaller
//! parameter, so results are deterministic.

use rayon::prelude::*;

use crate::bath::{BathSpec, Environment};
use crate::dynamics::{integrate, BlochState, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::model::SweepProtocol;

/// Refinement stops when the log-space bracket is narrower than this.
const REFINE_LOG_TOL: f64 = 1e-3;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Population of the adiabatic ground state, (1 + r_x)/2.
pub fn ground_population(s: &BlochState) -> f64 {
    0.5 * (1.0 + s.x)
}

/// Ground population at the end of a trajectory.
pub fn final_ground_population(traj: &Trajectory) -> f64 {
    ground_population(&traj.final_state())
}

/// Closed-form retained ground population of the coherent linear sweep,
/// 1 − e^{−π δ²/(2v)}. Requires v > 0.
pub fn lz_asymptote(v: f64, delta: f64) -> f64 {
    -(-std::f64::consts::PI * delta * delta / (2.0 * v)).exp_m1()
}

/// Relative improvement (p_xz − p_z)/p_z of the two-bath run over the
/// longitudinal-only run.
pub fn relative_gain(p_xz: f64, p_z: f64) -> Result<f64> {
    if !(p_z > 0.0) {
        return Err(Error::Domain(format!(
            "relative gain undefined for reference population {p_z}"
        )));
    }
    Ok((p_xz - p_z) / p_z)
}

/// Ground population sampled along a trajectory.
#[derive(Debug, Clone)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub populations: Vec<f64>,
}

impl PopulationTrace {
    pub fn final_value(&self) -> f64 {
        *self.populations.last().expect("trace has samples")
    }

    /// Smallest population over the whole trace (the transient dip).
    pub fn min_value(&self) -> f64 {
        self.populations.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Map [`ground_population`] over every sample of a trajectory.
pub fn population_trace(traj: &Trajectory) -> PopulationTrace {
    PopulationTrace {
        times: traj.times.clone(),
        populations: traj.states.iter().map(ground_population).collect(),
    }
}

/// Result of a scan-and-refine search.
#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    /// Location of the refined optimum.
    pub x: f64,
    /// Objective value at `x`.
    pub value: f64,
    /// Total objective evaluations spent (scan plus refinement).
    pub evaluations: usize,
}

/// `count` log-spaced points covering [lo, hi] with exact endpoints.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && count >= 2);
    let (la, lb) = (lo.ln(), hi.ln());
    let step = (lb - la) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|i| (la + step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[count - 1] = hi;
    grid
}

/// Scan `grid` (concurrently), then refine the best point by golden-section
/// search in log space inside the neighboring bracket. Ties prefer the
/// smaller parameter. `maximize` selects the sense of the search.
pub(crate) fn refine_log_extremum(
    f: &(impl Fn(f64) -> Result<f64> + Sync),
    grid: &[f64],
    maximize: bool,
) -> Result<Extremum> {
    debug_assert!(!grid.is_empty());
    let sign = if maximize { 1.0 } else { -1.0 };
    let scan: Vec<f64> = grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut evaluations = grid.len();

    let mut best_i = 0;
    for (i, &v) in scan.iter().enumerate() {
        if sign * v > sign * scan[best_i] {
            best_i = i;
        }
    }
    let mut best_x = grid[best_i];
    let mut best_v = scan[best_i];
    if grid.len() == 1 {
        return Ok(Extremum {
            x: best_x,
            value: best_v,
            evaluations,
        });
    }

    let mut a = grid[best_i.saturating_sub(1)].ln();
    let mut b = grid[(best_i + 1).min(grid.len() - 1)].ln();
    let mut probe = |xl: f64, evals: &mut usize| -> Result<f64> {
        let x = xl.exp();
        let v = f(x)?;
        *evals += 1;
        if sign * v > sign * best_v || (sign * v == sign * best_v && x < best_x) {
            best_x = x;
            best_v = v;
        }
        Ok(v)
    };

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = probe(x1, &mut evaluations)?;
    let mut f2 = probe(x2, &mut evaluations)?;
    while b - a > REFINE_LOG_TOL {
        if sign * f1 >= sign * f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = probe(x1, &mut evaluations)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = probe(x2, &mut evaluations)?;
        }
    }
    Ok(Extremum {
        x: best_x,
        value: best_v,
        evaluations,
    })
}

fn check_range(name: &'static str, range: (f64, f64)) -> Result<()> {
    let (lo, hi) = range;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(Error::validation(
            name,
            format!("need 0 < lo < hi, got ({lo}, {hi})"),
        ));
    }
    Ok(())
}

/// Locate the sweep velocity maximizing the final ground population for a
/// fixed environment. Scans `scan_points` log-spaced velocities in
/// `v_range`, then refines. No unimodality is assumed.
pub fn find_optimal_velocity(
    env: &Environment,
    offset: f64,
    span_product: f64,
    v_range: (f64, f64),
    scan_points: usize,
    cfg: &IntegratorConfig,
) -> Result<Extremum> {
    check_range("v_range", v_range)?;
    if scan_points < 2 {
        return Err(Error::validation("scan_points", "need at least 2"));
    }
    let grid = log_grid(v_range.0, v_range.1, scan_points);
    let objective = |v: f64| -> Result<f64> {
        let p = SweepProtocol::new(v, offset, span_product)?;
        Ok(final_ground_population(&integrate(&p, env, cfg)?))
    };
    refine_log_extremum(&objective, &grid, true)
}

/// Locate the longitudinal coupling minimizing the final ground population
/// with the transverse bath switched off. The template environment supplies
/// the temperature and cutoffs; its α_x must be zero.
pub fn find_alpha_z_minimum(
    env_template: &Environment,
    p: &SweepProtocol,
    alpha_range: (f64, f64),
    scan_points: usize,
    cfg: &IntegratorConfig,
) -> Result<Extremum> {
    if env_template.bath_x().alpha() != 0.0 {
        return Err(Error::validation(
            "alpha_x",
            "the longitudinal-coupling scan requires the transverse bath off (alpha_x = 0)",
        ));
    }
    check_range("alpha_range", alpha_range)?;
    if scan_points < 2 {
        return Err(Error::validation("scan_points", "need at least 2"));
    }
    let grid = log_grid(alpha_range.0, alpha_range.1, scan_points);
    let cutoff_z = env_template.bath_z().cutoff();
    let objective = |alpha_z: f64| -> Result<f64> {
        let env = Environment::new(
            env_template.temperature(),
            *env_template.bath_x(),
            BathSpec::longitudinal_with_cutoff(alpha_z, cutoff_z)?,
        )?;
        Ok(final_ground_population(&integrate(p, &env, cfg)?))
    };
    refine_log_extremum(&objective, &grid, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn ground_population_values() {
        assert_eq!(ground_population(&BlochState::new(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(ground_population(&BlochState::new(0.0, 0.0, 0.0)), 0.5);
        assert_relative_eq!(
            ground_population(&BlochState::new(0.099667994624955817118, 0.0, 0.0)),
            0.54983399731247790856,
            max_relative = 1e-13
        );
    }

    proptest! {
        #[test]
        fn ground_population_is_affine_in_x(
            x in -1.0f64..1.0,
            y in -1.0f64..1.0,
            z in -1.0f64..1.0,
        ) {
            let p = ground_population(&BlochState::new(x, y, z));
            prop_assert_eq!(p, 0.5 * (1.0 + x));
            prop_assert_eq!(p, ground_population(&BlochState::new(x, -z, y)));
        }

        #[test]
        fn lz_asymptote_decreases_with_velocity(
            v1 in 0.01f64..10.0,
            factor in 1.0f64..10.0,
        ) {
            let p1 = lz_asymptote(v1, 1.0);
            let p2 = lz_asymptote(v1 * factor, 1.0);
            prop_assert!(p2 <= p1);
            prop_assert!(p1 <= 1.0 && p2 >= 0.0);
        }
    }

    #[test]
    fn lz_asymptote_values() {
        assert_relative_eq!(lz_asymptote(0.5, 1.0), 0.95678608173622775023, max_relative = 1e-14);
        assert_relative_eq!(lz_asymptote(2.0, 1.0), 0.54406187223400376323, max_relative = 1e-14);
        assert_relative_eq!(lz_asymptote(10.0, 1.0), 0.14536400084676657071, max_relative = 1e-14);
        assert_relative_eq!(
            lz_asymptote(std::f64::consts::FRAC_PI_2, 1.0),
            0.6321205588285576784,
            max_relative = 1e-14
        );
        assert_eq!(lz_asymptote(0.01, 1.0), 1.0);
    }

    #[test]
    fn relative_gain_values() {
        assert_relative_eq!(relative_gain(0.9, 0.6).unwrap(), 0.5, max_relative = 1e-14);
        assert_eq!(relative_gain(0.7, 0.7).unwrap(), 0.0);
        assert_relative_eq!(relative_gain(0.8, 0.2).unwrap(), 3.0, max_relative = 1e-14);
        let err = relative_gain(0.5, 0.0).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn trace_of_ground_state_is_flat() {
        let p = SweepProtocol::with_velocity(1.0).unwrap();
        let traj = Trajectory {
            times: vec![-1.0, 0.0, 1.0],
            states: vec![BlochState::new(1.0, 0.0, 0.0); 3],
            rates: None,
            meta: dynamics::integrate(
                &p,
                &Environment::with_couplings(5.0, 0.0, 0.0).unwrap(),
                &IntegratorConfig {
                    samples: 2,
                    ..IntegratorConfig::default()
                },
            )
            .unwrap()
            .meta,
        };
        let trace = population_trace(&traj);
        assert_eq!(trace.populations, vec![1.0, 1.0, 1.0]);
        assert_eq!(trace.final_value(), 1.0);
        assert_eq!(trace.min_value(), 1.0);
    }

    #[test]
    fn fast_coherent_sweep_hits_asymptote() {
        let p = SweepProtocol::with_velocity(10.0).unwrap();
        let env = Environment::with_couplings(5.0, 0.0, 0.0).unwrap();
        let traj = integrate(&p, &env, &IntegratorConfig::default()).unwrap();
        let trace = population_trace(&traj);
        assert_abs_diff_eq!(trace.final_value(), 0.14536400084676657071, epsilon = 1e-2);
        assert!(trace
            .populations
            .iter()
            .all(|&p| (-1e-9..=1.0 + 1e-9).contains(&p)));
    }

    #[test]
    fn log_grid_endpoints_and_monotonicity() {
        let g = log_grid(1e-4, 1.0, 25);
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[24], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refine_finds_synthetic_optimum() {
        let f = |x: f64| -> Result<f64> { Ok(-(x.ln() - 0.3f64.ln()).powi(2)) };
        let coarse = refine_log_extremum(&f, &log_grid(0.01, 10.0, 10), true).unwrap();
        let fine = refine_log_extremum(&f, &log_grid(0.01, 10.0, 30), true).unwrap();
        assert_abs_diff_eq!(coarse.x, 0.3, epsilon = 3e-3);
        assert_abs_diff_eq!(fine.x, 0.3, epsilon = 3e-3);
        // Grid density must not move the refined optimum beyond tolerance.
        assert_abs_diff_eq!(coarse.x, fine.x, epsilon = 3e-3);
        assert!(coarse.evaluations > 10);
    }

    #[test]
    fn refine_tie_breaks_to_smaller_parameter() {
        let flat = |_x: f64| -> Result<f64> { Ok(1.0) };
        let grid = log_grid(0.1, 10.0, 7);
        let res = refine_log_extremum(&flat, &grid, true).unwrap();
        assert_eq!(res.x, 0.1);
        let single = refine_log_extremum(&flat, &[0.7], false).unwrap();
        assert_eq!(single.x, 0.7);
        assert_eq!(single.evaluations, 1);
    }

    #[test]
    fn coherent_velocity_optimum_sits_at_lower_edge() {
        // Without dissipation the retained population falls monotonically
        // with velocity, so the search must pin the lower bound.
        let env = Environment::with_couplings(5.0, 0.0, 0.0).unwrap();
        let cfg = IntegratorConfig {
            samples: 2,
            ..IntegratorConfig::default()
        };
        let opt = find_optimal_velocity(&env, 0.0, 80.0, (1.0, 5.0), 5, &cfg).unwrap();
        assert_relative_eq!(opt.x, 1.0, max_relative = 2e-2);
        assert_abs_diff_eq!(opt.value, lz_asymptote(1.0, 1.0), epsilon = 1e-2);
    }

    #[test]
    fn alpha_scan_rejects_transverse_coupling() {
        let env = Environment::with_couplings(5.0, 5e-3, 5e-3).unwrap();
        let p = SweepProtocol::with_velocity(0.5).unwrap();
        let err =
            find_alpha_z_minimum(&env, &p, (1e-4, 1.0), 5, &IntegratorConfig::default())
                .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn range_validation() {
        let env = Environment::with_couplings(5.0, 0.0, 0.0).unwrap();
        let cfg = IntegratorConfig::default();
        assert!(find_optimal_velocity(&env, 0.0, 80.0, (0.0, 1.0), 5, &cfg).is_err());
        assert!(find_optimal_velocity(&env, 0.0, 80.0, (2.0, 1.0), 5, &cfg).is_err());
        assert!(find_optimal_velocity(&env, 0.0, 80.0, (0.1, 1.0), 1, &cfg).is_err());
    }
}
