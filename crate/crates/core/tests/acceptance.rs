//! Release gate: nine numbered criteria, one test each, every test printing
//! a single `[acceptance N] PASS/FAIL` line. Run with
//! `cargo test -p lzcool --test acceptance -- --nocapture` to see the lines
//! for passing criteria too (failures print regardless).
//!
//! Budgets assume one desktop core and the optimized test profile.

use lzcool::analysis::{
    final_ground_population, find_alpha_z_minimum, log_grid, lz_asymptote, population_trace,
    relative_gain,
};
use lzcool::bath::Environment;
use lzcool::config::{ExperimentConfig, ExperimentKind, SweepMode};
use lzcool::dynamics::{
    coherent_lab_frame_oracle, integrate, relax_static, BlochState, IntegratorConfig, Trajectory,
};
use lzcool::model::{frame_static, SweepProtocol};
use lzcool::output::csv_string;
use rayon::prelude::*;

/// Accumulates sub-checks for one criterion and prints the verdict line.
struct Criterion {
    id: u32,
    name: &'static str,
    failures: Vec<String>,
    detail: String,
}

impl Criterion {
    fn new(id: u32, name: &'static str) -> Self {
        Criterion {
            id,
            name,
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.failures.push(what);
        }
    }

    fn note(&mut self, what: String) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(&what);
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("[acceptance {}] PASS: {} ({})", self.id, self.name, self.detail);
        } else {
            println!(
                "[acceptance {}] FAIL: {}: {}",
                self.id,
                self.name,
                self.failures.join(" | ")
            );
            panic!("acceptance criterion {} failed", self.id);
        }
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn sweep_population(
    v: f64,
    span: f64,
    env: &Environment,
    cfg: &IntegratorConfig,
) -> (f64, Trajectory) {
    let p = SweepProtocol::new(v, 0.0, span).expect("valid protocol");
    let traj = integrate(&p, env, cfg).expect("integration succeeds");
    (final_ground_population(&traj), traj)
}

/// Criterion 1: with both baths off, the rotating-frame equations and an
/// independent lab-frame Schrödinger integration agree on the final ground
/// population, and both land on the closed-form asymptote once the sweep
/// window is wide enough. The widened window is checked for the three
/// faster sweeps; the slowest one would dominate the runtime budget without
/// sharpening the comparison.
#[test]
fn coherent_limit_matches_oracle_and_asymptote() {
    let mut c = Criterion::new(1, "coherent limit vs lab-frame oracle");
    let cfg = IntegratorConfig::default();
    let env = Environment::with_couplings(5.0, 0.0, 0.0).unwrap();
    let cases: Vec<(f64, f64, f64)> = vec![
        (0.1, 80.0, 1e-2),
        (0.5, 80.0, 1e-2),
        (2.0, 80.0, 1e-2),
        (10.0, 80.0, 1e-2),
        (0.5, 400.0, 1e-3),
        (2.0, 400.0, 1e-3),
        (10.0, 400.0, 1e-3),
    ];
    let results: Vec<(f64, f64, f64, f64, f64)> = cases
        .par_iter()
        .map(|&(v, span, window_tol)| {
            let p = SweepProtocol::new(v, 0.0, span).expect("valid protocol");
            let qme = final_ground_population(&integrate(&p, &env, &cfg).expect("qme run"));
            let oracle = coherent_lab_frame_oracle(&p, &cfg).expect("oracle run");
            (v, span, window_tol, qme, oracle)
        })
        .collect();
    let mut worst_pair = 0.0f64;
    for (v, span, window_tol, qme, oracle) in results {
        let asymptote = lz_asymptote(v, 1.0);
        worst_pair = worst_pair.max((qme - oracle).abs());
        c.check(
            (qme - oracle).abs() < 1e-4,
            format!("v={v} span={span}: |qme-oracle|={:.2e}", (qme - oracle).abs()),
        );
        c.check(
            (qme - asymptote).abs() < window_tol,
            format!("v={v} span={span}: |qme-asymptote|={:.2e}", (qme - asymptote).abs()),
        );
        c.check(
            (oracle - asymptote).abs() < window_tol,
            format!(
                "v={v} span={span}: |oracle-asymptote|={:.2e}",
                (oracle - asymptote).abs()
            ),
        );
    }
    c.note(format!("worst frame disagreement {worst_pair:.2e} over 7 cases"));
    c.finish();
}

/// Criterion 2: with the drive pinned (φ̇ = 0, ε = 0) the dissipative flow
/// contracts onto r = (tanh(βE/2), 0, 0).
#[test]
fn pinned_drive_reaches_thermal_fixed_point() {
    let mut c = Criterion::new(2, "pinned drive thermal fixed point");
    let env = Environment::with_couplings(5.0, 0.0, 5e-3).unwrap();
    let rates = env.rates_at(&frame_static(0.0));
    let duration = 50.0 / rates.gamma_r;
    let traj = relax_static(
        &env,
        0.0,
        BlochState::new(0.0, 0.0, 1.0),
        duration,
        &IntegratorConfig::default(),
    )
    .expect("relaxation run");
    let s = traj.final_state();
    let target = (0.1f64).tanh();
    let err = (s.x - target).abs().max(s.y.abs()).max(s.z.abs());
    c.check(err < 1e-6, format!("max-component error {err:.2e}"));
    c.note(format!("error {err:.2e} after t = 50/gamma_r = {duration:.1}"));
    c.finish();
}

/// Criterion 3: the relaxation and dephasing rates at the crossing point
/// reproduce hand-derived values, and the cross terms vanish identically
/// when the two baths couple equally.
#[test]
fn rates_match_hand_values_at_crossing() {
    let mut c = Criterion::new(3, "rate formulas at the crossing");
    let env = Environment::with_couplings(5.0, 5e-3, 5e-3).unwrap();
    let r = env.rates_at(&frame_static(0.0));
    // 2π coth(1/10) · 5e−3 · e^{−1/10} and 4π(α_x+α_z)/β, frozen at 20
    // significant digits from a high-precision evaluation.
    let gamma_r_ref = 0.28520997095321936862;
    let gamma_d_ref = 0.62831853071795864769;
    c.check(
        rel_err(r.gamma_r, gamma_r_ref) < 1e-10,
        format!("gamma_r={} want {gamma_r_ref}", r.gamma_r),
    );
    c.check(
        rel_err(r.gamma_d, gamma_d_ref) < 1e-10,
        format!("gamma_d={} want {gamma_d_ref}", r.gamma_d),
    );
    c.check(r.gamma_xz == 0.0, format!("gamma_xz={} want exact 0", r.gamma_xz));
    c.check(r.gamma_zx == 0.0, format!("gamma_zx={} want exact 0", r.gamma_zx));
    c.check(
        rel_err(r.r_bar_x, (0.1f64).tanh()) < 1e-10,
        format!("r_bar_x={} want tanh(0.1)", r.r_bar_x),
    );
    c.note(format!(
        "gamma_r rel err {:.1e}, gamma_d rel err {:.1e}",
        rel_err(r.gamma_r, gamma_r_ref),
        rel_err(r.gamma_d, gamma_d_ref)
    ));
    c.finish();
}

/// Criterion 4: at strong longitudinal dephasing the final ground population
/// is pinned at its semiclassical plateau, 0.95 ± 0.02.
///
/// Known to fail with the cross-dephasing terms as modeled: on the outgoing
/// branch they cancel the relaxation pull almost exactly (when α_x = 0,
/// γ_xz·γ_zx = f1²·γ_r·γ_d), freezing p_G at 0.7403. An independent stiff
/// solver reproduces that value to six digits, so it is a property of the
/// rate model, not of this integrator; dropping both cross terms restores
/// 0.9655. The gate keeps the plateau bound rather than encoding the
/// model's value.
#[test]
fn strong_dephasing_semiclassical_plateau() {
    let mut c = Criterion::new(4, "strong-dephasing plateau");
    let env = Environment::with_couplings(5.0, 0.0, 1.0).unwrap();
    let (p_g, _) = sweep_population(0.5, 80.0, &env, &IntegratorConfig::default());
    c.check((p_g - 0.95).abs() <= 0.02, format!("p_G={p_g:.4} want 0.95 +/- 0.02"));
    c.note(format!("p_G={p_g:.4}"));
    c.finish();
}

/// Criterion 5: with the transverse bath off, the final ground population is
/// non-monotone in α_z; its minimum sits around α_z ~ 0.01 and lies strictly
/// below both ends of the scanned decade range.
#[test]
fn longitudinal_coupling_curve_is_nonmonotone() {
    let mut c = Criterion::new(5, "non-monotone response to longitudinal coupling");
    let cfg = IntegratorConfig::default();
    let p = SweepProtocol::with_velocity(0.5).unwrap();
    let template = Environment::with_couplings(5.0, 0.0, 1.0).unwrap();
    let minimum = find_alpha_z_minimum(&template, &p, (1e-4, 1.0), 25, &cfg)
        .expect("coupling scan succeeds");
    let endpoint = |alpha_z: f64| {
        let env = Environment::with_couplings(5.0, 0.0, alpha_z).unwrap();
        final_ground_population(&integrate(&p, &env, &cfg).expect("endpoint run"))
    };
    let p_lo = endpoint(1e-4);
    let p_hi = endpoint(1.0);
    c.check(
        (0.003..=0.03).contains(&minimum.x),
        format!("argmin alpha_z={:.4} outside [0.003, 0.03]", minimum.x),
    );
    c.check(
        minimum.value < p_lo && minimum.value < p_hi,
        format!(
            "min p_G={:.4} not below endpoints ({p_lo:.4}, {p_hi:.4})",
            minimum.value
        ),
    );
    c.note(format!(
        "argmin alpha_z={:.4}, p_G={:.4} vs endpoints ({p_lo:.4}, {p_hi:.4})",
        minimum.x, minimum.value
    ));
    c.finish();
}

/// Criterion 6: switching on the transverse bath helps at every point of the
/// default velocity grid, by over 100% somewhere in the fast regime and by
/// a moderate fraction in the slow regime.
#[test]
fn transverse_bath_gain_profile() {
    let mut c = Criterion::new(6, "transverse-bath gain across velocities");
    let cfg = IntegratorConfig::default();
    let grid = log_grid(0.02, 10.0, 30);
    let envs = [
        Environment::with_couplings(5.0, 0.0, 5e-3).unwrap(),
        Environment::with_couplings(5.0, 5e-3, 5e-3).unwrap(),
    ];
    let tasks: Vec<(usize, f64)> = (0..2).flat_map(|i| grid.iter().map(move |&v| (i, v))).collect();
    let mut populations = vec![vec![0.0; grid.len()]; 2];
    let results: Vec<(usize, f64, f64)> = tasks
        .par_iter()
        .map(|&(i, v)| (i, v, sweep_population(v, 80.0, &envs[i], &cfg).0))
        .collect();
    for (i, v, p_g) in results {
        let slot = grid.iter().position(|&g| g == v).unwrap();
        populations[i][slot] = p_g;
    }
    let mut max_fast_gain = f64::NEG_INFINITY;
    for (slot, &v) in grid.iter().enumerate() {
        let gain = relative_gain(populations[1][slot], populations[0][slot])
            .expect("baseline population below 1");
        c.check(gain > 0.0, format!("v={v:.3}: gain={gain:.3} not positive"));
        if v > 1.0 {
            max_fast_gain = max_fast_gain.max(gain);
        }
        if v < 0.1 {
            c.check(
                (0.2..=1.0).contains(&gain),
                format!("v={v:.3}: slow-regime gain={gain:.3} outside [0.2, 1.0]"),
            );
        }
    }
    c.check(
        max_fast_gain >= 1.0,
        format!("best fast-regime gain {max_fast_gain:.3} below 1.0"),
    );
    c.note(format!("best fast-regime gain {max_fast_gain:.2}"));
    c.finish();
}

/// Criterion 7: a transverse coupling of 5e−3 restores the ground population
/// to at least 0.9 across the whole longitudinal grid.
#[test]
fn transverse_bath_saturates_recovery() {
    let mut c = Criterion::new(7, "recovery saturates across longitudinal grid");
    let cfg = IntegratorConfig::default();
    let grid = log_grid(1e-4, 1.0, 25);
    let results: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&alpha_z| {
            let env = Environment::with_couplings(5.0, 5e-3, alpha_z).unwrap();
            (alpha_z, sweep_population(0.5, 80.0, &env, &cfg).0)
        })
        .collect();
    let mut worst = f64::INFINITY;
    for (alpha_z, p_g) in results {
        worst = worst.min(p_g);
        c.check(p_g >= 0.9, format!("alpha_z={alpha_z:.2e}: p_G={p_g:.4} below 0.9"));
    }
    c.note(format!("worst p_G={worst:.4} over 25 couplings"));
    c.finish();
}

/// Criterion 8: the transverse bath improves the final population without
/// suppressing the transient excitation dip, i.e. it relaxes the excited
/// population afterwards rather than blocking the transition.
#[test]
fn transverse_bath_relaxes_rather_than_blocks() {
    let mut c = Criterion::new(8, "relaxation pathway, not blockade");
    let cfg = IntegratorConfig::default();
    let run = |alpha_x: f64| {
        let env = Environment::with_couplings(5.0, alpha_x, 5e-3).unwrap();
        let p = SweepProtocol::new(0.3, 0.0, 80.0).unwrap();
        population_trace(&integrate(&p, &env, &cfg).expect("trace run"))
    };
    let base = run(0.0);
    let assisted = run(5e-3);
    let final_diff = assisted.final_value() - base.final_value();
    let dip_diff = (assisted.min_value() - base.min_value()).abs();
    c.check(final_diff > 0.05, format!("final-population difference {final_diff:.4} below 0.05"));
    c.check(
        dip_diff < final_diff,
        format!("dip difference {dip_diff:.4} not below final difference {final_diff:.4}"),
    );
    c.note(format!("final diff {final_diff:.3}, dip diff {dip_diff:.4}"));
    c.finish();
}

/// Criterion 9: halving both tolerances moves representative headline
/// numbers by far less than their quoted precision, the Bloch norm never
/// exceeds 1 by more than 1e−6, and a repeated experiment emits exactly the
/// same bytes.
///
/// The norm bound is known to fail through the strong-coupling
/// representative (α_z = 1): the equations themselves push |r| to
/// 1 + 2.6e−4 there. The excess is tolerance-independent, matches an
/// independent stiff solver, scales like α_z², and crosses 1e−6 near
/// α_z ≈ 0.06; the weak-coupling runs stay below 1e−8.
#[test]
fn numerical_hygiene_under_tolerance_halving() {
    let mut c = Criterion::new(9, "tolerance robustness and determinism");
    let coarse = IntegratorConfig::default();
    let fine = IntegratorConfig {
        rel_tol: coarse.rel_tol / 2.0,
        abs_tol: coarse.abs_tol / 2.0,
        ..coarse
    };
    let mut max_excess = 0.0f64;
    let mut shift = |label: &str, f: &dyn Fn(&IntegratorConfig) -> (f64, f64)| {
        let (a, ea) = f(&coarse);
        let (b, eb) = f(&fine);
        max_excess = max_excess.max(ea).max(eb);
        (label.to_string(), (a - b).abs())
    };

    // Tight class: point values quoted to better than 1e−6.
    let coherent = |cfg: &IntegratorConfig| {
        let env = Environment::with_couplings(5.0, 0.0, 0.0).unwrap();
        let (p_g, traj) = sweep_population(2.0, 80.0, &env, cfg);
        (p_g, traj.meta.max_norm_excess)
    };
    let oracle = |cfg: &IntegratorConfig| {
        let p = SweepProtocol::with_velocity(2.0).unwrap();
        (coherent_lab_frame_oracle(&p, cfg).expect("oracle run"), 0.0)
    };
    let fixed_point = |cfg: &IntegratorConfig| {
        let env = Environment::with_couplings(5.0, 0.0, 5e-3).unwrap();
        let traj = relax_static(&env, 0.0, BlochState::new(0.0, 0.0, 1.0), 175.0, cfg)
            .expect("relaxation run");
        (traj.final_state().x, traj.meta.max_norm_excess)
    };
    let plateau = |cfg: &IntegratorConfig| {
        let env = Environment::with_couplings(5.0, 0.0, 1.0).unwrap();
        let (p_g, traj) = sweep_population(0.5, 80.0, &env, cfg);
        (p_g, traj.meta.max_norm_excess)
    };
    let slow_final = |cfg: &IntegratorConfig| {
        let env = Environment::with_couplings(5.0, 5e-3, 5e-3).unwrap();
        let (p_g, traj) = sweep_population(0.3, 80.0, &env, cfg);
        (p_g, traj.meta.max_norm_excess)
    };
    for (label, f) in [
        ("coherent v=2", &coherent as &dyn Fn(&IntegratorConfig) -> (f64, f64)),
        ("oracle v=2", &oracle),
        ("fixed point r_x", &fixed_point),
        ("plateau p_G", &plateau),
        ("slow sweep p_G", &slow_final),
    ] {
        let (label, delta) = shift(label, f);
        c.check(delta < 1e-6, format!("{label}: tolerance shift {delta:.2e} >= 1e-6"));
    }

    // Loose class: values drawn from the coupling scans, quoted to 1e−4.
    let scan_point = |alpha_x: f64, alpha_z: f64| {
        move |cfg: &IntegratorConfig| {
            let env = Environment::with_couplings(5.0, alpha_x, alpha_z).unwrap();
            let (p_g, traj) = sweep_population(0.5, 80.0, &env, cfg);
            (p_g, traj.meta.max_norm_excess)
        }
    };
    let gain_point = |cfg: &IntegratorConfig| {
        let env_z = Environment::with_couplings(5.0, 0.0, 5e-3).unwrap();
        let env_xz = Environment::with_couplings(5.0, 5e-3, 5e-3).unwrap();
        let (p_z, tz) = sweep_population(0.1, 80.0, &env_z, cfg);
        let (p_xz, txz) = sweep_population(0.1, 80.0, &env_xz, cfg);
        (
            relative_gain(p_xz, p_z).expect("baseline below 1"),
            tz.meta.max_norm_excess.max(txz.meta.max_norm_excess),
        )
    };
    let near_minimum = scan_point(0.0, 0.01);
    let saturated = scan_point(5e-3, 0.1);
    for (label, f) in [
        ("scan near minimum", &near_minimum as &dyn Fn(&IntegratorConfig) -> (f64, f64)),
        ("saturated scan", &saturated),
        ("slow-regime gain", &gain_point),
    ] {
        let (label, delta) = shift(label, f);
        c.check(delta < 1e-4, format!("{label}: tolerance shift {delta:.2e} >= 1e-4"));
    }

    c.check(
        max_excess <= 1e-6,
        format!("Bloch norm excess {max_excess:.2e} above 1e-6"),
    );

    // Re-emitting the same experiment must reproduce the bytes exactly.
    let mut cfg = ExperimentConfig::default_for(ExperimentKind::VelocitySweep);
    cfg.velocity_grid = vec![2.0, 10.0];
    cfg.temperature_list = vec![5.0];
    cfg.mode = SweepMode::Both;
    let emit = || {
        let out = lzcool::experiments::run(&cfg).expect("sweep runs");
        csv_string(&out.table)
    };
    let first = emit();
    c.check(first == emit(), "repeated sweep emitted different bytes".to_string());

    c.note(format!("max norm excess {max_excess:.1e}; repeat emission byte-identical"));
    c.finish();
}
