//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.
//!
//! Run with `cargo test -p viscodiff-cli --test acceptance -- --nocapture`.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use viscodiff_cli::cmd_hysteresis;
use viscodiff_core::diagnostics::l2_distance;
use viscodiff_core::energy::{psi_e_eps, psi_e_eps_slope, regularized_dpsi, regularized_psi};
use viscodiff_core::hysteresis::{
    closed_form_play, driver_grid, play_trajectory, sup_distance_to_closed_form, uniform_grid,
    viscous_trajectory,
};
use viscodiff_core::{
    run, EnergyKind, FreeEnergyModel, GalerkinSystem, HysteresisConfig, HysteresisSample,
    InitialDatum, Scheme, SimulationConfig,
};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const SMOOTH_DATUM: &str = "0.5 + 0.3*cos(pi*x) + 0.1*cos(2*pi*x)";

fn double_well(n: usize, beta: f64, final_time: f64, dt: f64) -> SimulationConfig {
    let mut c = SimulationConfig::new(
        1.0,
        n,
        1.0,
        beta,
        final_time,
        EnergyKind::DoubleWell { kappa: 1.0 },
        InitialDatum::Expression(SMOOTH_DATUM.into()),
    );
    c.dt = dt;
    c
}

fn linear_oracle() -> Outcome {
    let (alpha, beta, stiffness, t_end) = (1.0, 0.1, 1.0, 1.0);
    let mut c = SimulationConfig::new(
        1.0,
        8,
        alpha,
        beta,
        t_end,
        EnergyKind::Quadratic { stiffness },
        // v_3 = sqrt(2) cos(2 pi x)
        InitialDatum::Cosine(vec![(2, SQRT_2)]),
    );
    c.dt = 1e-4;
    c.scheme = Scheme::Rk4;
    c.output_every = usize::MAX;
    let tr = run(&c).unwrap();
    let a0 = tr.samples[0].a[2];
    let a_t = tr.last().unwrap().a[2];
    let lambda = (2.0 * PI).powi(2);
    let exact = a0 * (-alpha * lambda * stiffness * t_end / (1.0 + alpha * beta * lambda)).exp();
    let rel = ((a_t - exact) / exact).abs();
    check(
        tr.is_complete() && rel <= 1e-6,
        format!("a_3(T) = {a_t:.15e}, exact {exact:.15e}, relative error {rel:.2e} (<= 1e-6)"),
    )
}

fn mass_conservation() -> Outcome {
    let datum = "0.5 + 0.3*cos(pi*x) + 0.1*cos(2*pi*x) + 0.05*cos(7*pi*x)";
    let models = [
        EnergyKind::DoubleWell { kappa: 1.0 },
        EnergyKind::Quadratic { stiffness: 1.0 },
        EnergyKind::RegularizedLog {
            k: 1.0,
            chi: 3.0,
            epsilon: 0.01,
        },
    ];
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for model in models {
        let mut c = SimulationConfig::new(
            1.0,
            32,
            1.0,
            0.1,
            1.0,
            model,
            InitialDatum::Expression(datum.into()),
        );
        c.output_every = usize::MAX;
        let tr = run(&c).unwrap();
        let m0 = tr.samples[0].diagnostics.mass;
        let m_t = tr.last().unwrap().diagnostics.mass;
        let scaled = (m_t - m0).abs() / (1.0 + m0.abs());
        worst = worst.max(scaled);
        all_ok &= tr.is_complete() && scaled <= 1e-12;
    }
    check(
        all_ok,
        format!("max |mass(T) - mass(0)| / (1 + |mass(0)|) = {worst:.2e} over 3 models, n = 32 (<= 1e-12)"),
    )
}

fn energy_balance() -> Outcome {
    let residual_at = |dt: f64| {
        let tr = run(&double_well(16, 0.1, 1.0, dt)).unwrap();
        assert!(tr.is_complete());
        tr
    };
    let coarse = residual_at(1e-2);
    let fine = residual_at(5e-3);
    let r1 = coarse.last().unwrap().diagnostics.energy_residual;
    let r2 = fine.last().unwrap().diagnostics.energy_residual;
    let ratio = (r1 / r2).abs();
    let tol = fine
        .samples
        .iter()
        .map(|s| s.diagnostics.energy_residual.abs())
        .fold(0.0, f64::max);
    let max_rise = fine
        .samples
        .windows(2)
        .map(|w| w[1].diagnostics.free_energy - w[0].diagnostics.free_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        ratio >= 3.5 && max_rise <= tol,
        format!(
            "residual(T) {r1:.3e} -> {r2:.3e}, ratio {ratio:.3} (>= 3.5); max free-energy rise {max_rise:.2e} \
             (<= residual tolerance {tol:.2e})"
        ),
    )
}

fn viscosity_effect() -> Outcome {
    let betas = [0.01, 0.1, 1.0];
    let rhs: Vec<Vec<f64>> = betas
        .iter()
        .map(|&beta| {
            let c = double_well(16, beta, 1.0, 1e-2);
            let system = GalerkinSystem::from_config(&c).unwrap();
            let f = c.initial.to_function(c.length).unwrap();
            let a0 =
                viscodiff_core::basis::project(f, c.modes, system.quadrature(), system.domain())
                    .unwrap();
            system.rhs(0.0, &a0).unwrap().to_vec()
        })
        .collect();
    let monotone = rhs
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(lo, hi)| hi.abs() <= lo.abs()));
    let norms: Vec<f64> = rhs
        .iter()
        .map(|r| r.iter().fold(0.0, |m, x| f64::max(m, x.abs())))
        .collect();

    let dt = 1e-2;
    let unstable = run(&double_well(16, 0.001, 1.0, dt)).unwrap();
    let stable = run(&double_well(16, 1.0, 1.0, dt)).unwrap();
    let aborted = matches!(
        unstable.failure,
        Some(viscodiff_core::Error::NonFinite { .. })
    );
    let stable_ok = stable.is_complete() && stable.last().unwrap().a.is_finite();
    check(
        monotone && aborted && stable_ok,
        format!(
            "|rhs(0)|_max for beta 0.01, 0.1, 1 = {:.3e}, {:.3e}, {:.3e} (componentwise non-increasing: {monotone}); \
             dt = {dt}: beta = 0.001 {}, beta = 1 {}",
            norms[0],
            norms[1],
            norms[2],
            match &unstable.failure {
                Some(e) => format!("aborted ({e})"),
                None => "did not abort".into(),
            },
            if stable_ok { "stable to T" } else { "failed" },
        ),
    )
}

fn self_convergence() -> Outcome {
    let finals: Vec<Vec<f64>> = [8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let mut c = double_well(n, 1.0, 1.0, 1e-3);
            c.output_every = usize::MAX;
            let tr = run(&c).unwrap();
            assert!(tr.is_complete());
            tr.last().unwrap().a.to_vec()
        })
        .collect();
    let d: Vec<f64> = finals
        .windows(2)
        .map(|w| l2_distance(&w[0], &w[1]))
        .collect();
    check(
        d.windows(2).all(|w| w[1] < w[0]),
        format!(
            "|u_8 - u_16| = {:.3e}, |u_16 - u_32| = {:.3e}, |u_32 - u_64| = {:.3e} (strictly decreasing)",
            d[0], d[1], d[2]
        ),
    )
}

fn play_exactness() -> Outcome {
    let (a, g, k) = (2.0, 1.0, 1.0);
    let grid = driver_grid(2, 4000);
    let states = play_trajectory(a, g, k, &grid).unwrap();
    let breakpoints = [0.25, 0.75, 1.0, 1.25, 1.75, 2.0];
    let mut bp_err: f64 = 0.0;
    for &s in &breakpoints {
        let p = states
            .iter()
            .find(|p| p.s == s)
            .expect("breakpoint on grid");
        bp_err = bp_err.max((p.y - closed_form_play(a, g, k, s)).abs());
    }

    // Grids with an odd number of steps per period miss every breakpoint.
    let errors: Vec<f64> = [401, 801, 1601]
        .iter()
        .map(|&n| {
            let samples: Vec<HysteresisSample> = play_trajectory(a, g, k, &uniform_grid(2, n))
                .unwrap()
                .iter()
                .map(Into::into)
                .collect();
            sup_distance_to_closed_form(&samples, a, g)
        })
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[1] / w[0]).collect();
    let halves = ratios.iter().all(|r| (0.45..=0.55).contains(r));

    let mut null_max: f64 = 0.0;
    for (amp, gam) in [(1.0, 1.0), (0.5, 1.0), (0.9, 2.0)] {
        for p in play_trajectory(amp, gam, k, &driver_grid(3, 1000)).unwrap() {
            null_max = null_max.max(p.y.abs());
        }
    }
    check(
        bp_err <= 1e-12 && halves && null_max == 0.0,
        format!(
            "breakpoint error {bp_err:.1e} (<= 1e-12); unaligned sup errors {:.3e}, {:.3e}, {:.3e}, ratios {:.3}, {:.3} \
             (halving); max |y| for A <= gamma = {null_max}",
            errors[0], errors[1], errors[2], ratios[0], ratios[1]
        ),
    )
}

fn viscous_limit() -> Outcome {
    let (a, g, k, beta) = (2.0, 1.0, 1.0, 1.0);
    let grid = driver_grid(2, 4000);
    let d: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&tau| {
            let samples: Vec<HysteresisSample> = viscous_trajectory(a, g, k, beta, tau, &grid)
                .unwrap()
                .iter()
                .map(Into::into)
                .collect();
            sup_distance_to_closed_form(&samples, a, g)
        })
        .collect();
    check(
        d[1] < d[0] && d[2] < d[1],
        format!(
            "sup distance to play for tau = 10, 100, 1000: {:.3e}, {:.3e}, {:.3e} (strictly decreasing)",
            d[0], d[1], d[2]
        ),
    )
}

fn regularized_energy() -> Outcome {
    let (k, chi) = (1.0, 2.5);
    // The quadratic continuation below the seam, written out independently.
    let lower = |eps: f64, r: f64| k * r * eps.ln() + 0.5 * k * (r * r / eps - eps);
    let lower_slope = |eps: f64, r: f64| k * eps.ln() + k * r / eps;
    let mut seam: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3] {
        // psi_e_eps evaluates the logarithmic branch at r = eps
        seam = seam
            .max((lower(eps, eps) - psi_e_eps(k, eps, eps)).abs())
            .max((lower_slope(eps, eps) - psi_e_eps_slope(k, eps, eps)).abs());
        let inside = 0.5 * eps;
        assert_eq!(psi_e_eps(k, eps, inside), lower(eps, inside));
        assert_eq!(psi_e_eps_slope(k, eps, inside), lower_slope(eps, inside));
        let two_sided = (regularized_psi(k, chi, eps, eps)
            - regularized_psi(k, chi, eps, eps * (1.0 - 1e-15)))
        .abs();
        seam = seam.max(two_sided);
    }

    let exact = FreeEnergyModel::regular_solution(k, chi).unwrap();
    let r = 0.3;
    let gap = [1e-1, 1e-2, 1e-3, 0.2, 0.29]
        .iter()
        .map(|&eps| (regularized_dpsi(k, chi, eps, r) - exact.dpsi(r).unwrap()).abs())
        .fold(0.0, f64::max);

    let mut min_curv = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let m = FreeEnergyModel::regularized_log(k, chi, eps).unwrap();
        for i in 0..=3000 {
            let x = -1.0 + 3.0 * i as f64 / 3000.0;
            min_curv = min_curv.min(m.ddpsi(x).unwrap());
        }
    }
    let bound = -2.0 * chi;
    check(
        seam <= 1e-12 && gap == 0.0 && min_curv.is_finite() && min_curv >= bound,
        format!(
            "seam value/slope mismatch {seam:.1e} (<= 1e-12); |psi_eps'(0.3) - psi'(0.3)| = {gap} for eps < 0.3; \
             min psi_eps'' on [-1, 2] = {min_curv} (>= -2 chi = {bound})"
        ),
    )
}

fn double_well_curvature() -> Outcome {
    let kappa = 1.0;
    let m = FreeEnergyModel::double_well(kappa).unwrap();
    let f = |r: f64| m.ddpsi(r).unwrap();
    // Grid search, then golden-section refinement of the bracketing cell.
    let n = 5000;
    let xs: Vec<f64> = (0..=n).map(|i| -2.0 + 5.0 * i as f64 / n as f64).collect();
    let i = (0..=n)
        .min_by(|&i, &j| f(xs[i]).total_cmp(&f(xs[j])))
        .unwrap();
    let (mut lo, mut hi) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let (c, d) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if f(c) < f(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let min = f(0.5 * (lo + hi));
    let lower = m.curvature_lower_bound().unwrap();
    check(
        (min + kappa).abs() <= 1e-6 && lower == kappa,
        format!(
            "min psi'' on [-2, 3] = {min:.12} at r = {:.6}; -kappa = {}; M_0 = {lower}",
            0.5 * (lo + hi),
            -kappa
        ),
    )
}

fn hysteresis_loop_data() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (a, g, k) = (2.0, 1.0, 1.0);
    let config = HysteresisConfig::quasi_static(a, g, k);
    let run = cmd_hysteresis(&config, dir.path()).unwrap();

    let mut rdr = csv::Reader::from_path(dir.path().join("timeseries.csv")).unwrap();
    let rows: Vec<(f64, f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut found = 0;
    for s in [0.125, 0.25, 0.375, 0.75] {
        if let Some(&(_, w, y)) = rows.iter().find(|r| r.0 == s) {
            found += 1;
            let w_exact = a * viscodiff_core::hysteresis::zigzag(s);
            worst = worst
                .max((w - w_exact).abs())
                .max((y - closed_form_play(a, g, k, s)).abs());
        }
    }
    let y_quarter = rows.iter().find(|r| r.0 == 0.25).map(|r| r.2);
    check(
        found == 4 && worst <= 1e-12 && y_quarter == Some(a - g) && run.loop_area > 0.0,
        format!(
            "CSV (w, y) at s = 1/8, 1/4, 3/8, 3/4: max error {worst:.1e} ({found}/4 found); y(1/4) = {:?} \
             (A - gamma = {}); loop area {:.6} (> 0)",
            y_quarter,
            a - g,
            run.loop_area
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        (
            "1 linear-model oracle",
            linear_oracle,
            Duration::from_secs(1),
        ),
        (
            "2 mass conservation",
            mass_conservation,
            Duration::from_secs(5),
        ),
        ("3 energy balance", energy_balance, Duration::from_secs(10)),
        (
            "4 viscosity effect",
            viscosity_effect,
            Duration::from_secs(10),
        ),
        (
            "5 Galerkin self-convergence",
            self_convergence,
            Duration::from_secs(30),
        ),
        (
            "6 play operator exactness",
            play_exactness,
            Duration::from_secs(1),
        ),
        (
            "7 viscous-to-quasi-static limit",
            viscous_limit,
            Duration::from_secs(5),
        ),
        (
            "8 regularized energy",
            regularized_energy,
            Duration::from_secs(1),
        ),
        (
            "9 double-well curvature bound",
            double_well_curvature,
            Duration::from_secs(1),
        ),
        (
            "10 hysteresis loop data",
            hysteresis_loop_data,
            Duration::from_secs(1),
        ),
    ];
    let mut failed = Vec::new();
    for (name, f, budget) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= budget;
        println!(
            "{} criterion {name}: {} [{:.3} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
