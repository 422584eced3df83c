//! Threshold dissipation under zigzag driving.
//!
//! With a quadratic energy `K r^2 / 2` and dissipation potential
//! `beta r^2 / 2 + gamma |r|`, the spatially uniform response to the
//! boundary potential `w(s) = A z(s)` satisfies, in rescaled time `s = t/tau`,
//!
//! ```text
//! w - K u - (beta/tau) u'  in  gamma sign(u')
//! ```
//!
//! As `tau -> inf` this becomes the play operator: `y = K u` stays within
//! `gamma` of `w` and moves only when pushed by the constraint.

use crate::config::HysteresisConfig;
use crate::error::{Error, Result};

/// The 1-periodic triangle wave: `4s` on `[0, 1/4)`, `2 - 4s` on
/// `[1/4, 3/4)`, `-4 + 4s` on `[3/4, 1)`.
pub fn zigzag(s: f64) -> f64 {
    let frac = s - s.floor();
    if frac < 0.25 {
        4.0 * frac
    } else if frac < 0.75 {
        2.0 - 4.0 * frac
    } else {
        -4.0 + 4.0 * frac
    }
}

/// `sign(x) max(|x| - gamma, 0)`.
#[inline]
pub fn soft_threshold(x: f64, gamma: f64) -> f64 {
    if x > gamma {
        x - gamma
    } else if x < -gamma {
        x + gamma
    } else {
        0.0
    }
}

/// Quasi-static state: driver `w = A z(s)` and output `y = K v(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayState {
    pub s: f64,
    pub w: f64,
    pub y: f64,
    pub threshold: f64,
    pub stiffness: f64,
    pub amplitude: f64,
}

impl PlayState {
    pub fn initial(amplitude: f64, threshold: f64, stiffness: f64) -> Self {
        Self {
            s: 0.0,
            w: amplitude * zigzag(0.0),
            y: 0.0,
            threshold,
            stiffness,
            amplitude,
        }
    }

    /// `v = y / K`.
    pub fn v(&self) -> f64 {
        self.y / self.stiffness
    }
}

/// Moves `y` the least distance that restores `|w_next - y| <= gamma`.
pub fn play_step(state: &PlayState, s_next: f64, w_next: f64) -> PlayState {
    let gamma = state.threshold;
    PlayState {
        s: s_next,
        w: w_next,
        y: state.y.clamp(w_next - gamma, w_next + gamma),
        ..*state
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.first() {
        Some(&0.0) => {}
        _ => {
            return Err(Error::InvalidArgument(
                "time grid must start at s = 0".into(),
            ))
        }
    }
    if grid
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidArgument(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Play response to `w = A z(s)` on `grid`, starting from `v(0) = 0`.
pub fn play_trajectory(
    amplitude: f64,
    threshold: f64,
    stiffness: f64,
    grid: &[f64],
) -> Result<Vec<PlayState>> {
    check_positive("amplitude", amplitude)?;
    check_positive("threshold", threshold)?;
    check_positive("stiffness", stiffness)?;
    check_grid(grid)?;
    let mut states = Vec::with_capacity(grid.len());
    let mut state = PlayState::initial(amplitude, threshold, stiffness);
    states.push(state);
    for &s in &grid[1..] {
        state = play_step(&state, s, amplitude * zigzag(s));
        states.push(state);
    }
    Ok(states)
}

/// Play response to an arbitrary driver sequence `(s_k, w_k)` with `y_0` given.
pub fn play_sequence(threshold: f64, y0: f64, driver: &[(f64, f64)]) -> Vec<f64> {
    let mut y = y0;
    driver
        .iter()
        .map(|&(_, w)| {
            y = y.clamp(w - threshold, w + threshold);
            y
        })
        .collect()
}

/// Exact `K v(s)` for the zigzag driver.
///
/// Zero when `A <= gamma`. Otherwise zero before `s = gamma / (4A)` and,
/// from then on, the projection of `A z(s - gamma / (4A))` onto
/// `[-A + gamma, A - gamma]`.
pub fn closed_form_play(amplitude: f64, threshold: f64, _stiffness: f64, s: f64) -> f64 {
    if amplitude <= threshold {
        return 0.0;
    }
    let delay = threshold / (4.0 * amplitude);
    if s < delay {
        return 0.0;
    }
    let bound = amplitude - threshold;
    (amplitude * zigzag(s - delay)).clamp(-bound, bound)
}

/// State of the finite-`tau` spatially uniform system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscousScalarState {
    pub s: f64,
    pub u: f64,
    pub stiffness: f64,
    pub threshold: f64,
    pub amplitude: f64,
    pub beta: f64,
    pub tau: f64,
}

impl ViscousScalarState {
    pub fn initial(amplitude: f64, threshold: f64, stiffness: f64, beta: f64, tau: f64) -> Self {
        Self {
            s: 0.0,
            u: 0.0,
            stiffness,
            threshold,
            amplitude,
            beta,
            tau,
        }
    }

    /// `K u`, comparable with the play output.
    pub fn y(&self) -> f64 {
        self.stiffness * self.u
    }
}

/// One implicit step of `(beta/tau) u' + K u + gamma sign(u') = w`.
///
/// The inclusion
/// `(beta/tau)(u+ - u)/ds + K u+ + gamma sign(u+ - u)  ∋  w_next`
/// is solved exactly:
/// `u+ = u + ds / (beta/tau + K ds) * soft_threshold(w_next - K u, gamma)`.
pub fn viscous_scalar_step(state: &ViscousScalarState, ds: f64, w_next: f64) -> ViscousScalarState {
    let damping = state.beta / state.tau;
    let imbalance = w_next - state.stiffness * state.u;
    let du = ds / (damping + state.stiffness * ds) * soft_threshold(imbalance, state.threshold);
    ViscousScalarState {
        s: state.s + ds,
        u: state.u + du,
        ..*state
    }
}

/// Viscous response to `w = A z(s)` on `grid`, from `u(0) = 0`.
pub fn viscous_trajectory(
    amplitude: f64,
    threshold: f64,
    stiffness: f64,
    beta: f64,
    tau: f64,
    grid: &[f64],
) -> Result<Vec<ViscousScalarState>> {
    check_positive("amplitude", amplitude)?;
    check_positive("stiffness", stiffness)?;
    check_positive("beta", beta)?;
    check_positive("tau", tau)?;
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    check_grid(grid)?;
    let mut state = ViscousScalarState::initial(amplitude, threshold, stiffness, beta, tau);
    let mut states = Vec::with_capacity(grid.len());
    states.push(state);
    for w in grid.windows(2) {
        state = viscous_scalar_step(&state, w[1] - w[0], amplitude * zigzag(w[1]));
        state.s = w[1];
        states.push(state);
    }
    Ok(states)
}

/// `periods * steps_per_period + 1` equally spaced points from 0.
pub fn uniform_grid(periods: usize, steps_per_period: usize) -> Vec<f64> {
    let n = steps_per_period as f64;
    (0..=periods * steps_per_period)
        .map(|k| k as f64 / n)
        .collect()
}

/// Uniform grid with the zigzag breakpoints `{0, 1/4, 3/4} + k` inserted.
pub fn driver_grid(periods: usize, steps_per_period: usize) -> Vec<f64> {
    let mut grid = uniform_grid(periods, steps_per_period);
    for p in 0..periods {
        for frac in [0.25, 0.75, 1.0] {
            grid.push(p as f64 + frac);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let spacing = 1.0 / steps_per_period as f64;
    grid.dedup_by(|b, a| (*b - *a).abs() < 1e-9 * spacing);
    grid
}

/// One point of a hysteresis time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisSample {
    pub s: f64,
    pub w: f64,
    pub y: f64,
}

impl From<&PlayState> for HysteresisSample {
    fn from(p: &PlayState) -> Self {
        Self {
            s: p.s,
            w: p.w,
            y: p.y,
        }
    }
}

impl From<&ViscousScalarState> for HysteresisSample {
    fn from(v: &ViscousScalarState) -> Self {
        Self {
            s: v.s,
            w: v.amplitude * zigzag(v.s),
            y: v.y(),
        }
    }
}

/// The parametric curve `s -> (w, y)`.
pub fn hysteresis_loop(samples: &[HysteresisSample]) -> Vec<(f64, f64)> {
    samples.iter().map(|p| (p.w, p.y)).collect()
}

/// Signed area of the closed polygon through `points` (shoelace rule);
/// positive for counterclockwise traversal.
pub fn loop_area(points: &[(f64, f64)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len();
    0.5 * (0..n)
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
}

/// Samples of the last full period `[P - 1, P]`.
pub fn last_period(samples: &[HysteresisSample]) -> &[HysteresisSample] {
    let Some(end) = samples.last().map(|p| p.s) else {
        return samples;
    };
    let start = (end - 1.0).max(0.0);
    let first = samples.partition_point(|p| p.s < start - 1e-12);
    &samples[first..]
}

/// `max_k |y_k - K v(s_k)|` against the closed-form play.
pub fn sup_distance_to_closed_form(
    samples: &[HysteresisSample],
    amplitude: f64,
    threshold: f64,
) -> f64 {
    samples
        .iter()
        .map(|p| (p.y - closed_form_play(amplitude, threshold, 1.0, p.s)).abs())
        .fold(0.0, f64::max)
}

/// Result of a hysteresis experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisRun {
    pub samples: Vec<HysteresisSample>,
    /// `(w, y)` over the last full period.
    pub steady_loop: Vec<(f64, f64)>,
    pub loop_area: f64,
    pub sup_distance: f64,
}

/// Runs the play operator (`tau = None`) or the viscous system.
pub fn run_hysteresis(config: &HysteresisConfig) -> Result<HysteresisRun> {
    config.validate()?;
    let grid = driver_grid(config.periods, config.steps_per_period);
    let samples: Vec<HysteresisSample> = match config.tau {
        None => play_trajectory(config.amplitude, config.threshold, config.stiffness, &grid)?
            .iter()
            .map(HysteresisSample::from)
            .collect(),
        Some(tau) => viscous_trajectory(
            config.amplitude,
            config.threshold,
            config.stiffness,
            config.beta,
            tau,
            &grid,
        )?
        .iter()
        .map(HysteresisSample::from)
        .collect(),
    };
    let steady_loop = hysteresis_loop(last_period(&samples));
    let area = loop_area(&steady_loop);
    let sup_distance = sup_distance_to_closed_form(&samples, config.amplitude, config.threshold);
    Ok(HysteresisRun {
        samples,
        steady_loop,
        loop_area: area,
        sup_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zigzag_examples() {
        assert_eq!(zigzag(0.0), 0.0);
        assert_eq!(zigzag(0.25), 1.0);
        assert_eq!(zigzag(0.5), 0.0);
        assert_eq!(zigzag(0.75), -1.0);
        assert_eq!(zigzag(1.25), 1.0);
        assert!((zigzag(0.1) - 0.4).abs() < 1e-15);
        assert!((zigzag(-0.1) + 0.4).abs() < 1e-15);
        assert!((zigzag(-0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn play_step_examples() {
        let base = PlayState::initial(2.0, 1.0, 1.0);
        assert_eq!(play_step(&base, 0.1, 0.5).y, 0.0);
        assert_eq!(play_step(&base, 0.1, 1.5).y, 0.5);
        let up = PlayState { y: 0.5, ..base };
        assert!((play_step(&up, 0.1, -1.2).y + 0.2).abs() < 1e-15);
    }

    #[test]
    fn play_trajectory_examples() {
        let grid = driver_grid(2, 400);
        let below = play_trajectory(1.0, 1.0, 3.0, &grid).unwrap();
        assert!(below.iter().all(|p| p.y == 0.0));

        let states = play_trajectory(2.0, 1.0, 1.0, &grid).unwrap();
        let at = |s: f64| states.iter().find(|p| p.s == s).unwrap().y;
        assert_eq!(at(0.25), 1.0);
        for p in states.iter().filter(|p| p.s < 1.0 / 8.0) {
            assert_eq!(p.y, 0.0);
        }
        assert!(play_trajectory(2.0, 1.0, 1.0, &[0.1, 0.2]).is_err());
        assert!(play_trajectory(2.0, 1.0, 1.0, &[0.0, 0.2, 0.2]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        for s in [0.0, 0.3, 0.77, 3.1] {
            assert_eq!(closed_form_play(1.0, 2.0, 1.0, s), 0.0);
        }
        assert_eq!(closed_form_play(2.0, 1.0, 1.0, 0.125), 0.0);
        assert_eq!(closed_form_play(2.0, 1.0, 1.0, 0.375), 1.0);
        assert_eq!(closed_form_play(2.0, 1.0, 1.0, 0.25), 1.0);
        assert_eq!(closed_form_play(2.0, 1.0, 1.0, 0.75), -1.0);
    }

    #[test]
    fn discrete_play_is_exact_on_breakpoint_grids() {
        for &(a, g) in &[(2.0, 1.0), (3.0, 0.5), (1.3, 1.2)] {
            let grid = driver_grid(3, 1000);
            let states = play_trajectory(a, g, 1.0, &grid).unwrap();
            for p in &states {
                assert!(
                    (p.y - closed_form_play(a, g, 1.0, p.s)).abs() < 1e-12,
                    "A={a} g={g} s={}",
                    p.s
                );
            }
        }
    }

    #[test]
    fn unaligned_grids_converge_at_first_order() {
        // Odd step counts never sample the peaks; the missed overshoot is A ds.
        let errors: Vec<f64> = [201, 401, 801, 1601]
            .iter()
            .map(|&n| {
                let grid = uniform_grid(2, n);
                let samples: Vec<HysteresisSample> = play_trajectory(2.0, 1.0, 1.0, &grid)
                    .unwrap()
                    .iter()
                    .map(Into::into)
                    .collect();
                sup_distance_to_closed_form(&samples, 2.0, 1.0)
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] <= 0.6 * w[0], "{errors:?}");
        }
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(1.5, 1.0), 0.5);
        assert_eq!(soft_threshold(-2.5, 1.0), -1.5);
        assert_eq!(soft_threshold(-1.0, 1.0), 0.0);
    }

    #[test]
    fn viscous_step_sticks_inside_the_band() {
        let st = ViscousScalarState {
            u: 0.3,
            ..ViscousScalarState::initial(2.0, 1.0, 2.0, 1.0, 10.0)
        };
        let next = viscous_scalar_step(&st, 0.01, 1.5);
        assert_eq!(next.u, 0.3);
        let next = viscous_scalar_step(&st, 0.01, 1.7);
        assert!(next.u > 0.3);
    }

    #[test]
    fn viscous_step_without_threshold_or_stiffness_is_linear_implicit_euler() {
        let (beta, tau, ds, w) = (0.5, 4.0, 0.01, 0.8);
        let st = ViscousScalarState {
            u: 0.2,
            ..ViscousScalarState::initial(1.0, 0.0, 0.0, beta, tau)
        };
        let next = viscous_scalar_step(&st, ds, w);
        assert!((next.u - (0.2 + ds * tau / beta * w)).abs() < 1e-15);

        // With stiffness the same implicit Euler recursion has a closed form.
        let (k, steps) = (2.0, 100);
        let mut st = ViscousScalarState::initial(1.0, 0.0, k, beta, tau);
        for _ in 0..steps {
            st = viscous_scalar_step(&st, ds, w);
        }
        let rate = ds / (beta / tau + k * ds);
        let exact = w / k * (1.0 - (1.0 - k * rate).powi(steps));
        assert!((st.u - exact).abs() < 1e-13);
    }

    #[test]
    fn viscous_runs_approach_the_play() {
        let grid = driver_grid(2, 4000);
        let distances: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&tau| {
                let samples: Vec<HysteresisSample> =
                    viscous_trajectory(2.0, 1.0, 1.0, 1.0, tau, &grid)
                        .unwrap()
                        .iter()
                        .map(Into::into)
                        .collect();
                sup_distance_to_closed_form(&samples, 2.0, 1.0)
            })
            .collect();
        assert!(distances.windows(2).all(|w| w[1] < w[0]), "{distances:?}");
    }

    /// Area between the rising and falling branches of the steady cycle,
    /// integrated on a fine `w` grid.
    fn brute_force_area(a: f64, g: f64) -> f64 {
        let n = 200_000;
        let dw = 2.0 * a / n as f64;
        (0..n)
            .map(|i| {
                let w = -a + (i as f64 + 0.5) * dw;
                let rising = (w - g).max(-(a - g));
                let falling = (w + g).min(a - g);
                (falling - rising) * dw
            })
            .sum()
    }

    #[test]
    fn loop_area_matches_brute_force() {
        for &(a, g) in &[(2.0, 1.0), (3.0, 0.5)] {
            let cfg = HysteresisConfig {
                periods: 3,
                ..HysteresisConfig::quasi_static(a, g, 1.0)
            };
            let run = run_hysteresis(&cfg).unwrap();
            // Corners between grid points are cut, an O(ds^2) loss.
            assert!(
                (run.loop_area - brute_force_area(a, g)).abs() < 1e-5,
                "{}",
                run.loop_area
            );
            assert!(run.loop_area > 0.0);
        }
        let cfg = HysteresisConfig::quasi_static(1.0, 1.5, 1.0);
        assert_eq!(run_hysteresis(&cfg).unwrap().loop_area, 0.0);
    }

    #[test]
    fn loop_area_sign_convention() {
        let ccw = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert_eq!(loop_area(&ccw), 1.0);
        let cw: Vec<_> = ccw.iter().rev().copied().collect();
        assert_eq!(loop_area(&cw), -1.0);
    }

    #[test]
    fn viscous_loop_without_threshold_shrinks() {
        let grid = driver_grid(3, 4000);
        let areas: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&tau| {
                let samples: Vec<HysteresisSample> =
                    viscous_trajectory(2.0, 0.0, 1.0, 1.0, tau, &grid)
                        .unwrap()
                        .iter()
                        .map(Into::into)
                        .collect();
                loop_area(&hysteresis_loop(last_period(&samples))).abs()
            })
            .collect();
        // The lag behind the driver, and with it the area, scales like 1/tau.
        assert!(areas.windows(2).all(|w| w[1] < 0.2 * w[0]), "{areas:?}");
        assert!(areas[2] < 0.1);
    }

    #[test]
    fn driver_grid_contains_breakpoints() {
        let grid = driver_grid(2, 17);
        for b in [0.0, 0.25, 0.75, 1.0, 1.25, 1.75, 2.0] {
            assert!(grid.contains(&b), "{b}");
        }
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(driver_grid(1, 4000).len(), 4001);
    }

    fn arbitrary_grid() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(1e-3f64..0.05, 10..200).prop_map(|steps| {
            let mut s = 0.0;
            std::iter::once(0.0)
                .chain(steps.into_iter().map(|d| {
                    s += d;
                    s
                }))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn play_invariants(a in 0.1f64..5.0, g in 0.05f64..3.0, grid in arbitrary_grid()) {
            let states = play_trajectory(a, g, 1.0, &grid).unwrap();
            for w in states.windows(2) {
                let (p, q) = (w[0], w[1]);
                prop_assert!((q.w - q.y).abs() <= g + 4.0 * f64::EPSILON * q.w.abs().max(1.0));
                prop_assert!((q.y - p.y).abs() <= (q.w - p.w).abs() + 1e-15);
                if q.w > p.w { prop_assert!(q.y >= p.y); }
                if q.w < p.w { prop_assert!(q.y <= p.y); }
            }
        }

        #[test]
        fn play_is_rate_independent(
            g in 0.05f64..2.0,
            driver in prop::collection::vec(-3.0f64..3.0, 2..100),
            stretch in prop::collection::vec(0.01f64..10.0, 100),
        ) {
            let fast: Vec<(f64, f64)> = driver.iter().enumerate().map(|(k, &w)| (k as f64, w)).collect();
            let mut s = 0.0;
            let slow: Vec<(f64, f64)> = driver.iter().zip(&stretch).map(|(&w, &d)| { s += d; (s, w) }).collect();
            prop_assert_eq!(play_sequence(g, 0.0, &fast), play_sequence(g, 0.0, &slow));
        }
    }
}
