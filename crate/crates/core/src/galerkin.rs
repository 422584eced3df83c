//! The Galerkin coefficient system and its time integration.
//!
//! With `u_n = sum a_i v_i` and `mu_n = sum b_i v_i`, testing the weak form
//! against each `v_i` gives
//!
//! ```text
//! a_i' + alpha lambda_i b_i = H_i(t)
//! b_i  = beta a_i' + G_i(a)
//! ```
//!
//! which combine into the explicit system
//! `a_i' = (H_i - alpha lambda_i G_i(a)) / (1 + alpha beta lambda_i)`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{
    make_quadrature, project, BasisTable, IntervalDomain, Quadrature, SpectralCoeffs,
};
use crate::config::{FluxData, Scheme, SimulationConfig};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::energy::FreeEnergyModel;
use crate::error::{Error, Result};

/// Distance from the pure phases below which singular models abort.
pub const SINGULAR_GUARD: f64 = 1e-6;

const MAX_NEWTON_ITERATIONS: usize = 50;

/// `H_i(t) = h(0,t) v_i(0) + h(L,t) v_i(L)`.
pub fn assemble_h(t: f64, flux: &FluxData, domain: &IntervalDomain) -> SpectralCoeffs {
    let left = flux.left.eval(t);
    let right = flux.right.eval(t);
    let length = domain.length();
    (1..=domain.modes())
        .map(|k| {
            let (_, mode) = crate::basis::eigenpair(k, domain).expect("k >= 1");
            left * mode.value(0.0) + right * mode.value(length)
        })
        .collect::<Vec<f64>>()
        .into()
}

/// Solver state at one instant. `b` and `adot` are consistent with `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub a: SpectralCoeffs,
    pub b: SpectralCoeffs,
    pub adot: SpectralCoeffs,
}

/// Right-hand side together with the nonlinear projection it used.
struct Evaluation {
    adot: SpectralCoeffs,
    g: SpectralCoeffs,
}

/// The assembled coefficient system for one model, flux and basis.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    domain: IntervalDomain,
    quadrature: Quadrature,
    table: BasisTable,
    model: FreeEnergyModel,
    flux: FluxData,
    alpha: f64,
    beta: f64,
    endpoint_values: Vec<(f64, f64)>,
}

impl GalerkinSystem {
    /// `beta = 0` is accepted here so that the unregularized right-hand side
    /// can be evaluated for comparison; runs require `beta > 0`.
    pub fn new(
        domain: IntervalDomain,
        quadrature: Quadrature,
        model: FreeEnergyModel,
        flux: FluxData,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must be nonnegative, got {beta}"
            )));
        }
        let table = BasisTable::new(&domain, &quadrature)?;
        let endpoint_values = (1..=domain.modes())
            .map(|k| {
                let (_, m) = crate::basis::eigenpair(k, &domain).expect("k >= 1");
                (m.value(0.0), m.value(domain.length()))
            })
            .collect();
        Ok(Self {
            domain,
            quadrature,
            table,
            model,
            flux,
            alpha,
            beta,
            endpoint_values,
        })
    }

    pub fn from_config(config: &SimulationConfig) -> Result<Self> {
        let domain = config.domain()?;
        let quadrature = make_quadrature(config.quadrature_nodes, &domain)?;
        Self::new(
            domain,
            quadrature,
            FreeEnergyModel::new(config.model)?,
            config.flux,
            config.alpha,
            config.beta,
        )
    }

    pub fn domain(&self) -> &IntervalDomain {
        &self.domain
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn table(&self) -> &BasisTable {
        &self.table
    }

    pub fn model(&self) -> &FreeEnergyModel {
        &self.model
    }

    pub fn flux(&self) -> &FluxData {
        &self.flux
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.table.eigenvalues()
    }

    /// A copy of this system with a different viscosity.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(
            self.domain,
            self.quadrature.clone(),
            self.model,
            self.flux,
            self.alpha,
            beta,
        )
    }

    fn guard(&self, t: f64, u: &[f64]) -> Result<()> {
        if !self.model.is_singular() {
            return Ok(());
        }
        let (min, max) = u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if !(min >= SINGULAR_GUARD && max <= 1.0 - SINGULAR_GUARD) {
            return Err(Error::SingularGuard {
                t,
                min,
                max,
                delta: SINGULAR_GUARD,
            });
        }
        Ok(())
    }

    fn g_at(&self, t: f64, a: &[f64]) -> Result<SpectralCoeffs> {
        let u = self.table.synthesize(a);
        self.guard(t, &u)?;
        let slopes = u
            .iter()
            .map(|&r| self.model.dpsi(r))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.table.analyze(&slopes))
    }

    /// `G_i(a) = integral of psi'(sum_j a_j v_j) v_i`, by quadrature.
    pub fn assemble_g(&self, a: &[f64]) -> Result<SpectralCoeffs> {
        self.g_at(f64::NAN, a)
    }

    pub fn assemble_h(&self, t: f64) -> SpectralCoeffs {
        let left = self.flux.left.eval(t);
        let right = self.flux.right.eval(t);
        self.endpoint_values
            .iter()
            .map(|(v0, vl)| left * v0 + right * vl)
            .collect::<Vec<f64>>()
            .into()
    }

    fn evaluate(&self, t: f64, a: &[f64]) -> Result<Evaluation> {
        let g = self.g_at(t, a)?;
        let h = self.assemble_h(t);
        let adot = self
            .eigenvalues()
            .iter()
            .zip(h.iter().zip(g.iter()))
            .map(|(&lambda, (&hi, &gi))| {
                let stiffness = self.alpha * lambda;
                let forcing = if lambda == 0.0 {
                    hi
                } else {
                    hi - stiffness * gi
                };
                forcing / (1.0 + stiffness * self.beta)
            })
            .collect::<Vec<f64>>()
            .into();
        Ok(Evaluation { adot, g })
    }

    /// `a'` of the coefficient system at `(t, a)`.
    pub fn rhs(&self, t: f64, a: &[f64]) -> Result<SpectralCoeffs> {
        Ok(self.evaluate(t, a)?.adot)
    }

    /// `b_i = beta a_i' + G_i(a)`.
    pub fn chemical_potential(&self, a: &[f64], adot: &[f64]) -> Result<SpectralCoeffs> {
        let g = self.assemble_g(a)?;
        Ok(self.combine_potential(adot, &g))
    }

    fn combine_potential(&self, adot: &[f64], g: &[f64]) -> SpectralCoeffs {
        adot.iter()
            .zip(g)
            .map(|(&d, &gi)| self.beta * d + gi)
            .collect::<Vec<f64>>()
            .into()
    }

    /// The consistent state for coefficients `a` at time `t`.
    pub fn state(&self, t: f64, a: SpectralCoeffs) -> Result<SolverState> {
        if !a.is_finite() {
            return Err(Error::NonFinite { t });
        }
        let eval = self.evaluate(t, &a)?;
        let b = self.combine_potential(&eval.adot, &eval.g);
        if !(eval.adot.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        Ok(SolverState {
            t,
            a,
            b,
            adot: eval.adot,
        })
    }

    /// Advances `state` by `dt`.
    pub fn step(
        &self,
        state: &SolverState,
        dt: f64,
        scheme: Scheme,
        newton_tol: f64,
    ) -> Result<SolverState> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let next = match scheme {
            Scheme::Rk4 => self.rk4(state, dt)?,
            Scheme::ImplicitEuler => self.implicit_euler(state, dt, newton_tol)?,
        };
        self.state(state.t + dt, next)
    }

    fn rk4(&self, state: &SolverState, dt: f64) -> Result<SpectralCoeffs> {
        let t = state.t;
        let a = &state.a;
        let k1 = &state.adot;
        let shifted = |k: &[f64], h: f64| -> Vec<f64> {
            a.iter().zip(k).map(|(ai, ki)| ai + h * ki).collect()
        };
        let k2 = self.rhs(t + 0.5 * dt, &shifted(k1, 0.5 * dt))?;
        let k3 = self.rhs(t + 0.5 * dt, &shifted(&k2, 0.5 * dt))?;
        let k4 = self.rhs(t + dt, &shifted(&k3, dt))?;
        let next: Vec<f64> = (0..a.len())
            .map(|i| a[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let next = SpectralCoeffs::from(next);
        if !next.is_finite() {
            return Err(Error::NonFinite { t: t + dt });
        }
        Ok(next)
    }

    /// Jacobian of the right-hand side with respect to `a`.
    pub fn jacobian(&self, t: f64, a: &[f64]) -> Result<DMatrix<f64>> {
        let n = a.len();
        let u = self.table.synthesize(a);
        self.guard(t, &u)?;
        let curvature = u
            .iter()
            .map(|&r| self.model.ddpsi(r))
            .collect::<Result<Vec<f64>>>()?;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let lambda = self.eigenvalues()[i];
            if lambda == 0.0 {
                continue;
            }
            let scale = -self.alpha * lambda / (1.0 + self.alpha * self.beta * lambda);
            let wi = self.table.weighted_row(i);
            for j in 0..n {
                let vj = self.table.row(j);
                let dg: f64 = wi
                    .iter()
                    .zip(vj)
                    .zip(&curvature)
                    .map(|((w, v), c)| w * v * c)
                    .sum();
                jac[(i, j)] = scale * dg;
            }
        }
        Ok(jac)
    }

    fn implicit_euler(&self, state: &SolverState, dt: f64, tol: f64) -> Result<SpectralCoeffs> {
        let t_next = state.t + dt;
        let n = state.a.len();
        let a0 = DVector::from_column_slice(&state.a);
        // Explicit predictor.
        let mut x = DVector::from_iterator(
            n,
            state
                .a
                .iter()
                .zip(state.adot.iter())
                .map(|(a, d)| a + dt * d),
        );
        let mut residual_norm = f64::INFINITY;
        for iteration in 1..=MAX_NEWTON_ITERATIONS {
            let f = self.rhs(t_next, x.as_slice())?;
            let residual = &x - &a0 - DVector::from_column_slice(&f) * dt;
            residual_norm = residual.amax();
            let mut jac = self.jacobian(t_next, x.as_slice())? * (-dt);
            for i in 0..n {
                jac[(i, i)] += 1.0;
            }
            let delta = jac.lu().solve(&residual).ok_or(Error::NewtonDivergence {
                t: t_next,
                iterations: iteration,
                residual: residual_norm,
            })?;
            x -= &delta;
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { t: t_next });
            }
            if delta.amax() <= tol * (1.0 + x.amax()) {
                return Ok(x.as_slice().to_vec().into());
            }
        }
        Err(Error::NewtonDivergence {
            t: t_next,
            iterations: MAX_NEWTON_ITERATIONS,
            residual: residual_norm,
        })
    }

    /// `max |psi''|` over the nodal values of `a`, skipping singular points.
    pub fn curvature_estimate(&self, a: &[f64]) -> f64 {
        self.table
            .synthesize(a)
            .iter()
            .filter_map(|&r| self.model.ddpsi(r).ok())
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `alpha lambda_n K dt / (1 + alpha beta lambda_n)`: the explicit
    /// stability number of the stiffest mode for curvature `K`.
    pub fn stability_number(&self, curvature: f64, dt: f64) -> f64 {
        let lambda = *self.eigenvalues().last().expect("at least one mode");
        self.alpha * lambda * curvature * dt / (1.0 + self.alpha * self.beta * lambda)
    }
}

/// One recorded point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub a: SpectralCoeffs,
    pub b: SpectralCoeffs,
    pub diagnostics: DiagnosticsRecord,
}

/// The output of [`run`]: samples in increasing time, plus any failure that
/// cut the run short.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub failure: Option<Error>,
    pub advisories: Vec<String>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// Stability threshold above which an advisory is recorded.
pub const STABILITY_ADVISORY: f64 = 2.0;

/// Projects the initial datum and integrates to the final time.
///
/// Setup problems (invalid configuration, an initial state the model cannot
/// evaluate) are returned as errors. A failure during time stepping yields
/// the samples recorded so far with [`Trajectory::failure`] set.
pub fn run(config: &SimulationConfig) -> Result<Trajectory> {
    config.validate()?;
    let system = GalerkinSystem::from_config(config)?;
    let domain = *system.domain();
    let initial = config.initial.to_function(config.length)?;
    let a0 = project(initial, domain.modes(), system.quadrature(), &domain)?;
    run_from(&system, a0, config)
}

/// As [`run`], with an explicit system and initial coefficients.
pub fn run_from(
    system: &GalerkinSystem,
    a0: SpectralCoeffs,
    config: &SimulationConfig,
) -> Result<Trajectory> {
    let mut state = system.state(0.0, a0)?;
    let mut ledger = diagnostics::EnergyLedger::new(system, &state);
    let steps = config.steps();
    let mut samples = vec![Sample {
        t: 0.0,
        a: state.a.clone(),
        b: state.b.clone(),
        diagnostics: ledger.record(),
    }];
    let mut advisories = Vec::new();
    let mut advised = false;
    let mut advise = |system: &GalerkinSystem, a: &[f64], t: f64, advisories: &mut Vec<String>| {
        if advised || config.scheme != Scheme::Rk4 {
            return;
        }
        let curvature = system.curvature_estimate(a);
        let number = system.stability_number(curvature, config.dt);
        if number > STABILITY_ADVISORY {
            advised = true;
            advisories.push(format!(
                "t = {t}: explicit stability number {number:.3} exceeds {STABILITY_ADVISORY} \
                 (max |psi''| = {curvature:.3}); reduce dt or use scheme = implicit_euler"
            ));
        }
    };
    advise(system, &state.a, 0.0, &mut advisories);

    let mut failure = None;
    for k in 1..=steps {
        let t_next = if k == steps {
            config.final_time
        } else {
            k as f64 * config.dt
        };
        let dt = t_next - state.t;
        let next = system
            .step(&state, dt, config.scheme, config.newton_tol)
            .map(|mut s| {
                s.t = t_next;
                s
            });
        match next {
            Ok(next) => {
                ledger.advance(system, &state, &next);
                state = next;
            }
            Err(err) => {
                failure = Some(err);
                break;
            }
        }
        if k % config.output_every == 0 || k == steps {
            advise(system, &state.a, state.t, &mut advisories);
            samples.push(Sample {
                t: state.t,
                a: state.a.clone(),
                b: state.b.clone(),
                diagnostics: ledger.record(),
            });
        }
    }
    Ok(Trajectory {
        samples,
        failure,
        advisories,
    })
}
