//! Run descriptions shared by the solver, the hysteresis driver and the CLI.

use crate::basis::{IntervalDomain, NODES_PER_MODE};
use crate::energy::{EnergyKind, FreeEnergyModel};
use crate::error::{Error, Result};
use crate::hysteresis::zigzag;

/// Boundary flux at one endpoint as a function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxProfile {
    Zero,
    Constant(f64),
    /// `amplitude * z(t / period)` with `z` the unit zigzag.
    Zigzag {
        amplitude: f64,
        period: f64,
    },
}

impl FluxProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant(c) => c,
            Self::Zigzag { amplitude, period } => amplitude * zigzag(t / period),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero) || matches!(self, Self::Constant(c) if *c == 0.0)
    }

    fn validate(&self, side: &str) -> Result<()> {
        let ok = match *self {
            Self::Zero => true,
            Self::Constant(c) => c.is_finite(),
            Self::Zigzag { amplitude, period } => {
                amplitude.is_finite() && period.is_finite() && period > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid {side} flux {self:?}"
            )))
        }
    }
}

/// Normal flux `h` of the chemical potential at `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxData {
    pub left: FluxProfile,
    pub right: FluxProfile,
}

impl FluxData {
    pub fn zero() -> Self {
        Self {
            left: FluxProfile::Zero,
            right: FluxProfile::Zero,
        }
    }

    pub fn constant(left: f64, right: f64) -> Self {
        Self {
            left: FluxProfile::Constant(left),
            right: FluxProfile::Constant(right),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_zero() && self.right.is_zero()
    }
}

impl Default for FluxData {
    fn default() -> Self {
        Self::zero()
    }
}

/// Initial concentration `u_0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Constant(f64),
    /// `sum_j c_j cos(j pi x / L)` given as `(j, c_j)` pairs.
    Cosine(Vec<(usize, f64)>),
    /// Arithmetic expression in `x` (and the constant `L`).
    Expression(String),
}

impl InitialDatum {
    /// Compiles the datum into a callable function of `x`.
    pub fn to_function(&self, length: f64) -> Result<Box<dyn Fn(f64) -> f64>> {
        match self {
            Self::Constant(c) => {
                let c = *c;
                Ok(Box::new(move |_| c))
            }
            Self::Cosine(terms) => {
                let terms = terms.clone();
                Ok(Box::new(move |x| {
                    terms
                        .iter()
                        .map(|&(j, c)| c * (j as f64 * std::f64::consts::PI * x / length).cos())
                        .sum()
                }))
            }
            Self::Expression(text) => {
                let err = |e: meval::Error| Error::Expression {
                    source_text: text.clone(),
                    message: e.to_string(),
                };
                let expr: meval::Expr = text.parse().map_err(err)?;
                let mut ctx = meval::Context::new();
                ctx.var("L", length);
                let f = expr.bind_with_context(ctx, "x").map_err(err)?;
                // Reject expressions that do not evaluate to a number.
                let probe = f(0.5 * length);
                if !probe.is_finite() {
                    return Err(Error::Expression {
                        source_text: text.clone(),
                        message: format!("non-finite value {probe} at x = L/2"),
                    });
                }
                Ok(Box::new(f))
            }
        }
    }
}

/// Time-stepping scheme for the coefficient ODE system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    ImplicitEuler,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::ImplicitEuler => "implicit_euler",
        }
    }
}

/// Default Newton tolerance of the implicit scheme (relative, max-norm).
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;

/// Default number of time steps when `dt` is not given.
pub const DEFAULT_STEPS: usize = 10_000;

/// Everything needed to run one Galerkin simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub length: f64,
    pub modes: usize,
    pub quadrature_nodes: usize,
    pub alpha: f64,
    pub beta: f64,
    pub final_time: f64,
    pub dt: f64,
    /// A sample is recorded every `output_every` steps (and at `T`).
    pub output_every: usize,
    pub scheme: Scheme,
    pub newton_tol: f64,
    pub model: EnergyKind,
    pub flux: FluxData,
    pub initial: InitialDatum,
}

impl SimulationConfig {
    /// A configuration with the default quadrature, `dt = T / 10^4`, and
    /// output every step.
    pub fn new(
        length: f64,
        modes: usize,
        alpha: f64,
        beta: f64,
        final_time: f64,
        model: EnergyKind,
        initial: InitialDatum,
    ) -> Self {
        Self {
            length,
            modes,
            quadrature_nodes: (NODES_PER_MODE * modes).max(crate::basis::MIN_DEFAULT_NODES),
            alpha,
            beta,
            final_time,
            dt: final_time / DEFAULT_STEPS as f64,
            output_every: 1,
            scheme: Scheme::Rk4,
            newton_tol: DEFAULT_NEWTON_TOL,
            model,
            flux: FluxData::zero(),
            initial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        IntervalDomain::new(self.length, self.modes)?;
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return fail(format!(
                "alpha must be strictly positive, got {}",
                self.alpha
            ));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return fail(format!("beta must be strictly positive, got {}", self.beta));
        }
        if self.quadrature_nodes < NODES_PER_MODE * self.modes {
            return fail(format!(
                "quadrature_nodes = {} is below 4 * modes = {}",
                self.quadrature_nodes,
                NODES_PER_MODE * self.modes
            ));
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return fail(format!(
                "final_time must be positive, got {}",
                self.final_time
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.final_time) {
            return fail(format!("dt must lie in (0, final_time], got {}", self.dt));
        }
        if self.output_every == 0 {
            return fail("output_every must be at least 1".into());
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return fail(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        FreeEnergyModel::new(self.model)?;
        self.flux.left.validate("left")?;
        self.flux.right.validate("right")?;
        self.initial.to_function(self.length).map(|_| ())
    }

    pub fn domain(&self) -> Result<IntervalDomain> {
        IntervalDomain::new(self.length, self.modes)
    }

    /// Number of time steps; the last one is shortened if `dt` does not
    /// divide `T`.
    pub fn steps(&self) -> usize {
        let ratio = self.final_time / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded.max(1.0) as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Minimum number of steps per driving period for hysteresis runs.
pub const MIN_STEPS_PER_PERIOD: usize = 16;

/// Default resolution of the driver: breakpoints of the zigzag land on the grid.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 4000;

/// The threshold-dissipation experiment with zigzag driving.
///
/// `tau = None` selects the quasi-static (play operator) limit; otherwise
/// the viscous scalar system with damping `beta` and period `tau` is run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisConfig {
    pub amplitude: f64,
    pub threshold: f64,
    pub stiffness: f64,
    pub beta: f64,
    pub tau: Option<f64>,
    pub periods: usize,
    pub steps_per_period: usize,
}

impl HysteresisConfig {
    pub fn quasi_static(amplitude: f64, threshold: f64, stiffness: f64) -> Self {
        Self {
            amplitude,
            threshold,
            stiffness,
            beta: 1.0,
            tau: None,
            periods: 2,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("amplitude", self.amplitude)?;
        positive("threshold", self.threshold)?;
        positive("stiffness", self.stiffness)?;
        positive("beta", self.beta)?;
        if let Some(tau) = self.tau {
            positive("tau", tau)?;
        }
        if self.periods == 0 {
            return Err(Error::InvalidArgument("periods must be at least 1".into()));
        }
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::InvalidArgument(format!(
                "steps_per_period must be at least {MIN_STEPS_PER_PERIOD}, got {}",
                self.steps_per_period
            )));
        }
        Ok(())
    }
}
