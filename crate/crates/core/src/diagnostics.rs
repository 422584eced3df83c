//! Energy bookkeeping for Galerkin runs.
//!
//! Along exact solutions of the coefficient system
//!
//! ```text
//! F(t) + int_0^t D ds = int_0^t P ds + F(0)
//! ```
//!
//! with `F` the free energy, `D = alpha sum lambda_k b_k^2 + beta sum a_k'^2`
//! the dissipation rate and `P = h(0) mu(0) + h(L) mu(L)` the boundary
//! power. The residual of this balance, with the time integrals taken by the
//! composite trapezoid rule, measures time-discretization error only.

use crate::basis::{reconstruct_unchecked, IntervalDomain, Quadrature};
use crate::config::FluxData;
use crate::energy::FreeEnergyModel;
use crate::galerkin::{GalerkinSystem, Sample, SolverState};

/// Per-sample energy quantities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub mass: f64,
    pub free_energy: f64,
    pub dissipation_rate: f64,
    pub boundary_power: f64,
    pub energy_residual: f64,
    /// `energy_residual / (|F(0)| + 1)`.
    pub energy_residual_relative: f64,
    /// `sum lambda_k a_k^2`, the squared L² norm of the concentration gradient.
    pub gradient_energy: f64,
}

/// `integral of u = a_1 sqrt(L)`.
pub fn total_mass(a: &[f64], domain: &IntervalDomain) -> f64 {
    a.first().copied().unwrap_or(0.0) * domain.length().sqrt()
}

/// `integral of psi(u)` by quadrature; `+inf` if a singular model leaves
/// its domain at any node.
pub fn free_energy(
    a: &[f64],
    model: &FreeEnergyModel,
    quadrature: &Quadrature,
    domain: &IntervalDomain,
) -> f64 {
    quadrature.integrate(|x| model.psi(reconstruct_unchecked(a, x, domain.length())))
}

/// `alpha sum lambda_k b_k^2 + beta sum a_k'^2`.
pub fn dissipation_rate(
    adot: &[f64],
    b: &[f64],
    alpha: f64,
    beta: f64,
    domain: &IntervalDomain,
) -> f64 {
    let lambdas = crate::basis::eigenvalues(domain);
    let gradient: f64 = lambdas.iter().zip(b).map(|(l, bk)| l * bk * bk).sum();
    let rate: f64 = adot.iter().map(|d| d * d).sum();
    alpha * gradient + beta * rate
}

/// `h(0,t) mu(0,t) + h(L,t) mu(L,t)`.
pub fn boundary_power(t: f64, flux: &FluxData, b: &[f64], domain: &IntervalDomain) -> f64 {
    let left = flux.left.eval(t);
    let right = flux.right.eval(t);
    let mut power = 0.0;
    if left != 0.0 {
        power += left * reconstruct_unchecked(b, 0.0, domain.length());
    }
    if right != 0.0 {
        power += right * reconstruct_unchecked(b, domain.length(), domain.length());
    }
    power
}

/// `sum lambda_k a_k^2`.
pub fn gradient_energy(a: &[f64], domain: &IntervalDomain) -> f64 {
    crate::basis::eigenvalues(domain)
        .iter()
        .zip(a)
        .map(|(l, ak)| l * ak * ak)
        .sum()
}

/// L² distance between two expansions in the same basis, padding the shorter
/// one with zeros.
pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let d = a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Composite-trapezoid energy residual over recorded samples.
///
/// The samples must carry `free_energy`, `dissipation_rate` and
/// `boundary_power`; the value at the last sample is returned. Accuracy is
/// second order in the sample spacing.
pub fn energy_residual(samples: &[Sample]) -> f64 {
    let Some(first) = samples.first() else {
        return 0.0;
    };
    let mut dissipated = 0.0;
    let mut supplied = 0.0;
    for w in samples.windows(2) {
        let dt = w[1].t - w[0].t;
        dissipated +=
            0.5 * dt * (w[0].diagnostics.dissipation_rate + w[1].diagnostics.dissipation_rate);
        supplied += 0.5 * dt * (w[0].diagnostics.boundary_power + w[1].diagnostics.boundary_power);
    }
    let last = samples.last().expect("non-empty");
    last.diagnostics.free_energy + dissipated - supplied - first.diagnostics.free_energy
}

/// Running energy balance, accumulated over every solver step.
#[derive(Debug, Clone)]
pub(crate) struct EnergyLedger {
    initial_energy: f64,
    current: DiagnosticsRecord,
    dissipated: f64,
    supplied: f64,
}

impl EnergyLedger {
    pub(crate) fn new(system: &GalerkinSystem, state: &SolverState) -> Self {
        let current = instantaneous(system, state);
        Self {
            initial_energy: current.free_energy,
            current,
            dissipated: 0.0,
            supplied: 0.0,
        }
    }

    pub(crate) fn advance(
        &mut self,
        system: &GalerkinSystem,
        previous: &SolverState,
        next: &SolverState,
    ) {
        let dt = next.t - previous.t;
        let now = instantaneous(system, next);
        self.dissipated += 0.5 * dt * (self.current.dissipation_rate + now.dissipation_rate);
        self.supplied += 0.5 * dt * (self.current.boundary_power + now.boundary_power);
        self.current = now;
    }

    pub(crate) fn record(&self) -> DiagnosticsRecord {
        let residual =
            self.current.free_energy + self.dissipated - self.supplied - self.initial_energy;
        DiagnosticsRecord {
            energy_residual: residual,
            energy_residual_relative: residual / (self.initial_energy.abs() + 1.0),
            ..self.current
        }
    }
}

fn instantaneous(system: &GalerkinSystem, state: &SolverState) -> DiagnosticsRecord {
    let domain = system.domain();
    let u = system.table().synthesize(&state.a);
    let free_energy = u
        .iter()
        .zip(system.quadrature().weights())
        .map(|(&r, w)| w * system.model().psi(r))
        .sum();
    DiagnosticsRecord {
        mass: total_mass(&state.a, domain),
        free_energy,
        dissipation_rate: dissipation_rate(
            &state.adot,
            &state.b,
            system.alpha(),
            system.beta(),
            domain,
        ),
        boundary_power: boundary_power(state.t, system.flux(), &state.b, domain),
        energy_residual: 0.0,
        energy_residual_relative: 0.0,
        gradient_energy: gradient_energy(&state.a, domain),
    }
}
