//! Benchmark fixtures shared by the criterion targets.

use viscodiff_core::{EnergyKind, InitialDatum, SimulationConfig};

/// A spinodal double-well run on the unit interval.
pub fn double_well(modes: usize, final_time: f64, dt: f64) -> SimulationConfig {
    let mut c = SimulationConfig::new(
        1.0,
        modes,
        1.0,
        0.1,
        final_time,
        EnergyKind::DoubleWell { kappa: 1.0 },
        InitialDatum::Expression("0.5 + 0.3*cos(pi*x) + 0.1*cos(2*pi*x)".into()),
    );
    c.dt = dt;
    c.output_every = usize::MAX;
    c
}
