//! Coarse-grain free energies `psi` and their derivatives.
//!
//! Logarithms are natural logarithms throughout.

use crate::error::{Error, Result};

/// Functional form of the free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyKind {
    /// `kappa u^2 (u - 1)^2`.
    DoubleWell { kappa: f64 },
    /// `K r^2 / 2`.
    Quadratic { stiffness: f64 },
    /// `k r ln r + k (1 - r) ln(1 - r) + chi r (1 - r)` on `(0, 1)`, `+inf` elsewhere.
    RegularSolution { k: f64, chi: f64 },
    /// The regular-solution energy with each entropic term continued
    /// quadratically below `epsilon`.
    RegularizedLog { k: f64, chi: f64, epsilon: f64 },
}

impl EnergyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::DoubleWell { .. } => "double_well",
            Self::Quadratic { .. } => "quadratic",
            Self::RegularSolution { .. } => "regular_solution",
            Self::RegularizedLog { .. } => "regularized_log",
        }
    }
}

/// Growth exponent `p` and the constants `M_0..M_5` of
///
/// ```text
/// psi''(r) >= -M_0
/// -M_1 + M_2 |r|^p <= psi(r) <= M_3 + M_4 |r|^p
/// |psi'(r)| <= M_5 (1 + |r|^(p-1))
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBounds {
    pub p: f64,
    pub m: [f64; 6],
}

/// A free-energy model: its form plus optional growth metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyModel {
    kind: EnergyKind,
    growth: Option<GrowthBounds>,
}

impl FreeEnergyModel {
    pub fn new(kind: EnergyKind) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        let nonnegative = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be nonnegative, got {v}"
                )))
            }
        };
        match kind {
            EnergyKind::DoubleWell { kappa } => positive("kappa", kappa)?,
            EnergyKind::Quadratic { stiffness } => positive("stiffness", stiffness)?,
            EnergyKind::RegularSolution { k, chi } => {
                positive("k", k)?;
                nonnegative("chi", chi)?;
            }
            EnergyKind::RegularizedLog { k, chi, epsilon } => {
                positive("k", k)?;
                nonnegative("chi", chi)?;
                if !(epsilon > 0.0 && epsilon < 0.5) {
                    return Err(Error::InvalidArgument(format!(
                        "epsilon must lie in (0, 1/2), got {epsilon}"
                    )));
                }
            }
        }
        Ok(Self { kind, growth: None })
    }

    pub fn double_well(kappa: f64) -> Result<Self> {
        Self::new(EnergyKind::DoubleWell { kappa })
    }

    pub fn quadratic(stiffness: f64) -> Result<Self> {
        Self::new(EnergyKind::Quadratic { stiffness })
    }

    pub fn regular_solution(k: f64, chi: f64) -> Result<Self> {
        Self::new(EnergyKind::RegularSolution { k, chi })
    }

    pub fn regularized_log(k: f64, chi: f64, epsilon: f64) -> Result<Self> {
        Self::new(EnergyKind::RegularizedLog { k, chi, epsilon })
    }

    pub fn with_growth(mut self, bounds: GrowthBounds) -> Self {
        self.growth = Some(bounds);
        self
    }

    pub fn kind(&self) -> EnergyKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn growth(&self) -> Option<&GrowthBounds> {
        self.growth.as_ref()
    }

    /// True for models that are infinite outside `(0, 1)`.
    pub fn is_singular(&self) -> bool {
        matches!(self.kind, EnergyKind::RegularSolution { .. })
    }

    /// The lower curvature bound `M_0` when it is known in closed form.
    pub fn curvature_lower_bound(&self) -> Option<f64> {
        match self.kind {
            EnergyKind::DoubleWell { kappa } => Some(kappa),
            EnergyKind::Quadratic { .. } => Some(0.0),
            EnergyKind::RegularSolution { .. } => None,
            // psi_e_eps'' >= k on each side, so psi'' >= -2 chi.
            EnergyKind::RegularizedLog { chi, .. } => Some(2.0 * chi),
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        match self.kind {
            EnergyKind::DoubleWell { kappa } => {
                let s = r * (r - 1.0);
                kappa * s * s
            }
            EnergyKind::Quadratic { stiffness } => 0.5 * stiffness * r * r,
            EnergyKind::RegularSolution { k, chi } => {
                if r > 0.0 && r < 1.0 {
                    entropy(k, r) + entropy(k, 1.0 - r) + chi * r * (1.0 - r)
                } else {
                    f64::INFINITY
                }
            }
            EnergyKind::RegularizedLog { k, chi, epsilon } => regularized_psi(k, chi, epsilon, r),
        }
    }

    pub fn dpsi(&self, r: f64) -> Result<f64> {
        match self.kind {
            EnergyKind::DoubleWell { kappa } => Ok(2.0 * kappa * r * (r - 1.0) * (2.0 * r - 1.0)),
            EnergyKind::Quadratic { stiffness } => Ok(stiffness * r),
            EnergyKind::RegularSolution { k, chi } => {
                self.check_open_unit(r)?;
                Ok(entropy_slope(k, r) - entropy_slope(k, 1.0 - r) + chi * (1.0 - 2.0 * r))
            }
            EnergyKind::RegularizedLog { k, chi, epsilon } => {
                Ok(regularized_dpsi(k, chi, epsilon, r))
            }
        }
    }

    pub fn ddpsi(&self, r: f64) -> Result<f64> {
        match self.kind {
            EnergyKind::DoubleWell { kappa } => Ok(2.0 * kappa * (6.0 * r * r - 6.0 * r + 1.0)),
            EnergyKind::Quadratic { stiffness } => Ok(stiffness),
            EnergyKind::RegularSolution { k, chi } => {
                self.check_open_unit(r)?;
                Ok(k / r + k / (1.0 - r) - 2.0 * chi)
            }
            EnergyKind::RegularizedLog { k, chi, epsilon } => {
                Ok(
                    psi_e_eps_curvature(k, epsilon, r) + psi_e_eps_curvature(k, epsilon, 1.0 - r)
                        - 2.0 * chi,
                )
            }
        }
    }

    fn check_open_unit(&self, r: f64) -> Result<()> {
        if r > 0.0 && r < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain {
                model: self.name(),
                r,
            })
        }
    }

    /// Checks the declared growth inequalities at every sample.
    pub fn check_growth(&self, samples: &[f64]) -> Result<GrowthReport> {
        let bounds = self.growth.ok_or(Error::MissingGrowthBounds)?;
        let [m0, m1, m2, m3, m4, m5] = bounds.m;
        let p = bounds.p;
        let mut violations = Vec::new();
        for &r in samples {
            let power = r.abs().powf(p);
            let value = self.psi(r);
            if value.is_nan() || value < -m1 + m2 * power {
                violations.push(GrowthViolation {
                    r,
                    inequality: Inequality::Coercivity,
                });
            }
            if value.is_nan() || value > m3 + m4 * power {
                violations.push(GrowthViolation {
                    r,
                    inequality: Inequality::UpperGrowth,
                });
            }
            match self.dpsi(r) {
                Ok(slope) if slope.abs() <= m5 * (1.0 + r.abs().powf(p - 1.0)) => {}
                _ => violations.push(GrowthViolation {
                    r,
                    inequality: Inequality::SlopeGrowth,
                }),
            }
            match self.ddpsi(r) {
                Ok(curv) if curv >= -m0 => {}
                _ => violations.push(GrowthViolation {
                    r,
                    inequality: Inequality::CurvatureBound,
                }),
            }
        }
        Ok(GrowthReport {
            samples: samples.len(),
            violations,
        })
    }
}

/// Which assumption a sample violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `psi'' >= -M_0`
    CurvatureBound,
    /// `psi >= -M_1 + M_2 |r|^p`
    Coercivity,
    /// `psi <= M_3 + M_4 |r|^p`
    UpperGrowth,
    /// `|psi'| <= M_5 (1 + |r|^(p-1))`
    SlopeGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthViolation {
    pub r: f64,
    pub inequality: Inequality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub samples: usize,
    pub violations: Vec<GrowthViolation>,
}

impl GrowthReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GrowthBounds {
    /// Estimates constants for exponent `p` by maximizing over `grid`.
    ///
    /// `M_2` is half the smallest ratio `psi / |r|^p` over `|r| >= 1`; the
    /// remaining constants are the smallest values that satisfy each
    /// inequality on the grid, inflated by 1% (plus 1e-9 absolute).
    /// The result is a diagnostic, not a proof.
    pub fn estimate(model: &FreeEnergyModel, p: f64, grid: &[f64]) -> Self {
        let inflate = |v: f64| v.max(0.0) * 1.01 + 1e-9;
        let far: Vec<f64> = grid.iter().copied().filter(|r| r.abs() >= 1.0).collect();
        let ratio = |r: f64| model.psi(r) / r.abs().powf(p);
        let m2 = 0.5
            * far
                .iter()
                .map(|&r| ratio(r))
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
        let m2 = if m2.is_finite() { m2 } else { 0.0 };
        let m4 = inflate(far.iter().map(|&r| ratio(r)).fold(0.0, f64::max));
        let m1 = inflate(
            grid.iter()
                .map(|&r| m2 * r.abs().powf(p) - model.psi(r))
                .fold(0.0, f64::max),
        );
        let m3 = inflate(
            grid.iter()
                .map(|&r| model.psi(r) - m4 * r.abs().powf(p))
                .fold(0.0, f64::max),
        );
        let m5 = inflate(
            grid.iter()
                .filter_map(|&r| {
                    model
                        .dpsi(r)
                        .ok()
                        .map(|d| d.abs() / (1.0 + r.abs().powf(p - 1.0)))
                })
                .fold(0.0, f64::max),
        );
        let m0 = model.curvature_lower_bound().unwrap_or_else(|| {
            inflate(
                grid.iter()
                    .filter_map(|&r| model.ddpsi(r).ok())
                    .map(|c| -c)
                    .fold(0.0, f64::max),
            )
        });
        Self {
            p,
            m: [m0, m1, m2, m3, m4, m5],
        }
    }
}

#[inline]
fn entropy(k: f64, r: f64) -> f64 {
    k * r * r.ln()
}

#[inline]
fn entropy_slope(k: f64, r: f64) -> f64 {
    k * (r.ln() + 1.0)
}

/// The entropic term `k r ln r`, continued below `epsilon` by the quadratic
/// `k r ln(epsilon) + (k/2)(r^2/epsilon - epsilon)`.
pub fn psi_e_eps(k: f64, epsilon: f64, r: f64) -> f64 {
    if r >= epsilon {
        entropy(k, r)
    } else {
        k * r * epsilon.ln() + 0.5 * k * (r * r / epsilon - epsilon)
    }
}

/// Derivative of [`psi_e_eps`] in `r`.
pub fn psi_e_eps_slope(k: f64, epsilon: f64, r: f64) -> f64 {
    if r >= epsilon {
        entropy_slope(k, r)
    } else {
        k * epsilon.ln() + k * r / epsilon
    }
}

fn psi_e_eps_curvature(k: f64, epsilon: f64, r: f64) -> f64 {
    if r >= epsilon {
        k / r
    } else {
        k / epsilon
    }
}

/// `psi_e_eps(r) + psi_e_eps(1 - r) + chi r (1 - r)`.
pub fn regularized_psi(k: f64, chi: f64, epsilon: f64, r: f64) -> f64 {
    psi_e_eps(k, epsilon, r) + psi_e_eps(k, epsilon, 1.0 - r) + chi * r * (1.0 - r)
}

/// Derivative of [`regularized_psi`] in `r`.
pub fn regularized_dpsi(k: f64, chi: f64, epsilon: f64, r: f64) -> f64 {
    psi_e_eps_slope(k, epsilon, r) - psi_e_eps_slope(k, epsilon, 1.0 - r) + chi * (1.0 - 2.0 * r)
}
