//! Neumann-Laplacian eigenbasis on an interval, composite Gauss-Legendre
//! quadrature, and projection onto the leading modes.
//!
//! The modes are the L²-orthonormal cosine family
//!
//! ```text
//! v_1(x) = 1/sqrt(L),   v_k(x) = sqrt(2/L) cos((k-1) pi x / L),   k >= 2
//! ```
//!
//! with eigenvalues `lambda_k = ((k-1) pi / L)^2` of `-v'' = lambda v`,
//! `v'(0) = v'(L) = 0`.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Largest number of Gauss nodes placed on a single panel.
pub const MAX_PANEL_NODES: usize = 32;

/// Smallest total node count used by the default quadrature.
pub const MIN_DEFAULT_NODES: usize = 32;

/// Nodes required per resolved mode.
pub const NODES_PER_MODE: usize = 4;

/// The interval `[0, L]` together with the number of retained modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDomain {
    length: f64,
    modes: usize,
}

impl IntervalDomain {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if modes == 0 {
            return Err(Error::InvalidArgument(
                "mode count must be at least 1".into(),
            ));
        }
        Ok(Self { length, modes })
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Total node count used when none is configured: `max(4n, 32)`.
    pub fn default_quadrature_nodes(&self) -> usize {
        (NODES_PER_MODE * self.modes).max(MIN_DEFAULT_NODES)
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 || x > self.length {
            return Err(Error::InvalidArgument(format!(
                "x = {x} lies outside [0, {}]",
                self.length
            )));
        }
        Ok(())
    }
}

/// One eigenfunction of the Neumann Laplacian: `amplitude * cos(wavenumber * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub index: usize,
    pub eigenvalue: f64,
    pub wavenumber: f64,
    pub amplitude: f64,
}

impl Mode {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if self.index == 1 {
            self.amplitude
        } else {
            self.amplitude * (self.wavenumber * x).cos()
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        if self.index == 1 {
            0.0
        } else {
            -self.amplitude * self.wavenumber * (self.wavenumber * x).sin()
        }
    }

    #[inline]
    pub fn second_derivative(&self, x: f64) -> f64 {
        -self.eigenvalue * self.value(x)
    }
}

/// Eigenvalue and eigenfunction of mode `k` (1-based).
pub fn eigenpair(k: usize, domain: &IntervalDomain) -> Result<(f64, Mode)> {
    if k == 0 {
        return Err(Error::InvalidArgument("mode index is 1-based".into()));
    }
    Ok(mode_unchecked(k, domain.length))
}

fn mode_unchecked(k: usize, length: f64) -> (f64, Mode) {
    let wavenumber = (k - 1) as f64 * PI / length;
    let amplitude = if k == 1 {
        1.0 / length.sqrt()
    } else {
        (2.0 / length).sqrt()
    };
    let eigenvalue = wavenumber * wavenumber;
    (
        eigenvalue,
        Mode {
            index: k,
            eigenvalue,
            wavenumber,
            amplitude,
        },
    )
}

/// Eigenvalues `lambda_1..lambda_n` of the retained modes.
pub fn eigenvalues(domain: &IntervalDomain) -> Vec<f64> {
    (1..=domain.modes)
        .map(|k| mode_unchecked(k, domain.length).0)
        .collect()
}

/// `v_k(x)`.
pub fn evaluate_basis(k: usize, x: f64, domain: &IntervalDomain) -> Result<f64> {
    domain.check_point(x)?;
    let (_, mode) = eigenpair(k, domain)?;
    Ok(mode.value(x))
}

/// Coefficients `a_1..a_n` of a function in the eigenbasis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralCoeffs(Vec<f64>);

impl SpectralCoeffs {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl From<Vec<f64>> for SpectralCoeffs {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for SpectralCoeffs {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpectralCoeffs {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Nodes and weights of a quadrature rule on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    degree: usize,
}

impl Quadrature {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree integrated exactly on every panel.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of modes this rule resolves.
    pub fn resolved_modes(&self) -> usize {
        self.len() / NODES_PER_MODE
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub(crate) fn ensure_resolves(&self, modes: usize) -> Result<()> {
        let required = NODES_PER_MODE * modes;
        if self.len() < required {
            return Err(Error::Resolution {
                modes,
                nodes: self.len(),
                required,
            });
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre rule with `total_nodes` nodes on `[0, L]`.
///
/// Nodes are split into the fewest panels holding at most
/// [`MAX_PANEL_NODES`] each; panel widths are proportional to their node
/// counts so the node density is uniform.
pub fn make_quadrature(total_nodes: usize, domain: &IntervalDomain) -> Result<Quadrature> {
    if total_nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs at least 2 nodes, got {total_nodes}"
        )));
    }
    let panels = total_nodes.div_ceil(MAX_PANEL_NODES);
    let base = total_nodes / panels;
    let extra = total_nodes % panels;
    let length = domain.length;

    let mut nodes = Vec::with_capacity(total_nodes);
    let mut weights = Vec::with_capacity(total_nodes);
    let mut placed = 0usize;
    let mut cached: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    for p in 0..panels {
        let count = base + usize::from(p < extra);
        let a = length * placed as f64 / total_nodes as f64;
        let b = length * (placed + count) as f64 / total_nodes as f64;
        if cached.as_ref().map(|c| c.0) != Some(count) {
            let (x, w) = gauss_legendre(count);
            cached = Some((count, x, w));
        }
        let (_, ref_x, ref_w) = cached.as_ref().expect("rule cached above");
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in ref_x.iter().zip(ref_w) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
        placed += count;
    }
    Ok(Quadrature {
        nodes,
        weights,
        degree: 2 * base - 1,
    })
}

/// `a_i = integral of f v_i` for `i = 1..n`, by quadrature.
pub fn project(
    f: impl Fn(f64) -> f64,
    n: usize,
    quadrature: &Quadrature,
    domain: &IntervalDomain,
) -> Result<SpectralCoeffs> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot project onto zero modes".into(),
        ));
    }
    quadrature.ensure_resolves(n)?;
    let samples: Vec<f64> = quadrature.nodes().iter().map(|&x| f(x)).collect();
    let coeffs = (1..=n)
        .map(|k| {
            let (_, mode) = mode_unchecked(k, domain.length);
            quadrature
                .nodes()
                .iter()
                .zip(quadrature.weights())
                .zip(&samples)
                .map(|((&x, &w), &fx)| w * fx * mode.value(x))
                .sum()
        })
        .collect::<Vec<f64>>();
    Ok(coeffs.into())
}

/// `sum_i a_i v_i(x)`.
pub fn reconstruct(a: &[f64], x: f64, domain: &IntervalDomain) -> Result<f64> {
    domain.check_point(x)?;
    Ok(reconstruct_unchecked(a, x, domain.length))
}

pub(crate) fn reconstruct_unchecked(a: &[f64], x: f64, length: f64) -> f64 {
    a.iter()
        .enumerate()
        .map(|(i, &ai)| ai * mode_unchecked(i + 1, length).1.value(x))
        .sum()
}

/// The retained modes tabulated at the nodes of a quadrature rule.
///
/// Row `i` holds `v_{i+1}` at every node; weighted inner products against
/// these rows implement the Galerkin projections.
#[derive(Debug, Clone)]
pub struct BasisTable {
    values: Vec<Vec<f64>>,
    weighted: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl BasisTable {
    pub fn new(domain: &IntervalDomain, quadrature: &Quadrature) -> Result<Self> {
        quadrature.ensure_resolves(domain.modes)?;
        let mut values = Vec::with_capacity(domain.modes);
        let mut weighted = Vec::with_capacity(domain.modes);
        for k in 1..=domain.modes {
            let (_, mode) = mode_unchecked(k, domain.length);
            let row: Vec<f64> = quadrature.nodes().iter().map(|&x| mode.value(x)).collect();
            weighted.push(
                row.iter()
                    .zip(quadrature.weights())
                    .map(|(v, w)| v * w)
                    .collect(),
            );
            values.push(row);
        }
        Ok(Self {
            values,
            weighted,
            eigenvalues: eigenvalues(domain),
        })
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `u` at every node.
    pub fn synthesize(&self, a: &[f64]) -> Vec<f64> {
        let nodes = self.values.first().map_or(0, Vec::len);
        let mut u = vec![0.0; nodes];
        for (ai, row) in a.iter().zip(&self.values) {
            for (uq, vq) in u.iter_mut().zip(row) {
                *uq += ai * vq;
            }
        }
        u
    }

    /// `integral of g v_i` for nodal samples `g`.
    pub fn analyze(&self, samples: &[f64]) -> SpectralCoeffs {
        self.weighted
            .iter()
            .map(|row| row.iter().zip(samples).map(|(w, g)| w * g).sum())
            .collect::<Vec<f64>>()
            .into()
    }

    /// `v_{i+1}` at every node.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub(crate) fn weighted_row(&self, i: usize) -> &[f64] {
        &self.weighted[i]
    }
}
