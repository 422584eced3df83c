//! Line-oriented `key = value` experiment files.
//!
//! ```text
//! # comments run to the end of the line
//! [simulate]
//! modes = 16
//! alpha = 1
//! beta = 0.1
//! final_time = 1
//! model = double_well
//! kappa = 1
//! initial = cosine 0:0.5 1:0.2
//! ```
//!
//! A file holds exactly one section, `[simulate]` or `[hysteresis]`.

use std::collections::BTreeMap;

use viscodiff_core::basis::{MIN_DEFAULT_NODES, NODES_PER_MODE};
use viscodiff_core::{
    EnergyKind, FluxProfile, HysteresisConfig, InitialDatum, Scheme, SimulationConfig,
};

use crate::error::ConfigError;

/// A parsed experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    Simulate(SimulationConfig),
    Hysteresis(HysteresisConfig),
}

impl ExperimentConfig {
    pub fn section(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::Hysteresis(_) => "hysteresis",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let res = match self {
            Self::Simulate(c) => c.validate(),
            Self::Hysteresis(c) => c.validate(),
        };
        res.map_err(|e| ConfigError::new(None, None, e.to_string()))
    }
}

const SIMULATE_KEYS: &[&str] = &[
    "length",
    "modes",
    "quadrature_nodes",
    "alpha",
    "beta",
    "final_time",
    "dt",
    "output_every",
    "scheme",
    "newton_tol",
    "model",
    "kappa",
    "stiffness",
    "k",
    "chi",
    "epsilon",
    "flux_left",
    "flux_right",
    "initial",
];

const HYSTERESIS_KEYS: &[&str] = &[
    "amplitude",
    "threshold",
    "stiffness",
    "beta",
    "tau",
    "periods",
    "steps_per_period",
];

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Table {
    entries: BTreeMap<String, Entry>,
    section_line: usize,
}

impl Table {
    fn raw(&mut self, key: &str) -> Option<(usize, &str)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.as_str())
        })
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::new(Some(self.section_line), Some(key), "missing required key")
    }

    fn parse<T: std::str::FromStr>(
        &mut self,
        key: &str,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                ConfigError::new(Some(line), Some(key), format!("expected {what}, got `{v}`"))
            }),
        }
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse(key, "a number")
    }

    fn int(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parse(key, "a non-negative integer")
    }

    fn req_float(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.float(key)?.ok_or_else(|| self.missing(key))
    }

    fn req_int(&mut self, key: &str) -> Result<usize, ConfigError> {
        self.int(key)?.ok_or_else(|| self.missing(key))
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn reject_unused(&self) -> Result<(), ConfigError> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((k, e)) => Err(ConfigError::new(
                Some(e.line),
                Some(k),
                "key not used by this configuration",
            )),
            None => Ok(()),
        }
    }
}

/// Parses and validates an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut section: Option<(String, usize)> = None;
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| {
                    ConfigError::new(
                        Some(line),
                        None,
                        format!("malformed section header `{body}`"),
                    )
                })?
                .trim();
            if section.is_some() {
                return Err(ConfigError::new(
                    Some(line),
                    None,
                    "only one section per file",
                ));
            }
            if name != "simulate" && name != "hysteresis" {
                return Err(ConfigError::new(
                    Some(line),
                    None,
                    format!("unknown section `[{name}]`, expected [simulate] or [hysteresis]"),
                ));
            }
            section = Some((name.to_owned(), line));
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::new(
                Some(line),
                None,
                format!("expected `key = value`, got `{body}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        let Some((name, _)) = &section else {
            return Err(ConfigError::new(
                Some(line),
                Some(key),
                "key appears before any section header",
            ));
        };
        let known = if name == "simulate" {
            SIMULATE_KEYS
        } else {
            HYSTERESIS_KEYS
        };
        if !known.contains(&key) {
            return Err(ConfigError::new(
                Some(line),
                Some(key),
                format!("unknown key in [{name}]"),
            ));
        }
        if value.is_empty() {
            return Err(ConfigError::new(Some(line), Some(key), "empty value"));
        }
        if let Some(prev) = entries.insert(
            key.to_owned(),
            Entry {
                line,
                value: value.to_owned(),
                used: false,
            },
        ) {
            return Err(ConfigError::new(
                Some(line),
                Some(key),
                format!("duplicate key (first given on line {})", prev.line),
            ));
        }
    }
    let Some((name, section_line)) = section else {
        return Err(ConfigError::new(
            None,
            None,
            "no [simulate] or [hysteresis] section",
        ));
    };
    let mut table = Table {
        entries,
        section_line,
    };
    let config = if name == "simulate" {
        ExperimentConfig::Simulate(parse_simulate(&mut table)?)
    } else {
        ExperimentConfig::Hysteresis(parse_hysteresis(&mut table)?)
    };
    table.reject_unused()?;
    config.validate()?;
    Ok(config)
}

fn parse_simulate(t: &mut Table) -> Result<SimulationConfig, ConfigError> {
    let length = t.float("length")?.unwrap_or(1.0);
    let modes = t.req_int("modes")?;
    let alpha = t.req_float("alpha")?;
    let beta = t.req_float("beta")?;
    let final_time = t.req_float("final_time")?;
    let model = parse_model(t)?;
    let initial = match t.raw("initial") {
        Some((line, v)) => {
            parse_initial(v).map_err(|m| ConfigError::new(Some(line), Some("initial"), m))?
        }
        None => return Err(t.missing("initial")),
    };
    let mut c = SimulationConfig::new(length, modes, alpha, beta, final_time, model, initial);
    if let Some(m) = t.int("quadrature_nodes")? {
        c.quadrature_nodes = m;
    }
    if let Some(dt) = t.float("dt")? {
        c.dt = dt;
    }
    if let Some(k) = t.int("output_every")? {
        c.output_every = k;
    }
    if let Some(tol) = t.float("newton_tol")? {
        c.newton_tol = tol;
    }
    if let Some((line, v)) = t.raw("scheme") {
        c.scheme = match v {
            "rk4" => Scheme::Rk4,
            "implicit_euler" => Scheme::ImplicitEuler,
            _ => {
                return Err(ConfigError::new(
                    Some(line),
                    Some("scheme"),
                    format!("expected rk4 or implicit_euler, got `{v}`"),
                ))
            }
        };
    }
    for side in ["flux_left", "flux_right"] {
        if let Some((line, v)) = t.raw(side) {
            let p = parse_flux(v).map_err(|m| ConfigError::new(Some(line), Some(side), m))?;
            if side == "flux_left" {
                c.flux.left = p;
            } else {
                c.flux.right = p;
            }
        }
    }
    check(t, "alpha", c.alpha > 0.0, "must be strictly positive")?;
    check(t, "beta", c.beta > 0.0, "must be strictly positive")?;
    check(t, "modes", c.modes >= 1, "must be at least 1")?;
    check(
        t,
        "quadrature_nodes",
        c.quadrature_nodes >= NODES_PER_MODE * c.modes,
        "must be at least 4 * modes",
    )?;
    check(t, "final_time", c.final_time > 0.0, "must be positive")?;
    check(
        t,
        "dt",
        c.dt > 0.0 && c.dt <= c.final_time,
        "must lie in (0, final_time]",
    )?;
    check(
        t,
        "length",
        c.length > 0.0 && c.length.is_finite(),
        "must be positive",
    )?;
    check(t, "output_every", c.output_every >= 1, "must be at least 1")?;
    Ok(c)
}

fn check(t: &Table, key: &str, ok: bool, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(
            t.line_of(key).or(Some(t.section_line)),
            Some(key),
            message,
        ))
    }
}

fn parse_model(t: &mut Table) -> Result<EnergyKind, ConfigError> {
    let (line, name) = t
        .raw("model")
        .map(|(l, v)| (l, v.to_owned()))
        .ok_or_else(|| t.missing("model"))?;
    let kind = match name.as_str() {
        "double_well" => EnergyKind::DoubleWell {
            kappa: t.req_float("kappa")?,
        },
        "quadratic" => EnergyKind::Quadratic {
            stiffness: t.req_float("stiffness")?,
        },
        "regular_solution" => EnergyKind::RegularSolution {
            k: t.req_float("k")?,
            chi: t.req_float("chi")?,
        },
        "regularized_log" => EnergyKind::RegularizedLog {
            k: t.req_float("k")?,
            chi: t.req_float("chi")?,
            epsilon: t.req_float("epsilon")?,
        },
        other => {
            return Err(ConfigError::new(
                Some(line),
                Some("model"),
                format!(
                    "unknown model `{other}`, expected double_well, quadratic, regular_solution or regularized_log"
                ),
            ))
        }
    };
    viscodiff_core::FreeEnergyModel::new(kind)
        .map_err(|e| ConfigError::new(Some(line), Some("model"), e.to_string()))?;
    Ok(kind)
}

fn parse_flux(v: &str) -> Result<FluxProfile, String> {
    let words: Vec<&str> = v.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("expected a number, got `{s}`"))
    };
    match words.as_slice() {
        ["zero"] => Ok(FluxProfile::Zero),
        ["constant", c] => Ok(FluxProfile::Constant(num(c)?)),
        ["zigzag", a, p] => Ok(FluxProfile::Zigzag {
            amplitude: num(a)?,
            period: num(p)?,
        }),
        _ => Err(format!(
            "expected `zero`, `constant <c>` or `zigzag <amplitude> <period>`, got `{v}`"
        )),
    }
}

fn parse_initial(v: &str) -> Result<InitialDatum, String> {
    let (head, rest) = v.split_once(char::is_whitespace).unwrap_or((v, ""));
    let rest = rest.trim();
    match head {
        "constant" => rest
            .parse()
            .map(InitialDatum::Constant)
            .map_err(|_| format!("expected a number, got `{rest}`")),
        "cosine" => {
            let terms = rest
                .split_whitespace()
                .map(|term| {
                    let (j, c) = term
                        .split_once(':')
                        .ok_or_else(|| format!("expected `j:c`, got `{term}`"))?;
                    let j = j
                        .parse()
                        .map_err(|_| format!("bad wavenumber in `{term}`"))?;
                    let c = c
                        .parse()
                        .map_err(|_| format!("bad coefficient in `{term}`"))?;
                    Ok((j, c))
                })
                .collect::<Result<Vec<_>, String>>()?;
            if terms.is_empty() {
                return Err("cosine datum needs at least one `j:c` term".into());
            }
            Ok(InitialDatum::Cosine(terms))
        }
        "expr" if !rest.is_empty() => Ok(InitialDatum::Expression(rest.to_owned())),
        _ => Err(format!(
            "expected `constant <c>`, `cosine j:c ...` or `expr <expression in x>`, got `{v}`"
        )),
    }
}

fn parse_hysteresis(t: &mut Table) -> Result<HysteresisConfig, ConfigError> {
    let mut c = HysteresisConfig::quasi_static(
        t.req_float("amplitude")?,
        t.req_float("threshold")?,
        t.req_float("stiffness")?,
    );
    if let Some(beta) = t.float("beta")? {
        c.beta = beta;
    }
    c.tau = t.float("tau")?;
    if let Some(p) = t.int("periods")? {
        c.periods = p;
    }
    if let Some(n) = t.int("steps_per_period")? {
        c.steps_per_period = n;
    }
    for (key, v) in [
        ("amplitude", c.amplitude),
        ("threshold", c.threshold),
        ("stiffness", c.stiffness),
        ("beta", c.beta),
        ("tau", c.tau.unwrap_or(1.0)),
    ] {
        check(
            t,
            key,
            v > 0.0 && v.is_finite(),
            "must be strictly positive",
        )?;
    }
    check(t, "periods", c.periods >= 1, "must be at least 1")?;
    check(
        t,
        "steps_per_period",
        c.steps_per_period >= 16,
        "must be at least 16",
    )?;
    Ok(c)
}

/// Default quadrature size for `modes`.
pub fn default_nodes(modes: usize) -> usize {
    (NODES_PER_MODE * modes).max(MIN_DEFAULT_NODES)
}

/// Writes a config that [`parse_config`] reads back to the same value.
pub fn serialize_config(config: &ExperimentConfig) -> String {
    let mut out = format!("[{}]\n", config.section());
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    match config {
        ExperimentConfig::Simulate(c) => {
            kv("length", num(c.length));
            kv("modes", c.modes.to_string());
            kv("quadrature_nodes", c.quadrature_nodes.to_string());
            kv("alpha", num(c.alpha));
            kv("beta", num(c.beta));
            kv("final_time", num(c.final_time));
            kv("dt", num(c.dt));
            kv("output_every", c.output_every.to_string());
            kv("scheme", c.scheme.name().to_owned());
            kv("newton_tol", num(c.newton_tol));
            kv("model", c.model.name().to_owned());
            match c.model {
                EnergyKind::DoubleWell { kappa } => kv("kappa", num(kappa)),
                EnergyKind::Quadratic { stiffness } => kv("stiffness", num(stiffness)),
                EnergyKind::RegularSolution { k, chi } => {
                    kv("k", num(k));
                    kv("chi", num(chi));
                }
                EnergyKind::RegularizedLog { k, chi, epsilon } => {
                    kv("k", num(k));
                    kv("chi", num(chi));
                    kv("epsilon", num(epsilon));
                }
            }
            kv("flux_left", flux(&c.flux.left));
            kv("flux_right", flux(&c.flux.right));
            kv("initial", initial(&c.initial));
        }
        ExperimentConfig::Hysteresis(c) => {
            kv("amplitude", num(c.amplitude));
            kv("threshold", num(c.threshold));
            kv("stiffness", num(c.stiffness));
            kv("beta", num(c.beta));
            if let Some(tau) = c.tau {
                kv("tau", num(tau));
            }
            kv("periods", c.periods.to_string());
            kv("steps_per_period", c.steps_per_period.to_string());
        }
    }
    out
}

// `{:?}` is the shortest representation that parses back to the same bits.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn flux(p: &FluxProfile) -> String {
    match *p {
        FluxProfile::Zero => "zero".into(),
        FluxProfile::Constant(c) => format!("constant {}", num(c)),
        FluxProfile::Zigzag { amplitude, period } => {
            format!("zigzag {} {}", num(amplitude), num(period))
        }
    }
}

fn initial(d: &InitialDatum) -> String {
    match d {
        InitialDatum::Constant(c) => format!("constant {}", num(*c)),
        InitialDatum::Cosine(terms) => {
            let body: Vec<String> = terms
                .iter()
                .map(|(j, c)| format!("{j}:{}", num(*c)))
                .collect();
            format!("cosine {}", body.join(" "))
        }
        InitialDatum::Expression(e) => format!("expr {e}"),
    }
}
