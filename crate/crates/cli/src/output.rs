//! CSV serialization of trajectories and hysteresis runs.

use std::fs;
use std::path::Path;

use viscodiff_core::{HysteresisSample, Trajectory};

use crate::error::CliError;

const SIG_DIGITS: i32 = 17;

/// C's `%.17g`: seventeen significant digits, trailing zeros removed.
/// Every finite double survives a round trip through this text.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS).contains(&exp) {
        let decimals = (SIG_DIGITS - 1 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Header of the trajectory CSV for `n` modes.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_owned()];
    h.extend((1..=n).map(|i| format!("a_{i}")));
    h.extend((1..=n).map(|i| format!("b_{i}")));
    h.extend(
        [
            "mass",
            "free_energy",
            "dissipation_rate",
            "boundary_power",
            "energy_residual",
        ]
        .map(String::from),
    );
    h
}

pub fn write_trajectory(
    path: &Path,
    modes: usize,
    trajectory: &Trajectory,
) -> Result<(), CliError> {
    let rows = trajectory.samples.iter().map(|s| {
        let d = &s.diagnostics;
        std::iter::once(s.t)
            .chain(s.a.iter().copied())
            .chain(s.b.iter().copied())
            .chain([
                d.mass,
                d.free_energy,
                d.dissipation_rate,
                d.boundary_power,
                d.energy_residual,
            ])
            .map(fmt_g17)
            .collect::<Vec<_>>()
    });
    write_csv(path, &trajectory_header(modes), rows)
}

pub fn write_timeseries(path: &Path, samples: &[HysteresisSample]) -> Result<(), CliError> {
    let rows = samples
        .iter()
        .map(|p| vec![fmt_g17(p.s), fmt_g17(p.w), fmt_g17(p.y)]);
    write_csv(path, &["s", "w", "y"].map(String::from), rows)
}

pub fn write_loop(path: &Path, points: &[(f64, f64)]) -> Result<(), CliError> {
    let rows = points.iter().map(|&(w, y)| vec![fmt_g17(w), fmt_g17(y)]);
    write_csv(path, &["w", "y"].map(String::from), rows)
}

pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| CliError::io(path, e);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1e-4), "0.0001");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = fmt_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
