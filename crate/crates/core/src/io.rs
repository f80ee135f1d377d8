//! Net-load profile and scenario files.
//!
//! Profile CSV, one row per forecast value:
//!
//! ```text
//! resolution,index,forecast_mw,sigma_mw
//! hour,1,3950.0,
//! quarter,1,3930.5,
//! ```
//!
//! `resolution` is `hour` or `quarter` and `index` is 1-based. `sigma_mw`
//! may be given on hourly rows (quarter sigmas are then derived); when it is
//! empty on every row the hourly sigma is a fraction of the forecast.
//!
//! Scenario CSV: `scenario,seed,q1,...,q96`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::InputError;
use crate::requirements::{NetLoadProfile, QUARTERS};
use crate::rtuc::Scenario;

pub const PROFILE_HEADER: [&str; 4] = ["resolution", "index", "forecast_mw", "sigma_mw"];

#[derive(Debug, Deserialize)]
struct ProfileRow {
    resolution: String,
    index: usize,
    forecast_mw: f64,
    sigma_mw: Option<f64>,
}

fn parse_error(path: &Path, message: impl ToString) -> InputError {
    InputError::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn read_to_string(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a profile file. `sigma_fraction` applies when the file has no sigma
/// column values.
pub fn load_profile(path: impl AsRef<Path>, z: f64, sigma_fraction: f64) -> Result<NetLoadProfile, InputError> {
    let path = path.as_ref();
    parse_profile(&read_to_string(path)?, z, sigma_fraction).map_err(|e| match e {
        InputError::Parse { message, .. } => parse_error(path, message),
        other => other,
    })
}

pub fn parse_profile(text: &str, z: f64, sigma_fraction: f64) -> Result<NetLoadProfile, InputError> {
    let here = Path::new("<profile>");
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_error(here, e))?.clone();
    if header.iter().ne(PROFILE_HEADER) {
        return Err(parse_error(
            here,
            format!("expected header {}, got {}", PROFILE_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut hourly: Vec<Option<(f64, Option<f64>)>> = Vec::new();
    let mut quarterly: Vec<Option<f64>> = Vec::new();
    for (line, row) in reader.deserialize::<ProfileRow>().enumerate() {
        let row = row.map_err(|e| parse_error(here, e))?;
        let (slots, what) = match row.resolution.as_str() {
            "hour" => (hourly.len(), "hour"),
            "quarter" => (quarterly.len(), "quarter"),
            other => return Err(parse_error(here, format!("row {}: unknown resolution '{other}'", line + 2))),
        };
        if row.index == 0 {
            return Err(parse_error(here, format!("row {}: indices are 1-based", line + 2)));
        }
        let i = row.index - 1;
        let duplicate = if what == "hour" {
            if i >= slots {
                hourly.resize(i + 1, None);
            }
            hourly[i].replace((row.forecast_mw, row.sigma_mw)).is_some()
        } else {
            if i >= slots {
                quarterly.resize(i + 1, None);
            }
            quarterly[i].replace(row.forecast_mw).is_some()
        };
        if duplicate {
            return Err(parse_error(here, format!("row {}: duplicate {what} {}", line + 2, row.index)));
        }
    }
    let missing = |what: &str, i: usize| parse_error(here, format!("missing {what} {}", i + 1));
    let hourly = hourly
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| missing("hour", i)))
        .collect::<Result<Vec<_>, _>>()?;
    let quarterly = quarterly
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| missing("quarter", i)))
        .collect::<Result<Vec<_>, _>>()?;
    let forecast: Vec<f64> = hourly.iter().map(|h| h.0).collect();
    let sigmas: Vec<Option<f64>> = hourly.iter().map(|h| h.1).collect();
    if sigmas.iter().all(Option::is_none) {
        NetLoadProfile::with_sigma_fraction(forecast, quarterly, sigma_fraction, z)
    } else if let Some(i) = sigmas.iter().position(Option::is_none) {
        Err(parse_error(here, format!("hour {} has no sigma_mw while others do", i + 1)))
    } else {
        NetLoadProfile::with_hourly_sigma(forecast, quarterly, sigmas.into_iter().flatten().collect(), z)
    }
}

/// Writes `profile` in the profile CSV format, hourly sigmas included.
pub fn write_profile(profile: &NetLoadProfile, out: impl std::io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for (t, (f, s)) in profile.hourly().iter().zip(profile.sigma_hourly()).enumerate() {
        w.write_record(["hour".to_string(), (t + 1).to_string(), f.to_string(), s.to_string()])?;
    }
    for (q, f) in profile.quarterly().iter().enumerate() {
        w.write_record(["quarter".to_string(), (q + 1).to_string(), f.to_string(), String::new()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scenarios(scenarios: &[Scenario], out: impl std::io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let quarters = scenarios.first().map_or(QUARTERS * 24, |s| s.values.len());
    let mut header = vec!["scenario".to_string(), "seed".to_string()];
    header.extend((1..=quarters).map(|q| format!("q{q}")));
    w.write_record(&header)?;
    for s in scenarios {
        let mut record = vec![s.id.to_string(), s.seed.to_string()];
        record.extend(s.values.iter().map(f64::to_string));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>, InputError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let width = reader.headers().map_err(|e| parse_error(path, e))?.len();
    if width < 3 {
        return Err(parse_error(path, "expected scenario,seed,q1,..."));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let id = field(0).parse().map_err(|e| parse_error(path, format!("scenario id: {e}")))?;
        let seed = field(1).parse().map_err(|e| parse_error(path, format!("seed: {e}")))?;
        let values = (2..record.len())
            .map(|i| field(i).parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_error(path, format!("scenario {id}: {e}")))?;
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(InputError::invalid(format!("scenario {id}"), "values must be finite and non-negative"));
        }
        out.push(Scenario { id, seed, values });
    }
    Ok(out)
}
