//! Hourly and intra-hour flexible ramping requirements.
//!
//! Requirements are plain data computed from forecasts and error statistics
//! before any model is built.

use serde::{Deserialize, Serialize};

use crate::error::InputError;

/// Quarter-hours per hour.
pub const QUARTERS: usize = 4;

/// Two-sided z-score for a 95% confidence level.
pub const Z_95: f64 = 1.96;

/// Net-load forecasts and forecast-error standard deviations.
///
/// Quarter `q` of hour `t` (both 0-based) lives at index `4 * t + q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLoadProfile {
    hourly: Vec<f64>,
    quarterly: Vec<f64>,
    sigma_hourly: Vec<f64>,
    sigma_quarterly: Vec<f64>,
    z: f64,
}

impl NetLoadProfile {
    pub fn new(
        hourly: Vec<f64>,
        quarterly: Vec<f64>,
        sigma_hourly: Vec<f64>,
        sigma_quarterly: Vec<f64>,
        z: f64,
    ) -> Result<Self, InputError> {
        let hours = hourly.len();
        if hours == 0 {
            return Err(InputError::invalid("profile", "no hourly forecasts"));
        }
        if quarterly.len() != QUARTERS * hours {
            return Err(InputError::invalid(
                "profile",
                format!(
                    "expected {} quarter forecasts for {hours} hours, got {}",
                    QUARTERS * hours,
                    quarterly.len()
                ),
            ));
        }
        if sigma_hourly.len() != hours || sigma_quarterly.len() != quarterly.len() {
            return Err(InputError::invalid("profile", "sigma series length mismatch"));
        }
        if !(z.is_finite() && z > 0.0) {
            return Err(InputError::invalid("profile", format!("z must be positive, got {z}")));
        }
        let series = [
            ("hourly forecast", &hourly),
            ("quarter forecast", &quarterly),
            ("hourly sigma", &sigma_hourly),
            ("quarter sigma", &sigma_quarterly),
        ];
        for (what, values) in series {
            if let Some((i, v)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
            {
                return Err(InputError::invalid(
                    "profile",
                    format!("{what} at index {} must be non-negative, got {v}", i + 1),
                ));
            }
        }
        Ok(Self {
            hourly,
            quarterly,
            sigma_hourly,
            sigma_quarterly,
            z,
        })
    }

    /// Quarter-hour error std is half the hourly std of the containing hour.
    pub fn with_hourly_sigma(
        hourly: Vec<f64>,
        quarterly: Vec<f64>,
        sigma_hourly: Vec<f64>,
        z: f64,
    ) -> Result<Self, InputError> {
        let sigma_quarterly = quarter_sigma_from_hourly(&sigma_hourly);
        Self::new(hourly, quarterly, sigma_hourly, sigma_quarterly, z)
    }

    /// Hourly std as a fraction of the hourly forecast.
    pub fn with_sigma_fraction(
        hourly: Vec<f64>,
        quarterly: Vec<f64>,
        fraction: f64,
        z: f64,
    ) -> Result<Self, InputError> {
        if !(fraction.is_finite() && fraction >= 0.0) {
            return Err(InputError::invalid("profile", "sigma fraction must be non-negative"));
        }
        let sigma_hourly = hourly.iter().map(|v| v * fraction).collect();
        Self::with_hourly_sigma(hourly, quarterly, sigma_hourly, z)
    }

    /// Same forecasts and z, different hourly std fraction.
    pub fn rescaled_sigma(&self, fraction: f64) -> Result<Self, InputError> {
        Self::with_sigma_fraction(self.hourly.clone(), self.quarterly.clone(), fraction, self.z)
    }

    pub fn with_z(&self, z: f64) -> Result<Self, InputError> {
        Self::new(
            self.hourly.clone(),
            self.quarterly.clone(),
            self.sigma_hourly.clone(),
            self.sigma_quarterly.clone(),
            z,
        )
    }

    pub fn hours(&self) -> usize {
        self.hourly.len()
    }

    pub fn hourly(&self) -> &[f64] {
        &self.hourly
    }

    pub fn quarterly(&self) -> &[f64] {
        &self.quarterly
    }

    pub fn sigma_hourly(&self) -> &[f64] {
        &self.sigma_hourly
    }

    pub fn sigma_quarterly(&self) -> &[f64] {
        &self.sigma_quarterly
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

pub fn quarter_sigma_from_hourly(sigma_hourly: &[f64]) -> Vec<f64> {
    sigma_hourly
        .iter()
        .flat_map(|s| std::iter::repeat_n(s / 2.0, QUARTERS))
        .collect()
}

/// Confidence envelopes around the hourly and quarter forecasts.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub hourly_max: Vec<f64>,
    pub hourly_min: Vec<f64>,
    pub quarter_max: Vec<f64>,
    pub quarter_min: Vec<f64>,
}

/// Forecast ± z·σ at both resolutions.
pub fn envelopes(profile: &NetLoadProfile) -> Envelopes {
    let z = profile.z;
    let band = |values: &[f64], sigma: &[f64], sign: f64| -> Vec<f64> {
        values
            .iter()
            .zip(sigma)
            .map(|(v, s)| v + sign * z * s)
            .collect()
    };
    Envelopes {
        hourly_max: band(&profile.hourly, &profile.sigma_hourly, 1.0),
        hourly_min: band(&profile.hourly, &profile.sigma_hourly, -1.0),
        quarter_max: band(&profile.quarterly, &profile.sigma_quarterly, 1.0),
        quarter_min: band(&profile.quarterly, &profile.sigma_quarterly, -1.0),
    }
}

/// What to do with the last hour, which has no following hour to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalRule {
    /// Final-hour requirements are zero.
    #[default]
    Zero,
    /// Final-hour requirements repeat the previous hour's (previous quarter's
    /// for the last quarter).
    RepeatLast,
}

/// FRup_t = max(NL^max_{t+1} − NL_t, 0).
pub fn hourly_up_requirement(profile: &NetLoadProfile, rule: TerminalRule) -> Vec<f64> {
    let env = envelopes(profile);
    let mut out: Vec<f64> = (0..profile.hours())
        .map(|t| match env.hourly_max.get(t + 1) {
            Some(next_max) => (next_max - profile.hourly[t]).max(0.0),
            None => 0.0,
        })
        .collect();
    apply_terminal(&mut out, rule);
    out
}

/// FRdown_t = max(NL_t − NL^min_{t+1}, 0).
pub fn hourly_down_requirement(profile: &NetLoadProfile, rule: TerminalRule) -> Vec<f64> {
    let env = envelopes(profile);
    let mut out: Vec<f64> = (0..profile.hours())
        .map(|t| match env.hourly_min.get(t + 1) {
            Some(next_min) => (profile.hourly[t] - next_min).max(0.0),
            None => 0.0,
        })
        .collect();
    apply_terminal(&mut out, rule);
    out
}

fn apply_terminal(values: &mut [f64], rule: TerminalRule) {
    if rule == TerminalRule::RepeatLast && values.len() >= 2 {
        let n = values.len();
        values[n - 1] = values[n - 2];
    }
}

/// Per-quarter upward requirement: next quarter's upper envelope minus this
/// quarter's forecast, clamped at zero. Quarter 45 looks into the next hour.
pub fn intra_hour_up_requirements(profile: &NetLoadProfile, rule: TerminalRule) -> Vec<[f64; QUARTERS]> {
    let env = envelopes(profile);
    quarter_requirements(profile, rule, |i, next| {
        (env.quarter_max[next] - profile.quarterly[i]).max(0.0)
    })
}

/// Downward mirror of [`intra_hour_up_requirements`].
pub fn intra_hour_down_requirements(profile: &NetLoadProfile, rule: TerminalRule) -> Vec<[f64; QUARTERS]> {
    let env = envelopes(profile);
    quarter_requirements(profile, rule, |i, next| {
        (profile.quarterly[i] - env.quarter_min[next]).max(0.0)
    })
}

fn quarter_requirements(
    profile: &NetLoadProfile,
    rule: TerminalRule,
    step: impl Fn(usize, usize) -> f64,
) -> Vec<[f64; QUARTERS]> {
    let n = profile.quarterly.len();
    (0..profile.hours())
        .map(|t| {
            let mut row = [0.0; QUARTERS];
            for (q, slot) in row.iter_mut().enumerate() {
                let i = QUARTERS * t + q;
                *slot = if i + 1 < n {
                    step(i, i + 1)
                } else {
                    match rule {
                        TerminalRule::Zero => 0.0,
                        TerminalRule::RepeatLast if q > 0 => step(i - 1, i),
                        TerminalRule::RepeatLast => 0.0,
                    }
                };
            }
            row
        })
        .collect()
}

/// Right-hand side of the aggregated intra-hour coverage: the largest quarter
/// requirement of each hour.
pub fn intra_hour_rhs(quarters: &[[f64; QUARTERS]]) -> Vec<f64> {
    quarters
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .collect()
}

/// All ramp requirements for one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampRequirements {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub up_quarters: Vec<[f64; QUARTERS]>,
    pub down_quarters: Vec<[f64; QUARTERS]>,
    pub up_intra_rhs: Vec<f64>,
    pub down_intra_rhs: Vec<f64>,
}

impl RampRequirements {
    pub fn compute(profile: &NetLoadProfile, rule: TerminalRule) -> Self {
        let up_quarters = intra_hour_up_requirements(profile, rule);
        let down_quarters = intra_hour_down_requirements(profile, rule);
        Self {
            up: hourly_up_requirement(profile, rule),
            down: hourly_down_requirement(profile, rule),
            up_intra_rhs: intra_hour_rhs(&up_quarters),
            down_intra_rhs: intra_hour_rhs(&down_quarters),
            up_quarters,
            down_quarters,
        }
    }

    /// Requirements with every value zero (useful for tests and mode = none).
    pub fn zeros(hours: usize) -> Self {
        Self {
            up: vec![0.0; hours],
            down: vec![0.0; hours],
            up_quarters: vec![[0.0; QUARTERS]; hours],
            down_quarters: vec![[0.0; QUARTERS]; hours],
            up_intra_rhs: vec![0.0; hours],
            down_intra_rhs: vec![0.0; hours],
        }
    }

    pub fn hours(&self) -> usize {
        self.up.len()
    }
}
