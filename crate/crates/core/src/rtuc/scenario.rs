use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::requirements::NetLoadProfile;

/// One realised 15-minute net-load trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u32,
    /// Base seed the trajectory was drawn from; `id` selects the stream.
    pub seed: u64,
    /// MW per quarter, never negative.
    pub values: Vec<f64>,
}

/// Draws `n` trajectories around the quarter forecast with independent
/// Gaussian errors of the quarter standard deviation.
///
/// Scenario `id` always uses ChaCha stream `id` of `seed`, so any subset can
/// be regenerated on its own and the draw order does not matter.
pub fn generate_scenarios(profile: &NetLoadProfile, n: usize, seed: u64) -> Vec<Scenario> {
    (0..n as u32).map(|id| scenario(profile, id, seed)).collect()
}

pub fn scenario(profile: &NetLoadProfile, id: u32, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(id));
    let values = profile
        .quarterly()
        .iter()
        .zip(profile.sigma_quarterly())
        .map(|(&mean, &sigma)| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (mean + sigma * e).max(0.0)
        })
        .collect();
    Scenario { id, seed, values }
}

/// Scenario whose realisation equals the quarter forecast.
pub fn forecast_scenario(profile: &NetLoadProfile) -> Scenario {
    Scenario {
        id: 0,
        seed: 0,
        values: profile.quarterly().to_vec(),
    }
}
