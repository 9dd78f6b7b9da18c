//! Finite-population Monte-Carlo oracle for the analytic engine.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dist::{stationary_general, ReputationDistribution};
use crate::error::{Error, Result};
use crate::norm::SocialNorm;
use crate::params::CommunityParams;
use crate::payoff::{period_payoffs, transition_matrix};

/// Generator pinned for reproducibility; seeds map to byte-identical runs
/// within this implementation.
pub const RNG_ALGORITHM: &str = "ChaCha12";

/// Largest discounted tail allowed when truncating value rollouts.
pub const VALUE_TRUNCATION: f64 = 1e-6;

/// Finite-population run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub population: usize,
    /// Total periods simulated, including the burn-in.
    pub horizon: usize,
    /// Leading periods excluded from measurement.
    pub burn_in: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::OutOfRange {
                field: "population",
                message: "needs at least two agents".to_string(),
            });
        }
        if self.horizon <= self.burn_in {
            return Err(Error::OutOfRange {
                field: "horizon",
                message: format!("must exceed the burn-in of {}", self.burn_in),
            });
        }
        Ok(())
    }
}

/// Uniformly random pairing with no self-matches: entry `client` names the
/// server assigned to that client, and every agent serves exactly once.
/// Sampled by rejection, which keeps the law uniform over derangements.
pub fn match_agents<R: Rng + ?Sized>(population: usize, rng: &mut R) -> Vec<usize> {
    let mut servers: Vec<usize> = (0..population).collect();
    loop {
        servers.shuffle(rng);
        if servers.iter().enumerate().all(|(client, &s)| client != s) {
            return servers;
        }
    }
}

/// Population-level measurements, time-averaged after the burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRun {
    pub empirical_distribution: ReputationDistribution,
    /// Average payoff per agent and period.
    pub empirical_welfare: f64,
    pub welfare_std_error: f64,
    pub periods_measured: usize,
}

/// Simulates the per-period event sequence: matching, service per the
/// prescribed strategy, noisy reports, reputation updates, then turnover.
pub fn simulate_population(
    norm: &SocialNorm,
    params: &CommunityParams,
    config: &SimulationConfig,
) -> Result<PopulationRun> {
    config.validate()?;
    let scheme = &norm.scheme;
    let strategy = &norm.strategy;
    let n = config.population;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut reputation = vec![scheme.entry_reputation(); n];
    let mut counts = vec![0u64; scheme.reputation_count()];
    let mut welfare_samples = Vec::with_capacity(config.horizon - config.burn_in);

    for period in 0..config.horizon {
        let measured = period >= config.burn_in;
        if measured {
            for &rep in &reputation {
                counts[rep] += 1;
            }
        }

        let servers = match_agents(n, &mut rng);
        let mut next_reputation = reputation.clone();
        let mut total_payoff = 0.0;
        for client in 0..n {
            let server = servers[client];
            let fulfilled = strategy.fulfills(reputation[server], reputation[client]);
            if fulfilled {
                total_payoff += params.benefit - params.cost;
            }
            // the report, not the service, is what the error corrupts
            let flipped = rng.random_bool(params.report_error);
            next_reputation[server] = if flipped {
                scheme.punished(reputation[server])
            } else {
                scheme.promoted(reputation[server])
            };
        }
        for rep in next_reputation.iter_mut() {
            if rng.random_bool(params.turnover) {
                *rep = scheme.entry_reputation();
            }
        }
        reputation = next_reputation;

        if measured {
            welfare_samples.push(total_payoff / n as f64);
        }
    }

    let measured = welfare_samples.len();
    let mean = welfare_samples.iter().sum::<f64>() / measured as f64;
    let variance = welfare_samples
        .iter()
        .map(|w| (w - mean) * (w - mean))
        .sum::<f64>()
        / (measured as f64 * (measured as f64 - 1.0).max(1.0));
    let total_counts: u64 = counts.iter().sum();
    let empirical_distribution = ReputationDistribution::new(
        counts
            .iter()
            .map(|&c| c as f64 / total_counts as f64)
            .collect(),
    )?;
    Ok(PopulationRun {
        empirical_distribution,
        empirical_welfare: mean,
        welfare_std_error: variance.sqrt(),
        periods_measured: measured,
    })
}

/// Monte-Carlo estimate of a discounted sum with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub rollouts: usize,
}

/// Smallest horizon whose discounted tail stays below `truncation`.
pub fn min_value_horizon(params: &CommunityParams, truncation: f64) -> usize {
    let delta = params.delta();
    let scale = (params.benefit + params.cost) / (1.0 - delta);
    let mut horizon = 1usize;
    let mut tail = delta * scale;
    while tail >= truncation && horizon < 100_000_000 {
        tail *= delta;
        horizon += 1;
    }
    horizon
}

/// Estimates the long-term value of one starting reputation by rolling the
/// single-agent reputation chain forward and accumulating discounted period
/// payoffs taken at the analytic stationary distribution.
pub fn simulate_value_function(
    norm: &SocialNorm,
    params: &CommunityParams,
    start_reputation: usize,
    rollouts: usize,
    horizon: usize,
    seed: u64,
) -> Result<ValueEstimate> {
    let scheme = &norm.scheme;
    if start_reputation > scheme.max_reputation() {
        return Err(Error::OutOfRange {
            field: "start_reputation",
            message: format!("must lie in 0..={}", scheme.max_reputation()),
        });
    }
    if rollouts == 0 {
        return Err(Error::OutOfRange {
            field: "rollouts",
            message: "needs at least one rollout".to_string(),
        });
    }
    let delta = params.delta();
    let tail = delta.powi(horizon as i32) * (params.benefit + params.cost) / (1.0 - delta);
    if tail >= VALUE_TRUNCATION {
        return Err(Error::HorizonTooShort { horizon, tail });
    }

    let dist = stationary_general(params, scheme)?;
    let period = period_payoffs(norm, &dist, params);
    let transitions = transition_matrix(scheme, params);
    let up_prob = 1.0 - params.report_error;
    debug_assert!((transitions.probability(0, scheme.promoted(0)) - up_prob).abs() < 1e-15);

    let mut rng = ChaCha12Rng::seed_from_u64(
        seed ^ (start_reputation as u64).wrapping_mul(0x9E3779B97F4A7C15),
    );
    let mut sum = 0.0;
    let mut sum_squares = 0.0;
    for rollout in 0..rollouts {
        rng.set_stream(rollout as u64);
        let mut rep = start_reputation;
        let mut weight = 1.0;
        let mut value = 0.0;
        for _ in 0..horizon {
            value += weight * period[rep];
            rep = if rng.random_bool(up_prob) {
                scheme.promoted(rep)
            } else {
                scheme.punished(rep)
            };
            weight *= delta;
        }
        sum += value;
        sum_squares += value * value;
    }
    let mean = sum / rollouts as f64;
    let variance =
        (sum_squares / rollouts as f64 - mean * mean).max(0.0) / (rollouts as f64 - 1.0).max(1.0);
    Ok(ValueEstimate {
        mean,
        std_error: variance.sqrt(),
        rollouts,
    })
}

/// Population statistics plus per-reputation value estimates, with the RNG
/// algorithm pinned for the report header.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub empirical_distribution: ReputationDistribution,
    pub empirical_welfare: f64,
    pub welfare_std_error: f64,
    pub periods_measured: usize,
    pub value_estimates: Vec<ValueEstimate>,
    pub rng_algorithm: &'static str,
}

/// Runs the population simulation and one value-function estimate per
/// starting reputation.
pub fn simulate_report(
    norm: &SocialNorm,
    params: &CommunityParams,
    config: &SimulationConfig,
    rollouts: usize,
) -> Result<SimulationReport> {
    let run = simulate_population(norm, params, config)?;
    let horizon = min_value_horizon(params, VALUE_TRUNCATION);
    let value_estimates = (0..norm.scheme.reputation_count())
        .map(|rep| simulate_value_function(norm, params, rep, rollouts, horizon, config.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        empirical_distribution: run.empirical_distribution,
        empirical_welfare: run.empirical_welfare,
        welfare_std_error: run.welfare_std_error,
        periods_measured: run.periods_measured,
        value_estimates,
        rng_algorithm: RNG_ALGORITHM,
    })
}
