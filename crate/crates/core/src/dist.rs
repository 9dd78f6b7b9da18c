//! Reputation distributions: one-period dynamics and stationary solutions.

use crate::error::{Error, Result};
use crate::norm::ReputationScheme;
use crate::params::CommunityParams;

/// Probability vector over reputations `0..=max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReputationDistribution {
    mass: Vec<f64>,
}

/// Allowed deviation of the total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Sup-norm change below which the fixed-point iteration stops.
pub const STATIONARY_TOLERANCE: f64 = 1e-13;

/// Iteration cap for the stationary fixed point.
pub const STATIONARY_MAX_ITERATIONS: usize = 1_000_000;

impl ReputationDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::OutOfRange {
                field: "distribution",
                message: "needs at least two reputation labels".to_string(),
            });
        }
        if mass.iter().any(|&m| !m.is_finite() || m < 0.0) {
            return Err(Error::OutOfRange {
                field: "distribution",
                message: "entries must be non-negative and finite".to_string(),
            });
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::OutOfRange {
                field: "distribution",
                message: format!("mass sums to {total}, expected 1"),
            });
        }
        Ok(Self { mass })
    }

    pub fn uniform(reputation_count: usize) -> Self {
        Self {
            mass: vec![1.0 / reputation_count as f64; reputation_count],
        }
    }

    /// Unit mass on a single reputation.
    pub fn point(reputation: usize, reputation_count: usize) -> Self {
        let mut mass = vec![0.0; reputation_count];
        mass[reputation] = 1.0;
        Self { mass }
    }

    pub fn reputation_count(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self, reputation: usize) -> f64 {
        self.mass[reputation]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    /// Cumulative mass at or below each reputation.
    pub fn cumulative(&self) -> Vec<f64> {
        self.mass
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// One-period push-forward of the reputation distribution: survivors move up
/// one step with probability `1 - report_error` and drop by the punishment
/// length otherwise; newcomers of mass `turnover` enter at the entry label.
pub fn evolve_distribution(
    dist: &ReputationDistribution,
    params: &CommunityParams,
    scheme: &ReputationScheme,
) -> ReputationDistribution {
    let next = evolve_raw(dist.as_slice(), params, scheme);
    // one step keeps the mass within tolerance; no renormalisation
    debug_assert!((next.iter().sum::<f64>() - 1.0).abs() < MASS_TOLERANCE);
    ReputationDistribution { mass: next }
}

fn evolve_raw(mass: &[f64], params: &CommunityParams, scheme: &ReputationScheme) -> Vec<f64> {
    let survive = 1.0 - params.turnover;
    let err = params.report_error;
    let mut next = vec![0.0; mass.len()];
    for (rep, &m) in mass.iter().enumerate() {
        let staying = survive * m;
        next[scheme.promoted(rep)] += staying * (1.0 - err);
        next[scheme.punished(rep)] += staying * err;
    }
    next[scheme.entry_reputation()] += params.turnover;
    next
}

/// Stationary distribution of the maximum-punishment scheme in closed form:
/// the mass below the top is a truncated geometric series and the top
/// absorbs the remainder.
pub fn stationary_closed_form(
    params: &CommunityParams,
    max_reputation: usize,
) -> ReputationDistribution {
    let survive = 1.0 - params.turnover;
    let err = params.report_error;
    let count = max_reputation + 1;
    let mut mass = vec![0.0; count];
    if params.turnover == 0.0 && err == 0.0 {
        mass[max_reputation] = 1.0;
        return ReputationDistribution { mass };
    }
    for (rep, slot) in mass.iter_mut().enumerate().take(max_reputation) {
        *slot = survive.powi(rep as i32 + 1) * (1.0 - err).powi(rep as i32) * err;
    }
    mass[max_reputation] =
        (survive.powi(max_reputation as i32 + 1) * (1.0 - err).powi(max_reputation as i32) * err
            + params.turnover)
            / (1.0 - survive * (1.0 - err));
    ReputationDistribution { mass }
}

/// Stationary distribution of an arbitrary scheme, found by iterating the
/// one-period dynamics from the uniform distribution until the sup-norm
/// change drops below [`STATIONARY_TOLERANCE`].
///
/// With no turnover and no report errors the fixed point need not be
/// unique for partial punishment; iterating from uniform selects the limit
/// of the dynamics, which is the one the rest of the crate relies on.
pub fn stationary_general(
    params: &CommunityParams,
    scheme: &ReputationScheme,
) -> Result<ReputationDistribution> {
    let mut mass = vec![1.0 / scheme.reputation_count() as f64; scheme.reputation_count()];
    for _ in 0..STATIONARY_MAX_ITERATIONS {
        let mut next = evolve_raw(&mass, params, scheme);
        let total: f64 = next.iter().sum();
        for m in &mut next {
            *m /= total;
        }
        let change = mass
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        mass = next;
        if change < STATIONARY_TOLERANCE {
            return ReputationDistribution::new(mass);
        }
    }
    Err(Error::NoConvergence {
        iterations: STATIONARY_MAX_ITERATIONS,
    })
}
