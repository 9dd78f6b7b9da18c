//! Sustainability checks, the brute-force deviation oracle, and
//! whitewash-proofness.

use crate::dist::ReputationDistribution;
use crate::error::{Error, Result};
use crate::norm::{enumerate_strategies, SocialNorm, SocialStrategy};
use crate::params::CommunityParams;
use crate::payoff::{deviation_values, NormEvaluator, ValueProfile};

/// Slack below which a weak inequality still counts as satisfied, so that
/// analytically binding constraints pass.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// Reputation bound up to which the brute-force deviation oracle enumerates
/// every alternative strategy.
pub const BRUTE_FORCE_LIMIT: usize = 2;

/// Incentive diagnostics for one norm.
#[derive(Debug, Clone, PartialEq)]
pub struct IncentiveReport {
    /// Constraint slack per server reputation: discounted punishment spread
    /// minus the cost bound that binds there.
    pub cooperation_margins: Vec<f64>,
    /// Minimum over reputations of the discounted punishment spread.
    pub cooperation_incentive: f64,
    pub sustainable: bool,
    /// Reputations whose margin attains the minimum.
    pub binding_reputations: Vec<usize>,
    /// Largest gain any reputation gets from rejoining as a newcomer.
    pub whitewash_incentive: Option<f64>,
    /// Set when the parameters carry a whitewashing cost.
    pub whitewash_proof: Option<bool>,
}

pub(crate) fn cooperation_report(
    strategy: &SocialStrategy,
    evaluator: &NormEvaluator,
    longterm: &[f64],
) -> IncentiveReport {
    let scheme = evaluator.scheme();
    let params = evaluator.params();
    let spread_weight = params.delta() * (1.0 - 2.0 * params.report_error);
    let mut margins = Vec::with_capacity(scheme.reputation_count());
    let mut incentive = f64::INFINITY;
    for rep in 0..scheme.reputation_count() {
        let lhs = spread_weight * (longterm[scheme.promoted(rep)] - longterm[scheme.punished(rep)]);
        // a row with any fulfil must beat +cost; an all-decline row only -cost
        let rhs = if strategy.row_has_fulfill(rep) {
            params.cost
        } else {
            -params.cost
        };
        incentive = incentive.min(lhs);
        margins.push(lhs - rhs);
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let binding = margins
        .iter()
        .enumerate()
        .filter(|(_, &m)| m <= min_margin + 1e-12)
        .map(|(rep, _)| rep)
        .collect();
    IncentiveReport {
        sustainable: min_margin >= -MARGIN_TOLERANCE,
        cooperation_margins: margins,
        cooperation_incentive: incentive,
        binding_reputations: binding,
        whitewash_incentive: None,
        whitewash_proof: None,
    }
}

/// Per-reputation one-shot deviation margins and the cooperation incentive.
pub fn cooperation_constraints(
    norm: &SocialNorm,
    params: &CommunityParams,
) -> Result<IncentiveReport> {
    let evaluator = NormEvaluator::new(params, &norm.scheme)?;
    let values = evaluator.long_term(&norm.strategy)?;
    Ok(cooperation_report(
        &norm.strategy,
        &evaluator,
        &values.longterm,
    ))
}

/// One-shot deviation test: no reputation gains from a single-period
/// deviation followed by a return to the prescribed strategy.
pub fn is_sustainable(norm: &SocialNorm, params: &CommunityParams) -> Result<bool> {
    Ok(cooperation_constraints(norm, params)?.sustainable)
}

/// A profitable full-strategy deviation found by the brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationWitness {
    pub strategy: SocialStrategy,
    pub server: usize,
    pub client: usize,
    pub gain: f64,
}

/// Enumerates every alternative strategy and every matched pair, comparing
/// the norm-following continuation value with the deviating one. Serves as
/// the independent oracle behind the one-shot test.
pub fn find_profitable_deviation(
    norm: &SocialNorm,
    params: &CommunityParams,
) -> Result<Option<DeviationWitness>> {
    let scheme = &norm.scheme;
    if scheme.max_reputation() > BRUTE_FORCE_LIMIT {
        return Err(Error::EnumerationTooLarge {
            max_reputation: scheme.max_reputation(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let evaluator = NormEvaluator::new(params, scheme)?;
    let values = evaluator.long_term(&norm.strategy)?;
    let err = params.report_error;
    let delta = params.delta();
    let side = scheme.reputation_count();

    for alternative in enumerate_strategies(scheme.max_reputation())? {
        let dev: ValueProfile = deviation_values(norm, params, &alternative)?;
        for server in 0..side {
            let up = scheme.promoted(server);
            let down = scheme.punished(server);
            let follow_future =
                delta * ((1.0 - err) * values.longterm[up] + err * values.longterm[down]);
            for client in 0..side {
                let follow_cost = if norm.strategy.fulfills(server, client) {
                    params.cost
                } else {
                    0.0
                };
                let deviate_cost = if alternative.fulfills(server, client) {
                    params.cost
                } else {
                    0.0
                };
                // first-period transition depends on the client actually faced
                let up_prob =
                    if alternative.action(server, client) == norm.strategy.action(server, client) {
                        1.0 - err
                    } else {
                        err
                    };
                let deviate_future =
                    delta * (up_prob * dev.longterm[up] + (1.0 - up_prob) * dev.longterm[down]);
                let gain = (-deviate_cost + deviate_future) - (-follow_cost + follow_future);
                if gain > MARGIN_TOLERANCE {
                    return Ok(Some(DeviationWitness {
                        strategy: alternative,
                        server,
                        client,
                        gain,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Sustainability by exhaustive deviation search; must agree with
/// [`is_sustainable`] by the one-shot deviation principle.
pub fn is_sustainable_bruteforce(norm: &SocialNorm, params: &CommunityParams) -> Result<bool> {
    Ok(find_profitable_deviation(norm, params)?.is_none())
}

pub(crate) fn whitewash_incentive_of(longterm: &[f64], entry: usize) -> f64 {
    let lowest = longterm.iter().copied().fold(f64::INFINITY, f64::min);
    longterm[entry] - lowest
}

/// Whitewash diagnostics: compares every reputation's value with the entry
/// value. Requires a whitewashing cost on the parameters.
pub fn whitewash_check(norm: &SocialNorm, params: &CommunityParams) -> Result<IncentiveReport> {
    let cost = params.whitewash_cost.ok_or(Error::MissingWhitewashCost)?;
    let evaluator = NormEvaluator::new(params, &norm.scheme)?;
    let values = evaluator.long_term(&norm.strategy)?;
    let mut report = cooperation_report(&norm.strategy, &evaluator, &values.longterm);
    let incentive = whitewash_incentive_of(&values.longterm, norm.scheme.entry_reputation());
    report.whitewash_incentive = Some(incentive);
    report.whitewash_proof = Some(incentive <= cost + MARGIN_TOLERANCE);
    Ok(report)
}

/// Whitewashing cost above which every norm is whitewash-proof:
/// `(benefit + cost) / (1 - gamma)`.
pub fn whitewash_sufficiency_bound(params: &CommunityParams) -> f64 {
    (params.benefit + params.cost) / (1.0 - params.gamma())
}

/// True when no strategy with any fulfilment can meet its constraint, so
/// every design problem collapses to all-decline. Uses the sign-safe
/// undivided inequality `delta (1 - 2 eps) (b + c) / (1 - gamma) < c`.
pub fn zero_welfare_test(params: &CommunityParams) -> bool {
    params.delta() * (1.0 - 2.0 * params.report_error) * whitewash_sufficiency_bound(params)
        < params.cost
}

/// Full diagnostics for one norm: stationary distribution, values, welfare,
/// and incentive flags. Whitewash fields are filled when the parameters
/// carry a whitewashing cost.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub stationary: ReputationDistribution,
    pub values: ValueProfile,
    pub welfare: f64,
    pub incentives: IncentiveReport,
}

pub fn evaluate_norm(norm: &SocialNorm, params: &CommunityParams) -> Result<EvaluationReport> {
    let evaluator = NormEvaluator::new(params, &norm.scheme)?;
    evaluate_with(&evaluator, &norm.strategy)
}

pub(crate) fn evaluate_with(
    evaluator: &NormEvaluator,
    strategy: &SocialStrategy,
) -> Result<EvaluationReport> {
    let values = evaluator.long_term(strategy)?;
    let mut incentives = cooperation_report(strategy, evaluator, &values.longterm);
    let incentive = whitewash_incentive_of(&values.longterm, evaluator.scheme().entry_reputation());
    incentives.whitewash_incentive = Some(incentive);
    if let Some(cost) = evaluator.params().whitewash_cost {
        incentives.whitewash_proof = Some(incentive <= cost + MARGIN_TOLERANCE);
    }
    let welfare = evaluator.welfare(strategy)?;
    Ok(EvaluationReport {
        stationary: evaluator.stationary().clone(),
        values,
        welfare,
        incentives,
    })
}
