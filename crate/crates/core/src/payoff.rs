//! Expected period payoffs, reputation transitions, and long-term values.

use nalgebra::{DMatrix, DVector};

use crate::dist::{stationary_general, ReputationDistribution};
use crate::error::{Error, Result};
use crate::norm::{ReputationScheme, SocialNorm, SocialStrategy};
use crate::params::CommunityParams;

/// Absolute tolerance for the long-term value recursion residual.
pub const VALUE_RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Row-stochastic reputation transition matrix of an agent that follows the
/// prescribed strategy: probability `1 - report_error` on the promoted label
/// and `report_error` on the punished one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    side: usize,
    rows: Vec<f64>,
}

impl TransitionMatrix {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        self.rows[from * self.side + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.rows[from * self.side..(from + 1) * self.side]
    }
}

pub fn transition_matrix(scheme: &ReputationScheme, params: &CommunityParams) -> TransitionMatrix {
    let side = scheme.reputation_count();
    let mut rows = vec![0.0; side * side];
    for rep in 0..side {
        rows[rep * side + scheme.promoted(rep)] += 1.0 - params.report_error;
        rows[rep * side + scheme.punished(rep)] += params.report_error;
    }
    TransitionMatrix { side, rows }
}

/// Per-reputation expected period payoffs and their discounted long-run sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueProfile {
    pub period: Vec<f64>,
    pub longterm: Vec<f64>,
}

/// Expected period payoff of each reputation before matching: benefits
/// received as a client minus costs paid as a server, both averaged over the
/// partner's reputation.
pub fn period_payoffs(
    norm: &SocialNorm,
    dist: &ReputationDistribution,
    params: &CommunityParams,
) -> Vec<f64> {
    period_payoffs_by_parts(&norm.strategy, dist, params)
}

fn period_payoffs_by_parts(
    strategy: &SocialStrategy,
    dist: &ReputationDistribution,
    params: &CommunityParams,
) -> Vec<f64> {
    let side = strategy.side();
    let eta = dist.as_slice();
    (0..side)
        .map(|rep| {
            let mut benefit = 0.0;
            let mut cost = 0.0;
            for (partner, &mass) in eta.iter().enumerate() {
                if strategy.fulfills(partner, rep) {
                    benefit += mass;
                }
                if strategy.fulfills(rep, partner) {
                    cost += mass;
                }
            }
            benefit * params.benefit - cost * params.cost
        })
        .collect()
}

/// Fraction of matches in which service flows when everyone follows the
/// strategy and partners are drawn from `dist`.
pub fn cooperation_mass(strategy: &SocialStrategy, dist: &ReputationDistribution) -> f64 {
    let side = strategy.side();
    let eta = dist.as_slice();
    let mut mass = 0.0;
    for server in 0..side {
        for client in 0..side {
            if strategy.fulfills(server, client) {
                mass += eta[server] * eta[client];
            }
        }
    }
    mass
}

/// Factored `(I - delta P)` system reused across many strategies that share a
/// scheme. The matrix is strictly diagonally dominant for `delta < 1`, so the
/// factorisation cannot fail in exact arithmetic.
pub(crate) struct ValueSolver {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    delta: f64,
    transitions: TransitionMatrix,
}

impl ValueSolver {
    pub(crate) fn new(scheme: &ReputationScheme, params: &CommunityParams) -> Self {
        let transitions = transition_matrix(scheme, params);
        let side = transitions.side();
        let delta = params.delta();
        let system = DMatrix::from_fn(side, side, |i, j| {
            let identity = if i == j { 1.0 } else { 0.0 };
            identity - delta * transitions.probability(i, j)
        });
        Self {
            lu: system.lu(),
            delta,
            transitions,
        }
    }

    pub(crate) fn transitions(&self) -> &TransitionMatrix {
        &self.transitions
    }

    /// Solves `v_inf = period + delta P v_inf` for `v_inf`.
    pub(crate) fn solve(&self, period: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = DVector::from_column_slice(period);
        if !self.lu.solve_mut(&mut rhs) {
            return Err(Error::SingularSystem);
        }
        Ok(rhs.data.into())
    }

    /// Largest recursion residual of a candidate solution.
    pub(crate) fn residual(&self, period: &[f64], longterm: &[f64]) -> f64 {
        let side = self.transitions.side();
        (0..side)
            .map(|rep| {
                let future: f64 = (0..side)
                    .map(|next| self.transitions.probability(rep, next) * longterm[next])
                    .sum();
                (longterm[rep] - period[rep] - self.delta * future).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Solves the discounted value recursion exactly and checks the residual.
pub fn long_term_values(norm: &SocialNorm, params: &CommunityParams) -> Result<ValueProfile> {
    let dist = stationary_general(params, &norm.scheme)?;
    let solver = ValueSolver::new(&norm.scheme, params);
    let period = period_payoffs_by_parts(&norm.strategy, &dist, params);
    let longterm = solver.solve(&period)?;
    if solver.residual(&period, &longterm) > VALUE_RESIDUAL_TOLERANCE {
        return Err(Error::SingularSystem);
    }
    Ok(ValueProfile { period, longterm })
}

/// Long-run value gaps `v_inf(rep) - v_inf(0)` for `rep = 1..=max` as a
/// finite geometric sum of period-payoff differences. Only valid under
/// maximum punishment, where both transition branches share the drop target.
pub fn value_differences_closed_form(
    norm: &SocialNorm,
    params: &CommunityParams,
) -> Result<Vec<f64>> {
    let scheme = &norm.scheme;
    if !scheme.is_max_punishment() {
        return Err(Error::RequiresMaxPunishment {
            punishment_length: scheme.punishment_length(),
            max_reputation: scheme.max_reputation(),
        });
    }
    let dist = stationary_general(params, scheme)?;
    let period = period_payoffs_by_parts(&norm.strategy, &dist, params);
    let top = scheme.max_reputation();
    let gamma = params.gamma();
    Ok((1..=top)
        .map(|rep| {
            let mut weight = 1.0;
            let mut total = 0.0;
            for step in 0..top {
                total += weight * (period[(rep + step).min(top)] - period[step]);
                weight *= gamma;
            }
            total
        })
        .collect())
}

/// Social welfare: average period payoff across the stationary population.
pub fn social_welfare(norm: &SocialNorm, params: &CommunityParams) -> Result<f64> {
    let dist = stationary_general(params, &norm.scheme)?;
    let period = period_payoffs_by_parts(&norm.strategy, &dist, params);
    Ok(dot(dist.as_slice(), &period))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Values of a lone agent that plays `alternative` while the population
/// follows the norm: it still receives benefits under the population's
/// strategy, pays costs under its own, and transitions by whether its action
/// matches the prescribed one against each client it may meet.
pub fn deviation_values(
    norm: &SocialNorm,
    params: &CommunityParams,
    alternative: &SocialStrategy,
) -> Result<ValueProfile> {
    let scheme = &norm.scheme;
    if alternative.side() != scheme.reputation_count() {
        return Err(Error::DimensionMismatch {
            strategy_side: alternative.side(),
            scheme_side: scheme.reputation_count(),
        });
    }
    let dist = stationary_general(params, scheme)?;
    let side = scheme.reputation_count();
    let eta = dist.as_slice();
    let err = params.report_error;

    let mut period = vec![0.0; side];
    for (rep, slot) in period.iter_mut().enumerate() {
        let mut benefit = 0.0;
        let mut cost = 0.0;
        for (partner, &mass) in eta.iter().enumerate() {
            if norm.strategy.fulfills(partner, rep) {
                benefit += mass;
            }
            if alternative.fulfills(rep, partner) {
                cost += mass;
            }
        }
        *slot = benefit * params.benefit - cost * params.cost;
    }

    let delta = params.delta();
    let mut system = DMatrix::identity(side, side);
    for rep in 0..side {
        let agreement: f64 = (0..side)
            .filter(|&client| alternative.action(rep, client) == norm.strategy.action(rep, client))
            .map(|client| eta[client])
            .sum();
        let up = agreement * (1.0 - err) + (1.0 - agreement) * err;
        system[(rep, scheme.promoted(rep))] -= delta * up;
        system[(rep, scheme.punished(rep))] -= delta * (1.0 - up);
    }
    let longterm: Vec<f64> = system
        .lu()
        .solve(&DVector::from_column_slice(&period))
        .ok_or(Error::SingularSystem)?
        .data
        .into();
    Ok(ValueProfile { period, longterm })
}

/// Everything needed to grade many strategies under one scheme: the
/// stationary distribution and the factored value system.
pub struct NormEvaluator {
    params: CommunityParams,
    scheme: ReputationScheme,
    stationary: ReputationDistribution,
    solver: ValueSolver,
}

/// Scalar summary of one strategy under a fixed scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyAssessment {
    pub welfare: f64,
    pub sustainable: bool,
    /// Minimum over reputations of the discounted punishment spread.
    pub cooperation_incentive: f64,
    /// Worst constraint slack; non-negative (up to tolerance) iff sustainable.
    pub min_margin: f64,
    /// Largest gain any reputation would get from rejoining as a newcomer.
    pub whitewash_incentive: f64,
}

impl NormEvaluator {
    pub fn new(params: &CommunityParams, scheme: &ReputationScheme) -> Result<Self> {
        let stationary = stationary_general(params, scheme)?;
        let solver = ValueSolver::new(scheme, params);
        Ok(Self {
            params: *params,
            scheme: *scheme,
            stationary,
            solver,
        })
    }

    pub fn params(&self) -> &CommunityParams {
        &self.params
    }

    pub fn scheme(&self) -> &ReputationScheme {
        &self.scheme
    }

    pub fn stationary(&self) -> &ReputationDistribution {
        &self.stationary
    }

    pub fn transitions(&self) -> &TransitionMatrix {
        self.solver.transitions()
    }

    pub fn period_payoffs(&self, strategy: &SocialStrategy) -> Result<Vec<f64>> {
        self.check_side(strategy)?;
        Ok(period_payoffs_by_parts(
            strategy,
            &self.stationary,
            &self.params,
        ))
    }

    pub fn long_term(&self, strategy: &SocialStrategy) -> Result<ValueProfile> {
        self.check_side(strategy)?;
        let period = period_payoffs_by_parts(strategy, &self.stationary, &self.params);
        let longterm = self.solver.solve(&period)?;
        debug_assert!(self.solver.residual(&period, &longterm) < VALUE_RESIDUAL_TOLERANCE);
        Ok(ValueProfile { period, longterm })
    }

    pub fn welfare(&self, strategy: &SocialStrategy) -> Result<f64> {
        self.check_side(strategy)?;
        let period = period_payoffs_by_parts(strategy, &self.stationary, &self.params);
        Ok(dot(self.stationary.as_slice(), &period))
    }

    /// Welfare, feasibility, and incentive scalars in one pass.
    pub fn assess(&self, strategy: &SocialStrategy) -> Result<StrategyAssessment> {
        self.check_side(strategy)?;
        let period = period_payoffs_by_parts(strategy, &self.stationary, &self.params);
        let welfare = dot(self.stationary.as_slice(), &period);
        let longterm = self.solver.solve(&period)?;
        let spread_weight = self.params.delta() * (1.0 - 2.0 * self.params.report_error);

        let mut cooperation_incentive = f64::INFINITY;
        let mut min_margin = f64::INFINITY;
        let mut lowest_value = f64::INFINITY;
        for rep in 0..self.scheme.reputation_count() {
            let spread = longterm[self.scheme.promoted(rep)] - longterm[self.scheme.punished(rep)];
            let lhs = spread_weight * spread;
            let rhs = if strategy.row_has_fulfill(rep) {
                self.params.cost
            } else {
                -self.params.cost
            };
            cooperation_incentive = cooperation_incentive.min(lhs);
            min_margin = min_margin.min(lhs - rhs);
            lowest_value = lowest_value.min(longterm[rep]);
        }
        let whitewash_incentive = longterm[self.scheme.entry_reputation()] - lowest_value;
        Ok(StrategyAssessment {
            welfare,
            sustainable: min_margin >= -crate::incentive::MARGIN_TOLERANCE,
            cooperation_incentive,
            min_margin,
            whitewash_incentive,
        })
    }

    fn check_side(&self, strategy: &SocialStrategy) -> Result<()> {
        if strategy.side() != self.scheme.reputation_count() {
            return Err(Error::DimensionMismatch {
                strategy_side: strategy.side(),
                scheme_side: self.scheme.reputation_count(),
            });
        }
        Ok(())
    }
}
