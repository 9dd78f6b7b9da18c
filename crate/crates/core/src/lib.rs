//! Evaluation, design, and simulation of reputation-based social norms for
//! anonymous service-exchange communities.
//!
//! A community of anonymous agents repeatedly exchanges services under
//! uniform random matching. A *social norm* pairs a reputation scheme
//! (labels, promotion on correctly reported service, a punishment drop, and
//! an entry label for newcomers) with a *social strategy* prescribing when a
//! server should fulfil a request, as a function of both agents'
//! reputations. This crate computes stationary reputation distributions,
//! expected and discounted long-run payoffs, one-shot deviation incentives,
//! and whitewash incentives; solves the design problems that pick
//! welfare-maximal enforceable norms by exact enumeration; and validates the
//! analytic engine against a finite-population Monte-Carlo simulator.

pub mod catalog;
pub mod dist;
mod error;
pub mod incentive;
pub mod norm;
pub mod optimizer;
pub mod payoff;
pub mod simulate;

mod params;

pub use error::{Error, Result};
pub use params::CommunityParams;

pub use dist::{
    evolve_distribution, stationary_closed_form, stationary_general, ReputationDistribution,
};
pub use incentive::{
    cooperation_constraints, evaluate_norm, is_sustainable, is_sustainable_bruteforce,
    whitewash_check, whitewash_sufficiency_bound, zero_welfare_test, EvaluationReport,
    IncentiveReport,
};
pub use norm::{
    enumerate_strategies, strategy_space_size, Action, ReputationScheme, SocialNorm, SocialStrategy,
};
pub use optimizer::{
    analytic_optimal_l1, prune_candidates, solve_dp_fixed_l, solve_dp_fixed_l_pruned,
    solve_dp_for_scheme, solve_dp_variable_m, solve_dp_whitewash, welfare_bounds, DesignSolution,
    VariableLengthSolution, WelfareBounds, WhitewashSolution,
};
pub use payoff::{
    cooperation_mass, deviation_values, long_term_values, period_payoffs, social_welfare,
    transition_matrix, value_differences_closed_form, NormEvaluator, StrategyAssessment,
    TransitionMatrix, ValueProfile,
};
pub use simulate::{
    match_agents, min_value_horizon, simulate_population, simulate_report, simulate_value_function,
    PopulationRun, SimulationConfig, SimulationReport, ValueEstimate,
};
