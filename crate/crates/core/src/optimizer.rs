//! Exact solution of the norm design problems by enumeration, plus the
//! analytic two-label solver, structural pruning, and welfare diagnostics.

use rayon::prelude::*;

use crate::catalog;
use crate::error::{Error, Result};
use crate::incentive::{
    cooperation_report, whitewash_incentive_of, zero_welfare_test, IncentiveReport,
    MARGIN_TOLERANCE,
};
use crate::norm::{
    strategy_space_size, ReputationScheme, SocialNorm, SocialStrategy, ENUMERATION_LIMIT,
};
use crate::params::CommunityParams;
use crate::payoff::NormEvaluator;

/// Welfare-maximal sustainable norm found by an exact search.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub norm: SocialNorm,
    pub welfare: f64,
    pub report: IncentiveReport,
    /// Number of strategies that satisfied every constraint of the problem.
    pub feasible_count: u64,
    /// Whether the optimum supports any service at all.
    pub cooperative: bool,
}

#[derive(Clone, Copy)]
struct Candidate {
    welfare: f64,
    index: u128,
}

impl Candidate {
    /// Higher welfare wins; exact ties go to the smaller canonical index.
    fn better_of(self, other: Candidate) -> Candidate {
        if other.welfare > self.welfare
            || (other.welfare == self.welfare && other.index < self.index)
        {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Copy)]
struct SearchAccumulator {
    best: Option<Candidate>,
    feasible: u64,
}

impl SearchAccumulator {
    fn empty() -> Self {
        Self {
            best: None,
            feasible: 0,
        }
    }

    fn admit(mut self, candidate: Candidate) -> Self {
        self.feasible += 1;
        self.best = Some(match self.best {
            Some(best) => best.better_of(candidate),
            None => candidate,
        });
        self
    }

    fn merge(self, other: Self) -> Self {
        Self {
            best: match (self.best, other.best) {
                (Some(a), Some(b)) => Some(a.better_of(b)),
                (a, b) => a.or(b),
            },
            feasible: self.feasible + other.feasible,
        }
    }
}

fn search(
    evaluator: &NormEvaluator,
    require_whitewash_proof: bool,
    filter: Option<&PruneFilter>,
) -> Result<DesignSolution> {
    let scheme = *evaluator.scheme();
    let side = scheme.reputation_count();
    let count = strategy_space_size(scheme.max_reputation())?;
    let whitewash_cap = match (require_whitewash_proof, evaluator.params().whitewash_cost) {
        (true, Some(cost)) => Some(cost),
        (true, None) => return Err(Error::MissingWhitewashCost),
        (false, _) => None,
    };

    let outcome = (0..count)
        .into_par_iter()
        .try_fold(SearchAccumulator::empty, |acc, raw| -> Result<_> {
            let strategy = SocialStrategy::from_index(raw as u128, side)?;
            let assessment = evaluator.assess(&strategy)?;
            let mut feasible = assessment.sustainable;
            if let Some(cap) = whitewash_cap {
                feasible &= assessment.whitewash_incentive <= cap + MARGIN_TOLERANCE;
            }
            if !feasible {
                return Ok(acc);
            }
            // pruning narrows only the candidacy for the optimum, never the
            // feasibility count, so pruned and unpruned searches stay
            // comparable field by field
            if let Some(f) = filter {
                if !f.allows(&strategy) {
                    return Ok(SearchAccumulator {
                        best: acc.best,
                        feasible: acc.feasible + 1,
                    });
                }
            }
            Ok(acc.admit(Candidate {
                welfare: assessment.welfare,
                index: raw as u128,
            }))
        })
        .try_reduce(SearchAccumulator::empty, |a, b| Ok(a.merge(b)))?;

    let best = outcome.best.expect("all-decline is always feasible");
    let strategy = SocialStrategy::from_index(best.index, side)?;
    let values = evaluator.long_term(&strategy)?;
    let mut report = cooperation_report(&strategy, evaluator, &values.longterm);
    let incentive = whitewash_incentive_of(&values.longterm, scheme.entry_reputation());
    report.whitewash_incentive = Some(incentive);
    if let Some(cost) = evaluator.params().whitewash_cost {
        report.whitewash_proof = Some(incentive <= cost + MARGIN_TOLERANCE);
    }
    Ok(DesignSolution {
        norm: SocialNorm::new(scheme, strategy)?,
        welfare: best.welfare,
        report,
        feasible_count: outcome.feasible,
        cooperative: best.welfare > 0.0,
    })
}

/// Exact optimum over every strategy for one scheme. Whitewash-proofness is
/// enforced only when requested (the entry-reputation design problem).
pub fn solve_dp_for_scheme(
    params: &CommunityParams,
    scheme: &ReputationScheme,
    require_whitewash_proof: bool,
) -> Result<DesignSolution> {
    let evaluator = NormEvaluator::new(params, scheme)?;
    search(&evaluator, require_whitewash_proof, None)
}

/// The base design problem: maximum punishment, newcomers at the top.
pub fn solve_dp_fixed_l(params: &CommunityParams, max_reputation: usize) -> Result<DesignSolution> {
    solve_dp_for_scheme(
        params,
        &ReputationScheme::max_punishment(max_reputation)?,
        false,
    )
}

/// Fixed-bound problem with the structural filter applied to optimum
/// candidacy; must return the same solution as [`solve_dp_fixed_l`].
pub fn solve_dp_fixed_l_pruned(
    params: &CommunityParams,
    max_reputation: usize,
) -> Result<DesignSolution> {
    let scheme = ReputationScheme::max_punishment(max_reputation)?;
    let evaluator = NormEvaluator::new(params, &scheme)?;
    let filter = prune_candidates(params, max_reputation)?;
    search(&evaluator, false, Some(&filter))
}

/// Per-punishment-length optima and the best over all lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableLengthSolution {
    pub best: DesignSolution,
    /// Index `m - 1` holds the optimum for punishment length `m`.
    pub per_length: Vec<DesignSolution>,
}

/// Design problem over punishment lengths `1..=max_reputation` with
/// newcomers at the top; welfare ties prefer the shorter punishment.
pub fn solve_dp_variable_m(
    params: &CommunityParams,
    max_reputation: usize,
) -> Result<VariableLengthSolution> {
    let mut per_length = Vec::with_capacity(max_reputation);
    for length in 1..=max_reputation {
        let scheme = ReputationScheme::new(max_reputation, length, max_reputation)?;
        per_length.push(solve_dp_for_scheme(params, &scheme, false)?);
    }
    let mut best = 0;
    for m in 1..per_length.len() {
        // strict improvement: exact welfare ties keep the shorter punishment
        if per_length[m].welfare > per_length[best].welfare {
            best = m;
        }
    }
    Ok(VariableLengthSolution {
        best: per_length[best].clone(),
        per_length,
    })
}

/// Per-entry-reputation optima and the best over all entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitewashSolution {
    pub best: DesignSolution,
    /// Index `k` holds the optimum for entry reputation `k`.
    pub per_entry: Vec<DesignSolution>,
}

/// Design problem over entry reputations `0..=max_reputation` under maximum
/// punishment, keeping only sustainable and whitewash-proof norms; welfare
/// ties prefer the higher entry reputation.
pub fn solve_dp_whitewash(
    params: &CommunityParams,
    max_reputation: usize,
    whitewash_cost: f64,
) -> Result<WhitewashSolution> {
    let params = params.with_whitewash_cost(whitewash_cost)?;
    let mut per_entry = Vec::with_capacity(max_reputation + 1);
    for entry in 0..=max_reputation {
        let scheme = ReputationScheme::new(max_reputation, max_reputation, entry)?;
        per_entry.push(solve_dp_for_scheme(&params, &scheme, true)?);
    }
    let mut best = 0;
    for entry in 1..per_entry.len() {
        if per_entry[entry].welfare >= per_entry[best].welfare {
            best = entry;
        }
    }
    Ok(WhitewashSolution {
        best: per_entry[best].clone(),
        per_entry,
    })
}

/// Analytic two-label optimum: the cost-benefit ratio selects one of the
/// four candidate strategies. Needs `0 < (1 - turnover) * report_error < 1/2`
/// so that the candidate welfare ranking is strict.
pub fn analytic_optimal_l1(params: &CommunityParams) -> Result<SocialStrategy> {
    let survive = 1.0 - params.turnover;
    let err = params.report_error;
    let demoted_share = survive * err;
    if !(demoted_share > 0.0 && demoted_share < 0.5) {
        return Err(Error::HypothesisViolated(format!(
            "(1 - turnover) * report_error = {demoted_share} must lie in (0, 1/2)"
        )));
    }
    let ratio = params.cost / params.benefit;
    let spread_weight = params.delta() * (1.0 - 2.0 * err);
    let lenient = params.discount * survive * survive * (1.0 - 2.0 * err) * err;
    let first = lenient / (1.0 + lenient);
    let second = spread_weight * (1.0 - demoted_share) / (1.0 - lenient);
    let third = spread_weight;

    let ladder = catalog::two_reputation_ladder();
    let pick = if ratio <= first {
        0
    } else if ratio <= second {
        1
    } else if ratio <= third {
        2
    } else {
        3
    };
    Ok(ladder[pick].clone())
}

/// Structural conditions every fixed-bound optimum satisfies when
/// `report_error > 0` and `turnover < 1`: generous rows must keep serving
/// high-reputation clients.
#[derive(Debug, Clone)]
pub struct PruneFilter {
    max_reputation: usize,
    /// Clients at or above this level must be served by a fulfilment row 0.
    row_zero_from: f64,
    /// Rows at or above this level (strictly inside the range) must serve
    /// top-reputation clients if they serve anyone.
    middle_rows_from: f64,
}

impl PruneFilter {
    /// True when the strategy is *not* excluded by the structural
    /// conditions. All-decline rows never trigger them.
    pub fn allows(&self, strategy: &SocialStrategy) -> bool {
        let top = self.max_reputation;
        if strategy.row_has_fulfill(0) {
            for client in 0..=top {
                if client as f64 >= self.row_zero_from - 1e-12 && !strategy.fulfills(0, client) {
                    return false;
                }
            }
        }
        for server in 1..top {
            if server as f64 >= self.middle_rows_from - 1e-12
                && strategy.row_has_fulfill(server)
                && !strategy.fulfills(server, top)
            {
                return false;
            }
        }
        if strategy.row_has_fulfill(top) && !strategy.fulfills(top, top) {
            return false;
        }
        true
    }
}

/// Builds the structural filter for one reputation bound.
pub fn prune_candidates(params: &CommunityParams, max_reputation: usize) -> Result<PruneFilter> {
    if !(params.report_error > 0.0 && params.turnover < 1.0) {
        return Err(Error::HypothesisViolated(
            "pruning needs report_error > 0 and turnover < 1".to_string(),
        ));
    }
    let ratio_log = (params.cost / params.benefit).ln();
    let row_zero_from = (ratio_log / params.discount.ln()).min(max_reputation as f64);

    let survive = 1.0 - params.turnover;
    let err = params.report_error;
    let top_mass_raw =
        survive.powi(max_reputation as i32 + 1) * (1.0 - err).powi(max_reputation as i32) * err;
    let shrink =
        (top_mass_raw - top_mass_raw * survive * (1.0 - err)) / (top_mass_raw + params.turnover);
    let middle_rows_from = max_reputation as f64 - (ratio_log - shrink.ln()) / params.discount.ln();

    Ok(PruneFilter {
        max_reputation,
        row_zero_from,
        middle_rows_from,
    })
}

/// Welfare diagnostics across reputation bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareBounds {
    /// Sign-safe test for a fully collapsed design problem.
    pub zero_welfare: bool,
    /// Universal upper bound `benefit - cost`.
    pub upper: f64,
    /// Lower bound from the serve-nonzero norm, when its constraint holds.
    pub lower: Option<f64>,
    /// Exact optima for bounds `1..=l_max`.
    pub optima: Vec<f64>,
    /// Whether the optima are non-decreasing in the bound (within tolerance).
    pub monotone: bool,
    /// Whether every optimum respects the bounds (within tolerance).
    pub within_bounds: bool,
}

pub fn welfare_bounds(params: &CommunityParams, l_max: usize) -> Result<WelfareBounds> {
    if l_max == 0 || l_max > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            max_reputation: l_max,
            limit: ENUMERATION_LIMIT,
        });
    }
    let upper = params.benefit - params.cost;
    let spread_weight = params.delta() * (1.0 - 2.0 * params.report_error);
    let lower = if params.cost / params.benefit <= spread_weight {
        Some((1.0 - (1.0 - params.turnover) * params.report_error) * upper)
    } else {
        None
    };
    let mut optima = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        optima.push(solve_dp_fixed_l(params, l)?.welfare);
    }
    let monotone = optima.windows(2).all(|w| w[1] + MARGIN_TOLERANCE >= w[0]);
    let within_bounds = optima.iter().all(|&u| {
        u >= -MARGIN_TOLERANCE
            && u <= upper + MARGIN_TOLERANCE
            && lower.is_none_or(|low| u >= low - MARGIN_TOLERANCE)
    });
    Ok(WelfareBounds {
        zero_welfare: zero_welfare_test(params),
        upper,
        lower,
        optima,
        monotone,
        within_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn defaults() -> CommunityParams {
        CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.2).unwrap()
    }

    fn with_cost(c: f64) -> CommunityParams {
        CommunityParams::new(10.0, c, 0.8, 0.1, 0.2).unwrap()
    }

    #[test]
    fn two_label_optimum_at_reference_parameters() {
        let solution = solve_dp_fixed_l(&defaults(), 1).unwrap();
        assert_eq!(solution.norm.strategy.matrix_string(), "FFDF");
        assert!((solution.welfare - 7.6716).abs() < 1e-12);
        assert!(solution.cooperative);
        assert_eq!(solution.feasible_count, 6);
    }

    #[test]
    fn expensive_service_collapses_to_all_decline() {
        let solution = solve_dp_fixed_l(&with_cost(5.0), 1).unwrap();
        assert_eq!(solution.norm.strategy, catalog::all_decline(1));
        assert_eq!(solution.welfare, 0.0);
        assert!(!solution.cooperative);

        let myopic = CommunityParams::new(10.0, 1.0, 0.0, 0.1, 0.2).unwrap();
        for l in 1..=2 {
            let s = solve_dp_fixed_l(&myopic, l).unwrap();
            assert_eq!(s.norm.strategy, catalog::all_decline(l));
            assert_eq!(s.welfare, 0.0);
        }
    }

    #[test]
    fn analytic_two_label_regions() {
        assert_eq!(
            analytic_optimal_l1(&with_cost(1.0))
                .unwrap()
                .matrix_string(),
            "FFDF"
        );
        assert_eq!(
            analytic_optimal_l1(&with_cost(4.0)).unwrap(),
            catalog::serve_nonzero(1)
        );
        assert_eq!(
            analytic_optimal_l1(&with_cost(9.0)).unwrap(),
            catalog::all_decline(1)
        );
        assert_eq!(
            analytic_optimal_l1(&with_cost(0.5)).unwrap(),
            catalog::single_decline(1)
        );
        let exact = CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.0).unwrap();
        assert!(matches!(
            analytic_optimal_l1(&exact),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn variable_length_specialises_to_fixed() {
        let fixed = solve_dp_fixed_l(&defaults(), 2).unwrap();
        let variable = solve_dp_variable_m(&defaults(), 2).unwrap();
        assert_eq!(variable.per_length.len(), 2);
        assert_eq!(variable.per_length[1].norm, fixed.norm);
        assert_eq!(variable.per_length[1].welfare, fixed.welfare);
    }

    #[test]
    fn whitewash_with_generous_cost_matches_fixed_problem() {
        let bound = crate::incentive::whitewash_sufficiency_bound(&defaults());
        let solution = solve_dp_whitewash(&defaults(), 2, bound.ceil()).unwrap();
        let fixed = solve_dp_fixed_l(&defaults(), 2).unwrap();
        assert_eq!(solution.best.norm.scheme.entry_reputation(), 2);
        assert_eq!(solution.best.norm.strategy, fixed.norm.strategy);
        assert!((solution.best.welfare - fixed.welfare).abs() < 1e-12);
    }

    #[test]
    fn free_whitewashing_pushes_entry_to_the_bottom() {
        let solution = solve_dp_whitewash(&defaults(), 2, 0.0).unwrap();
        assert_eq!(solution.best.norm.scheme.entry_reputation(), 0);
        assert!(solution.best.cooperative);
        assert_eq!(solution.best.report.whitewash_proof, Some(true));
    }

    #[test]
    fn pruning_excludes_ungenerous_top_rows_only() {
        let filter = prune_candidates(&defaults(), 2).unwrap();
        // row 0 serves someone but declines the top client
        assert!(!filter.allows(&SocialStrategy::parse("FFD/FFF/FFF").unwrap()));
        // a serving middle row must also serve top clients at these parameters
        assert!(!filter.allows(&SocialStrategy::parse("FFF/FFD/FFF").unwrap()));
        // same for the top row itself
        assert!(!filter.allows(&SocialStrategy::parse("FFF/FFF/FFD").unwrap()));
        assert!(filter.allows(&catalog::all_decline(2)));
        assert!(filter.allows(&catalog::serve_nonzero(2)));
        assert!(
            prune_candidates(&CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.0).unwrap(), 2).is_err()
        );
    }

    #[test]
    fn pruned_search_equals_unpruned_across_a_cost_grid() {
        for step in 0..100 {
            let cost = 0.1 + 9.7 * step as f64 / 99.0;
            let params = with_cost(cost);
            let plain = solve_dp_fixed_l(&params, 2).unwrap();
            let pruned = solve_dp_fixed_l_pruned(&params, 2).unwrap();
            assert_eq!(plain, pruned, "cost {cost}");
        }
    }

    #[test]
    fn exact_welfare_ties_break_to_the_lowest_index() {
        // without report errors everyone sits at the top, so every
        // sustainable strategy serving top clients ties at full welfare
        let params = CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.0).unwrap();
        let solution = solve_dp_fixed_l(&params, 1).unwrap();
        assert_eq!(solution.welfare, 9.0);
        assert_eq!(solution.norm.strategy.canonical_index(), 8);
        assert_eq!(solution.norm.strategy.matrix_string(), "DDDF");
    }

    #[test]
    fn longer_punishment_costs_welfare_for_a_fixed_strategy() {
        let params = defaults();
        let mut previous = f64::INFINITY;
        for length in 1..=3usize {
            let scheme = ReputationScheme::new(3, length, 3).unwrap();
            let evaluator = NormEvaluator::new(&params, &scheme).unwrap();
            let assessment = evaluator.assess(&catalog::serve_upward(3)).unwrap();
            assert!(assessment.sustainable);
            assert!(assessment.welfare < previous);
            previous = assessment.welfare;
        }
    }

    #[test]
    fn bounds_hold_at_reference_parameters() {
        let bounds = welfare_bounds(&defaults(), 2).unwrap();
        assert!(!bounds.zero_welfare);
        assert_eq!(bounds.upper, 9.0);
        assert!((bounds.lower.unwrap() - 7.38).abs() < 1e-12);
        assert!((bounds.optima[0] - 7.6716).abs() < 1e-12);
        assert!(bounds.monotone);
        assert!(bounds.within_bounds);
    }

    #[test]
    fn lifted_optimum_keeps_welfare_and_feasibility() {
        let solution = solve_dp_fixed_l(&defaults(), 1).unwrap();
        let lifted = catalog::lift(&solution.norm.strategy);
        let norm = SocialNorm::new(ReputationScheme::max_punishment(2).unwrap(), lifted).unwrap();
        assert!(crate::incentive::is_sustainable(&norm, &defaults()).unwrap());
        let welfare = crate::payoff::social_welfare(&norm, &defaults()).unwrap();
        assert!((welfare - solution.welfare).abs() < 1e-12);
    }
}
