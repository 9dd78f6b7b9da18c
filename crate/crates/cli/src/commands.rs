//! Subcommand implementations that produce output tables.

use rayon::prelude::*;

use normforge_core::{
    evaluate_norm, long_term_values, simulate_report, social_welfare, solve_dp_fixed_l,
    solve_dp_variable_m, solve_dp_whitewash, stationary_general, CommunityParams, DesignSolution,
    EvaluationReport, SocialNorm,
};

use crate::settings::{CliError, CliResult, Settings, SweepSpec};
use crate::table::{Table, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizeMode {
    /// Maximum punishment, newcomers at the top.
    Fixed,
    /// Search punishment lengths 1..=L as well.
    VariableM,
    /// Search entry reputations 0..=L under whitewash constraints.
    Whitewash,
}

impl OptimizeMode {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizeMode::Fixed => "fixed",
            OptimizeMode::VariableM => "variable-m",
            OptimizeMode::Whitewash => "whitewash",
        }
    }

    pub fn from_settings(settings: &Settings) -> CliResult<Option<Self>> {
        match settings.get("optimize.mode") {
            None => Ok(None),
            Some("fixed") => Ok(Some(OptimizeMode::Fixed)),
            Some("variable-m") => Ok(Some(OptimizeMode::VariableM)),
            Some("whitewash") => Ok(Some(OptimizeMode::Whitewash)),
            Some(other) => Err(CliError::validation(format!(
                "optimize.mode = {other}: expected fixed, variable-m, or whitewash"
            ))),
        }
    }
}

fn provenance(settings: &Settings, command: &str, extra: &[String]) -> Vec<String> {
    let mut lines = vec![
        format!("normforge {VERSION} {command}"),
        settings.provenance_params(),
    ];
    lines.extend(extra.iter().cloned());
    lines
}

fn params_cells(params: &CommunityParams) -> Vec<Value> {
    vec![
        Value::Float(params.benefit),
        Value::Float(params.cost),
        Value::Float(params.discount),
        Value::Float(params.turnover),
        Value::Float(params.report_error),
        params
            .whitewash_cost
            .map(Value::Float)
            .unwrap_or(Value::Empty),
    ]
}

const EVALUATE_COLUMNS: [&str; 16] = [
    "b",
    "c",
    "beta",
    "alpha",
    "eps",
    "c_w",
    "l",
    "m",
    "k",
    "strategy",
    "strategy_index",
    "welfare",
    "cooperation_incentive",
    "whitewash_incentive",
    "sustainable",
    "whitewash_proof",
];

fn evaluation_cells(
    norm: &SocialNorm,
    params: &CommunityParams,
    report: &EvaluationReport,
) -> Vec<Value> {
    let mut cells = params_cells(params);
    cells.extend([
        Value::Count(norm.scheme.max_reputation() as u64),
        Value::Count(norm.scheme.punishment_length() as u64),
        Value::Count(norm.scheme.entry_reputation() as u64),
        Value::Text(norm.strategy.matrix_string()),
        Value::Text(norm.strategy.canonical_index().to_string()),
        Value::Float(report.welfare),
        Value::Float(report.incentives.cooperation_incentive),
        report
            .incentives
            .whitewash_incentive
            .map(Value::Float)
            .unwrap_or(Value::Empty),
        Value::Bool(report.incentives.sustainable),
        report
            .incentives
            .whitewash_proof
            .map(Value::Bool)
            .unwrap_or(Value::Empty),
    ]);
    cells
}

pub fn evaluate(settings: &Settings) -> CliResult<Table> {
    let params = settings.params()?;
    let norm = settings.norm()?;
    let report = evaluate_norm(&norm, &params)?;
    let mut table = Table::new(provenance(settings, "evaluate", &[]), &EVALUATE_COLUMNS);
    table.push(evaluation_cells(&norm, &params, &report));
    Ok(table)
}

const OPTIMIZE_COLUMNS: [&str; 19] = [
    "b",
    "c",
    "beta",
    "alpha",
    "eps",
    "c_w",
    "l",
    "m",
    "k",
    "strategy",
    "strategy_index",
    "welfare",
    "cooperation_incentive",
    "whitewash_incentive",
    "sustainable",
    "whitewash_proof",
    "feasible_count",
    "cooperative",
    "selected",
];

fn solution_cells(
    params: &CommunityParams,
    solution: &DesignSolution,
    selected: bool,
) -> Vec<Value> {
    let mut cells = params_cells(params);
    let norm = &solution.norm;
    cells.extend([
        Value::Count(norm.scheme.max_reputation() as u64),
        Value::Count(norm.scheme.punishment_length() as u64),
        Value::Count(norm.scheme.entry_reputation() as u64),
        Value::Text(norm.strategy.matrix_string()),
        Value::Text(norm.strategy.canonical_index().to_string()),
        Value::Float(solution.welfare),
        Value::Float(solution.report.cooperation_incentive),
        solution
            .report
            .whitewash_incentive
            .map(Value::Float)
            .unwrap_or(Value::Empty),
        Value::Bool(solution.report.sustainable),
        solution
            .report
            .whitewash_proof
            .map(Value::Bool)
            .unwrap_or(Value::Empty),
        Value::Count(solution.feasible_count),
        Value::Bool(solution.cooperative),
        Value::Bool(selected),
    ]);
    cells
}

pub fn optimize(settings: &Settings, mode: OptimizeMode) -> CliResult<Table> {
    let params = settings.params()?;
    let scheme = settings.scheme()?;
    let l = scheme.max_reputation();
    let mut table = Table::new(
        provenance(settings, "optimize", &[format!("mode={}", mode.name())]),
        &OPTIMIZE_COLUMNS,
    );
    match mode {
        OptimizeMode::Fixed => {
            let solution = solve_dp_fixed_l(&params, l)?;
            table.push(solution_cells(&params, &solution, true));
        }
        OptimizeMode::VariableM => {
            let solution = solve_dp_variable_m(&params, l)?;
            for per_length in &solution.per_length {
                let selected = per_length.norm == solution.best.norm;
                table.push(solution_cells(&params, per_length, selected));
            }
        }
        OptimizeMode::Whitewash => {
            let whitewash_cost = params
                .whitewash_cost
                .ok_or(normforge_core::Error::MissingWhitewashCost)?;
            let solution = solve_dp_whitewash(&params, l, whitewash_cost)?;
            for per_entry in &solution.per_entry {
                let selected = per_entry.norm == solution.best.norm;
                table.push(solution_cells(&params, per_entry, selected));
            }
        }
    }
    Ok(table)
}

pub fn stationary(settings: &Settings) -> CliResult<Table> {
    let params = settings.params()?;
    let scheme = settings.scheme()?;
    let dist = stationary_general(&params, &scheme)?;
    let mut table = Table::new(
        provenance(settings, "stationary", &[]),
        &["theta", "mass", "cumulative"],
    );
    for (rep, &running) in dist.cumulative().iter().enumerate() {
        table.push(vec![
            Value::Count(rep as u64),
            Value::Float(dist.mass(rep)),
            Value::Float(running),
        ]);
    }
    Ok(table)
}

pub fn simulate(settings: &Settings) -> CliResult<Table> {
    let params = settings.params()?;
    let norm = settings.norm()?;
    let (config, rollouts) = settings.simulation()?;
    let report = simulate_report(&norm, &params, &config, rollouts)?;

    let analytic_dist = stationary_general(&params, &norm.scheme)?;
    let analytic_values = long_term_values(&norm, &params)?;
    let analytic_welfare = social_welfare(&norm, &params)?;

    let mut table = Table::new(
        provenance(
            settings,
            "simulate",
            &[format!(
                "rng={} seed={} population={} horizon={} burn_in={} rollouts={rollouts}",
                report.rng_algorithm,
                config.seed,
                config.population,
                config.horizon,
                config.burn_in
            )],
        ),
        &["record", "theta", "empirical", "analytic", "std_error"],
    );
    for rep in 0..norm.scheme.reputation_count() {
        table.push(vec![
            Value::Text("reputation".into()),
            Value::Count(rep as u64),
            Value::Float(report.empirical_distribution.mass(rep)),
            Value::Float(analytic_dist.mass(rep)),
            Value::Empty,
        ]);
    }
    for (rep, estimate) in report.value_estimates.iter().enumerate() {
        table.push(vec![
            Value::Text("value".into()),
            Value::Count(rep as u64),
            Value::Float(estimate.mean),
            Value::Float(analytic_values.longterm[rep]),
            Value::Float(estimate.std_error),
        ]);
    }
    table.push(vec![
        Value::Text("welfare".into()),
        Value::Empty,
        Value::Float(report.empirical_welfare),
        Value::Float(analytic_welfare),
        Value::Float(report.welfare_std_error),
    ]);
    Ok(table)
}

pub fn sweep(settings: &Settings) -> CliResult<Table> {
    let base = settings.params()?;
    let spec = SweepSpec::from_settings(settings, &base)?;
    let mode = OptimizeMode::from_settings(settings)?;
    let fixed_norm = settings.get("strategy").is_some() && mode.is_none();

    let extra = vec![format!(
        "sweep variable={} points={}",
        spec.variable.name(),
        spec.grid.len()
    )];

    if fixed_norm {
        let norm = settings.norm()?;
        let rows: Vec<CliResult<Vec<Value>>> = spec
            .grid
            .par_iter()
            .map(|&value| {
                let params = spec.variable.apply(&base, value)?;
                let report = evaluate_norm(&norm, &params)?;
                Ok(evaluation_cells(&norm, &params, &report))
            })
            .collect();
        let mut table = Table::new(provenance(settings, "sweep", &extra), &EVALUATE_COLUMNS);
        for row in rows {
            table.push(row?);
        }
        return Ok(table);
    }

    let mode = mode.unwrap_or(OptimizeMode::Fixed);
    let scheme = settings.scheme()?;
    let l = scheme.max_reputation();
    let rows: Vec<CliResult<Vec<Value>>> = spec
        .grid
        .par_iter()
        .map(|&value| {
            let params = spec.variable.apply(&base, value)?;
            let solution = match mode {
                OptimizeMode::Fixed => solve_dp_fixed_l(&params, l)?,
                OptimizeMode::VariableM => solve_dp_variable_m(&params, l)?.best,
                OptimizeMode::Whitewash => {
                    let whitewash_cost = params
                        .whitewash_cost
                        .ok_or(normforge_core::Error::MissingWhitewashCost)?;
                    solve_dp_whitewash(&params, l, whitewash_cost)?.best
                }
            };
            Ok(solution_cells(&params, &solution, true))
        })
        .collect();
    let mut table = Table::new(
        provenance(
            settings,
            "sweep",
            &[extra[0].clone(), format!("mode={}", mode.name())],
        ),
        &OPTIMIZE_COLUMNS,
    );
    for row in rows {
        table.push(row?);
    }
    Ok(table)
}
