//! Reproducible figure datasets: each figure id writes one CSV per panel.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use normforge_core::{
    catalog, evaluate_norm, solve_dp_fixed_l, solve_dp_for_scheme, solve_dp_variable_m,
    solve_dp_whitewash, stationary_general, CommunityParams, NormEvaluator, ReputationScheme,
    SocialNorm,
};

use crate::commands::VERSION;
use crate::settings::{CliError, CliResult, Settings, SweepVariable};
use crate::table::{Format, Table, Value};

pub const FIGURE_IDS: [&str; 13] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12a",
    "fig12b", "fig12c",
];

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

fn cost_grid(settings: &Settings) -> CliResult<Vec<f64>> {
    Ok(linspace(0.1, 9.9, settings.grid_points()?))
}

fn provenance(settings: &Settings, figure: &str, detail: &str) -> Vec<String> {
    vec![
        format!("normforge {VERSION} figures {figure}"),
        settings.provenance_params(),
        detail.to_string(),
    ]
}

fn with_cost(base: &CommunityParams, cost: f64) -> CliResult<CommunityParams> {
    SweepVariable::Cost.apply(base, cost)
}

struct Panel {
    name: &'static str,
    table: Table,
}

fn candidate_performance(settings: &Settings) -> CliResult<Vec<Panel>> {
    // four two-label candidates: per-strategy incentive and welfare curves
    let base = settings.params()?;
    let ladder = catalog::two_reputation_ladder();
    let scheme = ReputationScheme::max_punishment(1)?;
    let grid = cost_grid(settings)?;
    let rows: Vec<CliResult<(Vec<Value>, Vec<Value>)>> = grid
        .par_iter()
        .map(|&cost| {
            let params = with_cost(&base, cost)?;
            let evaluator = NormEvaluator::new(&params, &scheme)?;
            let mut incentives = vec![Value::Float(cost)];
            let mut flags = Vec::new();
            let mut welfare_row = vec![Value::Float(cost)];
            let mut best: Option<(f64, usize)> = None;
            for (which, strategy) in ladder.iter().enumerate() {
                let a = evaluator.assess(strategy)?;
                incentives.push(Value::Float(a.cooperation_incentive));
                flags.push(Value::Bool(a.sustainable));
                welfare_row.push(Value::Float(a.welfare));
                if a.sustainable && best.is_none_or(|(w, _)| a.welfare > w) {
                    best = Some((a.welfare, which));
                }
            }
            let (best_welfare, best_index) = best.expect("all-decline is sustainable");
            incentives.extend(flags);
            welfare_row.extend([
                Value::Float(best_welfare),
                Value::Text(ladder[best_index].matrix_string()),
                Value::Text(ladder[best_index].canonical_index().to_string()),
            ]);
            Ok((incentives, welfare_row))
        })
        .collect();

    let mut incentive_table = Table::new(
        provenance(settings, "fig2", "panel=a two-label candidate incentives"),
        &[
            "c",
            "incentive_1",
            "incentive_2",
            "incentive_3",
            "incentive_4",
            "sustainable_1",
            "sustainable_2",
            "sustainable_3",
            "sustainable_4",
        ],
    );
    let mut welfare_table = Table::new(
        provenance(settings, "fig2", "panel=b two-label candidate welfare"),
        &[
            "c",
            "welfare_1",
            "welfare_2",
            "welfare_3",
            "welfare_4",
            "optimal_welfare",
            "optimal_strategy",
            "optimal_index",
        ],
    );
    for row in rows {
        let (incentives, welfare) = row?;
        incentive_table.push(incentives);
        welfare_table.push(welfare);
    }
    Ok(vec![
        Panel {
            name: "fig2a",
            table: incentive_table,
        },
        Panel {
            name: "fig2b",
            table: welfare_table,
        },
    ])
}

fn optimum_curve(settings: &Settings, figure: &'static str, l: usize) -> CliResult<Vec<Panel>> {
    let base = settings.params()?;
    let rows: Vec<CliResult<Vec<Value>>> = cost_grid(settings)?
        .par_iter()
        .map(|&cost| {
            let params = with_cost(&base, cost)?;
            let solution = solve_dp_fixed_l(&params, l)?;
            Ok(vec![
                Value::Float(cost),
                Value::Float(solution.welfare),
                Value::Text(solution.norm.strategy.matrix_string()),
                Value::Text(solution.norm.strategy.canonical_index().to_string()),
                Value::Float(solution.report.cooperation_incentive),
            ])
        })
        .collect();
    let mut table = Table::new(
        provenance(settings, figure, "optimal welfare and strategy"),
        &[
            "c",
            "optimal_welfare",
            "optimal_strategy",
            "optimal_index",
            "cooperation_incentive",
        ],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: figure,
        table,
    }])
}

fn stationary_by_length(settings: &Settings) -> CliResult<Vec<Panel>> {
    let params = settings.params()?;
    let l = 5usize;
    let mut masses = Table::new(
        provenance(
            settings,
            "fig4",
            "l=5 panel=a stationary mass by punishment length",
        ),
        &[
            "theta", "mass_m1", "mass_m2", "mass_m3", "mass_m4", "mass_m5",
        ],
    );
    let mut cumulatives = Table::new(
        provenance(
            settings,
            "fig4",
            "l=5 panel=b cumulative mass by punishment length",
        ),
        &[
            "theta",
            "cumulative_m1",
            "cumulative_m2",
            "cumulative_m3",
            "cumulative_m4",
            "cumulative_m5",
        ],
    );
    let mut all = Vec::new();
    for length in 1..=l {
        let scheme = ReputationScheme::new(l, length, l)?;
        all.push(stationary_general(&params, &scheme)?);
    }
    for rep in 0..=l {
        let mut mass_row = vec![Value::Count(rep as u64)];
        let mut cumulative_row = vec![Value::Count(rep as u64)];
        for dist in &all {
            mass_row.push(Value::Float(dist.mass(rep)));
            cumulative_row.push(Value::Float(dist.cumulative()[rep]));
        }
        masses.push(mass_row);
        cumulatives.push(cumulative_row);
    }
    Ok(vec![
        Panel {
            name: "fig4a",
            table: masses,
        },
        Panel {
            name: "fig4b",
            table: cumulatives,
        },
    ])
}

fn length_tradeoff(
    settings: &Settings,
    figure: &'static str,
    optimal: bool,
) -> CliResult<Vec<Panel>> {
    // serve-upward fixed (fig5) or the per-length optimum (fig6), L = 3
    let base = settings.params()?;
    let rows: Vec<CliResult<Vec<Value>>> = cost_grid(settings)?
        .par_iter()
        .map(|&cost| {
            let params = with_cost(&base, cost)?;
            let mut row = vec![Value::Float(cost)];
            let mut incentives = Vec::new();
            for length in 1..=3usize {
                let scheme = ReputationScheme::new(3, length, 3)?;
                let (welfare, incentive) = if optimal {
                    let solution = solve_dp_for_scheme(&params, &scheme, false)?;
                    (solution.welfare, solution.report.cooperation_incentive)
                } else {
                    let evaluator = NormEvaluator::new(&params, &scheme)?;
                    let a = evaluator.assess(&catalog::serve_upward(3))?;
                    (a.welfare, a.cooperation_incentive)
                };
                row.push(Value::Float(welfare));
                incentives.push(Value::Float(incentive));
            }
            row.extend(incentives);
            Ok(row)
        })
        .collect();
    let detail = if optimal {
        "l=3 optimal strategy per punishment length"
    } else {
        "l=3 serve-upward strategy per punishment length"
    };
    let mut table = Table::new(
        provenance(settings, figure, detail),
        &[
            "c",
            "welfare_m1",
            "welfare_m2",
            "welfare_m3",
            "incentive_m1",
            "incentive_m2",
            "incentive_m3",
        ],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: figure,
        table,
    }])
}

fn optimal_length(settings: &Settings) -> CliResult<Vec<Panel>> {
    let base = settings.params()?;
    let rows: Vec<CliResult<Vec<Value>>> = cost_grid(settings)?
        .par_iter()
        .map(|&cost| {
            let params = with_cost(&base, cost)?;
            let solution = solve_dp_variable_m(&params, 3)?;
            Ok(vec![
                Value::Float(cost),
                Value::Count(solution.best.norm.scheme.punishment_length() as u64),
                Value::Float(solution.best.welfare),
                Value::Text(solution.best.norm.strategy.matrix_string()),
                Value::Text(solution.best.norm.strategy.canonical_index().to_string()),
            ])
        })
        .collect();
    let mut table = Table::new(
        provenance(settings, "fig7", "l=3 welfare-maximal punishment length"),
        &[
            "c",
            "optimal_m",
            "optimal_welfare",
            "optimal_strategy",
            "optimal_index",
        ],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: "fig7",
        table,
    }])
}

fn entry_tradeoff(
    settings: &Settings,
    figure: &'static str,
    optimal: bool,
) -> CliResult<Vec<Panel>> {
    // welfare and whitewash incentive per entry reputation at c_w = 1, L = 3
    let base = settings.params()?;
    let whitewash_cost = base.whitewash_cost.unwrap_or(1.0);
    let rows: Vec<CliResult<Vec<Value>>> = cost_grid(settings)?
        .par_iter()
        .map(|&cost| {
            let params = with_cost(&base, cost)?.with_whitewash_cost(whitewash_cost)?;
            let mut welfare_cells = vec![Value::Float(cost)];
            let mut incentive_cells = Vec::new();
            for entry in 0..=3usize {
                let scheme = ReputationScheme::new(3, 3, entry)?;
                let (welfare, incentive) = if optimal {
                    let solution = solve_dp_for_scheme(&params, &scheme, true)?;
                    (
                        solution.welfare,
                        solution.report.whitewash_incentive.unwrap_or(0.0),
                    )
                } else {
                    let norm = SocialNorm::new(scheme, catalog::serve_upward(3))?;
                    let report = evaluate_norm(&norm, &params)?;
                    (
                        report.welfare,
                        report.incentives.whitewash_incentive.unwrap_or(0.0),
                    )
                };
                welfare_cells.push(Value::Float(welfare));
                incentive_cells.push(Value::Float(incentive));
            }
            welfare_cells.extend(incentive_cells);
            Ok(welfare_cells)
        })
        .collect();
    let detail = if optimal {
        format!("l=3 optimal strategy per entry reputation, whitewash cost {whitewash_cost}")
    } else {
        format!("l=3 serve-upward per entry reputation, whitewash cost {whitewash_cost}")
    };
    let mut table = Table::new(
        provenance(settings, figure, &detail),
        &[
            "c",
            "welfare_k0",
            "welfare_k1",
            "welfare_k2",
            "welfare_k3",
            "whitewash_incentive_k0",
            "whitewash_incentive_k1",
            "whitewash_incentive_k2",
            "whitewash_incentive_k3",
        ],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: figure,
        table,
    }])
}

fn optimal_entry(settings: &Settings) -> CliResult<Vec<Panel>> {
    let base = settings.params()?;
    let points: usize = settings
        .get("grid.cw_points")
        .unwrap_or("27")
        .parse()
        .map_err(|_| CliError::validation("grid.cw_points: not an integer"))?;
    if points < 2 {
        return Err(CliError::validation("grid.cw_points must be at least 2"));
    }
    let cw_grid = linspace(0.0, 26.0, points);
    let costs = [1.0, 2.0, 3.0];
    let rows: Vec<CliResult<Vec<Value>>> = cw_grid
        .par_iter()
        .map(|&cw| {
            let mut row = vec![Value::Float(cw)];
            for &cost in &costs {
                let params = with_cost(&base, cost)?;
                let solution = solve_dp_whitewash(&params, 3, cw)?;
                row.push(Value::Count(
                    solution.best.norm.scheme.entry_reputation() as u64
                ));
            }
            Ok(row)
        })
        .collect();
    let mut table = Table::new(
        provenance(
            settings,
            "fig10",
            "l=3 optimal entry reputation by whitewash cost",
        ),
        &["c_w", "kstar_c1", "kstar_c2", "kstar_c3"],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: "fig10",
        table,
    }])
}

fn optimum_versus_fixed(settings: &Settings) -> CliResult<Vec<Panel>> {
    let base = settings.params()?;
    let grid = cost_grid(settings)?;
    let mut panels = Vec::new();
    for (l, name) in [(1usize, "fig11a"), (2, "fig11b"), (3, "fig11c")] {
        let rows: Vec<CliResult<Vec<Value>>> = grid
            .par_iter()
            .map(|&cost| {
                let params = with_cost(&base, cost)?;
                let optimal = solve_dp_fixed_l(&params, l)?;
                let fixed_norm = SocialNorm::new(
                    ReputationScheme::max_punishment(l)?,
                    catalog::serve_upward(l),
                )?;
                let fixed = evaluate_norm(&fixed_norm, &params)?;
                let fixed_welfare = if fixed.incentives.sustainable {
                    fixed.welfare
                } else {
                    0.0
                };
                Ok(vec![
                    Value::Float(cost),
                    Value::Float(params.benefit - params.cost),
                    Value::Float(optimal.welfare),
                    Value::Float(fixed_welfare),
                    Value::Bool(fixed.incentives.sustainable),
                ])
            })
            .collect();
        let mut table = Table::new(
            provenance(
                settings,
                "fig11",
                &format!("panel l={l}: optimum vs serve-upward vs first-best"),
            ),
            &[
                "c",
                "first_best",
                "optimal_welfare",
                "fixed_welfare",
                "fixed_sustainable",
            ],
        );
        for row in rows {
            table.push(row?);
        }
        panels.push(Panel { name, table });
    }
    Ok(panels)
}

fn optimum_by_parameter(
    settings: &Settings,
    figure: &'static str,
    variable: SweepVariable,
    lo: f64,
    hi: f64,
) -> CliResult<Vec<Panel>> {
    let base = settings.params()?;
    let rows: Vec<CliResult<Vec<Value>>> = linspace(lo, hi, settings.grid_points()?)
        .par_iter()
        .map(|&value| {
            let params = variable.apply(&base, value)?;
            let mut row = vec![Value::Float(value)];
            for l in 1..=3usize {
                row.push(Value::Float(solve_dp_fixed_l(&params, l)?.welfare));
            }
            Ok(row)
        })
        .collect();
    let mut table = Table::new(
        provenance(
            settings,
            figure,
            &format!("optimal welfare by {}", variable.name()),
        ),
        &[variable.name(), "u1", "u2", "u3"],
    );
    for row in rows {
        table.push(row?);
    }
    Ok(vec![Panel {
        name: figure,
        table,
    }])
}

/// Builds and writes the datasets for one figure id; returns written paths.
pub fn run_figure(settings: &Settings, figure: &str, out_dir: &Path) -> CliResult<Vec<PathBuf>> {
    let panels = match figure {
        "fig2" => candidate_performance(settings)?,
        "fig3" => optimum_curve(settings, "fig3", 2)?,
        "fig4" => stationary_by_length(settings)?,
        "fig5" => length_tradeoff(settings, "fig5", false)?,
        "fig6" => length_tradeoff(settings, "fig6", true)?,
        "fig7" => optimal_length(settings)?,
        "fig8" => entry_tradeoff(settings, "fig8", false)?,
        "fig9" => entry_tradeoff(settings, "fig9", true)?,
        "fig10" => optimal_entry(settings)?,
        "fig11" => optimum_versus_fixed(settings)?,
        "fig12a" => optimum_by_parameter(settings, "fig12a", SweepVariable::Discount, 0.0, 0.98)?,
        "fig12b" => optimum_by_parameter(settings, "fig12b", SweepVariable::Turnover, 0.0, 1.0)?,
        "fig12c" => optimum_by_parameter(settings, "fig12c", SweepVariable::ReportError, 0.0, 0.5)?,
        other => {
            return Err(CliError::unsupported(format!(
                "unknown figure {other}; expected one of {}",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for panel in panels {
        let path = out_dir.join(format!("{}.csv", panel.name));
        panel.table.write(Some(&path), Format::Csv)?;
        written.push(path);
    }
    Ok(written)
}
