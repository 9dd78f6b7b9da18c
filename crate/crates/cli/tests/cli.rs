//! End-to-end tests that drive the `normforge` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use normforge_core::{
    catalog, evaluate_norm, social_welfare, stationary_closed_form, CommunityParams,
    ReputationScheme, SocialNorm,
};

fn normforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normforge"))
        .args(args)
        .env_remove("NORMFORGE_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).unwrap()
}

/// Data rows of a CSV document: everything after the header line.
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|line| !line.starts_with('#'))
        .skip(1)
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect()
}

fn defaults() -> CommunityParams {
    CommunityParams::new(10.0, 1.0, 0.8, 0.1, 0.2).unwrap()
}

#[test]
fn evaluate_all_decline_is_flat_and_sustainable() {
    let output = normforge(&["evaluate", "--set", "strategy=all-d", "--format", "json"]);
    let document: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let row = &document["rows"][0];
    assert_eq!(row["welfare"], serde_json::json!(0.0));
    assert_eq!(row["sustainable"], serde_json::json!(true));
    assert_eq!(row["strategy"], serde_json::json!("DDDD"));
}

#[test]
fn evaluate_all_fulfill_has_no_enforcement() {
    let output = normforge(&["evaluate", "--set", "strategy=all-f"]);
    let rows = data_rows(&stdout(&output));
    let sustainable = &rows[0][14];
    assert_eq!(sustainable, "false");
}

#[test]
fn evaluate_matches_the_library() {
    let output = normforge(&[
        "evaluate",
        "--set",
        "strategy=serve-upward",
        "--set",
        "scheme.l=3",
        "--set",
        "scheme.m=3",
    ]);
    let rows = data_rows(&stdout(&output));
    let welfare: f64 = rows[0][11].parse().unwrap();
    let norm = SocialNorm::new(
        ReputationScheme::max_punishment(3).unwrap(),
        catalog::serve_upward(3),
    )
    .unwrap();
    let report = evaluate_norm(&norm, &defaults()).unwrap();
    assert!((welfare - report.welfare).abs() < 1e-9);
}

#[test]
fn stationary_matches_the_closed_form() {
    let output = normforge(&["stationary", "--set", "scheme.l=2"]);
    let rows = data_rows(&stdout(&output));
    let closed = stationary_closed_form(&defaults(), 2);
    for (rep, row) in rows.iter().enumerate() {
        let mass: f64 = row[1].parse().unwrap();
        assert!((mass - closed.mass(rep)).abs() < 1e-10);
    }
}

#[test]
fn sweep_walks_the_two_label_ladder() {
    let output = normforge(&[
        "sweep",
        "--set",
        "sweep.variable=c",
        "--set",
        "sweep.grid=0.5,1,4,9",
        "--set",
        "scheme.l=1",
    ]);
    let rows = data_rows(&stdout(&output));
    let strategies: Vec<&str> = rows.iter().map(|row| row[9].as_str()).collect();
    assert_eq!(strategies, ["DFFF", "FFDF", "DFDF", "DDDD"]);
    let grid: Vec<&str> = rows.iter().map(|row| row[1].as_str()).collect();
    assert_eq!(grid, ["0.5", "1", "4", "9"]);
}

#[test]
fn sweep_rows_reevaluate_to_identical_values() {
    let output = normforge(&[
        "sweep",
        "--set",
        "sweep.variable=c",
        "--set",
        "sweep.grid=0.5,2.5",
        "--set",
        "strategy=serve-nonzero",
        "--set",
        "scheme.l=2",
    ]);
    let rows = data_rows(&stdout(&output));
    for row in rows {
        let cost: f64 = row[1].parse().unwrap();
        let welfare: f64 = row[11].parse().unwrap();
        let strategy = normforge_core::SocialStrategy::parse(&row[9]).unwrap();
        let params = CommunityParams::new(10.0, cost, 0.8, 0.1, 0.2).unwrap();
        let norm = SocialNorm::new(ReputationScheme::max_punishment(2).unwrap(), strategy).unwrap();
        let expected = social_welfare(&norm, &params).unwrap();
        assert!((welfare - expected).abs() < 1e-9, "row for cost {cost}");
    }
}

#[test]
fn optimizer_sweep_rows_round_trip_through_the_library() {
    let output = normforge(&[
        "sweep",
        "--set",
        "sweep.variable=c",
        "--set",
        "sweep.grid=0.5,1,3",
        "--set",
        "scheme.l=2",
        "--set",
        "optimize.mode=fixed",
    ]);
    for row in data_rows(&stdout(&output)) {
        let cost: f64 = row[1].parse().unwrap();
        let welfare: f64 = row[11].parse().unwrap();
        let strategy = normforge_core::SocialStrategy::parse(&row[9]).unwrap();
        let index: u128 = row[10].parse().unwrap();
        assert_eq!(strategy.canonical_index(), index);
        let params = CommunityParams::new(10.0, cost, 0.8, 0.1, 0.2).unwrap();
        let solution = normforge_core::solve_dp_fixed_l(&params, 2).unwrap();
        assert_eq!(solution.norm.strategy, strategy, "cost {cost}");
        assert!((solution.welfare - welfare).abs() < 1e-9);
    }
}

#[test]
fn optimize_variable_m_marks_the_selected_length() {
    let output = normforge(&["optimize", "--mode", "variable-m", "--set", "scheme.l=2"]);
    let rows = data_rows(&stdout(&output));
    assert_eq!(rows.len(), 2);
    let selected: Vec<&str> = rows.iter().map(|row| row[18].as_str()).collect();
    assert_eq!(selected.iter().filter(|s| **s == "true").count(), 1);
}

#[test]
fn optimize_whitewash_reports_entry_reputations() {
    let output = normforge(&[
        "optimize",
        "--mode",
        "whitewash",
        "--set",
        "scheme.l=1",
        "--set",
        "params.c_w=1",
    ]);
    let rows = data_rows(&stdout(&output));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[15], "true", "whitewash_proof column");
    }
}

#[test]
fn validation_and_infeasibility_exit_codes() {
    let bad_params = normforge(&[
        "evaluate",
        "--set",
        "params.eps=0.6",
        "--set",
        "strategy=all-d",
    ]);
    assert_eq!(bad_params.status.code(), Some(2));

    let too_large = normforge(&["optimize", "--set", "scheme.l=4"]);
    assert_eq!(too_large.status.code(), Some(3));

    let no_whitewash_cost = normforge(&["optimize", "--mode", "whitewash"]);
    assert_eq!(no_whitewash_cost.status.code(), Some(3));

    let unknown_figure = normforge(&["figures", "fig99"]);
    assert_eq!(unknown_figure.status.code(), Some(3));

    let bad_grid = normforge(&[
        "sweep",
        "--set",
        "sweep.variable=c",
        "--set",
        "sweep.grid=3,2",
    ]);
    assert_eq!(bad_grid.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides_compose() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("community.conf");
    fs::write(
        &config,
        "# community under study\nparams.c = 2\nscheme.l = 1\nstrategy = serve-nonzero\n",
    )
    .unwrap();
    let from_file = normforge(&["evaluate", "--config", config.to_str().unwrap()]);
    let rows = data_rows(&stdout(&from_file));
    assert_eq!(rows[0][1], "2");

    let overridden = normforge(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "params.c=3",
    ]);
    let rows = data_rows(&stdout(&overridden));
    assert_eq!(rows[0][1], "3");

    // figures read the same layered settings
    let dir2 = tempfile::tempdir().unwrap();
    let figures = normforge(&[
        "figures",
        "fig3",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "grid.points=4",
        "--out",
        dir2.path().to_str().unwrap(),
    ]);
    assert!(figures.status.success());
    let text = fs::read_to_string(dir2.path().join("fig3.csv")).unwrap();
    assert!(text.contains("params.c=2"));

    let unknown_key = fs::read_to_string(&config).unwrap() + "params.bogus = 1\n";
    fs::write(&config, unknown_key).unwrap();
    let rejected = normforge(&["evaluate", "--config", config.to_str().unwrap()]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn seed_flag_wins_over_set() {
    let output = normforge(&[
        "simulate",
        "--set",
        "strategy=all-d",
        "--set",
        "sim.population=10",
        "--set",
        "sim.horizon=6",
        "--set",
        "sim.burn_in=1",
        "--set",
        "sim.rollouts=10",
        "--set",
        "sim.seed=5",
        "--seed",
        "11",
    ]);
    assert!(stdout(&output).contains("seed=11"));
}

#[test]
fn json_output_covers_the_tabular_subcommands() {
    for args in [
        vec!["optimize", "--set", "scheme.l=1"],
        vec![
            "sweep",
            "--set",
            "sweep.variable=eps",
            "--set",
            "sweep.grid=0.1,0.3",
            "--set",
            "strategy=all-d",
        ],
        vec![
            "simulate",
            "--set",
            "strategy=all-d",
            "--set",
            "sim.population=10",
            "--set",
            "sim.horizon=6",
            "--set",
            "sim.burn_in=1",
            "--set",
            "sim.rollouts=10",
        ],
        vec!["stationary", "--set", "scheme.l=3", "--set", "scheme.m=2"],
    ] {
        let mut full = args.clone();
        full.extend(["--format", "json"]);
        let output = normforge(&full);
        let document: serde_json::Value =
            serde_json::from_str(&stdout(&output)).unwrap_or_else(|e| {
                panic!("bad json from {args:?}: {e}");
            });
        assert!(document["rows"].as_array().is_some_and(|r| !r.is_empty()));
        assert!(document["provenance"].as_array().is_some());
    }
}

#[test]
fn figure_datasets_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let first_dir = dir.path().join("a");
    let second_dir = dir.path().join("b");
    for out in [&first_dir, &second_dir] {
        let output = normforge(&[
            "figures",
            "fig2",
            "--set",
            "grid.points=7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    for panel in ["fig2a.csv", "fig2b.csv"] {
        let first = fs::read(first_dir.join(panel)).unwrap();
        let second = fs::read(second_dir.join(panel)).unwrap();
        assert_eq!(first, second, "{panel} differs between runs");
        let text = String::from_utf8(first).unwrap();
        assert!(
            text.starts_with("# normforge"),
            "{panel} missing provenance"
        );
        assert!(
            text.lines().any(|l| l.starts_with("c,")),
            "{panel} missing header"
        );
    }
}

#[test]
fn figure_fig11_reports_optimum_at_least_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let output = normforge(&[
        "figures",
        "fig11",
        "--set",
        "grid.points=5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(output.status.success());
    for panel in ["fig11a.csv", "fig11b.csv", "fig11c.csv"] {
        let text = fs::read_to_string(dir.path().join(panel)).unwrap();
        for row in data_rows(&text) {
            let first_best: f64 = row[1].parse().unwrap();
            let optimal: f64 = row[2].parse().unwrap();
            let fixed: f64 = row[3].parse().unwrap();
            assert!(
                optimal >= fixed - 1e-9,
                "{panel}: optimum beaten by the fixed norm"
            );
            assert!(optimal <= first_best + 1e-9);
        }
    }
}

#[test]
fn simulate_is_reproducible_for_one_seed() {
    let args = [
        "simulate",
        "--set",
        "strategy=serve-nonzero",
        "--set",
        "sim.population=100",
        "--set",
        "sim.horizon=30",
        "--set",
        "sim.burn_in=5",
        "--set",
        "sim.rollouts=500",
        "--seed",
        "11",
    ];
    let first = stdout(&normforge(&args));
    let second = stdout(&normforge(&args));
    assert_eq!(first, second);
    assert!(first.contains("rng=ChaCha12 seed=11"));

    let welfare_row = data_rows(&first)
        .into_iter()
        .find(|row| row[0] == "welfare")
        .unwrap();
    let analytic: f64 = welfare_row[3].parse().unwrap();
    assert!((analytic - 7.38).abs() < 1e-9);
}

#[test]
fn jobs_flag_and_environment_are_accepted() {
    let flagged = normforge(&["optimize", "--set", "scheme.l=1", "--jobs", "1"]);
    assert!(flagged.status.success());

    let from_env = Command::new(env!("CARGO_BIN_EXE_normforge"))
        .args(["optimize", "--set", "scheme.l=1"])
        .env("NORMFORGE_JOBS", "1")
        .output()
        .unwrap();
    assert!(from_env.status.success());

    let invalid = Command::new(env!("CARGO_BIN_EXE_normforge"))
        .args(["optimize", "--set", "scheme.l=1"])
        .env("NORMFORGE_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(invalid.status.code(), Some(2));
}

#[test]
fn output_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.json");
    let output = normforge(&[
        "evaluate",
        "--set",
        "strategy=all-d",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let document: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(document["rows"][0]["welfare"], serde_json::json!(0.0));
    assert!(Path::new(&path).exists());
}
