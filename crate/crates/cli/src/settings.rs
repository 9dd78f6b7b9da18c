//! Layered configuration: built-in defaults, a key-value config file, and
//! repeatable `--set key=value` overrides, in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use normforge_core::{
    catalog, CommunityParams, Error as CoreError, ReputationScheme, SimulationConfig, SocialNorm,
    SocialStrategy,
};

/// Error with the process exit code mandated for its class: 2 for
/// validation problems, 3 for infeasible or unsupported requests.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(error: CoreError) -> Self {
        let code = match error {
            CoreError::OutOfRange { .. }
            | CoreError::BenefitNotAboveCost
            | CoreError::DimensionMismatch { .. } => 2,
            CoreError::EnumerationTooLarge { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::RequiresMaxPunishment { .. }
            | CoreError::MissingWhitewashCost
            | CoreError::HypothesisViolated(_)
            | CoreError::SingularSystem
            | CoreError::HorizonTooShort { .. } => 3,
        };
        Self {
            code,
            message: error.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        Self::validation(format!("i/o error: {error}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flat dotted-key settings map.
#[derive(Debug)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

const DEFAULTS: &[(&str, &str)] = &[
    ("params.b", "10"),
    ("params.c", "1"),
    ("params.beta", "0.8"),
    ("params.alpha", "0.1"),
    ("params.eps", "0.2"),
    ("scheme.l", "1"),
    ("sim.population", "2000"),
    ("sim.horizon", "200"),
    ("sim.burn_in", "20"),
    ("sim.seed", "1"),
    ("sim.rollouts", "20000"),
    ("grid.points", "100"),
];

/// Every key the tool reads; anything else in a config or `--set` is a typo.
const KNOWN_KEYS: &[&str] = &[
    "params.b",
    "params.c",
    "params.beta",
    "params.alpha",
    "params.eps",
    "params.c_w",
    "scheme.l",
    "scheme.m",
    "scheme.k",
    "strategy",
    "sweep.variable",
    "sweep.grid",
    "optimize.mode",
    "sim.population",
    "sim.horizon",
    "sim.burn_in",
    "sim.seed",
    "sim.rollouts",
    "grid.points",
    "grid.cw_points",
];

fn check_key(key: &str) -> CliResult<()> {
    if KNOWN_KEYS.contains(&key) {
        return Ok(());
    }
    Err(CliError::validation(format!(
        "unknown setting {key}; known keys: {}",
        KNOWN_KEYS.join(", ")
    )))
}

impl Settings {
    pub fn load(config: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut map: BTreeMap<String, String> = DEFAULTS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)?;
            for (number, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::validation(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        number + 1
                    ))
                })?;
                let key = key.trim();
                check_key(key)?;
                map.insert(key.to_string(), value.trim().to_string());
            }
        }
        for entry in overrides {
            let (key, value) = entry.split_once('=').ok_or_else(|| {
                CliError::validation(format!("--set {entry}: expected KEY=VALUE"))
            })?;
            let key = key.trim();
            check_key(key)?;
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn float(&self, key: &str) -> CliResult<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::validation(format!("{key} = {raw}: not a number"))),
        }
    }

    fn required_float(&self, key: &str) -> CliResult<f64> {
        self.float(key)?
            .ok_or_else(|| CliError::validation(format!("missing setting {key}")))
    }

    fn integer(&self, key: &str) -> CliResult<Option<u64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::validation(format!("{key} = {raw}: not an integer"))),
        }
    }

    pub fn params(&self) -> CliResult<CommunityParams> {
        let params = CommunityParams::new(
            self.required_float("params.b")?,
            self.required_float("params.c")?,
            self.required_float("params.beta")?,
            self.required_float("params.alpha")?,
            self.required_float("params.eps")?,
        )?;
        match self.float("params.c_w")? {
            Some(cost) => Ok(params.with_whitewash_cost(cost)?),
            None => Ok(params),
        }
    }

    pub fn scheme(&self) -> CliResult<ReputationScheme> {
        let l = self
            .integer("scheme.l")?
            .ok_or_else(|| CliError::validation("missing setting scheme.l"))?
            as usize;
        let m = self.integer("scheme.m")?.map(|v| v as usize).unwrap_or(l);
        let k = self.integer("scheme.k")?.map(|v| v as usize).unwrap_or(l);
        Ok(ReputationScheme::new(l, m, k)?)
    }

    /// Strategy from the `strategy` key: a catalog name or an F/D matrix.
    pub fn strategy(&self, scheme: &ReputationScheme) -> CliResult<SocialStrategy> {
        let raw = self
            .get("strategy")
            .ok_or_else(|| CliError::validation("missing setting strategy"))?;
        let strategy = match catalog::by_name(raw, scheme.max_reputation()) {
            Some(named) => named,
            None => SocialStrategy::parse(raw).map_err(|error| {
                CliError::validation(format!(
                    "strategy = {raw}: not a known name ({}) or F/D matrix: {error}",
                    catalog::STRATEGY_NAMES.join(", ")
                ))
            })?,
        };
        Ok(strategy)
    }

    pub fn norm(&self) -> CliResult<SocialNorm> {
        let scheme = self.scheme()?;
        let strategy = self.strategy(&scheme)?;
        Ok(SocialNorm::new(scheme, strategy)?)
    }

    pub fn simulation(&self) -> CliResult<(SimulationConfig, usize)> {
        let config = SimulationConfig {
            population: self.integer("sim.population")?.unwrap_or(2000) as usize,
            horizon: self.integer("sim.horizon")?.unwrap_or(200) as usize,
            burn_in: self.integer("sim.burn_in")?.unwrap_or(20) as usize,
            seed: self.integer("sim.seed")?.unwrap_or(1),
        };
        config.validate()?;
        let rollouts = self.integer("sim.rollouts")?.unwrap_or(20_000) as usize;
        Ok((config, rollouts))
    }

    pub fn grid_points(&self) -> CliResult<usize> {
        let points = self.integer("grid.points")?.unwrap_or(100) as usize;
        if points < 2 {
            return Err(CliError::validation("grid.points must be at least 2"));
        }
        Ok(points)
    }

    /// Provenance fragment naming every parameter that shaped the run.
    pub fn provenance_params(&self) -> String {
        let mut parts = Vec::new();
        for key in [
            "params.b",
            "params.c",
            "params.beta",
            "params.alpha",
            "params.eps",
            "params.c_w",
            "scheme.l",
            "scheme.m",
            "scheme.k",
            "strategy",
        ] {
            if let Some(value) = self.get(key) {
                parts.push(format!("{key}={value}"));
            }
        }
        parts.join(" ")
    }
}

/// The variable a sweep walks over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Cost,
    Discount,
    Turnover,
    ReportError,
    WhitewashCost,
}

impl SweepVariable {
    pub fn parse(name: &str) -> CliResult<Self> {
        match name {
            "c" => Ok(Self::Cost),
            "beta" => Ok(Self::Discount),
            "alpha" => Ok(Self::Turnover),
            "eps" => Ok(Self::ReportError),
            "c_w" => Ok(Self::WhitewashCost),
            other => Err(CliError::validation(format!(
                "sweep.variable = {other}: expected one of c, beta, alpha, eps, c_w"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cost => "c",
            Self::Discount => "beta",
            Self::Turnover => "alpha",
            Self::ReportError => "eps",
            Self::WhitewashCost => "c_w",
        }
    }

    /// Applies one grid value on top of the base parameters.
    pub fn apply(&self, base: &CommunityParams, value: f64) -> CliResult<CommunityParams> {
        let mut params = match self {
            Self::Cost => CommunityParams::new(
                base.benefit,
                value,
                base.discount,
                base.turnover,
                base.report_error,
            )?,
            Self::Discount => CommunityParams::new(
                base.benefit,
                base.cost,
                value,
                base.turnover,
                base.report_error,
            )?,
            Self::Turnover => CommunityParams::new(
                base.benefit,
                base.cost,
                base.discount,
                value,
                base.report_error,
            )?,
            Self::ReportError => {
                CommunityParams::new(base.benefit, base.cost, base.discount, base.turnover, value)?
            }
            Self::WhitewashCost => return Ok(base.with_whitewash_cost(value)?),
        };
        params.whitewash_cost = base.whitewash_cost;
        Ok(params)
    }
}

/// A validated sweep request: the variable and a strictly increasing grid.
#[derive(Debug)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

impl SweepSpec {
    pub fn from_settings(settings: &Settings, base: &CommunityParams) -> CliResult<Self> {
        let variable = SweepVariable::parse(
            settings
                .get("sweep.variable")
                .ok_or_else(|| CliError::validation("missing setting sweep.variable"))?,
        )?;
        let raw = settings
            .get("sweep.grid")
            .ok_or_else(|| CliError::validation("missing setting sweep.grid"))?;
        let grid = parse_grid(raw)?;
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(CliError::validation(
                "sweep.grid must be strictly increasing",
            ));
        }
        for &value in &grid {
            variable.apply(base, value).map_err(|error| {
                CliError::validation(format!(
                    "sweep.grid value {value} invalid for {}: {}",
                    variable.name(),
                    error.message
                ))
            })?;
        }
        Ok(Self { variable, grid })
    }
}

/// Grid syntax: either `lo:hi:count` (inclusive, evenly spaced) or a comma
/// list of values.
pub fn parse_grid(raw: &str) -> CliResult<Vec<f64>> {
    let bad = |message: String| CliError::validation(format!("sweep.grid = {raw}: {message}"));
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected lo:hi:count".to_string()));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| bad("bad lower bound".to_string()))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad("bad upper bound".to_string()))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("bad point count".to_string()))?;
        if count < 2 || lo >= hi || !lo.is_finite() || !hi.is_finite() {
            return Err(bad("need lo < hi and at least 2 points".to_string()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        return Ok((0..count).map(|i| lo + step * i as f64).collect());
    }
    let values: Vec<f64> = raw
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("not a comma list of numbers".to_string()))?;
    if values.iter().any(|v| !v.is_finite()) || values.is_empty() {
        return Err(bad("values must be finite and non-empty".to_string()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_reference_parameters() {
        let settings = Settings::load(None, &[]).unwrap();
        let params = settings.params().unwrap();
        assert_eq!(params.benefit, 10.0);
        assert_eq!(params.cost, 1.0);
        let scheme = settings.scheme().unwrap();
        assert_eq!(scheme.max_reputation(), 1);
        assert!(scheme.is_max_punishment());
    }

    #[test]
    fn overrides_win_over_defaults() {
        let settings = Settings::load(None, &["params.c=2.5".into(), "scheme.l=3".into()]).unwrap();
        assert_eq!(settings.params().unwrap().cost, 2.5);
        assert_eq!(settings.scheme().unwrap().max_reputation(), 3);
        assert_eq!(settings.scheme().unwrap().punishment_length(), 3);
    }

    #[test]
    fn bad_sets_are_rejected() {
        assert!(Settings::load(None, &["params.c".into()]).is_err());
        let settings = Settings::load(None, &["params.c=abc".into()]).unwrap();
        assert_eq!(settings.params().unwrap_err().code, 2);
        let settings = Settings::load(None, &["params.eps=0.6".into()]).unwrap();
        assert_eq!(settings.params().unwrap_err().code, 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let error = Settings::load(None, &["params.bta=0.9".into()]).unwrap_err();
        assert_eq!(error.code, 2);
        assert!(error.message.contains("unknown setting params.bta"));
    }

    #[test]
    fn strategies_parse_by_name_or_matrix() {
        let settings = Settings::load(None, &["strategy=serve-nonzero".into()]).unwrap();
        let scheme = settings.scheme().unwrap();
        assert_eq!(
            settings.strategy(&scheme).unwrap(),
            catalog::serve_nonzero(1)
        );
        let settings = Settings::load(None, &["strategy=DF/FF".into()]).unwrap();
        assert_eq!(settings.strategy(&scheme).unwrap().matrix_string(), "DFFF");
    }

    #[test]
    fn grids_parse_both_syntaxes() {
        assert_eq!(parse_grid("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let linear = parse_grid("0:1:5").unwrap();
        assert_eq!(linear, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("3:1:5").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn sweep_grid_values_must_be_valid_for_their_variable() {
        let settings =
            Settings::load(None, &["sweep.variable=c".into(), "sweep.grid=5,15".into()]).unwrap();
        let base = settings.params().unwrap();
        assert_eq!(
            SweepSpec::from_settings(&settings, &base).unwrap_err().code,
            2
        );
    }

    #[test]
    fn exit_codes_match_error_classes() {
        let validation: CliError = CoreError::BenefitNotAboveCost.into();
        assert_eq!(validation.code, 2);
        let unsupported: CliError = CoreError::EnumerationTooLarge {
            max_reputation: 4,
            limit: 3,
        }
        .into();
        assert_eq!(unsupported.code, 3);
    }
}
