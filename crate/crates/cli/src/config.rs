//! Run configuration: a TOML file, defaults, and flag overrides.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spectral_lab::experiments::suite::{checks, GAMMA_EPS, GAMMA_SPACING, SCHRODINGER_EPS};
use spectral_lab::experiments::{Functional, SystemConfig};
use spectral_lab::schrodinger::{Grid1D, Potential};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GammaMoments,
    SchrodingerSweep,
    ScatteringTable,
    VerifySuite,
    Logdet,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GammaMoments => "gamma-moments",
            Command::SchrodingerSweep => "schrodinger-sweep",
            Command::ScatteringTable => "scattering-table",
            Command::VerifySuite => "verify-suite",
            Command::Logdet => "logdet",
        }
    }

    fn default_eps(self) -> Vec<f64> {
        match self {
            Command::GammaMoments => GAMMA_EPS.to_vec(),
            _ => SCHRODINGER_EPS.to_vec(),
        }
    }
}

/// Energies `min..=max` sampled at `count` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl EnergyRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Fully resolved configuration. Its TOML form is echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub lambda_star: f64,
    pub eps_list: Vec<f64>,
    pub delta: f64,
    pub f_list: Vec<Functional>,
    pub q_list: Vec<f64>,
    pub spacing: f64,
    pub seed: u64,
    /// Subset of verification checks to run; empty means all.
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub grid: Grid1D,
    pub potential: Potential,
    pub energies: EnergyRange,
}

/// Values given on the command line; each one replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_path: Option<String>,
    pub eps_list: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub lambda_star: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawConfig {
    command: Option<Command>,
    lambda_star: Option<f64>,
    eps_list: Option<Vec<f64>>,
    delta: Option<f64>,
    f_list: Option<Vec<Functional>>,
    q_list: Option<Vec<f64>>,
    spacing: Option<f64>,
    seed: Option<u64>,
    checks: Option<Vec<String>>,
    output_path: Option<String>,
    grid: Option<Grid1D>,
    potential: Option<Potential>,
    energies: Option<EnergyRange>,
}

const TOP_KEYS: [&str; 13] = [
    "command",
    "lambda_star",
    "eps_list",
    "delta",
    "f_list",
    "q_list",
    "spacing",
    "seed",
    "checks",
    "output_path",
    "grid",
    "potential",
    "energies",
];

fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    let mut nested = |prefix: &str, value: Option<&toml::Value>, allowed: &[&str]| {
        if let Some(toml::Value::Table(t)) = value {
            out.extend(
                t.keys()
                    .filter(|k| !allowed.contains(&k.as_str()))
                    .map(|k| format!("{prefix}.{k}")),
            );
        }
    };
    nested("grid", table.get("grid"), &["half_length", "n_points"]);
    nested("energies", table.get("energies"), &["min", "max", "count"]);
    let potential_keys: &[&str] = match table
        .get("potential")
        .and_then(|p| p.get("kind"))
        .and_then(|k| k.as_str())
    {
        Some("square_well") => &["kind", "depth", "half_width"],
        Some("gaussian") => &["kind", "amplitude", "width"],
        _ => &["kind"],
    };
    nested("potential", table.get("potential"), potential_keys);
    out.extend(table.keys().filter(|k| !TOP_KEYS.contains(&k.as_str())).cloned());
    out.sort();
    out
}

fn field(name: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {detail}"))
}

/// Parse TOML text, fill defaults for `command`, then apply overrides.
pub fn parse_config_str(text: &str, command: Command, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("invalid TOML: {e}")))?;
    let unknown = unknown_keys(&table);
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown config keys: {}", unknown.join(", "))));
    }
    let raw: RawConfig = table.try_into().map_err(|e| CliError::Config(format!("{e}")))?;
    let reference = SystemConfig::reference();
    let cfg = RunConfig {
        command,
        lambda_star: overrides
            .lambda_star
            .or(raw.lambda_star)
            .unwrap_or(reference.lambda_star),
        eps_list: overrides
            .eps_list
            .clone()
            .or(raw.eps_list)
            .unwrap_or_else(|| command.default_eps()),
        delta: overrides.delta.or(raw.delta).unwrap_or(1.0),
        f_list: raw
            .f_list
            .unwrap_or_else(|| vec![Functional::Power(1.0), Functional::Power(2.0)]),
        q_list: raw.q_list.unwrap_or_else(|| vec![1.0, 2.0, 3.0]),
        spacing: raw.spacing.unwrap_or(GAMMA_SPACING),
        seed: overrides.seed.or(raw.seed).unwrap_or(0),
        checks: raw.checks.unwrap_or_default(),
        output_path: overrides.output_path.clone().or(raw.output_path),
        grid: raw.grid.unwrap_or(reference.grid),
        potential: raw.potential.unwrap_or(reference.potential),
        energies: raw.energies.unwrap_or(EnergyRange {
            min: 0.2,
            max: 5.0,
            count: 50,
        }),
    };
    // A `command` key in the file is accepted but the subcommand wins.
    let _ = raw.command;
    validate(cfg)
}

/// Read `path` (or start from an empty file) and resolve.
pub fn parse_config(path: Option<&Path>, command: Command, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            source: e,
        })?,
        None => String::new(),
    };
    parse_config_str(&text, command, overrides)
}

fn validate(cfg: RunConfig) -> Result<RunConfig, CliError> {
    if cfg.eps_list.is_empty() {
        return Err(field("eps_list", "must not be empty"));
    }
    if cfg.eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(field("eps_list", "values must be positive and finite"));
    }
    if cfg.eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(field("eps_list", "values must be strictly decreasing"));
    }
    if !(cfg.delta > 0.0) {
        return Err(field("delta", format!("must be positive, got {}", cfg.delta)));
    }
    if cfg.command == Command::GammaMoments && cfg.eps_list[0] > cfg.delta {
        return Err(field("eps_list", "values must not exceed delta"));
    }
    if !(cfg.lambda_star > 0.0 && cfg.lambda_star.is_finite()) {
        return Err(field(
            "lambda_star",
            format!("must be positive, got {}", cfg.lambda_star),
        ));
    }
    if cfg.f_list.is_empty() {
        return Err(field("f_list", "must not be empty"));
    }
    if cfg.q_list.is_empty() || cfg.q_list.iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
        return Err(field("q_list", "needs at least one finite value >= 1"));
    }
    if !(cfg.spacing > 0.0 && cfg.spacing <= 0.05) {
        return Err(field("spacing", format!("must lie in (0, 0.05], got {}", cfg.spacing)));
    }
    let known: Vec<&str> = checks().into_iter().map(|(n, _)| n).collect();
    if let Some(bad) = cfg.checks.iter().find(|c| !known.contains(&c.as_str())) {
        return Err(field(
            "checks",
            format!("unknown check '{bad}' (known: {})", known.join(", ")),
        ));
    }
    Grid1D::new(cfg.grid.half_length, cfg.grid.n_points).map_err(|e| field("grid", e))?;
    cfg.potential.validate().map_err(|e| field("potential", e))?;
    let en = cfg.energies;
    if !(en.min > 0.0 && en.max >= en.min && en.max.is_finite() && en.count >= 1) {
        return Err(field("energies", "need 0 < min <= max and count >= 1"));
    }
    Ok(cfg)
}

impl RunConfig {
    /// TOML echo; parsing it back yields the same configuration.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            grid: self.grid,
            potential: self.potential,
            lambda_star: self.lambda_star,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let cfg = parse_config_str("", Command::GammaMoments, &Overrides::default()).unwrap();
        assert_eq!(cfg.delta, 1.0);
        assert_eq!(cfg.eps_list, vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]);
        let sweep = parse_config_str("", Command::SchrodingerSweep, &Overrides::default()).unwrap();
        assert_eq!(sweep.eps_list.len(), 7);
        assert_eq!(sweep.grid.n_points, 6000);
    }

    #[test]
    fn increasing_eps_is_rejected_by_name() {
        let err =
            parse_config_str("eps_list = [1e-4, 1e-3]", Command::GammaMoments, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("eps_list"), "{err}");
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let text = "bogus = 1\n[grid]\nhalf_length = 10.0\nn_points = 100\nwidth = 3\n[potential]\nkind = \"zero\"\ndepth = 1.0\n";
        let err = parse_config_str(text, Command::Logdet, &Overrides::default())
            .unwrap_err()
            .to_string();
        for k in ["bogus", "grid.width", "potential.depth"] {
            assert!(err.contains(k), "{err}");
        }
    }

    #[test]
    fn flags_win_over_file() {
        let o = Overrides {
            seed: Some(9),
            delta: Some(2.0),
            ..Overrides::default()
        };
        let cfg = parse_config_str("seed = 3\ndelta = 0.5", Command::GammaMoments, &o).unwrap();
        assert_eq!((cfg.seed, cfg.delta), (9, 2.0));
    }

    #[test]
    fn subcommand_wins_over_file_command() {
        let cfg = parse_config_str("command = \"logdet\"", Command::ScatteringTable, &Overrides::default()).unwrap();
        assert_eq!(cfg.command, Command::ScatteringTable);
    }

    #[test]
    fn full_sweep_config_round_trips() {
        let text = r#"
lambda_star = 1.5
eps_list = [0.3, 0.2, 0.1, 0.05]
delta = 0.75
f_list = ["t^1", "t^2.5", "indicator(0.1,0.4)", "log1m"]
q_list = [1.0, 2.0]
spacing = 0.01
seed = 42
output_path = "out.csv"

[grid]
half_length = 150.0
n_points = 3001

[potential]
kind = "gaussian"
amplitude = -1.25
width = 0.7

[energies]
min = 0.5
max = 3.0
count = 11
"#;
        let cfg = parse_config_str(text, Command::SchrodingerSweep, &Overrides::default()).unwrap();
        let echo = cfg.echo();
        let again = parse_config_str(&echo, Command::SchrodingerSweep, &Overrides::default()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.echo(), echo);
    }
}
