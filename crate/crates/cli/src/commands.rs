//! One function per subcommand, each producing a table.

use std::time::Instant;

use rayon::prelude::*;
use serde_json::Value;
use spectral_lab::experiments::suite::{checks, SuiteContext};
use spectral_lab::experiments::{epsilon_sweep, logdet_experiment, SchrodingerSystem, VerificationReport};
use spectral_lab::hankel::{moment_table, MOMENT_COLUMNS};
use spectral_lab::scattering::{ScatteringRow, SCATTERING_COLUMNS};

use crate::config::{Command, RunConfig};
use crate::table::{Cell, Column, Kind, OutputTable};
use crate::CliError;

/// Result of one run.
#[derive(Debug)]
pub struct Outcome {
    pub table: OutputTable,
    /// False when any verification failed.
    pub all_pass: bool,
    /// One summary line per verification performed.
    pub lines: Vec<String>,
    /// Wall time per verification, in seconds. Kept out of the table so that
    /// tables stay reproducible.
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    fn table(table: OutputTable) -> Self {
        Self {
            table,
            all_pass: true,
            lines: Vec::new(),
            timings: Vec::new(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::GammaMoments => gamma_moments(cfg),
        Command::SchrodingerSweep => schrodinger_sweep(cfg),
        Command::ScatteringTable => scattering_table(cfg),
        Command::VerifySuite => verify_suite(cfg),
        Command::Logdet => logdet(cfg),
    }
}

/// Eigenpairs are needed up to `λ* + 2·max ε` plus a margin.
fn build_system(cfg: &RunConfig) -> Result<SchrodingerSystem, CliError> {
    let top = cfg.eps_list.iter().copied().fold(0.0, f64::max);
    Ok(SchrodingerSystem::build(
        cfg.system(),
        cfg.lambda_star + 2.0 * top + 0.2,
    )?)
}

fn gamma_moments(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut t = OutputTable::numeric(&MOMENT_COLUMNS);
    for row in moment_table(&cfg.eps_list, cfg.delta, &cfg.q_list, cfg.spacing)? {
        t.push_numbers(&row.values())?;
    }
    Ok(Outcome::table(t))
}

fn schrodinger_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = build_system(cfg)?;
    let series = epsilon_sweep(&sys, &cfg.f_list, &cfg.eps_list)?;
    let mut t = OutputTable::new(vec![
        Column::new("functional", Kind::Text),
        Column::new("eps", Kind::Number),
        Column::new("ln_eps_abs", Kind::Number),
        Column::new("value", Kind::Number),
        Column::new("slope", Kind::Number),
        Column::new("intercept", Kind::Number),
        Column::new("predicted_slope", Kind::Number),
    ]);
    for s in &series {
        for p in &s.points {
            t.push(vec![
                Cell::Text(s.functional.to_string()),
                Cell::Number(p.eps),
                Cell::Number(p.ln_eps_abs),
                Cell::Number(p.value),
                Cell::Number(s.slope()),
                Cell::Number(s.regression.intercept),
                Cell::Number(s.predicted_slope),
            ])?;
        }
    }
    Ok(Outcome::table(t))
}

fn scattering_table(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut t = OutputTable::numeric(&SCATTERING_COLUMNS);
    for lambda in cfg.energies.values() {
        t.push_numbers(&ScatteringRow::at(&cfg.potential, lambda)?.values())?;
    }
    Ok(Outcome::table(t))
}

fn report_columns() -> Vec<Column> {
    vec![
        Column::new("name", Kind::Text),
        Column::new("pass", Kind::Bool),
        Column::new("inputs_digest", Kind::Text),
        Column::new("inputs", Kind::Json),
        Column::new("measured", Kind::Json),
        Column::new("predicted", Kind::Json),
        Column::new("tolerance", Kind::Json),
        Column::new("notes", Kind::Json),
    ]
}

fn report_row(r: &VerificationReport) -> Vec<Cell> {
    vec![
        Cell::Text(r.name.clone()),
        Cell::Bool(r.pass),
        Cell::Text(r.inputs_digest.clone()),
        Cell::Json(r.inputs.clone()),
        Cell::Json(r.measured.clone()),
        Cell::Json(r.predicted.clone()),
        Cell::Json(r.tolerance.clone()),
        Cell::Json(Value::from(r.notes.clone())),
    ]
}

fn verify_suite(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = SuiteContext::new(cfg.seed, cfg.system(), cfg.eps_list.clone());
    let selected: Vec<_> = checks()
        .into_iter()
        .filter(|(name, _)| cfg.checks.is_empty() || cfg.checks.iter().any(|c| c == name))
        .collect();
    let results: Vec<_> = selected
        .par_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let r = check(&ctx);
            (name.to_string(), r, start.elapsed().as_secs_f64())
        })
        .collect();
    let mut out = Outcome::table(OutputTable::new(report_columns()));
    for (name, r, secs) in results {
        let r = r?;
        out.all_pass &= r.pass;
        out.lines.push(r.line());
        out.table.push(report_row(&r))?;
        out.timings.push((name, secs));
    }
    Ok(out)
}

fn logdet(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = build_system(cfg)?;
    let start = Instant::now();
    let r = logdet_experiment(&sys, &cfg.eps_list)?;
    let secs = start.elapsed().as_secs_f64();
    let number = |v: &Value| match v {
        Value::String(s) if s == "-inf" => f64::NEG_INFINITY,
        other => other.as_f64().unwrap_or(f64::NAN),
    };
    let slope = number(&r.measured["slope"]);
    let bound = number(&r.predicted["slope_bound"]);
    let mut t = OutputTable::numeric(&["eps", "logdet", "slope", "slope_bound"]);
    for p in r.measured["points"].as_array().into_iter().flatten() {
        t.push_numbers(&[number(&p["eps"]), number(&p["logdet"]), slope, bound])?;
    }
    Ok(Outcome {
        table: t,
        all_pass: r.pass,
        lines: vec![r.line()],
        timings: vec![(r.name.clone(), secs)],
    })
}
