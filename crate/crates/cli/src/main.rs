use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hobj::access::{validate_log, ModelSpec, QueryLog};
use hobj::bitcore::{make_systematic_code, verify_code_distance, SystematicCode};
use hobj::exact;
use hobj::lab::{self, ExperimentConfig, Family, RunOptions};
use hobj::metrics::{emd, variation};
use hobj::{Dist, TesterKind, TesterSpec};

#[derive(Parser)]
#[command(name = "hobj", version, about = "Huge object model property testing simulator")]
struct Cli {
    /// Default seed for commands that draw randomness.
    #[arg(long, global = true, env = "HOBJ_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hard instance: writes the distribution and its certificate.
    Gen {
        /// inv-yes, inv-no, sym-yes, sym-no, par-yes:K or par-no:K
        #[arg(long)]
        family: String,
        /// n for the Inv families, m for Sym and Par.
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: PathBuf,
        /// Certificate path; defaults to `<out>.cert.json`.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Run a tester once and write its query log.
    Run {
        #[arg(long)]
        tester: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        dist: PathBuf,
        /// Session model; the tester's own model by default.
        #[arg(long)]
        model: Option<String>,
        /// JSON lines query log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Estimate a tester's acceptance rate.
    Estimate {
        #[arg(long)]
        tester: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        model: Option<String>,
        /// Re-check each log with the offline validator.
        #[arg(long)]
        validate: bool,
    },
    /// Run an experiment grid from a JSON config.
    Experiment {
        config: PathBuf,
        /// Overrides the config's `out` directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact earth mover's distance between two distribution files.
    Emd { p: PathBuf, q: PathBuf },
    /// Print the systematic code `[m] → {0,1}^n`.
    Code {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Allow m < 10.
        #[arg(long)]
        relaxed: bool,
    },
    /// Check a query log against an access model.
    ValidateLog {
        log: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        n: usize,
    },
}

fn emit<T: Serialize>(format: Format, json: &impl Serialize, rows: &[T]) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, json)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<Dist> {
    Dist::load(path).with_context(|| format!("reading distribution {}", path.display()))
}

fn spec_for(tester: &str, epsilon: &str, dist: &Dist) -> Result<TesterSpec> {
    let kind: TesterKind = tester.parse()?;
    Ok(TesterSpec::new(kind, exact::parse(epsilon)?, dist.n())?)
}

fn parse_model(model: Option<&str>, spec: &TesterSpec) -> Result<ModelSpec> {
    Ok(match model {
        Some(m) => m.parse()?,
        None => spec.required_model(),
    })
}

#[derive(Serialize)]
struct GenRow {
    family: String,
    size: usize,
    n: usize,
    support: usize,
    certified_farness: String,
    warnings: String,
    dist: String,
    cert: String,
}

#[derive(Serialize)]
struct RunRow {
    tester: String,
    model: String,
    seed: u64,
    accept: bool,
    queries: usize,
    samples: usize,
    budget_samples: usize,
    budget_queries: usize,
    log: String,
}

#[derive(Serialize)]
struct EstimateRow {
    tester: String,
    model: String,
    seed: u64,
    trials: usize,
    accepts: usize,
    rate: f64,
    ci_low: f64,
    ci_high: f64,
    mean_queries: f64,
    mean_samples: f64,
    model_violations: usize,
}

#[derive(Serialize)]
struct PlanRow {
    from: String,
    to: String,
    mass: String,
}

#[derive(Serialize)]
struct EmdJson {
    distance: String,
    variation: String,
    plan: Vec<PlanRow>,
}

#[derive(Serialize)]
struct EmdRow {
    distance: String,
    variation: String,
    from: String,
    to: String,
    mass: String,
}

#[derive(Serialize)]
struct CodeJson {
    #[serde(flatten)]
    descriptor: hobj::bitcore::CodeDescriptor,
    min_distance: String,
}

#[derive(Serialize)]
struct CodeRow {
    key: usize,
    codeword: String,
}

#[derive(Serialize)]
struct ValidateRow {
    valid: bool,
    events: usize,
    index: Option<usize>,
    rule: Option<String>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let fmt = cli.format;
    match cli.command {
        Command::Gen { family, size, out, cert } => {
            let family: Family = family.parse()?;
            let inst = lab::generate(family, size, cli.seed)?;
            inst.dist.save(&out)?;
            let cert = cert.unwrap_or_else(|| out.with_extension("cert.json"));
            let summary = inst.summary();
            std::fs::write(&cert, serde_json::to_string_pretty(&summary)?)?;
            for w in &inst.warnings {
                eprintln!("warning: {w}");
            }
            let row = GenRow {
                family: summary.family.clone(),
                size,
                n: summary.n,
                support: summary.support,
                certified_farness: summary.certified_farness.clone().unwrap_or_default(),
                warnings: summary.warnings.join("; "),
                dist: out.display().to_string(),
                cert: cert.display().to_string(),
            };
            emit(fmt, &row, &[&row])?;
        }
        Command::Run { tester, epsilon, dist, model, log } => {
            let d = load(&dist)?;
            let spec = spec_for(&tester, &epsilon, &d)?;
            let model = parse_model(model.as_deref(), &spec)?;
            let (verdict, qlog) = spec.build()?.run_as(&d, model, cli.seed)?;
            if let Some(path) = &log {
                qlog.write_jsonl(std::fs::File::create(path)?)?;
            }
            let budget = spec.budget();
            let row = RunRow {
                tester: spec.kind.to_string(),
                model: model.to_string(),
                seed: cli.seed,
                accept: verdict.accept,
                queries: verdict.queries,
                samples: verdict.samples,
                budget_samples: budget.samples,
                budget_queries: budget.queries,
                log: log.map(|p| p.display().to_string()).unwrap_or_default(),
            };
            emit(fmt, &row, &[&row])?;
        }
        Command::Estimate { tester, epsilon, dist, trials, model, validate } => {
            let d = load(&dist)?;
            let spec = spec_for(&tester, &epsilon, &d)?;
            let model = parse_model(model.as_deref(), &spec)?;
            let opts = RunOptions { model: Some(model), validate_logs: validate };
            let e = lab::estimate_with(&spec.build()?, &d, trials, cli.seed, opts)?;
            let row = EstimateRow {
                tester: spec.kind.to_string(),
                model: model.to_string(),
                seed: cli.seed,
                trials: e.trials,
                accepts: e.accepts,
                rate: e.rate,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                mean_queries: e.mean_queries,
                mean_samples: e.mean_samples,
                model_violations: e.model_violations,
            };
            emit(fmt, &row, &[&row])?;
        }
        Command::Experiment { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let rows = lab::run_experiment(&cfg)?;
            if let Some(dir) = out.or(cfg.out.clone()) {
                let (c, j) = lab::write_reports(&rows, &dir)?;
                eprintln!("wrote {} and {}", c.display(), j.display());
            }
            emit(fmt, &rows, &rows)?;
            if rows.iter().any(|r| r.model_violations > 0) {
                eprintln!("note: some rows report model violations");
            }
        }
        Command::Emd { p, q } => {
            let (p, q) = (load(&p)?, load(&q)?);
            let (d, plan) = emd(&p, &q)?;
            let var = variation(&p, &q)?;
            let plan: Vec<PlanRow> = plan
                .entries
                .iter()
                .map(|(i, j, w)| PlanRow {
                    from: p.support()[*i].0.to_string(),
                    to: q.support()[*j].0.to_string(),
                    mass: exact::format(w),
                })
                .collect();
            let rows: Vec<EmdRow> = plan
                .iter()
                .map(|r| EmdRow {
                    distance: exact::format(&d),
                    variation: exact::format(&var),
                    from: r.from.clone(),
                    to: r.to.clone(),
                    mass: r.mass.clone(),
                })
                .collect();
            emit(fmt, &EmdJson { distance: exact::format(&d), variation: exact::format(&var), plan }, &rows)?;
        }
        Command::Code { m, n, relaxed } => {
            let code = if relaxed { SystematicCode::relaxed(m, n)? } else { make_systematic_code(m, n)? };
            let descriptor = code.descriptor();
            let rows: Vec<CodeRow> =
                descriptor.codewords.iter().enumerate().map(|(a, c)| CodeRow { key: a + 1, codeword: c.clone() }).collect();
            let json = CodeJson { descriptor, min_distance: exact::format(&verify_code_distance(&code)) };
            emit(fmt, &json, &rows)?;
        }
        Command::ValidateLog { log, model, samples, n } => {
            let model: ModelSpec = model.parse()?;
            let file = std::fs::File::open(&log).with_context(|| format!("reading {}", log.display()))?;
            let qlog = QueryLog::read_jsonl(io::BufReader::new(file))?;
            let result = validate_log(model, &qlog, samples, n);
            let row = ValidateRow {
                valid: result.is_ok(),
                events: qlog.len(),
                index: result.err().map(|v| v.index),
                rule: result.err().map(|v| v.rule.to_string()),
            };
            emit(fmt, &row, &[&row])?;
            if !row.valid {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn model_defaults_to_tester_model() {
        let d = Dist::point(hobj::BitString::zeros(4).to_sym());
        let spec = spec_for("all-zero", "1/2", &d).unwrap();
        assert_eq!(parse_model(None, &spec).unwrap(), spec.required_model());
        assert_eq!(parse_model(Some("forward-only"), &spec).unwrap(), ModelSpec::ForwardOnly);
    }
}
