use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use behavrank::error::{Error, Result};
use behavrank::pipeline::artifacts::{factors_path, read_factors, weights_path, write_json};
use behavrank::pipeline::fitting::{fit_factor_artifact, fit_weight_artifact};
use behavrank::pipeline::{ingest, render_table, run, synth, MatchLog, Report, RunConfig, SchemaName, SynthConfig};

#[derive(Parser)]
#[command(name = "behavrank", version, about = "Behavioral player ratings and rating-system replay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a dataset CSV into a canonical match log.
    Ingest {
        #[arg(long)]
        schema: String,
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a synthetic head-to-head match log.
    Synth {
        /// Run config with a `synth` section, or a bare generator config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fit a factor or weight model on a match log.
    Fit {
        #[arg(value_enum)]
        what: FitTarget,
        #[arg(long)]
        log: PathBuf,
        /// Penalty grid, folds and factor settings are read from this run config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Factor model for a weight fit; defaults to factors.json in the artifact directory.
        #[arg(long)]
        factors: Option<PathBuf>,
        #[arg(long, env = "BEHAVRANK_ARTIFACTS")]
        artifacts: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Replay a match log and write the evaluation report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Directory holding factors.json / weights.json; fitted models are written here.
        #[arg(long, env = "BEHAVRANK_ARTIFACTS")]
        artifacts: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print a report as a table or as JSON.
    Report {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        report: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitTarget {
    Factors,
    Weights,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Machine,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_synth_config(path: Option<&Path>) -> Result<SynthConfig> {
    let Some(path) = path else {
        return Ok(SynthConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("schema").is_some() {
        let cfg: RunConfig = serde_json::from_value(value)?;
        Ok(cfg.synth.unwrap_or_default())
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { schema, input, output } => {
            let schema: SchemaName = schema.parse()?;
            let log = ingest(&input, schema)?;
            log.save(&output)?;
            log::info!("wrote {} matches to {}", log.matches.len(), output.display());
        }
        Command::Synth { config, output } => {
            let cfg = load_synth_config(config.as_deref())?;
            synth(&cfg)?.log.save(&output)?;
        }
        Command::Fit {
            what,
            log,
            config,
            factors,
            artifacts,
            output,
        } => {
            let log = MatchLog::load(&log)?;
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::new(log.schema),
            };
            let catalog = log.schema.schema().catalog();
            match what {
                FitTarget::Factors => {
                    let art = fit_factor_artifact(&log, &catalog, &cfg.fit)?;
                    write_json(&output, &art)?;
                }
                FitTarget::Weights => {
                    let factor_file = factors
                        .or_else(|| artifacts.as_deref().map(factors_path))
                        .or_else(|| output.parent().map(factors_path))
                        .ok_or_else(|| Error::InvalidInput("no factor model given".into()))?;
                    let factor_model = read_factors(&factor_file)?;
                    let art = fit_weight_artifact(&log, &catalog, &factor_model.model, &cfg.replay(), &cfg.fit)?;
                    write_json(&output, &art)?;
                }
            }
        }
        Command::Run {
            config,
            log,
            artifacts,
            output,
        } => {
            let cfg = RunConfig::load(&config).map_err(|e| e.in_stage("config"))?;
            let log = MatchLog::load(&log).map_err(|e| e.in_stage("log"))?;
            let out = run(&cfg, &log, artifacts.as_deref())?;
            if let Some((factors, weights)) = &out.fitted {
                match &artifacts {
                    Some(dir) => {
                        write_json(&factors_path(dir), factors)?;
                        write_json(&weights_path(dir), weights)?;
                    }
                    None => log::warn!("fitted models not saved: no artifact directory"),
                }
            }
            write_text(&output, &out.report.to_json())?;
        }
        Command::Report { format, report } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Error::io(&report, e))?;
            let parsed: Report = serde_json::from_str(&text)?;
            let rendered = match format {
                Format::Table => render_table(&parsed),
                Format::Machine => parsed.to_json(),
            };
            std::io::stdout()
                .write_all(rendered.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
