//! Command-line front end: configuration, the on-disk report format and the
//! `synthesize`, `construct` and `verify` commands.

pub mod config;
pub mod report;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hypercyclic::{enumerate_targets, synthesize, theorem_d_pipeline_with, theorem_s_pipeline, TargetSchedule};

pub use config::{ConfigOverrides, RunConfig};
pub use report::{Check, Report, ReportBody, Variant, VerificationOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Verification(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hypercyclic", version, about = "Exact synthesis and auditing of disjoint hypercyclic tuples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build vectors whose (λB)-orbits visit every scheduled target.
    Synthesize(RunArgs),
    /// Build a conjugated tuple R₁..Rₘ with a common disjoint hypercyclic vector.
    Construct {
        /// Use finite-rank similarities that also carry a dual functional.
        #[arg(long)]
        dual: bool,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Re-check a report produced by `synthesize` or `construct`.
    Verify {
        artifact: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Tuple size m (1..=8).
    #[arg(long)]
    pub m: Option<usize>,
    /// Weight λ of the backward shift, as "n" or "n/d".
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Number of targets to enumerate.
    #[arg(long)]
    pub targets: Option<usize>,
    /// Grid dimension d: targets live in span{e₀..e_(d−1)}.
    #[arg(long)]
    pub grid_dim: Option<usize>,
    /// Grid coordinate set, comma separated (e.g. "0,1/2,-1/2,1,-1").
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid_coords: Option<Vec<String>>,
    /// Tolerances become 2^(−(k+shift)).
    #[arg(long, allow_hyphen_values = true)]
    pub tolerance_shift: Option<i64>,
    /// Orbit horizon for verification.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Seed for randomised probe checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file whose values override the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<(ConfigOverrides, Option<ConfigOverrides>), CliError> {
        let flags = ConfigOverrides {
            m: self.m,
            lambda: self.lambda.clone(),
            grid_dim: self.grid_dim,
            grid_coords: self.grid_coords.clone(),
            targets: self.targets,
            tolerance_shift: self.tolerance_shift,
            horizon: self.horizon,
            seed: self.seed,
            out: self.out.clone(),
        };
        let file = self.config.as_deref().map(ConfigOverrides::from_toml_file).transpose()?;
        Ok((flags, file))
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let (flags, file) = self.overrides()?;
        RunConfig::resolve(flags, file)
    }
}

/// What a successful command produced.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    /// Human-readable summary, printed to stderr by the binary.
    pub summary: String,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

pub fn schedule_for(cfg: &RunConfig) -> Result<TargetSchedule, CliError> {
    let grid = cfg.grid()?;
    let schedule = enumerate_targets(&grid, cfg.target_count, cfg.m).map_err(|e| CliError::Config(e.to_string()))?;
    schedule.reshifted(cfg.tolerance_shift).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_synthesize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let schedule = schedule_for(cfg)?;
    let certificate = synthesize(&cfg.lambda, &schedule).map_err(|e| CliError::Config(e.to_string()))?;
    let checks = certificate.verify_post_hoc(&schedule).map_err(|e| CliError::Verification(e.to_string()))?;
    let passed = checks.iter().filter(|c| c.passed()).count();
    let summary = format!(
        "synthesized m={} over {} targets, horizon {}; post-hoc {}/{} visits pass\n",
        cfg.m,
        schedule.len(),
        certificate.horizon,
        passed,
        checks.len()
    );
    let report = Report::new(cfg.clone(), ReportBody::Synthesis { schedule, certificate, checks });
    Ok(Outcome { report, summary })
}

pub fn cmd_construct(cfg: &RunConfig, variant: Variant) -> Result<Outcome, CliError> {
    let schedule = schedule_for(cfg)?;
    let construction = match variant {
        Variant::Direct => theorem_d_pipeline_with(&cfg.lambda, cfg.m, &schedule),
        Variant::Dual => theorem_s_pipeline(&cfg.lambda, cfg.m, &schedule),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let summary = format!(
        "constructed {} tuple of arity {} over {} targets, certificate horizon {}\n",
        variant.as_str(),
        construction.artifact.arity(),
        construction.schedule.len(),
        construction.certificate.horizon
    );
    let report = Report::new(cfg.clone(), ReportBody::Construction { variant, construction: Box::new(construction) });
    Ok(Outcome { report, summary })
}

/// Loads a report and re-checks it. Flags given to `verify` override the
/// configuration stored in the report.
pub fn cmd_verify(path: &Path, args: &RunArgs) -> Result<Outcome, CliError> {
    let source = Report::read(path)?;
    let (flags, file) = args.overrides()?;
    let mut cfg = source.config.clone();
    flags.apply(&mut cfg)?;
    if let Some(file) = file {
        file.apply(&mut cfg)?;
    }
    cfg.validate()?;
    let outcome = verify::verify_report(&source, &cfg);
    let summary = outcome.summary();
    let report = Report::new(cfg, ReportBody::Verification(outcome));
    Ok(Outcome { report, summary })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Synthesize(args) => cmd_synthesize(&args.resolve()?),
        Command::Construct { dual, args } => {
            cmd_construct(&args.resolve()?, if *dual { Variant::Dual } else { Variant::Direct })
        }
        Command::Verify { artifact, args } => cmd_verify(artifact, args),
    }
}

/// Runs the command, writes the report, and returns the process exit code.
pub fn run(cli: &Cli, stderr: &mut dyn Write) -> i32 {
    let result = execute(cli).and_then(|outcome| {
        let out = match &cli.command {
            Command::Synthesize(a) | Command::Construct { args: a, .. } | Command::Verify { args: a, .. } => {
                outcome.report.config.output_path.clone().or_else(|| a.out.clone())
            }
        };
        match &out {
            Some(path) => outcome.report.write(path)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(outcome.report.to_json().as_bytes())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            }
        }
        let _ = stderr.write_all(outcome.summary.as_bytes());
        if outcome.passed() {
            Ok(())
        } else {
            Err(CliError::Verification("one or more checks failed".into()))
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
