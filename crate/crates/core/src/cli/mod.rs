//! Command-line front end.

pub mod checkpoint;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;

pub use config::{
    family_bremner, family_congruent, family_triangle, parse_torsion_list, CurveSource, Family, OutputFormat,
    RunConfig, SearchKey,
};
pub use report::{Report, Timing, REPORT_VERSION};

use crate::arith::Factorizer;
use crate::descent::{variants_for, Descent, DescentOptions, Frontier, Mode, Resume, Status};
use crate::error::{Error, Result};
use crate::search::{Engine, SearchBounds};

pub const EXIT_FOUND: u8 = 0;
pub const EXIT_EXHAUSTED: u8 = 10;
pub const EXIT_INTERRUPTED: u8 = 11;
pub const EXIT_CONFIG: u8 = 64;
pub const EXIT_TORSION: u8 = 65;
pub const EXIT_CHECKPOINT: u8 = 66;
pub const EXIT_INTERNAL: u8 = 70;

/// Search for a rational point of infinite order on y^2 = x^3 + a x^2 + b x
/// by explicit 4-descent and 8-descent.
#[derive(Debug, Parser)]
#[command(name = "ecdescent", version)]
pub struct Args {
    /// Coefficient a (use with --b).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Coefficient b (use with --a).
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// congruent:N | bremner:n | triangle:n
    #[arg(long, conflicts_with_all = ["a", "b"])]
    pub family: Option<String>,
    /// four | eight | auto
    #[arg(long, default_value = "eight")]
    pub mode: String,
    /// First conic bands, A:B.
    #[arg(long, default_value = "2:200")]
    pub s1: String,
    /// Last band for the k0 equation.
    #[arg(long, default_value_t = 99)]
    pub s2b: u64,
    /// Last band for first quartics and the k1 equation.
    #[arg(long, default_value_t = 99)]
    pub s3b: u64,
    /// Last band for second quartics.
    #[arg(long, default_value_t = 199)]
    pub s4b: u64,
    /// Known torsion x-coordinates, comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub torsion_x: Option<String>,
    /// Only try this squarefree divisor d of b.
    #[arg(long, allow_hyphen_values = true)]
    pub force_d: Option<String>,
    /// Search the 2-isogenous curve y^2 = x^3 - 2a x^2 + (a^2 - 4b) x.
    #[arg(long)]
    pub use_isogenous: bool,
    /// Also search the models with the other 2-torsion points moved to the origin.
    #[arg(long)]
    pub isogeny_variants: bool,
    /// Primes to divide out before trial division, comma-separated.
    #[arg(long)]
    pub factor_hint: Option<String>,
    /// Checkpoint file, rewritten every few seconds.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Continue from --checkpoint.
    #[arg(long)]
    pub resume: bool,
    /// Worker threads [default: available cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// text | structured
    #[arg(long, default_value = "text")]
    pub output: String,
    /// Stop after this many quartic searches, leaving a checkpoint.
    #[arg(long)]
    pub max_units: Option<u64>,
}

impl Args {
    pub fn to_config(&self) -> Result<RunConfig> {
        let source = match (&self.family, &self.a, &self.b) {
            (Some(f), None, None) => CurveSource::Family(f.parse()?),
            (None, Some(a), Some(b)) => CurveSource::Raw {
                a: config::parse_int(a, "--a")?,
                b: config::parse_int(b, "--b")?,
            },
            (None, _, _) => return Err(Error::Config("give either --a and --b, or --family".into())),
            _ => return Err(Error::Config("--family cannot be combined with --a/--b".into())),
        };
        let (s1a, s1b) = config::parse_s1(&self.s1)?;
        let mut cfg = RunConfig::new(source);
        cfg.bounds = SearchBounds::new(s1a, s1b, self.s2b, self.s3b, self.s4b)?;
        cfg.mode = self.mode.parse::<Mode>()?;
        if let Some(t) = &self.torsion_x {
            cfg.torsion_x = parse_torsion_list(t)?;
        }
        cfg.forced_d = self.force_d.as_deref().map(|d| config::parse_int(d, "--force-d")).transpose()?;
        cfg.use_isogenous = self.use_isogenous;
        cfg.isogeny_variants = self.isogeny_variants;
        if let Some(h) = &self.factor_hint {
            cfg.factor_hints = config::parse_factor_hints(h)?;
        }
        cfg.checkpoint = self.checkpoint.clone();
        cfg.resume = self.resume;
        cfg.workers = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        cfg.output = self.output.parse()?;
        cfg.max_units = self.max_units;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A finished run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub timing: Timing,
}

impl RunOutput {
    pub fn exit_code(&self) -> u8 {
        match self.report.status {
            Status::Found => EXIT_FOUND,
            Status::Exhausted => EXIT_EXHAUSTED,
            Status::Interrupted => EXIT_INTERRUPTED,
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        Ok(match format {
            OutputFormat::Structured => format!(
                "{}\n{}\n",
                self.report.to_json_line()?,
                serde_json::to_string(&self.timing)?
            ),
            OutputFormat::Text => format!(
                "{}wall_seconds: {:.3}\nworkers: {}\n",
                self.report.to_text()?,
                self.timing.wall_seconds,
                self.timing.workers
            ),
        })
    }
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let target = config.source.curve()?;
    let key = config.key();
    let resume = match (&config.checkpoint, config.resume) {
        (Some(path), true) => Some(checkpoint::Checkpoint::load_for(path, &key)?.state),
        _ => None,
    };
    let opts = DescentOptions {
        bounds: config.bounds,
        mode: config.mode,
        forced_d: config.forced_d.clone(),
        max_units: config.max_units,
    };
    let engine = Engine::new(config.workers)?;
    let factorizer = Factorizer::default().with_hints(config.factor_hints.iter().cloned());
    let variants = variants_for(&target, config.use_isogenous, config.isogeny_variants);
    let descent = Descent::new(&target, variants, &config.torsion_x, &opts, &engine, &factorizer)?;

    let mut writer = config
        .checkpoint
        .as_ref()
        .map(|p| checkpoint::Writer::new(p.clone(), key.clone(), Duration::from_secs(5)));
    let mut latest = resume.clone();
    let outcome = descent.run(resume, &mut |state| {
        if let Some(w) = writer.as_mut() {
            latest = Some(state.clone());
            w.offer(state);
        }
    })?;
    if let Some(mut w) = writer {
        // After a find, keep the position before the finding scan so that a
        // resume re-derives the same point.
        let state = match (outcome.status, latest) {
            (Status::Found, Some(before)) => before,
            (Status::Found, None) => Resume {
                frontier: Frontier::start(&config.bounds),
                stats: Default::default(),
            },
            _ => Resume {
                frontier: outcome.frontier.clone(),
                stats: outcome.stats.clone(),
            },
        };
        w.write(&state);
        w.finish()?;
    }

    let unproven = outcome.stats.unproven > 0
        || outcome
            .trace
            .as_ref()
            .is_some_and(|t| t.solubility_verdicts.iter().any(|v| v.verdict.unproven));
    let report = Report {
        kind: "report".into(),
        version: REPORT_VERSION,
        status: outcome.status,
        search: key,
        curve: target,
        naive_height: outcome.point.as_ref().map(|p| report::round2(p.naive_height())),
        point: outcome.point,
        variant: outcome.variant,
        trace: outcome.trace,
        unproven,
        stats: outcome.stats,
        frontier: outcome.frontier,
    };
    report.verify()?;
    Ok(RunOutput {
        report,
        timing: Timing::new(started.elapsed().as_secs_f64(), engine.workers()),
    })
}

pub fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::SingularCurve { .. } | Error::Domain(_) => EXIT_CONFIG,
        Error::TorsionList(_) => EXIT_TORSION,
        Error::Checkpoint(_) => EXIT_CHECKPOINT,
        Error::Invariant(_) | Error::Io(_) | Error::Json(_) => EXIT_INTERNAL,
    }
}

/// Entry point of the `ecdescent` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_FOUND };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = args.to_config().and_then(|cfg| {
        let out = run(&cfg)?;
        let text = out.render(cfg.output)?;
        std::io::stdout().lock().write_all(text.as_bytes())?;
        Ok(out)
    });
    match result {
        Ok(out) => ExitCode::from(out.exit_code()),
        Err(e) => {
            eprintln!("ecdescent: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
