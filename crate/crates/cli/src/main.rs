//! `bseq`: generate prime-chain sequences and run the analyses on them.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 precision
//! exhausted, 3 invariant failure or a failed verify assertion.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bseq::Error;
use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "bseq", version, about = "Prime-chain sequences and the distribution of αn mod 1")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Rule spec, e.g. `practical`, `t-dense:2`, `almost-prime:3`.
    #[arg(long)]
    rule: Option<String>,
    /// Alpha spec: `rat:p/q`, `quad:(a+b*sqrtd)/c`, `quad:sqrt2`, `dec:3.14159…`.
    #[arg(long)]
    alpha: Option<String>,
    /// Limit; accepts `10^6`, `1e6`, `2^722`.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Exact rational: `p/q`, `1e-9`, `0.25`.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Integer for `member`.
    #[arg(long)]
    n: Option<String>,
    /// Number of continued-fraction terms.
    #[arg(long)]
    terms: Option<String>,
    /// Comma-separated harmonic cut-offs for the Erdős–Turán bound.
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long = "A", allow_hyphen_values = true)]
    big_a: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    dmax: Option<String>,
    /// Comma-separated x grid for `verify`.
    #[arg(long)]
    xs: Option<String>,
    /// Comma-separated y grid for `verify --suite debruijn`.
    #[arg(long)]
    ys: Option<String>,
    /// bcond | bmult | thetahyp | debruijn | siegel-walfisz
    #[arg(long)]
    suite: Option<String>,
    /// Range bound for `verify --suite thetahyp`.
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    qmax: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long, env = "BSEQ_CACHE_DIR")]
    cache_dir: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

impl Cli {
    fn into_config(self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig {
            command: Some(self.command),
            ..RunConfig::default()
        };
        let flags = [
            ("rule", self.rule),
            ("alpha", self.alpha),
            ("x", self.x),
            ("h", self.h),
            ("q", self.q),
            ("a", self.a),
            ("beta", self.beta),
            ("n", self.n),
            ("terms", self.terms),
            ("m", self.m),
            ("kappa", self.kappa),
            ("A", self.big_a),
            ("delta", self.delta),
            ("dmax", self.dmax),
            ("xs", self.xs),
            ("ys", self.ys),
            ("suite", self.suite),
            ("bound", self.bound),
            ("qmax", self.qmax),
            ("out", self.out),
            ("format", self.format),
            ("cache-dir", self.cache_dir),
            ("threads", self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v).map_err(|e| Error::Config(format!("--{key}: {e}")))?;
            }
        }
        if self.no_timestamp {
            cfg.no_timestamp = Some(true);
        }
        if let Some(path) = self.config {
            let text = std::fs::read_to_string(&path)?;
            let file = RunConfig::parse_text(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg = cfg.over(file);
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted(_) => 2,
        Error::Invariant(_) => 3,
        Error::Config(_) | Error::Range { .. } | Error::Input(_) | Error::Cache(_) | Error::Io(_) => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let cfg = cli.into_config()?;
    let output = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| commands::execute(&cfg))?,
        None => commands::execute(&cfg)?,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, &output.text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bseq: verification assertions failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("bseq: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
