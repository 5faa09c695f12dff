use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use qdc::geometry::exponent_report;
use qdc::harness::{self, Config, Divisor, ProblemTag};
use qdc::oracle::ErrorMode;

#[derive(Parser)]
#[command(name = "qdc", version, about = "Query-cost simulator for quantum divide-and-conquer algorithms")]
struct Cli {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true, env = "QDC_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Per-call failure probability of the amplified primitives.
    #[arg(long)]
    error_p: Option<f64>,
    /// off, wrong-value or random-candidate.
    #[arg(long)]
    error_mode: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    alphabet: Option<u32>,
}

impl Common {
    fn apply(&self, mut c: Config) -> anyhow::Result<Config> {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.error_p {
            c.error_p = v;
        }
        if let Some(m) = &self.error_mode {
            c.error_mode = serde_json::from_value(serde_json::Value::String(m.clone()))
                .with_context(|| format!("unknown error mode {m:?}"))?;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.d {
            c.d = v;
        }
        if self.h.is_some() {
            c.h = self.h;
        }
        if let Some(v) = self.alphabet {
            c.alphabet = v;
        }
        if c.error_p > 0.0 && c.error_mode == ErrorMode::Off {
            c.error_mode = ErrorMode::WrongValue;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare solver answers with brute force on random instances.
    Verify {
        problem: ProblemTag,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Record query counts over geometric sizes as CSV.
    Bench {
        problem: ProblemTag,
        #[arg(long, default_value_t = 16)]
        nmin: usize,
        #[arg(long, default_value_t = 1024)]
        nmax: usize,
        #[arg(long, default_value_t = 2)]
        factor: usize,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the records as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Check every run against brute force where feasible.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        wall_clock: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a power law to a benchmark CSV.
    Fit {
        csv: PathBuf,
        /// 1, log, sqrt-log, log-loglog or log^x.
        #[arg(long, default_value = "1")]
        divisor: Divisor,
        /// Fail unless the slope lies in this closed range.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        expect: Option<Vec<f64>>,
    },
    /// Solve one instance read from a file.
    Solve {
        problem: ProblemTag,
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Recurrence parameters of the coverage algorithm.
    KleeExponent {
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long)]
        h: Option<usize>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let base = || Config::resolve(cli.config.as_deref()).map_err(anyhow::Error::from);
    match &cli.cmd {
        Cmd::Verify { problem, n, common } => {
            let cfg = common.apply(base()?)?;
            let r = harness::verify(*problem, *n, &cfg)?;
            println!("{}", serde_json::to_string(&r)?);
            Ok(r.pass)
        }
        Cmd::Bench { problem, nmin, nmax, factor, out, json, check, wall_clock, common } => {
            let mut cfg = common.apply(base()?)?;
            cfg.wall_clock |= *wall_clock;
            let sizes = harness::geometric_sizes(*nmin, *nmax, *factor)?;
            let recs = harness::bench(*problem, &sizes, &cfg, *check)?;
            match out {
                Some(p) => harness::write_csv(&recs, BufWriter::new(File::create(p)?))?,
                None => harness::write_csv(&recs, std::io::stdout().lock())?,
            }
            if let Some(p) = json {
                let mut w = BufWriter::new(File::create(p)?);
                serde_json::to_writer_pretty(&mut w, &recs)?;
                w.flush()?;
            }
            Ok(recs.iter().all(|r| r.correct != Some(false)))
        }
        Cmd::Fit { csv, divisor, expect } => {
            let recs = harness::read_csv(File::open(csv).with_context(|| csv.display().to_string())?)?;
            let f = harness::fit(&recs, *divisor)?;
            println!("{}", serde_json::to_string(&f)?);
            Ok(match expect.as_deref() {
                Some([lo, hi]) => (*lo..=*hi).contains(&f.slope),
                Some(_) => bail!("--expect takes two values"),
                None => true,
            })
        }
        Cmd::Solve { problem, input, common } => {
            let cfg = common.apply(base()?)?;
            let text = std::fs::read_to_string(input).with_context(|| input.display().to_string())?;
            let (answer, ledger) = harness::solve_text(*problem, &text, &cfg)?;
            println!("{answer}");
            eprintln!("queries={} time_units={}", ledger.queries, ledger.time_units);
            Ok(true)
        }
        Cmd::KleeExponent { d, h } => {
            let r = exponent_report(*d, h.unwrap_or_else(|| qdc::geometry::default_h(*d)));
            println!("{}", serde_json::to_string(&r)?);
            Ok(r.exponent.is_some())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
