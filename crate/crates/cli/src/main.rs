//! `padic-confluence`: command-line front end.

mod commands;
mod config;
mod expr;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use padic_confluence::{Error, Result};

use commands::Params;
use config::{output_dir, FileConfig};
use output::{exit_code, write_run, Manifest, Outcome, Status, EXIT_CHECK, EXIT_OK, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "padic-confluence", version, about = "Exact p-adic deformation and confluence of (q,h)-difference equations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Prime p (odd).
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Absolute precision N.
    #[arg(long, global = true)]
    prec: Option<i64>,
    /// Truncation order M.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key = value file with defaults for p, prec, order, seed, out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts and the run manifest (default: $PADIC_CONFLUENCE_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON artifact instead of the text summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deform Y' = G·Y into σ(Y) = A·Y.
    Deform {
        #[arg(long)]
        system: PathBuf,
        /// q as an exact expression, e.g. 1+3^2.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        h: String,
    },
    /// Recover G from a difference module.
    Confluence {
        #[arg(long)]
        module: PathBuf,
        #[arg(long, default_value = "limit")]
        method: String,
        /// Direction (a,b) in the (q−1, h) plane for the derivative method.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        direction: String,
    },
    /// Exact profile of R(x) = |(q−1)T + h|(x) along a segment.
    Profile {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
        /// Exponent r of the inner end, ρ = p^(−r).
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Exponent r of the outer end.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// Number of sampled (ρ, R) pairs to tabulate.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Morita's Γ_p at 0 and the data extracted from it.
    Gamma {
        #[command(subcommand)]
        what: GammaCommand,
    },
    /// q-integers, q-factorials, κ and ω_q.
    Qcalc {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        h: String,
        #[arg(long, default_value_t = 10)]
        n: u64,
        /// Centre of the twisted power.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        center: String,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Check,
}

#[derive(Subcommand, Debug)]
enum GammaCommand {
    /// Certified Taylor coefficients γ_0..γ_M.
    Taylor,
    /// Coefficients of g_0 = Γ_p⁰′/Γ_p⁰ with their a priori bounds.
    G0,
    /// Newton polygon of g_0.
    Newton,
    /// Valuations of L_p(1+2m, ω^(−2m)) for m ≤ mmax.
    Lvalues {
        #[arg(long, default_value_t = 12)]
        mmax: u64,
    },
    /// Sums of inverse powers against the L-value series.
    Sums {
        #[arg(long, default_value_t = 1)]
        ell: u32,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = 16)]
        mmax: u64,
        /// Required residual valuation.
        #[arg(long, default_value_t = 20)]
        target: i64,
    },
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Deform { .. } => "deform".into(),
            Command::Confluence { .. } => "confluence".into(),
            Command::Profile { .. } => "profile".into(),
            Command::Gamma { what } => format!(
                "gamma-{}",
                match what {
                    GammaCommand::Taylor => "taylor",
                    GammaCommand::G0 => "g0",
                    GammaCommand::Newton => "newton",
                    GammaCommand::Lvalues { .. } => "lvalues",
                    GammaCommand::Sums { .. } => "sums",
                }
            ),
            Command::Qcalc { .. } => "qcalc".into(),
            Command::Check => "check".into(),
        }
    }
}

fn resolve(common: &Common, file: &FileConfig) -> Result<Params> {
    Ok(Params {
        p: common.p.or(file.p()?),
        prec: common.prec.or(file.prec()?).unwrap_or(40),
        order: common.order.or(file.order()?).unwrap_or(200),
        seed: common.seed.or(file.seed()?).unwrap_or(7),
    })
}

fn dispatch(cmd: &Command, man: &mut Manifest, params: &Params) -> Result<Outcome> {
    match cmd {
        Command::Deform { system, q, h } => commands::deform(man, params, system, q, h),
        Command::Confluence { module, method, direction } => commands::confluence(man, params, module, method, direction),
        Command::Profile { q, h, center, from, to, samples } => {
            commands::profile(man, params, &commands::ProfileArgs { q, h, center, from, to, samples: *samples })
        }
        Command::Gamma { what } => match what {
            GammaCommand::Taylor => commands::gamma_taylor_cmd(man, params),
            GammaCommand::G0 => commands::gamma_g0(man, params),
            GammaCommand::Newton => commands::gamma_newton(man, params),
            GammaCommand::Lvalues { mmax } => commands::gamma_lvalues(man, params, *mmax),
            GammaCommand::Sums { ell, n, mmax, target } => commands::gamma_sums(man, params, *ell, *n, *mmax, *target),
        },
        Command::Qcalc { q, h, n, center } => commands::qcalc(man, params, q, h, *n, center),
        Command::Check => commands::check(man, params),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let file = match &cli.common.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => return fail(&e),
        },
        None => FileConfig::default(),
    };
    let out = output_dir(cli.common.out.as_deref(), &file);
    let stem = cli.command.name();
    let mut man = Manifest {
        command: stem.clone(),
        argv: std::env::args().collect(),
        config: file.path.as_ref().map(|p| serde_json::json!({ "path": p.display().to_string(), "entries": file.entries })),
        ..Manifest::default()
    };
    let start = Instant::now();
    let result = resolve(&cli.common, &file).and_then(|params| dispatch(&cli.command, &mut man, &params));
    man.seconds = start.elapsed().as_secs_f64();

    if let Some(dir) = &out {
        let written = match &result {
            Ok(o) => write_run(dir, &o.stem, Some(&o.artifact), &man, Ok(o)),
            Err(e) => write_run(dir, &stem, None, &man, Err(e)),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    match result {
        Ok(o) => {
            if cli.common.json {
                println!("{}", serde_json::to_string_pretty(&o.artifact).expect("serializable"));
            } else {
                print!("{}", o.human);
            }
            ExitCode::from(if o.status == Status::Ok { EXIT_OK } else { EXIT_CHECK } as u8)
        }
        Err(e) => fail(&e),
    }
}
