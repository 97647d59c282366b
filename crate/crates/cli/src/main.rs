use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use cantor_cli::ops::{self, ClassifyRequest, CounterplayRequest, ExtractRequest};
use cantor_cli::{play, service};
use cantor_core::arena::{NewSession, RawConfig, SessionStore, TargetSpec};
use cantor_core::{Rat, SetFile, Side};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cantor", version, about = "Exact-arithmetic Cantor game engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Game {
    /// Left end of the game interval, as p/q.
    #[arg(long, default_value = "0/1")]
    a0: Rat,
    /// Right end of the game interval, as p/q.
    #[arg(long, default_value = "1/1")]
    b0: Rat,
}

impl Game {
    fn raw(&self) -> RawConfig {
        RawConfig { a0: self.a0.clone(), b0: self.b0.clone() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play against an engine strategy, one fraction per line.
    Play {
        #[arg(long, default_value = "A")]
        human: Side,
        #[arg(long)]
        engine: String,
        /// Stop after this many rounds.
        #[arg(long)]
        rounds: Option<usize>,
        /// A built-in target name or a target file.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        game: Game,
    },
    /// Build the Cantor set of plays consistent with a strategy.
    Extract {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        game: Game,
    },
    /// Check a tree or extraction file. Exits nonzero on any violation.
    Verify { file: PathBuf },
    /// Decide which player wins on a target file, with a witness.
    Classify {
        file: PathBuf,
        /// Also write the verdict and witness here.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[command(flatten)]
        game: Game,
    },
    /// Play A's counter-strategy against a B strategy aimed at a point.
    Counterplay {
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        target_point: Rat,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        game: Game,
    },
    /// Run the JSON session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append-only move log, replayed on start.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn read_target(arg: &str) -> Result<TargetSpec> {
    let p = Path::new(arg);
    if p.is_file() {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {arg}"))?;
        let f: SetFile = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
        Ok(TargetSpec::Inline(Box::new(f)))
    } else {
        Ok(TargetSpec::Named(arg.to_string()))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Play { human, engine, rounds, target, game } => {
            let req = NewSession {
                config: game.raw(),
                human,
                engine,
                target: target.as_deref().map(read_target).transpose()?,
                max_rounds: rounds,
            };
            play::run(&req, io::stdin().lock(), io::stdout().lock())?;
        }
        Command::Extract { side, strategy, depth, out, game } => {
            let file = ops::extract(&ExtractRequest { side, strategy, depth, config: Some(game.raw()) })?;
            emit(&file, out.as_deref())?;
        }
        Command::Verify { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = ops::verify(&text)?;
            emit(&report, None)?;
            if !report.is_clean() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Classify { file, witness_out, game } => {
            let target = read_target(file.to_str().context("non-UTF-8 path")?)?;
            let verdict = ops::classify(&ClassifyRequest { target, config: Some(game.raw()) })?;
            emit(&verdict, None)?;
            if let Some(p) = witness_out {
                emit(&verdict, Some(&p))?;
            }
        }
        Command::Counterplay { strategy, target_point, depth, out, game } => {
            let trace = ops::run_counterplay(&CounterplayRequest { strategy, target_point, depth, config: Some(game.raw()) })?;
            emit(&trace, out.as_deref())?;
        }
        Command::Serve { port, host, log } => {
            let store = match log {
                Some(p) => SessionStore::with_log(&p)?,
                None => SessionStore::new(),
            };
            let app = service::router(Arc::new(store));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, app).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
