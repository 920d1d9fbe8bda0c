use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use choreo::commands::{default_protocol, CommandError, Exit, Outcome, Runner, CHECKS};
use choreo::json::to_line;
use choreo::spec::{PartialSpec, ProtocolName, RunSpec};
use choreo::trace::Trace;
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

/// Exhaustive and randomized checking of choreographic consensus protocols.
#[derive(Debug, Parser)]
#[command(name = "choreo", version)]
struct Cli {
    /// Worker threads for exploration and per-input runs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Where counterexample files go.
    #[arg(long, global = true, env = "CHOREO_CEX_DIR")]
    cex_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the denotational output set.
    Enumerate(RunArgs),
    /// Run a named property check.
    Check {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(CHECKS))]
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate one seeded random maximal trace.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Reorder the trace channel by channel and re-verify it.
        #[arg(long)]
        align: bool,
        /// Write the trace here and print a summary instead.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record each label's channel state.
        #[arg(long)]
        dump_channels: bool,
    },
    /// Check that a trace file is permissible.
    Replay { trace: PathBuf },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    protocol: Option<ProtocolName>,
    /// JSON file with any of the run fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    f: Option<u32>,
    #[arg(long)]
    b: Option<u32>,
    /// Extra iterations (`iter(body, k)` runs `k + 1`).
    #[arg(long)]
    iterations: Option<u32>,
    /// Size of the SeqPaxos value domain.
    #[arg(long)]
    values: Option<u32>,
    /// Good replica inputs such as `1,1,0`, or `all`.
    #[arg(long)]
    inputs: Option<String>,
    #[arg(long)]
    leader_input: Option<bool>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    seconds: Option<u64>,
    #[arg(long, env = "CHOREO_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    materialize_lists: bool,
    #[arg(long)]
    byz_after_receive: bool,
    #[arg(long)]
    asymmetric_bosco: bool,
}

impl RunArgs {
    fn resolve(&self, fallback: Option<ProtocolName>) -> Result<RunSpec, CommandError> {
        let file = match &self.config {
            Some(path) => PartialSpec::from_file(path)?,
            None => PartialSpec::default(),
        };
        let base = PartialSpec { protocol: fallback, ..Default::default() };
        let flag = |on: bool| on.then_some(true);
        let flags = PartialSpec {
            protocol: self.protocol,
            n: self.n,
            f: self.f,
            b: self.b,
            iterations: self.iterations,
            values: self.values,
            inputs: self.inputs.clone(),
            leader_input: self.leader_input,
            max_states: self.max_states,
            max_depth: self.max_depth,
            seconds: self.seconds,
            seed: self.seed,
            materialize_lists: flag(self.materialize_lists),
            byz_after_receive: flag(self.byz_after_receive),
            asymmetric_bosco: flag(self.asymmetric_bosco),
        };
        Ok(base.overlay(file).overlay(flags).resolve()?)
    }
}

fn save_counterexample(dir: Option<&Path>, cex: &serde_json::Value) -> std::io::Result<PathBuf> {
    let text = format!("{}\n", to_line(cex));
    let name = format!("choreo-cex-{}.json", &hex::encode(Sha256::digest(text.as_bytes()))[..16]);
    let path = dir.map(Path::to_path_buf).unwrap_or_else(std::env::temp_dir).join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn run(cli: Cli) -> Result<Exit, CommandError> {
    let runner = Runner::new(cli.jobs)?;
    let mut stdout = std::io::stdout().lock();
    let outcome: Outcome = match &cli.command {
        Command::Enumerate(run) => runner.enumerate(&run.resolve(None)?)?,
        Command::Check { name, run } => runner.check(&run.resolve(default_protocol(name))?, name)?,
        Command::Simulate { run, align, out, dump_channels } => {
            let (outcome, trace) = runner.simulate(&run.resolve(None)?, *align, *dump_channels)?;
            match out {
                Some(path) => std::fs::write(path, trace).map_err(choreo::trace::TraceError::from)?,
                None => {
                    stdout.write_all(trace.as_bytes()).map_err(choreo::trace::TraceError::from)?;
                    if let Some(cex) = &outcome.counterexample {
                        report_cex(cli.cex_dir.as_deref(), cex);
                    }
                    return Ok(outcome.exit);
                }
            }
            outcome
        }
        Command::Replay { trace } => {
            let file = std::fs::File::open(trace).map_err(choreo::trace::TraceError::from)?;
            runner.replay(&Trace::read(BufReader::new(file))?)?
        }
    };
    writeln!(stdout, "{}", to_line(&outcome.report)).map_err(choreo::trace::TraceError::from)?;
    if let Some(cex) = &outcome.counterexample {
        report_cex(cli.cex_dir.as_deref(), cex);
    }
    Ok(outcome.exit)
}

fn report_cex(dir: Option<&Path>, cex: &serde_json::Value) {
    match save_counterexample(dir, cex) {
        Ok(path) => eprintln!("counterexample written to {}", path.display()),
        Err(e) => eprintln!("could not write counterexample: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { Exit::Usage.code() as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::Usage.code() as u8)
        }
    }
}
