use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use v2x_bench::emit::{render_lengths, render_report, render_timings, Format};
use v2x_bench::timings::MIN_ITERATIONS;
use v2x_bench::{ieee_padding, measure_lengths, measure_timings, run_report, timings::TimingOptions, BenchError};
use v2x_core::pki::DEFAULT_CHAIN_DEPTH;
use v2x_core::transcript::FlowParams;

/// Measure message lengths and computation times of both provisioning flows.
#[derive(Parser)]
#[command(name = "v2x-bench", version)]
struct Cli {
    #[command(flatten)]
    flow: FlowArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FlowArgs {
    /// Authority certificates from the ECA up to and including the RCA.
    #[arg(long, global = true, default_value_t = DEFAULT_CHAIN_DEPTH)]
    chain_depth: usize,
    /// Authorization certificates requested per IEEE batch.
    #[arg(long, global = true, default_value_t = 5)]
    cert_count: u8,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; anything but 1 is refused.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Extra 31-byte-SSP permissions in every IEEE request (falsifiability hook).
    #[arg(long, global = true, default_value_t = 0, hide = true)]
    ieee_padding: usize,
}

#[derive(Args)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or md.
    #[arg(long, default_value = "md")]
    format: Format,
}

#[derive(Args)]
struct Timing {
    #[arg(long, default_value_t = MIN_ITERATIONS)]
    iterations: usize,
    /// Discarded runs before measuring.
    #[arg(long, default_value_t = 10)]
    warmup: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Encoded length of every message.
    Lengths {
        #[command(flatten)]
        output: Output,
    },
    /// Client-side generation and processing times.
    Timings {
        #[command(flatten)]
        timing: Timing,
        #[command(flatten)]
        output: Output,
    },
    /// Run every comparison; exits nonzero if any fails.
    Check {
        /// Timing checks require the p10/p90 bands not to overlap.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        timing: Timing,
        #[command(flatten)]
        output: Output,
    },
}

fn params(flow: &FlowArgs) -> FlowParams {
    FlowParams {
        seed: flow.seed,
        chain_depth: flow.chain_depth,
        cert_count: flow.cert_count,
        ieee_padding: ieee_padding(flow.ieee_padding),
        ..FlowParams::default()
    }
}

fn write(output: &Output, text: &str) -> Result<(), String> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let params = params(&cli.flow);
    let options = |t: &Timing| TimingOptions { iterations: t.iterations, warmup: t.warmup, threads: cli.flow.threads };
    let err = |e: BenchError| e.to_string();
    match &cli.command {
        Command::Lengths { output } => {
            if cli.flow.threads != 1 {
                return Err(BenchError::ConcurrentLoad(cli.flow.threads).to_string());
            }
            let rows = measure_lengths(&params).map_err(|e| err(e.into()))?;
            write(output, &render_lengths(&rows, output.format))?;
            Ok(true)
        }
        Command::Timings { timing, output } => {
            let rows = measure_timings(&params, &options(timing)).map_err(err)?;
            write(output, &render_timings(&rows, output.format))?;
            Ok(true)
        }
        Command::Check { strict, timing, output } => {
            let opts = options(timing);
            opts.validate().map_err(err)?;
            let report = run_report(&params, Some(&opts), *strict).map_err(err)?;
            for v in &report.verdicts {
                eprintln!("{v}");
            }
            if output.out.is_some() {
                write(output, &render_report(&report, output.format))?;
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("v2x-bench: {e}");
            ExitCode::from(2)
        }
    }
}
