//! `cscr-sense` command-line harness.
//!
//! Every subcommand reads an optional TOML config, applies `--seed`, and
//! writes its products into `--out`. Exit codes: 0 success, 2 config
//! error, 3 input-format error, 4 no complete analysis window.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cscr_sense::config::Config;
use cscr_sense::pipeline::{self, PipelineOutput, Truth};
use cscr_sense::sim::CsiTrace;
use cscr_sense::{eval, gass, sim, trace, Error};

#[derive(Parser)]
#[command(name = "cscr-sense", version, about = "Respiration sensing from cross-subcarrier CSI ratios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides both the impairment seed and the GASS seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured scenario and write `trace.csv`.
    Simulate(Common),
    /// Run the pipeline and write `estimates.jsonl`.
    Run {
        #[command(flatten)]
        common: Common,
        /// Trace file to process instead of simulating the scenario.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also write each window's filtered waveform as CSV.
        #[arg(long)]
        waveforms: bool,
    },
    /// Detectability across target positions spanning one wavelength.
    SweepBlindspot(Common),
    /// Detection rate across the configured noise levels.
    SweepSnr(Common),
    /// Run GASS on one window and dump the solution with its history.
    GassAudit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Window id to optimise.
        #[arg(long, default_value_t = 0)]
        window: usize,
    },
}

fn load_config(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            Config::from_toml(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.impairments.seed = seed;
        cfg.pipeline.gass.seed = seed;
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn load_trace(input: Option<&Path>, cfg: &Config) -> Result<(CsiTrace, bool)> {
    match input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            Ok((trace::read_trace(&text)?, false))
        }
        None => Ok((sim::simulate(&cfg.scenario, &cfg.grid.build(), &cfg.impairments)?, true)),
    }
}

fn run_on(cfg: &Config, input: Option<&Path>) -> Result<PipelineOutput> {
    let (trace, simulated) = load_trace(input, cfg)?;
    let truth = simulated.then_some(Truth { respiration: &cfg.scenario.respiration, duration_s: cfg.scenario.duration_s });
    Ok(pipeline::run_pipeline(&trace, &cfg.pipeline, truth)?)
}

fn cmd_run(common: &Common, input: Option<&Path>, waveforms: bool) -> Result<()> {
    let cfg = load_config(common)?;
    let out = run_on(&cfg, input)?;
    write(&common.out, "estimates.jsonl", &out.to_jsonl())?;
    if waveforms {
        for (span, est) in out.plan.windows.iter().zip(&out.estimates) {
            let Some(prov) = &est.provenance else { continue };
            let products = pipeline::process_window(&out.window_trace(span), &prov.genome, &cfg.pipeline)?;
            write(&common.out, &format!("waveform_{:04}.csv", span.id), &trace::write_real_series(&products.filtered.values))?;
        }
    }
    let detected = out.estimates.iter().filter(|e| e.f_bpm.is_some()).count();
    println!("{} windows, {} with an estimate", out.estimates.len(), detected);
    pipeline::require_windows(&out)?;
    Ok(())
}

fn cmd_gass_audit(common: &Common, input: Option<&Path>, window: usize) -> Result<()> {
    let cfg = load_config(common)?;
    let (trace, _) = load_trace(input, &cfg)?;
    let k1 = pipeline::block_size(trace.sample_rate_hz, &cfg.pipeline);
    let averaged = cscr_sense::cscr::average_phase_blocks(&trace, k1)?;
    let averaged = CsiTrace { sample_rate_hz: trace.sample_rate_hz / k1 as f64, ..averaged };
    let plan = pipeline::segment(&averaged, &cfg.pipeline)?;
    let Some(span) = plan.windows.iter().find(|w| w.id == window) else {
        let accepted = plan.accepted.iter().filter(|a| **a).count();
        return Err(Error::NoWindow { accepted, needed: plan.window_frames }.into());
    };
    let params = gass::GaParams { seed: cfg.pipeline.gass.seed.wrapping_add(span.id as u64), ..cfg.pipeline.gass.clone() };
    let solution = gass::optimize(&averaged.slice(span.start_sample..span.end_sample), &params, &[])?;
    write(&common.out, "gass_solution.json", &(solution.to_json() + "\n"))?;
    let history: String = solution.history.iter().enumerate().map(|(g, v)| format!("{g},{v}\n")).collect();
    write(&common.out, "gass_history.csv", &format!("generation,best_ssnr\n{history}"))?;
    println!("window {}: best SSNR {} after {} evaluations", span.id, solution.fitness.value, solution.evaluations);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = load_config(&common)?;
            let trace = sim::simulate(&cfg.scenario, &cfg.grid.build(), &cfg.impairments)?;
            write(&common.out, "trace.csv", &trace::write_trace(&trace))?;
            println!("{} frames x {} subcarriers", trace.len(), trace.grid.len());
        }
        Command::Run { common, input, waveforms } => cmd_run(&common, input.as_deref(), waveforms)?,
        Command::SweepBlindspot(common) => {
            let report = eval::blind_spot_sweep(&load_config(&common)?)?;
            write(&common.out, "blindspot_positions.csv", &report.positions_csv())?;
            write(&common.out, "blindspot_summary.csv", &report.summary_csv())?;
            println!(
                "detectability: full {}%, amplitude {}%, phase {}%",
                report.detectability_full, report.detectability_amplitude, report.detectability_phase
            );
        }
        Command::SweepSnr(common) => {
            let report = eval::snr_sweep(&load_config(&common)?)?;
            write(&common.out, "snr_detection.csv", &report.noise_csv())?;
            for l in &report.noise_levels {
                println!("noise {}: full {}%, amplitude {}%", l.noise_std, l.full_rate, l.amplitude_rate);
            }
        }
        Command::GassAudit { common, input, window } => cmd_gass_audit(&common, input.as_deref(), window)?,
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(Error::Format(_)) => 3,
        Some(Error::NoWindow { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
