use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use csi_gait::csi_data::{save_ground_truth, save_trial, synthesize, SynthConfig};
use csi_gait::diagnostics::{feature_diagnostics, pdr};
use csi_gait::harness::{emit_report, load_run_result, run_experiment, save_run_result, ExperimentConfig};
use csi_gait::numerics::derive_seed;
use csi_gait::Error;

#[derive(Parser)]
#[command(name = "csi-gait", version, about = "Multi-person WiFi CSI gait identification benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic trial files (CSV + meta sidecar + ground truth).
    Synth {
        /// SynthConfig JSON; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "synth")]
        out: PathBuf,
        /// Number of trials; trial i uses a seed derived from the base seed.
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Execute an experiment config and write the report.
    Run {
        /// ExperimentConfig JSON; the built-in scenario set when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-aggregate a saved run_result.json.
    Report {
        input: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// ISV / ISD / overlap of a labelled feature CSV (`label,f1,...,fd`).
    Diagnose {
        input: PathBuf,
        /// Accuracies for PDR, as fractions.
        #[arg(long, requires = "acc10")]
        acc2: Option<f64>,
        #[arg(long, requires = "acc2")]
        acc10: Option<f64>,
    },
    /// Print the default experiment config.
    DefaultConfig,
}

/// Exit 1 for usage and configuration problems, 2 for everything else.
fn code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn synth(config: Option<PathBuf>, seed: Option<u64>, out: PathBuf, trials: usize) -> Result<(), Error> {
    let mut cfg: SynthConfig = match config {
        Some(p) => load_json(&p)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if trials == 0 {
        return Err(Error::Config("--trials must be at least 1".into()));
    }
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
    let base = cfg.seed;
    for i in 0..trials {
        let trial_cfg =
            SynthConfig { seed: if trials == 1 { base } else { derive_seed(base, &[i as u64]) }, ..cfg.clone() };
        let (trial, truth) = synthesize(&trial_cfg)?;
        let path = out.join(format!("trial_{i:03}.csv"));
        save_trial(&trial, &path)?;
        save_ground_truth(&truth, &trial.timestamps_us, &path)?;
    }
    println!("wrote {trials} trial(s) to {}", out.display());
    Ok(())
}

fn run(config: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Error> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(&p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let result = run_experiment(&cfg)?;
    emit_report(&result, &dir)?;
    save_run_result(&result, &dir.join("run_result.json"))?;
    print!("{}", result.report.text_table());
    let failed = result.trials.iter().filter(|t| t.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} trial(s) failed; see run_result.json");
    }
    Ok(())
}

fn report(input: PathBuf, out: PathBuf) -> Result<(), Error> {
    let result = load_run_result(&input)?;
    emit_report(&result, &out)?;
    print!("{}", result.report.text_table());
    Ok(())
}

fn diagnose(input: PathBuf, acc2: Option<f64>, acc10: Option<f64>) -> Result<(), Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&input)
        .map_err(|e| Error::Config(format!("{}: {e}", input.display())))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let mut cells = rec.iter();
        let label = cells
            .next()
            .and_then(|c| c.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::Parse { line, msg: "bad label".into() })?;
        let f: Vec<f64> = cells
            .map(|c| c.trim().parse().map_err(|_| Error::Parse { line, msg: format!("bad value '{c}'") }))
            .collect::<Result<_, _>>()?;
        if f.is_empty() {
            return Err(Error::Parse { line, msg: "no feature columns".into() });
        }
        features.push(f);
        labels.push(label);
    }
    let d = feature_diagnostics(&features, &labels)?;
    for (c, v) in d.classes.iter().zip(&d.isv_per_class) {
        println!("ISV[{c}] = {v:.6}");
    }
    println!("ISV = {:.6}", d.isv_mean);
    let show = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
    println!("ISD = {}", show(d.isd));
    println!("ISV/ISD = {}", show(d.isv_isd_ratio));
    println!("Overlap = {}", d.overlap.map_or_else(|| "NA".to_string(), |v| format!("{v:.1}%")));
    if let (Some(a2), Some(a10)) = (acc2, acc10) {
        println!("PDR = {:.1}%", pdr(a2, a10)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Synth { config, seed, out, trials } => synth(config, seed, out, trials),
        Command::Run { config, seed, out } => run(config, seed, out),
        Command::Report { input, out } => report(input, out),
        Command::Diagnose { input, acc2, acc10 } => diagnose(input, acc2, acc10),
        Command::DefaultConfig => {
            println!("{}", ExperimentConfig::default().to_json());
            Ok(())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code_for(&e))
        }
    }
}
