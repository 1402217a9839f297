use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ssn_cli::bench::{read_sweep, render_rows, run_benchmark, write_bench};
use ssn_cli::config::{parse_lambda, PipelineConfig};
use ssn_cli::io::{read_image, read_truth, Preprocessing};
use ssn_cli::pipeline::{run_pipeline, write_outputs, InputEcho};
use ssn_cli::synth::{read_scene_spec, write_scene};
use ssn_cli::{CliError, Result};
use ssn_core::scattering::PathRule;

#[derive(Parser)]
#[command(name = "ssn", version, about = "Stockwell scattering network change detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect changes between two coregistered images.
    Detect(Box<DetectArgs>),
    /// Generate a synthetic speckled image pair with known truth.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep of configurations and tabulate the scores.
    Bench {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    image1: PathBuf,
    #[arg(long)]
    image2: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Window parameters as k,b,c
    #[arg(long, value_parser = parse_lambda, allow_hyphen_values = true)]
    lambda: Option<[f64; 3]>,
    /// Number of radial frequencies
    #[arg(long = "P")]
    radial: Option<usize>,
    /// Number of rotations
    #[arg(long = "N")]
    rotations: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    /// all | decreasing
    #[arg(long, value_parser = parse_rule)]
    rule: Option<PathRule>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    svm_gamma: Option<f64>,
    #[arg(long)]
    svm_tol: Option<f64>,
    /// linear | log
    #[arg(long)]
    preproc: Option<Preprocessing>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_rule(s: &str) -> std::result::Result<PathRule, String> {
    s.parse().map_err(|e: ssn_core::Error| e.to_string())
}

impl DetectArgs {
    fn config(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            lambda: self.lambda.unwrap_or(d.lambda),
            radial: self.radial.unwrap_or(d.radial),
            rotations: self.rotations.unwrap_or(d.rotations),
            order: self.order.unwrap_or(d.order),
            rule: self.rule.unwrap_or(d.rule),
            train_count: self.train_count.unwrap_or(d.train_count),
            seed: self.seed.unwrap_or(d.seed),
            svm_c: self.svm_c.unwrap_or(d.svm_c),
            svm_gamma: self.svm_gamma.or(d.svm_gamma),
            svm_tol: self.svm_tol.unwrap_or(d.svm_tol),
            preproc: self.preproc.unwrap_or(d.preproc),
            threads: self.threads.or(d.threads),
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ssn".into())
}

fn detect(args: &DetectArgs) -> Result<()> {
    let config = args.config();
    config.validate()?;
    let image1 = read_image(&args.image1, config.preproc)?;
    let image2 = read_image(&args.image2, config.preproc)?;
    let truth = read_truth(&args.truth)?;
    let outcome = run_pipeline(&config, &image1, &image2, &truth)?;
    let (width, height) = image1.dims();
    let inputs = InputEcho {
        image1: Some(args.image1.clone()),
        image2: Some(args.image2.clone()),
        truth: Some(args.truth.clone()),
        width,
        height,
    };
    let manifest = write_outputs(&args.out, &stem(&args.image1), &config, inputs, &outcome)?;
    let line = std::fs::read_to_string(&manifest.outputs.metrics).map_err(|e| CliError::io(&manifest.outputs.metrics, e))?;
    print!("{line}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect(args) => detect(&args),
        Command::Synth { spec, out } => {
            let files = write_scene(&read_scene_spec(&spec)?, &out)?;
            println!("{}", files.image1.display());
            println!("{}", files.image2.display());
            println!("{}", files.truth.display());
            Ok(())
        }
        Command::Bench { sweep, out } => {
            let sweep = read_sweep(&sweep)?;
            let rows = run_benchmark(&sweep, Some(&out))?;
            write_bench(&out, &rows)?;
            print!("{}", render_rows(&rows));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ssn_cli::error::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
