use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use srmc::codec::{bd_metrics, RefinementMode};
use srmc::experiment::{
    read_curve, run_experiment, run_prediction, write_rows, RunConfig, SequenceConfig,
};
use srmc::sequence::{synth_sequence, write_frames, SynthKind, SynthParams};
use srmc::Result;

#[derive(Parser)]
#[command(name = "srmc", version, about = "Spatially refined motion-compensated prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Open-loop prediction quality (no residual coding).
    Predict(RunArgs),
    /// Closed-loop rate-distortion run with BD summary against plain MC.
    Encode(RunArgs),
    /// BD-rate and BD-PSNR between two RD curve files.
    Bd(BdArgs),
    /// Writes a synthetic raw 4:2:0 sequence.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags below override it.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Raw 8-bit 4:2:0 input (needs --width and --height).
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Number of frames to use.
    #[arg(long)]
    frames: Option<usize>,
    /// Comma-separated subset of none,fsa,rba,msa.
    #[arg(short, long, value_delimiter = ',')]
    algorithms: Option<Vec<RefinementMode>>,
    /// Comma-separated quantizer indices.
    #[arg(long, value_delimiter = ',')]
    qps: Option<Vec<u32>>,
    /// CSV output for the main table.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV output for wall-clock timings (encode only).
    #[arg(long)]
    timing: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.input {
            let (Some(width), Some(height)) = (self.width, self.height) else {
                return Err(srmc::Error::Config("--input needs --width and --height".into()));
            };
            cfg.sequence = SequenceConfig::File {
                path: path.clone(),
                width,
                height,
                frames: self.frames,
                name: None,
            };
        } else {
            match &mut cfg.sequence {
                SequenceConfig::Synth { params, .. } => {
                    if let Some(w) = self.width {
                        params.width = w;
                    }
                    if let Some(h) = self.height {
                        params.height = h;
                    }
                    if let Some(n) = self.frames {
                        params.frames = n;
                    }
                }
                SequenceConfig::File { frames, .. } => {
                    if self.frames.is_some() {
                        *frames = self.frames;
                    }
                }
            }
        }
        if let Some(a) = &self.algorithms {
            cfg.algorithms = a.clone();
        }
        if let Some(q) = &self.qps {
            cfg.qps = q.clone();
        }
        if let Some(p) = &self.output {
            cfg.output.csv = Some(p.clone());
        }
        if let Some(p) = &self.timing {
            cfg.output.timing_csv = Some(p.clone());
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BdArgs {
    /// Anchor curve CSV (columns `rate_kbps`, `psnr_db`, optional `algorithm`).
    anchor: PathBuf,
    /// Test curve CSV; defaults to the anchor file.
    test: Option<PathBuf>,
    /// Keep only anchor rows of this algorithm.
    #[arg(long)]
    anchor_algorithm: Option<RefinementMode>,
    /// Keep only test rows of this algorithm.
    #[arg(long)]
    test_algorithm: Option<RefinementMode>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(short, long)]
    output: PathBuf,
    /// translate, zoom-texture or noise.
    #[arg(long, default_value = "translate")]
    kind: SynthKind,
    #[arg(long, default_value_t = 352)]
    width: usize,
    #[arg(long, default_value_t = 288)]
    height: usize,
    #[arg(long, default_value_t = 30)]
    frames: usize,
    /// Horizontal motion in samples per frame.
    #[arg(long, default_value_t = 1.3, allow_negative_numbers = true)]
    vx: f64,
    /// Vertical motion in samples per frame.
    #[arg(long, default_value_t = -0.6, allow_negative_numbers = true)]
    vy: f64,
    #[arg(long, default_value_t = 0.01)]
    zoom: f64,
    /// Standard deviation of per-frame Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn predict(args: RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let rows = run_prediction(&cfg)?;
    if cfg.output.csv.is_some() {
        write_rows(output(&cfg.output.csv)?, &rows)?;
    }
    println!("{:<6} {:>7} {:>12} {:>10} {:>14}", "algo", "frames", "psnr [dB]", "refined %", "ms/frame");
    for r in &rows {
        println!(
            "{:<6} {:>7} {:>12.3} {:>10.1} {:>14.1}",
            r.algorithm, r.frames, r.mean_psnr_db, r.refined_pct, r.refine_ms_per_frame
        );
    }
    Ok(())
}

fn encode(args: RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let report = run_experiment(&cfg)?;
    write_rows(output(&cfg.output.csv)?, &report.rows)?;
    if cfg.output.timing_csv.is_some() {
        write_rows(output(&cfg.output.timing_csv)?, &report.timing)?;
    }
    let mut err = io::stderr().lock();
    writeln!(err, "{:<6} {:>11} {:>12} {:>6} {:>14}", "algo", "BD-rate %", "BD-PSNR dB", "iters", "ms/frame")?;
    for s in &report.summary {
        writeln!(
            err,
            "{:<6} {:>11.2} {:>12.3} {:>6} {:>14.1}",
            s.algorithm, s.metrics.rate_percent, s.metrics.psnr_db, s.iterations, s.refine_ms_per_frame
        )?;
    }
    Ok(())
}

fn bd(args: BdArgs) -> Result<()> {
    let anchor = read_curve(File::open(&args.anchor)?, args.anchor_algorithm)?;
    let test_path = args.test.as_ref().unwrap_or(&args.anchor);
    let test = read_curve(File::open(test_path)?, args.test_algorithm)?;
    let m = bd_metrics(&anchor, &test)?;
    println!("bd_rate_percent,bd_psnr_db");
    println!("{},{}", m.rate_percent, m.psnr_db);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let params = SynthParams {
        kind: args.kind,
        width: args.width,
        height: args.height,
        frames: args.frames,
        velocity: (args.vx, args.vy),
        zoom: args.zoom,
        noise: args.noise,
        seed: args.seed,
    };
    let frames = synth_sequence(&params)?;
    write_frames(&args.output, &frames)?;
    eprintln!(
        "wrote {} frames of {}x{} to {}",
        frames.len(),
        args.width,
        args.height,
        args.output.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => predict(a),
        Command::Encode(a) => encode(a),
        Command::Bd(a) => bd(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
