//! Run configuration, experiment orchestration and CSV reports.
//!
//! # CSV schemas
//!
//! `rd.csv` (one row per sequence, algorithm and quantizer; deterministic):
//!
//! | column        | meaning                                                   |
//! |---------------|-----------------------------------------------------------|
//! | `sequence`    | sequence label                                            |
//! | `algorithm`   | `none`, `fsa`, `rba` or `msa`                             |
//! | `qp`          | quantizer index                                           |
//! | `qstep`       | uniform quantizer step, `2^((qp-4)/6)`                    |
//! | `rate_kbps`   | proxy rate over inter frames at 30 fps                    |
//! | `psnr_db`     | mean luma PSNR over inter frames                          |
//! | `refined_pct` | share of inter macroblocks that chose the refined predictor |
//!
//! `timing.csv` (wall-clock, varies between runs):
//! `sequence,algorithm,qp,iterations,refine_ms_per_frame`.
//!
//! Numbers are written with Rust's shortest round-trip float formatting so the
//! summary can be recomputed exactly from the rows.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::codec::bd::{bd_metrics, BdMetrics, RdCurve, RdPoint};
use crate::codec::harness::{
    encode_sequence, predict_frame, qp_to_qstep, EncoderConfig, RefinementMode, DEFAULT_QPS,
    PSNR_CAP_DB,
};
use crate::error::{Error, Result};
use crate::extrapolation::{Algorithm, ExtrapolationParams};
use crate::frame::{psnr, Plane, MACROBLOCK_SIZE};
use crate::motion::SearchParams;
use crate::refine::{Refiner, DEFAULT_MU, DEFAULT_RHO};
use crate::sequence::{read_frames, synth_sequence, SequenceSource, SynthParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum SequenceConfig {
    Synth {
        #[serde(default = "default_label")]
        name: String,
        #[serde(flatten)]
        params: SynthParams,
    },
    File {
        path: PathBuf,
        width: usize,
        height: usize,
        /// First `frames` frames; all when absent.
        frames: Option<usize>,
        name: Option<String>,
    },
}

fn default_label() -> String {
    "synthetic".to_string()
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig::Synth {
            name: default_label(),
            params: SynthParams::default(),
        }
    }
}

impl SequenceConfig {
    pub fn label(&self) -> String {
        match self {
            SequenceConfig::Synth { name, .. } => name.clone(),
            SequenceConfig::File { path, name, .. } => name.clone().unwrap_or_else(|| {
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string())
            }),
        }
    }

    /// Luma planes of the configured sequence.
    pub fn load_luma(&self) -> Result<Vec<Plane>> {
        let frames = match self {
            SequenceConfig::Synth { params, .. } => synth_sequence(params)?,
            SequenceConfig::File {
                path,
                width,
                height,
                frames,
                ..
            } => {
                let src = SequenceSource::open(path, *width, *height)?;
                let n = frames.unwrap_or(src.frame_count);
                read_frames(&src, 0..n)?
            }
        };
        Ok(frames.into_iter().map(|f| f.y).collect())
    }
}

/// Tunable engine parameters; the algorithm is implied by the table name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub iterations: usize,
    pub tau: f64,
    pub n_bf: usize,
    pub gamma: f64,
}

impl EngineConfig {
    pub fn defaults(algorithm: Algorithm) -> Self {
        let p = ExtrapolationParams::defaults(algorithm);
        Self {
            iterations: p.iterations,
            tau: p.tau,
            n_bf: p.n_bf,
            gamma: p.gamma,
        }
    }

    pub fn params(&self, algorithm: Algorithm) -> ExtrapolationParams {
        ExtrapolationParams {
            algorithm,
            iterations: self.iterations,
            tau: self.tau,
            n_bf: self.n_bf,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub mu: f64,
    pub rho: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            mu: DEFAULT_MU,
            rho: DEFAULT_RHO,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub timing_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub sequence: SequenceConfig,
    pub algorithms: Vec<RefinementMode>,
    pub qps: Vec<u32>,
    pub macroblock: usize,
    pub weights: WeightConfig,
    pub search: SearchParams,
    pub fsa: EngineConfig,
    pub rba: EngineConfig,
    pub msa: EngineConfig,
    pub output: OutputConfig,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sequence: SequenceConfig::default(),
            algorithms: RefinementMode::ALL.to_vec(),
            qps: DEFAULT_QPS.to_vec(),
            macroblock: MACROBLOCK_SIZE,
            weights: WeightConfig::default(),
            search: SearchParams::default(),
            fsa: EngineConfig::defaults(Algorithm::Fsa),
            rba: EngineConfig::defaults(Algorithm::Rba),
            msa: EngineConfig::defaults(Algorithm::Msa),
            output: OutputConfig::default(),
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn engine(&self, algorithm: Algorithm) -> ExtrapolationParams {
        match algorithm {
            Algorithm::Fsa => self.fsa.params(algorithm),
            Algorithm::Rba => self.rba.params(algorithm),
            Algorithm::Msa => self.msa.params(algorithm),
        }
    }

    pub fn encoder_config(&self, mode: RefinementMode) -> EncoderConfig {
        let mut cfg = EncoderConfig::new(mode);
        if let Some(a) = mode.algorithm() {
            cfg.extrapolation = self.engine(a);
        }
        cfg.search = self.search;
        cfg.qps = self.qps.clone();
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::Config("algorithms must be distinct".into()));
        }
        for &mode in &self.algorithms {
            self.encoder_config(mode).validate()?;
        }
        Refiner::new(self.macroblock, self.weights.mu, self.weights.rho).map(|_| ())?;
        let (w, h) = match &self.sequence {
            SequenceConfig::Synth { params, .. } => {
                if params.frames < 2 {
                    return Err(Error::SequenceTooShort(params.frames));
                }
                (params.width, params.height)
            }
            SequenceConfig::File { width, height, .. } => (*width, *height),
        };
        if w % self.macroblock != 0 || h % self.macroblock != 0 || w == 0 || h == 0 {
            return Err(Error::Config(format!(
                "{w}x{h} is not a multiple of the {}-sample macroblock",
                self.macroblock
            )));
        }
        Ok(())
    }

    fn refiner(&self) -> Result<Refiner> {
        Refiner::new(self.macroblock, self.weights.mu, self.weights.rho)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdRow {
    pub sequence: String,
    pub algorithm: RefinementMode,
    pub qp: u32,
    pub qstep: f64,
    pub rate_kbps: f64,
    pub psnr_db: f64,
    pub refined_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub sequence: String,
    pub algorithm: RefinementMode,
    pub qp: u32,
    pub iterations: usize,
    pub refine_ms_per_frame: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BdSummary {
    pub algorithm: RefinementMode,
    pub metrics: BdMetrics,
    pub iterations: usize,
    pub refine_ms_per_frame: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<RdRow>,
    pub timing: Vec<TimingRow>,
    pub summary: Vec<BdSummary>,
}

fn iterations_of(config: &RunConfig, mode: RefinementMode) -> usize {
    mode.algorithm().map(|a| config.engine(a).iterations).unwrap_or(0)
}

/// Closed-loop rate-distortion run for every configured algorithm.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let frames = config.sequence.load_luma()?;
    let refiner = config.refiner()?;
    let label = config.sequence.label();
    let pool = config.pool()?;

    let mut rows = Vec::new();
    let mut timing = Vec::new();
    for &mode in &config.algorithms {
        let encoder = config.encoder_config(mode);
        let runs = pool.install(|| encode_sequence(&frames, &encoder, &refiner))?;
        for run in runs {
            rows.push(RdRow {
                sequence: label.clone(),
                algorithm: mode,
                qp: run.qp,
                qstep: run.qstep,
                rate_kbps: run.rate_kbps(),
                psnr_db: run.psnr_db(),
                refined_pct: run.refined_percent(),
            });
            timing.push(TimingRow {
                sequence: label.clone(),
                algorithm: mode,
                qp: run.qp,
                iterations: iterations_of(config, mode),
                refine_ms_per_frame: duration_ms(run.refine_time_per_frame()),
            });
        }
    }
    let summary = summarize(&rows, &timing)?;
    Ok(ExperimentReport {
        rows,
        timing,
        summary,
    })
}

fn duration_ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Curve of one algorithm (and sequence) out of RD rows.
pub fn curve_for(rows: &[RdRow], sequence: &str, algorithm: RefinementMode) -> RdCurve {
    rows.iter()
        .filter(|r| r.sequence == sequence && r.algorithm == algorithm)
        .map(|r| RdPoint::new(r.rate_kbps, r.psnr_db))
        .collect()
}

/// BD metrics of every refinement against the `none` anchor, per sequence.
pub fn summarize(rows: &[RdRow], timing: &[TimingRow]) -> Result<Vec<BdSummary>> {
    let mut out = Vec::new();
    let mut sequences: Vec<&str> = rows.iter().map(|r| r.sequence.as_str()).collect();
    sequences.dedup();
    for seq in sequences {
        let anchor = curve_for(rows, seq, RefinementMode::None);
        if anchor.is_empty() {
            continue;
        }
        for mode in [RefinementMode::Fsa, RefinementMode::Rba, RefinementMode::Msa] {
            let test = curve_for(rows, seq, mode);
            if test.is_empty() {
                continue;
            }
            let times: Vec<&TimingRow> = timing
                .iter()
                .filter(|t| t.sequence == seq && t.algorithm == mode)
                .collect();
            let refine_ms_per_frame = if times.is_empty() {
                0.0
            } else {
                times.iter().map(|t| t.refine_ms_per_frame).sum::<f64>() / times.len() as f64
            };
            out.push(BdSummary {
                algorithm: mode,
                metrics: bd_metrics(&anchor, &test)?,
                iterations: times.first().map(|t| t.iterations).unwrap_or(0),
                refine_ms_per_frame,
            });
        }
    }
    Ok(out)
}

pub fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rd_rows<R: Read>(reader: R) -> Result<Vec<RdRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Minimal curve file: any CSV with `rate_kbps` and `psnr_db` columns.
/// When `algorithm` is given, only rows whose `algorithm` column matches are kept.
pub fn read_curve<R: Read>(reader: R, algorithm: Option<RefinementMode>) -> Result<RdCurve> {
    #[derive(Deserialize)]
    struct Row {
        rate_kbps: f64,
        psnr_db: f64,
        algorithm: Option<RefinementMode>,
    }
    let mut r = csv::Reader::from_reader(reader);
    let mut points = Vec::new();
    for row in r.deserialize::<Row>() {
        let row = row?;
        if algorithm.is_some() && row.algorithm != algorithm {
            continue;
        }
        points.push(RdPoint::new(row.rate_kbps, row.psnr_db));
    }
    Ok(RdCurve::new(points))
}

/// Open-loop prediction quality of one algorithm over a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub sequence: String,
    pub algorithm: RefinementMode,
    pub frames: usize,
    pub mean_psnr_db: f64,
    pub refined_pct: f64,
    pub refine_ms_per_frame: f64,
}

/// Per-frame open-loop prediction PSNRs (frames 1..) for one algorithm.
#[derive(Debug, Clone)]
pub struct OpenLoopRun {
    pub psnr_db: Vec<f64>,
    pub refined_blocks: usize,
    pub blocks: usize,
    pub refine_time: Duration,
    /// Per-block `(mc_mse, chosen_mse)` of every inter frame.
    pub block_mse: Vec<(f64, f64)>,
}

impl OpenLoopRun {
    pub fn mean_psnr(&self) -> f64 {
        self.psnr_db.iter().sum::<f64>() / self.psnr_db.len().max(1) as f64
    }
}

/// Predicts every frame from its predecessor without residual coding.
pub fn open_loop(frames: &[Plane], config: &EncoderConfig, refiner: &Refiner) -> Result<OpenLoopRun> {
    if frames.len() < 2 {
        return Err(Error::SequenceTooShort(frames.len()));
    }
    let mut run = OpenLoopRun {
        psnr_db: Vec::with_capacity(frames.len() - 1),
        refined_blocks: 0,
        blocks: 0,
        refine_time: Duration::ZERO,
        block_mse: Vec::new(),
    };
    for pair in frames.windows(2) {
        let pred = predict_frame(&pair[1], &pair[0], config, refiner)?;
        run.psnr_db.push(psnr(&pair[1], &pred.predictor)?.min(PSNR_CAP_DB));
        run.refined_blocks += pred.refined_blocks();
        run.blocks += pred.decisions.len();
        run.refine_time += pred.refine_time;
        run.block_mse
            .extend(pred.decisions.iter().map(|d| (d.mc_mse, d.chosen_mse)));
    }
    Ok(run)
}

/// Open-loop prediction report for every configured algorithm.
pub fn run_prediction(config: &RunConfig) -> Result<Vec<PredictionRow>> {
    config.validate()?;
    let frames = config.sequence.load_luma()?;
    let refiner = config.refiner()?;
    let label = config.sequence.label();
    let pool = config.pool()?;
    let mut rows = Vec::new();
    for &mode in &config.algorithms {
        let encoder = config.encoder_config(mode);
        let run = pool.install(|| open_loop(&frames, &encoder, &refiner))?;
        rows.push(PredictionRow {
            sequence: label.clone(),
            algorithm: mode,
            frames: run.psnr_db.len(),
            mean_psnr_db: run.mean_psnr(),
            refined_pct: 100.0 * run.refined_blocks as f64 / run.blocks.max(1) as f64,
            refine_ms_per_frame: duration_ms(run.refine_time) / run.psnr_db.len() as f64,
        });
    }
    Ok(rows)
}

/// Quantizer steps of a ladder, for display.
pub fn ladder(qps: &[u32]) -> Vec<(u32, f64)> {
    qps.iter().map(|&qp| (qp, qp_to_qstep(qp))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_roundtrips_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            algorithms = ["none", "msa"]
            qps = [22, 28, 34, 40]

            [sequence]
            source = "synth"
            kind = "translate"
            width = 64
            height = 48
            frames = 3

            [msa]
            iterations = 6
            tau = 0.5
            n_bf = 10
            gamma = 0.7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.algorithms, vec![RefinementMode::None, RefinementMode::Msa]);
        assert_eq!(cfg.engine(Algorithm::Msa).iterations, 6);
        assert_eq!(cfg.engine(Algorithm::Fsa).iterations, 200);
        assert_eq!(cfg.weights.mu, 0.5);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn invalid_configs_are_reported() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        let mut cfg = RunConfig::default();
        cfg.qps = vec![30, 20];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.msa.gamma = 3.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.algorithms = vec![RefinementMode::Msa, RefinementMode::Msa];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        if let SequenceConfig::Synth { params, .. } = &mut cfg.sequence {
            params.width = 40;
        }
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn curve_reader_filters_by_algorithm() {
        let csv = "sequence,algorithm,qp,qstep,rate_kbps,psnr_db,refined_pct\n\
                   s,none,16,4,100,40,0\ns,msa,16,4,90,40.5,12\n";
        let all = read_curve(csv.as_bytes(), None).unwrap();
        assert_eq!(all.len(), 2);
        let msa = read_curve(csv.as_bytes(), Some(RefinementMode::Msa)).unwrap();
        assert_eq!(msa.points(), &[RdPoint::new(90.0, 40.5)]);
        let bare = read_curve("rate_kbps,psnr_db\n1,2\n".as_bytes(), None).unwrap();
        assert_eq!(bare.len(), 1);
    }
}
