//! Line-scan prediction loop with the per-macroblock refinement switch.
//!
//! Every macroblock is first predicted by motion compensation. When a
//! refinement engine is configured, the projection area around the block is
//! assembled from already reconstructed neighbors plus the motion-compensated
//! block, the model's block samples become a second candidate, and the
//! candidate with the lower MSE against the original wins. One flag bit per
//! macroblock is charged whenever refinement is enabled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transform::{entropy_bits, reconstruct_block, TRANSFORM_SIZE};
use crate::error::{Error, Result};
use crate::extrapolation::{Algorithm, ExtrapolationParams};
use crate::frame::{build_layout, mse, psnr, BlockRef, Plane};
use crate::motion::{compensate, estimate, mv_bits, MotionEstimate, MotionVector, SearchParams};
use crate::refine::{gather_area, Refiner};

pub const FRAME_RATE: f64 = 30.0;

/// Ten quantizer indices spanning 16..=43.
pub const DEFAULT_QPS: [u32; 10] = [16, 19, 22, 25, 28, 31, 34, 37, 40, 43];

/// Reported PSNR ceiling for lossless frames.
pub const PSNR_CAP_DB: f64 = 100.0;

/// Uniform quantizer step for an H.264-style quantizer index.
pub fn qp_to_qstep(qp: u32) -> f64 {
    2f64.powf((qp as f64 - 4.0) / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefinementMode {
    None,
    Fsa,
    Rba,
    Msa,
}

impl RefinementMode {
    pub const ALL: [RefinementMode; 4] = [
        RefinementMode::None,
        RefinementMode::Fsa,
        RefinementMode::Rba,
        RefinementMode::Msa,
    ];

    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            RefinementMode::None => None,
            RefinementMode::Fsa => Some(Algorithm::Fsa),
            RefinementMode::Rba => Some(Algorithm::Rba),
            RefinementMode::Msa => Some(Algorithm::Msa),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RefinementMode::None => "none",
            RefinementMode::Fsa => "fsa",
            RefinementMode::Rba => "rba",
            RefinementMode::Msa => "msa",
        }
    }
}

impl From<Algorithm> for RefinementMode {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Fsa => RefinementMode::Fsa,
            Algorithm::Rba => RefinementMode::Rba,
            Algorithm::Msa => RefinementMode::Msa,
        }
    }
}

impl fmt::Display for RefinementMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RefinementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "mc" => Ok(RefinementMode::None),
            other => other.parse::<Algorithm>().map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub refinement: RefinementMode,
    /// Engine parameters; ignored when `refinement` is `None`.
    pub extrapolation: ExtrapolationParams,
    pub search: SearchParams,
    /// Quantizer ladder, strictly increasing.
    pub qps: Vec<u32>,
}

impl EncoderConfig {
    pub fn new(refinement: RefinementMode) -> Self {
        let extrapolation = refinement
            .algorithm()
            .map(ExtrapolationParams::defaults)
            .unwrap_or_else(ExtrapolationParams::msa);
        Self {
            refinement,
            extrapolation,
            search: SearchParams::default(),
            qps: DEFAULT_QPS.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if self.qps.is_empty() {
            return Err(Error::param("qps", "ladder is empty"));
        }
        if self.qps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("qps", "must be strictly increasing"));
        }
        if let Some(algorithm) = self.refinement.algorithm() {
            if self.extrapolation.algorithm != algorithm {
                return Err(Error::param(
                    "extrapolation",
                    format!(
                        "parameters are for {} but refinement is {}",
                        self.extrapolation.algorithm, algorithm
                    ),
                ));
            }
            self.extrapolation.validate()?;
        }
        Ok(())
    }

    pub fn qsteps(&self) -> Vec<f64> {
        self.qps.iter().map(|&qp| qp_to_qstep(qp)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecision {
    pub block: BlockRef,
    pub mv: MotionVector,
    /// The refined predictor was chosen.
    pub refined: bool,
    /// The block had at least one reconstructed neighbor and was refined.
    pub refinement_run: bool,
    pub mc_mse: f64,
    pub chosen_mse: f64,
}

#[derive(Debug, Clone)]
pub struct FramePrediction {
    pub predictor: Plane,
    pub decisions: Vec<BlockDecision>,
    pub mv_bits: u64,
    pub flag_bits: u64,
    /// Wall-clock time spent inside the refinement engine, summed over blocks.
    pub refine_time: Duration,
}

impl FramePrediction {
    pub fn side_info_bits(&self) -> u64 {
        self.mv_bits + self.flag_bits
    }

    pub fn refined_blocks(&self) -> usize {
        self.decisions.iter().filter(|d| d.refined).count()
    }
}

fn check_dims(plane: &Plane, mb: usize) -> Result<()> {
    let (w, h) = plane.dims();
    if w == 0 || h == 0 || w % mb != 0 || h % mb != 0 {
        return Err(Error::param(
            "frame size",
            format!("{w}x{h} is not a positive multiple of the {mb}-sample macroblock"),
        ));
    }
    Ok(())
}

fn check_pair(a: &Plane, b: &Plane) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

/// Motion-compensated candidate, optionally refined against `neighbors`.
struct BlockOutcome {
    samples: Vec<u8>,
    decision: BlockDecision,
    refine_time: Duration,
}

fn predict_block(
    original: &Plane,
    reference: &Plane,
    neighbors: &Plane,
    block: BlockRef,
    motion: MotionEstimate,
    config: &EncoderConfig,
    refiner: &Refiner,
) -> Result<BlockOutcome> {
    let target = original.block(block);
    let mc = compensate(reference, block, motion.mv);
    let mc_mse = mse(&target, &mc)?;
    let mut outcome = BlockOutcome {
        samples: mc,
        decision: BlockDecision {
            block,
            mv: motion.mv,
            refined: false,
            refinement_run: false,
            mc_mse,
            chosen_mse: mc_mse,
        },
        refine_time: Duration::ZERO,
    };
    let Some(_) = config.refinement.algorithm() else {
        return Ok(outcome);
    };
    let layout = build_layout(original.dims(), block)?;
    if layout.key().reconstructed_blocks() == 0 {
        return Ok(outcome);
    }
    let area = gather_area(neighbors, &outcome.samples, &layout);
    let start = Instant::now();
    let refinement = refiner.run(&area, &layout, &config.extrapolation)?;
    outcome.refine_time = start.elapsed();
    outcome.decision.refinement_run = true;

    let refined = refinement.to_samples();
    let refined_mse = mse(&target, &refined)?;
    if refined_mse < mc_mse {
        outcome.samples = refined;
        outcome.decision.refined = true;
        outcome.decision.chosen_mse = refined_mse;
    }
    Ok(outcome)
}

fn estimate_all(current: &Plane, reference: &Plane, mb: usize, search: &SearchParams) -> Vec<MotionEstimate> {
    let blocks: Vec<BlockRef> = current.blocks(mb).collect();
    blocks
        .par_iter()
        .map(|&b| estimate(current, reference, b, search))
        .collect()
}

/// Side-info bits: exp-Golomb MV differences against the left neighbor plus
/// one flag per macroblock when refinement is enabled.
fn side_info(decisions: &[BlockDecision], blocks_per_row: usize, config: &EncoderConfig) -> (u64, u64) {
    let mut mv_total = 0u64;
    for (i, d) in decisions.iter().enumerate() {
        let pred = if i % blocks_per_row == 0 {
            MotionVector::ZERO
        } else {
            decisions[i - 1].mv
        };
        mv_total += mv_bits(d.mv, pred) as u64;
    }
    let flags = if config.refinement.algorithm().is_some() {
        decisions.len() as u64
    } else {
        0
    };
    (mv_total, flags)
}

/// Open-loop prediction of `current` from `reference`. Neighbor samples come
/// from `current` itself, so all blocks are independent and run in parallel.
pub fn predict_frame(
    current: &Plane,
    reference: &Plane,
    config: &EncoderConfig,
    refiner: &Refiner,
) -> Result<FramePrediction> {
    config.validate()?;
    let mb = refiner.macroblock();
    check_dims(current, mb)?;
    check_pair(current, reference)?;
    let motion = estimate_all(current, reference, mb, &config.search);
    let blocks: Vec<BlockRef> = current.blocks(mb).collect();
    let outcomes = blocks
        .par_iter()
        .zip(motion.par_iter())
        .map(|(&b, &m)| predict_block(current, reference, current, b, m, config, refiner))
        .collect::<Result<Vec<_>>>()?;

    let mut predictor = Plane::new(current.width(), current.height());
    let mut refine_time = Duration::ZERO;
    let mut decisions = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        predictor.put_block(o.decision.block, &o.samples);
        refine_time += o.refine_time;
        decisions.push(o.decision);
    }
    let (mv_bits, flag_bits) = side_info(&decisions, current.width() / mb, config);
    Ok(FramePrediction {
        predictor,
        decisions,
        mv_bits,
        flag_bits,
        refine_time,
    })
}

#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub recon: Plane,
    pub prediction: FramePrediction,
    pub coefficient_histogram: BTreeMap<i32, u64>,
}

impl EncodedFrame {
    /// Zeroth-order entropy of the frame's pooled coefficient levels.
    pub fn coefficient_bits(&self) -> f64 {
        entropy_bits(&self.coefficient_histogram)
    }

    pub fn total_bits(&self) -> f64 {
        self.coefficient_bits() + self.prediction.side_info_bits() as f64
    }
}

/// Closed-loop coding of one inter frame: blocks are predicted and
/// reconstructed in line-scan order, and refinement only sees neighbors that
/// are already reconstructed.
pub fn encode_frame(
    current: &Plane,
    reference_recon: &Plane,
    config: &EncoderConfig,
    refiner: &Refiner,
    qstep: f64,
) -> Result<EncodedFrame> {
    config.validate()?;
    let mb = refiner.macroblock();
    check_dims(current, mb)?;
    check_pair(current, reference_recon)?;
    check_transform_tiling(mb)?;
    if !(qstep > 0.0) {
        return Err(Error::param("qstep", format!("must be > 0, got {qstep}")));
    }
    // Motion search only reads the original and the reference, never the
    // frame being reconstructed.
    let motion = estimate_all(current, reference_recon, mb, &config.search);

    let mut recon = Plane::new(current.width(), current.height());
    let mut predictor = Plane::new(current.width(), current.height());
    let mut histogram = BTreeMap::new();
    let mut decisions = Vec::with_capacity(motion.len());
    let mut refine_time = Duration::ZERO;
    let blocks: Vec<BlockRef> = current.blocks(mb).collect();
    for (&block, &m) in blocks.iter().zip(&motion) {
        let outcome = predict_block(current, reference_recon, &recon, block, m, config, refiner)?;
        let coded = reconstruct_block(&current.block(block), &outcome.samples, mb, qstep);
        for &l in &coded.levels {
            *histogram.entry(l).or_insert(0u64) += 1;
        }
        recon.put_block(block, &coded.recon);
        predictor.put_block(block, &outcome.samples);
        refine_time += outcome.refine_time;
        decisions.push(outcome.decision);
    }
    let (mv_bits, flag_bits) = side_info(&decisions, current.width() / mb, config);
    Ok(EncodedFrame {
        recon,
        prediction: FramePrediction {
            predictor,
            decisions,
            mv_bits,
            flag_bits,
            refine_time,
        },
        coefficient_histogram: histogram,
    })
}

fn check_transform_tiling(mb: usize) -> Result<()> {
    if mb % TRANSFORM_SIZE != 0 {
        return Err(Error::param(
            "macroblock",
            format!("{mb} is not a multiple of the {TRANSFORM_SIZE}-sample residual transform"),
        ));
    }
    Ok(())
}

/// Intra frame: flat mid-gray predictor through the same residual coder.
pub fn encode_intra(current: &Plane, mb: usize, qstep: f64) -> Result<EncodedFrame> {
    check_dims(current, mb)?;
    check_transform_tiling(mb)?;
    let flat = vec![128u8; mb * mb];
    let mut recon = Plane::new(current.width(), current.height());
    let mut histogram = BTreeMap::new();
    let mut decisions = Vec::new();
    for block in current.blocks(mb) {
        let target = current.block(block);
        let coded = reconstruct_block(&target, &flat, mb, qstep);
        for &l in &coded.levels {
            *histogram.entry(l).or_insert(0u64) += 1;
        }
        recon.put_block(block, &coded.recon);
        let m = mse(&target, &flat)?;
        decisions.push(BlockDecision {
            block,
            mv: MotionVector::ZERO,
            refined: false,
            refinement_run: false,
            mc_mse: m,
            chosen_mse: m,
        });
    }
    Ok(EncodedFrame {
        recon,
        prediction: FramePrediction {
            predictor: Plane::filled(current.width(), current.height(), 128),
            decisions,
            mv_bits: 0,
            flag_bits: 0,
            refine_time: Duration::ZERO,
        },
        coefficient_histogram: histogram,
    })
}

/// Rebuilds a frame's predictor from decoder-side data only: the reference
/// reconstruction, the current reconstruction, and the transmitted vectors
/// and flags.
pub fn regenerate_predictor(
    current_recon: &Plane,
    reference_recon: &Plane,
    decisions: &[BlockDecision],
    config: &EncoderConfig,
    refiner: &Refiner,
) -> Result<Plane> {
    check_pair(current_recon, reference_recon)?;
    let blocks = decisions
        .par_iter()
        .map(|d| -> Result<(BlockRef, Vec<u8>)> {
            let mc = compensate(reference_recon, d.block, d.mv);
            if !d.refined {
                return Ok((d.block, mc));
            }
            let layout = build_layout(current_recon.dims(), d.block)?;
            let area = gather_area(current_recon, &mc, &layout);
            let refined = refiner.run(&area, &layout, &config.extrapolation)?;
            Ok((d.block, refined.to_samples()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Plane::new(current_recon.width(), current_recon.height());
    for (b, samples) in blocks {
        out.put_block(b, &samples);
    }
    Ok(out)
}

/// Per-frame statistics of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLog {
    pub index: usize,
    pub bits: f64,
    pub coefficient_bits: f64,
    pub side_info_bits: u64,
    pub psnr_db: f64,
    pub refined_blocks: usize,
    pub blocks: usize,
    pub refine_time: Duration,
}

/// One closed-loop encode of a whole sequence at a single quantizer.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub qp: u32,
    pub qstep: f64,
    /// Inter frames only; the intra frame is excluded from every mean.
    pub frames: Vec<FrameLog>,
}

impl SequenceRun {
    pub fn rate_kbps(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        let bits: f64 = self.frames.iter().map(|f| f.bits).sum();
        bits / self.frames.len() as f64 * FRAME_RATE / 1000.0
    }

    pub fn psnr_db(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.frames.iter().map(|f| f.psnr_db).sum::<f64>() / self.frames.len() as f64
    }

    pub fn refined_percent(&self) -> f64 {
        let blocks: usize = self.frames.iter().map(|f| f.blocks).sum();
        if blocks == 0 {
            return 0.0;
        }
        let refined: usize = self.frames.iter().map(|f| f.refined_blocks).sum();
        100.0 * refined as f64 / blocks as f64
    }

    pub fn refine_time_per_frame(&self) -> Duration {
        if self.frames.is_empty() {
            return Duration::ZERO;
        }
        let total: Duration = self.frames.iter().map(|f| f.refine_time).sum();
        total / self.frames.len() as u32
    }
}

/// Closed-loop IPPP encode keeping every frame's reconstruction and predictor.
/// Entry 0 is the intra frame, coded at `intra_qstep`.
pub fn encode_closed_loop(
    frames: &[Plane],
    config: &EncoderConfig,
    refiner: &Refiner,
    qstep: f64,
    intra_qstep: f64,
) -> Result<Vec<EncodedFrame>> {
    if frames.len() < 2 {
        return Err(Error::SequenceTooShort(frames.len()));
    }
    config.validate()?;
    check_transform_tiling(refiner.macroblock())?;
    let mut out = Vec::with_capacity(frames.len());
    out.push(encode_intra(&frames[0], refiner.macroblock(), intra_qstep)?);
    for frame in &frames[1..] {
        let reference = &out.last().expect("intra frame pushed").recon;
        let encoded = encode_frame(frame, reference, config, refiner, qstep)?;
        out.push(encoded);
    }
    Ok(out)
}

fn frame_log(index: usize, original: &Plane, encoded: &EncodedFrame) -> Result<FrameLog> {
    Ok(FrameLog {
        index,
        bits: encoded.total_bits(),
        coefficient_bits: encoded.coefficient_bits(),
        side_info_bits: encoded.prediction.side_info_bits(),
        psnr_db: psnr(original, &encoded.recon)?.min(PSNR_CAP_DB),
        refined_blocks: encoded.prediction.refined_blocks(),
        blocks: encoded.prediction.decisions.len(),
        refine_time: encoded.prediction.refine_time,
    })
}

/// Encodes `frames` at one quantizer index and summarizes the inter frames.
pub fn encode_sequence_at(frames: &[Plane], config: &EncoderConfig, refiner: &Refiner, qp: u32) -> Result<SequenceRun> {
    let intra_qp = *config.qps.first().ok_or_else(|| Error::param("qps", "ladder is empty"))?;
    let qstep = qp_to_qstep(qp);
    let encoded = encode_closed_loop(frames, config, refiner, qstep, qp_to_qstep(intra_qp))?;
    let logs = encoded
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, e)| frame_log(i, &frames[i], e))
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceRun {
        qp,
        qstep,
        frames: logs,
    })
}

/// Runs the whole quantizer ladder (quantizers in parallel) and returns the
/// runs in ladder order.
pub fn encode_sequence(frames: &[Plane], config: &EncoderConfig, refiner: &Refiner) -> Result<Vec<SequenceRun>> {
    if frames.len() < 2 {
        return Err(Error::SequenceTooShort(frames.len()));
    }
    config.validate()?;
    config
        .qps
        .par_iter()
        .map(|&qp| encode_sequence_at(frames, config, refiner, qp))
        .collect()
}

pub fn rd_curve(runs: &[SequenceRun]) -> super::bd::RdCurve {
    runs.iter()
        .map(|r| super::bd::RdPoint::new(r.rate_kbps(), r.psnr_db()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qstep_ladder() {
        assert!((qp_to_qstep(4) - 1.0).abs() < 1e-12);
        assert!((qp_to_qstep(16) - 4.0).abs() < 1e-12);
        assert!((qp_to_qstep(43) - 2f64.powf(6.5)).abs() < 1e-9);
        let cfg = EncoderConfig::new(RefinementMode::Msa);
        let steps = cfg.qsteps();
        assert_eq!(steps.len(), 10);
        assert!(steps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_validation() {
        let mut cfg = EncoderConfig::new(RefinementMode::Rba);
        assert!(cfg.validate().is_ok());
        cfg.qps = vec![20, 20];
        assert!(cfg.validate().is_err());
        let mut cfg = EncoderConfig::new(RefinementMode::Msa);
        cfg.extrapolation = ExtrapolationParams::fsa();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mode_parsing() {
        for m in RefinementMode::ALL {
            assert_eq!(m.name().parse::<RefinementMode>().unwrap(), m);
        }
        assert_eq!("MC".parse::<RefinementMode>().unwrap(), RefinementMode::None);
    }

    #[test]
    fn single_frame_sequence_is_rejected() {
        let refiner = Refiner::new(4, 0.5, 0.8).unwrap();
        let frames = vec![Plane::new(16, 16)];
        let cfg = EncoderConfig::new(RefinementMode::None);
        assert!(matches!(
            encode_sequence(&frames, &cfg, &refiner),
            Err(Error::SequenceTooShort(1))
        ));
    }
}
