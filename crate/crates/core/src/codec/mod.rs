//! Toy hybrid codec used to measure the effect of refinement on rate and distortion.

pub mod bd;
pub mod harness;
pub mod transform;

pub use bd::{bd_metrics, BdMetrics, RdCurve, RdPoint};
pub use harness::{
    encode_closed_loop, encode_frame, encode_intra, encode_sequence, encode_sequence_at,
    predict_frame, qp_to_qstep, rd_curve, regenerate_predictor, BlockDecision, EncodedFrame,
    EncoderConfig, FramePrediction, RefinementMode, SequenceRun, DEFAULT_QPS,
};
