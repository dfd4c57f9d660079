//! Open-loop prediction: every frame predicted from its original
//! predecessor, with and without spatial refinement.

use srmc::codec::{EncoderConfig, RefinementMode};
use srmc::experiment::open_loop;
use srmc::sequence::{synth_sequence, SynthParams};
use srmc::Refiner;

fn main() -> srmc::Result<()> {
    let frames: Vec<_> = synth_sequence(&SynthParams {
        width: 176,
        height: 144,
        frames: 6,
        ..SynthParams::default()
    })?
    .into_iter()
    .map(|f| f.y)
    .collect();
    let refiner = Refiner::with_defaults()?;
    for mode in RefinementMode::ALL {
        let run = open_loop(&frames, &EncoderConfig::new(mode), &refiner)?;
        println!(
            "{:>5}  mean psnr {:7.3} dB  refined {:5.1}%  refine time {:?}",
            mode.name(),
            run.mean_psnr(),
            100.0 * run.refined_blocks as f64 / run.blocks as f64,
            run.refine_time
        );
    }
    Ok(())
}
