//! Half-pel motion search on a panning synthetic clip. Interior blocks
//! point back along the pan: minus twice the velocity, in half-pels.

use srmc::motion::{estimate, mv_bits};
use srmc::sequence::{synth_sequence, SynthParams};
use srmc::{MotionVector, SearchParams};

fn main() -> srmc::Result<()> {
    let params = SynthParams {
        width: 128,
        height: 96,
        frames: 2,
        velocity: (2.5, -1.0),
        ..SynthParams::default()
    };
    let frames = synth_sequence(&params)?;
    let (reference, current) = (&frames[0].y, &frames[1].y);
    let search = SearchParams::default();
    let mut left = MotionVector::ZERO;
    let mut bits = 0;
    for block in current.blocks(16) {
        if block.x0 == 0 {
            left = MotionVector::ZERO;
        }
        let est = estimate(current, reference, block, &search);
        bits += mv_bits(est.mv, left);
        left = est.mv;
        if block.y0 == 32 {
            println!("block ({:3},{:3})  mv ({:3},{:3}) half-pel  sad {}", block.x0, block.y0, est.mv.dx, est.mv.dy, est.sad);
        }
    }
    println!("total motion side information: {bits} bits");
    Ok(())
}
