//! Refines one motion-compensated block of a synthetic frame with each of
//! the three engines and compares the block error.

use srmc::frame::mse;
use srmc::motion::{compensate, estimate};
use srmc::sequence::{synth_sequence, SynthParams};
use srmc::{build_layout, gather_area, Algorithm, BlockRef, ExtrapolationParams, Refiner, SearchParams};

fn main() -> srmc::Result<()> {
    let frames = synth_sequence(&SynthParams {
        width: 96,
        height: 64,
        frames: 2,
        ..SynthParams::default()
    })?;
    let (reference, current) = (&frames[0].y, &frames[1].y);

    // Use the original as "reconstruction" so the neighbors are exact.
    let block = BlockRef::new(32, 16, 16);
    let est = estimate(current, reference, block, &SearchParams::default());
    let predictor = compensate(reference, block, est.mv);
    let original = current.block(block);
    println!("block at ({}, {}), mv {:?}", block.x0, block.y0, est.mv);
    println!("{:>5}  mse {:8.3}", "mc", mse(&original, &predictor)?);

    let refiner = Refiner::with_defaults()?;
    let layout = build_layout(current.dims(), block)?;
    let area = gather_area(current, &predictor, &layout);
    // The encoder keeps whichever of mc and refined is closer per block.
    for alg in Algorithm::ALL {
        let out = refiner.run(&area, &layout, &ExtrapolationParams::defaults(alg))?;
        println!(
            "{:>5}  mse {:8.3}  iterations {:3}  coefficients {:3}",
            alg.name(),
            mse(&original, &out.to_samples())?,
            out.iterations,
            out.coefficient_count
        );
    }
    Ok(())
}
