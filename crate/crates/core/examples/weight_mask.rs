//! Prints the weighting function over a 48x48 projection area as coarse
//! ASCII, for a block whose right and bottom neighbors are unavailable.

use srmc::{build_layout, build_weight_mask, BlockRef};

fn main() -> srmc::Result<()> {
    // Bottom-right macroblock of a 64x64 frame: no right or lower neighbors.
    let layout = build_layout((64, 64), BlockRef::new(48, 48, 16))?;
    let mask = build_weight_mask(&layout, 0.5, 0.8)?;
    let side = layout.side();
    println!("layout key {:?}, labels {:?}", layout.key(), layout.labels());
    for n in (0..side).step_by(3) {
        let row: String = (0..side)
            .step_by(3)
            .map(|m| match mask.get(m, n) {
                w if w == 0.0 => '.',
                w if w == 0.5 => '#',
                w if w > 0.1 => '+',
                w if w > 1e-3 => '-',
                _ => ' ',
            })
            .collect();
        println!("{row}");
    }
    println!("center weight {:.3}, corner weight {:.2e}", mask.get(side / 2, side / 2), mask.get(0, 0));
    Ok(())
}
