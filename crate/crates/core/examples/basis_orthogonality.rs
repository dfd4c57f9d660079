//! Builds the real DFT basis and checks that, under uniform weighting, it is
//! orthogonal: the Gram matrix is diagonal with MN/2 (or MN) on the diagonal.

use std::sync::Arc;

use srmc::basis::{build_basis, WeightMask, WeightedBasis};

fn main() -> srmc::Result<()> {
    let (w, h) = (8, 6);
    let basis = Arc::new(build_basis(w, h)?);
    let ctx = WeightedBasis::new(Arc::clone(&basis), WeightMask::uniform(w, h))?;
    let all: Vec<usize> = (0..basis.len()).collect();
    let gram = ctx.gram(&all);
    let n = all.len();

    let mut off_diag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off_diag = off_diag.max(gram[i * n + j].abs());
            }
        }
    }
    println!("{w}x{h} basis: {} functions", basis.len());
    for k in 0..n.min(8) {
        println!("  {:?}  <phi,phi> = {}", basis.function(k), gram[k * n + k]);
    }
    println!("largest off-diagonal entry: {off_diag:.2e}");
    Ok(())
}
