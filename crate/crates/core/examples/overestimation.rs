//! Three non-orthogonal directions: greedy selection with a full re-solve
//! (RBA) ends up overestimating both selected coefficients, while FSA's
//! per-step projection keeps them closer to the truth.

use srmc::basis::Component;
use srmc::frame::{LayoutKey, ProjectionLayout};
use srmc::{extrapolate, ExtrapolationParams, Refiner};

fn main() -> srmc::Result<()> {
    let refiner = Refiner::new(4, 0.5, 0.8)?;
    let layout = ProjectionLayout::from_key(4, LayoutKey(15));
    let ctx = refiner.context(&layout)?;
    let basis = ctx.basis();
    let picks = [
        (basis.index_of(1, 0, Component::Sin).unwrap(), 1.0),
        (basis.index_of(10, 2, Component::Sin).unwrap(), 0.4),
        (basis.index_of(3, 1, Component::Cos).unwrap(), 0.85),
    ];
    let mut f = vec![0.0; basis.samples()];
    for &(k, c) in &picks {
        basis.add_scaled(k, c, &mut f);
    }

    let fsa = ExtrapolationParams { iterations: 2, gamma: 1.0, ..ExtrapolationParams::fsa() };
    let rba = ExtrapolationParams { iterations: 2, n_bf: 1, ..ExtrapolationParams::rba() };
    for (name, params) in [("fsa", fsa), ("rba", rba)] {
        let s = extrapolate(&f, ctx, &params)?;
        print!("{name}:");
        for &(k, c) in &picks {
            let f = basis.function(k);
            print!("  ({},{},{:?}) {c:.2} -> {:.4}", f.fx, f.fy, f.component, s.model().coefficient(k));
        }
        println!();
    }
    Ok(())
}
