//! Helpers shared by the integration tests: independent oracles and
//! reproducible test signals.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use srmc::basis::WeightMask;
use srmc::frame::{build_layout, BlockRef, LayoutKey, Plane, ProjectionLayout};
use srmc::refine::gather_area;
use srmc::sequence::{synth_sequence, SynthParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense weighted inner product with plain loops.
pub fn dense_inner(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i] * w[i];
    }
    s
}

/// Gaussian elimination with partial pivoting on a dense row-major copy.
pub fn gauss_solve(a: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i * n..(i + 1) * n].to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = m[r][n];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    x
}

/// Eq.-style weights rebuilt independently: mu on the block, rho^distance on
/// reconstructed samples, zero on padding.
pub fn oracle_weights(layout: &ProjectionLayout, mu: f64, rho: f64) -> Vec<f64> {
    let side = layout.side();
    let c = (side as f64 - 1.0) / 2.0;
    let mut w = vec![0.0; side * side];
    for n in 0..side {
        for m in 0..side {
            let region = layout.region(m, n);
            w[n * side + m] = match region {
                srmc::frame::Region::Block => mu,
                srmc::frame::Region::Reconstructed => {
                    let d = ((m as f64 - c).powi(2) + (n as f64 - c).powi(2)).sqrt();
                    rho.powf(d)
                }
                srmc::frame::Region::Padding => 0.0,
            };
        }
    }
    w
}

pub fn mask_from(layout: &ProjectionLayout, mu: f64, rho: f64) -> WeightMask {
    let side = layout.side();
    WeightMask::from_weights(side, side, oracle_weights(layout, mu, rho)).unwrap()
}

pub fn random_key<R: Rng>(rng: &mut R) -> LayoutKey {
    LayoutKey(rng.random_range(0..16u8))
}

/// A synthetic CIF frame and a noisy second-frame stand-in for block sources.
pub struct TextureSource {
    pub frame: Plane,
    pub next: Plane,
}

impl TextureSource {
    pub fn new(seed: u64) -> Self {
        let params = SynthParams {
            frames: 2,
            seed,
            ..SynthParams::default()
        };
        let mut frames = synth_sequence(&params).unwrap();
        let next = frames.pop().unwrap().y;
        let frame = frames.pop().unwrap().y;
        Self { frame, next }
    }

    /// Projection-area signal of a random interior-or-border macroblock whose
    /// block content is the co-located block of the next frame.
    pub fn random_area<R: Rng>(&self, rng: &mut R, mb: usize) -> (Vec<f64>, ProjectionLayout) {
        let (w, h) = self.frame.dims();
        let bx = rng.random_range(0..w / mb) * mb;
        let by = rng.random_range(0..h / mb) * mb;
        let block = BlockRef::new(bx, by, mb);
        let layout = build_layout((w, h), block).unwrap();
        let predictor = self.next.block(block);
        (gather_area(&self.frame, &predictor, &layout), layout)
    }
}

/// Random areas whose layout has at least one reconstructed neighbor.
pub fn refinable_areas(count: usize, seed: u64, mb: usize) -> Vec<(Vec<f64>, ProjectionLayout)> {
    let src = TextureSource::new(seed);
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (area, layout) = src.random_area(&mut r, mb);
        if layout.key().reconstructed_blocks() > 0 {
            out.push((area, layout));
        }
    }
    out
}
