//! Full-search block matching with optional half-pel refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{BlockRef, Plane};

/// Displacement in half-sample units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        Self { dx, dy }
    }

    /// Vector from a full-sample displacement.
    pub fn full(dx: i32, dy: i32) -> Self {
        Self {
            dx: 2 * dx,
            dy: 2 * dy,
        }
    }

    /// Tie-break order: shorter vectors first, then by `dy`, then by `dx`.
    fn order_key(self) -> (i32, i32, i32) {
        (self.dx.abs() + self.dy.abs(), self.dy, self.dx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubPel {
    Integer,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    /// Maximum full-sample displacement in each direction.
    pub range: usize,
    pub subpel: SubPel,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            range: 16,
            subpel: SubPel::Half,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.range == 0 {
            return Err(Error::param("search range", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotionEstimate {
    pub mv: MotionVector,
    pub sad: u32,
}

/// Finds the vector minimizing SAD over the search window clamped to the frame.
pub fn estimate(current: &Plane, reference: &Plane, block: BlockRef, params: &SearchParams) -> MotionEstimate {
    let target = current.block(block);
    let (w, h) = reference.dims();
    let s = block.size as isize;
    let r = params.range as isize;
    let (x0, y0) = (block.x0 as isize, block.y0 as isize);

    let mut best: Option<MotionEstimate> = None;
    let mut consider = |cand: MotionEstimate| {
        let better = match best {
            None => true,
            Some(b) => (cand.sad, cand.mv.order_key()) < (b.sad, b.mv.order_key()),
        };
        if better {
            best = Some(cand);
        }
    };

    let dx_range = (-r).max(-x0)..=r.min(w as isize - s - x0);
    for dy in (-r).max(-y0)..=r.min(h as isize - s - y0) {
        for dx in dx_range.clone() {
            let sad = sad_integer(&target, reference, block, dx, dy);
            consider(MotionEstimate {
                mv: MotionVector::full(dx as i32, dy as i32),
                sad,
            });
        }
    }
    let mut best_full = best.expect("zero displacement is always in the window");

    if params.subpel == SubPel::Half {
        let center = best_full.mv;
        for ddy in -1..=1 {
            for ddx in -1..=1 {
                let mv = MotionVector::new(center.dx + ddx, center.dy + ddy);
                if (ddx, ddy) == (0, 0) || !half_pel_in_window(mv, block, w, h, r) {
                    continue;
                }
                let pred = compensate(reference, block, mv);
                let sad = sad(&target, &pred);
                let cand = MotionEstimate { mv, sad };
                if (cand.sad, cand.mv.order_key()) < (best_full.sad, best_full.mv.order_key()) {
                    best_full = cand;
                }
            }
        }
    }
    best_full
}

fn half_pel_in_window(mv: MotionVector, block: BlockRef, w: usize, h: usize, range: isize) -> bool {
    let fits = |d: i32, origin: usize, extent: usize| {
        let lo = origin as isize + (d as isize).div_euclid(2);
        let hi = origin as isize + (d as isize + 1).div_euclid(2) + block.size as isize;
        (d as isize).abs() <= 2 * range && lo >= 0 && hi <= extent as isize
    };
    fits(mv.dx, block.x0, w) && fits(mv.dy, block.y0, h)
}

fn sad_integer(target: &[u8], reference: &Plane, block: BlockRef, dx: isize, dy: isize) -> u32 {
    let s = block.size;
    let rx = (block.x0 as isize + dx) as usize;
    let ry = (block.y0 as isize + dy) as usize;
    let stride = reference.width();
    let data = reference.data();
    let mut total = 0u32;
    for (j, row) in target.chunks_exact(s).enumerate() {
        let start = (ry + j) * stride + rx;
        total += row
            .iter()
            .zip(&data[start..start + s])
            .map(|(&a, &b)| a.abs_diff(b) as u32)
            .sum::<u32>();
    }
    total
}

pub fn sad(a: &[u8], b: &[u8]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u32).sum()
}

/// Motion-compensated block. Half-sample positions use rounded bilinear
/// averages; positions outside the frame replicate the edge.
pub fn compensate(reference: &Plane, block: BlockRef, mv: MotionVector) -> Vec<u8> {
    let ix = mv.dx.div_euclid(2) as isize;
    let iy = mv.dy.div_euclid(2) as isize;
    let hx = mv.dx.rem_euclid(2) == 1;
    let hy = mv.dy.rem_euclid(2) == 1;
    let s = block.size;
    let mut out = Vec::with_capacity(s * s);
    for j in 0..s {
        let y = block.y0 as isize + j as isize + iy;
        for i in 0..s {
            let x = block.x0 as isize + i as isize + ix;
            let a = reference.get_clamped(x, y) as u16;
            let v = match (hx, hy) {
                (false, false) => a,
                (true, false) => (a + reference.get_clamped(x + 1, y) as u16 + 1) >> 1,
                (false, true) => (a + reference.get_clamped(x, y + 1) as u16 + 1) >> 1,
                (true, true) => {
                    (a + reference.get_clamped(x + 1, y) as u16
                        + reference.get_clamped(x, y + 1) as u16
                        + reference.get_clamped(x + 1, y + 1) as u16
                        + 2)
                        >> 2
                }
            };
            out.push(v as u8);
        }
    }
    out
}

/// Length of the signed exp-Golomb code for `v`.
pub fn signed_exp_golomb_bits(v: i32) -> u32 {
    let code = if v > 0 { 2 * v as u64 - 1 } else { 2 * (-(v as i64)) as u64 };
    2 * (code + 1).ilog2() + 1
}

/// Bits for coding `mv` differentially against `predictor`.
pub fn mv_bits(mv: MotionVector, predictor: MotionVector) -> u32 {
    signed_exp_golomb_bits(mv.dx - predictor.dx) + signed_exp_golomb_bits(mv.dy - predictor.dy)
}
