//! Spatial refinement of a motion-compensated block.
//!
//! [`Refiner`] owns one shared [`BasisSet`] and lazily builds the weighted
//! context for each of the sixteen possible neighbor-availability patterns.

use std::sync::{Arc, OnceLock};

use crate::basis::{build_basis, build_weight_mask, BasisSet, WeightedBasis};
use crate::error::{Error, Result};
use crate::extrapolation::{extrapolate, EngineState, ExtrapolationParams};
use crate::frame::{LayoutKey, Plane, ProjectionLayout, Region};

/// Weight of the motion-compensated block.
pub const DEFAULT_MU: f64 = 0.5;
/// Decay factor of the reconstructed-area weights.
pub const DEFAULT_RHO: f64 = 0.8;

pub struct Refiner {
    macroblock: usize,
    mu: f64,
    rho: f64,
    basis: Arc<BasisSet>,
    contexts: [OnceLock<WeightedBasis>; 16],
}

impl std::fmt::Debug for Refiner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Refiner")
            .field("macroblock", &self.macroblock)
            .field("mu", &self.mu)
            .field("rho", &self.rho)
            .finish_non_exhaustive()
    }
}

/// Refined block plus engine diagnostics.
#[derive(Debug, Clone)]
pub struct Refinement {
    /// Model samples over the block, row-major, unclamped.
    pub block: Vec<f64>,
    pub iterations: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub coefficient_count: usize,
    pub converged: bool,
}

impl Refinement {
    /// Rounds and clamps the block to 8-bit samples.
    pub fn to_samples(&self) -> Vec<u8> {
        self.block
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

impl Refiner {
    pub fn new(macroblock: usize, mu: f64, rho: f64) -> Result<Self> {
        if macroblock == 0 || !macroblock.is_power_of_two() {
            return Err(Error::param(
                "macroblock",
                format!("must be a power of two, got {macroblock}"),
            ));
        }
        // Validates mu/rho once up front.
        build_weight_mask(&ProjectionLayout::from_key(1, LayoutKey(0)), mu, rho)?;
        let side = 3 * macroblock;
        Ok(Self {
            macroblock,
            mu,
            rho,
            basis: Arc::new(build_basis(side, side)?),
            contexts: Default::default(),
        })
    }

    pub fn with_defaults() -> Result<Self> {
        Self::new(crate::frame::MACROBLOCK_SIZE, DEFAULT_MU, DEFAULT_RHO)
    }

    pub fn macroblock(&self) -> usize {
        self.macroblock
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    /// Weighted context for a layout, built on first use.
    pub fn context(&self, layout: &ProjectionLayout) -> Result<&WeightedBasis> {
        if layout.macroblock_size() != self.macroblock {
            return Err(Error::param(
                "layout",
                format!(
                    "macroblock {} does not match refiner macroblock {}",
                    layout.macroblock_size(),
                    self.macroblock
                ),
            ));
        }
        let slot = &self.contexts[layout.key().0 as usize & 0xf];
        if let Some(ctx) = slot.get() {
            return Ok(ctx);
        }
        let canonical = ProjectionLayout::from_key(self.macroblock, layout.key());
        let mask = build_weight_mask(&canonical, self.mu, self.rho)?;
        let ctx = WeightedBasis::new(Arc::clone(&self.basis), mask)?;
        Ok(slot.get_or_init(|| ctx))
    }

    /// Runs the engine on `area` (samples over the projection area) and cuts
    /// the block out of the resulting model.
    pub fn run(
        &self,
        area: &[f64],
        layout: &ProjectionLayout,
        params: &ExtrapolationParams,
    ) -> Result<Refinement> {
        let ctx = self.context(layout)?;
        let state = extrapolate(area, ctx, params)?;
        Ok(self.cut_block(&state, layout))
    }

    pub fn cut_block(&self, state: &EngineState, layout: &ProjectionLayout) -> Refinement {
        let side = layout.side();
        let off = layout.block_offset();
        let mb = self.macroblock;
        let g = state.model().rendering();
        let mut block = Vec::with_capacity(mb * mb);
        for n in off..off + mb {
            block.extend_from_slice(&g[n * side + off..n * side + off + mb]);
        }
        Refinement {
            block,
            iterations: state.iterations(),
            initial_energy: state.initial_energy(),
            final_energy: state.energy(),
            coefficient_count: state.model().len(),
            converged: state.converged(),
        }
    }
}

/// Assembles the unrefined signal over the projection area: reconstructed
/// neighbors from `recon`, the preliminary predictor in the block, zeros in
/// the padding.
pub fn gather_area(recon: &Plane, predictor: &[u8], layout: &ProjectionLayout) -> Vec<f64> {
    let side = layout.side();
    let mb = layout.macroblock_size();
    let (ox, oy) = layout.origin();
    let mut area = vec![0.0; side * side];
    for n in 0..side {
        for m in 0..side {
            area[n * side + m] = match layout.region(m, n) {
                Region::Block => predictor[(n - mb) * mb + (m - mb)] as f64,
                Region::Reconstructed => {
                    let x = (ox + m as isize) as usize;
                    let y = (oy + n as isize) as usize;
                    recon.get(x, y) as f64
                }
                Region::Padding => 0.0,
            };
        }
    }
    area
}
