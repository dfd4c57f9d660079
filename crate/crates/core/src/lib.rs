//! Spatially refined motion-compensated prediction.
//!
//! A motion-compensated block is refined by extrapolating a sparse model from
//! its already reconstructed neighbourhood together with the compensated block
//! itself. Three model generators are provided: frequency selective
//! approximation ([`Algorithm::Fsa`]), the recursive baseline
//! ([`Algorithm::Rba`]) and multiple selection ([`Algorithm::Msa`]).
//!
//! ```
//! use srmc::{build_layout, gather_area, BlockRef, ExtrapolationParams, Plane, Refiner};
//!
//! let recon = Plane::filled(64, 64, 100);
//! let predictor = vec![100u8; 256];
//! let layout = build_layout(recon.dims(), BlockRef::new(16, 16, 16)).unwrap();
//! let area = gather_area(&recon, &predictor, &layout);
//! let refiner = Refiner::with_defaults().unwrap();
//! let out = refiner.run(&area, &layout, &ExtrapolationParams::msa()).unwrap();
//! assert_eq!(out.to_samples(), vec![100; 256]);
//! ```

pub mod basis;
pub mod codec;
pub mod error;
pub mod experiment;
pub mod extrapolation;
pub mod frame;
pub mod motion;
pub mod refine;
pub mod sequence;

pub use basis::{build_basis, build_weight_mask, BasisSet, WeightMask, WeightedBasis};
pub use error::{Error, Result};
pub use extrapolation::{extrapolate, Algorithm, EngineState, ExtrapolationParams};
pub use frame::{build_layout, BlockRef, Plane, ProjectionLayout, Region, MACROBLOCK_SIZE};
pub use motion::{MotionVector, SearchParams};
pub use refine::{gather_area, Refinement, Refiner};
