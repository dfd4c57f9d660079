//! Rasters, macroblock addressing and distortion metrics.
//!
//! A [`Plane`] holds 8-bit samples of one picture component. A [`Raster`]
//! holds real-valued samples; the extrapolation engines work exclusively on
//! rasters covering a [`ProjectionLayout`].

use crate::error::{Error, Result};

/// Default macroblock edge length in samples.
pub const MACROBLOCK_SIZE: usize = 16;

/// Row-major 8-bit samples.
#[derive(Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Plane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plane")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Sample access with coordinates clamped to the plane (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    /// Copies a square block out in row-major order.
    pub fn block(&self, block: BlockRef) -> Vec<u8> {
        let mut out = Vec::with_capacity(block.size * block.size);
        for y in block.y0..block.y0 + block.size {
            let row = y * self.width;
            out.extend_from_slice(&self.data[row + block.x0..row + block.x0 + block.size]);
        }
        out
    }

    pub fn put_block(&mut self, block: BlockRef, samples: &[u8]) {
        debug_assert_eq!(samples.len(), block.size * block.size);
        for (j, src) in samples.chunks_exact(block.size).enumerate() {
            let row = (block.y0 + j) * self.width;
            self.data[row + block.x0..row + block.x0 + block.size].copy_from_slice(src);
        }
    }

    /// Macroblocks of the plane in line-scan order.
    pub fn blocks(&self, size: usize) -> impl Iterator<Item = BlockRef> + '_ {
        let cols = self.width / size;
        let rows = self.height / size;
        (0..rows).flat_map(move |by| {
            (0..cols).map(move |bx| BlockRef {
                x0: bx * size,
                y0: by * size,
                size,
            })
        })
    }
}

/// Row-major real-valued samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[n * self.width + m]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, value: f64) {
        self.data[n * self.width + m] = value;
    }
}

/// A square block addressed by its top-left sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockRef {
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
}

impl BlockRef {
    pub fn new(x0: usize, y0: usize, size: usize) -> Self {
        Self { x0, y0, size }
    }

    /// Checks alignment and containment in a `width`x`height` frame.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        let ok = self.size > 0
            && self.x0 % self.size == 0
            && self.y0 % self.size == 0
            && self.x0 + self.size <= width
            && self.y0 + self.size <= height;
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry {
                x0: self.x0,
                y0: self.y0,
                size: self.size,
                width,
                height,
            })
        }
    }
}

/// Role of a sample inside the projection area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// The block being predicted.
    Block,
    /// Already reconstructed neighbor samples.
    Reconstructed,
    /// Not yet available; excluded from model generation.
    Padding,
}

/// Which of the four causal neighbors (left, top-left, top, top-right) are
/// available, packed into the low four bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayoutKey(pub u8);

impl LayoutKey {
    pub const LEFT: u8 = 1;
    pub const TOP_LEFT: u8 = 2;
    pub const TOP: u8 = 4;
    pub const TOP_RIGHT: u8 = 8;

    pub fn reconstructed_blocks(self) -> usize {
        self.0.count_ones() as usize
    }
}

/// Geometry of the 3x3-macroblock projection area centered on a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionLayout {
    block: BlockRef,
    key: LayoutKey,
    /// Labels of the nine macroblocks in row-major order.
    labels: [Region; 9],
    region_map: Vec<Region>,
}

impl ProjectionLayout {
    /// Layout for the given neighbor availability, independent of any frame.
    pub fn from_key(mb: usize, key: LayoutKey) -> Self {
        use Region::*;
        let avail = |bit: u8| {
            if key.0 & bit != 0 {
                Reconstructed
            } else {
                Padding
            }
        };
        let labels = [
            avail(LayoutKey::TOP_LEFT),
            avail(LayoutKey::TOP),
            avail(LayoutKey::TOP_RIGHT),
            avail(LayoutKey::LEFT),
            Block,
            Padding,
            Padding,
            Padding,
            Padding,
        ];
        let side = 3 * mb;
        let mut region_map = Vec::with_capacity(side * side);
        for n in 0..side {
            for m in 0..side {
                region_map.push(labels[(n / mb) * 3 + m / mb]);
            }
        }
        Self {
            block: BlockRef::new(mb, mb, mb),
            key,
            labels,
            region_map,
        }
    }

    pub fn block(&self) -> BlockRef {
        self.block
    }

    pub fn key(&self) -> LayoutKey {
        self.key
    }

    pub fn macroblock_size(&self) -> usize {
        self.block.size
    }

    /// Edge length of the projection area (M = N).
    pub fn side(&self) -> usize {
        3 * self.block.size
    }

    pub fn labels(&self) -> &[Region; 9] {
        &self.labels
    }

    pub fn region_map(&self) -> &[Region] {
        &self.region_map
    }

    #[inline]
    pub fn region(&self, m: usize, n: usize) -> Region {
        self.region_map[n * self.side() + m]
    }

    pub fn count(&self, region: Region) -> usize {
        self.region_map.iter().filter(|&&r| r == region).count()
    }

    /// Frame position of sample (0, 0) of the projection area; may be negative.
    pub fn origin(&self) -> (isize, isize) {
        (
            self.block.x0 as isize - self.block.size as isize,
            self.block.y0 as isize - self.block.size as isize,
        )
    }

    /// Offset of the block inside the projection area.
    pub fn block_offset(&self) -> usize {
        self.block.size
    }
}

/// Builds the projection layout for `block` inside a frame of `frame_dims`.
///
/// A neighbor counts as reconstructed when it precedes the block in line-scan
/// order and lies inside the frame.
pub fn build_layout(frame_dims: (usize, usize), block: BlockRef) -> Result<ProjectionLayout> {
    let (width, height) = frame_dims;
    block.validate(width, height)?;
    let s = block.size;
    let mut key = 0u8;
    if block.x0 >= s {
        key |= LayoutKey::LEFT;
    }
    if block.y0 >= s {
        key |= LayoutKey::TOP;
        if block.x0 >= s {
            key |= LayoutKey::TOP_LEFT;
        }
        if block.x0 + 2 * s <= width {
            key |= LayoutKey::TOP_RIGHT;
        }
    }
    let mut layout = ProjectionLayout::from_key(s, LayoutKey(key));
    layout.block = block;
    Ok(layout)
}

/// Mean squared difference of two equally sized sample sequences.
pub fn mse<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: (a.len(), 1),
            right: (b.len(), 1),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.into() - y.into();
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// PSNR for 8-bit samples; `f64::INFINITY` when `mse` is zero.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

pub fn psnr(reference: &Plane, test: &Plane) -> Result<f64> {
    if reference.dims() != test.dims() {
        return Err(Error::DimensionMismatch {
            left: reference.dims(),
            right: test.dims(),
        });
    }
    Ok(psnr_from_mse(mse(reference.data(), test.data())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels_of(layout: &ProjectionLayout) -> (usize, usize, usize) {
        let mb = layout.macroblock_size() * layout.macroblock_size();
        (
            layout.count(Region::Block) / mb,
            layout.count(Region::Reconstructed) / mb,
            layout.count(Region::Padding) / mb,
        )
    }

    #[test]
    fn interior_block_has_four_reconstructed_neighbors() {
        let layout = build_layout((352, 288), BlockRef::new(160, 128, 16)).unwrap();
        assert_eq!(labels_of(&layout), (1, 4, 4));
        assert_eq!(layout.side(), 48);
        use Region::*;
        assert_eq!(
            layout.labels(),
            &[
                Reconstructed,
                Reconstructed,
                Reconstructed,
                Reconstructed,
                Block,
                Padding,
                Padding,
                Padding,
                Padding
            ]
        );
    }

    #[test]
    fn first_block_has_no_reconstructed_area() {
        let layout = build_layout((352, 288), BlockRef::new(0, 0, 16)).unwrap();
        assert_eq!(labels_of(&layout), (1, 0, 8));
    }

    #[test]
    fn top_row_block_sees_only_left() {
        let layout = build_layout((352, 288), BlockRef::new(16, 0, 16)).unwrap();
        assert_eq!(labels_of(&layout), (1, 1, 7));
        assert_eq!(layout.labels()[3], Region::Reconstructed);
    }

    #[test]
    fn right_column_loses_top_right() {
        let layout = build_layout((352, 288), BlockRef::new(336, 16, 16)).unwrap();
        assert_eq!(labels_of(&layout), (1, 3, 5));
        assert_eq!(layout.labels()[2], Region::Padding);
        let left_col = build_layout((352, 288), BlockRef::new(0, 16, 16)).unwrap();
        assert_eq!(labels_of(&left_col), (1, 2, 6));
    }

    #[test]
    fn block_outside_frame_is_rejected() {
        assert!(build_layout((352, 288), BlockRef::new(352, 0, 16)).is_err());
        assert!(build_layout((352, 288), BlockRef::new(8, 0, 16)).is_err());
    }

    #[test]
    fn mse_examples() {
        let a = vec![7u8; 256];
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let zero = vec![0u8; 256];
        let sixteen = vec![16u8; 256];
        assert_eq!(mse(&zero, &sixteen).unwrap(), 256.0);
        assert!(mse(&zero, &sixteen[..10]).is_err());
    }

    #[test]
    fn psnr_examples() {
        assert!((psnr_from_mse(255.0 * 255.0)).abs() < 1e-12);
        assert!((psnr_from_mse(1.0) - 48.1308).abs() < 0.01);
        let p = Plane::filled(4, 4, 9);
        assert_eq!(psnr(&p, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn block_copy_roundtrip() {
        let mut p = Plane::new(32, 32);
        let b = BlockRef::new(16, 16, 16);
        let samples: Vec<u8> = (0..=255).collect();
        p.put_block(b, &samples);
        assert_eq!(p.block(b), samples);
        assert_eq!(p.get(17, 16), 1);
        assert_eq!(p.blocks(16).count(), 4);
    }
}
