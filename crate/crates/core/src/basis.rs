//! Real-valued Fourier basis over the projection area and the spatial
//! weighting function.
//!
//! The complex 2D DFT exponentials are folded into a real family: for every
//! frequency pair `(fx, fy)` that is not the conjugate of one already listed
//! we emit `cos(θ)` and, unless it vanishes identically, `sin(θ)`, where
//! `θ = 2π(fx·m/M + fy·n/N)`. The family has exactly `M·N` members and is
//! orthogonal under the unweighted inner product over the whole area.
//!
//! Two evaluation routes exist for every weighted quantity. The explicit
//! route sums over stored rasters. The spectral route uses the DFT of the
//! weighted signal (for projections) or of the weight mask itself (for Gram
//! entries) and is what the engines use.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::frame::{ProjectionLayout, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisFunction {
    pub fx: usize,
    pub fy: usize,
    pub component: Component,
}

/// Explicitly stored basis rasters plus FFT plans for the spectral route.
pub struct BasisSet {
    width: usize,
    height: usize,
    functions: Vec<BasisFunction>,
    rasters: Vec<f64>,
    uniform_norms: Vec<f64>,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for BasisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisSet")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("len", &self.functions.len())
            .finish()
    }
}

/// Builds the `M·N` real basis functions over an `M`x`N` area.
pub fn build_basis(width: usize, height: usize) -> Result<BasisSet> {
    if width == 0 || height == 0 {
        return Err(Error::param("basis extent", "must be at least 1x1"));
    }
    let size = width * height;

    let mut functions = Vec::with_capacity(size);
    for fy in 0..height {
        for fx in 0..width {
            let cx = (width - fx) % width;
            let cy = (height - fy) % height;
            if (fy, fx) > (cy, cx) {
                continue;
            }
            functions.push(BasisFunction {
                fx,
                fy,
                component: Component::Cos,
            });
            if (fy, fx) != (cy, cx) {
                functions.push(BasisFunction {
                    fx,
                    fy,
                    component: Component::Sin,
                });
            }
        }
    }
    debug_assert_eq!(functions.len(), size);

    // Integer phase keeps every sample an exact table lookup.
    let period = size;
    let (cos_table, sin_table): (Vec<f64>, Vec<f64>) = (0..period)
        .map(|p| {
            let angle = 2.0 * std::f64::consts::PI * p as f64 / period as f64;
            (angle.cos(), angle.sin())
        })
        .unzip();

    let mut rasters = vec![0.0; size * size];
    let mut uniform_norms = Vec::with_capacity(size);
    for (k, func) in functions.iter().enumerate() {
        let out = &mut rasters[k * size..(k + 1) * size];
        let mut norm = 0.0;
        for n in 0..height {
            for m in 0..width {
                let phase = (func.fx * m * height + func.fy * n * width) % period;
                let v = match func.component {
                    Component::Cos => cos_table[phase],
                    Component::Sin => sin_table[phase],
                };
                out[n * width + m] = v;
                norm += v * v;
            }
        }
        uniform_norms.push(norm);
    }

    let mut planner = FftPlanner::new();
    // Inverse direction: unnormalized sums with e^{+iθ}.
    let row_fft = planner.plan_fft(width, FftDirection::Inverse);
    let col_fft = planner.plan_fft(height, FftDirection::Inverse);

    Ok(BasisSet {
        width,
        height,
        functions,
        rasters,
        uniform_norms,
        row_fft,
        col_fft,
    })
}

impl BasisSet {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.width * self.height
    }

    pub fn function(&self, k: usize) -> BasisFunction {
        self.functions[k]
    }

    pub fn functions(&self) -> &[BasisFunction] {
        &self.functions
    }

    /// Index of a given frequency/component, if it is part of the family.
    pub fn index_of(&self, fx: usize, fy: usize, component: Component) -> Option<usize> {
        self.functions
            .iter()
            .position(|f| f.fx == fx && f.fy == fy && f.component == component)
    }

    #[inline]
    pub fn raster(&self, k: usize) -> &[f64] {
        let size = self.samples();
        &self.rasters[k * size..(k + 1) * size]
    }

    /// Unweighted squared norm over the full area.
    pub fn uniform_norm(&self, k: usize) -> f64 {
        self.uniform_norms[k]
    }

    /// `target += scale · φ_k`
    #[inline]
    pub fn add_scaled(&self, k: usize, scale: f64, target: &mut [f64]) {
        for (t, &p) in target.iter_mut().zip(self.raster(k)) {
            *t += scale * p;
        }
    }

    /// Renders `Σ c_k φ_k` into a fresh buffer.
    pub fn render<'a>(&self, coefficients: impl IntoIterator<Item = (&'a usize, &'a f64)>) -> Vec<f64> {
        let mut out = vec![0.0; self.samples()];
        for (&k, &c) in coefficients {
            self.add_scaled(k, c, &mut out);
        }
        out
    }

    /// `S(fx, fy) = Σ s[m,n]·e^{+iθ}` for every frequency pair.
    pub fn spectrum(&self, signal: &[f64]) -> Spectrum {
        let (w, h) = (self.width, self.height);
        debug_assert_eq!(signal.len(), w * h);
        let mut rows: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let scratch_len = self
            .row_fft
            .get_inplace_scratch_len()
            .max(self.col_fft.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];
        self.row_fft.process_with_scratch(&mut rows, &mut scratch);

        // Transpose so each frequency column is contiguous: index fx·h + fy.
        let mut cols = vec![Complex64::default(); w * h];
        for n in 0..h {
            for m in 0..w {
                cols[m * h + n] = rows[n * w + m];
            }
        }
        self.col_fft.process_with_scratch(&mut cols, &mut scratch);
        Spectrum {
            width: w,
            height: h,
            data: cols,
        }
    }

    /// Reads per-function inner products `Σ s·φ_k` off a spectrum of `s`.
    pub fn inner_products(&self, spectrum: &Spectrum) -> Vec<f64> {
        self.functions
            .iter()
            .map(|f| {
                let v = spectrum.get(f.fx, f.fy);
                match f.component {
                    Component::Cos => v.re,
                    Component::Sin => v.im,
                }
            })
            .collect()
    }
}

/// 2D spectrum stored column-major in frequency (`fx·height + fy`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    #[inline]
    pub fn get(&self, fx: usize, fy: usize) -> Complex64 {
        self.data[(fx % self.width) * self.height + fy % self.height]
    }
}

/// Spatial weighting function over the projection area.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    width: usize,
    height: usize,
    weights: Vec<f64>,
    mu: Option<f64>,
    rho: Option<f64>,
}

/// Evaluates the layout weighting: `mu` on the block, `rho^d` on reconstructed
/// samples at distance `d` from the area center, zero on padding.
pub fn build_weight_mask(layout: &ProjectionLayout, mu: f64, rho: f64) -> Result<WeightMask> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be > 0, got {mu}")));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param("rho", format!("must lie in (0, 1), got {rho}")));
    }
    let side = layout.side();
    let center = (side as f64 - 1.0) / 2.0;
    let mut weights = Vec::with_capacity(side * side);
    for n in 0..side {
        for m in 0..side {
            let w = match layout.region(m, n) {
                Region::Block => mu,
                Region::Reconstructed => {
                    let dm = m as f64 - center;
                    let dn = n as f64 - center;
                    rho.powf((dm * dm + dn * dn).sqrt())
                }
                Region::Padding => 0.0,
            };
            weights.push(w);
        }
    }
    Ok(WeightMask {
        width: side,
        height: side,
        weights,
        mu: Some(mu),
        rho: Some(rho),
    })
}

impl WeightMask {
    /// Arbitrary non-negative weights.
    pub fn from_weights(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != width * height {
            return Err(Error::DimensionMismatch {
                left: (width, height),
                right: (weights.len(), 1),
            });
        }
        if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::param("weights", format!("must be finite and >= 0, got {bad}")));
        }
        Ok(Self {
            width,
            height,
            weights,
            mu: None,
            rho: None,
        })
    }

    pub fn uniform(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            weights: vec![1.0; width * height],
            mu: None,
            rho: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.weights[n * self.width + m]
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }
}

/// `Σ a·b·w`
pub fn weighted_inner(a: &[f64], b: &[f64], w: &WeightMask) -> Result<f64> {
    let n = w.weights.len();
    if a.len() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            left: (a.len(), b.len()),
            right: (w.width, w.height),
        });
    }
    Ok(a.iter()
        .zip(b)
        .zip(&w.weights)
        .map(|((&x, &y), &wt)| x * y * wt)
        .sum())
}

/// Weighted squared norms of every basis function under one mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNorms {
    norms: Vec<f64>,
    excluded: Vec<bool>,
}

impl WeightedNorms {
    pub fn get(&self, k: usize) -> f64 {
        self.norms[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.norms
    }

    /// A function whose weighted norm vanishes can never be selected.
    pub fn is_excluded(&self, k: usize) -> bool {
        self.excluded[k]
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| e).count()
    }
}

pub fn precompute_norms(basis: &BasisSet, w: &WeightMask) -> Result<WeightedNorms> {
    if (w.width, w.height) != (basis.width, basis.height) {
        return Err(Error::DimensionMismatch {
            left: (basis.width, basis.height),
            right: (w.width, w.height),
        });
    }
    // |φ| <= 1, so every norm is bounded by the total weight.
    let total: f64 = w.weights.iter().sum();
    let floor = total * 1e-14;
    let mut norms = Vec::with_capacity(basis.len());
    let mut excluded = Vec::with_capacity(basis.len());
    for k in 0..basis.len() {
        let norm: f64 = basis
            .raster(k)
            .iter()
            .zip(&w.weights)
            .map(|(&p, &wt)| p * p * wt)
            .sum();
        norms.push(norm);
        excluded.push(!(norm > floor));
    }
    Ok(WeightedNorms { norms, excluded })
}

/// A basis paired with one weight mask: norms, weight spectrum and the
/// projection routines the engines need.
#[derive(Debug, Clone)]
pub struct WeightedBasis {
    basis: Arc<BasisSet>,
    mask: WeightMask,
    norms: WeightedNorms,
    weight_spectrum: Spectrum,
}

impl WeightedBasis {
    pub fn new(basis: Arc<BasisSet>, mask: WeightMask) -> Result<Self> {
        let norms = precompute_norms(&basis, &mask)?;
        let weight_spectrum = basis.spectrum(mask.weights());
        Ok(Self {
            basis,
            mask,
            norms,
            weight_spectrum,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn shared_basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn mask(&self) -> &WeightMask {
        &self.mask
    }

    pub fn norms(&self) -> &WeightedNorms {
        &self.norms
    }

    /// `Σ w·r²`
    pub fn energy(&self, residual: &[f64]) -> f64 {
        residual
            .iter()
            .zip(self.mask.weights())
            .map(|(&r, &w)| w * r * r)
            .sum()
    }

    /// `Σ r·φ_k·w` for all `k` through one 2D FFT of `r·w`.
    pub fn weighted_inner_products(&self, signal: &[f64]) -> Vec<f64> {
        let weighted: Vec<f64> = signal
            .iter()
            .zip(self.mask.weights())
            .map(|(&r, &w)| r * w)
            .collect();
        self.basis.inner_products(&self.basis.spectrum(&weighted))
    }

    /// Reference route for [`Self::weighted_inner_products`].
    pub fn weighted_inner_products_explicit(&self, signal: &[f64]) -> Vec<f64> {
        let weighted: Vec<f64> = signal
            .iter()
            .zip(self.mask.weights())
            .map(|(&r, &w)| r * w)
            .collect();
        (0..self.basis.len())
            .map(|k| {
                self.basis
                    .raster(k)
                    .iter()
                    .zip(&weighted)
                    .map(|(&p, &s)| p * s)
                    .sum()
            })
            .collect()
    }

    /// One weighted Gram entry `Σ φ_a·φ_b·w`, read off the weight spectrum.
    pub fn gram_entry(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.norms.get(a);
        }
        let fa = self.basis.function(a);
        let fb = self.basis.function(b);
        let (w, h) = (self.basis.width, self.basis.height);
        let sum = self.weight_spectrum.get(fa.fx + fb.fx, fa.fy + fb.fy);
        let diff = self
            .weight_spectrum
            .get(fa.fx + w - fb.fx, fa.fy + h - fb.fy);
        use Component::*;
        0.5 * match (fa.component, fb.component) {
            (Cos, Cos) => sum.re + diff.re,
            (Sin, Sin) => diff.re - sum.re,
            (Cos, Sin) => sum.im - diff.im,
            (Sin, Cos) => sum.im + diff.im,
        }
    }

    /// Symmetric row-major Gram matrix over `indices`.
    pub fn gram(&self, indices: &[usize]) -> Vec<f64> {
        let n = indices.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.gram_entry(indices[i], indices[j]);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        g
    }

    /// Reference route for [`Self::gram`].
    pub fn gram_explicit(&self, indices: &[usize]) -> Vec<f64> {
        let n = indices.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = weighted_inner(
                    self.basis.raster(indices[i]),
                    self.basis.raster(indices[j]),
                    &self.mask,
                )
                .expect("basis and mask share extents");
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        g
    }
}
