//! Residual coding stand-in: 8x8 orthonormal DCT-II, uniform quantization,
//! and a zeroth-order entropy rate estimate.

use std::collections::BTreeMap;
use std::sync::OnceLock;

pub const TRANSFORM_SIZE: usize = 8;

fn dct_matrix() -> &'static [[f64; TRANSFORM_SIZE]; TRANSFORM_SIZE] {
    static MATRIX: OnceLock<[[f64; TRANSFORM_SIZE]; TRANSFORM_SIZE]> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let n = TRANSFORM_SIZE as f64;
        let mut c = [[0.0; TRANSFORM_SIZE]; TRANSFORM_SIZE];
        for (k, row) in c.iter_mut().enumerate() {
            let alpha = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for (i, v) in row.iter_mut().enumerate() {
                *v = alpha
                    * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * n)).cos();
            }
        }
        c
    })
}

pub type Block8 = [f64; TRANSFORM_SIZE * TRANSFORM_SIZE];

pub fn forward_dct(input: &Block8) -> Block8 {
    let c = dct_matrix();
    let n = TRANSFORM_SIZE;
    let mut tmp = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
    // rows
    for y in 0..n {
        for k in 0..n {
            tmp[y * n + k] = (0..n).map(|x| c[k][x] * input[y * n + x]).sum();
        }
    }
    let mut out = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
    for k in 0..n {
        for x in 0..n {
            out[k * n + x] = (0..n).map(|y| c[k][y] * tmp[y * n + x]).sum();
        }
    }
    out
}

pub fn inverse_dct(input: &Block8) -> Block8 {
    let c = dct_matrix();
    let n = TRANSFORM_SIZE;
    let mut tmp = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
    for y in 0..n {
        for x in 0..n {
            tmp[y * n + x] = (0..n).map(|k| c[k][y] * input[k * n + x]).sum();
        }
    }
    let mut out = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
    for y in 0..n {
        for x in 0..n {
            out[y * n + x] = (0..n).map(|k| c[k][x] * tmp[y * n + k]).sum();
        }
    }
    out
}

/// Uniform scalar quantizer, round half away from zero.
pub fn quantize(coefficient: f64, qstep: f64) -> i32 {
    (coefficient / qstep).round() as i32
}

/// Zeroth-order entropy of a symbol histogram times its symbol count.
pub fn entropy_bits(histogram: &BTreeMap<i32, u64>) -> f64 {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return 0.0;
    }
    let total_f = total as f64;
    histogram
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total_f;
            -(c as f64) * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedBlock {
    pub recon: Vec<u8>,
    /// Quantized levels, one 8x8 transform block after another.
    pub levels: Vec<i32>,
    /// Zeroth-order entropy of this block's levels alone.
    pub bits: f64,
}

/// Codes the prediction residual of a square block whose side is a multiple
/// of 8 and returns the decoder-side reconstruction.
pub fn reconstruct_block(original: &[u8], predictor: &[u8], size: usize, qstep: f64) -> CodedBlock {
    assert!(qstep > 0.0, "qstep must be positive");
    assert_eq!(size % TRANSFORM_SIZE, 0);
    assert_eq!(original.len(), size * size);
    assert_eq!(predictor.len(), size * size);
    let n = TRANSFORM_SIZE;
    let mut recon = vec![0u8; size * size];
    let mut levels = Vec::with_capacity(size * size);
    for by in (0..size).step_by(n) {
        for bx in (0..size).step_by(n) {
            let mut residual = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
            for y in 0..n {
                for x in 0..n {
                    let idx = (by + y) * size + bx + x;
                    residual[y * n + x] = original[idx] as f64 - predictor[idx] as f64;
                }
            }
            let coeffs = forward_dct(&residual);
            let mut dequant = [0.0; TRANSFORM_SIZE * TRANSFORM_SIZE];
            for (i, &c) in coeffs.iter().enumerate() {
                let level = quantize(c, qstep);
                levels.push(level);
                dequant[i] = level as f64 * qstep;
            }
            let decoded = inverse_dct(&dequant);
            for y in 0..n {
                for x in 0..n {
                    let idx = (by + y) * size + bx + x;
                    let v = predictor[idx] as f64 + decoded[y * n + x];
                    recon[idx] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    let mut histogram = BTreeMap::new();
    for &l in &levels {
        *histogram.entry(l).or_insert(0u64) += 1;
    }
    CodedBlock {
        recon,
        bits: entropy_bits(&histogram),
        levels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dct_roundtrip_is_identity() {
        let mut x = [0.0; 64];
        for (i, v) in x.iter_mut().enumerate() {
            *v = ((i * 37) % 23) as f64 - 11.5;
        }
        let back = inverse_dct(&forward_dct(&x));
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn dct_of_constant_is_dc_only() {
        let out = forward_dct(&[2.0; 64]);
        assert!((out[0] - 16.0).abs() < 1e-12);
        assert!(out[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_residual_reconstructs_predictor() {
        let pred: Vec<u8> = (0..256).map(|i| (i % 251) as u8).collect();
        let coded = reconstruct_block(&pred, &pred, 16, 4.0);
        assert_eq!(coded.recon, pred);
        assert!(coded.levels.iter().all(|&l| l == 0));
        assert_eq!(coded.bits, 0.0);
    }

    #[test]
    fn huge_step_zeroes_all_levels() {
        let orig: Vec<u8> = (0..256).map(|i| (i * 7 % 256) as u8).collect();
        let pred = vec![128u8; 256];
        let coded = reconstruct_block(&orig, &pred, 16, 1e9);
        assert!(coded.levels.iter().all(|&l| l == 0));
        assert_eq!(coded.recon, pred);
    }

    #[test]
    fn entropy_of_two_equiprobable_symbols() {
        let h: BTreeMap<i32, u64> = [(0, 4), (1, 4)].into_iter().collect();
        assert!((entropy_bits(&h) - 8.0).abs() < 1e-12);
    }
}
