//! Library results against independent straightforward implementations.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use srmc::basis::{build_basis, precompute_norms, Component, WeightMask, WeightedBasis};
use srmc::extrapolation::project_residual;
use srmc::frame::{mse, LayoutKey, Plane, ProjectionLayout};
use srmc::motion::{compensate, mv_bits, MotionVector};
use srmc::{build_weight_mask, BlockRef};

use common::{dense_inner, gauss_solve, mask_from, oracle_weights, rng};

fn closed_form(m: usize, n: usize, f: srmc::basis::BasisFunction, w: usize, h: usize) -> f64 {
    let theta = 2.0 * PI * (f.fx as f64 * m as f64 / w as f64 + f.fy as f64 * n as f64 / h as f64);
    match f.component {
        Component::Cos => theta.cos(),
        Component::Sin => theta.sin(),
    }
}

#[test]
fn rasters_match_closed_form() {
    for (w, h) in [(4, 4), (6, 5), (12, 12)] {
        let basis = build_basis(w, h).unwrap();
        for k in 0..basis.len() {
            let f = basis.function(k);
            for n in 0..h {
                for m in 0..w {
                    let v = basis.raster(k)[n * w + m];
                    assert!((v - closed_form(m, n, f, w, h)).abs() < 1e-12, "{f:?} at ({m},{n})");
                }
            }
        }
    }
}

#[test]
fn weight_mask_matches_formula() {
    for key in 0..16 {
        let layout = ProjectionLayout::from_key(16, LayoutKey(key));
        let mask = build_weight_mask(&layout, 0.5, 0.8).unwrap();
        let expect = oracle_weights(&layout, 0.5, 0.8);
        for (a, b) in mask.weights().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn spectral_numerators_match_explicit_sums() {
    let basis = Arc::new(build_basis(48, 48).unwrap());
    let mut r = rng(1);
    for key in [0, 5, 15] {
        let layout = ProjectionLayout::from_key(16, LayoutKey(key));
        let ctx = WeightedBasis::new(Arc::clone(&basis), mask_from(&layout, 0.5, 0.8)).unwrap();
        let w = ctx.mask().weights().to_vec();
        let signal: Vec<f64> = (0..basis.samples()).map(|_| r.random_range(0.0..255.0)).collect();
        let fast = ctx.weighted_inner_products(&signal);
        for k in 0..basis.len() {
            let slow = dense_inner(basis.raster(k), &signal, &w);
            assert!((fast[k] - slow).abs() < 1e-9 * slow.abs().max(1.0), "k={k}: {} vs {slow}", fast[k]);
        }
    }
}

#[test]
fn spectral_gram_matches_dense_gram() {
    let basis = Arc::new(build_basis(48, 48).unwrap());
    let mut r = rng(2);
    for key in [1, 6, 15] {
        let layout = ProjectionLayout::from_key(16, LayoutKey(key));
        let ctx = WeightedBasis::new(Arc::clone(&basis), mask_from(&layout, 0.5, 0.8)).unwrap();
        let w = ctx.mask().weights().to_vec();
        let idx: Vec<usize> = (0..25).map(|_| r.random_range(0..basis.len())).collect();
        let g = ctx.gram(&idx);
        let n = idx.len();
        for i in 0..n {
            for j in 0..n {
                let d = dense_inner(basis.raster(idx[i]), basis.raster(idx[j]), &w);
                assert!((g[i * n + j] - d).abs() < 1e-8 * d.abs().max(1.0), "({i},{j})");
            }
        }
    }
}

#[test]
fn projection_coefficients_follow_normalized_correlation() {
    let basis = Arc::new(build_basis(12, 12).unwrap());
    let layout = ProjectionLayout::from_key(4, LayoutKey(11));
    let ctx = WeightedBasis::new(Arc::clone(&basis), build_weight_mask(&layout, 0.5, 0.8).unwrap()).unwrap();
    let w = oracle_weights(&layout, 0.5, 0.8);
    let mut r = rng(3);
    let residual: Vec<f64> = (0..144).map(|_| r.random_range(-50.0..50.0)).collect();
    let p = project_residual(&ctx, &residual);
    for k in 0..basis.len() {
        let phi = basis.raster(k);
        let expect = dense_inner(&residual, phi, &w) / dense_inner(phi, phi, &w);
        assert!((p.coefficients[k] - expect).abs() < 1e-10 * expect.abs().max(1.0));
    }
}

#[test]
fn weighted_norms_match_loops() {
    let basis = build_basis(48, 48).unwrap();
    let layout = ProjectionLayout::from_key(16, LayoutKey(15));
    let w = oracle_weights(&layout, 0.5, 0.8);
    let norms = precompute_norms(&basis, &WeightMask::from_weights(48, 48, w.clone()).unwrap()).unwrap();
    for k in 0..basis.len() {
        let phi = basis.raster(k);
        let expect: f64 = (0..phi.len()).map(|i| phi[i] * phi[i] * w[i]).sum();
        assert!((norms.get(k) - expect).abs() <= 1e-12 * expect.max(1.0));
    }
}

#[test]
fn tiny_basis_gram_diagonal() {
    // Uniform weight on 4x4: cos/sin pairs carry MN/2, self-conjugate
    // cosines carry MN.
    let basis = Arc::new(build_basis(4, 4).unwrap());
    let ctx = WeightedBasis::new(Arc::clone(&basis), WeightMask::uniform(4, 4)).unwrap();
    let all: Vec<usize> = (0..basis.len()).collect();
    let g = ctx.gram(&all);
    for (i, &k) in all.iter().enumerate() {
        let f = basis.function(k);
        let self_conj = (4 - f.fx) % 4 == f.fx && (4 - f.fy) % 4 == f.fy;
        let expect = if self_conj { 16.0 } else { 8.0 };
        assert!((g[i * all.len() + i] - expect).abs() < 1e-12, "{f:?}");
        for j in 0..all.len() {
            if j != i {
                assert!(g[i * all.len() + j].abs() < 1e-12);
            }
        }
    }
}

#[test]
fn uniform_projection_is_complete() {
    let basis = Arc::new(build_basis(6, 8).unwrap());
    let ctx = WeightedBasis::new(Arc::clone(&basis), WeightMask::uniform(6, 8)).unwrap();
    let mut r = rng(4);
    let signal: Vec<f64> = (0..48).map(|_| r.random_range(-10.0..10.0)).collect();
    let p = project_residual(&ctx, &signal);
    let coeffs: std::collections::BTreeMap<usize, f64> = p.coefficients.iter().copied().enumerate().collect();
    let back = basis.render(&coeffs);
    for (a, b) in signal.iter().zip(&back) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn small_least_squares_matches_dense_solver() {
    let basis = Arc::new(build_basis(8, 8).unwrap());
    let mut r = rng(5);
    let w: Vec<f64> = (0..64).map(|i| if i % 8 < 5 { r.random_range(0.1..1.0) } else { 0.0 }).collect();
    let ctx = WeightedBasis::new(Arc::clone(&basis), WeightMask::from_weights(8, 8, w.clone()).unwrap()).unwrap();
    for _ in 0..50 {
        let g = r.random_range(2..=8);
        let sel = rand::seq::index::sample(&mut r, basis.len(), g).into_vec();
        let signal: Vec<f64> = (0..64).map(|_| r.random_range(-20.0..20.0)).collect();
        let inner = ctx.weighted_inner_products(&signal);
        let sol = srmc::extrapolation::solve_normal_equations(&ctx, &inner, &sel);
        let n = sol.indices.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = dense_inner(basis.raster(sol.indices[i]), basis.raster(sol.indices[j]), &w);
            }
        }
        let rhs: Vec<f64> = sol.indices.iter().map(|&k| dense_inner(basis.raster(k), &signal, &w)).collect();
        let expect = gauss_solve(&gram, n, &rhs);
        let scale = expect.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in sol.coefficients.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }
}

fn naive_half_pel(reference: &Plane, x: f64, y: f64) -> u8 {
    let clamp = |v: f64, hi: usize| (v as isize).clamp(0, hi as isize - 1) as usize;
    let (w, h) = reference.dims();
    let xs = [x.floor(), x.ceil()];
    let ys = [y.floor(), y.ceil()];
    let mut sum = 0u32;
    let mut count = 0u32;
    for &yy in if ys[0] == ys[1] { &ys[..1] } else { &ys[..] } {
        for &xx in if xs[0] == xs[1] { &xs[..1] } else { &xs[..] } {
            sum += reference.get(clamp(xx, w), clamp(yy, h)) as u32;
            count += 1;
        }
    }
    ((sum + count / 2) / count) as u8
}

#[test]
fn compensation_matches_naive_interpolation() {
    let mut r = rng(6);
    let data: Vec<u8> = (0..48 * 40).map(|_| r.random()).collect();
    let reference = Plane::from_vec(48, 40, data).unwrap();
    for _ in 0..200 {
        let block = BlockRef::new(16 * r.random_range(0..3), 8 * r.random_range(0..4), 8);
        let mv = MotionVector::new(r.random_range(-21..=21), r.random_range(-21..=21));
        let got = compensate(&reference, block, mv);
        for j in 0..8 {
            for i in 0..8 {
                let x = (block.x0 + i) as f64 + mv.dx as f64 / 2.0;
                let y = (block.y0 + j) as f64 + mv.dy as f64 / 2.0;
                assert_eq!(got[j * 8 + i], naive_half_pel(&reference, x, y), "mv {mv:?} at ({i},{j})");
            }
        }
    }
}

fn exp_golomb_string(v: i32) -> String {
    let code: u64 = if v > 0 { 2 * v as u64 - 1 } else { 2 * v.unsigned_abs() as u64 };
    let bin = format!("{:b}", code + 1);
    format!("{}{}", "0".repeat(bin.len() - 1), bin)
}

#[test]
fn mv_bits_match_codeword_lengths() {
    for dx in -40..=40 {
        for dy in [-7, 0, 3, 64] {
            let mv = MotionVector::new(dx, dy);
            let pred = MotionVector::new(2, -1);
            let expect = exp_golomb_string(dx - 2).len() + exp_golomb_string(dy + 1).len();
            assert_eq!(mv_bits(mv, pred) as usize, expect);
        }
    }
}

#[test]
fn mse_matches_loop() {
    let mut r = rng(7);
    let a: Vec<u8> = (0..300).map(|_| r.random()).collect();
    let b: Vec<f64> = (0..300).map(|_| r.random_range(0.0..255.0)).collect();
    let mut s = 0.0;
    for i in 0..300 {
        s += (a[i] as f64 - b[i]).powi(2);
    }
    assert!((mse(&a, &b).unwrap() - s / 300.0).abs() < 1e-9);
}
