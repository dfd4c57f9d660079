use std::cmp::Ordering;

use crate::basis::{WeightedBasis, WeightedNorms};

/// Weighted projection of a residual onto every basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `Σ r·φ_k·w`
    pub inner: Vec<f64>,
    /// `inner[k] / Σ φ_k²·w`; zero for excluded functions.
    pub coefficients: Vec<f64>,
}

pub fn project_residual(ctx: &WeightedBasis, residual: &[f64]) -> Projection {
    let inner = ctx.weighted_inner_products(residual);
    let norms = ctx.norms();
    let coefficients = inner
        .iter()
        .enumerate()
        .map(|(k, &v)| if norms.is_excluded(k) { 0.0 } else { v / norms.get(k) })
        .collect();
    Projection {
        inner,
        coefficients,
    }
}

/// `ΔE_k = p_k² · Σ φ_k²·w`, the drop in weighted error from removing the
/// projection onto `φ_k` alone.
pub fn decrement_energies(coefficients: &[f64], norms: &WeightedNorms) -> Vec<f64> {
    coefficients
        .iter()
        .enumerate()
        .map(|(k, &p)| if norms.is_excluded(k) { 0.0 } else { p * p * norms.get(k) })
        .collect()
}

/// Picks every function whose decrement exceeds `tau` times the largest one,
/// capped at the `n_bf` largest. Ties go to the lower index. The result is
/// ordered by decreasing decrement and always starts with the argmax; it is
/// empty only when every decrement is zero.
pub fn select_candidates(decrements: &[f64], tau: f64, n_bf: usize) -> Vec<usize> {
    let Some(best) = argmax(decrements) else {
        return Vec::new();
    };
    let max = decrements[best];
    if !(max > 0.0) || n_bf == 0 {
        return Vec::new();
    }
    let threshold = tau * max;
    let mut picked: Vec<usize> = (0..decrements.len())
        .filter(|&k| k != best && decrements[k] > threshold)
        .collect();
    picked.sort_by(|&a, &b| by_decrement(decrements, a, b));
    picked.truncate(n_bf - 1);
    picked.insert(0, best);
    picked
}

/// Largest decrement, lowest index on ties.
pub fn argmax(decrements: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in decrements.iter().enumerate() {
        match best {
            Some(b) if v <= decrements[b] => {}
            _ => best = Some(k),
        }
    }
    best
}

fn by_decrement(decrements: &[f64], a: usize, b: usize) -> Ordering {
    decrements[b]
        .total_cmp(&decrements[a])
        .then_with(|| a.cmp(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rule() {
        let g = select_candidates(&[10.0, 8.0, 7.4, 2.0], 0.75, 20);
        assert_eq!(g, vec![0, 1]);
    }

    #[test]
    fn threshold_rule_unordered_input() {
        let g = select_candidates(&[2.0, 8.0, 7.4, 10.0, 7.6], 0.75, 20);
        assert_eq!(g, vec![3, 1, 4]);
    }

    #[test]
    fn single_function_cap_gives_argmax() {
        for tau in [0.0, 0.5, 1.0] {
            assert_eq!(select_candidates(&[3.0, 9.0, 9.0, 8.9], tau, 1), vec![1]);
        }
    }

    #[test]
    fn equal_decrements_break_ties_by_index() {
        let g = select_candidates(&[5.0; 30], 0.75, 20);
        assert_eq!(g, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn tau_one_still_keeps_argmax() {
        assert_eq!(select_candidates(&[1.0, 4.0, 2.0], 1.0, 20), vec![1]);
    }

    #[test]
    fn all_zero_means_converged() {
        assert!(select_candidates(&[0.0; 8], 0.75, 20).is_empty());
        assert!(select_candidates(&[], 0.75, 20).is_empty());
    }

    #[test]
    fn decrement_formula() {
        use crate::basis::{build_basis, precompute_norms, WeightMask};
        let basis = build_basis(2, 1).unwrap();
        let mask = WeightMask::from_weights(2, 1, vec![1.5, 1.5]).unwrap();
        let norms = precompute_norms(&basis, &mask).unwrap();
        // Both functions (DC and Nyquist cosine) have weighted norm 3.
        let d = decrement_energies(&[2.0, 0.0], &norms);
        assert_eq!(d, vec![12.0, 0.0]);
    }
}
