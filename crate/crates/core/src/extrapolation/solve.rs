//! Weighted normal equations over a set of selected basis functions.

use crate::basis::WeightedBasis;

/// Pivots below this fraction of the largest Gram diagonal count as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Single function: plain division by its weighted norm.
    Direct,
    Cholesky,
    /// Partial-pivot Gaussian elimination after Cholesky rejected the matrix.
    Elimination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSolution {
    /// Indices actually solved for, in selection order.
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Members removed because the Gram matrix was numerically singular.
    pub dropped: Vec<usize>,
    pub method: SolveMethod,
}

impl SubspaceSolution {
    pub fn reduced_to_single(&self) -> bool {
        !self.dropped.is_empty() && self.indices.len() == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.coefficients.iter().copied())
    }
}

/// Solves `Σ_u p_u·Σφ_v φ_u w = inner[v]` for every `v` in `selection`.
///
/// `selection` must be ordered by priority: when the system is singular the
/// last member is removed and the solve retried. `inner` is indexed by basis
/// index and holds `Σ φ_k·x·w` for whatever signal `x` is being projected.
pub fn solve_normal_equations(
    ctx: &WeightedBasis,
    inner: &[f64],
    selection: &[usize],
) -> SubspaceSolution {
    let mut indices = selection.to_vec();
    let mut dropped = Vec::new();
    loop {
        if indices.len() == 1 {
            let k = indices[0];
            return SubspaceSolution {
                coefficients: vec![inner[k] / ctx.norms().get(k)],
                indices,
                dropped,
                method: SolveMethod::Direct,
            };
        }
        let n = indices.len();
        let gram = ctx.gram(&indices);
        let rhs: Vec<f64> = indices.iter().map(|&k| inner[k]).collect();
        if let Some(x) = cholesky_solve(&gram, n, &rhs) {
            return SubspaceSolution {
                indices,
                coefficients: x,
                dropped,
                method: SolveMethod::Cholesky,
            };
        }
        if let Some(x) = pivoted_solve(&gram, n, &rhs) {
            return SubspaceSolution {
                indices,
                coefficients: x,
                dropped,
                method: SolveMethod::Elimination,
            };
        }
        dropped.push(indices.pop().expect("n >= 2"));
    }
}

fn max_diagonal(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max)
}

/// Cholesky factorization `A = L·Lᵀ` followed by two triangular solves.
/// Returns `None` when a pivot falls below the singularity threshold.
pub fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let tol = SINGULAR_PIVOT_RATIO * max_diagonal(a, n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > tol) {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Gaussian elimination with partial pivoting.
pub fn pivoted_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let tol = SINGULAR_PIVOT_RATIO * max_diagonal(a, n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty range");
        if !(m[pivot_row * n + col].abs() > tol) {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let p = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_on_small_spd_system() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let b = [1.0, -2.0, 0.5];
        let x = cholesky_solve(&a, 3, &b).unwrap();
        let y = pivoted_solve(&a, 3, &b).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-12);
            assert!((x[i] - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected_by_both() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(cholesky_solve(&a, 2, &[1.0, 2.0]).is_none());
        assert!(pivoted_solve(&a, 2, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn indefinite_matrix_falls_back_to_elimination() {
        let a = [1.0, 3.0, 3.0, 1.0];
        assert!(cholesky_solve(&a, 2, &[1.0, 0.0]).is_none());
        let x = pivoted_solve(&a, 2, &[1.0, 0.0]).unwrap();
        assert!((x[0] + 0.125).abs() < 1e-12);
        assert!((x[1] - 0.375).abs() < 1e-12);
    }
}
