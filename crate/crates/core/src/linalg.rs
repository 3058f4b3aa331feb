//! Hermitian eigensolves on sector operators.
//!
//! Sparse operators are first split into the connected components of their
//! nonzero pattern; each component is diagonalized densely. `L²` and its
//! sub-chain members preserve the parity of every mode occupation, so the
//! split is substantial.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, C64};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Coefficients below this magnitude are skipped when fixing the global phase.
pub const PHASE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
}

fn off_diagonal_sq(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for c in 0..n {
        for r in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s
}

/// Cyclic complex Jacobi. Slower than QR but the eigenvectors are accurate
/// to working precision even inside tight clusters.
fn jacobi(mut a: DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let target = (f64::EPSILON * f64::EPSILON) * total;
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_sq(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * jpp + y * jqp;
                    a[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = C64::default();
                a[(q, p)] = C64::default();
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * jpp + y * jqp;
                    v[(k, q)] = x * jpq + y * jqq;
                }
            }
        }
    }
    if !converged && off_diagonal_sq(&a) > target {
        return Err(Error::EigensolverFailed { dim: n });
    }
    Ok(((0..n).map(|k| a[(k, k)].re).collect(), v))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors as columns.
pub fn dense_hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let (values, vectors) = jacobi(herm)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

/// Connected components of the nonzero pattern of a square operator.
pub fn blocks(op: &LinearOperator) -> Vec<Vec<usize>> {
    let dim = op.domain().dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, c, _) in op.entries() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; dim];
    for i in 0..dim {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Full eigendecomposition of a Hermitian sector operator, ascending.
///
/// Equal eigenvalues from different blocks keep block order, so the output
/// is deterministic.
pub fn hermitian_eigen(op: &LinearOperator) -> Result<Vec<EigenPair>> {
    op.domain().check_is(op.codomain())?;
    let dim = op.domain().dim();
    let mut local = vec![0usize; dim];
    let mut pairs = Vec::with_capacity(dim);
    for group in blocks(op) {
        for (k, &g) in group.iter().enumerate() {
            local[g] = k;
        }
        let mut m = DMatrix::<C64>::zeros(group.len(), group.len());
        for &g in &group {
            for &(c, v) in &op.rows()[g] {
                m[(local[g], local[c])] = v;
            }
        }
        let (values, vectors) = dense_hermitian_eigen(&m)?;
        for (k, value) in values.into_iter().enumerate() {
            let mut vector = vec![C64::default(); dim];
            for (row, &g) in group.iter().enumerate() {
                vector[g] = vectors[(row, k)];
            }
            pairs.push(EigenPair { value, vector });
        }
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}

pub fn hermitian_eigenvalues(op: &LinearOperator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(op)?.into_iter().map(|p| p.value).collect())
}

/// Group ascending values whenever consecutive gaps stay within `gap`.
pub fn cluster(sorted: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=sorted.len() {
        if k == sorted.len() || sorted[k] - sorted[k - 1] > gap {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

/// Rotate `v` so its first significant coefficient is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().find(|z| z.norm() > PHASE_THRESHOLD) {
        let rot = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖op·v − λ v‖_∞`.
pub fn eigen_residual(op: &LinearOperator, v: &[C64], lambda: f64) -> Result<f64> {
    let w = op.apply(v)?;
    Ok(w.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm())
        .fold(0.0, f64::max))
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clusters_split_on_gaps() {
        let v = [0.0, 1e-9, 2.0, 2.0 + 5e-7, 6.0];
        assert_eq!(cluster(&v, 1e-6), vec![0..2, 2..4, 4..5]);
        assert!(cluster(&[], 1e-6).is_empty());
    }

    #[test]
    fn phase_fix_makes_first_entry_positive() {
        let mut v = vec![C64::new(0.0, 0.0), C64::new(0.0, -0.6), C64::new(0.8, 0.0)];
        fix_phase(&mut v);
        assert!((v[1] - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((v[2] - C64::new(0.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn pauli_y_like_block() {
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ]);
        let (vals, vecs) = dense_hermitian_eigen(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let check = &m * &vecs - &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            vals.iter().map(|&x| C64::new(x, 0.0)),
        ));
        assert!(check.iter().all(|z| z.norm() < 1e-14));
    }

    proptest! {
        #[test]
        fn random_hermitian_decomposes(entries in proptest::collection::vec(-5.0f64..5.0, 2 * 36)) {
            let dim = 6;
            let mut m = DMatrix::<C64>::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    let k = 2 * (r * dim + c);
                    m[(r, c)] = C64::new(entries[k], entries[k + 1]);
                }
            }
            let h = &m + m.adjoint();
            let (vals, vecs) = dense_hermitian_eigen(&h).unwrap();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let unit = vecs.adjoint() * &vecs - DMatrix::<C64>::identity(dim, dim);
            prop_assert!(unit.iter().all(|z| z.norm() < 1e-10));
            for (k, &val) in vals.iter().enumerate() {
                let v = vecs.column(k);
                let r = &h * v - v * C64::new(val, 0.0);
                prop_assert!(r.iter().all(|z| z.norm() < 1e-9));
            }
            let trace: f64 = (0..dim).map(|k| h[(k, k)].re).sum();
            prop_assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-9);
        }
    }
}
