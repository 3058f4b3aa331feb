//! Joint eigenbasis of the commuting chain `L_q², L_{q−1}², …, L_3², L_12`.
//!
//! Each sector is refined top-down: eigenspaces of `L_q²` are split by the
//! projected `L_{q−1}²`, and so on down to `L_12`. Every resulting vector
//! gets a [`CscoLabel`], which is compared against the weakly decreasing
//! chains `ℓ_q ≥ ℓ_{q−1} ≥ … ≥ ℓ_2 ≥ 0` with `m = ±ℓ_2`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::fock::DEFAULT_DIMENSION_CAP;
use crate::linalg::{cluster, dense_hermitian_eigen, eigen_residual, fix_phase, hermitian_eigen, inner};
use crate::operator::{LinearOperator, C64};
use crate::spectral::{ells_in_sector, l2_eigenvalue, snap_to_ell, CLUSTER_GAP};

/// `(ℓ_q, ℓ_{q−1}, …, ℓ_2)` plus the `L_12` eigenvalue `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CscoLabel {
    pub ells: Vec<usize>,
    pub m: i64,
}

impl CscoLabel {
    /// Weakly decreasing `ells` with `|m| = ℓ_2`.
    pub fn is_valid_chain(&self) -> bool {
        let decreasing = self.ells.windows(2).all(|w| w[0] >= w[1]);
        let m_ok = match self.ells.last() {
            Some(&l2) => self.m.unsigned_abs() as usize == l2,
            None => self.m == 0,
        };
        decreasing && m_ok
    }

    fn mirrored(&self) -> Self {
        Self {
            ells: self.ells.clone(),
            m: -self.m,
        }
    }
}

impl fmt::Display for CscoLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ells: Vec<String> = self.ells.iter().map(usize::to_string).collect();
        write!(f, "({}; m={:+})", ells.join(","), self.m)
    }
}

/// Every label reachable from `ℓ_q = ell_q` in dimension `q ≥ 2`.
///
/// For `q = 2` the chain is just `ℓ_2 = ell_q`.
pub fn enumerate_chains(q: usize, ell_q: usize) -> Result<Vec<CscoLabel>> {
    if q < 2 {
        return Err(Error::InvalidDimension { q, min: 2 });
    }
    let mut out = Vec::new();
    let mut prefix = vec![ell_q];
    extend_chain(&mut out, &mut prefix, q - 2);
    Ok(out)
}

fn extend_chain(out: &mut Vec<CscoLabel>, prefix: &mut Vec<usize>, remaining: usize) {
    if remaining == 0 {
        let l2 = *prefix.last().unwrap() as i64;
        let ms: &[i64] = if l2 == 0 { &[0] } else { &[l2, -l2] };
        for &m in ms {
            out.push(CscoLabel {
                ells: prefix.clone(),
                m,
            });
        }
        return;
    }
    let top = *prefix.last().unwrap();
    for next in (0..=top).rev() {
        prefix.push(next);
        extend_chain(out, prefix, remaining - 1);
        prefix.pop();
    }
}

/// Expected labels of sector `(q, n)`; the single empty label for `q = 1`.
pub fn expected_labels(q: usize, n: usize) -> Result<Vec<CscoLabel>> {
    if q == 1 {
        return Ok(vec![CscoLabel { ells: vec![], m: 0 }]);
    }
    let mut all = Vec::new();
    for ell in ells_in_sector(n) {
        all.extend(enumerate_chains(q, ell)?);
    }
    Ok(all)
}

/// `L_{q'}²` on modes `1..=q'`, embedded in sector `(q, n)`.
pub fn embed_suboperator(q_prime: usize, q: usize, n: usize) -> Result<LinearOperator> {
    if q_prime < 2 || q_prime >= q {
        return Err(Error::InvalidSubdimension { q_prime, q });
    }
    Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?.l_squared_sub(q_prime, n)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledVector {
    pub label: CscoLabel,
    pub amplitudes: Vec<C64>,
    /// Worst `‖Ov − λv‖_∞` over the chain operators.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledBasis {
    pub q: usize,
    pub n: usize,
    /// Sorted by descending label.
    pub vectors: Vec<LabeledVector>,
}

/// One member of the chain, with the map from its eigenvalue to a label entry.
struct ChainOp {
    name: String,
    op: LinearOperator,
    /// `Some(q')` for `L_{q'}²`, `None` for `L_12`.
    q_prime: Option<usize>,
}

impl ChainOp {
    fn snap(&self, value: f64, tol: f64) -> Option<i64> {
        match self.q_prime {
            Some(qp) => snap_to_ell(value, qp, tol).map(|l| l as i64),
            None => {
                let m = value.round();
                ((value - m).abs() < tol).then_some(m as i64)
            }
        }
    }

    fn exact(&self, key: i64) -> f64 {
        match self.q_prime {
            Some(qp) => l2_eigenvalue(qp, key as usize),
            None => key as f64,
        }
    }
}

fn chain_ops(alg: &Algebra, n: usize) -> Result<Vec<ChainOp>> {
    let q = alg.q();
    let mut ops = Vec::new();
    if q >= 3 {
        for qp in (3..=q).rev() {
            ops.push(ChainOp {
                name: format!("L_{qp}^2"),
                op: alg.l_squared_sub(qp, n)?,
                q_prime: Some(qp),
            });
        }
    }
    if q >= 2 {
        ops.push(ChainOp {
            name: "L_12".to_string(),
            op: alg.l_generator(1, 2, n)?,
            q_prime: None,
        });
    }
    Ok(ops)
}

fn column_vec(m: &DMatrix<C64>, k: usize) -> Vec<C64> {
    m.column(k).iter().copied().collect()
}

pub fn joint_diagonalize(q: usize, n: usize, tol: f64) -> Result<LabeledBasis> {
    let alg = Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?;
    joint_diagonalize_in(&alg, n, tol)
}

/// Refine sector `n` of `alg` down the chain and label every joint eigenvector.
pub fn joint_diagonalize_in(alg: &Algebra, n: usize, tol: f64) -> Result<LabeledBasis> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let q = alg.q();
    let sector = alg.sector(n)?;
    if q == 1 {
        return Ok(LabeledBasis {
            q,
            n,
            vectors: vec![LabeledVector {
                label: CscoLabel { ells: vec![], m: 0 },
                amplitudes: vec![C64::new(1.0, 0.0)],
                residual: 0.0,
            }],
        });
    }
    let ops = chain_ops(alg, n)?;
    let snap_error = |op: &ChainOp, value: f64, dim: usize| Error::SnapFailed {
        q,
        n,
        operator: op.name.clone(),
        eigenvalue: value,
        dim,
    };

    // first level: block-sparse eigensolve of the top operator
    let first = &ops[0];
    let pairs = hermitian_eigen(&first.op)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let mut frames: Vec<(Vec<i64>, DMatrix<C64>)> = Vec::new();
    for range in cluster(&values, CLUSTER_GAP) {
        let key = snapped_cluster(first, &values[range.clone()], tol)
            .ok_or_else(|| snap_error(first, values[range.start], range.len()))?;
        let frame = DMatrix::from_fn(sector.dim(), range.len(), |r, c| pairs[range.start + c].vector[r]);
        frames.push((vec![key], frame));
    }

    for op in &ops[1..] {
        let mut next = Vec::new();
        for (keys, frame) in frames {
            let projected = frame.adjoint() * op.op.mul_dense(&frame)?;
            let (vals, vecs) = dense_hermitian_eigen(&projected)?;
            for range in cluster(&vals, CLUSTER_GAP) {
                let key = snapped_cluster(op, &vals[range.clone()], tol)
                    .ok_or_else(|| snap_error(op, vals[range.start], range.len()))?;
                let sub = vecs.columns(range.start, range.len()).into_owned();
                let mut k = keys.clone();
                k.push(key);
                next.push((k, &frame * sub));
            }
        }
        frames = next;
    }

    let mut vectors = Vec::with_capacity(sector.dim());
    for (keys, frame) in frames {
        let (m, ells_part) = keys.split_last().expect("chain is non-empty");
        let mut ells: Vec<usize> = ells_part.iter().map(|&l| l as usize).collect();
        ells.push(m.unsigned_abs() as usize);
        let label = CscoLabel { ells, m: *m };
        for k in 0..frame.ncols() {
            let mut v = column_vec(&frame, k);
            fix_phase(&mut v);
            let mut residual: f64 = 0.0;
            for (op, &key) in ops.iter().zip(&keys) {
                residual = residual.max(eigen_residual(&op.op, &v, op.exact(key))?);
            }
            vectors.push(LabeledVector {
                label: label.clone(),
                amplitudes: v,
                residual,
            });
        }
    }
    vectors.sort_by(|a, b| b.label.cmp(&a.label));
    Ok(LabeledBasis { q, n, vectors })
}

fn snapped_cluster(op: &ChainOp, values: &[f64], tol: f64) -> Option<i64> {
    let key = op.snap(values[0], tol)?;
    values.iter().all(|&v| op.snap(v, tol) == Some(key)).then_some(key)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelEntry {
    pub ells: Vec<usize>,
    pub m: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CscoReport {
    pub q: usize,
    pub n: usize,
    pub labels: Vec<LabelEntry>,
    /// Expected from chain enumeration but not produced.
    pub missing: Vec<CscoLabel>,
    /// Produced but not expected (including duplicates).
    pub extra: Vec<CscoLabel>,
    pub max_residual: f64,
    /// Worst commutator entry among chain members and `P`.
    pub commutator_residual: f64,
    /// Worst failure of `P` to carry the `m` vector onto the `−m` vector.
    pub parity_residual: f64,
    pub pass: bool,
}

fn multiset(labels: impl IntoIterator<Item = CscoLabel>) -> BTreeMap<CscoLabel, usize> {
    let mut map = BTreeMap::new();
    for l in labels {
        *map.entry(l).or_insert(0) += 1;
    }
    map
}

fn difference(a: &BTreeMap<CscoLabel, usize>, b: &BTreeMap<CscoLabel, usize>) -> Vec<CscoLabel> {
    let mut out = Vec::new();
    for (label, &count) in a {
        let other = b.get(label).copied().unwrap_or(0);
        for _ in other..count {
            out.push(label.clone());
        }
    }
    out
}

pub fn verify_csco(q: usize, n: usize, tol: f64) -> Result<CscoReport> {
    verify_csco_capped(q, n, tol, DEFAULT_DIMENSION_CAP)
}

/// Compare the joint eigenbasis labels of sector `(q, n)` with chain
/// enumeration and check the parity pairing `m ↔ −m`.
pub fn verify_csco_capped(q: usize, n: usize, tol: f64, cap: usize) -> Result<CscoReport> {
    let alg = Algebra::new(q, n, cap)?;
    let basis = joint_diagonalize_in(&alg, n, tol)?;

    let produced = multiset(basis.vectors.iter().map(|v| v.label.clone()));
    let expected = multiset(expected_labels(q, n)?);
    let missing = difference(&expected, &produced);
    let extra = difference(&produced, &expected);

    let chain = chain_ops(&alg, n)?;
    let parity = alg.parity(n)?;
    let mut commutator_residual: f64 = 0.0;
    for (k, a) in chain.iter().enumerate() {
        for b in &chain[k + 1..] {
            commutator_residual = commutator_residual.max(a.op.commutator(&b.op)?.max_abs_entry());
        }
        if a.q_prime.is_some() {
            commutator_residual = commutator_residual.max(parity.commutator(&a.op)?.max_abs_entry());
        }
    }

    let mut parity_residual: f64 = 0.0;
    let unique = extra.is_empty() && missing.is_empty();
    if unique && q >= 2 {
        let by_label: BTreeMap<&CscoLabel, &LabeledVector> =
            basis.vectors.iter().map(|v| (&v.label, v)).collect();
        for v in &basis.vectors {
            let image = parity.apply(&v.amplitudes)?;
            let partner = by_label
                .get(&v.label.mirrored())
                .expect("complete label set contains the mirrored label");
            let overlap = inner(&partner.amplitudes, &image).norm();
            parity_residual = parity_residual.max((1.0 - overlap).abs());
            for op in chain.iter().filter(|c| c.q_prime.is_some()) {
                let key = v.label.ells[q - op.q_prime.unwrap()] as i64;
                parity_residual = parity_residual.max(eigen_residual(&op.op, &image, op.exact(key))?);
            }
        }
    }

    let max_residual = basis.vectors.iter().map(|v| v.residual).fold(0.0, f64::max);
    let chains_ok = basis.vectors.iter().all(|v| {
        v.label.is_valid_chain() && v.label.ells.first().is_none_or(|&lq| lq % 2 == n % 2)
    });
    let pass = unique
        && chains_ok
        && max_residual < tol
        && commutator_residual < tol
        && parity_residual < tol;
    let labels = basis
        .vectors
        .iter()
        .map(|v| LabelEntry {
            ells: v.label.ells.clone(),
            m: v.label.m,
            residual: v.residual,
        })
        .collect();
    Ok(CscoReport {
        q,
        n,
        labels,
        missing,
        extra,
        max_residual,
        commutator_residual,
        parity_residual,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use crate::spectral::degeneracy;

    fn label(ells: &[usize], m: i64) -> CscoLabel {
        CscoLabel {
            ells: ells.to_vec(),
            m,
        }
    }

    #[test]
    fn chain_counts() {
        assert_eq!(enumerate_chains(3, 2).unwrap().len(), 5);
        assert_eq!(enumerate_chains(4, 1).unwrap().len(), 4);
        assert_eq!(enumerate_chains(5, 0).unwrap(), vec![label(&[0, 0, 0, 0], 0)]);
        assert_eq!(enumerate_chains(2, 3).unwrap(), vec![label(&[3], 3), label(&[3], -3)]);
        for q in 3..=6 {
            for ell in 0..=6 {
                let chains = enumerate_chains(q, ell).unwrap();
                assert_eq!(chains.len() as u64, degeneracy(q, ell).unwrap());
                assert!(chains.iter().all(CscoLabel::is_valid_chain));
            }
        }
    }

    #[test]
    fn embedded_l2_squared() {
        let mut e = hermitian_eigenvalues(&embed_suboperator(2, 3, 1).unwrap()).unwrap();
        e.sort_by(f64::total_cmp);
        assert!((e[0]).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12 && (e[2] - 1.0).abs() < 1e-12);
        assert!(matches!(embed_suboperator(3, 3, 1), Err(Error::InvalidSubdimension { .. })));
        assert!(matches!(embed_suboperator(1, 3, 1), Err(Error::InvalidSubdimension { .. })));
        for q in 3..=5 {
            let alg = Algebra::new(q, 6, DEFAULT_DIMENSION_CAP).unwrap();
            for n in 0..=6 {
                let l2 = alg.l_squared(n).unwrap();
                for qp in 2..q {
                    let sub = alg.l_squared_sub(qp, n).unwrap();
                    assert!(l2.commutator(&sub).unwrap().max_abs_entry() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn three_modes_two_quanta() {
        let basis = joint_diagonalize(3, 2, 1e-8).unwrap();
        let labels: Vec<CscoLabel> = basis.vectors.iter().map(|v| v.label.clone()).collect();
        assert_eq!(
            labels,
            vec![
                label(&[2, 2], 2),
                label(&[2, 2], -2),
                label(&[2, 1], 1),
                label(&[2, 1], -1),
                label(&[2, 0], 0),
                label(&[0, 0], 0),
            ]
        );
        assert!(basis.vectors.iter().all(|v| v.residual < 1e-10));
    }

    #[test]
    fn four_modes_one_quantum() {
        let report = verify_csco(4, 1, 1e-8).unwrap();
        assert!(report.pass, "{report:?}");
        let mut got: Vec<CscoLabel> = report
            .labels
            .iter()
            .map(|l| label(&l.ells, l.m))
            .collect();
        got.sort();
        let mut want = vec![
            label(&[1, 0, 0], 0),
            label(&[1, 1, 0], 0),
            label(&[1, 1, 1], 1),
            label(&[1, 1, 1], -1),
        ];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn trivial_sectors() {
        let r = verify_csco(3, 0, 1e-8).unwrap();
        assert!(r.pass);
        assert_eq!(r.labels.len(), 1);
        let r = verify_csco(1, 4, 1e-8).unwrap();
        assert!(r.pass);
        assert!(r.labels[0].ells.is_empty());
    }

    #[test]
    fn two_modes_use_l12_only() {
        let r = verify_csco(2, 3, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        let ms: Vec<i64> = r.labels.iter().map(|l| l.m).collect();
        assert_eq!(ms, vec![3, -3, 1, -1]);
    }

    #[test]
    fn small_sweeps_pass() {
        for q in 3..=4 {
            for n in 0..=4 {
                let r = verify_csco(q, n, 1e-8).unwrap();
                assert!(r.pass, "q={q} n={n}: {r:?}");
            }
        }
    }
}
