//! Sparse complex operators between Fock sectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_sector_capped, OccupationVector, Sector};

pub type C64 = Complex64;

/// Entries with magnitude at or below this are never stored.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// A sparse matrix from `domain` into `codomain`, stored row-wise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct LinearOperator {
    domain: Arc<Sector>,
    codomain: Arc<Sector>,
    rows: Vec<Vec<(usize, C64)>>,
}

impl LinearOperator {
    pub fn zero(domain: &Arc<Sector>, codomain: &Arc<Sector>) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            rows: vec![Vec::new(); codomain.dim()],
        }
    }

    pub fn identity(sector: &Arc<Sector>) -> Self {
        Self::scaled_identity(sector, C64::new(1.0, 0.0))
    }

    pub fn scaled_identity(sector: &Arc<Sector>, c: C64) -> Self {
        Self::diagonal(sector, |_| c)
    }

    /// Diagonal operator with entry `f(state)` on each basis state.
    pub fn diagonal(sector: &Arc<Sector>, f: impl Fn(&OccupationVector) -> C64) -> Self {
        let rows = sector
            .basis()
            .iter()
            .enumerate()
            .map(|(i, occ)| {
                let v = f(occ);
                if v.norm() > DROP_TOLERANCE {
                    vec![(i, v)]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self {
            domain: sector.clone(),
            codomain: sector.clone(),
            rows,
        }
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        domain: &Arc<Sector>,
        codomain: &Arc<Sector>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut acc: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); codomain.dim()];
        for (r, c, v) in triplets {
            if r >= codomain.dim() || c >= domain.dim() {
                return Err(Error::Malformed(format!(
                    "entry ({r}, {c}) outside a {}x{} operator",
                    codomain.dim(),
                    domain.dim()
                )));
            }
            *acc[r].entry(c).or_default() += v;
        }
        let rows = acc
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .filter(|(_, v)| v.norm() > DROP_TOLERANCE)
                    .collect()
            })
            .collect();
        Ok(Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            rows,
        })
    }

    pub fn domain(&self) -> &Arc<Sector> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<Sector> {
        &self.codomain
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|k| self.rows[row][k].1)
            .unwrap_or_default()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        other.domain.check_is(&self.domain)?;
        other.codomain.check_is(&self.codomain)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        self.check_same_shape(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| merge_rows(a, alpha, b, beta))
            .collect();
        Ok(Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rows,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(col, v)| (col, v * c))
                    .filter(|(_, v)| v.norm() > DROP_TOLERANCE)
                    .collect()
            })
            .collect();
        Self {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            rows,
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        inner.codomain.check_is(&self.domain)?;
        let width = inner.domain.dim();
        let mut dense = vec![C64::default(); width];
        let mut touched = vec![false; width];
        let mut cols: Vec<usize> = Vec::new();
        let mut rows = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            for &(k, a) in row {
                for &(c, b) in &inner.rows[k] {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    dense[c] += a * b;
                }
            }
            cols.sort_unstable();
            let mut out = Vec::with_capacity(cols.len());
            for &c in &cols {
                let v = dense[c];
                if v.norm() > DROP_TOLERANCE {
                    out.push((c, v));
                }
                dense[c] = C64::default();
                touched[c] = false;
            }
            cols.clear();
            rows.push(out);
        }
        Ok(Self {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            rows,
        })
    }

    /// Conjugate transpose, with domain and codomain swapped.
    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.domain.dim()];
        for (r, c, v) in self.entries() {
            rows[c].push((r, v.conj()));
        }
        // entries() walks rows in order, so each new row is already sorted
        Self {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            rows,
        }
    }

    /// `self ∘ other − other ∘ self`; both products must share outer sectors.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.add(&other.compose(self)?)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.domain.dim() {
            return Err(Error::LengthMismatch {
                expected: self.domain.dim(),
                found: v.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().map(|&(c, a)| a * v[c]).sum())
            .collect())
    }

    /// Largest entry of `self − self†`; requires a square operator.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        self.domain.check_is(&self.codomain)?;
        Ok(self.sub(&self.adjoint())?.max_abs_entry())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.codomain.dim(), self.domain.dim());
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `self * dense`, where `dense` has one row per domain state.
    pub fn mul_dense(&self, dense: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if dense.nrows() != self.domain.dim() {
            return Err(Error::LengthMismatch {
                expected: self.domain.dim(),
                found: dense.nrows(),
            });
        }
        let mut out = DMatrix::zeros(self.codomain.dim(), dense.ncols());
        for (r, c, v) in self.entries() {
            for j in 0..dense.ncols() {
                out[(r, j)] += v * dense[(c, j)];
            }
        }
        Ok(out)
    }

    pub(crate) fn rows(&self) -> &[Vec<(usize, C64)>] {
        &self.rows
    }
}

fn merge_rows(a: &[(usize, C64)], alpha: C64, b: &[(usize, C64)], beta: C64) -> Vec<(usize, C64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (c, v) = match (a.get(i), b.get(j)) {
            (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                i += 1;
                j += 1;
                (ca, alpha * va + beta * vb)
            }
            (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                i += 1;
                (ca, alpha * va)
            }
            (Some(&(ca, va)), None) => {
                i += 1;
                (ca, alpha * va)
            }
            (_, Some(&(cb, vb))) => {
                j += 1;
                (cb, beta * vb)
            }
            (None, None) => unreachable!(),
        };
        if v.norm() > DROP_TOLERANCE {
            out.push((c, v));
        }
    }
    out
}

fn check_mode(mode: usize, q: usize) -> Result<()> {
    if mode == 0 || mode > q {
        Err(Error::ModeOutOfRange { mode, q })
    } else {
        Ok(())
    }
}

fn expect_sector(found: &Sector, q: usize, n: usize) -> Result<()> {
    if found.q() == q && found.n() == n {
        Ok(())
    } else {
        Err(Error::SectorMismatch {
            expected_q: q,
            expected_n: n,
            found_q: found.q(),
            found_n: found.n(),
        })
    }
}

/// `a_mode` from sector `(q, n)` into `to`, which must be `(q, n-1)`.
///
/// On the vacuum sector the result is the zero map back into `(q, 0)`.
pub fn annihilator(mode: usize, from: &Arc<Sector>, to: &Arc<Sector>) -> Result<LinearOperator> {
    let q = from.q();
    check_mode(mode, q)?;
    let n = from.n();
    expect_sector(to, q, n.saturating_sub(1))?;
    if n == 0 {
        return Ok(LinearOperator::zero(from, to));
    }
    let triplets = from.basis().iter().enumerate().filter_map(|(col, occ)| {
        let k = occ.get(mode);
        let target = occ.shifted(mode, -1)?;
        let row = to.index_of(&target).expect("target lies in the lower sector");
        Some((row, col, C64::new((k as f64).sqrt(), 0.0)))
    });
    LinearOperator::from_triplets(from, to, triplets)
}

/// `a_mode†` from sector `(q, n)` into `to`, which must be `(q, n+1)`.
pub fn creator(mode: usize, from: &Arc<Sector>, to: &Arc<Sector>) -> Result<LinearOperator> {
    let q = from.q();
    check_mode(mode, q)?;
    expect_sector(to, q, from.n() + 1)?;
    let triplets = from.basis().iter().enumerate().map(|(col, occ)| {
        let k = occ.get(mode);
        let target = occ.shifted(mode, 1).expect("raising never underflows");
        let row = to.index_of(&target).expect("target lies in the upper sector");
        (row, col, C64::new((k as f64 + 1.0).sqrt(), 0.0))
    });
    LinearOperator::from_triplets(from, to, triplets)
}

/// [`annihilator`] with the target sector enumerated on the fly.
pub fn annihilator_on(mode: usize, from: &Arc<Sector>) -> Result<LinearOperator> {
    check_mode(mode, from.q())?;
    let to = Arc::new(enumerate_sector_capped(from.q(), from.n().saturating_sub(1), usize::MAX)?);
    annihilator(mode, from, &to)
}

/// [`creator`] with the target sector enumerated on the fly.
pub fn creator_on(mode: usize, from: &Arc<Sector>) -> Result<LinearOperator> {
    check_mode(mode, from.q())?;
    let to = Arc::new(enumerate_sector_capped(from.q(), from.n() + 1, usize::MAX)?);
    creator(mode, from, &to)
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    domain: Sector,
    codomain: Sector,
    entries: Vec<(usize, usize, f64, f64)>,
}

impl From<LinearOperator> for OperatorRepr {
    fn from(op: LinearOperator) -> Self {
        let entries = op.entries().map(|(r, c, v)| (r, c, v.re, v.im)).collect();
        OperatorRepr {
            domain: (*op.domain).clone(),
            codomain: (*op.codomain).clone(),
            entries,
        }
    }
}

impl TryFrom<OperatorRepr> for LinearOperator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let domain = Arc::new(r.domain);
        let codomain = Arc::new(r.codomain);
        let triplets = r.entries.into_iter().map(|(row, col, re, im)| (row, col, C64::new(re, im)));
        LinearOperator::from_triplets(&domain, &codomain, triplets)
    }
}
