//! Fixed-number sectors of a q-mode bosonic Fock space.
//!
//! A sector holds every occupation vector `(n_1, …, n_q)` with total `n`,
//! ordered lexicographically ascending on `(n_1, …, n_q)`. Every operator in
//! this crate maps one sector into another, so nothing is ever truncated.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of basis states in one sector.
pub const DEFAULT_DIMENSION_CAP: usize = 10_000;

/// Occupations of modes `1..=q`; entry `k` is the occupation of mode `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(occ: Vec<u32>) -> Self {
        Self(occ)
    }

    pub fn q(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&k| k as usize).sum()
    }

    /// Occupation of the 1-based `mode`.
    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode - 1]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Copy with the occupation of `mode` shifted by `delta`; `None` if it would go negative.
    pub fn shifted(&self, mode: usize, delta: i64) -> Option<Self> {
        let v = self.0[mode - 1] as i64 + delta;
        if v < 0 {
            return None;
        }
        let mut occ = self.0.clone();
        occ[mode - 1] = v as u32;
        Some(Self(occ))
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Number of states in sector `(q, n)`, i.e. `C(n+q-1, q-1)`.
pub fn sector_dimension(q: usize, n: usize) -> Option<u128> {
    if q == 0 {
        return Some(0);
    }
    binomial((n + q - 1) as u128, (q - 1) as u128)
}

/// All occupation vectors of total `n` over `q` modes, in basis order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SectorRepr", into = "SectorRepr")]
pub struct Sector {
    q: usize,
    n: usize,
    basis: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl PartialEq for Sector {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.n == other.n
    }
}

impl Eq for Sector {}

impl Sector {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[OccupationVector] {
        &self.basis
    }

    pub fn state(&self, idx: usize) -> &OccupationVector {
        &self.basis[idx]
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Same `(q, n)` label.
    pub fn same_as(&self, other: &Sector) -> bool {
        self == other
    }

    pub(crate) fn check_is(&self, other: &Sector) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::SectorMismatch {
                expected_q: other.q,
                expected_n: other.n,
                found_q: self.q,
                found_n: self.n,
            })
        }
    }
}

/// Enumerate sector `(q, n)` with the default dimension cap.
pub fn enumerate_sector(q: usize, n: usize) -> Result<Sector> {
    enumerate_sector_capped(q, n, DEFAULT_DIMENSION_CAP)
}

pub fn enumerate_sector_capped(q: usize, n: usize, cap: usize) -> Result<Sector> {
    check_sector_size(q, n, cap)?;
    let mut basis = Vec::new();
    let mut prefix = Vec::with_capacity(q);
    fill(&mut basis, &mut prefix, n as u32, q);
    let index = basis
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Ok(Sector { q, n, basis, index })
}

/// Validate `(q, n)` against `cap` without enumerating anything.
pub fn check_sector_size(q: usize, n: usize, cap: usize) -> Result<usize> {
    if q < 1 {
        return Err(Error::InvalidDimension { q, min: 1 });
    }
    let dim = sector_dimension(q, n).ok_or(Error::Overflow("sector dimension"))?;
    if dim > cap as u128 {
        return Err(Error::DimensionCap { q, n, dim, cap });
    }
    Ok(dim as usize)
}

fn fill(out: &mut Vec<OccupationVector>, prefix: &mut Vec<u32>, remaining: u32, modes_left: usize) {
    if modes_left == 1 {
        prefix.push(remaining);
        out.push(OccupationVector(prefix.clone()));
        prefix.pop();
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        fill(out, prefix, remaining - k, modes_left - 1);
        prefix.pop();
    }
}

#[derive(Serialize, Deserialize)]
struct SectorRepr {
    q: usize,
    n: usize,
    basis: Vec<OccupationVector>,
}

impl From<Sector> for SectorRepr {
    fn from(s: Sector) -> Self {
        SectorRepr {
            q: s.q,
            n: s.n,
            basis: s.basis,
        }
    }
}

impl TryFrom<SectorRepr> for Sector {
    type Error = Error;

    fn try_from(r: SectorRepr) -> Result<Self> {
        let fresh = enumerate_sector_capped(r.q, r.n, usize::MAX)?;
        if fresh.basis != r.basis {
            return Err(Error::Malformed(format!(
                "basis of sector (q={}, n={}) is not in canonical order",
                r.q, r.n
            )));
        }
        Ok(fresh)
    }
}

/// Sectors `0..=top` of a q-mode space, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct FockSpace {
    q: usize,
    cap: usize,
    sectors: Vec<Arc<Sector>>,
}

impl FockSpace {
    pub fn new(q: usize, top: usize, cap: usize) -> Result<Self> {
        for n in 0..=top {
            check_sector_size(q, n, cap)?;
        }
        let sectors = (0..=top)
            .map(|n| enumerate_sector_capped(q, n, cap).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q, cap, sectors })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn top(&self) -> usize {
        self.sectors.len() - 1
    }

    pub fn sector(&self, n: usize) -> Result<&Arc<Sector>> {
        self.sectors.get(n).ok_or(Error::SectorNotInstantiated {
            n,
            top: self.top(),
        })
    }

    /// Target of a lowering by `k` quanta: `n - k`, or the vacuum sector when
    /// fewer than `k` quanta are present (the zero map lands there).
    pub fn lowered(&self, n: usize, k: usize) -> Result<&Arc<Sector>> {
        self.sector(n.saturating_sub(k))
    }
}
