//! The bosonic realization of o(2,1) and the angular momentum operators.
//!
//! With `N = Σ a_i† a_i` and `A = Σ a_i a_i`:
//!
//! ```text
//! L² = N(N + q − 2) − A†A        K₋ = A/2     K₊ = A†/2     J₃ = N/2 + q/4
//! K₁ = (K₊ + K₋)/2               K₂ = (K₊ − K₋)/(2i)
//! Q  = J₃² − K₁² − K₂² = J₃(J₃ − 1) − K₊K₋        L² = 4Q − q²/4 + q
//! ```
//!
//! Operators that change the particle number are always built as maps between
//! two concrete sectors. `K₁` and `K₂` mix `n ± 2` and are therefore only
//! materialized as block columns (see [`Column`]) inside identity checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, Sector, DEFAULT_DIMENSION_CAP};
use crate::operator::{annihilator, creator, LinearOperator, C64};

pub(crate) fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Operator factory over the sectors `0..=top` of a q-mode space.
#[derive(Debug, Clone)]
pub struct Algebra {
    space: FockSpace,
}

impl Algebra {
    pub fn new(q: usize, top: usize, cap: usize) -> Result<Self> {
        Ok(Self {
            space: FockSpace::new(q, top, cap)?,
        })
    }

    pub fn from_space(space: FockSpace) -> Self {
        Self { space }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn q(&self) -> usize {
        self.space.q()
    }

    pub fn sector(&self, n: usize) -> Result<&Arc<Sector>> {
        self.space.sector(n)
    }

    fn qf(&self) -> f64 {
        self.q() as f64
    }

    /// `a_mode`: `n → n − 1` (zero self-loop on the vacuum).
    pub fn lower(&self, mode: usize, n: usize) -> Result<LinearOperator> {
        annihilator(mode, self.sector(n)?, self.space.lowered(n, 1)?)
    }

    /// `a_mode†`: `n → n + 1`.
    pub fn raise(&self, mode: usize, n: usize) -> Result<LinearOperator> {
        creator(mode, self.sector(n)?, self.sector(n + 1)?)
    }

    pub fn number(&self, n: usize) -> Result<LinearOperator> {
        Ok(LinearOperator::scaled_identity(self.sector(n)?, c64(n as f64, 0.0)))
    }

    /// `A = Σ a_i a_i`: `n → n − 2`.
    pub fn pair_lower(&self, n: usize) -> Result<LinearOperator> {
        self.pair_lower_modes(1..=self.q(), n)
    }

    fn pair_lower_modes(&self, modes: impl IntoIterator<Item = usize>, n: usize) -> Result<LinearOperator> {
        let n1 = n.saturating_sub(1);
        let mut acc = LinearOperator::zero(self.sector(n)?, self.space.lowered(n, 2)?);
        for i in modes {
            let term = self.lower(i, n1)?.compose(&self.lower(i, n)?)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// `A† = Σ a_i† a_i†`: `n → n + 2`.
    pub fn pair_raise(&self, n: usize) -> Result<LinearOperator> {
        let mut acc = LinearOperator::zero(self.sector(n)?, self.sector(n + 2)?);
        for i in 1..=self.q() {
            let term = self.raise(i, n + 1)?.compose(&self.raise(i, n)?)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    pub fn k_minus(&self, n: usize) -> Result<LinearOperator> {
        Ok(self.pair_lower(n)?.scale_re(0.5))
    }

    /// `K₊` as a forward map `n → n + 2`.
    pub fn k_plus(&self, n: usize) -> Result<LinearOperator> {
        Ok(self.pair_raise(n)?.scale_re(0.5))
    }

    pub fn j3(&self, n: usize) -> Result<LinearOperator> {
        Ok(LinearOperator::scaled_identity(
            self.sector(n)?,
            c64(n as f64 / 2.0 + self.qf() / 4.0, 0.0),
        ))
    }

    /// `L² = N(N + q − 2) − A†A` with `A†A` routed through sector `n − 2`.
    pub fn l_squared(&self, n: usize) -> Result<LinearOperator> {
        let a = self.pair_lower(n)?;
        let nf = n as f64;
        let diag = LinearOperator::scaled_identity(self.sector(n)?, c64(nf * (nf + self.qf() - 2.0), 0.0));
        diag.sub(&a.adjoint().compose(&a)?)
    }

    /// `L² = ½ Σ_{i,j} L_ij²`, built from the generators alone.
    pub fn l_squared_from_generators(&self, n: usize) -> Result<LinearOperator> {
        self.l_squared_sub(self.q(), n)
    }

    /// `L_{q'}² = Σ_{i<j≤q'} L_ij²`, acting on modes `1..=q'` of sector `n`.
    pub fn l_squared_sub(&self, q_prime: usize, n: usize) -> Result<LinearOperator> {
        if q_prime > self.q() {
            return Err(Error::InvalidSubdimension { q_prime, q: self.q() });
        }
        let s = self.sector(n)?;
        let mut acc = LinearOperator::zero(s, s);
        for i in 1..=q_prime {
            for j in i + 1..=q_prime {
                let l = self.l_generator(i, j, n)?;
                acc = acc.add(&l.compose(&l)?)?;
            }
        }
        Ok(acc)
    }

    /// `L_ij = −i(a_i† a_j − a_j† a_i)` on sector `n`.
    pub fn l_generator(&self, i: usize, j: usize, n: usize) -> Result<LinearOperator> {
        let q = self.q();
        if i == j || i == 0 || j == 0 || i > q || j > q {
            return Err(Error::InvalidGenerator { i, j, q });
        }
        let (ai, aj) = (self.lower(i, n)?, self.lower(j, n)?);
        let hop = ai.adjoint().compose(&aj)?.sub(&aj.adjoint().compose(&ai)?)?;
        Ok(hop.scale(c64(0.0, -1.0)))
    }

    fn check_plus_minus(&self) -> Result<()> {
        if self.q() < 2 {
            Err(Error::InvalidDimension { q: self.q(), min: 2 })
        } else {
            Ok(())
        }
    }

    /// `a_± = (a_2 ± i a_1)/√2`: `n → n − 1`.
    pub fn plus_minus(&self, n: usize) -> Result<(LinearOperator, LinearOperator)> {
        self.check_plus_minus()?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a1, a2) = (self.lower(1, n)?, self.lower(2, n)?);
        let plus = a2.lin_comb(c64(h, 0.0), &a1, c64(0.0, h))?;
        let minus = a2.lin_comb(c64(h, 0.0), &a1, c64(0.0, -h))?;
        Ok((plus, minus))
    }

    /// Forward `a_±† = (a_2† ∓ i a_1†)/√2`: `n → n + 1`.
    pub fn plus_minus_raise(&self, n: usize) -> Result<(LinearOperator, LinearOperator)> {
        self.check_plus_minus()?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (c1, c2) = (self.raise(1, n)?, self.raise(2, n)?);
        let plus = c2.lin_comb(c64(h, 0.0), &c1, c64(0.0, -h))?;
        let minus = c2.lin_comb(c64(h, 0.0), &c1, c64(0.0, h))?;
        Ok((plus, minus))
    }

    /// `L_12 = a_+† a_+ − a_−† a_−`.
    pub fn l12_from_plus_minus(&self, n: usize) -> Result<LinearOperator> {
        let (p, m) = self.plus_minus(n)?;
        p.adjoint().compose(&p)?.sub(&m.adjoint().compose(&m)?)
    }

    /// `K₋ = a_+ a_− + ½ Σ_{i≥3} a_i a_i`.
    pub fn k_minus_from_plus_minus(&self, n: usize) -> Result<LinearOperator> {
        let (_, minus) = self.plus_minus(n)?;
        let (plus_below, _) = self.plus_minus(n.saturating_sub(1))?;
        let cross = plus_below.compose(&minus)?;
        let rest = self.pair_lower_modes(3..=self.q(), n)?;
        cross.add(&rest.scale_re(0.5))
    }

    /// Reflection of mode 1: diagonal `(−1)^{n_1}`.
    pub fn parity(&self, n: usize) -> Result<LinearOperator> {
        Ok(LinearOperator::diagonal(self.sector(n)?, |occ| {
            c64(if occ.get(1) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }))
    }

    /// `Q = J₃(J₃ − 1) − K₊K₋`, needing only sector `n − 2`.
    pub fn casimir_lowered(&self, n: usize) -> Result<LinearOperator> {
        let j = n as f64 / 2.0 + self.qf() / 4.0;
        let km = self.k_minus(n)?;
        LinearOperator::scaled_identity(self.sector(n)?, c64(j * (j - 1.0), 0.0))
            .sub(&km.adjoint().compose(&km)?)
    }

    /// `Q = J₃² − K₁² − K₂²` as a block column on sector `n` (needs `n + 4`).
    pub fn casimir_symmetric(&self, n: usize) -> Result<Column> {
        let j3 = self.product(Gen::J3, self.column(Gen::J3, n)?)?;
        let k1 = self.product(Gen::K1, self.column(Gen::K1, n)?)?;
        let k2 = self.product(Gen::K2, self.column(Gen::K2, n)?)?;
        j3.lin_comb(ONE, &k1, -ONE)?.lin_comb(ONE, &k2, -ONE)
    }

    /// `4Q − q²/4 + q` with `Q` in lowered form.
    pub fn l_squared_from_casimir(&self, n: usize) -> Result<LinearOperator> {
        let q = self.qf();
        let shift = LinearOperator::scaled_identity(self.sector(n)?, c64(q * q / 4.0 - q, 0.0));
        self.casimir_lowered(n)?.scale_re(4.0).sub(&shift)
    }

    /// Every named operator on sector `n`.
    pub fn algebra_set(&self, n: usize) -> Result<AlgebraSet> {
        let q = self.q();
        let mut generators = BTreeMap::new();
        for i in 1..=q {
            for j in i + 1..=q {
                generators.insert((i, j), self.l_generator(i, j, n)?);
            }
        }
        let k_minus = self.k_minus(n)?;
        Ok(AlgebraSet {
            q,
            n,
            number: self.number(n)?,
            pair_lower: self.pair_lower(n)?,
            pair_raise: self.pair_raise(n)?,
            l_squared: self.l_squared(n)?,
            generators,
            k_plus: k_minus.adjoint(),
            k_plus_forward: self.k_plus(n)?,
            k_minus,
            j3: self.j3(n)?,
            parity: self.parity(n)?,
            l12: if q >= 2 { Some(self.l_generator(1, 2, n)?) } else { None },
        })
    }
}

/// Every named operator on a single sector `n`.
#[derive(Debug, Clone)]
pub struct AlgebraSet {
    pub q: usize,
    pub n: usize,
    /// `N`: `n → n`.
    pub number: LinearOperator,
    /// `A`: `n → n − 2`.
    pub pair_lower: LinearOperator,
    /// `A†`: `n → n + 2`.
    pub pair_raise: LinearOperator,
    pub l_squared: LinearOperator,
    /// `L_ij` for `i < j`.
    pub generators: BTreeMap<(usize, usize), LinearOperator>,
    /// `K₋`: `n → n − 2`.
    pub k_minus: LinearOperator,
    /// `K₊ = K₋†`: `n − 2 → n`.
    pub k_plus: LinearOperator,
    /// `K₊`: `n → n + 2`.
    pub k_plus_forward: LinearOperator,
    pub j3: LinearOperator,
    pub parity: LinearOperator,
    pub l12: Option<LinearOperator>,
}

impl AlgebraSet {
    /// `L_ij` for any ordered pair, using `L_ji = −L_ij`.
    pub fn l(&self, i: usize, j: usize) -> Option<LinearOperator> {
        if i < j {
            self.generators.get(&(i, j)).cloned()
        } else {
            self.generators.get(&(j, i)).map(|l| l.scale_re(-1.0))
        }
    }
}

/// Build every named operator on sector `(q, n)`.
pub fn build_algebra(q: usize, n: usize) -> Result<AlgebraSet> {
    Algebra::new(q, n + 2, DEFAULT_DIMENSION_CAP)?.algebra_set(n)
}

pub fn angular_momentum_sq(q: usize, n: usize) -> Result<LinearOperator> {
    Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?.l_squared(n)
}

pub fn l_generator(i: usize, j: usize, q: usize, n: usize) -> Result<LinearOperator> {
    Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?.l_generator(i, j, n)
}

pub fn plus_minus_modes(q: usize, n: usize) -> Result<(LinearOperator, LinearOperator)> {
    Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?.plus_minus(n)
}

pub fn parity_op(q: usize, n: usize) -> Result<LinearOperator> {
    Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?.parity(n)
}

/// o(2,1) generators that can appear in block-column products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    J3,
    KPlus,
    KMinus,
    K1,
    K2,
}

/// The image of one sector under an operator that may change `n`: one block
/// per target sector, all sharing the same domain.
#[derive(Debug, Clone)]
pub struct Column {
    domain: Arc<Sector>,
    blocks: BTreeMap<usize, LinearOperator>,
}

impl Column {
    fn new(domain: &Arc<Sector>) -> Self {
        Self {
            domain: domain.clone(),
            blocks: BTreeMap::new(),
        }
    }

    fn push(&mut self, op: LinearOperator) -> Result<()> {
        op.domain().check_is(&self.domain)?;
        let key = op.codomain().n();
        match self.blocks.remove(&key) {
            Some(prev) => {
                self.blocks.insert(key, prev.add(&op)?);
            }
            None => {
                self.blocks.insert(key, op);
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> &BTreeMap<usize, LinearOperator> {
        &self.blocks
    }

    /// The block landing back in the domain sector (zero if absent).
    pub fn diagonal_block(&self) -> LinearOperator {
        self.blocks
            .get(&self.domain.n())
            .cloned()
            .unwrap_or_else(|| LinearOperator::zero(&self.domain, &self.domain))
    }

    /// Largest entry among blocks that leave the domain sector.
    pub fn off_diagonal_max(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|(&k, _)| k != self.domain.n())
            .map(|(_, b)| b.max_abs_entry())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks.values().map(LinearOperator::max_abs_entry).fold(0.0, f64::max)
    }

    pub fn lin_comb(&self, alpha: C64, other: &Column, beta: C64) -> Result<Column> {
        let mut out = Column::new(&self.domain);
        for b in self.blocks.values() {
            out.push(b.scale(alpha))?;
        }
        for b in other.blocks.values() {
            out.push(b.scale(beta))?;
        }
        Ok(out)
    }

    pub fn add_single(&self, op: &LinearOperator, c: C64) -> Result<Column> {
        let mut out = self.clone();
        out.push(op.scale(c))?;
        Ok(out)
    }
}

impl Algebra {
    /// Column of a generator applied to sector `n`.
    pub fn column(&self, g: Gen, n: usize) -> Result<Column> {
        let s = self.sector(n)?;
        let mut col = Column::new(s);
        let half = 0.5;
        match g {
            Gen::J3 => col.push(self.j3(n)?)?,
            Gen::KPlus => col.push(self.k_plus(n)?)?,
            Gen::KMinus => col.push(self.k_minus(n)?)?,
            Gen::K1 => {
                col.push(self.k_plus(n)?.scale_re(half))?;
                col.push(self.k_minus(n)?.scale_re(half))?;
            }
            Gen::K2 => {
                // (K₊ − K₋)/(2i) = −(i/2) K₊ + (i/2) K₋
                col.push(self.k_plus(n)?.scale(c64(0.0, -half)))?;
                col.push(self.k_minus(n)?.scale(c64(0.0, half)))?;
            }
        }
        Ok(col)
    }

    /// `g ∘ inner`, expanding `g` on every sector `inner` reaches.
    pub fn product(&self, g: Gen, inner: Column) -> Result<Column> {
        let mut out = Column::new(&inner.domain);
        for (&m, block) in &inner.blocks {
            for outer in self.column(g, m)?.blocks.values() {
                out.push(outer.compose(block)?)?;
            }
        }
        Ok(out)
    }

    /// `[x, y]` applied to sector `n`.
    pub fn bracket(&self, x: Gen, y: Gen, n: usize) -> Result<Column> {
        let xy = self.product(x, self.column(y, n)?)?;
        let yx = self.product(y, self.column(x, n)?)?;
        xy.lin_comb(ONE, &yx, -ONE)
    }

    /// `[x, y†]` on sector `n` for two lowering families, using the forward
    /// path `n → n+1 → n` and the return path `n → n−1 → n`.
    fn lowering_bracket(
        &self,
        x: impl Fn(usize) -> Result<LinearOperator>,
        y: impl Fn(usize) -> Result<LinearOperator>,
        n: usize,
    ) -> Result<LinearOperator> {
        let up = x(n + 1)?.compose(&y(n + 1)?.adjoint())?;
        let down = y(n)?.adjoint().compose(&x(n)?)?;
        up.sub(&down)
    }

    /// `[a_i, a_j†]` on sector `n`.
    pub fn canonical_bracket(&self, i: usize, j: usize, n: usize) -> Result<LinearOperator> {
        self.lowering_bracket(|m| self.lower(i, m), |m| self.lower(j, m), n)
    }

    /// `[a_s, a_t†]` for `s, t ∈ {+, −}` on sector `n`.
    pub fn plus_minus_bracket(&self, s: Sign, t: Sign, n: usize) -> Result<LinearOperator> {
        let pick = |sign: Sign, m: usize| -> Result<LinearOperator> {
            let (p, mi) = self.plus_minus(m)?;
            Ok(match sign {
                Sign::Plus => p,
                Sign::Minus => mi,
            })
        };
        self.lowering_bracket(|m| pick(s, m), |m| pick(t, m), n)
    }

    /// `[A, A†]` on sector `n` (routes through `n + 2` and `n − 2`).
    pub fn pair_bracket(&self, n: usize) -> Result<LinearOperator> {
        let up = self.pair_lower(n + 2)?.compose(&self.pair_raise(n)?)?;
        let a = self.pair_lower(n)?;
        up.sub(&a.adjoint().compose(&a)?)
    }
}

/// Choice of circular mode `a_+` or `a_−`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Residual of one identity on one sector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SectorResidual {
    pub n: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub sectors: Vec<SectorResidual>,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub q: usize,
    pub n_max: usize,
    pub tol: f64,
    pub identities: Vec<IdentityCheck>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn identity(&self, name: &str) -> Option<&IdentityCheck> {
        self.identities.iter().find(|c| c.name == name)
    }
}

pub mod names {
    pub const HERMITICITY: &str = "hermiticity of L^2, L_ij, J3, P";
    pub const N_A: &str = "[N,A] = -2A";
    pub const A_ADAG: &str = "[A,A^dag] = 4N + 2q";
    pub const J3_K1: &str = "[J3,K1] = iK2";
    pub const J3_K2: &str = "[J3,K2] = -iK1";
    pub const K1_K2: &str = "[K1,K2] = -iJ3";
    pub const L2_FORMS: &str = "N(N+q-2) - A^dag A = (1/2) sum L_ij^2";
    pub const L2_CASIMIR: &str = "L^2 = 4Q - q^2/4 + q (Q = J3(J3-1) - K+K-)";
    pub const Q_FORMS: &str = "J3^2 - K1^2 - K2^2 = J3(J3-1) - K+K-";
    pub const PARITY_A1: &str = "P a_1 P^-1 = -a_1";
    pub const PARITY_L12: &str = "{P, L_12} = 0";
    pub const PARITY_CHAIN: &str = "[P, L_k^2] = 0";
    pub const L2_LIJ: &str = "[L^2, L_ij] = 0";
    pub const CHAIN: &str = "[L_k^2, L_m^2] = 0";
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Residuals of every identity on one sector, in a fixed order.
fn sector_residuals(alg: &Algebra, n: usize, n_max: usize) -> Result<Vec<(&'static str, f64)>> {
    let q = alg.q();
    let qf = q as f64;
    let s = alg.sector(n)?;
    let interior = n + 2 <= n_max;
    let mut out = Vec::new();

    let l2 = alg.l_squared(n)?;
    let l2_gen = alg.l_squared_from_generators(n)?;
    let generators: Vec<((usize, usize), LinearOperator)> = (1..=q)
        .flat_map(|i| (i + 1..=q).map(move |j| (i, j)))
        .map(|(i, j)| alg.l_generator(i, j, n).map(|l| ((i, j), l)))
        .collect::<Result<_>>()?;
    let parity = alg.parity(n)?;

    let mut herm = vec![
        l2.hermiticity_defect()?,
        l2_gen.hermiticity_defect()?,
        alg.j3(n)?.hermiticity_defect()?,
        parity.hermiticity_defect()?,
    ];
    for (_, l) in &generators {
        herm.push(l.hermiticity_defect()?);
    }
    out.push((names::HERMITICITY, max_of(herm)));

    // [N, A] + 2A, with N evaluated on both ends of A
    let a = alg.pair_lower(n)?;
    let n_below = alg.number(a.codomain().n())?;
    let na = n_below.compose(&a)?.sub(&a.compose(&alg.number(n)?)?)?;
    out.push((names::N_A, na.add(&a.scale_re(2.0))?.max_abs_entry()));

    if interior {
        let target = LinearOperator::scaled_identity(s, c64(4.0 * n as f64 + 2.0 * qf, 0.0));
        out.push((names::A_ADAG, alg.pair_bracket(n)?.sub(&target)?.max_abs_entry()));

        let r = alg.bracket(Gen::J3, Gen::K1, n)?.lin_comb(ONE, &alg.column(Gen::K2, n)?, c64(0.0, -1.0))?;
        out.push((names::J3_K1, r.max_abs_entry()));
        let r = alg.bracket(Gen::J3, Gen::K2, n)?.lin_comb(ONE, &alg.column(Gen::K1, n)?, c64(0.0, 1.0))?;
        out.push((names::J3_K2, r.max_abs_entry()));
        let r = alg.bracket(Gen::K1, Gen::K2, n)?.add_single(&alg.j3(n)?, c64(0.0, 1.0))?;
        out.push((names::K1_K2, r.max_abs_entry()));
    }

    out.push((names::L2_FORMS, l2.sub(&l2_gen)?.max_abs_entry()));
    out.push((
        names::L2_CASIMIR,
        l2_gen.sub(&alg.l_squared_from_casimir(n)?)?.max_abs_entry(),
    ));

    if interior {
        let sym = alg.casimir_symmetric(n)?;
        let diff = sym.diagonal_block().sub(&alg.casimir_lowered(n)?)?.max_abs_entry();
        out.push((names::Q_FORMS, diff.max(sym.off_diagonal_max())));
    }

    let a1 = alg.lower(1, n)?;
    let p_below = alg.parity(a1.codomain().n())?;
    let conj = p_below.compose(&a1)?.compose(&parity)?;
    out.push((names::PARITY_A1, conj.add(&a1)?.max_abs_entry()));

    if q >= 2 {
        let l12 = &generators[0].1;
        out.push((names::PARITY_L12, parity.anticommutator(l12)?.max_abs_entry()));

        let chain: Vec<LinearOperator> = (2..=q).map(|k| alg.l_squared_sub(k, n)).collect::<Result<_>>()?;
        let mut pc = Vec::new();
        for lk in &chain {
            pc.push(parity.commutator(lk)?.max_abs_entry());
        }
        out.push((names::PARITY_CHAIN, max_of(pc)));

        let mut lij = Vec::new();
        for (_, l) in &generators {
            lij.push(l2.commutator(l)?.max_abs_entry());
        }
        out.push((names::L2_LIJ, max_of(lij)));

        let mut cc = Vec::new();
        for (k, lk) in chain.iter().enumerate() {
            for lm in &chain[k + 1..] {
                cc.push(lk.commutator(lm)?.max_abs_entry());
            }
        }
        out.push((names::CHAIN, max_of(cc)));
    }
    Ok(out)
}

/// Check every operator identity on sectors `0..=n_max` of the q-mode space.
///
/// Identities that need raising operators (`[A,A†]`, the o(2,1) brackets and
/// the symmetric Casimir) are checked on `n ≤ n_max − 2`; they also touch
/// sectors up to `n_max + 2`, which must fit under `cap`.
pub fn verify_algebra_capped(q: usize, n_max: usize, tol: f64, cap: usize) -> Result<IdentityReport> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if n_max < 2 {
        return Err(Error::NMaxTooSmall { n_max, min: 2 });
    }
    let alg = Algebra::new(q, n_max + 2, cap)?;
    let per_sector: Vec<Vec<(&'static str, f64)>> = (0..=n_max)
        .into_par_iter()
        .map(|n| sector_residuals(&alg, n, n_max))
        .collect::<Result<_>>()?;

    let mut identities: Vec<IdentityCheck> = Vec::new();
    for (n, rows) in per_sector.into_iter().enumerate() {
        for (name, residual) in rows {
            let entry = match identities.iter_mut().find(|c| c.name == name) {
                Some(e) => e,
                None => {
                    identities.push(IdentityCheck {
                        name: name.to_string(),
                        sectors: Vec::new(),
                        max_residual: 0.0,
                        pass: true,
                    });
                    identities.last_mut().unwrap()
                }
            };
            entry.sectors.push(SectorResidual { n, residual });
            entry.max_residual = entry.max_residual.max(residual);
            entry.pass &= residual < tol;
        }
    }
    let pass = identities.iter().all(|c| c.pass);
    Ok(IdentityReport {
        q,
        n_max,
        tol,
        identities,
        pass,
    })
}

pub fn verify_algebra(q: usize, n_max: usize, tol: f64) -> Result<IdentityReport> {
    verify_algebra_capped(q, n_max, tol, DEFAULT_DIMENSION_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn sorted_eigs(op: &LinearOperator) -> Vec<f64> {
        let mut e = hermitian_eigenvalues(op).unwrap();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    fn assert_close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn j3_on_vacuum_of_three_modes() {
        let set = build_algebra(3, 0).unwrap();
        assert_eq!(set.j3.get(0, 0), c64(0.75, 0.0));
    }

    #[test]
    fn pair_lowering_on_one_quantum_is_zero() {
        for q in 1..=4 {
            let set = build_algebra(q, 1).unwrap();
            assert!(set.pair_lower.is_zero());
            assert_eq!(set.pair_lower.codomain().n(), 0);
        }
    }

    #[test]
    fn number_on_four_modes_three_quanta() {
        let set = build_algebra(4, 3).unwrap();
        assert_eq!(set.number.domain().dim(), 20);
        let want = LinearOperator::scaled_identity(set.number.domain(), c64(3.0, 0.0));
        assert_eq!(set.number.sub(&want).unwrap().nnz(), 0);
    }

    #[test]
    fn l_squared_small_sectors() {
        for q in 1..=5 {
            assert!(angular_momentum_sq(q, 0).unwrap().is_zero());
        }
        let l2 = angular_momentum_sq(3, 1).unwrap();
        let want = LinearOperator::scaled_identity(l2.domain(), c64(2.0, 0.0));
        assert!(l2.sub(&want).unwrap().max_abs_entry() < 1e-12);
        // dense eigensolve of the 3×3 sector matrix gives {0, 4, 4}
        assert_close(&sorted_eigs(&angular_momentum_sq(2, 2).unwrap()), &[0.0, 4.0, 4.0]);
    }

    #[test]
    fn l12_spectrum_and_forms() {
        assert_close(&sorted_eigs(&l_generator(1, 2, 2, 1).unwrap()), &[-1.0, 1.0]);
        for q in 2..=4 {
            let alg = Algebra::new(q, 4, DEFAULT_DIMENSION_CAP).unwrap();
            for n in 0..=4 {
                let direct = alg.l_generator(1, 2, n).unwrap();
                let circ = alg.l12_from_plus_minus(n).unwrap();
                assert!(direct.sub(&circ).unwrap().max_abs_entry() < 1e-12);
                assert!(alg.l_generator(1, 2, n).unwrap().hermiticity_defect().unwrap() < 1e-14);
                let anti = alg.l_generator(2, 1, n).unwrap().add(&direct).unwrap();
                assert!(anti.is_zero());
                if n == 0 {
                    assert!(direct.is_zero());
                }
            }
        }
        assert!(matches!(l_generator(2, 2, 3, 1), Err(Error::InvalidGenerator { .. })));
    }

    #[test]
    fn circular_modes() {
        let alg = Algebra::new(2, 4, DEFAULT_DIMENSION_CAP).unwrap();
        for n in 0..=3 {
            let s = alg.sector(n).unwrap();
            let id = LinearOperator::identity(s);
            for (x, y, want_id) in [
                (Sign::Plus, Sign::Plus, true),
                (Sign::Minus, Sign::Minus, true),
                (Sign::Plus, Sign::Minus, false),
                (Sign::Minus, Sign::Plus, false),
            ] {
                let b = alg.plus_minus_bracket(x, y, n).unwrap();
                let r = if want_id { b.sub(&id).unwrap() } else { b };
                assert!(r.max_abs_entry() < 1e-12, "{x:?} {y:?} n={n}");
            }
        }
        let (plus, _) = plus_minus_modes(3, 0).unwrap();
        assert!(plus.apply(&[c64(1.0, 0.0)]).unwrap()[0].norm() == 0.0);
        assert!(matches!(plus_minus_modes(1, 2), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn k_minus_in_circular_form() {
        for q in 2..=5 {
            let alg = Algebra::new(q, 5, DEFAULT_DIMENSION_CAP).unwrap();
            for n in 0..=5 {
                let a = alg.k_minus(n).unwrap();
                let b = alg.k_minus_from_plus_minus(n).unwrap();
                assert!(a.sub(&b).unwrap().max_abs_entry() < 1e-12, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn parity_conventions() {
        assert_eq!(parity_op(3, 0).unwrap().get(0, 0), c64(1.0, 0.0));
        // basis of (q=2, n=1) is (n_1, n_2) = (0,1), (1,0)
        let p = parity_op(2, 1).unwrap();
        assert_eq!(p.get(0, 0), c64(1.0, 0.0));
        assert_eq!(p.get(1, 1), c64(-1.0, 0.0));
        let alg = Algebra::new(3, 4, DEFAULT_DIMENSION_CAP).unwrap();
        for n in 0..=4 {
            let p = alg.parity(n).unwrap();
            let pp = p.compose(&p).unwrap();
            assert!(pp.sub(&LinearOperator::identity(p.domain())).unwrap().is_zero());
            let l12 = alg.l_generator(1, 2, n).unwrap();
            assert!(p.anticommutator(&l12).unwrap().max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn pair_bracket_on_two_mode_vacuum() {
        let alg = Algebra::new(2, 2, DEFAULT_DIMENSION_CAP).unwrap();
        let b = alg.pair_bracket(0).unwrap();
        assert!((b.get(0, 0) - c64(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn identity_suite_three_modes() {
        let report = verify_algebra(3, 8, 1e-10).unwrap();
        assert!(report.pass, "{report:#?}");
        assert_eq!(report.identity(names::N_A).unwrap().sectors.len(), 9);
        assert_eq!(report.identity(names::K1_K2).unwrap().sectors.len(), 7);
    }

    #[test]
    fn identity_suite_one_mode() {
        let report = verify_algebra(1, 4, 1e-10).unwrap();
        assert!(report.pass);
        let alg = Algebra::new(1, 4, DEFAULT_DIMENSION_CAP).unwrap();
        for n in 0..=4 {
            assert!(alg.l_squared(n).unwrap().max_abs_entry() < 1e-12);
        }
        assert!(report.identity(names::PARITY_L12).is_none());
    }

    #[test]
    fn verify_rejects_bad_arguments() {
        assert!(matches!(verify_algebra(3, 1, 1e-10), Err(Error::NMaxTooSmall { .. })));
        assert!(matches!(verify_algebra(3, 4, 0.0), Err(Error::InvalidTolerance(_))));
    }
}
