//! Spectrum of `L²` on fixed-number sectors and the lowest-weight states
//! `(a_±†)^ℓ |0⟩`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Sign};
use crate::error::{Error, Result};
use crate::fock::{sector_dimension, DEFAULT_DIMENSION_CAP};
use crate::linalg::{cluster, eigen_residual, fix_phase, hermitian_eigen, max_abs, norm};
use crate::operator::{LinearOperator, C64};

/// Gap used to group numerically degenerate eigenvalues before snapping.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Default snapping tolerance for eigenvalues.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Dimension of the SO(q) irrep with highest weight `ell`:
/// `(q + 2ℓ − 2) (q + ℓ − 3)! / (ℓ! (q − 2)!)`.
///
/// Evaluated exactly; `(q = 2, ℓ = 0)` is 1, and `q < 2` is rejected.
pub fn degeneracy(q: usize, ell: usize) -> Result<u64> {
    if q < 2 {
        return Err(Error::InvalidDimension { q, min: 2 });
    }
    if q == 2 && ell == 0 {
        return Ok(1);
    }
    let (q, ell) = (q as u64, ell as u64);
    let num = BigUint::from(q + 2 * ell - 2) * factorial(q + ell - 3);
    let den = factorial(ell) * factorial(q - 2);
    let (quot, rem) = (&num / &den, &num % &den);
    if !rem.is_zero() {
        return Err(Error::Malformed(format!(
            "degeneracy numerator not divisible for q={q}, ell={ell}"
        )));
    }
    quot.to_u64().ok_or(Error::Overflow("degeneracy"))
}

/// `ℓ(ℓ + q − 2)`.
pub fn l2_eigenvalue(q: usize, ell: usize) -> f64 {
    (ell as f64) * (ell as f64 + q as f64 - 2.0)
}

/// Invert `λ = ℓ(ℓ + q − 2)`; `None` when no `ℓ ≥ 0` lies within `tol`.
///
/// The map is strictly increasing only for `q ≥ 2`, so smaller `q` never snaps.
pub fn snap_to_ell(eigenvalue: f64, q: usize, tol: f64) -> Option<usize> {
    if q < 2 || tol.is_nan() || tol <= 0.0 || !eigenvalue.is_finite() {
        return None;
    }
    let b = q as f64 - 2.0;
    let disc = b * b + 4.0 * eigenvalue;
    let root = if disc > 0.0 { (-b + disc.sqrt()) / 2.0 } else { 0.0 };
    let guess = root.round().max(0.0) as usize;
    // check neighbours as well, cheap and immune to rounding of the root
    [guess.saturating_sub(1), guess, guess + 1]
        .into_iter()
        .find(|&ell| (l2_eigenvalue(q, ell) - eigenvalue).abs() < tol)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumLine {
    pub ell: usize,
    /// `ℓ(ℓ + q − 2)`.
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub expected_multiplicity: u64,
    /// Largest snap deviation or eigen-equation residual in the cluster.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpectrumReport {
    pub q: usize,
    pub n: usize,
    pub dimension: usize,
    /// Sorted by descending `ell`.
    pub lines: Vec<SpectrumLine>,
    pub unsnapped: Vec<f64>,
    pub pass: bool,
}

/// `ℓ = n, n − 2, …, n mod 2`.
pub fn ells_in_sector(n: usize) -> impl Iterator<Item = usize> {
    (0..=n).rev().step_by(2)
}

pub fn sector_spectrum(q: usize, n: usize, tol: f64) -> Result<SpectrumReport> {
    sector_spectrum_capped(q, n, tol, DEFAULT_DIMENSION_CAP)
}

/// Diagonalize `L²` on sector `(q, n)` and compare with `ℓ(ℓ + q − 2)` and
/// [`degeneracy`].
pub fn sector_spectrum_capped(q: usize, n: usize, tol: f64, cap: usize) -> Result<SpectrumReport> {
    if q < 2 {
        return Err(Error::InvalidDimension { q, min: 2 });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let alg = Algebra::new(q, n, cap)?;
    let l2 = alg.l_squared(n)?;
    spectrum_of(q, n, &l2, tol)
}

fn spectrum_of(q: usize, n: usize, l2: &LinearOperator, tol: f64) -> Result<SpectrumReport> {
    let pairs = hermitian_eigen(l2)?;
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let mut lines: Vec<SpectrumLine> = Vec::new();
    let mut unsnapped = Vec::new();
    for range in cluster(&values, CLUSTER_GAP) {
        let snapped: Vec<Option<usize>> = values[range.clone()]
            .iter()
            .map(|&v| snap_to_ell(v, q, tol))
            .collect();
        let ell = match snapped[0] {
            Some(ell) if snapped.iter().all(|s| *s == Some(ell)) => ell,
            _ => {
                unsnapped.extend_from_slice(&values[range]);
                continue;
            }
        };
        let exact = l2_eigenvalue(q, ell);
        let mut residual: f64 = 0.0;
        for p in &pairs[range.clone()] {
            residual = residual
                .max((p.value - exact).abs())
                .max(eigen_residual(l2, &p.vector, exact)?);
        }
        match lines.iter_mut().find(|l| l.ell == ell) {
            Some(line) => {
                line.multiplicity += range.len();
                line.max_residual = line.max_residual.max(residual);
            }
            None => lines.push(SpectrumLine {
                ell,
                eigenvalue: exact,
                multiplicity: range.len(),
                expected_multiplicity: degeneracy(q, ell)?,
                max_residual: residual,
            }),
        }
    }
    lines.sort_by_key(|l| std::cmp::Reverse(l.ell));
    let expected_ells: Vec<usize> = ells_in_sector(n).collect();
    let found_ells: Vec<usize> = lines.iter().map(|l| l.ell).collect();
    let pass = unsnapped.is_empty()
        && found_ells == expected_ells
        && lines
            .iter()
            .all(|l| l.multiplicity as u64 == l.expected_multiplicity && l.max_residual < tol);
    Ok(SpectrumReport {
        q,
        n,
        dimension: l2.domain().dim(),
        lines,
        unsnapped,
        pass,
    })
}

/// `Σ_{ℓ = n, n−2, …} degeneracy(q, ℓ)`; equals the sector dimension.
pub fn degeneracy_sum(q: usize, n: usize) -> Result<u128> {
    ells_in_sector(n).try_fold(0u128, |acc, ell| Ok(acc + degeneracy(q, ell)? as u128))
}

/// Normalized `(a_±†)^ℓ |0⟩` in the basis of sector `(q, ℓ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowestWeightState {
    pub q: usize,
    pub ell: usize,
    pub sign: Sign,
    pub amplitudes: Vec<C64>,
    /// Norm of the unnormalized state, `√(ℓ!)`.
    pub raw_norm: f64,
}

pub fn lowest_weight_state(q: usize, ell: usize, sign: Sign) -> Result<LowestWeightState> {
    let alg = Algebra::new(q, ell, DEFAULT_DIMENSION_CAP)?;
    lowest_weight_state_in(&alg, ell, sign)
}

/// As [`lowest_weight_state`], with sectors taken from `alg`.
pub fn lowest_weight_state_in(alg: &Algebra, ell: usize, sign: Sign) -> Result<LowestWeightState> {
    let q = alg.q();
    if q < 2 {
        return Err(Error::InvalidDimension { q, min: 2 });
    }
    let mut v = vec![C64::new(1.0, 0.0)];
    for n in 0..ell {
        let (plus, minus) = alg.plus_minus_raise(n)?;
        v = match sign {
            Sign::Plus => plus.apply(&v)?,
            Sign::Minus => minus.apply(&v)?,
        };
    }
    let raw_norm = norm(&v);
    for z in v.iter_mut() {
        *z /= raw_norm;
    }
    fix_phase(&mut v);
    Ok(LowestWeightState {
        q,
        ell,
        sign,
        amplitudes: v,
        raw_norm,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowestWeightCheck {
    pub q: usize,
    pub ell: usize,
    pub sign: Sign,
    /// `‖K₋ψ‖ / ‖ψ‖`.
    pub k_minus_residual: f64,
    /// `‖L²ψ − ℓ(ℓ+q−2)ψ‖_∞`.
    pub l2_residual: f64,
    /// The constant diagonal of `J₃` on sector `ℓ`.
    pub j3_eigenvalue: f64,
    /// `‖J₃ψ − (ℓ/2 + q/4)ψ‖_∞`; zero in exact arithmetic and in floats.
    pub j3_residual: f64,
    /// `⟨ψ|L_12|ψ⟩`.
    pub l12_eigenvalue: f64,
    /// `‖L_12ψ − (±ℓ)ψ‖_∞`.
    pub l12_residual: f64,
    /// `‖Qψ − J₃(J₃−1)ψ‖_∞` with `Q = J₃² − K₁² − K₂²`.
    pub casimir_residual: f64,
}

/// Evaluate the annihilation and eigenvalue properties of a lowest-weight
/// state; `alg` must reach sector `ℓ + 4`.
pub fn check_lowest_weight(alg: &Algebra, state: &LowestWeightState) -> Result<LowestWeightCheck> {
    let (q, ell) = (alg.q(), state.ell);
    let psi = &state.amplitudes;
    let psi_norm = norm(psi);
    let k_minus_residual = norm(&alg.k_minus(ell)?.apply(psi)?) / psi_norm;
    let l2_residual = eigen_residual(&alg.l_squared(ell)?, psi, l2_eigenvalue(q, ell))?;

    let j3 = alg.j3(ell)?;
    let e0 = ell as f64 / 2.0 + q as f64 / 4.0;
    let j3_eigenvalue = j3.get(0, 0).re;
    let j3_residual = eigen_residual(&j3, psi, e0)?;

    let l12 = alg.l_generator(1, 2, ell)?;
    let l12_psi = l12.apply(psi)?;
    let l12_eigenvalue = crate::linalg::inner(psi, &l12_psi).re / (psi_norm * psi_norm);
    let l12_residual = eigen_residual(&l12, psi, state.sign.factor() * ell as f64)?;

    let q_sym = alg.casimir_symmetric(ell)?;
    let mut casimir_residual: f64 = 0.0;
    for (&m, block) in q_sym.blocks() {
        let image = block.apply(psi)?;
        let r = if m == ell {
            image
                .iter()
                .zip(psi)
                .map(|(a, b)| (a - b * (e0 * (e0 - 1.0))).norm())
                .fold(0.0, f64::max)
        } else {
            max_abs(&image)
        };
        casimir_residual = casimir_residual.max(r);
    }

    Ok(LowestWeightCheck {
        q,
        ell,
        sign: state.sign,
        k_minus_residual,
        l2_residual,
        j3_eigenvalue,
        j3_residual,
        l12_eigenvalue,
        l12_residual,
        casimir_residual,
    })
}

/// Largest entry of `[K₋, (a_s†)^ℓ] − ℓ (a_s†)^{ℓ−1} a_{−s}` on sector `n`.
///
/// Requires `ℓ ≥ 1`, `n ≥ 2` and sector `n + ℓ` inside `alg`.
pub fn ladder_commutator_residual(alg: &Algebra, ell: usize, sign: Sign, n: usize) -> Result<f64> {
    if ell == 0 || n < 2 {
        return Err(Error::Malformed(format!(
            "ladder commutator needs ell >= 1 and n >= 2, got ell={ell}, n={n}"
        )));
    }
    let raise = |m: usize| -> Result<LinearOperator> {
        let (p, mi) = alg.plus_minus_raise(m)?;
        Ok(match sign {
            Sign::Plus => p,
            Sign::Minus => mi,
        })
    };
    let power = |from: usize, k: usize| -> Result<LinearOperator> {
        let mut acc = LinearOperator::identity(alg.sector(from)?);
        for m in from..from + k {
            acc = raise(m)?.compose(&acc)?;
        }
        Ok(acc)
    };
    let left = alg.k_minus(n + ell)?.compose(&power(n, ell)?)?;
    let right = power(n - 2, ell)?.compose(&alg.k_minus(n)?)?;
    let (plus, minus) = alg.plus_minus(n)?;
    let opposite = match sign {
        Sign::Plus => minus,
        Sign::Minus => plus,
    };
    let expected = power(n - 1, ell - 1)?.compose(&opposite)?.scale_re(ell as f64);
    Ok(left.sub(&right)?.sub(&expected)?.max_abs_entry())
}

/// Outcome of lowering every `L²` eigenvector of a sector with `K₋`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderCheck {
    pub q: usize,
    pub n: usize,
    /// Eigenvectors annihilated by `K₋`.
    pub annihilated: usize,
    /// Eigenvectors mapped to a nonzero vector in sector `n − 2`.
    pub lowered: usize,
    /// Worst relative eigen-residual of a lowered vector against its own `ℓ`.
    pub max_residual: f64,
    /// Any vector that failed to snap, or whose image was not annihilated and
    /// did not keep `ℓ`.
    pub failures: usize,
}

/// `K₋` maps an `L²` eigenvector to zero or to an eigenvector of the same `ℓ`.
pub fn ladder_property(q: usize, n: usize, tol: f64) -> Result<LadderCheck> {
    let alg = Algebra::new(q, n, DEFAULT_DIMENSION_CAP)?;
    let l2 = alg.l_squared(n)?;
    let km = alg.k_minus(n)?;
    let l2_below = alg.l_squared(km.codomain().n())?;
    let mut check = LadderCheck {
        q,
        n,
        annihilated: 0,
        lowered: 0,
        max_residual: 0.0,
        failures: 0,
    };
    for pair in hermitian_eigen(&l2)? {
        let Some(ell) = snap_to_ell(pair.value, q, tol) else {
            check.failures += 1;
            continue;
        };
        let w = km.apply(&pair.vector)?;
        let w_norm = norm(&w);
        if w_norm < tol {
            check.annihilated += 1;
            continue;
        }
        check.lowered += 1;
        let r = eigen_residual(&l2_below, &w, l2_eigenvalue(q, ell))? / w_norm;
        check.max_residual = check.max_residual.max(r);
        if r >= tol {
            check.failures += 1;
        }
    }
    Ok(check)
}

/// `C(n+q−1, q−1)` as a convenience for callers comparing counts.
pub fn sector_size(q: usize, n: usize) -> Result<u128> {
    sector_dimension(q, n).ok_or(Error::Overflow("sector dimension"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degeneracy_values() {
        assert_eq!(degeneracy(3, 2).unwrap(), 5);
        assert_eq!(degeneracy(4, 1).unwrap(), 4);
        for q in 3..=12 {
            assert_eq!(degeneracy(q, 0).unwrap(), 1);
        }
        assert_eq!(degeneracy(2, 0).unwrap(), 1);
        for ell in 1..=10 {
            assert_eq!(degeneracy(2, ell).unwrap(), 2);
            assert_eq!(degeneracy(3, ell).unwrap(), 2 * ell as u64 + 1);
            assert_eq!(degeneracy(4, ell).unwrap(), ((ell + 1) * (ell + 1)) as u64);
        }
        assert!(degeneracy(1, 3).is_err());
        assert!(matches!(degeneracy(200, 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap_to_ell(6.0000000001, 3, 1e-8), Some(2));
        for q in 2..=7 {
            assert_eq!(snap_to_ell(0.0, q, 1e-8), Some(0));
            for ell in 0..=20 {
                assert_eq!(snap_to_ell(l2_eigenvalue(q, ell), q, 1e-8), Some(ell));
            }
        }
        assert_eq!(snap_to_ell(3.4, 3, 1e-6), None);
        assert_eq!(snap_to_ell(-1.0, 3, 1e-6), None);
        assert_eq!(snap_to_ell(0.0, 1, 1e-6), None);
    }

    #[test]
    fn small_spectra() {
        let r = sector_spectrum(3, 2, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        let got: Vec<(usize, f64, usize)> = r.lines.iter().map(|l| (l.ell, l.eigenvalue, l.multiplicity)).collect();
        assert_eq!(got, vec![(2, 6.0, 5), (0, 0.0, 1)]);

        let r = sector_spectrum(4, 1, 1e-8).unwrap();
        assert_eq!(r.lines.len(), 1);
        assert_eq!((r.lines[0].ell, r.lines[0].eigenvalue, r.lines[0].multiplicity), (1, 3.0, 4));

        let r = sector_spectrum(2, 0, 1e-8).unwrap();
        assert_eq!((r.lines[0].ell, r.lines[0].multiplicity), (0, 1));
        assert!(r.pass);

        let r = sector_spectrum(2, 3, 1e-8).unwrap();
        assert!(r.pass);
        assert_eq!(r.lines.iter().map(|l| l.multiplicity).collect::<Vec<_>>(), vec![2, 2]);
        assert!(matches!(sector_spectrum(1, 3, 1e-8), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn degeneracy_sums_to_sector_size() {
        for q in 2..=6 {
            for n in 0..=8 {
                assert_eq!(degeneracy_sum(q, n).unwrap(), sector_size(q, n).unwrap());
            }
        }
    }

    #[test]
    fn vacuum_lowest_weight() {
        for q in 2..=5 {
            let s = lowest_weight_state(q, 0, Sign::Plus).unwrap();
            assert_eq!(s.amplitudes, vec![C64::new(1.0, 0.0)]);
            let alg = Algebra::new(q, 4, DEFAULT_DIMENSION_CAP).unwrap();
            let c = check_lowest_weight(&alg, &s).unwrap();
            assert_eq!(c.j3_eigenvalue, q as f64 / 4.0);
            assert_eq!(c.l2_residual, 0.0);
            assert_eq!(c.l12_eigenvalue, 0.0);
        }
    }

    #[test]
    fn two_mode_single_quantum_state() {
        // a_+† |0⟩ = (a_2† − i a_1†)|0⟩/√2; basis (n_1, n_2) = (0,1), (1,0)
        let s = lowest_weight_state(2, 1, Sign::Plus).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes[0] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes[1] - C64::new(0.0, -h)).norm() < 1e-15);
        let alg = Algebra::new(2, 5, DEFAULT_DIMENSION_CAP).unwrap();
        let c = check_lowest_weight(&alg, &s).unwrap();
        assert!((c.l12_eigenvalue - 1.0).abs() < 1e-14);
        // same direction as the +1 eigenvector from a dense eigensolve
        let l12 = alg.l_generator(1, 2, 1).unwrap();
        let top = hermitian_eigen(&l12).unwrap().pop().unwrap();
        assert!((top.value - 1.0).abs() < 1e-12);
        let overlap = crate::linalg::inner(&top.vector, &s.amplitudes).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_mode_minus_state() {
        let alg = Algebra::new(3, 6, DEFAULT_DIMENSION_CAP).unwrap();
        let s = lowest_weight_state_in(&alg, 2, Sign::Minus).unwrap();
        assert!((s.raw_norm - 2f64.sqrt()).abs() < 1e-14);
        let c = check_lowest_weight(&alg, &s).unwrap();
        assert!(c.k_minus_residual < 1e-12);
        assert!(c.l2_residual < 1e-12);
        assert!((c.l12_eigenvalue + 2.0).abs() < 1e-12);
        assert!(c.casimir_residual < 1e-12);
    }

    #[test]
    fn ladder_commutator_uses_exponent_ell_minus_one() {
        let alg = Algebra::new(3, 9, DEFAULT_DIMENSION_CAP).unwrap();
        for ell in 1..=4 {
            for sign in [Sign::Plus, Sign::Minus] {
                for n in 2..=5 {
                    let r = ladder_commutator_residual(&alg, ell, sign, n).unwrap();
                    assert!(r < 1e-10, "ell={ell} {sign:?} n={n}: {r}");
                }
            }
        }
    }

    #[test]
    fn k_minus_keeps_ell() {
        for (q, n) in [(3, 4), (4, 5), (5, 4)] {
            let c = ladder_property(q, n, 1e-8).unwrap();
            assert_eq!(c.failures, 0, "{c:?}");
            assert_eq!(c.annihilated as u64, degeneracy(q, n).unwrap());
            assert_eq!(c.annihilated + c.lowered, sector_size(q, n).unwrap() as usize);
        }
    }
}
