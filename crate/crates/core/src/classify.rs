//! Rule table for the four series of o(2,1) representations labelled by a
//! complex pair `(Φ, E₀)`, with their unitarity conditions.
//!
//! | series     | condition                                   | J₃ spectrum       |
//! |------------|---------------------------------------------|-------------------|
//! | `D(Φ)`     | `E₀ = 0`, `2Φ = n`                          | `−Φ, …, Φ`        |
//! | `D⁺(Φ)`    | `E₀ = −Φ`, `2Φ ≠ n`                         | `E₀ + n`          |
//! | `D⁻(Φ)`    | `E₀ = Φ`, `2Φ ≠ n`                          | `E₀ − n`          |
//! | `D(Φ,E₀)`  | `−½ < Re E₀ ≤ ½`, `Φ ± E₀ ≠ ±n`             | `E₀ ± n`          |
//!
//! Here `n` ranges over the non-negative integers. Membership is tested in
//! the order listed. The Casimir is `Φ(Φ + 1)` on every series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DEFAULT_INT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepParams {
    pub phi: Complex64,
    pub e0: Complex64,
}

impl RepParams {
    pub fn new(phi: Complex64, e0: Complex64) -> Self {
        Self { phi, e0 }
    }

    pub fn real(phi: f64, e0: f64) -> Self {
        Self::new(Complex64::new(phi, 0.0), Complex64::new(e0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Series {
    #[serde(rename = "D(Phi,E0)")]
    Continuous,
    #[serde(rename = "D+(Phi)")]
    Positive,
    #[serde(rename = "D-(Phi)")]
    Negative,
    #[serde(rename = "D(Phi)")]
    Finite,
    #[serde(rename = "unclassified")]
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitaryReason {
    Principal,
    Supplementary,
    Discrete,
    Trivial,
    NotUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum J3Spectrum {
    /// `E₀ ± n`.
    TwoSided { base: [f64; 2] },
    /// `E₀ + n`.
    Up { base: [f64; 2] },
    /// `E₀ − n`.
    Down { base: [f64; 2] },
    /// `−Φ, −Φ + 1, …, Φ`.
    Finite { low: f64, high: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesClassification {
    pub phi: [f64; 2],
    pub e0: [f64; 2],
    pub series: Series,
    pub unitary: bool,
    pub reason: UnitaryReason,
    pub j3_spectrum: J3Spectrum,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn nearest_integer(z: Complex64, tol: f64) -> Option<i64> {
    let r = z.re.round();
    (z.im.abs() < tol && (z.re - r).abs() < tol).then_some(r as i64)
}

fn is_nonneg_integer(z: Complex64, tol: f64) -> bool {
    nearest_integer(z, tol).is_some_and(|k| k >= 0)
}

fn is_zero(z: Complex64, tol: f64) -> bool {
    z.norm() < tol
}

pub fn classify(p: RepParams, int_tol: f64) -> SeriesClassification {
    let RepParams { phi, e0 } = p;
    let tol = int_tol;
    let real_e0 = e0.im.abs() < tol;
    let negative_real_phi = phi.im.abs() < tol && phi.re < 0.0;
    let two_phi_integer = is_nonneg_integer(phi * 2.0, tol);

    let (series, reason, j3_spectrum) = if is_zero(e0, tol) && two_phi_integer {
        let reason = if is_zero(phi, tol) {
            UnitaryReason::Trivial
        } else {
            UnitaryReason::NotUnitary
        };
        (
            Series::Finite,
            reason,
            J3Spectrum::Finite {
                low: -phi.re,
                high: phi.re,
            },
        )
    } else if is_zero(e0 + phi, tol) && !two_phi_integer {
        let reason = if real_e0 && negative_real_phi {
            UnitaryReason::Discrete
        } else {
            UnitaryReason::NotUnitary
        };
        (Series::Positive, reason, J3Spectrum::Up { base: pair(e0) })
    } else if is_zero(e0 - phi, tol) && !two_phi_integer {
        let reason = if real_e0 && negative_real_phi {
            UnitaryReason::Discrete
        } else {
            UnitaryReason::NotUnitary
        };
        (Series::Negative, reason, J3Spectrum::Down { base: pair(e0) })
    } else if e0.re > -0.5 && e0.re <= 0.5
        && nearest_integer(phi + e0, tol).is_none()
        && nearest_integer(phi - e0, tol).is_none()
    {
        let principal = real_e0 && (phi.re + 0.5).abs() < tol;
        let supplementary = real_e0
            && phi.im.abs() < tol
            && (0.5 - e0.re.abs()) - (phi.re + 0.5).abs() > tol;
        let reason = if principal {
            UnitaryReason::Principal
        } else if supplementary {
            UnitaryReason::Supplementary
        } else {
            UnitaryReason::NotUnitary
        };
        (Series::Continuous, reason, J3Spectrum::TwoSided { base: pair(e0) })
    } else {
        (Series::Unclassified, UnitaryReason::NotUnitary, J3Spectrum::None)
    };

    SeriesClassification {
        phi: pair(phi),
        e0: pair(e0),
        series,
        unitary: reason != UnitaryReason::NotUnitary,
        reason,
        j3_spectrum,
    }
}

/// The representation realized on the bosonic Fock space at angular momentum
/// `ell`: `E₀ = ℓ/2 + q/4`, `Φ = −E₀`.
pub fn physical_rep_params(q: usize, ell: usize) -> RepParams {
    let e0 = ell as f64 / 2.0 + q as f64 / 4.0;
    RepParams::real(-e0, e0)
}

/// `Φ(Φ + 1)`.
pub fn casimir(phi: Complex64) -> Complex64 {
    phi * (phi + 1.0)
}

/// `4Φ(Φ + 1) − q²/4 + q`.
pub fn casimir_to_l2(phi: Complex64, q: usize) -> Complex64 {
    let qf = q as f64;
    casimir(phi) * 4.0 - qf * qf / 4.0 + qf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn casimir_examples() {
        assert_eq!(casimir_to_l2(c(-0.75, 0.0), 3), c(0.0, 0.0));
        assert_eq!(casimir_to_l2(c(0.0, 0.0), 4), c(0.0, 0.0));
        let p = physical_rep_params(4, 2);
        assert_eq!((p.phi.re, p.e0.re), (-2.0, 2.0));
        assert_eq!(casimir_to_l2(p.phi, 4), c(8.0, 0.0));
        let p = physical_rep_params(2, 1);
        assert_eq!((p.phi.re, p.e0.re), (-1.0, 1.0));
        assert_eq!(casimir_to_l2(p.phi, 2), c(1.0, 0.0));
    }

    #[test]
    fn casimir_reproduces_l2_spectrum_exactly() {
        for q in 1..=6 {
            for ell in 0..=8 {
                let l2 = casimir_to_l2(physical_rep_params(q, ell).phi, q);
                let want = (ell * (ell + q)) as f64 - 2.0 * ell as f64;
                assert_eq!(l2, c(want, 0.0), "q={q} ell={ell}");
            }
        }
    }

    #[test]
    fn physical_params_are_unitary_lowest_weight() {
        for q in 1..=6 {
            for ell in 0..=8 {
                let p = physical_rep_params(q, ell);
                assert!(p.e0.re >= 0.25);
                let cl = classify(p, DEFAULT_INT_TOL);
                assert_eq!(cl.series, Series::Positive, "q={q} ell={ell}");
                assert!(cl.unitary);
                assert_eq!(cl.reason, UnitaryReason::Discrete);
            }
        }
    }

    #[test]
    fn spectrum_descriptors() {
        let cl = classify(RepParams::real(1.0, 0.0), DEFAULT_INT_TOL);
        assert_eq!(cl.series, Series::Finite);
        assert!(!cl.unitary);
        assert_eq!(cl.j3_spectrum, J3Spectrum::Finite { low: -1.0, high: 1.0 });
        let cl = classify(RepParams::real(-1.25, -1.25), DEFAULT_INT_TOL);
        assert_eq!(cl.series, Series::Negative);
        assert_eq!(cl.j3_spectrum, J3Spectrum::Down { base: [-1.25, 0.0] });
    }

    #[test]
    fn json_shape() {
        let cl = classify(RepParams::new(c(-0.5, 1.0), c(0.0, 0.0)), DEFAULT_INT_TOL);
        let v = serde_json::to_value(cl).unwrap();
        assert_eq!(v["series"], "D(Phi,E0)");
        assert_eq!(v["reason"], "principal");
        assert_eq!(v["phi"], serde_json::json!([-0.5, 1.0]));
        assert_eq!(v["j3_spectrum"]["kind"], "two-sided");
    }
}
