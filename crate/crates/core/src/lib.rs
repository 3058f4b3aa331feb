//! Angular momentum in `q` dimensions from the bosonic realization of o(2,1).
//!
//! The crate builds `L_q²`, the o(2,1) generators `J₃, K_±` and the parity
//! `P` on fixed-number sectors of a q-mode Fock space and checks, sector by
//! sector:
//!
//! * the commutation relations and `L² = 4Q − q²/4 + q` ([`algebra`]);
//! * that `L²` has eigenvalues `ℓ(ℓ + q − 2)` with the SO(q) irrep
//!   multiplicities, and that `(a_±†)^ℓ|0⟩` are lowest-weight states
//!   ([`spectral`]);
//! * that the chain `L_q², …, L_3², L_12` labels every state uniquely by
//!   `ℓ_q ≥ … ≥ ℓ_2 ≥ 0, m = ±ℓ_2` ([`csco`]);
//! * which o(2,1) series a pair `(Φ, E₀)` belongs to ([`classify`]).

pub mod algebra;
pub mod classify;
pub mod csco;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod operator;
pub mod spectral;

pub use algebra::{
    angular_momentum_sq, build_algebra, l_generator, parity_op, plus_minus_modes, verify_algebra,
    verify_algebra_capped, Algebra, AlgebraSet, IdentityReport, Sign,
};
pub use classify::{casimir_to_l2, classify, physical_rep_params, RepParams, Series, SeriesClassification};
pub use csco::{embed_suboperator, enumerate_chains, joint_diagonalize, verify_csco, CscoLabel, CscoReport, LabeledBasis};
pub use error::{Error, Result};
pub use fock::{enumerate_sector, FockSpace, OccupationVector, Sector, DEFAULT_DIMENSION_CAP};
pub use operator::{annihilator, creator, LinearOperator, C64};
pub use spectral::{degeneracy, lowest_weight_state, sector_spectrum, snap_to_ell, SpectrumReport};
