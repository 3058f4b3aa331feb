use std::sync::Arc;

use o21_core::fock::{enumerate_sector, sector_dimension};
use o21_core::operator::annihilator_on;
use o21_core::spectral::{l2_eigenvalue, snap_to_ell};
use o21_core::{degeneracy, Algebra, LinearOperator, C64, DEFAULT_DIMENSION_CAP};
use proptest::prelude::*;

/// Count occupation tuples by direct recursion.
fn count_tuples(q: usize, n: usize) -> u128 {
    if q == 1 {
        return 1;
    }
    (0..=n).map(|k| count_tuples(q - 1, n - k)).sum()
}

#[test]
fn annihilator_json_golden() {
    let from = Arc::new(enumerate_sector(2, 2).unwrap());
    let a2 = annihilator_on(2, &from).unwrap();
    let text = serde_json::to_string_pretty(&a2).unwrap() + "\n";
    assert_eq!(text, include_str!("golden/a2_q2_n2.json"));
    let back: LinearOperator = serde_json::from_str(&text).unwrap();
    assert_eq!(back.get(0, 0), C64::new(2f64.sqrt(), 0.0));
    assert_eq!(back.nnz(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sector_is_ranked_lexicographically(q in 1usize..5, n in 0usize..7) {
        let s = enumerate_sector(q, n).unwrap();
        prop_assert_eq!(s.dim() as u128, count_tuples(q, n));
        prop_assert_eq!(sector_dimension(q, n), Some(count_tuples(q, n)));
        let basis = s.basis();
        prop_assert!(basis.windows(2).all(|w| w[0].as_slice() < w[1].as_slice()));
        for (k, v) in basis.iter().enumerate() {
            prop_assert_eq!(v.total(), n);
            prop_assert_eq!(s.index_of(v), Some(k));
        }
    }

    #[test]
    fn canonical_commutator(q in 1usize..5, n in 1usize..5, i in 1usize..5, j in 1usize..5) {
        prop_assume!(i <= q && j <= q);
        let alg = Algebra::new(q, n + 1, DEFAULT_DIMENSION_CAP).unwrap();
        let down_up = alg.lower(i, n + 1).unwrap().compose(&alg.raise(j, n).unwrap()).unwrap();
        let up_down = alg.raise(j, n - 1).unwrap().compose(&alg.lower(i, n).unwrap()).unwrap();
        let comm = down_up.sub(&up_down).unwrap();
        let want = if i == j {
            LinearOperator::identity(alg.sector(n).unwrap())
        } else {
            LinearOperator::zero(alg.sector(n).unwrap(), alg.sector(n).unwrap())
        };
        prop_assert!(comm.sub(&want).unwrap().max_abs_entry() < 1e-13);
    }

    #[test]
    fn l_squared_is_hermitian_and_rotation_invariant(q in 2usize..6, n in 0usize..5) {
        let alg = Algebra::new(q, n + 2, DEFAULT_DIMENSION_CAP).unwrap();
        let l2 = alg.l_squared(n).unwrap();
        prop_assert!(l2.hermiticity_defect().unwrap() < 1e-12);
        let via_generators = alg.l_squared_from_generators(n).unwrap();
        prop_assert!(l2.sub(&via_generators).unwrap().max_abs_entry() < 1e-11);
        for i in 1..=q {
            for j in i + 1..=q {
                let lij = alg.l_generator(i, j, n).unwrap();
                prop_assert!(l2.commutator(&lij).unwrap().max_abs_entry() < 1e-11);
            }
        }
    }

    #[test]
    fn degeneracies_fill_the_sector(q in 2usize..12, n in 0usize..20) {
        let sum: u128 = (0..=n)
            .filter(|l| (n - l) % 2 == 0)
            .map(|l| degeneracy(q, l).unwrap() as u128)
            .sum();
        prop_assert_eq!(Some(sum), sector_dimension(q, n));
    }

    #[test]
    fn snapping_inverts_the_eigenvalue(q in 2usize..10, ell in 0usize..40, noise in -1e-9f64..1e-9) {
        prop_assert_eq!(snap_to_ell(l2_eigenvalue(q, ell) + noise, q, 1e-8), Some(ell));
        prop_assert_eq!(snap_to_ell(l2_eigenvalue(q, ell) + 0.37, q, 1e-8), None);
    }
}
