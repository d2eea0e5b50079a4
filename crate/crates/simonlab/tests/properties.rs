//! Randomized invariants via proptest, complementing the exhaustive checks
//! in the unit suites.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use simonlab::fflinalg::{FieldSpec, Subspace};
use simonlab::polymethod::{interpolate, RationalPoly};

fn arb_field() -> impl Strategy<Value = FieldSpec> {
    (prop_oneof![Just(2u64), Just(3), Just(5)], 1..=3usize)
        .prop_map(|(p, n)| FieldSpec::new(p, n).unwrap())
}

/// A field together with a few random vectors in it.
fn field_with_vectors(max_len: usize) -> impl Strategy<Value = (FieldSpec, Vec<Vec<u64>>)> {
    arb_field().prop_flat_map(move |field| {
        let coords = prop::collection::vec(0..field.p(), field.n());
        prop::collection::vec(coords, 0..=max_len).prop_map(move |vs| (field, vs))
    })
}

/// Two random spanning sets over the same field.
fn field_with_two_sets(
    max_len: usize,
) -> impl Strategy<Value = (FieldSpec, Vec<Vec<u64>>, Vec<Vec<u64>>)> {
    arb_field().prop_flat_map(move |field| {
        let coords = || prop::collection::vec(0..field.p(), field.n());
        (
            prop::collection::vec(coords(), 0..=max_len),
            prop::collection::vec(coords(), 0..=max_len),
        )
            .prop_map(move |(a, b)| (field, a, b))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn span_is_idempotent((field, vs) in field_with_vectors(4)) {
        let s = Subspace::from_spanning(field, &vs);
        let again = Subspace::from_spanning(field, s.basis());
        prop_assert_eq!(s, again);
    }

    #[test]
    fn modular_dimension_law((field, a, b) in field_with_two_sets(3)) {
        let u = Subspace::from_spanning(field, &a);
        let v = Subspace::from_spanning(field, &b);
        let sum = u.sum(&v).unwrap();
        let meet = u.intersect(&v).unwrap();
        prop_assert_eq!(sum.dim() + meet.dim(), u.dim() + v.dim());
        prop_assert!(sum.contains_subspace(&u).unwrap());
        prop_assert!(u.contains_subspace(&meet).unwrap());
    }

    #[test]
    fn double_annihilator_is_identity((field, vs) in field_with_vectors(4)) {
        let s = Subspace::from_spanning(field, &vs);
        prop_assert_eq!(s.annihilator().dim(), field.n() - s.dim());
        prop_assert_eq!(s.annihilator().annihilator(), s);
    }

    #[test]
    fn interpolation_recovers_polynomial(
        coeffs in prop::collection::vec(-20i64..=20, 1..=5)
    ) {
        let poly = RationalPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from(BigInt::from(c)))
                .collect(),
        );
        // distinct nodes 0..len
        let points: Vec<(BigRational, BigRational)> = (0..coeffs.len() as i64)
            .map(|x| {
                let x = BigRational::from(BigInt::from(x));
                let y = poly.eval(&x);
                (x, y)
            })
            .collect();
        let recovered = interpolate(&points).unwrap();
        prop_assert_eq!(recovered, poly);
    }
}
