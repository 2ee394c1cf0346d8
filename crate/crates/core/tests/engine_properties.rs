use proptest::prelude::*;
use voa_engine::characters::{exp, QSeries};
use voa_engine::properties::{bp_engine, field, monomial};
use voa_engine::vertex::{commutator_lhs, commutator_rhs, skew_transform, FieldExpr};
use num_bigint::BigInt;
use num_rational::BigRational;

fn series() -> impl Strategy<Value = QSeries> {
    (prop::collection::vec((2i64..26, -5i64..=5), 0..8), 0i64..=3, 6i64..=12).prop_map(|(terms, lead, order)| {
        let mut t: Vec<_> = terms.into_iter().map(|(e, c)| (exp(e, 2), BigRational::from_integer(BigInt::from(c)))).collect();
        t.push((exp(lead, 4), BigRational::from_integer(1.into())));
        QSeries::from_terms(t, exp(order, 1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn skew_symmetry(a in monomial(12), b in monomial(12), n in -1i64..=3) {
        let e = bp_engine();
        let a = FieldExpr::monomial(a);
        let b = FieldExpr::monomial(b);
        prop_assert_eq!(e.nth_product(&b, &a, n), skew_transform(&e, &a, &b, n));
    }

    #[test]
    fn commutator_identity(a in monomial(10), b in monomial(10), c in monomial(10), m in 0i64..=2, n in 0i64..=2) {
        let e = bp_engine();
        let (a, b, c) = (FieldExpr::monomial(a), FieldExpr::monomial(b), FieldExpr::monomial(c));
        prop_assert_eq!(commutator_lhs(&e, &a, &b, &c, m, n), commutator_rhs(&e, &a, &b, &c, m, n));
    }

    #[test]
    fn wick_product_is_minus_first_product(a in field(4), b in field(4)) {
        let e = bp_engine();
        prop_assert_eq!(e.wick(&a, &b), e.nth_product(&a, &b, -1));
    }

    #[test]
    fn series_multiplication_is_associative(a in series(), b in series(), c in series()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        let inv = a.inverse().unwrap();
        let one = &a * &inv;
        prop_assert_eq!(one.first_mismatch(&QSeries::one(one.order())), None);
    }
}
