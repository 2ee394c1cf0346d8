use num_rational::BigRational;
use proptest::prelude::*;
use voa_engine::scalars::{solve_linear, Outcome, PolyL, RatFuncL};

fn poly() -> impl Strategy<Value = PolyL> {
    prop::collection::vec(-5i64..=5, 0..=3).prop_map(|c| PolyL::from_ints(&c))
}

fn ratfunc() -> impl Strategy<Value = RatFuncL> {
    (poly(), poly()).prop_filter_map("zero denominator", |(n, d)| RatFuncL::new(n, d).ok())
}

fn small_entry() -> impl Strategy<Value = RatFuncL> {
    (-3i64..=3, -2i64..=2).prop_map(|(a, b)| RatFuncL::from(PolyL::from_ints(&[a, b])))
}

fn dot(row: &[RatFuncL], x: &[RatFuncL]) -> RatFuncL {
    row.iter().zip(x).fold(RatFuncL::zero(), |acc, (a, b)| &acc + &(a * b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn field_axioms(a in ratfunc(), b in ratfunc(), c in ratfunc()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.recip().unwrap()).is_one());
        }
    }

    #[test]
    fn parse_print_round_trip(a in ratfunc()) {
        let text = a.to_string();
        let back = RatFuncL::parse(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn specialize_is_multiplicative(a in ratfunc(), b in ratfunc(), n in -6i64..=6, d in 1i64..=4) {
        let v = BigRational::new(n.into(), d.into());
        if let (Ok(x), Ok(y), Ok(xy)) = (a.specialize(&v), b.specialize(&v), (&a * &b).specialize(&v)) {
            prop_assert_eq!(xy, x * y);
        }
        if let (Ok(x), Ok(y), Ok(s)) = (a.specialize(&v), b.specialize(&v), (&a + &b).specialize(&v)) {
            prop_assert_eq!(s, x + y);
        }
    }

    #[test]
    fn solutions_substitute_back(
        rows in 1usize..=4,
        cols in 1usize..=4,
        entries in prop::collection::vec(small_entry(), 16),
        rhs in prop::collection::vec(small_entry(), 4),
    ) {
        let a: Vec<Vec<RatFuncL>> = (0..rows).map(|i| entries[i * 4..i * 4 + cols].to_vec()).collect();
        let b = &rhs[..rows];
        let sol = solve_linear(&a, b);
        match &sol.outcome {
            Outcome::Solved { particular, nullspace } => {
                prop_assert_eq!(sol.rank + nullspace.len(), cols);
                for (row, bi) in a.iter().zip(b) {
                    prop_assert_eq!(&dot(row, particular), bi);
                    for v in nullspace {
                        prop_assert!(dot(row, v).is_zero());
                    }
                }
            }
            Outcome::Inconsistent { certificate } => {
                for j in 0..cols {
                    let col: Vec<RatFuncL> = a.iter().map(|r| r[j].clone()).collect();
                    prop_assert!(dot(certificate, &col).is_zero());
                }
                prop_assert!(dot(certificate, b).is_one());
            }
        }
    }
}
