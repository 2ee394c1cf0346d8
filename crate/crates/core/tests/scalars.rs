use num_rational::BigRational;
use voa_engine::algebras::{bp_algebra, specialize_algebra, Catalog};
use voa_engine::orbifold::{express_in_generators, GeneratorSet, WordOrder};
use voa_engine::scalars::{rat, solve_linear, PolyL, RatFuncL, ScalarError};

fn r(s: &str) -> RatFuncL {
    RatFuncL::parse(s).unwrap()
}

#[test]
fn arithmetic_examples() {
    assert_eq!(r("(2*l)/3") + r("(2*l)/3"), r("4*l/3"));
    assert_eq!(r("l*(2*l-1)") / r("2*l-1"), r("l"));
    let c_t = r("-l*(6*l-7)/(2*l+3)") * RatFuncL::from_int(2) - RatFuncL::one();
    assert_eq!(c_t, r("-3*(2*l-1)^2/(2*l+3)"));
}

#[test]
fn specialization_examples() {
    assert_eq!(r("(2*l)/3").specialize(&rat(1, 1)).unwrap(), rat(2, 3));
    assert_eq!(r("(2*l+1)^2/2").specialize(&rat(1, 1)).unwrap(), rat(9, 2));
    match r("1/l").specialize(&rat(0, 1)) {
        Err(ScalarError::Pole { factor, .. }) => assert_eq!(factor, "l"),
        other => panic!("expected a pole, got {other:?}"),
    }
}

#[test]
fn canonical_sign_and_reduction() {
    let x = RatFuncL::new(PolyL::from_ints(&[1, -2]), PolyL::from_ints(&[-3, 6])).unwrap();
    assert_eq!(x, RatFuncL::frac(-1, 3));
    let y = RatFuncL::new(PolyL::ell(), PolyL::from_ints(&[0, 0, -2])).unwrap();
    assert!(y.denom().leading() > rat(0, 1));
    assert_eq!(y.to_string(), "-1/(2*l)");
}

#[test]
fn printing_round_trips() {
    for s in ["0", "1", "-7/3", "l", "(2*l)/3", "l*(2*l-1)", "-(3+2*l)/(4*l^2-1)", "(l^3-l+5)/(7*l-2)"] {
        let a = r(s);
        assert_eq!(r(&a.to_string()), a, "{s}");
    }
}

#[test]
fn linear_examples() {
    let id = vec![vec![RatFuncL::one(), RatFuncL::zero()], vec![RatFuncL::zero(), RatFuncL::one()]];
    let rhs = vec![r("l^2"), r("1/(l+1)")];
    assert_eq!(solve_linear(&id, &rhs).particular().unwrap(), &rhs[..]);

    let sol = solve_linear(&[vec![r("2*l-1")]], &[r("l*(2*l-1)")]);
    assert!(sol.is_unique());
    assert_eq!(sol.particular().unwrap()[0], r("l"));

    let bad = solve_linear(&[vec![r("l")], vec![r("2*l")]], &[r("1"), r("1")]);
    assert!(!bad.is_consistent());

    let under = solve_linear(&[vec![r("1"), r("l")]], &[r("1")]);
    assert_eq!(under.rank, 1);
    assert_eq!(under.nullspace().len(), 1);
}

/// The weight-8 system behind the decoupling of U[0,5] has a unique solution;
/// specializing ℓ first and solving over ℚ gives the specialized solution.
#[test]
fn weight8_system_unique_and_specialization_consistent() {
    let cat = Catalog::new(bp_algebra().engine());
    let source = |c: &Catalog| {
        let e = c.engine();
        &e.wick(&c.u(0, 0), &c.u(1, 1)) - &e.wick(&c.u(0, 1), &c.u(1, 0))
    };
    let set = GeneratorSet::standard(&cat, 5).unwrap();
    let sym = express_in_generators(cat.engine(), &source(&cat), &set, 2, WordOrder::Forward).unwrap();
    assert_eq!(sym.nullity, 0);
    for v in [rat(1, 1), rat(2, 1), rat(3, 1), rat(1, 3), rat(-5, 2)] {
        let spec = Catalog::new(specialize_algebra(&bp_algebra(), &v).unwrap().engine());
        let sset = GeneratorSet::standard(&spec, 5).unwrap();
        let num = express_in_generators(spec.engine(), &source(&spec), &sset, 2, WordOrder::Forward).unwrap();
        assert_eq!(num.nullity, 0, "l = {v}");
        let expected: Vec<_> = sym
            .polynomial
            .terms
            .iter()
            .map(|(c, w)| (c.specialize(&v).unwrap(), w.clone()))
            .filter(|(c, _)| c != &BigRational::from_integer(0.into()))
            .collect();
        let got: Vec<_> = num.polynomial.terms.iter().map(|(c, w)| (c.as_rational().unwrap(), w.clone())).collect();
        assert_eq!(got, expected, "l = {v}");
    }
}
