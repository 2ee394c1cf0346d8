use num_rational::BigRational;
use voa_engine::algebras::{
    bc_system, bp_algebra, bp_bc_algebra, half_central_charge, load_algebra, power_field, specialize_algebra,
    tensor, to_alg_text, AlgebraError, Catalog, BC_ALG, BP_ALG,
};
use voa_engine::orbifold::commutant_check;
use voa_engine::scalars::RatFuncL;
use voa_engine::vertex::{check_consistency, FieldExpr, VertexError};

fn r(s: &str) -> RatFuncL {
    RatFuncL::parse(s).unwrap()
}

#[test]
fn shipped_files_round_trip_bit_exact() {
    assert_eq!(to_alg_text(&load_algebra(BP_ALG).unwrap()), BP_ALG);
    assert_eq!(to_alg_text(&load_algebra(BC_ALG).unwrap()), BC_ALG);
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(load_algebra("[gen] J one even 0"), Err(AlgebraError::Syntax { .. })));
    let clash = "name x\n[gen] J 1 even 0\n[gen] J 1 even 0\n";
    assert!(load_algebra(clash).is_err());
    let unknown = "name x\n[gen] J 1 even 0\n[ope] J K 0 = 1\n";
    assert!(load_algebra(unknown).is_err());
}

#[test]
fn presentations_are_consistent() {
    for alg in [bp_algebra(), bc_system(), bp_bc_algebra()] {
        let name = alg.name.clone();
        let report = check_consistency(&alg.engine());
        assert!(report.passed(), "{name}: {:?}", report.failures);
        assert!(report.skew_checks > 0 && report.commutator_checks > 0);
    }
}

#[test]
fn bp_table_values() {
    let e = bp_algebra().engine();
    let c = Catalog::new(e.clone());
    let f = |s: &str| c.field(s).unwrap();
    assert_eq!(e.nth_product(&f("T"), &f("T"), 3), FieldExpr::scalar(r("-l*(6*l-7)/(2*l+3)")));
    assert_eq!(e.nth_product(&f("T"), &f("G+"), 1), f("G+").scale(&r("3/2")));
    assert_eq!(e.nth_product(&f("G+"), &f("G-"), 2), FieldExpr::scalar(r("l*(2*l-1)")));
}

#[test]
fn coset_virasoro() {
    let e = bp_algebra().engine();
    let c = Catalog::new(e.clone());
    let (j, tc) = (c.field("J").unwrap(), c.t_c());
    for n in 0..=4 {
        assert!(e.nth_product(&j, &tc, n).is_zero(), "n = {n}");
    }
    assert!(commutant_check(&e, &tc, &j));
    assert!(!commutant_check(&e, &c.field("T").unwrap(), &j));
    assert_eq!(half_central_charge(&e, &tc), r("-3/2*(2*l-1)^2/(2*l+3)"));
    // The other printed coefficient for the Heisenberg part fails the commutant property.
    let wrong = &c.field("T").unwrap() - &c.field(":J J:").unwrap().scale(&r("4/(3*l)"));
    assert!(!commutant_check(&e, &wrong, &j));
}

#[test]
fn u_fields_have_weight_from_grading() {
    let e = bp_algebra().engine();
    let c = Catalog::new(e.clone());
    let t = c.field("T").unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let u = c.u(i, j);
            assert_eq!(e.nth_product(&t, &u, 1), u.scale(&RatFuncL::from_int((i + j + 3) as i64)));
        }
    }
}

#[test]
fn bc_system_values() {
    let e = bc_system().engine();
    let c = Catalog::new(e.clone());
    let f = |s: &str| c.field(s).unwrap();
    assert_eq!(e.nth_product(&f("b"), &f("c"), 0), FieldExpr::vacuum());
    assert!(e.nth_product(&f("b"), &f("b"), 0).is_zero());
    assert!(e.nth_product(&f("c"), &f("c"), 0).is_zero());
    assert_eq!(half_central_charge(&e, &c.t_e()), r("1/2"));
}

#[test]
fn tensor_product() {
    assert!(matches!(tensor(&bp_algebra(), &bp_algebra()), Err(VertexError::DuplicateGenerator(_))));
    let e = bp_bc_algebra().engine();
    let c = Catalog::new(e.clone());
    let f = |s: &str| c.field(s).unwrap();
    for n in 0..3 {
        assert!(e.nth_product(&f("J"), &f("b"), n).is_zero());
        assert!(e.nth_product(&f("G+"), &f("c"), n).is_zero());
    }
    let jd = c.j_diag();
    assert_eq!(e.nth_product(&jd, &jd, 1), FieldExpr::scalar(r("(3+2*l)/3")));
    for name in ["JD", "TD", "phi+", "phi-"] {
        assert!(commutant_check(&e, &f(name), &jd), "{name}");
    }
}

fn check_power_fields(ell: i64) {
    let v = BigRational::from_integer(ell.into());
    let e = specialize_algebra(&bp_algebra(), &v).unwrap().engine();
    let c = Catalog::new(e.clone());
    let f = |s: &str| c.field(s).unwrap();
    let m = 2 * ell as usize;
    for (g, other, sign) in [("G+", "G-", 1), ("G-", "G+", -1)] {
        let p = power_field(&e, g, m).unwrap();
        assert_eq!(e.nth_product(&f("J"), &p, 0), p.scale(&RatFuncL::from_int(sign * m as i64)));
        let three_l = RatFuncL::from_int(3 * ell);
        for t in [f("T"), c.t_h()] {
            assert_eq!(e.nth_product(&t, &p, 1), p.scale(&three_l));
            for n in 2..=4 {
                assert!(e.nth_product(&t, &p, n).is_zero());
            }
        }
        // G∓∘_1 (G±)^{2l+1} = ±((2l+1)²/2)(∂(G±)^{2l} ∓ 3:J (G±)^{2l}:)
        let big = power_field(&e, g, m + 1).unwrap();
        let lhs = e.nth_product(&f(other), &big, 1);
        let mut inner = e.derivative(&p);
        inner.add_scaled(&e.wick(&f("J"), &p), &RatFuncL::from_int(-3 * sign));
        let k = RatFuncL::from_int(sign * (2 * ell + 1) * (2 * ell + 1)) / RatFuncL::from_int(2);
        assert_eq!(lhs, inner.scale(&k), "l = {ell}, {g}");
    }
}

#[test]
fn power_fields_at_one() {
    check_power_fields(1);
}

#[test]
fn power_fields_at_two() {
    check_power_fields(2);
}

#[test]
fn power_field_basics() {
    let e = bp_algebra().engine();
    let c = Catalog::new(e.clone());
    assert_eq!(power_field(&e, "G+", 1).unwrap(), c.field("G+").unwrap());
    let p2 = power_field(&e, "G+", 2).unwrap();
    assert_eq!(e.nth_product(&c.field("J").unwrap(), &p2, 0), p2.scale(&RatFuncL::from_int(2)));
    assert!(power_field(&e, "X", 2).is_err());
}

#[test]
fn specialized_runs_match_specialized_symbolic_runs() {
    let sym = bp_algebra().engine();
    let cs = Catalog::new(sym.clone());
    for ell in [1, 2] {
        let v = BigRational::from_integer(ell.into());
        let spec = specialize_algebra(&bp_algebra(), &v).unwrap().engine();
        let cp = Catalog::new(spec.clone());
        let p = power_field(&sym, "G+", 3).unwrap();
        let lhs = sym.nth_product(&cs.field("G-").unwrap(), &p, 1).specialize(&v).unwrap();
        let p = power_field(&spec, "G+", 3).unwrap();
        assert_eq!(lhs, spec.nth_product(&cp.field("G-").unwrap(), &p, 1));
        let th = sym.nth_product(&cs.t_h(), &cs.u(0, 1), 1).specialize(&v).unwrap();
        assert_eq!(th, spec.nth_product(&cp.t_h(), &cp.u(0, 1), 1));
    }
}
