use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use voa_engine::algebras::{bp_algebra, specialize_algebra, Catalog};
use voa_engine::characters::*;
use voa_engine::orbifold::solve_correction;
use voa_engine::scalars::RatFuncL;
use voa_engine::vertex::{singular_vectors, weight_basis, FieldExpr};

fn e(n: i64, d: i64) -> Exp {
    Rational64::new(n, d)
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// p(0..=n) by the coin-change recurrence.
fn partitions(n: usize) -> Vec<i64> {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for part in 1..=n {
        for m in part..=n {
            p[m] += p[m - part];
        }
    }
    p
}

fn ints_of(s: &QSeries) -> BTreeMap<Exp, i64> {
    s.terms().iter().map(|(k, c)| (*k, c.to_integer().try_into().unwrap())).collect()
}

#[test]
fn inverse_eta_counts_partitions() {
    let order = e(30, 1);
    let s = eta_inverse_power(1, order);
    let p = partitions(30);
    for n in 0..29 {
        assert_eq!(s.coefficient(e(n, 1) - e(1, 24)), q(p[n as usize]), "n = {n}");
    }
}

#[test]
fn eta_times_inverse_is_one() {
    for k in 1..4 {
        let order = e(12, 1);
        let prod = &eta_power(k, order) * &eta_inverse_power(k, order);
        assert_eq!(prod.first_mismatch(&QSeries::one(prod.order())), None, "k = {k}");
        assert!(prod.order() >= e(11, 1));
    }
    assert_eq!(eta_series(e(4, 1)).valuation(), e(1, 24));
}

#[test]
fn eta_cubed_is_jacobi_sum() {
    // η³ = Σ_{n≥0} (−1)^n (2n+1) q^{(2n+1)²/8}.
    let order = e(20, 1);
    let s = eta_power(3, order);
    let mut expected = BTreeMap::new();
    for n in 0i64.. {
        let x = e((2 * n + 1) * (2 * n + 1), 8);
        if x >= s.order() {
            break;
        }
        expected.insert(x, if n % 2 == 0 { 2 * n + 1 } else { -(2 * n + 1) });
    }
    assert_eq!(ints_of(&s), expected);
}

#[test]
fn theta_from_zero_is_triple_product() {
    // ∏(1−q^i)(1−zq^{i−1/2})(1−z^{-1}q^{i−1/2}) = Σ (−1)^n z^n q^{n²/2}.
    let order = e(15, 1);
    let th = jacobi_theta(order, ThetaStart::FromZero);
    let mut expected: BTreeMap<Exp, LaurentZ> = BTreeMap::new();
    for n in -6i64..=6 {
        let x = e(n * n, 2);
        if x < order {
            let c = LaurentZ::monomial(n, q(if n % 2 == 0 { 1 } else { -1 }));
            expected.entry(x).and_modify(|v| *v = v.c_add(&c)).or_insert(c);
        }
    }
    assert_eq!(th.first_mismatch(&QSeries::from_terms(expected, order)), None);
}

#[test]
fn theta_from_one_is_divided_triple_product() {
    let order = e(10, 1);
    let one = jacobi_theta(order, ThetaStart::FromOne);
    let zero = jacobi_theta(order, ThetaStart::FromZero);
    // Restoring the j = 0 factor pair.
    let extra = QSeries::product_one_minus(&[(LaurentZ::z(1), e(1, 2)), (LaurentZ::z(-1), e(1, 2))], order);
    assert_eq!((&one * &extra).first_mismatch(&zero), None);
    assert_eq!(one.first_mismatch(&one.invert_z()), None);
}

#[test]
fn lattice_theta_examples() {
    let order = e(12, 1);
    let t = lattice_theta(1, 0, order).at_z_one();
    assert_eq!(ints_of(&t), BTreeMap::from([(e(0, 1), 1), (e(3, 1), 2)]));
    assert_eq!(lattice_theta(1, 3, order).valuation(), e(3, 4));
    for ell in 1..=3u32 {
        for s in 0..6 * ell as i64 {
            let a = lattice_theta_with(ell, 3 * s, order, LatticeZ::Charge).unwrap();
            let b = lattice_theta_with(ell, 3 * s + 6 * ell as i64, order, LatticeZ::Charge).unwrap();
            assert_eq!(a.first_mismatch(&b), None);
        }
    }
    assert!(lattice_theta_with(1, 1, order, LatticeZ::Charge).is_none());
}

#[test]
fn central_charges() {
    assert_eq!(bp_central_charge(1), e(2, 5));
    assert_eq!(bp_central_charge(2), e(-20, 7));
    assert_eq!(minimal_central_charge(2), e(-3, 5));
}

#[test]
fn bp_character_low_weights() {
    let ch = bp_character(1, e(4, 1)).shift(bp_central_charge(1) / 24);
    let at1 = ch.at_z_one();
    for (w, n) in [(e(0, 1), 1), (e(1, 1), 1), (e(3, 2), 2), (e(2, 1), 3), (e(5, 2), 4)] {
        assert_eq!(at1.coefficient(w), q(n), "weight {w}");
    }
    let g = ch.coefficient(e(3, 2));
    assert_eq!(g.coefficient(1), q(1));
    assert_eq!(g.coefficient(-1), q(1));
    assert_eq!(bp_character(0, e(6, 1)).first_mismatch(&QSeries::one(e(6, 1))), None);
}

/// Rocha-Caridi: χ_{1,1} of the (p, p') Virasoro minimal model.
fn virasoro_vacuum(p: i64, pp: i64, order: Exp) -> BTreeMap<Exp, i64> {
    let c = Rational64::from(1) - Rational64::new(6 * (p - pp) * (p - pp), p * pp);
    let parts = partitions(64);
    let mut out: BTreeMap<Exp, i64> = BTreeMap::new();
    let base = -c / 24;
    for k in -10i64..=10 {
        for (x, sign) in [(2 * p * pp * k + p - pp, 1i64), (2 * p * pp * k + p + pp, -1)] {
            let h = Rational64::new(x * x - (p - pp) * (p - pp), 4 * p * pp);
            for (m, pm) in parts.iter().enumerate() {
                let ex = base + h + m as i64;
                if ex < order {
                    *out.entry(ex).or_insert(0) += sign * pm;
                }
            }
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

#[test]
fn sl2_minimal_model_is_virasoro() {
    let order = e(14, 1);
    let ch = w_minimal_character(2, 0, order);
    let oracle: BTreeMap<Exp, i64> = virasoro_vacuum(3, 5, ch.order());
    assert_eq!(ints_of(&ch), oracle);
    assert_eq!(ch.valuation(), e(1, 40));
}

#[test]
fn minimal_model_lowest_weights() {
    for ell in 1..=2i64 {
        let n = 2 * ell as usize;
        let base = w_minimal_character(n, 0, e(4, 1)).valuation();
        for s in 0..n {
            let si = s as i64;
            let gap = w_minimal_character(n, s, e(6, 1)).valuation() - base;
            assert_eq!(gap, e(3 * si, 2) - e(3 * si * si, 4 * ell), "ℓ = {ell}, s = {s}");
        }
    }
}

/// Simple reflections of affine sl_n on (level, finite simple-root coordinates, δ).
fn reflect(n: usize, i: usize, w: &AffineWeight) -> AffineWeight {
    let r = n - 1;
    let cartan = |a: usize, b: usize| -> i64 {
        if a == b {
            2
        } else if a.abs_diff(b) == 1 {
            -1
        } else {
            0
        }
    };
    let pair = |v: &[Exp], j: usize| -> Exp { (0..r).map(|a| v[a] * cartan(a, j)).sum() };
    let mut out = w.clone();
    if i == 0 {
        // α_0 = δ − θ, ⟨λ, α_0⟩ = level − (λ|θ).
        let th: Exp = (0..r).map(|j| pair(&w.finite, j)).sum();
        let c = w.level - th;
        for x in out.finite.iter_mut() {
            *x += c;
        }
        out.delta -= c;
    } else {
        let c = pair(&w.finite, i - 1);
        out.finite[i - 1] -= c;
    }
    out
}

fn key(w: &AffineWeight) -> String {
    format!("{:?}", w)
}

#[test]
fn affine_weyl_signs_match_reduced_word_lengths() {
    for n in [2usize, 3] {
        let start = AffineWeight::rho_hat(n);
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut queue = VecDeque::from([(start.clone(), 0usize)]);
        seen.insert(key(&start), 0);
        while let Some((w, d)) = queue.pop_front() {
            if d == 7 {
                continue;
            }
            for i in 0..n {
                let v = reflect(n, i, &w);
                let k = key(&v);
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                    e.insert(d + 1);
                    queue.push_back((v, d + 1));
                }
            }
        }
        let mut library: HashMap<String, i64> = HashMap::new();
        let zero = AffineWeight::new(Exp::zero(), vec![Exp::zero(); n - 1], Exp::zero());
        for (perm, sign) in permutations(n) {
            for x in lattice_points(&vec![Exp::zero(); n - 1], e(40, 1)) {
                let beta: Vec<Exp> = x.iter().map(|v| Exp::from(*v)).collect();
                let w = start.act_finite(&perm).translate(&beta);
                library.insert(key(&w), sign);
                // shifted() acting on 0 is the same element moved by ρ̂.
                assert_eq!(zero.shifted(&perm, &beta).add(&start), w);
            }
        }
        for (k, d) in &seen {
            let sign = library.get(k).unwrap_or_else(|| panic!("{k} not a translate"));
            assert_eq!(*sign, if d % 2 == 0 { 1 } else { -1 }, "n = {n}, {k}");
        }
    }
}

#[test]
fn cyclotomic_arithmetic() {
    let z = Cyclotomic::root(12, 1);
    let mut p = Cyclotomic::c_one();
    for _ in 0..12 {
        p = p.c_mul(&z);
    }
    assert_eq!(p, Cyclotomic::c_one());
    // 1 + ζ_3 + ζ_3² = 0, seen inside the 12th roots.
    let s = Cyclotomic::c_one().c_add(&Cyclotomic::root(12, 4)).c_add(&Cyclotomic::root(12, 8));
    assert!(s.c_is_zero());
    assert_eq!(Cyclotomic::root(12, -1).c_mul(&z), Cyclotomic::c_one());
    assert_eq!(Cyclotomic::rational(q(4)).c_inv(), Some(Cyclotomic::rational(BigRational::new(1.into(), 4.into()))));
    assert_eq!(Cyclotomic::root(6, 3).as_rational(), Some(q(-1)));
    assert_eq!(cyclotomic_polynomial(6).iter().map(|c| c.to_string()).collect::<Vec<_>>(), ["1", "-1", "1"]);
}

#[test]
fn coset_projection_kernels() {
    let charge = ThetaChoice { index: ThetaIndex::Triple, z: LatticeZ::Charge };
    for ell in 1..=3 {
        assert!(is_identity(&orthogonality_matrix(ell, RootChoice::Charge, charge)), "ℓ = {ell}");
        assert!(!is_identity(&orthogonality_matrix(ell, RootChoice::Literal, charge)), "ℓ = {ell}");
    }
}

#[test]
fn decomposition_and_corollaries() {
    for ell in 1..=2 {
        let r = verify_decomposition(ell, e(8, 1));
        assert!(r.identity.passed, "ℓ = {ell}: {:?}", r.identity.first_mismatch);
        assert!(r.at_z_one.passed);
        assert_eq!(r.corollaries.len(), 2 * ell as usize);
        for c in &r.corollaries {
            assert!(c.inverse.passed && c.identity.passed, "ℓ = {ell}, s = {}", c.s);
        }
        assert!(r.passed);
        let cal = &r.character;
        assert_eq!(cal.chosen, BpCalibration { theta_start: ThetaStart::FromZero, q_power: QPower::CentralCharge });
        let chosen = r.identity.calibration_choices.clone();
        assert_eq!(chosen["theta_index"], "Triple");
        assert_eq!(chosen["lattice_z"], "Charge");
    }
    let c = verify_corollary(1, 1, e(6, 1));
    assert!(c.passed);
    assert_eq!(c.identity.calibration_choices["roots_of_unity"], "Charge");
}

#[test]
fn literal_calibration_disagrees() {
    let lit = bp_character_with(1, e(4, 1), BpCalibration::LITERAL);
    assert!(lit.first_mismatch(&bp_character(1, e(4, 1))).is_some());
    let wrong = ThetaChoice { index: ThetaIndex::Triple, z: LatticeZ::Literal };
    let rhs = decomposition_rhs(1, e(4, 1), wrong).unwrap();
    assert!(rhs.first_mismatch(&bp_character(1, e(4, 1))).is_some());
}

fn normalized(f: &FieldExpr) -> FieldExpr {
    let lead = f.terms().values().next().unwrap().clone();
    f.scale(&(RatFuncL::one() / lead))
}

/// Counts of normal monomials match the character only below weight 2ℓ+1, where the universal
/// algebra has a singular vector: the specialized ω-correction U^C_{2ℓ−2}.
#[test]
fn counts_stop_at_the_first_singular_vector() {
    let corrections = Catalog::new(bp_algebra().engine());
    for ell in 1..=2u32 {
        let report = calibrate_bp_character(ell);
        assert!(!report.matches_counts);
        let w = 2 * ell as i64 + 1;
        assert_eq!(report.first_mismatch_weight.as_deref(), Some(w.to_string().as_str()));
        let shift = -bp_central_charge(ell) / 24;
        let ch = bp_character(ell, e(w + 1, 1) + shift);
        let counts = counted_character(ell);
        let diff = &ch - &counts;
        assert_eq!(diff.valuation(), e(w, 1) + shift);
        let (_, lead) = diff.leading().unwrap();
        assert_eq!(lead, &LaurentZ::monomial(0, q(-1)));

        let value = q(ell as i64);
        let engine = specialize_algebra(&bp_algebra(), &value).unwrap().engine();
        for lower in 1..w {
            for charge in -2..=2 {
                let v = singular_vectors(&engine, &q(lower), &q(charge));
                assert!(v.is_empty(), "ℓ = {ell}, weight {lower}, charge {charge}");
            }
        }
        let found = singular_vectors(&engine, &q(w), &q(0));
        assert_eq!(found.len(), 1);
        let u = solve_correction(&corrections, 2 * ell as usize - 2).unwrap().u_c.specialize(&value).unwrap();
        assert_eq!(normalized(&found[0]), normalized(&u));
        assert!(weight_basis(engine.algebra(), &q(w), &q(0)).len() > 1);
    }
}
