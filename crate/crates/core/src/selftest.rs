//! The acceptance suite, runnable from tests and from the command line.
//!
//! Each criterion reports whether it holds as stated and whether the outcome
//! matches the recorded analysis. The two differ only for criteria whose
//! statement cannot hold; there the analysis pins the exact outcome instead.

use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebras::{bc_system, bp_algebra, bp_bc_algebra, half_central_charge, power_field, specialize_algebra, Catalog};
use crate::characters::{calibrate_bp_character, exp, verify_corollary, verify_decomposition, LaurentZ};
use crate::orbifold::{
    cn_coefficients, commutant_check, correction_quadratics, express_in_generators, solve_correction, solve_decoupling,
    telescoping_terms, GenPolynomial, GeneratorSet, WordOrder,
};
use crate::properties::{run_property, Property};
use crate::relations::{diff_terms, Relation, U01_TENSOR, U01_TENSOR_AMENDED, WEIGHT8};
use crate::scalars::{is_supported_on, PolyL, RatFuncL};
use crate::vertex::{check_consistency, jacobi_check, mode_bracket, singular_vectors, FieldExpr, IndexPoly, ModeConvention};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    /// The criterion holds as stated, within its time budget.
    pub passed: bool,
    /// The outcome matches the recorded analysis (equals `passed` unless `deviation` is set).
    pub as_analyzed: bool,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    /// Why the statement cannot hold, when it cannot.
    pub deviation: Option<String>,
    pub failures: Vec<String>,
    /// Failures other than the known ones.
    pub unexpected: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    pub as_analyzed: bool,
}

pub const TITLES: [&str; 12] = [
    "OPE consistency",
    "central charges and the coset Virasoro field",
    "weight-8 decoupling relation",
    "closed form of C_n",
    "telescoping coefficient tables",
    "no relations below weight 8",
    "commutant corrections U^C_0..2",
    "power fields at l = 1, 2",
    "identities in the tensor product with the bc system",
    "mode brackets",
    "characters",
    "property suites",
];

const BUDGETS: [Option<f64>; 12] =
    [Some(10.0), Some(5.0), Some(600.0), Some(1800.0), None, None, None, Some(300.0), Some(300.0), None, Some(600.0), None];

#[derive(Default)]
struct Log {
    failures: Vec<String>,
    notes: Vec<String>,
    deviation: Option<String>,
    /// Stated checks known to fail, with whether the analyzed outcome holds.
    known: Vec<(String, bool)>,
}

impl Log {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// A stated check known to fail; `analyzed` is the precise outcome that must hold instead.
    fn known_failure(&mut self, stated: bool, what: &str, analyzed: bool, why: &str) {
        self.check(stated, what);
        self.known.push((what.to_string(), !stated && analyzed));
        self.deviation = Some(match self.deviation.take() {
            Some(d) => format!("{d}; {why}"),
            None => why.to_string(),
        });
    }
}

fn r(s: &str) -> RatFuncL {
    RatFuncL::parse(s).expect("valid scalar")
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn bp() -> Catalog {
    Catalog::new(bp_algebra().engine())
}

fn field(c: &Catalog, s: &str) -> FieldExpr {
    c.field(s).expect("valid expression")
}

fn c1(log: &mut Log) {
    for alg in [bp_algebra(), bc_system(), bp_bc_algebra()] {
        let name = alg.name.clone();
        let rep = check_consistency(&alg.engine());
        log.check(rep.passed(), format!("{name}: {:?}", rep.failures));
        log.note(format!("{name}: {} skew, {} commutator checks", rep.skew_checks, rep.commutator_checks));
    }
}

fn c2(log: &mut Log) {
    let c = bp();
    let e = c.engine();
    let t = field(&c, "T");
    log.check(e.nth_product(&t, &t, 3) == FieldExpr::scalar(r("-l*(6*l-7)/(2*l+3)")), "T∘3T");
    let tc = c.t_c();
    log.check(e.nth_product(&tc, &tc, 3) == FieldExpr::scalar(r("-3/2*(2*l-1)^2/(2*l+3)")), "TC∘3TC");
    log.check(half_central_charge(e, &tc) == r("-3/2*(2*l-1)^2/(2*l+3)"), "c/2 of TC");
    let j = field(&c, "J");
    for n in 0..=4 {
        log.check(e.nth_product(&j, &tc, n).is_zero(), format!("J∘{n}TC"));
    }
    let other = &t - &field(&c, ":J J:").scale(&r("4/(3*l)"));
    log.check(!commutant_check(e, &other, &j), "4/(3l) variant must fail the commutant check");
    log.note("TH = 3/(4l) :J J:");
}

fn source(c: &Catalog, n: usize) -> FieldExpr {
    let e = c.engine();
    &e.wick(&c.u(0, 0), &c.u(1, n)) - &e.wick(&c.u(0, n), &c.u(1, 0))
}

fn closed_form(n: usize) -> RatFuncL {
    r(&format!("{n}*({n}+7)/(24*({n}+3)*({n}+4))*l*(2*l-1)"))
}

fn c3(log: &mut Log) {
    let c = bp();
    let e = c.engine();
    let rel = Relation::parse(WEIGHT8);
    match rel.residual(&c) {
        Ok(res) => log.check(res.is_zero(), "weight-8 relation normalizes to zero"),
        Err(err) => log.check(false, format!("weight-8 relation does not parse: {err}")),
    }
    let res = match solve_decoupling(&c, 1) {
        Ok(r) => r,
        Err(err) => return log.check(false, format!("decoupling: {err}")),
    };
    log.check(res.leading_coefficient == r("l*(2*l-1)/60"), "U[0,5] coefficient l(2l-1)/60");
    let set = GeneratorSet::standard(&c, 5).expect("standard set");
    let term = |fs: &[crate::orbifold::Factor]| GenPolynomial { terms: vec![(RatFuncL::one(), fs.to_vec())] }.eval(e, &set);
    let mut expected: Vec<(RatFuncL, FieldExpr)> =
        res.remainder.terms.iter().map(|(k, fs)| (-k.clone(), term(fs))).collect();
    expected.push((-res.leading_coefficient.clone(), c.u(0, 5)));
    let listed: Vec<_> = rel.signed_terms().skip(1).collect();
    match diff_terms(&c, &listed, &expected) {
        Ok(d) => log.check(d.is_empty(), format!("term-by-term diff: {d:?}")),
        Err(err) => log.check(false, format!("diff: {err}")),
    }
    log.note(format!("{} listed terms recovered", listed.len()));
}

fn c4(log: &mut Log) {
    let c = bp();
    let alg = c.engine().algebra();
    let ells = r("l*(2*l-1)");
    for n in 1..=5 {
        match cn_coefficients(alg, &source(&c, n), n) {
            Ok(t) => {
                log.check(t.value == closed_form(n) || t.value == -closed_form(n), format!("C_{n} = {}", t.value));
                // Zero set: the quotient by l(2l-1) has no zeros.
                let rest = &t.value / &ells;
                log.check(rest.is_constant(), format!("C_{n} vanishes only at l = 0, 1/2"));
                log.note(format!("C_{n} = {}", t.value));
            }
            Err(err) => log.check(false, format!("C_{n}: {err}")),
        }
    }
}

/// The printed formulas for C^k_{n,j}, k = 1..4. For j ≤ 4 the explicit C^1 formulas take precedence.
pub fn printed_table_entry(k: usize, n: i64, j: i64) -> RatFuncL {
    let s = if n % 2 == 0 { 1 } else { -1 };
    let a = format!("(3+10*l+6*{n}+4*l*{n})");
    let fact = |x: i64| (1..=x).product::<i64>();
    let f = match k {
        1 => match j {
            0 => "0".to_string(),
            1 => format!("(3+2*l)*(4+4*l+{n}+2*l*{n})/(4*(2+{n})*(3+{n}))"),
            2 => format!("-3*(3+2*l)/(4*({n}+2))"),
            3 => format!("(3+2*l)/(2*{n}+2) - {a}/(12*(1+{n}))"),
            4 => format!("-(3+2*l)*(5+6*l)/48 - {a}/48"),
            j if j <= n => format!("-{a}*{}/(2*{}*{})", fact(n), fact(n + 4 - j), fact(j)),
            j if j == n + 1 => format!("-{a}/(12*(1+{n}))"),
            j if j == n + 2 => format!("-{a}/(4*(1+{n})*(2+{n}))"),
            j if j == n + 3 => format!("-{a}/(2*(1+{n})*(2+{n})*(3+{n}))"),
            _ => format!("-3*(5+2*l+2*{n})/((1+{n})*(2+{n})*(3+{n})*(4+{n}))"),
        },
        2 => match j {
            0 => format!("(18-4*l+3*{n}+2*l*{n})/(2*(1+{n})*(2+{n})*(3+{n})*(4+{n}))"),
            j if j <= n => format!("-6*{}/({}*{})", fact(n), fact(n + 4 - j), fact(j)),
            j if j == n + 1 => format!("-1/(1+{n})"),
            j if j == n + 2 => format!("-3/((1+{n})*(2+{n}))"),
            j if j == n + 3 => format!("-6/((1+{n})*(2+{n})*(3+{n}))"),
            _ => format!("-(-15-2*l-6*{n}+4*l*{n})/(2*(1+{n})*(2+{n})*(3+{n})*(4+{n}))"),
        },
        3 => match j {
            0 => format!("-(18-4*l+3*{n}+2*l*{n})/(2*(1+{n})*(2+{n})*(3+{n})*(4+{n}))"),
            1 => format!("6/((1+{n})*(2+{n})*(3+{n}))"),
            2 => format!("3/((1+{n})*(2+{n}))"),
            3 => format!("1/(1+{n})"),
            4 => "-5/16 - l/24".to_string(),
            _ => "0".to_string(),
        },
        _ => match j {
            0 => "0".to_string(),
            1 => format!("-3*(4+{n})/(4*(2+{n})*(3+{n})) + l*(-30-10*{n}+{n}^2)/(6*(2+{n})*(3+{n})) - l^2/3"),
            2 => format!("3*(6+4*l-{n}+2*l*{n})/(8*(2+{n}))"),
            3 => "-1".to_string(),
            j if j <= n + 2 => "0".to_string(),
            j if j == n + 3 => format!("-({s})*(3+2*l)/(4*(3+{n}))"),
            _ => format!(
                "({s})*(45+40*l+12*l^2+25*{n}+47*l*{n}+22*l^2*{n}+14*l*{n}^2+12*l^2*{n}^2-{n}^3+l*{n}^3+2*l^2*{n}^3)/(2*(1+{n})*(2+{n})*(3+{n})*(4+{n}))"
            ),
        },
    };
    r(&f)
}

fn c5(log: &mut Log) {
    let c = bp();
    let alg = c.engine().algebra();
    for n in [2usize, 3] {
        let t = match telescoping_terms(&c, n).and_then(|t| t.tables(alg).map(|tb| (t, tb))) {
            Ok(x) => x,
            Err(err) => return log.check(false, format!("n = {n}: {err}")),
        };
        let (tel, tables) = t;
        log.check(tel.swap.is_zero(), format!("n = {n}: middle difference vanishes"));
        let mut count = 0;
        for (k, table) in tables.iter().enumerate() {
            for (j, v) in table.entries.iter().enumerate() {
                let want = printed_table_entry(k + 1, n as i64, j as i64);
                log.check(v == &want, format!("C^{}_{{{n},{j}}} = {v}, printed {want}", k + 1));
                count += 1;
            }
        }
        log.note(format!("n = {n}: {count} entries"));
    }
}

fn c6(log: &mut Log) {
    let c = bp();
    let e = c.engine();
    let alg = e.algebra();
    for m in 0..=4usize {
        let mut set = GeneratorSet::new();
        set.push(alg, "T", field(&c, "T")).expect("T");
        set.push(alg, "J", field(&c, "J")).expect("J");
        for k in 0..m {
            set.push(alg, &format!("U[0,{k}]"), c.u(0, k)).expect("U");
        }
        let res = express_in_generators(e, &c.u(0, m), &set, 4, WordOrder::Forward);
        log.check(res.is_err(), format!("U[0,{m}] must not be expressible"));
    }
}

fn c7(log: &mut Log) {
    let c = bp();
    let e = c.engine();
    let alg = e.algebra();
    let j = field(&c, "J");
    let tc = c.t_c();
    let mut allowed = vec![PolyL::ell()];
    allowed.extend(correction_quadratics());
    for i in 0..=2usize {
        let corr = match solve_correction(&c, i) {
            Ok(x) => x,
            Err(err) => return log.check(false, format!("i = {i}: {err}")),
        };
        log.check(corr.nullity == 0, format!("i = {i}: unique"));
        log.check(commutant_check(e, &corr.u_c, &j), format!("i = {i}: commutes with J"));
        log.check(
            e.nth_product(&tc, &corr.u_c, 1) == corr.u_c.scale(&RatFuncL::from_int(i as i64 + 3)),
            format!("i = {i}: weight"),
        );
        for n in 2..=(i as i64 + 4) {
            log.check(e.nth_product(&tc, &corr.u_c, n).is_zero(), format!("i = {i}: TC∘{n} = 0"));
        }
        log.check(corr.omega.degree(alg) <= 2, format!("i = {i}: degree"));
        for (_, k) in corr.omega.iter() {
            log.check(is_supported_on(k.denom(), &allowed), format!("i = {i}: denominator {}", k.denom()));
        }
        let dens: Vec<String> = corr.denominators.iter().map(|f| format!("({})^{}", f.factor, f.multiplicity)).collect();
        log.note(format!("i = {i}: denominators {}", dens.join(" ")));
    }
}

fn power_checks(log: &mut Log, ell: i64) {
    let v = q(ell);
    let e = specialize_algebra(&bp_algebra(), &v).expect("specializes").engine();
    let c = Catalog::new(e.clone());
    let m = 2 * ell as usize;
    for (g, other, sign) in [("G+", "G-", 1), ("G-", "G+", -1)] {
        let p = power_field(&e, g, m).expect("power");
        log.check(e.nth_product(&field(&c, "J"), &p, 0) == p.scale(&RatFuncL::from_int(sign * m as i64)), format!("l = {ell}: J∘0 ({g})^{m}"));
        for (name, t) in [("T", field(&c, "T")), ("TH", c.t_h())] {
            log.check(e.nth_product(&t, &p, 1) == p.scale(&RatFuncL::from_int(3 * ell)), format!("l = {ell}: {name}∘1 ({g})^{m}"));
            for n in 2..=(m as i64 + 2) {
                log.check(e.nth_product(&t, &p, n).is_zero(), format!("l = {ell}: {name}∘{n} ({g})^{m}"));
            }
        }
        let big = power_field(&e, g, m + 1).expect("power");
        let lhs = e.nth_product(&field(&c, other), &big, 1);
        let mut inner = e.derivative(&p);
        inner.add_scaled(&e.wick(&field(&c, "J"), &p), &RatFuncL::from_int(-3 * sign));
        let k = RatFuncL::frac(sign * (2 * ell + 1) * (2 * ell + 1), 2);
        log.check(lhs == inner.scale(&k), format!("l = {ell}: {other}∘1 ({g})^{}", m + 1));
    }
}

fn c8(log: &mut Log) {
    power_checks(log, 1);
    power_checks(log, 2);
}

fn c9(log: &mut Log) {
    let bpc = bp();
    let c = Catalog::new(bp_bc_algebra().engine());
    let e = c.engine();
    for plus in [true, false] {
        let sign = RatFuncL::from_int(if plus { 1 } else { -1 });
        let rhs = e.wick(&c.phi(plus, 0), &c.j_e()).scale(&sign);
        log.check(c.phi(plus, 1) == rhs, format!("phi{}[0,1]", if plus { "+" } else { "-" }));
    }
    let verbatim = Relation::parse(U01_TENSOR).residual(&c).expect("parses");
    let amended = Relation::parse(U01_TENSOR_AMENDED).residual(&c).expect("parses");
    let quartic = |x: &str| field(&c, &format!(":{x} {x} {x} {x}:"));
    let predicted = (&quartic("JE") - &quartic("J")).scale(&r("(2*l^2-l)/24"));
    log.known_failure(
        verbatim.is_zero(),
        "long U[0,1] relation, verbatim",
        verbatim == predicted && amended.is_zero(),
        "the printed :J J J J: term leaves l(2l-1)/24 (:JE^4: - :J^4:); with :JE JE JE JE: the relation holds",
    );
    let jd = c.j_diag();
    log.check(e.nth_product(&jd, &jd, 1) == FieldExpr::scalar(r("(3+2*l)/3")), "Jdiag∘1 Jdiag");
    let ud = solve_correction(&bpc, 0).expect("correction 0").u_c.reindex(&[0, 1, 2, 3]);
    c.insert("UC[0]", ud);
    for name in ["JD", "TD", "phi+", "phi-", "UD"] {
        log.check(commutant_check(e, &field(&c, name), &jd), format!("Jdiag∘n {name} = 0"));
    }
}

fn c10(log: &mut Log) {
    let c = bp();
    let e = c.engine();
    let alg = e.algebra();
    let f = |s: &str| field(&c, s);
    let mono = |s: &str| f(s).terms().keys().next().expect("monomial").clone();
    for (g, sign) in [("G+", 1), ("G-", -1)] {
        match mode_bracket(e, &f("J"), &f(g), ModeConvention::Standard) {
            Ok(b) => log.check(
                b.terms.len() == 1 && b.coefficient(&mono(g)) == IndexPoly::constant(RatFuncL::from_int(sign)) && b.central.is_zero(),
                format!("[J_m, {g}_n]"),
            ),
            Err(err) => log.check(false, format!("[J_m, {g}_n]: {err}")),
        }
    }
    let b = match mode_bracket(e, &f("G+"), &f("G-"), ModeConvention::Shifted) {
        Ok(b) => b,
        Err(err) => return log.check(false, format!("[G+_m, G-_n]: {err}")),
    };
    log.note(format!("[G+_m, G-_n] = {}", b.to_text(alg)));
    let (m, n) = (IndexPoly::m(), IndexPoly::n());
    let one = IndexPoly::constant(RatFuncL::one());
    let k = |s: &str| IndexPoly::constant(r(s));
    // −(l + 3/2) T^C with T^C = T − 3/(4l) :J J:
    let jj = &k("9/(4*l)*(l-1/2)") + &k("(l+3/2)*3/(4*l)");
    log.check(b.coefficient(&mono(":J J:")) == jj, "(J^2) term");
    log.check(b.coefficient(&mono("T")) == k("-(l+3/2)"), "TC term");
    log.check(b.central == (&(&m * &m) + &m).scale(&r("l*(l-1/2)")), "central term l(l-1/2)m(m+1)");
    log.check(b.terms.len() == 3, "no further fields");
    let printed = (&(&m - &n) - &one).scale(&r("3/2*(l-1/2)"));
    let computed = (&(&m - &n) + &one).scale(&r("3/2*(l-1/2)"));
    let got = b.coefficient(&mono("J"));
    log.known_failure(
        got == printed,
        "J term (3/2)(l-1/2)(m-n-1)",
        got == computed,
        "the labelling that yields the printed central term gives the J term (3/2)(l-1/2)(m-n+1)",
    );
    let gens: Vec<FieldExpr> = alg.generators().iter().map(|g| f(&g.name)).collect();
    let g = gens.len();
    let triples: Vec<(usize, usize, usize)> =
        (0..g).flat_map(|a| (0..g).flat_map(move |b| (0..g).map(move |c| (a, b, c)))).collect();
    let bad: Vec<String> = triples
        .par_iter()
        .filter(|&&(a, b, c)| !jacobi_check(e, &gens[a], &gens[b], &gens[c]).map(|d| d.holds()).unwrap_or(false))
        .map(|&(a, b, c)| format!("{} {} {}", alg.generator(a).name, alg.generator(b).name, alg.generator(c).name))
        .collect();
    log.check(bad.is_empty(), format!("Jacobi identity fails on {bad:?}"));
    log.note(format!("Jacobi identity on {} generator triples", triples.len()));
}

fn c11(log: &mut Log) {
    let order = exp(8, 1);
    let mut counts_ok = true;
    let mut analyzed = true;
    let corrections = bp();
    for ell in 1..=2u32 {
        let cal = calibrate_bp_character(ell);
        counts_ok &= cal.matches_counts;
        let w = 2 * ell as i64 + 1;
        analyzed &= cal.first_mismatch_weight.as_deref() == Some(w.to_string().as_str());
        // The difference starts with −1·z^0 at weight 2l+1: one singular vector, the specialized U^C_{2l−2}.
        let engine = specialize_algebra(&bp_algebra(), &q(ell as i64)).expect("specializes").engine();
        let found = singular_vectors(&engine, &q(w), &q(0));
        let shift = -crate::characters::bp_central_charge(ell) / 24;
        let ch = crate::characters::bp_character(ell, exp(w + 1, 1) + shift);
        let diff = &ch - &crate::characters::counted_character(ell);
        analyzed &= diff.leading().map(|(e, c)| (e, c.clone())) == Some((exp(w, 1) + shift, LaurentZ::monomial(0, q(-1))));
        analyzed &= found.len() == 1;
        if let (Some(v), Ok(u)) = (found.first(), solve_correction(&corrections, 2 * ell as usize - 2)) {
            let u = u.u_c.specialize(&q(ell as i64)).expect("defined");
            analyzed &= same_line(v, &u);
        } else {
            analyzed = false;
        }
        log.note(format!("l = {ell}: calibration {:?}, first count mismatch at weight {:?}", cal.chosen, cal.first_mismatch_weight));

        let rep = verify_decomposition(ell, order);
        log.check(rep.identity.passed && rep.at_z_one.passed, format!("l = {ell}: decomposition to O(q^8)"));
        log.note(format!("l = {ell}: decomposition choices {:?}", rep.identity.calibration_choices));
        for s in 0..2 * ell as usize {
            let cor = verify_corollary(ell, s, order);
            log.check(cor.passed, format!("l = {ell}, s = {s}: corollary to O(q^8)"));
            if s == 0 {
                log.note(format!("l = {ell}: corollary choices {:?}", cor.identity.calibration_choices));
            }
        }
    }
    log.known_failure(
        counts_ok,
        "character equals monomial counts below (2l+1)·3/2",
        analyzed,
        "the universal algebra has a singular vector at weight 2l+1 (the specialized U^C_{2l-2}), so counts exceed the character by one at z^0 there",
    );
}

fn same_line(a: &FieldExpr, b: &FieldExpr) -> bool {
    let lead = |f: &FieldExpr| f.terms().values().next().cloned();
    match (lead(a), lead(b)) {
        (Some(x), Some(y)) => a.scale(&y) == b.scale(&x),
        _ => false,
    }
}

fn c12(log: &mut Log) {
    let outcomes: Vec<_> = Property::ALL.par_iter().map(|p| run_property(*p, 1000)).collect();
    for o in outcomes {
        log.check(o.passed, format!("{}: {}", o.property.name(), o.failure.clone().unwrap_or_default()));
        log.note(format!("{}: {} cases in {:.1}s", o.property.name(), o.cases, o.seconds));
    }
}

/// Runs criterion `id` (1..=12).
pub fn run_criterion(id: u32) -> CriterionResult {
    let mut log = Log::default();
    let start = Instant::now();
    match id {
        1 => c1(&mut log),
        2 => c2(&mut log),
        3 => c3(&mut log),
        4 => c4(&mut log),
        5 => c5(&mut log),
        6 => c6(&mut log),
        7 => c7(&mut log),
        8 => c8(&mut log),
        9 => c9(&mut log),
        10 => c10(&mut log),
        11 => c11(&mut log),
        12 => c12(&mut log),
        _ => panic!("no criterion {id}"),
    }
    let seconds = start.elapsed().as_secs_f64();
    let budget = BUDGETS[id as usize - 1];
    let in_time = budget.is_none_or(|b| seconds <= b);
    if !in_time {
        log.failures.push(format!("took {seconds:.1}s, budget {:.0}s", budget.unwrap_or_default()));
    }
    let passed = log.failures.is_empty();
    // Only the known failures may fail, each in exactly the analyzed way.
    let unexpected: Vec<String> =
        log.failures.iter().filter(|f| !log.known.iter().any(|(k, _)| k == *f)).cloned().collect();
    let as_analyzed = unexpected.is_empty() && log.known.iter().all(|(_, ok)| *ok);
    CriterionResult {
        id,
        title: TITLES[id as usize - 1],
        passed,
        as_analyzed,
        seconds,
        budget_seconds: budget,
        deviation: log.deviation,
        failures: log.failures,
        unexpected,
        notes: log.notes,
    }
}

/// Runs the given criteria (all when empty) in order.
pub fn run_selftest(ids: &[u32]) -> SelftestReport {
    let ids: Vec<u32> = if ids.is_empty() { (1..=12).collect() } else { ids.to_vec() };
    let criteria: Vec<CriterionResult> = ids.iter().map(|&i| run_criterion(i)).collect();
    let passed = criteria.iter().all(|c| c.passed);
    let as_analyzed = criteria.iter().all(|c| c.as_analyzed);
    SelftestReport { criteria, passed, as_analyzed }
}

impl CriterionResult {
    /// One line: `PASS|FAIL  n. title (time)` plus the deviation when there is one.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:>2}. {} ({:.1}s)", self.id, self.title, self.seconds);
        if let Some(d) = &self.deviation {
            s.push_str(&format!(" [{}: {d}]", if self.as_analyzed { "as analyzed" } else { "NOT as analyzed" }));
        }
        if !self.unexpected.is_empty() {
            s.push_str(&format!(" failures: {}", self.unexpected.join("; ")));
        }
        s
    }
}
