use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use super::functions::*;
use super::series::{Coeff, Cyclotomic, Exp, JacobiSeries, QSeries};

/// Runs `f` at increasing internal orders until its result is known to `order`, then truncates.
pub fn padded<C: Coeff>(order: Exp, f: impl Fn(Exp) -> QSeries<C>) -> QSeries<C> {
    let mut pad = Exp::one();
    loop {
        let s = f(order + pad);
        if s.order() >= order {
            return s.truncate(order);
        }
        pad *= 2;
    }
}

/// Which lattice coset multiplies 𝕃_{3Λ_s} in the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThetaIndex {
    /// θ_{3s}: shift 3s/√(6ℓ).
    Triple,
    /// θ_s: shift s/√(6ℓ).
    Single,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaChoice {
    pub index: ThetaIndex,
    pub z: LatticeZ,
}

impl ThetaChoice {
    /// θ_{3s} first, literal z-powers before charge z-powers.
    pub fn candidates() -> [ThetaChoice; 4] {
        [
            ThetaChoice { index: ThetaIndex::Triple, z: LatticeZ::Literal },
            ThetaChoice { index: ThetaIndex::Triple, z: LatticeZ::Charge },
            ThetaChoice { index: ThetaIndex::Single, z: LatticeZ::Literal },
            ThetaChoice { index: ThetaIndex::Single, z: LatticeZ::Charge },
        ]
    }

    pub fn shift(&self, s: usize) -> i64 {
        match self.index {
            ThetaIndex::Triple => 3 * s as i64,
            ThetaIndex::Single => s as i64,
        }
    }

    pub fn theta(&self, ell: u32, s: usize, order: Exp) -> Option<JacobiSeries> {
        lattice_theta_with(ell, self.shift(s), order, self.z)
    }
}

/// Σ_{s=0}^{2ℓ−1} ch 𝕃_{3Λ_s}(τ) · θ(τ,u)/η(τ).
pub fn decomposition_rhs(ell: u32, order: Exp, choice: ThetaChoice) -> Option<JacobiSeries> {
    let n = 2 * ell as usize;
    (0..n).try_for_each(|s| choice.theta(ell, s, Exp::one()).map(|_| ()))?;
    let parts: Vec<JacobiSeries> = (0..n)
        .into_par_iter()
        .map(|s| {
            padded(order, |o| {
                let chl = w_minimal_character(n, s, o).to_jacobi();
                let lat = &choice.theta(ell, s, o).expect("checked above") * &eta_inverse_power(1, o).to_jacobi();
                &chl * &lat
            })
        })
        .collect();
    let mut out = QSeries::zero(order);
    for p in &parts {
        out = &out + p;
    }
    Some(out)
}

/// A series comparison in the report format shared by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub lhs: String,
    pub rhs: String,
    /// Exponent below which both sides agree.
    pub agreement_order: String,
    pub first_mismatch: Option<String>,
    pub calibration_choices: BTreeMap<String, String>,
    pub passed: bool,
}

fn compare<C: Coeff>(lhs: &QSeries<C>, rhs: &QSeries<C>, order: Exp) -> (Exp, Option<Exp>) {
    let mismatch = lhs.first_mismatch(rhs);
    let known = lhs.order().min(rhs.order());
    (mismatch.unwrap_or(known).min(order), mismatch.filter(|e| *e < order))
}

fn report<C: Coeff>(
    lhs: &QSeries<C>,
    rhs: &QSeries<C>,
    order: Exp,
    calibration_choices: BTreeMap<String, String>,
) -> SeriesReport {
    let (agree, mismatch) = compare(lhs, rhs, order);
    SeriesReport {
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        agreement_order: agree.to_string(),
        first_mismatch: mismatch.map(|e| e.to_string()),
        calibration_choices,
        passed: mismatch.is_none() && agree >= order,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaAttempt {
    pub choice: ThetaChoice,
    pub agreement_order: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub ell: u32,
    pub order: String,
    pub character: BpCalibrationReport,
    pub theta_attempts: Vec<ThetaAttempt>,
    /// The two-variable identity under the chosen calibration.
    pub identity: SeriesReport,
    /// The same identity at z = 1.
    pub at_z_one: SeriesReport,
    /// Inverse formula and lattice-theta identity for each s.
    pub corollaries: Vec<CorollaryReport>,
    pub passed: bool,
}

fn choices_map(cal: &BpCalibration, theta: Option<&ThetaChoice>, roots: Option<&RootChoice>) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("theta_start".into(), format!("{:?}", cal.theta_start));
    m.insert("q_power".into(), format!("{:?}", cal.q_power));
    if let Some(t) = theta {
        m.insert("theta_index".into(), format!("{:?}", t.index));
        m.insert("lattice_z".into(), format!("{:?}", t.z));
    }
    if let Some(r) = roots {
        m.insert("roots_of_unity".into(), format!("{r:?}"));
    }
    m
}

/// The calibration used for ch W_ℓ.
pub fn chosen_calibration(cal: &BpCalibrationReport) -> BpCalibration {
    cal.chosen
}

/// ch W_ℓ(τ,u) = Σ_s ch 𝕃_{3Λ_s}(τ) ch V_{L+…}(τ,u) to O(q^order), with the calibration recorded.
pub fn verify_decomposition(ell: u32, order: Exp) -> DecompositionReport {
    let character = calibrate_bp_character(ell);
    let cal = chosen_calibration(&character);
    let lhs = bp_character_with(ell, order, cal);
    let mut theta_attempts = Vec::new();
    let mut chosen: Option<(ThetaChoice, JacobiSeries)> = None;
    for choice in ThetaChoice::candidates() {
        let rhs = decomposition_rhs(ell, order, choice);
        let agree = rhs.as_ref().map(|r| compare(&lhs, r, order).0);
        theta_attempts.push(ThetaAttempt { choice, agreement_order: agree.map(|e| e.to_string()) });
        if let (Some(r), Some(a)) = (rhs, agree) {
            if a >= order && lhs.first_mismatch(&r).is_none() {
                chosen = Some((choice, r));
                break;
            }
        }
    }
    let (choice, rhs) = match chosen {
        Some(c) => c,
        None => {
            let c = ThetaChoice::candidates()[0];
            (c, decomposition_rhs(ell, order, c).expect("literal choice is integral"))
        }
    };
    let choices = choices_map(&cal, Some(&choice), None);
    let identity = report(&lhs, &rhs, order, choices.clone());
    let at_z_one = report(&lhs.at_z_one(), &rhs.at_z_one(), order, choices);
    let corollaries: Vec<CorollaryReport> =
        (0..2 * ell as usize).into_par_iter().map(|s| corollary_with(ell, s, order, cal, choice)).collect();
    let passed = identity.passed && at_z_one.passed && corollaries.iter().all(|c| c.passed);
    DecompositionReport {
        ell,
        order: order.to_string(),
        character,
        theta_attempts,
        identity,
        at_z_one,
        corollaries,
        passed,
    }
}

/// Roots of unity used to project onto a lattice coset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootChoice {
    /// z = e^{2πit/(3ℓ)} with weight e^{−2πits}, as displayed.
    Literal,
    /// z = e^{2πit/(2ℓ)} with weight e^{−2πits/(2ℓ)}.
    Charge,
}

impl RootChoice {
    /// (order of the root, exponent of ζ_{6ℓ} for t = 1).
    fn root(self, ell: u32) -> (u32, i64) {
        match self {
            RootChoice::Literal => (3 * ell, 2),
            RootChoice::Charge => (2 * ell, 3),
        }
    }

    /// z_t = ζ_{6ℓ}^{step·t}.
    pub fn z(self, ell: u32, t: i64) -> Cyclotomic {
        Cyclotomic::root(6 * ell, self.root(ell).1 * t)
    }

    /// The weight multiplying the t-th term when projecting onto coset s.
    pub fn kernel(self, ell: u32, t: i64, s: i64) -> Cyclotomic {
        match self {
            RootChoice::Literal => Cyclotomic::c_one(),
            RootChoice::Charge => Cyclotomic::root(2 * ell, -t * s),
        }
    }
}

/// (1/2ℓ)Σ_t kernel(t,s)·phase(t,s′) for the lattice coset of s′; δ_{s,s′} when the projection works.
pub fn orthogonality_matrix(ell: u32, roots: RootChoice, theta: ThetaChoice) -> Vec<Vec<Cyclotomic>> {
    let n = 2 * ell as i64;
    let inv = BigRational::new(1.into(), n.into());
    (0..n)
        .map(|s| {
            (0..n)
                .map(|s2| {
                    // z-power of the n = 0 term of the coset.
                    let Some(zpow) = lattice_offset(theta, s2 as usize) else { return Cyclotomic::c_zero() };
                    let mut acc = Cyclotomic::c_zero();
                    for t in 0..n {
                        let phase = Cyclotomic::root(6 * ell, roots.root(ell).1 * t * zpow);
                        acc = acc.c_add(&roots.kernel(ell, t, s).c_mul(&phase));
                    }
                    acc.scale(&inv)
                })
                .collect()
        })
        .collect()
}

fn lattice_offset(theta: ThetaChoice, s: usize) -> Option<i64> {
    let shift = theta.shift(s);
    match theta.z {
        LatticeZ::Literal => Some(shift),
        LatticeZ::Charge => (shift % 3 == 0).then_some(shift / 3),
    }
}

pub fn is_identity(m: &[Vec<Cyclotomic>]) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, x)| *x == if i == j { Cyclotomic::c_one() } else { Cyclotomic::c_zero() })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RootAttempt {
    pub roots: RootChoice,
    pub kernel_is_identity: bool,
    pub inverse_agreement: String,
    pub identity_agreement: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub ell: u32,
    pub s: usize,
    pub attempts: Vec<RootAttempt>,
    /// ch 𝕃_{3Λ_s} against the projection of ch W_ℓ onto the s-th coset.
    pub inverse: SeriesReport,
    /// The Weyl sum for 𝕃_{3Λ_s} against the projection written with the sl_3 numerator.
    pub identity: SeriesReport,
    pub passed: bool,
}

fn rational_series(s: &QSeries) -> QSeries<Cyclotomic> {
    s.map(Cyclotomic::from_rational)
}

/// (1/2ℓ)·η/θ(τ,0)·Σ_t kernel·ch W_ℓ(τ, z_t).
fn inverse_rhs(ell: u32, s: usize, order: Exp, ch: &dyn Fn(Exp) -> JacobiSeries, theta: ThetaChoice, roots: RootChoice) -> QSeries<Cyclotomic> {
    let n = 2 * ell as i64;
    padded(order, |o| {
        let w = ch(o);
        let mut sum = QSeries::zero(o);
        for t in 0..n {
            let step = roots.root(ell).1 * t;
            let term = w.at_root(6 * ell, step).scale(&roots.kernel(ell, t, s as i64));
            sum = &sum + &term;
        }
        let th = theta.theta(ell, s, o).expect("integral grading").at_z_one();
        let pre = &eta_series(o) * &th.inverse().expect("theta has a unit leading term");
        let inv = Cyclotomic::rational(BigRational::new(1.into(), n.into()));
        (&rational_series(&pre) * &sum).scale(&inv)
    })
}

/// (1/2ℓ)·η^{n−1}/θ(τ,0)·Σ_t kernel·q^{π+1/24}·N(z_t)/ϑ(τ,z_t), with ϑ expanded at the root directly.
fn identity_rhs(ell: u32, s: usize, order: Exp, cal: BpCalibration, theta: ThetaChoice, roots: RootChoice) -> QSeries<Cyclotomic> {
    let n = 2 * ell as i64;
    let pi = cal.prefactor(ell) + Exp::new(1, 24);
    padded(order, |o| {
        let rel = o - pi;
        let num = bp_numerator(ell, rel);
        let mut sum = QSeries::zero(rel);
        for t in 0..n {
            let z = roots.z(ell, t);
            let zinv = roots.z(ell, -t);
            let den = QSeries::geometric_product(&theta_factors(&z, &zinv, cal.theta_start, rel), rel);
            let step = roots.root(ell).1 * t;
            let term = (&num.at_root(6 * ell, step) * &den).scale(&roots.kernel(ell, t, s as i64));
            sum = &sum + &term;
        }
        let th = theta.theta(ell, s, o).expect("integral grading").at_z_one();
        let pre = &eta_power(n as usize - 1, o) * &th.inverse().expect("theta has a unit leading term");
        let inv = Cyclotomic::rational(BigRational::new(1.into(), n.into()));
        (&rational_series(&pre) * &sum.shift(pi)).scale(&inv)
    })
}

fn corollary_with(ell: u32, s: usize, order: Exp, cal: BpCalibration, theta: ThetaChoice) -> CorollaryReport {
    let n = 2 * ell as usize;
    let chl = rational_series(&w_minimal_character(n, s, order));
    let weyl = rational_series(&padded(order, |o| minimal_numerator(n, s, o)));
    let ch = move |o: Exp| bp_character_with(ell, o, cal);
    let mut attempts = Vec::new();
    let mut best: Option<(RootChoice, QSeries<Cyclotomic>, QSeries<Cyclotomic>)> = None;
    for roots in [RootChoice::Literal, RootChoice::Charge] {
        let inv = inverse_rhs(ell, s, order, &ch, theta, roots);
        let id = identity_rhs(ell, s, order, cal, theta, roots);
        let (a1, m1) = compare(&chl, &inv, order);
        let (a2, m2) = compare(&weyl, &id, order);
        attempts.push(RootAttempt {
            roots,
            kernel_is_identity: is_identity(&orthogonality_matrix(ell, roots, theta)),
            inverse_agreement: a1.to_string(),
            identity_agreement: a2.to_string(),
        });
        let ok = m1.is_none() && m2.is_none() && a1 >= order && a2 >= order;
        if best.is_none() || ok {
            best = Some((roots, inv, id));
        }
        if ok {
            break;
        }
    }
    let (roots, inv, id) = best.expect("at least one attempt");
    let choices = choices_map(&cal, Some(&theta), Some(&roots));
    let inverse = report(&chl, &inv, order, choices.clone());
    let identity = report(&weyl, &id, order, choices);
    let passed = inverse.passed && identity.passed;
    CorollaryReport { ell, s, attempts, inverse, identity, passed }
}

/// The inverse formula and the lattice-theta identity for one s, calibrated as in the decomposition.
pub fn verify_corollary(ell: u32, s: usize, order: Exp) -> CorollaryReport {
    let cal = chosen_calibration(&calibrate_bp_character(ell));
    let lhs = bp_character_with(ell, order, cal);
    let theta = ThetaChoice::candidates()
        .into_iter()
        .find(|c| decomposition_rhs(ell, order, *c).is_some_and(|r| lhs.first_mismatch(&r).is_none() && r.order() >= order))
        .unwrap_or(ThetaChoice::candidates()[0]);
    corollary_with(ell, s, order, cal, theta)
}
