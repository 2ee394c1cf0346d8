use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::lie::{half, ints, lattice_points, norm2, permutations, rho, fundamental, act, AffineWeight};
use super::series::{big, small, Coeff, Exp, JacobiSeries, LaurentZ, QSeries};
use crate::algebras::bp_algebra;
use crate::vertex::weight_basis_all_charges;

fn q1() -> BigRational {
    <BigRational as One>::one()
}

/// q^{1/24}∏_{i≥1}(1−q^i).
pub fn eta_series(order: Exp) -> QSeries {
    let shift = Exp::new(1, 24);
    let f: Vec<(BigRational, Exp)> = (1..).map(Exp::from).take_while(|e| *e < order).map(|e| (q1(), e)).collect();
    QSeries::product_one_minus(&f, order - shift).shift(shift)
}

/// η^{−k}, expanded directly as a product of geometric series.
pub fn eta_inverse_power(k: usize, order: Exp) -> QSeries {
    let shift = Exp::new(k as i64, 24);
    let rel = order + shift;
    let mut f = Vec::new();
    for i in (1..).map(Exp::from).take_while(|e| *e < rel) {
        f.extend(std::iter::repeat_n((q1(), i), k));
    }
    QSeries::geometric_product(&f, rel).shift(-shift)
}

/// η^k.
pub fn eta_power(k: usize, order: Exp) -> QSeries {
    let shift = Exp::new(k as i64, 24);
    let rel = order - shift;
    let mut f = Vec::new();
    for i in (1..).map(Exp::from).take_while(|e| *e < rel) {
        f.extend(std::iter::repeat_n((q1(), i), k));
    }
    QSeries::product_one_minus(&f, rel).shift(shift)
}

/// Where the z-dependent product of ϑ starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ThetaStart {
    /// j ≥ 1, as displayed.
    FromOne,
    /// j ≥ 0.
    FromZero,
}

impl ThetaStart {
    fn first(self) -> i64 {
        match self {
            ThetaStart::FromOne => 1,
            ThetaStart::FromZero => 0,
        }
    }
}

/// Factors of ϑ(τ,u) = ∏_{i≥1}(1−q^i)∏_{j≥start}(1−zq^{1/2+j})(1−z^{−1}q^{1/2+j}) for given values of z, z^{−1}.
pub fn theta_factors<C: Coeff>(z: &C, zinv: &C, start: ThetaStart, order: Exp) -> Vec<(C, Exp)> {
    let mut f: Vec<(C, Exp)> = (1..).map(Exp::from).take_while(|e| *e < order).map(|e| (C::c_one(), e)).collect();
    for j in start.first().. {
        let e = half() + Exp::from(j);
        if e >= order {
            break;
        }
        f.push((z.clone(), e));
        f.push((zinv.clone(), e));
    }
    f
}

/// The denominator function ϑ(τ,u) as a two-variable series.
pub fn jacobi_theta(order: Exp, start: ThetaStart) -> JacobiSeries {
    QSeries::product_one_minus(&theta_factors(&LaurentZ::z(1), &LaurentZ::z(-1), start, order), order)
}

/// How the lattice theta function records the z-grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LatticeZ {
    /// z^{3ℓn + shift}, as displayed.
    Literal,
    /// z to the J_0-charge of the lattice vector, (6ℓn + shift)/3.
    Charge,
}

/// θ(τ,u) = Σ_n q^{(6ℓn + shift)²/(12ℓ)} z^{e(n)} with e(n) fixed by `zconv`.
/// None when the charge grading would need fractional z-powers.
pub fn lattice_theta_with(ell: u32, shift: i64, order: Exp, zconv: LatticeZ) -> Option<JacobiSeries> {
    let l = ell as i64;
    if zconv == LatticeZ::Charge && shift % 3 != 0 {
        return None;
    }
    // |6ℓn + shift| < √(12ℓ·order), widened by one step.
    let of = *order.numer() as f64 / *order.denom() as f64;
    let reach = (12.0 * l as f64 * of.max(0.0)).sqrt() as i64 + 6 * l;
    let terms = (-(reach + shift.abs()) / (6 * l) - 1..=(reach + shift.abs()) / (6 * l) + 1)
        .map(|n| {
            let z = match zconv {
                LatticeZ::Literal => 3 * l * n + shift,
                LatticeZ::Charge => (6 * l * n + shift) / 3,
            };
            (Exp::new((6 * l * n + shift).pow(2), 12 * l), LaurentZ::z(z))
        });
    Some(QSeries::from_terms(terms, order))
}

/// θ_s(τ,u) = Σ_n q^{½(√(6ℓ)n + s/√(6ℓ))²} z^{3ℓ(n + s/(3ℓ))}.
pub fn lattice_theta(ell: u32, s: i64, order: Exp) -> JacobiSeries {
    lattice_theta_with(ell, s, order, LatticeZ::Literal).expect("literal grading is integral")
}

/// Central charge of the Bershadsky–Polyakov algebra at k = ℓ − 3/2: −2ℓ(6ℓ−7)/(2ℓ+3).
pub fn bp_central_charge(ell: u32) -> Exp {
    let l = ell as i64;
    Exp::new(-2 * l * (6 * l - 7), 2 * l + 3)
}

/// Central charge of the W(sl_n) minimal model with p = 3: −3(n−1)²/(n+3).
pub fn minimal_central_charge(n: usize) -> Exp {
    let n = n as i64;
    Exp::new(-3 * (n - 1) * (n - 1), n + 3)
}

/// Σ ε(w) e^{w∘kΛ_0} over w = t_β u, u ∈ S_3, β ∈ 2Q^∨, with e^{−δ} → q,
/// e^{α_1} → z^{−1}q^{−1/2}, e^{α_2} → zq^{−1/2}; every term with q-exponent below `order`.
pub fn bp_numerator(ell: u32, order: Exp) -> JacobiSeries {
    let k = Exp::from(ell as i64) - Exp::new(3, 2);
    let m = k + 3;
    let lam = AffineWeight::new(k, vec![Exp::zero(); 2], Exp::zero());
    let r = rho(3);
    let mut terms = Vec::new();
    for (perm, sign) in permutations(3) {
        let ur = act(&perm, &r);
        // E(β) = ½m|β + v|² − ½m|v|² − ½ht(uρ − ρ), v = uρ/m − ρ/2; enumerate β = 2x.
        let v: Vec<Exp> = ur.iter().zip(&r).map(|(a, b)| a / m - b * half()).collect();
        let ht: Exp = ur.iter().zip(&r).map(|(a, b)| a - b).sum();
        let bound = (order + half() * m * norm2(&v) + half() * ht) / (m * 2);
        let y: Vec<Exp> = v.iter().map(|x| x * half()).collect();
        for x in lattice_points(&y, bound) {
            let beta: Vec<Exp> = ints(&x).iter().map(|b| b * 2).collect();
            let w = lam.shifted(&perm, &beta);
            let (a1, a2) = (w.finite[0], w.finite[1]);
            let e = -w.delta - (a1 + a2) * half();
            if e < order {
                let zpow = a2 - a1;
                assert!(zpow.is_integer());
                terms.push((e, LaurentZ::monomial(zpow.to_integer(), BigRational::from_integer(sign.into()))));
            }
        }
    }
    QSeries::from_terms(terms, order)
}

/// Overall power of q multiplying the numerator over η·ϑ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QPower {
    /// Only the q^{−1/24} carried by 1/η, as displayed.
    Eta,
    /// Leading power q^{−c/24}, c the central charge.
    CentralCharge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BpCalibration {
    pub theta_start: ThetaStart,
    pub q_power: QPower,
}

impl BpCalibration {
    pub const LITERAL: BpCalibration = BpCalibration { theta_start: ThetaStart::FromOne, q_power: QPower::Eta };

    /// Literal reading first, then the toggles.
    pub fn candidates() -> [BpCalibration; 4] {
        [
            BpCalibration::LITERAL,
            BpCalibration { theta_start: ThetaStart::FromZero, q_power: QPower::Eta },
            BpCalibration { theta_start: ThetaStart::FromOne, q_power: QPower::CentralCharge },
            BpCalibration { theta_start: ThetaStart::FromZero, q_power: QPower::CentralCharge },
        ]
    }

    /// Exponent π with ch = q^π · numerator / (∏(1−q^i) · ϑ).
    pub fn prefactor(&self, ell: u32) -> Exp {
        match self.q_power {
            QPower::Eta => Exp::new(-1, 24),
            QPower::CentralCharge => -bp_central_charge(ell) / 24,
        }
    }
}

/// ch W_ℓ = q^π · Σ ε(w) e^{w∘kΛ_0} / (∏(1−q^i) ϑ(τ,u)) under the given calibration.
pub fn bp_character_with(ell: u32, order: Exp, cal: BpCalibration) -> JacobiSeries {
    let pi = cal.prefactor(ell);
    let rel = order - pi;
    let num = bp_numerator(ell, rel);
    let mut f = theta_factors(&LaurentZ::z(1), &LaurentZ::z(-1), cal.theta_start, rel);
    f.extend((1..).map(Exp::from).take_while(|e| *e < rel).map(|e| (LaurentZ::c_one(), e)));
    let den = QSeries::geometric_product(&f, rel);
    (&num * &den).shift(pi)
}

/// Dimensions of the weight spaces of the universal algebra (normal monomials), keyed by (weight, charge).
pub fn weight_counts(below: Exp) -> BTreeMap<(Exp, i64), usize> {
    let alg = bp_algebra();
    let mut out = BTreeMap::new();
    let mut w = Exp::zero();
    while w < below {
        for mono in weight_basis_all_charges(&alg, &big(&w)) {
            let c = small(&mono.charge(&alg));
            *out.entry((w, c.to_integer())).or_insert(0) += 1;
        }
        w += half();
    }
    out
}

/// (2ℓ+1)·3/2, the weight of (G^±)^{2ℓ+1}; the counts comparison runs below it.
///
/// The universal algebra already has a singular vector at weight 2ℓ+1, so counts
/// and character part ways there (see [`crate::vertex::singular_vectors`]).
pub fn first_ideal_weight(ell: u32) -> Exp {
    Exp::new(3 * (2 * ell as i64 + 1), 2)
}

/// Σ count·q^{w − c/24} z^{charge} below the first ideal weight.
pub fn counted_character(ell: u32) -> JacobiSeries {
    let bound = first_ideal_weight(ell);
    let shift = -bp_central_charge(ell) / 24;
    let terms = weight_counts(bound)
        .into_iter()
        .map(|((w, ch), n)| (w + shift, LaurentZ::monomial(ch, BigRational::from_integer(n.into()))));
    QSeries::from_terms(terms, bound + shift)
}

/// Outcome of one calibration attempt against the monomial counts.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationAttempt {
    pub calibration: BpCalibration,
    /// Conformal weight of the first disagreement with the counts, if any below the bound.
    pub first_mismatch_weight: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BpCalibrationReport {
    pub ell: u32,
    /// Weights compared: everything below this.
    pub bound: String,
    /// The candidate agreeing with the counts the furthest; the earliest such on ties.
    pub chosen: BpCalibration,
    /// Whether the chosen candidate agrees with the counts up to the bound.
    pub matches_counts: bool,
    pub first_mismatch_weight: Option<String>,
    pub attempts: Vec<CalibrationAttempt>,
}

/// Compares each calibration with the counted character below (2ℓ+1)·3/2 and keeps the one
/// agreeing furthest, literal reading first.
pub fn calibrate_bp_character(ell: u32) -> BpCalibrationReport {
    calibrate_bp_character_below(ell, first_ideal_weight(ell))
}

pub fn calibrate_bp_character_below(ell: u32, bound: Exp) -> BpCalibrationReport {
    let shift = -bp_central_charge(ell) / 24;
    let oracle = counted_character(ell).truncate(bound + shift);
    let mut attempts = Vec::new();
    let mut best: Option<(BpCalibration, Option<Exp>)> = None;
    for cal in BpCalibration::candidates() {
        let ch = bp_character_with(ell, oracle.order(), cal);
        let mismatch = ch.first_mismatch(&oracle).map(|e| e - shift);
        attempts.push(CalibrationAttempt { calibration: cal, first_mismatch_weight: mismatch.map(|e| e.to_string()) });
        let reach = mismatch.unwrap_or(bound);
        if best.as_ref().is_none_or(|(_, m)| reach > m.unwrap_or(bound)) {
            best = Some((cal, mismatch));
        }
    }
    let (chosen, mismatch) = best.expect("candidates are nonempty");
    BpCalibrationReport {
        ell,
        bound: bound.to_string(),
        chosen,
        matches_counts: mismatch.is_none(),
        first_mismatch_weight: mismatch.map(|e| e.to_string()),
        attempts,
    }
}

/// ch W_ℓ under the calibration chosen against the counts.
pub fn bp_character(ell: u32, order: Exp) -> JacobiSeries {
    bp_character_with(ell, order, calibrate_bp_character(ell).chosen)
}

/// Σ_{w ∈ Ŵ} ε(w) q^{((n+p)(n+1)/2)|w(λ+ρ)/(n+p) − ρ/(n+1)|²} for λ = 3ω_s, p = 3, below `order`.
pub fn minimal_numerator(n: usize, s: usize, order: Exp) -> QSeries {
    let p = 3i64;
    let ni = n as i64;
    let kq = Exp::new((ni + p) * (ni + 1), 2);
    let r = rho(n);
    let lr: Vec<Exp> = fundamental(n, s).iter().zip(&r).map(|(a, b)| a * p + b).collect();
    let mut terms = Vec::new();
    for (perm, sign) in permutations(n) {
        let u = act(&perm, &lr);
        let v: Vec<Exp> = u.iter().zip(&r).map(|(a, b)| a / (ni + p) - b / (ni + 1)).collect();
        for x in lattice_points(&v, order / kq) {
            let z: Vec<Exp> = ints(&x).iter().zip(&v).map(|(a, b)| a + b).collect();
            let e = kq * norm2(&z);
            if e < order {
                terms.push((e, BigRational::from_integer(sign.into())));
            }
        }
    }
    QSeries::from_terms(terms, order)
}

/// ch 𝕃_{3Λ_s} of W(sl_n) at k + n = (n+3)/(n+1): the Weyl sum over η^{n−1}.
pub fn w_minimal_character(n: usize, s: usize, order: Exp) -> QSeries {
    let shift = Exp::new(n as i64 - 1, 24);
    let num = minimal_numerator(n, s, order + shift);
    &num * &eta_inverse_power(n - 1, order)
}
