//! Global `su(2)_k` rotations of the `u(1)` stress tensor.
//!
//! With `J⁰ → sJ⁰ + (r̄J⁺ + rJ⁻)/√2` and `T_u1 = J⁰J⁰/k`, the rotated bilinear
//! is reduced with three rules:
//! `J⁺J⁻ + J⁻J⁺ → (k+2)T_su2 - J⁰J⁰`, `J⁰J⁰ → k·T_u1`, `T_su2 → T_u1 + T_Zk`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Chirality, Side};
use crate::ness::{
    self, Coefficient, ExpectationRules, FieldExpression, FieldMap, Flavor, LocalField, NessModel, Position, StressKind,
};
use crate::scalar::{rat, Rational};
use crate::symbolic::{CRational, Coeff, Poly, RatFn, Symbol, UPoly};

/// Coefficients rational in the level `k`, polynomial in `s, r, r̄, 1/√2`.
pub type KPoly = Poly<RatFn>;

/// Level and rotation of the global `SU(2)` transformation.
///
/// `s = sin α`, `r = e^{iβ} cos α`; neutral quantities depend only on `rr̄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub k: u32,
    pub rr_bar: Rational,
    #[serde(default)]
    pub beta: f64,
}

impl RotationParams {
    pub fn new(k: u32, rr_bar: Rational, beta: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("level k must be positive".into()));
        }
        if rr_bar < rat(0, 1) || rr_bar > rat(1, 1) {
            return Err(Error::InvalidParameter(format!("rr̄ = {rr_bar} outside [0, 1]")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter("β must be finite".into()));
        }
        Ok(Self { k, rr_bar, beta })
    }

    /// `s = +√(1 - rr̄)`.
    pub fn s(&self) -> f64 {
        (1.0 - crate::Scalar::to_f64(&self.rr_bar)).max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Current {
    Zero,
    Plus,
    Minus,
}

impl Current {
    pub fn charge(self) -> i32 {
        match self {
            Current::Zero => 0,
            Current::Plus => 1,
            Current::Minus => -1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Current::Zero => "J0",
            Current::Plus => "J+",
            Current::Minus => "J-",
        }
    }
}

/// Linear combination over `{J^aJ^b, T_su2, T_u1, T_Zk}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CurrentBilinear {
    pub words: BTreeMap<(Current, Current), KPoly>,
    pub t_su2: KPoly,
    pub t_u1: KPoly,
    pub t_zk: KPoly,
}

fn add_to<K: Ord + Copy>(map: &mut BTreeMap<K, KPoly>, key: K, c: &KPoly) {
    let v = map.get(&key).map_or_else(|| c.clone(), |e| e.add(c));
    if v.is_zero() {
        map.remove(&key);
    } else {
        map.insert(key, v);
    }
}

impl CurrentBilinear {
    /// `T_u1 = J⁰J⁰ / k`.
    pub fn u1_stress() -> Self {
        let mut b = Self::default();
        b.words.insert((Current::Zero, Current::Zero), Poly::constant(RatFn::k().inverse().expect("k ≠ 0")));
        b
    }

    /// Substitute `J^a → Σ m_ab J^b` in every word, keeping operator order.
    pub fn rotate(&self, image: &BTreeMap<Current, Vec<(KPoly, Current)>>) -> Result<Self> {
        let lookup = |c: &Current| image.get(c).ok_or_else(|| Error::Unsupported(format!("no image for {}", c.name())));
        let mut out =
            Self { t_su2: self.t_su2.clone(), t_u1: self.t_u1.clone(), t_zk: self.t_zk.clone(), ..Self::default() };
        for ((a, b), c) in &self.words {
            for (ca, a2) in lookup(a)? {
                for (cb, b2) in lookup(b)? {
                    add_to(&mut out.words, (*a2, *b2), &c.mul(ca).mul(cb));
                }
            }
        }
        Ok(out)
    }

    /// Words of nonzero total charge.
    pub fn charged(&self) -> BTreeMap<(Current, Current), KPoly> {
        self.words.iter().filter(|((a, b), _)| a.charge() + b.charge() != 0).map(|(w, c)| (*w, c.clone())).collect()
    }

    /// Apply the three rewrite rules until only `T_u1`, `T_Zk` and charged
    /// words remain.
    pub fn normalize(&self) -> Result<Self> {
        let k = Poly::constant(RatFn::k());
        let k_plus_2 = Poly::constant(RatFn::k().add(&RatFn::constant(rat(2, 1))));
        let mut out = self.clone();
        let pm = out.words.remove(&(Current::Plus, Current::Minus)).unwrap_or_default();
        let mp = out.words.remove(&(Current::Minus, Current::Plus)).unwrap_or_default();
        if pm != mp {
            return Err(Error::Unsupported(format!("J+J- and J-J+ enter with different coefficients ({pm} vs {mp})")));
        }
        out.t_su2 = out.t_su2.add(&pm.mul(&k_plus_2));
        add_to(&mut out.words, (Current::Zero, Current::Zero), &pm.neg());
        let zz = out.words.remove(&(Current::Zero, Current::Zero)).unwrap_or_default();
        out.t_u1 = out.t_u1.add(&zz.mul(&k));
        let su2 = std::mem::take(&mut out.t_su2);
        out.t_u1 = out.t_u1.add(&su2);
        out.t_zk = out.t_zk.add(&su2);
        if out.words.keys().any(|(a, b)| a.charge() + b.charge() == 0) {
            return Err(Error::Unsupported("neutral words left after rewriting".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for CurrentBilinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (label, c) in [("T_su2", &self.t_su2), ("T_u1", &self.t_u1), ("T_Zk", &self.t_zk)] {
            if !c.is_zero() {
                parts.push(format!("[{c}] {label}"));
            }
        }
        for ((a, b), c) in &self.words {
            parts.push(format!("[{c}] {}{}", a.name(), b.name()));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// The symbolic rotation of `J⁰`.
pub fn rotation_image() -> BTreeMap<Current, Vec<(KPoly, Current)>> {
    let h = Poly::symbol(Symbol::InvSqrt2);
    let mut m = BTreeMap::new();
    m.insert(
        Current::Zero,
        vec![
            (Poly::symbol(Symbol::S), Current::Zero),
            (h.mul(&Poly::symbol(Symbol::Rbar)), Current::Plus),
            (h.mul(&Poly::symbol(Symbol::R)), Current::Minus),
        ],
    );
    m
}

/// Rotated and reduced `T_u1`, symbolic in `k, s, r, r̄`.
pub fn rotate_u1_stress() -> Result<CurrentBilinear> {
    CurrentBilinear::u1_stress().rotate(&rotation_image())?.normalize()
}

/// `s² + rr̄/k`.
pub fn expected_u1_coefficient() -> KPoly {
    let rr = Poly::symbol(Symbol::R).mul(&Poly::symbol(Symbol::Rbar));
    Poly::<RatFn>::symbol(Symbol::S).pow(2).add(&rr.scale(&RatFn::k().inverse().expect("k ≠ 0")))
}

/// `(k+2)/(2k) · rr̄`.
pub fn expected_zk_coefficient() -> KPoly {
    let rr = Poly::symbol(Symbol::R).mul(&Poly::symbol(Symbol::Rbar));
    let c = RatFn::new(UPoly::new(vec![rat(1, 1), rat(1, 2)]), UPoly::k()).expect("nonzero denominator");
    rr.scale(&c)
}

/// Fix `k`; the result keeps `s, r, r̄, 1/√2` symbolic.
pub fn at_level(p: &KPoly, k: u32) -> Result<Coefficient> {
    let kr = rat(k as i64, 1);
    let mut out = Poly::zero();
    for (monomial, c) in p.terms() {
        let mut term = Poly::constant(CRational::real(c.eval(&kr)?));
        for (s, e) in monomial {
            term = term.mul(&Poly::symbol(s).pow(e));
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// Value of a neutral coefficient at `(k, rr̄)`. Fails if the polynomial is
/// not a function of `rr̄` alone.
pub fn neutral_value(p: &KPoly, k: u32, rr_bar: &Rational) -> Result<Rational> {
    let kr = rat(k as i64, 1);
    let mut total = rat(0, 1);
    for (monomial, c) in p.terms() {
        let exp = |s: Symbol| monomial.iter().find(|(t, _)| *t == s).map_or(0, |(_, e)| *e);
        let a = exp(Symbol::R);
        if a != exp(Symbol::Rbar) || monomial.iter().any(|(s, _)| !matches!(s, Symbol::R | Symbol::Rbar)) {
            return Err(Error::Evaluation(format!("{p} is not a function of rr̄")));
        }
        total += c.eval(&kr)? * num_traits::pow(rr_bar.clone(), a as usize);
    }
    Ok(total)
}

/// Unit-sum rule `a·c_l + b·c_r` with `c_l = 1`, `c_r = 2(k-1)/(k+2)`;
/// equals 1 identically.
pub fn central_charge_sum(b: &CurrentBilinear) -> KPoly {
    let c_r = RatFn::new(UPoly::new(vec![rat(-2, 1), rat(2, 1)]), UPoly::new(vec![rat(2, 1), rat(1, 1)]))
        .expect("nonzero denominator");
    b.t_u1.add(&b.t_zk.scale(&c_r))
}

fn charged_label(w: &(Current, Current)) -> String {
    format!("{}{}", w.0.name(), w.1.name())
}

/// `ω₀(S[Tˡ(x) - T̄ˡ(x)])` at `x < 0` for level `k`, using the rotated `T_u1`
/// for `S[T̄ˡ]`. Symbolic in `π, Tl, Tr, s, r, r̄`.
pub fn energy_current_k(k: u32, rules: &ExpectationRules) -> Result<Coefficient> {
    if k == 0 {
        return Err(Error::InvalidParameter("level k must be positive".into()));
    }
    let rotated = rotate_u1_stress()?;
    let x = Position::at_x(-1);
    let t_l = LocalField::stress(StressKind::U1, Chirality::Chiral, Side::Left, x);
    let mut s_tbar = FieldExpression::zero();
    s_tbar.push(
        at_level(&rotated.t_u1, k)?,
        vec![LocalField::stress(StressKind::U1, Chirality::AntiChiral, Side::Left, x)],
    );
    s_tbar.push(
        at_level(&rotated.t_zk, k)?,
        vec![LocalField::stress(StressKind::Parafermion(k), Chirality::Chiral, Side::Right, x.neg())],
    );
    for (w, c) in rotated.charged() {
        s_tbar.push(
            at_level(&c, k)?,
            vec![LocalField::charged(&charged_label(&w), Chirality::AntiChiral, Side::Left, x)],
        );
    }
    let momentum = FieldExpression::field(t_l).sub(&s_tbar);
    ness::expectation_with(&momentum, rules)
}

/// `(π/12)((k-1)/k) rr̄ (Tl² - Tr²)`.
pub fn current_k_closed_form(k: u32) -> Coefficient {
    let rr = Poly::symbol(Symbol::R).mul(&Poly::symbol(Symbol::Rbar));
    let dt = Poly::symbol(Symbol::Tl).pow(2).sub(&Poly::symbol(Symbol::Tr).pow(2));
    Poly::symbol(Symbol::Pi).mul(&rr).mul(&dt).scale(&CRational::real(rat(k as i64 - 1, 12 * k as i64)))
}

/// Replace `r r̄` by a rational in a polynomial with balanced `r, r̄`.
pub fn at_rr_bar(p: &Coefficient, rr_bar: &Rational) -> Result<Coefficient> {
    let mut out = Poly::zero();
    for (monomial, c) in p.terms() {
        let exp = |s: Symbol| monomial.iter().find(|(t, _)| *t == s).map_or(0, |(_, e)| *e);
        let a = exp(Symbol::R);
        if a != exp(Symbol::Rbar) {
            return Err(Error::Evaluation(format!("{p} depends on the phase of r")));
        }
        let mut term = Poly::constant(c.clone()).scale(&CRational::real(num_traits::pow(rr_bar.clone(), a as usize)));
        for (s, e) in monomial {
            if !matches!(s, Symbol::R | Symbol::Rbar) {
                term = term.mul(&Poly::symbol(s).pow(e));
            }
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// Replace even powers of `cos α` by powers of `value`.
fn cos_squared_to(p: &Coefficient, value: &Coefficient) -> Result<Coefficient> {
    let mut out = Poly::zero();
    for (monomial, c) in p.terms() {
        let mut term = Poly::constant(c.clone());
        for (s, e) in monomial {
            term = match s {
                Symbol::Cos if e % 2 == 0 => term.mul(&value.pow(e / 2)),
                Symbol::Cos | Symbol::Sin => {
                    return Err(Error::Evaluation(format!("{p} depends on the sign of the effective angle")))
                }
                _ => term.mul(&Poly::symbol(s).pow(e)),
            };
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// The fermionized `k = 2` defect: `χ₁` reflected, `ψ` and `χ₂` rotated by an
/// angle with cosine `|r|`.
pub fn fermionized_k2_model() -> Result<NessModel> {
    let cos = Poly::symbol(Symbol::Cos);
    let sin = Poly::symbol(Symbol::Sin);
    let chi1 = FieldMap::rotation(Flavor::Chi1, Flavor::Chi1, &Poly::zero(), &Poly::one());
    let chi1_only = |m: &FieldMap| -> Result<FieldMap> {
        let mut out = FieldMap::new();
        let key = ness::FieldKey::new(Flavor::Chi1, Chirality::AntiChiral, Side::Left);
        out.set(key, m.image(&key)?.to_vec());
        Ok(out)
    };
    let theta = FieldMap::rotation(Flavor::Psi, Flavor::Chi2, &cos, &sin).union(&chi1_only(&chi1)?)?;
    let theta0 =
        FieldMap::rotation(Flavor::Psi, Flavor::Chi2, &Poly::zero(), &Poly::one()).union(&chi1_only(&chi1)?)?;
    Ok(NessModel {
        left: vec![StressKind::Majorana(Flavor::Chi1), StressKind::Majorana(Flavor::Chi2)],
        right: vec![StressKind::Majorana(Flavor::Psi)],
        theta,
        theta0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermionizationReport {
    pub symbolic: String,
    pub expected: String,
    pub matches_expected: bool,
    pub side_independent: bool,
    pub checks: Vec<FermionizationPoint>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FermionizationPoint {
    pub rr_bar: String,
    pub fermionized: String,
    pub current_k: String,
    pub agree: bool,
}

/// `J_E` of the fermionized model against `energy_current_k(2)` at the given
/// `rr̄` values.
pub fn fermionize_k2(rr_values: &[Rational]) -> Result<FermionizationReport> {
    let model = fermionized_k2_model()?;
    let right = ness::energy_current_at(&model, Side::Right)?;
    let left = ness::energy_current_at(&model, Side::Left)?;
    let rr = Poly::symbol(Symbol::R).mul(&Poly::symbol(Symbol::Rbar));
    let symbolic = cos_squared_to(&right, &rr)?;
    let expected = current_k_closed_form(2);
    let general = energy_current_k(2, &ExpectationRules::default())?;
    let mut checks = Vec::new();
    for v in rr_values {
        if *v < rat(0, 1) || *v > rat(1, 1) {
            return Err(Error::InvalidParameter(format!("rr̄ = {v} outside [0, 1]")));
        }
        let a = cos_squared_to(&right, &Poly::rational(v.clone()))?;
        let b = at_rr_bar(&general, v)?;
        checks.push(FermionizationPoint {
            rr_bar: v.to_string(),
            fermionized: a.to_string(),
            current_k: b.to_string(),
            agree: a == b,
        });
    }
    let matches_expected = symbolic == expected;
    let side_independent = right == left;
    let passed = matches_expected && side_independent && checks.iter().all(|c| c.agree);
    Ok(FermionizationReport {
        symbolic: symbolic.to_string(),
        expected: expected.to_string(),
        matches_expected,
        side_independent,
        checks,
        passed,
    })
}

/// `{k, s, rr_bar, coeff_Tu1, coeff_TZk, J_E_closed_form}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub k: u32,
    pub s: f64,
    pub rr_bar: String,
    pub coeff_tu1: String,
    pub coeff_tzk: String,
    #[serde(rename = "J_E_closed_form")]
    pub j_e_closed_form: String,
    pub symbolic_coeff_tu1: String,
    pub symbolic_coeff_tzk: String,
    pub charged_terms: usize,
    pub unit_sum_holds: bool,
    pub matches_expected: bool,
}

pub fn decomposition_report(p: &RotationParams) -> Result<DecompositionReport> {
    let b = rotate_u1_stress()?;
    let tu1 = neutral_value(&b.t_u1, p.k, &p.rr_bar)?;
    let tzk = neutral_value(&b.t_zk, p.k, &p.rr_bar)?;
    let j = energy_current_k(p.k, &ExpectationRules::default())?;
    Ok(DecompositionReport {
        k: p.k,
        s: p.s(),
        rr_bar: p.rr_bar.to_string(),
        coeff_tu1: tu1.to_string(),
        coeff_tzk: tzk.to_string(),
        j_e_closed_form: at_rr_bar(&j, &p.rr_bar)?.to_string(),
        symbolic_coeff_tu1: b.t_u1.to_string(),
        symbolic_coeff_tzk: b.t_zk.to_string(),
        charged_terms: b.charged().len(),
        unit_sum_holds: central_charge_sum(&b) == Poly::one(),
        matches_expected: b.t_u1 == expected_u1_coefficient() && b.t_zk == expected_zk_coefficient(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_matches_symbolic_coefficients() {
        let b = rotate_u1_stress().unwrap();
        assert_eq!(b.t_u1, expected_u1_coefficient());
        assert_eq!(b.t_zk, expected_zk_coefficient());
        assert!(b.t_su2.is_zero());
        assert!(!b.charged().is_empty());
        assert_eq!(b.charged().len(), b.words.len());
    }

    #[test]
    fn decomposition_at_k2_full_rotation() {
        let b = rotate_u1_stress().unwrap();
        assert_eq!(neutral_value(&b.t_u1, 2, &rat(1, 1)).unwrap(), rat(1, 2));
        assert_eq!(neutral_value(&b.t_zk, 2, &rat(1, 1)).unwrap(), rat(1, 1));
        for k in 1..6 {
            assert_eq!(neutral_value(&b.t_u1, k, &rat(0, 1)).unwrap(), rat(1, 1));
            assert_eq!(neutral_value(&b.t_zk, k, &rat(0, 1)).unwrap(), rat(0, 1));
        }
    }

    #[test]
    fn unit_sum_rule() {
        assert_eq!(central_charge_sum(&rotate_u1_stress().unwrap()), Poly::one());
    }

    #[test]
    fn asymmetric_pair_is_rejected() {
        let mut b = CurrentBilinear::default();
        b.words.insert((Current::Plus, Current::Minus), Poly::one());
        assert!(b.normalize().is_err());
    }

    #[test]
    fn current_matches_closed_form_for_all_levels() {
        for k in 1..=12 {
            let j = energy_current_k(k, &ExpectationRules::default()).unwrap();
            assert_eq!(j, current_k_closed_form(k), "k = {k}");
        }
        assert!(energy_current_k(1, &ExpectationRules::default()).unwrap().is_zero());
    }

    #[test]
    fn current_at_k4() {
        let j = energy_current_k(4, &ExpectationRules::default()).unwrap();
        let v = at_rr_bar(&j, &rat(1, 2)).unwrap();
        let v = ness::at_temperatures(&v, &rat(1, 1), &rat(0, 1));
        assert_eq!(v, Poly::symbol(Symbol::Pi).scale(&CRational::real(rat(1, 32))));
    }

    #[test]
    fn charged_override_changes_the_current() {
        let rules = ExpectationRules { charged: Some(Poly::one()) };
        let j = energy_current_k(3, &rules).unwrap();
        assert_ne!(j, current_k_closed_form(3));
    }

    #[test]
    fn fermionization_agrees() {
        let vals: Vec<Rational> = (0..=4).map(|i| rat(i, 4)).collect();
        let r = fermionize_k2(&vals).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checks[0].fermionized, "0");
    }

    #[test]
    fn params_validation() {
        assert!(RotationParams::new(0, rat(1, 2), 0.0).is_err());
        assert!(RotationParams::new(2, rat(3, 2), 0.0).is_err());
        let p = RotationParams::new(2, rat(1, 1), 0.3).unwrap();
        let r = decomposition_report(&p).unwrap();
        assert!(r.unit_sum_holds && r.matches_expected);
        assert_eq!(r.coeff_tu1, "1/2");
    }
}
