//! Symbolic time evolution, S-matrix and steady-state expectations.
//!
//! Fields sit at `±x` with `x > 0`. Chiral fields move right and anti-chiral
//! fields move left; a field reaching the impurity is replaced by its image
//! under the dual defect map. In the steady state `ω_ness = ω₀ ∘ S` with
//! `S = Θ₀⁻¹Θ` followed by relocation.

mod field;

use std::collections::BTreeMap;

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use field::{Coefficient, FieldExpression, FieldKind, Flavor, LocalField, Position, Regime, StressKind};

use crate::defect::Angle;
use crate::error::{Error, Result};
use crate::fock::{Chirality, Side};
use crate::scalar::{rat, Rational};
use crate::symbolic::{CRational, Poly, Symbol};

/// A fermion field up to position and derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldKey {
    pub flavor: Flavor,
    pub chirality: Chirality,
    pub side: Side,
}

impl FieldKey {
    pub const fn new(flavor: Flavor, chirality: Chirality, side: Side) -> Self {
        Self { flavor, chirality, side }
    }

    /// Fields moving towards the impurity: `φʳ` and `φ̄ˡ`.
    pub fn is_incoming(&self) -> bool {
        matches!((self.chirality, self.side), (Chirality::Chiral, Side::Right) | (Chirality::AntiChiral, Side::Left))
    }

    fn of(f: &LocalField) -> Option<Self> {
        match f.kind {
            FieldKind::Fermion(flavor) => Some(Self::new(flavor, f.chirality, f.side)),
            _ => None,
        }
    }
}

/// A linear map on fermion fields, given by its images.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FieldMap {
    images: BTreeMap<FieldKey, Vec<(Coefficient, FieldKey)>>,
}

impl FieldMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, from: FieldKey, to: Vec<(Coefficient, FieldKey)>) {
        self.images.insert(from, to.into_iter().filter(|(c, _)| !c.is_zero()).collect());
    }

    pub fn image(&self, key: &FieldKey) -> Result<&[(Coefficient, FieldKey)]> {
        self.images.get(key).map(Vec::as_slice).ok_or_else(|| Error::Unsupported(format!("no image for {key:?}")))
    }

    /// Bogoliubov rotation between a right flavor `φ` and a left flavor `χ`:
    /// `φʳ → cχˡ + sφ̄ʳ`, `χ̄ˡ → cφ̄ʳ - sχˡ`.
    pub fn rotation(right: Flavor, left: Flavor, c: &Coefficient, s: &Coefficient) -> Self {
        let incoming_chiral = FieldKey::new(right, Chirality::Chiral, Side::Right);
        let incoming_anti = FieldKey::new(left, Chirality::AntiChiral, Side::Left);
        let out_chiral = FieldKey::new(left, Chirality::Chiral, Side::Left);
        let out_anti = FieldKey::new(right, Chirality::AntiChiral, Side::Right);
        let mut m = Self::new();
        m.set(incoming_chiral, vec![(c.clone(), out_chiral), (s.clone(), out_anti)]);
        m.set(incoming_anti, vec![(c.clone(), out_anti), (s.neg(), out_chiral)]);
        m
    }

    /// Θ(α) for the single Majorana fermion with symbolic `cos α`, `sin α`.
    pub fn fermion_symbolic() -> Self {
        Self::fermion(&Poly::symbol(Symbol::Cos), &Poly::symbol(Symbol::Sin))
    }

    pub fn fermion(c: &Coefficient, s: &Coefficient) -> Self {
        Self::rotation(Flavor::Psi, Flavor::Psi, c, s)
    }

    /// Θ(α) with exact `cos α`, `sin α`.
    pub fn fermion_angle(angle: &Angle) -> Result<Self> {
        match angle {
            Angle::Exact { cos, sin } => Ok(Self::fermion(&Poly::rational(cos.clone()), &Poly::rational(sin.clone()))),
            Angle::Float(a) => {
                Err(Error::Unsupported(format!("angle {a} has no exact cosine; use the symbolic map and evaluate")))
            }
        }
    }

    /// Θ₀: `ψʳ → ψ̄ʳ`, `ψ̄ˡ → -ψˡ`.
    pub fn fermion_reflection() -> Self {
        Self::fermion(&Poly::zero(), &Poly::one())
    }

    pub fn compose(&self, inner: &FieldMap) -> Result<FieldMap> {
        let mut out = FieldMap::new();
        for (from, img) in &inner.images {
            let mut acc: BTreeMap<FieldKey, Coefficient> = BTreeMap::new();
            for (c, mid) in img {
                for (c2, to) in self.image(mid)? {
                    let e = acc.entry(*to).or_default();
                    *e = e.add(&c.mul(c2));
                }
            }
            out.set(*from, acc.into_iter().map(|(k, c)| (c, k)).collect());
        }
        Ok(out)
    }

    /// Inverse of a monomial map (every image a single field with a constant
    /// unit coefficient), as for pure reflections.
    pub fn inverse(&self) -> Result<FieldMap> {
        let mut out = FieldMap::new();
        for (from, img) in &self.images {
            let [(c, to)] = img.as_slice() else {
                return Err(Error::Unsupported(format!("{from:?} maps to a combination; not a monomial map")));
            };
            let inv = c.as_constant().and_then(|v| v.inverse()).ok_or_else(|| {
                Error::Unsupported(format!("coefficient {c} of {from:?} is not an invertible constant"))
            })?;
            if out.images.contains_key(to) {
                return Err(Error::Unsupported("map is not injective".into()));
            }
            out.set(*to, vec![(Poly::constant(inv), *from)]);
        }
        Ok(out)
    }

    /// Maps acting on disjoint fields, merged.
    pub fn union(&self, other: &FieldMap) -> Result<FieldMap> {
        let mut out = self.clone();
        for (k, v) in &other.images {
            if out.images.insert(*k, v.clone()).is_some() {
                return Err(Error::Unsupported(format!("{k:?} mapped twice")));
            }
        }
        Ok(out)
    }

    pub fn keys(&self) -> impl Iterator<Item = &FieldKey> {
        self.images.keys()
    }
}

/// Place a target field after a shift: same chirality at `q`, opposite at `-q`
/// with `∂ → -∂`.
fn place(source: &LocalField, c: &Coefficient, to: FieldKey, q: Position) -> (Coefficient, LocalField) {
    let same = to.chirality == source.chirality;
    let mut f = LocalField::fermion(to.flavor, to.chirality, to.side, if same { q } else { q.neg() });
    f.deriv = source.deriv;
    let c = if !same && source.deriv % 2 == 1 { c.neg() } else { c.clone() };
    (c, f)
}

fn require_symmetric(f: &LocalField) -> Result<i8> {
    let sign = f.position.static_sign().filter(|_| f.position.x.abs() == num_rational::Rational64::from_integer(1));
    let sign = sign.ok_or_else(|| Error::Unsupported(format!("{f}: only fields at ±x are supported")))?;
    let expected = if f.side == Side::Right { 1 } else { -1 };
    if sign != expected {
        return Err(Error::Unsupported(format!("{f}: side does not match the sign of its position")));
    }
    Ok(sign)
}

fn evolve_field(f: &LocalField, regime: Regime, theta: &FieldMap) -> Result<FieldExpression> {
    match &f.kind {
        FieldKind::Identity => return Ok(FieldExpression::identity()),
        FieldKind::Fermion(_) => {}
        _ => return Err(Error::Unsupported(format!("evolution of {f} requires a fermion realization"))),
    }
    require_symmetric(f)?;
    let key = FieldKey::of(f).expect("fermion");
    let q = match f.chirality {
        Chirality::Chiral => f.position.shift_t(-1),
        Chirality::AntiChiral => f.position.shift_t(1),
    };
    if !key.is_incoming() {
        return Ok(FieldExpression::field(f.at(q)));
    }
    // distance still to travel before reaching the impurity: |p| - t
    let remaining = match f.chirality {
        Chirality::Chiral => f.position,
        Chirality::AntiChiral => f.position.neg(),
    }
    .shift_t(-1);
    match remaining.sign_in(regime) {
        Some(1) => Ok(FieldExpression::field(f.at(q))),
        Some(-1) => {
            let mut e = FieldExpression::zero();
            for (c, to) in theta.image(&key)? {
                let (c, g) = place(f, c, *to, q);
                e.push(c, vec![g]);
            }
            Ok(e)
        }
        _ => Err(Error::Unsupported(format!("{f} reaches the impurity exactly at time t"))),
    }
}

/// `U_t` on an expression of fields at `±x`, in the given regime.
pub fn evolve(expr: &FieldExpression, regime: Regime, theta: &FieldMap) -> Result<FieldExpression> {
    Ok(expr.expand_stress()?.map_fields(|f| evolve_field(f, regime, theta))?.normalize())
}

/// The field map `Θ₀⁻¹Θ` on incoming fields.
pub fn smatrix_map(theta: &FieldMap, theta0: &FieldMap) -> Result<FieldMap> {
    theta0.inverse()?.compose(theta)
}

fn smatrix_field(f: &LocalField, s: &FieldMap) -> Result<FieldExpression> {
    match &f.kind {
        FieldKind::Identity => return Ok(FieldExpression::identity()),
        FieldKind::Fermion(_) => {}
        _ => return Err(Error::Unsupported(format!("S-matrix action on {f} requires a fermion realization"))),
    }
    let p = f.position;
    let sign =
        p.static_sign().ok_or_else(|| Error::Unsupported(format!("{f}: S acts on time-independent positions only")))?;
    if (sign > 0) != (f.side == Side::Right) {
        return Err(Error::Unsupported(format!("{f}: side does not match the sign of its position")));
    }
    let key = FieldKey::of(f).expect("fermion");
    if !key.is_incoming() {
        return Ok(FieldExpression::field(f.clone()));
    }
    let mut e = FieldExpression::zero();
    for (c, to) in s.image(&key)? {
        let (c, g) = place(f, c, *to, p);
        e.push(c, vec![g]);
    }
    Ok(e)
}

/// `S[expr]` with `S = Θ₀⁻¹Θ` and relocation.
pub fn apply_smatrix(expr: &FieldExpression, theta: &FieldMap, theta0: &FieldMap) -> Result<FieldExpression> {
    let s = smatrix_map(theta, theta0)?;
    Ok(expr.expand_stress()?.map_fields(|f| smatrix_field(f, &s))?.normalize())
}

/// Temperatures of the two reservoirs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsWeights {
    pub t_left: f64,
    pub t_right: f64,
}

impl GibbsWeights {
    pub fn new(t_left: f64, t_right: f64) -> Result<Self> {
        if !(t_left > 0.0 && t_right > 0.0 && t_left.is_finite() && t_right.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperatures must be positive, got ({t_left}, {t_right})")));
        }
        Ok(Self { t_left, t_right })
    }
}

/// Values of the "vanishing" classes; overriding them is a negative control.
#[derive(Clone, Debug, Default)]
pub struct ExpectationRules {
    pub charged: Option<Coefficient>,
}

/// `ω₀` of an expression, symbolic in `Tl`, `Tr`.
pub fn expectation(expr: &FieldExpression) -> Result<Coefficient> {
    expectation_with(expr, &ExpectationRules::default())
}

pub fn expectation_with(expr: &FieldExpression, rules: &ExpectationRules) -> Result<Coefficient> {
    let mut total = Poly::zero();
    for (factors, c) in expr.terms() {
        total = total.add(&c.mul(&term_expectation(factors, rules)?));
    }
    Ok(total)
}

fn thermal_density(kind: &StressKind, side: Side) -> Coefficient {
    let t = match side {
        Side::Left => Symbol::Tl,
        Side::Right => Symbol::Tr,
    };
    Poly::symbol(Symbol::Pi).mul(&Poly::symbol(t).pow(2)).scale(&CRational::real(kind.central_charge() * rat(1, 12)))
}

fn term_expectation(factors: &[LocalField], rules: &ExpectationRules) -> Result<Coefficient> {
    if factors.is_empty() {
        return Ok(Poly::one());
    }
    if factors.iter().any(|f| matches!(f.kind, FieldKind::Charged(_))) {
        return Ok(match (&rules.charged, factors) {
            (Some(v), [_]) => v.clone(),
            _ => Poly::zero(),
        });
    }
    let mut counts: BTreeMap<(Flavor, Side), usize> = BTreeMap::new();
    for f in factors {
        if let FieldKind::Fermion(fl) = f.kind {
            *counts.entry((fl, f.side)).or_default() += 1;
        }
    }
    if counts.values().any(|n| n % 2 == 1) {
        return Ok(Poly::zero());
    }
    match factors {
        [f] => match &f.kind {
            FieldKind::Stress(kind) if f.deriv == 0 => Ok(thermal_density(kind, f.side)),
            FieldKind::Stress(_) => Ok(Poly::zero()),
            _ => unreachable!("fermions and charged fields handled above"),
        },
        _ => Err(Error::Evaluation(format!(
            "{} has no closed-form expectation here",
            factors.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
        ))),
    }
}

/// Field content and dual defect maps of a model.
#[derive(Clone, Debug)]
pub struct NessModel {
    pub left: Vec<StressKind>,
    pub right: Vec<StressKind>,
    pub theta: FieldMap,
    pub theta0: FieldMap,
}

impl NessModel {
    /// The Majorana fermion on both sides with the symbolic rotation Θ(α).
    pub fn fermion() -> Self {
        Self {
            left: vec![StressKind::Majorana(Flavor::Psi)],
            right: vec![StressKind::Majorana(Flavor::Psi)],
            theta: FieldMap::fermion_symbolic(),
            theta0: FieldMap::fermion_reflection(),
        }
    }

    pub fn fermion_with(theta: FieldMap) -> Self {
        Self { theta, ..Self::fermion() }
    }

    fn stress_at(&self, chirality: Chirality, position: Position, side: Side) -> FieldExpression {
        let kinds = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        let mut e = FieldExpression::zero();
        for k in kinds {
            e.push(Poly::one(), vec![LocalField::stress(*k, chirality, side, position)]);
        }
        e
    }

    /// `T(x)` or `T̄(x)` at a time-independent position, on the side its sign
    /// selects.
    pub fn physical_stress(&self, chirality: Chirality, position: Position, regime: Regime) -> Result<FieldExpression> {
        let sign =
            position.sign_in(regime).ok_or_else(|| Error::Unsupported(format!("sign of {position} is not fixed")))?;
        Ok(self.stress_at(chirality, position, if sign > 0 { Side::Right } else { Side::Left }))
    }
}

/// `J_E = ω₀(S[T(x) - T̄(x)])` evaluated at `x > 0` (`side = Right`) or at
/// `x < 0` (`side = Left`).
pub fn energy_current_at(model: &NessModel, side: Side) -> Result<Coefficient> {
    let p = Position::at_x(if side == Side::Right { 1 } else { -1 });
    let momentum = model.stress_at(Chirality::Chiral, p, side).sub(&model.stress_at(Chirality::AntiChiral, p, side));
    expectation(&apply_smatrix(&momentum, &model.theta, &model.theta0)?)
}

/// Energy current from both sides; they must agree.
pub fn energy_current(model: &NessModel) -> Result<Coefficient> {
    let right = energy_current_at(model, Side::Right)?;
    let left = energy_current_at(model, Side::Left)?;
    if right != left {
        return Err(Error::Evaluation(format!("current depends on the side: {right} vs {left}")));
    }
    Ok(right)
}

/// `(π cos²α / 24)(Tl² - Tr²)`.
pub fn fermion_current_closed_form() -> Coefficient {
    let c2 = Poly::symbol(Symbol::Cos).pow(2);
    let dt = Poly::symbol(Symbol::Tl).pow(2).sub(&Poly::symbol(Symbol::Tr).pow(2));
    Poly::symbol(Symbol::Pi).mul(&c2).mul(&dt).scale(&CRational::real(rat(1, 24)))
}

/// Substitute exact temperatures.
pub fn at_temperatures(p: &Coefficient, t_left: &Rational, t_right: &Rational) -> Coefficient {
    p.substitute(Symbol::Tl, &Poly::rational(t_left.clone())).substitute(Symbol::Tr, &Poly::rational(t_right.clone()))
}

/// Substitute `cos α`, `sin α` for an exact angle.
pub fn at_angle(p: &Coefficient, angle: &Angle) -> Result<Coefficient> {
    match angle {
        Angle::Exact { cos, sin } => Ok(p
            .substitute(Symbol::Cos, &Poly::rational(cos.clone()))
            .substitute(Symbol::Sin, &Poly::rational(sin.clone()))),
        Angle::Float(a) => Err(Error::Unsupported(format!("angle {a} is not exact"))),
    }
}

/// Numeric value with `π`, `cos α`, `sin α` and the temperatures filled in.
pub fn evaluate(p: &Coefficient, cos_alpha: f64, w: &GibbsWeights) -> Result<f64> {
    evaluate_at(p, cos_alpha, w.t_left, w.t_right)
}

/// As [`evaluate`], also accepting the zero-temperature limit on either side.
pub fn evaluate_at(p: &Coefficient, cos_alpha: f64, t_left: f64, t_right: f64) -> Result<f64> {
    for t in [t_left, t_right] {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("temperature must be finite and ≥ 0, got {t}")));
        }
    }
    let values: BTreeMap<Symbol, f64> = [
        (Symbol::Pi, std::f64::consts::PI),
        (Symbol::Cos, cos_alpha),
        (Symbol::Sin, (1.0 - cos_alpha * cos_alpha).max(0.0).sqrt()),
        (Symbol::Tl, t_left),
        (Symbol::Tr, t_right),
    ]
    .into_iter()
    .collect();
    let v = p.eval(&values)?;
    if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
        return Err(Error::Evaluation(format!("{p} is not real: {v}")));
    }
    Ok(v.re)
}

/// `σ = (1/Tr - 1/Tl) J_E`.
pub fn entropy_production(j_e: f64, w: &GibbsWeights) -> f64 {
    (1.0 / w.t_right - 1.0 / w.t_left) * j_e
}

/// `Tl·Tr·σ = (Tl - Tr) J_E` as a polynomial.
pub fn entropy_numerator(j_e: &Coefficient) -> Coefficient {
    Poly::symbol(Symbol::Tl).sub(&Poly::symbol(Symbol::Tr)).mul(j_e)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyGridReport {
    pub points: usize,
    pub min_sigma: f64,
    pub all_nonnegative: bool,
    /// σ vanishes exactly where `Tl = Tr` or `α = π/2`, nowhere else.
    pub zeros_only_at_equilibrium_or_reflection: bool,
}

/// σ over a `temps × temps × angles` grid for the fermion current.
pub fn entropy_grid(temps: &[f64], alphas: &[f64]) -> Result<EntropyGridReport> {
    let j = energy_current(&NessModel::fermion())?;
    let pts: Vec<(f64, f64, f64)> =
        temps.iter().flat_map(|&a| temps.iter().flat_map(move |&b| alphas.iter().map(move |&al| (a, b, al)))).collect();
    let sigmas: Vec<(f64, f64, f64, f64)> = pts
        .par_iter()
        .map(|&(tl, tr, al)| {
            let w = GibbsWeights::new(tl, tr)?;
            let je = evaluate(&j, al.cos(), &w)?;
            Ok((tl, tr, al, entropy_production(je, &w)))
        })
        .collect::<Result<_>>()?;
    let tol = 1e-12;
    let min_sigma = sigmas.iter().map(|s| s.3).fold(f64::INFINITY, f64::min);
    let all_nonnegative = sigmas.iter().all(|s| s.3 >= -tol);
    let zeros_ok = sigmas.iter().all(|&(tl, tr, al, s)| {
        let expected_zero = tl == tr || (al - std::f64::consts::FRAC_PI_2).abs() < 1e-12;
        (s.abs() <= tol) == expected_zero
    });
    Ok(EntropyGridReport {
        points: sigmas.len(),
        min_sigma,
        all_nonnegative,
        zeros_only_at_equilibrium_or_reflection: zeros_ok,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub regime: Regime,
    pub holds: bool,
    pub lhs: String,
    pub rhs: String,
    /// Mixed-chirality terms produced by the evolution of each stress tensor
    /// separately, all of which cancel in the sum.
    pub cross_terms_cancelled: usize,
}

/// `T(x,t) + T̄(-x,t) = T(x-t) + T̄(-x+t)` for the model's Θ.
pub fn check_global_continuity(model: &NessModel, regime: Regime) -> Result<ContinuityReport> {
    let x = Position::at_x(1);
    let t_x = model.physical_stress(Chirality::Chiral, x, regime)?;
    let tb_mx = model.physical_stress(Chirality::AntiChiral, x.neg(), regime)?;
    let ev_t = evolve(&t_x, regime, &model.theta)?;
    let ev_tb = evolve(&tb_mx, regime, &model.theta)?;
    let lhs = ev_t.add(&ev_tb);
    let rhs = model.physical_stress(Chirality::Chiral, x.shift_t(-1), regime)?.add(&model.physical_stress(
        Chirality::AntiChiral,
        x.neg().shift_t(1),
        regime,
    )?);
    let is_cross = |fields: &Vec<LocalField>| fields.len() > 1;
    let cross = ev_t.terms().filter(|(f, _)| is_cross(f)).count() + ev_tb.terms().filter(|(f, _)| is_cross(f)).count();
    let holds = lhs.sub(&rhs).normalize().is_zero();
    Ok(ContinuityReport {
        regime,
        holds,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        cross_terms_cancelled: if holds { cross } else { 0 },
    })
}

/// `{inputs, symbolic_result, numeric_result}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NessRecord {
    pub inputs: serde_json::Value,
    pub symbolic_result: String,
    pub numeric_result: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurrentReport {
    pub symbolic: String,
    pub closed_form: String,
    pub matches_closed_form: bool,
    pub side_independent: bool,
    pub at_transmission: String,
    pub at_reflection: String,
    pub equilibrium_vanishes: bool,
    pub antisymmetric: bool,
    pub records: Vec<NessRecord>,
}

/// The fermion current, its checks and numeric values at the given points.
pub fn fermion_current_report(points: &[(Angle, GibbsWeights)]) -> Result<CurrentReport> {
    let model = NessModel::fermion();
    let right = energy_current_at(&model, Side::Right)?;
    let left = energy_current_at(&model, Side::Left)?;
    let closed = fermion_current_closed_form();
    let at0 = at_angle(&right, &Angle::zero())?;
    let at_pi2 = at_angle(&right, &Angle::quarter_turn())?;
    let equal_t = right.substitute(Symbol::Tr, &Poly::symbol(Symbol::Tl));
    let mut records = Vec::new();
    for (angle, w) in points {
        let v = evaluate(&right, angle.cos_f64(), w)?;
        records.push(NessRecord {
            inputs: serde_json::json!({
                "alpha": angle.to_string(),
                "t_left": w.t_left,
                "t_right": w.t_right,
            }),
            symbolic_result: right.to_string(),
            numeric_result: Some(v),
        });
    }
    Ok(CurrentReport {
        symbolic: right.to_string(),
        closed_form: closed.to_string(),
        matches_closed_form: right == closed,
        side_independent: right == left,
        at_transmission: at0.to_string(),
        at_reflection: at_pi2.to_string(),
        equilibrium_vanishes: equal_t.is_zero(),
        antisymmetric: swap_temperatures(&right) == right.neg(),
        records,
    })
}

/// `Tl ↔ Tr`.
pub fn swap_temperatures(p: &Coefficient) -> Coefficient {
    let mut out = Poly::zero();
    for (monomial, c) in p.terms() {
        let mut term = Poly::constant(c.clone());
        for (s, e) in monomial {
            let s = match s {
                Symbol::Tl => Symbol::Tr,
                Symbol::Tr => Symbol::Tl,
                other => other,
            };
            term = term.mul(&Poly::symbol(s).pow(e));
        }
        out = out.add(&term);
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmatrixRecord {
    pub field: String,
    pub image: String,
    /// Coefficients at the requested angle, when one is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_at_alpha: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmatrixReport {
    pub alpha: Option<String>,
    pub records: Vec<SmatrixRecord>,
    /// Weights of `T̄ˡ(-x)` and `Tʳ(x)` in `S[Tʳ(x)]` add up to one.
    pub sum_rule: bool,
    /// `Θ = Θ₀` gives the identity on every probe field.
    pub reflection_is_identity: bool,
    pub passed: bool,
}

fn at_alpha(e: &FieldExpression, angle: &Angle) -> Result<String> {
    if angle.is_exact() {
        let mut out = FieldExpression::zero();
        for (f, c) in e.terms() {
            out.push(at_angle(c, angle)?, f.clone());
        }
        return Ok(out.normalize().to_string());
    }
    let values: BTreeMap<Symbol, f64> =
        [(Symbol::Cos, angle.cos_f64()), (Symbol::Sin, angle.sin_f64())].into_iter().collect();
    let parts: Vec<String> = e
        .terms()
        .map(|(f, c)| {
            let v = c.eval(&values)?;
            let body: Vec<String> = f.iter().map(ToString::to_string).collect();
            Ok(format!("[{:.12}{:+.12}i] {}", v.re, v.im, body.join(" ")))
        })
        .collect::<Result<_>>()?;
    Ok(if parts.is_empty() { "0".into() } else { parts.join(" + ") })
}

/// `S` on the single-fermion probe fields and stress tensors.
pub fn smatrix_report(angle: Option<&Angle>) -> Result<SmatrixReport> {
    let theta = FieldMap::fermion_symbolic();
    let theta0 = FieldMap::fermion_reflection();
    let x = Position::at_x(1);
    let psi = |ch, side, p| LocalField::fermion(Flavor::Psi, ch, side, p);
    let t = |ch, side, p| LocalField::stress(StressKind::Majorana(Flavor::Psi), ch, side, p);
    let probes = vec![
        psi(Chirality::Chiral, Side::Right, x),
        psi(Chirality::Chiral, Side::Right, x).derivative(1),
        psi(Chirality::AntiChiral, Side::Left, x.neg()),
        psi(Chirality::Chiral, Side::Left, x.neg()),
        psi(Chirality::AntiChiral, Side::Right, x),
        t(Chirality::Chiral, Side::Right, x),
        t(Chirality::AntiChiral, Side::Left, x.neg()),
    ];
    let mut records = Vec::new();
    let mut reflection_is_identity = true;
    for f in &probes {
        let e = FieldExpression::field(f.clone());
        let image = apply_smatrix(&e, &theta, &theta0)?;
        let trivial = apply_smatrix(&e, &theta0, &theta0)?;
        reflection_is_identity &= trivial == e.expand_stress()?.normalize();
        records.push(SmatrixRecord {
            field: f.to_string(),
            image: image.to_string(),
            image_at_alpha: angle.map(|a| at_alpha(&image, a)).transpose()?,
        });
    }
    let s_t = apply_smatrix(&FieldExpression::field(probes[5].clone()), &theta, &theta0)?;
    let weight = s_t.coefficient(&[probes[6].clone()]).add(&s_t.coefficient(&[probes[5].clone()]));
    let sum_rule = weight == Poly::one();
    Ok(SmatrixReport {
        alpha: angle.map(ToString::to_string),
        records,
        sum_rule,
        reflection_is_identity,
        passed: sum_rule && reflection_is_identity,
    })
}

#[cfg(test)]
mod tests;
