use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Chirality, Side};
use crate::scalar::{rat, Rational};
use crate::symbolic::{CRational, Poly};

pub type Coefficient = Poly<CRational>;

/// Majorana flavors: `ψ` for the plain fermion, `χ₁, χ₂` for the fermionized
/// `U(1)` boson at `k = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Psi,
    Chi1,
    Chi2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressKind {
    Majorana(Flavor),
    U1,
    Parafermion(u32),
}

impl StressKind {
    pub fn central_charge(&self) -> Rational {
        match self {
            StressKind::Majorana(_) => rat(1, 2),
            StressKind::U1 => rat(1, 1),
            StressKind::Parafermion(k) => rat(2 * (*k as i64 - 1), *k as i64 + 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Fermion(Flavor),
    Stress(StressKind),
    /// An operator of nonzero `U(1)` charge, kept only as a label.
    Charged(String),
    Identity,
}

/// `a·x + b·t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub x: Rational64,
    pub t: Rational64,
}

impl Position {
    pub fn new(x: i64, t: i64) -> Self {
        Self { x: Rational64::from_integer(x), t: Rational64::from_integer(t) }
    }

    /// `x` or `-x`.
    pub fn at_x(sign: i64) -> Self {
        Self::new(sign, 0)
    }

    pub fn neg(self) -> Self {
        Self { x: -self.x, t: -self.t }
    }

    pub fn shift_t(self, dt: i64) -> Self {
        Self { x: self.x, t: self.t + Rational64::from_integer(dt) }
    }

    /// Sign for `x > 0`, `t > 0` with `t/x` in `(0, 1)` (`Regime::Before`) or
    /// `(1, ∞)` (`Regime::After`). `None` if the sign is not fixed.
    pub fn sign_in(&self, regime: Regime) -> Option<i8> {
        let sgn = |v: Rational64| -> i8 {
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        };
        // the value at ratio r = t/x is x·(a + b r); check both interval ends
        let (lo, hi) = match regime {
            Regime::Before => (sgn(self.x), sgn(self.x + self.t)),
            Regime::After => (sgn(self.x + self.t), sgn(self.t)),
        };
        match (lo, hi) {
            (a, b) if a == b && a != 0 => Some(a),
            (0, b) if b != 0 => Some(b),
            (a, 0) if a != 0 => Some(a),
            _ => None,
        }
    }

    /// Sign of a time-independent position.
    pub fn static_sign(&self) -> Option<i8> {
        if !self.t.is_zero() {
            return None;
        }
        if self.x.is_positive() {
            Some(1)
        } else if self.x.is_negative() {
            Some(-1)
        } else {
            None
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (c, name) in [(self.x, "x"), (self.t, "t")] {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() {
                "-"
            } else if out.is_empty() {
                ""
            } else {
                "+"
            };
            let a = c.abs();
            if a.is_one() {
                out.push_str(&format!("{sign}{name}"));
            } else {
                out.push_str(&format!("{sign}{a}{name}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

/// Time regime of the symbolic evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `0 < t < x`
    Before,
    /// `t > x > 0`
    After,
}

/// A local chiral or anti-chiral field `∂^d φ(position)` on one side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalField {
    pub kind: FieldKind,
    pub chirality: Chirality,
    pub side: Side,
    pub deriv: u32,
    pub position: Position,
}

impl LocalField {
    pub fn fermion(flavor: Flavor, chirality: Chirality, side: Side, position: Position) -> Self {
        Self { kind: FieldKind::Fermion(flavor), chirality, side, deriv: 0, position }
    }

    pub fn stress(kind: StressKind, chirality: Chirality, side: Side, position: Position) -> Self {
        Self { kind: FieldKind::Stress(kind), chirality, side, deriv: 0, position }
    }

    pub fn charged(label: &str, chirality: Chirality, side: Side, position: Position) -> Self {
        Self { kind: FieldKind::Charged(label.into()), chirality, side, deriv: 0, position }
    }

    pub fn derivative(mut self, d: u32) -> Self {
        self.deriv += d;
        self
    }

    pub fn is_fermion(&self) -> bool {
        matches!(self.kind, FieldKind::Fermion(_))
    }

    pub fn at(&self, position: Position) -> Self {
        Self { position, ..self.clone() }
    }

    /// Canonical ordering: position, then field, then derivative descending.
    fn order_key(&self) -> (Position, &FieldKind, Side, Chirality, std::cmp::Reverse<u32>) {
        (self.position, &self.kind, self.side, self.chirality, std::cmp::Reverse(self.deriv))
    }
}

impl fmt::Display for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kind {
            FieldKind::Fermion(Flavor::Psi) => "psi".to_string(),
            FieldKind::Fermion(Flavor::Chi1) => "chi1".to_string(),
            FieldKind::Fermion(Flavor::Chi2) => "chi2".to_string(),
            FieldKind::Stress(StressKind::Majorana(Flavor::Psi)) => "T".to_string(),
            FieldKind::Stress(StressKind::Majorana(Flavor::Chi1)) => "T[chi1]".to_string(),
            FieldKind::Stress(StressKind::Majorana(Flavor::Chi2)) => "T[chi2]".to_string(),
            FieldKind::Stress(StressKind::U1) => "T[u1]".to_string(),
            FieldKind::Stress(StressKind::Parafermion(k)) => format!("T[Z{k}]"),
            FieldKind::Charged(l) => format!("Q[{l}]"),
            FieldKind::Identity => return write!(f, "1"),
        };
        let bar = if self.chirality == Chirality::AntiChiral { "bar" } else { "" };
        let side = if self.side == Side::Left { "l" } else { "r" };
        let d = "d".repeat(self.deriv as usize);
        write!(f, "{d}{name}{bar}^{side}({})", self.position)
    }
}

/// Formal linear combination of ordered products of local fields.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FieldExpression {
    terms: BTreeMap<Vec<LocalField>, Coefficient>,
}

impl FieldExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::scalar(Poly::one())
    }

    pub fn scalar(c: Coefficient) -> Self {
        let mut e = Self::zero();
        e.push(c, Vec::new());
        e
    }

    pub fn field(f: LocalField) -> Self {
        let mut e = Self::zero();
        e.push(Poly::one(), vec![f]);
        e
    }

    pub fn product(fields: Vec<LocalField>) -> Self {
        let mut e = Self::zero();
        e.push(Poly::one(), fields);
        e
    }

    pub fn push(&mut self, c: Coefficient, factors: Vec<LocalField>) {
        let factors: Vec<LocalField> = factors.into_iter().filter(|f| f.kind != FieldKind::Identity).collect();
        let e = self.terms.entry(factors.clone()).or_default();
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&factors);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<LocalField>, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (f, c) in &o.terms {
            out.push(c.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Poly::int(-1)))
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        let mut out = Self::zero();
        for (f, v) in &self.terms {
            out.push(v.mul(c), f.clone());
        }
        out
    }

    /// Ordered product `self · other`.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (fa, ca) in &self.terms {
            for (fb, cb) in &o.terms {
                let mut f = fa.clone();
                f.extend(fb.iter().cloned());
                out.push(ca.mul(cb), f);
            }
        }
        out
    }

    /// Replace every factor by an expression, keeping the factor order.
    pub fn map_fields(&self, mut image: impl FnMut(&LocalField) -> Result<FieldExpression>) -> Result<Self> {
        let mut out = Self::zero();
        for (factors, c) in &self.terms {
            let mut acc = Self::scalar(c.clone());
            for f in factors {
                acc = acc.mul(&image(f)?);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// The coefficient of a single product of fields.
    pub fn coefficient(&self, factors: &[LocalField]) -> Coefficient {
        self.terms.get(factors).cloned().unwrap_or_default()
    }

    /// Majorana stress tensors written as fermion bilinears:
    /// `T = -(i/2) ∂ψ ψ`, `T̄ = (i/2) ∂ψ̄ ψ̄`.
    pub fn expand_stress(&self) -> Result<Self> {
        self.map_fields(|f| match &f.kind {
            FieldKind::Stress(StressKind::Majorana(flavor)) => {
                if f.deriv != 0 {
                    return Err(Error::Unsupported(format!("derivative of a stress tensor: {f}")));
                }
                let psi = LocalField::fermion(*flavor, f.chirality, f.side, f.position);
                let half_i = match f.chirality {
                    Chirality::Chiral => CRational::new(rat(0, 1), rat(-1, 2)),
                    Chirality::AntiChiral => CRational::new(rat(0, 1), rat(1, 2)),
                };
                let mut e = FieldExpression::zero();
                e.push(Poly::constant(half_i), vec![psi.clone().derivative(1), psi]);
                Ok(e)
            }
            _ => Ok(FieldExpression::field(f.clone())),
        })
    }

    /// Canonical form: fermions sorted with signs, equal fermions at one
    /// point cancel, and `∂ψ ψ` at one point recombines into the stress tensor.
    pub fn normalize(&self) -> Self {
        let mut out = Self::zero();
        'terms: for (factors, c) in &self.terms {
            let mut f = factors.clone();
            let mut sign = 1i64;
            // insertion sort, counting fermion transpositions
            for i in 1..f.len() {
                let mut j = i;
                while j > 0 && f[j - 1].order_key() > f[j].order_key() {
                    if f[j - 1].is_fermion() && f[j].is_fermion() {
                        sign = -sign;
                    }
                    f.swap(j - 1, j);
                    j -= 1;
                }
            }
            let mut coeff = c.scale(&CRational::real(rat(sign, 1)));
            let mut merged: Vec<LocalField> = Vec::with_capacity(f.len());
            let mut i = 0;
            while i < f.len() {
                if i + 1 < f.len() && f[i].is_fermion() && f[i] == f[i + 1] {
                    continue 'terms;
                }
                if i + 1 < f.len() {
                    let (a, b) = (&f[i], &f[i + 1]);
                    if let FieldKind::Fermion(flavor) = a.kind {
                        if a.kind == b.kind
                            && a.side == b.side
                            && a.chirality == b.chirality
                            && a.position == b.position
                            && a.deriv == 1
                            && b.deriv == 0
                        {
                            let factor = match a.chirality {
                                Chirality::Chiral => CRational::new(rat(0, 1), rat(2, 1)),
                                Chirality::AntiChiral => CRational::new(rat(0, 1), rat(-2, 1)),
                            };
                            coeff = coeff.scale(&factor);
                            merged.push(LocalField::stress(
                                StressKind::Majorana(flavor),
                                a.chirality,
                                a.side,
                                a.position,
                            ));
                            i += 2;
                            continue;
                        }
                    }
                }
                merged.push(f[i].clone());
                i += 1;
            }
            out.push(coeff, merged);
        }
        out
    }
}

impl fmt::Display for FieldExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(fields, c)| {
                let body = if fields.is_empty() {
                    "1".to_string()
                } else {
                    fields.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
                };
                format!("[{c}] {body}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
