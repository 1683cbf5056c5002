//! Polynomials in a fixed set of symbols with exact coefficients.
//!
//! Reduction rules keep the representation canonical under the relations
//! the physics imposes: `sin² = 1 - cos²`, `s² = 1 - r r̄` and `(1/√2)² = 1/2`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Pi,
    Cos,
    Sin,
    Tl,
    Tr,
    S,
    R,
    Rbar,
    InvSqrt2,
}

const NSYM: usize = 9;

impl Symbol {
    pub const ALL: [Symbol; NSYM] = [
        Symbol::Pi,
        Symbol::Cos,
        Symbol::Sin,
        Symbol::Tl,
        Symbol::Tr,
        Symbol::S,
        Symbol::R,
        Symbol::Rbar,
        Symbol::InvSqrt2,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Pi => "pi",
            Symbol::Cos => "cos",
            Symbol::Sin => "sin",
            Symbol::Tl => "Tl",
            Symbol::Tr => "Tr",
            Symbol::S => "s",
            Symbol::R => "r",
            Symbol::Rbar => "rbar",
            Symbol::InvSqrt2 => "isqrt2",
        }
    }
}

/// Coefficient field of a [`Poly`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_rational(r: &Rational) -> Self;
}

/// Complex rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CRational {
    pub re: Rational,
    pub im: Rational,
}

impl CRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self { re, im: Rational::zero() }
    }

    pub fn i() -> Self {
        Self { re: Rational::zero(), im: Rational::one() }
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(Self { re: &self.re / &n, im: -&self.im / &n })
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for CRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => write!(f, "({}{}{}i)", self.re, if self.im.is_negative() { "" } else { "+" }, self.im),
        }
    }
}

impl Coeff for CRational {
    fn zero() -> Self {
        Self::real(Rational::zero())
    }
    fn one() -> Self {
        Self::real(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        Self { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
    fn neg(&self) -> Self {
        Self { re: -&self.re, im: -&self.im }
    }
    fn from_rational(r: &Rational) -> Self {
        Self::real(r.clone())
    }
}

/// Univariate polynomial in `k`, coefficients low to high, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn constant(r: Rational) -> Self {
        Self::new(vec![r])
    }

    /// The polynomial `k`.
    pub fn k() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        Self::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::new(vec![]);
        }
        let mut c = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(self.0.iter().map(|c| c * r).collect())
    }

    fn divrem(&self, d: &Self) -> (Self, Self) {
        let mut rem = self.clone();
        let mut q = vec![Rational::zero(); self.0.len().max(1)];
        while !rem.is_zero() && rem.degree() >= d.degree() {
            let shift = rem.degree() - d.degree();
            let f = rem.lead() / d.lead();
            q[shift] += &f;
            let mut sub = vec![Rational::zero(); shift];
            sub.extend(d.0.iter().map(|c| c * &f));
            rem = rem.add(&Self::new(sub).scale(&-Rational::one()));
        }
        (Self::new(q), rem)
    }

    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead();
        a.scale(&(Rational::one() / l))
    }

    pub fn eval(&self, k: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * k + c)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let a = c.abs();
            let body = match (i, a.is_one()) {
                (0, _) => a.to_string(),
                (1, true) => "k".into(),
                (1, false) => format!("{a}*k"),
                (_, true) => format!("k^{i}"),
                (_, false) => format!("{a}*k^{i}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

/// Rational function of the level `k` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: UPoly,
    den: UPoly,
}

impl RatFn {
    pub fn new(num: UPoly, den: UPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(Self { num, den: UPoly::constant(Rational::one()) });
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num.divrem(&g).0, den.divrem(&g).0);
        let l = Rational::one() / d.lead();
        n = n.scale(&l);
        d = d.scale(&l);
        Ok(Self { num: n, den: d })
    }

    pub fn k() -> Self {
        Self { num: UPoly::k(), den: UPoly::constant(Rational::one()) }
    }

    pub fn constant(r: Rational) -> Self {
        Self { num: UPoly::constant(r), den: UPoly::constant(Rational::one()) }
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(Coeff::mul(self, &o.inverse()?))
    }

    pub fn eval(&self, k: &Rational) -> Result<Rational> {
        let d = self.den.eval(k);
        if d.is_zero() {
            return Err(Error::Evaluation(format!("{self} has a pole at k = {k}")));
        }
        Ok(self.num.eval(k) / d)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == UPoly::constant(Rational::one()) {
            write!(f, "({})", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl Coeff for RatFn {
    fn zero() -> Self {
        Self::constant(Rational::zero())
    }
    fn one() -> Self {
        Self::constant(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
            .expect("product of nonzero denominators")
    }
    fn mul(&self, o: &Self) -> Self {
        Self::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("product of nonzero denominators")
    }
    fn neg(&self) -> Self {
        Self { num: self.num.scale(&-Rational::one()), den: self.den.clone() }
    }
    fn from_rational(r: &Rational) -> Self {
        Self::constant(r.clone())
    }
}

type Monomial = [u32; NSYM];

/// Sparse polynomial, always kept in reduced form.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Default for Poly<C> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> Poly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::zero();
        p.insert([0; NSYM], c);
        p
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn rational(r: Rational) -> Self {
        Self::constant(C::from_rational(&r))
    }

    pub fn int(v: i64) -> Self {
        Self::rational(rat(v, 1))
    }

    pub fn symbol(s: Symbol) -> Self {
        let mut m = [0; NSYM];
        m[s.index()] = 1;
        let mut p = Self::zero();
        p.insert(m, C::one());
        p.reduce()
    }

    fn insert(&mut self, m: Monomial, c: C) {
        let e = self.terms.entry(m).or_insert_with(C::zero);
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant coefficient if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&[0; NSYM]).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.insert(*m, v.mul(c));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut m = *ma;
                for i in 0..NSYM {
                    m[i] += mb[i];
                }
                out.insert(m, ca.mul(cb));
            }
        }
        out.reduce()
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Apply `sin² → 1 - cos²`, `s² → 1 - r r̄`, `isqrt2² → 1/2` until none fire.
    fn reduce(self) -> Self {
        let mut todo: Vec<(Monomial, C)> = self.terms.into_iter().collect();
        let mut out = Self::zero();
        while let Some((m, c)) = todo.pop() {
            if m[Symbol::InvSqrt2.index()] >= 2 {
                let mut n = m;
                n[Symbol::InvSqrt2.index()] -= 2;
                todo.push((n, c.mul(&C::from_rational(&rat(1, 2)))));
            } else if m[Symbol::Sin.index()] >= 2 {
                let mut a = m;
                a[Symbol::Sin.index()] -= 2;
                let mut b = a;
                b[Symbol::Cos.index()] += 2;
                todo.push((a, c.clone()));
                todo.push((b, c.neg()));
            } else if m[Symbol::S.index()] >= 2 {
                let mut a = m;
                a[Symbol::S.index()] -= 2;
                let mut b = a;
                b[Symbol::R.index()] += 1;
                b[Symbol::Rbar.index()] += 1;
                todo.push((a, c.clone()));
                todo.push((b, c.neg()));
            } else {
                out.insert(m, c);
            }
        }
        out
    }

    /// Replace a symbol by a polynomial.
    pub fn substitute(&self, s: Symbol, value: &Self) -> Self {
        let mut out = Self::zero();
        let i = s.index();
        for (m, c) in &self.terms {
            let mut rest = *m;
            let e = rest[i];
            rest[i] = 0;
            let mut base = Self::zero();
            base.insert(rest, c.clone());
            out = out.add(&base.mul(&value.pow(e)));
        }
        out
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|m| m[s.index()]).max().unwrap_or(0)
    }

    /// Coefficient polynomial of `s^e`.
    pub fn coefficient_of(&self, s: Symbol, e: u32) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m[s.index()] == e {
                let mut n = *m;
                n[s.index()] = 0;
                out.insert(n, c.clone());
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<(Symbol, u32)>, &C)> {
        self.terms.iter().map(|(m, c)| {
            let syms = Symbol::ALL.iter().filter(|s| m[s.index()] > 0).map(|&s| (s, m[s.index()])).collect();
            (syms, c)
        })
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut out = Poly::<D>::zero();
        for (m, c) in &self.terms {
            out.insert(*m, f(c));
        }
        out
    }
}

impl Poly<CRational> {
    pub fn complex(re: Rational, im: Rational) -> Self {
        Self::constant(CRational::new(re, im))
    }

    /// Numeric value; every symbol present must be assigned.
    pub fn eval(&self, values: &BTreeMap<Symbol, f64>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.to_complex();
            for s in Symbol::ALL {
                let e = m[s.index()];
                if e > 0 {
                    let x =
                        values.get(&s).ok_or_else(|| Error::Evaluation(format!("symbol {} has no value", s.name())))?;
                    v *= x.powi(e as i32);
                }
            }
            acc += v;
        }
        Ok(acc)
    }
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let syms: Vec<String> = Symbol::ALL
                .iter()
                .filter(|s| m[s.index()] > 0)
                .map(|s| match m[s.index()] {
                    1 => s.name().to_string(),
                    e => format!("{}^{e}", s.name()),
                })
                .collect();
            if syms.is_empty() {
                write!(f, "{c}")?;
            } else if *c == C::one() {
                write!(f, "{}", syms.join("*"))?;
            } else {
                write!(f, "{c}*{}", syms.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Poly<CRational>;

    #[test]
    fn trig_reduction() {
        let c = P::symbol(Symbol::Cos);
        let s = P::symbol(Symbol::Sin);
        let one = c.mul(&c).add(&s.mul(&s));
        assert_eq!(one, P::one());
        let s4 = s.pow(4);
        // sin⁴ = 1 - 2cos² + cos⁴
        let expect = P::one().sub(&c.pow(2).scale(&CRational::real(rat(2, 1)))).add(&c.pow(4));
        assert_eq!(s4, expect);
    }

    #[test]
    fn rotation_relations() {
        let s = Poly::<RatFn>::symbol(Symbol::S);
        let rr = Poly::<RatFn>::symbol(Symbol::R).mul(&Poly::symbol(Symbol::Rbar));
        assert_eq!(s.mul(&s).add(&rr), Poly::one());
        let h = Poly::<RatFn>::symbol(Symbol::InvSqrt2);
        assert_eq!(h.mul(&h), Poly::rational(rat(1, 2)));
    }

    #[test]
    fn substitution_and_eval() {
        let p = P::symbol(Symbol::Tl).pow(2).sub(&P::symbol(Symbol::Tr).pow(2));
        let q = p.substitute(Symbol::Tl, &P::int(2)).substitute(Symbol::Tr, &P::int(1));
        assert_eq!(q.as_constant(), Some(CRational::real(rat(3, 1))));
        let vals = [(Symbol::Tl, 3.0), (Symbol::Tr, 1.0)].into_iter().collect();
        assert_eq!(p.eval(&vals).unwrap().re, 8.0);
        assert!(P::symbol(Symbol::Pi).eval(&BTreeMap::new()).is_err());
    }

    #[test]
    fn complex_arithmetic() {
        let i = P::constant(CRational::i());
        assert_eq!(i.mul(&i), P::int(-1));
        assert_eq!(CRational::new(rat(0, 1), rat(2, 1)).inverse().unwrap(), CRational::new(rat(0, 1), rat(-1, 2)));
    }

    #[test]
    fn rational_functions_normalize() {
        let k = RatFn::k();
        let two = RatFn::constant(rat(2, 1));
        // (k+2)/(2k) * 2k/(k+2) = 1
        let kp2 = Coeff::add(&k, &two);
        let a = kp2.div(&Coeff::mul(&two, &k)).unwrap();
        let b = Coeff::mul(&two, &k).div(&kp2).unwrap();
        assert_eq!(Coeff::mul(&a, &b), RatFn::one());
        assert_eq!(a.eval(&rat(2, 1)).unwrap(), rat(1, 1));
        assert_eq!(a.to_string(), "(1/2*k+1)/(k)");
        // (k²-1)/(k-1) = k+1
        let num = UPoly::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]);
        let den = UPoly::new(vec![rat(-1, 1), rat(1, 1)]);
        assert_eq!(RatFn::new(num, den).unwrap(), Coeff::add(&k, &RatFn::one()));
        assert!(k.inverse().unwrap().eval(&rat(0, 1)).is_err());
    }

    #[test]
    fn coefficient_extraction() {
        let p = P::symbol(Symbol::Cos).pow(2).mul(&P::symbol(Symbol::Tl)).add(&P::int(3));
        assert_eq!(p.coefficient_of(Symbol::Cos, 2), P::symbol(Symbol::Tl));
        assert_eq!(p.degree_in(Symbol::Cos), 2);
        assert_eq!(p.coefficient_of(Symbol::Cos, 0), P::int(3));
    }
}
