use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rat, Rational, Scalar};

/// Rotation angle of a Bogoliubov defect.
///
/// Rational points on the unit circle are kept exactly as `(cos α, sin α)`;
/// everything else is a float in radians.
#[derive(Clone, Debug, PartialEq)]
pub enum Angle {
    Exact { cos: Rational, sin: Rational },
    Float(f64),
}

impl Angle {
    pub fn exact(cos: Rational, sin: Rational) -> Result<Self> {
        if &cos * &cos + &sin * &sin != Rational::one() {
            return Err(Error::InvalidParameter(format!("({cos}, {sin}) is not on the unit circle")));
        }
        Ok(Angle::Exact { cos, sin })
    }

    pub fn radians(a: f64) -> Self {
        Angle::Float(a)
    }

    pub fn zero() -> Self {
        Angle::Exact { cos: Rational::one(), sin: Rational::zero() }
    }

    /// α = π/2, the pure reflection.
    pub fn quarter_turn() -> Self {
        Angle::Exact { cos: Rational::zero(), sin: Rational::one() }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Exact { .. })
    }

    pub fn cos_f64(&self) -> f64 {
        match self {
            Angle::Exact { cos, .. } => Scalar::to_f64(cos),
            Angle::Float(a) => a.cos(),
        }
    }

    pub fn sin_f64(&self) -> f64 {
        match self {
            Angle::Exact { sin, .. } => Scalar::to_f64(sin),
            Angle::Float(a) => a.sin(),
        }
    }

    pub fn to_radians(&self) -> f64 {
        match self {
            Angle::Exact { cos, sin } => Scalar::to_f64(sin).atan2(Scalar::to_f64(cos)),
            Angle::Float(a) => *a,
        }
    }

    /// `(cos α, sin α)` in the requested field; floats cannot be lifted to an
    /// exact field.
    pub fn cos_sin<T: Scalar>(&self) -> Result<(T, T)> {
        match self {
            Angle::Exact { cos, sin } => Ok((T::from_rational(cos), T::from_rational(sin))),
            Angle::Float(a) => match (T::from_f64(a.cos()), T::from_f64(a.sin())) {
                (Some(c), Some(s)) => Ok((c, s)),
                _ => Err(Error::Unsupported(format!("angle {a} has no exact cosine"))),
            },
        }
    }

    pub fn add(&self, other: &Angle) -> Angle {
        match (self, other) {
            (Angle::Exact { cos: c1, sin: s1 }, Angle::Exact { cos: c2, sin: s2 }) => {
                Angle::Exact { cos: c1 * c2 - s1 * s2, sin: s1 * c2 + c1 * s2 }
            }
            _ => Angle::Float(self.to_radians() + other.to_radians()),
        }
    }

    pub fn neg(&self) -> Angle {
        match self {
            Angle::Exact { cos, sin } => Angle::Exact { cos: cos.clone(), sin: -sin },
            Angle::Float(a) => Angle::Float(-a),
        }
    }

    /// Exact when `cos α = 0` or `sin α = 0`.
    pub fn is_pure_reflection(&self) -> bool {
        match self {
            Angle::Exact { cos, .. } => cos.is_zero(),
            Angle::Float(a) => a.cos().abs() <= crate::scalar::FLOAT_TOLERANCE,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact { cos, sin } => write!(f, "{cos},{sin}"),
            Angle::Float(a) => write!(f, "{a}"),
        }
    }
}

/// Accepts `"c,s"` (exact point on the circle), multiples of `pi` such as
/// `"pi/2"`, `"-pi"`, `"3pi/4"`, or radians as a decimal.
impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse angle {s:?}"));
        if let Some((c, sn)) = s.split_once(',') {
            let c = parse_rational(c).ok_or_else(bad)?;
            let sn = parse_rational(sn).ok_or_else(bad)?;
            return Angle::exact(c, sn);
        }
        if let Some(pos) = s.find("pi") {
            let (head, tail) = (s[..pos].trim().trim_end_matches('*'), s[pos + 2..].trim());
            let num = match head {
                "" | "+" => Rational::one(),
                "-" => -Rational::one(),
                h => parse_rational(h).ok_or_else(bad)?,
            };
            let den = match tail.strip_prefix('/') {
                Some(d) => parse_rational(d).ok_or_else(bad)?,
                None if tail.is_empty() => Rational::one(),
                None => return Err(bad()),
            };
            if den.is_zero() {
                return Err(bad());
            }
            let turns = num / den; // multiples of pi
            let quarters = &turns * rat(2, 1);
            if quarters.is_integer() {
                let q = quarters.to_integer().to_i64().ok_or_else(bad)?.rem_euclid(4);
                let (c, sn) = [(1, 0), (0, 1), (-1, 0), (0, -1)][q as usize];
                return Ok(Angle::Exact { cos: rat(c, 1), sin: rat(sn, 1) });
            }
            return Ok(Angle::Float(Scalar::to_f64(&turns) * std::f64::consts::PI));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if v == 0.0 {
            return Ok(Angle::zero());
        }
        Ok(Angle::Float(v))
    }
}

/// The default α grid: six exact rational points and two generic angles.
pub fn default_angle_grid() -> Vec<Angle> {
    let e = |c: i64, s: i64, d: i64| Angle::Exact { cos: rat(c, d), sin: rat(s, d) };
    vec![
        Angle::zero(),
        Angle::quarter_turn(),
        e(-1, 0, 1),
        e(3, 4, 5),
        e(5, 12, 13),
        e(8, -15, 17),
        Angle::Float(0.3),
        Angle::Float(std::f64::consts::FRAC_PI_4),
    ]
}

impl Angle {
    /// Sign-aware check that two angles describe the same rotation.
    pub fn same_rotation(&self, other: &Angle) -> bool {
        match (self, other) {
            (Angle::Exact { cos: a, sin: b }, Angle::Exact { cos: c, sin: d }) => a == c && b == d,
            _ => (self.cos_f64() - other.cos_f64()).abs() < 1e-12 && (self.sin_f64() - other.sin_f64()).abs() < 1e-12,
        }
    }
}
