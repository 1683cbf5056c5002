//! Truncated chiral Fock spaces.
//!
//! Two species are supported: Neveu–Schwarz Majorana fermions with modes
//! `b_s`, `s ∈ ℤ + 1/2`, and zero-charge u(1) bosons with modes `a_n`,
//! `n ∈ ℤ \ {0}`. A basis state is a canonical monomial of creation modes
//! acting on the vacuum; within each factor the modes are stored by twice
//! their absolute value in strictly (fermion) or weakly (boson) descending
//! order, so `b_{-3/2} b_{-1/2}|0⟩` is `[3, 1]`.
//!
//! Product spaces hold several factors (for instance `V̄ˡ ⊗ Vʳ`). Mode strings
//! are ordered factor by factor, which fixes the Koszul sign of a fermionic
//! mode acting on a later factor.

mod cache;
mod operator;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational, Scalar};

pub use cache::{Cache, CachedOperator, CACHE_DIR_ENV, CACHE_FORMAT_VERSION};
pub use operator::{graded_tensor, GradedOperator, ModeSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Fermion,
    Boson,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chirality {
    Chiral,
    AntiChiral,
}

/// One tensor factor: a chiral (or anti-chiral) sector living on one side of
/// the impurity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub species: Species,
    pub side: Side,
    pub chirality: Chirality,
}

impl Sector {
    pub const fn new(species: Species, side: Side, chirality: Chirality) -> Self {
        Self { species, side, chirality }
    }

    /// Default sector for a stand-alone chiral space.
    pub const fn chiral(species: Species) -> Self {
        Self::new(species, Side::Right, Chirality::Chiral)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bar = match self.chirality {
            Chirality::Chiral => "",
            Chirality::AntiChiral => "bar-",
        };
        let letter = match self.species {
            Species::Fermion => "b",
            Species::Boson => "a",
        };
        let side = match self.side {
            Side::Left => "l",
            Side::Right => "r",
        };
        write!(f, "{bar}{letter}^{side}")
    }
}

/// A single mode `b_s` or `a_n` of a given sector, stored as `2s` / `2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub sector: Sector,
    twice: i32,
}

impl ModeIndex {
    /// Fermion mode `b_s` with `s = twice / 2`; `twice` must be odd.
    pub fn fermion(sector: Sector, twice: i32) -> Result<Self> {
        if sector.species != Species::Fermion {
            return Err(Error::InvalidMode(format!("{sector} is not a fermion sector")));
        }
        if twice % 2 == 0 {
            return Err(Error::InvalidMode(format!("fermion modes are half-odd integers, got {twice}/2")));
        }
        Ok(Self { sector, twice })
    }

    /// Boson mode `a_n`; the zero mode is excluded.
    pub fn boson(sector: Sector, n: i32) -> Result<Self> {
        if sector.species != Species::Boson {
            return Err(Error::InvalidMode(format!("{sector} is not a boson sector")));
        }
        if n == 0 {
            return Err(Error::InvalidMode("boson zero mode is excluded".into()));
        }
        Ok(Self { sector, twice: 2 * n })
    }

    /// Mode from an exact rational value, dispatching on the sector species.
    pub fn new(sector: Sector, value: &Rational) -> Result<Self> {
        let twice = value * BigInt::from(2);
        if !twice.is_integer() {
            return Err(Error::InvalidMode(format!("mode value {value} is not a half-integer")));
        }
        let twice: i32 = twice
            .to_integer()
            .try_into()
            .map_err(|_| Error::InvalidMode(format!("mode value {value} out of range")))?;
        match sector.species {
            Species::Fermion => Self::fermion(sector, twice),
            Species::Boson if twice % 2 == 0 => Self::boson(sector, twice / 2),
            Species::Boson => Err(Error::InvalidMode(format!("boson modes are integers, got {value}"))),
        }
    }

    pub fn twice(&self) -> i32 {
        self.twice
    }

    pub fn value(&self) -> Rational {
        rat(self.twice as i64, 2)
    }

    pub fn is_creation(&self) -> bool {
        self.twice < 0
    }

    pub fn is_fermionic(&self) -> bool {
        self.sector.species == Species::Fermion
    }

    /// The mode `b_{-s}` (hermitian conjugate under `b_s† = b_{-s}`).
    pub fn dagger(&self) -> Self {
        Self { sector: self.sector, twice: -self.twice }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sector.species {
            Species::Fermion => write!(f, "{}_{{{}/2}}", self.sector, self.twice),
            Species::Boson => write!(f, "{}_{{{}}}", self.sector, self.twice / 2),
        }
    }
}

/// Canonical monomial of creation modes on the vacuum, one list per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState {
    parts: Vec<Vec<u32>>,
}

impl FockState {
    pub fn vacuum(factors: usize) -> Self {
        Self { parts: vec![Vec::new(); factors] }
    }

    /// Build from explicit lists of twice-mode values; each list is sorted
    /// into canonical order and the accumulated fermion sign is returned.
    pub fn from_parts(factors: &[Sector], parts: Vec<Vec<u32>>) -> Result<(i64, Self)> {
        if parts.len() != factors.len() {
            return Err(Error::Dimension(format!("{} factor lists for {} factors", parts.len(), factors.len())));
        }
        let mut sign = 1;
        let mut out = Vec::with_capacity(parts.len());
        for (sector, mut list) in factors.iter().zip(parts) {
            match sector.species {
                Species::Fermion => {
                    if list.iter().any(|v| v % 2 == 0) {
                        return Err(Error::InvalidMode("fermion entries must be odd".into()));
                    }
                    // bubble sort, counting transpositions
                    for i in 0..list.len() {
                        for j in 0..list.len() - 1 - i {
                            if list[j] < list[j + 1] {
                                list.swap(j, j + 1);
                                sign = -sign;
                            } else if list[j] == list[j + 1] {
                                return Ok((0, Self { parts: vec![] }));
                            }
                        }
                    }
                    if list.windows(2).any(|w| w[0] == w[1]) {
                        return Ok((0, Self { parts: vec![] }));
                    }
                }
                Species::Boson => {
                    if list.iter().any(|v| v % 2 != 0 || *v == 0) {
                        return Err(Error::InvalidMode("boson entries must be nonzero even".into()));
                    }
                    list.sort_unstable_by(|a, b| b.cmp(a));
                }
            }
            out.push(list);
        }
        Ok((sign, Self { parts: out }))
    }

    pub fn parts(&self) -> &[Vec<u32>] {
        &self.parts
    }

    pub fn level_x2(&self) -> u32 {
        self.parts.iter().flatten().sum()
    }

    pub fn level(&self) -> Rational {
        rat(self.level_x2() as i64, 2)
    }

    pub fn is_vacuum(&self) -> bool {
        self.parts.iter().all(Vec::is_empty)
    }
}

/// Fermion parity of the modes in factors `0..upto`.
fn parity_before(factors: &[Sector], state: &FockState, upto: usize) -> u8 {
    factors[..upto]
        .iter()
        .zip(&state.parts)
        .filter(|(s, _)| s.species == Species::Fermion)
        .map(|(_, p)| (p.len() % 2) as u8)
        .fold(0, |a, b| a ^ b)
}

/// Act with one mode on a basis monomial in the untruncated Fock space.
///
/// Returns the integer weight (sign for fermions, `n·multiplicity` for
/// boson annihilators) and the resulting canonical monomial, or `None` if the
/// result vanishes.
pub(crate) fn act(factors: &[Sector], mode: &ModeIndex, state: &FockState) -> Result<Option<(i64, FockState)>> {
    let f = factors
        .iter()
        .position(|s| *s == mode.sector)
        .ok_or_else(|| Error::SpeciesMismatch { mode: mode.to_string() })?;
    let mut out = state.clone();
    let list = &mut out.parts[f];
    let r = mode.twice.unsigned_abs();
    let weight = match mode.sector.species {
        Species::Fermion => {
            let koszul = if parity_before(factors, state, f) == 1 { -1 } else { 1 };
            let p = list.iter().take_while(|&&v| v > r).count();
            let present = list.get(p) == Some(&r);
            let local = if p % 2 == 0 { 1 } else { -1 };
            if mode.is_creation() {
                if present {
                    return Ok(None);
                }
                list.insert(p, r);
            } else {
                if !present {
                    return Ok(None);
                }
                list.remove(p);
            }
            koszul * local
        }
        Species::Boson => {
            let p = list.iter().take_while(|&&v| v > r).count();
            if mode.is_creation() {
                list.insert(p, r);
                1
            } else {
                let mult = list[p..].iter().take_while(|&&v| v == r).count();
                if mult == 0 {
                    return Ok(None);
                }
                list.remove(p);
                (r / 2) as i64 * mult as i64
            }
        }
    };
    Ok(Some((weight, out)))
}

/// All canonical single-factor monomials with twice-level at most `max_x2`.
fn factor_states(species: Species, max_x2: u32) -> Vec<Vec<u32>> {
    fn rec(values: &[u32], from: usize, budget: u32, repeat: bool, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(prefix.clone());
        for (i, &v) in values.iter().enumerate().skip(from) {
            if v > budget {
                continue;
            }
            prefix.push(v);
            rec(values, if repeat { i } else { i + 1 }, budget - v, repeat, prefix, out);
            prefix.pop();
        }
    }
    let parity = match species {
        Species::Fermion => 1,
        Species::Boson => 0,
    };
    let values: Vec<u32> = (1..=max_x2).rev().filter(|v| v % 2 == parity).collect();
    let mut out = Vec::new();
    rec(&values, 0, max_x2, species == Species::Boson, &mut Vec::new(), &mut out);
    out
}

/// Truncated state space: all canonical monomials of level at most Λ.
#[derive(Clone, Debug)]
pub struct StateSpace {
    factors: Vec<Sector>,
    cutoff_x2: u32,
    basis: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl PartialEq for StateSpace {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors && self.cutoff_x2 == other.cutoff_x2
    }
}

fn cutoff_to_x2(cutoff: &Rational) -> Result<u32> {
    if cutoff < &Rational::zero() {
        return Err(Error::InvalidParameter(format!("cutoff {cutoff} is negative")));
    }
    let x2 = (cutoff * BigInt::from(2)).floor().to_integer();
    u32::try_from(x2).map_err(|_| Error::InvalidParameter(format!("cutoff {cutoff} too large")))
}

/// Basis of a single chiral factor of the given species up to level Λ.
pub fn enumerate_basis(species: Species, cutoff: &Rational) -> Result<StateSpace> {
    StateSpace::single(Sector::chiral(species), cutoff)
}

impl StateSpace {
    pub fn single(sector: Sector, cutoff: &Rational) -> Result<Self> {
        Self::product(&[sector], cutoff)
    }

    /// Graded tensor product of the given factors truncated at total level Λ.
    pub fn product(factors: &[Sector], cutoff: &Rational) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("a state space needs at least one factor".into()));
        }
        for (i, a) in factors.iter().enumerate() {
            if factors[i + 1..].contains(a) {
                return Err(Error::Dimension(format!("factor {a} appears twice")));
            }
        }
        let cutoff_x2 = cutoff_to_x2(cutoff)?;
        let per_factor: Vec<Vec<Vec<u32>>> = factors.iter().map(|s| factor_states(s.species, cutoff_x2)).collect();
        let mut basis = vec![FockState { parts: Vec::new() }];
        for states in &per_factor {
            let mut next = Vec::new();
            for partial in &basis {
                let used: u32 = partial.level_x2();
                for s in states {
                    if used + s.iter().sum::<u32>() <= cutoff_x2 {
                        let mut parts = partial.parts.clone();
                        parts.push(s.clone());
                        next.push(FockState { parts });
                    }
                }
            }
            basis = next;
        }
        basis.sort_by(|a, b| a.level_x2().cmp(&b.level_x2()).then_with(|| b.parts.cmp(&a.parts)));
        let index = basis.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(Self { factors: factors.to_vec(), cutoff_x2, basis, index })
    }

    pub fn factors(&self) -> &[Sector] {
        &self.factors
    }

    pub fn cutoff(&self) -> Rational {
        rat(self.cutoff_x2 as i64, 2)
    }

    pub fn cutoff_x2(&self) -> u32 {
        self.cutoff_x2
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FockState] {
        &self.basis
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.basis[i]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    pub fn factor_position(&self, sector: &Sector) -> Option<usize> {
        self.factors.iter().position(|s| s == sector)
    }

    /// Total fermion parity of a basis state.
    pub fn parity(&self, state: &FockState) -> u8 {
        parity_before(&self.factors, state, self.factors.len())
    }

    /// `⟨s|s⟩` under `b_s† = b_{-s}`, `a_n† = a_{-n}`. Fermion monomials are
    /// orthonormal; a boson monomial `∏ a_{-n}^{m_n}` has norm `∏ n^{m_n} m_n!`.
    pub fn norm_squared(&self, state: &FockState) -> Rational {
        let mut norm = Rational::one();
        for (sector, list) in self.factors.iter().zip(&state.parts) {
            if sector.species == Species::Boson {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for v in list {
                    *counts.entry(v / 2).or_default() += 1;
                }
                for (n, m) in counts {
                    for j in 1..=m {
                        norm *= Rational::from_integer(BigInt::from(n) * BigInt::from(j));
                    }
                }
            }
        }
        norm
    }

    /// Basis indices with level at most `max_level_x2` (the "safe" subspace).
    pub fn indices_up_to(&self, max_level_x2: i64) -> impl Iterator<Item = usize> + '_ {
        self.basis.iter().enumerate().take_while(move |(_, s)| (s.level_x2() as i64) <= max_level_x2).map(|(i, _)| i)
    }

    pub fn describe(&self, i: usize) -> String {
        let s = &self.basis[i];
        if s.is_vacuum() {
            return "|0>".into();
        }
        let mut out = String::new();
        for (sector, list) in self.factors.iter().zip(&s.parts) {
            for v in list {
                let m = ModeIndex { sector: *sector, twice: -(*v as i32) };
                out.push_str(&m.to_string());
                out.push(' ');
            }
        }
        out.push_str("|0>");
        out
    }
}

/// Sparse state vector over the basis of a [`StateSpace`].
pub type StateVector<T> = BTreeMap<usize, T>;

/// Result of [`apply_mode`]: the image vector and whether components were
/// pushed above the cutoff and dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeAction<T> {
    pub vector: StateVector<T>,
    pub truncated: bool,
}

/// Basis vector `|i⟩`.
pub fn basis_vector<T: Scalar>(i: usize) -> StateVector<T> {
    let mut v = StateVector::new();
    v.insert(i, T::one());
    v
}

/// Act with a single mode on a state vector of a truncated space.
pub fn apply_mode<T: Scalar>(space: &StateSpace, mode: &ModeIndex, v: &StateVector<T>) -> Result<ModeAction<T>> {
    let mut out = StateVector::new();
    let mut truncated = false;
    for (&i, c) in v {
        if let Some((w, s)) = act(&space.factors, mode, &space.basis[i])? {
            match space.index_of(&s) {
                Some(j) => {
                    let e = out.entry(j).or_insert_with(T::zero);
                    *e = e.clone() + c.clone() * T::from_i64(w);
                }
                None => truncated = true,
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(ModeAction { vector: out, truncated })
}
