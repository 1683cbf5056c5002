use std::collections::BTreeMap;
use std::sync::Arc;

use super::{act, FockState, StateSpace, StateVector};
use crate::error::{Error, Result};
use crate::fock::ModeIndex;
use crate::scalar::{max_abs, rat, Rational, Scalar};

/// Linear combination of mode strings plus a multiple of the identity.
///
/// A string `[m1, m2, ..., mk]` denotes the operator product `m1 m2 ... mk`;
/// `mk` acts first.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSum<T> {
    pub constant: T,
    pub terms: Vec<(T, Vec<ModeIndex>)>,
}

impl<T: Scalar> Default for ModeSum<T> {
    fn default() -> Self {
        Self { constant: T::zero(), terms: Vec::new() }
    }
}

impl<T: Scalar> ModeSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(mode: ModeIndex) -> Self {
        Self { constant: T::zero(), terms: vec![(T::one(), vec![mode])] }
    }

    pub fn push(&mut self, coeff: T, modes: Vec<ModeIndex>) {
        if !coeff.is_zero() {
            self.terms.push((coeff, modes));
        }
    }

    pub fn scaled(&self, c: &T) -> Self {
        Self {
            constant: self.constant.clone() * c.clone(),
            terms: self.terms.iter().map(|(k, m)| (k.clone() * c.clone(), m.clone())).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant + other.constant.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    /// Operator product `self · other` with strings concatenated.
    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::new();
        out.constant = self.constant.clone() * other.constant.clone();
        for (a, ma) in &self.terms {
            if !other.constant.is_zero() {
                out.push(a.clone() * other.constant.clone(), ma.clone());
            }
            for (b, mb) in &other.terms {
                let mut m = ma.clone();
                m.extend(mb.iter().copied());
                out.push(a.clone() * b.clone(), m);
            }
        }
        if !self.constant.is_zero() {
            for (b, mb) in &other.terms {
                out.push(self.constant.clone() * b.clone(), mb.clone());
            }
        }
        out
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.times(other).plus(&other.times(self))
    }

    /// Level shift (twice) and parity shift, which must agree across terms.
    pub fn grading(&self) -> Result<(i32, u8)> {
        let mut grading: Option<(i32, u8)> = if self.constant.is_zero() { None } else { Some((0, 0)) };
        for (_, modes) in &self.terms {
            let shift = -modes.iter().map(|m| m.twice()).sum::<i32>();
            let parity = (modes.iter().filter(|m| m.is_fermionic()).count() % 2) as u8;
            match grading {
                None => grading = Some((shift, parity)),
                Some(g) if g != (shift, parity) => {
                    return Err(Error::Grading(format!("mixed terms with shifts {:?} and {:?}", g, (shift, parity))))
                }
                _ => {}
            }
        }
        Ok(grading.unwrap_or((0, 0)))
    }
}

/// Level- and parity-graded sparse operator on a truncated state space.
///
/// Columns are indexed by source basis state. `level_shift` is the change in
/// level, so `L_n` has `level_shift = -n`.
#[derive(Clone, Debug)]
pub struct GradedOperator<T> {
    space: Arc<StateSpace>,
    level_shift_x2: i32,
    parity_shift: u8,
    columns: Vec<BTreeMap<usize, T>>,
    truncated: bool,
}

impl<T: Scalar> PartialEq for GradedOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self.level_shift_x2 == other.level_shift_x2
            && self.parity_shift == other.parity_shift
            && self.columns == other.columns
    }
}

impl<T: Scalar> GradedOperator<T> {
    pub fn zero(space: Arc<StateSpace>, level_shift_x2: i32, parity_shift: u8) -> Self {
        let dim = space.dim();
        Self { space, level_shift_x2, parity_shift, columns: vec![BTreeMap::new(); dim], truncated: false }
    }

    pub fn identity(space: Arc<StateSpace>) -> Self {
        let mut op = Self::zero(space, 0, 0);
        for (i, col) in op.columns.iter_mut().enumerate() {
            col.insert(i, T::one());
        }
        op
    }

    /// Build from explicit columns; the grading is validated.
    pub fn from_columns(
        space: Arc<StateSpace>,
        level_shift_x2: i32,
        parity_shift: u8,
        columns: Vec<BTreeMap<usize, T>>,
    ) -> Result<Self> {
        if columns.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "{} columns for a space of dimension {}",
                columns.len(),
                space.dim()
            )));
        }
        let op = Self { space, level_shift_x2, parity_shift, columns, truncated: false };
        op.check_grading()?;
        Ok(op)
    }

    /// Matrix of a mode sum. Each string is applied exactly in the untruncated
    /// Fock space; only the final state is projected onto the truncated basis.
    pub fn from_mode_sum(space: Arc<StateSpace>, sum: &ModeSum<T>) -> Result<Self> {
        let (shift, parity) = sum.grading()?;
        let mut op = Self::zero(space.clone(), shift, parity);
        for (j, state) in space.basis().iter().enumerate() {
            let col = &mut op.columns[j];
            if !sum.constant.is_zero() {
                col.insert(j, sum.constant.clone());
            }
            for (coeff, modes) in &sum.terms {
                let mut weight: i64 = 1;
                let mut cur: Option<FockState> = Some(state.clone());
                for m in modes.iter().rev() {
                    let Some(s) = cur.take() else { break };
                    match act(space.factors(), m, &s)? {
                        Some((w, next)) => {
                            weight *= w;
                            cur = Some(next);
                        }
                        None => break,
                    }
                }
                if let Some(s) = cur {
                    match space.index_of(&s) {
                        Some(i) => {
                            let e = col.entry(i).or_insert_with(T::zero);
                            *e = e.clone() + coeff.clone() * T::from_i64(weight);
                        }
                        None => op.truncated = true,
                    }
                }
            }
            col.retain(|_, v| !v.is_zero());
        }
        Ok(op)
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn level_shift(&self) -> Rational {
        rat(self.level_shift_x2 as i64, 2)
    }

    pub fn level_shift_x2(&self) -> i32 {
        self.level_shift_x2
    }

    pub fn parity_shift(&self) -> u8 {
        self.parity_shift
    }

    /// Whether some matrix element was dropped because it left the cutoff.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn column(&self, j: usize) -> &BTreeMap<usize, T> {
        &self.columns[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> T {
        self.columns[col].get(&row).cloned().unwrap_or_else(T::zero)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(BTreeMap::len).sum()
    }

    pub fn check_grading(&self) -> Result<()> {
        for (j, col) in self.columns.iter().enumerate() {
            let src = self.space.state(j);
            for &i in col.keys() {
                let dst = self.space.state(i);
                let dl = dst.level_x2() as i64 - src.level_x2() as i64;
                let dp = self.space.parity(dst) ^ self.space.parity(src);
                if dl != self.level_shift_x2 as i64 || dp != self.parity_shift {
                    return Err(Error::Grading(format!(
                        "entry ({i},{j}) shifts level by {dl}/2 and parity by {dp}, declared {}/2 and {}",
                        self.level_shift_x2, self.parity_shift
                    )));
                }
            }
        }
        Ok(())
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if *self.space != *other.space {
            return Err(Error::Dimension("operators live on different state spaces".into()));
        }
        Ok(())
    }

    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        let mut out = StateVector::new();
        for (&j, c) in v {
            for (&i, a) in &self.columns[j] {
                let e = out.entry(i).or_insert_with(T::zero);
                *e = e.clone() + a.clone() * c.clone();
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `self ∘ rhs` as truncated matrices.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.same_space(rhs)?;
        let columns = rhs.columns.iter().map(|col| self.apply(col)).collect();
        Ok(Self {
            space: self.space.clone(),
            level_shift_x2: self.level_shift_x2 + rhs.level_shift_x2,
            parity_shift: self.parity_shift ^ rhs.parity_shift,
            columns,
            truncated: self.truncated || rhs.truncated,
        })
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        self.same_space(other)?;
        let both_nonzero = self.nnz() > 0 && other.nnz() > 0;
        if both_nonzero && (self.level_shift_x2 != other.level_shift_x2 || self.parity_shift != other.parity_shift) {
            return Err(Error::Grading("cannot add operators of different grading".into()));
        }
        let (shift, parity) = if self.nnz() > 0 {
            (self.level_shift_x2, self.parity_shift)
        } else {
            (other.level_shift_x2, other.parity_shift)
        };
        let mut columns = self.columns.clone();
        for (col, ocol) in columns.iter_mut().zip(&other.columns) {
            for (&i, v) in ocol {
                let e = col.entry(i).or_insert_with(T::zero);
                *e = e.clone() + sign.clone() * v.clone();
            }
            col.retain(|_, v| !v.is_zero());
        }
        Ok(Self {
            space: self.space.clone(),
            level_shift_x2: shift,
            parity_shift: parity,
            columns,
            truncated: self.truncated || other.truncated,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = self.clone();
        for col in &mut out.columns {
            for v in col.values_mut() {
                *v = v.clone() * c.clone();
            }
            col.retain(|_, v| !v.is_zero());
        }
        out
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.add(&other.compose(self)?)
    }

    pub fn transpose(&self) -> Self {
        let mut columns = vec![BTreeMap::new(); self.dim()];
        for (j, col) in self.columns.iter().enumerate() {
            for (&i, v) in col {
                columns[i].insert(j, v.clone());
            }
        }
        Self {
            space: self.space.clone(),
            level_shift_x2: -self.level_shift_x2,
            parity_shift: self.parity_shift,
            columns,
            truncated: self.truncated,
        }
    }

    /// Largest absolute entry among columns of level at most `max_level_x2`.
    /// `None` if that subspace is empty.
    pub fn max_abs_on(&self, max_level_x2: i64) -> Option<T> {
        let cols: Vec<usize> = self.space.indices_up_to(max_level_x2).collect();
        if cols.is_empty() {
            return None;
        }
        Some(max_abs(cols.iter().flat_map(|&j| self.columns[j].values().cloned())))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GradedOperator<U> {
        GradedOperator {
            space: self.space.clone(),
            level_shift_x2: self.level_shift_x2,
            parity_shift: self.parity_shift,
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|(&i, v)| (i, f(v))).filter(|(_, v)| !v.is_zero()).collect())
                .collect(),
            truncated: self.truncated,
        }
    }

    /// Basis indices of one level, and the dense square block of a
    /// level-preserving operator restricted to them.
    pub fn level_block(&self, level_x2: u32) -> Result<(Vec<usize>, Vec<Vec<T>>)> {
        if self.level_shift_x2 != 0 {
            return Err(Error::Grading("level blocks need a level-preserving operator".into()));
        }
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.space.state(i).level_x2() == level_x2).collect();
        let block = idx.iter().map(|&r| idx.iter().map(|&c| self.entry(r, c)).collect()).collect();
        Ok((idx, block))
    }
}

/// Embed an operator acting on one factor into a product space, attaching
/// the Koszul sign `(-1)^{|A|·p}` with `p` the fermion parity of the factors
/// to its left.
pub fn graded_tensor<T: Scalar>(
    a: &GradedOperator<T>,
    position: usize,
    product: Arc<StateSpace>,
) -> Result<GradedOperator<T>> {
    let factor_space = a.space();
    if factor_space.factors().len() != 1 {
        return Err(Error::Dimension("graded_tensor expects an operator on a single factor".into()));
    }
    let sector = factor_space.factors()[0];
    if product.factors().get(position) != Some(&sector) {
        return Err(Error::Dimension(format!("factor {position} of the product is not {sector}")));
    }
    if factor_space.cutoff_x2() < product.cutoff_x2() {
        return Err(Error::CutoffTooSmall {
            cutoff: factor_space.cutoff().to_string(),
            reason: format!("the product space reaches level {}", product.cutoff()),
        });
    }
    let mut out = GradedOperator::zero(product.clone(), a.level_shift_x2(), a.parity_shift());
    for (j, state) in product.basis().iter().enumerate() {
        let local = FockState { parts: vec![state.parts()[position].clone()] };
        let src = factor_space.index_of(&local).ok_or_else(|| Error::CutoffTooSmall {
            cutoff: factor_space.cutoff().to_string(),
            reason: "factor state missing from the factor basis".into(),
        })?;
        let left_parity = super::parity_before(product.factors(), state, position);
        let sign = if a.parity_shift() == 1 && left_parity == 1 { -T::one() } else { T::one() };
        for (&dst, v) in a.column(src) {
            let mut parts = state.parts().to_vec();
            parts[position] = factor_space.state(dst).parts()[0].clone();
            let target = FockState { parts };
            match product.index_of(&target) {
                Some(i) => {
                    out.columns[j].insert(i, sign.clone() * v.clone());
                }
                None => out.truncated = true,
            }
        }
    }
    Ok(out)
}
