//! Dual defect maps for the free Majorana fermion.
//!
//! Θ is realized on states through the operator-state correspondence: it fixes
//! the vacuum and sends each creation mode to its image under the 2×2 mode
//! matrix, so a monomial goes to the product of the images.
//!
//! The incoming space `V̄ˡ ⊗ Vʳ` is the product space with factors
//! `[b̄ˡ, bʳ]`. The outgoing space `Vˡ ⊗ V̄ʳ` is identified with it mode by
//! mode, chirality preserving: `bˡ` lives in the `bʳ` slot and `b̄ʳ` in the
//! `b̄ˡ` slot. With this identification Θ(α) is a rotation acting on each
//! mode doublet, so Θ(0) is the identity matrix and Θ(α)Θ(β) = Θ(α+β).

mod angle;
pub mod phases;

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use angle::{default_angle_grid, Angle};
pub use phases::{solve_reflection_phases, FusionRing, Phase, PhaseReport, ReflectionSpec};

use crate::error::{Error, Result};
use crate::fock::{
    apply_mode, basis_vector, Chirality, GradedOperator, ModeIndex, ModeSum, Sector, Side, Species, StateSpace,
    StateVector,
};
use crate::scalar::{max_abs, rat, Measured, Rational, Scalar};
use crate::virasoro::build_virasoro_on;

/// Slot 0: incoming `b̄ˡ`, outgoing `b̄ʳ`.
pub const ANTI_CHIRAL_SLOT: Sector = Sector::new(Species::Fermion, Side::Left, Chirality::AntiChiral);
/// Slot 1: incoming `bʳ`, outgoing `bˡ`.
pub const CHIRAL_SLOT: Sector = Sector::new(Species::Fermion, Side::Right, Chirality::Chiral);

/// The two-factor fermion space on which every Θ acts.
pub fn defect_space(cutoff: &Rational) -> Result<Arc<StateSpace>> {
    if cutoff < &rat(1, 2) {
        return Err(Error::CutoffTooSmall {
            cutoff: cutoff.to_string(),
            reason: "the defect space needs at least one mode".into(),
        });
    }
    Ok(Arc::new(StateSpace::product(&[ANTI_CHIRAL_SLOT, CHIRAL_SLOT], cutoff)?))
}

/// Rotation `[[cos α, sin α], [-sin α, cos α]]` on `(bʳ_s, b̄ˡ_s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovSpec {
    pub angle: Angle,
}

impl BogoliubovSpec {
    pub fn new(angle: Angle) -> Self {
        Self { angle }
    }

    pub fn mode_matrix<T: Scalar>(&self) -> Result<[[T; 2]; 2]> {
        let (c, s) = self.angle.cos_sin::<T>()?;
        Ok([[c.clone(), s.clone()], [-s, c]])
    }
}

/// Orthogonality defect `max |MMᵀ - 1|` and determinant of a 2×2 matrix.
pub fn orthogonality<T: Scalar>(m: &[[T; 2]; 2]) -> (T, T) {
    let dot = |a: &[T; 2], b: &[T; 2]| a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone();
    let dev = max_abs([dot(&m[0], &m[0]) - T::one(), dot(&m[1], &m[1]) - T::one(), dot(&m[0], &m[1])]);
    let det = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
    (dev, det)
}

/// Where a realization's mode matrix came from.
#[derive(Clone, Debug, PartialEq)]
pub enum DefectSource {
    Bogoliubov(BogoliubovSpec),
    /// Pure reflection of the fermion with phases `ζˡ_ψ, ζʳ_ψ = ±1`.
    Reflection {
        zeta_left: i8,
        zeta_right: i8,
    },
    /// `M(α)(1 + εK)` with `K` the off-diagonal swap; not orthogonal.
    Skewed {
        base: BogoliubovSpec,
        epsilon: Rational,
    },
}

/// A truncated matrix realization of Θ.
#[derive(Clone, Debug)]
pub struct DefectRealization<T> {
    source: DefectSource,
    mode_matrix: [[T; 2]; 2],
    theta: GradedOperator<T>,
}

impl<T: Scalar> DefectRealization<T> {
    /// Θ for a general mode matrix. Row 0 is the image of `bʳ`, row 1 the
    /// image of `b̄ˡ`, each written on `(bˡ, b̄ʳ)`.
    pub fn from_matrix(source: DefectSource, m: [[T; 2]; 2], cutoff: &Rational) -> Result<Self> {
        let space = defect_space(cutoff)?;
        let mut columns = Vec::with_capacity(space.dim());
        for j in 0..space.dim() {
            let state = space.state(j);
            // The basis monomial is (slot-0 modes)(slot-1 modes)|0⟩ with each
            // list in descending order; apply images right to left.
            let mut creation = Vec::new();
            for (sector, list) in space.factors().iter().zip(state.parts()) {
                for &v in list {
                    creation.push(ModeIndex::fermion(*sector, -(v as i32))?);
                }
            }
            let mut vec: StateVector<T> = basis_vector(space.vacuum_index());
            for mode in creation.iter().rev() {
                vec = apply_image(&space, &m, mode, &vec)?;
            }
            columns.push(vec);
        }
        let theta = GradedOperator::from_columns(space, 0, 0, columns)?;
        Ok(Self { source, mode_matrix: m, theta })
    }

    pub fn bogoliubov(angle: &Angle, cutoff: &Rational) -> Result<Self> {
        let spec = BogoliubovSpec::new(angle.clone());
        let m = spec.mode_matrix::<T>()?;
        Self::from_matrix(DefectSource::Bogoliubov(spec), m, cutoff)
    }

    pub fn reflection(zeta_left: i8, zeta_right: i8, cutoff: &Rational) -> Result<Self> {
        if zeta_left.abs() != 1 || zeta_right.abs() != 1 {
            return Err(Error::InvalidParameter("a self-conjugate fermion only admits reflection phases ±1".into()));
        }
        let zl = T::from_i64(zeta_left as i64);
        let zr = T::from_i64(zeta_right as i64);
        let m = [[T::zero(), zr], [-zl, T::zero()]];
        Self::from_matrix(DefectSource::Reflection { zeta_left, zeta_right }, m, cutoff)
    }

    /// Negative control: the rotation by α followed by a non-orthogonal skew.
    pub fn skewed(angle: &Angle, epsilon: &Rational, cutoff: &Rational) -> Result<Self> {
        let base = BogoliubovSpec::new(angle.clone());
        let r = base.mode_matrix::<T>()?;
        let e = T::from_rational(epsilon);
        let m = [
            [r[0][0].clone() + e.clone() * r[0][1].clone(), r[0][1].clone() + e.clone() * r[0][0].clone()],
            [r[1][0].clone() + e.clone() * r[1][1].clone(), r[1][1].clone() + e * r[1][0].clone()],
        ];
        Self::from_matrix(DefectSource::Skewed { base, epsilon: epsilon.clone() }, m, cutoff)
    }

    pub fn source(&self) -> &DefectSource {
        &self.source
    }

    pub fn mode_matrix(&self) -> &[[T; 2]; 2] {
        &self.mode_matrix
    }

    pub fn theta(&self) -> &GradedOperator<T> {
        &self.theta
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        self.theta.space()
    }

    /// `Θ b Θ⁻¹` for any mode of either slot.
    pub fn mode_image(&self, mode: &ModeIndex) -> Result<ModeSum<T>> {
        let twice = mode.twice();
        let (row, _) = slot_row(mode)?;
        let m = &self.mode_matrix;
        let mut sum = ModeSum::new();
        sum.push(m[row][0].clone(), vec![ModeIndex::fermion(CHIRAL_SLOT, twice)?]);
        sum.push(m[row][1].clone(), vec![ModeIndex::fermion(ANTI_CHIRAL_SLOT, twice)?]);
        Ok(sum)
    }

    /// Determinant of Θ on each level subspace, keyed by twice the level.
    pub fn level_determinants(&self) -> Result<Vec<(u32, T)>> {
        levels(self.space())
            .into_iter()
            .map(|l| {
                let (_, block) = self.theta.level_block(l)?;
                Ok((l, invert(block)?.0))
            })
            .collect()
    }

    /// Θ⁻¹ assembled from the inverses of the level blocks.
    pub fn inverse(&self) -> Result<GradedOperator<T>> {
        let space = self.space().clone();
        let mut columns = vec![std::collections::BTreeMap::new(); space.dim()];
        for l in levels(&space) {
            let (idx, block) = self.theta.level_block(l)?;
            let (_, inv) = invert(block)?;
            for (c, &col) in idx.iter().enumerate() {
                for (r, &row) in idx.iter().enumerate() {
                    if !inv[r][c].is_zero() {
                        columns[col].insert(row, inv[r][c].clone());
                    }
                }
            }
        }
        GradedOperator::from_columns(space, 0, 0, columns)
    }
}

/// Row of the mode matrix for a mode, and whether it sits in slot 1.
fn slot_row(mode: &ModeIndex) -> Result<(usize, bool)> {
    match mode.sector {
        s if s == CHIRAL_SLOT => Ok((0, true)),
        s if s == ANTI_CHIRAL_SLOT => Ok((1, false)),
        _ => Err(Error::SpeciesMismatch { mode: mode.to_string() }),
    }
}

fn apply_image<T: Scalar>(
    space: &StateSpace,
    m: &[[T; 2]; 2],
    mode: &ModeIndex,
    v: &StateVector<T>,
) -> Result<StateVector<T>> {
    let (row, _) = slot_row(mode)?;
    let mut out = StateVector::new();
    let targets = [CHIRAL_SLOT, ANTI_CHIRAL_SLOT];
    for (k, sector) in targets.iter().enumerate() {
        let coeff = &m[row][k];
        if coeff.is_zero() {
            continue;
        }
        let img = apply_mode(space, &ModeIndex::fermion(*sector, mode.twice())?, v)?;
        for (i, x) in img.vector {
            let e = out.entry(i).or_insert_with(T::zero);
            *e = e.clone() + coeff.clone() * x;
        }
    }
    out.retain(|_, x| !x.is_zero());
    Ok(out)
}

fn levels(space: &StateSpace) -> Vec<u32> {
    let mut ls: Vec<u32> = space.basis().iter().map(|s| s.level_x2()).collect();
    ls.dedup();
    ls
}

/// Determinant and inverse by Gaussian elimination with partial pivoting.
fn invert<T: Scalar>(mut a: Vec<Vec<T>>) -> Result<(T, Vec<Vec<T>>)> {
    let n = a.len();
    let mut inv: Vec<Vec<T>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if a[pivot][col].negligible() {
            return Err(Error::Singular(format!("level block of size {n} has rank below {n}")));
        }
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let (ac, ic) = (a[col][j].clone(), inv[col][j].clone());
                a[r][j] = a[r][j].clone() - f.clone() * ac;
                inv[r][j] = inv[r][j].clone() - f.clone() * ic;
            }
        }
    }
    Ok((det, inv))
}

/// Total `L_n` on both slots, converted to the realization's field.
fn total_virasoro<T: Scalar>(space: &Arc<StateSpace>, n: i32) -> Result<GradedOperator<T>> {
    let a = build_virasoro_on(space, ANTI_CHIRAL_SLOT, n)?;
    let b = build_virasoro_on(space, CHIRAL_SLOT, n)?;
    Ok(a.add(&b)?.map(T::from_rational))
}

/// Largest entry of `Θ(L̄ˡ_n + Lʳ_n) - (Lˡ_n + L̄ʳ_n)Θ` on states of level at
/// most `Λ - |n|`.
pub fn check_intertwining<T: Scalar>(d: &DefectRealization<T>, n: i32) -> Result<T> {
    let space = d.space();
    let l = total_virasoro::<T>(space, n)?;
    let diff = d.theta.compose(&l)?.sub(&l.compose(&d.theta)?)?;
    let safe = space.cutoff_x2() as i64 - 2 * n.abs() as i64;
    diff.max_abs_on(safe).ok_or_else(|| Error::CutoffTooSmall {
        cutoff: space.cutoff().to_string(),
        reason: format!("no states of level <= Λ - {}", n.abs()),
    })
}

/// Θ applied to the two stress tensors, decomposed on the outgoing ones.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StressImage {
    /// Coefficient of `Tˡ` (chiral slot).
    pub chiral: Measured,
    /// Coefficient of `T̄ʳ` (anti-chiral slot).
    pub anti_chiral: Measured,
    /// Largest component outside the span of the two stress tensors.
    pub residual: Measured,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentumReport {
    pub holds: bool,
    pub deviation: Measured,
    /// Image of `Tʳ`.
    pub image_of_t: StressImage,
    /// Image of `T̄ˡ`.
    pub image_of_t_bar: StressImage,
}

/// Checks `Θ[T̄ˡ + Tʳ] = Tˡ + T̄ʳ` on the states `L_{-2}|0⟩`.
pub fn check_momentum_continuity<T: Scalar>(d: &DefectRealization<T>) -> Result<MomentumReport> {
    let space = d.space();
    if space.cutoff_x2() < 4 {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff().to_string(),
            reason: "the stress tensor lives at level 2".into(),
        });
    }
    let vac: StateVector<T> = basis_vector(space.vacuum_index());
    let stress =
        |slot| -> Result<StateVector<T>> { Ok(build_virasoro_on(space, slot, -2)?.map(T::from_rational).apply(&vac)) };
    let t_chiral = stress(CHIRAL_SLOT)?;
    let t_anti = stress(ANTI_CHIRAL_SLOT)?;
    let decompose = |v: &StateVector<T>| -> StressImage {
        let a = projection(v, &t_chiral);
        let b = projection(v, &t_anti);
        let mut rest = v.clone();
        axpy(&mut rest, &-a.clone(), &t_chiral);
        axpy(&mut rest, &-b.clone(), &t_anti);
        StressImage {
            chiral: Measured::of(&a),
            anti_chiral: Measured::of(&b),
            residual: Measured::of(&max_abs(rest.into_values())),
        }
    };
    let img_t = d.theta.apply(&t_chiral);
    let img_tb = d.theta.apply(&t_anti);
    let mut total = img_t.clone();
    axpy(&mut total, &T::one(), &img_tb);
    axpy(&mut total, &-T::one(), &t_chiral);
    axpy(&mut total, &-T::one(), &t_anti);
    let dev = max_abs(total.into_values());
    Ok(MomentumReport {
        holds: dev.negligible(),
        deviation: Measured::of(&dev),
        image_of_t: decompose(&img_t),
        image_of_t_bar: decompose(&img_tb),
    })
}

fn dot<T: Scalar>(a: &StateVector<T>, b: &StateVector<T>) -> T {
    a.iter().filter_map(|(i, x)| b.get(i).map(|y| x.clone() * y.clone())).fold(T::zero(), |acc, v| acc + v)
}

/// Coefficient of `b` in `v` for the orthonormal fermion monomial basis.
fn projection<T: Scalar>(v: &StateVector<T>, b: &StateVector<T>) -> T {
    dot(v, b) / dot(b, b)
}

fn axpy<T: Scalar>(y: &mut StateVector<T>, a: &T, x: &StateVector<T>) {
    for (&i, v) in x {
        let e = y.entry(i).or_insert_with(T::zero);
        *e = e.clone() + a.clone() * v.clone();
    }
    y.retain(|_, v| !v.is_zero());
}

/// All modes of both slots with `|s| <= Λ`.
fn defect_modes(cutoff_x2: u32) -> Result<Vec<ModeIndex>> {
    let mut out = Vec::new();
    for slot in [CHIRAL_SLOT, ANTI_CHIRAL_SLOT] {
        for t in (1..=cutoff_x2 as i32).step_by(2) {
            out.push(ModeIndex::fermion(slot, -t)?);
            out.push(ModeIndex::fermion(slot, t)?);
        }
    }
    Ok(out)
}

/// Largest deviation of `{ΘaΘ⁻¹, ΘbΘ⁻¹}` from `{a, b} = δ_{a,b†}` over all mode
/// pairs, each compared on states of level at most `Λ - |s_a| - |s_b|`.
pub fn check_ope_preservation<T: Scalar>(d: &DefectRealization<T>) -> Result<T> {
    let space = d.space();
    let modes = defect_modes(space.cutoff_x2())?;
    let pairs: Vec<(usize, usize)> = (0..modes.len())
        .flat_map(|i| (i..modes.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| modes[i].twice().abs() + modes[j].twice().abs() <= space.cutoff_x2() as i32)
        .collect();
    let devs: Vec<T> =
        pairs.par_iter().map(|&(i, j)| anticommutator_deviation(d, &modes[i], &modes[j])).collect::<Result<_>>()?;
    Ok(max_abs(devs))
}

/// Deviation for one pair of modes.
pub fn anticommutator_deviation<T: Scalar>(d: &DefectRealization<T>, a: &ModeIndex, b: &ModeIndex) -> Result<T> {
    let space = d.space();
    let sum = d.mode_image(a)?.anticommutator(&d.mode_image(b)?);
    let op = GradedOperator::from_mode_sum(space.clone(), &sum)?;
    let mut expected = GradedOperator::zero(space.clone(), op.level_shift_x2(), op.parity_shift());
    if a.sector == b.sector && a.twice() == -b.twice() {
        expected = GradedOperator::identity(space.clone());
    }
    let safe = space.cutoff_x2() as i64 - (a.twice().abs() + b.twice().abs()) as i64;
    Ok(op.sub(&expected)?.max_abs_on(safe).unwrap_or_else(T::zero))
}

/// Θ must preserve the identity field: the vacuum is fixed and the identity
/// component of the image of `ψ(x)ψ(y)`, `⟨0|{ΘbΘ⁻¹, Θb†Θ⁻¹}|0⟩`, stays 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub vacuum_fixed: bool,
    pub identity_coefficient_deviation: Measured,
    pub holds: bool,
}

pub fn check_identity_preservation<T: Scalar>(d: &DefectRealization<T>) -> Result<IdentityReport> {
    let space = d.space();
    let vac = space.vacuum_index();
    let col = d.theta.column(vac);
    let vacuum_fixed = col.len() == 1 && col.get(&vac).is_some_and(|v| (v.clone() - T::one()).negligible());
    let mut devs = Vec::new();
    for slot in [CHIRAL_SLOT, ANTI_CHIRAL_SLOT] {
        for t in (1..=space.cutoff_x2() as i32).step_by(2) {
            let a = d.mode_image(&ModeIndex::fermion(slot, t)?)?;
            let b = d.mode_image(&ModeIndex::fermion(slot, -t)?)?;
            let op = GradedOperator::from_mode_sum(space.clone(), &a.anticommutator(&b))?;
            devs.push(op.entry(vac, vac) - T::one());
        }
    }
    let dev = max_abs(devs);
    Ok(IdentityReport {
        vacuum_fixed,
        holds: vacuum_fixed && dev.negligible(),
        identity_coefficient_deviation: Measured::of(&dev),
    })
}

/// `max |first ∘ second - expected|` over the whole truncated space (all three
/// are level preserving).
pub fn composition_deviation<T: Scalar>(
    first: &DefectRealization<T>,
    second: &DefectRealization<T>,
    expected: &DefectRealization<T>,
) -> Result<T> {
    let prod = first.theta.compose(&second.theta)?;
    Ok(prod.sub(&expected.theta)?.max_abs_on(prod.space().cutoff_x2() as i64).unwrap_or_else(T::zero))
}

/// `max |Θ(α)⁻¹ - Θ(-α)|`.
pub fn inverse_deviation<T: Scalar>(angle: &Angle, cutoff: &Rational) -> Result<T> {
    let d = DefectRealization::<T>::bogoliubov(angle, cutoff)?;
    let neg = DefectRealization::<T>::bogoliubov(&angle.neg(), cutoff)?;
    let inv = d.inverse()?;
    Ok(inv.sub(&neg.theta)?.max_abs_on(cutoff_x2_of(&d)).unwrap_or_else(T::zero))
}

fn cutoff_x2_of<T: Scalar>(d: &DefectRealization<T>) -> i64 {
    d.space().cutoff_x2() as i64
}

/// For a pure reflection: slot-0-only states go to slot-1-only states and
/// vice versa, one monomial to one monomial.
pub fn check_reflection_factorization<T: Scalar>(d: &DefectRealization<T>) -> bool {
    let space = d.space();
    (0..space.dim()).all(|j| {
        let parts = space.state(j).parts();
        let (only0, only1) = (parts[1].is_empty(), parts[0].is_empty());
        if only0 && only1 {
            return true;
        }
        if !(only0 || only1) {
            return true;
        }
        let col = d.theta.column(j);
        col.len() == 1
            && col.iter().all(|(&i, v)| {
                let p = space.state(i).parts();
                (v.abs() - T::one()).negligible()
                    && if only0 { p[1] == parts[0] && p[0].is_empty() } else { p[0] == parts[1] && p[1].is_empty() }
            })
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntertwiningEntry {
    pub angle: String,
    pub n: i32,
    pub exact: bool,
    pub deviation: Measured,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntertwiningReport {
    pub cutoff: String,
    pub entries: Vec<IntertwiningEntry>,
    pub passed: bool,
}

fn intertwining_for<T: Scalar>(angle: &Angle, ns: &[i32], cutoff: &Rational) -> Result<Vec<IntertwiningEntry>> {
    let d = DefectRealization::<T>::bogoliubov(angle, cutoff)?;
    ns.iter()
        .map(|&n| {
            let dev = check_intertwining(&d, n)?;
            Ok(IntertwiningEntry {
                angle: angle.to_string(),
                n,
                exact: T::EXACT,
                passed: dev.negligible(),
                deviation: Measured::of(&dev),
            })
        })
        .collect()
}

/// Intertwining deviation on a grid of angles and modes; exact arithmetic
/// for rational points on the circle, `f64` otherwise.
pub fn intertwining_grid(angles: &[Angle], ns: &[i32], cutoff: &Rational) -> Result<IntertwiningReport> {
    let per_angle: Vec<Vec<IntertwiningEntry>> = angles
        .par_iter()
        .map(|a| {
            if a.is_exact() {
                intertwining_for::<Rational>(a, ns, cutoff)
            } else {
                intertwining_for::<f64>(a, ns, cutoff)
            }
        })
        .collect::<Result<_>>()?;
    let entries: Vec<IntertwiningEntry> = per_angle.into_iter().flatten().collect();
    Ok(IntertwiningReport { cutoff: cutoff.to_string(), passed: entries.iter().all(|e| e.passed), entries })
}

/// The three automorphism conditions for one mode matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutomorphismChecks {
    pub identity: IdentityReport,
    pub anticommutator_deviation: Measured,
    pub anticommutators_preserved: bool,
    /// `Θ_M(α) Θ(β)` against `Θ(α+β)`.
    pub composition_deviation: Measured,
    pub composition_holds: bool,
}

impl AutomorphismChecks {
    pub fn all_hold(&self) -> bool {
        self.identity.holds && self.anticommutators_preserved && self.composition_holds
    }

    pub fn all_fail(&self) -> bool {
        !self.identity.holds && !self.anticommutators_preserved && !self.composition_holds
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutomorphismReport {
    pub alpha: String,
    pub beta: String,
    pub cutoff: String,
    pub rotation: AutomorphismChecks,
    pub skew_epsilon: String,
    pub skewed: AutomorphismChecks,
    /// The rotation passes everything and the skewed matrix fails everything.
    pub passed: bool,
}

fn automorphism_checks<T: Scalar>(
    d: &DefectRealization<T>,
    beta: &Angle,
    alpha: &Angle,
    cutoff: &Rational,
) -> Result<AutomorphismChecks> {
    let identity = check_identity_preservation(d)?;
    let anti = check_ope_preservation(d)?;
    let second = DefectRealization::<T>::bogoliubov(beta, cutoff)?;
    let target = DefectRealization::<T>::bogoliubov(&alpha.add(beta), cutoff)?;
    let comp = composition_deviation(d, &second, &target)?;
    Ok(AutomorphismChecks {
        identity,
        anticommutators_preserved: anti.negligible(),
        anticommutator_deviation: Measured::of(&anti),
        composition_holds: comp.negligible(),
        composition_deviation: Measured::of(&comp),
    })
}

fn automorphism_report_in<T: Scalar>(
    alpha: &Angle,
    beta: &Angle,
    epsilon: &Rational,
    cutoff: &Rational,
) -> Result<AutomorphismReport> {
    let rot = DefectRealization::<T>::bogoliubov(alpha, cutoff)?;
    let skew = DefectRealization::<T>::skewed(alpha, epsilon, cutoff)?;
    let rotation = automorphism_checks(&rot, beta, alpha, cutoff)?;
    let skewed = automorphism_checks(&skew, beta, alpha, cutoff)?;
    Ok(AutomorphismReport {
        alpha: alpha.to_string(),
        beta: beta.to_string(),
        cutoff: cutoff.to_string(),
        skew_epsilon: epsilon.to_string(),
        passed: rotation.all_hold() && skewed.all_fail(),
        rotation,
        skewed,
    })
}

/// Identity preservation, anticommutator preservation and composition for
/// Θ(α), with the 1%-skewed matrix as negative control.
pub fn automorphism_report(alpha: &Angle, beta: &Angle, cutoff: &Rational) -> Result<AutomorphismReport> {
    let epsilon = rat(1, 100);
    if alpha.is_exact() && beta.is_exact() {
        automorphism_report_in::<Rational>(alpha, beta, &epsilon, cutoff)
    } else {
        automorphism_report_in::<f64>(alpha, beta, &epsilon, cutoff)
    }
}

/// Exact Θ for exact angles; convenience for callers that only need the
/// rational realization.
pub fn build_theta_fermion(angle: &Angle, cutoff: &Rational) -> Result<DefectRealization<Rational>> {
    DefectRealization::bogoliubov(angle, cutoff)
}

impl DefectRealization<Rational> {
    pub fn is_exact_rotation(&self) -> bool {
        let (dev, det) = orthogonality(&self.mode_matrix);
        dev.is_zero() && det == Rational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;

    fn exact(c: i64, s: i64, d: i64) -> Angle {
        Angle::exact(rat(c, d), rat(s, d)).unwrap()
    }

    fn state(space: &StateSpace, p0: Vec<u32>, p1: Vec<u32>) -> usize {
        let (sign, st) = FockState::from_parts(space.factors(), vec![p0, p1]).unwrap();
        assert_eq!(sign, 1);
        space.index_of(&st).unwrap()
    }

    #[test]
    fn transmission_is_identity_matrix() {
        let d = build_theta_fermion(&Angle::zero(), &rat(3, 1)).unwrap();
        assert_eq!(d.theta(), &GradedOperator::identity(d.space().clone()));
    }

    #[test]
    fn pure_reflection_mode_images() {
        let d = build_theta_fermion(&Angle::quarter_turn(), &rat(2, 1)).unwrap();
        let s = d.space().clone();
        // bʳ_{-1/2}|0⟩ -> b̄ʳ_{-1/2}|0⟩ ; b̄ˡ_{-1/2}|0⟩ -> -bˡ_{-1/2}|0⟩
        let r = state(&s, vec![], vec![1]);
        let l = state(&s, vec![1], vec![]);
        assert_eq!(d.theta().apply(&basis_vector(r)), [(l, rat(1, 1))].into_iter().collect());
        assert_eq!(d.theta().apply(&basis_vector(l)), [(r, rat(-1, 1))].into_iter().collect());
        assert!(check_reflection_factorization(&d));
    }

    #[test]
    fn generic_rotation_does_not_factorize() {
        let d = build_theta_fermion(&exact(3, 4, 5), &rat(2, 1)).unwrap();
        assert!(!check_reflection_factorization(&d));
    }

    #[test]
    fn mode_matrix_is_rotation() {
        for a in default_angle_grid() {
            let m = BogoliubovSpec::new(a.clone()).mode_matrix::<f64>().unwrap();
            let (dev, det) = orthogonality(&m);
            assert!(dev < 1e-15 && (det - 1.0).abs() < 1e-15, "{a}");
        }
        let d = build_theta_fermion(&exact(5, 12, 13), &rat(1, 1)).unwrap();
        assert!(d.is_exact_rotation());
    }

    #[test]
    fn two_mode_state_mixes() {
        // Θ(bʳ_{-3/2} bʳ_{-1/2}|0⟩) = (c bˡ + s b̄ʳ)_{-3/2}(c bˡ + s b̄ʳ)_{-1/2}|0⟩
        let a = exact(3, 4, 5);
        let d = build_theta_fermion(&a, &rat(2, 1)).unwrap();
        let s = d.space().clone();
        let src = state(&s, vec![], vec![3, 1]);
        let out = d.theta().apply(&basis_vector(src));
        let c = rat(3, 5);
        let sn = rat(4, 5);
        assert_eq!(out[&state(&s, vec![], vec![3, 1])], &c * &c);
        assert_eq!(out[&state(&s, vec![3, 1], vec![])], &sn * &sn);
        // b̄_{-3/2} bˡ_{-1/2}: slot-0 mode first, so sign +1; and bˡ_{-3/2} b̄_{-1/2}
        // reorders past one fermion: -1.
        assert_eq!(out[&state(&s, vec![3], vec![1])], &sn * &c);
        assert_eq!(out[&state(&s, vec![1], vec![3])], -(&c * &sn));
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn intertwining_examples() {
        let f = DefectRealization::<f64>::bogoliubov(&Angle::radians(0.3), &rat(5, 1)).unwrap();
        assert!(check_intertwining(&f, 1).unwrap() < 1e-12);
        let d0 = build_theta_fermion(&Angle::quarter_turn(), &rat(5, 1)).unwrap();
        assert_eq!(check_intertwining(&d0, -2).unwrap(), rat(0, 1));
        let d = build_theta_fermion(&exact(3, 4, 5), &rat(5, 1)).unwrap();
        assert_eq!(check_intertwining(&d, 0).unwrap(), rat(0, 1));
    }

    #[test]
    fn skewed_matrix_breaks_intertwining() {
        let d = DefectRealization::<Rational>::skewed(&exact(3, 4, 5), &rat(1, 100), &rat(4, 1)).unwrap();
        assert_eq!(check_intertwining(&d, 0).unwrap(), rat(0, 1));
        assert!(check_intertwining(&d, 2).unwrap() > rat(0, 1));
    }

    #[test]
    fn momentum_continuity_cases() {
        let r = check_momentum_continuity(&build_theta_fermion(&Angle::zero(), &rat(2, 1)).unwrap()).unwrap();
        assert!(r.holds);
        assert_eq!(r.image_of_t.chiral.exact.as_deref(), Some("1"));
        assert_eq!(r.image_of_t.anti_chiral.exact.as_deref(), Some("0"));
        assert_eq!(r.image_of_t_bar.anti_chiral.exact.as_deref(), Some("1"));

        let r = check_momentum_continuity(&build_theta_fermion(&Angle::quarter_turn(), &rat(2, 1)).unwrap()).unwrap();
        assert!(r.holds);
        assert_eq!(r.image_of_t.anti_chiral.exact.as_deref(), Some("1"));
        assert_eq!(r.image_of_t.residual.exact.as_deref(), Some("0"));

        let f = DefectRealization::<f64>::bogoliubov(&"pi/4".parse().unwrap(), &rat(2, 1)).unwrap();
        let r = check_momentum_continuity(&f).unwrap();
        assert!(r.holds);
        assert!((r.image_of_t.chiral.value - 0.5).abs() < 1e-12);
        assert!(r.image_of_t.residual.value > 0.1);
    }

    #[test]
    fn ope_preservation_and_mixed_pair() {
        let d = build_theta_fermion(&exact(3, 4, 5), &rat(2, 1)).unwrap();
        assert_eq!(check_ope_preservation(&d).unwrap(), rat(0, 1));
        let f = DefectRealization::<f64>::bogoliubov(&Angle::radians(0.3), &rat(2, 1)).unwrap();
        let a = ModeIndex::fermion(CHIRAL_SLOT, 1).unwrap();
        let b = ModeIndex::fermion(ANTI_CHIRAL_SLOT, -1).unwrap();
        assert!(anticommutator_deviation(&f, &a, &b).unwrap() < 1e-15);
        let skew = DefectRealization::<Rational>::skewed(&exact(3, 4, 5), &rat(1, 100), &rat(2, 1)).unwrap();
        assert!(check_ope_preservation(&skew).unwrap() > rat(0, 1));
    }

    #[test]
    fn automorphism_with_negative_control() {
        let r = automorphism_report(&exact(3, 4, 5), &exact(5, 12, 13), &rat(3, 1)).unwrap();
        assert!(r.rotation.all_hold(), "{r:?}");
        assert!(r.skewed.all_fail(), "{r:?}");
        assert!(r.skewed.identity.vacuum_fixed);
        let r = automorphism_report(&Angle::radians(0.3), &Angle::radians(1.1), &rat(3, 1)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn inverse_is_negative_angle() {
        assert_eq!(inverse_deviation::<Rational>(&exact(3, 4, 5), &rat(4, 1)).unwrap(), rat(0, 1));
        assert!(inverse_deviation::<f64>(&Angle::radians(0.7), &rat(3, 1)).unwrap() < 1e-12);
        let d = build_theta_fermion(&exact(8, -15, 17), &rat(3, 1)).unwrap();
        for (_, det) in d.level_determinants().unwrap() {
            assert_ne!(det, rat(0, 1));
        }
    }

    #[test]
    fn reflection_phases_realizations() {
        for (zl, zr) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let d = DefectRealization::<Rational>::reflection(zl, zr, &rat(3, 1)).unwrap();
            assert!(check_reflection_factorization(&d));
            assert_eq!(check_intertwining(&d, 2).unwrap(), rat(0, 1));
            assert!(check_identity_preservation(&d).unwrap().holds);
        }
        assert!(DefectRealization::<Rational>::reflection(2, 1, &rat(1, 1)).is_err());
    }

    #[test]
    fn grid_at_cutoff_three() {
        let r = intertwining_grid(&default_angle_grid(), &[-2, -1, 0, 1, 2], &rat(3, 1)).unwrap();
        assert!(r.passed);
        assert_eq!(r.entries.len(), 40);
    }

    #[test]
    fn tiny_cutoff_rejected() {
        assert!(defect_space(&rat(0, 1)).is_err());
        let d = build_theta_fermion(&Angle::zero(), &rat(1, 1)).unwrap();
        assert!(check_intertwining(&d, 2).is_err());
        assert!(check_momentum_continuity(&d).is_err());
    }
}
