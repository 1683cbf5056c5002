//! Virasoro generators as mode bilinears on truncated Fock spaces.
//!
//! Fermion: `L_n = ½ Σ_m m :b_{n-m+1/2} b_{m-1/2}:` (c = 1/2).
//! Boson:   `L_n = ½ Σ_m :a_{n-m} a_m:` over nonzero modes (c = 1, zero-charge
//! sector). Normal ordering moves annihilators to the right and drops the
//! c-number, so the central term of `[L_m, L_{-m}]` is produced by the
//! truncated matrices themselves.

use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{GradedOperator, ModeIndex, ModeSum, Sector, Species, StateSpace};
use crate::scalar::{max_abs, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Fermion,
    Boson,
}

impl Model {
    pub fn species(self) -> Species {
        match self {
            Model::Fermion => Species::Fermion,
            Model::Boson => Species::Boson,
        }
    }

    pub fn central_charge(self) -> Rational {
        match self {
            Model::Fermion => rat(1, 2),
            Model::Boson => rat(1, 1),
        }
    }

    pub fn from_species(species: Species) -> Self {
        match species {
            Species::Fermion => Model::Fermion,
            Species::Boson => Model::Boson,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VirasoroGenerator {
    pub n: i32,
    pub model: Model,
    pub op: GradedOperator<Rational>,
}

/// Normal-ordered bilinear for `L_n` on one sector. Modes beyond
/// `cutoff + |n|` cannot contribute to any matrix element and are omitted.
pub fn virasoro_mode_sum(sector: Sector, n: i32, cutoff_x2: u32) -> Result<ModeSum<Rational>> {
    let bound = cutoff_x2 as i32 + 2 * n.abs() + 1;
    let mut sum = ModeSum::new();
    match sector.species {
        Species::Fermion => {
            for m in -bound..=bound {
                let first = 2 * n - 2 * m + 1;
                let second = 2 * m - 1;
                if first.abs() > bound || second.abs() > bound || m == 0 {
                    continue;
                }
                let a = ModeIndex::fermion(sector, first)?;
                let b = ModeIndex::fermion(sector, second)?;
                if first > 0 && second < 0 {
                    sum.push(rat(-(m as i64), 2), vec![b, a]);
                } else {
                    sum.push(rat(m as i64, 2), vec![a, b]);
                }
            }
        }
        Species::Boson => {
            let bound = bound / 2 + 1;
            for m in -bound..=bound {
                let k = n - m;
                if m == 0 || k == 0 || k.abs() > bound {
                    continue;
                }
                let a = ModeIndex::boson(sector, k)?;
                let b = ModeIndex::boson(sector, m)?;
                if k > 0 && m < 0 {
                    sum.push(rat(1, 2), vec![b, a]);
                } else {
                    sum.push(rat(1, 2), vec![a, b]);
                }
            }
        }
    }
    Ok(sum)
}

/// `L_n` acting on the factor `sector` of a (possibly product) space.
pub fn build_virasoro_on(space: &Arc<StateSpace>, sector: Sector, n: i32) -> Result<GradedOperator<Rational>> {
    if space.factor_position(&sector).is_none() {
        return Err(Error::SpeciesMismatch { mode: format!("L_{n} on {sector}") });
    }
    if 2 * n.unsigned_abs() > space.cutoff_x2() {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff().to_string(),
            reason: format!("L_{n} has no matrix element below the cutoff"),
        });
    }
    GradedOperator::from_mode_sum(space.clone(), &virasoro_mode_sum(sector, n, space.cutoff_x2())?)
}

/// `L_n` on a single-factor space of the model's species.
pub fn build_virasoro(model: Model, n: i32, space: &Arc<StateSpace>) -> Result<VirasoroGenerator> {
    let sector = match space.factors() {
        [s] if s.species == model.species() => *s,
        _ => {
            return Err(Error::SpeciesMismatch {
                mode: format!("{model:?} L_{n} on a space with factors {:?}", space.factors()),
            })
        }
    };
    Ok(VirasoroGenerator { n, model, op: build_virasoro_on(space, sector, n)? })
}

/// `12 ⟨0|[L_m, L_{-m}]|0⟩ / (m³ - m)`, which equals the central charge.
pub fn central_charge_probe(model: Model, m: i32, cutoff: &Rational) -> Result<Rational> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("probe needs m >= 2, got {m}")));
    }
    if cutoff < &rat(m as i64, 1) {
        return Err(Error::CutoffTooSmall {
            cutoff: cutoff.to_string(),
            reason: format!("L_{{-{m}}}|0> lies at level {m}"),
        });
    }
    let space = Arc::new(StateSpace::single(Sector::chiral(model.species()), cutoff)?);
    let lm = build_virasoro(model, m, &space)?.op;
    let lmm = build_virasoro(model, -m, &space)?.op;
    let comm = lm.commutator(&lmm)?;
    let v = comm.entry(space.vacuum_index(), space.vacuum_index());
    let m = m as i64;
    Ok(v * rat(12, m * m * m - m))
}

/// Largest entry of `[L_m, L_n] - (m-n) L_{m+n} - c/12 (m³-m) δ_{m+n,0}` on
/// states of level at most `Λ - |m| - |n|`.
pub fn commutator_deviation(model: Model, m: i32, n: i32, space: &Arc<StateSpace>) -> Result<Rational> {
    let sector = Sector::chiral(model.species());
    let lm = build_virasoro_on(space, sector, m)?;
    let ln = build_virasoro_on(space, sector, n)?;
    let mut rhs = if m + n == 0 {
        GradedOperator::zero(space.clone(), 0, 0)
    } else {
        build_virasoro_on(space, sector, m + n)?.scale(&rat((m - n) as i64, 1))
    };
    if m + n == 0 {
        let l0 = build_virasoro_on(space, sector, 0)?;
        let mi = m as i64;
        let central = model.central_charge() * rat(mi * mi * mi - mi, 12);
        rhs = l0.scale(&rat(2 * mi, 1)).add(&GradedOperator::identity(space.clone()).scale(&central))?;
    }
    let diff = lm.commutator(&ln)?.sub(&rhs)?;
    let safe = space.cutoff_x2() as i64 - 2 * (m.abs() + n.abs()) as i64;
    diff.max_abs_on(safe).ok_or_else(|| Error::CutoffTooSmall {
        cutoff: space.cutoff().to_string(),
        reason: format!("no safe subspace for [L_{m}, L_{n}]"),
    })
}

/// Largest violation of `⟨u|L_n v⟩ = ⟨L_{-n} u|v⟩` under `b_s† = b_{-s}`.
pub fn hermiticity_deviation(model: Model, n: i32, space: &Arc<StateSpace>) -> Result<Rational> {
    let sector = Sector::chiral(model.species());
    let ln = build_virasoro_on(space, sector, n)?;
    let lmn = build_virasoro_on(space, sector, -n)?;
    let mut devs = Vec::new();
    for v in 0..space.dim() {
        for (&u, x) in ln.column(v) {
            let lhs = space.norm_squared(space.state(u)) * x;
            let rhs = space.norm_squared(space.state(v)) * lmn.entry(v, u);
            devs.push(lhs - rhs);
        }
        for (&u, y) in lmn.column(v) {
            let lhs = space.norm_squared(space.state(u)) * y;
            let rhs = space.norm_squared(space.state(v)) * ln.entry(v, u);
            devs.push(lhs - rhs);
        }
    }
    Ok(max_abs(devs))
}

/// Largest `|⟨s|L_0|s'⟩ - level(s) δ_{ss'}|`.
pub fn l0_level_deviation(model: Model, space: &Arc<StateSpace>) -> Result<Rational> {
    let l0 = build_virasoro_on(space, Sector::chiral(model.species()), 0)?;
    let mut devs = Vec::new();
    for j in 0..space.dim() {
        let level = space.state(j).level();
        for (&i, v) in l0.column(j) {
            devs.push(if i == j { v - &level } else { v.clone() });
        }
        if !l0.column(j).contains_key(&j) {
            devs.push(level);
        }
    }
    Ok(max_abs(devs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CommutatorEntry {
    pub m: i32,
    pub n: i32,
    pub deviation: String,
}

/// Summary of the full algebra check for one model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub model: Model,
    pub cutoff: String,
    pub dimension: usize,
    pub central_charge: String,
    pub expected_central_charge: String,
    pub max_commutator_deviation: String,
    pub commutators: Vec<CommutatorEntry>,
    pub l0_deviation: String,
    pub hermiticity_deviation: String,
    pub passed: bool,
}

/// Central charge, commutator law for `|m|, |n| <= range`, `L_0` levels and
/// hermiticity at cutoff Λ.
pub fn check_algebra(model: Model, cutoff: &Rational, range: i32) -> Result<AlgebraReport> {
    let space = Arc::new(StateSpace::single(Sector::chiral(model.species()), cutoff)?);
    let c = central_charge_probe(model, 2, cutoff)?;
    let pairs: Vec<(i32, i32)> = (-range..=range).flat_map(|m| (-range..=range).map(move |n| (m, n))).collect();
    let results: Vec<Result<(i32, i32, Rational)>> =
        pairs.par_iter().map(|&(m, n)| commutator_deviation(model, m, n, &space).map(|d| (m, n, d))).collect();
    let mut commutators = Vec::new();
    let mut worst = Rational::zero();
    for r in results {
        let (m, n, d) = r?;
        if d > worst {
            worst = d.clone();
        }
        commutators.push(CommutatorEntry { m, n, deviation: d.to_string() });
    }
    let l0 = l0_level_deviation(model, &space)?;
    let herm = (-range..=range).map(|n| hermiticity_deviation(model, n, &space)).collect::<Result<Vec<_>>>()?;
    let herm = max_abs(herm);
    let passed = c == model.central_charge() && worst.is_zero() && l0.is_zero() && herm.is_zero();
    Ok(AlgebraReport {
        model,
        cutoff: cutoff.to_string(),
        dimension: space.dim(),
        central_charge: c.to_string(),
        expected_central_charge: model.central_charge().to_string(),
        max_commutator_deviation: worst.to_string(),
        commutators,
        l0_deviation: l0.to_string(),
        hermiticity_deviation: herm.to_string(),
        passed,
    })
}

/// `(L_{-1})^k` applied to the state `b_{-1/2}|0⟩`, useful for the
/// derivative / descendant correspondence.
pub fn lm1_power_on_psi(k: u32, cutoff: &Rational) -> Result<crate::fock::StateVector<Rational>> {
    let space = Arc::new(StateSpace::single(Sector::chiral(Species::Fermion), cutoff)?);
    let lm1 = build_virasoro(Model::Fermion, -1, &space)?.op;
    let psi = ModeIndex::fermion(Sector::chiral(Species::Fermion), -1)?;
    let mut v = crate::fock::apply_mode(&space, &psi, &crate::fock::basis_vector(0))?.vector;
    for _ in 0..k {
        v = lm1.apply(&v);
    }
    Ok(v)
}
