//! Reflection phases `ζ_j` of a pure-reflection defect.
//!
//! Phases are roots of unity, stored as `θ_j ∈ ℚ/ℤ` with `ζ_j = e^{2πiθ_j}`.
//! The constraints are linear in `θ`: `θ_id = 0`, `θ_ĵ = -θ_j` and
//! `θ_j + θ_k = θ_m` whenever `C_{jk}^m ≠ 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rat, Rational};

/// Nonzero pattern of a fusion ring as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionRing {
    pub labels: Vec<String>,
    pub identity: String,
    /// Triples `[j, k, m]` with `C_{jk}^m ≠ 0`.
    pub fusion: Vec<[String; 3]>,
    /// `j -> ĵ`; labels left out are self-conjugate.
    #[serde(default)]
    pub conjugation: BTreeMap<String, String>,
}

impl FusionRing {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Ising: `{1, ψ}` with `ψ × ψ = 1`.
    pub fn ising() -> Self {
        let l = |s: &str| s.to_string();
        Self {
            labels: vec![l("1"), l("psi")],
            identity: l("1"),
            fusion: vec![[l("1"), l("1"), l("1")], [l("1"), l("psi"), l("psi")], [l("psi"), l("psi"), l("1")]],
            conjugation: BTreeMap::new(),
        }
    }

    /// `ℤ_n` with labels `0..n` and `a × b = a + b mod n`.
    pub fn cyclic(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::FusionRing("ℤ_n needs n ≥ 1".into()));
        }
        let labels: Vec<String> = (0..n).map(|a| a.to_string()).collect();
        let mut fusion = Vec::new();
        for a in 0..n {
            for b in a..n {
                fusion.push([a.to_string(), b.to_string(), ((a + b) % n).to_string()]);
            }
        }
        let conjugation = (1..n).map(|a| (a.to_string(), (n - a).to_string())).collect();
        Ok(Self { labels, identity: "0".into(), fusion, conjugation })
    }

    pub fn conjugate<'a>(&'a self, j: &'a str) -> &'a str {
        self.conjugation.get(j).map(String::as_str).unwrap_or(j)
    }

    /// Structural problems; an empty list means the ring is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let known: BTreeSet<&str> = self.labels.iter().map(String::as_str).collect();
        if known.len() != self.labels.len() {
            out.push("duplicate labels".to_string());
        }
        if !known.contains(self.identity.as_str()) {
            out.push(format!("identity {:?} is not a label", self.identity));
        }
        for t in &self.fusion {
            for l in t {
                if !known.contains(l.as_str()) {
                    out.push(format!("fusion triple {t:?} uses unknown label {l:?}"));
                }
            }
        }
        for (j, jb) in &self.conjugation {
            if !known.contains(j.as_str()) || !known.contains(jb.as_str()) {
                out.push(format!("conjugation {j:?} -> {jb:?} uses an unknown label"));
            } else if self.conjugate(jb) != j {
                out.push(format!("conjugation is not an involution at {j:?}"));
            }
        }
        if !out.is_empty() {
            return out;
        }
        if self.conjugate(&self.identity) != self.identity {
            out.push("the identity must be self-conjugate".to_string());
        }
        let pattern: BTreeSet<(&str, &str, &str)> =
            self.fusion.iter().map(|[a, b, c]| (a.as_str(), b.as_str(), c.as_str())).collect();
        let id = self.identity.as_str();
        // 1 × 1 → 1 holds by the unit axiom and need not be listed.
        for j in self.labels.iter().filter(|j| j.as_str() != id) {
            let jb = self.conjugate(j);
            if !pattern.contains(&(j.as_str(), jb, id)) && !pattern.contains(&(jb, j.as_str(), id)) {
                out.push(format!("missing fusion {j} x {jb} -> {id}"));
            }
        }
        out
    }
}

/// `ζ = exp(2πi · numerator / denominator)` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Phase {
    pub numerator: u64,
    pub denominator: u64,
}

impl Phase {
    pub fn one() -> Self {
        Self { numerator: 0, denominator: 1 }
    }

    fn from_units(units: u64, modulus: u64) -> Self {
        let g = units.gcd(&modulus);
        Self { numerator: units / g, denominator: modulus / g }
    }

    /// `θ` as an exact fraction in `[0, 1)`.
    pub fn turns(&self) -> Rational {
        rat(self.numerator as i64, self.denominator as i64)
    }

    /// `(Re ζ, Im ζ)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let a = std::f64::consts::TAU * self.numerator as f64 / self.denominator as f64;
        (a.cos(), a.sin())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// One consistent assignment of reflection phases.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReflectionSpec {
    pub zetas: BTreeMap<String, Phase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseReport {
    pub valid: bool,
    pub problems: Vec<String>,
    pub max_order: u64,
    pub solutions: Vec<ReflectionSpec>,
    /// True when the linear constraints leave a continuous family, so the
    /// bounded search only samples it.
    pub continuous_family: bool,
}

/// Every phase assignment with all orders at most `max_order`.
pub fn solve_reflection_phases(ring: &FusionRing, max_order: u64) -> Result<PhaseReport> {
    if max_order == 0 || max_order > 40 {
        return Err(Error::InvalidParameter(format!("max_order {max_order} outside 1..=40")));
    }
    let problems = ring.problems();
    if !problems.is_empty() {
        return Ok(PhaseReport { valid: false, problems, max_order, solutions: Vec::new(), continuous_family: false });
    }
    let n = ring.labels.len();
    let pos: BTreeMap<&str, usize> = ring.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    // rows: Σ coeff_i θ_i ≡ 0
    let mut rows: Vec<Vec<(usize, i64)>> = vec![vec![(pos[ring.identity.as_str()], 1)]];
    for j in &ring.labels {
        let (a, b) = (pos[j.as_str()], pos[ring.conjugate(j)]);
        rows.push(if a == b { vec![(a, 2)] } else { vec![(a, 1), (b, 1)] });
    }
    for [a, b, c] in &ring.fusion {
        let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
        *coeffs.entry(pos[a.as_str()]).or_default() += 1;
        *coeffs.entry(pos[b.as_str()]).or_default() += 1;
        *coeffs.entry(pos[c.as_str()]).or_default() -= 1;
        rows.push(coeffs.into_iter().filter(|&(_, v)| v != 0).collect());
    }
    rows.retain(|r| !r.is_empty());

    let modulus = (1..=max_order).fold(1u64, |acc, k| acc.lcm(&k));
    let allowed: Vec<u64> = {
        let mut v: BTreeSet<u64> = BTreeSet::new();
        for d in 1..=max_order {
            for k in 0..d {
                v.insert(k * (modulus / d));
            }
        }
        v.into_iter().collect()
    };
    let allowed_set: BTreeSet<u64> = allowed.iter().copied().collect();

    let mut solutions = Vec::new();
    let mut assign: Vec<Option<u64>> = vec![None; n];
    search(&rows, &allowed, &allowed_set, modulus, &mut assign, &mut solutions);
    let mut specs: Vec<ReflectionSpec> = solutions
        .into_iter()
        .map(|units| ReflectionSpec {
            zetas: ring.labels.iter().zip(units).map(|(l, u)| (l.clone(), Phase::from_units(u, modulus))).collect(),
        })
        .collect();
    specs.sort();
    specs.dedup();
    Ok(PhaseReport {
        valid: true,
        problems: Vec::new(),
        max_order,
        solutions: specs,
        continuous_family: rank(&rows, n) < n,
    })
}

fn residue(row: &[(usize, i64)], assign: &[Option<u64>], modulus: u64) -> Option<i128> {
    let m = modulus as i128;
    let mut acc = 0i128;
    for &(i, c) in row {
        acc += c as i128 * assign[i]? as i128;
    }
    Some(acc.rem_euclid(m))
}

/// Assign forced values until a fixpoint; `false` on contradiction.
fn propagate(rows: &[Vec<(usize, i64)>], allowed: &BTreeSet<u64>, modulus: u64, assign: &mut [Option<u64>]) -> bool {
    let m = modulus as i128;
    loop {
        let mut changed = false;
        for row in rows {
            let unknown: Vec<&(usize, i64)> = row.iter().filter(|(i, _)| assign[*i].is_none()).collect();
            match unknown.as_slice() {
                [] => {
                    if residue(row, assign, modulus) != Some(0) {
                        return false;
                    }
                }
                [&(i, c)] if c.abs() == 1 => {
                    let rest: i128 = row
                        .iter()
                        .filter(|(k, _)| *k != i)
                        .map(|&(k, ck)| ck as i128 * assign[k].unwrap_or(0) as i128)
                        .sum();
                    let v = (-(rest) * c as i128).rem_euclid(m) as u64;
                    if !allowed.contains(&v) {
                        return false;
                    }
                    assign[i] = Some(v);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(
    rows: &[Vec<(usize, i64)>],
    allowed: &[u64],
    allowed_set: &BTreeSet<u64>,
    modulus: u64,
    assign: &mut Vec<Option<u64>>,
    out: &mut Vec<Vec<u64>>,
) {
    if !propagate(rows, allowed_set, modulus, assign) {
        return;
    }
    let Some(next) = assign.iter().position(Option::is_none) else {
        out.push(assign.iter().map(|v| v.unwrap_or(0)).collect());
        return;
    };
    for &v in allowed {
        let saved = assign.clone();
        assign[next] = Some(v);
        search(rows, allowed, allowed_set, modulus, assign, out);
        *assign = saved;
    }
}

/// Rank over ℚ of the constraint matrix.
fn rank(rows: &[Vec<(usize, i64)>], n: usize) -> usize {
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![Rational::zero(); n];
            for &(i, c) in r {
                v[i] += rat(c, 1);
            }
            v
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for j in 0..n {
            m[rank][j] = &m[rank][j] / &pivot;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let d = &f * &m[rank][j];
                    m[r][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}
