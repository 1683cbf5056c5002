//! Critical Majorana chain with a rescaled central bond.
//!
//! `H = (i/4) Σ A_ab γ_a γ_b` with `A_{m,m+1} = g_m = -A_{m+1,m}`, so that
//! `γ(t) = e^{At} γ`. The covariance is `Γ_ab = (i/2)⟨[γ_a, γ_b]⟩`. With
//! `D = diag(i^m)` one has `iA = D T D†` where `T` is real, symmetric and
//! tridiagonal with off-diagonal `-g_m`; every spectral function is computed
//! from the eigendecomposition of `T`.

mod transport;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use transport::{
    fit_power_law, landauer_current, transmission, transmission_closed_form, zero_energy_transmission, PowerLawFit,
    DEFAULT_SCATTERING_LENGTH,
};

use crate::error::{Error, Result};

/// Orthogonality tolerance of the one-particle propagator.
pub const PROPAGATOR_TOLERANCE: f64 = 1e-10;

/// Smallest supported chain.
pub const MIN_SITES: usize = 40;

/// `N` spin sites (`2N` Majoranas) with uniform coupling and the central
/// Majorana bond scaled by `λ`. Open boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub sites: usize,
    pub coupling: f64,
    pub defect: f64,
}

impl ChainSpec {
    pub fn new(sites: usize, coupling: f64, defect: f64) -> Result<Self> {
        if sites < MIN_SITES || sites % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "site count must be even and at least {MIN_SITES}, got {sites}"
            )));
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidParameter(format!("coupling must be positive, got {coupling}")));
        }
        if !(0.0..=1.0).contains(&defect) {
            return Err(Error::InvalidParameter(format!("defect λ must lie in [0, 1], got {defect}")));
        }
        Ok(Self { sites, coupling, defect })
    }

    pub fn majoranas(&self) -> usize {
        2 * self.sites
    }

    /// Bond index of the defect (between Majoranas `N-1` and `N`).
    pub fn defect_bond(&self) -> usize {
        self.sites - 1
    }

    /// Maximal group velocity in spin sites per unit time.
    pub fn max_velocity(&self) -> f64 {
        self.coupling
    }

    pub fn chain(&self) -> MajoranaChain {
        let mut g = vec![self.coupling; self.majoranas() - 1];
        g[self.defect_bond()] *= self.defect;
        MajoranaChain::new(g)
    }

    /// One decoupled half (`N` Majoranas, uniform).
    pub fn half(&self) -> MajoranaChain {
        MajoranaChain::new(vec![self.coupling; self.sites - 1])
    }
}

/// Open Majorana chain given by its bond strengths.
#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaChain {
    bonds: Vec<f64>,
}

/// Eigendecomposition `T = V Λ Vᵀ` of the gauge-transformed hopping matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

type SpectrumKey = Vec<u64>;

fn spectrum_cache() -> &'static Mutex<HashMap<SpectrumKey, Arc<Spectrum>>> {
    static CACHE: OnceLock<Mutex<HashMap<SpectrumKey, Arc<Spectrum>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `i^n` for even `n` as a real sign.
fn i_pow_even(n: i64) -> f64 {
    debug_assert!(n % 2 == 0);
    if n.rem_euclid(4) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl MajoranaChain {
    pub fn new(bonds: Vec<f64>) -> Self {
        Self { bonds }
    }

    pub fn uniform(len: usize, g: f64) -> Self {
        Self::new(vec![g; len.saturating_sub(1)])
    }

    pub fn len(&self) -> usize {
        self.bonds.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    pub fn antisymmetric(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for (m, &g) in self.bonds.iter().enumerate() {
            a[(m, m + 1)] = g;
            a[(m + 1, m)] = -g;
        }
        a
    }

    pub fn hopping(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut t = DMatrix::zeros(n, n);
        for (m, &g) in self.bonds.iter().enumerate() {
            t[(m, m + 1)] = -g;
            t[(m + 1, m)] = -g;
        }
        t
    }

    /// Cached per bond configuration.
    pub fn spectrum(&self) -> Result<Arc<Spectrum>> {
        let key: SpectrumKey = self.bonds.iter().map(|g| g.to_bits()).collect();
        if let Some(s) = spectrum_cache().lock().expect("spectrum cache poisoned").get(&key) {
            return Ok(s.clone());
        }
        let eig = SymmetricEigen::try_new(self.hopping(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("eigendecomposition did not converge".into()))?;
        let s = Arc::new(Spectrum { values: eig.eigenvalues, vectors: eig.eigenvectors });
        spectrum_cache().lock().expect("spectrum cache poisoned").insert(key, s.clone());
        Ok(s)
    }

    /// Gibbs covariance at temperature `T` (`0` and `∞` allowed):
    /// `Γ_ab = i^{1+a-b} [V tanh(Λ/2T) Vᵀ]_ab` for odd `a - b`, zero otherwise.
    pub fn gibbs_covariance(&self, temperature: f64) -> Result<DMatrix<f64>> {
        if temperature.is_nan() || temperature < 0.0 {
            return Err(Error::InvalidParameter(format!("temperature must be ≥ 0, got {temperature}")));
        }
        let s = self.spectrum()?;
        let occ = s.values.map(|e| if temperature == 0.0 { e.signum() } else { (e / (2.0 * temperature)).tanh() });
        let mut weighted = s.vectors.clone();
        for (j, mut col) in weighted.column_iter_mut().enumerate() {
            col *= occ[j];
        }
        let w = &weighted * s.vectors.transpose();
        let n = self.len();
        Ok(DMatrix::from_fn(n, n, |a, b| {
            let d = a as i64 - b as i64;
            if d % 2 == 0 {
                0.0
            } else {
                i_pow_even(1 + d) * w[(a, b)]
            }
        }))
    }

    /// Rows `rows` of `R(t) = e^{At}`.
    pub fn propagator_rows(&self, rows: &[usize], t: f64) -> Result<DMatrix<f64>> {
        let s = self.spectrum()?;
        let n = self.len();
        let cos = s.values.map(|e| (e * t).cos());
        let sin = s.values.map(|e| (e * t).sin());
        let mut vc = DMatrix::zeros(rows.len(), n);
        let mut vs = DMatrix::zeros(rows.len(), n);
        for (r, &a) in rows.iter().enumerate() {
            if a >= n {
                return Err(Error::Dimension(format!("row {a} outside a chain of {n} Majoranas")));
            }
            for k in 0..n {
                vc[(r, k)] = s.vectors[(a, k)] * cos[k];
                vs[(r, k)] = s.vectors[(a, k)] * sin[k];
            }
        }
        let c = vc * s.vectors.transpose();
        let sn = vs * s.vectors.transpose();
        Ok(DMatrix::from_fn(rows.len(), n, |r, b| {
            let d = rows[r] as i64 - b as i64;
            if d % 2 == 0 {
                i_pow_even(d) * c[(r, b)]
            } else {
                -i_pow_even(d + 1) * sn[(r, b)]
            }
        }))
    }

    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        let rows: Vec<usize> = (0..self.len()).collect();
        self.propagator_rows(&rows, t)
    }

    /// `-¼ tr(AΓ)`.
    pub fn energy(&self, gamma: &DMatrix<f64>) -> f64 {
        let mut e = 0.0;
        for (m, &g) in self.bonds.iter().enumerate() {
            // A_{m,m+1}Γ_{m+1,m} + A_{m+1,m}Γ_{m,m+1}
            e += g * (gamma[(m + 1, m)] - gamma[(m, m + 1)]);
        }
        -0.25 * e
    }

    /// Window start and `M = [A_L, A] - [A_R, A]` on Majoranas
    /// `start..start+M.nrows()`, where `A_L`/`A_R` hold the bonds left/right of
    /// `bond`. The current is `⅛ tr(MΓ)`.
    pub fn bond_current_operator(&self, bond: usize) -> Result<(usize, DMatrix<f64>)> {
        if bond == 0 || bond + 2 >= self.len() {
            return Err(Error::InvalidParameter(format!("bond {bond} is not an interior bond")));
        }
        let start = bond - 1;
        let local = |bonds: &[(usize, f64)]| {
            let mut a = DMatrix::zeros(4, 4);
            for &(m, g) in bonds {
                a[(m - start, m + 1 - start)] = g;
                a[(m + 1 - start, m - start)] = -g;
            }
            a
        };
        let a_l = local(&[(bond - 1, self.bonds[bond - 1])]);
        let a_b = local(&[(bond, self.bonds[bond])]);
        let a_r = local(&[(bond + 1, self.bonds[bond + 1])]);
        let comm = |x: &DMatrix<f64>| x * &a_b - &a_b * x;
        Ok((start, comm(&a_l) - comm(&a_r)))
    }

    /// Symmetrized energy current through `bond`, left to right.
    pub fn bond_current(&self, gamma: &DMatrix<f64>, bond: usize) -> Result<f64> {
        let (start, m) = self.bond_current_operator(bond)?;
        let window = gamma.view((start, start), (4, 4)).into_owned();
        Ok(0.125 * (m * window).trace())
    }
}

/// `Γ(t) = R Γ Rᵀ`; fails if `R` is not orthogonal to [`PROPAGATOR_TOLERANCE`].
pub fn evolve_covariance(gamma: &DMatrix<f64>, chain: &MajoranaChain, t: f64) -> Result<DMatrix<f64>> {
    if gamma.nrows() != chain.len() || gamma.ncols() != chain.len() {
        return Err(Error::Dimension(format!(
            "covariance is {}×{}, chain has {} Majoranas",
            gamma.nrows(),
            gamma.ncols(),
            chain.len()
        )));
    }
    let r = chain.propagator(t)?;
    let dev = orthogonality_deviation(&r);
    if dev > PROPAGATOR_TOLERANCE {
        return Err(Error::Numerical(format!("propagator deviates from orthogonality by {dev:e}")));
    }
    Ok(&r * gamma * r.transpose())
}

pub fn orthogonality_deviation(r: &DMatrix<f64>) -> f64 {
    let n = r.nrows();
    (r * r.transpose() - DMatrix::<f64>::identity(n, n)).amax()
}

/// `max |Γ + Γᵀ|`.
pub fn antisymmetry_deviation(gamma: &DMatrix<f64>) -> f64 {
    (gamma + gamma.transpose()).amax()
}

/// Eigenvalues of the Hermitian matrix `iΓ`, ascending.
pub fn covariance_spectrum(gamma: &DMatrix<f64>) -> Vec<f64> {
    let ig = gamma.map(|v| num_complex::Complex64::new(0.0, v));
    let mut ev: Vec<f64> = SymmetricEigen::new(ig).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Decoupled halves at `(T_l, T_r)`.
pub fn partitioned_covariance(spec: &ChainSpec, t_left: f64, t_right: f64) -> Result<DMatrix<f64>> {
    let half = spec.half();
    let gl = half.gibbs_covariance(t_left)?;
    let gr = half.gibbs_covariance(t_right)?;
    let n = spec.sites;
    let mut g = DMatrix::zeros(2 * n, 2 * n);
    g.view_mut((0, 0), (n, n)).copy_from(&gl);
    g.view_mut((n, n), (n, n)).copy_from(&gr);
    Ok(g)
}

/// Plateau window in units of `N / v_max` and sampling step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub window: (f64, f64),
    pub dt: f64,
    /// Defaults to the window end.
    pub t_max: Option<f64>,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { window: (0.25, 0.45), dt: 1.0, t_max: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start: f64,
    pub end: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentSeries {
    pub spec: ChainSpec,
    pub t_left: f64,
    pub t_right: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub plateau: Plateau,
}

impl CurrentSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,current\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v:e}\n"));
        }
        out
    }
}

/// Number of blocks for the plateau error estimate.
const PLATEAU_BLOCKS: usize = 4;

fn plateau(times: &[f64], values: &[f64], start: f64, end: f64) -> Result<Plateau> {
    let inside: Vec<f64> =
        times.iter().zip(values).filter(|(t, _)| **t >= start && **t <= end).map(|(_, v)| *v).collect();
    if inside.len() < 2 * PLATEAU_BLOCKS {
        return Err(Error::NoPlateau(format!(
            "{} samples in the window [{start}, {end}]; need at least {}",
            inside.len(),
            2 * PLATEAU_BLOCKS
        )));
    }
    let mean = inside.iter().sum::<f64>() / inside.len() as f64;
    // block averaging absorbs the short-time correlations of the series
    let size = inside.len() / PLATEAU_BLOCKS;
    let blocks: Vec<f64> =
        inside.chunks(size).take(PLATEAU_BLOCKS).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let bmean = blocks.iter().sum::<f64>() / blocks.len() as f64;
    let var = blocks.iter().map(|b| (b - bmean).powi(2)).sum::<f64>() / (blocks.len() - 1) as f64;
    Ok(Plateau { start, end, mean, stderr: (var / blocks.len() as f64).sqrt(), samples: inside.len() })
}

/// Partitioning protocol: halves thermalized at `(T_l, T_r)`, joined at
/// `t = 0`, current through the defect bond recorded until `t_max`.
pub fn steady_current(spec: &ChainSpec, t_left: f64, t_right: f64, opts: &SeriesOptions) -> Result<CurrentSeries> {
    let unit = spec.sites as f64 / spec.max_velocity();
    let (w0, w1) = opts.window;
    if !(0.0 <= w0 && w0 < w1) {
        return Err(Error::InvalidParameter(format!("plateau window ({w0}, {w1}) is empty")));
    }
    let t_max = opts.t_max.unwrap_or(w1 * unit);
    let revival = 0.5 * unit;
    if t_max >= revival {
        return Err(Error::InvalidParameter(format!(
            "t_max = {t_max} reaches the boundary revival at N/(2 v_max) = {revival}"
        )));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {}", opts.dt)));
    }
    let chain = spec.chain();
    let half = spec.half();
    let (gl, gr) = (half.gibbs_covariance(t_left)?, half.gibbs_covariance(t_right)?);
    let n = spec.sites;
    let bond = spec.defect_bond();
    let (start, op) = chain.bond_current_operator(bond)?;
    let rows: Vec<usize> = (start..start + 4).collect();
    let steps = (t_max / opts.dt).floor() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * opts.dt).collect();
    chain.spectrum()?;
    let values: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let r = chain.propagator_rows(&rows, t)?;
            // Γ₀ is block diagonal over the two halves
            let (rl, rr) = (r.columns(0, n), r.columns(n, n));
            let window = rl * &gl * rl.transpose() + rr * &gr * rr.transpose();
            Ok(0.125 * (&op * window).trace())
        })
        .collect::<Result<_>>()?;
    let plateau = plateau(&times, &values, w0 * unit, (w1 * unit).min(t_max))?;
    Ok(CurrentSeries { spec: *spec, t_left, t_right, times, values, plateau })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentRatios {
    pub lattice_over_landauer: f64,
    pub landauer_over_cft: f64,
    pub lattice_over_cft: f64,
}

/// `{spec, plateau_mean, plateau_stderr, landauer, cft_prediction, ratios}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub spec: ChainSpec,
    pub t_left: f64,
    pub t_right: f64,
    pub plateau_mean: f64,
    pub plateau_stderr: f64,
    pub landauer: f64,
    pub zero_energy_transmission: f64,
    pub cft_prediction: f64,
    pub ratios: CurrentRatios,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Compare a plateau with the Landauer integral (numerical `𝒯`) and with
/// `(π𝒯₀/24)(T_l² - T_r²)`.
pub fn summarize(series: &CurrentSeries) -> Result<LatticeSummary> {
    let spec = series.spec;
    let g = spec.coupling;
    let lambda = spec.defect;
    let landauer = landauer_current(
        |w| transmission(lambda, w, g, DEFAULT_SCATTERING_LENGTH).unwrap_or(0.0),
        series.t_left,
        series.t_right,
        g,
    )?;
    let t0 = transmission(lambda, 0.0, g, DEFAULT_SCATTERING_LENGTH)?;
    // the ballistic energy current of a conformal channel does not depend on its velocity
    let cft = std::f64::consts::PI * t0 / 24.0 * (series.t_left.powi(2) - series.t_right.powi(2));
    let mean = series.plateau.mean;
    Ok(LatticeSummary {
        spec,
        t_left: series.t_left,
        t_right: series.t_right,
        plateau_mean: mean,
        plateau_stderr: series.plateau.stderr,
        landauer,
        zero_energy_transmission: t0,
        cft_prediction: cft,
        ratios: CurrentRatios {
            lattice_over_landauer: ratio(mean, landauer),
            landauer_over_cft: ratio(landauer, cft),
            lattice_over_cft: ratio(mean, cft),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub spec: ChainSpec,
    pub right_over_left: f64,
    pub t_left: Vec<f64>,
    pub plateau_means: Vec<f64>,
    pub fit: PowerLawFit,
}

/// Plateau currents at `T_r = ρ T_l` fitted to `a T_l^p`.
pub fn temperature_scaling(
    spec: &ChainSpec,
    t_left: &[f64],
    right_over_left: f64,
    opts: &SeriesOptions,
) -> Result<ScalingReport> {
    spec.chain().spectrum()?;
    let means: Vec<f64> = t_left
        .par_iter()
        .map(|&t| steady_current(spec, t, right_over_left * t, opts).map(|s| s.plateau.mean))
        .collect::<Result<_>>()?;
    let fit = fit_power_law(t_left, &means)?;
    Ok(ScalingReport { spec: *spec, right_over_left, t_left: t_left.to_vec(), plateau_means: means, fit })
}

#[cfg(test)]
mod tests;
