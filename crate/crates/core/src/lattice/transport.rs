use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of the auxiliary scattering chain.
pub const DEFAULT_SCATTERING_LENGTH: usize = 400;

/// Relative accuracy of the Landauer integral.
const LANDAUER_RTOL: f64 = 1e-8;

/// Transmission probability at single-particle energy `ω` across a bond
/// scaled by `λ`, by transfer-matrix propagation through a chain of `length`
/// sites with the defect in the middle. Bulk dispersion `ω = -2g cos k`.
pub fn transmission(lambda: f64, omega: f64, coupling: f64, length: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("defect λ must lie in [0, 1], got {lambda}")));
    }
    if length < 4 {
        return Err(Error::InvalidParameter(format!("scattering chain of {length} sites is too short")));
    }
    let band = 2.0 * coupling;
    if !(omega.abs() < band) {
        return Err(Error::InvalidParameter(format!("ω = {omega} outside the open band (-{band}, {band})")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let k = (-omega / band).acos();
    let bond = |n: usize| if n + 1 == length / 2 { lambda * coupling } else { coupling };
    // outgoing wave e^{ikn} on the right end, propagated leftwards
    let wave = |n: usize| Complex64::from_polar(1.0, k * n as f64);
    let (mut next, mut cur) = (wave(length - 1), wave(length - 2));
    for n in (1..length - 1).rev() {
        // ω ψ_n = -g_{n-1} ψ_{n-1} - g_n ψ_{n+1}
        let prev = (-omega * cur - bond(n) * next) / bond(n - 1);
        next = cur;
        cur = prev;
    }
    let (psi0, psi1) = (cur, next);
    let amp = (psi1 - psi0 * Complex64::from_polar(1.0, -k)) / Complex64::new(0.0, 2.0 * k.sin());
    let t = 1.0 / amp.norm_sqr();
    if !t.is_finite() {
        return Err(Error::Numerical(format!("transfer matrix overflow at ω = {omega}")));
    }
    Ok(t)
}

/// Mid-band (`ω → 0⁺`) transmission.
pub fn zero_energy_transmission(lambda: f64, length: usize) -> Result<f64> {
    transmission(lambda, 0.0, 1.0, length)
}

/// `4λ² sin²k / (λ⁴ + 1 - 2λ² cos 2k)` with `ω = -2g cos k`.
pub fn transmission_closed_form(lambda: f64, omega: f64, coupling: f64) -> f64 {
    let k = (-omega / (2.0 * coupling)).acos();
    let l2 = lambda * lambda;
    4.0 * l2 * k.sin().powi(2) / (l2 * l2 + 1.0 - 2.0 * l2 * (2.0 * k).cos())
}

fn fermi(omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return if omega < 0.0 {
            1.0
        } else if omega == 0.0 {
            0.5
        } else {
            0.0
        };
    }
    0.5 * (1.0 - (omega / (2.0 * t)).tanh())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let out = quadrature::integrate(f, a, b, tol);
    if out.error_estimate <= tol {
        return Ok(out.integral);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] did not reach {tol:e} (estimate {:e})",
            out.error_estimate
        )));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, 0.5 * tol, depth - 1)? + adaptive(f, m, b, 0.5 * tol, depth - 1)?)
}

/// `J = (1/2π) ∫₀^{2g} ω 𝒯(ω) [f_{T_l}(ω) - f_{T_r}(ω)] dω`, relative error
/// at most `1e-8`.
pub fn landauer_current(
    transmission: impl Fn(f64) -> f64 + Sync,
    t_left: f64,
    t_right: f64,
    coupling: f64,
) -> Result<f64> {
    for t in [t_left, t_right] {
        if t.is_nan() || t < 0.0 || t.is_infinite() {
            return Err(Error::InvalidParameter(format!("temperature must be finite and ≥ 0, got {t}")));
        }
    }
    if t_left == t_right {
        return Ok(0.0);
    }
    let band = 2.0 * coupling;
    // beyond 60 T the occupations are below e^{-60}
    let upper = band.min(60.0 * t_left.max(t_right));
    let integrand = |w: f64| w * transmission(w) * (fermi(w, t_left) - fermi(w, t_right));
    // split at a few thermal lengths so each piece is smooth on its scale
    let scale = t_left.max(t_right);
    let mut edges = vec![0.0];
    let mut e = scale;
    while e < upper {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(upper);
    let piece = |i: usize, tol: f64| adaptive(&integrand, edges[i], edges[i + 1], tol, 24);
    let rough: f64 = (0..edges.len() - 1).map(|i| piece(i, 1e-6 * scale * scale)).sum::<Result<f64>>()?;
    let tol = LANDAUER_RTOL * rough.abs() / (edges.len() as f64);
    let fine: f64 = (0..edges.len() - 1).map(|i| piece(i, tol)).sum::<Result<f64>>()?;
    Ok(fine / (2.0 * std::f64::consts::PI))
}

/// Least-squares fit of `y = a x^p` in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
    pub exponent_stderr: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidParameter("power-law fit needs at least 3 paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let intercept = my - p * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - p * a).powi(2)).sum();
    let se = if lx.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(PowerLawFit { prefactor: intercept.exp(), exponent: p, exponent_stderr: se })
}
