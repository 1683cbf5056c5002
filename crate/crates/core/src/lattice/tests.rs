use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::*;

type CMat = DMatrix<Complex64>;

/// Jordan-Wigner Majoranas on `n` spins: `γ_{2j} = Z…Z X_j`, `γ_{2j+1} = Z…Z Y_j`.
fn jordan_wigner(n: usize) -> Vec<CMat> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let id = CMat::identity(2, 2);
    let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let y = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let z = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let string = |j: usize, op: &CMat| {
        let mut m = CMat::identity(1, 1);
        for l in 0..n {
            let f = if l < j {
                &z
            } else if l == j {
                op
            } else {
                &id
            };
            m = m.kronecker(f);
        }
        m
    };
    (0..n).flat_map(|j| [string(j, &x), string(j, &y)]).collect()
}

fn brute_force_gibbs(chain: &MajoranaChain, temperature: f64) -> DMatrix<f64> {
    let gammas = jordan_wigner(chain.len() / 2);
    let dim = gammas[0].nrows();
    let a = chain.antisymmetric();
    let mut h = CMat::zeros(dim, dim);
    for i in 0..chain.len() {
        for j in 0..chain.len() {
            if a[(i, j)] != 0.0 {
                h += &gammas[i] * &gammas[j] * Complex64::new(0.0, 0.25 * a[(i, j)]);
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let e0 = eig.eigenvalues.min();
    let w: Vec<f64> = eig.eigenvalues.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut rho = CMat::zeros(dim, dim);
    for (k, wk) in w.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        rho += v * v.adjoint() * Complex64::new(wk / z, 0.0);
    }
    let m = chain.len();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            0.0
        } else {
            (Complex64::new(0.0, 1.0) * (&rho * &gammas[i] * &gammas[j]).trace()).re
        }
    })
}

#[test]
fn gibbs_matches_four_site_density_matrix() {
    let chain = MajoranaChain::new(vec![1.0, 0.8, 1.0, 0.5, 1.0, 1.2, 0.9]);
    for temperature in [0.1, 0.7] {
        let fast = chain.gibbs_covariance(temperature).unwrap();
        let slow = brute_force_gibbs(&chain, temperature);
        assert!((fast - slow).amax() < 1e-10, "T = {temperature}");
    }
}

#[test]
fn gibbs_limits() {
    let chain = MajoranaChain::uniform(20, 1.0);
    let g0 = chain.gibbs_covariance(0.0).unwrap();
    for e in covariance_spectrum(&g0) {
        assert!((e.abs() - 1.0).abs() < 1e-10);
    }
    let ginf = chain.gibbs_covariance(f64::INFINITY).unwrap();
    assert_eq!(ginf.amax(), 0.0);
    let g = chain.gibbs_covariance(0.3).unwrap();
    assert!(antisymmetry_deviation(&g) < 1e-14);
    assert!(covariance_spectrum(&g).iter().all(|e| e.abs() < 1.0));
    assert!(chain.gibbs_covariance(-1.0).is_err());
}

#[test]
fn propagator_matches_matrix_exponential() {
    let chain = MajoranaChain::new(vec![1.0, 1.0, 0.6, 1.0, 1.0, 0.3, 1.0, 1.0, 1.0, 1.0, 1.0]);
    for t in [0.0, 0.37, 2.5] {
        let r = chain.propagator(t).unwrap();
        let expected = (chain.antisymmetric() * t).exp();
        assert!((&r - expected).amax() < 1e-12, "t = {t}");
        assert!(orthogonality_deviation(&r) < 1e-12);
    }
}

#[test]
fn evolution_invariants() {
    let spec = ChainSpec::new(40, 1.0, 0.6).unwrap();
    let chain = spec.chain();
    let g0 = partitioned_covariance(&spec, 0.4, 0.1).unwrap();
    let e0 = chain.energy(&g0);
    let s0 = covariance_spectrum(&g0);
    assert!((evolve_covariance(&g0, &chain, 0.0).unwrap() - &g0).amax() < 1e-13);
    for t in [1.0, 7.5, 15.0] {
        let g = evolve_covariance(&g0, &chain, t).unwrap();
        assert!(((chain.energy(&g) - e0) / e0).abs() < 1e-10);
        assert!(antisymmetry_deviation(&g) < 1e-10);
        let s = covariance_spectrum(&g);
        assert!(s.iter().zip(&s0).all(|(a, b)| (a - b).abs() < 1e-10));
    }
}

#[test]
fn windowed_current_matches_full_evolution() {
    let spec = ChainSpec::new(40, 1.0, 0.8).unwrap();
    let chain = spec.chain();
    let g0 = partitioned_covariance(&spec, 0.5, 0.1).unwrap();
    let series =
        steady_current(&spec, 0.5, 0.1, &SeriesOptions { window: (0.25, 0.45), dt: 1.0, t_max: None }).unwrap();
    for (t, v) in series.times.iter().zip(&series.values).step_by(5) {
        let g = evolve_covariance(&g0, &chain, *t).unwrap();
        let full = chain.bond_current(&g, spec.defect_bond()).unwrap();
        assert!((full - v).abs() < 1e-12);
    }
}

#[test]
fn equilibrium_and_disconnection_give_no_current() {
    let spec = ChainSpec::new(40, 1.0, 0.5).unwrap();
    let s = steady_current(&spec, 0.2, 0.2, &SeriesOptions::default()).unwrap();
    assert!(s.values.iter().all(|v| v.abs() < 1e-10));
    let cut = ChainSpec::new(40, 1.0, 0.0).unwrap();
    let s = steady_current(&cut, 0.3, 0.05, &SeriesOptions::default()).unwrap();
    assert!(s.values.iter().all(|v| *v == 0.0));
}

#[test]
fn front_moves_at_the_maximal_group_velocity() {
    // v_max = 2g Majorana sites per unit time
    let spec = ChainSpec::new(120, 1.0, 1.0).unwrap();
    let chain = spec.chain();
    let g0 = partitioned_covariance(&spec, 1.0, 0.0).unwrap();
    let center = spec.defect_bond();
    let arrival = |d: usize| {
        let mut t = 0.0;
        loop {
            t += 0.25;
            let g = evolve_covariance(&g0, &chain, t).unwrap();
            if chain.bond_current(&g, center + d).unwrap() > 1e-3 {
                return t;
            }
        }
    };
    let (d1, d2) = (20, 60);
    let v = (d2 - d1) as f64 / (arrival(d2) - arrival(d1));
    assert!((v - 2.0 * spec.max_velocity()).abs() < 0.15, "front velocity {v}");
}

#[test]
fn revival_and_window_are_guarded() {
    let spec = ChainSpec::new(40, 1.0, 1.0).unwrap();
    let opts = SeriesOptions { t_max: Some(25.0), ..SeriesOptions::default() };
    assert!(steady_current(&spec, 0.1, 0.05, &opts).is_err());
    let opts = SeriesOptions { window: (0.44, 0.45), ..SeriesOptions::default() };
    assert!(matches!(steady_current(&spec, 0.1, 0.05, &opts), Err(Error::NoPlateau(_))));
    assert!(ChainSpec::new(38, 1.0, 1.0).is_err());
    assert!(ChainSpec::new(41, 1.0, 1.0).is_err());
    assert!(ChainSpec::new(40, 1.0, 1.5).is_err());
}

#[test]
fn transmission_limits_and_closed_form() {
    for w in [0.0, 0.3, 1.1, 1.9, -0.7] {
        assert!((transmission(1.0, w, 1.0, 400).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(transmission(0.0, w, 1.0, 400).unwrap(), 0.0);
        for lambda in [0.2, 0.5, 0.9] {
            let t = transmission(lambda, w, 1.0, 400).unwrap();
            assert!((t - transmission_closed_form(lambda, w, 1.0)).abs() < 1e-12);
        }
    }
    assert!(transmission(0.5, 2.0, 1.0, 400).is_err());
}

#[test]
fn zero_energy_transmission_is_length_independent() {
    let a = zero_energy_transmission(0.5, 400).unwrap();
    let b = zero_energy_transmission(0.5, 800).unwrap();
    assert!((a - b).abs() < 1e-6);
    assert!((a - 0.64).abs() < 1e-12);
    assert!((zero_energy_transmission(0.7, 600).unwrap() - 1.96 / 2.2201).abs() < 1e-12);
}

#[test]
fn landauer_limits() {
    let j = landauer_current(|_| 1.0, 0.1, 0.0, 1.0).unwrap();
    let expected = std::f64::consts::PI * 0.01 / 24.0;
    assert!((j - expected).abs() / expected < 1e-6, "{j} vs {expected}");
    assert_eq!(landauer_current(|_| 1.0, 0.1, 0.1, 1.0).unwrap(), 0.0);
    let t0 = 0.64;
    let j = landauer_current(|_| t0, 0.05, 0.02, 1.0).unwrap();
    let cft = std::f64::consts::PI * t0 / 24.0 * (0.05f64.powi(2) - 0.02f64.powi(2));
    assert!((j - cft).abs() / cft < 1e-3);
    let back = landauer_current(|_| t0, 0.02, 0.05, 1.0).unwrap();
    assert!((back + j).abs() < 1e-15);
}

#[test]
fn power_law_fit_recovers_exponent() {
    let x = [0.02, 0.04, 0.06, 0.08];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.0)).collect();
    let f = fit_power_law(&x, &y).unwrap();
    assert!((f.exponent - 2.0).abs() < 1e-12);
    assert!((f.prefactor - 3.0).abs() < 1e-10);
}
