use std::collections::BTreeMap;

use proptest::prelude::*;

use impurity_cft::defect::Angle;
use impurity_cft::lattice::{
    covariance_spectrum, evolve_covariance, landauer_current, transmission, transmission_closed_form, MajoranaChain,
};
use impurity_cft::ness::{self, Coefficient, GibbsWeights, NessModel};
use impurity_cft::scalar::{parse_rational, rat};
use impurity_cft::su2k;
use impurity_cft::symbolic::{CRational, Poly, Symbol};
use impurity_cft::Rational;

fn symbol() -> impl Strategy<Value = Symbol> {
    prop::sample::select(Symbol::ALL.to_vec())
}

fn coefficient() -> impl Strategy<Value = CRational> {
    (-5i64..=5, 1i64..=4, -3i64..=3).prop_map(|(n, d, i)| CRational::new(rat(n, d), rat(i, 2)))
}

fn monomial() -> impl Strategy<Value = Coefficient> {
    (coefficient(), prop::collection::vec((symbol(), 1u32..=3), 0..3))
        .prop_map(|(c, syms)| syms.into_iter().fold(Poly::constant(c), |p, (s, e)| p.mul(&Poly::symbol(s).pow(e))))
}

fn poly() -> impl Strategy<Value = Coefficient> {
    prop::collection::vec(monomial(), 0..4).prop_map(|ms| ms.iter().fold(Poly::zero(), |a, m| a.add(m)))
}

/// A point satisfying the relations the reduction rules encode.
fn consistent_values(alpha: f64, a: f64, rr: f64) -> BTreeMap<Symbol, f64> {
    [
        (Symbol::Pi, std::f64::consts::PI),
        (Symbol::Cos, alpha.cos()),
        (Symbol::Sin, alpha.sin()),
        (Symbol::Tl, 0.7),
        (Symbol::Tr, 1.3),
        (Symbol::S, (1.0 - rr).sqrt()),
        (Symbol::R, a),
        (Symbol::Rbar, rr / a),
        (Symbol::InvSqrt2, std::f64::consts::FRAC_1_SQRT_2),
    ]
    .into_iter()
    .collect()
}

/// Pythagorean point `((m²-n²)/(m²+n²), 2mn/(m²+n²))`.
fn exact_angle() -> impl Strategy<Value = Angle> {
    (1i64..12, 0i64..12, any::<bool>()).prop_map(|(m, n, flip)| {
        let d = m * m + n * n;
        let s = if flip { -2 * m * n } else { 2 * m * n };
        Angle::exact(rat(m * m - n * n, d), rat(s, d)).unwrap()
    })
}

proptest! {
    #[test]
    fn polynomial_ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn reduction_respects_the_relations(a in poly(), b in poly(), alpha in -3.0f64..3.0, r in 0.3f64..2.0, rr in 0.0f64..1.0) {
        let v = consistent_values(alpha, r, rr);
        let lhs = a.mul(&b).eval(&v).unwrap();
        let rhs = a.eval(&v).unwrap() * b.eval(&v).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn rationals_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let q = rat(n, d);
        prop_assert_eq!(parse_rational(&q.to_string()), Some(q));
    }

    #[test]
    fn exact_angles_compose_on_the_circle(a in exact_angle(), b in exact_angle()) {
        let Angle::Exact { cos, sin } = a.add(&b) else { panic!("exact sum expected") };
        prop_assert_eq!(&cos * &cos + &sin * &sin, rat(1, 1));
        prop_assert!(a.add(&a.neg()).same_rotation(&Angle::zero()));
    }

    #[test]
    fn fermion_current_is_odd_and_dissipative(alpha in 0.0f64..std::f64::consts::PI, tl in 0.01f64..5.0, tr in 0.01f64..5.0) {
        let j = ness::energy_current(&NessModel::fermion()).unwrap();
        let forward = ness::evaluate_at(&j, alpha.cos(), tl, tr).unwrap();
        let backward = ness::evaluate_at(&j, alpha.cos(), tr, tl).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-12 * forward.abs().max(1.0));
        let w = GibbsWeights::new(tl, tr).unwrap();
        prop_assert!(ness::entropy_production(forward, &w) >= -1e-15);
    }

    #[test]
    fn fermion_current_at_exact_angles(angle in exact_angle(), tl in 0u32..20, tr in 0u32..20) {
        let j = ness::energy_current(&NessModel::fermion()).unwrap();
        let (tl, tr) = (rat(tl as i64, 4), rat(tr as i64, 4));
        let Angle::Exact { cos, .. } = &angle else { unreachable!() };
        let got = ness::at_temperatures(&ness::at_angle(&j, &angle).unwrap(), &tl, &tr);
        let want: Rational = cos * cos * (&tl * &tl - &tr * &tr) / rat(24, 1);
        prop_assert_eq!(got, Poly::symbol(Symbol::Pi).scale(&CRational::real(want)));
    }

    #[test]
    fn su2k_coefficients_sum_to_one(k in 1u32..40, p in 0i64..=12) {
        let rr = rat(p, 12);
        let b = su2k::rotate_u1_stress().unwrap();
        let u1 = su2k::neutral_value(&b.t_u1, k, &rr).unwrap();
        let zk = su2k::neutral_value(&b.t_zk, k, &rr).unwrap();
        let kq = rat(k as i64, 1);
        prop_assert_eq!(&u1, &(rat(1, 1) - &rr + &rr / &kq));
        prop_assert_eq!(&zk, &((&kq + rat(2, 1)) / (rat(2, 1) * &kq) * &rr));
        // c(ℤ_k parafermion) = 2(k-1)/(k+2)
        let c_zk = rat(2 * (k as i64 - 1), k as i64 + 2);
        prop_assert_eq!(u1 + c_zk * zk, rat(1, 1));
    }

    #[test]
    fn transfer_matrix_matches_closed_form(lambda in 0.05f64..1.0, omega in -1.95f64..1.95) {
        let t = transmission(lambda, omega, 1.0, 400).unwrap();
        prop_assert!((t - transmission_closed_form(lambda, omega, 1.0)).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gibbs_states_are_physical(bonds in prop::collection::vec(0.2f64..1.5, 7..15), t in 0.02f64..3.0, time in 0.0f64..10.0) {
        let chain = MajoranaChain::new(if bonds.len() % 2 == 0 { bonds[1..].to_vec() } else { bonds });
        let g = chain.gibbs_covariance(t).unwrap();
        prop_assert!((&g + g.transpose()).amax() < 1e-13);
        let spec = covariance_spectrum(&g);
        prop_assert!(spec.iter().all(|e| e.abs() < 1.0));
        let evolved = covariance_spectrum(&evolve_covariance(&g, &chain, time).unwrap());
        prop_assert!(spec.iter().zip(&evolved).all(|(a, b)| (a - b).abs() < 1e-10));
        // a Gibbs state is stationary
        prop_assert!((evolve_covariance(&g, &chain, time).unwrap() - &g).amax() < 1e-10);
    }

    #[test]
    fn landauer_is_odd_in_the_bias(t0 in 0.0f64..1.0, tl in 0.01f64..0.2, tr in 0.01f64..0.2) {
        let forward = landauer_current(|_| t0, tl, tr, 1.0).unwrap();
        let backward = landauer_current(|_| t0, tr, tl, 1.0).unwrap();
        prop_assert!((forward + backward).abs() <= 1e-12 * forward.abs().max(1e-12));
        prop_assert!(forward * (tl - tr) >= 0.0);
    }
}
