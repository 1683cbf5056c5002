use super::*;
use crate::fock::{Chirality, Side};

fn psi(ch: Chirality, side: Side, sign: i64) -> LocalField {
    LocalField::fermion(Flavor::Psi, ch, side, Position::at_x(sign))
}

fn sym(s: Symbol) -> Coefficient {
    Poly::symbol(s)
}

#[test]
fn smatrix_on_incoming_fermion() {
    let theta = FieldMap::fermion_symbolic();
    let theta0 = FieldMap::fermion_reflection();
    let e = FieldExpression::field(psi(Chirality::Chiral, Side::Right, 1));
    let out = apply_smatrix(&e, &theta, &theta0).unwrap();
    let mut expect = FieldExpression::zero();
    expect.push(sym(Symbol::Sin), vec![psi(Chirality::Chiral, Side::Right, 1)]);
    expect.push(sym(Symbol::Cos).neg(), vec![psi(Chirality::AntiChiral, Side::Left, -1)]);
    assert_eq!(out, expect.normalize());

    let d = FieldExpression::field(psi(Chirality::Chiral, Side::Right, 1).derivative(1));
    let out = apply_smatrix(&d, &theta, &theta0).unwrap();
    assert_eq!(out.coefficient(&[psi(Chirality::AntiChiral, Side::Left, -1).derivative(1)]), sym(Symbol::Cos));
}

#[test]
fn smatrix_leaves_outgoing_fields() {
    let theta = FieldMap::fermion_symbolic();
    let theta0 = FieldMap::fermion_reflection();
    let f = psi(Chirality::Chiral, Side::Left, -1);
    let out = apply_smatrix(&FieldExpression::field(f.clone()), &theta, &theta0).unwrap();
    assert_eq!(out, FieldExpression::field(f));
}

#[test]
fn reflecting_defect_gives_trivial_smatrix() {
    let theta0 = FieldMap::fermion_reflection();
    let s = smatrix_map(&theta0, &theta0).unwrap();
    for k in s.keys() {
        assert_eq!(s.image(k).unwrap(), &[(Poly::one(), *k)]);
    }
}

#[test]
fn current_matches_closed_form_on_both_sides() {
    let m = NessModel::fermion();
    let r = energy_current_at(&m, Side::Right).unwrap();
    let l = energy_current_at(&m, Side::Left).unwrap();
    assert_eq!(r, fermion_current_closed_form());
    assert_eq!(l, r);
}

#[test]
fn current_limits() {
    let j = energy_current(&NessModel::fermion()).unwrap();
    let full = at_angle(&j, &Angle::zero()).unwrap();
    let expect =
        sym(Symbol::Pi).mul(&sym(Symbol::Tl).pow(2).sub(&sym(Symbol::Tr).pow(2))).scale(&CRational::real(rat(1, 24)));
    assert_eq!(full, expect);
    assert!(at_angle(&j, &Angle::quarter_turn()).unwrap().is_zero());
    assert_eq!(swap_temperatures(&j), j.neg());
}

#[test]
fn current_and_entropy_at_two_to_one() {
    let j = energy_current(&NessModel::fermion()).unwrap();
    let w = GibbsWeights::new(2.0, 1.0).unwrap();
    let je = evaluate(&j, 1.0, &w).unwrap();
    assert!((je - std::f64::consts::PI / 8.0).abs() < 1e-14);
    let sigma = entropy_production(je, &w);
    assert!((sigma - std::f64::consts::PI / 16.0).abs() < 1e-14);
    let exact = at_temperatures(&at_angle(&j, &Angle::zero()).unwrap(), &rat(2, 1), &rat(1, 1));
    assert_eq!(exact, sym(Symbol::Pi).scale(&CRational::real(rat(1, 8))));
}

#[test]
fn entropy_numerator_is_nonnegative_form() {
    let j = energy_current(&NessModel::fermion()).unwrap();
    let n = entropy_numerator(&j);
    // (Tl - Tr)² (Tl + Tr) π cos²/24
    let d = sym(Symbol::Tl).sub(&sym(Symbol::Tr));
    let expect = d
        .pow(2)
        .mul(&sym(Symbol::Tl).add(&sym(Symbol::Tr)))
        .mul(&sym(Symbol::Pi))
        .mul(&sym(Symbol::Cos).pow(2))
        .scale(&CRational::real(rat(1, 24)));
    assert_eq!(n, expect);
}

#[test]
fn entropy_grid_is_nonnegative() {
    let temps: Vec<f64> = (1..=5).map(|i| 0.5 * i as f64).collect();
    let alphas = [0.0, 0.7, std::f64::consts::FRAC_PI_2, 2.0];
    let r = entropy_grid(&temps, &alphas).unwrap();
    assert_eq!(r.points, 100);
    assert!(r.all_nonnegative);
    assert!(r.zeros_only_at_equilibrium_or_reflection);
}

#[test]
fn continuity_in_both_regimes() {
    let m = NessModel::fermion();
    let after = check_global_continuity(&m, Regime::After).unwrap();
    assert!(after.holds, "{} != {}", after.lhs, after.rhs);
    assert!(after.cross_terms_cancelled > 0);
    let before = check_global_continuity(&m, Regime::Before).unwrap();
    assert!(before.holds);
    assert_eq!(before.cross_terms_cancelled, 0);
}

#[test]
fn evolution_before_and_after_crossing() {
    let theta = FieldMap::fermion_symbolic();
    let f = psi(Chirality::Chiral, Side::Right, 1);
    let before = evolve(&FieldExpression::field(f.clone()), Regime::Before, &theta).unwrap();
    assert_eq!(before, FieldExpression::field(f.at(Position::new(1, -1))));
    let after = evolve(&FieldExpression::field(f), Regime::After, &theta).unwrap();
    let chi = LocalField::fermion(Flavor::Psi, Chirality::Chiral, Side::Left, Position::new(1, -1));
    let anti = LocalField::fermion(Flavor::Psi, Chirality::AntiChiral, Side::Right, Position::new(-1, 1));
    assert_eq!(after.coefficient(&[chi]), sym(Symbol::Cos));
    assert_eq!(after.coefficient(&[anti]), sym(Symbol::Sin));
}

#[test]
fn mixed_bilinear_has_zero_expectation() {
    let e = FieldExpression::product(vec![
        psi(Chirality::AntiChiral, Side::Left, -1),
        psi(Chirality::Chiral, Side::Right, 1),
    ]);
    assert!(expectation(&e).unwrap().is_zero());
}

#[test]
fn charged_override_breaks_the_rules() {
    let q = FieldExpression::field(LocalField::charged("V", Chirality::Chiral, Side::Right, Position::at_x(1)));
    assert!(expectation(&q).unwrap().is_zero());
    let rules = ExpectationRules { charged: Some(Poly::one()) };
    assert_eq!(expectation_with(&q, &rules).unwrap(), Poly::one());
}

#[test]
fn unsupported_positions_are_rejected() {
    let f = LocalField::fermion(Flavor::Psi, Chirality::Chiral, Side::Right, Position::new(2, 0));
    assert!(evolve(&FieldExpression::field(f), Regime::After, &FieldMap::fermion_symbolic()).is_err());
}

#[test]
fn exact_angle_map_and_inverse() {
    let a: Angle = "3/5,4/5".parse().unwrap();
    let m = FieldMap::fermion_angle(&a).unwrap();
    assert!(m.inverse().is_err());
    assert!(FieldMap::fermion_angle(&Angle::Float(0.3)).is_err());
}

#[test]
fn smatrix_report_checks() {
    let r = smatrix_report(None).unwrap();
    assert!(r.sum_rule && r.reflection_is_identity);
    let r = smatrix_report(Some(&Angle::quarter_turn())).unwrap();
    assert!(r.passed);
    assert!(r.records[0].image_at_alpha.as_deref().unwrap().contains("psi^r(x)"));
    let r = smatrix_report(Some(&Angle::Float(0.3))).unwrap();
    assert!(r.passed);
}
