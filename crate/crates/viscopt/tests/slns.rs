use num_complex::Complex64 as C;
use proptest::prelude::*;

use viscopt::mesh::{build_case_geometry, CaseGeometry, CaseKind};
use viscopt::slns::{
    benchmark_reflection, compute_alpha, compute_wavenumbers, evaluate_point, solve_frequency, AirProperties,
    FictitiousRigid, FrequencyGrid, Objective, Physics, SParams,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[test]
fn wavenumbers_match_closed_form() {
    let props = AirProperties::default();
    let w = TWO_PI * 3000.0;
    let wn = compute_wavenumbers(&props, w);
    // k_v² = −iωρ0/μ, k_h² = −iωρ0Cp/κ, principal root.
    let kv2 = wn.kv * wn.kv;
    assert!((kv2 - C::new(0.0, -w * props.rho0 / props.mu)).norm() < 1e-9 * kv2.norm());
    let kh2 = wn.kh * wn.kh;
    assert!((kh2 - C::new(0.0, -w * props.rho0 * props.cp / props.kappa)).norm() < 1e-9 * kh2.norm());
    assert!(wn.kv.re > 0.0 && wn.kv.im < 0.0);
    assert!(wn.kh.re > 0.0 && wn.kh.im < 0.0);
    // Stokes layer thickness sqrt(2μ/(ωρ0)).
    let dv = (2.0 * props.mu / (w * props.rho0)).sqrt();
    assert!((wn.delta_v - dv).abs() < 1e-12 * dv);
    let dh = (2.0 * props.kappa / (w * props.rho0 * props.cp)).sqrt();
    assert!((wn.delta_h - dh).abs() < 1e-12 * dh);
    assert!((wn.lambda_v - TWO_PI * dv / 2f64.sqrt()).abs() < 1e-12);
    let k0 = w / props.c0;
    assert!((wn.k0c - C::new(k0, 0.0)).norm() < 1e-12 * k0);
}

#[test]
fn bulk_loss_lowers_effective_speed_phase() {
    let props = AirProperties {
        tau_loss: 0.01,
        ..AirProperties::default()
    };
    let c = props.c_eff();
    assert!((c - C::new(props.c0, 0.0) / C::new(1.0, -0.01)).norm() < 1e-9);
    // exp(iωt): the incident wave exp(−ikx) decays, so Im k < 0.
    let wn = compute_wavenumbers(&props, TWO_PI * 3000.0);
    assert!(wn.k0c.im < 0.0);
    assert!((wn.k0c - C::new(wn.k0, -0.01 * wn.k0)).norm() < 1e-9);
}

#[test]
fn frequency_grid_spacing() {
    let g = FrequencyGrid::from_hz(3000.0, 6000.0, 20).unwrap();
    let w = g.omegas();
    assert_eq!(w.len(), 21);
    assert!((g.d_omega() - TWO_PI * 150.0).abs() < 1e-9);
    assert!((w[20] - TWO_PI * 6000.0).abs() < 1e-6);
    assert!(FrequencyGrid::from_hz(6000.0, 3000.0, 4).is_err());
    assert!(FrequencyGrid::from_hz(-1.0, 3000.0, 4).is_err());
}

#[test]
fn lossless_closed_tube_reflects_everything() {
    let case = CaseGeometry::case1();
    let mesh = build_case_geometry(&case, 1e-3).unwrap();
    let props = AirProperties {
        tau_loss: 0.0,
        ..AirProperties::default()
    };
    for f in [2000.0, 4500.0] {
        let sol = solve_frequency(&mesh, TWO_PI * f, &props, &FictitiousRigid::default(), Physics::NoLayers, false)
            .unwrap();
        let pt = evaluate_point(&mesh, &sol, Objective::Absorption(CaseKind::ClosedTube)).unwrap();
        assert!(pt.alpha.abs() < 1e-3, "alpha = {}", pt.alpha);
    }
}

#[test]
fn lossless_open_tube_transmits() {
    let case = CaseGeometry::case2();
    let mesh = build_case_geometry(&case, 1e-3).unwrap();
    let props = AirProperties {
        tau_loss: 0.0,
        ..AirProperties::default()
    };
    let sol =
        solve_frequency(&mesh, TWO_PI * 3000.0, &props, &FictitiousRigid::default(), Physics::NoLayers, false).unwrap();
    let pt = evaluate_point(&mesh, &sol, Objective::Absorption(CaseKind::OpenTube)).unwrap();
    assert!(pt.s.s11.norm() < 1e-2, "|S11| = {}", pt.s.s11.norm());
    assert!((pt.s.s21.unwrap().norm() - 1.0).abs() < 1e-3);
}

#[test]
fn viscothermal_losses_absorb() {
    let case = CaseGeometry::case1();
    let mesh = build_case_geometry(&case, 1e-3).unwrap();
    let props = AirProperties::default();
    let sol =
        solve_frequency(&mesh, TWO_PI * 4000.0, &props, &FictitiousRigid::default(), Physics::Slns, false).unwrap();
    let pt = evaluate_point(&mesh, &sol, Objective::Absorption(CaseKind::ClosedTube)).unwrap();
    assert!(pt.alpha > 0.0 && pt.alpha < 1.0);
}

#[test]
fn two_line_method_recovers_plane_wave_reflection() {
    let k = C::new(TWO_PI * 2000.0 / 341.2, 0.0);
    let r = C::from_polar(0.6, 0.7);
    let i = C::new(0.0, 1.0);
    let p = |x: f64| (-i * k * x).exp() + r * (i * k * x).exp();
    let d_w = 0.01;
    let est = benchmark_reflection(p(0.0), p(d_w), k, d_w).unwrap();
    assert!((est - r).norm() < 1e-12);
    // Reference plane shifts only the phase.
    let shifted = benchmark_reflection(p(0.03), p(0.03 + d_w), k, d_w).unwrap();
    assert!((shifted.norm() - 0.6).abs() < 1e-12);
}

proptest! {
    #[test]
    fn alpha_closed_and_open(r1 in 0.0f64..1.0, t in 0.0f64..1.0, a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let r2 = t * (1.0 - r1 * r1).sqrt();
        let s = SParams { s11: C::from_polar(r1, a), s21: None };
        let alpha = compute_alpha(&s, CaseKind::ClosedTube).unwrap();
        prop_assert!((alpha - (1.0 - r1 * r1)).abs() < 1e-12);
        let s = SParams { s11: C::from_polar(r1, a), s21: Some(C::from_polar(r2, b)) };
        let alpha = compute_alpha(&s, CaseKind::OpenTube).unwrap();
        prop_assert!((alpha - (1.0 - r1 * r1 - r2 * r2)).abs() < 1e-12);
    }
}
