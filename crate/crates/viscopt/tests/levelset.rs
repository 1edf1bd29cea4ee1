use proptest::prelude::*;

use viscopt::levelset::{
    check_convergence, convergence_metric, filter_sensitivity, init_levelset, update_levelset, DesignNodes, GammaPhiN,
    InitPreset, LevelSetField, OptConfig, SensitivityState,
};
use viscopt::mesh::{build_case_geometry, CaseGeometry, CaseKind, TriMesh};

fn setup(case: &CaseGeometry) -> (TriMesh, DesignNodes) {
    let bg = build_case_geometry(case, 2e-3).unwrap();
    let nodes = DesignNodes::new(&bg, GammaPhiN::for_case(case.kind)).unwrap();
    (bg, nodes)
}

#[test]
fn filter_first_call_passes_through_then_blends() {
    let mut st = SensitivityState::default();
    let a = filter_sensitivity(&mut st, &[1.0, -2.0], 0.25).unwrap();
    assert_eq!(a, vec![1.0, -2.0]);
    let b = filter_sensitivity(&mut st, &[5.0, 2.0], 0.25).unwrap();
    assert_eq!(b, vec![0.25 * 5.0 + 0.75 * 1.0, 0.25 * 2.0 + 0.75 * -2.0]);
    assert!(filter_sensitivity(&mut st, &[1.0], 0.25).is_err());
    assert!(filter_sensitivity(&mut st, &[1.0, 1.0], 0.0).is_err());
}

#[test]
fn convergence_metric_examples() {
    assert_eq!(convergence_metric(&[1.0, 2.0], 2), None);
    // |2−1|/1 = 1, |4−2|/2 = 1.
    assert_eq!(convergence_metric(&[1.0, 2.0, 4.0], 2), Some(1.0));
    // Only the last two steps count.
    assert!((convergence_metric(&[9.0, 1.0, 1.0, 1.1], 2).unwrap() - 0.05).abs() < 1e-15);
    assert!(check_convergence(&[-0.5; 12], 10, 5e-3));
    assert!(!check_convergence(&[-0.5; 10], 10, 5e-3));
    assert_eq!(convergence_metric(&[0.0, 1.0], 1), Some(f64::INFINITY));
}

#[test]
fn gamma_selection_per_case() {
    assert_eq!(GammaPhiN::for_case(CaseKind::ClosedTube), GammaPhiN::Outer);
    assert_eq!(GammaPhiN::for_case(CaseKind::OpenTube), GammaPhiN::None);
    assert_eq!(GammaPhiN::for_case(CaseKind::Benchmark), GammaPhiN::NonDesignInterface);
}

#[test]
fn dirichlet_everywhere_without_neumann_part() {
    let case = CaseGeometry::case2();
    let bg = build_case_geometry(&case, 2e-3).unwrap();
    let none = DesignNodes::new(&bg, GammaPhiN::None).unwrap();
    let outer = DesignNodes::new(&bg, GammaPhiN::Outer).unwrap();
    for e in bg.design_boundary_edges() {
        let [a, b] = bg.edges()[e];
        assert!(none.fixed[a] && none.fixed[b]);
    }
    let free = |n: &DesignNodes| (0..bg.n_vertices()).filter(|&v| n.free(v)).count();
    assert!(free(&outer) >= free(&none));
    assert!(free(&none) > 0);
}

#[test]
fn init_presets() {
    let case = CaseGeometry::benchmark();
    let (bg, nodes) = setup(&case);
    let air = init_levelset(&bg, &case, &nodes, &InitPreset::AllAir).unwrap();
    assert!(air.phi.iter().all(|&p| p == -1.0));
    let rigid = init_levelset(&bg, &case, &nodes, &InitPreset::AllRigid).unwrap();
    for v in 0..bg.n_vertices() {
        assert_eq!(rigid.phi[v], if nodes.free(v) { 1.0 } else { -1.0 });
    }
    let two = init_levelset(&bg, &case, &nodes, &InitPreset::TwoChannel { width: 4e-3 }).unwrap();
    let n_air = |ls: &LevelSetField| ls.chi().iter().filter(|&&c| c == 0.0).count();
    assert!(n_air(&two) > n_air(&rigid));
    assert!(init_levelset(&bg, &case, &nodes, &InitPreset::Custom { values: None }).is_err());
    assert!(init_levelset(&bg, &case, &nodes, &InitPreset::Custom { values: Some(vec![0.0; 3]) }).is_err());
    let custom = init_levelset(
        &bg,
        &case,
        &nodes,
        &InitPreset::Custom {
            values: Some(vec![7.0; bg.n_vertices()]),
        },
    )
    .unwrap();
    for v in 0..bg.n_vertices() {
        assert_eq!(custom.phi[v], if nodes.fixed[v] { -1.0 } else { 1.0 });
    }
}

#[test]
fn negative_sensitivity_grows_rigid_phase() {
    let case = CaseGeometry::case1();
    let (bg, nodes) = setup(&case);
    let cfg = OptConfig::for_case(&case);
    let ls = init_levelset(&bg, &case, &nodes, &InitPreset::AllAir).unwrap();
    let jbar = vec![-1.0; bg.n_vertices()];
    let next = update_levelset(&bg, &ls, &jbar, &cfg, &nodes).unwrap();
    let grew = (0..bg.n_vertices()).filter(|&v| nodes.free(v) && next.phi[v] > -1.0).count();
    assert!(grew > 0);
    let pos = vec![1.0; bg.n_vertices()];
    let back = update_levelset(&bg, &ls, &pos, &cfg, &nodes).unwrap();
    assert!(back.phi.iter().all(|&p| p == -1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn update_stays_bounded_and_respects_fixed_nodes(
        seed in proptest::collection::vec(-3.0f64..3.0, 8),
        k_dt in 0.01f64..2.0,
    ) {
        let case = CaseGeometry::case1();
        let (bg, nodes) = setup(&case);
        let cfg = OptConfig { k_dt, ..OptConfig::for_case(&case) };
        let nv = bg.n_vertices();
        let pick = |v: usize, s: f64| seed[(v * 7 + (s as usize)) % seed.len()];
        let phi: Vec<f64> = (0..nv).map(|v| if nodes.fixed[v] { -1.0 } else { pick(v, 0.0).clamp(-1.0, 1.0) }).collect();
        let jbar: Vec<f64> = (0..nv).map(|v| pick(v, 3.0)).collect();
        let next = update_levelset(&bg, &LevelSetField { phi }, &jbar, &cfg, &nodes).unwrap();
        for v in 0..nv {
            prop_assert!((-1.0..=1.0).contains(&next.phi[v]));
            if !nodes.free(v) {
                prop_assert_eq!(next.phi[v], -1.0);
            }
        }
    }

    #[test]
    fn filter_is_convex_combination(
        a in proptest::collection::vec(-10.0f64..10.0, 5),
        b in proptest::collection::vec(-10.0f64..10.0, 5),
        t in 0.01f64..1.0,
    ) {
        let mut st = SensitivityState::default();
        filter_sensitivity(&mut st, &a, t).unwrap();
        let out = filter_sensitivity(&mut st, &b, t).unwrap();
        for i in 0..5 {
            let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
            prop_assert!(out[i] >= lo - 1e-12 && out[i] <= hi + 1e-12);
        }
    }
}
