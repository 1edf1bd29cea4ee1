use std::collections::HashMap;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viscopt::adjoint::{
    build_adjoint_load, design_sensitivity, full_delta_j, solve_adjoint_pressure, solve_adjoint_pressure_with,
    solve_adjoint_uphi, vertex_gradients, AdjointLoad, AdjointState,
};
use viscopt::fem::SparseSystem;
use viscopt::mesh::{build_case_geometry, CaseGeometry, Space, TriMesh};
use viscopt::slns::{
    assemble_pressure, assemble_u_phi, evaluate_point, solve_frequency, AirProperties, ComplexField,
    FictitiousRigid, FrequencySolution, Objective, Physics,
};

const W: f64 = 2.0 * std::f64::consts::PI * 2500.0;

fn setup(case: CaseGeometry) -> (TriMesh, FrequencySolution, AirProperties) {
    let mesh = build_case_geometry(&case, 2e-3).unwrap();
    let props = AirProperties::default();
    let sol = solve_frequency(&mesh, W, &props, &FictitiousRigid::default(), Physics::Slns, true).unwrap();
    (mesh, sol, props)
}

fn summed(sys: &SparseSystem) -> HashMap<(usize, usize), C> {
    let mut m = HashMap::new();
    for (i, j, v) in sys.entries() {
        *m.entry((i, j)).or_insert(C::new(0.0, 0.0)) += v;
    }
    m
}

fn assert_complex_symmetric(sys: &SparseSystem) {
    let m = summed(sys);
    let scale = m.values().map(|v| v.norm()).fold(0.0, f64::max);
    for (&(i, j), v) in &m {
        let t = m.get(&(j, i)).copied().unwrap_or_default();
        assert!((v - t).norm() <= 1e-12 * scale, "({i},{j})");
    }
}

#[test]
fn operators_are_complex_symmetric() {
    let (mesh, sol, props) = setup(CaseGeometry::case2());
    let (sys, _) = assemble_pressure(&mesh, &sol.u_v, &sol.u_h, &sol.wn, &props, &FictitiousRigid::default());
    assert_complex_symmetric(&sys);
    let (sys, _, _) = assemble_u_phi(&mesh, sol.wn.kv);
    assert_complex_symmetric(&sys);
}

#[test]
fn zero_load_gives_zero_adjoint() {
    let (mesh, sol, _) = setup(CaseGeometry::case1());
    let load = AdjointLoad::default();
    assert!(load.is_zero());
    let q = solve_adjoint_pressure_with(&mesh, &sol, &load).unwrap();
    assert!(q.values.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn adjoint_identity_with_random_sources() {
    // With A q = b and A δp = δf: bᵀδp = qᵀδf for a symmetric A.
    let (mesh, sol, props) = setup(CaseGeometry::case2());
    let obj = Objective::Absorption(viscopt::mesh::CaseKind::OpenTube);
    let pt = evaluate_point(&mesh, &sol, obj).unwrap();
    let load = build_adjoint_load(&mesh, &pt, obj, 1, sol.wn.k0c).unwrap();
    let q = solve_adjoint_pressure_with(&mesh, &sol, &load).unwrap();
    let (sys, _) = assemble_pressure(&mesh, &sol.u_v, &sol.u_h, &sol.wn, &props, &FictitiousRigid::default());
    let fact = sys.factorize(&vec![false; mesh.n_p2()], "test").unwrap();
    let b = load.vector(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let df: Vec<C> = (0..mesh.n_p2())
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let dp = fact.solve(&df, None).unwrap();
        let lhs: C = b.iter().zip(&dp).map(|(x, y)| x * y).sum();
        let rhs: C = q.values.iter().zip(&df).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm());
    }
    // Standalone path reassembles the same operator.
    let q2 = solve_adjoint_pressure(&mesh, &sol.u_v, &sol.u_h, &sol.wn, &props, &FictitiousRigid::default(), &load)
        .unwrap();
    let err = q.values.iter().zip(&q2.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = q.values.iter().map(|a| a.norm()).fold(0.0, f64::max);
    assert!(err <= 1e-9 * scale);
}

#[test]
fn vertex_gradients_exact_for_linear_fields() {
    let mesh = build_case_geometry(&CaseGeometry::case1(), 3e-3).unwrap();
    let (a, b) = (C::new(2.0, -1.0), C::new(-0.5, 3.0));
    let vals = (0..mesh.n_p2())
        .map(|i| {
            let p = mesh.p2_coords(i);
            a * p[0] + b * p[1] + C::new(7.0, 0.0)
        })
        .collect();
    let f = ComplexField::new(&mesh, Space::P2, vals).unwrap();
    for g in vertex_gradients(&mesh, &f) {
        assert!((g[0] - a).norm() < 1e-9 && (g[1] - b).norm() < 1e-9);
    }
}

#[test]
fn pressure_expansion_scales_with_disc_area() {
    let (mesh, sol, props) = setup(CaseGeometry::case1());
    let obj = Objective::Reflection;
    let pt = evaluate_point(&mesh, &sol, obj).unwrap();
    let load = build_adjoint_load(&mesh, &pt, obj, 1, sol.wn.k0c).unwrap();
    let q = solve_adjoint_pressure_with(&mesh, &sol, &load).unwrap();
    let (v_v, v_h) = solve_adjoint_uphi(&mesh, &sol, &q, &props).unwrap();
    let st = AdjointState {
        omega: W,
        p: sol.p.clone(),
        q,
        u_v: sol.u_v.clone(),
        u_h: sol.u_h.clone(),
        v_v,
        v_h,
    };
    let x0 = [0.09, 0.008];
    let (_, a) = full_delta_j(&mesh, &st, &sol.wn, &props, 4e-4, x0).unwrap();
    let (_, b) = full_delta_j(&mesh, &st, &sol.wn, &props, 2e-4, x0).unwrap();
    assert!(a != 0.0);
    assert!((a / b - 4.0).abs() < 1e-9);
    assert!(full_delta_j(&mesh, &st, &sol.wn, &props, 0.0, x0).is_err());
    assert!(full_delta_j(&mesh, &st, &sol.wn, &props, 1e-4, [1.0, 1.0]).is_err());
}

#[test]
fn sensitivity_vanishes_in_rigid_phase() {
    let s = design_sensitivity(&[1.0, -2.0, 3.0], &[0.0, 1.0, 0.0]);
    assert_eq!(s, vec![1.0, 0.0, 3.0]);
}
