use num_complex::Complex64 as C;
use proptest::prelude::*;

use viscopt::io::{
    read_checkpoint, read_csv, read_mesh, read_vtk, write_checkpoint, write_frequency_csv, write_history_csv,
    write_mesh, write_vtk, FieldData,
};
use viscopt::levelset::{IterationRecord, ResumeState};
use viscopt::mesh::{build_case_geometry, CaseGeometry};
use viscopt::slns::{FrequencyPoint, SParams};

#[test]
fn vtk_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = build_case_geometry(&CaseGeometry::benchmark(), 3e-3).unwrap();
    let nv = mesh.n_vertices();
    let s: Vec<f64> = (0..nv).map(|i| i as f64 * 0.5 - 3.0).collect();
    let z: Vec<C> = (0..nv).map(|i| C::new(i as f64, -1.0 / (1.0 + i as f64))).collect();
    let cell: Vec<f64> = (0..mesh.n_triangles()).map(|t| t as f64).collect();
    let path = dir.path().join("sub/m.vtk");
    write_vtk(
        &path,
        &mesh,
        &[
            ("s", FieldData::Scalar(&s)),
            ("p", FieldData::Complex(&z)),
            ("g", FieldData::Vector([&s, &s])),
        ],
        &[("id", FieldData::Scalar(&cell))],
    )
    .unwrap();
    let v = read_vtk(&path).unwrap();
    assert_eq!(v.points, mesh.vertices());
    assert_eq!(v.triangles, mesh.triangles());
    assert_eq!(v.point_data["s"], s);
    assert_eq!(v.point_data["p_re"], z.iter().map(|c| c.re).collect::<Vec<_>>());
    assert_eq!(v.point_data["p_im"], z.iter().map(|c| c.im).collect::<Vec<_>>());
    assert_eq!(v.point_data["g"].len(), 3 * nv);
    assert_eq!(v.cell_data["id"], cell);
    let regions: Vec<f64> = mesh.regions().iter().map(|r| r.code() as f64).collect();
    assert_eq!(v.cell_data["region"], regions);
}

#[test]
fn vtk_rejects_wrong_length() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = build_case_geometry(&CaseGeometry::case1(), 3e-3).unwrap();
    let bad = vec![0.0; 3];
    assert!(write_vtk(&dir.path().join("x.vtk"), &mesh, &[("b", FieldData::Scalar(&bad))], &[]).is_err());
}

#[test]
fn mesh_round_trip_keeps_labels_and_regions() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = build_case_geometry(&CaseGeometry::benchmark(), 3e-3).unwrap();
    let stem = dir.path().join("mesh");
    write_mesh(&stem, &mesh).unwrap();
    let back = read_mesh(&stem).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.triangles(), mesh.triangles());
    assert_eq!(back.regions(), mesh.regions());
    assert_eq!(back.labels(), mesh.labels());
}

#[test]
fn frequency_csv_leaves_missing_s21_empty() {
    let dir = tempfile::tempdir().unwrap();
    let pts = vec![FrequencyPoint {
        freq_hz: 3000.0,
        omega: 2.0 * std::f64::consts::PI * 3000.0,
        s: SParams {
            s11: C::new(0.5, -0.25),
            s21: None,
        },
        alpha: 0.6875,
        probes: None,
    }];
    let path = dir.path().join("f.csv");
    write_frequency_csv(&path, &pts, Some(&[0.7])).unwrap();
    let t = read_csv(&path).unwrap();
    assert_eq!(t.column("alpha").unwrap(), vec![Some(0.6875)]);
    assert_eq!(t.column("s11_im").unwrap(), vec![Some(-0.25)]);
    assert_eq!(t.column("s21_re").unwrap(), vec![None]);
    assert_eq!(t.column("alpha_flns").unwrap(), vec![Some(0.7)]);
    assert!(write_frequency_csv(&path, &pts, Some(&[])).is_err());
}

#[test]
fn history_csv_nan_metric_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let h = vec![
        IterationRecord {
            iter: 0,
            j: -0.1,
            conv_metric: f64::NAN,
            num_nodes: 10,
            num_tris: 12,
        },
        IterationRecord {
            iter: 1,
            j: -0.2,
            conv_metric: 0.5,
            num_nodes: 11,
            num_tris: 13,
        },
    ];
    let path = dir.path().join("h.csv");
    write_history_csv(&path, &h).unwrap();
    let t = read_csv(&path).unwrap();
    assert_eq!(t.column("conv_metric").unwrap(), vec![None, Some(0.5)]);
    assert_eq!(t.column("J").unwrap(), vec![Some(-0.1), Some(-0.2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn checkpoint_round_trip(
        iter in 0usize..1000,
        phi in proptest::collection::vec(-1.0f64..1.0, 1..50),
        with_filter in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let filtered = with_filter.then(|| phi.iter().map(|x| x * 3.0 - 1e-7).collect::<Vec<_>>());
        let st = ResumeState { iter, phi, filtered };
        let path = dir.path().join("c.txt");
        write_checkpoint(&path, &st).unwrap();
        prop_assert_eq!(read_checkpoint(&path).unwrap(), st);
    }
}

#[test]
fn checkpoint_rejects_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    std::fs::write(&path, "not a checkpoint\n").unwrap();
    assert!(read_checkpoint(&path).is_err());
    assert!(read_checkpoint(&dir.path().join("missing")).is_err());
}
