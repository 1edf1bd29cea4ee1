use std::path::Path;

use viscopt::cli::run;
use viscopt::io::{read_csv, read_vtk};

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("viscopt").chain(args.iter().copied()).map(String::from).collect()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(argv(&["bogus"])), 2);
    assert_eq!(run(argv(&["solve", "--nope"])), 2);
    assert_eq!(run(argv(&[])), 2);
}

#[test]
fn help_exits_0() {
    assert_eq!(run(argv(&["--help"])), 0);
}

#[test]
fn bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "case = \"closed-tube\"\nnot_a_key = 3\n");
    assert_eq!(run(argv(&["solve", "--config", &cfg])), 1);
    assert_eq!(run(argv(&["sweep", "--config", "/definitely/missing.toml"])), 1);
}

#[test]
fn solve_and_sweep_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "case = \"closed-tube\"\n[frequency]\nf_init = 3000.0\nf_fin = 4000.0\nn = 1\n[mesh]\nband_scale = 8.0\n",
    );
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    assert_eq!(run(argv(&["solve", "--config", &cfg, "--out", out_s, "--freq", "3500"])), 0);
    let v = read_vtk(&out.join("solve_3500hz.vtk")).unwrap();
    for name in ["p_re", "p_im", "p_abs", "uv_re", "uh_abs"] {
        assert_eq!(v.point_data[name].len(), v.points.len(), "{name}");
    }
    assert_eq!(run(argv(&["sweep", "--config", &cfg, "--out", out_s])), 0);
    let t = read_csv(&out.join("sweep.csv")).unwrap();
    let alpha = t.column("alpha").unwrap();
    assert_eq!(alpha.len(), 2);
    assert!(alpha.iter().all(|a| a.is_some_and(|a| a > 0.0 && a < 1.0)));
}

#[test]
fn optimize_checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "case = \"closed-tube\"\n[frequency]\nf_init = 4000.0\nf_fin = 5000.0\nn = 1\n[mesh]\nband_scale = 8.0\n",
    );
    let out = dir.path().join("opt");
    let out_s = out.to_str().unwrap();
    let code = run(argv(&["optimize", "--config", &cfg, "--out", out_s, "--max-iters", "2", "--snapshot-every", "1"]));
    assert_eq!(code, 0);
    let h = read_csv(&out.join("history.csv")).unwrap();
    assert_eq!(h.rows.len(), 2);
    assert!(out.join("design_0000.vtk").exists() && out.join("design_final.vtk").exists());
    let ck = out.join("checkpoint.txt");
    let out2 = dir.path().join("opt2");
    let code = run(argv(&[
        "optimize",
        "--config",
        &cfg,
        "--out",
        out2.to_str().unwrap(),
        "--max-iters",
        "1",
        "--resume",
        ck.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let h2 = read_csv(&out2.join("history.csv")).unwrap();
    // The resumed run re-evaluates the last design of the first run.
    assert_eq!(h2.column("iter").unwrap(), vec![Some(1.0)]);
    assert_eq!(h2.column("J").unwrap()[0], h.column("J").unwrap()[1]);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            viscopt::config::load_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}
