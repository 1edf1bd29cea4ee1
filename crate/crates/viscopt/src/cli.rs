//! Command-line entry point.

use std::ffi::OsString;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::adjoint::td_fd_harness;
use crate::config::{load_config, parse_config, RunConfig};
use crate::flns::{compute_dissipation, energy_balance, solve_flns};
use crate::io::{
    read_checkpoint, write_checkpoint, write_dissipation_csv, write_frequency_csv, write_harness_csv,
    write_history_csv, write_mesh, write_vtk, DissipationRow, FieldData,
};
use crate::levelset::{initial_design, run_optimization, ResumeState};
use crate::mesh::{CaseKind, TriMesh};
use crate::slns::{
    compute_alpha, evaluate_point, frequency_sweep, solve_frequency, FrequencyGrid, FrequencySolution, Objective,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "viscopt", version, about = "Viscothermal acoustics and level-set absorber design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML run configuration (defaults when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-frequency SLNS solve of the initial design with field export.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Frequency in Hz (default: first grid frequency).
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Frequency response of the initial design.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Add the FLNS absorption column and a dissipation table.
        #[arg(long)]
        flns: bool,
    },
    /// Level-set optimization.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Finite-difference check of the topological derivative.
    VerifyTd {
        #[command(flatten)]
        common: Common,
    },
    /// SLNS against FLNS on the slit resonator.
    FlnsCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => parse_config("")?,
    };
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

/// Parses `argv` and runs the subcommand. Returns the process exit code:
/// 0 on success, 1 on a run failure (one `error:` line on stderr), 2 on a
/// usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: kind={} message={}", e.kind(), e.to_string().replace('\n', " "));
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve { common, freq } => cmd_solve(&load(&common)?, freq),
        Command::Sweep { common, flns } => cmd_sweep(&load(&common)?, flns),
        Command::Optimize {
            common,
            snapshot_every,
            max_iters,
            resume,
        } => {
            let mut cfg = load(&common)?;
            if let Some(k) = snapshot_every {
                cfg.snapshot_every = k;
            }
            cmd_optimize(&cfg, max_iters, resume.as_deref())
        }
        Command::VerifyTd { common } => cmd_verify_td(&load(&common)?),
        Command::FlnsCheck { common } => cmd_flns_check(&load(&common)?),
    }
}

fn slns_point_data<'a>(mesh: &TriMesh, sol: &'a FrequencySolution) -> [(&'static str, Vec<num_complex::Complex64>); 3] {
    [
        ("p", mesh.p2_to_p1(&sol.p.values)),
        ("uv", mesh.p2_to_p1(&sol.u_v.values)),
        ("uh", mesh.p2_to_p1(&sol.u_h.values)),
    ]
}

fn cmd_solve(cfg: &RunConfig, freq: Option<f64>) -> Result<()> {
    let problem = cfg.problem();
    let f = freq.unwrap_or(cfg.grid.omega_init / (2.0 * std::f64::consts::PI));
    let grid = FrequencyGrid::single_hz(f)?;
    let problem = crate::levelset::OptProblem { grid, ..problem };
    let (_, _, mesh) = initial_design(&problem)?;
    let sol = solve_frequency(&mesh, grid.omega_init, &cfg.props, &cfg.rigid, cfg.physics, false)?;
    let pt = evaluate_point(&mesh, &sol, cfg.objective)?;
    let fields = slns_point_data(&mesh, &sol);
    let data: Vec<(&str, FieldData)> = fields.iter().map(|(n, v)| (*n, FieldData::Complex(v))).collect();
    write_vtk(&cfg.out_dir.join(format!("solve_{f:.0}hz.vtk")), &mesh, &data, &[])?;
    write_mesh(&cfg.out_dir.join("solve_mesh"), &mesh)?;
    write_frequency_csv(&cfg.out_dir.join("solve.csv"), &[pt.clone()], None)?;
    println!(
        "f = {f} Hz, alpha = {:.6}, |S11| = {:.6}, {} vertices",
        pt.alpha,
        pt.s.s11.norm(),
        mesh.n_vertices()
    );
    Ok(())
}

fn alpha_kind(kind: CaseKind) -> CaseKind {
    match kind {
        CaseKind::OpenTube => CaseKind::OpenTube,
        _ => CaseKind::ClosedTube,
    }
}

fn flns_sweep(mesh: &TriMesh, cfg: &RunConfig, kind: CaseKind, omegas: &[f64]) -> Result<Vec<(f64, DissipationRow, f64)>> {
    crate::thread_pool().install(|| {
        omegas
            .par_iter()
            .map(|&w| {
                let f = w / (2.0 * std::f64::consts::PI);
                let run = || -> Result<(f64, DissipationRow, f64)> {
                    let st = solve_flns(mesh, &cfg.props, w)?;
                    let a = compute_alpha(&st.s_params(mesh, &cfg.props)?, kind)?;
                    let d = compute_dissipation(mesh, &st, &cfg.props);
                    let e = energy_balance(mesh, &st, &d, &cfg.props)?;
                    Ok((
                        a,
                        DissipationRow {
                            freq_hz: f,
                            phi_v_int: d.phi_v_int,
                            phi_h_int: d.phi_h_int,
                        },
                        e.mismatch,
                    ))
                };
                run().map_err(|e| Error::AtFrequency {
                    freq_hz: f,
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

fn cmd_sweep(cfg: &RunConfig, flns: bool) -> Result<()> {
    let (_, _, mesh) = initial_design(&cfg.problem())?;
    let report = frequency_sweep(&mesh, &cfg.grid, cfg.objective, &cfg.props, &cfg.rigid, cfg.physics)?;
    let flns_rows = if flns {
        let air = mesh.air_submesh()?.0;
        Some(flns_sweep(&air, cfg, alpha_kind(cfg.case.kind), &cfg.grid.omegas())?)
    } else {
        None
    };
    let alpha_flns: Option<Vec<f64>> = flns_rows.as_ref().map(|r| r.iter().map(|x| x.0).collect());
    write_frequency_csv(&cfg.out_dir.join("sweep.csv"), &report.points, alpha_flns.as_deref())?;
    if let Some(rows) = &flns_rows {
        let d: Vec<DissipationRow> = rows.iter().map(|r| r.1).collect();
        write_dissipation_csv(&cfg.out_dir.join("dissipation.csv"), &d)?;
    }
    println!("J = {:.6e} over {} frequencies", report.j, report.points.len());
    Ok(())
}

fn cmd_optimize(cfg: &RunConfig, max_iters: Option<usize>, resume: Option<&Path>) -> Result<()> {
    let problem = cfg.problem();
    let resume: Option<ResumeState> = resume.map(read_checkpoint).transpose()?;
    let out = cfg.out_dir.clone();
    let every = cfg.snapshot_every;
    let mut history = Vec::new();
    let result = run_optimization(&problem, max_iters, resume, &mut |v| {
        history.push(*v.record);
        write_history_csv(&out.join("history.csv"), &history)?;
        if every > 0 && v.record.iter % every == 0 {
            let chi = v.levelset.chi();
            write_vtk(
                &out.join(format!("design_{:04}.vtk", v.record.iter)),
                v.background,
                &[
                    ("phi", FieldData::Scalar(&v.levelset.phi)),
                    ("chi", FieldData::Scalar(&chi)),
                    ("dtj", FieldData::Scalar(v.sensitivity)),
                ],
                &[],
            )?;
            write_checkpoint(
                &out.join("checkpoint.txt"),
                &ResumeState {
                    iter: v.record.iter,
                    phi: v.levelset.phi.clone(),
                    filtered: v.filter.filtered.clone(),
                },
            )?;
        }
        Ok(ControlFlow::Continue(()))
    })?;
    let last = result.history.last().map(|r| r.iter).unwrap_or(0);
    write_checkpoint(
        &out.join("checkpoint.txt"),
        &ResumeState {
            iter: last,
            phi: result.levelset.phi.clone(),
            filtered: result.filter.filtered.clone(),
        },
    )?;
    let chi = result.levelset.chi();
    write_vtk(
        &out.join("design_final.vtk"),
        &result.background,
        &[("phi", FieldData::Scalar(&result.levelset.phi)), ("chi", FieldData::Scalar(&chi))],
        &[],
    )?;
    write_mesh(&out.join("final_mesh"), &result.mesh)?;
    let final_report = frequency_sweep(
        &result.mesh,
        &cfg.grid,
        cfg.objective,
        &cfg.props,
        &cfg.rigid,
        cfg.physics,
    )?;
    write_frequency_csv(&out.join("final_response.csv"), &final_report.points, None)?;
    println!(
        "{} iterations, J = {:.6e}, converged = {}",
        result.history.len(),
        result.history.last().map_or(f64::NAN, |r| r.j),
        result.converged
    );
    Ok(())
}

/// Fraction of rows with matching signs and the Pearson correlation.
pub fn harness_stats(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len().min(b.len());
    if n == 0 {
        return (0.0, f64::NAN);
    }
    let sign = (0..n).filter(|&i| a[i].signum() == b[i].signum()).count() as f64 / n as f64;
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x, y) = (a[i] - ma, b[i] - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    (sign, sab / (saa * sbb).sqrt())
}

fn cmd_verify_td(cfg: &RunConfig) -> Result<()> {
    let report = td_fd_harness(&cfg.harness)?;
    write_harness_csv(&cfg.out_dir.join("td_harness.csv"), &report.rows)?;
    let p: Vec<f64> = report.rows.iter().map(|r| r.dj_p).collect();
    let num: Vec<f64> = report.rows.iter().map(|r| r.dj_num).collect();
    let (sign, corr) = harness_stats(&p, &num);
    println!(
        "{} probes ({} skipped): sign agreement {:.1}%, correlation {:.4}",
        report.rows.len(),
        report.skipped.len(),
        100.0 * sign,
        corr
    );
    Ok(())
}

fn cmd_flns_check(cfg: &RunConfig) -> Result<()> {
    let mesh = cfg.slit.build()?;
    let omegas = cfg.grid.omegas();
    let slns: Vec<Result<f64>> = crate::thread_pool().install(|| {
        omegas
            .par_iter()
            .map(|&w| {
                let sol = solve_frequency(&mesh, w, &cfg.props, &cfg.rigid, cfg.physics, false)?;
                Ok(evaluate_point(&mesh, &sol, Objective::Absorption(CaseKind::ClosedTube))?.alpha)
            })
            .collect()
    });
    let slns = slns.into_iter().collect::<Result<Vec<f64>>>()?;
    let flns = flns_sweep(&mesh, cfg, CaseKind::ClosedTube, &omegas)?;
    let path = cfg.out_dir.join("flns_check.csv");
    let mut w = csv::Writer::from_writer(crate::io::create(&path)?);
    let err = |e: csv::Error| Error::Format {
        path: path.clone(),
        reason: e.to_string(),
    };
    w.write_record(["freq_hz", "alpha_slns", "alpha_flns", "phi_v_int", "phi_h_int", "energy_mismatch"])
        .map_err(err)?;
    let mut max_dev: f64 = 0.0;
    for (a_s, (a_f, d, mis)) in slns.iter().zip(&flns) {
        max_dev = max_dev.max((a_s - a_f).abs());
        w.write_record(
            [d.freq_hz, *a_s, *a_f, d.phi_v_int, d.phi_h_int, *mis].map(crate::io::fmt_f64),
        )
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let rows: Vec<DissipationRow> = flns.iter().map(|r| r.1).collect();
    write_dissipation_csv(&cfg.out_dir.join("dissipation.csv"), &rows)?;
    println!("max |alpha_slns - alpha_flns| = {max_dev:.4} over {} frequencies", omegas.len());
    Ok(())
}
