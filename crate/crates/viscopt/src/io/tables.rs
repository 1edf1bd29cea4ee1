use std::io::{BufRead, Write};
use std::path::Path;

use super::{create, fmt_f64};
use crate::adjoint::ProbeRow;
use crate::levelset::{IterationRecord, ResumeState};
use crate::slns::FrequencyPoint;
use crate::{Error, Result};

/// Numeric CSV with a header; empty cells read as `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn write_table(path: &Path, headers: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(headers).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|_| Error::Format {
                        path: path.to_path_buf(),
                        reason: format!("not a number: `{c}`"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CsvTable { headers, rows })
}

/// `freq_hz,alpha,s11_re,s11_im,s21_re,s21_im` (+ `alpha_flns` when given).
/// S21 cells are empty when the case has no outlet.
pub fn write_frequency_csv(path: &Path, points: &[FrequencyPoint], alpha_flns: Option<&[f64]>) -> Result<()> {
    let mut headers = vec!["freq_hz", "alpha", "s11_re", "s11_im", "s21_re", "s21_im"];
    if let Some(a) = alpha_flns {
        if a.len() != points.len() {
            return Err(Error::param("alpha_flns", "one value per frequency"));
        }
        headers.push("alpha_flns");
    }
    write_table(
        path,
        &headers,
        points.iter().enumerate().map(|(i, p)| {
            let (r, im) = match p.s.s21 {
                Some(s) => (fmt_f64(s.re), fmt_f64(s.im)),
                None => (String::new(), String::new()),
            };
            let mut row = vec![
                fmt_f64(p.freq_hz),
                fmt_f64(p.alpha),
                fmt_f64(p.s.s11.re),
                fmt_f64(p.s.s11.im),
                r,
                im,
            ];
            if let Some(a) = alpha_flns {
                row.push(fmt_f64(a[i]));
            }
            row
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissipationRow {
    pub freq_hz: f64,
    pub phi_v_int: f64,
    pub phi_h_int: f64,
}

pub fn write_dissipation_csv(path: &Path, rows: &[DissipationRow]) -> Result<()> {
    write_table(
        path,
        &["freq_hz", "phi_v_int", "phi_h_int"],
        rows.iter()
            .map(|r| vec![fmt_f64(r.freq_hz), fmt_f64(r.phi_v_int), fmt_f64(r.phi_h_int)]),
    )
}

pub fn write_harness_csv(path: &Path, rows: &[ProbeRow]) -> Result<()> {
    write_table(
        path,
        &["x0", "y0", "dJ_full", "dJ_p", "dJ_num"],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.x0),
                fmt_f64(r.y0),
                fmt_f64(r.dj_full),
                fmt_f64(r.dj_p),
                fmt_f64(r.dj_num),
            ]
        }),
    )
}

/// `iter,J,conv_metric,num_nodes,num_tris`; the metric cell is empty until
/// the averaging window fills.
pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    write_table(
        path,
        &["iter", "J", "conv_metric", "num_nodes", "num_tris"],
        history.iter().map(|r| {
            vec![
                r.iter.to_string(),
                fmt_f64(r.j),
                if r.conv_metric.is_finite() {
                    fmt_f64(r.conv_metric)
                } else {
                    String::new()
                },
                r.num_nodes.to_string(),
                r.num_tris.to_string(),
            ]
        }),
    )
}

const CHECKPOINT_MAGIC: &str = "# viscopt checkpoint v1";

/// Plain-text checkpoint:
///
/// ```text
/// # viscopt checkpoint v1
/// iter <next iteration>
/// nodes <N>
/// filtered <0|1>
/// phi
/// <N lines>
/// jbar            (only when filtered = 1)
/// <N lines>
/// ```
pub fn write_checkpoint(path: &Path, state: &ResumeState) -> Result<()> {
    let n = state.phi.len();
    if let Some(f) = &state.filtered {
        if f.len() != n {
            return Err(Error::param("checkpoint", "filter state and φ differ in length"));
        }
    }
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    (|| -> std::io::Result<()> {
        writeln!(w, "{CHECKPOINT_MAGIC}")?;
        writeln!(w, "iter {}", state.iter)?;
        writeln!(w, "nodes {n}")?;
        writeln!(w, "filtered {}", u8::from(state.filtered.is_some()))?;
        writeln!(w, "phi")?;
        for v in &state.phi {
            writeln!(w, "{}", fmt_f64(*v))?;
        }
        if let Some(f) = &state.filtered {
            writeln!(w, "jbar")?;
            for v in f {
                writeln!(w, "{}", fmt_f64(*v))?;
            }
        }
        w.flush()
    })()
    .map_err(io)
}

pub fn read_checkpoint(path: &Path) -> Result<ResumeState> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = std::io::BufReader::new(f)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut it = lines.iter().map(|l| l.trim());
    if it.next() != Some(CHECKPOINT_MAGIC) {
        return Err(bad("missing checkpoint header"));
    }
    let mut keyed = |key: &str| -> Result<usize> {
        let l = it.next().ok_or_else(|| bad("truncated header"))?;
        l.strip_prefix(key)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(&format!("expected `{key} <integer>`")))
    };
    let iter = keyed("iter")?;
    let n = keyed("nodes")?;
    let filtered = keyed("filtered")? == 1;
    let mut block = |name: &str| -> Result<Vec<f64>> {
        if it.next() != Some(name) {
            return Err(bad(&format!("expected `{name}` block")));
        }
        (0..n)
            .map(|_| {
                it.next()
                    .and_then(|l| l.parse::<f64>().ok())
                    .ok_or_else(|| bad(&format!("bad or missing `{name}` value")))
            })
            .collect()
    };
    let phi = block("phi")?;
    let jbar = if filtered { Some(block("jbar")?) } else { None };
    Ok(ResumeState {
        iter,
        phi,
        filtered: jbar,
    })
}
