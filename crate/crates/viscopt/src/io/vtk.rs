use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C;

use super::{create, fmt_f64};
use crate::mesh::{edge_key, Label, Region, TriMesh};
use crate::{Error, Result};

/// A named point or cell array.
pub enum FieldData<'a> {
    Scalar(&'a [f64]),
    /// Written as `<name>_re`, `<name>_im` and `<name>_abs`.
    Complex(&'a [C]),
    /// Two in-plane components, written as a VTK vector with z = 0.
    Vector([&'a [f64]; 2]),
}

impl FieldData<'_> {
    fn len(&self) -> usize {
        match self {
            FieldData::Scalar(v) => v.len(),
            FieldData::Complex(v) => v.len(),
            FieldData::Vector([x, _]) => x.len(),
        }
    }
}

/// Parsed legacy VTK unstructured grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Scalars as one value per point; vectors flattened (3 per point).
    pub point_data: BTreeMap<String, Vec<f64>>,
    pub cell_data: BTreeMap<String, Vec<f64>>,
}

fn write_arrays(w: &mut impl Write, arrays: &[(&str, FieldData)], path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    for (name, data) in arrays {
        let scalar = |w: &mut dyn Write, n: &str, vals: &mut dyn Iterator<Item = f64>| -> std::io::Result<()> {
            writeln!(w, "SCALARS {n} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in vals {
                writeln!(w, "{}", fmt_f64(v))?;
            }
            Ok(())
        };
        match data {
            FieldData::Scalar(v) => scalar(w, name, &mut v.iter().copied()).map_err(io)?,
            FieldData::Complex(v) => {
                scalar(w, &format!("{name}_re"), &mut v.iter().map(|z| z.re)).map_err(io)?;
                scalar(w, &format!("{name}_im"), &mut v.iter().map(|z| z.im)).map_err(io)?;
                scalar(w, &format!("{name}_abs"), &mut v.iter().map(|z| z.norm())).map_err(io)?;
            }
            FieldData::Vector([x, y]) => {
                writeln!(w, "VECTORS {name} double").map_err(io)?;
                for (a, b) in x.iter().zip(y.iter()) {
                    writeln!(w, "{} {} {}", fmt_f64(*a), fmt_f64(*b), fmt_f64(0.0)).map_err(io)?;
                }
            }
        }
    }
    Ok(())
}

/// Writes the mesh with point arrays (vertex values) and cell arrays. The
/// region code is always written as cell array `region`.
pub fn write_vtk(
    path: &Path,
    mesh: &TriMesh,
    point_data: &[(&str, FieldData)],
    cell_data: &[(&str, FieldData)],
) -> Result<()> {
    for (name, d) in point_data {
        if d.len() != mesh.n_vertices() {
            return Err(Error::param(name, format!("expected {} point values, got {}", mesh.n_vertices(), d.len())));
        }
    }
    for (name, d) in cell_data {
        if d.len() != mesh.n_triangles() {
            return Err(Error::param(name, format!("expected {} cell values, got {}", mesh.n_triangles(), d.len())));
        }
    }
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let nt = mesh.n_triangles();
    (|| -> std::io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "viscopt")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", mesh.n_vertices())?;
        for p in mesh.vertices() {
            writeln!(w, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(0.0))?;
        }
        writeln!(w, "CELLS {} {}", nt, 4 * nt)?;
        for t in mesh.triangles() {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {nt}")?;
        for _ in 0..nt {
            writeln!(w, "5")?;
        }
        writeln!(w, "CELL_DATA {nt}")?;
        writeln!(w, "SCALARS region int 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for r in mesh.regions() {
            writeln!(w, "{}", r.code())?;
        }
        Ok(())
    })()
    .map_err(io)?;
    write_arrays(&mut w, cell_data, path)?;
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_vertices()).map_err(io)?;
        write_arrays(&mut w, point_data, path)?;
    }
    w.flush().map_err(io)
}

pub fn read_vtk(path: &Path) -> Result<VtkData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().map(|l| l.trim()) != Some("# vtk DataFile Version 3.0") {
        return Err(bad("missing VTK header".into()));
    }
    if lines.len() < 4 || lines[2].trim() != "ASCII" {
        return Err(bad("only ASCII files are supported".into()));
    }
    let body = lines[3..].join("\n");
    let mut tok = body.split_whitespace().peekable();
    let mut out = VtkData::default();
    let num = |t: Option<&str>| -> Result<f64> {
        t.ok_or_else(|| bad("unexpected end of file".into()))?
            .parse::<f64>()
            .map_err(|e| bad(e.to_string()))
    };
    let mut section: Option<(bool, usize)> = None; // (is point data, count)
    while let Some(word) = tok.next() {
        match word {
            "DATASET" => {
                let kind = tok.next().unwrap_or("");
                if kind != "UNSTRUCTURED_GRID" {
                    return Err(bad(format!("unsupported dataset {kind}")));
                }
            }
            "POINTS" => {
                let n = num(tok.next())? as usize;
                tok.next();
                out.points = (0..n)
                    .map(|_| -> Result<[f64; 2]> {
                        let x = num(tok.next())?;
                        let y = num(tok.next())?;
                        num(tok.next())?;
                        Ok([x, y])
                    })
                    .collect::<Result<_>>()?;
            }
            "CELLS" => {
                let n = num(tok.next())? as usize;
                tok.next();
                for _ in 0..n {
                    let k = num(tok.next())? as usize;
                    if k != 3 {
                        return Err(bad(format!("cell with {k} vertices")));
                    }
                    let a = num(tok.next())? as usize;
                    let b = num(tok.next())? as usize;
                    let c = num(tok.next())? as usize;
                    out.triangles.push([a, b, c]);
                }
            }
            "CELL_TYPES" => {
                let n = num(tok.next())? as usize;
                for _ in 0..n {
                    if num(tok.next())? != 5.0 {
                        return Err(bad("only triangles (type 5) are supported".into()));
                    }
                }
            }
            "CELL_DATA" => section = Some((false, num(tok.next())? as usize)),
            "POINT_DATA" => section = Some((true, num(tok.next())? as usize)),
            "SCALARS" | "VECTORS" => {
                let (is_point, n) = section.ok_or_else(|| bad("array outside a data section".into()))?;
                let name = tok.next().ok_or_else(|| bad("array without name".into()))?.to_string();
                tok.next();
                let comps = if word == "VECTORS" {
                    3
                } else {
                    if tok.peek().is_some_and(|t| t.parse::<usize>().is_ok()) {
                        let c = num(tok.next())? as usize;
                        if c != 1 {
                            return Err(bad("multi-component SCALARS are not supported".into()));
                        }
                    }
                    if tok.peek() == Some(&"LOOKUP_TABLE") {
                        tok.next();
                        tok.next();
                    }
                    1
                };
                let vals = (0..n * comps).map(|_| num(tok.next())).collect::<Result<Vec<f64>>>()?;
                if is_point {
                    out.point_data.insert(name, vals);
                } else {
                    out.cell_data.insert(name, vals);
                }
            }
            other => return Err(bad(format!("unexpected token `{other}`"))),
        }
    }
    Ok(out)
}

/// Boundary and interior labels as `edge_v0,edge_v1,label`.
pub fn write_boundary_csv(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e: csv::Error| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    w.write_record(["edge_v0", "edge_v1", "label"]).map_err(err)?;
    for (k, l) in mesh.labels() {
        w.write_record([k[0].to_string(), k[1].to_string(), l.name().to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_boundary_csv(path: &Path) -> Result<BTreeMap<[usize; 2], Label>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad("expected edge_v0,edge_v1,label".into()));
        }
        let a: usize = rec[0].parse().map_err(|_| bad(format!("bad vertex `{}`", &rec[0])))?;
        let b: usize = rec[1].parse().map_err(|_| bad(format!("bad vertex `{}`", &rec[1])))?;
        let l = Label::from_name(&rec[2]).ok_or_else(|| bad(format!("unknown label `{}`", &rec[2])))?;
        out.insert(edge_key(a, b), l);
    }
    Ok(out)
}

/// Writes `<stem>.vtk` and `<stem>_boundary.csv`.
pub fn write_mesh(stem: &Path, mesh: &TriMesh) -> Result<()> {
    write_vtk(&stem.with_extension("vtk"), mesh, &[], &[])?;
    write_boundary_csv(&sidecar(stem), mesh)
}

fn sidecar(stem: &Path) -> std::path::PathBuf {
    let name = stem
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.with_file_name(format!("{name}_boundary.csv"))
}

/// Reads a mesh written by [`write_mesh`].
pub fn read_mesh(stem: &Path) -> Result<TriMesh> {
    let vtk_path = stem.with_extension("vtk");
    let data = read_vtk(&vtk_path)?;
    let codes = data.cell_data.get("region").ok_or_else(|| Error::Format {
        path: vtk_path.clone(),
        reason: "missing cell array `region`".into(),
    })?;
    let regions = codes
        .iter()
        .map(|&c| {
            Region::from_code(c as i32).ok_or_else(|| Error::Format {
                path: vtk_path.clone(),
                reason: format!("unknown region code {c}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = read_boundary_csv(&sidecar(stem))?;
    TriMesh::new(data.points, data.triangles, regions, labels)
}
