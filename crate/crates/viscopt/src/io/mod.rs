//! File formats: legacy VTK ASCII meshes and fields, the boundary-label
//! sidecar, CSV tables and the optimizer checkpoint. Floating-point values
//! are written with 17 significant digits so every file re-reads exactly.

mod tables;
mod vtk;

pub use tables::{
    read_checkpoint, read_csv, write_checkpoint, write_dissipation_csv, write_frequency_csv,
    write_harness_csv, write_history_csv, CsvTable, DissipationRow,
};
pub use vtk::{
    read_boundary_csv, read_mesh, read_vtk, write_boundary_csv, write_mesh, write_vtk, FieldData, VtkData,
};

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn create(path: &std::path::Path) -> crate::Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        }
    }
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| crate::Error::io(path, e))
}
