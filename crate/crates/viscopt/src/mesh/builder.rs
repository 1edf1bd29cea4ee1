//! Structured rectangle meshes and the case presets built on them.

use std::collections::BTreeMap;

use super::{edge_key, mid, Label, Point, Region, TriMesh};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    /// Closed tube: Γ_in left, Γ_ref right.
    ClosedTube,
    /// Open tube: Γ_in left, Γ_out right.
    OpenTube,
    /// Closed tube with probe lines Γ_1, Γ_2 upstream of the design domain.
    Benchmark,
}

/// Half-domain of a tube: width L_NDD + L_D, height D_ex/2, with Γ_wall
/// at the bottom and Γ_sym on top. The design domain D spans the last L_D
/// metres, leaving non-design air strips of height t_w along both walls
/// (when `strips` is set).
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseGeometry {
    pub kind: CaseKind,
    pub d_ex: f64,
    pub l_ndd: f64,
    pub l_d: f64,
    pub t_w: f64,
    /// Non-design strips along Γ_wall and Γ_sym inside the design span.
    #[serde(default = "default_true")]
    pub strips: bool,
    /// Benchmark probe spacing d_w.
    #[serde(default = "default_d_w")]
    pub d_w: f64,
    /// Benchmark position of Γ_1 (Γ_2 sits at x + d_w).
    #[serde(default = "default_probe_x")]
    pub probe_x: f64,
}

fn default_true() -> bool {
    true
}
fn default_d_w() -> f64 {
    0.01
}
fn default_probe_x() -> f64 {
    0.02
}

impl CaseGeometry {
    pub fn case1() -> Self {
        CaseGeometry {
            kind: CaseKind::ClosedTube,
            d_ex: 0.03,
            l_ndd: 0.06,
            l_d: 0.06,
            t_w: 1.5e-3,
            strips: true,
            d_w: default_d_w(),
            probe_x: default_probe_x(),
        }
    }

    pub fn case2() -> Self {
        CaseGeometry {
            kind: CaseKind::OpenTube,
            ..Self::case1()
        }
    }

    pub fn benchmark() -> Self {
        CaseGeometry {
            kind: CaseKind::Benchmark,
            strips: true,
            ..Self::case1()
        }
    }

    pub fn height(&self) -> f64 {
        0.5 * self.d_ex
    }

    pub fn length(&self) -> f64 {
        self.l_ndd + self.l_d
    }

    /// Design domain as (lower-left, upper-right).
    pub fn design_box(&self) -> (Point, Point) {
        let inset = if self.strips { self.t_w } else { 0.0 };
        (
            [self.l_ndd, inset],
            [self.length(), self.height() - inset],
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("d_ex", self.d_ex),
            ("l_ndd", self.l_ndd),
            ("l_d", self.l_d),
            ("t_w", self.t_w),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Geometry(format!("{k} must be positive, got {v}")));
            }
        }
        if self.t_w >= self.d_ex {
            return Err(Error::Geometry("t_w must be smaller than d_ex".into()));
        }
        if self.strips && 2.0 * self.t_w >= self.height() {
            return Err(Error::Geometry(
                "strips of height t_w leave no design domain".into(),
            ));
        }
        if self.kind == CaseKind::Benchmark {
            if !(self.d_w > 0.0) {
                return Err(Error::Geometry("d_w must be positive".into()));
            }
            if !(self.probe_x > 0.0 && self.probe_x + self.d_w < self.l_ndd) {
                return Err(Error::Geometry(
                    "probe lines must lie inside the upstream region".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn right_label(&self) -> Label {
        match self.kind {
            CaseKind::OpenTube => Label::Outlet,
            _ => Label::Reference,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Tensor-product rectangle: explicit grid lines in x and y.
#[derive(Clone, Debug)]
pub struct RectSpec {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl RectSpec {
    /// Grid lines through every breakpoint with spacing at most `h`.
    pub fn uniform(xbreaks: &[f64], ybreaks: &[f64], h: f64) -> RectSpec {
        RectSpec {
            xs: subdivide(xbreaks, h),
            ys: subdivide(ybreaks, h),
        }
    }
}

/// Sorted breakpoints subdivided into near-equal pieces no longer than `h`.
pub fn subdivide(breaks: &[f64], h: f64) -> Vec<f64> {
    let mut b: Vec<f64> = breaks.to_vec();
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup_by(|a, c| (*a - *c).abs() < 1e-14);
    let mut out = vec![b[0]];
    for w in b.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    out
}

/// Grid lines on [0, h_half] graded geometrically away from y = 0 and/or
/// y = h_half: first cell `first`, ratio `ratio`, capped at `coarse`.
pub fn graded_lines(a: f64, b: f64, first: f64, ratio: f64, coarse: f64, both: bool) -> Vec<f64> {
    let one_side = |len: f64| -> Vec<f64> {
        let mut pts = vec![0.0];
        let mut h = first;
        while *pts.last().unwrap() + h < len {
            pts.push(pts.last().unwrap() + h);
            h = (h * ratio).min(coarse);
        }
        pts.push(len);
        if pts.len() > 2 {
            let l = pts.len();
            if pts[l - 1] - pts[l - 2] < 0.3 * (pts[l - 2] - pts[l - 3]) {
                pts.remove(l - 2);
            }
        }
        pts
    };
    if both {
        let half = 0.5 * (b - a);
        let s = one_side(half);
        let mut out: Vec<f64> = s.iter().map(|t| a + t).collect();
        for t in s.iter().rev().skip(1) {
            out.push(b - t);
        }
        out
    } else {
        one_side(b - a).into_iter().map(|t| a + t).collect()
    }
}

/// Builds a triangulated rectangle. `region` is evaluated at centroids,
/// `side_label` on outer edges, and vertical grid lines listed in
/// `probes` receive the given interior label.
pub fn build_rect(
    spec: &RectSpec,
    region: impl Fn(Point) -> Region,
    side_label: impl Fn(Side, Point) -> Label,
    probes: &[(f64, Label)],
) -> Result<TriMesh> {
    let (nx, ny) = (spec.xs.len(), spec.ys.len());
    if nx < 2 || ny < 2 {
        return Err(Error::Geometry("rectangle needs at least one cell".into()));
    }
    for w in spec.xs.windows(2).chain(spec.ys.windows(2)) {
        if !(w[1] > w[0]) {
            return Err(Error::Geometry("grid lines must be strictly increasing".into()));
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut verts = Vec::with_capacity(nx * ny);
    for &y in &spec.ys {
        for &x in &spec.xs {
            verts.push([x, y]);
        }
    }
    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    let mut regs = Vec::with_capacity(tris.capacity());
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let pair = if (i + j) % 2 == 0 {
                [[a, b, c], [a, c, d]]
            } else {
                [[a, b, d], [b, c, d]]
            };
            for t in pair {
                let cen = [
                    (verts[t[0]][0] + verts[t[1]][0] + verts[t[2]][0]) / 3.0,
                    (verts[t[0]][1] + verts[t[1]][1] + verts[t[2]][1]) / 3.0,
                ];
                tris.push(t);
                regs.push(region(cen));
            }
        }
    }
    let mut labels = BTreeMap::new();
    for i in 0..nx - 1 {
        let (a, b) = (id(i, 0), id(i + 1, 0));
        labels.insert(edge_key(a, b), side_label(Side::Bottom, mid(verts[a], verts[b])));
        let (a, b) = (id(i, ny - 1), id(i + 1, ny - 1));
        labels.insert(edge_key(a, b), side_label(Side::Top, mid(verts[a], verts[b])));
    }
    for j in 0..ny - 1 {
        let (a, b) = (id(0, j), id(0, j + 1));
        labels.insert(edge_key(a, b), side_label(Side::Left, mid(verts[a], verts[b])));
        let (a, b) = (id(nx - 1, j), id(nx - 1, j + 1));
        labels.insert(edge_key(a, b), side_label(Side::Right, mid(verts[a], verts[b])));
    }
    for &(x, lab) in probes {
        let Some(i) = spec.xs.iter().position(|&g| (g - x).abs() < 1e-12) else {
            return Err(Error::Geometry(format!("probe line x = {x} is not a grid line")));
        };
        if i == 0 || i == nx - 1 {
            return Err(Error::Geometry("probe line on the outer boundary".into()));
        }
        for j in 0..ny - 1 {
            labels.insert(edge_key(id(i, j), id(i, j + 1)), lab);
        }
    }
    TriMesh::new(verts, tris, regs, labels)
}

/// Background mesh for a case: structured, with D tagged design-air.
pub fn build_case_geometry(case: &CaseGeometry, target_size: f64) -> Result<TriMesh> {
    case.validate()?;
    if !(target_size > 0.0) {
        return Err(Error::param("target_size", "must be positive"));
    }
    let (lo, hi) = case.design_box();
    let (l, h) = (case.length(), case.height());
    let mut xb = vec![0.0, case.l_ndd, l];
    let probes: Vec<(f64, Label)> = if case.kind == CaseKind::Benchmark {
        xb.push(case.probe_x);
        xb.push(case.probe_x + case.d_w);
        vec![(case.probe_x, Label::Probe1), (case.probe_x + case.d_w, Label::Probe2)]
    } else {
        Vec::new()
    };
    let yb = vec![0.0, lo[1], hi[1], h];
    let spec = RectSpec::uniform(&xb, &yb, target_size);
    let right = case.right_label();
    build_rect(
        &spec,
        |c| {
            if c[0] > lo[0] && c[0] < hi[0] && c[1] > lo[1] && c[1] < hi[1] {
                Region::DesignAir
            } else {
                Region::NonDesignAir
            }
        },
        |side, _| match side {
            Side::Left => Label::Inlet,
            Side::Right => right,
            Side::Bottom => Label::Wall,
            Side::Top => Label::Symmetry,
        },
        &probes,
    )
}

/// Grid lines through every breakpoint, graded towards both ends of each
/// interval.
pub fn graded_segments(breaks: &[f64], first: f64, ratio: f64, coarse: f64) -> Vec<f64> {
    let mut out: Vec<f64> = vec![breaks[0]];
    for w in breaks.windows(2) {
        out.extend(graded_lines(w[0], w[1], first, ratio, coarse, true).into_iter().skip(1));
    }
    out
}

/// Closed duct ending in a rigid plate pierced by one slit that opens into
/// a rectangular cavity. Γ_in on the left; every other outer edge and the
/// plate faces are no-slip walls. The mesh holds air only.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlitResonator {
    pub duct_length: f64,
    /// Duct and cavity height.
    pub height: f64,
    pub slit_width: f64,
    /// Plate thickness.
    pub slit_length: f64,
    pub cavity_length: f64,
    /// First cell at walls, growth ratio and largest cell of the graded grid.
    pub first: f64,
    pub ratio: f64,
    pub coarse: f64,
}

impl Default for SlitResonator {
    fn default() -> Self {
        SlitResonator {
            duct_length: 0.01,
            height: 5e-3,
            slit_width: 5e-4,
            slit_length: 1.5e-3,
            cavity_length: 5e-3,
            first: 1.5e-5,
            ratio: 1.3,
            coarse: 2.5e-4,
        }
    }
}

impl SlitResonator {
    pub fn validate(&self) -> Result<()> {
        for (k, v) in [
            ("duct_length", self.duct_length),
            ("height", self.height),
            ("slit_width", self.slit_width),
            ("slit_length", self.slit_length),
            ("cavity_length", self.cavity_length),
            ("first", self.first),
            ("coarse", self.coarse),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Geometry(format!("slit resonator {k} must be positive")));
            }
        }
        if self.slit_width >= self.height {
            return Err(Error::Geometry("slit must be narrower than the duct".into()));
        }
        if !(self.ratio >= 1.0) {
            return Err(Error::Geometry("grading ratio must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<TriMesh> {
        self.validate()?;
        let x1 = self.duct_length;
        let x2 = x1 + self.slit_length;
        let x3 = x2 + self.cavity_length;
        let y1 = 0.5 * (self.height - self.slit_width);
        let y2 = y1 + self.slit_width;
        let spec = RectSpec {
            xs: graded_segments(&[0.0, x1, x2, x3], self.first, self.ratio, self.coarse),
            ys: graded_segments(&[0.0, y1, y2, self.height], self.first, self.ratio, self.coarse),
        };
        let full = build_rect(
            &spec,
            |c| {
                if c[0] > x1 && c[0] < x2 && (c[1] < y1 || c[1] > y2) {
                    Region::Rigid
                } else {
                    Region::Air
                }
            },
            |side, _| match side {
                Side::Left => Label::Inlet,
                _ => Label::Wall,
            },
            &[],
        )?;
        Ok(full.air_submesh()?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subdivide_keeps_breakpoints() {
        let s = subdivide(&[0.0, 0.06, 0.12], 0.025);
        assert!(s.iter().any(|&x| (x - 0.06).abs() < 1e-15));
        assert_eq!(s.len(), 7);
    }

    #[test]
    fn graded_lines_monotone() {
        let g = graded_lines(0.0, 1e-3, 1e-5, 1.2, 1e-4, true);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[0]).abs() < 1e-18 && (g.last().unwrap() - 1e-3).abs() < 1e-15);
        assert!((g[1] - 1e-5).abs() < 1e-15);
    }
}
