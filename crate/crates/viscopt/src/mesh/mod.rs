//! Triangle meshes with region tags and labeled edges, plus the geometry
//! pipeline: case presets, isoline conforming, distance field and
//! boundary-layer refinement.

mod builder;
mod conform;
mod distance;
mod locate;
mod refine;

pub use builder::{build_case_geometry, build_rect, graded_lines, graded_segments, SlitResonator, subdivide, Side, CaseGeometry, CaseKind, RectSpec};
pub use conform::{conform_to_levelset, disc_levelset};
pub use distance::{solve_distance_field, DistanceField, DEFAULT_BETA_E};
pub use locate::{interpolate_field, Locator, Space};
pub use refine::{build_size_field, refine_mesh, refine_to, RefineOptions, RefineResult, SizeField, SizeRule};

use std::collections::{BTreeMap, HashMap};

use crate::fem::ElementGeom;
use crate::{Error, Result};

pub type Point = [f64; 2];

/// Region tag of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// Fixed air outside any design domain.
    Air,
    /// Fixed rigid inclusion.
    Rigid,
    DesignAir,
    DesignRigid,
    NonDesignAir,
}

impl Region {
    pub fn is_air(self) -> bool {
        matches!(self, Region::Air | Region::DesignAir | Region::NonDesignAir)
    }

    pub fn is_rigid(self) -> bool {
        !self.is_air()
    }

    pub fn is_design(self) -> bool {
        matches!(self, Region::DesignAir | Region::DesignRigid)
    }

    /// Same design membership, switched phase.
    pub fn with_phase(self, rigid: bool) -> Region {
        match (self.is_design(), rigid) {
            (true, true) => Region::DesignRigid,
            (true, false) => Region::DesignAir,
            (false, true) => Region::Rigid,
            (false, false) => {
                if self == Region::NonDesignAir {
                    Region::NonDesignAir
                } else {
                    Region::Air
                }
            }
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Region::Air => 0,
            Region::Rigid => 1,
            Region::DesignAir => 2,
            Region::DesignRigid => 3,
            Region::NonDesignAir => 4,
        }
    }

    pub fn from_code(c: i32) -> Option<Region> {
        Some(match c {
            0 => Region::Air,
            1 => Region::Rigid,
            2 => Region::DesignAir,
            3 => Region::DesignRigid,
            4 => Region::NonDesignAir,
            _ => return None,
        })
    }
}

/// Edge label. Boundary labels sit on the outer boundary; `RigidSurface`
/// marks ∂Ω_r (interior when the rigid phase is meshed, boundary on an
/// air-only mesh); `Probe1`/`Probe2` are interior measurement lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Inlet,
    Outlet,
    Reference,
    Symmetry,
    Wall,
    RigidSurface,
    Probe1,
    Probe2,
}

impl Label {
    pub const ALL: [Label; 8] = [
        Label::Inlet,
        Label::Outlet,
        Label::Reference,
        Label::Symmetry,
        Label::Wall,
        Label::RigidSurface,
        Label::Probe1,
        Label::Probe2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Label::Inlet => "inlet",
            Label::Outlet => "outlet",
            Label::Reference => "reference",
            Label::Symmetry => "symmetry",
            Label::Wall => "wall",
            Label::RigidSurface => "rigid_surface",
            Label::Probe1 => "probe1",
            Label::Probe2 => "probe2",
        }
    }

    pub fn from_name(s: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.name() == s)
    }

    pub fn is_boundary_kind(self) -> bool {
        !matches!(self, Label::Probe1 | Label::Probe2)
    }

    /// No-slip / isothermal surfaces (Γ_wall ∪ ∂Ω_r).
    pub fn is_solid(self) -> bool {
        matches!(self, Label::Wall | Label::RigidSurface)
    }
}

const NONE: usize = usize::MAX;

#[inline]
pub fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Conforming triangulation with P2 numbering (vertices first, then one
/// dof per edge).
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<Region>,
    labels: BTreeMap<[usize; 2], Label>,
    size: Vec<f64>,
    edges: Vec<[usize; 2]>,
    edge_index: HashMap<[usize; 2], usize>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<[usize; 2]>,
}

impl TriMesh {
    /// Validates and builds. Labels on non-edges, degenerate or clockwise
    /// triangles, non-manifold edges and unlabeled boundary edges are errors.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
        labels: BTreeMap<[usize; 2], Label>,
    ) -> Result<TriMesh> {
        if regions.len() != triangles.len() {
            return Err(Error::Mesh("region count differs from triangle count".into()));
        }
        let nv = vertices.len();
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {t} references a missing vertex")));
            }
            let g = ElementGeom::new([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            if !(g.area > 0.0) {
                return Err(Error::Mesh(format!(
                    "triangle {t} has non-positive area {:e}",
                    g.area
                )));
            }
            let mut te = [0; 3];
            for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let key = edge_key(tri[a], tri[b]);
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tris.push([NONE, NONE]);
                    edges.len() - 1
                });
                if edge_tris[e][0] == NONE {
                    edge_tris[e][0] = t;
                } else if edge_tris[e][1] == NONE {
                    edge_tris[e][1] = t;
                } else {
                    return Err(Error::Mesh(format!(
                        "edge {:?} shared by more than two triangles",
                        key
                    )));
                }
                te[k] = e;
            }
            tri_edges.push(te);
        }
        for (key, lab) in &labels {
            let Some(&e) = edge_index.get(key) else {
                return Err(Error::Mesh(format!("label {lab:?} on non-edge {key:?}")));
            };
            let [t0, t1] = edge_tris[e];
            if t1 == NONE {
                if !lab.is_boundary_kind() {
                    return Err(Error::Mesh(format!("probe label {lab:?} on boundary edge")));
                }
            } else {
                match lab {
                    Label::RigidSurface => {
                        if regions[t0].is_air() == regions[t1].is_air() {
                            return Err(Error::Mesh(format!(
                                "rigid-surface edge {key:?} does not separate air and rigid"
                            )));
                        }
                    }
                    Label::Probe1 | Label::Probe2 => {}
                    _ => {
                        return Err(Error::Mesh(format!(
                            "boundary label {lab:?} on interior edge {key:?}"
                        )))
                    }
                }
            }
        }
        for (e, et) in edge_tris.iter().enumerate() {
            if et[1] == NONE && !labels.contains_key(&edges[e]) {
                return Err(Error::Mesh(format!("boundary edge {:?} unlabeled", edges[e])));
            }
        }
        let mut m = TriMesh {
            vertices,
            triangles,
            regions,
            labels,
            size: Vec::new(),
            edges,
            edge_index,
            tri_edges,
            edge_tris,
        };
        m.size = m.mean_edge_length_per_vertex();
        Ok(m)
    }

    /// Rebuilds from parts after orienting triangles counter-clockwise.
    pub fn new_oriented(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
        labels: BTreeMap<[usize; 2], Label>,
    ) -> Result<TriMesh> {
        for tri in triangles.iter_mut() {
            let g = ElementGeom::new([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            if g.area < 0.0 {
                tri.swap(1, 2);
            }
        }
        TriMesh::new(vertices, triangles, regions, labels)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn labels(&self) -> &BTreeMap<[usize; 2], Label> {
        &self.labels
    }

    pub fn size_field(&self) -> &[f64] {
        &self.size
    }

    pub fn with_size_field(mut self, size: Vec<f64>) -> TriMesh {
        assert_eq!(size.len(), self.vertices.len());
        self.size = size;
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_p2(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&edge_key(a, b)).copied()
    }

    /// Triangles adjacent to an edge (one or two).
    pub fn edge_triangles(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_tris[e].into_iter().filter(|&t| t != NONE)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1] == NONE
    }

    pub fn tri_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn geom(&self, t: usize) -> ElementGeom {
        let [a, b, c] = self.triangles[t];
        ElementGeom::new([self.vertices[a], self.vertices[b], self.vertices[c]])
    }

    /// Global P2 dofs of a triangle in local order.
    pub fn p2_dofs(&self, t: usize) -> [usize; 6] {
        let [a, b, c] = self.triangles[t];
        let nv = self.vertices.len();
        let [e0, e1, e2] = self.tri_edges[t];
        [a, b, c, nv + e0, nv + e1, nv + e2]
    }

    pub fn p2_dof_of_edge(&self, e: usize) -> usize {
        self.vertices.len() + e
    }

    pub fn p2_coords(&self, dof: usize) -> Point {
        let nv = self.vertices.len();
        if dof < nv {
            self.vertices[dof]
        } else {
            let [a, b] = self.edges[dof - nv];
            mid(self.vertices[a], self.vertices[b])
        }
    }

    pub fn label_of(&self, e: usize) -> Option<Label> {
        self.labels.get(&self.edges[e]).copied()
    }

    /// Edges carrying `label`, as (edge id, oriented vertex pair). Boundary
    /// edges are oriented so that the adjacent triangle lies to the left.
    pub fn labeled_edges(&self, label: Label) -> Vec<(usize, [usize; 2])> {
        let mut out = Vec::new();
        for (key, &l) in &self.labels {
            if l != label {
                continue;
            }
            let e = self.edge_index[key];
            let t = self.edge_tris[e][0];
            let tri = self.triangles[t];
            let mut pair = *key;
            for k in 0..3 {
                if tri[k] == key[1] && tri[(k + 1) % 3] == key[0] {
                    pair = [key[1], key[0]];
                }
            }
            out.push((e, pair));
        }
        out
    }

    pub fn has_label(&self, label: Label) -> bool {
        self.labels.values().any(|&l| l == label)
    }

    pub fn label_length(&self, label: Label) -> f64 {
        self.labeled_edges(label)
            .iter()
            .map(|(_, [a, b])| dist(self.vertices[*a], self.vertices[*b]))
            .sum()
    }

    /// Mask over P2 dofs lying on edges with any of `labels`.
    pub fn p2_mask_on(&self, labels: &[Label]) -> Vec<bool> {
        let mut mask = vec![false; self.n_p2()];
        for (key, l) in &self.labels {
            if labels.contains(l) {
                let e = self.edge_index[key];
                mask[key[0]] = true;
                mask[key[1]] = true;
                mask[self.p2_dof_of_edge(e)] = true;
            }
        }
        mask
    }

    /// Mask over vertices lying on edges with any of `labels`.
    pub fn vertex_mask_on(&self, labels: &[Label]) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for (key, l) in &self.labels {
            if labels.contains(l) {
                mask[key[0]] = true;
                mask[key[1]] = true;
            }
        }
        mask
    }

    /// Per-vertex flag: touches at least one air triangle.
    pub fn air_vertex_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.regions[t].is_air() {
                for &v in tri {
                    m[v] = true;
                }
            }
        }
        m
    }

    /// Per-vertex flag: touches at least one rigid triangle.
    pub fn rigid_vertex_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.regions[t].is_rigid() {
                for &v in tri {
                    m[v] = true;
                }
            }
        }
        m
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.geom(t).area).sum()
    }

    pub fn area_where(&self, f: impl Fn(Region) -> bool) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| f(self.regions[t]))
            .map(|t| self.geom(t).area)
            .sum()
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Longest edge of each triangle.
    pub fn diameters(&self) -> Vec<f64> {
        (0..self.n_triangles()).map(|t| self.geom(t).diameter()).collect()
    }

    fn mean_edge_length_per_vertex(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.vertices.len()];
        let mut cnt = vec![0usize; self.vertices.len()];
        for &[a, b] in &self.edges {
            let l = dist(self.vertices[a], self.vertices[b]);
            sum[a] += l;
            sum[b] += l;
            cnt[a] += 1;
            cnt[b] += 1;
        }
        sum.iter()
            .zip(&cnt)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect()
    }

    /// Copy with new region tags (labels on ∂Ω_r regenerated).
    pub fn with_regions(&self, regions: Vec<Region>) -> Result<TriMesh> {
        let mut labels: BTreeMap<[usize; 2], Label> = self
            .labels
            .iter()
            .filter(|(_, &l)| l != Label::RigidSurface)
            .map(|(k, l)| (*k, *l))
            .collect();
        for (e, et) in self.edge_tris.iter().enumerate() {
            if et[1] != NONE && regions[et[0]].is_air() != regions[et[1]].is_air() {
                if let Some(old) = labels.insert(self.edges[e], Label::RigidSurface) {
                    if matches!(old, Label::Probe1 | Label::Probe2) {
                        labels.insert(self.edges[e], old);
                    }
                }
            }
        }
        let mut m = TriMesh::new(self.vertices.clone(), self.triangles.clone(), regions, labels)?;
        m.size = self.size.clone();
        Ok(m)
    }

    /// Air-only mesh. The returned map gives the parent vertex of each new
    /// vertex. Former ∂Ω_r edges become `RigidSurface` boundary edges.
    pub fn air_submesh(&self) -> Result<(TriMesh, Vec<usize>)> {
        let mut new_of = vec![NONE; self.n_vertices()];
        let mut parent = Vec::new();
        let mut tris = Vec::new();
        let mut regs = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if !self.regions[t].is_air() {
                continue;
            }
            let mut nt = [0; 3];
            for k in 0..3 {
                let v = tri[k];
                if new_of[v] == NONE {
                    new_of[v] = parent.len();
                    parent.push(v);
                }
                nt[k] = new_of[v];
            }
            tris.push(nt);
            regs.push(self.regions[t]);
        }
        if tris.is_empty() {
            return Err(Error::Mesh("no air triangles".into()));
        }
        let mut labels = BTreeMap::new();
        for (e, et) in self.edge_tris.iter().enumerate() {
            let [a, b] = self.edges[e];
            if new_of[a] == NONE || new_of[b] == NONE {
                continue;
            }
            let air0 = self.regions[et[0]].is_air();
            let air1 = et[1] != NONE && self.regions[et[1]].is_air();
            let key = edge_key(new_of[a], new_of[b]);
            match (air0, air1) {
                (true, true) => {
                    if let Some(l) = self.label_of(e) {
                        if !l.is_boundary_kind() {
                            labels.insert(key, l);
                        }
                    }
                }
                (true, false) | (false, true) => {
                    let l = if et[1] == NONE {
                        self.label_of(e).unwrap_or(Label::Wall)
                    } else {
                        Label::RigidSurface
                    };
                    labels.insert(key, l);
                }
                (false, false) => {}
            }
        }
        let verts: Vec<Point> = parent.iter().map(|&v| self.vertices[v]).collect();
        let mut m = TriMesh::new(verts, tris, regs, labels)?;
        m.size = parent.iter().map(|&v| self.size[v]).collect();
        Ok((m, parent))
    }

    /// Edges of ∂D: between design and non-design triangles, or design
    /// triangles on the outer boundary.
    pub fn design_boundary_edges(&self) -> Vec<usize> {
        (0..self.n_edges())
            .filter(|&e| {
                let [t0, t1] = self.edge_tris[e];
                let d0 = self.regions[t0].is_design();
                if t1 == NONE {
                    d0
                } else {
                    d0 != self.regions[t1].is_design()
                }
            })
            .collect()
    }

    /// Maps a P2 field onto the vertices (drops edge dofs).
    pub fn p2_to_p1<T: Copy>(&self, f: &[T]) -> Vec<T> {
        f[..self.n_vertices()].to_vec()
    }

    /// Extends a P1 field to P2 by averaging edge endpoints.
    pub fn p1_to_p2(&self, f: &[f64]) -> Vec<f64> {
        let mut out = f.to_vec();
        out.extend(self.edges.iter().map(|&[a, b]| 0.5 * (f[a] + f[b])));
        out
    }
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[inline]
pub fn mid(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}
