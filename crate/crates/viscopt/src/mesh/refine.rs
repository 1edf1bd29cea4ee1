//! Boundary-layer size field and conforming longest-edge bisection.

use std::collections::BTreeMap;

use super::{dist, edge_key, mid, DistanceField, Label, Point, Region, TriMesh};
use crate::Result;

/// Target element size as a function of the signed distance u_e:
/// `h_band` inside the air band −β < u_e ≤ 0, growing linearly with slope
/// `grade` outside it (ring ratio 1 + grade), capped at `coarse`; the rigid
/// side (u_e > 0) gets `coarse`.
#[derive(Clone, Copy, Debug)]
pub struct SizeRule {
    pub h_band: f64,
    pub beta: f64,
    pub grade: f64,
    pub coarse: f64,
}

impl SizeRule {
    pub const GRADE: f64 = 0.3;

    pub fn new(beta: f64, lambda_v_fin: f64, coarse: f64) -> SizeRule {
        let h_band = lambda_v_fin / 5.0;
        SizeRule {
            h_band,
            beta: beta.max(0.0),
            grade: Self::GRADE,
            coarse: coarse.max(h_band),
        }
    }

    pub fn size(&self, u_e: f64) -> f64 {
        if u_e > 0.0 {
            return self.coarse;
        }
        let d = -u_e;
        if d < self.beta {
            self.h_band
        } else {
            (self.h_band + self.grade * (d - self.beta)).min(self.coarse)
        }
    }
}

/// Per-vertex size targets consumed by [`refine_mesh`].
#[derive(Clone, Debug)]
pub enum SizeField {
    /// Sizes at vertices, interpolated linearly to new vertices.
    Nodal(Vec<f64>),
    /// u_e at vertices (interpolated linearly) mapped through a rule.
    Distance { rule: SizeRule, u_e: Vec<f64> },
}

impl SizeField {
    fn values(&self) -> &[f64] {
        match self {
            SizeField::Nodal(v) => v,
            SizeField::Distance { u_e, .. } => u_e,
        }
    }

    fn size_of(&self, value: f64) -> f64 {
        match self {
            SizeField::Nodal(_) => value,
            SizeField::Distance { rule, .. } => rule.size(value),
        }
    }
}

/// Attaches the boundary-layer size field to `mesh`.
pub fn build_size_field(
    mesh: &TriMesh,
    dist: &DistanceField,
    beta_e: f64,
    lambda_v_fin: f64,
    coarse: f64,
) -> TriMesh {
    let rule = SizeRule::new(beta_e, lambda_v_fin, coarse);
    let sizes = dist.u_e.iter().map(|&u| rule.size(u)).collect();
    mesh.clone().with_size_field(sizes)
}

#[derive(Clone, Debug)]
pub struct RefineOptions {
    /// Vertex budget; refinement stops (with a warning) when exceeded.
    pub max_vertices: usize,
    pub max_passes: usize,
    /// Triangles with diameter above `tolerance × size` are split.
    pub tolerance: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_vertices: 400_000,
            max_passes: 60,
            tolerance: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RefineResult {
    pub mesh: TriMesh,
    /// The carried field (sizes or u_e) at the output vertices.
    pub values: Vec<f64>,
    /// False when the vertex budget stopped refinement early.
    pub complete: bool,
}

/// Refines until every triangle's diameter is at most the smallest size
/// requested at its vertices. Conformity is kept by marking, for every
/// triangle with a marked edge, its longest edge as well.
pub fn refine_mesh(mesh: &TriMesh, size: &SizeField, opts: &RefineOptions) -> Result<RefineResult> {
    let mut verts: Vec<Point> = mesh.vertices().to_vec();
    let mut tris: Vec<[usize; 3]> = mesh.triangles().to_vec();
    let mut regs: Vec<Region> = mesh.regions().to_vec();
    let mut labels: BTreeMap<[usize; 2], Label> = mesh.labels().clone();
    let mut vals: Vec<f64> = size.values().to_vec();
    assert_eq!(vals.len(), verts.len());
    let mut complete = true;

    for _pass in 0..opts.max_passes {
        let longest: Vec<[usize; 2]> = tris.iter().map(|t| longest_edge(&verts, t)).collect();
        let mut marked: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for (t, tri) in tris.iter().enumerate() {
            let h = tri
                .iter()
                .map(|&v| size.size_of(vals[v]))
                .fold(f64::INFINITY, f64::min);
            let [a, b] = longest[t];
            if dist(verts[a], verts[b]) > opts.tolerance * h {
                marked.insert(longest[t], usize::MAX);
            }
        }
        if marked.is_empty() {
            break;
        }
        loop {
            let mut added = false;
            for (t, tri) in tris.iter().enumerate() {
                if marked.contains_key(&longest[t]) {
                    continue;
                }
                let any = (0..3).any(|k| marked.contains_key(&edge_key(tri[k], tri[(k + 1) % 3])));
                if any {
                    marked.insert(longest[t], usize::MAX);
                    added = true;
                }
            }
            if !added {
                break;
            }
        }
        if verts.len() + marked.len() > opts.max_vertices {
            log::warn!(
                "refinement stopped at {} vertices (budget {})",
                verts.len(),
                opts.max_vertices
            );
            complete = false;
            break;
        }
        for (key, slot) in marked.iter_mut() {
            *slot = verts.len();
            verts.push(mid(verts[key[0]], verts[key[1]]));
            vals.push(0.5 * (vals[key[0]] + vals[key[1]]));
        }
        let mut new_labels = BTreeMap::new();
        for (key, lab) in labels {
            match marked.get(&key) {
                Some(&m) => {
                    new_labels.insert(edge_key(key[0], m), lab);
                    new_labels.insert(edge_key(m, key[1]), lab);
                }
                None => {
                    new_labels.insert(key, lab);
                }
            }
        }
        labels = new_labels;
        let mut new_tris = Vec::with_capacity(tris.len() * 2);
        let mut new_regs = Vec::with_capacity(tris.len() * 2);
        for (t, tri) in tris.iter().enumerate() {
            let r = regs[t];
            let Some(&_) = marked.get(&longest[t]) else {
                new_tris.push(*tri);
                new_regs.push(r);
                continue;
            };
            // Rotate so the longest edge is (a, b).
            let k0 = (0..3)
                .find(|&k| edge_key(tri[k], tri[(k + 1) % 3]) == longest[t])
                .unwrap();
            let (a, b, c) = (tri[k0], tri[(k0 + 1) % 3], tri[(k0 + 2) % 3]);
            let m = marked[&edge_key(a, b)];
            match marked.get(&edge_key(c, a)) {
                Some(&mca) => {
                    new_tris.push([a, m, mca]);
                    new_tris.push([m, c, mca]);
                    new_regs.extend([r, r]);
                }
                None => {
                    new_tris.push([a, m, c]);
                    new_regs.push(r);
                }
            }
            match marked.get(&edge_key(b, c)) {
                Some(&mbc) => {
                    new_tris.push([m, b, mbc]);
                    new_tris.push([m, mbc, c]);
                    new_regs.extend([r, r]);
                }
                None => {
                    new_tris.push([m, b, c]);
                    new_regs.push(r);
                }
            }
        }
        tris = new_tris;
        regs = new_regs;
    }

    let sizes: Vec<f64> = vals.iter().map(|&v| size.size_of(v)).collect();
    let out = TriMesh::new(verts, tris, regs, labels)?.with_size_field(sizes);
    Ok(RefineResult {
        mesh: out,
        values: vals,
        complete,
    })
}

/// Refines against a size function of position, re-evaluated at every
/// vertex between rounds so features smaller than the current elements are
/// still detected.
pub fn refine_to(
    mesh: &TriMesh,
    size: impl Fn(Point) -> f64,
    opts: &RefineOptions,
) -> Result<RefineResult> {
    let mut cur = mesh.clone();
    let mut complete = true;
    for _ in 0..opts.max_passes {
        let sizes: Vec<f64> = cur.vertices().iter().map(|&p| size(p)).collect();
        let step = RefineOptions {
            max_passes: 2,
            ..opts.clone()
        };
        let n0 = cur.n_vertices();
        let r = refine_mesh(&cur, &SizeField::Nodal(sizes), &step)?;
        cur = r.mesh;
        if !r.complete {
            complete = false;
            break;
        }
        if cur.n_vertices() == n0 {
            break;
        }
    }
    let values: Vec<f64> = cur.vertices().iter().map(|&p| size(p)).collect();
    let cur = cur.with_size_field(values.clone());
    Ok(RefineResult {
        mesh: cur,
        values,
        complete,
    })
}

fn longest_edge(verts: &[Point], t: &[usize; 3]) -> [usize; 2] {
    let mut best = edge_key(t[0], t[1]);
    let mut best_len = dist(verts[t[0]], verts[t[1]]);
    for k in 1..3 {
        let key = edge_key(t[k], t[(k + 1) % 3]);
        let l = dist(verts[t[k]], verts[t[(k + 1) % 3]]);
        if l > best_len * (1.0 + 1e-12) || ((l - best_len).abs() <= best_len * 1e-12 && key < best) {
            best = key;
            best_len = l;
        }
    }
    best
}
