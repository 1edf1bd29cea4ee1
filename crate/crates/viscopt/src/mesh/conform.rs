//! Splitting a background mesh along the zero isoline of a P1 level set.

use std::collections::{BTreeMap, HashMap};

use super::{dist, Label, Point, Region, TriMesh};
use crate::Result;

/// Values with |φ| below this are treated as air.
pub const TIE_EPS: f64 = 1e-12;
/// Crossings closer than this fraction of the edge length to a vertex are
/// moved onto the vertex.
pub const SNAP_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Pos,
    Neg,
    Zero,
}

fn tie_break(v: f64) -> f64 {
    if v.abs() < TIE_EPS {
        -TIE_EPS
    } else {
        v
    }
}

/// Only design triangles change phase.
fn phase(reg: Region, rigid: bool) -> Region {
    if reg.is_design() {
        reg.with_phase(rigid)
    } else {
        reg
    }
}

/// Returns a mesh whose edges follow {φ = 0}. Background vertices keep
/// their indices; crossing vertices are appended. Triangles are tagged
/// rigid where φ ≥ 0 and air where φ < 0 inside D; other triangles keep
/// their region. Air/rigid interfaces carry `Label::RigidSurface`.
pub fn conform_to_levelset(background: &TriMesh, phi: &[f64]) -> Result<TriMesh> {
    assert_eq!(phi.len(), background.n_vertices(), "φ must be nodal on the background");
    let verts = background.vertices();
    let phi_t: Vec<f64> = phi.iter().map(|&v| tie_break(v)).collect();

    // Pass 1: snap near-vertex crossings.
    let mut zero = vec![false; verts.len()];
    for &[a, b] in background.edges() {
        let (pa, pb) = (phi_t[a], phi_t[b]);
        if (pa >= 0.0) == (pb >= 0.0) {
            continue;
        }
        let s = pa / (pa - pb);
        if s < SNAP_FRACTION {
            zero[a] = true;
        } else if s > 1.0 - SNAP_FRACTION {
            zero[b] = true;
        }
    }
    let state = |v: usize| -> State {
        if zero[v] {
            State::Zero
        } else if phi_t[v] >= 0.0 {
            State::Pos
        } else {
            State::Neg
        }
    };

    // Pass 2: crossing vertices on edges joining strictly opposite signs.
    let mut new_verts: Vec<Point> = verts.to_vec();
    let mut crossing: HashMap<usize, usize> = HashMap::new();
    for (e, &[a, b]) in background.edges().iter().enumerate() {
        let (sa, sb) = (state(a), state(b));
        if sa == State::Zero || sb == State::Zero || sa == sb {
            continue;
        }
        let s = phi_t[a] / (phi_t[a] - phi_t[b]);
        let (xa, xb) = (verts[a], verts[b]);
        crossing.insert(e, new_verts.len());
        new_verts.push([xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1])]);
    }

    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(background.n_triangles() + 2 * crossing.len());
    let mut regs = Vec::with_capacity(tris.capacity());
    // Parent edge of every sub-triangle edge lying on a background edge, so
    // outer labels can be inherited.
    let mut labels: BTreeMap<[usize; 2], Label> = BTreeMap::new();
    for (&key, &lab) in background.labels() {
        if lab == Label::RigidSurface {
            continue;
        }
        let e = background.edge_id(key[0], key[1]).unwrap();
        match crossing.get(&e) {
            Some(&x) => {
                labels.insert(super::edge_key(key[0], x), lab);
                labels.insert(super::edge_key(x, key[1]), lab);
            }
            None => {
                labels.insert(key, lab);
            }
        }
    }

    for t in 0..background.n_triangles() {
        let tri = background.triangles()[t];
        let reg = background.regions()[t];
        let te = background.tri_edges(t);
        let st = [state(tri[0]), state(tri[1]), state(tri[2])];
        let npos = st.iter().filter(|&&s| s == State::Pos).count();
        let nneg = st.iter().filter(|&&s| s == State::Neg).count();
        if npos == 0 || nneg == 0 {
            let rigid = if npos > 0 {
                true
            } else if nneg > 0 {
                false
            } else {
                (phi_t[tri[0]] + phi_t[tri[1]] + phi_t[tri[2]]) >= 0.0
            };
            tris.push(tri);
            regs.push(phase(reg, rigid));
            continue;
        }
        // Local edge k joins tri[k] and tri[(k+1)%3].
        let cross_on = |i: usize, j: usize| -> usize {
            let k = if (i + 1) % 3 == j { i } else { j };
            crossing[&te[k]]
        };
        if let Some(z) = (0..3).find(|&k| st[k] == State::Zero) {
            let (u, w) = ((z + 1) % 3, (z + 2) % 3);
            let x = cross_on(u, w);
            tris.push([tri[z], tri[u], x]);
            regs.push(phase(reg, st[u] == State::Pos));
            tris.push([tri[z], x, tri[w]]);
            regs.push(phase(reg, st[w] == State::Pos));
        } else {
            let lone = (0..3)
                .find(|&k| st[k] != st[(k + 1) % 3] && st[k] != st[(k + 2) % 3])
                .unwrap();
            let (u, w) = ((lone + 1) % 3, (lone + 2) % 3);
            let x1 = cross_on(lone, u);
            let x2 = cross_on(lone, w);
            let lone_rigid = st[lone] == State::Pos;
            tris.push([tri[lone], x1, x2]);
            regs.push(phase(reg, lone_rigid));
            let (pu, pw) = (new_verts[tri[u]], new_verts[tri[w]]);
            let (p1, p2) = (new_verts[x1], new_verts[x2]);
            if dist(p1, pw) <= dist(pu, p2) {
                tris.push([x1, tri[u], tri[w]]);
                tris.push([x1, tri[w], x2]);
            } else {
                tris.push([x1, tri[u], x2]);
                tris.push([tri[u], tri[w], x2]);
            }
            regs.push(phase(reg, !lone_rigid));
            regs.push(phase(reg, !lone_rigid));
        }
    }

    // Air/rigid interfaces.
    let mut edge_regions: HashMap<[usize; 2], (Region, Option<Region>)> = HashMap::new();
    for (tri, &r) in tris.iter().zip(&regs) {
        for k in 0..3 {
            let key = super::edge_key(tri[k], tri[(k + 1) % 3]);
            edge_regions
                .entry(key)
                .and_modify(|e| e.1 = Some(r))
                .or_insert((r, None));
        }
    }
    for (key, (r0, r1)) in edge_regions {
        if let Some(r1) = r1 {
            if r0.is_air() != r1.is_air() {
                labels.insert(key, Label::RigidSurface);
            }
        }
    }
    let bsize = background.size_field();
    let mut size: Vec<f64> = bsize.to_vec();
    let mut extra = vec![0.0; new_verts.len() - verts.len()];
    for (&e, &x) in &crossing {
        let [a, b] = background.edges()[e];
        extra[x - verts.len()] = 0.5 * (bsize[a] + bsize[b]);
    }
    size.extend(extra);
    Ok(TriMesh::new_oriented(new_verts, tris, regs, labels)?.with_size_field(size))
}

/// Level set that is +1 inside a disc and −1 outside, with a linear ramp
/// of half-width `ramp` across the circle.
pub fn disc_levelset(mesh: &TriMesh, center: Point, radius: f64, ramp: f64) -> Vec<f64> {
    mesh.vertices()
        .iter()
        .map(|&p| ((radius - dist(p, center)) / ramp).clamp(-1.0, 1.0))
        .collect()
}
