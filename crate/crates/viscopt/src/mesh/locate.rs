//! Point location and field transfer between meshes.

use super::{Point, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    P1,
    P2,
}

impl Space {
    pub fn n_dofs(self, mesh: &TriMesh) -> usize {
        match self {
            Space::P1 => mesh.n_vertices(),
            Space::P2 => mesh.n_p2(),
        }
    }
}

/// Uniform bucket grid over triangle bounding boxes.
pub struct Locator<'a> {
    mesh: &'a TriMesh,
    lo: Point,
    cell: [f64; 2],
    n: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let nt = mesh.n_triangles().max(1);
        let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let target = (nt as f64 / 2.0).max(1.0);
        let aspect = span[0] / span[1];
        let nx = ((target * aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let ny = ((target / aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = [span[0] / nx as f64, span[1] / ny as f64];
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut bl = [f64::INFINITY; 2];
            let mut bh = [f64::NEG_INFINITY; 2];
            for &v in tri {
                let p = mesh.vertices()[v];
                for k in 0..2 {
                    bl[k] = bl[k].min(p[k]);
                    bh[k] = bh[k].max(p[k]);
                }
            }
            let i0 = (((bl[0] - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((bh[0] - lo[0]) / cell[0]).floor().max(0.0) as usize).min(nx - 1);
            let j0 = (((bl[1] - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            let j1 = (((bh[1] - lo[1]) / cell[1]).floor().max(0.0) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t as u32);
                }
            }
        }
        Locator {
            mesh,
            lo,
            cell,
            n: [nx, ny],
            buckets,
        }
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let i = ((p[0] - self.lo[0]) / self.cell[0]).floor();
        let j = ((p[1] - self.lo[1]) / self.cell[1]).floor();
        (
            (i.max(0.0) as usize).min(self.n[0] - 1),
            (j.max(0.0) as usize).min(self.n[1] - 1),
        )
    }

    /// Containing triangle and barycentric coordinates, or the nearest
    /// triangle (smallest negative barycentric) when `p` is outside.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3], bool) {
        let (i, j) = self.bucket_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        let tol = 1e-10;
        for r in 0..=self.n[0].max(self.n[1]) {
            let (ilo, ihi) = (i.saturating_sub(r), (i + r).min(self.n[0] - 1));
            let (jlo, jhi) = (j.saturating_sub(r), (j + r).min(self.n[1] - 1));
            for jj in jlo..=jhi {
                for ii in ilo..=ihi {
                    if r > 0 && ii != ilo && ii != ihi && jj != jlo && jj != jhi {
                        continue;
                    }
                    for &t in &self.buckets[jj * self.n[0] + ii] {
                        let t = t as usize;
                        let b = self.mesh.geom(t).bary_of(p);
                        let m = b[0].min(b[1]).min(b[2]);
                        if m >= -tol {
                            return (t, b, true);
                        }
                        if best.map_or(true, |(_, _, bm)| m > bm) {
                            best = Some((t, b, m));
                        }
                    }
                }
            }
            if best.is_some() && r >= 1 {
                break;
            }
        }
        let (t, b, _) = best.expect("mesh has triangles");
        let mut c = [b[0].max(0.0), b[1].max(0.0), b[2].max(0.0)];
        let s = c[0] + c[1] + c[2];
        for v in c.iter_mut() {
            *v /= s;
        }
        (t, c, false)
    }

    /// Interpolated value of a P1 or P2 nodal field at `p`.
    pub fn eval<T>(&self, field: &[T], space: Space, p: Point) -> (T, bool)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
    {
        let (t, b, inside) = self.locate(p);
        (eval_in(self.mesh, field, space, t, b), inside)
    }
}

pub fn eval_in<T>(mesh: &TriMesh, field: &[T], space: Space, t: usize, b: [f64; 3]) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
{
    match space {
        Space::P1 => {
            let tri = mesh.triangles()[t];
            (0..3).map(|k| field[tri[k]] * b[k]).sum()
        }
        Space::P2 => {
            let e = mesh.geom(t).p2(b);
            let d = mesh.p2_dofs(t);
            (0..6).map(|k| field[d[k]] * e.val[k]).sum()
        }
    }
}

/// Interpolates `field` (nodal on `src` in `space`) onto the nodes of the
/// same space on `dst`. Points outside `src` are projected to the nearest
/// triangle with a warning.
pub fn interpolate_field<T>(src: &TriMesh, field: &[T], space: Space, dst: &TriMesh) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
{
    assert_eq!(field.len(), space.n_dofs(src));
    let loc = Locator::new(src);
    let n = space.n_dofs(dst);
    let mut outside = 0usize;
    let out = (0..n)
        .map(|i| {
            let p = dst.p2_coords(i);
            let (v, inside) = loc.eval(field, space, p);
            if !inside {
                outside += 1;
            }
            v
        })
        .collect();
    if outside > 0 {
        log::warn!("interpolate_field: {outside} destination nodes outside the source mesh");
    }
    out
}
