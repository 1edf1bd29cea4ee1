//! Triplet assembly, Dirichlet elimination and sparse LU (faer).

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64 as C;

use crate::{Error, Result};

/// Accumulates a square complex matrix in triplet form.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    n: usize,
    trips: Vec<(usize, usize, C)>,
}

impl SparseSystem {
    pub fn new(n: usize) -> Self {
        SparseSystem { n, trips: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        SparseSystem {
            n,
            trips: Vec::with_capacity(cap),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: C) {
        self.trips.push((i, j, v));
    }

    /// Adds a dense element block `local[a][b]` at global indices `dofs`.
    pub fn add_block<const N: usize>(&mut self, dofs: &[usize; N], local: &[[C; N]; N]) {
        for a in 0..N {
            for b in 0..N {
                if local[a][b] != C::new(0.0, 0.0) {
                    self.trips.push((dofs[a], dofs[b], local[a][b]));
                }
            }
        }
    }

    pub fn extend(&mut self, other: &SparseSystem) {
        assert_eq!(self.n, other.n);
        self.trips.extend_from_slice(&other.trips);
    }

    /// Sorted, duplicate-summed (row, col, value) entries.
    pub fn entries(&self) -> Vec<(usize, usize, C)> {
        let mut t = self.trips.clone();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out: Vec<(usize, usize, C)> = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out
    }

    /// y = A x over all assembled entries (before any elimination).
    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![C::new(0.0, 0.0); self.n];
        for &(i, j, v) in &self.trips {
            y[i] += v * x[j];
        }
        y
    }

    /// Eliminates the `fixed` dofs (symmetrically) and factorizes.
    pub fn factorize(&self, fixed: &[bool], what: &str) -> Result<Factorized> {
        assert_eq!(fixed.len(), self.n);
        let mut trips = Vec::with_capacity(self.trips.len() + self.n);
        let mut coupling = Vec::new();
        for &(i, j, v) in &self.trips {
            if fixed[i] {
                continue;
            }
            if fixed[j] {
                coupling.push((i, j, v));
                continue;
            }
            trips.push(Triplet::new(i, j, v));
        }
        for (i, &f) in fixed.iter().enumerate() {
            if f {
                trips.push(Triplet::new(i, i, C::new(1.0, 0.0)));
            }
        }
        let fail = |reason: String, nnz: usize| Error::Solve {
            what: what.to_string(),
            n: self.n,
            nnz,
            reason,
        };
        let mat = SparseColMat::<usize, C>::try_new_from_triplets(self.n, self.n, &trips)
            .map_err(|e| fail(format!("{e:?}"), trips.len()))?;
        let nnz = mat.compute_nnz();
        let lu = mat.sp_lu().map_err(|e| fail(format!("{e:?}"), nnz))?;
        Ok(Factorized {
            n: self.n,
            lu,
            fixed: fixed.to_vec(),
            coupling,
            what: what.to_string(),
            nnz,
        })
    }
}

/// LU factors with the Dirichlet elimination data needed to lift new
/// right-hand sides.
pub struct Factorized {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, C>,
    fixed: Vec<bool>,
    coupling: Vec<(usize, usize, C)>,
    what: String,
    nnz: usize,
}

impl Factorized {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves with load `rhs` on free dofs and prescribed values `g` on the
    /// fixed dofs (`g` is ignored elsewhere; `None` means homogeneous).
    pub fn solve(&self, rhs: &[C], g: Option<&[C]>) -> Result<Vec<C>> {
        assert_eq!(rhs.len(), self.n);
        let mut b = Mat::<C>::from_fn(self.n, 1, |i, _| {
            if self.fixed[i] {
                g.map_or(C::new(0.0, 0.0), |g| g[i])
            } else {
                rhs[i]
            }
        });
        if let Some(g) = g {
            for &(i, j, v) in &self.coupling {
                b[(i, 0)] -= v * g[j];
            }
        }
        self.lu.solve_in_place(b.as_mut());
        let x: Vec<C> = (0..self.n).map(|i| b[(i, 0)]).collect();
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Solve {
                what: self.what.clone(),
                n: self.n,
                nnz: self.nnz,
                reason: "non-finite solution (singular matrix?)".into(),
            });
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_lifting_1d_laplace() {
        // -u'' = 0 on [0,1], u(0)=1, u(1)=3 with linear elements.
        let n = 11;
        let h = 1.0 / (n - 1) as f64;
        let mut s = SparseSystem::new(n);
        for e in 0..n - 1 {
            let k = 1.0 / h;
            s.add_block(
                &[e, e + 1],
                &[[C::new(k, 0.0), C::new(-k, 0.0)], [C::new(-k, 0.0), C::new(k, 0.0)]],
            );
        }
        let mut fixed = vec![false; n];
        fixed[0] = true;
        fixed[n - 1] = true;
        let f = s.factorize(&fixed, "test").unwrap();
        let mut g = vec![C::new(0.0, 0.0); n];
        g[0] = C::new(1.0, 0.0);
        g[n - 1] = C::new(3.0, 0.0);
        let u = f.solve(&vec![C::new(0.0, 0.0); n], Some(&g)).unwrap();
        for (i, v) in u.iter().enumerate() {
            let x = i as f64 * h;
            assert!((v.re - (1.0 + 2.0 * x)).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn entries_merge_duplicates() {
        let mut s = SparseSystem::new(2);
        s.add(0, 1, C::new(1.0, 0.0));
        s.add(0, 1, C::new(0.5, 2.0));
        s.add(1, 0, C::new(1.0, 0.0));
        let e = s.entries();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], (0, 1, C::new(1.5, 2.0)));
    }
}
