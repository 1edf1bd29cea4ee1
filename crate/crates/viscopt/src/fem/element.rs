//! Affine triangle geometry and Lagrange shape functions.
//!
//! Local P2 ordering: vertices 0, 1, 2 then edge midpoints (0,1), (1,2), (2,0).

#[derive(Clone, Copy, Debug)]
pub struct ElementGeom {
    pub x: [[f64; 2]; 3],
    /// Signed area.
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_l: [[f64; 2]; 3],
}

impl ElementGeom {
    pub fn new(x: [[f64; 2]; 3]) -> Self {
        let (x0, x1, x2) = (x[0], x[1], x[2]);
        let det = (x1[0] - x0[0]) * (x2[1] - x0[1]) - (x2[0] - x0[0]) * (x1[1] - x0[1]);
        let inv = 1.0 / det;
        let g1 = [(x2[1] - x0[1]) * inv, -(x2[0] - x0[0]) * inv];
        let g2 = [-(x1[1] - x0[1]) * inv, (x1[0] - x0[0]) * inv];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        ElementGeom {
            x,
            area: 0.5 * det,
            grad_l: [g0, g1, g2],
        }
    }

    pub fn point(&self, bary: [f64; 3]) -> [f64; 2] {
        [
            bary[0] * self.x[0][0] + bary[1] * self.x[1][0] + bary[2] * self.x[2][0],
            bary[0] * self.x[0][1] + bary[1] * self.x[1][1] + bary[2] * self.x[2][1],
        ]
    }

    /// Barycentric coordinates of an arbitrary point.
    pub fn bary_of(&self, p: [f64; 2]) -> [f64; 3] {
        let d = [p[0] - self.x[0][0], p[1] - self.x[0][1]];
        let l1 = self.grad_l[1][0] * d[0] + self.grad_l[1][1] * d[1];
        let l2 = self.grad_l[2][0] * d[0] + self.grad_l[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d(self.x[0], self.x[1])
            .max(d(self.x[1], self.x[2]))
            .max(d(self.x[2], self.x[0]))
    }

    pub fn p1_grads(&self) -> [[f64; 2]; 3] {
        self.grad_l
    }

    pub fn p2(&self, bary: [f64; 3]) -> P2Eval {
        P2Eval::new(self, bary)
    }
}

/// Values and gradients of the six P2 basis functions at one point.
#[derive(Clone, Copy, Debug)]
pub struct P2Eval {
    pub val: [f64; 6],
    pub grad: [[f64; 2]; 6],
}

impl P2Eval {
    pub fn new(g: &ElementGeom, l: [f64; 3]) -> Self {
        let gl = &g.grad_l;
        let mut val = [0.0; 6];
        let mut grad = [[0.0; 2]; 6];
        for i in 0..3 {
            val[i] = l[i] * (2.0 * l[i] - 1.0);
            let c = 4.0 * l[i] - 1.0;
            grad[i] = [c * gl[i][0], c * gl[i][1]];
        }
        for (k, (i, j)) in [(0usize, 1usize), (1, 2), (2, 0)].into_iter().enumerate() {
            val[3 + k] = 4.0 * l[i] * l[j];
            grad[3 + k] = [
                4.0 * (l[i] * gl[j][0] + l[j] * gl[i][0]),
                4.0 * (l[i] * gl[j][1] + l[j] * gl[i][1]),
            ];
        }
        P2Eval { val, grad }
    }

    pub fn interp<T>(&self, coef: &[T; 6]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
    {
        (0..6).map(|i| coef[i] * self.val[i]).sum()
    }

    pub fn interp_grad<T>(&self, coef: &[T; 6]) -> [T; 2]
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum,
    {
        [
            (0..6).map(|i| coef[i] * self.grad[i][0]).sum(),
            (0..6).map(|i| coef[i] * self.grad[i][1]).sum(),
        ]
    }
}

/// Values of the three quadratic edge functions along an edge parameter
/// s ∈ [0, 1]: (start vertex, end vertex, midpoint).
pub fn p2_edge_values(s: f64) -> [f64; 3] {
    let a = 1.0 - s;
    [a * (2.0 * a - 1.0), s * (2.0 * s - 1.0), 4.0 * a * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_nodal_property() {
        let g = ElementGeom::new([[0.1, 0.2], [1.3, 0.4], [0.5, 1.1]]);
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ];
        for (k, b) in nodes.iter().enumerate() {
            let e = g.p2(*b);
            for i in 0..6 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((e.val[i] - want).abs() < 1e-14);
            }
        }
        let e = g.p2([0.2, 0.3, 0.5]);
        assert!((e.val.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let gs: [f64; 2] = [e.grad.iter().map(|v| v[0]).sum(), e.grad.iter().map(|v| v[1]).sum()];
        assert!(gs[0].abs() < 1e-12 && gs[1].abs() < 1e-12);
    }

    #[test]
    fn reproduces_quadratics() {
        let g = ElementGeom::new([[0.0, 0.0], [2.0, 0.3], [0.4, 1.5]]);
        let f = |p: [f64; 2]| 1.0 + p[0] - 2.0 * p[1] + p[0] * p[1] + 0.5 * p[0] * p[0];
        let df = |p: [f64; 2]| [1.0 + p[1] + p[0], -2.0 + p[0]];
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ];
        let coef: [f64; 6] = std::array::from_fn(|i| f(g.point(nodes[i])));
        let b = [0.15, 0.6, 0.25];
        let e = g.p2(b);
        let p = g.point(b);
        assert!((e.interp(&coef) - f(p)).abs() < 1e-13);
        let gr = e.interp_grad(&coef);
        assert!((gr[0] - df(p)[0]).abs() < 1e-12 && (gr[1] - df(p)[1]).abs() < 1e-12);
        let back = g.bary_of(p);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-14);
        }
    }
}
