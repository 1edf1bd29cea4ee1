//! Symmetric triangle rules (barycentric points, weights summing to one)
//! and Gauss–Legendre rules on edges (parameter in [0, 1]).

/// Barycentric point with weight (fraction of the triangle area).
#[derive(Clone, Copy, Debug)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

fn orbit3(a: f64, b: f64, w: f64, out: &mut Vec<TriPoint>) {
    out.push(TriPoint { bary: [a, b, b], weight: w });
    out.push(TriPoint { bary: [b, a, b], weight: w });
    out.push(TriPoint { bary: [b, b, a], weight: w });
}

fn orbit6(a: f64, b: f64, c: f64, w: f64, out: &mut Vec<TriPoint>) {
    for bary in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push(TriPoint { bary, weight: w });
    }
}

/// Six-point rule, exact for polynomials of degree 4.
pub fn tri_degree4() -> Vec<TriPoint> {
    let mut q = Vec::with_capacity(6);
    orbit3(0.108103018168070, 0.445948490915965, 0.223381589678011, &mut q);
    orbit3(0.816847572980459, 0.091576213509771, 0.109951743655322, &mut q);
    q
}

/// Twelve-point rule, exact for polynomials of degree 6.
pub fn tri_degree6() -> Vec<TriPoint> {
    let mut q = Vec::with_capacity(12);
    orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379, &mut q);
    orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207, &mut q);
    orbit6(
        0.053145049844817,
        0.310352451033784,
        0.636502499121399,
        0.082851075618374,
        &mut q,
    );
    q
}

/// Three-point Gauss rule on [0, 1]: (parameter, weight), weights sum to one.
pub fn edge_gauss3() -> [(f64, f64); 3] {
    let r = (0.6f64).sqrt() / 2.0;
    [
        (0.5 - r, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + r, 5.0 / 18.0),
    ]
}
