//! Far-image correction for the periodic unit cell.
//!
//! `far_field(d)` is the mean-free periodic Green's function of `-Δ` minus
//! the free-space contributions of the 27 nearest images, evaluated by Ewald
//! splitting. It is smooth for `|d|∞ < 2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::Point;

#[derive(Clone, Copy, Debug)]
pub struct EwaldParams {
    pub beta: f64,
    /// Real-space images `n ∈ {-r..r}³`.
    pub real_radius: i32,
    /// Reciprocal vectors with `|k|² <= k2_max`.
    pub k2_max: i32,
}

impl Default for EwaldParams {
    fn default() -> Self {
        EwaldParams { beta: 3.0, real_radius: 2, k2_max: 30 }
    }
}

fn reciprocal_vectors(p: &EwaldParams) -> Vec<([f64; 3], f64)> {
    // one of each ±k pair; weight doubled
    let kmax = (p.k2_max as f64).sqrt() as i32;
    let mut out = Vec::new();
    for a in -kmax..=kmax {
        for b in -kmax..=kmax {
            for c in -kmax..=kmax {
                let k2 = a * a + b * b + c * c;
                if k2 == 0 || k2 > p.k2_max || [a, b, c] < [0, 0, 0] {
                    continue;
                }
                let k2 = k2 as f64;
                let w = 2.0 * (-PI * PI * k2 / (p.beta * p.beta)).exp() / (4.0 * PI * PI * k2);
                out.push(([a as f64, b as f64, c as f64], w));
            }
        }
    }
    out
}

fn real_space(d: &Point, p: &EwaldParams) -> f64 {
    let r = p.real_radius;
    let mut s = 0.0;
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let x = [d[0] - a as f64, d[1] - b as f64, d[2] - c as f64];
                let dist = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let near = a.abs() <= 1 && b.abs() <= 1 && c.abs() <= 1;
                s += if near {
                    if dist < 1e-8 {
                        -p.beta / (2.0 * PI.powf(1.5))
                    } else {
                        -libm::erf(p.beta * dist) / (4.0 * PI * dist)
                    }
                } else {
                    libm::erfc(p.beta * dist) / (4.0 * PI * dist)
                };
            }
        }
    }
    s - 1.0 / (4.0 * p.beta * p.beta)
}

/// Periodic Green's function of `-Δ` minus the 27 nearest free-space images.
pub fn far_field(d: &Point, p: &EwaldParams) -> f64 {
    let mut s = real_space(d, p);
    for (k, w) in reciprocal_vectors(p) {
        s += w * (2.0 * PI * (k[0] * d[0] + k[1] * d[1] + k[2] * d[2])).cos();
    }
    s
}

/// `M[i][j] = far_field(targets[i] - sources[j])`.
pub fn far_field_matrix(targets: &[Point], sources: &[Point], p: &EwaldParams) -> DMatrix<f64> {
    let ks = reciprocal_vectors(p);
    let nk = ks.len();
    // cos(k·(x - y)) = cos kx cos ky + sin kx sin ky
    let trig = |pts: &[Point], weighted: bool| {
        let mut c = DMatrix::zeros(pts.len(), 2 * nk);
        for (i, x) in pts.iter().enumerate() {
            for (j, (k, w)) in ks.iter().enumerate() {
                let ph = 2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
                let w = if weighted { *w } else { 1.0 };
                c[(i, j)] = w * ph.cos();
                c[(i, nk + j)] = w * ph.sin();
            }
        }
        c
    };
    let mut m = trig(targets, true) * trig(sources, false).transpose();
    for (i, x) in targets.iter().enumerate() {
        for (j, y) in sources.iter().enumerate() {
            m[(i, j)] += real_space(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]], p);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_splitting_parameter() {
        let a = EwaldParams::default();
        let b = EwaldParams { beta: 2.4, real_radius: 3, k2_max: 24 };
        for d in [[0.0, 0.0, 0.0], [0.3, -0.2, 0.9], [1.0, 1.0, -1.0], [0.5, 0.5, 0.5]] {
            let (x, y) = (far_field(&d, &a), far_field(&d, &b));
            assert!((x - y).abs() < 1e-12, "{d:?}: {x} vs {y}");
        }
    }

    #[test]
    fn matrix_matches_pointwise() {
        let p = EwaldParams::default();
        let t = [[0.1, 0.2, 0.3], [-0.4, 0.5, 0.0]];
        let s = [[0.0, 0.0, 0.0], [0.7, -0.2, 0.1], [0.2, 0.2, 0.2]];
        let m = far_field_matrix(&t, &s, &p);
        for i in 0..2 {
            for j in 0..3 {
                let d = [t[i][0] - s[j][0], t[i][1] - s[j][1], t[i][2] - s[j][2]];
                assert!((m[(i, j)] - far_field(&d, &p)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetric_under_cube_group() {
        let p = EwaldParams::default();
        let d = [0.3, -0.7, 0.45];
        let v = far_field(&d, &p);
        for e in [[-0.3, -0.7, 0.45], [-0.7, 0.3, 0.45], [0.45, 0.3, -0.7]] {
            assert!((far_field(&e, &p) - v).abs() < 1e-13);
        }
    }
}
