//! Volume integrals `∫_box g(y) / (4π|y - x|) dy` for any target `x`.
//!
//! The box is written as a signed sum of six cones with apex `x`, one per
//! face. On the cone over face `F`, `y = x + t (p - x)` with `p ∈ F` and
//! `dy = t² h_F dt dA`, where `h_F` is the signed distance from `x` to the
//! plane of `F`; the `1/r` then becomes `1/(t |p - x|)` and the radial
//! integrand is polynomial when `g` is. Face integrals use graded panels
//! around the projection of `x`.

use std::f64::consts::PI;

use crate::gauss;

pub struct ConeRule {
    /// Gauss points in t.
    pub n_t: usize,
    /// Gauss points per panel on the faces.
    pub n_face: usize,
}

impl Default for ConeRule {
    fn default() -> Self {
        ConeRule { n_t: 12, n_face: 16 }
    }
}

impl ConeRule {
    /// Adds `∫ g_c(y) / (4π|y - x|) dy` for every component `c` into `out`.
    /// `g(y, buf)` writes the components at `y` into `buf`.
    pub fn integrate(
        &self,
        x: &[f64; 3],
        lo: &[f64; 3],
        hi: &[f64; 3],
        g: &mut dyn FnMut(&[f64; 3], &mut [f64]),
        out: &mut [f64],
    ) {
        let (tx, tw) = gauss::rule(self.n_t);
        let mut buf = vec![0.0; out.len()];
        for axis in 0..3 {
            for side in 0..2 {
                let plane = if side == 0 { lo[axis] } else { hi[axis] };
                let normal = if side == 0 { -1.0 } else { 1.0 };
                let h = normal * (plane - x[axis]);
                if h == 0.0 {
                    continue;
                }
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                let (u, wu) = split_axis(x[a1], lo[a1], hi[a1], h.abs(), self.n_face);
                let (v, wv) = split_axis(x[a2], lo[a2], hi[a2], h.abs(), self.n_face);
                for (pu, qu) in u.iter().zip(&wu) {
                    for (pv, qv) in v.iter().zip(&wv) {
                        let mut p = [0.0; 3];
                        p[axis] = plane;
                        p[a1] = *pu;
                        p[a2] = *pv;
                        let d = [p[0] - x[0], p[1] - x[1], p[2] - x[2]];
                        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                        let base = qu * qv * h / (4.0 * PI * r);
                        for (t, wt) in tx.iter().zip(&tw) {
                            let t = 0.5 * (t + 1.0);
                            let y = [x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]];
                            g(&y, &mut buf);
                            let f = base * 0.5 * wt * t;
                            for (o, b) in out.iter_mut().zip(&buf) {
                                *o += f * b;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Rule on `[lo, hi]` graded toward the clamped projection `c` of the target.
fn split_axis(c: f64, lo: f64, hi: f64, h: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let c = c.clamp(lo, hi);
    let finest = (0.05 * h).max(1e-14);
    let mut x = Vec::new();
    let mut w = Vec::new();
    if c > lo {
        let (px, pw) = gauss::graded(c, lo, finest, n);
        x.extend(px);
        w.extend(pw.iter().map(|v| -v));
    }
    if c < hi {
        let (px, pw) = gauss::graded(c, hi, finest, n);
        x.extend(px);
        w.extend(pw);
    }
    (x, w)
}

/// Newton potential `∫_{[-1/2,1/2]³} dy / (4π|y|)` of the unit cube at its
/// center: `(3/8π) ∫_{[-1/2,1/2]²} (1/4 + u² + v²)^{-1/2} du dv`, evaluated
/// with mpmath at 30 digits (inner integral in closed form via asinh).
pub const UNIT_CUBE_CENTER_POTENTIAL: f64 = 0.189_400_538_709_237_05;

/// Plain tensor Gauss with `n` points per axis, for targets well away from
/// the box.
pub fn tensor_gauss(
    n: usize,
    x: &[f64; 3],
    lo: &[f64; 3],
    hi: &[f64; 3],
    g: &mut dyn FnMut(&[f64; 3], &mut [f64]),
    out: &mut [f64],
) {
    let (gx, gw) = gauss::rule(n);
    let map = |d: usize, t: f64| lo[d] + 0.5 * (hi[d] - lo[d]) * (t + 1.0);
    let vol = (0..3).map(|d| 0.5 * (hi[d] - lo[d])).product::<f64>();
    let mut buf = vec![0.0; out.len()];
    for (a, wa) in gx.iter().zip(&gw) {
        for (b, wb) in gx.iter().zip(&gw) {
            for (c, wc) in gx.iter().zip(&gw) {
                let y = [map(0, *a), map(1, *b), map(2, *c)];
                let r = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2) + (y[2] - x[2]).powi(2)).sqrt();
                g(&y, &mut buf);
                let f = wa * wb * wc * vol / (4.0 * PI * r);
                for (o, v) in out.iter_mut().zip(&buf) {
                    *o += f * v;
                }
            }
        }
    }
}
