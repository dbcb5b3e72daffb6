//! Integrals of Chebyshev basis functions against `1/(4π|x - ξ|)` over the
//! reference cube `[-1, 1]³`.
//!
//! Boxes away from the target get tensor Gauss rules whose order follows
//! the distance-to-size ratio, after adaptive subdivision. A target inside
//! the cube splits it into up to eight boxes cornered at the target; the
//! cube of each one touching the corner is integrated through three
//! pyramids with apex at the target, where the `1/r` factor cancels the
//! Jacobian, and the rest goes to the adaptive rule.

use std::f64::consts::PI;

use crate::chebyshev::n_coeffs;
use crate::error::{ArenaError, Result};
use crate::quadrature::{chebyshev_t, gauss_legendre};
use crate::Point;

const MAX_ORDER: usize = 48;
const MAX_BOXES: usize = 200_000;

pub struct RefIntegrator {
    q: usize,
    /// Gauss rules on `[0, 1]`, index = number of points.
    rules: Vec<(Vec<f64>, Vec<f64>)>,
    /// `ln(1/tol)` used to size rules.
    digits: f64,
    /// Accept a box once `dist >= eta * max half-extent`.
    eta: f64,
    n_t: usize,
    n_uv: usize,
}

impl RefIntegrator {
    pub fn new(q: usize, tol: f64) -> Self {
        let rules = (0..=MAX_ORDER)
            .map(|n| {
                if n == 0 {
                    return (Vec::new(), Vec::new());
                }
                let (x, w) = gauss_legendre(n);
                (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
            })
            .collect();
        let digits = (1.0 / tol).ln();
        let half_q = q.div_ceil(2);
        RefIntegrator {
            q,
            rules,
            digits,
            eta: 1.0,
            n_t: half_q + 1,
            n_uv: ((digits / 3.0).ceil() as usize + half_q + 2).min(MAX_ORDER),
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    fn order_for(&self, ratio: f64) -> usize {
        // Bernstein ellipse through a singularity at relative distance `ratio`
        let rho = ratio + (ratio * ratio + 1.0).sqrt();
        let n = (self.digits / (2.0 * rho.ln())).ceil() as usize + self.q.div_ceil(2) + 1;
        n.clamp(2, MAX_ORDER)
    }

    /// `out[c] = ∫_{[-1,1]³} T_c(ξ) / (4π|x - ξ|) dξ`, coefficient storage order.
    pub fn integrate(&self, x: &Point, out: &mut [f64]) -> Result<()> {
        assert_eq!(out.len(), n_coeffs(self.q));
        out.iter_mut().for_each(|v| *v = 0.0);
        let inside = x.iter().all(|v| v.abs() <= 1.0);
        if !inside {
            return self.outside(x, [-1.0; 3], [1.0; 3], out);
        }
        for oct in 0..8 {
            let s: [f64; 3] = std::array::from_fn(|d| if oct >> d & 1 == 1 { 1.0 } else { -1.0 });
            let e: [f64; 3] = std::array::from_fn(|d| if s[d] > 0.0 { 1.0 - x[d] } else { x[d] + 1.0 });
            if e.iter().any(|v| *v <= 0.0) {
                continue;
            }
            self.corner_box(x, s, e, out)?;
        }
        Ok(())
    }

    fn corner_box(&self, x: &Point, s: [f64; 3], e: [f64; 3], out: &mut [f64]) -> Result<()> {
        let m = e[0].min(e[1]).min(e[2]);
        let q = self.q;
        let (tn, tw) = &self.rules[self.n_t];
        let (un, uw) = &self.rules[self.n_uv];
        let mut tx = vec![0.0; q];
        let mut ty = vec![0.0; q];
        let mut tz = vec![0.0; q];
        for axis in 0..3 {
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            for (u, wu) in un.iter().zip(uw) {
                for (v, wv) in un.iter().zip(uw) {
                    let mut p = [0.0; 3];
                    p[axis] = m;
                    p[a1] = u * m;
                    p[a2] = v * m;
                    let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    let base = wu * wv * m * m * m / (4.0 * PI * norm);
                    for (t, wt) in tn.iter().zip(tw) {
                        let y: [f64; 3] = std::array::from_fn(|d| x[d] + t * s[d] * p[d]);
                        chebyshev_t(q, y[0], &mut tx);
                        chebyshev_t(q, y[1], &mut ty);
                        chebyshev_t(q, y[2], &mut tz);
                        accumulate_point(q, base * wt * t, &tx, &ty, &tz, out);
                    }
                }
            }
        }
        // the three slabs left over once the corner cube is removed
        let mut ranges = [[0.0, e[0]], [0.0, e[1]], [0.0, e[2]]];
        for d in 0..3 {
            if e[d] > m {
                ranges[d] = [m, e[d]];
                let lo: [f64; 3] = std::array::from_fn(|k| (x[k] + s[k] * ranges[k][0]).min(x[k] + s[k] * ranges[k][1]));
                let hi: [f64; 3] = std::array::from_fn(|k| (x[k] + s[k] * ranges[k][0]).max(x[k] + s[k] * ranges[k][1]));
                self.outside(x, lo, hi, out)?;
            }
            ranges[d] = [0.0, m];
        }
        Ok(())
    }

    /// Adaptive tensor Gauss over a box the target does not lie inside.
    fn outside(&self, x: &Point, lo: Point, hi: Point, out: &mut [f64]) -> Result<()> {
        let mut stack = vec![(lo, hi)];
        let mut boxes = 0usize;
        while let Some((lo, hi)) = stack.pop() {
            boxes += 1;
            if boxes > MAX_BOXES {
                return Err(ArenaError::Setup(format!("near-field quadrature did not converge for target {x:?}")));
            }
            let half: [f64; 3] = std::array::from_fn(|d| 0.5 * (hi[d] - lo[d]));
            let hmax = half[0].max(half[1]).max(half[2]);
            let dist = (0..3)
                .map(|d| (lo[d] - x[d]).max(x[d] - hi[d]).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt();
            if dist >= self.eta * hmax {
                let orders: [usize; 3] = std::array::from_fn(|d| {
                    if half[d] == 0.0 {
                        1
                    } else {
                        self.order_for(dist / half[d])
                    }
                });
                self.gauss_box(x, &lo, &hi, orders, out);
                continue;
            }
            let split: Vec<usize> = (0..3).filter(|&d| half[d] >= 0.5 * hmax).collect();
            for c in 0..(1usize << split.len()) {
                let mut nlo = lo;
                let mut nhi = hi;
                for (b, &d) in split.iter().enumerate() {
                    let mid = 0.5 * (lo[d] + hi[d]);
                    if c >> b & 1 == 1 {
                        nlo[d] = mid;
                    } else {
                        nhi[d] = mid;
                    }
                }
                stack.push((nlo, nhi));
            }
        }
        Ok(())
    }

    fn gauss_box(&self, x: &Point, lo: &Point, hi: &Point, orders: [usize; 3], out: &mut [f64]) {
        let q = self.q;
        let axis_nodes: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..3)
            .map(|d| {
                let (n, w) = &self.rules[orders[d]];
                let len = hi[d] - lo[d];
                let pts: Vec<f64> = n.iter().map(|t| lo[d] + len * t).collect();
                let wts: Vec<f64> = w.iter().map(|v| v * len).collect();
                let mut basis = vec![0.0; pts.len() * q];
                for (a, p) in pts.iter().enumerate() {
                    chebyshev_t(q, *p, &mut basis[a * q..(a + 1) * q]);
                }
                (pts, wts, basis)
            })
            .collect();
        let (na, nb, nc) = (orders[0], orders[1], orders[2]);
        let (xa, wa, ta) = &axis_nodes[0];
        let (yb, wb, tb) = &axis_nodes[1];
        let (zc, wc, tc) = &axis_nodes[2];

        // contract z: g[a][b][k]
        let mut g = vec![0.0; na * nb * q];
        let mut kern = vec![0.0; nc];
        for a in 0..na {
            let dx = x[0] - xa[a];
            for b in 0..nb {
                let dy = x[1] - yb[b];
                let wab = wa[a] * wb[b] / (4.0 * PI);
                for c in 0..nc {
                    let dz = x[2] - zc[c];
                    kern[c] = wab * wc[c] / (dx * dx + dy * dy + dz * dz).sqrt();
                }
                let row = &mut g[(a * nb + b) * q..(a * nb + b + 1) * q];
                for c in 0..nc {
                    let kv = kern[c];
                    for (r, t) in row.iter_mut().zip(&tc[c * q..(c + 1) * q]) {
                        *r += kv * t;
                    }
                }
            }
        }
        // contract y: h[a][j][k] for j + k < q
        let mut h = vec![0.0; na * q * q];
        for a in 0..na {
            for b in 0..nb {
                let src = &g[(a * nb + b) * q..(a * nb + b + 1) * q];
                for j in 0..q {
                    let tj = tb[b * q + j];
                    let dst = &mut h[(a * q + j) * q..(a * q + j) * q + (q - j)];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += tj * s;
                    }
                }
            }
        }
        // contract x into storage order
        for a in 0..na {
            let mut pos = 0;
            for i in 0..q {
                let ti = ta[a * q + i];
                for j in 0..q - i {
                    let len = q - i - j;
                    let src = &h[(a * q + j) * q..(a * q + j) * q + len];
                    for (o, s) in out[pos..pos + len].iter_mut().zip(src) {
                        *o += ti * s;
                    }
                    pos += len;
                }
            }
        }
    }
}

#[inline]
fn accumulate_point(q: usize, w: f64, tx: &[f64], ty: &[f64], tz: &[f64], out: &mut [f64]) {
    let mut pos = 0;
    for i in 0..q {
        let wi = w * tx[i];
        for j in 0..q - i {
            let wij = wi * ty[j];
            let len = q - i - j;
            for (o, t) in out[pos..pos + len].iter_mut().zip(tz) {
                *o += wij * t;
            }
            pos += len;
        }
    }
}
