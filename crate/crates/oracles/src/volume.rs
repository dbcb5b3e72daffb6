//! Newton potentials of piecewise-polynomial densities by brute force.

use crate::cheb_t;
use crate::cone::{tensor_gauss, ConeRule};

const MAX_Q: usize = 24;

/// A box `[lo, hi]` carrying `Σ α_ijk T_i T_j T_k` in box-local coordinates.
pub struct ChebBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub q: usize,
    /// `((i, j, k), α)` pairs.
    pub terms: Vec<([usize; 3], f64)>,
}

impl ChebBox {
    pub fn value(&self, y: &[f64; 3]) -> f64 {
        assert!(self.q <= MAX_Q);
        let mut t = [[0.0; 3]; MAX_Q];
        for d in 0..3 {
            let xi = 2.0 * (y[d] - self.lo[d]) / (self.hi[d] - self.lo[d]) - 1.0;
            // T_n(cos θ) = cos nθ inside the box
            let theta = xi.clamp(-1.0, 1.0).acos();
            for (n, row) in t.iter_mut().enumerate().take(self.q) {
                row[d] = if xi.abs() <= 1.0 { (n as f64 * theta).cos() } else { cheb_t(n, xi) };
            }
        }
        self.terms.iter().map(|([i, j, k], a)| a * t[*i][0] * t[*j][1] * t[*k][2]).sum()
    }

    /// `∫_box ρ(y) / (4π|x - y|) dy`.
    pub fn potential(&self, x: &[f64; 3]) -> f64 {
        self.potential_with(x, &Rules::default())
    }

    pub fn potential_with(&self, x: &[f64; 3], rules: &Rules) -> f64 {
        let mut g = |y: &[f64; 3], buf: &mut [f64]| buf[0] = self.value(y);
        let inside = (0..3).all(|d| x[d] >= self.lo[d] && x[d] <= self.hi[d]);
        let mut out = [0.0];
        if inside {
            rules.cone.integrate(x, &self.lo, &self.hi, &mut g, &mut out);
        } else {
            subdivide(x, self.lo, self.hi, rules, &mut g, &mut out);
        }
        out[0]
    }
}

/// Quadrature settings: the cone rule for targets inside the box, and
/// `n`-point tensor Gauss on sub-boxes at least `ratio` sizes away otherwise.
pub struct Rules {
    pub cone: ConeRule,
    pub n: usize,
    pub ratio: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Rules { cone: ConeRule { n_t: 10, n_face: 10 }, n: 12, ratio: 0.7 }
    }
}

fn subdivide(x: &[f64; 3], lo: [f64; 3], hi: [f64; 3], rules: &Rules, g: &mut dyn FnMut(&[f64; 3], &mut [f64]), out: &mut [f64]) {
    let size = (0..3).map(|d| hi[d] - lo[d]).fold(0.0, f64::max);
    let dist = (0..3)
        .map(|d| (lo[d] - x[d]).max(x[d] - hi[d]).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    if dist >= rules.ratio * size || size < 1e-9 {
        tensor_gauss(rules.n, x, &lo, &hi, g, out);
        return;
    }
    for c in 0..8 {
        let mut a = lo;
        let mut b = hi;
        for d in 0..3 {
            let mid = 0.5 * (lo[d] + hi[d]);
            if c >> d & 1 == 1 {
                a[d] = mid;
            } else {
                b[d] = mid;
            }
        }
        subdivide(x, a, b, rules, g, out);
    }
}
