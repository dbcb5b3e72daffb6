//! Slow, independent reference computations for the test suites.
//!
//! Nothing here shares code with `arena-core`: the point is to check the
//! production paths against different algorithms.

pub mod cone;
pub mod dft;
pub mod fem;
pub mod geometry;
pub mod volume;
pub mod gauss;

/// Chebyshev polynomial through the trigonometric form, hyperbolic outside
/// `[-1, 1]`.
pub fn cheb_t(n: usize, x: f64) -> f64 {
    let nf = n as f64;
    if x > 1.0 {
        (nf * x.acosh()).cosh()
    } else if x < -1.0 {
        let v = (nf * (-x).acosh()).cosh();
        if n % 2 == 1 {
            -v
        } else {
            v
        }
    } else {
        (nf * x.acos()).cos()
    }
}

/// Second-order central-difference Laplacian of `u` at `x`.
pub fn fd_laplacian(u: &dyn Fn(&[f64; 3]) -> f64, x: &[f64; 3], h: f64) -> f64 {
    let c = u(x);
    let mut s = 0.0;
    for d in 0..3 {
        let mut p = *x;
        let mut m = *x;
        p[d] += h;
        m[d] -= h;
        s += u(&p) - 2.0 * c + u(&m);
    }
    s / (h * h)
}

/// SplitMix64, enough randomness for test data without a dependency.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
