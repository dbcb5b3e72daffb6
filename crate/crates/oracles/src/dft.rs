//! O(N²) discrete Fourier transform on an `n³` grid.

use std::f64::consts::PI;

/// `ĝ_k = Σ_x g(x) e^{-2πi k·x/n}` with both indices in storage order
/// `(i*n + j)*n + k`; returns `(re, im)` pairs.
pub fn direct_dft3(n: usize, data: &[f64]) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n * n * n];
    for (kidx, o) in out.iter_mut().enumerate() {
        let k = [kidx / (n * n), kidx / n % n, kidx % n];
        for (xidx, v) in data.iter().enumerate() {
            let x = [xidx / (n * n), xidx / n % n, xidx % n];
            let phase = -2.0 * PI * ((k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) % n) as f64 / n as f64;
            o.0 += v * phase.cos();
            o.1 += v * phase.sin();
        }
    }
    out
}
