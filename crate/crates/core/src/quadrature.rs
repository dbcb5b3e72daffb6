//! One-dimensional node sets: Gauss-Legendre, Legendre-Gauss-Lobatto and
//! Chebyshev-Gauss, all on the reference interval `[-1, 1]`.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P'_n(±1) = (±1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Legendre-Gauss-Lobatto nodes and weights for polynomial order `q`
/// (`q + 1` points including both endpoints), nodes ascending.
pub fn gauss_lobatto(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "LGL needs order at least 1");
    let n = q + 1;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    x[0] = -1.0;
    x[q] = 1.0;
    let qf = q as f64;
    // interior nodes are the roots of P'_q
    for i in 1..q {
        let mut z = -(PI * i as f64 / qf).cos();
        for _ in 0..100 {
            // Newton on P'_q using (1-x^2) P''_q = 2x P'_q - q(q+1) P_q
            let (p, dp) = legendre(q, z);
            let ddp = (2.0 * z * dp - qf * (qf + 1.0) * p) / (1.0 - z * z);
            let dz = dp / ddp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
    }
    for i in 0..n {
        let (p, _) = legendre(q, x[i]);
        w[i] = 2.0 / (qf * (qf + 1.0) * p * p);
    }
    (x, w)
}

/// Chebyshev-Gauss (first kind roots) nodes `cos(π(m + 1/2)/q)`, descending
/// order in `m` as is conventional for the discrete cosine transform.
pub fn chebyshev_gauss_nodes(q: usize) -> Vec<f64> {
    (0..q)
        .map(|m| (PI * (m as f64 + 0.5) / q as f64).cos())
        .collect()
}

/// Chebyshev polynomials `T_0..T_{n-1}` at `x` by the three-term recurrence.
pub fn chebyshev_t(n: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= n);
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = x;
    for k in 2..n {
        out[k] = 2.0 * x * out[k - 1] - out[k - 2];
    }
}

/// A composite Gauss-Legendre rule on `[lo, hi]` with `panels` equal panels.
pub fn composite_gauss(lo: f64, hi: f64, panels: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let h = (hi - lo) / panels as f64;
    let mut x = Vec::with_capacity(panels * n);
    let mut w = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(a + 0.5 * h * (xi + 1.0));
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}
