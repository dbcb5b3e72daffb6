//! Gauss-Legendre nodes by Newton iteration from Tricomi's initial guesses.

use std::f64::consts::PI;

pub fn rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 1..=n {
        let th = PI * (4.0 * i as f64 - 1.0) / (4.0 * n as f64 + 2.0);
        let nf = n as f64;
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * th.cos();
        let mut dp = 0.0;
        for _ in 0..50 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// Composite rule on `[a, b]` with geometric panels accumulating toward `a`:
/// breakpoints `a + (b-a) r^k` down to a panel of width at most `finest`.
pub fn graded(a: f64, b: f64, finest: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = rule(n);
    let mut breaks = vec![1.0];
    let len = b - a;
    let mut f = 1.0;
    while f * len.abs() > finest && breaks.len() < 60 {
        f *= 0.3;
        breaks.push(f);
    }
    breaks.push(0.0);
    let mut x = Vec::new();
    let mut w = Vec::new();
    for p in breaks.windows(2) {
        let (hi, lo) = (a + len * p[0], a + len * p[1]);
        for (t, wt) in gx.iter().zip(&gw) {
            x.push(lo + 0.5 * (hi - lo) * (t + 1.0));
            w.push(0.5 * (hi - lo) * wt);
        }
    }
    (x, w)
}
