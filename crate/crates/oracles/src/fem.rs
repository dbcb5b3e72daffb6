//! Dense assembly of the periodic Q_q stiffness matrix by explicit 3D
//! quadrature of basis gradients, plus the dense interpolation matrix
//! between two nested meshes.

use std::f64::consts::PI;

use crate::gauss;

/// Legendre-Gauss-Lobatto nodes on `[-1, 1]`: the endpoints plus the
/// extrema of `P_q`, found by Newton on `P_q'` with a bisection guard.
pub fn lgl_nodes(q: usize) -> Vec<f64> {
    let dp = |x: f64| -> f64 {
        // P_q'(x) via the derivative recurrence P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let mut p = vec![1.0, x];
        for k in 1..q {
            let next = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
            p.push(next);
        }
        let mut d = vec![0.0; q + 2];
        for k in 1..=q {
            d[k] = if k >= 2 { d[k - 2] } else { 0.0 } + (2 * k - 1) as f64 * p[k - 1];
        }
        d[q]
    };
    let mut out = vec![-1.0];
    for i in 1..q {
        // bracket between consecutive Chebyshev-Lobatto-like guesses
        let mut a = -(PI * (i as f64 - 0.5) / q as f64).cos();
        let mut b = -(PI * (i as f64 + 0.5) / q as f64).cos();
        let (mut fa, _) = (dp(a), dp(b));
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = dp(m);
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out.push(1.0);
    out
}

fn lagrange(nodes: &[f64], i: usize, x: f64) -> f64 {
    nodes.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, xj)| (x - xj) / (nodes[i] - xj)).product()
}

fn lagrange_deriv(nodes: &[f64], i: usize, x: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..nodes.len() {
        if k == i {
            continue;
        }
        let mut term = 1.0 / (nodes[i] - nodes[k]);
        for j in 0..nodes.len() {
            if j != i && j != k {
                term *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        s += term;
    }
    s
}

/// Dense `N × N` stiffness matrix (row-major) of `-Δ` on the periodic unit
/// cube with `e³` elements of order `q`; node `(I, J, K)` maps to
/// `(I*n + J)*n + K`, `n = e q`, with `I` along x.
pub fn assemble_stiffness(e: usize, q: usize) -> Vec<f64> {
    let n = e * q;
    let big_n = n * n * n;
    let nodes = lgl_nodes(q);
    let (gx, gw) = gauss::rule(q + 2);
    let h = 1.0 / e as f64;
    let nl = (q + 1).pow(3);
    // element matrix on the reference cube, then scaled: grad scales 2/h, volume (h/2)^3
    let mut ke = vec![0.0; nl * nl];
    for (a, wa) in gx.iter().zip(&gw) {
        for (b, wb) in gx.iter().zip(&gw) {
            for (c, wc) in gx.iter().zip(&gw) {
                let grads: Vec<[f64; 3]> = (0..nl)
                    .map(|l| {
                        let (i, j, k) = (l / ((q + 1) * (q + 1)), l / (q + 1) % (q + 1), l % (q + 1));
                        let (li, lj, lk) = (lagrange(&nodes, i, *a), lagrange(&nodes, j, *b), lagrange(&nodes, k, *c));
                        [
                            lagrange_deriv(&nodes, i, *a) * lj * lk,
                            li * lagrange_deriv(&nodes, j, *b) * lk,
                            li * lj * lagrange_deriv(&nodes, k, *c),
                        ]
                    })
                    .collect();
                let w = wa * wb * wc;
                for r in 0..nl {
                    for s in 0..nl {
                        let g = grads[r][0] * grads[s][0] + grads[r][1] * grads[s][1] + grads[r][2] * grads[s][2];
                        ke[r * nl + s] += w * g;
                    }
                }
            }
        }
    }
    let scale = (2.0 / h) * (2.0 / h) * (h / 2.0).powi(3);
    let mut a = vec![0.0; big_n * big_n];
    for ex in 0..e {
        for ey in 0..e {
            for ez in 0..e {
                let glob: Vec<usize> = (0..nl)
                    .map(|l| {
                        let (i, j, k) = (l / ((q + 1) * (q + 1)), l / (q + 1) % (q + 1), l % (q + 1));
                        let (gi, gj, gk) = ((ex * q + i) % n, (ey * q + j) % n, (ez * q + k) % n);
                        (gi * n + gj) * n + gk
                    })
                    .collect();
                for r in 0..nl {
                    for s in 0..nl {
                        a[glob[r] * big_n + glob[s]] += scale * ke[r * nl + s];
                    }
                }
            }
        }
    }
    a
}

/// 1D coordinate in `[0, 1)` of global node index `g` on a mesh of `e`
/// elements of order `q`.
pub fn node_coordinate(g: usize, e: usize, q: usize) -> f64 {
    let nodes = lgl_nodes(q);
    let (el, loc) = (g / q, g % q);
    (el as f64 + 0.5 * (nodes[loc] + 1.0)) / e as f64
}

/// Dense `P[i][j] = φ_j^{coarse}(p_i)` (row-major, fine rows) between the
/// periodic meshes with `e` and `2e` elements, evaluated geometrically.
pub fn prolongation_dense(e_coarse: usize, q: usize) -> Vec<f64> {
    let nodes = lgl_nodes(q);
    let nc = e_coarse * q;
    let nf = 2 * nc;
    let coarse_1d = |j: usize, x: f64| -> f64 {
        // the coarse 1D hat-like basis function of global index j at x,
        // looking in every element that contains node j
        let hc = 1.0 / e_coarse as f64;
        let el = (x / hc).floor().min(e_coarse as f64 - 1.0) as usize;
        let xi = 2.0 * (x / hc - el as f64) - 1.0;
        let mut v = 0.0;
        for loc in 0..=q {
            if (el * q + loc) % nc == j {
                v += lagrange(&nodes, loc, xi);
            }
        }
        v
    };
    let mut p = vec![0.0; nf.pow(3) * nc.pow(3)];
    let fine_x: Vec<f64> = (0..nf).map(|g| node_coordinate(g, 2 * e_coarse, q)).collect();
    let table: Vec<Vec<f64>> = fine_x.iter().map(|&x| (0..nc).map(|j| coarse_1d(j, x)).collect()).collect();
    for fi in 0..nf.pow(3) {
        let (a, b, c) = (fi / (nf * nf), fi / nf % nf, fi % nf);
        for cj in 0..nc.pow(3) {
            let (x, y, z) = (cj / (nc * nc), cj / nc % nc, cj % nc);
            p[fi * nc.pow(3) + cj] = table[a][x] * table[b][y] * table[c][z];
        }
    }
    p
}
