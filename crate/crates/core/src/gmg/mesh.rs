//! Periodic meshes of `e³` order-`q` hexahedral elements with LGL nodal bases.

use crate::error::{invalid, Result};
use crate::quadrature::{gauss_legendre, gauss_lobatto};
use crate::Point;

/// Values at the `(e q)³` owned nodes of one mesh, `(I*n + J)*n + K` with `I`
/// along x.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    e: usize,
    q: usize,
    data: Vec<f64>,
}

impl NodalField {
    pub fn zeros(level: &MeshLevel) -> Self {
        NodalField { e: level.e, q: level.q, data: vec![0.0; level.len()] }
    }

    pub fn new(level: &MeshLevel, data: Vec<f64>) -> Result<Self> {
        if data.len() != level.len() {
            return invalid(format!("field of length {} on a mesh with {} nodes", data.len(), level.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("nodal field has non-finite values");
        }
        Ok(NodalField { e: level.e, q: level.q, data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// `(e, q)` of the mesh this field lives on.
    pub fn tag(&self) -> (usize, usize) {
        (self.e, self.q)
    }

    pub fn dot(&self, other: &NodalField) -> f64 {
        dot(&self.data, &other.data)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lagrange(nodes: &[f64], i: usize, x: f64) -> f64 {
    let mut v = 1.0;
    for (j, xj) in nodes.iter().enumerate() {
        if j != i {
            v *= (x - xj) / (nodes[i] - xj);
        }
    }
    v
}

fn lagrange_deriv(nodes: &[f64], i: usize, x: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..nodes.len() {
        if k == i {
            continue;
        }
        let mut t = 1.0 / (nodes[i] - nodes[k]);
        for j in 0..nodes.len() {
            if j != i && j != k {
                t *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        s += t;
    }
    s
}

/// One uniform periodic mesh. Element side `h = 1/e`.
#[derive(Clone, Debug)]
pub struct MeshLevel {
    pub e: usize,
    pub q: usize,
    /// Nodes per axis, `e q`.
    pub n: usize,
    pub h: f64,
    /// LGL nodes on `[-1, 1]`.
    nodes: Vec<f64>,
    /// 1D element stiffness and mass on the physical interval, row-major `(q+1)²`.
    k1: Vec<f64>,
    m1: Vec<f64>,
}

impl MeshLevel {
    pub fn new(e: usize, q: usize) -> Result<Self> {
        if e == 0 || !e.is_power_of_two() {
            return invalid(format!("elements per axis must be a power of two, got {e}"));
        }
        if !(1..=16).contains(&q) {
            return invalid(format!("element order must lie in 1..=16, got {q}"));
        }
        let h = 1.0 / e as f64;
        let (nodes, _) = gauss_lobatto(q);
        // q+1 Gauss points integrate products of degree-q polynomials exactly
        let (gx, gw) = gauss_legendre(q + 1);
        let p = q + 1;
        let mut k1 = vec![0.0; p * p];
        let mut m1 = vec![0.0; p * p];
        for (x, w) in gx.iter().zip(&gw) {
            let l: Vec<f64> = (0..p).map(|a| lagrange(&nodes, a, *x)).collect();
            let d: Vec<f64> = (0..p).map(|a| lagrange_deriv(&nodes, a, *x)).collect();
            for a in 0..p {
                for b in 0..p {
                    k1[a * p + b] += w * d[a] * d[b] * 2.0 / h;
                    m1[a * p + b] += w * l[a] * l[b] * h / 2.0;
                }
            }
        }
        Ok(MeshLevel { e, q, n: e * q, h, nodes, k1, m1 })
    }

    /// Unknown count `(e q)³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lgl_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Coordinate in `[0, 1)` of global 1D node `g`.
    pub fn coordinate(&self, g: usize) -> f64 {
        let (el, loc) = (g / self.q, g % self.q);
        (el as f64 + 0.5 * (self.nodes[loc] + 1.0)) * self.h
    }

    pub fn node_point(&self, idx: usize) -> Point {
        let n = self.n;
        [self.coordinate(idx / (n * n)), self.coordinate(idx / n % n), self.coordinate(idx % n)]
    }

    pub fn node_points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.node_point(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(&Point) -> f64) -> Result<NodalField> {
        NodalField::new(self, (0..self.len()).map(|i| f(&self.node_point(i))).collect())
    }

    fn check(&self, u: &NodalField) -> Result<()> {
        if u.tag() != (self.e, self.q) {
            return invalid(format!(
                "field from mesh (e={}, q={}) used on mesh (e={}, q={})",
                u.e, u.q, self.e, self.q
            ));
        }
        Ok(())
    }

    /// Global indices of the `(q+1)` nodes of element `el` along one axis.
    fn axis_dofs(&self, el: usize) -> Vec<usize> {
        (0..=self.q).map(|a| (el * self.q + a) % self.n).collect()
    }

    /// `A u` for the periodic stiffness matrix of `-Δ`.
    pub fn apply_operator(&self, u: &NodalField) -> Result<NodalField> {
        self.check(u)?;
        let mut out = NodalField::zeros(self);
        self.apply_raw(&u.data, &mut out.data);
        Ok(out)
    }

    /// Element loop with sum factorization:
    /// `A_e = K⊗M⊗M + M⊗K⊗M + M⊗M⊗K`, seven 1D contractions per element.
    pub(crate) fn apply_raw(&self, u: &[f64], out: &mut [f64]) {
        let (n, p) = (self.n, self.q + 1);
        let p3 = p * p * p;
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut ue = vec![0.0; p3];
        let mut bufs = vec![vec![0.0; p3]; 6];
        let dofs: Vec<Vec<usize>> = (0..self.e).map(|el| self.axis_dofs(el)).collect();
        for ex in 0..self.e {
            for ey in 0..self.e {
                for ez in 0..self.e {
                    let (dx, dy, dz) = (&dofs[ex], &dofs[ey], &dofs[ez]);
                    for i in 0..p {
                        for j in 0..p {
                            let row = (dx[i] * n + dy[j]) * n;
                            for k in 0..p {
                                ue[(i * p + j) * p + k] = u[row + dz[k]];
                            }
                        }
                    }
                    let [mk, kk, mmk, kmk, mkk, y] = &mut bufs[..] else { unreachable!() };
                    contract(&self.m1, &ue, mk, p, 2);
                    contract(&self.k1, &ue, kk, p, 2);
                    contract(&self.m1, mk, mmk, p, 1);
                    contract(&self.k1, mk, kmk, p, 1);
                    contract(&self.m1, kk, mkk, p, 1);
                    for (a, b) in kmk.iter_mut().zip(mkk.iter()) {
                        *a += b;
                    }
                    contract(&self.k1, mmk, y, p, 0);
                    contract(&self.m1, kmk, mk, p, 0);
                    for i in 0..p {
                        for j in 0..p {
                            let row = (dx[i] * n + dy[j]) * n;
                            for k in 0..p {
                                let l = (i * p + j) * p + k;
                                out[row + dz[k]] += y[l] + mk[l];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Operator diagonal, accumulated over elements.
    pub fn diagonal(&self) -> NodalField {
        let (n, p) = (self.n, self.q + 1);
        let mut d = NodalField::zeros(self);
        // 1D diagonals folded over local nodes sharing a global node (only
        // the two end nodes when e = 1)
        let mut kd = vec![0.0; p];
        let mut md = vec![0.0; p];
        let mut owner: Vec<usize> = (0..p).collect();
        if self.e == 1 {
            owner[self.q] = 0;
        }
        for a in 0..p {
            for b in 0..p {
                if owner[a] == owner[b] {
                    kd[owner[a]] += self.k1[a * p + b];
                    md[owner[a]] += self.m1[a * p + b];
                }
            }
        }
        let locals: Vec<usize> = (0..p).filter(|&a| owner[a] == a).collect();
        for ex in 0..self.e {
            for ey in 0..self.e {
                for ez in 0..self.e {
                    let (dx, dy, dz) = (self.axis_dofs(ex), self.axis_dofs(ey), self.axis_dofs(ez));
                    for &i in &locals {
                        for &j in &locals {
                            for &k in &locals {
                                let v = kd[i] * md[j] * md[k] + md[i] * kd[j] * md[k] + md[i] * md[j] * kd[k];
                                d.data[(dx[i] * n + dy[j]) * n + dz[k]] += v;
                            }
                        }
                    }
                }
            }
        }
        d
    }

    /// Load vector `b_i = ∫ f φ_i` with `q+2` Gauss points per axis and element.
    pub fn load_vector(&self, f: impl Fn(&Point) -> f64) -> Result<NodalField> {
        let (n, p) = (self.n, self.q + 1);
        let (gx, gw) = gauss_legendre(self.q + 2);
        let g = gx.len();
        // basis values at the Gauss points, scaled by weight and Jacobian
        let bw: Vec<f64> = (0..p)
            .flat_map(|a| {
                let nodes = &self.nodes;
                gx.iter().zip(&gw).map(move |(x, w)| lagrange(nodes, a, *x) * w * 0.5)
            })
            .collect();
        let h = self.h;
        let mut b = vec![0.0; self.len()];
        let mut fv = vec![0.0; g * g * g];
        let (mut t1, mut t2) = (vec![0.0; p * g * g], vec![0.0; p * p * g]);
        for ex in 0..self.e {
            for ey in 0..self.e {
                for ez in 0..self.e {
                    for (i, xi) in gx.iter().enumerate() {
                        for (j, xj) in gx.iter().enumerate() {
                            for (k, xk) in gx.iter().enumerate() {
                                let pt = [
                                    (ex as f64 + 0.5 * (xi + 1.0)) * h,
                                    (ey as f64 + 0.5 * (xj + 1.0)) * h,
                                    (ez as f64 + 0.5 * (xk + 1.0)) * h,
                                ];
                                fv[(i * g + j) * g + k] = f(&pt);
                            }
                        }
                    }
                    // reduce Gauss axes one at a time: x, then y, then z
                    t1.iter_mut().for_each(|v| *v = 0.0);
                    for a in 0..p {
                        for i in 0..g {
                            let w = bw[a * g + i];
                            for jk in 0..g * g {
                                t1[a * g * g + jk] += w * fv[i * g * g + jk];
                            }
                        }
                    }
                    t2.iter_mut().for_each(|v| *v = 0.0);
                    for a in 0..p {
                        for c in 0..p {
                            for j in 0..g {
                                let w = bw[c * g + j];
                                for k in 0..g {
                                    t2[(a * p + c) * g + k] += w * t1[(a * g + j) * g + k];
                                }
                            }
                        }
                    }
                    let (dx, dy, dz) = (self.axis_dofs(ex), self.axis_dofs(ey), self.axis_dofs(ez));
                    for a in 0..p {
                        for c in 0..p {
                            for d in 0..p {
                                let v: f64 = (0..g).map(|k| bw[d * g + k] * t2[(a * p + c) * g + k]).sum();
                                b[(dx[a] * n + dy[c]) * n + dz[d]] += v * h * h * h;
                            }
                        }
                    }
                }
            }
        }
        NodalField::new(self, b)
    }

    /// Integrals `∫ φ_i` of the basis functions; they sum to 1.
    pub fn basis_integrals(&self) -> NodalField {
        self.load_vector(|_| 1.0).expect("constant load is finite")
    }

    /// Evaluates the finite-element function with nodal values `u` at `x`
    /// (coordinates wrapped into `[0, 1)`).
    pub fn eval(&self, u: &NodalField, x: &Point) -> Result<f64> {
        self.check(u)?;
        if x.iter().any(|c| !c.is_finite()) {
            return invalid(format!("cannot evaluate at {x:?}"));
        }
        let mut idx = [[0usize; 17]; 3];
        let mut val = [[0.0f64; 17]; 3];
        for d in 0..3 {
            let t = x[d].rem_euclid(1.0) * self.e as f64;
            let el = (t.floor() as usize).min(self.e - 1);
            let xi = 2.0 * (t - el as f64) - 1.0;
            for a in 0..=self.q {
                idx[d][a] = (el * self.q + a) % self.n;
                val[d][a] = lagrange(&self.nodes, a, xi);
            }
        }
        let n = self.n;
        let mut s = 0.0;
        for i in 0..=self.q {
            for j in 0..=self.q {
                for k in 0..=self.q {
                    s += val[0][i] * val[1][j] * val[2][k] * u.data[(idx[0][i] * n + idx[1][j]) * n + idx[2][k]];
                }
            }
        }
        Ok(s)
    }
}

/// `out = (I ⊗ ... ⊗ B ⊗ ... ⊗ I) u` on a `p³` tensor, `B` applied along
/// `axis` (0 = x, slowest).
fn contract(b: &[f64], u: &[f64], out: &mut [f64], p: usize, axis: usize) {
    let stride = [p * p, p, 1][axis];
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for base in 0..p * p * p {
        // base enumerates indices with the contracted coordinate zero
        if (base / stride) % p != 0 {
            continue;
        }
        for a in 0..p {
            let mut s = 0.0;
            for c in 0..p {
                s += b[a * p + c] * u[base + c * stride];
            }
            out[base + a * stride] = s;
        }
    }
}

/// 1D interpolation from a mesh of `e` elements to one of `2e`: for every
/// fine node, the coarse element containing it and the `q+1` coarse basis
/// values there.
#[derive(Clone, Debug)]
struct Transfer1d {
    rows: Vec<(usize, Vec<f64>)>,
}

impl Transfer1d {
    fn new(coarse: &MeshLevel) -> Self {
        let q = coarse.q;
        let nf = 2 * coarse.n;
        let nodes = &coarse.nodes;
        let rows = (0..nf)
            .map(|g| {
                let (fel, loc) = (g / q, g % q);
                let (cel, half) = (fel / 2, fel % 2);
                // child half `s` covers [-1, 0] or [0, 1] of the coarse element
                let xi = (nodes[loc] + if half == 0 { -1.0 } else { 1.0 }) / 2.0;
                (cel, (0..=q).map(|b| lagrange(nodes, b, xi)).collect())
            })
            .collect();
        Transfer1d { rows }
    }
}

/// Prolongation `P(i, j) = φ_j^coarse(p_i)` and restriction `Pᵀ` between two
/// adjacent meshes, applied one axis at a time.
#[derive(Clone, Debug)]
pub struct Transfer {
    q: usize,
    nc: usize,
    t: Transfer1d,
}

impl Transfer {
    pub fn new(coarse: &MeshLevel, fine: &MeshLevel) -> Result<Self> {
        if fine.q != coarse.q || fine.e != 2 * coarse.e {
            return invalid(format!(
                "meshes (e={}, q={}) and (e={}, q={}) are not adjacent levels",
                coarse.e, coarse.q, fine.e, fine.q
            ));
        }
        Ok(Transfer { q: coarse.q, nc: coarse.n, t: Transfer1d::new(coarse) })
    }

    fn col(&self, cel: usize, b: usize) -> usize {
        (cel * self.q + b) % self.nc
    }

    /// `shape` is (a, b, c) of the input; `axis` is expanded from `nc` to `2 nc`.
    fn prolong_axis(&self, u: &[f64], shape: [usize; 3], axis: usize) -> (Vec<f64>, [usize; 3]) {
        let mut os = shape;
        os[axis] = 2 * self.nc;
        let mut out = vec![0.0; os[0] * os[1] * os[2]];
        let ist = [shape[1] * shape[2], shape[2], 1];
        let ost = [os[1] * os[2], os[2], 1];
        for i in 0..os[0] {
            for j in 0..os[1] {
                for k in 0..os[2] {
                    let o = [i, j, k];
                    let (cel, w) = &self.t.rows[o[axis]];
                    let mut s = 0.0;
                    for (b, wb) in w.iter().enumerate() {
                        let mut src = o;
                        src[axis] = self.col(*cel, b);
                        s += wb * u[src[0] * ist[0] + src[1] * ist[1] + src[2] * ist[2]];
                    }
                    out[i * ost[0] + j * ost[1] + k * ost[2]] = s;
                }
            }
        }
        (out, os)
    }

    fn restrict_axis(&self, u: &[f64], shape: [usize; 3], axis: usize) -> (Vec<f64>, [usize; 3]) {
        let mut os = shape;
        os[axis] = self.nc;
        let mut out = vec![0.0; os[0] * os[1] * os[2]];
        let ist = [shape[1] * shape[2], shape[2], 1];
        let ost = [os[1] * os[2], os[2], 1];
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    let src = [i, j, k];
                    let v = u[i * ist[0] + j * ist[1] + k * ist[2]];
                    let (cel, w) = &self.t.rows[src[axis]];
                    for (b, wb) in w.iter().enumerate() {
                        let mut o = src;
                        o[axis] = self.col(*cel, b);
                        out[o[0] * ost[0] + o[1] * ost[1] + o[2] * ost[2]] += wb * v;
                    }
                }
            }
        }
        (out, os)
    }

    pub(crate) fn prolong_raw(&self, u: &[f64]) -> Vec<f64> {
        let nc = self.nc;
        let (a, s) = self.prolong_axis(u, [nc; 3], 0);
        let (b, s) = self.prolong_axis(&a, s, 1);
        self.prolong_axis(&b, s, 2).0
    }

    pub(crate) fn restrict_raw(&self, u: &[f64]) -> Vec<f64> {
        let nf = 2 * self.nc;
        let (a, s) = self.restrict_axis(u, [nf; 3], 0);
        let (b, s) = self.restrict_axis(&a, s, 1);
        self.restrict_axis(&b, s, 2).0
    }
}

/// Interpolates a coarse field to the next finer mesh.
pub fn prolong(coarse: &MeshLevel, fine: &MeshLevel, u: &NodalField) -> Result<NodalField> {
    coarse.check(u)?;
    let t = Transfer::new(coarse, fine)?;
    NodalField::new(fine, t.prolong_raw(&u.data))
}

/// Transpose of [`prolong`].
pub fn restrict(fine: &MeshLevel, coarse: &MeshLevel, u: &NodalField) -> Result<NodalField> {
    fine.check(u)?;
    let t = Transfer::new(coarse, fine)?;
    NodalField::new(coarse, t.restrict_raw(&u.data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_matrices() {
        // q=1 on [0, h]: K = [1 -1; -1 1]/h, M = h [2 1; 1 2]/6
        let m = MeshLevel::new(4, 1).unwrap();
        let h = 0.25;
        let k = [1.0 / h, -1.0 / h, -1.0 / h, 1.0 / h];
        let mm = [h / 3.0, h / 6.0, h / 6.0, h / 3.0];
        for i in 0..4 {
            assert!((m.k1[i] - k[i]).abs() < 1e-13);
            assert!((m.m1[i] - mm[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn contraction_axes() {
        let p = 2;
        let b = [1.0, 2.0, 3.0, 4.0];
        let u: Vec<f64> = (0..8).map(|v| v as f64).collect();
        let mut out = vec![0.0; 8];
        contract(&b, &u, &mut out, p, 2);
        // along z: pairs (0,1) -> (2, 4)
        assert_eq!(&out[..2], &[1.0 * 0.0 + 2.0 * 1.0, 3.0 * 0.0 + 4.0 * 1.0]);
        contract(&b, &u, &mut out, p, 0);
        // along x: entries 0 and 4
        assert_eq!(out[0], 0.0 + 2.0 * 4.0);
        assert_eq!(out[4], 0.0 + 4.0 * 4.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(MeshLevel::new(3, 2).is_err());
        assert!(MeshLevel::new(4, 0).is_err());
        let (a, b) = (MeshLevel::new(2, 2).unwrap(), MeshLevel::new(8, 2).unwrap());
        assert!(Transfer::new(&a, &b).is_err());
        let u = NodalField::zeros(&a);
        assert!(b.apply_operator(&u).is_err());
    }

    #[test]
    fn basis_integrals_sum_to_one() {
        let m = MeshLevel::new(2, 3).unwrap();
        let w = m.basis_integrals();
        assert!((w.data().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.data().iter().all(|v| *v > 0.0));
    }
}
