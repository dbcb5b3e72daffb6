//! Truncated tensor Chebyshev approximation on octants.
//!
//! A leaf carries `α_ijk` for `i + j + k < q`, multiplying
//! `T_i(ξ₁) T_j(ξ₂) T_k(ξ₃)` in octant-local coordinates `ξ ∈ [-1, 1]³`.
//! Coefficients are ordered with `i` outermost and `k` innermost.

use std::fmt::Write as _;

use crate::error::{invalid, ArenaError, Result};
use crate::octree::MortonKey;
use crate::quadrature::{chebyshev_gauss_nodes, chebyshev_t};
use crate::Point;

pub fn n_coeffs(q: usize) -> usize {
    q * (q + 1) * (q + 2) / 6
}

/// `(i, j, k)` for every stored coefficient, in storage order.
pub fn coeff_indices(q: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(n_coeffs(q));
    for i in 0..q {
        for j in 0..q - i {
            for k in 0..q - i - j {
                out.push([i, j, k]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChebCoeffs {
    q: usize,
    coeffs: Vec<f64>,
    octant: MortonKey,
}

/// Maps a point of the octant to local coordinates in `[-1, 1]³`.
pub fn to_local(octant: &MortonKey, p: &Point) -> Point {
    let lo = octant.lower_corner();
    let h = octant.side();
    std::array::from_fn(|d| 2.0 * (p[d] - lo[d]) / h - 1.0)
}

pub fn to_global(octant: &MortonKey, xi: &Point) -> Point {
    let lo = octant.lower_corner();
    let h = octant.side();
    std::array::from_fn(|d| lo[d] + 0.5 * h * (xi[d] + 1.0))
}

/// The `q³` tensor Chebyshev-Gauss nodes of an octant, `x` index outermost.
pub fn tensor_nodes(octant: &MortonKey, q: usize) -> Vec<Point> {
    let t = chebyshev_gauss_nodes(q);
    let mut out = Vec::with_capacity(q * q * q);
    for a in &t {
        for b in &t {
            for c in &t {
                out.push(to_global(octant, &[*a, *b, *c]));
            }
        }
    }
    out
}

/// `M[n][m] = (2/q) T_n(ξ_m)`, row 0 halved: node values to 1D coefficients.
fn dct_matrix(q: usize) -> Vec<f64> {
    let nodes = chebyshev_gauss_nodes(q);
    let mut t = vec![0.0; q];
    let mut m = vec![0.0; q * q];
    for (mi, x) in nodes.iter().enumerate() {
        chebyshev_t(q, *x, &mut t);
        for n in 0..q {
            m[n * q + mi] = 2.0 / q as f64 * t[n] * if n == 0 { 0.5 } else { 1.0 };
        }
    }
    m
}

impl ChebCoeffs {
    pub fn new(q: usize, coeffs: Vec<f64>, octant: MortonKey) -> Result<Self> {
        if q == 0 {
            return invalid("Chebyshev order must be positive");
        }
        if coeffs.len() != n_coeffs(q) {
            return invalid(format!("order {q} needs {} coefficients, got {}", n_coeffs(q), coeffs.len()));
        }
        Ok(ChebCoeffs { q, coeffs, octant })
    }

    pub fn zeros(q: usize, octant: MortonKey) -> Self {
        ChebCoeffs { q, coeffs: vec![0.0; n_coeffs(q)], octant }
    }

    /// Interpolates values sampled at [`tensor_nodes`] and truncates.
    pub fn from_node_values(values: &[f64], octant: MortonKey, q: usize) -> Result<Self> {
        if values.len() != q * q * q {
            return invalid(format!("expected {} node values, got {}", q * q * q, values.len()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ArenaError::Approximation(format!("non-finite sample {v} on {octant:?}")));
        }
        let m = dct_matrix(q);
        // transform along k, then j, then i
        let mut a = values.to_vec();
        let mut b = vec![0.0; a.len()];
        for axis in [2usize, 1, 0] {
            let stride = q.pow(2 - axis as u32);
            for idx in 0..q * q * q {
                let pos = idx / stride % q;
                let base = idx - pos * stride;
                let mut s = 0.0;
                for mi in 0..q {
                    s += m[pos * q + mi] * a[base + mi * stride];
                }
                b[idx] = s;
            }
            std::mem::swap(&mut a, &mut b);
        }
        let coeffs = coeff_indices(q).iter().map(|[i, j, k]| a[(i * q + j) * q + k]).collect();
        Ok(ChebCoeffs { q, coeffs, octant })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn octant(&self) -> MortonKey {
        self.octant
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        coeff_position(self.q, i, j, k).map_or(0.0, |p| self.coeffs[p])
    }

    /// Nested Clenshaw evaluation at local coordinates.
    pub fn eval_local(&self, xi: &Point) -> f64 {
        let q = self.q;
        let mut pos = 0;
        let mut over_j = vec![0.0; q];
        let mut over_i = vec![0.0; q];
        let mut row = vec![0.0; q];
        for i in 0..q {
            for (j, slot) in over_j.iter_mut().enumerate().take(q - i) {
                let len = q - i - j;
                *slot = clenshaw(&self.coeffs[pos..pos + len], xi[2]);
                pos += len;
            }
            over_i[i] = clenshaw(&over_j[..q - i], xi[1]);
        }
        row.copy_from_slice(&over_i);
        clenshaw(&row, xi[0])
    }

    /// Values at the tensor nodes, the inverse of [`Self::from_node_values`]
    /// on truncated coefficient sets; separable, `O(q⁴)`.
    pub fn node_values(&self) -> Vec<f64> {
        let q = self.q;
        let nodes = chebyshev_gauss_nodes(q);
        let mut t = vec![0.0; q * q];
        for (m, x) in nodes.iter().enumerate() {
            chebyshev_t(q, *x, &mut t[m * q..(m + 1) * q]);
        }
        let mut a = vec![0.0; q * q * q];
        for ([i, j, k], c) in coeff_indices(q).iter().zip(&self.coeffs) {
            a[(i * q + j) * q + k] = *c;
        }
        let mut b = vec![0.0; a.len()];
        for axis in [2usize, 1, 0] {
            let stride = q.pow(2 - axis as u32);
            for idx in 0..q * q * q {
                let m = idx / stride % q;
                let base = idx - m * stride;
                let mut s = 0.0;
                for n in 0..q {
                    s += t[m * q + n] * a[base + n * stride];
                }
                b[idx] = s;
            }
            std::mem::swap(&mut a, &mut b);
        }
        a
    }

    /// Sum over the top shell `i + j + k = q - 1`.
    pub fn truncation_estimate(&self) -> f64 {
        coeff_indices(self.q)
            .iter()
            .zip(&self.coeffs)
            .filter(|(idx, _)| idx.iter().sum::<usize>() == self.q - 1)
            .map(|(_, a)| a.abs())
            .sum()
    }

    /// Exact integral over the octant.
    pub fn integral(&self) -> f64 {
        let moment = |n: usize| if n % 2 == 1 { 0.0 } else { 2.0 / (1.0 - (n * n) as f64) };
        let s: f64 = coeff_indices(self.q)
            .iter()
            .zip(&self.coeffs)
            .map(|([i, j, k], a)| a * moment(*i) * moment(*j) * moment(*k))
            .sum();
        s * (0.5 * self.octant.side()).powi(3)
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    pub fn axpy(&mut self, a: f64, other: &ChebCoeffs) -> Result<()> {
        if other.q != self.q || other.octant != self.octant {
            return invalid("coefficient sets live on different octants or orders");
        }
        self.coeffs.iter_mut().zip(&other.coeffs).for_each(|(c, o)| *c += a * o);
        Ok(())
    }

    /// `i j k alpha` lines preceded by `# q` and `# octant` headers.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        let a = self.octant.anchor();
        writeln!(s, "# q {}", self.q).unwrap();
        writeln!(s, "# octant {} {} {} {}", self.octant.level(), a[0], a[1], a[2]).unwrap();
        for ([i, j, k], c) in coeff_indices(self.q).iter().zip(&self.coeffs) {
            writeln!(s, "{i} {j} {k} {c:e}").unwrap();
        }
        s
    }
}

fn coeff_position(q: usize, i: usize, j: usize, k: usize) -> Option<usize> {
    if i.checked_add(j)?.checked_add(k)? >= q {
        return None;
    }
    // entries before block i, then before row j inside it
    let before_i: usize = (0..i).map(|a| (q - a) * (q - a + 1) / 2).sum();
    let before_j: usize = (0..j).map(|b| q - i - b).sum();
    Some(before_i + before_j + k)
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => c0 + x * b1 - b2,
        None => 0.0,
    }
}

/// Samples `f` at the octant's tensor Chebyshev-Gauss nodes and interpolates.
pub fn cheb_approx(f: impl Fn(&Point) -> f64, octant: MortonKey, q: usize) -> Result<ChebCoeffs> {
    if q == 0 {
        return invalid("Chebyshev order must be positive");
    }
    let values: Vec<f64> = tensor_nodes(&octant, q).iter().map(f).collect();
    ChebCoeffs::from_node_values(&values, octant, q)
}

/// Evaluates at physical points, which must lie in the closed octant.
pub fn cheb_eval(c: &ChebCoeffs, points: &[Point]) -> Result<Vec<f64>> {
    let slack = 1e-12;
    points
        .iter()
        .map(|p| {
            let xi = to_local(&c.octant, p);
            if xi.iter().any(|v| !(v.abs() <= 1.0 + slack)) {
                return invalid(format!("point {p:?} outside octant {:?}", c.octant));
            }
            Ok(c.eval_local(&xi.map(|v| v.clamp(-1.0, 1.0))))
        })
        .collect()
}

pub fn truncation_estimate(c: &ChebCoeffs) -> f64 {
    c.truncation_estimate()
}

/// Parses a coefficient dump. The `# q` header is required, `# octant`
/// defaults to the root, and every index triple must appear exactly once.
pub fn parse_coeff_dump(text: &str) -> Result<ChebCoeffs> {
    let mut q: Option<usize> = None;
    let mut octant = MortonKey::ROOT;
    let mut entries: Vec<(usize, [usize; 3], f64)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        let err = |msg: String| ArenaError::Parse { line: no + 1, msg };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let f: Vec<&str> = rest.split_whitespace().collect();
            match f.first().copied() {
                Some("q") if f.len() == 2 => {
                    let v: usize = f[1].parse().map_err(|e| err(format!("order: {e}")))?;
                    if v == 0 || v > 64 {
                        return Err(err(format!("unsupported order {v}")));
                    }
                    q = Some(v);
                }
                Some("octant") if f.len() == 5 => {
                    let nums: Vec<u32> = f[1..]
                        .iter()
                        .map(|s| s.parse().map_err(|e| err(format!("octant: {e}"))))
                        .collect::<Result<_>>()?;
                    let level = u8::try_from(nums[0]).map_err(|e| err(format!("level: {e}")))?;
                    octant = MortonKey::new(level, [nums[1], nums[2], nums[3]]).map_err(|e| err(e.to_string()))?;
                }
                _ => {}
            }
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", f.len())));
        }
        let mut idx = [0usize; 3];
        for d in 0..3 {
            idx[d] = f[d].parse().map_err(|e| err(format!("index: {e}")))?;
        }
        let v: f64 = f[3].parse().map_err(|e| err(format!("coefficient: {e}")))?;
        if !v.is_finite() {
            return Err(err("non-finite coefficient".into()));
        }
        entries.push((no + 1, idx, v));
    }
    let q = q.ok_or(ArenaError::Parse { line: 0, msg: "missing '# q' header".into() })?;
    let mut coeffs = vec![f64::NAN; n_coeffs(q)];
    for (line, [i, j, k], v) in entries {
        let pos = coeff_position(q, i, j, k)
            .ok_or_else(|| ArenaError::Parse { line, msg: format!("index ({i},{j},{k}) outside order {q}") })?;
        if !coeffs[pos].is_nan() {
            return Err(ArenaError::Parse { line, msg: format!("duplicate index ({i},{j},{k})") });
        }
        coeffs[pos] = v;
    }
    if coeffs.iter().any(|c| c.is_nan()) {
        return Err(ArenaError::Parse { line: 0, msg: "missing coefficients".into() });
    }
    ChebCoeffs::new(q, coeffs, octant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_field() {
        let c = cheb_approx(|_| 5.0, MortonKey::ROOT, 6).unwrap();
        assert!((c.get(0, 0, 0) - 5.0).abs() < 1e-14);
        assert!(c.coeffs()[1..].iter().all(|a| a.abs() <= 1e-14));
        assert!(c.truncation_estimate() < 1e-14);
    }

    #[test]
    fn local_coordinate_is_t1() {
        let oct = MortonKey::new(2, [1, 3, 0]).unwrap();
        let c = cheb_approx(|p| to_local(&oct, p)[0], oct, 5).unwrap();
        for ([i, j, k], a) in coeff_indices(5).iter().zip(c.coeffs()) {
            let want = if [*i, *j, *k] == [1, 0, 0] { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-14, "({i},{j},{k}) = {a}");
        }
    }

    #[test]
    fn odd_mode_vanishes_at_center() {
        let mut c = ChebCoeffs::zeros(4, MortonKey::ROOT);
        let p = coeff_position(4, 1, 1, 0).unwrap();
        c.coeffs_mut()[p] = 1.0;
        assert_eq!(cheb_eval(&c, &[[0.5, 0.5, 0.5]]).unwrap(), vec![0.0]);
        assert!((cheb_eval(&c, &[[1.0, 1.0, 0.2]]).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn top_shell_estimate_is_its_abs_sum() {
        let mut c = ChebCoeffs::zeros(5, MortonKey::ROOT);
        let p = coeff_position(5, 2, 1, 1).unwrap();
        c.coeffs_mut()[p] = -0.3;
        assert_eq!(truncation_estimate(&c), 0.3);
    }

    #[test]
    fn outside_point_rejected() {
        let c = ChebCoeffs::zeros(3, MortonKey::new(1, [0, 0, 0]).unwrap());
        assert!(cheb_eval(&c, &[[0.6, 0.1, 0.1]]).is_err());
    }

    #[test]
    fn position_matches_enumeration() {
        for q in 1..9 {
            for (n, [i, j, k]) in coeff_indices(q).into_iter().enumerate() {
                assert_eq!(coeff_position(q, i, j, k), Some(n));
            }
        }
    }

    #[test]
    fn integral_of_polynomial() {
        let oct = MortonKey::new(1, [1, 0, 1]).unwrap();
        // ∫ x y² over [.5,1]×[0,.5]×[.5,1] = (3/8)(1/24)(1/2)
        let c = cheb_approx(|p| p[0] * p[1] * p[1], oct, 4).unwrap();
        assert!((c.integral() - 0.375 / 24.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let r = cheb_approx(|p| 1.0 / (p[0] - p[0]), MortonKey::ROOT, 3);
        assert!(matches!(r, Err(ArenaError::Approximation(_))));
    }

    #[test]
    fn node_values_invert_the_transform() {
        let key = MortonKey::new(1, [1, 0, 1]).unwrap();
        let c = cheb_approx(|p| (p[0] - 2.0 * p[1]).sin() + p[2], key, 7).unwrap();
        let vals = c.node_values();
        let back = ChebCoeffs::from_node_values(&vals, key, 7).unwrap();
        for (a, b) in back.coeffs().iter().zip(c.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (v, p) in vals.iter().zip(tensor_nodes(&key, 7)) {
            assert!((v - cheb_eval(&c, &[p]).unwrap()[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn dump_round_trip() {
        let oct = MortonKey::new(3, [1, 2, 7]).unwrap();
        let c = cheb_approx(|p| (p[0] + 2.0 * p[1]).sin() * p[2], oct, 6).unwrap();
        let back = parse_coeff_dump(&c.to_dump()).unwrap();
        assert_eq!(back, c);
        assert!(parse_coeff_dump("# q 2\n0 0 0 1\n").is_err());
        assert!(parse_coeff_dump("0 0 0 1\n").is_err());
        // index sum would overflow usize
        assert!(parse_coeff_dump("# q 2\n18446744073709551615 1 0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn eval_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in proptest::collection::vec(-1.0f64..1.0, 2 * n_coeffs(5)), x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = n_coeffs(5);
            let c1 = ChebCoeffs::new(5, seed[..n].to_vec(), MortonKey::ROOT).unwrap();
            let c2 = ChebCoeffs::new(5, seed[n..].to_vec(), MortonKey::ROOT).unwrap();
            let mut comb = c1.clone();
            comb.scale(a);
            comb.axpy(b, &c2).unwrap();
            let p = [x, y, z];
            let lhs = comb.eval_local(&p);
            let rhs = a * c1.eval_local(&p) + b * c2.eval_local(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
