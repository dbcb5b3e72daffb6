//! The 48 signed axis permutations of the cube.
//!
//! `g` acts on vectors by `(g v)[d] = sign[d] * v[perm[d]]`.

use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    pub perm: [usize; 3],
    pub sign: [i32; 3],
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn group() -> &'static [SignedPerm] {
    static G: OnceLock<Vec<SignedPerm>> = OnceLock::new();
    G.get_or_init(|| {
        let mut out = Vec::with_capacity(48);
        for perm in PERMS {
            for bits in 0..8 {
                let sign = [0, 1, 2].map(|d| if bits >> d & 1 == 1 { -1 } else { 1 });
                out.push(SignedPerm { perm, sign });
            }
        }
        out
    })
}

impl SignedPerm {
    pub const IDENTITY: SignedPerm = SignedPerm { perm: [0, 1, 2], sign: [1, 1, 1] };

    pub fn apply_i(&self, v: [i32; 3]) -> [i32; 3] {
        std::array::from_fn(|d| self.sign[d] * v[self.perm[d]])
    }

    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|d| self.sign[d] as f64 * v[self.perm[d]])
    }

    /// Action on grid indices `0..n` per axis, reflecting with `n-1-i`.
    pub fn apply_grid(&self, g: [usize; 3], n: usize) -> [usize; 3] {
        std::array::from_fn(|d| {
            let v = g[self.perm[d]];
            if self.sign[d] < 0 {
                n - 1 - v
            } else {
                v
            }
        })
    }

    /// `T_c(gξ) = sign · T_{c'}(ξ)` for tensor Chebyshev index `c`.
    pub fn map_cheb_index(&self, c: [usize; 3]) -> ([usize; 3], f64) {
        let mut out = [0; 3];
        let mut sign = 1.0;
        for d in 0..3 {
            out[self.perm[d]] = c[d];
            if self.sign[d] < 0 && c[d] % 2 == 1 {
                sign = -sign;
            }
        }
        (out, sign)
    }
}

/// Canonical representative of an integer offset: absolute values sorted in
/// decreasing order. Returns it with a group element `g` such that
/// `g · canonical = offset`.
pub fn canonicalize(offset: [i32; 3]) -> ([i32; 3], SignedPerm) {
    let mut canon = offset.map(i32::abs);
    canon.sort_unstable_by(|a, b| b.cmp(a));
    for g in group() {
        if g.apply_i(canon) == offset {
            return (canon, *g);
        }
    }
    unreachable!("every offset is a signed permutation of its sorted absolute values")
}

/// Elements fixing `v`.
pub fn stabilizer(v: [i32; 3]) -> Vec<SignedPerm> {
    group().iter().copied().filter(|g| g.apply_i(v) == v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_is_closed_and_distinct() {
        let g = group();
        assert_eq!(g.len(), 48);
        let v = [1, 2, 3];
        let images: std::collections::HashSet<_> = g.iter().map(|e| e.apply_i(v)).collect();
        assert_eq!(images.len(), 48);
    }

    #[test]
    fn canonical_round_trip() {
        for x in -3..=3 {
            for y in -3..=3 {
                for z in -3..=3 {
                    let (c, g) = canonicalize([x, y, z]);
                    assert_eq!(g.apply_i(c), [x, y, z]);
                    assert!(c[0] >= c[1] && c[1] >= c[2] && c[2] >= 0);
                }
            }
        }
    }

    #[test]
    fn stabilizer_orders() {
        assert_eq!(stabilizer([0, 0, 0]).len(), 48);
        assert_eq!(stabilizer([2, 0, 0]).len(), 8);
        assert_eq!(stabilizer([2, 2, 0]).len(), 4);
        assert_eq!(stabilizer([2, 2, 2]).len(), 6);
        assert_eq!(stabilizer([3, 1, 1]).len(), 2);
    }

    #[test]
    fn chebyshev_index_map_matches_evaluation() {
        let t = |n: usize, x: f64| (n as f64 * x.acos()).cos();
        let xi = [0.3, -0.7, 0.45];
        for g in group() {
            let gx = g.apply(&xi);
            let c = [3, 0, 2];
            let lhs = t(c[0], gx[0]) * t(c[1], gx[1]) * t(c[2], gx[2]);
            let (c2, s) = g.map_cheb_index(c);
            let rhs = s * t(c2[0], xi[0]) * t(c2[1], xi[1]) * t(c2[2], xi[2]);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }
}
